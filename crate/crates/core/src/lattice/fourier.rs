//! Tensorised trapezoid rule on the torus `[0, 2 pi)^D`.
//!
//! For a smooth periodic symbol `f`, the `N`-point rule applied to
//! `(2 pi)^{-D} int f(k) e^{i k.z} dk` returns the lattice function
//! periodised with period `N`, so its error is the aliased tail
//! `sum_{m != 0} g(z + m N)`. [`fft_table`] evaluates the same rule at every
//! lattice point of the period at once.

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use std::f64::consts::PI;

/// Node grid with cached cosines.
#[derive(Debug, Clone)]
pub struct FourierGrid {
    pub nodes: usize,
    pub dims: usize,
    cos: Vec<f64>,
}

impl FourierGrid {
    pub fn new(nodes: usize, dims: usize) -> Self {
        let cos = (0..nodes)
            .map(|j| (2.0 * PI * j as f64 / nodes as f64).cos())
            .collect();
        Self { nodes, dims, cos }
    }

    pub fn angle(&self, j: usize) -> f64 {
        2.0 * PI * j as f64 / self.nodes as f64
    }

    /// `cos(2 pi j / N)`.
    pub fn cos(&self, j: usize) -> f64 {
        self.cos[j % self.nodes]
    }

    /// `cos(2 pi j m / N)` for any integer `m`.
    pub fn cos_mul(&self, j: usize, m: i64) -> f64 {
        let n = self.nodes as i64;
        let idx = ((j as i64 * m) % n + n) % n;
        self.cos[idx as usize]
    }

    pub fn total(&self) -> usize {
        self.nodes.pow(self.dims as u32)
    }
}

/// `N^{-D} sum_k f(k) cos(k.z)` where `f` receives the node indices.
pub fn trapezoid_sum<F>(grid: &FourierGrid, z: &[i64], f: F) -> f64
where
    F: Fn(&[usize]) -> f64,
{
    let dims = grid.dims;
    assert_eq!(z.len(), dims);
    let n = grid.nodes;
    let mut idx = vec![0usize; dims];
    let mut sum = 0.0;
    let total = grid.total();
    let tau = 2.0 * PI / n as f64;
    for _ in 0..total {
        let phase: f64 = idx
            .iter()
            .zip(z)
            .map(|(&j, &zc)| j as f64 * zc as f64)
            .sum::<f64>()
            * tau;
        sum += f(&idx) * phase.cos();
        // odometer
        for a in (0..dims).rev() {
            idx[a] += 1;
            if idx[a] < n {
                break;
            }
            idx[a] = 0;
        }
    }
    sum / total as f64
}

/// Table of `N^{-D} sum_k f(k) e^{i k.z}` for all `z` in `[0, N)^D`
/// (row-major, last axis fastest). `f` must be even so the result is real.
pub fn fft_table<F>(nodes: usize, dims: usize, f: F) -> Vec<f64>
where
    F: Fn(&[usize]) -> f64,
{
    let total = nodes.pow(dims as u32);
    let mut data: Vec<Complex64> = Vec::with_capacity(total);
    let mut idx = vec![0usize; dims];
    for _ in 0..total {
        data.push(Complex64::new(f(&idx), 0.0));
        for a in (0..dims).rev() {
            idx[a] += 1;
            if idx[a] < nodes {
                break;
            }
            idx[a] = 0;
        }
    }
    fftn_inverse(&mut data, nodes, dims);
    let scale = 1.0 / total as f64;
    data.into_iter().map(|c| c.re * scale).collect()
}

/// Unnormalised inverse FFT along every axis of a cubic array.
fn fftn_inverse(data: &mut [Complex64], n: usize, dims: usize) {
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_inverse(n);
    let mut line = vec![Complex64::new(0.0, 0.0); n];
    let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    for axis in 0..dims {
        let stride = n.pow((dims - 1 - axis) as u32);
        let block = stride * n;
        for base in (0..data.len()).step_by(block) {
            for off in 0..stride {
                let start = base + off;
                if stride == 1 {
                    fft.process_with_scratch(&mut data[start..start + n], &mut scratch);
                    continue;
                }
                for (j, c) in line.iter_mut().enumerate() {
                    *c = data[start + j * stride];
                }
                fft.process_with_scratch(&mut line, &mut scratch);
                for (j, c) in line.iter().enumerate() {
                    data[start + j * stride] = *c;
                }
            }
        }
    }
}
