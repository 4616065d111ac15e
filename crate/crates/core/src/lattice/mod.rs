//! Exact kernels of continuous-time nearest-neighbour walks on `Z^d`.
//!
//! A walk with generator `kappa * Delta` jumps to each of its `2d` neighbours
//! at rate `kappa`, so every coordinate is a difference of two independent
//! Poisson processes. Its transition probability factorises into
//! exponentially scaled modified Bessel functions, `e^{-2 kappa t} I_z(2 kappa t)`
//! per coordinate, and its Laplace transforms are lattice Fourier integrals
//! of `1 / (lambda + kappa phi(k))` with `phi(k) = 2 sum_i (1 - cos k_i)`.

mod bessel;
mod fourier;
mod kernels;

use serde::{Deserialize, Serialize};

use crate::error::{PamError, Result};

pub use bessel::{ive, ive_table};
pub use fourier::{fft_table, trapezoid_sum, FourierGrid};
pub use kernels::{
    chernoff_radius, chernoff_tail, green_function, green_table, resolvent_fourier,
    resolvent_kernel, resolvent_time, transition_probability, transition_probability_with,
    two_walk_resolvent_kernel, two_walk_resolvent_time_domain, two_walk_row_table,
    two_walk_table, LatticeTable, TABLE_BUDGET,
};

/// A nearest-neighbour walk on `Z^d` with generator `kappa * Delta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WalkParams {
    pub d: usize,
    pub kappa: f64,
}

impl WalkParams {
    pub fn new(d: usize, kappa: f64) -> Result<Self> {
        if d == 0 {
            return Err(PamError::Domain("dimension d must be at least 1".into()));
        }
        if !(kappa > 0.0 && kappa.is_finite()) {
            return Err(PamError::Domain(format!("rate must be positive, got {kappa}")));
        }
        Ok(Self { d, kappa })
    }
}

/// A site of `Z^d` (or of the product space `Z^{pd}`).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LatticePoint(pub Vec<i64>);

impl LatticePoint {
    pub fn new(coords: Vec<i64>) -> Self {
        Self(coords)
    }

    pub fn origin(d: usize) -> Self {
        Self(vec![0; d])
    }

    /// `e_axis` scaled by `len`.
    pub fn axis(d: usize, axis: usize, len: i64) -> Self {
        let mut c = vec![0; d];
        c[axis] = len;
        Self(c)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[i64] {
        &self.0
    }

    pub fn neg(&self) -> Self {
        Self(self.0.iter().map(|c| -c).collect())
    }

    /// Sup norm.
    pub fn max_abs(&self) -> i64 {
        self.0.iter().map(|c| c.abs()).max().unwrap_or(0)
    }

    pub fn l1(&self) -> i64 {
        self.0.iter().map(|c| c.abs()).sum()
    }

    pub(crate) fn check_dim(&self, d: usize) -> Result<()> {
        if self.dim() != d {
            return Err(PamError::Dimension(format!(
                "point has dimension {}, expected {d}",
                self.dim()
            )));
        }
        Ok(())
    }
}

impl From<Vec<i64>> for LatticePoint {
    fn from(c: Vec<i64>) -> Self {
        Self(c)
    }
}

impl From<&[i64]> for LatticePoint {
    fn from(c: &[i64]) -> Self {
        Self(c.to_vec())
    }
}

/// Accuracy knobs shared by the quadrature-based kernels.
///
/// `quadrature_nodes` is the starting node count per axis for the Fourier
/// trapezoid rule (doubled until converged). `series_cutoff` is the number of
/// extra orders carried by the Bessel backward recurrence beyond its adaptive
/// start, and the minimum number of terms of the small-argument series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelAccuracy {
    pub abs_tol: f64,
    pub quadrature_nodes: usize,
    pub series_cutoff: usize,
}

impl Default for KernelAccuracy {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            quadrature_nodes: 64,
            series_cutoff: 30,
        }
    }
}

impl KernelAccuracy {
    pub fn with_tol(abs_tol: f64) -> Self {
        Self {
            abs_tol,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0) {
            return Err(PamError::Domain(format!("abs_tol must be positive, got {}", self.abs_tol)));
        }
        if self.quadrature_nodes < 16 {
            return Err(PamError::Domain(format!(
                "quadrature_nodes must be at least 16, got {}",
                self.quadrature_nodes
            )));
        }
        if self.series_cutoff == 0 {
            return Err(PamError::Domain("series_cutoff must be positive".into()));
        }
        Ok(())
    }
}
