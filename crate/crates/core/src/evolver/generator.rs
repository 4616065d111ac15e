//! Matrix-free nearest-neighbour generators on padded boxes.
//!
//! A box of radius `R` in `n` coordinates is stored with one ghost layer,
//! i.e. as the cube `{-R-1..R+1}^n`, and the ghost layer is kept at zero.
//! Every move of the generators used here changes each coordinate by at most
//! one, so reading a ghost value is exactly the absorbing boundary rule.

use crate::model::ModelParams;
use crate::par;

use super::domain::{BoxDomain, Field};

/// Layout of a box of radius `radius` in `dims` coordinates plus a ghost shell.
#[derive(Debug, Clone)]
pub struct Padded {
    pub radius: usize,
    pub dims: usize,
    side: usize,
    len: usize,
    /// For each padded row (all coordinates but the last), whether it lies in the box.
    interior_row: Vec<bool>,
}

impl Padded {
    pub fn new(radius: usize, dims: usize) -> Self {
        let side = 2 * radius + 3;
        let rows = side.pow(dims as u32 - 1);
        let interior_row = (0..rows)
            .map(|r| {
                let mut r = r;
                (0..dims - 1).all(|_| {
                    let c = r % side;
                    r /= side;
                    c >= 1 && c <= side - 2
                })
            })
            .collect();
        Self {
            radius,
            dims,
            side,
            len: side.pow(dims as u32),
            interior_row,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn stride(&self, axis: usize) -> usize {
        self.side.pow((self.dims - 1 - axis) as u32)
    }

    pub fn index(&self, x: &[i64]) -> usize {
        let off = self.radius as i64 + 1;
        x.iter()
            .fold(0usize, |acc, &c| acc * self.side + (c + off) as usize)
    }

    /// Calls `f(padded_index, coords)` for every site of the box (not the ghosts).
    pub fn for_each_site(&self, mut f: impl FnMut(usize, &[i64])) {
        let r = self.radius as i64;
        let mut x = vec![-r; self.dims];
        loop {
            f(self.index(&x), &x);
            let mut a = self.dims;
            loop {
                if a == 0 {
                    return;
                }
                a -= 1;
                x[a] += 1;
                if x[a] <= r {
                    break;
                }
                x[a] = -r;
            }
        }
    }

    pub fn from_field(&self, f: &Field) -> Vec<f64> {
        debug_assert_eq!(f.domain.radius, self.radius);
        let mut out = vec![0.0; self.len];
        let inner = 2 * self.radius + 1;
        for (k, row) in f.values.chunks(inner).enumerate() {
            let start = self.row_start(k);
            out[start..start + inner].copy_from_slice(row);
        }
        out
    }

    pub fn to_field(&self, v: &[f64], domain: BoxDomain) -> Field {
        let inner = 2 * self.radius + 1;
        let rows = domain.len() / inner;
        let mut values = Vec::with_capacity(domain.len());
        for k in 0..rows {
            let start = self.row_start(k);
            values.extend_from_slice(&v[start..start + inner]);
        }
        Field { domain, values }
    }

    /// Padded index of the first site of the `k`-th box row.
    fn row_start(&self, mut k: usize) -> usize {
        let inner = 2 * self.radius + 1;
        let mut idx = 0usize;
        let mut mul = self.side;
        for _ in 0..self.dims - 1 {
            idx += (k % inner + 1) * mul;
            k /= inner;
            mul *= self.side;
        }
        idx + 1
    }

    /// `sum_{depth < shells} |v| / sum |v|` over the box.
    pub fn boundary_fraction(&self, v: &[f64], shells: usize) -> f64 {
        let r = self.radius;
        let mut total = 0.0;
        let mut edge = 0.0;
        let side = self.side;
        for (row, &inside) in self.interior_row.iter().enumerate() {
            if !inside {
                continue;
            }
            let mut rr = row;
            let mut m = 0usize;
            for _ in 0..self.dims - 1 {
                let c = rr % side;
                rr /= side;
                m = m.max((c as i64 - r as i64 - 1).unsigned_abs() as usize);
            }
            let base = row * side;
            for j in 1..side - 1 {
                let a = v[base + j].abs();
                total += a;
                let mm = m.max((j as i64 - r as i64 - 1).unsigned_abs() as usize);
                if r - mm < shells {
                    edge += a;
                }
            }
        }
        if total == 0.0 {
            0.0
        } else {
            edge / total
        }
    }
}

/// `(A f)(x) = diag f(x) + sum_m rate_m f(x + e_m) + pot(x) f(x)` with a sparse potential.
#[derive(Debug, Clone)]
pub struct Stencil {
    pub layout: Padded,
    moves: Vec<(isize, f64)>,
    diag: f64,
    potential: Vec<(usize, f64)>,
    /// Bound on the spectral radius, used for the explicit step size.
    pub spectral_bound: f64,
}

impl Stencil {
    /// Generator with the given move directions and rates (each direction
    /// and its negative are added), plus a potential `pot(x)`.
    pub fn new(
        radius: usize,
        dims: usize,
        directions: &[(Vec<i64>, f64)],
        pot: impl Fn(&[i64]) -> f64,
    ) -> Self {
        let layout = Padded::new(radius, dims);
        let mut moves: Vec<(isize, f64)> = Vec::new();
        let mut total_rate = 0.0;
        for (dir, rate) in directions {
            debug_assert!(dir.iter().all(|c| c.abs() <= 1));
            let off: isize = dir
                .iter()
                .enumerate()
                .map(|(a, &c)| c as isize * layout.stride(a) as isize)
                .sum();
            for o in [off, -off] {
                match moves.iter_mut().find(|(m, _)| *m == o) {
                    Some(m) => m.1 += rate,
                    None => moves.push((o, *rate)),
                }
                total_rate += rate;
            }
        }
        moves.sort_by_key(|m| m.0);
        let mut potential = Vec::new();
        let mut max_pot = 0.0f64;
        layout.for_each_site(|i, x| {
            let v = pot(x);
            if v != 0.0 {
                potential.push((i, v));
                max_pot = max_pot.max(v.abs());
            }
        });
        Self {
            layout,
            moves,
            diag: -total_rate,
            potential,
            spectral_bound: 2.0 * total_rate + max_pot,
        }
    }

    /// `H^p = A^p + gamma V^p` on `{-R..R}^{pd}`.
    pub fn hamiltonian(params: &ModelParams, radius: usize) -> Self {
        let (p, d) = (params.p, params.d);
        let n = p * d;
        let mut dirs = Vec::new();
        for a in 0..n {
            let mut e = vec![0i64; n];
            e[a] = 1;
            dirs.push((e, params.kappa));
        }
        for j in 0..d {
            let mut e = vec![0i64; n];
            for i in 0..p {
                e[i * d + j] = 1;
            }
            dirs.push((e, params.rho));
        }
        let gamma = params.gamma;
        Self::new(radius, n, &dirs, |x| {
            let hits = x.chunks(d).filter(|b| b.iter().all(|&c| c == 0)).count();
            gamma * hits as f64
        })
    }

    /// `kappa Delta_x + rho Delta_y + gamma delta(x = y)` on `(x, y) in Z^{2d}`.
    pub fn reactant_catalyst_pair(params: &ModelParams, radius: usize) -> Self {
        let d = params.d;
        let mut dirs = Vec::new();
        for a in 0..2 * d {
            let mut e = vec![0i64; 2 * d];
            e[a] = 1;
            dirs.push((e, if a < d { params.kappa } else { params.rho }));
        }
        let gamma = params.gamma;
        Self::new(radius, 2 * d, &dirs, |x| {
            if x[..d] == x[d..] {
                gamma
            } else {
                0.0
            }
        })
    }

    /// Sites carrying a nonzero potential, as `(padded index, value)`.
    pub fn potential_sites(&self) -> &[(usize, f64)] {
        &self.potential
    }

    /// `out = H f`. Ghost entries of `out` are set to zero.
    pub fn apply(&self, f: &[f64], out: &mut [f64]) {
        let side = self.layout.side;
        let rows_per_chunk = (4096 / side).max(1);
        let interior = &self.layout.interior_row;
        let moves = &self.moves;
        let diag = self.diag;
        par::for_each_chunk_mut(out, side * rows_per_chunk, |start, chunk| {
            for (k, row) in chunk.chunks_mut(side).enumerate() {
                let r = start / side + k;
                if !interior[r] {
                    row.fill(0.0);
                    continue;
                }
                let base = r * side;
                row[0] = 0.0;
                row[side - 1] = 0.0;
                for j in 1..side - 1 {
                    let i = base + j;
                    let mut acc = diag * f[i];
                    for &(o, rate) in moves {
                        acc += rate * f[(i as isize + o) as usize];
                    }
                    row[j] = acc;
                }
            }
        });
        for &(i, v) in &self.potential {
            out[i] += v * f[i];
        }
    }
}

/// `H^p f` on the box of `f` with absorbing boundary.
pub fn apply_hamiltonian(params: &ModelParams, f: &Field) -> Field {
    let st = Stencil::hamiltonian(params, f.domain.radius);
    let v = st.layout.from_field(f);
    let mut out = vec![0.0; v.len()];
    st.apply(&v, &mut out);
    st.layout.to_field(&out, f.domain)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn padded_round_trip() {
        let dom = BoxDomain::new(1, 2, 3).unwrap();
        let f = Field::from_fn(dom, |x| (x[0] * 10 + x[1]) as f64);
        let lay = Padded::new(3, 2);
        let v = lay.from_field(&f);
        assert_eq!(v[lay.index(&[2, -1])], 19.0);
        assert_eq!(lay.to_field(&v, dom), f);
    }

    #[test]
    fn p1_stencil_matches_hand_assembly() {
        let params = ModelParams::new(1, 0.7, 0.4, -1.3, 1).unwrap();
        let dom = BoxDomain::new(1, 1, 3).unwrap();
        let f = Field::from_fn(dom, |x| 1.0 + x[0] as f64 * 0.5 + (x[0] * x[0]) as f64);
        let h = apply_hamiltonian(&params, &f);
        let c = params.kappa + params.rho;
        for x in -3i64..=3 {
            let g = |y: i64| f.get(&[y]).unwrap_or(0.0);
            let mut want = c * (g(x + 1) + g(x - 1) - 2.0 * g(x));
            if x == 0 {
                want += params.gamma * g(0);
            }
            assert!((h.get(&[x]).unwrap() - want).abs() < 1e-14);
        }
    }

    #[test]
    fn p2_stencil_matches_hand_assembly() {
        let params = ModelParams::new(1, 1.0, 0.5, 2.0, 2).unwrap();
        let dom = BoxDomain::new(2, 1, 3).unwrap();
        let f = Field::from_fn(dom, |x| ((x[0] * 3 + x[1] * 7) as f64).sin() + 2.0);
        let h = apply_hamiltonian(&params, &f);
        let g = |a: i64, b: i64| f.get(&[a, b]).unwrap_or(0.0);
        for a in -3i64..=3 {
            for b in -3i64..=3 {
                let mut want = -(4.0 * params.kappa + 2.0 * params.rho) * g(a, b);
                want += params.kappa * (g(a + 1, b) + g(a - 1, b) + g(a, b + 1) + g(a, b - 1));
                want += params.rho * (g(a + 1, b + 1) + g(a - 1, b - 1));
                want += params.gamma * (((a == 0) as i32 + (b == 0) as i32) as f64) * g(a, b);
                assert!((h.get(&[a, b]).unwrap() - want).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn constants_are_harmonic_in_the_interior() {
        let params = ModelParams::new(2, 1.0, 2.0, 0.0, 2).unwrap();
        let dom = BoxDomain::new(2, 2, 3).unwrap();
        let h = apply_hamiltonian(&params, &Field::constant(dom, 3.0));
        assert_eq!(h.get(&[0, 1, -1, 0]).unwrap(), 0.0);
        assert!(h.get(&[3, 0, 0, 0]).unwrap() < 0.0);
    }

    #[test]
    fn boundary_fraction_matches_field_version() {
        let dom = BoxDomain::new(1, 2, 4).unwrap();
        let f = Field::from_fn(dom, |x| 1.0 + (x[0] + 2 * x[1]).abs() as f64);
        let lay = Padded::new(4, 2);
        let v = lay.from_field(&f);
        assert!((lay.boundary_fraction(&v, 2) - f.boundary_fraction(2)).abs() < 1e-14);
    }
}
