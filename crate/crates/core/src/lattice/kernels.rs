use std::f64::consts::PI;

use super::bessel::{ive, ive_table};
use super::fourier::{fft_table, trapezoid_sum, FourierGrid};
use super::{KernelAccuracy, LatticePoint, WalkParams};
use crate::error::{PamError, Result};

/// Upper bound on the number of trapezoid nodes in one Fourier quadrature.
const FOURIER_BUDGET: usize = 1 << 22;
/// Upper bound on the node count of a tabulated (FFT) two-walk kernel.
pub const TABLE_BUDGET: usize = 1 << 24;

/// Chernoff bound on `P(X >= m)` for one coordinate of a walk whose
/// coordinate has moment generating function `exp(c (cosh(theta) - 1))`,
/// i.e. `c = 2 kappa t` for the walk with generator `kappa * Delta`.
pub fn chernoff_tail(c: f64, m: f64) -> f64 {
    if m <= 0.0 {
        return 1.0;
    }
    if c <= 0.0 {
        return 0.0;
    }
    let rate = m * (m / c).asinh() - (m * m + c * c).sqrt() + c;
    (-rate).exp()
}

/// Smallest radius `m` with `P(|X| >= m) <= eps` by the two-sided Chernoff bound.
pub fn chernoff_radius(c: f64, eps: f64) -> usize {
    let mut m = 0usize;
    while 2.0 * chernoff_tail(c, m as f64) > eps {
        m += 1;
    }
    m
}

/// `P(X_t = z)` for the walk with generator `kappa * Delta` started at 0.
pub fn transition_probability(params: &WalkParams, t: f64, z: &LatticePoint) -> Result<f64> {
    transition_probability_with(params, t, z, &KernelAccuracy::default())
}

pub fn transition_probability_with(
    params: &WalkParams,
    t: f64,
    z: &LatticePoint,
    acc: &KernelAccuracy,
) -> Result<f64> {
    z.check_dim(params.d)?;
    if !(t >= 0.0) || !t.is_finite() {
        return Err(PamError::Domain(format!("time must be nonnegative, got {t}")));
    }
    let x = 2.0 * params.kappa * t;
    let mut p = 1.0;
    for &zi in z.coords() {
        p *= ive(zi, x, acc.series_cutoff);
    }
    if !p.is_finite() || p > 1.0 + 1e-12 {
        return Err(PamError::Overflow(format!("transition probability {p} at t={t}")));
    }
    Ok(p.min(1.0))
}

/// Nodes `s_j` of the trapezoid rule in `s = ln t` for `int_0^inf e^{-lambda t} f(t) dt`
/// where `f` is a product of `d` scaled Bessel functions.
struct LogTimeRule {
    s0: f64,
    h: f64,
    count: usize,
}

impl LogTimeRule {
    fn new(d: usize, kappa_min: f64, lambda: f64, acc: &KernelAccuracy) -> Result<Self> {
        let tol = acc.abs_tol;
        let s_lo = (tol * 1e-4).ln();
        let mut s_hi = f64::INFINITY;
        if lambda > 0.0 {
            s_hi = (60.0 / lambda).ln();
        }
        if d >= 3 {
            // integrand ~ (4 pi kappa)^{-d/2} e^{s (1 - d/2)} at large s
            let lead = (4.0 * PI * kappa_min).powf(-(d as f64) / 2.0);
            let s_poly = (lead / (tol * 1e-4)).ln() / (d as f64 / 2.0 - 1.0);
            s_hi = s_hi.min(s_poly);
        }
        if !s_hi.is_finite() {
            return Err(PamError::Dimension(format!(
                "walk in d = {d} is recurrent: the Green's function is infinite"
            )));
        }
        let s_hi = s_hi.max(s_lo + 1.0);
        // strip of analyticity has half-width ~ pi/2, so the error is ~ exp(-pi^2/h)
        let h = (PI * PI / (1e4 / tol).ln()).min(0.25);
        let count = ((s_hi - s_lo) / h).ceil() as usize + 1;
        Ok(Self { s0: s_lo, h, count })
    }

    fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.count).map(move |j| self.s0 + j as f64 * self.h)
    }
}

/// `int_0^inf e^{-lambda t} P(X_t = z) dt` by time integration of the
/// Bessel-product transition probability (the "time route").
pub fn resolvent_time(
    params: &WalkParams,
    lambda: f64,
    z: &LatticePoint,
    acc: &KernelAccuracy,
) -> Result<f64> {
    z.check_dim(params.d)?;
    acc.validate()?;
    if lambda < 0.0 || !lambda.is_finite() {
        return Err(PamError::Domain(format!("lambda must be nonnegative, got {lambda}")));
    }
    let rule = LogTimeRule::new(params.d, params.kappa, lambda, acc)?;
    let mut sum = 0.0;
    for s in rule.nodes() {
        let t = s.exp();
        let x = 2.0 * params.kappa * t;
        let mut g = t * (-lambda * t).exp();
        for &zi in z.coords() {
            g *= ive(zi, x, acc.series_cutoff);
        }
        sum += g;
    }
    Ok(sum * rule.h)
}

/// `(2 pi)^{-d} int 1 / (lambda + kappa phi(k)) cos(k.z) dk` by the trapezoid
/// rule, doubling the node count until successive values agree.
pub fn resolvent_fourier(
    params: &WalkParams,
    lambda: f64,
    z: &LatticePoint,
    acc: &KernelAccuracy,
) -> Result<f64> {
    z.check_dim(params.d)?;
    acc.validate()?;
    if !(lambda > 0.0) {
        return Err(PamError::Domain(format!("lambda must be positive, got {lambda}")));
    }
    let d = params.d;
    let eval = |nodes: usize| {
        let grid = FourierGrid::new(nodes, d);
        trapezoid_sum(&grid, z.coords(), |k| {
            let phi: f64 = k.iter().map(|&j| 2.0 * (1.0 - grid.cos(j))).sum();
            1.0 / (lambda + params.kappa * phi)
        })
    };
    let mut nodes = acc.quadrature_nodes.max(2 * z.max_abs() as usize + 2);
    let mut prev = eval(nodes);
    loop {
        let next_nodes = nodes * 2;
        if next_nodes.pow(d as u32) > FOURIER_BUDGET {
            return Err(PamError::Tolerance(format!(
                "Fourier quadrature did not converge within {nodes} nodes per axis"
            )));
        }
        let next = eval(next_nodes);
        if (next - prev).abs() < acc.abs_tol {
            return Ok(next);
        }
        nodes = next_nodes;
        prev = next;
    }
}

/// Resolvent kernel `r^kappa_lambda(z) = int_0^inf e^{-lambda t} P_0(X_t = z) dt`.
///
/// Uses the Fourier trapezoid rule when its predicted node count fits the
/// budget (the aliasing error decays like `exp(-alpha N)` with
/// `cosh(alpha) = 1 + lambda / (2 kappa)`), and the time route otherwise.
pub fn resolvent_kernel(
    params: &WalkParams,
    lambda: f64,
    z: &LatticePoint,
    acc: &KernelAccuracy,
) -> Result<f64> {
    z.check_dim(params.d)?;
    acc.validate()?;
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(PamError::Domain(format!("lambda must be positive, got {lambda}")));
    }
    let alpha = (1.0 + lambda / (2.0 * params.kappa)).acosh();
    let predicted = z.max_abs() as f64 + (4.0 / (lambda * acc.abs_tol)).ln() / alpha;
    let per_axis = (2.0 * predicted).max(acc.quadrature_nodes as f64);
    if per_axis.powi(params.d as i32) <= FOURIER_BUDGET as f64 {
        match resolvent_fourier(params, lambda, z, acc) {
            Ok(v) => return Ok(v),
            Err(PamError::Tolerance(_)) => {}
            Err(e) => return Err(e),
        }
    }
    resolvent_time(params, lambda, z, acc)
}

/// Green's function `G_kappa(z) = int_0^inf P_0(X_t = z) dt`, finite for `d >= 3`.
pub fn green_function(params: &WalkParams, z: &LatticePoint, acc: &KernelAccuracy) -> Result<f64> {
    if params.d <= 2 {
        return Err(PamError::Dimension(format!(
            "walk in d = {} is recurrent: the Green's function is infinite",
            params.d
        )));
    }
    resolvent_time(params, 0.0, z, acc)
}

/// Values of a function on the cube `[-radius, radius]^d`, row-major with the
/// last coordinate fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeTable {
    pub d: usize,
    pub radius: usize,
    pub values: Vec<f64>,
}

impl LatticeTable {
    pub fn side(&self) -> usize {
        2 * self.radius + 1
    }

    pub fn index(&self, z: &[i64]) -> Option<usize> {
        debug_assert_eq!(z.len(), self.d);
        let r = self.radius as i64;
        let mut idx = 0usize;
        for &c in z {
            if c.abs() > r {
                return None;
            }
            idx = idx * self.side() + (c + r) as usize;
        }
        Some(idx)
    }

    pub fn get(&self, z: &[i64]) -> Option<f64> {
        self.index(z).map(|i| self.values[i])
    }

    /// Coordinates of the `idx`-th entry.
    pub fn point(&self, mut idx: usize) -> Vec<i64> {
        let side = self.side();
        let mut z = vec![0i64; self.d];
        for a in (0..self.d).rev() {
            z[a] = (idx % side) as i64 - self.radius as i64;
            idx /= side;
        }
        z
    }

    fn from_fn(d: usize, radius: usize, f: impl Fn(&[i64]) -> f64) -> Self {
        let side = 2 * radius + 1;
        let len = side.pow(d as u32);
        let mut t = Self {
            d,
            radius,
            values: Vec::with_capacity(len),
        };
        for i in 0..len {
            let z = t.point(i);
            let v = f(&z);
            t.values.push(v);
        }
        t
    }
}

/// `G_kappa(z)` for every `z` in `[-radius, radius]^d` (time route with shared
/// Bessel tables). Requires `d >= 3`.
pub fn green_table(params: &WalkParams, radius: usize, acc: &KernelAccuracy) -> Result<LatticeTable> {
    if params.d <= 2 {
        return Err(PamError::Dimension(format!(
            "walk in d = {} is recurrent: the Green's function is infinite",
            params.d
        )));
    }
    acc.validate()?;
    let rule = LogTimeRule::new(params.d, params.kappa, 0.0, acc)?;
    let mut table = LatticeTable::from_fn(params.d, radius, |_| 0.0);
    let points: Vec<Vec<usize>> = (0..table.values.len())
        .map(|i| table.point(i).iter().map(|c| c.unsigned_abs() as usize).collect())
        .collect();
    for s in rule.nodes() {
        let t = s.exp();
        let bessel = ive_table(radius, 2.0 * params.kappa * t, acc.series_cutoff);
        for (v, z) in table.values.iter_mut().zip(&points) {
            let mut g = t;
            for &zi in z {
                g *= bessel[zi];
            }
            *v += g;
        }
    }
    for v in &mut table.values {
        *v *= rule.h;
    }
    Ok(table)
}

fn check_two_walk(kappa: f64, rho: f64, lambda: f64) -> Result<()> {
    if !(kappa > 0.0 && rho > 0.0) {
        return Err(PamError::Domain(format!(
            "rates must be positive, got kappa={kappa}, rho={rho}"
        )));
    }
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(PamError::Domain(format!("lambda must be positive, got {lambda}")));
    }
    Ok(())
}

/// Symbol `lambda + kappa phi(k1) + kappa phi(k2) + rho phi(k1 + k2)` at node
/// indices `k = (k1, k2)` (each of length `d`).
fn two_walk_symbol(grid: &FourierGrid, kappa: f64, rho: f64, lambda: f64, k: &[usize]) -> f64 {
    let d = k.len() / 2;
    let mut s = lambda;
    for i in 0..d {
        let a = k[i];
        let b = k[d + i];
        s += 2.0 * kappa * (1.0 - grid.cos(a));
        s += 2.0 * kappa * (1.0 - grid.cos(b));
        s += 2.0 * rho * (1.0 - grid.cos(a + b));
    }
    s
}

/// `r^(2)_lambda(x1, x2) = int_0^inf e^{-lambda t} P(Z_t = (x1, x2)) dt` for the
/// walk on `Z^{2d}` with generator `A^2`: two independent `kappa`-walks shifted
/// by one shared `rho`-walk. Fourier quadrature over `[0, 2 pi)^{2d}`.
pub fn two_walk_resolvent_kernel(
    kappa: f64,
    rho: f64,
    lambda: f64,
    x1: &LatticePoint,
    x2: &LatticePoint,
    acc: &KernelAccuracy,
) -> Result<f64> {
    check_two_walk(kappa, rho, lambda)?;
    acc.validate()?;
    x2.check_dim(x1.dim())?;
    let d = x1.dim();
    let z: Vec<i64> = x1.coords().iter().chain(x2.coords()).copied().collect();
    let eval = |nodes: usize| {
        let grid = FourierGrid::new(nodes, 2 * d);
        trapezoid_sum(&grid, &z, |k| 1.0 / two_walk_symbol(&grid, kappa, rho, lambda, k))
    };
    let reach = x1.max_abs().max(x2.max_abs()) as usize;
    let mut nodes = acc.quadrature_nodes.max(2 * reach + 2);
    let mut prev = eval(nodes);
    loop {
        let next_nodes = nodes * 2;
        if next_nodes.pow(2 * d as u32) > TABLE_BUDGET {
            return Err(PamError::Tolerance(format!(
                "two-walk quadrature did not converge within {nodes} nodes per axis"
            )));
        }
        let next = eval(next_nodes);
        if (next - prev).abs() < acc.abs_tol {
            return Ok(next);
        }
        nodes = next_nodes;
        prev = next;
    }
}

/// Time-domain evaluation of the two-walk kernel:
/// `int e^{-lambda t} sum_y p^rho_t(y) p^kappa_t(x1 - y) p^kappa_t(x2 - y) dt`.
/// Every factor is a product over coordinates, so the `y`-sum splits into `d`
/// one-dimensional convolutions.
pub fn two_walk_resolvent_time_domain(
    kappa: f64,
    rho: f64,
    lambda: f64,
    x1: &LatticePoint,
    x2: &LatticePoint,
    acc: &KernelAccuracy,
) -> Result<f64> {
    check_two_walk(kappa, rho, lambda)?;
    acc.validate()?;
    x2.check_dim(x1.dim())?;
    let d = x1.dim();
    let rule = LogTimeRule::new(d, kappa.min(rho), lambda, acc)?;
    let reach = x1.max_abs().max(x2.max_abs()) as usize;
    let mut sum = 0.0;
    for s in rule.nodes() {
        let t = s.exp();
        let m = chernoff_radius(2.0 * kappa.max(rho) * t, acc.abs_tol * 1e-6) + 2;
        let order = m + reach;
        let tr = ive_table(order, 2.0 * rho * t, acc.series_cutoff);
        let tk = ive_table(order, 2.0 * kappa * t, acc.series_cutoff);
        let mut g = t * (-lambda * t).exp();
        for i in 0..d {
            let (a, b) = (x1.coords()[i], x2.coords()[i]);
            let mut conv = 0.0;
            for y in -(m as i64)..=(m as i64) {
                conv += tr[y.unsigned_abs() as usize]
                    * tk[(a - y).unsigned_abs() as usize]
                    * tk[(b - y).unsigned_abs() as usize];
            }
            g *= conv;
        }
        sum += g;
    }
    Ok(sum * rule.h)
}

fn wrap(c: i64, n: usize) -> usize {
    c.rem_euclid(n as i64) as usize
}

fn window_from_fft(fft: &[f64], nodes: usize, dims: usize, radius: usize) -> LatticeTable {
    LatticeTable::from_fn(dims, radius, |z| {
        let mut idx = 0usize;
        for &c in z {
            idx = idx * nodes + wrap(c, nodes);
        }
        fft[idx]
    })
}

fn converge_table<F>(start: usize, budget_dims: usize, tol: f64, build: F) -> Result<LatticeTable>
where
    F: Fn(usize) -> LatticeTable,
{
    let mut nodes = start.next_power_of_two();
    let sites = nodes.checked_pow(budget_dims as u32).unwrap_or(usize::MAX);
    if sites > TABLE_BUDGET {
        return Err(PamError::Budget {
            sites,
            budget: TABLE_BUDGET,
        });
    }
    let mut prev = build(nodes);
    loop {
        let next_nodes = nodes * 2;
        if next_nodes.pow(budget_dims as u32) > TABLE_BUDGET {
            return Err(PamError::Tolerance(format!(
                "kernel table did not converge within {nodes} nodes per axis"
            )));
        }
        let next = build(next_nodes);
        let diff = prev
            .values
            .iter()
            .zip(&next.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        if diff < tol {
            return Ok(next);
        }
        nodes = next_nodes;
        prev = next;
    }
}

/// `r^(2)_lambda(x1, x2)` for all `(x1, x2)` in `[-radius, radius]^{2d}`,
/// returned as a table over `Z^{2d}` (coordinates `x1` then `x2`).
pub fn two_walk_table(
    kappa: f64,
    rho: f64,
    lambda: f64,
    d: usize,
    radius: usize,
    acc: &KernelAccuracy,
) -> Result<LatticeTable> {
    check_two_walk(kappa, rho, lambda)?;
    acc.validate()?;
    let dims = 2 * d;
    let start = acc.quadrature_nodes.max(2 * radius + 2);
    converge_table(start, dims, acc.abs_tol, |nodes| {
        let grid = FourierGrid::new(nodes, dims);
        let fft = fft_table(nodes, dims, |k| {
            1.0 / two_walk_symbol(&grid, kappa, rho, lambda, k)
        });
        window_from_fft(&fft, nodes, dims, radius)
    })
}

/// `z -> r^(2)_lambda(z, 0)` on `[-radius, radius]^d`, the kernel of the
/// convolution operator `T^(2)`.
pub fn two_walk_row_table(
    kappa: f64,
    rho: f64,
    lambda: f64,
    d: usize,
    radius: usize,
    acc: &KernelAccuracy,
) -> Result<LatticeTable> {
    check_two_walk(kappa, rho, lambda)?;
    acc.validate()?;
    let start = acc.quadrature_nodes.max(2 * radius + 2);
    converge_table(start, 2 * d, acc.abs_tol, |nodes| {
        let grid = FourierGrid::new(nodes, 2 * d);
        let inner = nodes.pow(d as u32);
        // average of the inverse symbol over k2, for each k1
        let mut k = vec![0usize; 2 * d];
        let marginal = |k1: &[usize], k: &mut Vec<usize>| {
            k[..d].copy_from_slice(k1);
            let mut acc_sum = 0.0;
            for flat in 0..inner {
                let mut f = flat;
                for a in (0..d).rev() {
                    k[d + a] = f % nodes;
                    f /= nodes;
                }
                acc_sum += 1.0 / two_walk_symbol(&grid, kappa, rho, lambda, k);
            }
            acc_sum / inner as f64
        };
        let mut marg = Vec::with_capacity(inner);
        let mut k1 = vec![0usize; d];
        for flat in 0..inner {
            let mut f = flat;
            for a in (0..d).rev() {
                k1[a] = f % nodes;
                f /= nodes;
            }
            marg.push(marginal(&k1, &mut k));
        }
        let fft = fft_table(nodes, d, |k1| {
            let mut flat = 0usize;
            for &c in k1 {
                flat = flat * nodes + c;
            }
            marg[flat]
        });
        window_from_fft(&fft, nodes, d, radius)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn walk(d: usize, kappa: f64) -> WalkParams {
        WalkParams::new(d, kappa).unwrap()
    }

    #[test]
    fn transition_probability_initial_condition() {
        let w = walk(1, 1.0);
        assert_eq!(transition_probability(&w, 0.0, &LatticePoint::origin(1)).unwrap(), 1.0);
        assert_eq!(transition_probability(&w, 0.0, &vec![3].into()).unwrap(), 0.0);
        assert!(transition_probability(&w, -1.0, &vec![0].into()).is_err());
        assert!(transition_probability(&w, 1.0, &vec![0, 0].into()).is_err());
    }

    #[test]
    fn transition_probability_is_a_product_over_coordinates() {
        let w2 = walk(2, 1.0);
        let w1 = walk(1, 1.0);
        let p = transition_probability(&w2, 1.7, &vec![1, -2].into()).unwrap();
        let a = transition_probability(&w1, 1.7, &vec![1].into()).unwrap();
        let b = transition_probability(&w1, 1.7, &vec![-2].into()).unwrap();
        assert!((p - a * b).abs() < 1e-16);
    }

    #[test]
    fn large_times_do_not_overflow() {
        let w = walk(3, 2.0);
        let p = transition_probability(&w, 1e6, &vec![5, 0, -7].into()).unwrap();
        let lead = (2.0 * PI * 4e6f64).powf(-1.5);
        assert!((p / lead - 1.0).abs() < 1e-4);
    }

    #[test]
    fn normalisation_with_chernoff_remainder() {
        let acc = KernelAccuracy::default();
        for d in 1..=2 {
            for kappa in [0.5, 2.0] {
                for t in [0.1, 3.0, 20.0] {
                    let w = walk(d, kappa);
                    let c = 2.0 * kappa * t;
                    let r = chernoff_radius(c, acc.abs_tol) as i64;
                    let mut total = 0.0;
                    let mut idx = vec![-r; d];
                    loop {
                        total += transition_probability(&w, t, &idx.clone().into()).unwrap();
                        let mut a = d;
                        loop {
                            if a == 0 {
                                break;
                            }
                            a -= 1;
                            idx[a] += 1;
                            if idx[a] <= r {
                                a = usize::MAX;
                                break;
                            }
                            idx[a] = -r;
                        }
                        if a != usize::MAX {
                            break;
                        }
                    }
                    let remainder = d as f64 * 2.0 * chernoff_tail(c, (r + 1) as f64);
                    assert!(total + remainder >= 1.0 - 10.0 * acc.abs_tol, "{d} {kappa} {t}");
                    assert!(total <= 1.0 + 1e-12);
                }
            }
        }
    }

    #[test]
    fn resolvent_one_dimensional_closed_form() {
        // (2 pi)^{-1} int dk / (lambda + 2 kappa (1 - cos k)) = 1 / sqrt(lambda^2 + 4 kappa lambda)
        let acc = KernelAccuracy::default();
        for (kappa, lambda) in [(1.0, 1.0), (2.0, 0.3), (0.5, 7.0)] {
            let w = walk(1, kappa);
            let exact = 1.0 / (lambda * lambda + 4.0 * kappa * lambda).sqrt();
            let f = resolvent_fourier(&w, lambda, &LatticePoint::origin(1), &acc).unwrap();
            let t = resolvent_time(&w, lambda, &LatticePoint::origin(1), &acc).unwrap();
            assert!((f - exact).abs() < acc.abs_tol, "fourier {f} vs {exact}");
            assert!((t - exact).abs() < acc.abs_tol, "time {t} vs {exact}");
        }
    }

    #[test]
    fn resolvent_routes_agree() {
        let acc = KernelAccuracy::default();
        for d in 1..=3 {
            let w = walk(d, 1.3);
            for lambda in [0.2, 1.0, 5.0] {
                for z in [vec![0i64; d], {
                    let mut v = vec![1i64; d];
                    v[0] = -3;
                    v
                }] {
                    let z: LatticePoint = z.into();
                    let f = resolvent_fourier(&w, lambda, &z, &acc).unwrap();
                    let t = resolvent_time(&w, lambda, &z, &acc).unwrap();
                    assert!((f - t).abs() < acc.abs_tol, "d={d} lambda={lambda}: {f} vs {t}");
                }
            }
        }
    }

    #[test]
    fn resolvent_bounds_and_symmetry() {
        let acc = KernelAccuracy::default();
        let w = walk(2, 0.7);
        for lambda in [0.05, 0.5, 4.0] {
            let r0 = resolvent_kernel(&w, lambda, &LatticePoint::origin(2), &acc).unwrap();
            assert!(r0 >= 1.0 / (lambda + 4.0 * 0.7) && r0 <= 1.0 / lambda);
            let z: LatticePoint = vec![2, -1].into();
            let a = resolvent_kernel(&w, lambda, &z, &acc).unwrap();
            let b = resolvent_kernel(&w, lambda, &z.neg(), &acc).unwrap();
            assert!((a - b).abs() < 1e-14);
        }
        assert!(resolvent_kernel(&w, 0.0, &LatticePoint::origin(2), &acc).is_err());
    }

    #[test]
    fn resolvent_at_huge_lambda_is_the_no_jump_term() {
        let w = walk(1, 1.0);
        let lambda = 1e6;
        let r = resolvent_kernel(&w, lambda, &LatticePoint::origin(1), &KernelAccuracy::default())
            .unwrap();
        let guess = 1.0 / (lambda + 2.0);
        assert!((r / guess - 1.0).abs() < 0.01);
    }

    #[test]
    fn green_function_is_recurrent_in_low_dimensions() {
        let acc = KernelAccuracy::default();
        for d in [1, 2] {
            let e = green_function(&walk(d, 1.0), &LatticePoint::origin(d), &acc).unwrap_err();
            assert!(matches!(e, PamError::Dimension(_)));
        }
    }

    #[test]
    fn green_table_matches_pointwise() {
        let acc = KernelAccuracy::default();
        let w = walk(3, 1.0);
        let table = green_table(&w, 2, &acc).unwrap();
        for z in [vec![0, 0, 0], vec![1, 0, 0], vec![2, -1, 1]] {
            let g = green_function(&w, &z.clone().into(), &acc).unwrap();
            assert!((table.get(&z).unwrap() - g).abs() < 1e-15);
        }
    }

    #[test]
    fn two_walk_exchange_and_sign_symmetry() {
        let acc = KernelAccuracy::default();
        let a: LatticePoint = vec![2].into();
        let b: LatticePoint = vec![-1].into();
        let r_ab = two_walk_resolvent_kernel(1.0, 0.5, 1.5, &a, &b, &acc).unwrap();
        let r_ba = two_walk_resolvent_kernel(1.0, 0.5, 1.5, &b, &a, &acc).unwrap();
        let r_neg = two_walk_resolvent_kernel(1.0, 0.5, 1.5, &a.neg(), &b.neg(), &acc).unwrap();
        assert!((r_ab - r_ba).abs() < 1e-14);
        assert!((r_ab - r_neg).abs() < 1e-14);
    }

    #[test]
    fn two_walk_tables_match_pointwise() {
        let acc = KernelAccuracy::default();
        let (kappa, rho, lambda) = (1.0, 1.0, 2.0);
        let table = two_walk_table(kappa, rho, lambda, 1, 4, &acc).unwrap();
        let row = two_walk_row_table(kappa, rho, lambda, 1, 4, &acc).unwrap();
        for (x1, x2) in [(0, 0), (1, 0), (-3, 2), (4, -4)] {
            let p = two_walk_resolvent_kernel(
                kappa,
                rho,
                lambda,
                &vec![x1].into(),
                &vec![x2].into(),
                &acc,
            )
            .unwrap();
            assert!((table.get(&[x1, x2]).unwrap() - p).abs() < acc.abs_tol);
            if x2 == 0 {
                assert!((row.get(&[x1]).unwrap() - p).abs() < acc.abs_tol);
            }
        }
    }
}
