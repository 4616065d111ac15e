//! Resolvent routes to the Lyapunov exponents: the scalar root for `p = 1`
//! and the operator `T_lambda = T1 + T2` on `l2(Z^d)` for `p = 2`.
//!
//! `T1 f(x) = sum_y r2(-x, y) f(y)` and `T2 f(x) = sum_y r2(y - x, 0) f(y)`,
//! where `r2` is the resolvent kernel of the two-walk generator `A^2`.
//! `lambda_2` is the `lambda` at which the top of `T_lambda` equals `1 / gamma`.

use crate::error::{PamError, Result};
use crate::lattice::{
    green_function, resolvent_kernel, two_walk_resolvent_time_domain, two_walk_row_table, two_walk_table,
    KernelAccuracy, LatticePoint, WalkParams,
};
use crate::model::ModelParams;
use crate::par;

/// Width of the final bracket: `1e-8 min(1, hi)`.
pub const LAMBDA_TOL: f64 = 1e-8;
/// Kernel accuracy used inside root finding.
pub const ROOT_KERNEL_TOL: f64 = 1e-12;

/// Bisection for a decreasing `f` with `f(lo) > 0 > f(hi)`. Midpoints are
/// geometric while the bracket spans more than a factor of four.
fn bisect(mut lo: f64, mut hi: f64, mut f: impl FnMut(f64) -> Result<f64>) -> Result<f64> {
    while hi - lo > LAMBDA_TOL * hi.min(1.0) {
        let mid = if hi > 4.0 * lo { (lo * hi).sqrt() } else { 0.5 * (lo + hi) };
        if f(mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// `lambda_1`: the root of `gamma r^{kappa+rho}_lambda(0) = 1` on `(0, gamma]`,
/// or `None` when `d >= 3` and `gamma G_{kappa+rho}(0) <= 1` (no positive root).
pub fn lambda1_root(params: &ModelParams) -> Result<Option<f64>> {
    params.validate()?;
    if !(params.gamma > 0.0) {
        return Err(PamError::Domain(format!(
            "the catalyst root needs gamma > 0, got {}",
            params.gamma
        )));
    }
    let walk = params.merged_walk();
    let acc = KernelAccuracy::with_tol(ROOT_KERNEL_TOL);
    let origin = LatticePoint::origin(params.d);
    let gamma = params.gamma;
    if params.d >= 3 && gamma * merged_green_at_origin(params)? <= 1.0 {
        return Ok(None);
    }
    let f = |lambda: f64| -> Result<f64> { Ok(gamma * resolvent_kernel(&walk, lambda, &origin, &acc)? - 1.0) };
    // f(gamma) < 0 because r_lambda(0) < 1 / lambda; walk down to a positive value
    let mut lo = 0.5 * gamma;
    let mut steps = 0;
    while f(lo)? <= 0.0 {
        lo *= 0.5;
        steps += 1;
        if steps > 200 {
            return Err(PamError::Bracket { lo, hi: gamma });
        }
    }
    bisect(lo, (2.0 * lo).min(gamma), f).map(Some)
}

/// A symmetric matrix on the sites of `[-radius, radius]^d`, row-major.
struct DenseSym {
    n: usize,
    a: Vec<f64>,
}

impl DenseSym {
    fn matvec(&self, v: &[f64]) -> Vec<f64> {
        let n = self.n;
        par::map_range(n, |i| self.a[i * n..(i + 1) * n].iter().zip(v).map(|(a, b)| a * b).sum())
    }
}

fn box_sites(d: usize, radius: usize) -> Vec<Vec<i64>> {
    let side = 2 * radius + 1;
    (0..side.pow(d as u32))
        .map(|mut idx| {
            let mut x = vec![0i64; d];
            for a in (0..d).rev() {
                x[a] = (idx % side) as i64 - radius as i64;
                idx /= side;
            }
            x
        })
        .collect()
}

/// Which parts of `T_lambda` to assemble.
#[derive(Clone, Copy, PartialEq)]
enum Parts {
    Both,
    OnlyT2,
}

fn assemble(kappa: f64, rho: f64, lambda: f64, d: usize, radius: usize, parts: Parts, acc: &KernelAccuracy) -> Result<DenseSym> {
    let sites = box_sites(d, radius);
    let n = sites.len();
    // kernel values: from FFT tables when affordable, pointwise otherwise
    let row: Box<dyn Fn(&[i64]) -> f64 + Sync> = match two_walk_row_table(kappa, rho, lambda, d, 2 * radius, acc) {
        Ok(t) => Box::new(move |z: &[i64]| t.get(z).expect("within twice the radius")),
        Err(PamError::Budget { .. }) | Err(PamError::Tolerance(_)) => {
            let zs = box_sites(d, 2 * radius);
            let vals: Result<Vec<f64>> = par::map_range(zs.len(), |i| {
                two_walk_resolvent_time_domain(kappa, rho, lambda, &zs[i].clone().into(), &LatticePoint::origin(d), acc)
            })
            .into_iter()
            .collect();
            let vals = vals?;
            let r = 2 * radius as i64;
            let side = 4 * radius + 1;
            Box::new(move |z: &[i64]| vals[z.iter().fold(0usize, |a, &c| a * side + (c + r) as usize)])
        }
        Err(e) => return Err(e),
    };
    let mut a = vec![0.0; n * n];
    for (i, x) in sites.iter().enumerate() {
        for (j, y) in sites.iter().enumerate() {
            let z: Vec<i64> = y.iter().zip(x).map(|(b, c)| b - c).collect();
            a[i * n + j] = row(&z);
        }
    }
    if parts == Parts::Both {
        match two_walk_table(kappa, rho, lambda, d, radius, acc) {
            Ok(t) => {
                for (i, x) in sites.iter().enumerate() {
                    for (j, y) in sites.iter().enumerate() {
                        let key: Vec<i64> = x.iter().map(|c| -c).chain(y.iter().copied()).collect();
                        a[i * n + j] += t.get(&key).expect("within the radius");
                    }
                }
            }
            Err(PamError::Budget { .. }) | Err(PamError::Tolerance(_)) => {
                let vals: Result<Vec<f64>> = par::map_range(n * n, |k| {
                    let (x, y) = (&sites[k / n], &sites[k % n]);
                    let mx: LatticePoint = x.iter().map(|c| -c).collect::<Vec<_>>().into();
                    two_walk_resolvent_time_domain(kappa, rho, lambda, &mx, &y.clone().into(), acc)
                })
                .into_iter()
                .collect();
                for (e, v) in a.iter_mut().zip(vals?) {
                    *e += v;
                }
            }
            Err(e) => return Err(e),
        }
    }
    // the FFT windows are symmetric only to rounding
    for i in 0..n {
        for j in 0..i {
            let m = 0.5 * (a[i * n + j] + a[j * n + i]);
            a[i * n + j] = m;
            a[j * n + i] = m;
        }
    }
    Ok(DenseSym { n, a })
}

/// Top eigenvalue of a matrix with positive entries, by power iteration from
/// the product half-sine, stopped when the Rayleigh quotient changes by less
/// than `tol` relative.
fn perron_root(m: &DenseSym, d: usize, radius: usize, tol: f64) -> Result<f64> {
    const MAXITER: usize = 100_000;
    let w = std::f64::consts::PI / (2 * radius + 2) as f64;
    let mut v: Vec<f64> = box_sites(d, radius)
        .iter()
        .map(|x| x.iter().map(|&c| ((c + radius as i64 + 1) as f64 * w).sin()).product())
        .collect();
    let mut prev = f64::NAN;
    for _ in 0..MAXITER {
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        v.iter_mut().for_each(|x| *x /= n);
        let mv = m.matvec(&v);
        let mu: f64 = v.iter().zip(&mv).map(|(a, b)| a * b).sum();
        if (mu - prev).abs() <= tol * mu {
            return Ok(mu);
        }
        prev = mu;
        v = mv;
    }
    Err(PamError::NoConvergence {
        iterations: MAXITER,
        residual: f64::NAN,
    })
}

fn check_box(lambda: f64, d: usize, tol: f64) -> Result<()> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(PamError::Domain(format!("lambda must be positive, got {lambda}")));
    }
    if d == 0 {
        return Err(PamError::Domain("dimension d must be at least 1".into()));
    }
    if !(tol > 0.0) {
        return Err(PamError::Domain(format!("tolerance must be positive, got {tol}")));
    }
    Ok(())
}

/// Top eigenvalue of `T_lambda = T1 + T2` truncated to `[-radius, radius]^d`.
pub fn t_operator_top(kappa: f64, rho: f64, lambda: f64, d: usize, radius: usize, tol: f64) -> Result<f64> {
    check_box(lambda, d, tol)?;
    let acc = KernelAccuracy::with_tol(ROOT_KERNEL_TOL);
    let m = assemble(kappa, rho, lambda, d, radius, Parts::Both, &acc)?;
    perron_root(&m, d, radius, tol)
}

/// Top eigenvalue of the convolution part `T2` alone; tends to
/// `r^{kappa+rho}_lambda(0)` as the box grows.
pub fn t2_operator_top(kappa: f64, rho: f64, lambda: f64, d: usize, radius: usize, tol: f64) -> Result<f64> {
    check_box(lambda, d, tol)?;
    let acc = KernelAccuracy::with_tol(ROOT_KERNEL_TOL);
    let m = assemble(kappa, rho, lambda, d, radius, Parts::OnlyT2, &acc)?;
    perron_root(&m, d, radius, tol)
}

/// `lambda_2` from `top(T_lambda) = 1 / gamma` by bisection over
/// `(lambda_1, 2 gamma]` (or `(1e-6 gamma, 2 gamma]` when there is no `lambda_1`).
pub fn lambda2_via_duality(params: &ModelParams, radius: usize, tol: f64) -> Result<f64> {
    params.validate()?;
    if !(params.gamma > 0.0) {
        return Err(PamError::Domain(format!("duality needs gamma > 0, got {}", params.gamma)));
    }
    let lo = lambda1_root(params)?.unwrap_or(1e-6 * params.gamma);
    let hi = 2.0 * params.gamma;
    let target = 1.0 / params.gamma;
    let f = |lambda: f64| -> Result<f64> {
        Ok(t_operator_top(params.kappa, params.rho, lambda, params.d, radius, tol)? - target)
    };
    if !(f(lo)? > 0.0) || !(f(hi)? < 0.0) {
        return Err(PamError::Bracket { lo, hi });
    }
    bisect(lo, hi, f)
}

/// Green's function of the merged walk at the origin, `G_{kappa+rho}(0)`.
pub fn merged_green_at_origin(params: &ModelParams) -> Result<f64> {
    let walk = WalkParams::new(params.d, params.merged_rate())?;
    green_function(&walk, &LatticePoint::origin(params.d), &KernelAccuracy::with_tol(ROOT_KERNEL_TOL))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn d1_root_closed_form() {
        for (gamma, c) in [(5.0, 2.0), (8.0, 2.0), (0.3, 1.5)] {
            let params = ModelParams::new(1, c / 2.0, c / 2.0, gamma, 1).unwrap();
            let l = lambda1_root(&params).unwrap().unwrap();
            let exact = -2.0 * c + (4.0 * c * c + gamma * gamma).sqrt();
            assert!((l - exact).abs() < 2e-8, "{gamma}: {l} vs {exact}");
        }
    }

    #[test]
    fn subcritical_d3_has_no_root() {
        // G_2(0) = 0.2527.../2, so gamma = 5 is below 1 / G
        let params = ModelParams::new(3, 1.0, 1.0, 5.0, 1).unwrap();
        assert_eq!(lambda1_root(&params).unwrap(), None);
        let strong = params.with_gamma(40.0);
        let l = lambda1_root(&strong).unwrap().unwrap();
        assert!(l > 40.0 - 12.0 - 1.0 && l <= 40.0, "{l}");
        assert!(lambda1_root(&params.with_gamma(-1.0)).is_err());
    }

    #[test]
    fn t2_top_approaches_scalar_resolvent() {
        // r^2_1(0) = 1 / sqrt(1 + 8) = 1/3
        let small = t2_operator_top(1.0, 1.0, 1.0, 1, 20, 1e-12).unwrap();
        let large = t2_operator_top(1.0, 1.0, 1.0, 1, 80, 1e-12).unwrap();
        assert!(small < large && large < 1.0 / 3.0);
        assert!((large - 1.0 / 3.0).abs() < 2e-3, "{large}");
    }

    #[test]
    fn t_top_decreases_in_lambda_and_exceeds_t2() {
        let vals: Vec<f64> = [0.5, 1.0, 2.0, 4.0]
            .iter()
            .map(|&l| t_operator_top(1.0, 1.0, l, 1, 15, 1e-12).unwrap())
            .collect();
        assert!(vals.windows(2).all(|w| w[1] < w[0]), "{vals:?}");
        let r = resolvent_kernel(&WalkParams::new(1, 2.0).unwrap(), 1.0, &LatticePoint::origin(1), &KernelAccuracy::default()).unwrap();
        assert!(vals[1] > r);
    }

    #[test]
    fn pointwise_assembly_matches_tables() {
        let acc = KernelAccuracy::with_tol(1e-12);
        let a = assemble(1.0, 0.5, 1.5, 1, 4, Parts::Both, &acc).unwrap();
        let sites = box_sites(1, 4);
        for (i, x) in sites.iter().enumerate() {
            for (j, y) in sites.iter().enumerate() {
                let z: LatticePoint = vec![y[0] - x[0]].into();
                let t2 = two_walk_resolvent_time_domain(1.0, 0.5, 1.5, &z, &LatticePoint::origin(1), &acc).unwrap();
                let t1 = two_walk_resolvent_time_domain(1.0, 0.5, 1.5, &vec![-x[0]].into(), &y.clone().into(), &acc).unwrap();
                assert!((a.a[i * a.n + j] - t1 - t2).abs() < 1e-10);
                assert_eq!(a.a[i * a.n + j], a.a[j * a.n + i]);
            }
        }
    }

    #[test]
    fn subcritical_d3_duality_brackets_fail() {
        let params = ModelParams::new(3, 1.0, 1.0, 1.0, 2).unwrap();
        assert!(matches!(
            lambda2_via_duality(&params, 1, 1e-10),
            Err(PamError::Bracket { .. })
        ));
    }
}
