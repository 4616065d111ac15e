use serde::{Deserialize, Serialize};

use crate::error::{PamError, Result};
use crate::lattice::{chernoff_radius, LatticePoint};
use crate::model::ModelParams;

use super::domain::{BoxDomain, Field};
use super::generator::Stencil;
use super::rk::{integrate, LinearFlow, StepStats};

/// Default cap on the fraction of mass within [`LEAK_SHELLS`] of the boundary.
pub const LEAK_THRESHOLD: f64 = 1e-6;
pub const LEAK_SHELLS: usize = 2;
/// Number of radius doublings tried by the auto-sizing drivers.
const MAX_DOUBLINGS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvolveReport {
    pub steps: usize,
    pub dt_used: f64,
    pub boundary_leak: f64,
    pub rejected: usize,
    pub radius: usize,
}

impl EvolveReport {
    fn new(stats: StepStats, leak: f64, radius: usize) -> Self {
        Self {
            steps: stats.steps,
            dt_used: stats.dt_used,
            boundary_leak: leak,
            rejected: stats.rejected,
            radius,
        }
    }
}

impl LinearFlow for Stencil {
    fn len(&self) -> usize {
        self.layout.len()
    }
    fn apply(&self, f: &[f64], out: &mut [f64]) {
        Stencil::apply(self, f, out)
    }
    fn spectral_bound(&self) -> f64 {
        self.spectral_bound
    }
}

/// Starting radius `ceil(4 sqrt(2 max(kappa, rho) max(1, p) t)) + 5`.
pub fn default_radius(params: &ModelParams, t: f64) -> usize {
    let s = 2.0 * params.kappa.max(params.rho) * (params.p.max(1) as f64) * t.max(0.0);
    (4.0 * s.sqrt()).ceil() as usize + 5
}

fn check_leak(leak: f64, threshold: f64, radius: usize) -> Result<()> {
    if leak > threshold {
        return Err(PamError::Leak {
            leak,
            threshold,
            radius,
        });
    }
    Ok(())
}

fn check_times(times: &[f64]) -> Result<()> {
    if times.is_empty() {
        return Err(PamError::Domain("at least one time is required".into()));
    }
    if times.iter().any(|t| !(*t >= 0.0) || !t.is_finite()) || times.windows(2).any(|w| w[1] < w[0]) {
        return Err(PamError::Domain("times must be finite, nonnegative and sorted".into()));
    }
    Ok(())
}

/// Snapshots of `e^{t H^p} f0` at each of `times`. Fails with a leak error as
/// soon as an observed snapshot has more than `leak_threshold` of its mass in
/// the outer two shells.
pub fn evolve_series(
    params: &ModelParams,
    f0: &Field,
    times: &[f64],
    tol: f64,
    leak_threshold: f64,
) -> Result<(Vec<Field>, EvolveReport)> {
    params.validate()?;
    check_times(times)?;
    let dom = f0.domain;
    if dom.p != params.p || dom.d != params.d {
        return Err(PamError::Dimension(format!(
            "field has p = {}, d = {}; parameters have p = {}, d = {}",
            dom.p, dom.d, params.p, params.d
        )));
    }
    let st = Stencil::hamiltonian(params, dom.radius);
    let mut y = st.layout.from_field(f0);
    let mut out = Vec::with_capacity(times.len());
    let mut leak = 0.0f64;
    let stats = integrate(&st, &mut y, times, tol, |_, _, y| {
        let l = st.layout.boundary_fraction(y, LEAK_SHELLS);
        leak = leak.max(l);
        check_leak(l, leak_threshold, dom.radius)?;
        out.push(st.layout.to_field(y, dom));
        Ok(())
    })?;
    Ok((out, EvolveReport::new(stats, leak, dom.radius)))
}

/// `e^{t H^p} f0` restricted to the box of `f0`, with absorbing boundary.
pub fn evolve_field(
    params: &ModelParams,
    domain: &BoxDomain,
    f0: &Field,
    t: f64,
    tol: f64,
) -> Result<(Field, EvolveReport)> {
    if f0.domain != *domain {
        return Err(PamError::Dimension("initial field does not live on the given box".into()));
    }
    if !(t > 0.0) {
        return Err(PamError::Domain(format!("t must be positive, got {t}")));
    }
    let (mut fields, report) = evolve_series(params, f0, &[t], tol, LEAK_THRESHOLD)?;
    Ok((fields.pop().expect("one snapshot per time"), report))
}

/// Runs `attempt(radius)` with the radius doubled on every leak error.
fn with_doubling<T>(start: usize, mut attempt: impl FnMut(usize) -> Result<T>) -> Result<T> {
    let mut radius = start;
    let mut tries = 0;
    loop {
        match attempt(radius) {
            Err(PamError::Leak { .. }) if tries < MAX_DOUBLINGS => {
                radius *= 2;
                tries += 1;
            }
            other => return other,
        }
    }
}

/// `M_z(t)` at each of `times` for `gamma <= 0`.
///
/// Evolves `delta_z` under `H^1 = (kappa + rho) Delta + gamma delta_0`; by
/// symmetry of `H^1` its total mass is `(e^{t H^1} 1)(z) = M_z(t)`, and the
/// fraction of it near the boundary is a meaningful truncation monitor.
pub fn localized_mass_series(
    params: &ModelParams,
    z: &LatticePoint,
    times: &[f64],
    tol: f64,
) -> Result<(Vec<f64>, EvolveReport)> {
    params.validate()?;
    z.check_dim(params.d)?;
    check_times(times)?;
    if params.gamma > 0.0 {
        return Err(PamError::Domain(format!(
            "localized mass needs gamma <= 0, got {}",
            params.gamma
        )));
    }
    let p1 = params.with_p(1);
    let t_max = *times.last().expect("checked nonempty");
    let start = default_radius(&p1, t_max) + z.max_abs() as usize;
    with_doubling(start, |radius| {
        let dom = BoxDomain::new(1, params.d, radius)?;
        let st = Stencil::hamiltonian(&p1, radius);
        let f0 = Field::delta(dom, z.coords())?;
        let mut y = st.layout.from_field(&f0);
        let mut masses = Vec::with_capacity(times.len());
        let mut leak = 0.0f64;
        let stats = integrate(&st, &mut y, times, tol, |_, _, y| {
            let l = st.layout.boundary_fraction(y, LEAK_SHELLS);
            leak = leak.max(l);
            check_leak(l, LEAK_THRESHOLD, radius)?;
            masses.push(y.iter().sum());
            Ok(())
        })?;
        Ok((masses, EvolveReport::new(stats, leak, radius)))
    })
}

/// `M_z(t) = (e^{t H^1} 1)(z)` for `gamma <= 0`.
pub fn localized_total_mass(params: &ModelParams, z: &LatticePoint, t: f64, tol: f64) -> Result<f64> {
    let (m, _) = localized_mass_series(params, z, &[t], tol)?;
    Ok(m[0])
}

/// Deficit `D(x, y) = P(Y_t = y) - E[u(t, x); Y_t = y]` of the reactant-catalyst
/// pair together with the catalyst law `q(y) = P(Y_t = y)`:
/// `D' = (kappa Delta_x + rho Delta_y + gamma delta(x = y)) D - gamma delta(x = y) q`,
/// `q' = rho Delta q`, both started from `D = 0`, `q = delta_0`.
struct HomogeneousDeficit {
    pair: Stencil,
    walk: Stencil,
    /// `(pair index of (y, y), walk index of y)`.
    diagonal: Vec<(usize, usize)>,
    gamma: f64,
}

impl HomogeneousDeficit {
    fn new(params: &ModelParams, radius: usize) -> Self {
        let d = params.d;
        let pair = Stencil::reactant_catalyst_pair(params, radius);
        let mut dirs = Vec::new();
        for a in 0..d {
            let mut e = vec![0i64; d];
            e[a] = 1;
            dirs.push((e, params.rho));
        }
        let walk = Stencil::new(radius, d, &dirs, |_| 0.0);
        let mut diagonal = Vec::new();
        walk.layout.for_each_site(|j, y| {
            let xy: Vec<i64> = y.iter().chain(y).copied().collect();
            diagonal.push((pair.layout.index(&xy), j));
        });
        Self {
            pair,
            walk,
            diagonal,
            gamma: params.gamma,
        }
    }

    fn split(&self) -> usize {
        self.pair.layout.len()
    }
}

impl LinearFlow for HomogeneousDeficit {
    fn len(&self) -> usize {
        self.pair.layout.len() + self.walk.layout.len()
    }
    fn apply(&self, f: &[f64], out: &mut [f64]) {
        let n = self.split();
        let (fd, fq) = f.split_at(n);
        let (od, oq) = out.split_at_mut(n);
        self.pair.apply(fd, od);
        self.walk.apply(fq, oq);
        for &(i, j) in &self.diagonal {
            od[i] -= self.gamma * fq[j];
        }
    }
    fn spectral_bound(&self) -> f64 {
        self.pair.spectral_bound.max(self.walk.spectral_bound) + self.gamma.abs()
    }
}

/// `m_x(t) = E exp(gamma int_0^t delta_{Y_{t-s}}(X_s) ds)` at each of `times`
/// (homogeneous initial condition), from the deficit system of the pair
/// `(X, Y)` on `Z^{2d}`.
pub fn homogeneous_mass_series(
    params: &ModelParams,
    x: &LatticePoint,
    times: &[f64],
    tol: f64,
) -> Result<(Vec<f64>, EvolveReport)> {
    params.validate()?;
    x.check_dim(params.d)?;
    check_times(times)?;
    let p1 = params.with_p(1);
    let t_max = *times.last().expect("checked nonempty");
    let start = default_radius(&p1, t_max) + x.max_abs() as usize;
    with_doubling(start, |radius| {
        // same site budget as a p = 2 field
        BoxDomain::new(2, params.d, radius)?;
        let sys = HomogeneousDeficit::new(&p1, radius);
        let n = sys.split();
        let mut y = vec![0.0; sys.len()];
        let walk_origin = sys.walk.layout.index(&vec![0; params.d]);
        y[n + walk_origin] = 1.0;
        let pair = &sys.pair.layout;
        let walk = &sys.walk.layout;
        let mut rows: Vec<usize> = Vec::new();
        walk.for_each_site(|_, yy| {
            let xy: Vec<i64> = x.coords().iter().chain(yy).copied().collect();
            rows.push(pair.index(&xy));
        });
        let mut masses = Vec::with_capacity(times.len());
        let mut leak = 0.0f64;
        let stats = integrate(&sys, &mut y, times, tol, |_, _, y| {
            let (dv, qv) = y.split_at(n);
            let l = pair.boundary_fraction(dv, LEAK_SHELLS).max(walk.boundary_fraction(qv, LEAK_SHELLS));
            leak = leak.max(l);
            check_leak(l, LEAK_THRESHOLD, radius)?;
            let deficit: f64 = rows.iter().map(|&i| dv[i]).sum();
            masses.push(1.0 - deficit);
            Ok(())
        })?;
        Ok((masses, EvolveReport::new(stats, leak, radius)))
    })
}

/// Width of the layer between the support of the initial cube and the sites
/// where [`catalyst_moment_field`] approximates `m_p(t, .)`: a Chernoff
/// radius of one coordinate of the `A^p`-walk over time `t`.
pub fn catalyst_margin(params: &ModelParams, t: f64, tol: f64) -> usize {
    let c = 2.0 * (params.kappa + params.rho) * t.max(0.0);
    let eps = (tol * 1e-2 / (params.p * params.d) as f64).max(1e-300);
    chernoff_radius(c, eps) + 1
}

/// Radius of the cube on which [`catalyst_moment_field`] approximates `m_p(t, .)`.
pub fn catalyst_interior_radius(params: &ModelParams, t: f64, tol: f64, radius: usize) -> Option<usize> {
    let m = catalyst_margin(params, t, tol);
    radius.checked_sub(2 * m)
}

/// Approximation of `m_p(t, .) = (e^{t H^p} 1)(.)`: evolves the indicator of
/// the cube of radius `R - margin`, which agrees with the unit initial
/// condition on every path that starts within the interior cube
/// ([`catalyst_interior_radius`]) and stays within the margin up to time `t`.
pub fn catalyst_moment_field(
    params: &ModelParams,
    t: f64,
    tol: f64,
    domain: &BoxDomain,
) -> Result<(Field, EvolveReport)> {
    let (mut fields, report) = catalyst_moment_series(params, &[t], tol, domain)?;
    Ok((fields.pop().expect("one snapshot per time"), report))
}

/// Snapshots of the [`catalyst_moment_field`] approximation at each of `times`.
pub fn catalyst_moment_series(
    params: &ModelParams,
    times: &[f64],
    tol: f64,
    domain: &BoxDomain,
) -> Result<(Vec<Field>, EvolveReport)> {
    params.validate()?;
    check_times(times)?;
    if params.gamma < 0.0 {
        return Err(PamError::Domain(format!(
            "catalyst moments need gamma >= 0, got {}",
            params.gamma
        )));
    }
    let t_max = *times.last().expect("checked nonempty");
    let m = catalyst_margin(params, t_max, tol);
    if catalyst_interior_radius(params, t_max, tol, domain.radius).is_none() {
        return Err(PamError::Domain(format!(
            "box radius {} is below twice the margin {m}",
            domain.radius
        )));
    }
    let q = (domain.radius - m) as i64;
    let f0 = Field::from_fn(*domain, |x| {
        if x.iter().all(|c| c.abs() <= q) {
            1.0
        } else {
            0.0
        }
    });
    evolve_series(params, &f0, times, tol, LEAK_THRESHOLD)
}

/// `m_p(t, x)` at each of `times` for a site `x` of `Z^{pd}`, with automatic box sizing.
pub fn catalyst_moment_at(
    params: &ModelParams,
    x: &LatticePoint,
    times: &[f64],
    tol: f64,
) -> Result<(Vec<f64>, EvolveReport)> {
    params.validate()?;
    x.check_dim(params.p * params.d)?;
    check_times(times)?;
    let t_max = *times.last().expect("checked nonempty");
    let m = catalyst_margin(params, t_max, tol);
    let start = default_radius(params, t_max).max(2 * m + x.max_abs() as usize + 1);
    with_doubling(start, |radius| {
        let dom = BoxDomain::new(params.p, params.d, radius)?;
        let (fields, report) = catalyst_moment_series(params, times, tol, &dom)?;
        let idx = dom.index(x.coords()).expect("x lies in the interior cube");
        Ok((fields.iter().map(|f| f.values[idx]).collect(), report))
    })
}

/// Slope of the least-squares line through the last half (at least three)
/// of the points `(t, log m)`.
pub fn growth_rate_estimate(series: &[(f64, f64)]) -> Result<f64> {
    if series.len() < 3 {
        return Err(PamError::DegenerateSeries(format!(
            "need at least 3 points, got {}",
            series.len()
        )));
    }
    if series.iter().any(|(t, v)| !t.is_finite() || !v.is_finite()) {
        return Err(PamError::DegenerateSeries("series contains non-finite values".into()));
    }
    if series.windows(2).any(|w| w[1].0 <= w[0].0) {
        return Err(PamError::DegenerateSeries("times must be strictly increasing".into()));
    }
    let k = (series.len() / 2).max(3);
    let win = &series[series.len() - k..];
    let n = k as f64;
    let mt = win.iter().map(|p| p.0).sum::<f64>() / n;
    let mv = win.iter().map(|p| p.1).sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for (t, v) in win {
        sxy += (t - mt) * (v - mv);
        sxx += (t - mt) * (t - mt);
    }
    Ok(sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::transition_probability;

    #[test]
    fn free_evolution_matches_bessel_kernel() {
        let params = ModelParams::new(1, 0.6, 0.4, 0.0, 1).unwrap();
        let dom = BoxDomain::new(1, 1, 40).unwrap();
        let f0 = Field::delta(dom, &[0]).unwrap();
        let (f, rep) = evolve_field(&params, &dom, &f0, 3.0, 1e-10).unwrap();
        assert!(rep.boundary_leak < 1e-6);
        for z in -10i64..=10 {
            let want = transition_probability(&params.merged_walk(), 3.0, &vec![z].into()).unwrap();
            assert!((f.get(&[z]).unwrap() - want).abs() < 1e-9, "z={z}");
        }
    }

    #[test]
    fn semigroup_property() {
        let params = ModelParams::new(1, 1.0, 1.0, -0.8, 1).unwrap();
        let dom = BoxDomain::new(1, 1, 40).unwrap();
        let f0 = Field::delta(dom, &[2]).unwrap();
        let tol = 1e-10;
        let (a, _) = evolve_field(&params, &dom, &f0, 2.5, tol).unwrap();
        let (b, _) = evolve_field(&params, &dom, &f0, 1.0, tol).unwrap();
        let (b, _) = evolve_field(&params, &dom, &b, 1.5, tol).unwrap();
        for (x, y) in a.values.iter().zip(&b.values) {
            assert!((x - y).abs() < 10.0 * tol);
        }
    }

    #[test]
    fn leak_error_on_small_boxes() {
        let params = ModelParams::new(1, 1.0, 1.0, 0.0, 1).unwrap();
        let dom = BoxDomain::new(1, 1, 4).unwrap();
        let f0 = Field::delta(dom, &[0]).unwrap();
        let e = evolve_field(&params, &dom, &f0, 5.0, 1e-8).unwrap_err();
        assert!(matches!(e, PamError::Leak { .. }));
    }

    #[test]
    fn localized_mass_limits() {
        let p = ModelParams::new(1, 1.0, 1.0, -1e-12, 1).unwrap();
        let m = localized_total_mass(&p, &vec![0].into(), 3.0, 1e-10).unwrap();
        assert!((m - 1.0).abs() < 1e-9);
        let p = ModelParams::new(1, 1.0, 1.0, -1.0, 1).unwrap();
        let (s, _) = localized_mass_series(&p, &vec![1].into(), &[0.5, 1.0, 2.0, 4.0], 1e-10).unwrap();
        assert!(s.windows(2).all(|w| w[1] < w[0]));
        assert!(s.iter().all(|&v| v > 0.0 && v < 1.0));
    }

    #[test]
    fn homogeneous_mass_small_cases() {
        let p = ModelParams::new(1, 1.0, 1.0, 0.0, 1).unwrap();
        let (s, _) = homogeneous_mass_series(&p, &vec![0].into(), &[1.0], 1e-10).unwrap();
        assert!((s[0] - 1.0).abs() < 1e-12);
        // short time: m_0(t) = 1 + gamma t + O(t^2) since X and Y start together
        let p = ModelParams::new(1, 1.0, 1.0, -1.0, 1).unwrap();
        let (s, _) = homogeneous_mass_series(&p, &vec![0].into(), &[1e-3], 1e-12).unwrap();
        assert!((s[0] - (1.0 - 1e-3)).abs() < 5e-6);
    }

    #[test]
    fn catalyst_field_zero_coupling_and_symmetry() {
        let p = ModelParams::new(1, 1.0, 1.0, 0.0, 2).unwrap();
        let dom = BoxDomain::new(2, 1, 50).unwrap();
        let (f, _) = catalyst_moment_field(&p, 1.0, 1e-10, &dom).unwrap();
        let inner = catalyst_interior_radius(&p, 1.0, 1e-10, 50).unwrap() as i64;
        for a in -inner..=inner {
            assert!((f.get(&[a, 0]).unwrap() - 1.0).abs() < 1e-9);
        }
        let p = p.with_gamma(1.5);
        let (f, _) = catalyst_moment_field(&p, 1.0, 1e-10, &dom).unwrap();
        for a in -5i64..=5 {
            for b in -5i64..=5 {
                let (u, v) = (f.get(&[a, b]).unwrap(), f.get(&[b, a]).unwrap());
                assert!((u - v).abs() <= 1e-13 * u.abs());
            }
        }
    }

    #[test]
    fn growth_rate_of_exact_series() {
        let s: Vec<(f64, f64)> = (0..10).map(|k| (k as f64, 2.0)).collect();
        assert_eq!(growth_rate_estimate(&s).unwrap(), 0.0);
        let s: Vec<(f64, f64)> = (0..10).map(|k| (0.5 * k as f64, 1.5 * k as f64)).collect();
        assert!((growth_rate_estimate(&s).unwrap() - 3.0).abs() < 1e-13);
        assert!(growth_rate_estimate(&s[..2]).is_err());
    }
}
