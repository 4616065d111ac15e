//! The acceptance table: twelve finite-time checks of the large-time
//! results, each cross-checking two independent numerical routes.

use std::io::Write;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{PamError, Result};
use crate::evolver::io::fmt17;
use crate::evolver::{
    catalyst_moment_at, growth_rate_estimate, homogeneous_mass_series, localized_mass_series, BoxDomain,
};
use crate::lattice::{KernelAccuracy, LatticePoint};
use crate::mc::{estimate_catalyst_moment, estimate_homogeneous_mass, estimate_localized_mass, McEstimate};
use crate::model::ModelParams;
use crate::spectral::{
    asymptotics_check, central_sites, lambda1_root, lambda2_via_duality, t2_operator_top, t_star, top_eigenpair,
};
use crate::trap::{
    decay_asymptote, homogeneous_limit_d1, mass_laplace_transform, mass_limit_transient, mass_limit_transient_field,
    bvp_residual,
};

pub const CRITERIA: usize = 12;

const EVOLVE_TOL: f64 = 1e-10;
const EIGEN_TOL: f64 = 1e-10;
/// Evolver tolerance for the Monte Carlo grid, far below its standard errors.
const GRID_TOL: f64 = 1e-7;
const EIGEN_MAXITER: usize = 200_000;
/// The d = 2 decay run to t = 400 is step-size limited by stability already
/// at this tolerance; tighter settings only shrink steps, not the fitted constant.
const DECAY_D2_TOL: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionResult {
    pub id: usize,
    pub name: String,
    pub passed: bool,
    /// The headline number the criterion is judged on.
    pub measured: f64,
    pub detail: String,
    pub seconds: f64,
}

impl CriterionResult {
    pub fn line(&self) -> String {
        format!(
            "criterion {:>2} {} {}: {} [{:.1}s]",
            self.id,
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.detail,
            self.seconds
        )
    }
}

/// Outcome of one check before timing is attached.
struct Outcome {
    passed: bool,
    measured: f64,
    detail: String,
}

fn outcome(passed: bool, measured: f64, detail: String) -> Result<Outcome> {
    Ok(Outcome {
        passed,
        measured,
        detail,
    })
}

pub fn criterion_name(id: usize) -> &'static str {
    match id {
        1 => "laplace identity d=1",
        2 => "mass decay d=1",
        3 => "mass decay d=2",
        4 => "transient mass limit d=3",
        5 => "homogeneous limit d=1",
        6 => "homogeneous limit d=2",
        7 => "lambda1 concordance",
        8 => "convolution operator norm",
        9 => "lambda2 concordance",
        10 => "refined moment asymptotics",
        11 => "large-gamma eigenvalue bracket",
        12 => "monte carlo vs evolver grid",
        _ => "unknown",
    }
}

/// Runs criterion `id` (1 to 12). Numeric failures are reported as a failed
/// criterion with the error as detail.
pub fn run_criterion(id: usize, seed: u64) -> Result<CriterionResult> {
    let start = Instant::now();
    let out = match id {
        1 => criterion_1(),
        2 => criterion_2(),
        3 => criterion_3(),
        4 => criterion_4(seed),
        5 => criterion_5(seed),
        6 => criterion_6(seed),
        7 => criterion_7(),
        8 => criterion_8(),
        9 => criterion_9(),
        10 => criterion_10(),
        11 => criterion_11(),
        12 => criterion_12(seed),
        _ => return Err(PamError::Domain(format!("criteria are numbered 1 to {CRITERIA}, got {id}"))),
    };
    let seconds = start.elapsed().as_secs_f64();
    let out = out.unwrap_or_else(|e| Outcome {
        passed: false,
        measured: f64::NAN,
        detail: format!("error: {e}"),
    });
    let limit = runtime_limit(id);
    let in_time = limit.is_none_or(|l| seconds < l);
    let mut detail = out.detail;
    if !in_time {
        detail.push_str(&format!("; runtime above {:.0}s", limit.unwrap_or(0.0)));
    }
    Ok(CriterionResult {
        id,
        name: criterion_name(id).into(),
        passed: out.passed && in_time,
        measured: out.measured,
        detail,
        seconds,
    })
}

fn runtime_limit(id: usize) -> Option<f64> {
    match id {
        1 | 7 => Some(60.0),
        2 => Some(120.0),
        3 => Some(300.0),
        _ => None,
    }
}

pub fn run_all(seed: u64) -> Vec<CriterionResult> {
    (1..=CRITERIA)
        .map(|id| run_criterion(id, seed).expect("ids are in range"))
        .collect()
}

/// CSV with one row per criterion; numbers with 17 significant digits.
pub fn write_csv<W: Write>(results: &[CriterionResult], mut w: W) -> Result<()> {
    let io = |e: std::io::Error| PamError::Domain(format!("i/o error: {e}"));
    writeln!(w, "id,name,passed,measured,seconds,detail").map_err(io)?;
    for r in results {
        writeln!(
            w,
            "{},{},{},{},{},\"{}\"",
            r.id,
            r.name,
            r.passed,
            fmt17(r.measured),
            fmt17(r.seconds),
            r.detail.replace('"', "\"\"")
        )
        .map_err(io)?;
    }
    Ok(())
}

fn trap(d: usize, gamma: f64) -> ModelParams {
    ModelParams {
        d,
        kappa: 1.0,
        rho: 1.0,
        gamma,
        p: 1,
    }
}

/// Composite Simpson rule on an even number of equal intervals.
fn simpson(values: &[f64], h: f64) -> f64 {
    let n = values.len() - 1;
    debug_assert!(n % 2 == 0);
    let mut s = values[0] + values[n];
    for (i, v) in values.iter().enumerate().take(n).skip(1) {
        s += if i % 2 == 1 { 4.0 * v } else { 2.0 * v };
    }
    s * h / 3.0
}

fn criterion_1() -> Result<Outcome> {
    let params = trap(1, -1.0);
    let h = 0.05;
    let steps = 1600;
    let times: Vec<f64> = (1..=steps).map(|k| k as f64 * h).collect();
    let (masses, _) = localized_mass_series(&params, &LatticePoint::origin(1), &times, EVOLVE_TOL)?;
    let acc = KernelAccuracy::with_tol(1e-12);
    let mut worst = 0.0f64;
    let mut parts = Vec::new();
    for lambda in [0.5, 1.0, 2.0] {
        let mut integrand = vec![1.0];
        integrand.extend(times.iter().zip(&masses).map(|(t, m)| (-lambda * t).exp() * m));
        let numeric = simpson(&integrand, h);
        let exact = mass_laplace_transform(&params, lambda, &acc)?;
        let tail = (-lambda * 80.0).exp() / lambda;
        let rel = (numeric - exact).abs() / exact;
        worst = worst.max(rel);
        parts.push(format!("lambda={lambda}: {numeric:.6} vs {exact:.6} (tail<{tail:.1e})"));
    }
    outcome(worst <= 0.01, worst, format!("max rel err {worst:.2e}; {}", parts.join(", ")))
}

fn criterion_2() -> Result<Outcome> {
    let params = trap(1, -1.0);
    let times = [50.0, 100.0, 200.0, 400.0];
    let (masses, _) = localized_mass_series(&params, &LatticePoint::origin(1), &times, EVOLVE_TOL)?;
    let mut ratios = Vec::new();
    for (t, m) in times.iter().zip(&masses) {
        ratios.push(m / decay_asymptote(&params, *t)?.value);
    }
    let dev: Vec<f64> = ratios.iter().map(|r| (r - 1.0).abs()).collect();
    let last = ratios[3];
    let decreasing = dev.windows(2).all(|w| w[1] < w[0]);
    outcome(
        (0.9..=1.1).contains(&last) && decreasing,
        last,
        format!("ratios {ratios:.5?} at t = {times:?}"),
    )
}

/// Least-squares line `y = a + b x`.
fn line_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let b = sxy / sxx;
    (my - b * mx, b)
}

fn criterion_3() -> Result<Outcome> {
    let params = trap(2, -1.0);
    let times: Vec<f64> = (1..=8).map(|k| 50.0 * k as f64).collect();
    let (masses, _) = localized_mass_series(&params, &LatticePoint::origin(2), &times, DECAY_D2_TOL)?;
    let logs: Vec<f64> = times.iter().map(|t| t.ln()).collect();
    // M ~ c / (log t + b): 1/M is affine in log t with slope 1/c
    let inv: Vec<f64> = masses.iter().map(|m| 1.0 / m).collect();
    let (b0, slope) = line_fit(&logs, &inv);
    let c = 1.0 / slope;
    // pure c / log t least squares, for reference
    let naive = logs.iter().zip(&masses).map(|(l, m)| m / l).sum::<f64>()
        / logs.iter().map(|l| 1.0 / (l * l)).sum::<f64>();
    let target = 4.0 * std::f64::consts::PI * params.merged_rate() / -params.gamma;
    outcome(
        (0.5 * target..=2.0 * target).contains(&c),
        c,
        format!(
            "fitted c = {c:.4} (offset {:.3}), target {target:.4}, c/target = {:.3}; pure c/log t fit gives {naive:.4}",
            b0 * c,
            c / target
        ),
    )
}

fn criterion_4(seed: u64) -> Result<Outcome> {
    let params = trap(3, -1.0);
    let acc = KernelAccuracy::with_tol(1e-12);
    let mut ok = true;
    let mut worst = 0.0f64;
    let mut parts = Vec::new();
    for (k, z) in [LatticePoint::origin(3), LatticePoint::axis(3, 0, 1)].iter().enumerate() {
        let limit = mass_limit_transient(&params, z, &acc)?;
        let est = estimate_localized_mass(&params, z, 50.0, 100_000, seed.wrapping_add(k as u64))?;
        let score = (est.mean - limit).abs() / est.std_error;
        worst = worst.max(score);
        ok &= est.covers(limit, 3.0);
        parts.push(format!(
            "z={:?}: mc {:.5} +- {:.5} vs limit {limit:.5} ({score:.2} SE)",
            z.coords(),
            est.mean,
            est.std_error
        ));
    }
    let field = mass_limit_transient_field(&params, 4, &acc)?;
    let residual = bvp_residual(&field, &params)?;
    parts.push(format!("bvp residual {residual:.2e}"));
    outcome(ok && residual <= 1e-8, worst, parts.join("; "))
}

fn criterion_5(seed: u64) -> Result<Outcome> {
    let params = trap(1, -1.0);
    let limit = homogeneous_limit_d1(1.0, 1e-12)?;
    let est = estimate_homogeneous_mass(&params, &LatticePoint::origin(1), 200.0, 1_000_000, seed)?;
    let diff = (est.mean - limit).abs();
    let allowed = (3.0 * est.std_error).max(0.05 * limit);
    let endpoint = homogeneous_limit_d1(1e-6, 1e-12)?;
    let curve: Vec<f64> = [0.1, 1.0, 10.0, 100.0]
        .iter()
        .map(|&a| homogeneous_limit_d1(a, 1e-12))
        .collect::<Result<_>>()?;
    let monotone = curve.windows(2).all(|w| w[1] < w[0]);
    outcome(
        diff <= allowed && (endpoint - 0.5).abs() <= 1e-3 && monotone,
        diff,
        format!(
            "mc m_0(200) = {:.5} +- {:.5} vs limit {limit:.5} (|diff| {diff:.4}, allowed {allowed:.4}); a->0: {endpoint:.6}; a=0.1,1,10,100: {curve:.5?}",
            est.mean, est.std_error
        ),
    )
}

fn criterion_6(seed: u64) -> Result<Outcome> {
    let params = trap(2, -1.0);
    let x = LatticePoint::origin(2);
    let early = estimate_homogeneous_mass(&params, &x, 25.0, 100_000, seed)?;
    let late = estimate_homogeneous_mass(&params, &x, 100.0, 100_000, seed.wrapping_add(1))?;
    let spread = early.std_error.hypot(late.std_error);
    let nondecreasing = late.mean >= early.mean - 3.0 * spread;
    let high = late.mean >= 0.9;
    let covers = late.mean - 3.0 * late.std_error <= 1.0;
    outcome(
        nondecreasing && high && covers,
        late.mean,
        format!(
            "m_0(25) = {:.5} +- {:.5}, m_0(100) = {:.5} +- {:.5}",
            early.mean, early.std_error, late.mean, late.std_error
        ),
    )
}

fn criterion_7() -> Result<Outcome> {
    let params = ModelParams::new(1, 1.0, 1.0, 5.0, 1)?;
    let root = lambda1_root(&params)?.ok_or_else(|| PamError::Domain("no positive root".into()))?;
    let sol = top_eigenpair(&params, &BoxDomain::new(1, 1, 200)?, EIGEN_TOL, EIGEN_MAXITER)?;
    let times: Vec<f64> = (1..=12).map(f64::from).collect();
    let (m, _) = catalyst_moment_at(&params, &LatticePoint::origin(1), &times, EVOLVE_TOL)?;
    let series: Vec<(f64, f64)> = times.iter().zip(&m).map(|(t, v)| (*t, v.ln())).collect();
    let growth = growth_rate_estimate(&series)?;
    let d_box = (root - sol.lambda).abs();
    let d_growth = (root - growth).abs();
    outcome(
        d_box <= 1e-3 && d_growth <= 1e-2,
        d_box,
        format!(
            "root {root:.9}, box R=200 {:.9} (diff {d_box:.1e}), evolver growth {growth:.6} (diff {d_growth:.1e})",
            sol.lambda
        ),
    )
}

fn criterion_8() -> Result<Outcome> {
    let top = t2_operator_top(1.0, 1.0, 1.0, 1, 400, 1e-12)?;
    let diff = (top - 1.0 / 3.0).abs();
    outcome(diff <= 1e-3, diff, format!("top {top:.8} vs 1/3 (diff {diff:.2e})"))
}

fn criterion_9() -> Result<Outcome> {
    let params = ModelParams::new(1, 1.0, 1.0, 8.0, 2)?;
    let dual = lambda2_via_duality(&params, 60, 1e-13)?;
    let sol = top_eigenpair(&params, &BoxDomain::new(2, 1, 60)?, EIGEN_TOL, EIGEN_MAXITER)?;
    let l1 = lambda1_root(&params.with_p(1))?.ok_or_else(|| PamError::Domain("no positive root".into()))?;
    let diff = (dual - sol.lambda).abs();
    let holder = l1 < dual / 2.0 && l1 < sol.lambda / 2.0;
    outcome(
        diff <= 5e-3 && holder,
        diff,
        format!(
            "duality {dual:.6}, box R=60 {:.6} (diff {diff:.1e}); lambda1 {l1:.6} vs lambda2/2 {:.6}",
            sol.lambda,
            sol.lambda / 2.0
        ),
    )
}

fn sci(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:.2e}")).collect::<Vec<_>>().join(", ")
}

/// Deviations along `(t/2, t, 2t)` and whether each doubling shrinks them to
/// at most `0.625` of the previous value.
fn refined_case(params: &ModelParams, radius: usize) -> Result<(Vec<f64>, bool, f64)> {
    let sol = top_eigenpair(params, &BoxDomain::new(params.p, params.d, radius)?, EIGEN_TOL, EIGEN_MAXITER)?;
    let ts = t_star(&sol);
    let times = [0.5 * ts, ts, 2.0 * ts];
    let rep = asymptotics_check(params, &sol, &times, &central_sites(params.p, params.d), EVOLVE_TOL)?;
    let dev = rep.max_deviation;
    let halves = dev.windows(2).all(|w| w[1] <= 0.625 * w[0]);
    Ok((dev, halves, ts))
}

fn criterion_10() -> Result<Outcome> {
    let p1 = ModelParams::new(1, 1.0, 1.0, 5.0, 1)?;
    let p2 = ModelParams::new(1, 1.0, 1.0, 8.0, 2)?;
    let (d1, h1, t1) = refined_case(&p1, 200)?;
    let (d2, h2, t2) = refined_case(&p2, 60)?;
    let ok = d1[1] <= 0.02 && d2[1] <= 0.05 && h1 && h2;
    outcome(
        ok,
        d1[1].max(d2[1]),
        format!(
            "p=1: t*={t1:.3}, deviations at t*/2,t*,2t* [{}]; p=2: t*={t2:.3}, deviations [{}]",
            sci(&d1),
            sci(&d2)
        ),
    )
}

fn criterion_11() -> Result<Outcome> {
    let params = ModelParams::new(1, 1.0, 1.0, 50.0, 2)?;
    let dom = BoxDomain::new(2, 1, 20)?;
    let sol = top_eigenpair(&params, &dom, EIGEN_TOL, EIGEN_MAXITER)?;
    let v = &sol.eigenfunction;
    let positive = v.values.iter().all(|&x| x > 0.0);
    let max = v.values.iter().fold(0.0f64, |a, &b| a.max(b));
    let asym = (0..dom.len())
        .map(|i| {
            let x = dom.coords(i);
            (v.values[i] - v.get(&[x[1], x[0]]).expect("box is symmetric")).abs()
        })
        .fold(0.0f64, f64::max);
    let in_bracket = sol.lambda > 50.0 && sol.lambda <= 100.0;
    outcome(
        in_bracket && positive && asym <= 4.0 * f64::EPSILON * max,
        sol.lambda,
        format!(
            "lambda {:.6} in (50, 100]: {in_bracket}; min v {:.2e}; max exchange asymmetry {asym:.1e}",
            sol.lambda,
            v.values.iter().fold(f64::INFINITY, |a, &b| a.min(b))
        ),
    )
}

/// One Monte Carlo vs evolver comparison of the grid.
#[derive(Debug, Clone)]
pub struct GridCase {
    pub kind: CaseKind,
    pub params: ModelParams,
    /// Start point in `Z^{pd}`.
    pub x: Vec<i64>,
    pub t: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CaseKind {
    Localized,
    Homogeneous,
    Catalyst,
}

pub fn oracle_grid() -> Vec<GridCase> {
    let m = |d, kappa, rho, gamma, p| ModelParams {
        d,
        kappa,
        rho,
        gamma,
        p,
    };
    use CaseKind::*;
    let case = |kind, params, x: &[i64], t| GridCase {
        kind,
        params,
        x: x.to_vec(),
        t,
    };
    vec![
        case(Localized, m(1, 1.0, 1.0, -1.0, 1), &[0], 2.0),
        case(Localized, m(1, 1.0, 1.0, -1.0, 1), &[2], 5.0),
        case(Localized, m(1, 0.5, 1.0, -0.3, 1), &[0], 10.0),
        case(Localized, m(1, 1.0, 1.0, -3.0, 1), &[1], 10.0),
        case(Localized, m(2, 1.0, 1.0, -1.0, 1), &[0, 0], 2.0),
        case(Localized, m(2, 1.0, 1.0, -2.0, 1), &[1, 0], 5.0),
        case(Localized, m(2, 1.0, 1.0, -0.5, 1), &[1, 1], 10.0),
        case(Localized, m(2, 0.3, 0.7, -1.0, 1), &[0, 0], 10.0),
        case(Homogeneous, m(1, 1.0, 1.0, -1.0, 1), &[0], 5.0),
        case(Homogeneous, m(1, 1.0, 1.0, -2.0, 1), &[1], 10.0),
        case(Homogeneous, m(1, 2.0, 0.5, -0.5, 1), &[0], 10.0),
        case(Homogeneous, m(2, 1.0, 1.0, -1.0, 1), &[0, 0], 1.0),
        case(Homogeneous, m(2, 0.5, 1.0, -0.5, 1), &[1, 0], 3.0),
        case(Catalyst, m(1, 1.0, 1.0, 1.0, 1), &[0], 5.0),
        case(Catalyst, m(1, 1.0, 1.0, 0.5, 1), &[2], 10.0),
        case(Catalyst, m(1, 1.0, 1.0, 2.0, 1), &[0], 3.0),
        case(Catalyst, m(2, 1.0, 1.0, 1.0, 1), &[0, 0], 5.0),
        case(Catalyst, m(2, 1.0, 1.0, 0.5, 1), &[1, 0], 10.0),
        case(Catalyst, m(1, 1.0, 1.0, 0.5, 2), &[0, 0], 4.0),
        case(Catalyst, m(1, 1.0, 1.0, 1.0, 2), &[1, -1], 3.0),
    ]
}

/// Monte Carlo estimate and evolver value of one grid case.
pub fn run_grid_case(case: &GridCase, n: usize, seed: u64) -> Result<(McEstimate, f64)> {
    let x: LatticePoint = case.x.clone().into();
    let p = &case.params;
    match case.kind {
        CaseKind::Localized => {
            let est = estimate_localized_mass(p, &x, case.t, n, seed)?;
            let (m, _) = localized_mass_series(p, &x, &[case.t], GRID_TOL)?;
            Ok((est, m[0]))
        }
        CaseKind::Homogeneous => {
            let est = estimate_homogeneous_mass(p, &x, case.t, n, seed)?;
            let (m, _) = homogeneous_mass_series(p, &x, &[case.t], GRID_TOL)?;
            Ok((est, m[0]))
        }
        CaseKind::Catalyst => {
            let blocks: Vec<LatticePoint> = case.x.chunks(p.d).map(|b| b.to_vec().into()).collect();
            let est = estimate_catalyst_moment(p, &blocks, case.t, n, seed)?;
            let (m, _) = catalyst_moment_at(p, &x, &[case.t], GRID_TOL)?;
            Ok((est, m[0]))
        }
    }
}

fn criterion_12(seed: u64) -> Result<Outcome> {
    let grid = oracle_grid();
    let mut hits = 0;
    let mut misses = Vec::new();
    for (k, case) in grid.iter().enumerate() {
        let (est, exact) = run_grid_case(case, 40_000, seed.wrapping_add(k as u64))?;
        if est.covers(exact, 3.0) {
            hits += 1;
        } else {
            misses.push(format!(
                "case {} ({:?}): {:.5} +- {:.5} vs {exact:.5}",
                k + 1,
                case.kind,
                est.mean,
                est.std_error
            ));
        }
    }
    let need = grid.len() - 1;
    let mut detail = format!("{hits}/{} within 3 SE (need {need})", grid.len());
    if !misses.is_empty() {
        detail.push_str(&format!("; misses: {}", misses.join(", ")));
    }
    outcome(hits >= need, hits as f64, detail)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simpson_integrates_cubics_exactly() {
        let h = 0.25;
        let v: Vec<f64> = (0..=8).map(|k| (k as f64 * h).powi(3)).collect();
        assert!((simpson(&v, h) - 4.0).abs() < 1e-13);
    }

    #[test]
    fn line_fit_recovers_line() {
        let x = [1.0, 2.0, 4.0];
        let y: Vec<f64> = x.iter().map(|v| 3.0 - 0.5 * v).collect();
        let (a, b) = line_fit(&x, &y);
        assert!((a - 3.0).abs() < 1e-14 && (b + 0.5).abs() < 1e-14);
    }

    #[test]
    fn grid_shape() {
        let g = oracle_grid();
        assert_eq!(g.len(), 20);
        assert!(g.iter().all(|c| c.t <= 10.0 && (1..=2).contains(&c.params.d)));
        assert!(g.iter().any(|c| c.params.gamma > 0.0) && g.iter().any(|c| c.params.gamma < 0.0));
        assert!(g.iter().all(|c| c.x.len() == c.params.p * c.params.d));
    }

    #[test]
    fn csv_layout() {
        let r = CriterionResult {
            id: 3,
            name: "x".into(),
            passed: true,
            measured: 0.1,
            detail: "a \"b\"".into(),
            seconds: 1.0,
        };
        let mut buf = Vec::new();
        write_csv(&[r], &mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert!(s.starts_with("id,name,passed,measured,seconds,detail\n3,x,true,1.0000000000000001e-1,"));
        assert!(s.ends_with("\"a \"\"b\"\"\"\n"));
        assert!(run_criterion(13, 0).is_err());
    }
}
