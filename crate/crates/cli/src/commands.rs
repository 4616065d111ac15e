//! One function per subcommand. Each resolves its settings, computes, and
//! hands a table or field to the output sink together with the settings used.

use std::path::PathBuf;
use std::time::Instant;

use pam_core::evolver::{
    catalyst_moment_at, default_radius, evolve_field, homogeneous_mass_series, localized_mass_series, BoxDomain,
    EvolveReport, Field,
};
use pam_core::lattice::{green_function, resolvent_kernel, transition_probability_with};
use pam_core::mc::{estimate_catalyst_moment, estimate_homogeneous_mass, estimate_localized_mass};
use pam_core::spectral::{lambda1_root, lambda2_via_duality, top_eigenpair, SpectralRegime};
use pam_core::trap::{asymptote, homogeneous_limit_d1, homogeneous_limit_high_d, Regime};
use pam_core::verify::{run_criterion, CRITERIA};
use pam_core::{KernelAccuracy, LatticePoint, ModelParams, WalkParams};
use serde_json::json;

use crate::config::{Resolver, Settings};
use crate::error::CliError;
use crate::output::{Cell, Format, Sink, Table};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Name {
    Kernel,
    Trap,
    Homog,
    Mc,
    Evolve,
    Spectrum,
    Verify,
}

impl Name {
    fn as_str(self) -> &'static str {
        match self {
            Name::Kernel => "kernel",
            Name::Trap => "trap",
            Name::Homog => "homog",
            Name::Mc => "mc",
            Name::Evolve => "evolve",
            Name::Spectrum => "spectrum",
            Name::Verify => "verify",
        }
    }
}

pub fn dispatch(name: Name, s: &Settings) -> Result<(), CliError> {
    let mut r = Resolver::new(s);
    match name {
        Name::Kernel => kernel(&mut r),
        Name::Trap => trap(&mut r),
        Name::Homog => homog(&mut r),
        Name::Mc => mc(&mut r),
        Name::Evolve => evolve(&mut r),
        Name::Spectrum => spectrum(&mut r),
        Name::Verify => verify(&mut r),
    }
}

fn sink(r: &mut Resolver, default: &str) -> Result<Sink, CliError> {
    let format = Format::parse(&r.string("output.format", Some(default))?)?;
    let path = r.string_opt("output.path")?.map(PathBuf::from);
    Ok(Sink { format, path })
}

fn model(r: &mut Resolver, default_gamma: Option<f64>) -> Result<ModelParams, CliError> {
    let d = r.usize("model.d", Some(1))?;
    let kappa = r.f64("model.kappa", Some(1.0))?;
    let rho = r.f64("model.rho", Some(1.0))?;
    let gamma = r.f64("model.gamma", default_gamma)?;
    let p = r.usize("model.p", Some(1))?;
    Ok(ModelParams::new(d, kappa, rho, gamma, p)?)
}

fn site(r: &mut Resolver, dims: usize) -> Result<LatticePoint, CliError> {
    let x = r.i64_list("site.x", Some(vec![0; dims]))?;
    if x.len() != dims {
        return Err(CliError::Usage(format!("site.x needs {dims} coordinates, got {}", x.len())));
    }
    Ok(LatticePoint::new(x))
}

fn accuracy(r: &mut Resolver) -> Result<KernelAccuracy, CliError> {
    let def = KernelAccuracy::default();
    let acc = KernelAccuracy {
        abs_tol: r.f64("accuracy.tol", Some(def.abs_tol))?,
        quadrature_nodes: r.usize("accuracy.quadrature_nodes", Some(def.quadrature_nodes))?,
        series_cutoff: r.usize("accuracy.series_cutoff", Some(def.series_cutoff))?,
    };
    acc.validate()?;
    Ok(acc)
}

fn params_json(p: &ModelParams) -> serde_json::Value {
    json!({ "d": p.d, "kappa": p.kappa, "rho": p.rho, "gamma": p.gamma, "p": p.p })
}

fn kernel(r: &mut Resolver) -> Result<(), CliError> {
    let out = sink(r, "csv")?;
    let d = r.usize("model.d", Some(1))?;
    let kappa = r.f64("model.kappa", Some(1.0))?;
    let walk = WalkParams::new(d, kappa)?;
    let kind = r.string("kernel.kind", Some("transition"))?;
    let z = site(r, d)?;
    let acc = accuracy(r)?;
    let table = match kind.as_str() {
        "transition" => {
            let mut t = Table::new(&["t", "value"]);
            for time in r.f64_list("grid.t", Some(vec![1.0]))? {
                t.push(vec![Cell::Num(time), Cell::Num(transition_probability_with(&walk, time, &z, &acc)?)]);
            }
            t
        }
        "resolvent" => {
            let mut t = Table::new(&["lambda", "value"]);
            for lambda in r.f64_list("grid.lambda", Some(vec![1.0]))? {
                t.push(vec![Cell::Num(lambda), Cell::Num(resolvent_kernel(&walk, lambda, &z, &acc)?)]);
            }
            t
        }
        "green" => {
            if d < 3 {
                return Err(CliError::Usage(format!("the Green's function needs d >= 3, got d = {d}")));
            }
            let mut t = Table::new(&["value"]);
            t.push(vec![Cell::Num(green_function(&walk, &z, &acc)?)]);
            t
        }
        other => return Err(CliError::Usage(format!("unknown kernel kind '{other}'"))),
    };
    out.table(Name::Kernel.as_str(), &r.used, &table, json!({}))
}

fn trap(r: &mut Resolver) -> Result<(), CliError> {
    let out = sink(r, "csv")?;
    let params = model(r, Some(-1.0))?;
    let name = r.string("trap.regime", None)?;
    let regime = Regime::parse(&name).ok_or_else(|| CliError::Usage(format!("unknown regime '{name}'")))?;
    if !regime.admits(params.d) {
        return Err(CliError::Usage(format!("regime {name} does not apply in d = {}", params.d)));
    }
    let z = site(r, params.d)?;
    let acc = accuracy(r)?;
    let mut table = Table::new(&["t", "value"]);
    match regime {
        Regime::DecayD1 | Regime::DecayD2 => {
            for t in r.f64_list("grid.t", Some(vec![10.0]))? {
                table.push(vec![Cell::Num(t), Cell::Num(asymptote(&params, regime, t, &z, &acc)?.value)]);
            }
        }
        _ => {
            let v = asymptote(&params, regime, f64::INFINITY, &z, &acc)?.value;
            table.push(vec![Cell::Text("inf".into()), Cell::Num(v)]);
        }
    }
    out.table(Name::Trap.as_str(), &r.used, &table, json!({ "regime": regime.name() }))
}

fn homog(r: &mut Resolver) -> Result<(), CliError> {
    let out = sink(r, "csv")?;
    let d = r.usize("model.d", Some(1))?;
    let tol = r.f64("accuracy.tol", Some(1e-10))?;
    let mut table = Table::new(&["a", "value"]);
    for a in r.f64_list("grid.a", Some(vec![1.0]))? {
        let v = match d {
            0 => return Err(CliError::Usage("d must be at least 1".into())),
            1 => homogeneous_limit_d1(a, tol)?,
            _ => homogeneous_limit_high_d(),
        };
        table.push(vec![Cell::Num(a), Cell::Num(v)]);
    }
    out.table(Name::Homog.as_str(), &r.used, &table, json!({}))
}

fn mc(r: &mut Resolver) -> Result<(), CliError> {
    let out = sink(r, "json")?;
    let kind = r.string("mc.kind", Some("localized"))?;
    let default_gamma = if kind == "catalyst" { 1.0 } else { -1.0 };
    let params = model(r, Some(default_gamma))?;
    let seed = r
        .u64_opt("run.seed")?
        .ok_or_else(|| CliError::Usage("mc needs an explicit --seed".into()))?;
    let n = r.usize("mc.n", Some(100_000))?;
    let times = r.f64_list("grid.t", Some(vec![1.0]))?;
    let dims = if kind == "catalyst" { params.p * params.d } else { params.d };
    let x = site(r, dims)?;
    let mut table = Table::new(&["t", "estimate", "se", "n", "seed", "ess", "wall_time"]);
    for t in times {
        let start = Instant::now();
        let est = match kind.as_str() {
            "localized" => estimate_localized_mass(&params, &x, t, n, seed)?,
            "homogeneous" => estimate_homogeneous_mass(&params, &x, t, n, seed)?,
            "catalyst" => {
                let points: Vec<LatticePoint> =
                    x.coords().chunks(params.d).map(|c| LatticePoint::new(c.to_vec())).collect();
                estimate_catalyst_moment(&params, &points, t, n, seed)?
            }
            other => return Err(CliError::Usage(format!("unknown mc kind '{other}'"))),
        };
        table.push(vec![
            Cell::Num(t),
            Cell::Num(est.mean),
            Cell::Num(est.std_error),
            Cell::Int(est.n as i64),
            Cell::Int(est.seed as i64),
            Cell::Num(est.ess),
            Cell::Num(start.elapsed().as_secs_f64()),
        ]);
    }
    out.table(Name::Mc.as_str(), &r.used, &table, json!({ "params": params_json(&params) }))
}

fn report_json(rep: &EvolveReport) -> serde_json::Value {
    json!({
        "steps": rep.steps,
        "dt_used": rep.dt_used,
        "rejected": rep.rejected,
        "boundary_leak": rep.boundary_leak,
        "radius": rep.radius,
    })
}

fn evolve(r: &mut Resolver) -> Result<(), CliError> {
    let kind = r.string("evolve.kind", Some("localized"))?;
    let out = sink(r, if kind == "field" { "bin" } else { "csv" })?;
    let default_gamma = if kind == "localized" || kind == "homogeneous" { -1.0 } else { 1.0 };
    let params = model(r, Some(default_gamma))?;
    let tol = r.f64("accuracy.tol", Some(1e-10))?;
    let times = r.f64_list("grid.t", Some(vec![1.0]))?;
    let dims = if kind == "localized" || kind == "homogeneous" { params.d } else { params.p * params.d };
    let x = site(r, dims)?;
    let command = Name::Evolve.as_str();
    let (values, rep) = match kind.as_str() {
        "localized" => localized_mass_series(&params, &x, &times, tol)?,
        "homogeneous" => homogeneous_mass_series(&params, &x, &times, tol)?,
        "catalyst" => catalyst_moment_at(&params, &x, &times, tol)?,
        "field" => {
            let &[t] = times.as_slice() else {
                return Err(CliError::Usage("evolve field takes exactly one time".into()));
            };
            let radius = r.usize("box.radius", Some(default_radius(&params, t) + x.max_abs() as usize))?;
            let domain = BoxDomain::new(params.p, params.d, radius)?;
            let f0 = Field::delta(domain, x.coords())?;
            let (field, rep) = evolve_field(&params, &domain, &f0, t, tol)?;
            let summary = json!({ "params": params_json(&params), "t": t, "report": report_json(&rep) });
            return out.field(command, &r.used, &field, t, &params, summary);
        }
        other => return Err(CliError::Usage(format!("unknown evolve kind '{other}'"))),
    };
    let mut table = Table::new(&["t", "value"]);
    for (t, v) in times.iter().zip(values) {
        table.push(vec![Cell::Num(*t), Cell::Num(v)]);
    }
    out.table(command, &r.used, &table, json!({ "report": report_json(&rep) }))
}

/// Box radius used when none is configured, by product dimension.
fn spectrum_radius(pd: usize) -> usize {
    match pd {
        1 => 200,
        2 => 60,
        3 => 15,
        _ => 8,
    }
}

fn spectrum(r: &mut Resolver) -> Result<(), CliError> {
    let out = sink(r, "json")?;
    let params = model(r, Some(5.0))?;
    let route = r.string("spectrum.route", Some("power"))?;
    let command = Name::Spectrum.as_str();
    match route.as_str() {
        "power" => {
            let radius = r.usize("box.radius", Some(spectrum_radius(params.p * params.d)))?;
            let tol = r.f64("accuracy.tol", Some(1e-10))?;
            let maxiter = r.usize("accuracy.maxiter", Some(200_000))?;
            let domain = BoxDomain::new(params.p, params.d, radius)?;
            let sol = top_eigenpair(&params, &domain, tol, maxiter)?;
            let summary = json!({
                "route": route,
                "params": params_json(&params),
                "lambda": sol.lambda,
                "residual": sol.residual,
                "l1_norm": sol.l1_norm,
                "box": { "p": domain.p, "d": domain.d, "radius": domain.radius },
                "regime": regime_name(sol.regime),
                "iterations": sol.iterations,
                "gap_estimate": sol.gap_estimate,
                "kinetic_ritz": [sol.kinetic_ritz.0, sol.kinetic_ritz.1],
            });
            out.field(command, &r.used, &sol.eigenfunction, 0.0, &params, summary)
        }
        "root" | "duality" => {
            let lambda = if route == "root" {
                if params.p != 1 {
                    return Err(CliError::Usage("the root route computes lambda_1; set p = 1".into()));
                }
                lambda1_root(&params)?
                    .ok_or_else(|| CliError::Usage("gamma G(0) <= 1: lambda_1 is zero in this regime".into()))?
            } else {
                if params.p != 2 {
                    return Err(CliError::Usage("the duality route computes lambda_2; set p = 2".into()));
                }
                let radius = r.usize("box.radius", Some(spectrum_radius(params.d)))?;
                let tol = r.f64("accuracy.tol", Some(1e-12))?;
                lambda2_via_duality(&params, radius, tol)?
            };
            let mut table = Table::new(&["route", "lambda", "regime"]);
            let regime = regime_name(SpectralRegime::of(&params, lambda));
            table.push(vec![Cell::Text(route.clone()), Cell::Num(lambda), Cell::Text(regime.into())]);
            out.table(command, &r.used, &table, json!({ "params": params_json(&params) }))
        }
        other => Err(CliError::Usage(format!("unknown spectrum route '{other}'"))),
    }
}

fn regime_name(r: SpectralRegime) -> &'static str {
    match r {
        SpectralRegime::Proven => "proven",
        SpectralRegime::UnprovenRegime => "unproven_regime",
    }
}

fn parse_suite(s: &str) -> Result<Vec<usize>, CliError> {
    if s.trim() == "all" {
        return Ok((1..=CRITERIA).collect());
    }
    s.split(',')
        .map(|part| {
            part.trim()
                .parse::<usize>()
                .ok()
                .filter(|id| (1..=CRITERIA).contains(id))
                .ok_or_else(|| CliError::Usage(format!("bad criterion id '{part}' (1..={CRITERIA})")))
        })
        .collect()
}

fn verify(r: &mut Resolver) -> Result<(), CliError> {
    let out = sink(r, "csv")?;
    let ids = parse_suite(&r.string("verify.suite", Some("all"))?)?;
    let seed = r.u64_opt("run.seed")?.unwrap_or(42);
    r.used.insert("run.seed".into(), toml::Value::Integer(seed as i64));
    let mut table = Table::new(&["id", "name", "passed", "measured", "seconds", "detail"]);
    let mut failed = Vec::new();
    for id in ids {
        let res = run_criterion(id, seed)?;
        eprintln!("{}", res.line());
        if !res.passed {
            failed.push(id);
        }
        table.push(vec![
            Cell::Int(res.id as i64),
            Cell::Text(res.name),
            Cell::Text(res.passed.to_string()),
            Cell::Num(res.measured),
            Cell::Num(res.seconds),
            Cell::Text(res.detail),
        ]);
    }
    out.table(Name::Verify.as_str(), &r.used, &table, json!({}))?;
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Verification(format!("criteria {failed:?} failed")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suites() {
        assert_eq!(parse_suite("all").unwrap().len(), CRITERIA);
        assert_eq!(parse_suite("1, 7").unwrap(), vec![1, 7]);
        assert!(parse_suite("0").is_err());
        assert!(parse_suite("x").is_err());
    }

    #[test]
    fn default_radii() {
        assert_eq!(spectrum_radius(1), 200);
        assert_eq!(spectrum_radius(4), 8);
    }
}
