//! Closed-form limits and asymptotes of the annealed mass in the trap
//! regime (`gamma < 0`), and the homogeneous limits.
//!
//! `M_z(t)` is the expected total mass when the reactant starts localized at
//! `z` relative to the trap, `m_x(t)` the expected local mass for the
//! homogeneous initial condition. Both are expectations over the walk
//! `Z = X - Y` with generator `(kappa + rho) Delta` or over the pair `(X, Y)`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{PamError, Result};
use crate::evolver::{BoxDomain, Field};
use crate::lattice::{green_function, green_table, resolvent_kernel, KernelAccuracy, LatticePoint};
use crate::model::ModelParams;
use crate::quad;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    DecayD1,
    DecayD2,
    LimitTransient,
    LimitHomogD1,
    LimitHomogHighD,
}

impl Regime {
    pub fn name(&self) -> &'static str {
        match self {
            Regime::DecayD1 => "decay_d1",
            Regime::DecayD2 => "decay_d2",
            Regime::LimitTransient => "limit_transient",
            Regime::LimitHomogD1 => "limit_homog_d1",
            Regime::LimitHomogHighD => "limit_homog_high_d",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [
            Regime::DecayD1,
            Regime::DecayD2,
            Regime::LimitTransient,
            Regime::LimitHomogD1,
            Regime::LimitHomogHighD,
        ]
        .into_iter()
        .find(|r| r.name() == s)
    }

    /// Whether the regime makes sense in dimension `d`.
    pub fn admits(&self, d: usize) -> bool {
        match self {
            Regime::DecayD1 | Regime::LimitHomogD1 => d == 1,
            Regime::DecayD2 => d == 2,
            Regime::LimitTransient => d >= 3,
            Regime::LimitHomogHighD => d >= 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptoteValue {
    pub value: f64,
    pub regime: Regime,
}

fn require_trap(params: &ModelParams) -> Result<()> {
    params.validate()?;
    if !(params.gamma < 0.0) {
        return Err(PamError::Domain(format!(
            "trap regime requires gamma < 0, got {}",
            params.gamma
        )));
    }
    Ok(())
}

/// `int_0^inf e^{-lambda t} M_0(t) dt = 1 / (lambda (1 - gamma r^{kappa+rho}_lambda(0)))`.
pub fn mass_laplace_transform(params: &ModelParams, lambda: f64, acc: &KernelAccuracy) -> Result<f64> {
    require_trap(params)?;
    if !(lambda > 0.0) {
        return Err(PamError::Domain(format!("lambda must be positive, got {lambda}")));
    }
    let r = resolvent_kernel(&params.merged_walk(), lambda, &LatticePoint::origin(params.d), acc)?;
    Ok(1.0 / (lambda * (1.0 - params.gamma * r)))
}

/// Large-time asymptote of `M_z(t)` in the recurrent dimensions.
pub fn decay_asymptote(params: &ModelParams, t: f64) -> Result<AsymptoteValue> {
    require_trap(params)?;
    if !(t > 0.0) {
        return Err(PamError::Domain(format!("t must be positive, got {t}")));
    }
    let c = params.merged_rate();
    let g = -params.gamma;
    match params.d {
        1 => Ok(AsymptoteValue {
            value: 2.0 / PI.sqrt() * c.sqrt() / g / t.sqrt(),
            regime: Regime::DecayD1,
        }),
        2 => {
            if !(t > 1.0) {
                return Err(PamError::Domain(format!("d = 2 asymptote needs t > 1, got {t}")));
            }
            Ok(AsymptoteValue {
                value: 4.0 * PI * c / g / t.ln(),
                regime: Regime::DecayD2,
            })
        }
        d => Err(PamError::Dimension(format!(
            "the decay asymptote holds in d = 1, 2, got d = {d}"
        ))),
    }
}

fn transient_coefficient(params: &ModelParams, g0: f64) -> f64 {
    params.gamma / (params.merged_rate() - params.gamma * g0)
}

/// `lim_t M_z(t) = 1 + gamma / (kappa + rho - gamma G_1(0)) G_1(z)` for `d >= 3`.
pub fn mass_limit_transient(params: &ModelParams, z: &LatticePoint, acc: &KernelAccuracy) -> Result<f64> {
    require_trap(params)?;
    if params.d <= 2 {
        return Err(PamError::Dimension(format!(
            "the transient limit needs d >= 3, got d = {}",
            params.d
        )));
    }
    z.check_dim(params.d)?;
    let unit = crate::lattice::WalkParams::new(params.d, 1.0)?;
    let g0 = green_function(&unit, &LatticePoint::origin(params.d), acc)?;
    let gz = if z.max_abs() == 0 {
        g0
    } else {
        green_function(&unit, z, acc)?
    };
    Ok(1.0 + transient_coefficient(params, g0) * gz)
}

/// [`mass_limit_transient`] on every site of the `d`-dimensional box of the given radius.
pub fn mass_limit_transient_field(params: &ModelParams, radius: usize, acc: &KernelAccuracy) -> Result<Field> {
    require_trap(params)?;
    if params.d <= 2 {
        return Err(PamError::Dimension(format!(
            "the transient limit needs d >= 3, got d = {}",
            params.d
        )));
    }
    let domain = BoxDomain::new(1, params.d, radius)?;
    let unit = crate::lattice::WalkParams::new(params.d, 1.0)?;
    let table = green_table(&unit, radius, acc)?;
    let g0 = table.get(&vec![0; params.d]).expect("origin is in the table");
    let c = transient_coefficient(params, g0);
    Ok(Field::from_fn(domain, |z| {
        1.0 + c * table.get(z).expect("box and table share the radius")
    }))
}

/// `max |(kappa + rho) Delta v(z) + gamma delta_0(z) v(z)|` over the sites of
/// the box whose neighbours all lie in the box.
pub fn bvp_residual(v: &Field, params: &ModelParams) -> Result<f64> {
    Ok(bvp_residuals(v, params)?
        .into_iter()
        .map(|(_, r)| r.abs())
        .fold(0.0, f64::max))
}

/// Per-site residuals `(index, (kappa + rho) Delta v + gamma delta_0 v)` behind [`bvp_residual`].
pub fn bvp_residuals(v: &Field, params: &ModelParams) -> Result<Vec<(usize, f64)>> {
    let dom = v.domain;
    if dom.p != 1 || dom.d != params.d {
        return Err(PamError::Dimension(format!(
            "field lives on Z^{} (p = {}), expected Z^{}",
            dom.d, dom.p, params.d
        )));
    }
    if dom.radius < 2 {
        return Err(PamError::Domain("the box needs at least two interior shells".into()));
    }
    let c = params.merged_rate();
    let origin = dom.origin_index();
    let mut out = Vec::new();
    for i in 0..dom.len() {
        if dom.depth(&dom.coords(i)) == 0 {
            continue;
        }
        let mut lap = 0.0;
        for a in 0..dom.dims() {
            let s = dom.stride(a);
            lap += v.values[i + s] + v.values[i - s] - 2.0 * v.values[i];
        }
        let mut r = c * lap;
        if i == origin {
            r += params.gamma * v.values[i];
        }
        out.push((i, r));
    }
    Ok(out)
}

/// `lim_t m_x(t)` in `d = 1` as a function of `a = kappa / rho`:
/// `1 - (1/pi) int_0^1 sqrt((1+a)(1-s)s + a s^2/(1+a)) / (a s^2 (1 + 1/(1+a)^2) + s) ds`.
pub fn homogeneous_limit_d1(a: f64, tol: f64) -> Result<f64> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(PamError::Domain(format!("a must be positive, got {a}")));
    }
    let c = 1.0 + 1.0 / ((1.0 + a) * (1.0 + a));
    // s = u^2 removes the s^{-1/2} singularity at the origin
    let f = |u: f64| {
        let u2 = u * u;
        let num = ((1.0 + a) * (1.0 - u2) + a * u2 / (1.0 + a)).max(0.0).sqrt();
        2.0 * num / (a * u2 * c + 1.0)
    };
    let integral = quad::integrate(f, 0.0, 1.0, tol)?;
    Ok(1.0 - integral / PI)
}

/// `lim_t m_x(t)` for `d >= 2`.
pub fn homogeneous_limit_high_d() -> f64 {
    1.0
}

/// Dispatch on a named regime; `z` is used by the transient limit, `t` by the decay asymptotes.
pub fn asymptote(
    params: &ModelParams,
    regime: Regime,
    t: f64,
    z: &LatticePoint,
    acc: &KernelAccuracy,
) -> Result<AsymptoteValue> {
    if !regime.admits(params.d) {
        return Err(PamError::Dimension(format!(
            "regime {} does not apply in d = {}",
            regime.name(),
            params.d
        )));
    }
    let value = match regime {
        Regime::DecayD1 | Regime::DecayD2 => return decay_asymptote(params, t),
        Regime::LimitTransient => mass_limit_transient(params, z, acc)?,
        Regime::LimitHomogD1 => homogeneous_limit_d1(params.a(), acc.abs_tol)?,
        Regime::LimitHomogHighD => homogeneous_limit_high_d(),
    };
    Ok(AsymptoteValue { value, regime })
}
