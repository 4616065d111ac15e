//! Browser bindings: three small computations driven by `www/index.html`.

use pam_core::evolver::{localized_mass_series, BoxDomain};
use pam_core::spectral::top_eigenpair;
use pam_core::trap::{decay_asymptote, homogeneous_limit_d1};
use pam_core::{LatticePoint, ModelParams};
use wasm_bindgen::prelude::*;

fn js(e: pam_core::PamError) -> JsError {
    JsError::new(&e.to_string())
}

/// Trap in `d = 1`: rows `[t, M_0(t), asymptote(t)]` flattened, for
/// `points` equally spaced times up to `t_max`.
#[wasm_bindgen]
pub fn decay_curve(kappa: f64, rho: f64, gamma: f64, t_max: f64, points: usize) -> Result<Vec<f64>, JsError> {
    let params = ModelParams::new(1, kappa, rho, gamma, 1).map_err(js)?;
    if points == 0 {
        return Err(JsError::new("need at least one point"));
    }
    let times: Vec<f64> = (1..=points).map(|k| t_max * k as f64 / points as f64).collect();
    let (masses, _) = localized_mass_series(&params, &LatticePoint::origin(1), &times, 1e-8).map_err(js)?;
    let mut out = Vec::with_capacity(3 * points);
    for (t, m) in times.iter().zip(masses) {
        out.extend([*t, m, decay_asymptote(&params, *t).map_err(js)?.value]);
    }
    Ok(out)
}

/// Long-time homogeneous trap moment in `d = 1` at each ratio `a = kappa / rho`.
#[wasm_bindgen]
pub fn homogeneous_limits(a: Vec<f64>) -> Result<Vec<f64>, JsError> {
    a.into_iter().map(|a| homogeneous_limit_d1(a, 1e-10).map_err(js)).collect()
}

/// Principal eigenpair of the catalyst Hamiltonian in `d = 1` on
/// `[-radius, radius]^p`: `[lambda, v...]` with `v` row-major.
#[wasm_bindgen]
pub fn eigenfunction(kappa: f64, rho: f64, gamma: f64, p: usize, radius: usize) -> Result<Vec<f64>, JsError> {
    if !(1..=2).contains(&p) {
        return Err(JsError::new("the demo draws p = 1 or p = 2"));
    }
    let params = ModelParams::new(1, kappa, rho, gamma, p).map_err(js)?;
    let domain = BoxDomain::new(p, 1, radius).map_err(js)?;
    let sol = top_eigenpair(&params, &domain, 1e-9, 100_000).map_err(js)?;
    let mut out = Vec::with_capacity(1 + sol.eigenfunction.values.len());
    out.push(sol.lambda);
    out.extend(sol.eigenfunction.values);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigenvalue_matches_closed_form() {
        let v = eigenfunction(1.0, 1.0, 5.0, 1, 60).unwrap();
        assert!((v[0] - (-4.0 + 41f64.sqrt())).abs() < 1e-7);
        assert_eq!(v.len(), 122);
    }

    #[test]
    fn homogeneous_values() {
        let v = homogeneous_limits(vec![1.0]).unwrap();
        assert!((v[0] - 0.39935229824423757).abs() < 1e-9);
    }
}
