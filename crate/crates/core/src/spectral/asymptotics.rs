//! Comparison of evolved moments with the principal-eigenpair prediction
//! `m_p(t, x) ~ e^{lambda t} v(x) ||v||_1`.

use serde::{Deserialize, Serialize};

use crate::error::{PamError, Result};
use crate::evolver::{catalyst_margin, catalyst_moment_series, default_radius, BoxDomain};
use crate::lattice::LatticePoint;
use crate::model::ModelParams;

use super::power::SpectralSolution;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticsReport {
    pub times: Vec<f64>,
    pub sites: Vec<Vec<i64>>,
    /// `ratios[k][j] = e^{-lambda t_k} m_p(t_k, x_j) / (v(x_j) ||v||_1)`.
    pub ratios: Vec<Vec<f64>>,
    /// `max_j |ratios[k][j] - 1|` for each time.
    pub max_deviation: Vec<f64>,
    pub radius: usize,
}

/// Time by which the subleading part of the spectrum is suppressed by `1e-3`.
pub fn t_star(solution: &SpectralSolution) -> f64 {
    1000f64.ln() / solution.gap_estimate
}

/// All sites of `Z^{pd}` with every coordinate in `{-1, 0, 1}`.
pub fn central_sites(p: usize, d: usize) -> Vec<LatticePoint> {
    let n = p * d;
    (0..3usize.pow(n as u32))
        .map(|mut k| {
            let mut x = vec![0i64; n];
            for c in x.iter_mut().rev() {
                *c = (k % 3) as i64 - 1;
                k /= 3;
            }
            x.into()
        })
        .collect()
}

/// Evolves `m_p` to each of `times` and reports the ratio to the eigenpair
/// prediction at `sites`, doubling the evolution box on leaks.
pub fn asymptotics_check(
    params: &ModelParams,
    solution: &SpectralSolution,
    times: &[f64],
    sites: &[LatticePoint],
    tol: f64,
) -> Result<AsymptoticsReport> {
    params.validate()?;
    if solution.domain.p != params.p || solution.domain.d != params.d {
        return Err(PamError::Dimension("solution was computed for another (p, d)".into()));
    }
    let t_max = *times
        .last()
        .ok_or_else(|| PamError::Domain("need at least one time".into()))?;
    let mut predicted = Vec::with_capacity(sites.len());
    for x in sites {
        x.check_dim(params.p * params.d)?;
        let v = solution.eigenfunction.get(x.coords()).ok_or_else(|| {
            PamError::Domain(format!("site {:?} is outside the eigenfunction box", x.coords()))
        })?;
        predicted.push(v * solution.l1_norm);
    }
    let reach = sites.iter().map(|x| x.max_abs() as usize).max().unwrap_or(0);
    let margin = catalyst_margin(params, t_max, tol);
    let mut radius = default_radius(params, t_max).max(2 * margin + reach + 1);
    let mut doublings = 0;
    let (fields, dom) = loop {
        let dom = BoxDomain::new(params.p, params.d, radius)?;
        match catalyst_moment_series(params, times, tol, &dom) {
            Ok((fields, _)) => break (fields, dom),
            Err(PamError::Leak { .. }) if doublings < 4 => {
                radius *= 2;
                doublings += 1;
            }
            Err(e) => return Err(e),
        }
    };
    let mut ratios = Vec::with_capacity(times.len());
    let mut max_deviation = Vec::with_capacity(times.len());
    for (t, f) in times.iter().zip(&fields) {
        let row: Vec<f64> = sites
            .iter()
            .zip(&predicted)
            .map(|(x, pred)| {
                let m = f.values[dom.index(x.coords()).expect("site inside the interior cube")];
                (-solution.lambda * t).exp() * m / pred
            })
            .collect();
        max_deviation.push(row.iter().map(|r| (r - 1.0).abs()).fold(0.0, f64::max));
        ratios.push(row);
    }
    Ok(AsymptoticsReport {
        times: times.to_vec(),
        sites: sites.iter().map(|x| x.coords().to_vec()).collect(),
        ratios,
        max_deviation,
        radius,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::top_eigenpair;

    #[test]
    fn central_site_count() {
        assert_eq!(central_sites(2, 1).len(), 9);
        assert!(central_sites(1, 2).iter().any(|x| x.coords() == [-1, 1]));
    }

    #[test]
    fn p1_ratio_tends_to_one() {
        let params = ModelParams::new(1, 1.0, 1.0, 5.0, 1).unwrap();
        let sol = top_eigenpair(&params, &BoxDomain::new(1, 1, 80).unwrap(), 1e-11, 10_000).unwrap();
        let ts = t_star(&sol);
        let rep = asymptotics_check(&params, &sol, &[ts / 4.0, ts / 2.0, ts], &central_sites(1, 1), 1e-10).unwrap();
        let dev = &rep.max_deviation;
        assert!(dev[2] < 0.02, "{dev:?}");
        assert!(dev[1] < dev[0] && dev[2] < dev[1], "{dev:?}");
    }
}
