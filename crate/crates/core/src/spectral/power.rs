//! Principal eigenpair of `H^p` on a truncated box by shifted power iteration.

use serde::{Deserialize, Serialize};

use crate::error::{PamError, Result};
use crate::evolver::{BoxDomain, Field, Padded, Stencil};
use crate::model::ModelParams;

/// Whether existence of a principal eigenfunction on the whole lattice is known.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectralRegime {
    Proven,
    /// `p >= 3` with `gamma <= 4d(kappa p + rho)`: the box result is reported
    /// but nothing guarantees a limit as the box grows.
    UnprovenRegime,
}

impl SpectralRegime {
    pub fn of(params: &ModelParams, lambda: f64) -> Self {
        if params.gamma > params.generator_bound() || (params.p <= 2 && lambda > 0.0) {
            SpectralRegime::Proven
        } else {
            SpectralRegime::UnprovenRegime
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralSolution {
    pub lambda: f64,
    /// Strictly positive, unit `l2` norm.
    pub eigenfunction: Field,
    /// `||H v - lambda v||_2`.
    pub residual: f64,
    pub l1_norm: f64,
    pub domain: BoxDomain,
    pub iterations: usize,
    /// `lambda - mu_2` estimated from the convergence factor of the iteration.
    pub gap_estimate: f64,
    /// Smallest and largest Rayleigh quotient of `A^p` seen along the iteration.
    pub kinetic_ritz: (f64, f64),
    pub regime: SpectralRegime,
}

/// Exact projection onto functions invariant under permutations of the `p`
/// blocks: every orbit gets the mean of its sorted values, so all members
/// receive bitwise the same number.
struct Symmetrizer {
    members: Vec<usize>,
    offsets: Vec<usize>,
}

impl Symmetrizer {
    fn new(layout: &Padded, p: usize, d: usize) -> Option<Self> {
        if p < 2 {
            return None;
        }
        let mut keyed: Vec<(Vec<i64>, usize)> = Vec::with_capacity(layout.len());
        layout.for_each_site(|i, x| {
            let mut blocks: Vec<&[i64]> = x.chunks(d).collect();
            blocks.sort();
            keyed.push((blocks.concat(), i));
        });
        keyed.sort();
        let mut members = Vec::with_capacity(keyed.len());
        let mut offsets = vec![0];
        for (k, (key, i)) in keyed.iter().enumerate() {
            if k > 0 && keyed[k - 1].0 != *key {
                offsets.push(members.len());
            }
            members.push(*i);
        }
        offsets.push(members.len());
        Some(Self { members, offsets })
    }

    fn apply(&self, v: &mut [f64]) {
        let mut buf = Vec::new();
        for w in self.offsets.windows(2) {
            let orbit = &self.members[w[0]..w[1]];
            if orbit.len() == 1 {
                continue;
            }
            buf.clear();
            buf.extend(orbit.iter().map(|&i| v[i]));
            buf.sort_by(f64::total_cmp);
            let mean = buf.iter().sum::<f64>() / orbit.len() as f64;
            for &i in orbit {
                v[i] = mean;
            }
        }
    }
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Start vector: normalized indicator of the potential support `{some x_i = 0}`.
pub fn potential_support_indicator(domain: &BoxDomain) -> Field {
    let d = domain.d;
    let mut f = Field::from_fn(*domain, |x| {
        if x.chunks(d).any(|b| b.iter().all(|&c| c == 0)) {
            1.0
        } else {
            0.0
        }
    });
    let n = f.norm2();
    f.scale(1.0 / n);
    f
}

/// [`top_eigenpair_from`] started at [`potential_support_indicator`].
pub fn top_eigenpair(params: &ModelParams, domain: &BoxDomain, tol: f64, maxiter: usize) -> Result<SpectralSolution> {
    let start = potential_support_indicator(domain);
    top_eigenpair_from(params, domain, &start, tol, maxiter)
}

/// Power iteration on `H^p + sigma` with `sigma = 4d(kappa p + rho)`, which is
/// entrywise nonnegative on the box. Stops once `||H v - lambda v||_2 <= tol`
/// and every site has been reached (at least `pd R` iterations). For `p >= 2`
/// each iterate is projected onto block-symmetric functions.
pub fn top_eigenpair_from(
    params: &ModelParams,
    domain: &BoxDomain,
    start: &Field,
    tol: f64,
    maxiter: usize,
) -> Result<SpectralSolution> {
    params.validate()?;
    if domain.p != params.p || domain.d != params.d {
        return Err(PamError::Dimension(format!(
            "box is for p = {}, d = {} but params have p = {}, d = {}",
            domain.p, domain.d, params.p, params.d
        )));
    }
    if start.domain != *domain {
        return Err(PamError::Dimension("start vector lives on a different box".into()));
    }
    if !(tol > 0.0) {
        return Err(PamError::Domain(format!("tolerance must be positive, got {tol}")));
    }
    if start.values.iter().any(|&v| v < 0.0 || !v.is_finite()) || start.sum() == 0.0 {
        return Err(PamError::Domain("start vector must be nonnegative and nonzero".into()));
    }
    let st = Stencil::hamiltonian(params, domain.radius);
    let sigma = params.generator_bound();
    let sym = Symmetrizer::new(&st.layout, params.p, params.d);
    let min_iter = domain.dims() * domain.radius + 1;

    let mut v = st.layout.from_field(start);
    if let Some(s) = &sym {
        s.apply(&mut v);
    }
    let n0 = norm2(&v);
    v.iter_mut().for_each(|x| *x /= n0);
    let mut hv = vec![0.0; v.len()];
    let mut residuals: Vec<f64> = Vec::new();
    let mut ritz = (f64::INFINITY, f64::NEG_INFINITY);
    let mut lambda = f64::NAN;
    let mut residual = f64::INFINITY;
    let mut iterations = 0;
    while iterations < maxiter {
        st.apply(&v, &mut hv);
        lambda = v.iter().zip(&hv).map(|(a, b)| a * b).sum();
        let pot: f64 = st.potential_sites().iter().map(|&(i, g)| g * v[i] * v[i]).sum();
        ritz = (ritz.0.min(lambda - pot), ritz.1.max(lambda - pot));
        residual = v
            .iter()
            .zip(&hv)
            .map(|(a, b)| (b - lambda * a).powi(2))
            .sum::<f64>()
            .sqrt();
        residuals.push(residual);
        if !residual.is_finite() {
            return Err(PamError::Overflow("power iteration produced non-finite values".into()));
        }
        if residual <= tol && iterations >= min_iter {
            break;
        }
        for (a, b) in v.iter_mut().zip(&hv) {
            *a = b + sigma * *a;
        }
        if let Some(s) = &sym {
            s.apply(&mut v);
        }
        let n = norm2(&v);
        v.iter_mut().for_each(|x| *x /= n);
        iterations += 1;
    }
    if !(residual <= tol) {
        return Err(PamError::NoConvergence { iterations, residual });
    }
    if !(lambda > 0.0) {
        return Err(PamError::NonPositiveEigenvalue(lambda));
    }
    let eigenfunction = st.layout.to_field(&v, *domain);
    if eigenfunction.values.iter().any(|&x| !(x > 0.0)) {
        return Err(PamError::Tolerance(format!(
            "eigenfunction underflows on the box of radius {}; use a smaller box",
            domain.radius
        )));
    }
    let l1_norm = eigenfunction.norm1();
    let gap_estimate = (lambda + sigma) * (1.0 - convergence_factor(&residuals));
    Ok(SpectralSolution {
        lambda,
        residual,
        l1_norm,
        domain: *domain,
        iterations,
        gap_estimate,
        kinetic_ritz: ritz,
        regime: SpectralRegime::of(params, lambda),
        eigenfunction,
    })
}

/// Geometric mean of the residual ratios over the tail of the iteration,
/// skipping steps whose residual is already at rounding level.
fn convergence_factor(residuals: &[f64]) -> f64 {
    let floor = residuals.first().copied().unwrap_or(0.0) * 1e-13;
    let usable: Vec<f64> = residuals.iter().copied().take_while(|&r| r > floor).collect();
    if usable.len() < 3 {
        return 0.0;
    }
    let k = (usable.len() / 3).clamp(2, 20);
    let tail = &usable[usable.len() - k - 1..];
    let ratio = (tail[k] / tail[0]).powf(1.0 / k as f64);
    ratio.clamp(0.0, 1.0 - 1e-12)
}
