use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{PamError, Result};
use crate::lattice::{LatticePoint, WalkParams};
use crate::model::ModelParams;
use crate::par;

use super::path::{next_jump, pair_occupation_time, sample_path_into, step, PathSample};
use super::rng::RngStream;

/// Default cap on `gamma p t` for the catalyst estimator.
pub const CATALYST_CAP: f64 = 15.0;
/// Smallest acceptable effective sample size of the catalyst estimator.
pub const MIN_ESS: f64 = 100.0;
/// Replicas per reduction block.
const BLOCK: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub n: usize,
    pub seed: u64,
    pub horizon: f64,
    /// `(sum w)^2 / sum w^2` of the replica weights.
    pub ess: f64,
}

impl McEstimate {
    /// Whether `value` lies within `k` standard errors of the mean.
    pub fn covers(&self, value: f64, k: f64) -> bool {
        (self.mean - value).abs() <= k * self.std_error
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    n: f64,
    mean: f64,
    m2: f64,
    sum_w2: f64,
}

impl Moments {
    fn push(&mut self, w: f64) {
        self.n += 1.0;
        let delta = w - self.mean;
        self.mean += delta / self.n;
        self.m2 += delta * (w - self.mean);
        self.sum_w2 += w * w;
    }

    fn merge(a: Moments, b: Moments) -> Moments {
        if a.n == 0.0 {
            return b;
        }
        if b.n == 0.0 {
            return a;
        }
        let n = a.n + b.n;
        let delta = b.mean - a.mean;
        Moments {
            n,
            mean: a.mean + delta * b.n / n,
            m2: a.m2 + b.m2 + delta * delta * a.n * b.n / n,
            sum_w2: a.sum_w2 + b.sum_w2,
        }
    }

    fn tree(blocks: &[Moments]) -> Moments {
        match blocks.len() {
            0 => Moments::default(),
            1 => blocks[0],
            k => Moments::merge(Self::tree(&blocks[..k / 2]), Self::tree(&blocks[k / 2..])),
        }
    }
}

/// Mean and standard error of `weight(scratch, rng_k)` over replicas
/// `k = 0..n`. Replicas are grouped in fixed blocks and block statistics are
/// merged pairwise in a fixed tree, so the result does not depend on the
/// number of worker threads.
fn reduce<S, I, F>(n: usize, seed: u64, horizon: f64, init: I, weight: F) -> McEstimate
where
    I: Fn() -> S + Sync,
    F: Fn(&mut S, &mut ChaCha8Rng) -> f64 + Sync,
{
    let blocks = n.div_ceil(BLOCK);
    let stats = par::map_range(blocks, |b| {
        let mut scratch = init();
        let mut m = Moments::default();
        for k in b * BLOCK..((b + 1) * BLOCK).min(n) {
            let mut rng = RngStream::new(seed, k as u64).rng();
            m.push(weight(&mut scratch, &mut rng));
        }
        m
    });
    let m = Moments::tree(&stats);
    let var = if m.n > 1.0 { m.m2 / (m.n - 1.0) } else { 0.0 };
    let sum_w = m.mean * m.n;
    McEstimate {
        mean: m.mean,
        std_error: (var / m.n).sqrt(),
        n,
        seed,
        horizon,
        ess: if m.sum_w2 > 0.0 { sum_w * sum_w / m.sum_w2 } else { 0.0 },
    }
}

fn check_run(t: f64, n: usize) -> Result<()> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(PamError::Domain(format!("horizon must be positive, got {t}")));
    }
    if n < 2 {
        return Err(PamError::Domain(format!("need at least 2 replicas, got {n}")));
    }
    Ok(())
}

fn require_nonpositive(params: &ModelParams) -> Result<()> {
    if params.gamma > 0.0 {
        return Err(PamError::Domain(format!(
            "gamma = {} > 0 makes the weight unbounded; use the moment evolver",
            params.gamma
        )));
    }
    Ok(())
}

/// Local time at the origin of the walk with generator `rate_per_dir * Delta`
/// from `z`, consuming random numbers exactly as [`super::sample_path`] does.
pub(crate) fn origin_local_time<R: Rng>(rng: &mut R, walk: &WalkParams, z: &[i64], horizon: f64, x: &mut Vec<i64>) -> f64 {
    x.clear();
    x.extend_from_slice(z);
    let rate = 2.0 * walk.d as f64 * walk.kappa;
    let mut t = 0.0;
    let mut local = 0.0;
    while let Some((tj, dir)) = next_jump(rng, rate, 2 * walk.d, t, horizon) {
        if x.iter().all(|&c| c == 0) {
            local += tj - t;
        }
        t = tj;
        step(x, dir);
    }
    if x.iter().all(|&c| c == 0) {
        local += horizon - t;
    }
    local
}

/// `M_z(t) = E_z exp(gamma L_t(0))` with `L_t(0)` the local time at the
/// origin of the `(kappa + rho)`-walk `Z = X - Y` started at `z`.
pub fn estimate_localized_mass(params: &ModelParams, z: &LatticePoint, t: f64, n: usize, seed: u64) -> Result<McEstimate> {
    params.validate()?;
    z.check_dim(params.d)?;
    check_run(t, n)?;
    require_nonpositive(params)?;
    let walk = params.merged_walk();
    let gamma = params.gamma;
    Ok(reduce(n, seed, t, Vec::new, |x, rng| {
        (gamma * origin_local_time(rng, &walk, z.coords(), t, x)).exp()
    }))
}

/// `m_x(t) = E exp(gamma int_0^t delta_{Y_{t-s}}(X_s) ds)` with `X` a
/// `kappa`-walk from `x` and `Y` a `rho`-walk from the origin. Each replica
/// draws `Y` first and then `X` from one stream; `Y` is reversed by index
/// arithmetic in [`pair_occupation_time`].
pub fn estimate_homogeneous_mass(params: &ModelParams, x: &LatticePoint, t: f64, n: usize, seed: u64) -> Result<McEstimate> {
    params.validate()?;
    x.check_dim(params.d)?;
    check_run(t, n)?;
    require_nonpositive(params)?;
    let wx = WalkParams::new(params.d, params.kappa)?;
    let wy = WalkParams::new(params.d, params.rho)?;
    let origin = vec![0i64; params.d];
    let gamma = params.gamma;
    let empty = LatticePoint::origin(params.d);
    Ok(reduce(
        n,
        seed,
        t,
        || (PathSample::constant(&empty, t), PathSample::constant(&empty, t)),
        |(px, py), rng| {
            sample_path_into(&wy, t, rng, &origin, py);
            sample_path_into(&wx, t, rng, x.coords(), px);
            let occ = pair_occupation_time(px, py, true).expect("equal horizons and dimensions");
            (gamma * occ).exp()
        },
    ))
}

/// `m_p(t, x) = E exp(gamma sum_i int_0^t delta_0(x_i + X^i_s + Y_s) ds)` with
/// `p` independent `kappa`-walks `X^i` and one shared `rho`-walk `Y`, all
/// simulated as a single superposed jump process.
pub fn estimate_catalyst_moment(params: &ModelParams, x: &[LatticePoint], t: f64, n: usize, seed: u64) -> Result<McEstimate> {
    estimate_catalyst_moment_with(params, x, t, n, seed, CATALYST_CAP)
}

pub fn estimate_catalyst_moment_with(
    params: &ModelParams,
    x: &[LatticePoint],
    t: f64,
    n: usize,
    seed: u64,
    cap: f64,
) -> Result<McEstimate> {
    params.validate()?;
    check_run(t, n)?;
    let (p, d) = (params.p, params.d);
    if x.len() != p {
        return Err(PamError::Dimension(format!("need {p} starting points, got {}", x.len())));
    }
    for xi in x {
        xi.check_dim(d)?;
    }
    let load = params.gamma.max(0.0) * p as f64 * t;
    if load > cap {
        return Err(PamError::Domain(format!(
            "gamma p t = {load} exceeds the cap {cap}; use the moment evolver"
        )));
    }
    let start: Vec<i64> = x.iter().flat_map(|xi| xi.coords().iter().copied()).collect();
    let kappa_moves = (p * 2 * d) as f64 * params.kappa;
    let total = kappa_moves + 2.0 * d as f64 * params.rho;
    let (kappa, rho, gamma) = (params.kappa, params.rho, params.gamma);
    let est = reduce(n, seed, t, Vec::new, |z: &mut Vec<i64>, rng| {
        z.clear();
        z.extend_from_slice(&start);
        let zeros = |z: &[i64]| z.chunks(d).filter(|b| b.iter().all(|&c| c == 0)).count() as f64;
        let mut now = 0.0;
        let mut local = 0.0;
        loop {
            let hold: f64 = rng.sample::<f64, _>(rand_distr::Exp1) / total;
            let next = now + hold;
            if next >= t {
                local += zeros(z) * (t - now);
                break;
            }
            local += zeros(z) * hold;
            now = next;
            let u = rng.random::<f64>() * total;
            if u < kappa_moves {
                let idx = ((u / kappa) as usize).min(p * 2 * d - 1);
                let (walker, dir) = (idx / (2 * d), idx % (2 * d));
                step(&mut z[walker * d..(walker + 1) * d], dir);
            } else {
                let dir = (((u - kappa_moves) / rho) as usize).min(2 * d - 1);
                for block in z.chunks_mut(d) {
                    step(block, dir);
                }
            }
        }
        (gamma * local).exp()
    });
    let min_ess = MIN_ESS.min(n as f64);
    if est.ess < min_ess {
        return Err(PamError::Variance {
            ess: est.ess,
            min: min_ess,
        });
    }
    Ok(est)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mc::{local_time_at, sample_path};

    #[test]
    fn streaming_local_time_matches_stored_path() {
        let walk = WalkParams::new(2, 1.7).unwrap();
        for k in 0..20 {
            let s = RngStream::new(11, k);
            let path = sample_path(&walk, 6.0, s, &vec![1, 0].into()).unwrap();
            let want = local_time_at(&path, &LatticePoint::origin(2)).unwrap();
            let got = origin_local_time(&mut s.rng(), &walk, &[1, 0], 6.0, &mut Vec::new());
            assert_eq!(want, got);
        }
    }

    #[test]
    fn zero_coupling_is_exact() {
        let p = ModelParams::new(2, 1.0, 1.0, 0.0, 1).unwrap();
        let e = estimate_localized_mass(&p, &vec![0, 0].into(), 3.0, 100, 1).unwrap();
        assert_eq!((e.mean, e.std_error), (1.0, 0.0));
        let e = estimate_homogeneous_mass(&p, &vec![0, 0].into(), 3.0, 100, 1).unwrap();
        assert_eq!((e.mean, e.std_error), (1.0, 0.0));
        let p2 = p.with_p(2);
        let e = estimate_catalyst_moment(&p2, &[vec![0, 0].into(), vec![1, 0].into()], 3.0, 100, 1).unwrap();
        assert_eq!((e.mean, e.std_error), (1.0, 0.0));
    }

    #[test]
    fn sign_and_cap_checks() {
        let p = ModelParams::new(1, 1.0, 1.0, 1.0, 1).unwrap();
        assert!(estimate_localized_mass(&p, &vec![0].into(), 1.0, 10, 0).is_err());
        assert!(estimate_homogeneous_mass(&p, &vec![0].into(), 1.0, 10, 0).is_err());
        let e = estimate_catalyst_moment(&p.with_gamma(4.0), &[vec![0].into()], 4.0, 10, 0);
        assert!(matches!(e, Err(PamError::Domain(_))));
    }

    #[test]
    fn deterministic_in_seed() {
        let p = ModelParams::new(1, 1.0, 0.5, -0.7, 1).unwrap();
        let a = estimate_homogeneous_mass(&p, &vec![1].into(), 2.0, 3000, 9).unwrap();
        let b = estimate_homogeneous_mass(&p, &vec![1].into(), 2.0, 3000, 9).unwrap();
        assert_eq!(a, b);
        let c = estimate_homogeneous_mass(&p, &vec![1].into(), 2.0, 3000, 10).unwrap();
        assert_ne!(a.mean, c.mean);
        assert!(a.mean > 0.0 && a.mean <= 1.0);
    }

    #[test]
    fn block_merge_matches_two_pass_statistics() {
        let ws: Vec<f64> = (0..5000).map(|k| ((k * 7919) % 1000) as f64 / 999.0).collect();
        let blocks: Vec<Moments> = ws
            .chunks(BLOCK)
            .map(|c| {
                let mut m = Moments::default();
                c.iter().for_each(|&w| m.push(w));
                m
            })
            .collect();
        let m = Moments::tree(&blocks);
        let mean = ws.iter().sum::<f64>() / ws.len() as f64;
        let m2: f64 = ws.iter().map(|w| (w - mean) * (w - mean)).sum();
        assert!((m.mean - mean).abs() < 1e-14);
        assert!((m.m2 - m2).abs() < 1e-9 * m2);
    }
}
