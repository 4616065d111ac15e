use rand::Rng;
use rand_distr::Exp1;

use crate::error::{PamError, Result};
use crate::lattice::{LatticePoint, WalkParams};

use super::rng::RngStream;

/// One trajectory of a continuous-time walk on `[0, horizon)`: the site
/// `sites[k]` is occupied on `[jump_times[k-1], jump_times[k])` with
/// `jump_times[-1] = 0` and `jump_times[len] = horizon`.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSample {
    pub d: usize,
    pub horizon: f64,
    pub jump_times: Vec<f64>,
    /// Visited sites, flattened (`d` coordinates each).
    pub coords: Vec<i64>,
}

impl PathSample {
    /// A path that stays at `start` for the whole horizon.
    pub fn constant(start: &LatticePoint, horizon: f64) -> Self {
        Self {
            d: start.dim(),
            horizon,
            jump_times: Vec::new(),
            coords: start.coords().to_vec(),
        }
    }

    /// Builds a path from explicit jump times and sites, checking the invariants.
    pub fn from_parts(horizon: f64, jump_times: Vec<f64>, sites: &[LatticePoint]) -> Result<Self> {
        if sites.len() != jump_times.len() + 1 {
            return Err(PamError::Domain("need one more site than jump times".into()));
        }
        let d = sites[0].dim();
        if jump_times.windows(2).any(|w| w[1] <= w[0])
            || jump_times.first().is_some_and(|&t| t < 0.0)
            || jump_times.last().is_some_and(|&t| t >= horizon)
        {
            return Err(PamError::Domain("jump times must increase within [0, horizon)".into()));
        }
        for w in sites.windows(2) {
            w[1].check_dim(d)?;
            let diff: i64 = w[0].coords().iter().zip(w[1].coords()).map(|(a, b)| (a - b).abs()).sum();
            if diff != 1 {
                return Err(PamError::Domain("consecutive sites must be neighbours".into()));
            }
        }
        Ok(Self {
            d,
            horizon,
            jump_times,
            coords: sites.iter().flat_map(|s| s.coords().iter().copied()).collect(),
        })
    }

    pub fn jumps(&self) -> usize {
        self.jump_times.len()
    }

    pub fn site(&self, k: usize) -> &[i64] {
        &self.coords[k * self.d..(k + 1) * self.d]
    }

    pub fn sites(&self) -> Vec<LatticePoint> {
        (0..=self.jumps()).map(|k| self.site(k).into()).collect()
    }

    pub fn end(&self) -> &[i64] {
        self.site(self.jumps())
    }

    /// `(start, end, site)` of the `k`-th holding interval.
    fn segment(&self, k: usize) -> (f64, f64, &[i64]) {
        let a = if k == 0 { 0.0 } else { self.jump_times[k - 1] };
        let b = if k == self.jumps() {
            self.horizon
        } else {
            self.jump_times[k]
        };
        (a, b, self.site(k))
    }

    /// `k`-th holding interval of the reversed path `s -> X_{horizon - s}`.
    fn reversed_segment(&self, k: usize) -> (f64, f64, &[i64]) {
        let j = self.jumps() - k;
        let (a, b, x) = self.segment(j);
        (self.horizon - b, self.horizon - a, x)
    }

    fn clear(&mut self, start: &[i64], horizon: f64) {
        self.d = start.len();
        self.horizon = horizon;
        self.jump_times.clear();
        self.coords.clear();
        self.coords.extend_from_slice(start);
    }
}

/// Draws the holding time and, if it falls before the horizon, the direction
/// of the next jump. Directions `0..2d` map to `+e_{k/2}` (even) or `-e_{k/2}` (odd).
#[inline]
pub(crate) fn next_jump<R: Rng>(rng: &mut R, rate: f64, dirs: usize, now: f64, horizon: f64) -> Option<(f64, usize)> {
    let hold: f64 = rng.sample::<f64, _>(Exp1) / rate;
    let t = now + hold;
    if t >= horizon {
        return None;
    }
    Some((t, rng.random_range(0..dirs)))
}

#[inline]
pub(crate) fn step(x: &mut [i64], dir: usize) {
    x[dir / 2] += if dir % 2 == 0 { 1 } else { -1 };
}

pub(crate) fn sample_path_into<R: Rng>(
    walk: &WalkParams,
    horizon: f64,
    rng: &mut R,
    start: &[i64],
    out: &mut PathSample,
) {
    out.clear(start, horizon);
    let rate = 2.0 * walk.d as f64 * walk.kappa;
    let mut x = start.to_vec();
    let mut t = 0.0;
    while let Some((tj, dir)) = next_jump(rng, rate, 2 * walk.d, t, horizon) {
        t = tj;
        step(&mut x, dir);
        out.jump_times.push(t);
        out.coords.extend_from_slice(&x);
    }
}

/// Continuous-time walk with generator `kappa Delta`: exponential holding
/// times of rate `2 d kappa` and uniformly chosen unit steps.
pub fn sample_path(walk: &WalkParams, horizon: f64, stream: RngStream, start: &LatticePoint) -> Result<PathSample> {
    start.check_dim(walk.d)?;
    if !(horizon > 0.0) || !horizon.is_finite() {
        return Err(PamError::Domain(format!("horizon must be positive, got {horizon}")));
    }
    let mut rng = stream.rng();
    let mut out = PathSample::constant(start, horizon);
    sample_path_into(walk, horizon, &mut rng, start.coords(), &mut out);
    Ok(out)
}

/// Lebesgue time spent at `site` before the horizon.
pub fn local_time_at(path: &PathSample, site: &LatticePoint) -> Result<f64> {
    site.check_dim(path.d)?;
    let mut total = 0.0;
    for k in 0..=path.jumps() {
        let (a, b, x) = path.segment(k);
        if x == site.coords() {
            total += b - a;
        }
    }
    Ok(total)
}

/// Time during which `a` and `b` (or `s -> b_{horizon - s}` when `reversed_b`)
/// occupy the same site, by a merged sweep over both jump sequences.
pub fn pair_occupation_time(a: &PathSample, b: &PathSample, reversed_b: bool) -> Result<f64> {
    if a.horizon != b.horizon {
        return Err(PamError::HorizonMismatch(a.horizon, b.horizon));
    }
    if a.d != b.d {
        return Err(PamError::Dimension(format!("paths in d = {} and d = {}", a.d, b.d)));
    }
    let seg_b = |k: usize| {
        if reversed_b {
            b.reversed_segment(k)
        } else {
            b.segment(k)
        }
    };
    let (mut i, mut j) = (0usize, 0usize);
    let mut total = 0.0;
    let (mut sa, mut sb) = (a.segment(0), seg_b(0));
    loop {
        let lo = sa.0.max(sb.0);
        let hi = sa.1.min(sb.1);
        if hi > lo && sa.2 == sb.2 {
            total += hi - lo;
        }
        // advance whichever interval ends first
        if sa.1 <= sb.1 {
            if i == a.jumps() {
                break;
            }
            i += 1;
            sa = a.segment(i);
        } else {
            if j == b.jumps() {
                break;
            }
            j += 1;
            sb = seg_b(j);
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lp(c: &[i64]) -> LatticePoint {
        c.into()
    }

    #[test]
    fn determinism_and_invariants() {
        let w = WalkParams::new(2, 1.3).unwrap();
        let s = RngStream::new(7, 3);
        let a = sample_path(&w, 5.0, s, &lp(&[1, -1])).unwrap();
        let b = sample_path(&w, 5.0, s, &lp(&[1, -1])).unwrap();
        assert_eq!(a, b);
        let c = sample_path(&w, 5.0, RngStream::new(7, 4), &lp(&[1, -1])).unwrap();
        assert_ne!(a, c);
        let rebuilt = PathSample::from_parts(5.0, a.jump_times.clone(), &a.sites()).unwrap();
        assert_eq!(rebuilt, a);
    }

    #[test]
    fn local_time_partition_and_trivial_cases() {
        let w = WalkParams::new(1, 2.0).unwrap();
        let p = sample_path(&w, 3.0, RngStream::new(1, 0), &lp(&[0])).unwrap();
        let mut sites: Vec<i64> = p.coords.clone();
        sites.sort();
        sites.dedup();
        let total: f64 = sites.iter().map(|&s| local_time_at(&p, &lp(&[s])).unwrap()).sum();
        assert!((total - 3.0).abs() < 1e-12);
        let still = PathSample::constant(&lp(&[4]), 2.5);
        assert_eq!(local_time_at(&still, &lp(&[4])).unwrap(), 2.5);
        assert_eq!(local_time_at(&still, &lp(&[3])).unwrap(), 0.0);
    }

    #[test]
    fn pair_occupation_trivial_cases() {
        let w = WalkParams::new(1, 1.0).unwrap();
        let p = sample_path(&w, 4.0, RngStream::new(2, 9), &lp(&[0])).unwrap();
        assert!((pair_occupation_time(&p, &p, false).unwrap() - 4.0).abs() < 1e-12);
        let a = PathSample::constant(&lp(&[0]), 4.0);
        let b = PathSample::constant(&lp(&[1]), 4.0);
        assert_eq!(pair_occupation_time(&a, &b, true).unwrap(), 0.0);
        let c = PathSample::constant(&lp(&[1]), 3.0);
        assert!(matches!(
            pair_occupation_time(&a, &c, false),
            Err(PamError::HorizonMismatch(..))
        ));
    }

    #[test]
    fn reversal_is_index_arithmetic() {
        // b: 0 on [0,1), 1 on [1,3), 2 on [3,4); reversed: 2 on [0,1), 1 on [1,3), 0 on [3,4)
        let b = PathSample::from_parts(4.0, vec![1.0, 3.0], &[lp(&[0]), lp(&[1]), lp(&[2])]).unwrap();
        let a = PathSample::constant(&lp(&[2]), 4.0);
        assert_eq!(pair_occupation_time(&a, &b, false).unwrap(), 1.0);
        assert_eq!(pair_occupation_time(&a, &b, true).unwrap(), 1.0);
        let a0 = PathSample::from_parts(4.0, vec![0.5], &[lp(&[2]), lp(&[1])]).unwrap();
        assert_eq!(pair_occupation_time(&a0, &b, true).unwrap(), 0.5 + 2.0);
    }
}
