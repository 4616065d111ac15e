//! Classical fourth-order Runge-Kutta with step-doubling error control for
//! linear autonomous systems `y' = A y`.

use crate::error::{PamError, Result};

pub trait LinearFlow: Sync {
    fn len(&self) -> usize;
    fn apply(&self, f: &[f64], out: &mut [f64]);
    /// Upper bound on the spectral radius of `A`.
    fn spectral_bound(&self) -> f64;
}

/// Counters of one integration run.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct StepStats {
    pub steps: usize,
    pub rejected: usize,
    pub dt_used: f64,
}

struct Work {
    k: Vec<f64>,
    tmp: Vec<f64>,
    acc: Vec<f64>,
}

fn rk4_step<S: LinearFlow>(sys: &S, y: &mut [f64], h: f64, w: &mut Work) {
    let n = y.len();
    sys.apply(y, &mut w.k);
    for i in 0..n {
        w.acc[i] = y[i] + h / 6.0 * w.k[i];
        w.tmp[i] = y[i] + 0.5 * h * w.k[i];
    }
    sys.apply(&w.tmp, &mut w.k);
    for i in 0..n {
        w.acc[i] += h / 3.0 * w.k[i];
        w.tmp[i] = y[i] + 0.5 * h * w.k[i];
    }
    sys.apply(&w.tmp, &mut w.k);
    for i in 0..n {
        w.acc[i] += h / 3.0 * w.k[i];
        w.tmp[i] = y[i] + h * w.k[i];
    }
    sys.apply(&w.tmp, &mut w.k);
    for i in 0..n {
        y[i] = w.acc[i] + h / 6.0 * w.k[i];
    }
}

/// Largest explicit step allowed for `sys`: `0.5 / bound`.
pub fn max_step<S: LinearFlow>(sys: &S) -> f64 {
    0.5 / sys.spectral_bound().max(1e-12)
}

/// Integrates `y` from time 0 through the increasing `times`, calling
/// `observe(k, times[k], y)` at each. Steps never exceed [`max_step`]; each
/// pair of steps is checked against one double step and the local error is
/// kept below `tol * max|y| * (2h / T)` with `T` the final time.
pub fn integrate<S, F>(sys: &S, y: &mut Vec<f64>, times: &[f64], tol: f64, mut observe: F) -> Result<StepStats>
where
    S: LinearFlow,
    F: FnMut(usize, f64, &[f64]) -> Result<()>,
{
    if !(tol > 0.0) {
        return Err(PamError::Domain(format!("tolerance must be positive, got {tol}")));
    }
    if times.iter().any(|t| !(*t >= 0.0) || !t.is_finite()) || times.windows(2).any(|w| w[1] < w[0]) {
        return Err(PamError::Domain("observation times must be finite, nonnegative and sorted".into()));
    }
    let n = sys.len();
    assert_eq!(y.len(), n);
    let t_end = times.last().copied().unwrap_or(0.0);
    let h_max = max_step(sys);
    let mut w = Work {
        k: vec![0.0; n],
        tmp: vec![0.0; n],
        acc: vec![0.0; n],
    };
    let mut full = vec![0.0; n];
    let mut half = vec![0.0; n];
    let mut stats = StepStats::default();
    let mut t = 0.0;
    let mut h = h_max;
    for (k, &target) in times.iter().enumerate() {
        while target - t > 1e-12 * target.max(1.0) {
            let hh = h.min(0.5 * (target - t));
            full.copy_from_slice(y);
            half.copy_from_slice(y);
            rk4_step(sys, &mut full, 2.0 * hh, &mut w);
            rk4_step(sys, &mut half, hh, &mut w);
            rk4_step(sys, &mut half, hh, &mut w);
            let mut err = 0.0f64;
            let mut scale = 0.0f64;
            for i in 0..n {
                err = err.max((half[i] - full[i]).abs());
                scale = scale.max(half[i].abs());
            }
            err /= 15.0;
            if !err.is_finite() {
                return Err(PamError::Overflow(format!("non-finite state at t = {t}")));
            }
            let allowed = tol * scale.max(1e-300) * (2.0 * hh / t_end.max(1e-300)).min(1.0);
            if err > allowed && hh > 1e-9 * h_max {
                h = hh * 0.5;
                stats.rejected += 1;
                continue;
            }
            // Richardson: the pair of half steps plus the extrapolated correction
            for i in 0..n {
                y[i] = half[i] + (half[i] - full[i]) / 15.0;
            }
            t += 2.0 * hh;
            stats.steps += 2;
            stats.dt_used = stats.dt_used.max(hh);
            if err < allowed / 32.0 {
                h = (2.0 * h).min(h_max);
            }
        }
        t = target;
        observe(k, target, y)?;
    }
    Ok(stats)
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Diagonal(Vec<f64>);

    impl LinearFlow for Diagonal {
        fn len(&self) -> usize {
            self.0.len()
        }
        fn apply(&self, f: &[f64], out: &mut [f64]) {
            for i in 0..f.len() {
                out[i] = self.0[i] * f[i];
            }
        }
        fn spectral_bound(&self) -> f64 {
            self.0.iter().map(|v| v.abs()).fold(0.0, f64::max)
        }
    }

    #[test]
    fn exponentials_to_tolerance() {
        let sys = Diagonal(vec![-3.0, -0.5, 0.0, 0.7]);
        let mut y = vec![1.0; 4];
        let mut seen = Vec::new();
        let stats = integrate(&sys, &mut y, &[0.5, 2.0], 1e-10, |_, t, y| {
            seen.push((t, y.to_vec()));
            Ok(())
        })
        .unwrap();
        assert!(stats.dt_used <= 0.5 / 3.0 + 1e-15);
        for (t, v) in seen {
            for (lam, yi) in sys.0.iter().zip(v) {
                let want = (lam * t).exp();
                assert!((yi - want).abs() < 1e-9 * want.max(1.0), "{lam} {t}");
            }
        }
    }

    #[test]
    fn rejects_unsorted_times() {
        let sys = Diagonal(vec![-1.0]);
        let mut y = vec![1.0];
        assert!(integrate(&sys, &mut y, &[2.0, 1.0], 1e-8, |_, _, _| Ok(())).is_err());
    }
}
