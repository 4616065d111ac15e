//! Exponentially scaled modified Bessel functions of integer order,
//! `ive(n, x) = e^{-x} I_n(x)` for `x >= 0`.
//!
//! Three regimes: the power series for small `x`, Miller's backward
//! recurrence normalised by `e^x = I_0(x) + 2 sum_{k>=1} I_k(x)` in the
//! middle, and the Hankel asymptotic series for large `x`. All three work
//! with the scaled function directly, so nothing overflows at large `2 kappa t`.

const SERIES_MAX_X: f64 = 2.0;

fn asymptotic_min_x(n: u64) -> f64 {
    let n = n as f64;
    (2.0 * n * n).max(50.0)
}

/// `e^{-x} I_n(x)`; `extra` is the number of orders carried above the
/// adaptive start of the backward recurrence.
pub fn ive(n: i64, x: f64, extra: usize) -> f64 {
    let n = n.unsigned_abs();
    debug_assert!(x >= 0.0);
    if x == 0.0 {
        return if n == 0 { 1.0 } else { 0.0 };
    }
    if x < SERIES_MAX_X {
        return series(n, x, extra);
    }
    if x >= asymptotic_min_x(n) {
        if let Some(v) = asymptotic(n, x) {
            return v;
        }
    }
    miller(n as usize, x, extra)[n as usize]
}

/// `[ive(0, x), ..., ive(nmax, x)]`.
pub fn ive_table(nmax: usize, x: f64, extra: usize) -> Vec<f64> {
    if x == 0.0 {
        let mut t = vec![0.0; nmax + 1];
        t[0] = 1.0;
        return t;
    }
    if x >= asymptotic_min_x(nmax as u64) {
        let t: Option<Vec<f64>> = (0..=nmax as u64).map(|n| asymptotic(n, x)).collect();
        if let Some(t) = t {
            return t;
        }
    }
    if x < SERIES_MAX_X {
        return (0..=nmax as u64).map(|n| series(n, x, extra)).collect();
    }
    miller(nmax, x, extra)
}

fn series(n: u64, x: f64, extra: usize) -> f64 {
    // leading term e^{-x} (x/2)^n / n!, built up multiplicatively
    let half = 0.5 * x;
    let mut lead = (-x).exp();
    for k in 1..=n {
        lead *= half / k as f64;
        if lead == 0.0 {
            return 0.0;
        }
    }
    let q = half * half;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut m = 0u64;
    loop {
        m += 1;
        term *= q / (m as f64 * (m + n) as f64);
        sum += term;
        if term < 1e-17 * sum && m as usize >= extra.min(8) {
            break;
        }
        if m > 500 {
            break;
        }
    }
    lead * sum
}

fn asymptotic(n: u64, x: f64) -> Option<f64> {
    let mu = 4.0 * (n as f64) * (n as f64);
    let mut term = 1.0f64;
    let mut sum = 1.0f64;
    let mut prev = f64::INFINITY;
    for k in 1..400u64 {
        let odd = (2 * k - 1) as f64;
        term *= -(mu - odd * odd) / (8.0 * k as f64 * x);
        let a = term.abs();
        if a < 1e-17 * sum.abs() {
            return Some(sum / (2.0 * std::f64::consts::PI * x).sqrt());
        }
        if a > prev {
            return None;
        }
        prev = a;
        sum += term;
    }
    None
}

fn miller(nmax: usize, x: f64, extra: usize) -> Vec<f64> {
    const BIG: f64 = 1e250;
    const SCALE: f64 = 1e-250;
    let start = nmax + (12.0 * x.sqrt()).ceil() as usize + extra.max(10);
    let mut out = vec![0.0; nmax + 1];
    let two_over_x = 2.0 / x;
    let mut next = 0.0; // J_{k+1}
    let mut cur = 1.0; // J_k
    let mut tail = 0.0; // sum_{j >= k+1} J_j
    for k in (1..=start).rev() {
        if k <= nmax {
            out[k] = cur;
        }
        tail += cur;
        let prev = (k as f64) * two_over_x * cur + next;
        next = cur;
        cur = prev;
        if cur > BIG {
            cur *= SCALE;
            next *= SCALE;
            tail *= SCALE;
            for v in out.iter_mut().skip(k.min(nmax + 1)) {
                *v *= SCALE;
            }
        }
    }
    out[0] = cur;
    let norm = cur + 2.0 * tail;
    for v in &mut out {
        *v /= norm;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * b.abs().max(1e-300)
    }

    #[test]
    fn reference_values() {
        // e^{-x} I_n(x), 30-digit references
        assert!(close(ive(0, 1.0, 30), 0.465_759_607_593_640_4, 1e-14));
        assert!(close(ive(1, 1.0, 30), 0.207_910_415_349_708_4, 1e-14));
        assert!(close(ive(0, 10.0, 30), 0.127_833_337_163_428_6, 1e-13));
        assert!(close(ive(3, 10.0, 30), 0.079_830_361_029_840_52, 1e-13));
        assert!(close(ive(0, 100.0, 30), 0.039_944_379_299_096_68, 1e-13));
    }

    #[test]
    fn regimes_agree_at_their_seams() {
        for n in [0u64, 1, 2, 5] {
            let x = 2.0;
            let s = series(n, x * 0.999_999_9, 30);
            let m = miller(n as usize, x, 30)[n as usize];
            assert!(close(s, m, 1e-6), "n={n}: {s} vs {m}");
            let x = asymptotic_min_x(n);
            let a = asymptotic(n, x).unwrap();
            let m = miller(n as usize, x, 30)[n as usize];
            assert!(close(a, m, 1e-13), "n={n}: {a} vs {m}");
        }
    }

    #[test]
    fn normalisation_identity() {
        for x in [0.3, 1.7, 7.5, 40.0, 250.0, 3000.0] {
            let t = ive_table(600, x, 30);
            let s: f64 = t[0] + 2.0 * t[1..].iter().sum::<f64>();
            assert!((s - 1.0).abs() < 1e-12, "x={x}: {s}");
        }
    }

    #[test]
    fn recurrence_identity() {
        // I_{n-1} - I_{n+1} = (2n/x) I_n holds for the scaled functions too
        for x in [0.5, 4.0, 33.0, 900.0] {
            for n in 1..6 {
                let l = ive(n - 1, x, 30) - ive(n + 1, x, 30);
                let r = 2.0 * n as f64 / x * ive(n, x, 30);
                assert!((l - r).abs() < 1e-14, "x={x}, n={n}");
            }
        }
    }

    #[test]
    fn huge_arguments_stay_finite() {
        let v = ive(2, 1e25, 30);
        let lead = 1.0 / (2.0 * std::f64::consts::PI * 1e25f64).sqrt();
        assert!(close(v, lead, 1e-12));
        assert_eq!(ive(0, 0.0, 30), 1.0);
        assert_eq!(ive(4, 0.0, 30), 0.0);
        assert_eq!(ive(-3, 2.5, 30), ive(3, 2.5, 30));
    }
}
