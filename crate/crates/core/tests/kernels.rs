use approx::assert_relative_eq;
use pam_core::lattice::{
    green_function, resolvent_fourier, resolvent_kernel, resolvent_time, transition_probability,
    two_walk_resolvent_kernel, two_walk_resolvent_time_domain,
};
use pam_core::{KernelAccuracy, LatticePoint, WalkParams};
use proptest::prelude::*;
use statrs::function::gamma::gamma;

/// Watson's integral `(1/pi^3) int_{[0,pi]^3} dk / (1 - (cos k_1 + cos k_2 + cos k_3) / 3)` in closed form.
fn watson() -> f64 {
    let pi3 = std::f64::consts::PI.powi(3);
    6f64.sqrt() / (32.0 * pi3) * gamma(1.0 / 24.0) * gamma(5.0 / 24.0) * gamma(7.0 / 24.0) * gamma(11.0 / 24.0)
}

#[test]
fn green_at_origin_is_watson() {
    let acc = KernelAccuracy::with_tol(1e-12);
    for kappa in [0.5, 1.0, 3.0] {
        let g = green_function(&WalkParams::new(3, kappa).unwrap(), &LatticePoint::origin(3), &acc).unwrap();
        assert_relative_eq!(g, watson() / (6.0 * kappa), max_relative = 1e-9);
    }
}

#[test]
fn d1_resolvent_closed_form() {
    let acc = KernelAccuracy::with_tol(1e-13);
    for (kappa, lambda) in [(1.0, 1.0), (2.0, 0.1), (0.3, 7.0)] {
        let w = WalkParams::new(1, kappa).unwrap();
        let exact = 1.0 / (lambda * lambda + 4.0 * kappa * lambda).sqrt();
        let r = resolvent_kernel(&w, lambda, &LatticePoint::origin(1), &acc).unwrap();
        assert_relative_eq!(r, exact, max_relative = 1e-11);
    }
}

#[test]
fn two_walk_routes_agree() {
    let acc = KernelAccuracy::with_tol(1e-10);
    let a = LatticePoint::new(vec![1]);
    let b = LatticePoint::new(vec![-2]);
    let f = two_walk_resolvent_kernel(0.7, 1.3, 0.9, &a, &b, &acc).unwrap();
    let t = two_walk_resolvent_time_domain(0.7, 1.3, 0.9, &a, &b, &acc).unwrap();
    assert!((f - t).abs() < 1e-9, "{f} vs {t}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn transition_probabilities_are_a_distribution(kappa in 0.1f64..3.0, t in 0.01f64..5.0) {
        let w = WalkParams::new(1, kappa).unwrap();
        let reach = (8.0 * (2.0 * kappa * t).sqrt()).ceil() as i64 + 20;
        let total: f64 = (-reach..=reach)
            .map(|z| transition_probability(&w, t, &LatticePoint::new(vec![z])).unwrap())
            .sum();
        prop_assert!((total - 1.0).abs() < 1e-10);
    }

    #[test]
    fn transition_probability_symmetries(
        kappa in 0.1f64..3.0,
        t in 0.01f64..5.0,
        z in proptest::collection::vec(-4i64..=4, 3),
    ) {
        let w = WalkParams::new(3, kappa).unwrap();
        let p = transition_probability(&w, t, &LatticePoint::new(z.clone())).unwrap();
        let neg = transition_probability(&w, t, &LatticePoint::new(z.iter().map(|c| -c).collect())).unwrap();
        let rot = transition_probability(&w, t, &LatticePoint::new(vec![z[2], z[0], z[1]])).unwrap();
        prop_assert!(p > 0.0 && p <= 1.0);
        prop_assert_eq!(p.to_bits(), neg.to_bits());
        prop_assert!((p - rot).abs() <= 1e-15 * p.max(1e-300) * 10.0);
        // product structure
        let w1 = WalkParams::new(1, kappa).unwrap();
        let prod: f64 = z.iter().map(|&c| transition_probability(&w1, t, &LatticePoint::new(vec![c])).unwrap()).product();
        prop_assert!((p - prod).abs() <= 1e-13 * prod);
    }

    #[test]
    fn resolvent_routes_agree(kappa in 0.2f64..2.0, lambda in 0.05f64..5.0, z in -3i64..=3) {
        let w = WalkParams::new(2, kappa).unwrap();
        let acc = KernelAccuracy::with_tol(1e-11);
        let pt = LatticePoint::new(vec![z, 1]);
        let a = resolvent_time(&w, lambda, &pt, &acc).unwrap();
        let b = resolvent_fourier(&w, lambda, &pt, &acc).unwrap();
        prop_assert!((a - b).abs() < 1e-8, "{} vs {}", a, b);
    }

    #[test]
    fn resolvent_decreases_in_lambda(kappa in 0.2f64..2.0, lambda in 0.05f64..5.0) {
        let w = WalkParams::new(1, kappa).unwrap();
        let acc = KernelAccuracy::default();
        let o = LatticePoint::origin(1);
        let r1 = resolvent_kernel(&w, lambda, &o, &acc).unwrap();
        let r2 = resolvent_kernel(&w, 1.5 * lambda, &o, &acc).unwrap();
        prop_assert!(r2 < r1 && r1 < 1.0 / lambda);
    }
}
