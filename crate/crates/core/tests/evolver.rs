use pam_core::evolver::io::{parse_sidecar, read_field_bin, read_field_csv, sidecar_json, write_field_bin, write_field_csv, Sidecar};
use pam_core::evolver::{catalyst_moment_at, evolve_field, localized_mass_series, BoxDomain, Field};
use pam_core::mc::{estimate_catalyst_moment, estimate_localized_mass};
use pam_core::{LatticePoint, ModelParams};
use proptest::prelude::*;

const TOL: f64 = 1e-9;

fn mass(d: usize, gamma: f64, z: Vec<i64>, t: f64) -> f64 {
    let p = ModelParams::new(d, 0.7, 1.1, gamma, 1).unwrap();
    localized_mass_series(&p, &LatticePoint::new(z), &[t], TOL).unwrap().0[0]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn localized_mass_is_reflection_symmetric(z in -3i64..=3, w in -3i64..=3, t in 0.1f64..3.0) {
        let a = mass(2, -1.0, vec![z, w], t);
        let b = mass(2, -1.0, vec![-z, w], t);
        let c = mass(2, -1.0, vec![w, z], t);
        prop_assert!((a - b).abs() < 1e-8 && (a - c).abs() < 1e-8);
        prop_assert!(a > 0.0 && a <= 1.0 + 1e-9);
    }

    #[test]
    fn mass_is_monotone_in_gamma(g in 0.1f64..3.0, t in 0.1f64..3.0) {
        let weak = mass(1, -g, vec![0], t);
        let strong = mass(1, -1.5 * g, vec![0], t);
        prop_assert!(strong < weak);
    }

    #[test]
    fn second_moment_is_exchange_symmetric(x in -3i64..=3, y in -3i64..=3) {
        let p = ModelParams::new(1, 1.0, 1.0, 0.8, 2).unwrap();
        let t = [1.0];
        let a = catalyst_moment_at(&p, &LatticePoint::new(vec![x, y]), &t, TOL).unwrap().0[0];
        let b = catalyst_moment_at(&p, &LatticePoint::new(vec![y, x]), &t, TOL).unwrap().0[0];
        prop_assert!((a - b).abs() < 1e-7 * a);
        prop_assert!(a >= 1.0);
    }
}

#[test]
fn monte_carlo_matches_evolver() {
    let p = ModelParams::new(1, 1.0, 1.0, -1.0, 1).unwrap();
    let z = LatticePoint::new(vec![1]);
    let est = estimate_localized_mass(&p, &z, 3.0, 50_000, 11).unwrap();
    let m = localized_mass_series(&p, &z, &[3.0], TOL).unwrap().0[0];
    assert!(est.covers(m, 4.0), "{est:?} vs {m}");

    let p = ModelParams::new(1, 1.0, 1.0, 0.5, 2).unwrap();
    let xs = [LatticePoint::new(vec![0]), LatticePoint::new(vec![1])];
    let est = estimate_catalyst_moment(&p, &xs, 1.0, 50_000, 12).unwrap();
    let m = catalyst_moment_at(&p, &LatticePoint::new(vec![0, 1]), &[1.0], TOL).unwrap().0[0];
    assert!(est.covers(m, 4.0), "{est:?} vs {m}");
}

#[test]
fn field_files_round_trip_bitwise() {
    let p = ModelParams::new(1, 1.0, 1.0, 2.0, 2).unwrap();
    let domain = BoxDomain::new(2, 1, 14).unwrap();
    let (field, _) = evolve_field(&p, &domain, &Field::delta(domain, &[0, 1]).unwrap(), 0.25, TOL).unwrap();

    let dir = tempfile::tempdir().unwrap();
    let bin = dir.path().join("f.bin");
    write_field_bin(&field, std::fs::File::create(&bin).unwrap()).unwrap();
    let side = sidecar_json(&Sidecar::new(&field, 0.25, &p));
    let meta = parse_sidecar(&side).unwrap();
    let back = read_field_bin(meta.domain().unwrap(), std::fs::File::open(&bin).unwrap()).unwrap();
    assert_eq!(meta.params, p);
    assert!(back.values.iter().zip(&field.values).all(|(a, b)| a.to_bits() == b.to_bits()));

    let mut csv = Vec::new();
    write_field_csv(&field, &mut csv).unwrap();
    let back = read_field_csv(domain, csv.as_slice()).unwrap();
    assert!(back.values.iter().zip(&field.values).all(|(a, b)| a.to_bits() == b.to_bits()));
}
