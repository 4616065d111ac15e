use nalgebra::DMatrix;
use pam_core::evolver::{apply_hamiltonian, BoxDomain, Field};
use pam_core::lattice::two_walk_resolvent_time_domain;
use pam_core::spectral::{t2_operator_top, t_operator_top, top_eigenpair, top_eigenpair_from};
use pam_core::{KernelAccuracy, LatticePoint, ModelParams};

fn params(d: usize, gamma: f64, p: usize) -> ModelParams {
    ModelParams::new(d, 1.0, 1.0, gamma, p).unwrap()
}

/// `H^p` on the box as a dense matrix, column by column.
fn dense_hamiltonian(params: &ModelParams, domain: BoxDomain) -> DMatrix<f64> {
    let n = domain.len();
    let mut m = DMatrix::zeros(n, n);
    for j in 0..n {
        let e = Field::delta(domain, &domain.coords(j)).unwrap();
        let col = apply_hamiltonian(params, &e);
        for i in 0..n {
            m[(i, j)] = col.values[i];
        }
    }
    m
}

fn top_dense(m: DMatrix<f64>) -> f64 {
    m.symmetric_eigen().eigenvalues.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
}

#[test]
fn power_method_matches_dense_eigensolver() {
    for (d, gamma, p, radius) in [(1, 5.0, 1, 12), (1, 8.0, 2, 6), (2, 6.0, 1, 4)] {
        let pr = params(d, gamma, p);
        let domain = BoxDomain::new(p, d, radius).unwrap();
        let dense = dense_hamiltonian(&pr, domain);
        assert!((&dense - dense.transpose()).amax() < 1e-14);
        let sol = top_eigenpair(&pr, &domain, 1e-12, 200_000).unwrap();
        let oracle = top_dense(dense);
        assert!((sol.lambda - oracle).abs() < 1e-8 * oracle.max(1.0), "{d} {p}: {} vs {oracle}", sol.lambda);
    }
}

#[test]
fn eigenpair_does_not_depend_on_start() {
    let pr = params(1, 8.0, 2);
    let domain = BoxDomain::new(2, 1, 20).unwrap();
    let a = top_eigenpair(&pr, &domain, 1e-12, 200_000).unwrap();
    // a lopsided positive start
    let start = Field::from_fn(domain, |x| 1.0 + 0.3 * (x[0] as f64).tanh() + (-(x[1] as f64).abs()).exp());
    let b = top_eigenpair_from(&pr, &domain, &start, 1e-12, 200_000).unwrap();
    assert!((a.lambda - b.lambda).abs() < 1e-9);
    let gap = a
        .eigenfunction
        .values
        .iter()
        .zip(&b.eigenfunction.values)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    assert!(gap < 1e-5, "eigenfunctions differ by {gap}");
}

#[test]
fn box_doubling_converges() {
    let pr = params(1, 8.0, 2);
    let mut prev: Option<(f64, f64)> = None;
    for radius in [15, 30, 60] {
        let domain = BoxDomain::new(2, 1, radius).unwrap();
        let sol = top_eigenpair(&pr, &domain, 1e-12, 200_000).unwrap();
        if let Some((lambda, l1)) = prev {
            assert!(sol.lambda >= lambda - 1e-10, "eigenvalue grows with the box");
            assert!((sol.lambda - lambda).abs() < 1e-6);
            assert!((sol.l1_norm - l1).abs() < 1e-4 * l1);
        }
        prev = Some((sol.lambda, sol.l1_norm));
    }
}

#[test]
fn ritz_values_and_eigenvalue_bounds() {
    for (d, gamma, p) in [(1, 5.0, 1), (1, 8.0, 2), (2, 10.0, 1)] {
        let pr = params(d, gamma, p);
        let radius = if p * d == 1 { 60 } else { 20 };
        let domain = BoxDomain::new(p, d, radius).unwrap();
        let sol = top_eigenpair(&pr, &domain, 1e-10, 200_000).unwrap();
        let (lo, hi) = sol.kinetic_ritz;
        // the kinetic part is nonpositive with norm at most the generator bound
        assert!(lo >= -pr.generator_bound() - 1e-9 && hi <= 1e-12 && lo <= hi);
        // 0 < lambda < p gamma: the potential is at most p gamma
        assert!(sol.lambda > 0.0 && sol.lambda < p as f64 * gamma);
        assert!(sol.eigenfunction.values.iter().all(|&v| v > 0.0));
    }
}

/// `T(x, y) = r(-x, y) + r(y - x, 0)` assembled pointwise from the time-domain kernel.
fn dense_t(kappa: f64, rho: f64, lambda: f64, radius: i64, with_t1: bool) -> DMatrix<f64> {
    let acc = KernelAccuracy::with_tol(1e-13);
    let n = (2 * radius + 1) as usize;
    let o = LatticePoint::origin(1);
    DMatrix::from_fn(n, n, |i, j| {
        let x = i as i64 - radius;
        let y = j as i64 - radius;
        let t2 = two_walk_resolvent_time_domain(kappa, rho, lambda, &LatticePoint::new(vec![y - x]), &o, &acc).unwrap();
        let t1 = if with_t1 {
            two_walk_resolvent_time_domain(kappa, rho, lambda, &LatticePoint::new(vec![-x]), &LatticePoint::new(vec![y]), &acc)
                .unwrap()
        } else {
            0.0
        };
        t1 + t2
    })
}

#[test]
fn t_operators_match_dense_oracle() {
    let radius = 5;
    for lambda in [0.5, 2.0, 9.0] {
        let full = top_dense(dense_t(1.0, 1.0, lambda, radius, true));
        let top = t_operator_top(1.0, 1.0, lambda, 1, radius as usize, 1e-14).unwrap();
        assert!((top - full).abs() < 1e-9 * full, "T at {lambda}: {top} vs {full}");
        let conv = top_dense(dense_t(1.0, 1.0, lambda, radius, false));
        let top2 = t2_operator_top(1.0, 1.0, lambda, 1, radius as usize, 1e-14).unwrap();
        assert!((top2 - conv).abs() < 1e-9 * conv, "T2 at {lambda}: {top2} vs {conv}");
    }
}
