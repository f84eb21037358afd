use ness_core::verify::{run_suite, Suite, DEFAULT_SEED};

#[test]
fn every_identity_holds_on_random_draws() {
    let reports = run_suite(Suite::All, DEFAULT_SEED, 0.0).unwrap();
    for r in &reports {
        println!("{:<22} {:>10.3e} (tol {:.0e})", r.name, r.residual, r.tolerance);
    }
    let failed: Vec<_> = reports.iter().filter(|r| !r.passed).map(|r| r.name.clone()).collect();
    assert!(failed.is_empty(), "failed: {failed:?}");
}

#[test]
fn perturbed_spin_breaks_only_the_boundary_checks() {
    let reports = run_suite(Suite::Algebra, DEFAULT_SEED, 1e-2).unwrap();
    for r in &reports {
        assert_eq!(r.passed, r.name != "boundary-xxz", "{}: {:e}", r.name, r.residual);
    }
}
