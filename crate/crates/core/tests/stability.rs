//! End-to-end behaviour of the direct method and the bound checks.

use proptest::prelude::*;
use rnstab::distributions::log_grid;
use rnstab::funceq::{check_doubling, part_g, part_h, TestFunction};
use rnstab::hyers::{
    bound_rhs_combined, bound_rhs_quadratic, bound_rhs_quartic, q1_limit, q2_limit,
    verify_combined_bound, verify_quadratic_bound, verify_quartic_bound, Codomain, Combiner,
    PerturbationProfile, VerifyConfig,
};
use rnstab::oracle::cross_check;
use rnstab::{TNorm, Vector};

fn xgrid() -> Vec<Vector> {
    [-1.5, -0.25, 0.5, 1.0, 2.0]
        .into_iter()
        .map(Vector::scalar)
        .collect()
}

#[test]
fn maximal_profile_reduces_bounds_to_exact_recovery() {
    let tgrid = log_grid(1e-2, 1e2, 5);
    let rho = PerturbationProfile::eps0();
    let exact = TestFunction::exact(2.0, -3.0);
    let noisy = exact.with_noise(1e-3, 5);
    let cfg = VerifyConfig::default();
    for verify in [
        verify_quadratic_bound,
        verify_quartic_bound,
        verify_combined_bound,
    ] {
        let ok = verify(&exact, &rho, &xgrid(), &tgrid, &cfg).unwrap();
        assert!(ok.passed());
        assert!(ok.cells.iter().all(|c| c.rhs == 1.0));
        let bad = verify(&noisy, &rho, &xgrid(), &tgrid, &cfg).unwrap();
        assert!(!bad.hypothesis.holds);
        assert!(!bad.cells_pass());
    }
}

#[test]
fn combined_recovery_returns_the_coefficients() {
    let (a, b) = (0.75, -4.0);
    let f = TestFunction::exact(a, b);
    for x in [0.5, 1.0, 2.0] {
        let x = Vector::scalar(x);
        let q1 = -q1_limit(&part_g(&f), &x, 20, 1e-9).unwrap().value / 12.0;
        let q2 = q2_limit(&part_h(&f), &x, 20, 1e-9).unwrap().value / 12.0;
        let x2 = x.norm_sq();
        assert!((q1 - b * x2).abs() <= 1e-12 * x2.max(1.0) * 10.0);
        assert!((q2 - a * x2 * x2).abs() <= 1e-12 * (x2 * x2).max(1.0) * 10.0);
    }
}

#[test]
fn induced_codomain_with_control_profile() {
    // defect ≤ 26δ everywhere, and ρ_{x,y} scale θ(|x| + |y|) ≥ 26δ away from the origin pair
    let delta = 1e-3;
    let f = TestFunction::exact(1.0, 2.0).with_noise(delta, 2);
    let rho = PerturbationProfile::ControlType { theta: 0.2, p: 0.0 };
    let cfg = VerifyConfig {
        codomain: Some(Codomain::Induced),
        ..VerifyConfig::default()
    };
    let tgrid = log_grid(1e-1, 1e1, 3);
    let rep = verify_combined_bound(&f, &rho, &xgrid(), &tgrid, &cfg).unwrap();
    assert!(rep.hypothesis.holds, "{:?}", rep.hypothesis.worst);
    assert!(rep.cells_pass(), "{:?}", rep.cells.iter().find(|c| !c.pass));
}

#[test]
fn intermediate_identity_for_solutions() {
    let f = TestFunction::exact(-1.25, 3.5);
    for x in [-2.0, 0.5, 1.0, 4.0] {
        assert_eq!(check_doubling(&f, &Vector::scalar(x)), 0.0);
    }
}

#[test]
fn oracle_agrees_on_both_parts() {
    let f = TestFunction::exact(-6.0, 2.5).with_noise(0.01, 77);
    let x = Vector::scalar(1.0);
    let g = part_g(&f);
    let h = part_h(&f);
    let c1 = cross_check(&g, &x, &q1_limit(&g, &x, 12, 1e-9).unwrap());
    let c2 = cross_check(&h, &x, &q2_limit(&h, &x, 12, 1e-9).unwrap());
    assert!(c1.agrees && c2.agrees, "{c1:?} {c2:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn deeper_truncation_never_raises_a_bound(
        theta in 0.0f64..3.0, p in 0.0f64..4.0, x in -5.0f64..5.0, t in 1e-3f64..1e3, k in 0usize..3
    ) {
        let rho = PerturbationProfile::ControlType { theta, p };
        let x = Vector::scalar(x);
        for comb in [Combiner::TNormFold, Combiner::ClampedSum] {
            for bound in [bound_rhs_quadratic, bound_rhs_quartic, bound_rhs_combined] {
                let v50 = bound(&rho, &x, t, 50, comb, TNorm::ALL[k]).value;
                let v60 = bound(&rho, &x, t, 60, comb, TNorm::ALL[k]).value;
                prop_assert!(v60 <= v50 + 1e-12);
            }
        }
    }

    #[test]
    fn quartic_limit_scales_by_sixteen(a in -10.0f64..10.0, seed in 0u64..300, x in 0.05f64..2.0) {
        let h = TestFunction::exact(a, 0.0).with_noise(0.01, seed);
        let tol = 1e-6;
        let at_x = q2_limit(&h, &Vector::scalar(x), 12, tol).unwrap();
        let at_2x = q2_limit(&h, &Vector::scalar(2.0 * x), 12, tol).unwrap();
        prop_assert!((at_2x.value - 16.0 * at_x.value).abs() <= 2.0 * tol);
    }
}
