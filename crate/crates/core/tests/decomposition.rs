//! Splitting of near-solutions into quadratic and quartic parts.

use proptest::prelude::*;
use rnstab::funceq::{
    check_doubling, part_g, part_h, reconstruct, residual_qq, residual_quadratic, residual_quartic,
    residual_quartic_swapped, with_stencil_scale, RealMap, TestFunction,
};
use rnstab::Vector;

fn s(x: f64) -> Vector {
    Vector::scalar(x)
}

/// `a·x⁴ + b·x² + eps·x⁶`: even, and off the solution set by `eps`.
fn near_solution(a: f64, b: f64, eps: f64) -> impl Fn(&Vector) -> f64 {
    move |v: &Vector| {
        let x2 = v.norm_sq();
        a * x2 * x2 + b * x2 + eps * x2 * x2 * x2
    }
}

/// Largest mixed residual over `grid ∪ 2·grid` squared.
fn tau<M: RealMap>(f: &M, grid: &[f64]) -> f64 {
    let pts: Vec<f64> = grid.iter().flat_map(|&x| [x, 2.0 * x]).collect();
    let mut worst: f64 = 0.0;
    for &u in &pts {
        for &v in &pts {
            worst = worst.max(residual_qq(f, &s(u), &s(v)).abs());
        }
    }
    worst
}

const GRID: [f64; 7] = [-1.0, -0.5, -0.25, 0.0, 0.25, 0.5, 1.0];

proptest! {
    #[test]
    fn part_residuals_are_controlled_by_the_mixed_residual(
        a in -5.0f64..5.0, b in -5.0f64..5.0, eps in -1e-3f64..1e-3
    ) {
        let f = near_solution(a, b, eps);
        let t = tau(&f, &GRID);
        // each part residual is a combination of at most 15 mixed residuals
        for &x in &GRID {
            for &y in &GRID {
                let rg = residual_quadratic(&part_g(&f), &s(x), &s(y));
                let rh = residual_quartic_swapped(&part_h(&f), &s(x), &s(y));
                prop_assert!(rg.abs() <= 40.0 * t + 1e-9, "g: {rg} vs tau {t}");
                prop_assert!(rh.abs() <= 40.0 * t + 1e-9, "h: {rh} vs tau {t}");
            }
        }
    }

    #[test]
    fn doubling_defect_is_bounded_by_the_noise(
        a in -10.0f64..10.0, b in -10.0f64..10.0, seed in 0u64..1000, x in -3.0f64..3.0
    ) {
        let delta = 0.05;
        let f = TestFunction::exact(a, b).with_noise(delta, seed);
        let (d, scale) = with_stencil_scale(&f, |f| check_doubling(f, &s(x)));
        prop_assert!(d.abs() <= 85.0 * delta + 1e-12 * scale);
    }

    #[test]
    fn reconstruction_identity_in_three_dimensions(
        a in -10.0f64..10.0, b in -10.0f64..10.0, seed in 0u64..1000,
        c in prop::array::uniform3(-2.0f64..2.0)
    ) {
        let f = TestFunction::exact(a, b).with_noise(1.0, seed).in_dimension(3);
        let x = Vector::new(c.to_vec());
        let r = reconstruct(part_g(&f).eval(&x), part_h(&f).eval(&x));
        prop_assert!((r - f.eval(&x)).abs() <= 1e-12 * f.magnitude(&x.dilate(1)).max(1.0) * 16.0);
    }
}

#[test]
fn non_solutions_are_flagged() {
    let f = near_solution(1.0, 1.0, 0.5);
    assert!(tau(&f, &GRID) > 1e-3);
    let cubic = |v: &Vector| v.coords()[0].powi(3);
    assert!(residual_quartic(&part_h(&cubic), &s(1.0), &s(1.0)).abs() > 1.0);
}
