//! Exact-rational evaluation of the direct-method approximants, used to
//! cross-check the floating-point path on small cases.
//!
//! Inputs are taken at their exact binary values; dyadic dilations of them
//! are exact in both paths, so any disagreement is rounding in the float
//! path.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive};
use serde::Serialize;

use crate::funceq::{PartG, PartH, TestFunction};
use crate::hyers::{Degree, HyersTrace};
use crate::vector::Vector;

/// Levels above this are not re-run exactly.
pub const ORACLE_MAX_LEVEL: u32 = 8;

/// Relative agreement required beyond the recorded rounding floor.
pub const ORACLE_TOL: f64 = 1e-12;

/// A map with an exact rational evaluation.
pub trait ExactMap {
    fn eval_exact(&self, x: &Vector) -> BigRational;
}

/// Panics on non-finite input.
pub fn rational(v: f64) -> BigRational {
    BigRational::from_float(v).unwrap_or_else(|| panic!("{v} has no rational value"))
}

fn int(k: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(k))
}

impl ExactMap for TestFunction {
    /// The noise term enters at its floating-point value.
    fn eval_exact(&self, x: &Vector) -> BigRational {
        let q: BigRational = x.coords().iter().map(|&c| rational(c) * rational(c)).sum();
        rational(self.a) * &q * &q + rational(self.b) * &q + rational(self.noise(x))
    }
}

impl<M: ExactMap + ?Sized> ExactMap for PartG<'_, M> {
    fn eval_exact(&self, x: &Vector) -> BigRational {
        self.0.eval_exact(&x.dilate(1)) - int(16) * self.0.eval_exact(x)
    }
}

impl<M: ExactMap + ?Sized> ExactMap for PartH<'_, M> {
    fn eval_exact(&self, x: &Vector) -> BigRational {
        self.0.eval_exact(&x.dilate(1)) - int(4) * self.0.eval_exact(x)
    }
}

/// `map(2ⁿx) / kⁿ` in exact arithmetic.
pub fn exact_level<M: ExactMap + ?Sized>(
    map: &M,
    x: &Vector,
    degree: Degree,
    n: u32,
) -> BigRational {
    let k = int(degree.base() as i64);
    let mut div = int(1);
    for _ in 0..n {
        div *= &k;
    }
    map.eval_exact(&x.dilate(n)) / div
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OracleCheck {
    /// Largest `|float − exact|` over the checked levels.
    pub max_deviation: f64,
    pub worst_level: u32,
    pub levels_checked: u32,
    /// Every level within `ORACLE_TOL · max(1, |exact|)` plus its floor.
    pub agrees: bool,
}

/// Re-runs the levels `n ≤ ORACLE_MAX_LEVEL` of `trace` exactly.
pub fn cross_check<M: ExactMap + ?Sized>(map: &M, x: &Vector, trace: &HyersTrace) -> OracleCheck {
    let mut check = OracleCheck {
        max_deviation: 0.0,
        worst_level: 0,
        levels_checked: 0,
        agrees: true,
    };
    for level in trace.levels.iter().filter(|l| l.n <= ORACLE_MAX_LEVEL) {
        let exact = exact_level(map, x, trace.degree, level.n);
        let dev = (rational(level.value) - &exact)
            .abs()
            .to_f64()
            .unwrap_or(f64::INFINITY);
        let mag = exact.abs().to_f64().unwrap_or(f64::INFINITY);
        if dev > check.max_deviation {
            check.max_deviation = dev;
            check.worst_level = level.n;
        }
        check.levels_checked += 1;
        check.agrees &= dev <= ORACLE_TOL * mag.max(1.0) + level.floor;
    }
    check
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funceq::{part_g, part_h, RealMap};
    use crate::hyers::{q1_limit, q2_limit};
    use proptest::prelude::*;

    #[test]
    fn exact_parts_of_a_solution() {
        let f = TestFunction::exact(0.75, -3.0);
        let x = Vector::scalar(0.5);
        // g(x) = -12·b·x² = 9, h(x) = 12·a·x⁴ = 0.5625
        assert_eq!(part_g(&f).eval_exact(&x), int(9));
        assert_eq!(part_h(&f).eval_exact(&x), rational(0.5625));
        assert_eq!(exact_level(&part_g(&f), &x, Degree::Quadratic, 6), int(9));
    }

    #[test]
    fn float_rounding_is_visible_to_the_oracle() {
        let f = TestFunction::exact(0.1, 0.0);
        let x = Vector::scalar(3.0);
        let exact = f.eval_exact(&x);
        assert_ne!(exact, rational(0.1) * int(81) + int(0) - rational(1e-30));
        assert!((rational(f.eval(&x)) - exact).abs().to_f64().unwrap() < 1e-14);
    }

    proptest! {
        #[test]
        fn direct_method_matches_exact_levels(
            b in -10.0f64..10.0, seed in 0u64..200, x in 0.1f64..2.0
        ) {
            let g = TestFunction::exact(0.0, -12.0 * b).with_noise(0.01, seed);
            let x = Vector::scalar(x);
            let tr = q1_limit(&g, &x, 12, 1e-9).unwrap();
            let check = cross_check(&g, &x, &tr);
            prop_assert_eq!(check.levels_checked, 9);
            prop_assert!(check.agrees);
            prop_assert!(check.max_deviation <= 1e-12);
        }

        #[test]
        fn cancelling_parts_agree_up_to_their_floor(
            a in -10.0f64..10.0, b in -10.0f64..10.0, seed in 0u64..200, x in 0.1f64..2.0
        ) {
            let f = TestFunction::exact(a, b).with_noise(0.01, seed);
            let x = Vector::scalar(x);
            let g = part_g(&f);
            let h = part_h(&f);
            prop_assert!(cross_check(&g, &x, &q1_limit(&g, &x, 12, 1e-9).unwrap()).agrees);
            prop_assert!(cross_check(&h, &x, &q2_limit(&h, &x, 12, 1e-9).unwrap()).agrees);
        }
    }
}
