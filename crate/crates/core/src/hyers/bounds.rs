//! Truncated infinite t-norm folds bounding the approximation error.

use serde::Serialize;

use super::{Combiner, PerturbationProfile};
use crate::tnorms::TNorm;
use crate::vector::Vector;

/// A fold counts as settled once its last this-many steps leave it unchanged.
pub const SETTLE_RUN: usize = 5;

/// Argument schedule of the `i`-th fold term, shifted by `n` dilations:
/// the points are `2ⁿ⁺ⁱ⁻¹x` and the three ρ arguments are
/// `weights · shiftⁿ · growthⁱ · t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundSchedule {
    pub weights: [f64; 3],
    pub growth: f64,
    pub shift: f64,
}

impl BoundSchedule {
    pub const QUADRATIC: BoundSchedule = BoundSchedule {
        weights: [0.25, 1.0, 0.75],
        growth: 2.0,
        shift: 4.0,
    };
    pub const QUARTIC: BoundSchedule = BoundSchedule {
        weights: [0.25, 1.0, 0.75],
        growth: 8.0,
        shift: 16.0,
    };
    pub const COMBINED_QUADRATIC: BoundSchedule = BoundSchedule {
        weights: [3.0, 12.0, 9.0],
        growth: 2.0,
        shift: 4.0,
    };
    pub const COMBINED_QUARTIC: BoundSchedule = BoundSchedule {
        weights: [3.0, 12.0, 9.0],
        growth: 8.0,
        shift: 16.0,
    };

    /// The `i`-th term (`i ≥ 1`) of the fold shifted by `n`.
    #[allow(clippy::too_many_arguments)]
    pub fn term(
        &self,
        rho: &PerturbationProfile,
        x: &Vector,
        t: f64,
        i: u32,
        n: u32,
        combiner: Combiner,
        tnorm: TNorm,
    ) -> f64 {
        debug_assert!(i >= 1);
        let p = x.dilate(n + i - 1);
        let p2 = p.dilate(1);
        let zero = Vector::zeros(x.dim());
        let s = self.shift.powi(n as i32) * self.growth.powi(i as i32) * t;
        let [w0, w1, w2] = self.weights;
        combiner.combine(
            tnorm,
            &[
                rho.eval(&p, &p, w0 * s),
                rho.eval(&p, &p2, w1 * s),
                rho.eval(&zero, &p, w2 * s),
            ],
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundValue {
    pub value: f64,
    pub depth: usize,
    /// Value at `depth − 1` minus value at `depth`.
    pub last_decrement: f64,
    /// Depth after which the fold no longer changed, when that run reaches
    /// [`SETTLE_RUN`].
    pub settled_at: Option<usize>,
}

impl BoundValue {
    fn from_prefix(prefix: &[f64]) -> Self {
        let depth = prefix.len() - 1;
        let changed = (1..=depth)
            .rev()
            .find(|&i| prefix[i - 1] != prefix[i])
            .unwrap_or(0);
        BoundValue {
            value: prefix[depth],
            depth,
            last_decrement: if depth > 0 {
                prefix[depth - 1] - prefix[depth]
            } else {
                0.0
            },
            settled_at: (depth - changed >= SETTLE_RUN).then_some(changed),
        }
    }
}

/// Prefix values `T_{i=1}^{k}` for `k = 0..=depth`; entry 0 is the empty fold.
#[allow(clippy::too_many_arguments)]
fn prefix_folds(
    schedule: &BoundSchedule,
    rho: &PerturbationProfile,
    x: &Vector,
    t: f64,
    depth: usize,
    shift: u32,
    combiner: Combiner,
    tnorm: TNorm,
) -> Vec<f64> {
    let mut prefix = Vec::with_capacity(depth + 1);
    let mut acc = 1.0;
    prefix.push(acc);
    for i in 1..=depth as u32 {
        acc = tnorm.eval(acc, schedule.term(rho, x, t, i, shift, combiner, tnorm));
        prefix.push(acc);
    }
    prefix
}

/// `T_{i=1}^{depth}` of the schedule's terms after `shift` dilations; with
/// `shift = 0` this is the error bound itself, larger shifts give the
/// finite proxies of its vanishing-tail condition.
#[allow(clippy::too_many_arguments)]
pub fn dilation_fold(
    schedule: &BoundSchedule,
    rho: &PerturbationProfile,
    x: &Vector,
    t: f64,
    depth: usize,
    shift: u32,
    combiner: Combiner,
    tnorm: TNorm,
) -> BoundValue {
    BoundValue::from_prefix(&prefix_folds(
        schedule, rho, x, t, depth, shift, combiner, tnorm,
    ))
}

/// Lower bound on `μ_{g(x) − Q₁(x)}(t)`.
pub fn bound_rhs_quadratic(
    rho: &PerturbationProfile,
    x: &Vector,
    t: f64,
    depth: usize,
    combiner: Combiner,
    tnorm: TNorm,
) -> BoundValue {
    dilation_fold(
        &BoundSchedule::QUADRATIC,
        rho,
        x,
        t,
        depth,
        0,
        combiner,
        tnorm,
    )
}

/// Lower bound on `μ_{h(x) − Q₂(x)}(t)`.
pub fn bound_rhs_quartic(
    rho: &PerturbationProfile,
    x: &Vector,
    t: f64,
    depth: usize,
    combiner: Combiner,
    tnorm: TNorm,
) -> BoundValue {
    dilation_fold(
        &BoundSchedule::QUARTIC,
        rho,
        x,
        t,
        depth,
        0,
        combiner,
        tnorm,
    )
}

/// Lower bound on `μ_{f(x) − Q₁(x) − Q₂(x)}(t)`: the combiner applied to the
/// two rescaled folds.
pub fn bound_rhs_combined(
    rho: &PerturbationProfile,
    x: &Vector,
    t: f64,
    depth: usize,
    combiner: Combiner,
    tnorm: TNorm,
) -> BoundValue {
    let a = prefix_folds(
        &BoundSchedule::COMBINED_QUADRATIC,
        rho,
        x,
        t,
        depth,
        0,
        combiner,
        tnorm,
    );
    let b = prefix_folds(
        &BoundSchedule::COMBINED_QUARTIC,
        rho,
        x,
        t,
        depth,
        0,
        combiner,
        tnorm,
    );
    // the combiner is monotone in each argument, so merged prefixes stay non-increasing
    let merged: Vec<f64> = a
        .iter()
        .zip(&b)
        .map(|(&u, &v)| combiner.combine(tnorm, &[u, v]))
        .collect();
    BoundValue::from_prefix(&merged)
}
