//! Direct-method stability machinery for the quadratic–quartic equation.
//!
//! Given a map `f` whose defect under the mixed equation is dominated by a
//! perturbation profile `ρ`, the quadratic part `g(x) = f(2x) − 16f(x)` and
//! the quartic part `h(x) = f(2x) − 4f(x)` converge under dyadic rescaling to
//! exact maps `Q₁(x) = lim g(2ⁿx)/4ⁿ` and `Q₂(x) = lim h(2ⁿx)/16ⁿ`. This
//! module computes those limits with convergence diagnostics, evaluates the
//! probabilistic error bounds as truncated infinite t-norm folds, and checks
//! the bounds end to end on grids.

mod bounds;
mod direct;
mod verify;

pub use bounds::{
    bound_rhs_combined, bound_rhs_quadratic, bound_rhs_quartic, dilation_fold, BoundSchedule,
    BoundValue, SETTLE_RUN,
};
pub use direct::{
    dilation_limit, probe_parts, q1_limit, q2_limit, uniqueness_probe, Degree, DirectMethod,
    HyersError, HyersTrace, Level, ProbeSchedule, FLOOR_ULPS, MAX_DILATED_NORM,
};
pub use verify::{
    verify_combined_bound, verify_quadratic_bound, verify_quartic_bound, BoundReport,
    ConditionProxy, HypothesisCheck, HypothesisWitness, Reconstruction, TheoremKind, TheoremReport,
    VerifyConfig, CONDITION_LEVEL, LHS_SLACK,
};

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::distributions::{eps0, rational_control, DistFn};
use crate::tnorms::TNorm;
use crate::vector::Vector;

/// The family `ρ_{x,y}` dominating the defect of `f`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum PerturbationProfile {
    /// `ρ_{x,y} = ε₀(· − c)` for every pair: the defect is at most `c`.
    StepDefect { c: f64 },
    /// `ρ_{x,y}(t) = t / (t + θ(‖x‖ᵖ + ‖y‖ᵖ))`, with `‖0‖ᵖ = 0` for every
    /// `p` so that `ρ_{0,0} = ε₀`.
    ControlType { theta: f64, p: f64 },
}

impl PerturbationProfile {
    /// The maximal profile `ρ ≡ ε₀`.
    pub fn eps0() -> Self {
        PerturbationProfile::ControlType { theta: 0.0, p: 1.0 }
    }

    pub fn scale(&self, x: &Vector, y: &Vector) -> f64 {
        match *self {
            PerturbationProfile::StepDefect { c } => c,
            PerturbationProfile::ControlType { theta, p } => {
                let pw = |v: &Vector| {
                    let n = v.norm();
                    if n == 0.0 {
                        0.0
                    } else {
                        n.powf(p)
                    }
                };
                theta * (pw(x) + pw(y))
            }
        }
    }

    pub fn eval(&self, x: &Vector, y: &Vector, t: f64) -> f64 {
        let s = self.scale(x, y);
        match self {
            PerturbationProfile::StepDefect { .. } => eps0(t - s),
            PerturbationProfile::ControlType { .. } => rational_control(s, t),
        }
    }

    pub fn rho(&self, x: &Vector, y: &Vector) -> DistFn {
        let s = self.scale(x, y);
        match self {
            PerturbationProfile::StepDefect { .. } => DistFn::Step(s),
            PerturbationProfile::ControlType { .. } => DistFn::RationalControl(s),
        }
    }

    /// The codomain distribution under which this profile bounds a defect by
    /// its scale: step profiles pair with the deterministic space, rational
    /// profiles with the induced one.
    pub fn natural_codomain(&self) -> Codomain {
        match self {
            PerturbationProfile::StepDefect { .. } => Codomain::Deterministic,
            PerturbationProfile::ControlType { .. } => Codomain::Induced,
        }
    }
}

impl fmt::Display for PerturbationProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PerturbationProfile::StepDefect { c } => write!(f, "step(c={c})"),
            PerturbationProfile::ControlType { theta, p } => {
                write!(f, "control(theta={theta}, p={p})")
            }
        }
    }
}

/// How the three `ρ` evaluations of a bound term are merged.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Combiner {
    /// Fold the terms with the ambient t-norm.
    #[default]
    TNormFold,
    /// `min(1, sum)`: the terms added literally and clamped.
    ClampedSum,
}

impl Combiner {
    pub fn combine(self, tnorm: TNorm, terms: &[f64]) -> f64 {
        match self {
            Combiner::TNormFold => terms.iter().fold(1.0, |acc, &v| tnorm.eval(acc, v)),
            Combiner::ClampedSum => terms.iter().sum::<f64>().clamp(0.0, 1.0),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Combiner::TNormFold => "tnorm-fold",
            Combiner::ClampedSum => "clamped-sum",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim() {
            "tnorm-fold" => Some(Combiner::TNormFold),
            "clamped-sum" => Some(Combiner::ClampedSum),
            _ => None,
        }
    }
}

/// The random norm placed on the scalar codomain when measuring defects and
/// approximation errors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Codomain {
    /// `μ_r(t) = t / (t + |r|)`.
    Induced,
    /// `μ_r(t) = ε₀(t − |r|)`.
    Deterministic,
}

impl Codomain {
    pub fn mu(self, r: f64, t: f64) -> f64 {
        match self {
            Codomain::Induced => rational_control(r.abs(), t),
            Codomain::Deterministic => eps0(t - r.abs()),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Codomain::Induced => "induced",
            Codomain::Deterministic => "deterministic",
        }
    }
}

/// `combiner[ρ_{x,x}(t/4), ρ_{x,2x}(t), ρ_{0,x}(3t/4)]`: the one-step bound
/// on `f(4x) − 20f(2x) + 64f(x)`.
pub fn psi(rho: &PerturbationProfile, x: &Vector, t: f64, combiner: Combiner, tnorm: TNorm) -> f64 {
    let x2 = x.dilate(1);
    let zero = Vector::zeros(x.dim());
    let terms = [
        rho.eval(x, x, t / 4.0),
        rho.eval(x, &x2, t),
        rho.eval(&zero, x, 0.75 * t),
    ];
    combiner.combine(tnorm, &terms)
}
