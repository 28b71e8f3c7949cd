//! Continuous triangular norms on the unit interval.
//!
//! Three classical t-norms are provided: the minimum `T_M`, the product `T_P`
//! and the Łukasiewicz norm `T_L(a, b) = max(a + b - 1, 0)`. Besides the
//! binary operation the module offers finite left folds, truncated tails of
//! infinite folds, and the summability test that characterises convergence of
//! Łukasiewicz tails.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Slack allowed when checking unit-interval membership. Values within the
/// slack are clamped, values beyond it are rejected.
pub const UNIT_SLACK: f64 = 1e-12;

/// Default truncation depth for infinite folds.
pub const DEFAULT_TAIL_DEPTH: usize = 64;

/// Default threshold on the last-block defect sum for the Łukasiewicz test.
pub const DEFAULT_BLOCK_THRESHOLD: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TNormError {
    #[error("value {0} is outside the unit interval")]
    OutOfUnitInterval(f64),
    #[error("cannot fold an empty sequence")]
    EmptySequence,
    #[error("unknown t-norm `{0}` (expected minimum, product or lukasiewicz)")]
    UnknownKind(String),
}

/// A continuous t-norm.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TNorm {
    #[default]
    Minimum,
    Product,
    Lukasiewicz,
}

impl TNorm {
    pub const ALL: [TNorm; 3] = [TNorm::Minimum, TNorm::Product, TNorm::Lukasiewicz];

    /// Evaluates the t-norm, rejecting inputs outside `[0, 1]` by more than
    /// [`UNIT_SLACK`].
    pub fn apply(self, a: f64, b: f64) -> Result<f64, TNormError> {
        Ok(self.eval(unit(a)?, unit(b)?))
    }

    /// Evaluates the t-norm on values already known to lie in the unit
    /// interval. Inputs are clamped, never rejected.
    pub fn eval(self, a: f64, b: f64) -> f64 {
        let a = a.clamp(0.0, 1.0);
        let b = b.clamp(0.0, 1.0);
        match self {
            TNorm::Minimum => a.min(b),
            TNorm::Product => a * b,
            // 1 is an exact identity despite rounding in a + b
            TNorm::Lukasiewicz if a == 1.0 => b,
            TNorm::Lukasiewicz if b == 1.0 => a,
            TNorm::Lukasiewicz => (a + b - 1.0).max(0.0),
        }
    }

    /// Left fold `T(...T(T(x1, x2), x3)..., xn)`. A single element folds to
    /// itself.
    pub fn fold(self, xs: &[f64]) -> Result<f64, TNormError> {
        let (first, rest) = xs.split_first().ok_or(TNormError::EmptySequence)?;
        let mut acc = unit(*first)?;
        for &x in rest {
            acc = self.eval(acc, unit(x)?);
        }
        Ok(acc)
    }

    /// Folds `terms(start + 1), ..., terms(start + depth)`.
    ///
    /// Folds are non-increasing in their length, so the returned value bounds
    /// the infinite tail from above. The last decrement is reported so callers
    /// can judge how settled the truncation is.
    pub fn tail<F>(self, terms: F, start: usize, depth: usize) -> Result<TailFold, TNormError>
    where
        F: Fn(usize) -> f64,
    {
        if depth == 0 {
            return Err(TNormError::EmptySequence);
        }
        let mut acc = unit(terms(start + 1))?;
        let mut last_decrement = 0.0;
        for i in start + 2..=start + depth {
            let next = self.eval(acc, unit(terms(i))?);
            last_decrement = acc - next;
            acc = next;
        }
        Ok(TailFold {
            value: acc,
            depth,
            last_decrement,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            TNorm::Minimum => "minimum",
            TNorm::Product => "product",
            TNorm::Lukasiewicz => "lukasiewicz",
        }
    }
}

impl fmt::Display for TNorm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TNorm {
    type Err = TNormError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "minimum" | "min" => Ok(TNorm::Minimum),
            "product" | "prod" => Ok(TNorm::Product),
            "lukasiewicz" | "luk" => Ok(TNorm::Lukasiewicz),
            other => Err(TNormError::UnknownKind(other.to_string())),
        }
    }
}

/// A truncated infinite fold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailFold {
    pub value: f64,
    pub depth: usize,
    /// `fold(depth - 1) - fold(depth)`; zero for depth 1.
    pub last_decrement: f64,
}

fn unit(v: f64) -> Result<f64, TNormError> {
    if !(-UNIT_SLACK..=1.0 + UNIT_SLACK).contains(&v) {
        Err(TNormError::OutOfUnitInterval(v))
    } else {
        Ok(v.clamp(0.0, 1.0))
    }
}

/// Outcome of the defect-summability test for Łukasiewicz tails.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailConvergence {
    pub converges: bool,
    pub depth: usize,
    /// `sum_{i=1}^{depth} defect(i)`.
    pub partial_sum: f64,
    /// Defect sum over the last block `(depth / 2, depth]`.
    pub last_block_sum: f64,
    pub threshold: f64,
}

/// Decides whether shifted Łukasiewicz tails of `x_i = 1 - defect(i)` tend to
/// one, using the equivalence with summability of the defects. The partial
/// sums are declared Cauchy when the defect mass of the last block
/// `(depth / 2, depth]` is below `threshold`.
pub fn lukasiewicz_tail_converges<F>(defects: F, depth: usize, threshold: f64) -> TailConvergence
where
    F: Fn(usize) -> f64,
{
    let depth = depth.max(2);
    let half = depth / 2;
    let mut partial_sum = 0.0;
    let mut last_block_sum = 0.0;
    for i in 1..=depth {
        let d = defects(i).clamp(0.0, 1.0);
        partial_sum += d;
        if i > half {
            last_block_sum += d;
        }
    }
    TailConvergence {
        converges: last_block_sum < threshold,
        depth,
        partial_sum,
        last_block_sum,
        threshold,
    }
}
