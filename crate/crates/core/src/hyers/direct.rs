//! Dyadic limits `lim φ(2ⁿx) / kⁿ` with convergence diagnostics.

use serde::Serialize;
use thiserror::Error;

use crate::funceq::{part_g, part_h, RealMap};
use crate::vector::Vector;

/// Dilations stop once `‖2ⁿx‖` exceeds this; further levels would leave the
/// range where quartic growth stays finite and well resolved.
pub const MAX_DILATED_NORM: f64 = 1073741824.0;

/// Multiplier on machine epsilon in the per-level rounding floor.
pub const FLOOR_ULPS: f64 = 16.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HyersError {
    #[error("the direct method needs at least 2 levels, got n_max = {0}")]
    TooFewLevels(u32),
    #[error("point {0} is not finite")]
    NonFinite(String),
    #[error("point {0} already exceeds the dilation guard")]
    OutOfRange(String),
    #[error("tolerance must be positive, got {0}")]
    BadTolerance(f64),
}

/// Homogeneity degree of the limit: the approximants are `φ(2ⁿx) / 4ⁿ` or
/// `φ(2ⁿx) / 16ⁿ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Degree {
    Quadratic,
    Quartic,
}

impl Degree {
    /// `2^degree`.
    pub fn base(self) -> f64 {
        match self {
            Degree::Quadratic => 4.0,
            Degree::Quartic => 16.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Degree::Quadratic => "quadratic",
            Degree::Quartic => "quartic",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DirectMethod {
    pub n_max: u32,
    pub tol: f64,
    pub max_dilated_norm: f64,
}

impl Default for DirectMethod {
    fn default() -> Self {
        DirectMethod {
            n_max: 20,
            tol: 1e-9,
            max_dilated_norm: MAX_DILATED_NORM,
        }
    }
}

impl DirectMethod {
    pub fn new(n_max: u32, tol: f64) -> Self {
        DirectMethod {
            n_max,
            tol,
            ..DirectMethod::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Level {
    pub n: u32,
    /// `φ(2ⁿx) / kⁿ`.
    pub value: f64,
    /// `|value − previous value|`; absent at `n = 0`.
    pub delta: Option<f64>,
    /// Rounding error scale of `value`.
    pub floor: f64,
}

impl Level {
    /// Whether the step into this level exceeds what rounding alone explains.
    fn resolved(&self, prev_floor: f64) -> bool {
        self.delta.is_some_and(|d| d > self.floor + prev_floor)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HyersTrace {
    pub degree: Degree,
    pub levels: Vec<Level>,
    /// Index into `levels` of the approximant reported as the limit.
    pub selected: usize,
    pub value: f64,
    /// Rounding floor plus the largest resolved step into or after the
    /// selected level.
    pub error_estimate: f64,
    pub converged: bool,
    /// Geometric decay rate of the resolved steps, when at least 3 exist.
    pub estimated_ratio: Option<f64>,
    /// Set when the dilation guard stopped the run before `n_max`.
    pub truncated: bool,
}

impl HyersTrace {
    pub fn last_delta(&self) -> Option<f64> {
        self.levels.last().and_then(|l| l.delta)
    }

    /// `|value_N − value_0| ≤ Σ deltas`, the telescoping bound.
    pub fn delta_sum(&self) -> f64 {
        self.levels.iter().filter_map(|l| l.delta).sum()
    }

    fn from_levels(degree: Degree, levels: Vec<Level>, tol: f64, truncated: bool) -> Self {
        let resolved: Vec<bool> = levels
            .iter()
            .enumerate()
            .map(|(i, l)| i > 0 && l.resolved(levels[i - 1].floor))
            .collect();

        // suffix maximum of resolved steps
        let mut tail_max = vec![0.0f64; levels.len() + 1];
        for i in (0..levels.len()).rev() {
            let own = if resolved[i] {
                levels[i].delta.unwrap_or(0.0)
            } else {
                0.0
            };
            tail_max[i] = tail_max[i + 1].max(own);
        }
        // own floor plus the steps still to come; floors are order-of-magnitude
        // estimates, so the deepest level within a factor 2 of the least wins
        let cost: Vec<f64> = levels
            .iter()
            .enumerate()
            .map(|(i, l)| l.floor + tail_max[i + 1])
            .collect();
        let least = cost.iter().cloned().fold(f64::INFINITY, f64::min);
        let selected = cost.iter().rposition(|&e| e <= 2.0 * least).unwrap_or(0);
        let error_estimate = levels[selected].floor + tail_max[selected.max(1)];

        let estimated_ratio = estimate_ratio(&levels, &resolved);
        HyersTrace {
            degree,
            value: levels[selected].value,
            selected,
            error_estimate,
            converged: error_estimate <= tol,
            estimated_ratio,
            truncated,
            levels,
        }
    }
}

/// `exp` of the Theil–Sen slope (median pairwise slope) of `ln Σ_{j≥k} d_j`
/// against `k`, over the levels up to the last resolved step. Tail sums and
/// the median both damp steps that happen to be small.
fn estimate_ratio(levels: &[Level], resolved: &[bool]) -> Option<f64> {
    let last = resolved.iter().rposition(|&r| r)?;
    if resolved.iter().filter(|&&r| r).count() < 3 {
        return None;
    }
    let deltas: Vec<f64> = levels[1..=last]
        .iter()
        .map(|l| l.delta.unwrap_or(0.0))
        .collect();
    let mut tail = 0.0;
    let mut points = Vec::with_capacity(deltas.len());
    for (k, d) in deltas.iter().enumerate().rev() {
        tail += d;
        if tail > 0.0 {
            points.push((k as f64, tail.ln()));
        }
    }
    if points.len() < 3 {
        return None;
    }
    let mut slopes = Vec::with_capacity(points.len() * (points.len() - 1) / 2);
    for (i, p) in points.iter().enumerate() {
        for q in &points[i + 1..] {
            slopes.push((q.1 - p.1) / (q.0 - p.0));
        }
    }
    slopes.sort_by(f64::total_cmp);
    let mid = slopes.len() / 2;
    let median = if slopes.len() % 2 == 0 {
        0.5 * (slopes[mid - 1] + slopes[mid])
    } else {
        slopes[mid]
    };
    Some(median.exp())
}

fn level<M: RealMap + ?Sized>(map: &M, x: &Vector, degree: Degree, n: u32) -> Level {
    let y = x.dilate(n);
    let k = degree.base().powi(n as i32);
    Level {
        n,
        value: map.eval(&y) / k,
        delta: None,
        floor: FLOOR_ULPS * f64::EPSILON * map.magnitude(&y) / k,
    }
}

fn check_inputs(x: &Vector, method: &DirectMethod) -> Result<(), HyersError> {
    if method.n_max < 2 {
        return Err(HyersError::TooFewLevels(method.n_max));
    }
    if method.tol.is_nan() || method.tol <= 0.0 {
        return Err(HyersError::BadTolerance(method.tol));
    }
    if !x.is_finite() {
        return Err(HyersError::NonFinite(x.to_string()));
    }
    if x.norm() > method.max_dilated_norm {
        return Err(HyersError::OutOfRange(x.to_string()));
    }
    Ok(())
}

fn run<M: RealMap + ?Sized>(
    map: &M,
    x: &Vector,
    degree: Degree,
    method: &DirectMethod,
    descending: bool,
) -> Result<HyersTrace, HyersError> {
    check_inputs(x, method)?;
    // largest n with ‖2ⁿx‖ inside the guard
    let reach = (0..=method.n_max)
        .take_while(|&n| x.dilate(n).norm() <= method.max_dilated_norm)
        .last()
        .unwrap_or(0);
    let truncated = reach < method.n_max;
    let mut levels: Vec<Level> = if descending {
        let mut v: Vec<Level> = (0..=reach)
            .rev()
            .map(|n| level(map, x, degree, n))
            .collect();
        v.reverse();
        v
    } else {
        (0..=reach).map(|n| level(map, x, degree, n)).collect()
    };
    for i in 1..levels.len() {
        levels[i].delta = Some((levels[i].value - levels[i - 1].value).abs());
    }
    Ok(HyersTrace::from_levels(
        degree, levels, method.tol, truncated,
    ))
}

/// Approximants `map(2ⁿx) / kⁿ` for `n = 0..=n_max`. The reported value is
/// the approximant minimizing rounding floor plus remaining resolved steps,
/// so maps built by cancellation stop improving once rounding dominates.
pub fn dilation_limit<M: RealMap + ?Sized>(
    map: &M,
    x: &Vector,
    degree: Degree,
    method: &DirectMethod,
) -> Result<HyersTrace, HyersError> {
    run(map, x, degree, method, false)
}

/// `Q₁(x) = lim g(2ⁿx) / 4ⁿ`.
pub fn q1_limit<M: RealMap + ?Sized>(
    g: &M,
    x: &Vector,
    n_max: u32,
    tol: f64,
) -> Result<HyersTrace, HyersError> {
    dilation_limit(g, x, Degree::Quadratic, &DirectMethod::new(n_max, tol))
}

/// `Q₂(x) = lim h(2ⁿx) / 16ⁿ`.
pub fn q2_limit<M: RealMap + ?Sized>(
    h: &M,
    x: &Vector,
    n_max: u32,
    tol: f64,
) -> Result<HyersTrace, HyersError> {
    dilation_limit(h, x, Degree::Quartic, &DirectMethod::new(n_max, tol))
}

/// One way of running the direct method.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProbeSchedule {
    pub n_max: u32,
    /// Evaluate levels from `n_max` down to 0.
    pub descending: bool,
}

/// Largest disagreement between the limits produced by different schedules.
pub fn uniqueness_probe<M: RealMap + ?Sized>(
    map: &M,
    x: &Vector,
    degree: Degree,
    schedules: &[ProbeSchedule],
    tol: f64,
) -> Result<f64, HyersError> {
    let mut values = Vec::with_capacity(schedules.len());
    for s in schedules {
        let trace = run(
            map,
            x,
            degree,
            &DirectMethod::new(s.n_max, tol),
            s.descending,
        )?;
        values.push(trace.value);
    }
    let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Ok(if values.is_empty() { 0.0 } else { hi - lo })
}

/// [`uniqueness_probe`] for both parts of `f`: `(quadratic, quartic)`.
pub fn probe_parts<M: RealMap + ?Sized>(
    f: &M,
    x: &Vector,
    schedules: &[ProbeSchedule],
    tol: f64,
) -> Result<(f64, f64), HyersError> {
    Ok((
        uniqueness_probe(&part_g(f), x, Degree::Quadratic, schedules, tol)?,
        uniqueness_probe(&part_h(f), x, Degree::Quartic, schedules, tol)?,
    ))
}
