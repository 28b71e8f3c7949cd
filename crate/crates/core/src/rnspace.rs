//! Random normed spaces over real coordinate vectors.
//!
//! A random normed space assigns to every vector `x` a distribution function
//! `μ_x`, read as "the probability that the norm of `x` is below `t`", and
//! couples the triangle inequality to a t-norm. The module provides the
//! induced space `μ_x(t) = t / (t + ‖x‖)`, the deterministic space
//! `μ_x = ε₀(· − ‖x‖)`, seeded fuzzing of the three axioms, and sampled
//! convergence diagnostics.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::distributions::{default_grid, eps0, rational_control, DistFn};
use crate::tnorms::TNorm;
use crate::vector::Vector;

/// Absolute slack for RN2 equality and RN3 inequality checks.
pub const AXIOM_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RnError {
    #[error("distribution argument must be positive, got {0}")]
    NonPositiveT(f64),
}

/// `t / (t + ‖x‖)` for `t > 0`.
pub fn induced_mu(x: &Vector, t: f64) -> Result<f64, RnError> {
    if t > 0.0 {
        Ok(rational_control(x.norm(), t))
    } else {
        Err(RnError::NonPositiveT(t))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Norm {
    #[default]
    Euclidean,
    Max,
}

impl Norm {
    pub fn eval(self, x: &Vector) -> f64 {
        match self {
            Norm::Euclidean => x.norm(),
            Norm::Max => x.coords().iter().fold(0.0, |m, c| m.max(c.abs())),
        }
    }
}

/// The map `x ↦ μ_x`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MuModel {
    /// `t / (t + ‖x‖)`.
    #[default]
    Induced,
    /// `ε₀(t − ‖x‖)`: the norm is known with certainty.
    Deterministic,
    /// `t / (t + 1)` for every `x ≠ 0`; ignores scaling, so RN2 fails.
    NormBlind,
    /// `ε₀` for every `x`; RN1 fails.
    ConstantEps0,
}

impl MuModel {
    pub fn name(self) -> &'static str {
        match self {
            MuModel::Induced => "induced",
            MuModel::Deterministic => "deterministic",
            MuModel::NormBlind => "norm-blind",
            MuModel::ConstantEps0 => "constant-eps0",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s.trim() {
            "induced" => MuModel::Induced,
            "deterministic" => MuModel::Deterministic,
            "norm-blind" => MuModel::NormBlind,
            "constant-eps0" => MuModel::ConstantEps0,
            _ => return None,
        })
    }

    /// `μ` evaluated for a vector of norm `norm` at `t`.
    pub fn eval_norm(self, norm: f64, t: f64) -> f64 {
        match self {
            MuModel::Induced => rational_control(norm, t),
            MuModel::Deterministic => eps0(t - norm),
            MuModel::NormBlind if norm == 0.0 => eps0(t),
            MuModel::NormBlind => rational_control(1.0, t),
            MuModel::ConstantEps0 => eps0(t),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RnSpace {
    pub norm: Norm,
    pub tnorm: TNorm,
    pub mu: MuModel,
}

impl RnSpace {
    pub fn induced(tnorm: TNorm) -> Self {
        RnSpace {
            norm: Norm::Euclidean,
            tnorm,
            mu: MuModel::Induced,
        }
    }

    pub fn with_mu(mut self, mu: MuModel) -> Self {
        self.mu = mu;
        self
    }

    pub fn mu(&self, x: &Vector, t: f64) -> f64 {
        self.mu.eval_norm(self.norm.eval(x), t)
    }

    /// `μ_x` as a distribution function.
    pub fn dist(&self, x: &Vector) -> DistFn {
        let n = self.norm.eval(x);
        match self.mu {
            MuModel::Induced => DistFn::RationalControl(n),
            MuModel::Deterministic => DistFn::Step(n),
            MuModel::NormBlind if n == 0.0 => DistFn::eps0(),
            MuModel::NormBlind => DistFn::RationalControl(1.0),
            MuModel::ConstantEps0 => DistFn::eps0(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Axiom {
    Rn1,
    Rn2,
    Rn3,
}

impl Axiom {
    pub fn name(self) -> &'static str {
        match self {
            Axiom::Rn1 => "RN1",
            Axiom::Rn2 => "RN2",
            Axiom::Rn3 => "RN3",
        }
    }
}

/// One fuzzing draw.
#[derive(Debug, Clone, PartialEq)]
pub struct Witness {
    pub x: Vector,
    pub y: Vector,
    pub alpha: f64,
    pub t: f64,
    pub s: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AxiomViolation {
    pub axiom: Axiom,
    /// `None` for fixed probes such as the zero vector.
    pub sample: Option<u64>,
    pub witness: Witness,
    pub magnitude: f64,
}

/// Flat line record for CSV output.
#[derive(Debug, Clone, Serialize)]
pub struct AxiomRecord {
    pub axiom: &'static str,
    pub sample: Option<u64>,
    pub x: String,
    pub y: String,
    pub alpha: f64,
    pub t: f64,
    pub s: f64,
    pub magnitude: f64,
}

impl From<&AxiomViolation> for AxiomRecord {
    fn from(v: &AxiomViolation) -> Self {
        AxiomRecord {
            axiom: v.axiom.name(),
            sample: v.sample,
            x: v.witness.x.to_string(),
            y: v.witness.y.to_string(),
            alpha: v.witness.alpha,
            t: v.witness.t,
            s: v.witness.s,
            magnitude: v.magnitude,
        }
    }
}

/// Draws sample `index` of a fuzzing run. Each sample has its own generator
/// seeded from `seed + index`, so the sample set does not depend on the order
/// in which samples are evaluated.
pub fn draw_witness(seed: u64, index: u64, dim: usize) -> Witness {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(index));
    let coords = |rng: &mut ChaCha8Rng| {
        Vector::new((0..dim).map(|_| rng.random_range(-10.0..=10.0)).collect())
    };
    let x = coords(&mut rng);
    let y = coords(&mut rng);
    let (lo, hi) = (1e-3f64.ln(), 1e3f64.ln());
    let t = rng.random_range(lo..=hi).exp();
    let s = rng.random_range(lo..=hi).exp();
    let alpha = loop {
        let a: f64 = rng.random_range(-4.0..=4.0);
        if a != 0.0 {
            break a;
        }
    };
    Witness { x, y, alpha, t, s }
}

fn rn1_violation(space: &RnSpace, x: &Vector, grid: &[f64]) -> Option<f64> {
    let is_eps0 = grid.iter().all(|&t| space.mu(x, t) == 1.0);
    let norm = space.norm.eval(x);
    let is_zero = norm == 0.0;
    if is_eps0 == is_zero {
        None
    } else if is_zero {
        // zero vector whose distribution is not ε₀
        Some(
            grid.iter()
                .map(|&t| 1.0 - space.mu(x, t))
                .fold(0.0, f64::max),
        )
    } else {
        Some(norm)
    }
}

fn check_sample(
    space: &RnSpace,
    seed: u64,
    index: u64,
    dim: usize,
    grid: &[f64],
) -> Vec<AxiomViolation> {
    let w = draw_witness(seed, index, dim);
    let mut out = Vec::new();
    let mut push = |axiom, magnitude| {
        out.push(AxiomViolation {
            axiom,
            sample: Some(index),
            witness: w.clone(),
            magnitude,
        })
    };

    if let Some(m) = rn1_violation(space, &w.x, grid) {
        push(Axiom::Rn1, m);
    }

    let scaled = space.mu(&w.x.scale(w.alpha), w.t);
    let rescaled = space.mu(&w.x, w.t / w.alpha.abs());
    let gap = (scaled - rescaled).abs();
    if gap > AXIOM_SLACK {
        push(Axiom::Rn2, gap);
    }

    let lhs = space.mu(&(&w.x + &w.y), w.t + w.s);
    let rhs = space.tnorm.eval(space.mu(&w.x, w.t), space.mu(&w.y, w.s));
    if lhs < rhs - AXIOM_SLACK {
        push(Axiom::Rn3, rhs - lhs);
    }
    out
}

/// Fuzzes RN1–RN3 with `sample_count` seeded draws in dimension `dim`.
///
/// Coordinates are uniform in `[-10, 10]`, `t` and `s` log-uniform in
/// `[1e-3, 1e3]`, and `α` uniform in `[-4, 4] \ {0}`. RN1 is also probed at
/// the zero vector. RN3 uses the space's own t-norm. Violations come back in
/// sample order; an empty list is a pass.
pub fn check_axioms(
    space: &RnSpace,
    dim: usize,
    sample_count: u64,
    seed: u64,
) -> Vec<AxiomViolation> {
    let grid = default_grid();
    let zero = Vector::zeros(dim);
    let mut out: Vec<AxiomViolation> = rn1_violation(space, &zero, &grid)
        .map(|magnitude| AxiomViolation {
            axiom: Axiom::Rn1,
            sample: None,
            witness: Witness {
                x: zero.clone(),
                y: zero.clone(),
                alpha: 1.0,
                t: grid[0],
                s: grid[0],
            },
            magnitude,
        })
        .into_iter()
        .collect();
    let sampled: Vec<AxiomViolation> = (0..sample_count)
        .into_par_iter()
        .flat_map_iter(|i| check_sample(space, seed, i, dim, &grid))
        .collect();
    out.extend(sampled);
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConvergenceReport {
    pub holds: bool,
    /// Least `N` such that every index in `[N, horizon]` is within tolerance.
    pub first_n: Option<usize>,
}

/// Sampled convergence: is there `N <= horizon` with
/// `μ_{x_n − x}(eps) > 1 − lambda` for all `n` in `[N, horizon]`?
/// Sequences are indexed from 1.
pub fn seq_convergent<S>(
    space: &RnSpace,
    seq: S,
    x: &Vector,
    eps: f64,
    lambda: f64,
    horizon: usize,
) -> ConvergenceReport
where
    S: Fn(usize) -> Vector,
{
    let last_bad = (1..=horizon)
        .rev()
        .find(|&n| space.mu(&(&seq(n) - x), eps) <= 1.0 - lambda);
    let first_n = match last_bad {
        None => Some(1),
        Some(n) if n < horizon => Some(n + 1),
        Some(_) => None,
    };
    ConvergenceReport {
        holds: first_n.is_some(),
        first_n,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CauchyReport {
    pub holds: bool,
    pub first_n: Option<usize>,
    /// A failing pair `(n, m)`, `n >= m`, with the largest `m` found.
    pub witness: Option<(usize, usize)>,
}

/// Sampled Cauchy property over all pairs `horizon >= n >= m >= N`. A tail
/// of a few terms is Cauchy vacuously, so `holds` also needs
/// `N <= horizon / 2`.
pub fn seq_cauchy<S>(space: &RnSpace, seq: S, eps: f64, lambda: f64, horizon: usize) -> CauchyReport
where
    S: Fn(usize) -> Vector,
{
    let terms: Vec<Vector> = (1..=horizon).map(seq).collect();
    let mut witness = None;
    for m in (1..=horizon).rev() {
        let bad = (m..=horizon)
            .find(|&n| space.mu(&(&terms[n - 1] - &terms[m - 1]), eps) <= 1.0 - lambda);
        if let Some(n) = bad {
            witness = Some((n, m));
            break;
        }
    }
    let first_n = match witness {
        None => Some(1),
        Some((_, m)) if m < horizon => Some(m + 1),
        Some(_) => None,
    };
    CauchyReport {
        holds: first_n.is_some_and(|n| n <= horizon / 2),
        first_n,
        witness,
    }
}

/// `max_t |μ_{x_horizon}(t) − μ_x(t)|` over `tgrid`.
pub fn mu_continuity_check<S>(
    space: &RnSpace,
    seq: S,
    x: &Vector,
    tgrid: &[f64],
    horizon: usize,
) -> f64
where
    S: Fn(usize) -> Vector,
{
    let xn = seq(horizon);
    tgrid
        .iter()
        .map(|&t| (space.mu(&xn, t) - space.mu(x, t)).abs())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn e1() -> Vector {
        Vector::basis(1, 0)
    }

    #[test]
    fn induced_examples() {
        assert_eq!(induced_mu(&Vector::scalar(1.0), 1.0).unwrap(), 0.5);
        assert_eq!(induced_mu(&Vector::scalar(0.0), 0.001).unwrap(), 1.0);
        assert_eq!(induced_mu(&Vector::new(vec![3.0, 0.0]), 1.0).unwrap(), 0.25);
        assert_eq!(
            induced_mu(&Vector::scalar(1.0), 0.0),
            Err(RnError::NonPositiveT(0.0))
        );
        assert!(induced_mu(&Vector::scalar(1.0), -2.0).is_err());
    }

    #[test]
    fn induced_space_passes_fuzz() {
        for k in TNorm::ALL {
            let v = check_axioms(&RnSpace::induced(k), 2, 1000, 42);
            assert!(v.is_empty(), "{k}: {:?}", v.first());
        }
    }

    #[test]
    fn deterministic_space_passes_fuzz() {
        let space = RnSpace::induced(TNorm::Minimum).with_mu(MuModel::Deterministic);
        assert!(check_axioms(&space, 1, 1000, 7).is_empty());
    }

    #[test]
    fn broken_rn2_is_caught() {
        let space = RnSpace::induced(TNorm::Minimum).with_mu(MuModel::NormBlind);
        let v = check_axioms(&space, 1, 200, 1);
        assert!(!v.is_empty());
        assert!(v.iter().all(|d| d.axiom == Axiom::Rn2));
        assert!(v.iter().any(|d| d.witness.alpha.abs() > 1.5));
    }

    #[test]
    fn constant_eps0_breaks_rn1() {
        let space = RnSpace::induced(TNorm::Minimum).with_mu(MuModel::ConstantEps0);
        let v = check_axioms(&space, 1, 50, 3);
        let rn1 = v.iter().filter(|d| d.axiom == Axiom::Rn1).count();
        assert_eq!(rn1, 50);
    }

    #[test]
    fn samples_are_order_independent() {
        let a = draw_witness(9, 17, 3);
        let _ = draw_witness(9, 16, 3);
        assert_eq!(a, draw_witness(9, 17, 3));
        assert_ne!(a, draw_witness(9, 18, 3));
    }

    #[test]
    fn rn2_exact_in_induced_space() {
        let space = RnSpace::induced(TNorm::Product);
        for i in 0..500 {
            let w = draw_witness(5, i, 2);
            let l = space.mu(&w.x.scale(w.alpha), w.t);
            let r = space.mu(&w.x, w.t / w.alpha.abs());
            assert!((l - r).abs() < 1e-15);
        }
    }

    #[test]
    fn convergence_examples() {
        let space = RnSpace::induced(TNorm::Minimum);
        let zero = Vector::zeros(1);
        let r = seq_convergent(&space, |n| (1.0 / n as f64) * &e1(), &zero, 0.1, 0.1, 1000);
        assert_eq!(
            r,
            ConvergenceReport {
                holds: true,
                first_n: Some(91)
            }
        );

        let c = seq_convergent(&space, |_| e1(), &e1(), 0.1, 0.1, 10);
        assert_eq!(c.first_n, Some(1));

        for horizon in [10, 1000] {
            let d = seq_convergent(&space, |n| n as f64 * &e1(), &zero, 0.1, 0.1, horizon);
            assert!(!d.holds);
        }
    }

    #[test]
    fn cauchy_examples() {
        let space = RnSpace::induced(TNorm::Minimum);
        let partial = |n: usize| (1.0 - 0.5f64.powi(n as i32)) * &e1();
        let r = seq_cauchy(&space, partial, 0.01, 0.01, 200);
        assert!(r.holds);
        // |x_n - x_m| < 2^-m, so the tail clears 1e-4 once 2^-m < 1e-4 / 0.99
        assert!(r.first_n.unwrap() <= 14);

        let alt = |n: usize| {
            if n.is_multiple_of(2) {
                e1()
            } else {
                Vector::zeros(1)
            }
        };
        let a = seq_cauchy(&space, alt, 0.01, 0.1, 50);
        assert!(!a.holds);
        assert_eq!(a.witness, Some((50, 49)));

        let c = seq_cauchy(&space, |_| e1(), 0.01, 0.1, 20);
        assert_eq!(c.first_n, Some(1));
    }

    #[test]
    fn norm_convergence_agrees_with_mu_convergence() {
        let space = RnSpace::induced(TNorm::Minimum);
        let zero = Vector::zeros(1);
        type Family = (fn(usize) -> f64, bool);
        let families: [Family; 4] = [
            (|n| 1.0 / n as f64, true),
            (|n| 0.5f64.powi(n as i32), true),
            (|n| 1.0 / (n as f64).sqrt(), true),
            (|_| 0.3, false),
        ];
        for (f, converges) in families {
            let r = seq_convergent(&space, |n| f(n) * &e1(), &zero, 0.5, 0.05, 100_000);
            assert_eq!(r.holds, converges);
        }
    }

    #[test]
    fn continuity_examples() {
        let space = RnSpace::induced(TNorm::Minimum);
        let dev = mu_continuity_check(
            &space,
            |n| (1.0 + 1.0 / n as f64) * &e1(),
            &e1(),
            &[1.0],
            10_000,
        );
        assert!(dev <= 3e-5);
        assert!(dev > 2e-5);

        assert_eq!(
            mu_continuity_check(&space, |_| e1(), &e1(), &[0.1, 1.0, 10.0], 5),
            0.0
        );

        let h = 1000;
        let dev = mu_continuity_check(
            &space,
            |n| (1.0 / n as f64) * &e1(),
            &Vector::zeros(1),
            &[1.0],
            h,
        );
        let inv = 1.0 / h as f64;
        assert_abs_diff_eq!(dev, inv / (1.0 + inv), epsilon = 1e-15);
    }

    #[test]
    fn dist_matches_mu() {
        let space = RnSpace::induced(TNorm::Minimum);
        let x = Vector::new(vec![1.0, 1.0]);
        for t in [0.1, 1.0, 3.0] {
            assert_eq!(space.dist(&x).eval(t), space.mu(&x, t));
        }
        let det = space.with_mu(MuModel::Deterministic);
        assert_eq!(det.dist(&x), DistFn::Step(x.norm()));
    }
}
