//! Residual operators for the quadratic, quartic and quadratic–quartic
//! functional equations, and the splitting of a solution into its quadratic
//! and quartic parts.
//!
//! The mixed equation is
//!
//! ```text
//! f(2x+y) + f(2x−y) = 4[f(x+y) + f(x−y)] + 2[f(2x) − 4f(x)] − 6f(y)
//! ```
//!
//! and every solution splits as `f = (h − g) / 12` with
//! `g(x) = f(2x) − 16f(x)` quadratic and `h(x) = f(2x) − 4f(x)` quartic.

use std::cell::Cell;

use serde::{Deserialize, Serialize};

use crate::vector::Vector;

/// A real-valued map on coordinate space.
pub trait RealMap {
    fn eval(&self, x: &Vector) -> f64;

    /// Magnitude of the intermediate values that produce `eval(x)`. Used to
    /// estimate the floating-point noise floor of derived quantities; maps
    /// built by cancellation (such as [`part_g`]) report more than `|eval(x)|`.
    fn magnitude(&self, x: &Vector) -> f64 {
        self.eval(x).abs()
    }
}

impl<F> RealMap for F
where
    F: Fn(&Vector) -> f64,
{
    fn eval(&self, x: &Vector) -> f64 {
        self(x)
    }
}

fn splitmix64(z: u64) -> u64 {
    let mut z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Deterministic pseudo-random value in `[-1, 1)` keyed by `seed` and the
/// coordinates of `x` rounded to 12 fractional digits. Points that round to
/// the origin get zero, which keeps `f(0) = 0` for perturbed maps.
pub fn noise_eta(seed: u64, x: &Vector) -> f64 {
    let keys: Vec<i128> = x
        .coords()
        .iter()
        .map(|c| (c * 1e12).round() as i128)
        .collect();
    if keys.iter().all(|&k| k == 0) {
        return 0.0;
    }
    let mut h = splitmix64(seed);
    for k in keys {
        h = splitmix64(h ^ (k as u64));
        h = splitmix64(h ^ ((k >> 64) as u64));
    }
    let u = (h >> 11) as f64 / (1u64 << 53) as f64;
    2.0 * u - 1.0
}

/// `a·Q(x)² + b·Q(x) + δ·η(x)` with `Q(x) = ‖x‖²`; for scalars this is
/// `a·x⁴ + b·x² + δ·η(x)`. With `δ = 0` it solves the mixed equation exactly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestFunction {
    /// Quartic coefficient.
    pub a: f64,
    /// Quadratic coefficient.
    pub b: f64,
    /// Noise amplitude, `>= 0`.
    pub delta: f64,
    pub seed: u64,
    pub dimension: usize,
}

impl TestFunction {
    pub fn exact(a: f64, b: f64) -> Self {
        TestFunction {
            a,
            b,
            delta: 0.0,
            seed: 0,
            dimension: 1,
        }
    }

    pub fn with_noise(mut self, delta: f64, seed: u64) -> Self {
        assert!(delta >= 0.0, "noise amplitude must be non-negative");
        self.delta = delta;
        self.seed = seed;
        self
    }

    pub fn in_dimension(mut self, dimension: usize) -> Self {
        assert!(dimension >= 1);
        self.dimension = dimension;
        self
    }

    /// The unperturbed polynomial part.
    pub fn polynomial(&self, x: &Vector) -> f64 {
        let q = x.norm_sq();
        self.a * q * q + self.b * q
    }

    pub fn noise(&self, x: &Vector) -> f64 {
        if self.delta == 0.0 {
            0.0
        } else {
            self.delta * noise_eta(self.seed, x)
        }
    }
}

impl RealMap for TestFunction {
    fn eval(&self, x: &Vector) -> f64 {
        debug_assert_eq!(x.dim(), self.dimension);
        self.polynomial(x) + self.noise(x)
    }
}

/// `f(2x+y) + f(2x−y) − 4f(x+y) − 4f(x−y) − 2f(2x) + 8f(x) + 6f(y)`.
pub fn residual_qq<M: RealMap + ?Sized>(f: &M, x: &Vector, y: &Vector) -> f64 {
    let x2 = 2.0 * x;
    f.eval(&(&x2 + y)) + f.eval(&(&x2 - y))
        - 4.0 * f.eval(&(x + y))
        - 4.0 * f.eval(&(x - y))
        - 2.0 * f.eval(&x2)
        + 8.0 * f.eval(x)
        + 6.0 * f.eval(y)
}

/// `f(x+y) + f(x−y) − 2f(x) − 2f(y)`.
pub fn residual_quadratic<M: RealMap + ?Sized>(f: &M, x: &Vector, y: &Vector) -> f64 {
    f.eval(&(x + y)) + f.eval(&(x - y)) - 2.0 * f.eval(x) - 2.0 * f.eval(y)
}

/// `f(x+2y) + f(x−2y) − 4f(x+y) − 4f(x−y) − 24f(y) + 6f(x)`.
pub fn residual_quartic<M: RealMap + ?Sized>(f: &M, x: &Vector, y: &Vector) -> f64 {
    let y2 = 2.0 * y;
    f.eval(&(x + &y2)) + f.eval(&(x - &y2))
        - 4.0 * f.eval(&(x + y))
        - 4.0 * f.eval(&(x - y))
        - 24.0 * f.eval(y)
        + 6.0 * f.eval(x)
}

/// The quartic residual with `x` and `y` interchanged, which is the form an
/// even map is checked against:
/// `f(2x+y) + f(2x−y) − 4f(x+y) − 4f(x−y) − 24f(x) + 6f(y)`.
pub fn residual_quartic_swapped<M: RealMap + ?Sized>(f: &M, x: &Vector, y: &Vector) -> f64 {
    let x2 = 2.0 * x;
    f.eval(&(&x2 + y)) + f.eval(&(&x2 - y))
        - 4.0 * f.eval(&(x + y))
        - 4.0 * f.eval(&(x - y))
        - 24.0 * f.eval(x)
        + 6.0 * f.eval(y)
}

/// `x ↦ f(2x) − 16f(x)`, the quadratic part (up to the factor −12).
#[derive(Debug, Clone, Copy)]
pub struct PartG<'a, M: ?Sized>(pub &'a M);

/// `x ↦ f(2x) − 4f(x)`, the quartic part (up to the factor 12).
#[derive(Debug, Clone, Copy)]
pub struct PartH<'a, M: ?Sized>(pub &'a M);

pub fn part_g<M: RealMap + ?Sized>(f: &M) -> PartG<'_, M> {
    PartG(f)
}

pub fn part_h<M: RealMap + ?Sized>(f: &M) -> PartH<'_, M> {
    PartH(f)
}

impl<M: RealMap + ?Sized> RealMap for PartG<'_, M> {
    fn eval(&self, x: &Vector) -> f64 {
        self.0.eval(&x.dilate(1)) - 16.0 * self.0.eval(x)
    }

    fn magnitude(&self, x: &Vector) -> f64 {
        self.0.magnitude(&x.dilate(1)) + 16.0 * self.0.magnitude(x)
    }
}

impl<M: RealMap + ?Sized> RealMap for PartH<'_, M> {
    fn eval(&self, x: &Vector) -> f64 {
        self.0.eval(&x.dilate(1)) - 4.0 * self.0.eval(x)
    }

    fn magnitude(&self, x: &Vector) -> f64 {
        self.0.magnitude(&x.dilate(1)) + 4.0 * self.0.magnitude(x)
    }
}

/// `(h − g) / 12`.
pub fn reconstruct(g_val: f64, h_val: f64) -> f64 {
    (h_val - g_val) / 12.0
}

/// The symmetric bi-additive form of a quadratic map by polarization:
/// `(f(x+y) − f(x−y)) / 4`.
pub fn biadditive_b<M: RealMap + ?Sized>(f: &M, x: &Vector, y: &Vector) -> f64 {
    (f.eval(&(x + y)) - f.eval(&(x - y))) / 4.0
}

/// `f(4x) − 20f(2x) + 64f(x)`; vanishes for every solution of the mixed
/// equation, and equals `g(2x) − 4g(x)` and `h(2x) − 16h(x)` for any map.
pub fn check_doubling<M: RealMap + ?Sized>(f: &M, x: &Vector) -> f64 {
    f.eval(&x.dilate(2)) - 20.0 * f.eval(&x.dilate(1)) + 64.0 * f.eval(x)
}

/// `f(−x) − f(x)`.
pub fn check_even<M: RealMap + ?Sized>(f: &M, x: &Vector) -> f64 {
    f.eval(&(-x)) - f.eval(x)
}

/// Records the largest `|f|` seen while a residual is evaluated through it.
pub struct Tracked<'a, M: ?Sized> {
    inner: &'a M,
    max_abs: Cell<f64>,
}

impl<'a, M: RealMap + ?Sized> Tracked<'a, M> {
    pub fn new(inner: &'a M) -> Self {
        Tracked {
            inner,
            max_abs: Cell::new(0.0),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.max_abs.get()
    }
}

impl<M: RealMap + ?Sized> RealMap for Tracked<'_, M> {
    fn eval(&self, x: &Vector) -> f64 {
        let v = self.inner.eval(x);
        self.max_abs.set(self.max_abs.get().max(v.abs()));
        v
    }
}

/// Runs `check` against `f` and returns its value with the stencil scale
/// `max(1, max |f|)` over every point `check` evaluated.
pub fn with_stencil_scale<M, C>(f: &M, check: C) -> (f64, f64)
where
    M: RealMap + ?Sized,
    C: FnOnce(&Tracked<'_, M>) -> f64,
{
    let tracked = Tracked::new(f);
    let value = check(&tracked);
    (value, tracked.max_abs().max(1.0))
}
