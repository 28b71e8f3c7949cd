//! Distribution functions of the class Δ⁺ and their point-wise order.
//!
//! A distribution function here is non-decreasing and left-continuous on the
//! real line with `F(0) = 0` and `F(+inf) = 1`. Three representations cover
//! what the rest of the crate needs: step functions (shifted copies of the
//! maximal element ε₀), rational control profiles `t / (t + c)`, and
//! piecewise-linear interpolation of sampled data.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Point-wise slack used by [`dist_le`].
pub const ORDER_SLACK: f64 = 1e-12;

/// How close `F(10⁹ · scale)` must be to one for [`validate_distfn`].
pub const LIMIT_SLACK: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum DistError {
    #[error("grid-sampled distribution needs at least one knot")]
    EmptyGrid,
    #[error("knot abscissas must be strictly increasing (t[{index}] = {value})")]
    NotIncreasing { index: usize, value: f64 },
    #[error("knot {index} is not finite")]
    NonFinite { index: usize },
    #[error("scale parameter must be finite and non-negative, got {0}")]
    BadScale(f64),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// The maximal element ε₀ of Δ⁺: zero for `t <= 0`, one afterwards.
pub fn eps0(t: f64) -> f64 {
    if t > 0.0 {
        1.0
    } else {
        0.0
    }
}

/// Piecewise-linear distribution data: knots `(t_k, v_k)` with strictly
/// increasing `t_k`.
///
/// Evaluation is zero for `t <= 0`, linear from the origin to the first knot,
/// linear between knots, and constant at the last value beyond the last knot.
/// `F(+inf)` is one by convention, so data whose last value is below one is a
/// member of Δ⁺ but not of D⁺.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSampled {
    knots: Vec<f64>,
    values: Vec<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
struct KnotRecord {
    t: f64,
    value: f64,
}

impl GridSampled {
    pub fn new(knots: Vec<f64>, values: Vec<f64>) -> Result<Self, DistError> {
        assert_eq!(knots.len(), values.len(), "knot and value counts differ");
        if knots.is_empty() {
            return Err(DistError::EmptyGrid);
        }
        for (i, (t, v)) in knots.iter().zip(&values).enumerate() {
            if !t.is_finite() || !v.is_finite() {
                return Err(DistError::NonFinite { index: i });
            }
        }
        if let Some(i) = knots.windows(2).position(|w| w[1] <= w[0]) {
            return Err(DistError::NotIncreasing {
                index: i + 1,
                value: knots[i + 1],
            });
        }
        Ok(GridSampled { knots, values })
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    fn eval(&self, t: f64) -> f64 {
        if t <= 0.0 || t.is_nan() {
            return 0.0;
        }
        if t == f64::INFINITY {
            return 1.0;
        }
        let idx = self.knots.partition_point(|&k| k < t);
        let raw = if idx == self.knots.len() {
            self.values[idx - 1]
        } else {
            let (t1, v1) = (self.knots[idx], self.values[idx]);
            let (t0, v0) = if idx == 0 {
                (0.0, 0.0)
            } else {
                (self.knots[idx - 1], self.values[idx - 1])
            };
            if t0 < 0.0 {
                // knot left of the origin: interpolate from (0, 0) instead
                v1 * t / t1
            } else {
                v0 + (v1 - v0) * (t - t0) / (t1 - t0)
            }
        };
        raw.clamp(0.0, 1.0)
    }

    /// Reads a two-column `t,value` CSV. A header row is optional.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self, DistError> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let mut knots = Vec::new();
        let mut values = Vec::new();
        for (i, row) in rdr.records().enumerate() {
            let row = row?;
            if i == 0 && row.get(0).is_some_and(|s| s.parse::<f64>().is_err()) {
                continue;
            }
            let rec: KnotRecord = row.deserialize(None)?;
            knots.push(rec.t);
            values.push(rec.value);
        }
        Self::new(knots, values)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), DistError> {
        let mut wtr = csv::Writer::from_writer(writer);
        for (&t, &value) in self.knots.iter().zip(&self.values) {
            wtr.serialize(KnotRecord { t, value })?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, DistError> {
        Self::read_csv(std::fs::File::open(path)?)
    }

    pub fn store(&self, path: impl AsRef<Path>) -> Result<(), DistError> {
        self.write_csv(std::fs::File::create(path)?)
    }
}

/// A distribution function in Δ⁺.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum DistFn {
    /// ε₀ shifted to `c`: zero on `(-inf, c]`, one afterwards.
    Step(f64),
    /// `t / (t + c)` for `t > 0`; `c = 0` degenerates to ε₀.
    RationalControl(f64),
    GridSampled(GridSampled),
}

impl DistFn {
    pub fn step(c: f64) -> Result<Self, DistError> {
        check_scale(c).map(DistFn::Step)
    }

    pub fn rational_control(c: f64) -> Result<Self, DistError> {
        check_scale(c).map(DistFn::RationalControl)
    }

    pub fn eps0() -> Self {
        DistFn::Step(0.0)
    }

    /// Evaluates at `t`; infinite arguments are accepted.
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            DistFn::Step(c) => eps0(t - c),
            DistFn::RationalControl(c) => rational_control(*c, t),
            DistFn::GridSampled(g) => g.eval(t),
        }
    }

    /// A characteristic abscissa used to probe the limit at infinity.
    pub fn scale(&self) -> f64 {
        let s = match self {
            DistFn::Step(c) | DistFn::RationalControl(c) => *c,
            DistFn::GridSampled(g) => g.knots.last().copied().unwrap_or(1.0).abs(),
        };
        if s > 0.0 {
            s
        } else {
            1.0
        }
    }
}

/// `t / (t + c)` on `t > 0`, zero elsewhere, one at `+inf`.
pub fn rational_control(c: f64, t: f64) -> f64 {
    if t.is_nan() || t <= 0.0 {
        0.0
    } else if t == f64::INFINITY || c == 0.0 {
        1.0
    } else {
        t / (t + c)
    }
}

fn check_scale(c: f64) -> Result<f64, DistError> {
    if c.is_finite() && c >= 0.0 {
        Ok(c)
    } else {
        Err(DistError::BadScale(c))
    }
}

/// Log-spaced grid of `count` points over `[lo, hi]`.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi >= lo, "log grid needs 0 < lo <= hi");
    if count <= 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..count)
        .map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp())
        .collect()
}

/// The default order-checking grid: 121 points over `[1e-6, 1e6]`.
pub fn default_grid() -> Vec<f64> {
    log_grid(1e-6, 1e6, 121)
}

/// Sampled point-wise order: `F(t) <= G(t) + ORDER_SLACK` on every grid point.
pub fn dist_le(f: &DistFn, g: &DistFn, grid: &[f64]) -> bool {
    grid.iter().all(|&t| f.eval(t) <= g.eval(t) + ORDER_SLACK)
}

/// A failed Δ⁺ membership condition.
#[derive(Debug, Clone, PartialEq)]
pub enum DistDiagnostic {
    /// Evaluation decreased between consecutive grid points.
    Decreasing {
        t_lo: f64,
        t_hi: f64,
        drop: f64,
    },
    /// Stored knot values decrease at `index`.
    KnotDecreasing {
        index: usize,
        t: f64,
        drop: f64,
    },
    /// A stored value leaves `[0, 1]`.
    OutOfRange {
        index: usize,
        value: f64,
    },
    NonZeroAtOrigin(f64),
    NoUnitLimit {
        t: f64,
        value: f64,
    },
}

/// Checks the Δ⁺ conditions on a sorted grid. An empty list means valid.
pub fn validate_distfn(f: &DistFn, grid: &[f64]) -> Vec<DistDiagnostic> {
    let mut out = Vec::new();
    if let DistFn::GridSampled(g) = f {
        for (i, &v) in g.values.iter().enumerate() {
            if !(0.0..=1.0).contains(&v) {
                out.push(DistDiagnostic::OutOfRange { index: i, value: v });
            }
        }
        for (i, w) in g.values.windows(2).enumerate() {
            if w[1] < w[0] {
                out.push(DistDiagnostic::KnotDecreasing {
                    index: i + 1,
                    t: g.knots[i + 1],
                    drop: w[0] - w[1],
                });
            }
        }
    }
    for w in grid.windows(2) {
        let (lo, hi) = (f.eval(w[0]), f.eval(w[1]));
        if hi < lo {
            out.push(DistDiagnostic::Decreasing {
                t_lo: w[0],
                t_hi: w[1],
                drop: lo - hi,
            });
        }
    }
    let at_zero = f.eval(0.0);
    if at_zero != 0.0 {
        out.push(DistDiagnostic::NonZeroAtOrigin(at_zero));
    }
    let far = 1e9 * f.scale();
    let v = f.eval(far);
    if v < 1.0 - LIMIT_SLACK {
        out.push(DistDiagnostic::NoUnitLimit { t: far, value: v });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eps0_examples() {
        assert_eq!(eps0(0.0), 0.0);
        assert_eq!(eps0(0.5), 1.0);
        assert_eq!(eps0(-3.0), 0.0);
        assert_eq!(DistFn::eps0().eval(f64::INFINITY), 1.0);
        assert_eq!(DistFn::eps0().eval(f64::NEG_INFINITY), 0.0);
    }

    #[test]
    fn step_is_left_continuous() {
        let s = DistFn::Step(2.0);
        assert_eq!(s.eval(2.0), 0.0);
        assert_eq!(s.eval(2.0 + 1e-12), 1.0);
    }

    #[test]
    fn rational_control_midpoint() {
        for c in [0.1, 1.0, 7.5, 1e6] {
            assert_eq!(DistFn::RationalControl(c).eval(c), 0.5);
        }
        assert_eq!(DistFn::RationalControl(0.0).eval(1e-300), 1.0);
    }

    #[test]
    fn order_examples() {
        let grid = default_grid();
        let eps = DistFn::eps0();
        for f in [
            DistFn::Step(3.0),
            DistFn::RationalControl(0.5),
            DistFn::GridSampled(GridSampled::new(vec![1.0, 2.0], vec![0.3, 1.0]).unwrap()),
        ] {
            assert!(dist_le(&f, &eps, &grid));
        }
        assert!(dist_le(&DistFn::Step(2.0), &DistFn::Step(1.0), &grid));
        assert!(!dist_le(&DistFn::Step(1.0), &DistFn::Step(2.0), &grid));
        assert!(!dist_le(
            &DistFn::RationalControl(1.0),
            &DistFn::RationalControl(2.0),
            &[1.0]
        ));
    }

    #[test]
    fn validation_examples() {
        let grid = default_grid();
        assert!(validate_distfn(&DistFn::Step(1.0), &grid).is_empty());
        assert!(validate_distfn(&DistFn::RationalControl(5.0), &grid).is_empty());

        let bad = GridSampled::new(vec![1.0, 2.0, 3.0], vec![0.2, 0.6, 0.4]).unwrap();
        let diags = validate_distfn(&DistFn::GridSampled(bad), &grid);
        assert!(diags.contains(&DistDiagnostic::KnotDecreasing {
            index: 2,
            t: 3.0,
            drop: 0.6 - 0.4
        }));
        assert!(diags
            .iter()
            .any(|d| matches!(d, DistDiagnostic::NoUnitLimit { .. })));
    }

    #[test]
    fn knots_left_of_origin_are_ignored() {
        let g = GridSampled::new(vec![-1.0, 0.0, 1.0], vec![0.5, 0.5, 1.0]).unwrap();
        // F(0) is pinned to zero by evaluation
        let diags = validate_distfn(&DistFn::GridSampled(g), &[0.5, 1.0, 2.0]);
        assert!(diags.is_empty());
    }

    #[test]
    fn grid_interpolation() {
        let g = GridSampled::new(vec![1.0, 3.0], vec![0.5, 1.0]).unwrap();
        let f = DistFn::GridSampled(g);
        assert_eq!(f.eval(0.5), 0.25);
        assert_eq!(f.eval(2.0), 0.75);
        assert_eq!(f.eval(10.0), 1.0);
        assert_eq!(f.eval(0.0), 0.0);
    }

    #[test]
    fn grid_rejects_bad_knots() {
        assert!(matches!(
            GridSampled::new(vec![1.0, 1.0], vec![0.1, 0.2]),
            Err(DistError::NotIncreasing { index: 1, .. })
        ));
        assert!(matches!(
            GridSampled::new(vec![], vec![]),
            Err(DistError::EmptyGrid)
        ));
        assert!(DistFn::step(-1.0).is_err());
        assert!(DistFn::rational_control(f64::NAN).is_err());
    }

    #[test]
    fn csv_roundtrip_and_header() {
        let g = GridSampled::new(vec![0.5, 1.0, 4.0], vec![0.1, 0.7, 1.0]).unwrap();
        let mut buf = Vec::new();
        g.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("t,value\n"));
        assert_eq!(GridSampled::read_csv(buf.as_slice()).unwrap(), g);

        let bare = "0.5,0.1\n1.0,0.7\n";
        let parsed = GridSampled::read_csv(bare.as_bytes()).unwrap();
        assert_eq!(parsed.knots(), &[0.5, 1.0]);

        let unsorted = "t,value\n2,0.5\n1,0.7\n";
        assert!(GridSampled::read_csv(unsorted.as_bytes()).is_err());
    }

    #[test]
    fn file_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.csv");
        let g = GridSampled::new(vec![1.0, 2.0], vec![0.5, 1.0]).unwrap();
        g.store(&path).unwrap();
        assert_eq!(GridSampled::load(&path).unwrap(), g);
    }

    proptest::proptest! {
        #[test]
        fn evaluations_stay_in_unit_interval(c in 0.0f64..1e6, t in -1e6f64..1e6) {
            for f in [DistFn::Step(c), DistFn::RationalControl(c)] {
                let v = f.eval(t);
                proptest::prop_assert!((0.0..=1.0).contains(&v));
            }
        }

        #[test]
        fn eps0_is_maximal(c in 0.0f64..1e3) {
            let grid = default_grid();
            proptest::prop_assert!(dist_le(&DistFn::RationalControl(c), &DistFn::eps0(), &grid));
            proptest::prop_assert!(dist_le(&DistFn::Step(c), &DistFn::eps0(), &grid));
        }
    }
}
