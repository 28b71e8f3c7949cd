//! Experiment configuration: `key = value` files overridden by flags.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use clap::Args;
use rnstab::distributions::log_grid;
use rnstab::hyers::{Codomain, Combiner, PerturbationProfile};
use rnstab::rnspace::{MuModel, Norm};
use rnstab::{TNorm, Vector};

use crate::CliError;

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "RNSTAB_OUT_DIR";

macro_rules! config_keys {
    ($($field:ident => $key:literal: $help:literal,)*) => {
        /// Every configuration key as a `--key value` flag.
        #[derive(Debug, Clone, Default, Args)]
        pub struct KeyFlags {
            $(
                #[arg(long = $key, value_name = "VALUE", help = $help, allow_hyphen_values = true)]
                pub $field: Option<String>,
            )*
        }

        pub const KEYS: &[&str] = &[$($key),*];

        impl KeyFlags {
            pub fn pairs(&self) -> Vec<(&'static str, String)> {
                let mut out = Vec::new();
                $(
                    if let Some(v) = &self.$field {
                        out.push(($key, v.clone()));
                    }
                )*
                out
            }
        }
    };
}

config_keys! {
    dimension => "dimension": "coordinate dimension of the domain",
    draws => "draws": "number of seeded (a, b) draws",
    a => "a": "pin the quartic coefficient instead of drawing it",
    b => "b": "pin the quadratic coefficient instead of drawing it",
    a_min => "a-min": "lower end of the quartic coefficient range",
    a_max => "a-max": "upper end of the quartic coefficient range",
    b_min => "b-min": "lower end of the quadratic coefficient range",
    b_max => "b-max": "upper end of the quadratic coefficient range",
    delta => "delta": "noise amplitude",
    seed => "seed": "master seed",
    x_min => "x-min": "x-grid lower end",
    x_max => "x-max": "x-grid upper end",
    x_count => "x-count": "x-grid point count",
    x_scale => "x-scale": "x-grid spacing: linear or log",
    t_min => "t-min": "t-grid lower end",
    t_max => "t-max": "t-grid upper end",
    t_count => "t-count": "t-grid point count",
    t_scale => "t-scale": "t-grid spacing: linear or log",
    depth => "depth": "truncation depth of infinite folds",
    n_max => "n-max": "deepest dilation level of the direct method",
    tol => "tol": "residual and convergence tolerance",
    parts => "parts": "recover from direct-perturbed parts (direct) or parts of a perturbed solution (derived)",
    combiner => "combiner": "tnorm-fold, clamped-sum or both",
    tnorm => "tnorm": "minimum, product or lukasiewicz",
    rho => "rho": "perturbation profile: step or control",
    rho_c => "rho-c": "step profile defect bound",
    rho_theta => "rho-theta": "control profile scale",
    rho_p => "rho-p": "control profile exponent",
    codomain => "codomain": "auto, induced or deterministic",
    samples => "samples": "axiom fuzzing sample count",
    mu => "mu": "induced, deterministic, norm-blind or constant-eps0",
    norm => "norm": "euclidean or max",
    tail_sequence => "tail-sequence": "geometric, harmonic or inverse-square",
    tail_starts => "tail-starts": "comma-separated tail start indices",
    tail_depth => "tail-depth": "terms per tail fold",
    tail_threshold => "tail-threshold": "last-block defect mass below which tails converge",
    output => "output": "report file stem",
    out_dir => "out-dir": "report directory",
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scale {
    Linear,
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub min: f64,
    pub max: f64,
    pub count: usize,
    pub scale: Scale,
}

impl GridSpec {
    pub fn points(&self) -> Vec<f64> {
        match self.scale {
            Scale::Log => log_grid(self.min, self.max, self.count),
            Scale::Linear if self.count == 1 => vec![self.min],
            Scale::Linear => (0..self.count)
                .map(|i| self.min + (self.max - self.min) * i as f64 / (self.count - 1) as f64)
                .collect(),
        }
    }

    fn validate(&self, name: &str) -> Result<(), CliError> {
        if self.count == 0 {
            return Err(CliError::config(format!("{name}-count must be at least 1")));
        }
        if !(self.min.is_finite() && self.max.is_finite())
            || (self.count > 1 && self.min >= self.max)
        {
            return Err(CliError::config(format!(
                "{name} range [{}, {}] is degenerate",
                self.min, self.max
            )));
        }
        if self.scale == Scale::Log && self.min <= 0.0 {
            return Err(CliError::config(format!(
                "{name} log grid needs a positive lower end"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PartsSource {
    Direct,
    Derived,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TailSequence {
    Geometric,
    Harmonic,
    InverseSquare,
}

impl TailSequence {
    /// `1 − x_i`.
    pub fn defect(self, i: usize) -> f64 {
        let i = i as f64;
        match self {
            TailSequence::Geometric => 0.5f64.powf(i),
            TailSequence::Harmonic => 1.0 / i,
            TailSequence::InverseSquare => 1.0 / (i * i),
        }
    }

    /// The infinite Łukasiewicz tail `T_{i>n} x_i` when it has a closed form.
    pub fn closed_tail(self, start: usize) -> Option<f64> {
        match self {
            TailSequence::Geometric => Some(1.0 - 0.5f64.powi(start as i32)),
            TailSequence::Harmonic => Some(0.0),
            TailSequence::InverseSquare => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            TailSequence::Geometric => "geometric",
            TailSequence::Harmonic => "harmonic",
            TailSequence::InverseSquare => "inverse-square",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub dimension: usize,
    pub draws: usize,
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub a_range: (f64, f64),
    pub b_range: (f64, f64),
    pub delta: f64,
    pub seed: u64,
    pub xgrid: GridSpec,
    pub tgrid: GridSpec,
    pub depth: usize,
    pub n_max: u32,
    pub tol: f64,
    pub parts: PartsSource,
    pub combiners: Vec<Combiner>,
    pub tnorm: TNorm,
    pub rho: PerturbationProfile,
    pub codomain: Option<Codomain>,
    pub samples: u64,
    pub mu: MuModel,
    pub norm: Norm,
    pub tail_sequence: TailSequence,
    pub tail_starts: Vec<usize>,
    pub tail_depth: usize,
    pub tail_threshold: f64,
    pub output: String,
    pub out_dir: PathBuf,
    pub oracle: bool,
}

const DEFAULTS: &[(&str, &str)] = &[
    ("dimension", "1"),
    ("draws", "1"),
    ("a-min", "-10"),
    ("a-max", "10"),
    ("b-min", "-10"),
    ("b-max", "10"),
    ("delta", "0"),
    ("seed", "0"),
    ("x-min", "-2"),
    ("x-max", "2"),
    ("x-count", "9"),
    ("x-scale", "linear"),
    ("t-min", "0.01"),
    ("t-max", "100"),
    ("t-count", "5"),
    ("t-scale", "log"),
    ("depth", "50"),
    ("n-max", "20"),
    ("tol", "1e-9"),
    ("parts", "direct"),
    ("combiner", "tnorm-fold"),
    ("tnorm", "minimum"),
    ("rho", "step"),
    ("rho-c", "0.4"),
    ("rho-theta", "1"),
    ("rho-p", "1"),
    ("codomain", "auto"),
    ("samples", "10000"),
    ("mu", "induced"),
    ("norm", "euclidean"),
    ("tail-sequence", "geometric"),
    ("tail-starts", "1,3,5"),
    ("tail-depth", "64"),
    ("tail-threshold", "1e-6"),
    ("output", "rnstab"),
];

fn normalize_key(key: &str) -> String {
    key.trim().replace('_', "-")
}

/// Parses `key = value` lines; `#` starts a comment.
pub fn parse_config_text(text: &str) -> Result<Vec<(String, String)>, CliError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::config(format!("line {}: expected `key = value`", i + 1)))?;
        let key = normalize_key(k);
        if !KEYS.contains(&key.as_str()) {
            return Err(CliError::config(format!(
                "line {}: unknown key `{}`",
                i + 1,
                k.trim()
            )));
        }
        out.push((key, v.trim().to_string()));
    }
    Ok(out)
}

struct Raw(BTreeMap<String, String>);

impl Raw {
    fn str(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(String::as_str)
    }

    fn get<T: std::str::FromStr>(&self, key: &str) -> Result<T, CliError> {
        let v = self
            .str(key)
            .ok_or_else(|| CliError::config(format!("missing `{key}`")))?;
        v.parse()
            .map_err(|_| CliError::config(format!("`{key}`: cannot parse `{v}`")))
    }

    fn opt<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>, CliError> {
        self.str(key).map(|_| self.get(key)).transpose()
    }

    fn finite(&self, key: &str) -> Result<f64, CliError> {
        let v: f64 = self.get(key)?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(CliError::config(format!("`{key}` must be finite")))
        }
    }

    fn scale(&self, key: &str) -> Result<Scale, CliError> {
        match self.str(key) {
            Some("linear") => Ok(Scale::Linear),
            Some("log") => Ok(Scale::Log),
            other => Err(CliError::config(format!(
                "`{key}`: expected linear or log, got {other:?}"
            ))),
        }
    }
}

impl ExperimentConfig {
    /// Defaults, then the config file, then flags.
    pub fn load(file: Option<&Path>, flags: &KeyFlags, oracle: bool) -> Result<Self, CliError> {
        let mut raw: BTreeMap<String, String> = DEFAULTS
            .iter()
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect();
        if let Some(path) = file {
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
            raw.extend(parse_config_text(&text)?);
        }
        raw.extend(flags.pairs().into_iter().map(|(k, v)| (k.to_string(), v)));
        if !raw.contains_key("out-dir") {
            let dir = std::env::var(OUT_DIR_ENV).unwrap_or_else(|_| ".".to_string());
            raw.insert("out-dir".to_string(), dir);
        }
        Self::from_raw(&Raw(raw), oracle)
    }

    fn from_raw(r: &Raw, oracle: bool) -> Result<Self, CliError> {
        let combiners = match r.str("combiner") {
            Some("both") => vec![Combiner::TNormFold, Combiner::ClampedSum],
            Some(s) => vec![Combiner::parse(s)
                .ok_or_else(|| CliError::config(format!("unknown combiner `{s}`")))?],
            None => vec![Combiner::TNormFold],
        };
        let rho = match r.str("rho") {
            Some("step") => PerturbationProfile::StepDefect {
                c: r.finite("rho-c")?,
            },
            Some("control") => PerturbationProfile::ControlType {
                theta: r.finite("rho-theta")?,
                p: r.finite("rho-p")?,
            },
            other => {
                return Err(CliError::config(format!(
                    "`rho`: expected step or control, got {other:?}"
                )))
            }
        };
        let codomain = match r.str("codomain") {
            Some("auto") => None,
            Some("induced") => Some(Codomain::Induced),
            Some("deterministic") => Some(Codomain::Deterministic),
            other => {
                return Err(CliError::config(format!(
                    "`codomain`: unknown value {other:?}"
                )))
            }
        };
        let parts = match r.str("parts") {
            Some("direct") => PartsSource::Direct,
            Some("derived") => PartsSource::Derived,
            other => {
                return Err(CliError::config(format!(
                    "`parts`: expected direct or derived, got {other:?}"
                )))
            }
        };
        let tail_sequence = match r.str("tail-sequence") {
            Some("geometric") => TailSequence::Geometric,
            Some("harmonic") => TailSequence::Harmonic,
            Some("inverse-square") => TailSequence::InverseSquare,
            other => {
                return Err(CliError::config(format!(
                    "`tail-sequence`: unknown value {other:?}"
                )))
            }
        };
        let tail_starts = r
            .str("tail-starts")
            .unwrap_or("")
            .split(',')
            .map(|s| {
                s.trim()
                    .parse::<usize>()
                    .map_err(|_| CliError::config(format!("`tail-starts`: bad index `{s}`")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let tnorm: TNorm = r
            .str("tnorm")
            .unwrap_or("")
            .parse()
            .map_err(|e| CliError::config(format!("`tnorm`: {e}")))?;
        let mu_name = r.str("mu").unwrap_or("");
        let mu = MuModel::parse(mu_name)
            .ok_or_else(|| CliError::config(format!("`mu`: unknown model `{mu_name}`")))?;
        let norm = match r.str("norm") {
            Some("euclidean") => Norm::Euclidean,
            Some("max") => Norm::Max,
            other => return Err(CliError::config(format!("`norm`: unknown value {other:?}"))),
        };

        let cfg = ExperimentConfig {
            dimension: r.get("dimension")?,
            draws: r.get("draws")?,
            a: r.opt("a")?,
            b: r.opt("b")?,
            a_range: (r.finite("a-min")?, r.finite("a-max")?),
            b_range: (r.finite("b-min")?, r.finite("b-max")?),
            delta: r.finite("delta")?,
            seed: r.get("seed")?,
            xgrid: GridSpec {
                min: r.finite("x-min")?,
                max: r.finite("x-max")?,
                count: r.get("x-count")?,
                scale: r.scale("x-scale")?,
            },
            tgrid: GridSpec {
                min: r.finite("t-min")?,
                max: r.finite("t-max")?,
                count: r.get("t-count")?,
                scale: r.scale("t-scale")?,
            },
            depth: r.get("depth")?,
            n_max: r.get("n-max")?,
            tol: r.finite("tol")?,
            parts,
            combiners,
            tnorm,
            rho,
            codomain,
            samples: r.get("samples")?,
            mu,
            norm,
            tail_sequence,
            tail_starts,
            tail_depth: r.get("tail-depth")?,
            tail_threshold: r.finite("tail-threshold")?,
            output: r.get("output")?,
            out_dir: PathBuf::from(r.str("out-dir").unwrap_or(".")),
            oracle,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), CliError> {
        let positive = [
            ("dimension", self.dimension),
            ("draws", self.draws),
            ("depth", self.depth),
            ("tail-depth", self.tail_depth),
            ("samples", self.samples as usize),
        ];
        for (name, v) in positive {
            if v == 0 {
                return Err(CliError::config(format!("`{name}` must be at least 1")));
            }
        }
        if self.delta < 0.0 {
            return Err(CliError::config("`delta` must be non-negative"));
        }
        if self.tol.is_nan()
            || self.tol <= 0.0
            || self.tail_threshold.is_nan()
            || self.tail_threshold <= 0.0
        {
            return Err(CliError::config("tolerances must be positive"));
        }
        if self.n_max < 2 {
            return Err(CliError::config("`n-max` must be at least 2"));
        }
        for (name, (lo, hi), pinned) in [("a", self.a_range, self.a), ("b", self.b_range, self.b)] {
            if pinned.is_none() && lo >= hi {
                return Err(CliError::config(format!(
                    "`{name}` range [{lo}, {hi}] is degenerate"
                )));
            }
        }
        self.xgrid.validate("x")?;
        self.tgrid.validate("t")?;
        match self.rho {
            PerturbationProfile::StepDefect { c } if c < 0.0 => {
                return Err(CliError::config("`rho-c` must be non-negative"))
            }
            PerturbationProfile::ControlType { theta, p } if theta < 0.0 || p < 0.0 => {
                return Err(CliError::config(
                    "`rho-theta` and `rho-p` must be non-negative",
                ))
            }
            _ => {}
        }
        if self.tail_starts.is_empty() {
            return Err(CliError::config(
                "`tail-starts` must list at least one index",
            ));
        }
        if self.output.is_empty() || self.output.contains(['/', '\\']) {
            return Err(CliError::config("`output` must be a bare file stem"));
        }
        Ok(())
    }

    /// Grid points along a fixed direction; `alt` flips every other
    /// coordinate so paired grids are not collinear in dimension > 1.
    fn points_along(&self, values: &[f64], alt: bool) -> Vec<Vector> {
        let d = self.dimension;
        let unit = 1.0 / (d as f64).sqrt();
        values
            .iter()
            .map(|&v| {
                if d == 1 {
                    Vector::scalar(v)
                } else {
                    Vector::new(
                        (0..d)
                            .map(|j| {
                                if alt && j % 2 == 1 {
                                    -v * unit
                                } else {
                                    v * unit
                                }
                            })
                            .collect(),
                    )
                }
            })
            .collect()
    }

    pub fn xs(&self) -> Vec<Vector> {
        self.points_along(&self.xgrid.points(), false)
    }

    pub fn ys(&self) -> Vec<Vector> {
        self.points_along(&self.xgrid.points(), true)
    }

    pub fn ts(&self) -> Vec<f64> {
        self.tgrid.points()
    }

    pub fn report_path(&self, suffix: &str) -> PathBuf {
        self.out_dir.join(format!("{}.{suffix}.csv", self.output))
    }
}
