//! Grid verification of the three stability bounds.

use rayon::prelude::*;
use serde::Serialize;

use super::bounds::{
    bound_rhs_combined, bound_rhs_quadratic, bound_rhs_quartic, dilation_fold, BoundSchedule,
};
use super::direct::{q1_limit, q2_limit, HyersError, HyersTrace, FLOOR_ULPS};
use super::{Codomain, Combiner, PerturbationProfile};
use crate::distributions::default_grid;
use crate::funceq::{part_g, part_h, residual_qq, RealMap, TestFunction, Tracked};
use crate::tnorms::TNorm;
use crate::vector::Vector;

/// A cell passes when `lhs ≥ rhs − LHS_SLACK`.
pub const LHS_SLACK: f64 = 1e-9;

/// A condition proxy is met once its value reaches this level.
pub const CONDITION_LEVEL: f64 = 1.0 - 1e-6;

const HYPOTHESIS_SLACK: f64 = 1e-12;

/// Sum of the absolute coefficients of the mixed residual.
const RESIDUAL_WEIGHT: f64 = 26.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TheoremKind {
    Quadratic,
    Quartic,
    Combined,
}

impl TheoremKind {
    pub const ALL: [TheoremKind; 3] = [
        TheoremKind::Quadratic,
        TheoremKind::Quartic,
        TheoremKind::Combined,
    ];

    pub fn id(self) -> &'static str {
        match self {
            TheoremKind::Quadratic => "quadratic",
            TheoremKind::Quartic => "quartic",
            TheoremKind::Combined => "combined",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyConfig {
    pub depth: usize,
    pub n_max: u32,
    pub tol: f64,
    pub tnorm: TNorm,
    pub combiner: Combiner,
    /// `None` picks the profile's natural codomain.
    pub codomain: Option<Codomain>,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            depth: 50,
            n_max: 20,
            tol: 1e-9,
            tnorm: TNorm::Minimum,
            combiner: Combiner::TNormFold,
            codomain: None,
        }
    }
}

impl VerifyConfig {
    pub fn codomain_for(&self, rho: &PerturbationProfile) -> Codomain {
        self.codomain.unwrap_or_else(|| rho.natural_codomain())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HypothesisWitness {
    pub x: Vector,
    pub y: Vector,
    pub t: f64,
    /// Residual magnitude net of its rounding floor.
    pub defect: f64,
    pub mu: f64,
    pub rho: f64,
}

/// Grid-sampled check that `μ_{D(x,y)}(t) ≥ ρ_{x,y}(t)` for the mixed
/// residual `D`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HypothesisCheck {
    pub holds: bool,
    pub pairs: usize,
    pub t_points: usize,
    pub violations: usize,
    /// The violation with the largest `ρ − μ`.
    pub worst: Option<HypothesisWitness>,
}

/// Stencil pairs: the full grid product plus `(x,x)`, `(x,2x)` and `(0,x)`,
/// the pairs the ψ-aggregate evaluates.
fn hypothesis_pairs(xgrid: &[Vector]) -> Vec<(Vector, Vector)> {
    let mut pairs = Vec::new();
    for x in xgrid {
        for y in xgrid {
            pairs.push((x.clone(), y.clone()));
        }
    }
    for x in xgrid {
        pairs.push((x.clone(), x.clone()));
        pairs.push((x.clone(), x.dilate(1)));
        pairs.push((Vector::zeros(x.dim()), x.clone()));
    }
    pairs
}

pub fn check_hypothesis<M: RealMap + ?Sized + Sync>(
    f: &M,
    rho: &PerturbationProfile,
    xgrid: &[Vector],
    tgrid: &[f64],
    codomain: Codomain,
) -> HypothesisCheck {
    let mut ts: Vec<f64> = tgrid.iter().copied().chain(default_grid()).collect();
    ts.sort_by(f64::total_cmp);
    ts.dedup();
    let pairs = hypothesis_pairs(xgrid);
    let per_pair: Vec<(usize, Option<HypothesisWitness>)> = pairs
        .par_iter()
        .map(|(x, y)| {
            let tracked = Tracked::new(f);
            let r = residual_qq(&tracked, x, y);
            let floor = FLOOR_ULPS * f64::EPSILON * RESIDUAL_WEIGHT * tracked.max_abs();
            let defect = (r.abs() - floor).max(0.0);
            let mut count = 0;
            let mut worst: Option<HypothesisWitness> = None;
            for &t in &ts {
                let mu = codomain.mu(defect, t);
                let bound = rho.eval(x, y, t);
                if mu < bound - HYPOTHESIS_SLACK {
                    count += 1;
                    if worst.as_ref().is_none_or(|w| bound - mu > w.rho - w.mu) {
                        worst = Some(HypothesisWitness {
                            x: x.clone(),
                            y: y.clone(),
                            t,
                            defect,
                            mu,
                            rho: bound,
                        });
                    }
                }
            }
            (count, worst)
        })
        .collect();
    let violations = per_pair.iter().map(|p| p.0).sum();
    let worst = per_pair.into_iter().filter_map(|p| p.1).reduce(|a, b| {
        if b.rho - b.mu > a.rho - a.mu {
            b
        } else {
            a
        }
    });
    HypothesisCheck {
        holds: violations == 0,
        pairs: pairs.len(),
        t_points: ts.len(),
        violations,
        worst,
    }
}

/// Finite-depth proxy for a limit condition at one `(x, t)`: the first
/// shift `n ≤ n_max` at which the quantity reaches [`CONDITION_LEVEL`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionProxy {
    pub condition: &'static str,
    pub x: Vector,
    pub t: f64,
    pub first_n: Option<u32>,
    pub n_max: u32,
    pub depth: usize,
}

/// Shifted tail folds `T_{i≥1}` of the bound terms at `2ⁿx`.
fn tail_proxy(
    name: &'static str,
    schedule: &BoundSchedule,
    rho: &PerturbationProfile,
    x: &Vector,
    t: f64,
    cfg: &VerifyConfig,
) -> ConditionProxy {
    let first_n = (0..=cfg.n_max).find(|&n| {
        dilation_fold(schedule, rho, x, t, cfg.depth, n, cfg.combiner, cfg.tnorm).value
            >= CONDITION_LEVEL
    });
    ConditionProxy {
        condition: name,
        x: x.clone(),
        t,
        first_n,
        n_max: cfg.n_max,
        depth: cfg.depth,
    }
}

/// `ρ_{2ⁿx, 2ⁿy}(kⁿt)` for every grid `y`; reports the slowest `y`.
fn decay_proxy(
    name: &'static str,
    base: f64,
    rho: &PerturbationProfile,
    x: &Vector,
    t: f64,
    xgrid: &[Vector],
    cfg: &VerifyConfig,
) -> ConditionProxy {
    let mut first_n = Some(0);
    for y in xgrid {
        let hit = (0..=cfg.n_max).find(|&n| {
            rho.eval(&x.dilate(n), &y.dilate(n), base.powi(n as i32) * t) >= CONDITION_LEVEL
        });
        first_n = match (first_n, hit) {
            (Some(a), Some(b)) => Some(a.max(b)),
            _ => None,
        };
    }
    ConditionProxy {
        condition: name,
        x: x.clone(),
        t,
        first_n,
        n_max: cfg.n_max,
        depth: cfg.depth,
    }
}

/// One line record of a verified grid cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub theorem: &'static str,
    pub x: String,
    pub t: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub combiner: &'static str,
    pub depth: usize,
    pub truncation_decrement: f64,
    pub pass: bool,
}

/// `f(x) = Q₁(x) + Q₂(x)` on the grid for unperturbed maps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Reconstruction {
    pub max_error: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TheoremReport {
    pub theorem: TheoremKind,
    pub codomain: Codomain,
    pub hypothesis: HypothesisCheck,
    pub conditions: Vec<ConditionProxy>,
    pub cells: Vec<BoundReport>,
    /// `(quadratic, quartic)` traces per grid point.
    pub traces: Vec<(HyersTrace, HyersTrace)>,
    pub truncated: bool,
    pub reconstruction: Option<Reconstruction>,
}

impl TheoremReport {
    pub fn cells_pass(&self) -> bool {
        self.cells.iter().all(|c| c.pass) && self.reconstruction.is_none_or(|r| r.holds)
    }

    pub fn passed(&self) -> bool {
        self.hypothesis.holds && self.cells_pass()
    }
}

fn verify(
    kind: TheoremKind,
    f: &TestFunction,
    rho: &PerturbationProfile,
    xgrid: &[Vector],
    tgrid: &[f64],
    cfg: &VerifyConfig,
) -> Result<TheoremReport, HyersError> {
    let codomain = cfg.codomain_for(rho);
    let hypothesis = check_hypothesis(f, rho, xgrid, tgrid, codomain);
    let g = part_g(f);
    let h = part_h(f);

    let traces: Vec<(HyersTrace, HyersTrace)> = xgrid
        .par_iter()
        .map(|x| {
            Ok((
                q1_limit(&g, x, cfg.n_max, cfg.tol)?,
                q2_limit(&h, x, cfg.n_max, cfg.tol)?,
            ))
        })
        .collect::<Result<_, HyersError>>()?;
    let truncated = traces.iter().any(|(a, b)| a.truncated || b.truncated);

    let mut cells = Vec::with_capacity(xgrid.len() * tgrid.len());
    let mut conditions = Vec::new();
    for (x, (tq1, tq2)) in xgrid.iter().zip(&traces) {
        let residual = match kind {
            TheoremKind::Quadratic => g.eval(x) - tq1.value,
            TheoremKind::Quartic => h.eval(x) - tq2.value,
            TheoremKind::Combined => f.eval(x) - (-tq1.value / 12.0) - tq2.value / 12.0,
        };
        for &t in tgrid {
            let bound = match kind {
                TheoremKind::Quadratic => {
                    bound_rhs_quadratic(rho, x, t, cfg.depth, cfg.combiner, cfg.tnorm)
                }
                TheoremKind::Quartic => {
                    bound_rhs_quartic(rho, x, t, cfg.depth, cfg.combiner, cfg.tnorm)
                }
                TheoremKind::Combined => {
                    bound_rhs_combined(rho, x, t, cfg.depth, cfg.combiner, cfg.tnorm)
                }
            };
            let lhs = codomain.mu(residual, t);
            cells.push(BoundReport {
                theorem: kind.id(),
                x: x.to_string(),
                t,
                lhs,
                rhs: bound.value,
                combiner: cfg.combiner.name(),
                depth: cfg.depth,
                truncation_decrement: bound.last_decrement,
                pass: lhs >= bound.value - LHS_SLACK,
            });
            if matches!(kind, TheoremKind::Quadratic | TheoremKind::Combined) {
                conditions.push(tail_proxy(
                    "quadratic_tail",
                    &BoundSchedule::QUADRATIC,
                    rho,
                    x,
                    t,
                    cfg,
                ));
                conditions.push(decay_proxy(
                    "quadratic_defect_decay",
                    4.0,
                    rho,
                    x,
                    t,
                    xgrid,
                    cfg,
                ));
            }
            if matches!(kind, TheoremKind::Quartic | TheoremKind::Combined) {
                conditions.push(tail_proxy(
                    "quartic_tail",
                    &BoundSchedule::QUARTIC,
                    rho,
                    x,
                    t,
                    cfg,
                ));
                conditions.push(decay_proxy(
                    "quartic_defect_decay",
                    16.0,
                    rho,
                    x,
                    t,
                    xgrid,
                    cfg,
                ));
            }
        }
    }

    let reconstruction = (kind == TheoremKind::Combined && f.delta == 0.0).then(|| {
        let max_error = xgrid
            .iter()
            .zip(&traces)
            .map(|(x, (tq1, tq2))| {
                let scale = g.magnitude(x).max(h.magnitude(x)).max(1.0);
                ((-tq1.value / 12.0 + tq2.value / 12.0) - f.eval(x)).abs() / scale
            })
            .fold(0.0, f64::max);
        Reconstruction {
            max_error,
            holds: max_error <= 1e-12,
        }
    });

    Ok(TheoremReport {
        theorem: kind,
        codomain,
        hypothesis,
        conditions,
        cells,
        traces,
        truncated,
        reconstruction,
    })
}

/// `μ_{g(x) − Q₁(x)}(t)` against the quadratic bound on every grid cell.
pub fn verify_quadratic_bound(
    f: &TestFunction,
    rho: &PerturbationProfile,
    xgrid: &[Vector],
    tgrid: &[f64],
    cfg: &VerifyConfig,
) -> Result<TheoremReport, HyersError> {
    verify(TheoremKind::Quadratic, f, rho, xgrid, tgrid, cfg)
}

/// `μ_{h(x) − Q₂(x)}(t)` against the quartic bound on every grid cell.
pub fn verify_quartic_bound(
    f: &TestFunction,
    rho: &PerturbationProfile,
    xgrid: &[Vector],
    tgrid: &[f64],
    cfg: &VerifyConfig,
) -> Result<TheoremReport, HyersError> {
    verify(TheoremKind::Quartic, f, rho, xgrid, tgrid, cfg)
}

/// `μ_{f(x) − Q₁(x) − Q₂(x)}(t)` against the combined bound, with
/// `Q₁ = −lim g(2ⁿx)/(12·4ⁿ)` and `Q₂ = lim h(2ⁿx)/(12·16ⁿ)`.
pub fn verify_combined_bound(
    f: &TestFunction,
    rho: &PerturbationProfile,
    xgrid: &[Vector],
    tgrid: &[f64],
    cfg: &VerifyConfig,
) -> Result<TheoremReport, HyersError> {
    verify(TheoremKind::Combined, f, rho, xgrid, tgrid, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::log_grid;

    fn xgrid() -> Vec<Vector> {
        [-2.0, -0.5, 0.75, 1.0, 2.5]
            .into_iter()
            .map(Vector::scalar)
            .collect()
    }

    fn tgrid() -> Vec<f64> {
        log_grid(1e-2, 1e2, 5)
    }

    type Verify = fn(
        &TestFunction,
        &PerturbationProfile,
        &[Vector],
        &[f64],
        &VerifyConfig,
    ) -> Result<TheoremReport, HyersError>;
    const ALL: [Verify; 3] = [
        verify_quadratic_bound,
        verify_quartic_bound,
        verify_combined_bound,
    ];

    #[test]
    fn dominated_perturbation_passes_every_bound() {
        let delta = 0.01;
        let f = TestFunction::exact(1.5, -2.0).with_noise(delta, 3);
        let rho = PerturbationProfile::StepDefect { c: 40.0 * delta };
        for verify in ALL {
            let rep = verify(&f, &rho, &xgrid(), &tgrid(), &VerifyConfig::default()).unwrap();
            assert!(rep.hypothesis.holds, "{:?}", rep.hypothesis.worst);
            assert_eq!(rep.cells.len(), 25);
            assert!(rep.passed(), "{:?}", rep.cells.iter().find(|c| !c.pass));
            assert!(!rep.truncated);
        }
    }

    #[test]
    fn under_scaled_profile_fails_the_hypothesis() {
        let f = TestFunction::exact(1.5, -2.0).with_noise(0.01, 3);
        let rho = PerturbationProfile::StepDefect { c: 1e-6 };
        for verify in ALL {
            let rep = verify(&f, &rho, &xgrid(), &tgrid(), &VerifyConfig::default()).unwrap();
            assert!(!rep.hypothesis.holds);
            let w = rep.hypothesis.worst.unwrap();
            assert!(w.defect > 1e-6);
            assert_eq!(w.rho, 1.0);
        }
    }

    #[test]
    fn exact_solutions_pass_with_any_profile() {
        let f = TestFunction::exact(-3.0, 7.0);
        for rho in [
            PerturbationProfile::eps0(),
            PerturbationProfile::StepDefect { c: 0.4 },
            PerturbationProfile::ControlType { theta: 0.5, p: 1.0 },
        ] {
            for verify in ALL {
                let rep = verify(&f, &rho, &xgrid(), &tgrid(), &VerifyConfig::default()).unwrap();
                assert!(
                    rep.passed(),
                    "{rho}: {:?} {:?}",
                    rep.hypothesis.worst,
                    rep.cells.iter().find(|c| !c.pass)
                );
            }
        }
        let rep = verify_combined_bound(
            &f,
            &PerturbationProfile::eps0(),
            &xgrid(),
            &tgrid(),
            &VerifyConfig::default(),
        )
        .unwrap();
        assert!(rep.reconstruction.unwrap().holds);
    }

    #[test]
    fn maximal_profile_detects_any_perturbation() {
        let f = TestFunction::exact(1.0, 1.0).with_noise(0.01, 8);
        let rho = PerturbationProfile::eps0();
        let rep =
            verify_quadratic_bound(&f, &rho, &xgrid(), &tgrid(), &VerifyConfig::default()).unwrap();
        assert!(!rep.hypothesis.holds);
        assert!(rep.cells.iter().all(|c| c.rhs == 1.0));
        assert!(rep.cells.iter().any(|c| !c.pass));
    }

    #[test]
    fn condition_proxies_are_met_for_step_profiles() {
        let f = TestFunction::exact(1.0, 1.0).with_noise(0.01, 8);
        let rho = PerturbationProfile::StepDefect { c: 0.4 };
        let rep =
            verify_combined_bound(&f, &rho, &xgrid(), &tgrid(), &VerifyConfig::default()).unwrap();
        assert_eq!(rep.conditions.len(), 25 * 4);
        assert!(rep.conditions.iter().all(|c| c.first_n.is_some()));
    }

    #[test]
    fn supercritical_growth_never_meets_the_quadratic_condition() {
        let f = TestFunction::exact(1.0, 0.0);
        let rho = PerturbationProfile::ControlType { theta: 1.0, p: 3.0 };
        let cfg = VerifyConfig {
            n_max: 10,
            ..VerifyConfig::default()
        };
        let rep = verify_quadratic_bound(&f, &rho, &xgrid(), &[1.0], &cfg).unwrap();
        assert!(rep
            .conditions
            .iter()
            .filter(|c| c.condition == "quadratic_defect_decay")
            .all(|c| c.first_n.is_none()));
    }
}
