//! Randomized battery of the inequalities the compactness arguments rest on.
//!
//! Each trial draws a radius `r`, a function `f`, points `x`, `y` and a
//! `delta in (0, r)`, then checks:
//!
//! * `oscillation`: `|A f(x) - A f(y)|` against the two-term bound
//! * `containment`: `mu(B(x,r) Δ B(y,r)) <= mu(ann(x)) + mu(ann(y))` when `d(x,y) < delta`
//! * `inverse_gap`: `|1/mu(B(x,r)) - 1/mu(B(y,r))| <= mu(B(x,r) Δ B(y,r)) / a^2`
//! * `sup_contraction`: `||A f||_inf <= ||f||_inf`
//! * `l1_doubling`: `||A f||_1 <= gamma(r) ||f||_1`
//! * `holder`: `sum mu |f g| <= ||f||_p ||g||_q`
//!
//! and, once per radius, the composite bound `||A_s A_r f - A_r f||_1 <= epsilon`
//! for every grid `s` meeting its thresholds. A violation beyond
//! [`RELATIVE_TOL`] is reported with its witness.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::compactness::{composite_bound_check, unit_ball_sample};
use crate::error::{Error, Result};
use crate::operator::{norm_p, oscillation_bound, pairing, AveragingOperator, Exponent, FunctionVec};
use crate::regularity::{doubling_constant, inf_ball};
use crate::space::MetricMeasureSpace;

pub const RELATIVE_TOL: f64 = 1e-10;

/// Replaces `op.apply` in the battery; used to inject faults.
pub type ApplyHook<'a> = &'a (dyn Fn(&AveragingOperator, &FunctionVec) -> Result<FunctionVec> + Sync);

#[derive(Debug, Clone, PartialEq)]
pub struct BatteryConfig {
    pub seed: u64,
    pub trials: usize,
    /// Number of distinct radii drawn per run.
    pub radii: usize,
    /// Radii that also get the composite-bound check.
    pub composite_radii: usize,
    pub composite_epsilon: f64,
    pub composite_grid: usize,
    pub composite_family: usize,
}

impl Default for BatteryConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            trials: 1000,
            radii: 8,
            composite_radii: 2,
            composite_epsilon: 0.5,
            composite_grid: 16,
            composite_family: 6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckSummary {
    pub name: &'static str,
    pub evaluated: usize,
    pub violations: usize,
    /// Largest `lhs - rhs` seen; negative when every instance had slack.
    pub max_excess: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub check: &'static str,
    pub trial: usize,
    pub r: f64,
    pub delta: Option<f64>,
    pub x: Option<usize>,
    pub y: Option<usize>,
    /// The function values of the trial (empty for checks on a fixed family).
    pub f: Vec<f64>,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompositeSummary {
    pub r: f64,
    pub qualifying: usize,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BatteryReport {
    pub seed: u64,
    pub trials: usize,
    pub radii: Vec<f64>,
    pub checks: Vec<CheckSummary>,
    pub composite: Vec<CompositeSummary>,
    pub first_violation: Option<Violation>,
    pub pass: bool,
}

struct Tally {
    checks: Vec<CheckSummary>,
    first_violation: Option<Violation>,
}

impl Tally {
    fn new(names: &[&'static str]) -> Self {
        Self {
            checks: names
                .iter()
                .map(|&name| CheckSummary {
                    name,
                    evaluated: 0,
                    violations: 0,
                    max_excess: None,
                })
                .collect(),
            first_violation: None,
        }
    }

    fn record(&mut self, lhs: f64, rhs: f64, witness: impl FnOnce() -> Violation, check: &'static str) {
        let summary = self
            .checks
            .iter_mut()
            .find(|c| c.name == check)
            .expect("registered check");
        summary.evaluated += 1;
        let excess = lhs - rhs;
        summary.max_excess = Some(summary.max_excess.map_or(excess, |m| m.max(excess)));
        if !(lhs <= rhs + RELATIVE_TOL * rhs.abs().max(1.0)) {
            summary.violations += 1;
            if self.first_violation.is_none() {
                self.first_violation = Some(witness());
            }
        }
    }
}

struct Scale {
    r: f64,
    op: AveragingOperator,
    gamma: f64,
    inf_ball: f64,
}

fn draw_radius(rng: &mut ChaCha8Rng, diameter: f64) -> f64 {
    if diameter > 0.0 {
        rng.gen_range(0.05..=1.1) * diameter
    } else {
        rng.gen_range(0.5..=1.5)
    }
}

fn draw_function(rng: &mut ChaCha8Rng, n: usize) -> FunctionVec {
    let scale = 10f64.powf(rng.gen_range(-2.0..=2.0));
    let sparse = rng.gen_bool(0.3);
    let v = (0..n)
        .map(|_| {
            if sparse && rng.gen_bool(0.7) {
                0.0
            } else {
                scale * rng.gen_range(-1.0..=1.0)
            }
        })
        .collect();
    FunctionVec::new(v).expect("finite draws")
}

/// Runs the battery with the library's own operator application.
pub fn verify_bounds(space: &MetricMeasureSpace, config: &BatteryConfig) -> Result<BatteryReport> {
    verify_bounds_with(space, config, &|op: &AveragingOperator, f: &FunctionVec| op.apply(f))
}

pub fn verify_bounds_with(space: &MetricMeasureSpace, config: &BatteryConfig, apply: ApplyHook<'_>) -> Result<BatteryReport> {
    if config.radii == 0 {
        return Err(Error::arg("battery needs at least one radius"));
    }
    let n = space.len();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let diameter = space.diameter();
    let scales = (0..config.radii)
        .map(|_| {
            let r = draw_radius(&mut rng, diameter);
            Ok(Scale {
                r,
                op: AveragingOperator::assemble(space, r)?,
                gamma: doubling_constant(space, r)?.gamma,
                inf_ball: inf_ball(space, r).value,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut tally = Tally::new(&[
        "oscillation",
        "containment",
        "inverse_gap",
        "sup_contraction",
        "l1_doubling",
        "holder",
        "composite",
    ]);

    for trial in 0..config.trials {
        let scale = &scales[rng.gen_range(0..scales.len())];
        let (r, op) = (scale.r, &scale.op);
        let f = draw_function(&mut rng, n);
        let x = rng.gen_range(0..n);
        let y = rng.gen_range(0..n);
        let delta = r * rng.gen_range(0.01..0.99);
        let af = apply(op, &f)?;
        let fv = &f;
        let witness = |check, delta, xy: Option<(usize, usize)>, lhs, rhs| {
            move || Violation {
                check,
                trial,
                r,
                delta,
                x: xy.map(|p| p.0),
                y: xy.map(|p| p.1),
                f: fv.values().to_vec(),
                lhs,
                rhs,
            }
        };

        let osc = oscillation_bound(space, op, &f, x, y)?;
        let actual = (af[x] - af[y]).abs();
        tally.record(actual, osc.bound, witness("oscillation", None, Some((x, y)), actual, osc.bound), "oscillation");

        let (bx, by) = (&op.row(x).ball, &op.row(y).ball);
        let symdiff = bx.sym_difference_mass(by, space.weights());
        if space.dist(x, y) < delta {
            let annuli = space.annulus(x, r, delta)?.mass() + space.annulus(y, r, delta)?.mass();
            tally.record(
                symdiff,
                annuli,
                witness("containment", Some(delta), Some((x, y)), symdiff, annuli),
                "containment",
            );
        }

        let gap = (1.0 / bx.mass() - 1.0 / by.mass()).abs();
        let gap_bound = symdiff / (scale.inf_ball * scale.inf_ball);
        tally.record(gap, gap_bound, witness("inverse_gap", None, Some((x, y)), gap, gap_bound), "inverse_gap");

        let (sup_af, sup_f) = (norm_p(space, &af, Exponent::INFINITY)?, norm_p(space, &f, Exponent::INFINITY)?);
        tally.record(sup_af, sup_f, witness("sup_contraction", None, None, sup_af, sup_f), "sup_contraction");

        let (l1_af, l1_f) = (norm_p(space, &af, Exponent::ONE)?, norm_p(space, &f, Exponent::ONE)?);
        let l1_rhs = scale.gamma * l1_f;
        tally.record(l1_af, l1_rhs, witness("l1_doubling", None, None, l1_af, l1_rhs), "l1_doubling");

        let p = Exponent::new(rng.gen_range(1.0..6.0))?;
        let g = draw_function(&mut rng, n);
        let lhs = pairing(space, &f, &g)?;
        let rhs = norm_p(space, &f, p)? * norm_p(space, &g, p.conjugate())?;
        tally.record(lhs, rhs, witness("holder", None, None, lhs, rhs), "holder");
    }

    let mut composite = Vec::new();
    for (k, scale) in scales.iter().take(config.composite_radii).enumerate() {
        let family = unit_ball_sample(space, Exponent::ONE, config.composite_family, config.seed.wrapping_add(k as u64))?;
        let report = composite_bound_check(space, scale.r, &family, config.composite_epsilon, config.composite_grid)?;
        for row in report.rows.iter().filter(|row| row.meets_thresholds) {
            let r = scale.r;
            tally.record(
                row.max_deviation,
                report.epsilon,
                || Violation {
                    check: "composite",
                    trial: k,
                    r,
                    delta: Some(row.s),
                    x: None,
                    y: None,
                    f: Vec::new(),
                    lhs: row.max_deviation,
                    rhs: report.epsilon,
                },
                "composite",
            );
        }
        composite.push(CompositeSummary {
            r: scale.r,
            qualifying: report.qualifying,
            holds: report.holds,
        });
    }

    let pass = tally.first_violation.is_none();
    Ok(BatteryReport {
        seed: config.seed,
        trials: config.trials,
        radii: scales.iter().map(|s| s.r).collect(),
        checks: tally.checks,
        composite,
        first_violation: tally.first_violation,
        pass,
    })
}
