use rayon::prelude::*;
use serde::Serialize;

use super::FunctionFamily;
use crate::error::{Error, Result};
use crate::operator::{AveragingOperator, FunctionVec};
use crate::regularity::{delta_grid, inf_ball, sup_ball, PairEntry, PairRange, PairTable};
use crate::space::{IndexSet, MetricMeasureSpace};

/// Largest `|g(x) - g(y)|` over the listed pairs and all `images`.
pub(crate) fn measured_oscillation(images: &[FunctionVec], pairs: &[PairEntry]) -> f64 {
    images
        .par_iter()
        .map(|g| {
            pairs
                .iter()
                .map(|e| (g[e.x] - g[e.y]).abs())
                .fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquicontinuityRow {
    pub epsilon: f64,
    /// Largest grid `delta` meeting both thresholds.
    pub delta: Option<f64>,
    pub symdiff: f64,
    pub symdiff_threshold: f64,
    pub gap_bound: f64,
    pub gap_threshold: f64,
    /// `max |A f(x) - A f(y)|` over the family and pairs in `E` with `d < delta`.
    pub measured_oscillation: Option<f64>,
    pub verified: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquicontinuityReport {
    pub radius: f64,
    /// `c1 = max_f ||f||_inf`
    pub c1: f64,
    /// `c2 = max_x mu(B(x, r))`
    pub c2: f64,
    /// `c3 = min_x mu(B(x, r))`
    pub c3: f64,
    pub rows: Vec<EquicontinuityRow>,
}

/// For a bounded family in `L^inf` and each `epsilon`, the largest grid
/// `delta = r k / grid` with
/// `w_sym(r, delta) < c3 epsilon / (2 c1)` and `w_sym(r, delta) / c3^2 < epsilon / (2 c1 c2)`,
/// which forces `|A_r f(x) - A_r f(y)| < epsilon` whenever `d(x, y) < delta`.
/// The moduli are taken over pairs in `subset`; the sufficient `delta` is then
/// checked against the measured oscillation of the images on those pairs.
pub fn equicontinuity_modulus(
    space: &MetricMeasureSpace,
    r: f64,
    family: &FunctionFamily,
    epsilons: &[f64],
    grid: usize,
    subset: &IndexSet,
) -> Result<EquicontinuityReport> {
    if !family.p().is_infinite() {
        return Err(Error::arg("equicontinuity modulus needs a family in L^inf"));
    }
    if grid == 0 {
        return Err(Error::arg("grid must be positive"));
    }
    if let Some(e) = epsilons.iter().find(|e| !(**e > 0.0)) {
        return Err(Error::arg(format!("epsilon must be positive, got {e}")));
    }
    let op = AveragingOperator::assemble(space, r)?;
    let images = family.images(&op)?;
    let c1 = family.sup_norm();
    let c2 = sup_ball(space, r).value;
    let c3 = inf_ball(space, r).value;
    let table = PairTable::build(space, r, r, Some(subset), PairRange::Open)?;
    let deltas = delta_grid(r, grid, grid);

    let rows = epsilons
        .iter()
        .map(|&epsilon| {
            let symdiff_threshold = c3 * epsilon / (2.0 * c1);
            let gap_threshold = epsilon / (2.0 * c1 * c2);
            let chosen = deltas.iter().rev().copied().find(|&d| {
                let sym = table.symdiff_modulus(d).value;
                sym < symdiff_threshold && sym / (c3 * c3) < gap_threshold
            });
            let probe = chosen.unwrap_or(deltas[0]);
            let symdiff = table.symdiff_modulus(probe).value;
            let measured = chosen.map(|d| measured_oscillation(&images, table.pairs_within(d)));
            EquicontinuityRow {
                epsilon,
                delta: chosen,
                symdiff,
                symdiff_threshold,
                gap_bound: symdiff / (c3 * c3),
                gap_threshold,
                verified: measured.is_some_and(|m| m < epsilon),
                measured_oscillation: measured,
            }
        })
        .collect();
    Ok(EquicontinuityReport { radius: r, c1, c2, c3, rows })
}

/// Grid settings for [`lp_oscillation_modulus`].
#[derive(Debug, Clone, PartialEq)]
pub struct ModulusConfig {
    /// Number of subdivisions of `(0, t]` for `delta`.
    pub grid: usize,
    /// Candidate smoothing scales `sigma`, used only for `p = 1`.
    pub sigma_grid: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LpModulus {
    pub radius: f64,
    pub epsilon: f64,
    pub delta: f64,
    pub sigma: Option<f64>,
    /// `c1 = max_f ||f||_p`
    pub c1: f64,
    /// `c2 = mu(U)`, `U = union of B(x, t) over x in E`
    pub c2: f64,
    /// `c3 = min_{z in E} mu(B(z, t))`
    pub c3: f64,
    /// `c4 = min_{z in U} mu(B(z, sigma))`, `p = 1` only
    pub c4: Option<f64>,
    pub symdiff: f64,
    pub symdiff_threshold: f64,
    pub inverse_gap: f64,
    pub gap_threshold: f64,
    pub measured_oscillation: f64,
    pub verified: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "failure", rename_all = "snake_case")]
pub enum ModulusFailure {
    /// No grid `delta` meets both thresholds; values are at the smallest grid `delta`.
    NoDelta {
        smallest_delta: f64,
        symdiff: f64,
        symdiff_threshold: f64,
        inverse_gap: f64,
        gap_threshold: f64,
        /// `"symdiff"`, `"inverse_gap"` or `"both"`.
        failing: &'static str,
    },
    /// `p = 1`: no `sigma` on the grid has `max_f ||A_sigma f - f||_1 < epsilon c3 / 4`.
    SigmaHypothesis { required: f64, best_deviation: f64, best_sigma: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum ModulusOutcome {
    Found(LpModulus),
    Failed(ModulusFailure),
}

struct SigmaChoice {
    sigma: f64,
    c4: f64,
}

/// For `p = 1`: among grid `sigma` with `max_f ||A_sigma f - f||_1 < epsilon c3 / 4`,
/// the one with the largest `c4`; ties go to the smallest `sigma`.
fn choose_sigma(
    space: &MetricMeasureSpace,
    family: &FunctionFamily,
    union: &IndexSet,
    required: f64,
    sigma_grid: &[f64],
) -> Result<std::result::Result<SigmaChoice, ModulusFailure>> {
    let mut sigmas = sigma_grid.to_vec();
    sigmas.sort_by(f64::total_cmp);
    let mut best: Option<SigmaChoice> = None;
    let mut closest = (f64::INFINITY, f64::NAN);
    for sigma in sigmas {
        let op = AveragingOperator::assemble(space, sigma)?;
        let mut deviation = 0.0f64;
        for f in family.functions() {
            deviation = deviation.max(super::distance(space, &op.apply(f)?, f, family.p()));
        }
        if deviation < closest.0 {
            closest = (deviation, sigma);
        }
        if deviation < required {
            let c4 = union
                .iter()
                .map(|z| op.row(z).ball.mass())
                .fold(f64::INFINITY, f64::min);
            if best.as_ref().map_or(true, |b| c4 > b.c4) {
                best = Some(SigmaChoice { sigma, c4 });
            }
        }
    }
    Ok(best.ok_or(ModulusFailure::SigmaHypothesis {
        required,
        best_deviation: closest.0,
        best_sigma: closest.1,
    }))
}

/// For a bounded family in `L^p`, `1 <= p < inf`, a bounded set `E` and a
/// target `epsilon`: the largest grid `delta = t k / grid` such that the
/// symmetric-difference modulus over pairs of `E` is below
/// `(epsilon c3 / (2 c1))^q` (`p > 1`, `q` the conjugate exponent) or
/// `epsilon c3 c4 / (4 c1)` (`p = 1`), and the inverse-measure gap is below
/// `epsilon / (2 c1 c2^(1/q))`. Together these force
/// `|A_t f(x) - A_t f(y)| < epsilon` for `x, y in E` with `d(x, y) < delta`,
/// which is then checked on the images.
pub fn lp_oscillation_modulus(
    space: &MetricMeasureSpace,
    t: f64,
    family: &FunctionFamily,
    subset: &IndexSet,
    epsilon: f64,
    config: &ModulusConfig,
) -> Result<ModulusOutcome> {
    let p = family.p();
    if p.is_infinite() {
        return Err(Error::arg("oscillation modulus needs a finite exponent"));
    }
    if subset.is_empty() {
        return Err(Error::arg("bounded set E must be nonempty"));
    }
    if !(epsilon > 0.0) {
        return Err(Error::arg(format!("epsilon must be positive, got {epsilon}")));
    }
    if config.grid == 0 {
        return Err(Error::arg("grid must be positive"));
    }
    let op = AveragingOperator::assemble(space, t)?;
    let c1 = family.sup_norm();
    let union = subset
        .iter()
        .fold(IndexSet::new(space, [])?, |acc, x| acc.union(&op.row(x).ball, space));
    let c2 = union.mass();
    let c3 = subset
        .iter()
        .map(|z| op.row(z).ball.mass())
        .fold(f64::INFINITY, f64::min);

    let (sigma, c4, symdiff_threshold) = if p.value() == 1.0 {
        if config.sigma_grid.is_empty() {
            return Err(Error::arg("p = 1 needs a nonempty sigma grid"));
        }
        match choose_sigma(space, family, &union, epsilon * c3 / 4.0, &config.sigma_grid)? {
            Ok(choice) => (Some(choice.sigma), Some(choice.c4), epsilon * c3 * choice.c4 / (4.0 * c1)),
            Err(failure) => return Ok(ModulusOutcome::Failed(failure)),
        }
    } else {
        let q = p.conjugate().value();
        (None, None, (epsilon * c3 / (2.0 * c1)).powf(q))
    };
    let gap_threshold = epsilon / (2.0 * c1 * c2.powf(1.0 - p.reciprocal()));

    let table = PairTable::build(space, t, t, Some(subset), PairRange::Open)?;
    let deltas = delta_grid(t, config.grid, config.grid);
    let chosen = deltas.iter().rev().copied().find(|&d| {
        table.symdiff_modulus(d).value < symdiff_threshold && table.max_inverse_gap(d).value < gap_threshold
    });
    let Some(delta) = chosen else {
        let d = deltas[0];
        let symdiff = table.symdiff_modulus(d).value;
        let inverse_gap = table.max_inverse_gap(d).value;
        let failing = match (symdiff < symdiff_threshold, inverse_gap < gap_threshold) {
            (false, false) => "both",
            (false, true) => "symdiff",
            _ => "inverse_gap",
        };
        return Ok(ModulusOutcome::Failed(ModulusFailure::NoDelta {
            smallest_delta: d,
            symdiff,
            symdiff_threshold,
            inverse_gap,
            gap_threshold,
            failing,
        }));
    };
    let images = family.images(&op)?;
    let measured_oscillation = measured_oscillation(&images, table.pairs_within(delta));
    Ok(ModulusOutcome::Found(LpModulus {
        radius: t,
        epsilon,
        delta,
        sigma,
        c1,
        c2,
        c3,
        c4,
        symdiff: table.symdiff_modulus(delta).value,
        symdiff_threshold,
        inverse_gap: table.max_inverse_gap(delta).value,
        gap_threshold,
        measured_oscillation,
        verified: measured_oscillation < epsilon,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compactness::unit_ball_sample;
    use crate::operator::Exponent;

    fn fine_line(n: usize, h: f64) -> MetricMeasureSpace {
        MetricMeasureSpace::line_grid(n, h, h).unwrap()
    }

    #[test]
    fn equicontinuity_on_a_fine_grid() {
        let s = fine_line(161, 1.0 / 32.0);
        let fam = unit_ball_sample(&s, Exponent::INFINITY, 12, 3).unwrap();
        let rep = equicontinuity_modulus(&s, 1.0, &fam, &[0.5, 1.0, 4.0], 64, &s.all()).unwrap();
        assert_eq!(rep.c1, 1.0);
        for row in &rep.rows {
            let delta = row.delta.expect("thresholds reachable on a fine grid");
            assert!(row.verified, "{row:?}");
            assert!(row.symdiff < row.symdiff_threshold);
            assert!(row.gap_bound < row.gap_threshold);
            assert!(delta > 0.0 && delta <= 1.0);
        }
        // larger epsilon never shrinks delta
        assert!(rep.rows[0].delta <= rep.rows[1].delta && rep.rows[1].delta <= rep.rows[2].delta);
    }

    #[test]
    fn equicontinuity_stops_below_the_spacing() {
        let s = MetricMeasureSpace::unit_grid(10);
        let fam = unit_ball_sample(&s, Exponent::INFINITY, 4, 1).unwrap();
        // a unit-distance pair has mu(B Δ B) = 2 > c3 eps / 2 = 0.75
        let rep = equicontinuity_modulus(&s, 2.0, &fam, &[0.5], 8, &s.all()).unwrap();
        let row = &rep.rows[0];
        assert_eq!(row.delta, Some(1.0));
        assert_eq!(row.measured_oscillation, Some(0.0));
        assert!(equicontinuity_modulus(&s, 2.0, &unit_ball_sample(&s, Exponent::ONE, 2, 1).unwrap(), &[0.5], 8, &s.all())
            .is_err());
    }

    #[test]
    fn lp_modulus_found_and_verified() {
        let s = fine_line(129, 1.0 / 16.0);
        let e = IndexSet::new(&s, 0..64).unwrap();
        let cfg = ModulusConfig {
            grid: 64,
            sigma_grid: vec![1.0 / 32.0, 1.0 / 16.0, 0.125],
        };
        for p in [Exponent::TWO, Exponent::new(1.5).unwrap()] {
            let fam = unit_ball_sample(&s, p, 10, 8).unwrap();
            match lp_oscillation_modulus(&s, 1.0, &fam, &e, 2.0, &cfg).unwrap() {
                ModulusOutcome::Found(m) => {
                    assert!(m.verified, "{m:?}");
                    assert!(m.symdiff < m.symdiff_threshold && m.inverse_gap < m.gap_threshold);
                    assert!(m.sigma.is_none());
                }
                other => panic!("{other:?}"),
            }
        }
    }

    #[test]
    fn lp_modulus_p1_uses_sigma() {
        // With sigma below the spacing, A_sigma is the identity and the hypothesis holds trivially.
        let s = fine_line(65, 1.0 / 16.0);
        let e = IndexSet::new(&s, 16..48).unwrap();
        let fam = unit_ball_sample(&s, Exponent::ONE, 8, 2).unwrap();
        let cfg = ModulusConfig {
            grid: 32,
            sigma_grid: vec![0.5, 1.0 / 64.0],
        };
        match lp_oscillation_modulus(&s, 1.0, &fam, &e, 1.0, &cfg).unwrap() {
            ModulusOutcome::Found(m) => {
                assert_eq!(m.sigma, Some(1.0 / 64.0));
                assert_eq!(m.c4, Some(1.0 / 16.0));
                assert!(m.verified);
            }
            other => panic!("{other:?}"),
        }
        let cfg = ModulusConfig {
            grid: 32,
            sigma_grid: vec![0.5],
        };
        match lp_oscillation_modulus(&s, 1.0, &fam, &e, 1.0, &cfg).unwrap() {
            ModulusOutcome::Failed(ModulusFailure::SigmaHypothesis { best_sigma, .. }) => assert_eq!(best_sigma, 0.5),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn lp_modulus_reports_failing_threshold() {
        let s = MetricMeasureSpace::unit_grid(6);
        let fam = unit_ball_sample(&s, Exponent::TWO, 4, 2).unwrap();
        let cfg = ModulusConfig {
            grid: 2,
            sigma_grid: vec![],
        };
        // grid deltas 1.5 and 3 both admit unit-distance pairs
        match lp_oscillation_modulus(&s, 3.0, &fam, &s.all(), 0.01, &cfg).unwrap() {
            ModulusOutcome::Failed(ModulusFailure::NoDelta { failing, smallest_delta, .. }) => {
                assert_eq!(smallest_delta, 1.5);
                assert_eq!(failing, "both");
            }
            other => panic!("{other:?}"),
        }
    }
}
