use rayon::prelude::*;
use serde::Serialize;

use super::FunctionFamily;
use crate::error::{Error, Result};
use crate::operator::{AveragingOperator, Exponent};
use crate::regularity::{delta_grid, inf_ball, star_modulus, PairRange, PairTable};
use crate::space::{BallIndex, MetricMeasureSpace};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompositeRow {
    pub s: f64,
    /// `w_star(r, s)`
    pub star_modulus: f64,
    /// `w_sym(r, s) / c3^2` over pairs with `d(x, y) <= s`
    pub gap_bound: f64,
    pub meets_thresholds: bool,
    /// `max_f ||A_s A_r f - A_r f||_1`
    pub max_deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompositeBoundReport {
    pub r: f64,
    pub epsilon: f64,
    /// `c1 = max_f ||f||_1`
    pub c1: f64,
    /// `c2 = mu(X)`
    pub c2: f64,
    /// `c3 = min_x mu(B(x, r))`
    pub c3: f64,
    pub star_threshold: f64,
    pub gap_threshold: f64,
    pub rows: Vec<CompositeRow>,
    pub qualifying: usize,
    /// Every qualifying `s` has `max_deviation <= epsilon`.
    pub holds: bool,
}

/// For an `L^1` family: over the grid `s = r k / grid`, `k = 1..grid-1`, find
/// the `s` with `w_star(r, s) < epsilon c3 / (2 c1)` and
/// `w_sym(r, s) / c3^2 < epsilon / (2 c1 c2)`, and check that each of them
/// keeps `||A_s A_r f - A_r f||_1 <= epsilon` on the family. The deviation is
/// reported for every grid `s`.
pub fn composite_bound_check(
    space: &MetricMeasureSpace,
    r: f64,
    family: &FunctionFamily,
    epsilon: f64,
    grid: usize,
) -> Result<CompositeBoundReport> {
    if family.p() != Exponent::ONE {
        return Err(Error::arg("composite bound needs a family in L^1"));
    }
    if grid < 2 {
        return Err(Error::arg("grid must be at least 2"));
    }
    if !(epsilon > 0.0) {
        return Err(Error::arg(format!("epsilon must be positive, got {epsilon}")));
    }
    let index = BallIndex::new(space);
    let op_r = AveragingOperator::assemble(space, r)?;
    let images = family.images(&op_r)?;
    let c1 = family.sup_norm();
    let c2 = space.total_mass();
    let c3 = inf_ball(&index, r).value;
    let star_threshold = epsilon * c3 / (2.0 * c1);
    let gap_threshold = epsilon / (2.0 * c1 * c2);
    let grid_s = delta_grid(r, grid, grid - 1);
    let table = PairTable::build(space, r, *grid_s.last().expect("grid >= 2"), None, PairRange::Closed)?;

    let rows = grid_s
        .iter()
        .map(|&s| {
            let star = star_modulus(&index, r, s)?.value;
            let gap_bound = table.symdiff_modulus(s).value / (c3 * c3);
            let op_s = AveragingOperator::assemble(space, s)?;
            let max_deviation = images
                .par_iter()
                .map(|g| op_s.apply(g).map(|h| super::distance(space, &h, g, Exponent::ONE)))
                .collect::<Result<Vec<f64>>>()?
                .into_iter()
                .fold(0.0, f64::max);
            Ok(CompositeRow {
                s,
                star_modulus: star,
                gap_bound,
                meets_thresholds: star < star_threshold && gap_bound < gap_threshold,
                max_deviation,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let qualifying = rows.iter().filter(|row| row.meets_thresholds).count();
    let holds = rows
        .iter()
        .filter(|row| row.meets_thresholds)
        .all(|row| row.max_deviation <= epsilon);
    Ok(CompositeBoundReport {
        r,
        epsilon,
        c1,
        c2,
        c3,
        star_threshold,
        gap_threshold,
        rows,
        qualifying,
        holds,
    })
}
