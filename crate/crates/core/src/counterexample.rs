//! Separated witness families: indicators of `2s`-balls around a `4s`-separated
//! packing, whose images under `A_s` stay uniformly apart. On a space of large
//! diameter there are many such witnesses, so the image of a bounded set cannot
//! be totally bounded.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::compactness::covering_number;
use crate::error::{Error, Result};
use crate::operator::{weighted_norm, AveragingOperator, Exponent, FunctionVec};
use crate::regularity::doubling_constant;
use crate::space::MetricMeasureSpace;

/// Tolerance for [`verify_separation`].
pub const SEPARATION_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum WitnessMode {
    /// `f_n = chi_{B(x_n, 2s)} / mu(B(x_n, 2s))`, separated in `L^1`
    L1,
    /// `f_n = chi_{B(x_n, 2s)}`, separated in `L^inf`
    Linf,
}

impl WitnessMode {
    pub fn exponent(self) -> Exponent {
        match self {
            WitnessMode::L1 => Exponent::ONE,
            WitnessMode::Linf => Exponent::INFINITY,
        }
    }
}

impl FromStr for WitnessMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "l1" => Ok(WitnessMode::L1),
            "linf" => Ok(WitnessMode::Linf),
            other => Err(Error::arg(format!("mode must be l1 or linf, got {other:?}"))),
        }
    }
}

impl fmt::Display for WitnessMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WitnessMode::L1 => "l1",
            WitnessMode::Linf => "linf",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WitnessFamily {
    pub s: f64,
    pub mode: WitnessMode,
    /// Greedy packing with pairwise distances `> 4s`.
    pub centers: Vec<usize>,
    #[serde(skip)]
    pub witnesses: Vec<FunctionVec>,
    #[serde(skip)]
    pub images: Vec<FunctionVec>,
    /// `c = min_x mu(B(x,s)) / mu(B(x,2s))`; the `L^1` separation bound.
    pub c_bound: f64,
    /// `gamma(s)`, which bounds `||A_s||_{1->1}`.
    pub gamma: f64,
    /// Largest `||A_s f_n||_p` in the mode's norm.
    pub max_image_norm: f64,
    /// `||A_s f_n - A_s f_m||` in the mode's norm.
    pub separation_matrix: Vec<Vec<f64>>,
}

impl WitnessFamily {
    /// `c_bound` in `L^1` mode, `1` in `L^inf` mode.
    pub fn bound(&self) -> f64 {
        match self.mode {
            WitnessMode::L1 => self.c_bound,
            WitnessMode::Linf => 1.0,
        }
    }

    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }
}

fn norm(space: &MetricMeasureSpace, f: &FunctionVec, p: Exponent) -> f64 {
    weighted_norm(space.weights(), f.values(), 0..f.len(), p)
}

fn witnesses(space: &MetricMeasureSpace, s: f64, mode: WitnessMode) -> Result<WitnessFamily> {
    if !(s.is_finite() && s > 0.0) {
        return Err(Error::arg(format!("s must be positive, got {s}")));
    }
    let n = space.len();
    let p = mode.exponent();
    let centers = space.greedy_packing(&space.all(), 4.0 * s);
    let witnesses: Vec<FunctionVec> = centers
        .iter()
        .map(|&x| {
            let ball = space.ball(x, 2.0 * s);
            let chi = FunctionVec::indicator(n, &ball);
            match mode {
                WitnessMode::L1 => chi.scaled(1.0 / ball.mass()),
                WitnessMode::Linf => chi,
            }
        })
        .collect();
    let op = AveragingOperator::assemble(space, s)?;
    let images = witnesses.par_iter().map(|f| op.apply(f)).collect::<Result<Vec<_>>>()?;
    let c_bound = (0..n)
        .map(|x| op.row(x).ball.mass() / space.ball(x, 2.0 * s).mass())
        .fold(f64::INFINITY, f64::min);
    let k = centers.len();
    let separation_matrix = (0..k)
        .into_par_iter()
        .map(|a| {
            (0..k)
                .map(|b| if a == b { 0.0 } else { norm(space, &images[a].minus(&images[b]), p) })
                .collect()
        })
        .collect();
    Ok(WitnessFamily {
        s,
        mode,
        gamma: doubling_constant(space, s)?.gamma,
        max_image_norm: images.iter().map(|g| norm(space, g, p)).fold(0.0, f64::max),
        centers,
        witnesses,
        images,
        c_bound,
        separation_matrix,
    })
}

/// Normalized `2s`-ball indicators around a `4s`-packing, compared in `L^1`.
pub fn l1_witnesses(space: &MetricMeasureSpace, s: f64) -> Result<WitnessFamily> {
    witnesses(space, s, WitnessMode::L1)
}

/// Plain `2s`-ball indicators around a `4s`-packing, compared in `L^inf`.
pub fn linf_witnesses(space: &MetricMeasureSpace, s: f64) -> Result<WitnessFamily> {
    witnesses(space, s, WitnessMode::Linf)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeparationCheck {
    /// Smallest off-diagonal entry; `None` when there is no pair.
    pub min_pairwise: Option<f64>,
    pub pair: Option<(usize, usize)>,
    pub bound: f64,
    pub pass: bool,
}

/// Smallest pairwise image distance against the mode's bound, with tolerance
/// [`SEPARATION_TOL`]. Reads the measured matrix, so a metric that breaks the
/// triangle inequality is judged on what actually happens.
pub fn verify_separation(family: &WitnessFamily) -> SeparationCheck {
    let mut best: Option<(f64, (usize, usize))> = None;
    for (a, row) in family.separation_matrix.iter().enumerate() {
        for (b, &v) in row.iter().enumerate().skip(a + 1) {
            if best.map_or(true, |(m, _)| v < m) {
                best = Some((v, (a, b)));
            }
        }
    }
    let bound = family.bound();
    SeparationCheck {
        min_pairwise: best.map(|b| b.0),
        pair: best.map(|b| b.1),
        bound,
        pass: best.map_or(true, |(m, _)| m >= bound - SEPARATION_TOL),
    }
}

/// Largest deviations from the exact image values: the plateau on `B(x_n, s)`,
/// zero off `B(x_n, 3s)`, and (for `L^1`) the integral of
/// `|A_s f_n - A_s f_m|` over `B(x_n, s)` against `mu(B(x_n,s)) / mu(B(x_n,2s))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PlateauCheck {
    pub plateau_error: f64,
    pub vanish_error: f64,
    pub inner_integral_error: f64,
    /// `L^inf` only: largest `| |A_s f_n - A_s f_m| - 1 |` on `B(x_n, s)`.
    pub pairwise_plateau_error: f64,
}

pub fn plateau_check(space: &MetricMeasureSpace, family: &WitnessFamily) -> PlateauCheck {
    let s = family.s;
    let mut out = PlateauCheck {
        plateau_error: 0.0,
        vanish_error: 0.0,
        inner_integral_error: 0.0,
        pairwise_plateau_error: 0.0,
    };
    for (a, &x) in family.centers.iter().enumerate() {
        let g = &family.images[a];
        let inner = space.ball(x, s);
        let double = space.ball(x, 2.0 * s);
        let outer = space.ball(x, 3.0 * s);
        let plateau = match family.mode {
            WitnessMode::L1 => 1.0 / double.mass(),
            WitnessMode::Linf => 1.0,
        };
        for y in inner.iter() {
            out.plateau_error = out.plateau_error.max((g[y] - plateau).abs());
        }
        for y in (0..space.len()).filter(|&y| !outer.contains(y)) {
            out.vanish_error = out.vanish_error.max(g[y].abs());
        }
        for (_, h) in family.images.iter().enumerate().filter(|&(b, _)| b != a) {
            let diff = g.minus(h);
            match family.mode {
                WitnessMode::L1 => {
                    let integral = weighted_norm(space.weights(), diff.values(), inner.iter(), Exponent::ONE);
                    let expected = inner.mass() / double.mass();
                    out.inner_integral_error = out.inner_integral_error.max((integral - expected).abs());
                }
                WitnessMode::Linf => {
                    for y in inner.iter() {
                        out.pairwise_plateau_error = out.pairwise_plateau_error.max((diff[y].abs() - 1.0).abs());
                    }
                }
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub length: usize,
    pub n_points: usize,
    pub num_centers: usize,
    pub min_pairwise: Option<f64>,
    pub bound: f64,
    /// Greedy covering number of the witness images at `bound / 2`.
    pub covering_number: usize,
}

/// Witness families on the unit grids `{0, 1, ..., L}` for each `L`.
pub fn dichotomy_sweep(lengths: &[usize], s: f64, mode: WitnessMode) -> Result<Vec<SweepRow>> {
    if lengths.is_empty() {
        return Err(Error::arg("sweep needs at least one length"));
    }
    lengths
        .iter()
        .map(|&length| {
            let space = MetricMeasureSpace::unit_grid(length);
            let family = witnesses(&space, s, mode)?;
            let check = verify_separation(&family);
            let bound = family.bound();
            Ok(SweepRow {
                length,
                n_points: space.len(),
                num_centers: family.len(),
                min_pairwise: check.min_pairwise,
                bound,
                covering_number: covering_number(&space, &family.images, mode.exponent(), bound / 2.0)?,
            })
        })
        .collect()
}
