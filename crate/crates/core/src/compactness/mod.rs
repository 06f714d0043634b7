//! Compactness diagnostics for families of functions and their images under
//! averaging operators.
//!
//! * [`FunctionFamily`] and [`unit_ball_sample`]: finite test families in `L^p`.
//! * [`kolmogorov_riesz_check`]: the averaging and tail conditions as tables.
//! * [`equicontinuity_modulus`], [`lp_oscillation_modulus`]: grid searches for a
//!   `delta` meeting the sufficient thresholds, checked against the measured
//!   oscillation of the images.
//! * [`build_net_certificate`] / [`verify_certificate`]: explicit finite
//!   `epsilon`-nets for the image set.
//! * [`covering_number`]: greedy cover size of a set of images.
//! * [`composite_bound_check`]: `||A_s A_r f - A_r f||_1 <= epsilon` for every
//!   `s` meeting the annulus and inverse-gap thresholds.

mod certificate;
mod composite;
mod family;
mod modulus;

pub use certificate::{
    build_net_certificate, verify_certificate, CertificateCheck, CertificateOutcome, GridRange, NetCertificate,
};
pub use composite::{composite_bound_check, CompositeBoundReport, CompositeRow};
pub use family::{unit_ball_sample, FunctionFamily};
pub use modulus::{
    equicontinuity_modulus, lp_oscillation_modulus, EquicontinuityReport, EquicontinuityRow, LpModulus,
    ModulusConfig, ModulusFailure, ModulusOutcome,
};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::operator::{weighted_norm, AveragingOperator, Exponent, FunctionVec};
use crate::space::MetricMeasureSpace;

/// `||f - g||_p` on the whole space.
pub(crate) fn distance(space: &MetricMeasureSpace, f: &FunctionVec, g: &FunctionVec, p: Exponent) -> f64 {
    let diff = f.minus(g);
    weighted_norm(space.weights(), diff.values(), 0..diff.len(), p)
}

/// Size of a greedy `epsilon`-cover of `images` in the weighted `p`-norm: the
/// first image not within `epsilon` of an existing center becomes a center.
/// This upper-bounds the minimal covering number.
pub fn covering_number(
    space: &MetricMeasureSpace,
    images: &[FunctionVec],
    p: Exponent,
    epsilon: f64,
) -> Result<usize> {
    Ok(covering_centers(space, images, p, epsilon)?.len())
}

/// Indices (into `images`) of the greedy cover centers.
pub fn covering_centers(
    space: &MetricMeasureSpace,
    images: &[FunctionVec],
    p: Exponent,
    epsilon: f64,
) -> Result<Vec<usize>> {
    if !(epsilon > 0.0) {
        return Err(Error::arg(format!("epsilon must be positive, got {epsilon}")));
    }
    if let Some(g) = images.iter().find(|g| g.len() != space.len()) {
        return Err(Error::DimensionMismatch {
            expected: space.len(),
            found: g.len(),
        });
    }
    let mut centers: Vec<usize> = Vec::new();
    for (k, g) in images.iter().enumerate() {
        if !centers
            .iter()
            .any(|&c| distance(space, &images[c], g, p) <= epsilon)
        {
            centers.push(k);
        }
    }
    Ok(centers)
}

/// Grids and targets for [`kolmogorov_riesz_check`].
#[derive(Debug, Clone, PartialEq)]
pub struct KrConfig {
    pub sigma_grid: Vec<f64>,
    pub radius_grid: Vec<f64>,
    /// Center of the candidate bounded sets `E = B(reference, radius)`.
    pub reference: usize,
    pub target: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KrRow {
    pub parameter: f64,
    pub value: f64,
    pub worst_member: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KrReport {
    pub p: Exponent,
    pub target: f64,
    /// `sigma -> max_f ||A_sigma f - f||_p`
    pub condition1: Vec<KrRow>,
    /// `radius -> max_f ||f chi_{X \ B(reference, radius)}||_p`
    pub condition2: Vec<KrRow>,
    pub smallest_sigma: Option<f64>,
    pub smallest_radius: Option<f64>,
}

fn worst<I: Iterator<Item = f64>>(values: I) -> (f64, usize) {
    let mut best = (0.0, 0);
    for (k, v) in values.enumerate() {
        if v > best.0 {
            best = (v, k);
        }
    }
    best
}

/// Tabulates the two Kolmogorov–Riesz conditions for a family: how well
/// averaging at scale `sigma` reproduces each member, and how much norm each
/// member keeps outside balls around a reference point. Grids are sorted
/// ascending, so the tail column is nonincreasing.
pub fn kolmogorov_riesz_check(
    space: &MetricMeasureSpace,
    family: &FunctionFamily,
    config: &KrConfig,
) -> Result<KrReport> {
    if config.sigma_grid.is_empty() || config.radius_grid.is_empty() {
        return Err(Error::arg("Kolmogorov-Riesz grids must be nonempty"));
    }
    if config.radius_grid.iter().any(|r| !(*r >= 0.0)) {
        return Err(Error::arg("tail radii must be nonnegative"));
    }
    space.check_index(config.reference)?;
    let p = family.p();
    let mut sigmas = config.sigma_grid.clone();
    sigmas.sort_by(f64::total_cmp);
    let mut radii = config.radius_grid.clone();
    radii.sort_by(f64::total_cmp);

    let mut condition1 = Vec::with_capacity(sigmas.len());
    for &sigma in &sigmas {
        let op = AveragingOperator::assemble(space, sigma)?;
        let devs = family
            .functions()
            .iter()
            .map(|f| op.apply(f).map(|af| distance(space, &af, f, p)))
            .collect::<Result<Vec<f64>>>()?;
        let (value, worst_member) = worst(devs.into_iter());
        condition1.push(KrRow {
            parameter: sigma,
            value,
            worst_member,
        });
    }
    let mut condition2 = Vec::with_capacity(radii.len());
    for &radius in &radii {
        let outside = space.all().difference(&space.ball(config.reference, radius), space);
        let (value, worst_member) = worst(
            family
                .functions()
                .iter()
                .map(|f| weighted_norm(space.weights(), f.values(), outside.iter(), p)),
        );
        condition2.push(KrRow {
            parameter: radius,
            value,
            worst_member,
        });
    }
    let first_below = |rows: &[KrRow]| rows.iter().find(|r| r.value < config.target).map(|r| r.parameter);
    Ok(KrReport {
        p,
        target: config.target,
        smallest_sigma: first_below(&condition1),
        smallest_radius: first_below(&condition2),
        condition1,
        condition2,
    })
}
