use std::collections::HashMap;

use rayon::prelude::*;
use serde::Serialize;

use super::modulus::{equicontinuity_modulus, lp_oscillation_modulus, ModulusConfig, ModulusFailure, ModulusOutcome};
use super::FunctionFamily;
use crate::error::{Error, Result};
use crate::operator::{weighted_norm, AveragingOperator, Exponent, FunctionVec};
use crate::space::{IndexSet, MetricMeasureSpace};

/// `H_i = {k * grid_step : lo <= k <= hi}`, the bucket centers used at one net point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct GridRange {
    pub lo: i64,
    pub hi: i64,
}

/// An explicit finite `epsilon`-net for `{A_r f chi_E : f in F}`.
///
/// Every image is assigned the bucket tuple of its values at the net points
/// `centers`; `occupied` lists the distinct tuples and `representatives[a]` is
/// the first family member with tuple `occupied[a]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NetCertificate {
    pub epsilon: f64,
    pub p: Exponent,
    pub radius: f64,
    pub subset: Vec<usize>,
    pub delta: f64,
    pub sigma: Option<f64>,
    /// Pointwise oscillation target: `epsilon mu(E)^(-1/p) / 4`, or `epsilon / 4` for `p = inf`.
    pub target_oscillation: f64,
    pub centers: Vec<usize>,
    /// Buckets are `(a - half_width, a + half_width]` around `a = k * grid_step`.
    pub half_width: f64,
    pub grid_step: f64,
    pub grids: Vec<GridRange>,
    pub occupied: Vec<Vec<i64>>,
    pub representatives: Vec<usize>,
    /// Index into `occupied` for each family member.
    pub assignment: Vec<usize>,
    /// `max_f ||(A f - A f_rep(f)) chi_E||_p` for the assigned representatives.
    pub achieved_radius: f64,
}

impl NetCertificate {
    pub fn net_size(&self) -> usize {
        self.occupied.len()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum CertificateOutcome {
    Built(NetCertificate),
    Failed(ModulusFailure),
}

/// Bucket index `k` with `v in (2wk - w, 2wk + w]`.
fn bucket(v: f64, half_width: f64) -> i64 {
    ((v - half_width) / (2.0 * half_width)).ceil() as i64
}

/// Builds an `epsilon`-net for the images `A_r f` restricted to `E`.
///
/// A modulus search gives `delta` with pointwise oscillation below the target
/// on pairs of `E` closer than `delta`; a greedy net of `E` whose centers cover
/// only points at distance `< delta` then reduces each image to finitely many
/// bucketed values.
pub fn build_net_certificate(
    space: &MetricMeasureSpace,
    r: f64,
    family: &FunctionFamily,
    subset: &IndexSet,
    epsilon: f64,
    config: &ModulusConfig,
) -> Result<CertificateOutcome> {
    if subset.is_empty() {
        return Err(Error::arg("bounded set E must be nonempty"));
    }
    if !(epsilon > 0.0) {
        return Err(Error::arg(format!("epsilon must be positive, got {epsilon}")));
    }
    let p = family.p();
    let target = if p.is_infinite() {
        epsilon / 4.0
    } else {
        epsilon * subset.mass().powf(-p.reciprocal()) / 4.0
    };
    let (delta, sigma) = if p.is_infinite() {
        let rep = equicontinuity_modulus(space, r, family, &[target], config.grid, subset)?;
        let row = &rep.rows[0];
        match row.delta {
            Some(d) => (d, None),
            None => {
                let sym_fails = !(row.symdiff < row.symdiff_threshold);
                let gap_fails = !(row.gap_bound < row.gap_threshold);
                return Ok(CertificateOutcome::Failed(ModulusFailure::NoDelta {
                    smallest_delta: r / config.grid as f64,
                    symdiff: row.symdiff,
                    symdiff_threshold: row.symdiff_threshold,
                    inverse_gap: row.gap_bound,
                    gap_threshold: row.gap_threshold,
                    failing: match (sym_fails, gap_fails) {
                        (true, true) => "both",
                        (true, false) => "symdiff",
                        _ => "inverse_gap",
                    },
                }));
            }
        }
    } else {
        match lp_oscillation_modulus(space, r, family, subset, target, config)? {
            ModulusOutcome::Found(m) => (m.delta, m.sigma),
            ModulusOutcome::Failed(f) => return Ok(CertificateOutcome::Failed(f)),
        }
    };

    let op = AveragingOperator::assemble(space, r)?;
    let images = family.images(&op)?;
    let centers = space.greedy_net_open(subset, delta);
    let half_width = target;
    let tuples: Vec<Vec<i64>> = images
        .par_iter()
        .map(|g| centers.iter().map(|&c| bucket(g[c], half_width)).collect())
        .collect();

    let mut slot: HashMap<&[i64], usize> = HashMap::new();
    let mut occupied: Vec<Vec<i64>> = Vec::new();
    let mut representatives = Vec::new();
    let mut assignment = Vec::with_capacity(tuples.len());
    for (k, t) in tuples.iter().enumerate() {
        let a = *slot.entry(t.as_slice()).or_insert_with(|| {
            occupied.push(t.clone());
            representatives.push(k);
            occupied.len() - 1
        });
        assignment.push(a);
    }
    let grids = (0..centers.len())
        .map(|i| GridRange {
            lo: tuples.iter().map(|t| t[i]).min().unwrap_or(0),
            hi: tuples.iter().map(|t| t[i]).max().unwrap_or(0),
        })
        .collect();
    let achieved_radius = (0..images.len())
        .into_par_iter()
        .map(|k| restricted_distance(space, &images[k], &images[representatives[assignment[k]]], subset, p))
        .reduce(|| 0.0, f64::max);

    Ok(CertificateOutcome::Built(NetCertificate {
        epsilon,
        p,
        radius: r,
        subset: subset.members().to_vec(),
        delta,
        sigma,
        target_oscillation: target,
        centers,
        half_width,
        grid_step: 2.0 * half_width,
        grids,
        occupied,
        representatives,
        assignment,
        achieved_radius,
    }))
}

fn restricted_distance(space: &MetricMeasureSpace, f: &FunctionVec, g: &FunctionVec, e: &IndexSet, p: Exponent) -> f64 {
    let diff = f.minus(g);
    weighted_norm(space.weights(), diff.values(), e.iter(), p)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertificateCheck {
    /// `max_f min_a ||(A f - A f_a) chi_E||_p`
    pub achieved_radius: f64,
    pub worst_member: usize,
    pub nearest_representative: usize,
    pub passed: bool,
}

/// Recomputes every image from `op` and checks that each lies within
/// `epsilon` of its nearest representative image on `E`. Independent of the
/// bucket assignment stored in the certificate.
pub fn verify_certificate(
    space: &MetricMeasureSpace,
    op: &AveragingOperator,
    family: &FunctionFamily,
    certificate: &NetCertificate,
) -> Result<CertificateCheck> {
    if certificate.representatives.is_empty() {
        return Err(Error::arg("certificate has no representatives"));
    }
    if let Some(&k) = certificate.representatives.iter().find(|&&k| k >= family.len()) {
        return Err(Error::IndexOutOfRange {
            index: k,
            n: family.len(),
        });
    }
    let e = IndexSet::new(space, certificate.subset.iter().copied())?;
    let p = certificate.p;
    let images = family.images(op)?;
    let reps: Vec<&FunctionVec> = certificate.representatives.iter().map(|&k| &images[k]).collect();
    let nearest: Vec<(f64, usize)> = images
        .par_iter()
        .map(|g| {
            reps.iter()
                .enumerate()
                .map(|(a, h)| (restricted_distance(space, g, h, &e, p), a))
                .fold((f64::INFINITY, 0), |best, c| if c.0 < best.0 { c } else { best })
        })
        .collect();
    let (worst_member, &(achieved_radius, nearest_representative)) = nearest
        .iter()
        .enumerate()
        .fold((0, &nearest[0]), |best, (k, c)| if c.0 > best.1 .0 { (k, c) } else { best });
    Ok(CertificateCheck {
        achieved_radius,
        worst_member,
        nearest_representative,
        passed: achieved_radius < certificate.epsilon,
    })
}
