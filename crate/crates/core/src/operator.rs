//! The averaging operator `A_r f(x) = mu(B(x,r))^-1 * sum_{y in B(x,r)} mu_y f(y)`
//! as a sparse row-normalized map, plus weighted p-norms and exact `1 -> 1` and
//! `inf -> inf` operator norms.

use std::fmt;
use std::io::Write;
use std::ops::Index;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::space::{IndexSet, MetricMeasureSpace};

/// A norm exponent `p` in `[1, inf]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Exponent(f64);

impl Exponent {
    pub const ONE: Exponent = Exponent(1.0);
    pub const TWO: Exponent = Exponent(2.0);
    pub const INFINITY: Exponent = Exponent(f64::INFINITY);

    pub fn new(p: f64) -> Result<Self> {
        if p >= 1.0 {
            Ok(Exponent(p))
        } else {
            Err(Error::arg(format!("norm exponent must satisfy p >= 1, got {p}")))
        }
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }

    #[inline]
    pub fn is_infinite(self) -> bool {
        self.0.is_infinite()
    }

    /// The conjugate exponent `q` with `1/p + 1/q = 1`.
    pub fn conjugate(self) -> Exponent {
        if self.0 == 1.0 {
            Exponent::INFINITY
        } else if self.is_infinite() {
            Exponent::ONE
        } else {
            Exponent(self.0 / (self.0 - 1.0))
        }
    }

    /// `1/p`, zero for `p = inf`.
    pub fn reciprocal(self) -> f64 {
        if self.is_infinite() {
            0.0
        } else {
            1.0 / self.0
        }
    }
}

impl FromStr for Exponent {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "inf" | "infinity" | "Inf" => Ok(Exponent::INFINITY),
            t => {
                let p: f64 = t
                    .parse()
                    .map_err(|_| Error::arg(format!("cannot parse norm exponent \"{t}\"")))?;
                if p.is_infinite() {
                    return Err(Error::arg("spell the infinite exponent as \"inf\""));
                }
                Exponent::new(p)
            }
        }
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_infinite() {
            f.write_str("inf")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

impl Serialize for Exponent {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        if self.is_infinite() {
            serializer.serialize_str("inf")
        } else {
            serializer.serialize_f64(self.0)
        }
    }
}

/// A real function on the atoms of a space, `f(x_i)` per index.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionVec(Vec<f64>);

impl FunctionVec {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::arg(format!("function value at index {k} is not finite")));
        }
        Ok(FunctionVec(values))
    }

    pub fn zeros(n: usize) -> Self {
        FunctionVec(vec![0.0; n])
    }

    pub fn constant(n: usize, c: f64) -> Self {
        FunctionVec(vec![c; n])
    }

    /// `chi_A`.
    pub fn indicator(n: usize, set: &IndexSet) -> Self {
        let mut v = vec![0.0; n];
        for j in set.iter() {
            v[j] = 1.0;
        }
        FunctionVec(v)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.0.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn into_values(self) -> Vec<f64> {
        self.0
    }

    pub fn scaled(&self, c: f64) -> FunctionVec {
        FunctionVec(self.0.iter().map(|v| c * v).collect())
    }

    /// `self - other`, pointwise.
    pub fn minus(&self, other: &FunctionVec) -> FunctionVec {
        assert_eq!(self.len(), other.len(), "function length mismatch");
        FunctionVec(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    /// `a * self + b * other`, pointwise.
    pub fn combine(&self, a: f64, other: &FunctionVec, b: f64) -> FunctionVec {
        assert_eq!(self.len(), other.len(), "function length mismatch");
        FunctionVec(self.0.iter().zip(&other.0).map(|(x, y)| a * x + b * y).collect())
    }

    /// `f * chi_A`.
    pub fn restricted(&self, set: &IndexSet) -> FunctionVec {
        let mut v = vec![0.0; self.len()];
        for j in set.iter() {
            v[j] = self.0[j];
        }
        FunctionVec(v)
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

impl Index<usize> for FunctionVec {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

fn check_len(space: &MetricMeasureSpace, f: &FunctionVec) -> Result<()> {
    if f.len() == space.len() {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            expected: space.len(),
            found: f.len(),
        })
    }
}

pub(crate) fn weighted_norm<I>(weights: &[f64], values: &[f64], indices: I, p: Exponent) -> f64
where
    I: Iterator<Item = usize>,
{
    if p.is_infinite() {
        // all atoms carry positive mass, so the essential sup is the max
        indices.fold(0.0f64, |m, j| m.max(values[j].abs()))
    } else if p.value() == 1.0 {
        indices.map(|j| weights[j] * values[j].abs()).sum()
    } else {
        // Running rescale by the largest magnitude so far, so that large
        // exponents neither underflow nor overflow.
        let q = p.value();
        let (mut scale, mut sum) = (0.0f64, 0.0f64);
        for j in indices {
            let a = values[j].abs();
            if a > scale {
                sum = sum * (scale / a).powf(q) + weights[j];
                scale = a;
            } else if a > 0.0 {
                sum += weights[j] * (a / scale).powf(q);
            }
        }
        scale * sum.powf(1.0 / q)
    }
}

/// Weighted `L^p` norm `(sum mu_i |f_i|^p)^(1/p)`, or `max |f_i|` for `p = inf`.
pub fn norm_p(space: &MetricMeasureSpace, f: &FunctionVec, p: Exponent) -> Result<f64> {
    check_len(space, f)?;
    Ok(weighted_norm(space.weights(), f.values(), 0..f.len(), p))
}

/// `||f chi_A||_p`.
pub fn norm_p_on(space: &MetricMeasureSpace, f: &FunctionVec, p: Exponent, set: &IndexSet) -> Result<f64> {
    check_len(space, f)?;
    Ok(weighted_norm(space.weights(), f.values(), set.iter(), p))
}

/// `sum mu_i |f_i g_i|`, the left side of the weighted Hölder inequality.
pub fn pairing(space: &MetricMeasureSpace, f: &FunctionVec, g: &FunctionVec) -> Result<f64> {
    check_len(space, f)?;
    check_len(space, g)?;
    Ok(space
        .weights()
        .iter()
        .zip(f.values().iter().zip(g.values()))
        .map(|(w, (a, b))| w * (a * b).abs())
        .sum())
}

/// One row of `A_r`: the ball `B(i, r)` and `1 / mu(B(i, r))`.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub ball: IndexSet,
    pub inv_mass: f64,
}

/// The averaging operator `A_r` on a fixed space.
#[derive(Debug, Clone, PartialEq)]
pub struct AveragingOperator {
    radius: f64,
    rows: Vec<Row>,
    weights: Vec<f64>,
}

impl AveragingOperator {
    /// Assembles `A_r`; rows are built in parallel, each from its own ball.
    pub fn assemble(space: &MetricMeasureSpace, r: f64) -> Result<Self> {
        if !(r.is_finite() && r > 0.0) {
            return Err(Error::arg(format!("operator radius must be positive, got {r}")));
        }
        let rows = (0..space.len())
            .into_par_iter()
            .map(|i| {
                let ball = space.ball(i, r);
                let inv_mass = 1.0 / ball.mass();
                Row { ball, inv_mass }
            })
            .collect();
        Ok(Self {
            radius: r,
            rows,
            weights: space.weights().to_vec(),
        })
    }

    #[inline]
    pub fn radius(&self) -> f64 {
        self.radius
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn rows(&self) -> &[Row] {
        &self.rows
    }

    pub fn row(&self, i: usize) -> &Row {
        &self.rows[i]
    }

    /// Number of stored nonzeros.
    pub fn nnz(&self) -> usize {
        self.rows.iter().map(|r| r.ball.len()).sum()
    }

    /// `A_r f(i)`, summing in ascending member order.
    #[inline]
    pub fn apply_at(&self, f: &[f64], i: usize) -> f64 {
        let row = &self.rows[i];
        let s: f64 = row.ball.iter().map(|j| self.weights[j] * f[j]).sum();
        row.inv_mass * s
    }

    pub fn apply(&self, f: &FunctionVec) -> Result<FunctionVec> {
        if f.len() != self.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                found: f.len(),
            });
        }
        Ok(FunctionVec(
            (0..self.len()).map(|i| self.apply_at(f.values(), i)).collect(),
        ))
    }

    /// Nonzero entries `(i, j, mu_j / mu(B(i, r)))` in row-major order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.rows.iter().enumerate().flat_map(move |(i, row)| {
            row.ball
                .iter()
                .map(move |j| (i, j, self.weights[j] / row.ball.mass()))
        })
    }

    /// Writes the sparse triplet export: one `i j value` line per nonzero with
    /// 17 significant digits.
    pub fn write_triplets<W: Write>(&self, mut out: W) -> Result<()> {
        for (i, j, v) in self.entries() {
            writeln!(out, "{i} {j} {}", crate::report::fmt_f64(v))?;
        }
        Ok(())
    }

    /// Exact `||A_r||_{p -> p}` for `p` in `{1, inf}`.
    ///
    /// For `p = inf` this is the largest row sum, which is `1` because every row
    /// is a convex average. For `p = 1` it is the largest weighted column sum
    /// `max_j sum_{i : j in B(i,r)} mu_i / mu(B(i,r))`.
    pub fn operator_norm(&self, p: Exponent) -> Result<f64> {
        if p.is_infinite() {
            Ok(self
                .rows
                .iter()
                .map(|row| {
                    let s: f64 = row.ball.iter().map(|j| self.weights[j]).sum();
                    s / row.ball.mass()
                })
                .fold(0.0, f64::max))
        } else if p.value() == 1.0 {
            let mut columns = vec![0.0; self.len()];
            for (i, row) in self.rows.iter().enumerate() {
                let c = self.weights[i] / row.ball.mass();
                for j in row.ball.iter() {
                    columns[j] += c;
                }
            }
            Ok(columns.into_iter().fold(0.0, f64::max))
        } else {
            Err(Error::arg(format!(
                "exact operator norms are available for p = 1 and p = inf only, got p = {p}"
            )))
        }
    }
}

/// `A_s (A_r f)`, computed as two sparse applications.
pub fn compose_apply(space: &MetricMeasureSpace, s: f64, r: f64, f: &FunctionVec) -> Result<FunctionVec> {
    let inner = AveragingOperator::assemble(space, r)?.apply(f)?;
    AveragingOperator::assemble(space, s)?.apply(&inner)
}

/// The two-term pointwise bound on `|A_t f(x) - A_t f(y)|`:
///
/// `|1/mu(B_x) - 1/mu(B_y)| * int_{B_x} |f| + 1/mu(B_y) * int_{B_x Δ B_y} |f|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Oscillation {
    pub actual: f64,
    pub bound: f64,
    pub term_inverse_gap: f64,
    pub term_symdiff: f64,
}

pub fn oscillation_bound(
    space: &MetricMeasureSpace,
    op: &AveragingOperator,
    f: &FunctionVec,
    x: usize,
    y: usize,
) -> Result<Oscillation> {
    check_len(space, f)?;
    space.check_index(x)?;
    space.check_index(y)?;
    let v = f.values();
    let w = space.weights();
    let (bx, by) = (op.row(x), op.row(y));
    let actual = (op.apply_at(v, x) - op.apply_at(v, y)).abs();
    let int_x: f64 = bx.ball.iter().map(|j| w[j] * v[j].abs()).sum();
    let delta = bx.ball.sym_difference(&by.ball, space);
    let int_delta: f64 = delta.iter().map(|j| w[j] * v[j].abs()).sum();
    let term_inverse_gap = (bx.inv_mass - by.inv_mass).abs() * int_x;
    let term_symdiff = by.inv_mass * int_delta;
    Ok(Oscillation {
        actual,
        bound: term_inverse_gap + term_symdiff,
        term_inverse_gap,
        term_symdiff,
    })
}
