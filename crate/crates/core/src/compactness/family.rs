use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::operator::{norm_p, AveragingOperator, Exponent, FunctionVec};
use crate::space::{IndexSet, MetricMeasureSpace};

/// A finite family `F` in `L^p(X)` together with `c1 = max_f ||f||_p`.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionFamily {
    functions: Vec<FunctionVec>,
    p: Exponent,
    sup_norm: f64,
}

impl FunctionFamily {
    pub fn new(space: &MetricMeasureSpace, functions: Vec<FunctionVec>, p: Exponent) -> Result<Self> {
        if functions.is_empty() {
            return Err(Error::arg("function family must be nonempty"));
        }
        let mut sup_norm = 0.0f64;
        for f in &functions {
            sup_norm = sup_norm.max(norm_p(space, f, p)?);
        }
        Ok(Self {
            functions,
            p,
            sup_norm,
        })
    }

    /// Reads `{"functions": [[...], ...]}`.
    pub fn from_json_str(space: &MetricMeasureSpace, text: &str, p: Exponent) -> Result<Self> {
        #[derive(serde::Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Doc {
            functions: Vec<Vec<f64>>,
        }
        let doc: Doc = serde_json::from_str(text)?;
        let functions = doc
            .functions
            .into_iter()
            .enumerate()
            .map(|(k, v)| {
                FunctionVec::new(v).map_err(|e| Error::arg(format!("functions[{k}]: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(space, functions, p)
    }

    pub fn functions(&self) -> &[FunctionVec] {
        &self.functions
    }

    pub fn p(&self) -> Exponent {
        self.p
    }

    /// `c1 = max_f ||f||_p`.
    pub fn sup_norm(&self) -> f64 {
        self.sup_norm
    }

    pub fn len(&self) -> usize {
        self.functions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.functions.is_empty()
    }

    /// `A f` for every member, in family order.
    pub fn images(&self, op: &AveragingOperator) -> Result<Vec<FunctionVec>> {
        self.functions.par_iter().map(|f| op.apply(f)).collect()
    }
}

/// A deterministic sample of `count` functions from the unit ball of `L^p`.
///
/// The first member is the normalized constant `1 / ||1||_p`. The rest alternate
/// between two kinds: for `p = inf`, `±1` sign vectors and sparse `{0, ±1}`
/// vectors; for finite `p`, normalized uniform random vectors and normalized
/// indicators `chi_A / mu(A)^(1/p)` of random sets.
pub fn unit_ball_sample(space: &MetricMeasureSpace, p: Exponent, count: usize, seed: u64) -> Result<FunctionFamily> {
    if count == 0 {
        return Err(Error::arg("sample count must be positive"));
    }
    let n = space.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ones = FunctionVec::constant(n, 1.0);
    let mut functions = vec![ones.scaled(1.0 / norm_p(space, &ones, p)?)];
    for k in 1..count {
        let f = if p.is_infinite() {
            if k % 2 == 1 {
                let v = (0..n).map(|_| if rng.gen::<bool>() { 1.0 } else { -1.0 }).collect();
                FunctionVec::new(v)?
            } else {
                let v = (0..n).map(|_| [0.0, 1.0, -1.0][rng.gen_range(0..3)]).collect();
                FunctionVec::new(v)?
            }
        } else if k % 2 == 1 {
            let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..=1.0)).collect();
            let f = FunctionVec::new(v)?;
            let norm = norm_p(space, &f, p)?;
            if norm > 0.0 {
                f.scaled(1.0 / norm)
            } else {
                functions[0].clone()
            }
        } else {
            let density: f64 = rng.gen_range(0.05..0.5);
            let mut members: Vec<usize> = (0..n).filter(|_| rng.gen_bool(density)).collect();
            if members.is_empty() {
                members.push(*(0..n).collect::<Vec<_>>().choose(&mut rng).expect("nonempty space"));
            }
            let set = IndexSet::new(space, members)?;
            FunctionVec::indicator(n, &set).scaled(set.mass().powf(-p.reciprocal()))
        };
        functions.push(f);
    }
    FunctionFamily::new(space, functions, p)
}
