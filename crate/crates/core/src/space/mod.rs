//! Finite metric measure spaces and the set-geometric primitives built on them.
//!
//! A space is a finite set of atoms `0..n`, a metric given either by Euclidean
//! coordinates or by an explicit distance matrix, and a strictly positive mass
//! per atom. Every ball therefore has positive measure, and the essential
//! supremum of a function coincides with its maximum.
//!
//! Balls are closed. Membership uses `d(c, j) <= r + BALL_TOL * (1 + r)` so that
//! boundary points that should sit exactly on the sphere are included
//! deterministically despite rounding in the distance computation.

mod index;
mod load;
mod set;

pub use index::BallIndex;
pub use load::SpaceDocument;
pub use set::IndexSet;

use crate::error::{Error, Result};

/// Relative-plus-absolute tolerance applied to closed-ball membership.
pub const BALL_TOL: f64 = 1e-12;

/// Tolerance used when validating symmetry of an explicit distance matrix.
pub const SYMMETRY_TOL: f64 = 1e-12;

#[inline]
pub(crate) fn ball_threshold(radius: f64) -> f64 {
    radius + BALL_TOL * (1.0 + radius)
}

#[derive(Debug, Clone, PartialEq)]
pub enum MetricSource {
    /// Row-major `n x dim` coordinates with the Euclidean distance.
    Coords { dim: usize, coords: Vec<f64> },
    /// Row-major `n x n` symmetric distance matrix with zero diagonal.
    Matrix { matrix: Vec<f64> },
}

/// A finite metric measure space `(X, d, mu)`.
///
/// Immutable after construction; all queries are pure and `Sync`.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricMeasureSpace {
    n: usize,
    metric: MetricSource,
    weights: Vec<f64>,
    total_mass: f64,
}

fn check_weights(n: usize, weights: Option<Vec<f64>>) -> Result<Vec<f64>> {
    let weights = weights.unwrap_or_else(|| vec![1.0; n]);
    if weights.len() != n {
        return Err(Error::space(
            "weights",
            format!("expected {n} weights, found {}", weights.len()),
        ));
    }
    for (k, &w) in weights.iter().enumerate() {
        if !(w.is_finite() && w > 0.0) {
            return Err(Error::space(
                format!("weights[{k}]"),
                format!("nonpositive weight at index {k}"),
            ));
        }
    }
    Ok(weights)
}

impl MetricMeasureSpace {
    /// Builds a space from Euclidean coordinates. `weights = None` means unit mass
    /// on every atom.
    pub fn from_points(points: Vec<Vec<f64>>, weights: Option<Vec<f64>>) -> Result<Self> {
        let n = points.len();
        if n == 0 {
            return Err(Error::space("points", "space must contain at least one point"));
        }
        let dim = points[0].len();
        if dim == 0 {
            return Err(Error::space("points[0]", "at least one coordinate required"));
        }
        let mut coords = Vec::with_capacity(n * dim);
        for (i, p) in points.iter().enumerate() {
            if p.len() != dim {
                return Err(Error::space(
                    format!("points[{i}]"),
                    format!("expected {dim} coordinates, found {}", p.len()),
                ));
            }
            for (k, &x) in p.iter().enumerate() {
                if !x.is_finite() {
                    return Err(Error::space(format!("points[{i}][{k}]"), "non-finite coordinate"));
                }
            }
            coords.extend_from_slice(p);
        }
        let weights = check_weights(n, weights)?;
        Ok(Self::assemble(n, MetricSource::Coords { dim, coords }, weights))
    }

    /// Builds a space from an explicit distance matrix. Symmetry, zero diagonal
    /// and nonnegativity are validated; the triangle inequality is not (see
    /// [`MetricMeasureSpace::validate_triangle`]).
    pub fn from_matrix(matrix: Vec<Vec<f64>>, weights: Option<Vec<f64>>) -> Result<Self> {
        let n = matrix.len();
        if n == 0 {
            return Err(Error::space(
                "distance_matrix",
                "space must contain at least one point",
            ));
        }
        for (i, row) in matrix.iter().enumerate() {
            if row.len() != n {
                return Err(Error::space(
                    format!("distance_matrix[{i}]"),
                    format!("expected {n} entries, found {}", row.len()),
                ));
            }
        }
        for i in 0..n {
            for j in 0..n {
                let a = matrix[i][j];
                let path = || format!("distance_matrix[{i}][{j}]");
                if !a.is_finite() {
                    return Err(Error::space(path(), "non-finite distance"));
                }
                if a < 0.0 {
                    return Err(Error::space(path(), format!("negative distance {a}")));
                }
                if i == j && a != 0.0 {
                    return Err(Error::space(path(), format!("nonzero diagonal entry {a}")));
                }
                let b = matrix[j][i];
                if j > i && (a - b).abs() > SYMMETRY_TOL * (1.0 + a.abs().max(b.abs())) {
                    return Err(Error::space(
                        path(),
                        format!("asymmetric matrix: m[{i}][{j}] = {a}, m[{j}][{i}] = {b}"),
                    ));
                }
            }
        }
        let weights = check_weights(n, weights)?;
        let flat = matrix.into_iter().flatten().collect();
        Ok(Self::assemble(n, MetricSource::Matrix { matrix: flat }, weights))
    }

    /// `n_points` equally spaced atoms `0, spacing, 2*spacing, ...` on the line,
    /// each carrying mass `weight`.
    pub fn line_grid(n_points: usize, spacing: f64, weight: f64) -> Result<Self> {
        if !(spacing.is_finite() && spacing > 0.0) {
            return Err(Error::arg(format!("grid spacing must be positive, got {spacing}")));
        }
        let points = (0..n_points).map(|i| vec![i as f64 * spacing]).collect();
        Self::from_points(points, Some(vec![weight; n_points]))
    }

    /// The integer grid `0, 1, ..., length` with unit masses.
    pub fn unit_grid(length: usize) -> Self {
        Self::line_grid(length + 1, 1.0, 1.0).expect("unit grid is always valid")
    }

    fn assemble(n: usize, metric: MetricSource, weights: Vec<f64>) -> Self {
        let total_mass = weights.iter().sum();
        Self {
            n,
            metric,
            weights,
            total_mass,
        }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn metric(&self) -> &MetricSource {
        &self.metric
    }

    #[inline]
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    #[inline]
    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    /// `mu(X)`.
    #[inline]
    pub fn total_mass(&self) -> f64 {
        self.total_mass
    }

    #[inline]
    pub fn dist(&self, i: usize, j: usize) -> f64 {
        match &self.metric {
            MetricSource::Coords { dim, coords } => {
                let a = &coords[i * dim..(i + 1) * dim];
                let b = &coords[j * dim..(j + 1) * dim];
                a.iter()
                    .zip(b)
                    .map(|(x, y)| (x - y) * (x - y))
                    .sum::<f64>()
                    .sqrt()
            }
            MetricSource::Matrix { matrix } => matrix[i * self.n + j],
        }
    }

    pub fn diameter(&self) -> f64 {
        let mut diam = 0.0f64;
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                diam = diam.max(self.dist(i, j));
            }
        }
        diam
    }

    /// Smallest strictly positive pairwise distance, if any pair is distinct.
    pub fn min_positive_distance(&self) -> Option<f64> {
        let mut best: Option<f64> = None;
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                let d = self.dist(i, j);
                if d > 0.0 && best.map_or(true, |b| d < b) {
                    best = Some(d);
                }
            }
        }
        best
    }

    /// O(n^3) triangle-inequality check, reporting the first violating triple.
    pub fn validate_triangle(&self) -> Result<()> {
        for i in 0..self.n {
            for j in 0..self.n {
                let dij = self.dist(i, j);
                for k in 0..self.n {
                    let via = self.dist(i, k) + self.dist(k, j);
                    if dij > via + SYMMETRY_TOL * (1.0 + via) {
                        return Err(Error::space(
                            format!("distance_matrix[{i}][{j}]"),
                            format!("triangle inequality fails via {k}: {dij} > {via}"),
                        ));
                    }
                }
            }
        }
        Ok(())
    }

    pub(crate) fn check_index(&self, index: usize) -> Result<()> {
        if index < self.n {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange { index, n: self.n })
        }
    }

    /// The whole space as an index set.
    pub fn all(&self) -> IndexSet {
        IndexSet::from_sorted_unchecked(self, (0..self.n).collect())
    }

    /// Closed ball `B(center, radius)` by linear scan.
    ///
    /// # Panics
    /// If `radius` is negative or NaN, or `center` is out of range.
    pub fn ball(&self, center: usize, radius: f64) -> IndexSet {
        assert!(radius >= 0.0, "ball radius must be nonnegative, got {radius}");
        assert!(center < self.n, "center {center} out of range");
        let limit = ball_threshold(radius);
        let members = (0..self.n).filter(|&j| self.dist(center, j) <= limit).collect();
        IndexSet::from_sorted_unchecked(self, members)
    }

    /// `B(center, s + delta) \ B(center, s - delta)` for `0 < delta < s`.
    pub fn annulus(&self, center: usize, s: f64, delta: f64) -> Result<IndexSet> {
        check_annulus_range(s, delta)?;
        let outer = ball_threshold(s + delta);
        let inner = ball_threshold(s - delta);
        let members = (0..self.n)
            .filter(|&j| {
                let d = self.dist(center, j);
                d <= outer && d > inner
            })
            .collect();
        Ok(IndexSet::from_sorted_unchecked(self, members))
    }

    /// `B(x, s) Δ B(y, s)`.
    pub fn sym_diff(&self, x: usize, y: usize, s: f64) -> IndexSet {
        self.ball(x, s).sym_difference(&self.ball(y, s), self)
    }

    /// Greedy closed-ball net of `subset`: the first uncovered member (index
    /// order) becomes the next center and covers every member within `radius`.
    pub fn greedy_net(&self, subset: &IndexSet, radius: f64) -> Vec<usize> {
        let limit = ball_threshold(radius);
        self.greedy_cover(subset, |d| d <= limit)
    }

    /// Like [`greedy_net`](Self::greedy_net) but a center only covers members at
    /// distance strictly less than `radius`.
    pub fn greedy_net_open(&self, subset: &IndexSet, radius: f64) -> Vec<usize> {
        self.greedy_cover(subset, |d| d < radius)
    }

    fn greedy_cover(&self, subset: &IndexSet, covers: impl Fn(f64) -> bool) -> Vec<usize> {
        let members = subset.members();
        let mut covered = vec![false; members.len()];
        let mut centers = Vec::new();
        for a in 0..members.len() {
            if covered[a] {
                continue;
            }
            let c = members[a];
            centers.push(c);
            for (b, &m) in members.iter().enumerate().skip(a) {
                if !covered[b] && covers(self.dist(c, m)) {
                    covered[b] = true;
                }
            }
        }
        centers
    }

    /// Greedy packing of `subset`: scanning in index order, a member is kept when
    /// its distance to every kept center strictly exceeds `separation`.
    pub fn greedy_packing(&self, subset: &IndexSet, separation: f64) -> Vec<usize> {
        let mut centers: Vec<usize> = Vec::new();
        for &m in subset.members() {
            if centers.iter().all(|&c| self.dist(c, m) > separation) {
                centers.push(m);
            }
        }
        centers
    }
}

pub(crate) fn check_annulus_range(s: f64, delta: f64) -> Result<()> {
    if delta > 0.0 && delta < s {
        Ok(())
    } else {
        Err(Error::arg(format!(
            "annulus half-width must satisfy 0 < delta < s, got delta = {delta}, s = {s}"
        )))
    }
}

/// Anything that answers closed-ball queries on a space: the space itself
/// (linear scan) or a precomputed [`BallIndex`]. Both must return identical sets.
pub trait BallSource: Sync {
    fn space(&self) -> &MetricMeasureSpace;

    fn ball(&self, center: usize, radius: f64) -> IndexSet;

    fn annulus(&self, center: usize, s: f64, delta: f64) -> Result<IndexSet> {
        check_annulus_range(s, delta)?;
        let outer = self.ball(center, s + delta);
        let inner = self.ball(center, s - delta);
        Ok(outer.difference(&inner, self.space()))
    }
}

impl BallSource for MetricMeasureSpace {
    fn space(&self) -> &MetricMeasureSpace {
        self
    }

    fn ball(&self, center: usize, radius: f64) -> IndexSet {
        MetricMeasureSpace::ball(self, center, radius)
    }

    fn annulus(&self, center: usize, s: f64, delta: f64) -> Result<IndexSet> {
        MetricMeasureSpace::annulus(self, center, s, delta)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s3() -> MetricMeasureSpace {
        MetricMeasureSpace::unit_grid(2)
    }

    #[test]
    fn line_space_basics() {
        let s = s3();
        assert_eq!(s.len(), 3);
        assert_eq!(s.total_mass(), 3.0);
        assert_eq!(s.diameter(), 2.0);
    }

    #[test]
    fn balls_on_three_points() {
        let s = s3();
        let b = s.ball(1, 1.0);
        assert_eq!(b.members(), &[0, 1, 2]);
        assert_eq!(b.mass(), 3.0);
        let b = s.ball(0, 0.0);
        assert_eq!(b.members(), &[0]);
        assert_eq!(b.mass(), 1.0);
        let b = s.ball(0, 1.0);
        assert_eq!(b.members(), &[0, 1]);
        assert_eq!(b.mass(), 2.0);
    }

    #[test]
    fn annuli_on_three_points() {
        let s = s3();
        let a = s.annulus(1, 1.0, 0.5).unwrap();
        assert_eq!(a.members(), &[0, 2]);
        assert_eq!(a.mass(), 2.0);
        assert!(s.annulus(0, 0.4, 0.2).unwrap().is_empty());
        let a = s.annulus(1, 2.0, 0.5).unwrap();
        assert!(a.is_empty());
        assert_eq!(a.mass(), 0.0);
    }

    #[test]
    fn annulus_rejects_bad_half_width() {
        let s = s3();
        assert!(s.annulus(0, 1.0, 0.0).is_err());
        assert!(s.annulus(0, 1.0, 1.0).is_err());
        assert!(s.annulus(0, 1.0, -0.1).is_err());
    }

    #[test]
    fn symmetric_differences() {
        let s = s3();
        let d = s.sym_diff(0, 1, 1.0);
        assert_eq!(d.members(), &[2]);
        assert_eq!(d.mass(), 1.0);
        assert!(s.sym_diff(0, 0, 1.0).is_empty());
        let d = s.sym_diff(0, 2, 1.0);
        assert_eq!(d.members(), &[0, 2]);
        assert_eq!(d.mass(), 2.0);
    }

    #[test]
    fn nets() {
        let s = s3();
        assert_eq!(s.greedy_net(&s.all(), 1.0), vec![0, 2]);
        assert_eq!(s.greedy_net(&s.all(), 2.0), vec![0]);
        let single = IndexSet::new(&s, [1]).unwrap();
        assert_eq!(s.greedy_net(&single, 0.1), vec![1]);
    }

    #[test]
    fn open_net_needs_strict_distance() {
        let s = s3();
        assert_eq!(s.greedy_net_open(&s.all(), 1.0), vec![0, 1, 2]);
        assert_eq!(s.greedy_net_open(&s.all(), 1.5), vec![0, 2]);
    }

    #[test]
    fn packings() {
        let grid = MetricMeasureSpace::unit_grid(100);
        let centers = grid.greedy_packing(&grid.all(), 4.0);
        assert_eq!(centers, (0..=100).step_by(5).collect::<Vec<_>>());
        assert_eq!(centers.len(), 21);
        let s = s3();
        assert_eq!(s.greedy_packing(&s.all(), 4.0), vec![0]);
        assert_eq!(s.greedy_packing(&s.all(), 0.0), vec![0, 1, 2]);
    }

    #[test]
    fn packing_separation_is_strict() {
        let s = MetricMeasureSpace::unit_grid(4);
        assert_eq!(s.greedy_packing(&s.all(), 4.0), vec![0]);
    }

    #[test]
    fn single_point_space() {
        let s = MetricMeasureSpace::from_points(vec![vec![3.0, 4.0]], Some(vec![0.5])).unwrap();
        assert_eq!(s.ball(0, 0.0).mass(), 0.5);
        assert_eq!(s.ball(0, 10.0).members(), &[0]);
        assert_eq!(s.diameter(), 0.0);
        assert_eq!(s.min_positive_distance(), None);
    }

    #[test]
    fn weight_validation() {
        let err = MetricMeasureSpace::from_points(
            vec![vec![0.0], vec![1.0], vec![2.0]],
            Some(vec![1.0, 0.0, 1.0]),
        )
        .unwrap_err();
        assert!(err.to_string().contains("nonpositive weight at index 1"), "{err}");
        let err =
            MetricMeasureSpace::from_points(vec![vec![0.0], vec![1.0]], Some(vec![1.0])).unwrap_err();
        assert!(err.to_string().starts_with("weights:"), "{err}");
    }

    #[test]
    fn matrix_validation() {
        let err = MetricMeasureSpace::from_matrix(vec![vec![0.0, 1.0], vec![2.0, 0.0]], None)
            .unwrap_err();
        assert!(err.to_string().contains("asymmetric"), "{err}");
        let err = MetricMeasureSpace::from_matrix(vec![vec![0.0, -1.0], vec![-1.0, 0.0]], None)
            .unwrap_err();
        assert!(err.to_string().contains("negative"), "{err}");
        let err = MetricMeasureSpace::from_matrix(vec![vec![1.0, 1.0], vec![1.0, 0.0]], None)
            .unwrap_err();
        assert!(err.to_string().contains("diagonal"), "{err}");
        let err =
            MetricMeasureSpace::from_matrix(vec![vec![0.0, 1.0], vec![1.0]], None).unwrap_err();
        assert!(err.to_string().starts_with("distance_matrix[1]"), "{err}");
    }

    #[test]
    fn triangle_validation() {
        let ok = MetricMeasureSpace::from_matrix(
            vec![vec![0.0, 1.0, 2.0], vec![1.0, 0.0, 1.0], vec![2.0, 1.0, 0.0]],
            None,
        )
        .unwrap();
        assert!(ok.validate_triangle().is_ok());
        let bad = MetricMeasureSpace::from_matrix(
            vec![vec![0.0, 1.0, 5.0], vec![1.0, 0.0, 1.0], vec![5.0, 1.0, 0.0]],
            None,
        )
        .unwrap();
        assert!(bad.validate_triangle().is_err());
    }

    #[test]
    fn boundary_points_are_included() {
        // 0.1 * 3 is not exactly 0.3 in binary
        let s = MetricMeasureSpace::line_grid(4, 0.1, 1.0).unwrap();
        assert_eq!(s.ball(0, 0.3).members(), &[0, 1, 2, 3]);
    }
}
