use rayon::prelude::*;

use super::{ball_threshold, BallSource, IndexSet, MetricMeasureSpace};

/// Per-center list of all atoms sorted by distance, for repeated multi-radius
/// ball queries. Costs O(n^2) memory and O(n^2 log n) to build; each query is a
/// binary search plus a sort of the hits.
#[derive(Debug, Clone)]
pub struct BallIndex<'a> {
    space: &'a MetricMeasureSpace,
    sorted: Vec<Vec<(f64, u32)>>,
}

impl<'a> BallIndex<'a> {
    pub fn new(space: &'a MetricMeasureSpace) -> Self {
        let n = space.len();
        let sorted = (0..n)
            .into_par_iter()
            .map(|c| {
                let mut row: Vec<(f64, u32)> = (0..n).map(|j| (space.dist(c, j), j as u32)).collect();
                row.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
                row
            })
            .collect();
        Self { space, sorted }
    }

    /// Number of atoms within the closed ball, without materializing it.
    pub fn count_within(&self, center: usize, radius: f64) -> usize {
        let limit = ball_threshold(radius);
        self.sorted[center].partition_point(|&(d, _)| d <= limit)
    }
}

impl BallSource for BallIndex<'_> {
    fn space(&self) -> &MetricMeasureSpace {
        self.space
    }

    fn ball(&self, center: usize, radius: f64) -> IndexSet {
        assert!(radius >= 0.0, "ball radius must be nonnegative, got {radius}");
        let hits = self.count_within(center, radius);
        let mut members: Vec<usize> = self.sorted[center][..hits]
            .iter()
            .map(|&(_, j)| j as usize)
            .collect();
        members.sort_unstable();
        IndexSet::from_sorted_unchecked(self.space, members)
    }
}
