//! Regularity diagnostics of a finite metric measure space at a scale `s`.
//!
//! * doubling constant `gamma(s) = max_x mu(B(x,2s)) / mu(B(x,s))`
//! * annulus modulus `w_star(s, delta) = max_x mu(B(x,s+delta) \ B(x,s-delta))`,
//!   for `0 < delta < s`
//! * symmetric-difference modulus `w_sym(s, delta) = max_{d(x,y) < delta} mu(B(x,s) Δ B(y,s))`
//! * inverse-measure gap `max_{d(x,y) < delta} |1/mu(B(x,s)) - 1/mu(B(y,s))|` and its
//!   bound `w_sym(s, delta) / a^2`, `a = min_x mu(B(x,s))`
//!
//! The `d(x,y) < delta` comparison is a plain IEEE strict comparison. Moduli
//! with no qualifying point pair are zero rather than errors. Argmax ties go to
//! the lowest index (lexicographically smallest pair).

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::space::{ball_threshold, BallIndex, BallSource, IndexSet, MetricMeasureSpace};

/// Default number of subdivisions of `(0, s)` for delta searches.
pub const DEFAULT_GRID: usize = 64;

fn check_scale(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::arg(format!("{name} must be positive, got {v}")))
    }
}

/// The grid `{scale * k / resolution : k = 1..=last}`.
pub fn delta_grid(scale: f64, resolution: usize, last: usize) -> Vec<f64> {
    (1..=last)
        .map(|k| scale * k as f64 / resolution as f64)
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Doubling {
    pub gamma: f64,
    pub argmax: usize,
}

fn doubling_over<B, I>(balls: &B, points: I, s: f64) -> Option<Doubling>
where
    B: BallSource + ?Sized,
    I: Iterator<Item = usize>,
{
    let mut best: Option<Doubling> = None;
    for x in points {
        let ratio = balls.ball(x, 2.0 * s).mass() / balls.ball(x, s).mass();
        if best.map_or(true, |b| ratio > b.gamma) {
            best = Some(Doubling { gamma: ratio, argmax: x });
        }
    }
    best
}

/// `gamma(s)`; always `>= 1`.
pub fn doubling_constant<B: BallSource + ?Sized>(balls: &B, s: f64) -> Result<Doubling> {
    check_scale("s", s)?;
    Ok(doubling_over(balls, 0..balls.space().len(), s).expect("spaces are nonempty"))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PointExtremum {
    pub value: f64,
    pub index: usize,
}

/// `a = min_x mu(B(x, s))`, positive because every atom has positive mass.
pub fn inf_ball<B: BallSource + ?Sized>(balls: &B, s: f64) -> PointExtremum {
    inf_ball_over(balls, 0..balls.space().len(), s).expect("spaces are nonempty")
}

fn inf_ball_over<B, I>(balls: &B, points: I, s: f64) -> Option<PointExtremum>
where
    B: BallSource + ?Sized,
    I: Iterator<Item = usize>,
{
    let mut best: Option<PointExtremum> = None;
    for x in points {
        let m = balls.ball(x, s).mass();
        if best.map_or(true, |b| m < b.value) {
            best = Some(PointExtremum { value: m, index: x });
        }
    }
    best
}

/// `sup_x mu(B(x, s))`.
pub fn sup_ball<B: BallSource + ?Sized>(balls: &B, s: f64) -> PointExtremum {
    let mut best = PointExtremum { value: f64::NEG_INFINITY, index: 0 };
    for x in 0..balls.space().len() {
        let m = balls.ball(x, s).mass();
        if m > best.value {
            best = PointExtremum { value: m, index: x };
        }
    }
    best
}

/// `w_star(s, delta)` with its maximizing center.
pub fn star_modulus<B: BallSource + ?Sized>(balls: &B, s: f64, delta: f64) -> Result<PointExtremum> {
    check_scale("s", s)?;
    let mut best = PointExtremum { value: 0.0, index: 0 };
    for x in 0..balls.space().len() {
        let m = balls.annulus(x, s, delta)?.mass();
        if m > best.value {
            best = PointExtremum { value: m, index: x };
        }
    }
    Ok(best)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DeltaChoice {
    pub delta: f64,
    pub modulus: f64,
}

/// Smallest `delta` on `{s k / grid : k = 1..grid-1}` with `w_star(s, delta) < epsilon`.
pub fn star_delta_for<B: BallSource + ?Sized>(
    balls: &B,
    s: f64,
    epsilon: f64,
    grid: usize,
) -> Result<Option<DeltaChoice>> {
    check_scale("s", s)?;
    check_scale("epsilon", epsilon)?;
    if grid < 2 {
        return Err(Error::arg("delta grid needs at least 2 subdivisions"));
    }
    for delta in delta_grid(s, grid, grid - 1) {
        let modulus = star_modulus(balls, s, delta)?.value;
        if modulus < epsilon {
            return Ok(Some(DeltaChoice { delta, modulus }));
        }
    }
    Ok(None)
}

/// A maximum over point pairs, with the lexicographically first maximizing pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PairExtremum {
    pub value: f64,
    pub pair: Option<(usize, usize)>,
}

impl PairExtremum {
    const EMPTY: PairExtremum = PairExtremum { value: 0.0, pair: None };

    fn offer(&mut self, value: f64, pair: (usize, usize)) {
        let better = match self.pair {
            None => true,
            Some(p) => value > self.value || (value == self.value && pair < p),
        };
        if better {
            self.value = value;
            self.pair = Some(pair);
        }
    }
}

/// Which pairs count as "within delta".
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairRange {
    /// `d(x, y) < delta`, plain IEEE comparison.
    Open,
    /// `d(x, y) <= delta` with the closed-ball tolerance.
    Closed,
}

impl PairRange {
    #[inline]
    fn admits(self, d: f64, delta: f64) -> bool {
        match self {
            PairRange::Open => d < delta,
            PairRange::Closed => d <= ball_threshold(delta),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairEntry {
    pub dist: f64,
    pub x: usize,
    pub y: usize,
    /// `mu(B(x,s) Δ B(y,s))`
    pub symdiff: f64,
    /// `|1/mu(B(x,s)) - 1/mu(B(y,s))|`
    pub inverse_gap: f64,
}

/// All unordered pairs `x < y` (optionally restricted to a subset) within
/// `max_delta`, sorted by distance, with running maxima of the symmetric-difference
/// mass and the inverse-measure gap. One table answers every `delta <= max_delta`.
#[derive(Debug, Clone)]
pub struct PairTable {
    s: f64,
    max_delta: f64,
    range: PairRange,
    entries: Vec<PairEntry>,
    running_symdiff: Vec<PairExtremum>,
    running_gap: Vec<PairExtremum>,
}

impl PairTable {
    pub fn build(
        space: &MetricMeasureSpace,
        s: f64,
        max_delta: f64,
        subset: Option<&IndexSet>,
        range: PairRange,
    ) -> Result<Self> {
        check_scale("s", s)?;
        check_scale("delta", max_delta)?;
        let points: Vec<usize> = match subset {
            Some(e) => e.members().to_vec(),
            None => (0..space.len()).collect(),
        };
        let balls: Vec<IndexSet> = (0..space.len()).into_par_iter().map(|x| space.ball(x, s)).collect();
        let weights = space.weights();
        let mut entries: Vec<PairEntry> = points
            .par_iter()
            .enumerate()
            .flat_map_iter(|(a, &x)| {
                let balls = &balls;
                points[a + 1..].iter().filter_map(move |&y| {
                    let d = space.dist(x, y);
                    range.admits(d, max_delta).then(|| PairEntry {
                        dist: d,
                        x,
                        y,
                        symdiff: balls[x].sym_difference_mass(&balls[y], weights),
                        inverse_gap: (1.0 / balls[x].mass() - 1.0 / balls[y].mass()).abs(),
                    })
                })
            })
            .collect();
        entries.sort_by(|a, b| a.dist.total_cmp(&b.dist).then((a.x, a.y).cmp(&(b.x, b.y))));
        let mut sym = PairExtremum::EMPTY;
        let mut gap = PairExtremum::EMPTY;
        let mut running_symdiff = Vec::with_capacity(entries.len());
        let mut running_gap = Vec::with_capacity(entries.len());
        for e in &entries {
            sym.offer(e.symdiff, (e.x, e.y));
            gap.offer(e.inverse_gap, (e.x, e.y));
            running_symdiff.push(sym);
            running_gap.push(gap);
        }
        Ok(Self {
            s,
            max_delta,
            range,
            entries,
            running_symdiff,
            running_gap,
        })
    }

    pub fn scale(&self) -> f64 {
        self.s
    }

    fn prefix_len(&self, delta: f64) -> usize {
        assert!(
            delta <= self.max_delta,
            "query delta {delta} exceeds table range {}",
            self.max_delta
        );
        let range = self.range;
        self.entries.partition_point(|e| range.admits(e.dist, delta))
    }

    /// Pairs within `delta`, in distance order.
    pub fn pairs_within(&self, delta: f64) -> &[PairEntry] {
        &self.entries[..self.prefix_len(delta)]
    }

    pub fn symdiff_modulus(&self, delta: f64) -> PairExtremum {
        match self.prefix_len(delta) {
            0 => PairExtremum::EMPTY,
            k => self.running_symdiff[k - 1],
        }
    }

    pub fn max_inverse_gap(&self, delta: f64) -> PairExtremum {
        match self.prefix_len(delta) {
            0 => PairExtremum::EMPTY,
            k => self.running_gap[k - 1],
        }
    }
}

/// `w_sym(s, delta)` over all pairs with `d(x, y) < delta`.
pub fn symdiff_modulus(space: &MetricMeasureSpace, s: f64, delta: f64) -> Result<PairExtremum> {
    Ok(PairTable::build(space, s, delta, None, PairRange::Open)?.symdiff_modulus(delta))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InverseGap {
    pub max_gap: f64,
    pub pair: Option<(usize, usize)>,
    pub symdiff_modulus: f64,
    pub inf_ball: f64,
    /// `symdiff_modulus / inf_ball^2`; always `>= max_gap`.
    pub bound: f64,
}

fn inverse_gap_from(table: &PairTable, delta: f64, inf_ball: f64) -> InverseGap {
    let gap = table.max_inverse_gap(delta);
    let sym = table.symdiff_modulus(delta).value;
    InverseGap {
        max_gap: gap.value,
        pair: gap.pair,
        symdiff_modulus: sym,
        inf_ball,
        bound: sym / (inf_ball * inf_ball),
    }
}

pub fn inverse_measure_gap(space: &MetricMeasureSpace, s: f64, delta: f64) -> Result<InverseGap> {
    let table = PairTable::build(space, s, delta, None, PairRange::Open)?;
    Ok(inverse_gap_from(&table, delta, inf_ball(space, s).value))
}

/// Same as [`inverse_measure_gap`] but over pairs with `d(x, y) <= delta`.
pub fn inverse_measure_gap_closed(space: &MetricMeasureSpace, s: f64, delta: f64) -> Result<InverseGap> {
    let table = PairTable::build(space, s, delta, None, PairRange::Closed)?;
    Ok(inverse_gap_from(&table, delta, inf_ball(space, s).value))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ContainmentViolation {
    pub x: usize,
    pub y: usize,
    pub symdiff: f64,
    pub annulus_sum: f64,
}

/// Outcome of checking `mu(B(x,s) Δ B(y,s)) <= mu(ann(x)) + mu(ann(y))` for every
/// pair with `d(x, y) < delta`, where `ann(z) = B(z, s+delta) \ B(z, s-delta)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContainmentCheck {
    pub s: f64,
    pub delta: f64,
    pub pairs_checked: usize,
    /// Smallest `annulus_sum - symdiff` over checked pairs (`None` if no pair).
    pub min_slack: Option<f64>,
    /// Largest `annulus_sum - symdiff` over checked pairs.
    pub max_slack: Option<f64>,
    pub violations: Vec<ContainmentViolation>,
}

impl ContainmentCheck {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks the symmetric-difference/annulus containment. The containment is a
/// consequence of the triangle inequality, so a violation means either a bug
/// or a distance matrix that is not a metric.
pub fn symdiff_containment_check(space: &MetricMeasureSpace, s: f64, delta: f64) -> Result<ContainmentCheck> {
    let table = PairTable::build(space, s, delta, None, PairRange::Open)?;
    let annuli: Vec<f64> = (0..space.len())
        .map(|x| space.annulus(x, s, delta).map(|a| a.mass()))
        .collect::<Result<_>>()?;
    Ok(containment_from(&table, &annuli, s, delta))
}

fn containment_from(table: &PairTable, annuli: &[f64], s: f64, delta: f64) -> ContainmentCheck {
    let mut check = ContainmentCheck {
        s,
        delta,
        pairs_checked: 0,
        min_slack: None,
        max_slack: None,
        violations: Vec::new(),
    };
    for e in table.pairs_within(delta) {
        let annulus_sum = annuli[e.x] + annuli[e.y];
        let slack = annulus_sum - e.symdiff;
        check.pairs_checked += 1;
        check.min_slack = Some(check.min_slack.map_or(slack, |m: f64| m.min(slack)));
        check.max_slack = Some(check.max_slack.map_or(slack, |m: f64| m.max(slack)));
        if e.symdiff > annulus_sum + 1e-12 * (1.0 + annulus_sum) {
            check.violations.push(ContainmentViolation {
                x: e.x,
                y: e.y,
                symdiff: e.symdiff,
                annulus_sum,
            });
        }
    }
    check
}

/// Finite witnesses of total boundedness of a subset `E` at scale `s`: a
/// finite `s`-net, a positive lower bound on ball masses, and a finite doubling
/// ratio, all restricted to `E`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundedSetReport {
    pub s: f64,
    pub net_size: usize,
    pub inf_ball_on_subset: f64,
    pub doubling_on_subset: f64,
}

pub fn bounded_set_report(space: &MetricMeasureSpace, subset: &IndexSet, s: f64) -> Result<BoundedSetReport> {
    check_scale("s", s)?;
    if subset.is_empty() {
        return Err(Error::arg("subset must be nonempty"));
    }
    let net_size = space.greedy_net(subset, s).len();
    let inf = inf_ball_over(space, subset.iter(), s).expect("nonempty subset");
    let dbl = doubling_over(space, subset.iter(), s).expect("nonempty subset");
    Ok(BoundedSetReport {
        s,
        net_size,
        inf_ball_on_subset: inf.value,
        doubling_on_subset: dbl.gamma,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StarRow {
    pub delta: f64,
    pub value: f64,
    pub argmax: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PairRow {
    pub delta: f64,
    pub symdiff: f64,
    pub symdiff_pair: Option<(usize, usize)>,
    pub max_inverse_gap: f64,
    pub inverse_gap_bound: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ContainmentSummary {
    pub deltas_checked: usize,
    pub pairs_checked: usize,
    pub min_slack: Option<f64>,
    pub violations: usize,
}

/// Every regularity quantity at one scale `s`.
///
/// The annulus table uses `delta = s k / grid` for `k = 1..grid-1` (the range
/// `0 < delta < s`); the pair tables extend to `k = 1..=2 grid` because the
/// symmetric-difference property places no upper limit on `delta`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegularityReport {
    pub s: f64,
    pub gamma: Doubling,
    pub inf_ball: PointExtremum,
    pub star_modulus: Vec<StarRow>,
    pub symdiff_modulus: Vec<PairRow>,
    pub containment: ContainmentSummary,
    pub bounded_set: BoundedSetReport,
}

pub fn regularity_report(
    space: &MetricMeasureSpace,
    s: f64,
    grid: usize,
    subset: &IndexSet,
    index: Option<&BallIndex<'_>>,
) -> Result<RegularityReport> {
    check_scale("s", s)?;
    if grid < 2 {
        return Err(Error::arg("delta grid needs at least 2 subdivisions"));
    }
    let balls: &dyn BallSource = match index {
        Some(i) => i,
        None => space,
    };
    let gamma = doubling_constant(balls, s)?;
    let inf = inf_ball(balls, s);
    let star_deltas = delta_grid(s, grid, grid - 1);
    let pair_deltas = delta_grid(s, grid, 2 * grid);
    let max_pair_delta = *pair_deltas.last().expect("grid is nonempty");
    let table = PairTable::build(space, s, max_pair_delta, None, PairRange::Open)?;

    let mut star_modulus = Vec::with_capacity(star_deltas.len());
    let mut containment = ContainmentSummary {
        deltas_checked: 0,
        pairs_checked: 0,
        min_slack: None,
        violations: 0,
    };
    for &delta in &star_deltas {
        let annuli: Vec<f64> = (0..space.len())
            .map(|x| balls.annulus(x, s, delta).map(|a| a.mass()))
            .collect::<Result<_>>()?;
        let (mut value, mut argmax) = (0.0, 0);
        for (x, &m) in annuli.iter().enumerate() {
            if m > value {
                value = m;
                argmax = x;
            }
        }
        star_modulus.push(StarRow { delta, value, argmax });
        let check = containment_from(&table, &annuli, s, delta);
        containment.deltas_checked += 1;
        containment.pairs_checked += check.pairs_checked;
        containment.violations += check.violations.len();
        if let Some(m) = check.min_slack {
            containment.min_slack = Some(containment.min_slack.map_or(m, |c: f64| c.min(m)));
        }
    }
    let symdiff_modulus = pair_deltas
        .iter()
        .map(|&delta| {
            let g = inverse_gap_from(&table, delta, inf.value);
            let sym = table.symdiff_modulus(delta);
            PairRow {
                delta,
                symdiff: sym.value,
                symdiff_pair: sym.pair,
                max_inverse_gap: g.max_gap,
                inverse_gap_bound: g.bound,
            }
        })
        .collect();
    Ok(RegularityReport {
        s,
        gamma,
        inf_ball: inf,
        star_modulus,
        symdiff_modulus,
        containment,
        bounded_set: bounded_set_report(space, subset, s)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s3() -> MetricMeasureSpace {
        MetricMeasureSpace::unit_grid(2)
    }

    #[test]
    fn doubling_on_three_points() {
        let d = doubling_constant(&s3(), 1.0).unwrap();
        assert_eq!(d, Doubling { gamma: 1.5, argmax: 0 });
        let single = MetricMeasureSpace::from_points(vec![vec![1.0]], None).unwrap();
        assert_eq!(doubling_constant(&single, 0.3).unwrap().gamma, 1.0);
        assert_eq!(doubling_constant(&s3(), 2.0).unwrap().gamma, 1.0);
        assert!(doubling_constant(&s3(), 0.0).is_err());
    }

    #[test]
    fn star_modulus_on_three_points() {
        let m = star_modulus(&s3(), 1.0, 0.5).unwrap();
        assert_eq!(m, PointExtremum { value: 2.0, index: 1 });
        assert_eq!(star_modulus(&s3(), 6.0, 3.0).unwrap().value, 0.0);
        let single = MetricMeasureSpace::from_points(vec![vec![0.0]], None).unwrap();
        assert_eq!(star_modulus(&single, 1.0, 0.5).unwrap().value, 0.0);
        assert!(star_modulus(&s3(), 1.0, 1.0).is_err());
    }

    #[test]
    fn star_delta_search() {
        // shells at distances 1 and 2 only; s = 1.5 sits between them
        let s = s3();
        let c = star_delta_for(&s, 1.5, 0.5, 64).unwrap().unwrap();
        assert_eq!(c.delta, 1.5 / 64.0);
        assert_eq!(c.modulus, 0.0);
        let c = star_delta_for(&s, 1.0, 10.0, 64).unwrap().unwrap();
        assert_eq!(c.delta, 1.0 / 64.0);
        // at s = 1 every annulus contains the distance-1 neighbours
        let brute_absent = delta_grid(1.0, 64, 63)
            .into_iter()
            .all(|d| star_modulus(&s, 1.0, d).unwrap().value >= 1.5);
        assert_eq!(star_delta_for(&s, 1.0, 1.5, 64).unwrap().is_none(), brute_absent);
    }

    #[test]
    fn symdiff_modulus_on_three_points() {
        let s = s3();
        assert_eq!(symdiff_modulus(&s, 1.0, 1.0).unwrap(), PairExtremum { value: 0.0, pair: None });
        let m = symdiff_modulus(&s, 1.0, 1.5).unwrap();
        assert_eq!(m, PairExtremum { value: 1.0, pair: Some((0, 1)) });
        let m = symdiff_modulus(&s, 1.0, 2.5).unwrap();
        assert_eq!(m, PairExtremum { value: 2.0, pair: Some((0, 2)) });
    }

    #[test]
    fn inverse_gap_on_three_points() {
        let g = inverse_measure_gap(&s3(), 1.0, 1.5).unwrap();
        assert!((g.max_gap - 1.0 / 6.0).abs() < 1e-15);
        assert_eq!(g.inf_ball, 2.0);
        assert_eq!(g.symdiff_modulus, 1.0);
        assert_eq!(g.bound, 0.25);
        assert_eq!(inverse_measure_gap(&s3(), 1.0, 0.5).unwrap().max_gap, 0.0);
        // a cycle has equal ball masses everywhere
        let n = 12;
        let ring = MetricMeasureSpace::from_points(
            (0..n)
                .map(|k| {
                    let t = std::f64::consts::TAU * k as f64 / n as f64;
                    vec![t.cos(), t.sin()]
                })
                .collect(),
            None,
        )
        .unwrap();
        assert_eq!(inverse_measure_gap(&ring, 0.9, 0.6).unwrap().max_gap, 0.0);
    }

    #[test]
    fn closed_pairs_include_the_boundary() {
        let s = s3();
        assert_eq!(inverse_measure_gap(&s, 1.0, 1.0).unwrap().max_gap, 0.0);
        assert!((inverse_measure_gap_closed(&s, 1.0, 1.0).unwrap().max_gap - 1.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn containment_on_three_points() {
        let c = symdiff_containment_check(&s3(), 1.0, 0.5).unwrap();
        assert!(c.holds());
        assert_eq!(c.pairs_checked, 0);
        let c = symdiff_containment_check(&s3(), 1.5, 1.2).unwrap();
        assert!(c.holds());
        assert_eq!(c.pairs_checked, 2);
    }

    #[test]
    fn bounded_set_reports() {
        let s = s3();
        let r = bounded_set_report(&s, &s.all(), 1.0).unwrap();
        assert_eq!((r.net_size, r.inf_ball_on_subset, r.doubling_on_subset), (2, 2.0, 1.5));
        let one = IndexSet::new(&s, [2]).unwrap();
        assert_eq!(bounded_set_report(&s, &one, 0.5).unwrap().net_size, 1);
        let empty = IndexSet::new(&s, []).unwrap();
        assert!(bounded_set_report(&s, &empty, 1.0).is_err());

        let grid = MetricMeasureSpace::unit_grid(100);
        let r = bounded_set_report(&grid, &grid.all(), 1.0).unwrap();
        assert_eq!(r.net_size, 51);
        assert_eq!(r.inf_ball_on_subset, 2.0);
        assert!((r.doubling_on_subset - 5.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn report_tables_are_consistent() {
        let s = MetricMeasureSpace::unit_grid(10);
        let index = BallIndex::new(&s);
        let a = regularity_report(&s, 2.0, 16, &s.all(), None).unwrap();
        let b = regularity_report(&s, 2.0, 16, &s.all(), Some(&index)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.star_modulus.len(), 15);
        assert_eq!(a.symdiff_modulus.len(), 32);
        assert_eq!(a.containment.violations, 0);
        for w in a.star_modulus.windows(2) {
            assert!(w[0].value <= w[1].value);
        }
        for w in a.symdiff_modulus.windows(2) {
            assert!(w[0].symdiff <= w[1].symdiff);
            assert!(w[0].max_inverse_gap <= w[1].max_inverse_gap);
        }
    }
}
