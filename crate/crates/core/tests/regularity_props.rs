mod common;

use avgop::regularity::{
    inverse_measure_gap, star_modulus, symdiff_containment_check, symdiff_modulus, PairRange, PairTable,
};
use common::RawSpace;
use proptest::prelude::*;

fn raw_space() -> impl Strategy<Value = RawSpace> {
    (2usize..20, 1usize..3, any::<bool>()).prop_flat_map(|(n, dim, lattice)| {
        (
            prop::collection::vec(prop::collection::vec(0.0f64..6.0, dim), n),
            prop::collection::vec(0.1f64..3.0, n),
        )
            .prop_map(move |(points, weights)| RawSpace {
                points: points
                    .into_iter()
                    .map(|p| if lattice { p.into_iter().map(f64::round).collect() } else { p })
                    .collect(),
                weights,
            })
    })
}

/// `mu(B(x,s) Δ B(y,s))` from raw coordinates.
fn symdiff_oracle(raw: &RawSpace, x: usize, y: usize, s: f64) -> f64 {
    (0..raw.len())
        .filter(|&j| raw.in_ball(x, j, s) != raw.in_ball(y, j, s))
        .map(|j| raw.weights[j])
        .sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn symdiff_modulus_matches_brute_force(raw in raw_space(), s in 0.2f64..4.0, frac in 0.05f64..2.0) {
        let space = raw.space();
        let delta = s * frac;
        let mut want: f64 = 0.0;
        for x in 0..raw.len() {
            for y in x + 1..raw.len() {
                if raw.dist(x, y) < delta {
                    want = want.max(symdiff_oracle(&raw, x, y, s));
                }
            }
        }
        let got = symdiff_modulus(&space, s, delta).unwrap().value;
        prop_assert!((got - want).abs() <= 1e-12 * (1.0 + want));
    }

    #[test]
    fn containment_and_gap_bound_hold(raw in raw_space(), s in 0.2f64..4.0, frac in 0.01f64..0.99) {
        let space = raw.space();
        let delta = s * frac;
        prop_assert!(symdiff_containment_check(&space, s, delta).unwrap().holds());
        let gap = inverse_measure_gap(&space, s, delta).unwrap();
        prop_assert!(gap.max_gap <= gap.bound * (1.0 + 1e-12) + 1e-15);
    }

    #[test]
    fn star_modulus_is_monotone(raw in raw_space(), s in 0.2f64..4.0, a in 0.01f64..0.98, b in 0.01f64..0.98) {
        let space = raw.space();
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let small = star_modulus(&space, s, s * lo).unwrap().value;
        let large = star_modulus(&space, s, s * hi).unwrap().value;
        prop_assert!(small <= large);
    }

    #[test]
    fn closed_range_admits_more_pairs(raw in raw_space(), s in 0.2f64..4.0) {
        let space = raw.space();
        let open = PairTable::build(&space, s, 1.0, None, PairRange::Open).unwrap();
        let closed = PairTable::build(&space, s, 1.0, None, PairRange::Closed).unwrap();
        prop_assert!(open.pairs_within(1.0).len() <= closed.pairs_within(1.0).len());
        prop_assert!(open.symdiff_modulus(1.0).value <= closed.symdiff_modulus(1.0).value);
    }
}
