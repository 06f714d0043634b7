mod common;

use avgop::compactness::{
    build_net_certificate, covering_number, equicontinuity_modulus, kolmogorov_riesz_check, lp_oscillation_modulus,
    unit_ball_sample, verify_certificate, CertificateOutcome, FunctionFamily, KrConfig, ModulusConfig, ModulusOutcome,
};
use avgop::counterexample::{l1_witnesses, linf_witnesses};
use avgop::operator::{AveragingOperator, Exponent, FunctionVec};
use avgop::regularity::delta_grid;
use avgop::space::MetricMeasureSpace;
use common::{dense_apply, RawSpace};
use proptest::prelude::*;

fn config(r: f64, grid: usize) -> ModulusConfig {
    ModulusConfig {
        grid,
        sigma_grid: delta_grid(r, grid, grid),
    }
}

fn s3() -> MetricMeasureSpace {
    MetricMeasureSpace::line_grid(3, 1.0, 1.0).unwrap()
}

fn exponent() -> impl Strategy<Value = Exponent> {
    prop_oneof![Just(1.0), Just(2.0), Just(f64::INFINITY)].prop_map(|p| Exponent::new(p).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// Construction and verification are separate code paths; the second must
    /// accept whatever the first returns.
    #[test]
    fn built_certificates_verify(
        n in 2usize..40,
        spacing in 0.05f64..1.0,
        weight in 0.05f64..2.0,
        p in exponent(),
        epsilon in 0.3f64..1.5,
        seed in 0u64..1000,
    ) {
        let raw = RawSpace::line(n, spacing, weight);
        let space = raw.space();
        let r = 1.0;
        let family = unit_ball_sample(&space, p, 12, seed).unwrap();
        let op = AveragingOperator::assemble(&space, r).unwrap();
        let subset = space.all();
        if let CertificateOutcome::Built(cert) =
            build_net_certificate(&space, r, &family, &subset, epsilon, &config(r, 16)).unwrap()
        {
            let check = verify_certificate(&space, &op, &family, &cert).unwrap();
            prop_assert!(check.passed);
            prop_assert!(check.achieved_radius < epsilon);
            prop_assert!(cert.net_size() <= family.len());
            // pointwise: |A f(x) - A f_a(x)| < 4 w on E
            let dense = raw.dense_operator(r);
            for (k, f) in family.functions().iter().enumerate() {
                let rep = cert.representatives[cert.assignment[k]];
                let a = dense_apply(&dense, f.values());
                let b = dense_apply(&dense, family.functions()[rep].values());
                for x in 0..n {
                    prop_assert!((a[x] - b[x]).abs() < 4.0 * cert.half_width);
                }
            }
        }
    }

    #[test]
    fn kr_tail_is_nonincreasing_and_condition1_saturates(
        n in 2usize..30,
        p in exponent(),
        seed in 0u64..1000,
    ) {
        let raw = RawSpace { points: (0..n).map(|i| vec![(i * i % 7) as f64, i as f64 * 0.3]).collect(), weights: (0..n).map(|i| 0.5 + (i % 4) as f64 * 0.3).collect() };
        let space = raw.space();
        let family = unit_ball_sample(&space, p, 8, seed).unwrap();
        let diameter = space.diameter();
        let report = kolmogorov_riesz_check(&space, &family, &KrConfig {
            sigma_grid: vec![diameter * 1.01, diameter * 0.3],
            radius_grid: vec![0.0, diameter * 0.25, diameter * 0.5, diameter * 0.75, diameter * 1.01],
            reference: 0,
            target: 0.1,
        }).unwrap();
        for w in report.condition2.windows(2) {
            prop_assert!(w[1].value <= w[0].value);
        }
        prop_assert_eq!(report.condition2.last().unwrap().value, 0.0);
        // sigma >= diameter: A_sigma f is the weighted mean everywhere
        let total: f64 = raw.weights.iter().sum();
        let want = family.functions().iter().map(|f| {
            let mean = f.values().iter().zip(&raw.weights).map(|(v, w)| v * w).sum::<f64>() / total;
            let diff: Vec<f64> = f.values().iter().map(|v| mean - v).collect();
            raw.norm(&diff, p.value())
        }).fold(0.0, f64::max);
        let got = report.condition1.last().unwrap().value;
        prop_assert!((got - want).abs() <= 1e-12 * (1.0 + want));
    }
}

#[test]
fn single_function_family_gives_one_tuple() {
    let space = MetricMeasureSpace::unit_grid(10);
    let family = FunctionFamily::new(
        &space,
        vec![FunctionVec::new((0..11).map(|i| (i as f64 * 0.3).sin()).collect()).unwrap()],
        Exponent::INFINITY,
    )
    .unwrap();
    let CertificateOutcome::Built(cert) =
        build_net_certificate(&space, 1.0, &family, &space.all(), 0.5, &config(1.0, 64)).unwrap()
    else {
        panic!("certificate failed");
    };
    assert_eq!(cert.net_size(), 1);
    assert_eq!(cert.achieved_radius, 0.0);
}

#[test]
fn constants_on_three_points_fit_five_tuples() {
    let space = s3();
    let functions = (0..=10).map(|c| FunctionVec::constant(3, c as f64 / 10.0)).collect();
    let family = FunctionFamily::new(&space, functions, Exponent::INFINITY).unwrap();
    let CertificateOutcome::Built(cert) =
        build_net_certificate(&space, 1.0, &family, &space.all(), 0.5, &config(1.0, 64)).unwrap()
    else {
        panic!("certificate failed");
    };
    assert!(cert.net_size() <= 5, "{} tuples", cert.net_size());
    let op = AveragingOperator::assemble(&space, 1.0).unwrap();
    let check = verify_certificate(&space, &op, &family, &cert).unwrap();
    assert!(check.passed && check.achieved_radius < 0.5);
}

#[test]
fn random_l1_family_on_short_grid_certifies() {
    let space = MetricMeasureSpace::unit_grid(20);
    let family = unit_ball_sample(&space, Exponent::ONE, 50, 11).unwrap();
    let CertificateOutcome::Built(cert) =
        build_net_certificate(&space, 2.0, &family, &space.all(), 0.8, &config(2.0, 64)).unwrap()
    else {
        panic!("certificate failed");
    };
    let op = AveragingOperator::assemble(&space, 2.0).unwrap();
    let check = verify_certificate(&space, &op, &family, &cert).unwrap();
    assert!(check.passed && check.achieved_radius < 0.8);

    let mut trivial = cert.clone();
    trivial.representatives = (0..family.len()).collect();
    assert_eq!(verify_certificate(&space, &op, &family, &trivial).unwrap().achieved_radius, 0.0);
}

#[test]
fn equicontinuity_on_grid_with_sign_vectors() {
    let space = MetricMeasureSpace::unit_grid(100);
    let family = unit_ball_sample(&space, Exponent::INFINITY, 20, 4).unwrap();
    let report = equicontinuity_modulus(&space, 1.0, &family, &[0.5], 64, &space.all()).unwrap();
    let row = &report.rows[0];
    assert!(row.delta.is_some());
    assert!(row.verified);
    assert!(row.measured_oscillation.unwrap() < 0.5);

    let constants = FunctionFamily::new(
        &space,
        vec![FunctionVec::constant(101, 0.7), FunctionVec::constant(101, -0.2)],
        Exponent::INFINITY,
    )
    .unwrap();
    let report = equicontinuity_modulus(&space, 1.0, &constants, &[0.5], 64, &space.all()).unwrap();
    assert!(report.rows[0].measured_oscillation.unwrap_or(0.0) <= 1e-15);
}

#[test]
fn oscillation_modulus_constants_on_three_points() {
    let space = s3();
    let family =
        FunctionFamily::new(&space, vec![FunctionVec::new(vec![1.0, 0.0, 0.0]).unwrap()], Exponent::new(2.0).unwrap())
            .unwrap();
    let ModulusOutcome::Found(m) = lp_oscillation_modulus(&space, 1.0, &family, &space.all(), 1.0, &config(1.0, 64)).unwrap()
    else {
        panic!("no delta");
    };
    assert_eq!((m.c1, m.c2, m.c3), (1.0, 3.0, 2.0));
    // (epsilon c3 / (2 c1))^q with q = 2
    assert!((m.symdiff_threshold - 1.0).abs() < 1e-15);
    assert!((m.gap_threshold - 0.5 / 3f64.sqrt()).abs() < 1e-15);
    assert!(m.verified);
}

#[test]
fn oscillation_modulus_for_l1_witnesses() {
    let space = MetricMeasureSpace::unit_grid(20);
    let witnesses = l1_witnesses(&space, 1.0).unwrap();
    let family = FunctionFamily::new(&space, witnesses.witnesses.clone(), Exponent::ONE).unwrap();
    let ModulusOutcome::Found(m) =
        lp_oscillation_modulus(&space, 1.0, &family, &space.all(), 0.1, &config(1.0, 64)).unwrap()
    else {
        panic!("no delta");
    };
    assert!(m.verified);
    assert!(m.sigma.is_some() && m.c4.is_some());
    assert!(m.measured_oscillation < 0.1);
}

#[test]
fn linf_witnesses_need_one_ball_each() {
    let space = MetricMeasureSpace::unit_grid(100);
    let family = linf_witnesses(&space, 1.0).unwrap();
    assert_eq!(family.len(), 21);
    assert_eq!(covering_number(&space, &family.images, Exponent::INFINITY, 0.5).unwrap(), 21);
}

/// Fixed length, finer and finer spacing: the certificate keeps working and its
/// size does not follow the point count.
#[test]
fn refinement_keeps_certificates_small() {
    let length = 4.0;
    let (r, epsilon) = (1.0, 1.0);
    let mut sizes = Vec::new();
    for k in 4..=10 {
        let h = length / f64::powi(2.0, k);
        let n = (1usize << k) + 1;
        let space = MetricMeasureSpace::line_grid(n, h, h).unwrap();
        let functions = (1..=12)
            .map(|j| {
                FunctionVec::new(
                    (0..n)
                        .map(|i| {
                            let x = i as f64 * h;
                            if j % 2 == 0 { (j as f64 * x).sin() } else { (j as f64 * x).cos().signum() }
                        })
                        .collect(),
                )
                .unwrap()
            })
            .collect();
        let family = FunctionFamily::new(&space, functions, Exponent::INFINITY).unwrap();
        let CertificateOutcome::Built(cert) =
            build_net_certificate(&space, r, &family, &space.all(), epsilon, &config(r, 64)).unwrap()
        else {
            panic!("certificate failed at level {k}");
        };
        let op = AveragingOperator::assemble(&space, r).unwrap();
        assert!(verify_certificate(&space, &op, &family, &cert).unwrap().passed);
        sizes.push((n, cert.centers.len(), cert.net_size()));
    }
    // coarse levels put a center on every point; fine levels do not
    for &(n, centers, tuples) in &sizes {
        assert!(tuples <= 9, "{tuples} tuples at {n} points");
        if n >= 129 {
            assert!(2 * centers <= n + 1, "{centers} centers at {n} points");
        }
    }
}

#[test]
fn covering_number_on_two_images() {
    let space = MetricMeasureSpace::unit_grid(2);
    let a = FunctionVec::new(vec![0.0, 0.0, 0.0]).unwrap();
    let b = FunctionVec::new(vec![1.0, 0.0, 0.0]).unwrap();
    let images = vec![a, b];
    assert_eq!(covering_number(&space, &images, Exponent::ONE, 1.5).unwrap(), 1);
    assert_eq!(covering_number(&space, &images, Exponent::ONE, 0.5).unwrap(), 2);
    assert!(covering_number(&space, &images, Exponent::ONE, 0.0).is_err());
}
