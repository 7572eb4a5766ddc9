use super::*;
use crate::numerics::gaussian_samples;
use proptest::prelude::*;

fn init(b1: f64, b2: f64, b3: f64, tau: f64) -> DynamicsInitial {
    DynamicsInitial::new(0.03, b1, b2, b3, tau).unwrap()
}

#[test]
fn validation() {
    assert!(matches!(DynamicsInitial::new(0.0, 0.0, 1.0, 0.0, 1.0), Err(Error::Consistency(_))));
    assert!(matches!(DynamicsInitial::new(0.0, 0.0, 1.0, -1.0, 1.0), Err(Error::Consistency(_))));
    assert!(matches!(DynamicsInitial::new(0.0, 0.0, 1.0, 1.0, 0.0), Err(Error::Validation(_))));
    let p = CurveParams::new([0.0, 1.0, 2.0, 3.0], 2.0, 1.0).unwrap();
    assert_eq!(DynamicsInitial::from_params(&p).unwrap().beta2(), 2.0);
    let q = CurveParams::new([0.0, 1.0, 2.0, 3.0], 2.0, 1.5).unwrap();
    assert!(DynamicsInitial::from_params(&q).is_err());
}

#[test]
fn evolution_examples() {
    let d = init(0.5, 1.0, 1.0, 1.0);
    let (p, g1) = evolve_params(&d, 0.0).unwrap();
    assert_eq!(p.beta(), [0.03, 0.5, 1.0, 1.0]);
    assert_eq!(g1, 1.0);
    let (p, g1) = evolve_params(&d, 2f64.ln()).unwrap();
    assert!((g1 - 2.0).abs() < 1e-14);
    assert_eq!(p.tau2(), 0.5);
    assert!((p.beta2() - 0.5).abs() < 1e-15);
    assert!((p.beta3() - 0.25).abs() < 1e-15);
    assert!(evolve_params(&d, -1.0).is_err());
}

#[test]
fn law_examples() {
    let d = init(0.7, 0.2, 2.0, 1.5);
    let (m, v) = gamma2_law(&d, 0.0).unwrap();
    assert!((m - 0.35).abs() < 1e-15 && v == 0.0);
    let d = init(0.0, 0.0, 1.0, 1.0);
    let (m, v) = gamma2_law(&d, 1.0).unwrap();
    let e = 1f64.exp();
    assert!((m - (2.0 * e - 2.0)).abs() < 1e-14);
    assert!((v - 2.0 * e * e).abs() < 1e-13);
}

#[test]
fn exact_sampler_moments() {
    let d = init(0.4, -0.3, 1.2, 2.0);
    let t = 1.3;
    let (m, v) = gamma2_law(&d, t).unwrap();
    let n = 100_000;
    let xs = gaussian_samples(m, v.sqrt(), n, 11).unwrap();
    let sm = xs.iter().sum::<f64>() / n as f64;
    let sv = xs.iter().map(|x| (x - sm).powi(2)).sum::<f64>() / (n - 1) as f64;
    assert!((sm - m).abs() < 4.0 * (v / n as f64).sqrt());
    assert!((sv - v).abs() < 4.0 * v * (2.0 / n as f64).sqrt());
}

#[test]
fn horizon_examples() {
    let h = horizons(&init(0.0, 4.0, 1.0, 1.0)).unwrap();
    assert_eq!(h.t_dagger_f, 0.0);
    let h = horizons(&init(0.0, 4.0 * (-3.5f64).exp(), 1.0, 1.0)).unwrap();
    assert!((h.t_dagger_f - 1.0).abs() < 1e-12);
    assert!(h.t_dagger_y < h.t_dagger_f);
    assert_eq!(h.branch, Some(Sign::Positive));
    let h = horizons(&init(0.0, -1.25, 1.0, 1.0)).unwrap();
    assert!(h.t_star_star_y.abs() < 1e-15);
    assert!((h.t_star_f - (6.0f64 / 1.25).ln()).abs() < 1e-14);
    assert!(h.t_star_star_y <= h.t_star_y);
    let h = horizons(&init(0.0, 0.0, 1.0, 1.0)).unwrap();
    assert!(h.degenerate && h.branch.is_none() && h.t_dagger_f == 0.0);
}

#[test]
fn horizons_scale_with_tau1() {
    let a = horizons(&init(0.0, 0.01, 1.0, 1.0)).unwrap();
    let b = horizons(&init(0.0, 0.01, 1.0, 3.0)).unwrap();
    assert!((b.t_dagger_f - 3.0 * a.t_dagger_f).abs() < 1e-12);
    assert!((b.t_dagger_y - 3.0 * a.t_dagger_y).abs() < 1e-12);
}

#[test]
fn yield_cusp_between_origin_and_forward_cusp() {
    let c = yield_cusp_gamma1().unwrap();
    assert!(c > 0.0 && c < 4.0 * (-2.5f64).exp(), "{c}");
}

#[test]
fn long_run() {
    assert_eq!(long_run_shape(&init(0.0, 1.0, 1.0, 1.0)).unwrap(), ShapeTag::I);
    assert_eq!(long_run_shape(&init(0.0, -1.0, 1.0, 1.0)).unwrap(), ShapeTag::N);
    assert!(matches!(long_run_shape(&init(0.0, 0.0, 1.0, 1.0)), Err(Error::Undetermined(_))));
}

#[test]
fn lambert_bounds_order() {
    let d = init(0.0, 0.02, 1.0, 1.5);
    let h = horizons(&d).unwrap();
    let t = 0.98 * h.t_dagger_f;
    let b = forward_lambert_bounds(&d, t).unwrap();
    let (x0, x1) = (b.x0.unwrap(), b.x_minus1.unwrap());
    assert!(x0 <= 2.5 * 1.5 && 2.5 * 1.5 <= x1);
    let cusp2 = -14.0 * (-2.5f64).exp();
    let (e0, e1) = (b.eta_x0.unwrap(), b.eta_x_minus1.unwrap());
    assert!(cusp2 <= e0 && e0 < e1 && e1 < b.i0, "{b:?}");
    // both abscissas sit on the vertical through gamma1(t)
    let fam = LineFamily::new(CurveKind::Forward, 1.5, 0.75).unwrap();
    for x in [x0, x1] {
        assert!((fam.envelope_point(x)[0] - d.gamma1(t)).abs() < 1e-12);
    }
}

#[test]
fn lambert_bands_match_crossings() {
    for (b2, ts) in [(0.05, [0.1, 0.9, 2.5]), (-0.3, [0.2, 1.5, 4.0]), (1.0, [0.1, 0.5, 1.0])] {
        let d = init(0.1, b2, 1.0, 1.0);
        for t in ts {
            let a = shape_bands(CurveKind::Forward, &d, t).unwrap();
            let c = crossing_bands(CurveKind::Forward, &d, t).unwrap();
            assert_eq!(a.shapes, c.shapes, "b2={b2} t={t}");
            for (x, y) in a.cuts.iter().zip(&c.cuts) {
                assert!((x - y).abs() < 1e-9 * x.abs().max(1.0), "{a:?} {c:?}");
            }
        }
    }
}

#[test]
fn median_threshold() {
    let (b2, b3, tau, t) = (1.0, 1.0, 1.0, 2.0f64);
    let g = (t / tau).exp();
    let b1 = b3 * ((4.0 + b2 / b3 * g) / g - 2.0 - b2 * t / (b3 * tau));
    let d = init(b1, b2, b3, tau);
    let (m, _) = gamma2_law(&d, t).unwrap();
    assert!((m - (2.0 + d.gamma1(t))).abs() < 1e-12);
    let p = shape_probabilities(CurveKind::Forward, &d, t).unwrap();
    assert!((p.prob(ShapeTag::I) - 0.5).abs() < 1e-12);
    assert!((p.prob(ShapeTag::H) - 0.5).abs() < 1e-12);
}

#[test]
fn horizon_sharpness() {
    let d = init(0.0, 0.01, 1.0, 1.0);
    let h = horizons(&d).unwrap();
    let before = shape_probabilities(CurveKind::Forward, &d, 0.9 * h.t_dagger_f).unwrap();
    let after = shape_probabilities(CurveKind::Forward, &d, 1.1 * h.t_dagger_f).unwrap();
    assert!(before.prob(ShapeTag::Hdh) > 0.0);
    assert_eq!(after.prob(ShapeTag::Hdh), 0.0);
    let d = init(0.0, -0.05, 1.0, 1.0);
    let h = horizons(&d).unwrap();
    let before = shape_probabilities(CurveKind::Forward, &d, 0.9 * h.t_star_f).unwrap();
    let after = shape_probabilities(CurveKind::Forward, &d, 1.1 * h.t_star_f).unwrap();
    assert!(before.prob(ShapeTag::Hd) > 0.0);
    assert_eq!(after.prob(ShapeTag::Hd), 0.0);
}

#[test]
fn yield_support_follows_horizons() {
    let d = init(0.0, 0.01, 1.0, 1.0);
    let h = horizons(&d).unwrap();
    let early = shape_probabilities(CurveKind::Yield, &d, 0.5 * h.t_dagger_y).unwrap();
    assert!(early.prob(ShapeTag::Hd) > 0.0);
    let late = shape_probabilities(CurveKind::Yield, &d, 1.5 * h.t_dagger_y).unwrap();
    assert_eq!(late.prob(ShapeTag::Hd), 0.0);
    for s in late.probs.keys() {
        assert!([ShapeTag::N, ShapeTag::I, ShapeTag::H].contains(s), "{late:?}");
    }
    let d = init(0.0, -0.1, 1.0, 1.0);
    let h = horizons(&d).unwrap();
    let mid = shape_probabilities(CurveKind::Yield, &d, 0.5 * (h.t_star_star_y + h.t_star_y)).unwrap();
    let keys: Vec<_> = mid.probs.keys().copied().collect();
    assert_eq!(keys, vec![ShapeTag::N, ShapeTag::I, ShapeTag::D, ShapeTag::Hd]);
}

#[test]
fn monte_carlo_agrees() {
    let d = init(-0.6, 0.02, 1.0, 1.0);
    let t = 0.5;
    for kind in [CurveKind::Forward, CurveKind::Yield] {
        let a = shape_probabilities(kind, &d, t).unwrap();
        let n = 20_000;
        let e = sample_shapes(kind, &d, t, n, 5).unwrap();
        for s in crate::shape::ALL_SHAPES {
            let p = a.prob(s);
            let se = (p * (1.0 - p) / n as f64).sqrt().max(1.0 / n as f64);
            assert!((e.prob(s) - p).abs() <= 4.0 * se, "{kind:?} {s}: {} vs {p}", e.prob(s));
        }
    }
}

#[test]
fn threaded_sampling_is_deterministic() {
    let d = init(0.0, -0.2, 1.0, 1.0);
    let a = sample_shapes(CurveKind::Forward, &d, 0.3, 3000, 9).unwrap();
    let b = sample_shapes_threads(CurveKind::Forward, &d, 0.3, 3000, 9, 4).unwrap();
    assert_eq!(a, b);
    let trapped = trapped_set(&d).unwrap();
    assert!(a.probs.keys().all(|s| trapped.contains(s)));
}

#[test]
fn euler_tracks_exact_law() {
    let d = init(0.5, 1.0, 1.0, 1.0);
    let (m, v) = gamma2_law(&d, 1.0).unwrap();
    let (em, ev) = euler_gamma2_moments(&d, 1.0, 200, 20_000, 3).unwrap();
    assert!((em - m).abs() < 0.02 * m.abs());
    assert!((ev - v).abs() < 0.05 * v);
}

#[test]
fn serde_round_trip() {
    let d = init(0.1, 0.2, 0.3, 1.1);
    let s = serde_json::to_string(&d).unwrap();
    assert_eq!(serde_json::from_str::<DynamicsInitial>(&s).unwrap(), d);
    assert!(serde_json::from_str::<DynamicsInitial>(r#"{"beta0":0,"beta1":0,"beta2":0,"beta3":-1,"tau1":1}"#).is_err());
    let p = shape_probabilities(CurveKind::Forward, &d, 0.3).unwrap();
    let js = serde_json::to_string(&p).unwrap();
    assert!(js.contains("\"probs\":{"));
    assert_eq!(serde_json::from_str::<ShapeDistribution>(&js).unwrap(), p);
    let h = horizons(&d).unwrap();
    let hs = serde_json::to_string(&h).unwrap();
    assert_eq!(serde_json::from_str::<Horizons>(&hs).unwrap(), h);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn probabilities_sum_to_one(b1 in -3.0..3.0f64, b2 in -2.0..2.0f64, b3 in 0.05..3.0f64, tau in 0.3..4.0f64, t in 0.01..5.0f64) {
        let d = DynamicsInitial::new(0.0, b1, b2, b3, tau).unwrap();
        for kind in [CurveKind::Forward, CurveKind::Yield] {
            let p = shape_probabilities(kind, &d, t).unwrap();
            prop_assert!((p.total() - 1.0).abs() < 1e-12, "{:?}", p);
            prop_assert!(p.probs.values().all(|&v| v >= 0.0));
            if kind == CurveKind::Forward && b2 != 0.0 {
                let trapped = trapped_set(&d).unwrap();
                prop_assert!(p.probs.keys().all(|s| trapped.contains(s)), "{:?}", p);
            }
        }
    }

    #[test]
    fn horizons_are_ordered(b2 in -2.0..2.0f64, b3 in 0.01..3.0f64, tau in 0.3..4.0f64) {
        let h = horizons(&DynamicsInitial::new(0.0, 0.0, b2, b3, tau).unwrap()).unwrap();
        prop_assert!(h.t_dagger_f >= 0.0 && h.t_dagger_y >= 0.0 && h.t_star_f >= 0.0);
        prop_assert!(h.t_star_star_y <= h.t_star_y);
        if b2 > 0.0 && h.t_dagger_f > 0.0 {
            prop_assert!(h.t_dagger_y < h.t_dagger_f);
        }
    }
}
