use super::*;
use crate::shape_oracle::classify_direct;
use proptest::prelude::*;

fn direct(kind: CurveKind, g: Point, sign: Sign, t1: f64, t2: f64) -> ShapeTag {
    let p = CurveParams::from_gamma(g[0], g[1], sign, t1, t2).unwrap();
    classify_direct(kind, &p).unwrap().tag
}

#[test]
fn ns_predicates_match_direct_scan() {
    for kind in [CurveKind::Forward, CurveKind::Yield] {
        for i in -6..=6 {
            for j in -6..=6 {
                let (b1, b2) = (i as f64 * 0.37 + 0.01, j as f64 * 0.41 - 0.02);
                let p = CurveParams::nelson_siegel(1.0, b1, b2, 1.3).unwrap();
                let d = classify_direct(kind, &p).unwrap().tag;
                assert_eq!(classify_ns(b1, b2, kind), d, "{kind:?} b1={b1} b2={b2}");
            }
        }
    }
    assert_eq!(classify_ns(0.0, 0.0, CurveKind::Yield), ShapeTag::Flat);
}

#[test]
fn attainable_sets_mirror() {
    for fam in [Family::Svensson, Family::Bliss] {
        for r in [2.0, 0.6, 0.4, 0.2] {
            let p = attainable_shapes(fam, r, Sign::Positive).unwrap();
            let m = attainable_shapes(fam, r, Sign::Negative).unwrap();
            let pm: BTreeSet<_> = p.iter().map(|s| s.mirror()).collect();
            assert_eq!(pm, m);
        }
    }
    assert!(attainable_shapes(Family::Svensson, 1.0, Sign::Positive).is_err());
    assert_eq!(attainable_shapes(Family::NelsonSiegel, 3.0, Sign::Negative).unwrap().len(), 4);
}

#[test]
fn quadrant_labels() {
    assert_eq!(quadrant_label(1.0, 1.0, Sign::Positive), Some(QuadrantLabel::Qn));
    assert_eq!(quadrant_label(1.0, -1.0, Sign::Positive), Some(QuadrantLabel::Qh));
    assert_eq!(quadrant_label(1.0, -1.0, Sign::Negative), Some(QuadrantLabel::Qd));
    assert_eq!(quadrant_label(0.0, 1.0, Sign::Positive), None);
}

#[test]
fn known_sr_points() {
    let clf = EnvelopeClassifier::new(CurveKind::Forward, 1.0, 0.5).unwrap();
    let r = clf.classify_gamma(0.1, -0.7, Sign::Positive).unwrap();
    assert_eq!(r.shape, ShapeTag::Hdh);
    assert_eq!(r.winding.abs(), 1);
    assert!(r.in_d);
    let r = clf.classify_gamma(0.1, -0.7, Sign::Negative).unwrap();
    assert_eq!(r.shape, ShapeTag::Dhd);
}

#[test]
fn records_export() {
    let rec = SegmentRecord { gamma1: 1.0, gamma2: -2.0, shape: ShapeTag::Hd, winding: 1, in_d: false, boundary_flag: false };
    let csv = records_to_csv(&[rec]);
    assert_eq!(csv, "gamma1,gamma2,shape,winding,in_D,boundary_flag\n1,-2,hd,1,false,false\n");
    let js = serde_json::to_string(&rec).unwrap();
    assert!(js.contains("\"in_D\":false"));
    let back: SegmentRecord = serde_json::from_str(&js).unwrap();
    assert_eq!(back, rec);
}

#[test]
fn grid_threads_agree() {
    let tpl = CurveParams::new([0.0, 0.0, 0.0, 1.0], 1.0, 0.5).unwrap();
    let g = Grid { x0: -2.0, x1: 2.0, y0: -3.0, y1: 3.0, nx: 9, ny: 7 };
    let a = segment_grid(CurveKind::Yield, &tpl, &g).unwrap();
    let b = segment_grid_threads(CurveKind::Yield, &tpl, &g, 3).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.len(), 63);
    assert_eq!(a[1].gamma1, -1.5);
    assert_eq!(a[9].gamma2, -2.0);
}

fn check_agreement(kind: CurveKind, t1: f64, t2: f64, g1: f64, g2: f64, sign: Sign) -> std::result::Result<(), TestCaseError> {
    let clf = EnvelopeClassifier::new(kind, t1, t2).unwrap();
    let rec = clf.classify_gamma(g1, g2, sign).unwrap();
    let e = 2 * rec.winding.unsigned_abs() as usize + usize::from(rec.in_d);
    prop_assert_eq!(e, rec.shape.extrema_count());
    if !rec.boundary_flag {
        prop_assert_eq!(rec.shape, direct(kind, [g1, g2], sign, t1, t2), "{:?}", rec);
    }
    let m = clf.classify_gamma(g1, g2, sign.flip()).unwrap();
    prop_assert_eq!(m.shape, rec.shape.mirror());
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn forward_sr_matches_oracle(g1 in -3.0..3.0f64, g2 in -4.0..4.0f64, pos in any::<bool>()) {
        let s = if pos { Sign::Positive } else { Sign::Negative };
        check_agreement(CurveKind::Forward, 1.0, 0.5, g1, g2, s)?;
    }

    #[test]
    fn yield_sr_matches_oracle(g1 in -3.0..3.0f64, g2 in -4.0..4.0f64, pos in any::<bool>()) {
        let s = if pos { Sign::Positive } else { Sign::Negative };
        check_agreement(CurveKind::Yield, 2.0, 0.7, g1, g2, s)?;
    }

    #[test]
    fn forward_si_matches_oracle(g1 in -3.0..3.0f64, g2 in -4.0..4.0f64, pos in any::<bool>()) {
        let s = if pos { Sign::Positive } else { Sign::Negative };
        check_agreement(CurveKind::Forward, 0.5, 2.0, g1, g2, s)?;
    }

    #[test]
    fn yield_si_matches_oracle(g1 in -3.0..3.0f64, g2 in -4.0..4.0f64, pos in any::<bool>()) {
        let s = if pos { Sign::Positive } else { Sign::Negative };
        check_agreement(CurveKind::Yield, 1.0, 1.6, g1, g2, s)?;
    }
}

