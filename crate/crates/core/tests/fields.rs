use metspace::field::{build_field_with_cap, conformal_field};
use metspace::metric_space::{act, transport_b};
use metspace::rmf::{decode, encode, read_any, read_field, write_field, write_scalar, AnyField};
use metspace::{build_field, validate_rrm, Error, GridChart, Mat, MetricField, ScalarField, SpdMatrix};
use proptest::prelude::*;

fn chart32() -> GridChart {
    GridChart::uniform(2, 32, -2.0, 2.0).unwrap()
}

fn jump(x: &[f64]) -> f64 {
    if x.iter().map(|v| v * v).sum::<f64>() < 1.0 {
        1.0
    } else {
        100.0
    }
}

#[test]
fn identity_generator_gives_identity_field() {
    let g = build_field(&chart32(), |_| Mat::identity(2)).unwrap();
    assert!(g.values().iter().all(|v| *v == SpdMatrix::identity(2)));
    assert!(g.mask().iter().all(|m| !m));
    assert_eq!(validate_rrm(&g, &g.chart().all_nodes()).unwrap(), (1.0, 1.0));
}

#[test]
fn bounded_jump_generator_is_valid() {
    let g = conformal_field(&chart32(), jump).unwrap();
    assert_eq!(g.singular_fraction(), 0.0);
    let (lo, hi) = validate_rrm(&g, &g.chart().all_nodes()).unwrap();
    assert!((lo - 1.0).abs() < 1e-14 && (hi - 100.0).abs() < 1e-12);
}

#[test]
fn one_nan_node_is_masked() {
    let chart = chart32();
    let bad = chart.coord(517);
    let g = build_field(&chart, |x| {
        if x == &bad[..2] {
            Mat::scalar(2, f64::NAN)
        } else {
            Mat::identity(2)
        }
    })
    .unwrap();
    assert_eq!(g.singular_fraction(), 1.0 / 1024.0);
    assert!(g.is_singular(517));
    assert_eq!(*g.value(517), SpdMatrix::identity(2));
}

#[test]
fn too_many_singular_nodes_is_an_error() {
    let chart = chart32();
    let r = build_field(&chart, |x| if x[0] < -1.5 { Mat::zeros(2) } else { Mat::identity(2) });
    assert!(matches!(r, Err(Error::TooSingular { .. })));
    let g = build_field_with_cap(&chart, |x| if x[0] < -1.5 { Mat::zeros(2) } else { Mat::identity(2) }, 0.5).unwrap();
    assert!(g.singular_fraction() > 0.01);
}

#[test]
fn validate_rrm_examples() {
    let chart = chart32();
    let g = MetricField::constant(chart.clone(), SpdMatrix::from_diag(&[1.0, 4.0]).unwrap()).unwrap();
    let (lo, hi) = validate_rrm(&g, &[0, 5, 1000]).unwrap();
    assert!((lo - 1.0).abs() < 1e-15 && (hi - 4.0).abs() < 1e-14);
    assert!(matches!(validate_rrm(&g, &[]), Err(Error::EmptyRegion)));
}

#[test]
fn validate_rrm_is_monotone_in_region() {
    let g = conformal_field(&chart32(), |x| 1.0 + x[0] * x[0] + 0.5 * x[1].sin()).unwrap();
    let all = g.chart().all_nodes();
    let (lo2, hi2) = validate_rrm(&g, &all).unwrap();
    for step in [3, 7, 50] {
        let sub: Vec<usize> = all.iter().copied().step_by(step).collect();
        let (lo1, hi1) = validate_rrm(&g, &sub).unwrap();
        assert!(lo2 <= lo1 && hi1 <= hi2);
    }
}

#[test]
fn masks_combine_by_union() {
    let chart = chart32();
    let a = build_field(&chart, |x| if x[0] < -1.9 && x[1] < -1.9 { Mat::zeros(2) } else { Mat::identity(2) }).unwrap();
    let b = build_field(&chart, |x| {
        if x[0] > 1.9 && x[1] > 1.9 {
            Mat::zeros(2)
        } else {
            Mat::scalar(2, 4.0)
        }
    })
    .unwrap();
    let t = transport_b(&a, &b).unwrap();
    for k in 0..chart.n_nodes() {
        assert_eq!(t.mask()[k], a.mask()[k] || b.mask()[k]);
    }
    let c = act(&t, &b).unwrap();
    for k in 0..chart.n_nodes() {
        assert_eq!(c.mask()[k], a.mask()[k] || b.mask()[k]);
    }
}

#[test]
fn file_round_trip_and_label_from_stem() {
    let dir = tempfile::tempdir().unwrap();
    let g = conformal_field(&chart32(), jump).unwrap();
    let path = dir.path().join("jump.rmf");
    write_field(&g, &path).unwrap();
    let back = read_field(&path).unwrap();
    assert_eq!(back.label(), "jump");
    assert_eq!(back.values(), g.values());
    assert_eq!(encode(&AnyField::Metric(back)), std::fs::read(&path).unwrap());

    let s = ScalarField::from_fn(&chart32(), |x| x[0] - x[1]);
    let sp = dir.path().join("s.rmf");
    write_scalar(&s, &sp).unwrap();
    assert!(matches!(read_any(&sp).unwrap(), AnyField::Scalar(t) if t == s));
    assert!(matches!(read_field(&sp), Err(Error::Format { .. })));
}

#[test]
fn unknown_version_is_a_format_error() {
    let g = MetricField::euclidean(GridChart::uniform(1, 4, 0.0, 1.0).unwrap());
    let mut bytes = encode(&AnyField::Metric(g));
    bytes[3] = b'9';
    match decode(&bytes) {
        Err(Error::Format { offset, message }) => {
            assert_eq!(offset, 0);
            assert!(message.contains("RMF9"));
        }
        other => panic!("expected a format error, got {other:?}"),
    }
}

#[test]
fn truncated_payload_reports_expected_length() {
    let g = MetricField::euclidean(GridChart::uniform(2, 3, 0.0, 1.0).unwrap());
    let bytes = encode(&AnyField::Metric(g));
    let full = bytes.len() as u64;
    match decode(&bytes[..bytes.len() - 10]) {
        Err(Error::Format { offset, .. }) => assert_eq!(offset, full),
        other => panic!("expected a format error, got {other:?}"),
    }
}

#[test]
fn flipped_payload_bit_fails_the_checksum() {
    let g = MetricField::euclidean(GridChart::uniform(2, 3, 0.0, 1.0).unwrap());
    let mut bytes = encode(&AnyField::Metric(g));
    let header = bytes.iter().position(|&b| b == b'\n').unwrap();
    bytes[header + 3] ^= 0x10;
    assert!(matches!(decode(&bytes), Err(Error::ChecksumMismatch { .. })));
}

fn arb_field() -> impl Strategy<Value = MetricField> {
    (1usize..=3, 2usize..=5, any::<u64>()).prop_map(|(d, n, seed)| {
        let chart = GridChart::uniform(d, n, -1.0, 1.0).unwrap();
        let total = chart.n_nodes();
        let values = (0..total)
            .map(|k| {
                let s = (seed.wrapping_mul(k as u64 + 1) >> 11) as f64 / (1u64 << 53) as f64;
                let m = Mat::from_fn(d, |i, j| if i == j { 1.0 + 3.0 * s + i as f64 } else { 0.3 * s });
                SpdMatrix::new(m).unwrap()
            })
            .collect();
        let mask = (0..total).map(|k| k == 0 && seed % 2 == 0 && total >= 100).collect();
        MetricField::new(chart, values, mask, "random").unwrap()
    })
}

proptest! {
    #[test]
    fn encoding_round_trips_bit_exactly(g in arb_field()) {
        let bytes = encode(&AnyField::Metric(g.clone()));
        let back = decode(&bytes).unwrap();
        prop_assert_eq!(encode(&back), bytes);
        match back {
            AnyField::Metric(h) => {
                prop_assert_eq!(h.values(), g.values());
                prop_assert_eq!(h.mask(), g.mask());
                prop_assert_eq!(h.chart(), g.chart());
            }
            _ => prop_assert!(false),
        }
    }
}
