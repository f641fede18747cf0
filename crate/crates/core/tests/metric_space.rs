use approx::assert_abs_diff_eq;
use metspace::field::conformal_field;
use metspace::linalg::{spd_power, Mat, SpdMatrix};
use metspace::metric_space::{
    act, cauchy_limit, cauchy_limit_report, closeness_constant, dl, dl_exhaustion, dl_witness, geodesic, midpoint,
    relative_op_norm, smooth_approx, transport_b, transport_matrix, Extrapolation, DL_INFINITY_THRESHOLD,
};
use metspace::{EllField, Error, GridChart, MetricField};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn chart(n: usize) -> GridChart {
    GridChart::uniform(2, n, -1.0, 1.0).unwrap()
}

fn random_spd(rng: &mut ChaCha8Rng, d: usize) -> SpdMatrix {
    let r = Mat::from_fn(d, |_, _| rng.gen_range(-1.0..1.0));
    SpdMatrix::new(r.matmul(&r.transpose()).add(&Mat::scalar(d, rng.gen_range(0.2..2.0)))).unwrap()
}

fn random_field(chart: &GridChart, seed: u64) -> MetricField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = chart.dim();
    let n = chart.n_nodes();
    let values = (0..n).map(|_| random_spd(&mut rng, d)).collect();
    MetricField::new(chart.clone(), values, vec![false; n], format!("random{seed}")).unwrap()
}

fn scaled(c: f64, g: &MetricField) -> MetricField {
    let values = g.values().iter().map(|v| SpdMatrix::new(v.mat().scale(c)).unwrap()).collect();
    MetricField::new(g.chart().clone(), values, g.mask().to_vec(), "scaled").unwrap()
}

#[test]
fn closeness_and_distance_examples() {
    let delta = MetricField::euclidean(chart(8));
    let four = scaled(4.0, &delta);
    assert_eq!(closeness_constant(&delta, &delta).unwrap(), 1.0);
    assert_eq!(dl(&delta, &delta).unwrap().value, 0.0);
    assert_abs_diff_eq!(closeness_constant(&delta, &four).unwrap(), 2.0, epsilon = 1e-14);
    assert_abs_diff_eq!(dl(&delta, &four).unwrap().value, 2f64.ln(), epsilon = 1e-15);

    let aniso = MetricField::constant(chart(8), SpdMatrix::from_diag(&[2.0, 0.5]).unwrap()).unwrap();
    // brute force over sampled unit vectors: max of |u|_g/|u|_δ and its inverse
    let mut best: f64 = 1.0;
    for i in 0..20_000 {
        let t = i as f64 / 20_000.0 * std::f64::consts::TAU;
        let q = aniso.value(0).mat().quad(&[t.cos(), t.sin()]).sqrt();
        best = best.max(q).max(1.0 / q);
    }
    assert_abs_diff_eq!(closeness_constant(&delta, &aniso).unwrap(), best, epsilon = 1e-8);
    assert_abs_diff_eq!(dl(&delta, &aniso).unwrap().value, 0.5 * 2f64.ln(), epsilon = 1e-15);
}

#[test]
fn distance_rejects_mismatched_charts_and_all_singular_fields() {
    let a = MetricField::euclidean(chart(4));
    let b = MetricField::euclidean(chart(5));
    assert!(matches!(dl(&a, &b), Err(Error::ChartMismatch)));
    let c = chart(4);
    let n = c.n_nodes();
    let masked = MetricField::with_cap(c, vec![SpdMatrix::identity(2); n], vec![true; n], "void", 1.0).unwrap();
    assert!(matches!(dl(&a, &masked), Err(Error::AllSingular)));
}

#[test]
fn witness_attains_the_exponent() {
    let g = random_field(&chart(6), 3);
    let h = random_field(&chart(6), 4);
    let d = dl(&g, &h).unwrap().value;
    let w = dl_witness(&g, &h).unwrap();
    let target = if w.length_ratio >= 1.0 { d.exp() } else { (-d).exp() };
    assert!((w.length_ratio - target).abs() <= 1e-9 * target);
}

#[test]
fn transport_examples() {
    let c = chart(4);
    let h = MetricField::euclidean(c.clone());
    let g = MetricField::constant(c.clone(), SpdMatrix::from_diag(&[4.0, 1.0]).unwrap()).unwrap();
    let b = transport_b(&g, &h).unwrap();
    assert!(b.value(0).max_abs_diff(&Mat::from_diag(&[2.0, 1.0])) < 1e-14);
    let same = transport_b(&g, &g).unwrap();
    assert!(same.values().iter().all(|m| *m == Mat::identity(2)));

    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..50 {
        let gm = random_spd(&mut rng, 2);
        let hm = random_spd(&mut rng, 2);
        let bm = transport_matrix(&gm, &hm).unwrap();
        let recon = bm.transpose().matmul(hm.mat()).matmul(&bm);
        assert!(recon.frobenius_diff(gm.mat()) <= 1e-10 * gm.mat().frobenius());
        let hb = hm.mat().matmul(&bm);
        assert!(hb.frobenius_diff(&bm.transpose().matmul(hm.mat())) <= 1e-10 * hb.frobenius());
    }
}

#[test]
fn action_laws() {
    let c = chart(5);
    let g = random_field(&c, 21);
    let id = EllField::identity(c.clone());
    assert_eq!(act(&id, &g).unwrap().values(), g.values());

    let f: f64 = 3.0;
    let root = EllField::constant(c.clone(), Mat::scalar(2, f.sqrt())).unwrap();
    let fg = act(&root, &g).unwrap();
    for k in 0..c.n_nodes() {
        assert!(fg.value(k).mat().frobenius_diff(&g.value(k).mat().scale(f)) <= 1e-13 * f * g.value(k).mat().frobenius());
    }

    let b1 = transport_b(&random_field(&c, 22), &g).unwrap();
    let b2 = transport_b(&random_field(&c, 23), &g).unwrap();
    let lhs = act(&b2, &act(&b1, &g).unwrap()).unwrap();
    let rhs = act(&b1.compose(&b2).unwrap(), &g).unwrap();
    let back = act(&b1.inverse().unwrap(), &act(&b1, &g).unwrap()).unwrap();
    for k in 0..c.n_nodes() {
        let s = rhs.value(k).mat().frobenius();
        assert!(lhs.value(k).mat().frobenius_diff(rhs.value(k).mat()) <= 1e-10 * s);
        assert!(back.value(k).mat().frobenius_diff(g.value(k).mat()) <= 1e-10 * g.value(k).mat().frobenius());
    }
}

#[test]
fn conformal_geodesic_is_a_power_law() {
    let delta = MetricField::euclidean(chart(6));
    let four = scaled(4.0, &delta);
    let path = geodesic(&delta, &four).unwrap();
    assert_eq!(path.eval(0.0).unwrap(), delta);
    assert_eq!(path.eval(1.0).unwrap().values(), four.values());
    let full = dl(&delta, &four).unwrap().value;
    for t in [0.25, 0.5, 0.75] {
        let gt = path.eval(t).unwrap();
        let expect = 4f64.powf(t);
        for v in gt.values() {
            assert!(v.mat().max_abs_diff(&Mat::scalar(2, expect)) < 1e-13);
        }
        assert_abs_diff_eq!(dl(&delta, &gt).unwrap().value, t * full, epsilon = 1e-13);
    }
    let m = midpoint(&delta, &four).unwrap();
    assert!(m.values().iter().all(|v| v.mat().max_abs_diff(&Mat::scalar(2, 2.0)) < 1e-13));
    assert_abs_diff_eq!(dl(&delta, &m).unwrap().value, 0.5 * 2f64.ln(), epsilon = 1e-13);
}

#[test]
fn midpoint_of_a_field_with_itself() {
    let g = random_field(&chart(5), 5);
    let m = midpoint(&g, &g).unwrap();
    for k in 0..g.n_nodes() {
        assert!(m.value(k).mat().frobenius_diff(g.value(k).mat()) <= 1e-12 * g.value(k).mat().frobenius());
    }
}

#[test]
fn random_midpoints_split_the_distance() {
    let c = chart(6);
    for seed in 0..10 {
        let g0 = random_field(&c, 100 + seed);
        let g1 = random_field(&c, 200 + seed);
        let m = midpoint(&g0, &g1).unwrap();
        let d = dl(&g0, &g1).unwrap().value;
        assert!((dl(&g0, &m).unwrap().value - 0.5 * d).abs() <= 1e-9);
        assert!((dl(&m, &g1).unwrap().value - 0.5 * d).abs() <= 1e-9);
    }
}

#[test]
fn geodesic_is_lipschitz_and_power_norms_are_bounded() {
    let c = chart(5);
    let g0 = random_field(&c, 7);
    let g1 = random_field(&c, 8);
    let path = geodesic(&g0, &g1).unwrap();
    let d = dl(&g0, &g1).unwrap().value;
    let a = d.exp();
    let log_a = path.power_norms(1.0).iter().flatten().cloned().fold(0.0, f64::max).ln();
    let ts = [0.0, 0.2, 0.45, 0.7, 1.0];
    for &s in &ts {
        for &t in &ts {
            let dst = dl(&path.eval(s).unwrap(), &path.eval(t).unwrap()).unwrap().value;
            assert!(dst <= (s - t).abs() * log_a.max(d) + 1e-12);
        }
    }
    for t in [0.3, 1.0, 2.0] {
        let bt = path.transport_power(t).unwrap();
        for k in 0..c.n_nodes() {
            let nrm = relative_op_norm(bt.value(k), g0.value(k));
            assert!(nrm <= a.powf(t) * (1.0 + 1e-12) && nrm >= a.powf(-t) * (1.0 - 1e-12));
            assert!((nrm - path.power_norms(t)[k].unwrap()).abs() <= 1e-10 * nrm);
        }
    }
}

#[test]
fn geometric_scalar_sequence_converges_to_delta() {
    let c = chart(4);
    let gs: Vec<MetricField> =
        (1..=30).map(|n| conformal_field(&c, |_| 1.0 + 2f64.powi(-(n as i32))).unwrap()).collect();
    let r = cauchy_limit_report(&gs).unwrap();
    assert_eq!(r.scheme, Extrapolation::Geometric);
    assert!(dl(&r.limit, &MetricField::euclidean(c)).unwrap().value < 1e-12);
}

#[test]
fn constant_sequence_limit_is_its_value() {
    let g = random_field(&chart(4), 9);
    let r = cauchy_limit_report(&vec![g.clone(); 5]).unwrap();
    assert_eq!(r.scheme, Extrapolation::Constant);
    assert_eq!(r.limit.values(), g.values());
}

#[test]
fn harmonic_sequence_limit() {
    let c = chart(4);
    let g = random_field(&c, 12);
    let b = transport_b(&random_field(&c, 13), &g).unwrap();
    let gs: Vec<MetricField> = (1..=20)
        .map(|n| {
            let bn = EllField::new(
                c.clone(),
                b.values().iter().zip(g.values()).map(|(m, gv)| power_in(m, gv, 1.0 / n as f64)).collect(),
                vec![false; c.n_nodes()],
                None,
            )
            .unwrap();
            act(&bn, &g).unwrap()
        })
        .collect();
    let limit = cauchy_limit(&gs).unwrap();
    assert!(dl(&limit, &g).unwrap().value < 1e-8);
}

/// B^t for a G-self-adjoint B, via the symmetric matrix G^{1/2} B G^{-1/2}.
fn power_in(b: &Mat, g: &SpdMatrix, t: f64) -> Mat {
    let half = spd_power(g, 0.5).unwrap();
    let inv_half = spd_power(g, -0.5).unwrap();
    let s = SpdMatrix::new(half.mat().matmul(b).matmul(inv_half.mat()).symmetrized()).unwrap();
    inv_half.mat().matmul(spd_power(&s, t).unwrap().mat()).matmul(half.mat())
}

#[test]
fn diverging_sequence_is_not_cauchy() {
    let c = chart(4);
    let gs: Vec<MetricField> = (0..8).map(|n| conformal_field(&c, |_| 2f64.powi(n * n)).unwrap()).collect();
    assert!(matches!(cauchy_limit(&gs), Err(Error::NotCauchy { .. })));
    assert!(matches!(cauchy_limit(&[]), Err(Error::EmptyRegion)));
}

#[test]
fn smoothing_constant_and_errors() {
    let c = chart(16);
    let g = MetricField::constant(c.clone(), SpdMatrix::from_diag(&[2.0, 3.0]).unwrap()).unwrap();
    let s = smooth_approx(&g, 0.3).unwrap();
    for v in s.values() {
        assert!(v.mat().max_abs_diff(&Mat::from_diag(&[2.0, 3.0])) < 1e-14);
    }
    assert!(matches!(smooth_approx(&g, 1.5), Err(Error::EpsilonTooLarge { .. })));
    assert!(matches!(smooth_approx(&g, -1.0), Err(Error::InvalidArgument(_))));
}

#[test]
fn smoothing_a_continuous_field_converges() {
    let c = GridChart::uniform(2, 64, -0.5, 0.5).unwrap();
    let g = conformal_field(&c, |x| 1.0 + x[0] * x[0] + x[1] * x[1]).unwrap();
    let mut prev = f64::INFINITY;
    let mut eps = 0.32;
    for _ in 0..5 {
        let d = dl(&smooth_approx(&g, eps).unwrap(), &g).unwrap().value;
        assert!(d < prev);
        prev = d;
        eps *= 0.5;
    }
    assert!(prev < 0.01);
}

#[test]
fn exhaustion_examples() {
    let radii = [1.0, 2.0, 4.0, 8.0];
    let flat = |_: &[f64]| Mat::identity(2);
    let r = dl_exhaustion(flat, |_: &[f64]| Mat::scalar(2, 2.0), 2, &radii, 2.0).unwrap();
    assert!(r.truncated && r.certificate.is_none());
    for (_, v) in &r.profile {
        assert_abs_diff_eq!(*v, 2f64.sqrt().ln(), epsilon = 1e-15);
    }
    let z = dl_exhaustion(flat, flat, 2, &radii, 2.0).unwrap();
    assert_eq!(z.value, 0.0);

    let annuli = |x: &[f64]| {
        let r = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        Mat::scalar(2, 2f64.powi(r.ceil().max(1.0) as i32))
    };
    let radii: Vec<f64> = (1..=150).map(|r| r as f64).collect();
    let e = dl_exhaustion(flat, annuli, 2, &radii, 1.0).unwrap();
    assert!(e.is_infinite());
    let cert = e.certificate.unwrap();
    assert_eq!(cert.threshold, DL_INFINITY_THRESHOLD);
    assert!(*cert.values.last().unwrap() > DL_INFINITY_THRESHOLD);

    assert!(dl_exhaustion(flat, flat, 2, &[], 1.0).is_err());
    assert!(dl_exhaustion(flat, flat, 2, &[2.0, 1.0], 1.0).is_err());
}

fn triple() -> impl Strategy<Value = (MetricField, MetricField, MetricField)> {
    (any::<u64>(), 1usize..=3).prop_map(|(seed, d)| {
        let c = GridChart::uniform(d, 4, 0.0, 1.0).unwrap();
        (random_field(&c, seed), random_field(&c, seed ^ 0x5555), random_field(&c, seed.wrapping_add(7)))
    })
}

proptest! {
    #[test]
    fn extended_metric_axioms((g, h, k) in triple()) {
        let gh = dl(&g, &h).unwrap().value;
        prop_assert_eq!(gh, dl(&h, &g).unwrap().value);
        prop_assert_eq!(dl(&g, &g).unwrap().value, 0.0);
        let gk = dl(&g, &k).unwrap().value;
        let hk = dl(&h, &k).unwrap().value;
        prop_assert!(gk <= gh + hk + 1e-12);
    }

    #[test]
    fn transport_then_act_reconstructs((g, h, _) in triple()) {
        let b = transport_b(&g, &h).unwrap();
        let back = act(&b, &h).unwrap();
        for node in 0..g.n_nodes() {
            prop_assert!(back.value(node).mat().frobenius_diff(g.value(node).mat()) <= 1e-9 * g.value(node).mat().frobenius());
        }
    }

    #[test]
    fn exponent_is_a_two_sided_bound((g, h, _) in triple(), angle in 0.0f64..6.3) {
        let d = dl(&g, &h).unwrap().value;
        let dim = g.dim();
        let u: Vec<f64> = (0..dim).map(|i| (angle * (i + 1) as f64).cos() + 0.1).collect();
        for node in 0..g.n_nodes() {
            let ratio = h.value(node).norm_of(&u) / g.value(node).norm_of(&u);
            prop_assert!(ratio <= d.exp() * (1.0 + 1e-12) && ratio >= (-d).exp() * (1.0 - 1e-12));
        }
    }
}
