use approx::assert_abs_diff_eq;
use metspace::field::conformal_field;
use metspace::linalg::{Mat, SpdMatrix};
use metspace::operators::{
    assemble_laplacian, ball_operator, divform_factor, divform_to_metric, heat_run, lp_norm, norm_comparison_bounds,
    norm_preservation_bounds, operator_correspondence_check, poincare_measure, poincare_propagate, pointwise_norm,
    smallest_nonzero_eigenvalue, varadhan_estimate, BoundaryCondition, SparseOperator, TensorField,
};
use metspace::{build_field, EllField, Error, GridChart, MetricField};
use proptest::prelude::*;

fn square(n: usize) -> GridChart {
    GridChart::uniform(2, n, 0.0, 1.0).unwrap()
}

fn line(n: usize) -> GridChart {
    GridChart::uniform(1, n, 0.0, 1.0).unwrap()
}

#[test]
fn flat_operator_is_the_five_point_stencil() {
    let c = square(9);
    let h = 1.0 / 8.0;
    let op = assemble_laplacian(&MetricField::euclidean(c.clone()), None, BoundaryCondition::Neumann).unwrap();
    let centre = c.node_index(&[4, 4]);
    let i = op.dof_of(centre).unwrap();
    assert_abs_diff_eq!(op.mass[i], h * h, epsilon = 1e-16);
    assert_abs_diff_eq!(op.entry(i, i) / op.mass[i], 4.0 / (h * h), epsilon = 1e-10);
    for idx in [[3, 4], [5, 4], [4, 3], [4, 5]] {
        let j = op.dof_of(c.node_index(&idx)).unwrap();
        assert_abs_diff_eq!(op.entry(i, j) / op.mass[i], -1.0 / (h * h), epsilon = 1e-10);
    }
    for idx in [[3, 3], [5, 5], [3, 5], [5, 3]] {
        let j = op.dof_of(c.node_index(&idx)).unwrap();
        assert_eq!(op.entry(i, j), 0.0);
    }
}

#[test]
fn conformal_scaling_in_two_dimensions() {
    let c = square(9);
    let flat = assemble_laplacian(&MetricField::euclidean(c.clone()), None, BoundaryCondition::Neumann).unwrap();
    let cs = 3.0;
    let g = MetricField::constant(c.clone(), SpdMatrix::scalar(2, cs * cs).unwrap()).unwrap();
    let scaled = assemble_laplacian(&g, None, BoundaryCondition::Neumann).unwrap();
    let u: Vec<f64> = (0..c.n_nodes()).map(|k| (k as f64 * 0.37).sin()).collect();
    let a = flat.apply(&u);
    let b = scaled.apply(&u);
    for (x, y) in a.iter().zip(&b) {
        assert!((y - x / (cs * cs)).abs() <= 1e-12 * x.abs().max(1.0));
    }
    // stiffness is conformally invariant in 2D
    for ((_, _, v), (_, _, w)) in flat.triplets().iter().zip(scaled.triplets()) {
        assert!((v - w).abs() <= 1e-12 * v.abs().max(1.0));
    }
}

#[test]
fn quadratic_has_constant_laplacian() {
    let c = square(33);
    let op = assemble_laplacian(&MetricField::euclidean(c.clone()), None, BoundaryCondition::Neumann).unwrap();
    let u: Vec<f64> = (0..c.n_nodes()).map(|k| c.coord(k)[0].powi(2)).collect();
    let lu = op.apply(&u);
    for k in 0..c.n_nodes() {
        if !c.is_boundary(k) {
            assert_abs_diff_eq!(lu[op.dof_of(k).unwrap()], -2.0, epsilon = 1e-9);
        }
    }
}

fn rough_metric(c: &GridChart) -> MetricField {
    build_field(c, |x| {
        let s = 1.0 + 0.5 * (3.0 * x[0]).sin() * x[1];
        Mat::from_rows([[1.5 * s, 0.3 * x[0]], [0.3 * x[0], 1.0 + x[1] * x[1]]])
    })
    .unwrap()
}

#[test]
fn assembly_is_symmetric_and_conservative() {
    let c = square(17);
    let g = rough_metric(&c);
    let op = assemble_laplacian(&g, None, BoundaryCondition::Neumann).unwrap();
    assert!(op.symmetry_defect() <= 1e-12);
    let ones = vec![1.0; op.n()];
    let mut y = vec![0.0; op.n()];
    op.stiffness_apply(&ones, &mut y);
    let scale = op.diagonal().iter().cloned().fold(0.0, f64::max);
    assert!(y.iter().all(|v| v.abs() <= 1e-12 * scale));
    let u: Vec<f64> = (0..op.n()).map(|k| (0.1 * k as f64).cos()).collect();
    assert!(op.energy(&u, &u) >= 0.0);

    let dir = assemble_laplacian(&g, None, BoundaryCondition::Dirichlet).unwrap();
    assert_eq!(dir.n(), 15 * 15);
    assert!(dir.dofs.iter().all(|&k| !c.is_boundary(k)));
}

#[test]
fn fully_masked_cell_is_an_error() {
    let c = GridChart::uniform(2, 20, 0.0, 1.0).unwrap();
    let corner = [c.node_index(&[5, 5]), c.node_index(&[5, 6]), c.node_index(&[6, 5]), c.node_index(&[6, 6])];
    let g = build_field(&c, |x| {
        let i = (x[0] * 19.0).round() as usize;
        let j = (x[1] * 19.0).round() as usize;
        if (5..=6).contains(&i) && (5..=6).contains(&j) {
            Mat::zeros(2)
        } else {
            Mat::identity(2)
        }
    })
    .unwrap();
    assert!(corner.iter().all(|&k| g.is_singular(k)));
    assert!(matches!(
        assemble_laplacian(&g, None, BoundaryCondition::Neumann),
        Err(Error::SingularCell { .. })
    ));
}

#[test]
fn heat_reaches_equilibrium_and_conserves_mass() {
    let c = line(65);
    let op = assemble_laplacian(&MetricField::euclidean(c.clone()), None, BoundaryCondition::Neumann).unwrap();
    let run = heat_run(&op, 20, &[0.05, 2.0], 1e-3).unwrap();
    assert!(run.mass_drift <= 1e-10);
    let total: f64 = run.fields[1].values().iter().zip(&run.mass).map(|(u, m)| u * m).sum();
    assert_abs_diff_eq!(total, 1.0, epsilon = 1e-10);
    for v in run.fields[1].values() {
        assert!((v - 1.0).abs() < 1e-6);
    }
}

#[test]
fn short_time_kernel_is_gaussian() {
    let c = line(513);
    let op = assemble_laplacian(&MetricField::euclidean(c.clone()), None, BoundaryCondition::Neumann).unwrap();
    let t = 0.002;
    let run = heat_run(&op, 256, &[t], 5e-6).unwrap();
    for k in 236..=276 {
        let x = c.coord(k)[0] - 0.5;
        let exact = (-x * x / (4.0 * t)).exp() / (4.0 * std::f64::consts::PI * t).sqrt();
        assert!((run.kernel(0, k) / exact - 1.0).abs() < 0.02);
    }
}

#[test]
fn heat_rejects_bad_arguments() {
    let op = assemble_laplacian(&MetricField::euclidean(line(9)), None, BoundaryCondition::Dirichlet).unwrap();
    assert!(heat_run(&op, 4, &[], 0.1).is_err());
    assert!(heat_run(&op, 4, &[0.2, 0.1], 0.1).is_err());
    assert!(heat_run(&op, 0, &[0.1], 0.1).is_err());
    let run = heat_run(&op, 4, &[0.1], 0.01).unwrap();
    assert!(run.mass_drift.is_nan());
    assert!(matches!(varadhan_estimate(&run, 0), Err(Error::NonPositiveKernel { .. })));
}

#[test]
fn varadhan_on_the_line() {
    let c = line(513);
    let op = assemble_laplacian(&MetricField::euclidean(c.clone()), None, BoundaryCondition::Neumann).unwrap();
    let run = heat_run(&op, 128, &[0.005, 0.01, 0.02], 5e-6).unwrap();
    let est = varadhan_estimate(&run, 384).unwrap();
    assert!((est.extrapolated / 0.25 - 1.0).abs() < 0.15);
    // at the source −4t log ρ = 2t log(4πt) + o(t), which tends to 0
    let at_source = varadhan_estimate(&run, 128).unwrap();
    let e = &at_source.estimates;
    assert!(e[0].abs() < e[1].abs() && e[1].abs() < e[2].abs());
    assert!(at_source.extrapolated.abs() < 0.02);
}

#[test]
fn divform_examples() {
    let c = square(8);
    let g = MetricField::euclidean(c.clone());
    let id = EllField::identity(c.clone());
    assert_eq!(divform_to_metric(&id, &g).unwrap().values(), g.values());

    let four = EllField::constant(c.clone(), Mat::scalar(2, 4.0)).unwrap();
    assert!(divform_factor(&four).iter().all(|f| *f == 0.5));
    let h = divform_to_metric(&four, &g).unwrap();
    for v in h.values() {
        assert!(v.mat().max_abs_diff(&Mat::scalar(2, 2.0)) < 1e-15);
        assert_abs_diff_eq!(v.mat().det(), 4.0, epsilon = 1e-14);
    }

    let skew = EllField::constant(c.clone(), Mat::from_rows([[2.0, 1.0], [0.0, 1.0]])).unwrap();
    assert!(matches!(divform_to_metric(&skew, &g), Err(Error::NotSymmetric { .. })));
}

#[test]
fn correspondence_with_identity_coefficients() {
    let c = square(16);
    let g = conformal_field(&c, |x| 1.0 + x[0] * x[1]).unwrap();
    let r = operator_correspondence_check(&EllField::identity(c), &g, 3, 1).unwrap();
    assert!(r.max_deviation <= 1e-12);
}

#[test]
fn unit_determinant_metric_carries_the_inverse_coefficient() {
    // A = diag(2, 1/2) on δ: f = 1 and h = A, so √det h · h⁻¹ = A⁻¹ and Δ_h = L_{δ,A⁻¹}
    let c = square(16);
    let g = MetricField::euclidean(c.clone());
    let a = EllField::constant(c.clone(), Mat::from_diag(&[2.0, 0.5])).unwrap();
    let h = divform_to_metric(&a, &g).unwrap();
    assert!(divform_factor(&a).iter().all(|f| (*f - 1.0).abs() < 1e-15));
    assert!(h.values().iter().all(|v| v.mat().max_abs_diff(&Mat::from_diag(&[2.0, 0.5])) < 1e-15));
    let lh = assemble_laplacian(&h, None, BoundaryCondition::Neumann).unwrap();
    let la = assemble_laplacian(&g, Some(&a), BoundaryCondition::Neumann).unwrap();
    let l_inv = assemble_laplacian(&g, Some(&a.inverse().unwrap()), BoundaryCondition::Neumann).unwrap();
    let u: Vec<f64> = (0..c.n_nodes()).map(|k| (1.3 * c.coord(k)[0] + 0.4 * c.coord(k)[1]).sin()).collect();
    let (x, y, z) = (lh.apply(&u), la.apply(&u), l_inv.apply(&u));
    let scale = x.iter().map(|v| v.abs()).fold(0.0, f64::max);
    assert!(x.iter().zip(&z).all(|(p, q)| (p - q).abs() <= 1e-12 * scale));
    assert!(x.iter().zip(&y).any(|(p, q)| (p - q).abs() > 0.1 * scale));
}

#[test]
fn propagated_constants() {
    let p = poincare_propagate(1.0, 0.5, 3.0, 0.0, 2, 2.0, 2.0).unwrap();
    assert_eq!((p.c1, p.c2, p.eta), (2.0, 1.0, 3.0));
    let q = poincare_propagate(1.0, 1.0, 1.0, 2f64.ln(), 2, 2.0, 2.0).unwrap();
    assert_abs_diff_eq!(q.c1, 8.0, epsilon = 1e-14);
    assert_abs_diff_eq!(q.c2, 4.0, epsilon = 1e-14);
    assert_abs_diff_eq!(q.eta, 4.0, epsilon = 1e-14);
    let mut last = 0.0;
    for dl in [0.0, 0.1, 0.5, 1.0] {
        let e = poincare_propagate(1.0, 1.0, 1.0, dl, 3, 2.0, 2.0).unwrap().eta;
        assert!(e > last);
        last = e;
    }
    assert!(poincare_propagate(1.0, 1.0, 1.0, f64::INFINITY, 2, 2.0, 2.0).is_err());
    assert!(poincare_propagate(1.0, 1.0, 1.0, 0.1, 2, 0.5, 2.0).is_err());
}

/// Dense symmetric eigenvalues by cyclic Jacobi rotations.
fn dense_eigenvalues(mut a: Vec<Vec<f64>>) -> Vec<f64> {
    let n = a.len();
    for _ in 0..100 {
        let off: f64 = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| a[i][j] * a[i][j]).sum();
        if off < 1e-26 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let cs = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * cs;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = cs * akp - sn * akq;
                    a[k][q] = sn * akp + cs * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = cs * apk - sn * aqk;
                    a[q][k] = sn * apk + cs * aqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
    ev.sort_by(f64::total_cmp);
    ev
}

fn dense_spectrum(op: &SparseOperator) -> Vec<f64> {
    let n = op.n();
    let mut a = vec![vec![0.0; n]; n];
    for (r, c, v) in op.triplets() {
        a[r][c] = v / (op.mass[r] * op.mass[c]).sqrt();
    }
    dense_eigenvalues(a)
}

#[test]
fn subspace_iteration_matches_a_dense_solve() {
    let c = square(9);
    let g = rough_metric(&c);
    let op = ball_operator(&g, 40, 100.0, 2).unwrap();
    let (lambda, _) = smallest_nonzero_eigenvalue(&op).unwrap();
    let spectrum = dense_spectrum(&op);
    assert!(spectrum[0].abs() < 1e-9);
    assert!((lambda - spectrum[1]).abs() <= 1e-9 * spectrum[1]);
}

#[test]
fn flat_square_constant_and_scaling() {
    let c = square(65);
    let flat = poincare_measure(&MetricField::euclidean(c.clone()), 0, 10.0, 2).unwrap();
    assert_eq!(flat.ball_nodes, 65 * 65);
    assert!((flat.c1 * std::f64::consts::PI - 1.0).abs() < 0.02);

    let small = square(17);
    let base = poincare_measure(&MetricField::euclidean(small.clone()), 0, 10.0, 2).unwrap();
    let cs = 2.5;
    let g = MetricField::constant(small, SpdMatrix::scalar(2, cs * cs).unwrap()).unwrap();
    let scaled = poincare_measure(&g, 0, 100.0, 2).unwrap();
    assert!((scaled.c1 / base.c1 - cs).abs() <= 1e-8 * cs);
}

#[test]
fn tiny_ball_is_rejected() {
    let c = square(17);
    let g = MetricField::euclidean(c);
    assert!(matches!(poincare_measure(&g, 100, 1e-6, 2), Err(Error::BallTooSmall { .. })));
}

#[test]
fn norm_bound_examples() {
    let (lo, hi) = norm_preservation_bounds(0, 0, 2, 2.0, 2f64.ln());
    assert_abs_diff_eq!(hi, 2f64.sqrt(), epsilon = 1e-15);
    assert_abs_diff_eq!(lo, 1.0 / 2f64.sqrt(), epsilon = 1e-15);
    assert_eq!(norm_preservation_bounds(2, 1, 3, 1.5, 0.0), (1.0, 1.0));
    let (_, hinf) = norm_preservation_bounds(0, 1, 3, f64::INFINITY, 0.4);
    assert_abs_diff_eq!(hinf, 0.4f64.exp(), epsilon = 1e-15);
    let (_, hc) = norm_comparison_bounds(0, 0, 2, 2.0, 2f64.ln());
    assert_abs_diff_eq!(hc, 2.0, epsilon = 1e-15);
}

#[test]
fn scalar_norms_scale_with_the_density() {
    // on 4δ the density is 4, so ‖1‖₂ doubles; the rigorous bound allows it, the n/(2p) exponent does not
    let c = square(9);
    let g = MetricField::euclidean(c.clone());
    let h = MetricField::constant(c.clone(), SpdMatrix::scalar(2, 4.0).unwrap()).unwrap();
    let u = TensorField::scalar(c.clone(), vec![1.0; c.n_nodes()]).unwrap();
    let ng = lp_norm(&u, 2.0, &g).unwrap();
    let nh = lp_norm(&u, 2.0, &h).unwrap();
    assert_abs_diff_eq!(nh / ng, 2.0, epsilon = 1e-12);
    let (_, hi) = norm_comparison_bounds(0, 0, 2, 2.0, 2f64.ln());
    assert!(nh / ng <= hi * (1.0 + 1e-12));
    let (_, hi_displayed) = norm_preservation_bounds(0, 0, 2, 2.0, 2f64.ln());
    assert!(nh / ng > hi_displayed);
    assert_abs_diff_eq!(lp_norm(&u, f64::INFINITY, &h).unwrap(), 1.0, epsilon = 1e-15);
    assert!(lp_norm(&u, 0.5, &g).is_err());
}

#[test]
fn pointwise_tensor_norms() {
    let g = SpdMatrix::from_diag(&[4.0, 9.0]).unwrap();
    // vector e₁ has length 2, covector dx¹ has length 1/2
    assert_abs_diff_eq!(pointwise_norm(&[1.0, 0.0], 0, 1, &g).unwrap(), 2.0, epsilon = 1e-15);
    assert_abs_diff_eq!(pointwise_norm(&[1.0, 0.0], 1, 0, &g).unwrap(), 0.5, epsilon = 1e-15);
    // the metric itself as a (2,0) tensor has norm √n
    let gm = g.mat().to_vec();
    assert_abs_diff_eq!(pointwise_norm(&gm, 2, 0, &g).unwrap(), 2f64.sqrt(), epsilon = 1e-14);
    assert!(TensorField::new(square(3), 1, 0, vec![0.0; 5]).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn tensor_norms_respect_the_pointwise_bound(
        r in 0usize..=2, s in 0usize..=1, d0 in 0.3f64..3.0, d1 in 0.3f64..3.0, off in -0.2f64..0.2,
        comps in prop::collection::vec(-1.0f64..1.0, 8),
    ) {
        let g = SpdMatrix::identity(2);
        let h = SpdMatrix::new(Mat::from_rows([[d0, off], [off, d1]])).unwrap();
        let e = metspace::linalg::gen_eig_extrema(&h, &g).unwrap();
        let dl = 0.5 * e.1.ln().max(-e.0.ln());
        let rank = r + s;
        let t = &comps[..2usize.pow(rank as u32)];
        let ng = pointwise_norm(t, r, s, &g).unwrap();
        let nh = pointwise_norm(t, r, s, &h).unwrap();
        let factor = (rank as f64 * dl).exp();
        prop_assert!(nh <= factor * ng * (1.0 + 1e-12) + 1e-15);
        prop_assert!(nh >= ng / factor * (1.0 - 1e-12) - 1e-15);
    }
}
