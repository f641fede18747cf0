//! Coefficient fields A of −div_g A∇ and the metric h whose density and
//! determinant absorb them.
//!
//! A acts on covectors and must be self-adjoint for the cometric, i.e.
//! G⁻¹A symmetric. The associated metric is h = f · A G with the scalar
//! factor f = (det A)^(−1/(n+2)), so det(G⁻¹H) = (det A)^(2/(n+2)).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{same_chart, EllField, MetricField};
use crate::linalg::{spd_inv, SpdMatrix};

use super::laplacian::assemble_laplacian;
use super::sparse::BoundaryCondition;

/// Relative asymmetry of G⁻¹A tolerated before NotSymmetric.
pub const SYMMETRY_TOLERANCE: f64 = 1e-10;
/// Tolerance on det(G⁻¹H) = (det A)^(2/(n+2)).
pub const DET_IDENTITY_TOLERANCE: f64 = 1e-12;
/// Agreement expected from the correspondence check.
pub const CORRESPONDENCE_TOLERANCE: f64 = 1e-8;

/// f = (det A)^(−1/(n+2)) per node.
pub fn divform_factor(a: &EllField) -> Vec<f64> {
    let n = a.chart().dim() as f64;
    a.values().iter().map(|m| m.det().powf(-1.0 / (n + 2.0))).collect()
}

pub fn divform_to_metric(a: &EllField, g: &MetricField) -> Result<MetricField> {
    same_chart(a.chart(), g.chart())?;
    let n = g.dim();
    let f = divform_factor(a);
    let filled = g.filled_values()?;
    let mut values = Vec::with_capacity(g.n_nodes());
    for (k, gv) in filled.iter().enumerate() {
        let am = a.value(k);
        let ginv = spd_inv(gv)?;
        let sym = ginv.mat().matmul(am);
        let defect = sym.max_abs_diff(&sym.transpose());
        let scale = sym.frobenius().max(f64::MIN_POSITIVE);
        if defect > SYMMETRY_TOLERANCE * scale {
            return Err(Error::NotSymmetric { node: k, defect: defect / scale });
        }
        let h = SpdMatrix::new(am.matmul(gv.mat()).scale(f[k]).symmetrized())?;
        let lhs = ginv.mat().matmul(h.mat()).det();
        let rhs = am.det().powf(2.0 / (n as f64 + 2.0));
        if (lhs - rhs).abs() > DET_IDENTITY_TOLERANCE * rhs.abs().max(1.0) {
            return Err(Error::NotSymmetric { node: k, defect: (lhs - rhs).abs() });
        }
        values.push(h);
    }
    let mask = (0..g.n_nodes()).map(|k| g.is_singular(k) || a.mask()[k]).collect();
    MetricField::new(g.chart().clone(), values, mask, format!("divform({})", g.label()))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CorrespondenceReport {
    pub trials: usize,
    pub interior_nodes: usize,
    /// per trial, max |Δ_h u − f·L u| / max |f·L u| over interior nodes
    pub deviations: Vec<f64>,
    pub max_deviation: f64,
    pub tolerance: f64,
    pub within_tolerance: bool,
}

/// Random smooth field: a sum of a few low trigonometric modes.
fn smooth_test_field(a: &EllField, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let chart = a.chart();
    let d = chart.dim();
    let modes: Vec<(f64, [f64; 4], f64)> = (0..4)
        .map(|_| {
            let mut k = [0.0; 4];
            for a in 0..d {
                k[a] = rng.gen_range(0.5..3.0) / chart.extent(a).max(f64::MIN_POSITIVE);
            }
            (rng.gen_range(-1.0..1.0), k, rng.gen_range(0.0..std::f64::consts::TAU))
        })
        .collect();
    (0..chart.n_nodes())
        .map(|node| {
            let x = chart.coord(node);
            modes
                .iter()
                .map(|(c, k, ph)| c * ((0..d).map(|a| k[a] * x[a]).sum::<f64>() * std::f64::consts::TAU / 4.0 + ph).sin())
                .sum()
        })
        .collect()
}

/// Compares Δ_h u with f · (m_g⁻¹ S_{g,A} u) on random smooth u, where
/// h = divform_to_metric(A, g). Both operators are assembled with Neumann
/// conditions; only interior nodes are compared.
pub fn operator_correspondence_check(a: &EllField, g: &MetricField, trials: usize, seed: u64) -> Result<CorrespondenceReport> {
    let h = divform_to_metric(a, g)?;
    let f = divform_factor(a);
    let op_h = assemble_laplacian(&h, None, BoundaryCondition::Neumann)?;
    let op_a = assemble_laplacian(g, Some(a), BoundaryCondition::Neumann)?;
    let chart = g.chart();
    let interior: Vec<usize> = (0..chart.n_nodes()).filter(|&k| !chart.is_boundary(k)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut deviations = Vec::with_capacity(trials);
    for _ in 0..trials {
        let u = smooth_test_field(a, &mut rng);
        let lh = op_h.apply(&op_h.gather(&u));
        let la = op_a.apply(&op_a.gather(&u));
        let (mut diff, mut scale) = (0.0f64, 0.0f64);
        for &k in &interior {
            let (ih, ia) = (op_h.dof_of(k), op_a.dof_of(k));
            if let (Some(ih), Some(ia)) = (ih, ia) {
                let rhs = f[k] * la[ia];
                diff = diff.max((lh[ih] - rhs).abs());
                scale = scale.max(rhs.abs());
            }
        }
        deviations.push(if scale > 0.0 { diff / scale } else { diff });
    }
    let max_deviation = deviations.iter().cloned().fold(0.0, f64::max);
    Ok(CorrespondenceReport {
        trials,
        interior_nodes: interior.len(),
        deviations,
        max_deviation,
        tolerance: CORRESPONDENCE_TOLERANCE,
        within_tolerance: max_deviation <= CORRESPONDENCE_TOLERANCE,
    })
}
