//! The extended distance between metric fields and the endomorphism action.
//!
//! Orientation convention: `transport_b(g, h)` returns the h-self-adjoint B
//! with g = h[B·, B·], i.e. Bᵀ H B = G at every node, and `act(B, g)` is
//! the field x ↦ B(x)ᵀ G(x) B(x). Consequently
//! act(B₂, act(B₁, g)) = act(B₁B₂, g).

mod cauchy;
mod exhaustion;
mod geodesic;
mod smoothing;

pub use cauchy::{cauchy_limit, cauchy_limit_report, CauchyReport, Extrapolation};
pub use exhaustion::{dl_exhaustion, DL_INFINITY_THRESHOLD};
pub use geodesic::{geodesic, midpoint, relative_op_norm, GeodesicPath};
pub use smoothing::{mollifier_weight, smooth_approx};

use std::cmp::Ordering;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{same_chart, EllField, MetricField};
use crate::linalg::{gen_eig, gen_eig_extrema, spd_sqrt, Mat, SpdMatrix};

/// Witness data for an infinite distance obtained from an exhaustion.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DivergenceCertificate {
    pub radii: Vec<f64>,
    pub values: Vec<f64>,
    pub threshold: f64,
}

/// A value of the extended distance: finite, or +∞ with a certificate.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExtendedDistance {
    pub value: f64,
    /// Node where the essential supremum is attained.
    pub argmax_node: Option<usize>,
    pub certificate: Option<DivergenceCertificate>,
    /// Set when the value comes from the largest box of an exhaustion
    /// that did not certify divergence.
    pub truncated: bool,
    /// (radius, value) per box for exhaustions; empty otherwise.
    pub profile: Vec<(f64, f64)>,
}

impl ExtendedDistance {
    pub fn finite(value: f64, argmax_node: Option<usize>) -> ExtendedDistance {
        ExtendedDistance { value, argmax_node, certificate: None, truncated: false, profile: Vec::new() }
    }

    pub fn is_infinite(&self) -> bool {
        self.value == f64::INFINITY
    }
}

fn canonical_le(a: &SpdMatrix, b: &SpdMatrix) -> bool {
    let d = a.dim();
    for i in 0..d {
        for j in i..d {
            match a.get(i, j).total_cmp(&b.get(i, j)) {
                Ordering::Less => return true,
                Ordering::Greater => return false,
                Ordering::Equal => {}
            }
        }
    }
    true
}

/// log of the squared closeness constant at one node:
/// max(log λ_max, −log λ_min) for G u = λ H u, computed on a canonically
/// ordered pair so that the result does not depend on argument order.
pub fn node_log_ratio(g: &SpdMatrix, h: &SpdMatrix) -> Result<f64> {
    let (a, b) = if canonical_le(g, h) { (g, h) } else { (h, g) };
    let (lo, hi) = gen_eig_extrema(a, b)?;
    Ok(hi.ln().max(-lo.ln()).max(0.0))
}

fn node_log_ratios(g: &MetricField, h: &MetricField) -> Result<Vec<Option<f64>>> {
    same_chart(g.chart(), h.chart())?;
    (0..g.n_nodes())
        .into_par_iter()
        .map(|k| {
            if g.is_singular(k) || h.is_singular(k) {
                Ok(None)
            } else {
                node_log_ratio(g.value(k), h.value(k)).map(Some)
            }
        })
        .collect()
}

/// Extended distance on the grid: half the largest log generalized eigenvalue
/// ratio over non-singular nodes. Exactly symmetric, exactly zero on equal fields.
pub fn dl(g: &MetricField, h: &MetricField) -> Result<ExtendedDistance> {
    let r = node_log_ratios(g, h)?;
    let mut best: Option<(usize, f64)> = None;
    for (k, v) in r.iter().enumerate() {
        if let Some(v) = v {
            match best {
                Some((_, b)) if *v <= b => {}
                _ => best = Some((k, *v)),
            }
        }
    }
    let (node, v) = best.ok_or(Error::AllSingular)?;
    Ok(ExtendedDistance::finite(0.5 * v, Some(node)))
}

/// Smallest C ≥ 1 with C⁻¹|u|_h ≤ |u|_g ≤ C|u|_h at every non-singular node.
pub fn closeness_constant(g: &MetricField, h: &MetricField) -> Result<f64> {
    Ok(dl(g, h)?.value.exp())
}

/// A tangent vector attaining the optimal exponent at the argmax node.
#[derive(Clone, Debug, PartialEq)]
pub struct DlWitness {
    pub node: usize,
    pub vector: Vec<f64>,
    /// |u|_h / |u|_g for the witness vector; equals e^{±dl}.
    pub length_ratio: f64,
}

pub fn dl_witness(g: &MetricField, h: &MetricField) -> Result<DlWitness> {
    let d = dl(g, h)?;
    let node = d.argmax_node.ok_or(Error::AllSingular)?;
    let gv = g.value(node);
    let hv = h.value(node);
    let e = gen_eig(gv, hv)?;
    let n = e.dim;
    let lo = e.values[0];
    let hi = e.values[n - 1];
    let col = if hi.ln() >= -lo.ln() { n - 1 } else { 0 };
    let vector: Vec<f64> = (0..n).map(|i| e.vectors[(i, col)]).collect();
    let length_ratio = hv.norm_of(&vector) / gv.norm_of(&vector);
    Ok(DlWitness { node, vector, length_ratio })
}

/// Node-level transport: the H-self-adjoint B with Bᵀ H B = G.
pub fn transport_matrix(g: &SpdMatrix, h: &SpdMatrix) -> Result<Mat> {
    let d = g.dim();
    if g == h {
        return Ok(Mat::identity(d));
    }
    let eh = h.eig();
    let h_half = eh.map(f64::sqrt);
    let h_inv_half = eh.map(|x| 1.0 / x.sqrt());
    let m = h_inv_half.matmul(g.mat()).matmul(&h_inv_half);
    let s = spd_sqrt(&SpdMatrix::new(m)?)?;
    Ok(h_inv_half.matmul(s.mat()).matmul(&h_half))
}

/// The h-self-adjoint transport B with g = h[B·, B·].
pub fn transport_b(g: &MetricField, h: &MetricField) -> Result<EllField> {
    same_chart(g.chart(), h.chart())?;
    let d = g.dim();
    let mask: Vec<bool> = g.mask().iter().zip(h.mask()).map(|(a, b)| *a || *b).collect();
    let values = (0..g.n_nodes())
        .into_par_iter()
        .map(|k| if mask[k] { Ok(Mat::identity(d)) } else { transport_matrix(g.value(k), h.value(k)) })
        .collect::<Result<Vec<_>>>()?;
    EllField::new(g.chart().clone(), values, mask, Some(h.label().to_string()))
}

/// Node-level action Bᵀ G B.
pub fn act_matrix(b: &Mat, g: &SpdMatrix) -> Result<SpdMatrix> {
    SpdMatrix::new(b.transpose().matmul(g.mat()).matmul(b))
}

/// The field x ↦ g(x)[B(x)·, B(x)·].
pub fn act(b: &EllField, g: &MetricField) -> Result<MetricField> {
    same_chart(b.chart(), g.chart())?;
    let d = g.dim();
    let mask: Vec<bool> = g.mask().iter().zip(b.mask()).map(|(a, c)| *a || *c).collect();
    let values = (0..g.n_nodes())
        .into_par_iter()
        .map(|k| if mask[k] { Ok(SpdMatrix::identity(d)) } else { act_matrix(b.value(k), g.value(k)) })
        .collect::<Result<Vec<_>>>()?;
    MetricField::new(g.chart().clone(), values, mask, format!("act({})", g.label()))
}
