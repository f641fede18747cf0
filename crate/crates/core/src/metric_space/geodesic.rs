use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::{same_chart, EllField, MetricField};
use crate::linalg::{Mat, SpdMatrix};

use super::{dl, transport_b};

/// Per-node data for evaluating g_t = g0[Bᵗ·, Bᵗ·].
#[derive(Clone, Debug)]
struct NodeGeo {
    g0_half: Mat,
    g0_inv_half: Mat,
    /// eigen-decomposition of M = G0^{-1/2} G1 G0^{-1/2}
    m_vals: [f64; 4],
    m_vecs: Mat,
}

/// The path t ↦ act(Bᵗ, g0) with B = transport_b(g1, g0).
#[derive(Clone, Debug)]
pub struct GeodesicPath {
    pub g0_label: String,
    pub g1_label: String,
    pub transport: EllField,
    g0: MetricField,
    g1: MetricField,
    nodes: Vec<Option<NodeGeo>>,
    mask: Vec<bool>,
}

fn spectral(vals: &[f64; 4], vecs: &Mat, f: impl Fn(f64) -> f64) -> Mat {
    let n = vecs.dim();
    let mut m = Mat::zeros(n);
    for i in 0..n {
        for j in i..n {
            let mut s = 0.0;
            for k in 0..n {
                s += vecs[(i, k)] * f(vals[k]) * vecs[(j, k)];
            }
            m[(i, j)] = s;
            m[(j, i)] = s;
        }
    }
    m
}

/// Spectral norm of B measured in the metric G: ‖G^{1/2} B G^{-1/2}‖₂.
pub fn relative_op_norm(b: &Mat, g: &SpdMatrix) -> f64 {
    let e = g.eig();
    let half = e.map(f64::sqrt);
    let inv_half = e.map(|x| 1.0 / x.sqrt());
    half.matmul(b).matmul(&inv_half).op_norm()
}

impl GeodesicPath {
    /// g_t at every node; t = 0 and t = 1 return the endpoints exactly.
    pub fn eval(&self, t: f64) -> Result<MetricField> {
        if t == 0.0 {
            return Ok(self.g0.clone());
        }
        if t == 1.0 {
            return Ok(self.g1.clone());
        }
        let d = self.g0.dim();
        let values = self
            .nodes
            .par_iter()
            .map(|ng| match ng {
                None => Ok(SpdMatrix::identity(d)),
                Some(ng) => {
                    let mt = spectral(&ng.m_vals, &ng.m_vecs, |x| x.powf(t));
                    SpdMatrix::new(ng.g0_half.matmul(&mt).matmul(&ng.g0_half))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        MetricField::new(self.g0.chart().clone(), values, self.mask.clone(), format!("geodesic({t})"))
    }

    /// Bᵗ = G0^{-1/2} M^{t/2} G0^{1/2} at every node.
    pub fn transport_power(&self, t: f64) -> Result<EllField> {
        let d = self.g0.dim();
        let values: Vec<Mat> = self
            .nodes
            .iter()
            .map(|ng| match ng {
                None => Mat::identity(d),
                Some(ng) => {
                    let mt = spectral(&ng.m_vals, &ng.m_vecs, |x| x.powf(0.5 * t));
                    ng.g0_inv_half.matmul(&mt).matmul(&ng.g0_half)
                }
            })
            .collect();
        EllField::new(self.g0.chart().clone(), values, self.mask.clone(), Some(self.g0_label.clone()))
    }

    /// ‖Bᵗ‖ in the g0 operator norm at every non-singular node (None on masked nodes).
    pub fn power_norms(&self, t: f64) -> Vec<Option<f64>> {
        self.nodes
            .iter()
            .map(|ng| {
                ng.as_ref().map(|ng| {
                    let n = ng.m_vecs.dim();
                    ng.m_vals[..n].iter().map(|x| x.powf(0.5 * t)).fold(0.0, f64::max)
                })
            })
            .collect()
    }

    pub fn g0(&self) -> &MetricField {
        &self.g0
    }

    pub fn g1(&self) -> &MetricField {
        &self.g1
    }
}

pub fn geodesic(g0: &MetricField, g1: &MetricField) -> Result<GeodesicPath> {
    same_chart(g0.chart(), g1.chart())?;
    let dist = dl(g0, g1)?;
    if !dist.value.is_finite() {
        return Err(Error::NotInSameComponent);
    }
    let transport = transport_b(g1, g0)?;
    let mask: Vec<bool> = g0.mask().iter().zip(g1.mask()).map(|(a, b)| *a || *b).collect();
    let nodes = (0..g0.n_nodes())
        .into_par_iter()
        .map(|k| {
            if mask[k] {
                return Ok(None);
            }
            let e0 = g0.value(k).eig();
            let g0_half = e0.map(f64::sqrt);
            let g0_inv_half = e0.map(|x| 1.0 / x.sqrt());
            let m = g0_inv_half.matmul(g1.value(k).mat()).matmul(&g0_inv_half);
            let em = SpdMatrix::new(m)?.eig();
            let mut m_vals = [0.0; 4];
            m_vals[..em.dim()].copy_from_slice(em.values());
            Ok(Some(NodeGeo { g0_half, g0_inv_half, m_vals, m_vecs: *em.vectors() }))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(GeodesicPath {
        g0_label: g0.label().to_string(),
        g1_label: g1.label().to_string(),
        transport,
        g0: g0.clone(),
        g1: g1.clone(),
        nodes,
        mask,
    })
}

/// g_{1/2}: equidistant from both endpoints at half their distance.
pub fn midpoint(g0: &MetricField, g1: &MetricField) -> Result<MetricField> {
    let m = geodesic(g0, g1)?.eval(0.5)?;
    Ok(m.with_label(format!("midpoint({},{})", g0.label(), g1.label())))
}
