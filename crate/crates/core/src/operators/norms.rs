use crate::chart::GridChart;
use crate::error::{Error, Result};
use crate::field::{same_chart, MetricField};
use crate::geometry::measure_weights;
use crate::linalg::{Mat, SpdMatrix};

/// Tensor field with `covariant` lower and `contravariant` upper indices.
/// Components per node are stored row-major with the covariant indices first.
#[derive(Clone, Debug, PartialEq)]
pub struct TensorField {
    chart: GridChart,
    covariant: usize,
    contravariant: usize,
    values: Vec<f64>,
}

impl TensorField {
    pub fn new(chart: GridChart, covariant: usize, contravariant: usize, values: Vec<f64>) -> Result<TensorField> {
        let per = chart.dim().pow((covariant + contravariant) as u32);
        if values.len() != per * chart.n_nodes() {
            return Err(Error::DimensionMismatch { expected: per * chart.n_nodes(), found: values.len() });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(TensorField { chart, covariant, contravariant, values })
    }

    pub fn scalar(chart: GridChart, values: Vec<f64>) -> Result<TensorField> {
        TensorField::new(chart, 0, 0, values)
    }

    pub fn chart(&self) -> &GridChart {
        &self.chart
    }

    pub fn rank(&self) -> (usize, usize) {
        (self.covariant, self.contravariant)
    }

    pub fn components(&self, node: usize) -> &[f64] {
        let per = self.chart.dim().pow((self.covariant + self.contravariant) as u32);
        &self.values[node * per..(node + 1) * per]
    }
}

/// Applies `m` to tensor index `slot` of a row-major component array.
fn apply_on_slot(t: &mut [f64], dim: usize, rank: usize, slot: usize, m: &Mat) {
    let inner = dim.pow((rank - slot - 1) as u32);
    let outer = dim.pow(slot as u32);
    let mut buf = [0.0; 4];
    for o in 0..outer {
        for i in 0..inner {
            let base = o * dim * inner + i;
            for a in 0..dim {
                buf[a] = (0..dim).map(|b| m[(a, b)] * t[base + b * inner]).sum();
            }
            for a in 0..dim {
                t[base + a * inner] = buf[a];
            }
        }
    }
}

/// Pointwise norm of a tensor in the metric `g`: covectors are mapped by
/// L⁻¹ and vectors by Lᵀ where G = LLᵀ, then the Frobenius norm is taken.
pub fn pointwise_norm(components: &[f64], covariant: usize, contravariant: usize, g: &SpdMatrix) -> Result<f64> {
    let dim = g.dim();
    let l = g.mat().cholesky().ok_or(Error::NotPositiveDefinite { min_eig: 0.0, eps: 0.0 })?;
    let rank = covariant + contravariant;
    let mut t = components.to_vec();
    if covariant > 0 {
        let linv = l.inverse()?;
        for slot in 0..covariant {
            apply_on_slot(&mut t, dim, rank, slot, &linv);
        }
    }
    let lt = l.transpose();
    for slot in covariant..rank {
        apply_on_slot(&mut t, dim, rank, slot, &lt);
    }
    Ok(t.iter().map(|v| v * v).sum::<f64>().sqrt())
}

/// Discrete L^p norm with μ_g weights; `p = f64::INFINITY` gives the
/// essential supremum over regular nodes.
pub fn lp_norm(u: &TensorField, p: f64, g: &MetricField) -> Result<f64> {
    same_chart(u.chart(), g.chart())?;
    if !(p >= 1.0) {
        return Err(Error::InvalidArgument(format!("p = {p} must be at least 1")));
    }
    let weights = measure_weights(g)?;
    let mut acc = 0.0f64;
    for k in 0..g.n_nodes() {
        if g.is_singular(k) {
            continue;
        }
        let v = pointwise_norm(u.components(k), u.covariant, u.contravariant, g.value(k))?;
        if p.is_infinite() {
            acc = acc.max(v);
        } else {
            acc += weights[k] * v.powf(p);
        }
    }
    Ok(if p.is_infinite() { acc } else { acc.powf(1.0 / p) })
}

/// (e^{−κ·dl}, e^{κ·dl}) with κ = r + s + n/(2p).
pub fn norm_preservation_bounds(r: usize, s: usize, n: usize, p: f64, dl: f64) -> (f64, f64) {
    let kappa = (r + s) as f64 + n as f64 / (2.0 * p);
    ((-kappa * dl).exp(), (kappa * dl).exp())
}

/// (e^{−κ·dl}, e^{κ·dl}) with κ = r + s + n/p, the factor obtained from the
/// pointwise bound e^{dl} per index and the density bound e^{n·dl}.
pub fn norm_comparison_bounds(r: usize, s: usize, n: usize, p: f64, dl: f64) -> (f64, f64) {
    let kappa = (r + s) as f64 + n as f64 / p;
    ((-kappa * dl).exp(), (kappa * dl).exp())
}

