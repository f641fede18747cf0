//! Metric, endomorphism and scalar fields over a grid chart.

use std::collections::VecDeque;

use rayon::prelude::*;

use crate::chart::GridChart;
use crate::error::{Error, Result};
use crate::linalg::{Mat, SpdMatrix, MAX_DIM};

/// Default cap on the fraction of singular nodes in a field.
pub const SING_FRACTION_MAX: f64 = 0.01;

fn check_fraction(mask: &[bool], cap: f64) -> Result<()> {
    let n = mask.len();
    let k = mask.iter().filter(|m| **m).count();
    let fraction = k as f64 / n as f64;
    if fraction > cap {
        return Err(Error::TooSingular { fraction, cap });
    }
    Ok(())
}

/// A measurable metric on a chart: one SPD matrix per node plus a singular mask.
/// Masked nodes hold an identity placeholder.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricField {
    chart: GridChart,
    values: Vec<SpdMatrix>,
    mask: Vec<bool>,
    label: String,
}

impl MetricField {
    pub fn new(chart: GridChart, values: Vec<SpdMatrix>, mask: Vec<bool>, label: impl Into<String>) -> Result<MetricField> {
        MetricField::with_cap(chart, values, mask, label, SING_FRACTION_MAX)
    }

    pub fn with_cap(
        chart: GridChart,
        mut values: Vec<SpdMatrix>,
        mask: Vec<bool>,
        label: impl Into<String>,
        cap: f64,
    ) -> Result<MetricField> {
        let n = chart.n_nodes();
        if values.len() != n || mask.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: values.len().min(mask.len()) });
        }
        let dim = chart.dim();
        if let Some(v) = values.iter().find(|v| v.dim() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, found: v.dim() });
        }
        check_fraction(&mask, cap)?;
        for (v, m) in values.iter_mut().zip(&mask) {
            if *m {
                *v = SpdMatrix::identity(dim);
            }
        }
        Ok(MetricField { chart, values, mask, label: label.into() })
    }

    pub fn constant(chart: GridChart, value: SpdMatrix) -> Result<MetricField> {
        if value.dim() != chart.dim() {
            return Err(Error::DimensionMismatch { expected: chart.dim(), found: value.dim() });
        }
        let n = chart.n_nodes();
        MetricField::new(chart, vec![value; n], vec![false; n], "constant")
    }

    pub fn euclidean(chart: GridChart) -> MetricField {
        let d = chart.dim();
        MetricField::constant(chart, SpdMatrix::identity(d)).expect("identity is valid")
    }

    pub fn chart(&self) -> &GridChart {
        &self.chart
    }

    pub fn values(&self) -> &[SpdMatrix] {
        &self.values
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> MetricField {
        self.label = label.into();
        self
    }

    #[inline]
    pub fn value(&self, node: usize) -> &SpdMatrix {
        &self.values[node]
    }

    #[inline]
    pub fn is_singular(&self, node: usize) -> bool {
        self.mask[node]
    }

    pub fn dim(&self) -> usize {
        self.chart.dim()
    }

    pub fn n_nodes(&self) -> usize {
        self.values.len()
    }

    pub fn singular_fraction(&self) -> f64 {
        self.mask.iter().filter(|m| **m).count() as f64 / self.mask.len() as f64
    }

    /// Values with every singular node replaced by the value at the nearest
    /// non-singular node (breadth-first over axis neighbours, ties resolved
    /// by ascending node index).
    pub fn filled_values(&self) -> Result<Vec<SpdMatrix>> {
        if !self.mask.iter().any(|m| *m) {
            return Ok(self.values.clone());
        }
        let src = nearest_regular(&self.chart, &self.mask)?;
        Ok(src.iter().map(|&s| self.values[s]).collect())
    }
}

/// For every node, the nearest unmasked node in axis-step distance.
pub(crate) fn nearest_regular(chart: &GridChart, mask: &[bool]) -> Result<Vec<usize>> {
    let n = chart.n_nodes();
    let d = chart.dim();
    let mut src = vec![usize::MAX; n];
    let mut queue = VecDeque::new();
    for k in 0..n {
        if !mask[k] {
            src[k] = k;
            queue.push_back(k);
        }
    }
    if queue.is_empty() {
        return Err(Error::AllSingular);
    }
    let mut off = [0isize; MAX_DIM];
    while let Some(k) = queue.pop_front() {
        for a in 0..d {
            for s in [-1isize, 1] {
                off[a] = s;
                if let Some(j) = chart.offset(k, &off[..d]) {
                    if src[j] == usize::MAX {
                        src[j] = src[k];
                        queue.push_back(j);
                    }
                }
                off[a] = 0;
            }
        }
    }
    Ok(src)
}

/// Builds a metric field from a generator evaluated at node coordinates.
/// Nodes with non-finite or non-positive-definite output are marked singular.
pub fn build_field<F>(chart: &GridChart, generator: F) -> Result<MetricField>
where
    F: Fn(&[f64]) -> Mat + Sync,
{
    build_field_with_cap(chart, generator, SING_FRACTION_MAX)
}

pub fn build_field_with_cap<F>(chart: &GridChart, generator: F, cap: f64) -> Result<MetricField>
where
    F: Fn(&[f64]) -> Mat + Sync,
{
    let d = chart.dim();
    let out: Vec<Option<SpdMatrix>> = (0..chart.n_nodes())
        .into_par_iter()
        .map(|k| {
            let x = chart.coord(k);
            let m = generator(&x[..d]);
            if m.dim() != d {
                return None;
            }
            SpdMatrix::new(m).ok()
        })
        .collect();
    let mask: Vec<bool> = out.iter().map(|v| v.is_none()).collect();
    let values = out.into_iter().map(|v| v.unwrap_or_else(|| SpdMatrix::identity(d))).collect();
    MetricField::with_cap(chart.clone(), values, mask, "generated", cap)
}

/// Conformal field f(x)·δ.
pub fn conformal_field<F>(chart: &GridChart, f: F) -> Result<MetricField>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let d = chart.dim();
    build_field(chart, |x| Mat::scalar(d, f(x)))
}

/// Tightest constants (c_lower, c_upper) with c_lower·δ ≤ g ≤ c_upper·δ as
/// forms over the non-singular nodes of a region.
pub fn validate_rrm(g: &MetricField, region: &[usize]) -> Result<(f64, f64)> {
    let mut lo = f64::INFINITY;
    let mut hi: f64 = 0.0;
    let mut seen = false;
    for &k in region {
        if g.is_singular(k) {
            continue;
        }
        let e = g.value(k).eig();
        lo = lo.min(e.min());
        hi = hi.max(e.max());
        seen = true;
    }
    if !seen {
        return Err(Error::EmptyRegion);
    }
    Ok((lo, hi))
}

/// Field of invertible endomorphisms, one matrix per node.
#[derive(Clone, Debug, PartialEq)]
pub struct EllField {
    chart: GridChart,
    values: Vec<Mat>,
    mask: Vec<bool>,
    selfadjoint_wrt: Option<String>,
}

impl EllField {
    pub fn new(chart: GridChart, mut values: Vec<Mat>, mask: Vec<bool>, selfadjoint_wrt: Option<String>) -> Result<EllField> {
        let n = chart.n_nodes();
        if values.len() != n || mask.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: values.len().min(mask.len()) });
        }
        let d = chart.dim();
        for (k, v) in values.iter_mut().enumerate() {
            if mask[k] {
                *v = Mat::identity(d);
                continue;
            }
            if v.dim() != d {
                return Err(Error::DimensionMismatch { expected: d, found: v.dim() });
            }
            if !v.is_finite() {
                return Err(Error::NonFinite);
            }
            let det = v.det();
            if det == 0.0 || !det.is_finite() {
                return Err(Error::NotPositiveDefinite { min_eig: 0.0, eps: 0.0 });
            }
        }
        Ok(EllField { chart, values, mask, selfadjoint_wrt })
    }

    pub fn identity(chart: GridChart) -> EllField {
        let n = chart.n_nodes();
        let d = chart.dim();
        EllField { chart, values: vec![Mat::identity(d); n], mask: vec![false; n], selfadjoint_wrt: None }
    }

    pub fn constant(chart: GridChart, m: Mat) -> Result<EllField> {
        let n = chart.n_nodes();
        EllField::new(chart, vec![m; n], vec![false; n], None)
    }

    pub fn chart(&self) -> &GridChart {
        &self.chart
    }

    pub fn values(&self) -> &[Mat] {
        &self.values
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    #[inline]
    pub fn value(&self, node: usize) -> &Mat {
        &self.values[node]
    }

    pub fn selfadjoint_wrt(&self) -> Option<&str> {
        self.selfadjoint_wrt.as_deref()
    }

    /// Pointwise inverse field.
    pub fn inverse(&self) -> Result<EllField> {
        let values = self.values.iter().map(|m| m.inverse()).collect::<Result<Vec<_>>>()?;
        EllField::new(self.chart.clone(), values, self.mask.clone(), self.selfadjoint_wrt.clone())
    }

    /// Pointwise product self(x)·other(x).
    pub fn compose(&self, other: &EllField) -> Result<EllField> {
        if self.chart != other.chart {
            return Err(Error::ChartMismatch);
        }
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a.matmul(b)).collect();
        let mask = self.mask.iter().zip(&other.mask).map(|(a, b)| *a || *b).collect();
        EllField::new(self.chart.clone(), values, mask, None)
    }

    /// Essential supremum of the spectral norms of B and of B⁻¹.
    pub fn ess_sup_norms(&self) -> (f64, f64) {
        let mut nb: f64 = 0.0;
        let mut ninv: f64 = 0.0;
        for (k, v) in self.values.iter().enumerate() {
            if self.mask[k] {
                continue;
            }
            nb = nb.max(v.op_norm());
            if let Ok(i) = v.inverse() {
                ninv = ninv.max(i.op_norm());
            }
        }
        (nb, ninv)
    }
}

/// Real values per node; masked nodes carry no meaningful value.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField {
    chart: GridChart,
    values: Vec<f64>,
    mask: Vec<bool>,
}

impl ScalarField {
    pub fn new(chart: GridChart, values: Vec<f64>, mask: Vec<bool>) -> Result<ScalarField> {
        let n = chart.n_nodes();
        if values.len() != n || mask.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: values.len().min(mask.len()) });
        }
        Ok(ScalarField { chart, values, mask })
    }

    pub fn from_values(chart: GridChart, values: Vec<f64>) -> Result<ScalarField> {
        let n = values.len();
        ScalarField::new(chart, values, vec![false; n])
    }

    pub fn from_fn<F: Fn(&[f64]) -> f64>(chart: &GridChart, f: F) -> ScalarField {
        let d = chart.dim();
        let values = (0..chart.n_nodes()).map(|k| f(&chart.coord(k)[..d])).collect();
        ScalarField { chart: chart.clone(), values, mask: vec![false; chart.n_nodes()] }
    }

    pub fn chart(&self) -> &GridChart {
        &self.chart
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    #[inline]
    pub fn value(&self, node: usize) -> f64 {
        self.values[node]
    }
}

pub(crate) fn same_chart(a: &GridChart, b: &GridChart) -> Result<()> {
    if a != b {
        return Err(Error::ChartMismatch);
    }
    Ok(())
}
