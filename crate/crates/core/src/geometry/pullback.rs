use rayon::prelude::*;

use crate::chart::GridChart;
use crate::error::{Error, Result};
use crate::field::{same_chart, MetricField, ScalarField, SING_FRACTION_MAX};
use crate::linalg::{Mat, SpdMatrix, MAX_DIM};

/// A metric that can be evaluated at arbitrary target points.
/// `sample` returns the row-major m×m matrix, or None outside the domain.
pub trait MetricSampler: Sync {
    fn target_dim(&self) -> usize;
    fn sample(&self, y: &[f64]) -> Option<Vec<f64>>;
}

/// Constant Euclidean metric.
pub struct FlatMetric(pub usize);

impl MetricSampler for FlatMetric {
    fn target_dim(&self) -> usize {
        self.0
    }

    fn sample(&self, _y: &[f64]) -> Option<Vec<f64>> {
        let m = self.0;
        let mut v = vec![0.0; m * m];
        for i in 0..m {
            v[i * m + i] = 1.0;
        }
        Some(v)
    }
}

/// Multilinear interpolation of a metric field; singular nodes contribute
/// the value of their nearest regular node.
pub struct InterpolatedMetric {
    chart: GridChart,
    values: Vec<SpdMatrix>,
}

impl InterpolatedMetric {
    pub fn new(h: &MetricField) -> Result<InterpolatedMetric> {
        Ok(InterpolatedMetric { chart: h.chart().clone(), values: h.filled_values()? })
    }
}

impl MetricSampler for InterpolatedMetric {
    fn target_dim(&self) -> usize {
        self.chart.dim()
    }

    fn sample(&self, y: &[f64]) -> Option<Vec<f64>> {
        let m = self.chart.dim();
        let tol = 1e-9;
        let stencil = self.chart.interpolation_stencil(y, tol)?;
        let mut out = vec![0.0; m * m];
        for (node, w) in stencil {
            let v = self.values[node].mat();
            for i in 0..m {
                for j in 0..m {
                    out[i * m + j] += w * v[(i, j)];
                }
            }
        }
        Some(out)
    }
}

/// Block-diagonal metric a ⊕ b on the product of the two target spaces.
pub struct DirectSum<A, B>(pub A, pub B);

impl<A: MetricSampler, B: MetricSampler> MetricSampler for DirectSum<A, B> {
    fn target_dim(&self) -> usize {
        self.0.target_dim() + self.1.target_dim()
    }

    fn sample(&self, y: &[f64]) -> Option<Vec<f64>> {
        let p = self.0.target_dim();
        let q = self.1.target_dim();
        let a = self.0.sample(&y[..p])?;
        let b = self.1.sample(&y[p..p + q])?;
        let m = p + q;
        let mut out = vec![0.0; m * m];
        for i in 0..p {
            for j in 0..p {
                out[i * m + j] = a[i * p + j];
            }
        }
        for i in 0..q {
            for j in 0..q {
                out[(p + i) * m + p + j] = b[i * q + j];
            }
        }
        Some(out)
    }
}

/// Gᵢⱼ = Σ J_ai H_ab J_bj for a target metric H (m×m) and Jacobian J (m×n).
fn pull(jac: &[f64], h: &[f64], m: usize, n: usize) -> Mat {
    Mat::from_fn(n, |i, j| {
        let mut s = 0.0;
        for a in 0..m {
            let ja = jac[a * n + i];
            if ja == 0.0 {
                continue;
            }
            for b in 0..m {
                s += ja * h[a * m + b] * jac[b * n + j];
            }
        }
        s
    })
}

/// Pullback of a target metric. `image_at(k, a, s)` is the image of the
/// point x_k + s·h_a·e_a for s ∈ {−1, 0, 1}. The Jacobian is the central
/// difference with the grid spacing as step (one-sided on non-periodic
/// boundaries); nodes whose pulled-back matrix is not positive definite are
/// masked.
fn pullback_with<I>(chart: &GridChart, image_at: I, target: &dyn MetricSampler, cap: f64, label: &str) -> Result<MetricField>
where
    I: Fn(usize, usize, isize) -> Vec<f64> + Sync,
{
    let n = chart.dim();
    let m = target.target_dim();
    let results: Vec<Result<Option<SpdMatrix>>> = (0..chart.n_nodes())
        .into_par_iter()
        .map(|k| {
            let centre = image_at(k, 0, 0);
            if centre.len() != m {
                return Err(Error::DimensionMismatch { expected: m, found: centre.len() });
            }
            let mut jac = vec![0.0; m * n];
            let mut off = [0isize; MAX_DIM];
            for a in 0..n {
                off[a] = 1;
                let has_up = chart.offset(k, &off[..n]).is_some();
                off[a] = -1;
                let has_down = chart.offset(k, &off[..n]).is_some();
                off[a] = 0;
                let h = chart.spacing()[a];
                let (p, q, span) = match (has_up, has_down) {
                    (true, true) => (image_at(k, a, 1), image_at(k, a, -1), 2.0 * h),
                    (true, false) => (image_at(k, a, 1), centre.clone(), h),
                    (false, true) => (centre.clone(), image_at(k, a, -1), h),
                    (false, false) => return Err(Error::InvalidChart("axis without neighbours".into())),
                };
                for b in 0..m {
                    jac[b * n + a] = (p[b] - q[b]) / span;
                }
            }
            let hm = target.sample(&centre).ok_or(Error::ImageOutOfChart { node: k })?;
            let g = pull(&jac, &hm, m, n);
            Ok(SpdMatrix::new(g).ok())
        })
        .collect();
    let mut values = Vec::with_capacity(results.len());
    let mut mask = Vec::with_capacity(results.len());
    for r in results {
        match r? {
            Some(v) => {
                values.push(v);
                mask.push(false);
            }
            None => {
                values.push(SpdMatrix::identity(n));
                mask.push(true);
            }
        }
    }
    MetricField::with_cap(chart.clone(), values, mask, label, cap)
}

/// Pullback F*h of a target metric along a map F evaluated at node coordinates.
pub fn pullback_metric<F>(chart: &GridChart, f: F, target: &dyn MetricSampler) -> Result<MetricField>
where
    F: Fn(&[f64]) -> Vec<f64> + Sync,
{
    let n = chart.dim();
    let image_at = |k: usize, a: usize, s: isize| {
        let mut x = chart.coord(k);
        x[a] += s as f64 * chart.spacing()[a];
        f(&x[..n])
    };
    pullback_with(chart, image_at, target, SING_FRACTION_MAX, "pullback")
}

/// Metric of the graph x ↦ (x, f(x)) in M × M′ with the product metric g ⊕ g′.
/// `g_prime` lives on a one-dimensional chart containing the range of f.
pub fn graph_metric(f: &ScalarField, g: &MetricField, g_prime: &MetricField) -> Result<MetricField> {
    same_chart(f.chart(), g.chart())?;
    if g_prime.dim() != 1 {
        return Err(Error::DimensionMismatch { expected: 1, found: g_prime.dim() });
    }
    let chart = g.chart();
    let n = chart.dim();
    let image_at = |k: usize, a: usize, s: isize| {
        let mut y = chart.coord(k)[..n].to_vec();
        let mut off = [0isize; MAX_DIM];
        off[a] = s;
        let j = chart.offset(k, &off[..n]).unwrap_or(k);
        y[a] += s as f64 * chart.spacing()[a];
        y.push(f.value(j));
        y
    };
    let target = DirectSum(InterpolatedMetric::new(g)?, InterpolatedMetric::new(g_prime)?);
    let mut out = pullback_with(chart, image_at, &target, SING_FRACTION_MAX, "graph")?;
    if g.mask().iter().any(|m| *m) || f.mask().iter().any(|m| *m) {
        let mask: Vec<bool> = (0..chart.n_nodes()).map(|k| out.is_singular(k) || g.is_singular(k) || f.mask()[k]).collect();
        out = MetricField::new(chart.clone(), out.values().to_vec(), mask, "graph")?;
    }
    Ok(out)
}
