use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::MetricField;
use crate::linalg::{Mat, SpdMatrix, MAX_DIM};

/// Quadratic B-spline scaled to the support [-1, 1] (unnormalized).
pub fn mollifier_weight(s: f64) -> f64 {
    let t = 1.5 * s.abs();
    if t <= 0.5 {
        0.75 - t * t
    } else if t < 1.5 {
        0.5 * (1.5 - t) * (1.5 - t)
    } else {
        0.0
    }
}

/// Mollifies every coefficient with a tensor-product quadratic B-spline of
/// radius `epsilon`. Weights are renormalized per node over in-chart,
/// non-singular nodes, so the result is a convex combination of SPD values.
pub fn smooth_approx(g: &MetricField, epsilon: f64) -> Result<MetricField> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::InvalidArgument(format!("mollifier radius must be positive, got {epsilon}")));
    }
    let chart = g.chart();
    let d = chart.dim();
    for a in 0..d {
        if 2.0 * epsilon > chart.extent(a) {
            return Err(Error::EpsilonTooLarge { epsilon });
        }
    }
    let mut radius = [0isize; MAX_DIM];
    let mut w1: Vec<Vec<f64>> = Vec::with_capacity(d);
    for a in 0..d {
        let h = chart.spacing()[a];
        let r = (epsilon / h).floor() as isize;
        radius[a] = r;
        w1.push((-r..=r).map(|i| mollifier_weight(i as f64 * h / epsilon)).collect());
    }
    let widths: Vec<usize> = (0..d).map(|a| (2 * radius[a] + 1) as usize).collect();
    let total: usize = widths.iter().product();
    let mut offsets: Vec<([isize; MAX_DIM], f64)> = Vec::new();
    for flat in 0..total {
        let mut r = flat;
        let mut off = [0isize; MAX_DIM];
        let mut w = 1.0;
        for a in (0..d).rev() {
            let i = r % widths[a];
            r /= widths[a];
            off[a] = i as isize - radius[a];
            w *= w1[a][i];
        }
        if w > 0.0 {
            offsets.push((off, w));
        }
    }
    let values = (0..g.n_nodes())
        .into_par_iter()
        .map(|k| {
            if g.is_singular(k) {
                return Ok(SpdMatrix::identity(d));
            }
            let mut acc = Mat::zeros(d);
            let mut wsum = 0.0;
            for (off, w) in &offsets {
                if let Some(j) = chart.offset(k, &off[..d]) {
                    if g.is_singular(j) {
                        continue;
                    }
                    acc = acc.add(&g.value(j).mat().scale(*w));
                    wsum += w;
                }
            }
            if wsum == 0.0 {
                return Err(Error::EmptyKernelSupport { node: k });
            }
            SpdMatrix::new(acc.scale(1.0 / wsum))
        })
        .collect::<Result<Vec<_>>>()?;
    MetricField::new(chart.clone(), values, g.mask().to_vec(), format!("smooth({},{epsilon})", g.label()))
}
