//! Builders for explicit example metrics: a conformal jump that no smooth
//! metric approximates, conformal annuli at infinite distance from δ, a pair
//! of distinct metrics with equal distance and volume, and graphs of
//! Lipschitz functions.

mod graphs;
mod sturm;

pub use graphs::{lipschitz_graph_suite, GraphFunction, GraphSuiteReport};
pub use sturm::{covering_tube_radius, sturm_pair, CurveNetwork, Polyline, SturmPair, SturmReport};

use crate::chart::GridChart;
use crate::error::{Error, Result};
use crate::field::{build_field, MetricField};
use crate::linalg::Mat;

/// f·δ with f = 1 on the open Euclidean ball of `ball_radius` about the
/// origin and f = `jump` outside.
pub fn nonapprox_metric(chart: &GridChart, jump: f64, ball_radius: f64) -> Result<MetricField> {
    if !(jump >= 1.0) || !jump.is_finite() {
        return Err(Error::InvalidArgument(format!("jump {jump} must be finite and at least 1")));
    }
    if !(ball_radius > 0.0) {
        return Err(Error::InvalidArgument("ball radius must be positive".into()));
    }
    let d = chart.dim();
    let field = build_field(chart, |x| {
        let r2: f64 = x.iter().map(|v| v * v).sum();
        Mat::scalar(d, if r2 < ball_radius * ball_radius { 1.0 } else { jump })
    })?;
    Ok(field.with_label(format!("nonapprox(K={jump})")))
}

/// Index j of the shell containing x: the number of radii not exceeding
/// the max-norm of x.
pub fn annulus_index(radii: &[f64], x: &[f64]) -> usize {
    let r = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    radii.partition_point(|&b| b <= r)
}

/// Generator of 2^j·δ on shell j, where shell 0 is the max-norm box inside
/// the first radius and shell j lies between radii j−1 and j.
pub fn unbounded_conformal(radii: Vec<f64>, dim: usize) -> Result<impl Fn(&[f64]) -> Mat + Sync + Clone> {
    if radii.windows(2).any(|w| !(w[1] > w[0])) || radii.first().map_or(false, |r| !(*r > 0.0)) {
        return Err(Error::InvalidArgument("radii must be positive and strictly ascending".into()));
    }
    Ok(move |x: &[f64]| Mat::scalar(dim, (annulus_index(&radii, x) as f64).exp2()))
}
