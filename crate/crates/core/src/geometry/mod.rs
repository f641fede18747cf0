//! Volume measure, length distance and pullbacks induced by a metric field.

mod distance;
mod pullback;

pub use distance::{
    calibrate_stencil, distance, distance_map, stencil_offsets, DistanceMap, DistanceSolver, DEFAULT_STENCIL_ORDER,
};
pub use pullback::{graph_metric, pullback_metric, DirectSum, FlatMetric, InterpolatedMetric, MetricSampler};

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{same_chart, MetricField};
use crate::linalg::spd_det;
use crate::metric_space::dl;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MeasureReport {
    pub region_nodes: usize,
    pub volume: f64,
}

/// Per-node volume weights √det g · dual cell volume (zero on singular nodes).
pub fn measure_weights(g: &MetricField) -> Result<Vec<f64>> {
    let chart = g.chart();
    (0..g.n_nodes())
        .map(|k| {
            if g.is_singular(k) {
                Ok(0.0)
            } else {
                Ok(spd_det(g.value(k))?.sqrt() * chart.dual_volume(k))
            }
        })
        .collect()
}

pub fn measure(g: &MetricField, region: &[usize]) -> Result<MeasureReport> {
    if region.is_empty() {
        return Err(Error::EmptyRegion);
    }
    let chart = g.chart();
    let mut volume = 0.0;
    for &k in region {
        if k >= g.n_nodes() {
            return Err(Error::InvalidArgument(format!("node {k} outside the chart")));
        }
        if !g.is_singular(k) {
            volume += spd_det(g.value(k))?.sqrt() * chart.dual_volume(k);
        }
    }
    Ok(MeasureReport { region_nodes: region.len(), volume })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PairRow {
    pub x: usize,
    pub y: usize,
    pub d_g: f64,
    pub d_h: f64,
    pub ratio: f64,
    pub within_bounds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ComparabilityReport {
    pub dl: f64,
    pub lower: f64,
    pub upper: f64,
    pub relative_slack: f64,
    pub rows: Vec<PairRow>,
    pub min_ratio: f64,
    pub max_ratio: f64,
    pub violations: usize,
}

/// Checks e^{−dl} d_g ≤ d_h ≤ e^{dl} d_g on node pairs, with the bounds
/// widened by the relative slack.
pub fn distance_comparability_check(
    g: &MetricField,
    h: &MetricField,
    pairs: &[(usize, usize)],
    order: usize,
    relative_slack: f64,
) -> Result<ComparabilityReport> {
    same_chart(g.chart(), h.chart())?;
    let d = dl(g, h)?.value;
    if !d.is_finite() {
        return Err(Error::NotInSameComponent);
    }
    let lower = (-d).exp();
    let upper = d.exp();
    let sg = DistanceSolver::new(g, order)?;
    let sh = DistanceSolver::new(h, order)?;
    let mut by_source: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for &(x, y) in pairs {
        by_source.entry(x).or_default().push(y);
    }
    let mut maps = BTreeMap::new();
    for &x in by_source.keys() {
        maps.insert(x, (sg.map(x)?, sh.map(x)?));
    }
    let mut rows = Vec::with_capacity(pairs.len());
    let (mut min_ratio, mut max_ratio) = (f64::INFINITY, 0.0f64);
    let mut violations = 0;
    for &(x, y) in pairs {
        let (mg, mh) = &maps[&x];
        let d_g = mg.values[y];
        let d_h = mh.values[y];
        let ratio = if d_g > 0.0 { d_h / d_g } else { 1.0 };
        let ok = ratio >= lower * (1.0 - relative_slack) && ratio <= upper * (1.0 + relative_slack);
        if !ok {
            violations += 1;
        }
        min_ratio = min_ratio.min(ratio);
        max_ratio = max_ratio.max(ratio);
        rows.push(PairRow { x, y, d_g, d_h, ratio, within_bounds: ok });
    }
    Ok(ComparabilityReport { dl: d, lower, upper, relative_slack, rows, min_ratio, max_ratio, violations })
}
