use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::chart::GridChart;
use crate::error::{Error, Result};
use crate::field::{MetricField, ScalarField};
use crate::geometry::graph_metric;

/// Lipschitz functions whose graphs give metrics with creases.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum GraphFunction {
    Zero,
    /// |x|
    Cone,
    /// Triangle wave along the first axis with `period` grid steps and the
    /// given slope; creases sit at its peaks and troughs.
    Sawtooth { period: usize, slope: f64 },
    /// Sum of `count` functions a·|⟨n, x⟩ − c| with random unit normals n.
    RandomCreases { count: usize, seed: u64 },
}

impl GraphFunction {
    pub fn name(&self) -> &'static str {
        match self {
            GraphFunction::Zero => "zero",
            GraphFunction::Cone => "cone",
            GraphFunction::Sawtooth { .. } => "sawtooth",
            GraphFunction::RandomCreases { .. } => "random-creases",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GraphSuiteReport {
    pub function: String,
    pub nodes: usize,
    /// nodes within half a grid step of a crease
    pub crease_nodes: usize,
    pub crease_fraction: f64,
    pub mask_fraction: f64,
    /// largest finite-difference slope of f
    pub max_slope: f64,
}

struct Crease {
    normal: [f64; 4],
    offset: f64,
    amplitude: f64,
}

/// Samples f and flags crease nodes.
fn sample(function: &GraphFunction, chart: &GridChart) -> Result<(Vec<f64>, Vec<bool>)> {
    let d = chart.dim();
    let half = 0.5 * chart.spacing().iter().cloned().fold(f64::INFINITY, f64::min);
    let n = chart.n_nodes();
    match function {
        GraphFunction::Zero => Ok((vec![0.0; n], vec![false; n])),
        GraphFunction::Cone => Ok((0..n)
            .map(|k| {
                let x = chart.coord(k);
                let r = x[..d].iter().map(|v| v * v).sum::<f64>().sqrt();
                (r, r < half)
            })
            .unzip()),
        GraphFunction::Sawtooth { period, slope } => {
            if *period < 2 {
                return Err(Error::InvalidArgument("sawtooth period must be at least 2 grid steps".into()));
            }
            let h = chart.spacing()[0];
            let p = *period as f64;
            Ok((0..n)
                .map(|k| {
                    let i = chart.multi_index(k)[0] as f64;
                    let phase = (i / p).fract();
                    let tri = if phase < 0.5 { phase } else { 1.0 - phase };
                    let crease = phase == 0.0 || phase == 0.5;
                    (slope * h * p * tri, crease)
                })
                .unzip())
        }
        GraphFunction::RandomCreases { count, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let creases: Vec<Crease> = (0..*count)
                .map(|_| {
                    let mut normal = [0.0; 4];
                    loop {
                        for v in normal.iter_mut().take(d) {
                            *v = rng.gen_range(-1.0..1.0);
                        }
                        let len = normal[..d].iter().map(|v| v * v).sum::<f64>().sqrt();
                        if len > 0.1 {
                            normal.iter_mut().for_each(|v| *v /= len);
                            break;
                        }
                    }
                    let centre = chart.coord(rng.gen_range(0..n));
                    let offset = (0..d).map(|a| normal[a] * centre[a]).sum();
                    Crease { normal, offset, amplitude: rng.gen_range(0.2..1.0) }
                })
                .collect();
            Ok((0..n)
                .map(|k| {
                    let x = chart.coord(k);
                    let mut value = 0.0;
                    let mut crease = false;
                    for c in &creases {
                        let s = (0..d).map(|a| c.normal[a] * x[a]).sum::<f64>() - c.offset;
                        value += c.amplitude * s.abs();
                        crease |= s.abs() < half;
                    }
                    (value, crease)
                })
                .unzip())
        }
    }
}

fn max_slope(chart: &GridChart, f: &[f64]) -> f64 {
    let d = chart.dim();
    let mut worst: f64 = 0.0;
    let mut off = [0isize; 4];
    for k in 0..chart.n_nodes() {
        for a in 0..d {
            off[a] = 1;
            if let Some(j) = chart.offset(k, &off[..d]) {
                worst = worst.max((f[j] - f[k]).abs() / chart.spacing()[a]);
            }
            off[a] = 0;
        }
    }
    worst
}

/// Metric of the graph of a Lipschitz function over the flat chart, as a
/// subset of the chart times a line.
pub fn lipschitz_graph_suite(function: &GraphFunction, chart: &GridChart) -> Result<(MetricField, GraphSuiteReport)> {
    let (values, creases) = sample(function, chart)?;
    let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let pad = 1.0 + 0.1 * (hi - lo);
    let line = GridChart::new(vec![lo - pad], vec![(hi - lo + 2.0 * pad) / 64.0], vec![65], vec![false])?;
    let f = ScalarField::from_values(chart.clone(), values)?;
    let g = MetricField::euclidean(chart.clone());
    let g_line = MetricField::euclidean(line);
    let metric = graph_metric(&f, &g, &g_line)?.with_label(format!("graph({})", function.name()));
    let crease_nodes = creases.iter().filter(|c| **c).count();
    let n = chart.n_nodes();
    let report = GraphSuiteReport {
        function: function.name().to_string(),
        nodes: n,
        crease_nodes,
        crease_fraction: crease_nodes as f64 / n as f64,
        mask_fraction: metric.singular_fraction(),
        max_slope: max_slope(chart, f.values()),
    };
    Ok((metric, report))
}
