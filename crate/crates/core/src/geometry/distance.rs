use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::Serialize;

use crate::chart::GridChart;
use crate::error::{Error, Result};
use crate::field::{MetricField, ScalarField};
use crate::linalg::{Mat, MAX_DIM};

/// Default neighbour stencil order.
pub const DEFAULT_STENCIL_ORDER: usize = 2;

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Primitive integer offsets (gcd of components 1) with max-norm ≤ order.
/// 8 and 16 directions in 2D for orders 1 and 2; 26 and 98 in 3D.
pub fn stencil_offsets(dim: usize, order: usize) -> Vec<[isize; MAX_DIM]> {
    let order = order.max(1) as isize;
    let width = (2 * order + 1) as usize;
    let total = width.pow(dim as u32);
    let mut out = Vec::new();
    for flat in 0..total {
        let mut r = flat;
        let mut off = [0isize; MAX_DIM];
        for a in (0..dim).rev() {
            off[a] = (r % width) as isize - order;
            r /= width;
        }
        let g = off[..dim].iter().fold(0usize, |acc, &v| gcd(acc, v.unsigned_abs()));
        if g == 1 {
            out.push(off);
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DistanceMap {
    #[serde(skip)]
    pub chart: GridChart,
    pub source: usize,
    pub values: Vec<f64>,
    pub stencil_order: usize,
}

impl DistanceMap {
    pub fn to_scalar_field(&self) -> Result<ScalarField> {
        let mask = self.values.iter().map(|v| !v.is_finite()).collect();
        ScalarField::new(self.chart.clone(), self.values.clone(), mask)
    }
}

#[derive(PartialEq)]
struct Entry(f64, usize);

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then_with(|| other.1.cmp(&self.1))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Precomputed edge geometry for repeated shortest-path queries on one field.
pub struct DistanceSolver {
    chart: GridChart,
    mats: Vec<Mat>,
    mask: Vec<bool>,
    offsets: Vec<[isize; MAX_DIM]>,
    steps: Vec<[f64; MAX_DIM]>,
    order: usize,
}

impl DistanceSolver {
    pub fn new(g: &MetricField, order: usize) -> Result<DistanceSolver> {
        let chart = g.chart().clone();
        let d = chart.dim();
        let mats = g.filled_values()?.iter().map(|v| *v.mat()).collect();
        let offsets = stencil_offsets(d, order);
        let steps = offsets
            .iter()
            .map(|o| {
                let mut s = [0.0; MAX_DIM];
                for a in 0..d {
                    s[a] = o[a] as f64 * chart.spacing()[a];
                }
                s
            })
            .collect();
        Ok(DistanceSolver { chart, mats, mask: g.mask().to_vec(), offsets, steps, order })
    }

    /// Trapezoid length of the straight segment along stencil offset `i` from `a` to `b`.
    #[inline]
    fn edge(&self, a: usize, b: usize, i: usize) -> f64 {
        let s = &self.steps[i];
        let d = self.chart.dim();
        0.5 * (self.mats[a].quad(&s[..d]).sqrt() + self.mats[b].quad(&s[..d]).sqrt())
    }

    pub fn map(&self, source: usize) -> Result<DistanceMap> {
        let n = self.chart.n_nodes();
        if source >= n {
            return Err(Error::InvalidArgument(format!("source node {source} out of range")));
        }
        if self.mask[source] {
            return Err(Error::SourceSingular(source));
        }
        let d = self.chart.dim();
        let mut dist = vec![f64::INFINITY; n];
        let mut done = vec![false; n];
        let mut heap = BinaryHeap::new();
        dist[source] = 0.0;
        heap.push(Entry(0.0, source));
        while let Some(Entry(du, u)) = heap.pop() {
            if done[u] {
                continue;
            }
            done[u] = true;
            for (i, off) in self.offsets.iter().enumerate() {
                if let Some(v) = self.chart.offset(u, &off[..d]) {
                    if done[v] {
                        continue;
                    }
                    let nd = du + self.edge(u, v, i);
                    if nd < dist[v] {
                        dist[v] = nd;
                        heap.push(Entry(nd, v));
                    }
                }
            }
        }
        Ok(DistanceMap { chart: self.chart.clone(), source, values: dist, stencil_order: self.order })
    }

    /// Largest violation of |d(a) − d(b)| ≤ edge(a, b) over all stencil edges.
    pub fn lipschitz_defect(&self, map: &DistanceMap) -> f64 {
        let d = self.chart.dim();
        let mut worst: f64 = 0.0;
        for a in 0..self.chart.n_nodes() {
            for (i, off) in self.offsets.iter().enumerate() {
                if let Some(b) = self.chart.offset(a, &off[..d]) {
                    if map.values[a].is_finite() && map.values[b].is_finite() {
                        worst = worst.max((map.values[a] - map.values[b]).abs() - self.edge(a, b, i));
                    }
                }
            }
        }
        worst
    }
}

/// Single-source shortest-path distances on the stencil graph.
pub fn distance_map(g: &MetricField, source: usize, order: usize) -> Result<DistanceMap> {
    DistanceSolver::new(g, order)?.map(source)
}

pub fn distance(g: &MetricField, x: usize, y: usize, order: usize) -> Result<f64> {
    Ok(distance_map(g, x, order)?.values[y])
}

/// Largest relative overestimate of Euclidean distance by the stencil graph,
/// measured from a corner of a unit-spacing grid over nodes at least half
/// the grid width away.
pub fn calibrate_stencil(dim: usize, order: usize) -> f64 {
    let n = match dim {
        1 => 33,
        2 => 41,
        3 => 15,
        _ => 9,
    };
    let chart = GridChart::uniform(dim, n, 0.0, (n - 1) as f64).expect("valid chart");
    let g = MetricField::euclidean(chart.clone());
    let map = distance_map(&g, 0, order).expect("euclidean map");
    let mut worst: f64 = 0.0;
    for k in 1..chart.n_nodes() {
        let x = chart.coord(k);
        let r = x[..dim].iter().map(|v| v * v).sum::<f64>().sqrt();
        if r >= 0.5 * (n - 1) as f64 {
            worst = worst.max(map.values[k] / r - 1.0);
        }
    }
    worst
}
