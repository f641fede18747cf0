use std::collections::VecDeque;
use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::MetricField;
use crate::geometry::distance_map;
use crate::linalg::{eig_symmetric, Mat};

use super::laplacian::assemble_on;
use super::sparse::{cg, BoundaryCondition, SparseOperator, CG_TOLERANCE};

/// Fewest nodes a discrete ball may have.
pub const MIN_BALL_NODES: usize = 8;
pub const EIGEN_TOLERANCE: f64 = 1e-10;
const MAX_SWEEPS: usize = 500;
const BLOCK: usize = 4;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PoincareMeasurement {
    pub center: usize,
    pub radius: f64,
    pub ball_nodes: usize,
    pub lambda1: f64,
    /// 1/√λ₁
    pub c1: f64,
    pub sweeps: usize,
}

fn connected_component(op: &SparseOperator, start: usize) -> Vec<bool> {
    let mut seen = vec![false; op.n()];
    let mut queue = VecDeque::from([start]);
    seen[start] = true;
    while let Some(r) = queue.pop_front() {
        for p in op.row_ptr[r]..op.row_ptr[r + 1] {
            let c = op.cols[p];
            if !seen[c] && op.vals[p] != 0.0 {
                seen[c] = true;
                queue.push_back(c);
            }
        }
    }
    seen
}

/// Neumann operator on the connected part of the discrete ball around `center`.
pub fn ball_operator(g: &MetricField, center: usize, r: f64, order: usize) -> Result<SparseOperator> {
    let map = distance_map(g, center, order)?;
    let active: Vec<bool> = map.values.iter().map(|d| *d <= r).collect();
    let op = match assemble_on(g, None, BoundaryCondition::Neumann, Some(&active)) {
        Ok(op) => op,
        Err(Error::EmptyRegion) => {
            return Err(Error::BallTooSmall { nodes: active.iter().filter(|a| **a).count() })
        }
        Err(e) => return Err(e),
    };
    let start = op.dof_of(center).ok_or(Error::BallTooSmall { nodes: 1 })?;
    let comp = connected_component(&op, start);
    let size = comp.iter().filter(|c| **c).count();
    if size < MIN_BALL_NODES {
        return Err(Error::BallTooSmall { nodes: size });
    }
    if size == op.n() {
        return Ok(op);
    }
    let mut narrowed = vec![false; g.n_nodes()];
    for (i, &k) in op.dofs.iter().enumerate() {
        narrowed[k] = comp[i];
    }
    assemble_on(g, None, BoundaryCondition::Neumann, Some(&narrowed))
}

fn deflate_constants(op: &SparseOperator, x: &mut [f64]) {
    let total: f64 = op.mass.iter().sum();
    let mean = x.iter().zip(&op.mass).map(|(a, m)| a * m).sum::<f64>() / total;
    x.iter_mut().for_each(|v| *v -= mean);
}

/// Gram-Schmidt in the mass inner product; dependent vectors are dropped.
fn orthonormalize(op: &SparseOperator, vs: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::new();
    for mut v in vs {
        deflate_constants(op, &mut v);
        let before = op.mass_inner(&v, &v).sqrt();
        for q in &out {
            let c = op.mass_inner(&v, q);
            v.iter_mut().zip(q).for_each(|(a, b)| *a -= c * b);
        }
        let norm = op.mass_inner(&v, &v).sqrt();
        if norm > 1e-8 * before && norm > 0.0 {
            v.iter_mut().for_each(|a| *a /= norm);
            out.push(v);
        }
    }
    out
}

/// Low Fourier modes over the bounding box of the dofs, ordered by |k|².
fn start_vectors(op: &SparseOperator) -> Vec<Vec<f64>> {
    let chart = &op.chart;
    let d = chart.dim();
    let mut lo = [f64::INFINITY; 4];
    let mut hi = [f64::NEG_INFINITY; 4];
    for &k in &op.dofs {
        let x = chart.coord(k);
        for a in 0..d {
            lo[a] = lo[a].min(x[a]);
            hi[a] = hi[a].max(x[a]);
        }
    }
    let mut freqs: Vec<[usize; 4]> = Vec::new();
    let span = 4usize.pow(d as u32);
    for flat in 1..span {
        let mut f = [0usize; 4];
        let mut r = flat;
        for a in 0..d {
            f[a] = r % 4;
            r /= 4;
        }
        if (0..d).any(|a| f[a] > 0 && hi[a] <= lo[a]) {
            continue;
        }
        freqs.push(f);
    }
    freqs.sort_by_key(|f| (f.iter().map(|v| v * v).sum::<usize>(), f.iter().rev().copied().collect::<Vec<_>>()));
    freqs
        .into_iter()
        .take(2 * BLOCK)
        .map(|f| {
            op.dofs
                .iter()
                .map(|&k| {
                    let x = chart.coord(k);
                    (0..d)
                        .map(|a| if f[a] == 0 { 1.0 } else { (PI * f[a] as f64 * (x[a] - lo[a]) / (hi[a] - lo[a])).cos() })
                        .product()
                })
                .collect()
        })
        .collect()
}

/// Smallest nonzero eigenvalue of m⁻¹S on a connected Neumann operator, by
/// inverse subspace iteration with constants deflated. The first block
/// vector starts from the lowest Fourier mode.
pub fn smallest_nonzero_eigenvalue(op: &SparseOperator) -> Result<(f64, usize)> {
    let n = op.n();
    let diag = op.diagonal();
    let mut block = orthonormalize(op, start_vectors(op));
    block.truncate(BLOCK.min(n.saturating_sub(1)));
    if block.is_empty() {
        return Err(Error::BallTooSmall { nodes: n });
    }
    let mut last = f64::INFINITY;
    for sweep in 1..=MAX_SWEEPS {
        let mut next = Vec::with_capacity(block.len());
        for x in &block {
            let b: Vec<f64> = x.iter().zip(&op.mass).map(|(a, m)| a * m).collect();
            let mut y = cg(|p, q| op.stiffness_apply(p, q), &diag, &b, CG_TOLERANCE, 10 * n)?.x;
            deflate_constants(op, &mut y);
            next.push(y);
        }
        let basis = orthonormalize(op, next);
        let k = basis.len();
        if k == 0 {
            return Err(Error::SolverDivergence { residual: f64::NAN });
        }
        let mut proj = Mat::zeros(k);
        for i in 0..k {
            for j in i..k {
                let v = op.energy(&basis[i], &basis[j]);
                proj[(i, j)] = v;
                proj[(j, i)] = v;
            }
        }
        let eig = eig_symmetric(&proj)?;
        let q = eig.vectors();
        block = (0..k)
            .map(|c| (0..n).map(|r| (0..k).map(|i| basis[i][r] * q[(i, c)]).sum()).collect())
            .collect();
        let lambda = eig.values()[0];
        if (lambda - last).abs() <= EIGEN_TOLERANCE * lambda.abs() {
            return Ok((lambda, sweep));
        }
        last = lambda;
    }
    Err(Error::SolverDivergence { residual: f64::NAN })
}

/// Optimal homogeneous L²-Poincaré constant of the discrete g-ball B(center, r).
pub fn poincare_measure(g: &MetricField, center: usize, r: f64, order: usize) -> Result<PoincareMeasurement> {
    let op = ball_operator(g, center, r, order)?;
    let (lambda1, sweeps) = smallest_nonzero_eigenvalue(&op)?;
    Ok(PoincareMeasurement { center, radius: r, ball_nodes: op.n(), lambda1, c1: 1.0 / lambda1.sqrt(), sweeps })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PoincareConstants {
    pub c1: f64,
    pub c2: f64,
    pub eta: f64,
}

/// Transfers (p, q) Poincaré constants measured for h to any g at finite
/// extended distance `dl` from h.
pub fn poincare_propagate(c1_h: f64, c2_h: f64, eta_h: f64, dl: f64, n: usize, p: f64, q: f64) -> Result<PoincareConstants> {
    if !(c1_h > 0.0) || !(c2_h >= 0.0) || !(eta_h > 0.0) || !(dl >= 0.0) || !dl.is_finite() {
        return Err(Error::InvalidArgument("Poincaré constants need positive inputs and finite dl".into()));
    }
    if !(p >= 1.0) || !(q >= 1.0) {
        return Err(Error::InvalidArgument("exponents must be at least 1".into()));
    }
    let nf = n as f64;
    let measure = nf / (2.0 * p) + nf / (2.0 * q);
    Ok(PoincareConstants {
        c1: 2.0 * c1_h * ((measure + 1.0) * dl).exp(),
        c2: 2.0 * c2_h * (measure * dl).exp(),
        eta: eta_h * (2.0 * dl).exp(),
    })
}
