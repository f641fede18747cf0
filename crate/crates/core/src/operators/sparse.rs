use serde::Serialize;

use crate::chart::GridChart;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum BoundaryCondition {
    Neumann,
    Dirichlet,
}

/// Assembled operator m⁻¹S: symmetric stiffness matrix S (CSR) and lumped
/// mass m over a set of degrees of freedom, each of which is a chart node.
#[derive(Clone, Debug)]
pub struct SparseOperator {
    pub chart: GridChart,
    pub bc: BoundaryCondition,
    /// dof index → node index
    pub dofs: Vec<usize>,
    pub mass: Vec<f64>,
    pub row_ptr: Vec<usize>,
    pub cols: Vec<usize>,
    pub vals: Vec<f64>,
    pub symmetric: bool,
}

impl SparseOperator {
    pub(crate) fn from_triplets(
        chart: GridChart,
        bc: BoundaryCondition,
        dofs: Vec<usize>,
        mass: Vec<f64>,
        mut triplets: Vec<(usize, usize, f64)>,
    ) -> SparseOperator {
        let n = dofs.len();
        triplets.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut row_ptr = vec![0usize; n + 1];
        let mut cols = Vec::with_capacity(triplets.len());
        let mut vals: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in triplets {
            if last == Some((r, c)) {
                *vals.last_mut().expect("entry exists") += v;
            } else {
                cols.push(c);
                vals.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        SparseOperator { chart, bc, dofs, mass, row_ptr, cols, vals, symmetric: true }
    }

    pub fn n(&self) -> usize {
        self.dofs.len()
    }

    /// (row, col, value) entries of S.
    pub fn triplets(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::with_capacity(self.vals.len());
        for r in 0..self.n() {
            for p in self.row_ptr[r]..self.row_ptr[r + 1] {
                out.push((r, self.cols[p], self.vals[p]));
            }
        }
        out
    }

    pub fn entry(&self, r: usize, c: usize) -> f64 {
        for p in self.row_ptr[r]..self.row_ptr[r + 1] {
            if self.cols[p] == c {
                return self.vals[p];
            }
        }
        0.0
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n()).map(|r| self.entry(r, r)).collect()
    }

    /// y = S x
    pub fn stiffness_apply(&self, x: &[f64], y: &mut [f64]) {
        for r in 0..self.n() {
            let mut s = 0.0;
            for p in self.row_ptr[r]..self.row_ptr[r + 1] {
                s += self.vals[p] * x[self.cols[p]];
            }
            y[r] = s;
        }
    }

    /// Δu = m⁻¹ S u
    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n()];
        self.stiffness_apply(u, &mut y);
        for (v, m) in y.iter_mut().zip(&self.mass) {
            *v /= m;
        }
        y
    }

    /// uᵀ S v
    pub fn energy(&self, u: &[f64], v: &[f64]) -> f64 {
        let mut y = vec![0.0; self.n()];
        self.stiffness_apply(v, &mut y);
        u.iter().zip(&y).map(|(a, b)| a * b).sum()
    }

    /// ⟨u, v⟩ in the mass-weighted inner product.
    pub fn mass_inner(&self, u: &[f64], v: &[f64]) -> f64 {
        u.iter().zip(v).zip(&self.mass).map(|((a, b), m)| a * b * m).sum()
    }

    /// Largest |S_ij − S_ji|.
    pub fn symmetry_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (r, c, v) in self.triplets() {
            worst = worst.max((v - self.entry(c, r)).abs());
        }
        worst
    }

    /// Restricts a full-chart nodal vector to the dofs.
    pub fn gather(&self, nodal: &[f64]) -> Vec<f64> {
        self.dofs.iter().map(|&k| nodal[k]).collect()
    }

    /// Expands a dof vector to all chart nodes (NaN off the dofs).
    pub fn scatter(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![f64::NAN; self.chart.n_nodes()];
        for (i, &k) in self.dofs.iter().enumerate() {
            out[k] = x[i];
        }
        out
    }

    pub fn dof_of(&self, node: usize) -> Option<usize> {
        self.dofs.binary_search(&node).ok()
    }
}

/// Residual target and iteration cap of the conjugate-gradient solver.
pub const CG_TOLERANCE: f64 = 1e-12;
/// Relative residuals above this after the iteration cap are failures.
pub const CG_FAILURE: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct CgOutcome {
    pub x: Vec<f64>,
    pub iterations: usize,
    pub relative_residual: f64,
}

/// Jacobi-preconditioned conjugate gradients for a symmetric positive
/// (semi)definite operator, starting from zero.
pub fn cg<A>(apply: A, diag: &[f64], b: &[f64], tol: f64, max_iter: usize) -> Result<CgOutcome>
where
    A: Fn(&[f64], &mut [f64]),
{
    let n = b.len();
    let bnorm = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    let mut x = vec![0.0; n];
    if bnorm == 0.0 {
        return Ok(CgOutcome { x, iterations: 0, relative_residual: 0.0 });
    }
    let inv: Vec<f64> = diag.iter().map(|d| if *d > 0.0 { 1.0 / d } else { 1.0 }).collect();
    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(&inv).map(|(a, c)| a * c).collect();
    let mut p = z.clone();
    let mut ap = vec![0.0; n];
    let mut rz: f64 = r.iter().zip(&z).map(|(a, c)| a * c).sum();
    let mut rel = 1.0;
    let mut it = 0;
    while it < max_iter {
        apply(&p, &mut ap);
        let pap: f64 = p.iter().zip(&ap).map(|(a, c)| a * c).sum();
        if !(pap > 0.0) {
            break;
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        it += 1;
        rel = r.iter().map(|v| v * v).sum::<f64>().sqrt() / bnorm;
        if rel <= tol {
            break;
        }
        for i in 0..n {
            z[i] = r[i] * inv[i];
        }
        let rz_new: f64 = r.iter().zip(&z).map(|(a, c)| a * c).sum();
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    if !(rel <= CG_FAILURE) {
        return Err(Error::SolverDivergence { residual: rel });
    }
    Ok(CgOutcome { x, iterations: it, relative_residual: rel })
}
