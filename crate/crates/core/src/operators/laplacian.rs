//! Weak-form assembly of Δ_g and −div_g A∇ on a grid.
//!
//! Sign convention: the assembled operator is positive semi-definite,
//! ⟨Δu, u⟩_μ = ∫ |∇u|²_g dμ_g ≥ 0.
//!
//! Each grid cell carries the coefficient K = √det G · G⁻¹A averaged over
//! its corners. The cell energy is the average over the 2^d corners of
//! ∇_c uᵀ K ∇_c u, where ∇_c u uses the one-sided differences along the d
//! cell edges meeting at corner c. For diagonal K this reproduces the
//! (2d+1)-point stencil; every corner term is a positive semi-definite form,
//! so the assembly is symmetric and annihilates constants.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::{same_chart, EllField, MetricField};
use crate::linalg::{spd_det, spd_inv, Mat};

use super::sparse::{BoundaryCondition, SparseOperator};

/// Per-node coefficient √det G · G⁻¹A and density √det G.
fn node_coefficients(g: &MetricField, a: Option<&EllField>) -> Result<(Vec<Mat>, Vec<f64>)> {
    let filled = g.filled_values()?;
    let out = filled
        .par_iter()
        .enumerate()
        .map(|(k, gv)| {
            let sq = spd_det(gv)?.sqrt();
            let ginv = spd_inv(gv)?;
            let k_mat = match a {
                None => ginv.mat().scale(sq),
                Some(a) => ginv.mat().matmul(a.value(k)).scale(sq).symmetrized(),
            };
            Ok((k_mat, sq))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(out.into_iter().unzip())
}

/// Assembles m⁻¹S over all nodes.
pub fn assemble_laplacian(g: &MetricField, a: Option<&EllField>, bc: BoundaryCondition) -> Result<SparseOperator> {
    assemble_on(g, a, bc, None)
}

/// Assembles on the cells whose corners all lie in `active`; the dofs are
/// the active nodes touched by such cells. With Dirichlet conditions the
/// non-periodic boundary nodes are removed from the dofs.
pub fn assemble_on(g: &MetricField, a: Option<&EllField>, bc: BoundaryCondition, active: Option<&[bool]>) -> Result<SparseOperator> {
    if let Some(a) = a {
        same_chart(a.chart(), g.chart())?;
    }
    let chart = g.chart();
    let d = chart.dim();
    let nc = 1usize << d;
    let (coef, density) = node_coefficients(g, a)?;
    let vol = chart.cell_volume();
    let h = chart.spacing();

    let mut cells = Vec::new();
    for c in 0..chart.n_cells() {
        let corners = chart.cell_corners(c);
        let corners = &corners[..nc];
        if let Some(act) = active {
            if !corners.iter().all(|&k| act[k]) {
                continue;
            }
        }
        if corners.iter().all(|&k| g.is_singular(k)) {
            return Err(Error::SingularCell { cell: c });
        }
        cells.push(c);
    }

    let mut touched = vec![false; chart.n_nodes()];
    for &c in &cells {
        for &k in &chart.cell_corners(c)[..nc] {
            touched[k] = true;
        }
    }
    let mut node_to_dof = vec![usize::MAX; chart.n_nodes()];
    let mut dofs = Vec::new();
    for k in 0..chart.n_nodes() {
        if touched[k] && !(bc == BoundaryCondition::Dirichlet && chart.is_boundary(k)) {
            node_to_dof[k] = dofs.len();
            dofs.push(k);
        }
    }
    if dofs.is_empty() {
        return Err(Error::EmptyRegion);
    }

    // corner gradient operators: row i of D_c has entries for corners c and c ^ (1 << i)
    let locals: Vec<(usize, Vec<f64>)> = cells
        .par_iter()
        .map(|&c| {
            let corners = chart.cell_corners(c);
            let mut kc = Mat::zeros(d);
            for &k in &corners[..nc] {
                kc = kc.add(&coef[k]);
            }
            let kc = kc.scale(1.0 / nc as f64);
            let mut local = vec![0.0; nc * nc];
            let w = vol / nc as f64;
            for corner in 0..nc {
                // ∂_i u = s_i (u[corner ^ e_i] − u[corner]) / h_i
                let mut coeffs = [(0usize, 0usize, 0.0f64); 4];
                for i in 0..d {
                    let s = if (corner >> i) & 1 == 0 { 1.0 } else { -1.0 };
                    coeffs[i] = (corner ^ (1 << i), corner, s / h[i]);
                }
                for i in 0..d {
                    let (pi, qi, ci) = coeffs[i];
                    for j in 0..d {
                        let (pj, qj, cj) = coeffs[j];
                        let kij = w * kc[(i, j)] * ci * cj;
                        if kij == 0.0 {
                            continue;
                        }
                        local[pi * nc + pj] += kij;
                        local[pi * nc + qj] -= kij;
                        local[qi * nc + pj] -= kij;
                        local[qi * nc + qj] += kij;
                    }
                }
            }
            (c, local)
        })
        .collect();

    let mut mass = vec![0.0; dofs.len()];
    let mut triplets = Vec::with_capacity(cells.len() * nc * nc);
    for (c, local) in &locals {
        let corners = chart.cell_corners(*c);
        for p in 0..nc {
            let rp = node_to_dof[corners[p]];
            if rp == usize::MAX {
                continue;
            }
            mass[rp] += density[corners[p]] * vol / nc as f64;
            for q in 0..nc {
                let rq = node_to_dof[corners[q]];
                let v = local[p * nc + q];
                if rq == usize::MAX || v == 0.0 {
                    continue;
                }
                triplets.push((rp, rq, v));
            }
        }
    }
    Ok(SparseOperator::from_triplets(chart.clone(), bc, dofs, mass, triplets))
}
