//! Rectangular grid charts. Nodes are ordered row-major with the last axis fastest.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::MAX_DIM;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GridChart {
    origin: Vec<f64>,
    spacing: Vec<f64>,
    shape: Vec<usize>,
    periodic: Vec<bool>,
    #[serde(skip)]
    strides: Vec<usize>,
}

impl GridChart {
    pub fn new(origin: Vec<f64>, spacing: Vec<f64>, shape: Vec<usize>, periodic: Vec<bool>) -> Result<GridChart> {
        let dim = shape.len();
        if !(1..=MAX_DIM).contains(&dim) {
            return Err(Error::InvalidChart(format!("dimension {dim} not in 1..=4")));
        }
        if origin.len() != dim || spacing.len() != dim || periodic.len() != dim {
            return Err(Error::InvalidChart("origin, spacing, shape and periodic must have equal length".into()));
        }
        if spacing.iter().any(|h| !(h.is_finite() && *h > 0.0)) {
            return Err(Error::InvalidChart("spacing must be finite and positive".into()));
        }
        if origin.iter().any(|o| !o.is_finite()) {
            return Err(Error::InvalidChart("origin must be finite".into()));
        }
        if shape.iter().any(|&s| s < 2) {
            return Err(Error::InvalidChart("every axis needs at least 2 nodes".into()));
        }
        let mut strides = vec![1usize; dim];
        for a in (0..dim.saturating_sub(1)).rev() {
            strides[a] = strides[a + 1] * shape[a + 1];
        }
        Ok(GridChart { origin, spacing, shape, periodic, strides })
    }

    /// Non-periodic grid with `n` nodes per axis covering [lo, hi]^dim.
    pub fn uniform(dim: usize, n: usize, lo: f64, hi: f64) -> Result<GridChart> {
        if n < 2 {
            return Err(Error::InvalidChart("every axis needs at least 2 nodes".into()));
        }
        let h = (hi - lo) / (n - 1) as f64;
        GridChart::new(vec![lo; dim], vec![h; dim], vec![n; dim], vec![false; dim])
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.shape.len()
    }

    pub fn origin(&self) -> &[f64] {
        &self.origin
    }

    pub fn spacing(&self) -> &[f64] {
        &self.spacing
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn periodic(&self) -> &[bool] {
        &self.periodic
    }

    pub fn n_nodes(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn all_nodes(&self) -> Vec<usize> {
        (0..self.n_nodes()).collect()
    }

    #[inline]
    pub fn node_index(&self, idx: &[usize]) -> usize {
        let mut k = 0;
        for a in 0..self.dim() {
            k += idx[a] * self.strides[a];
        }
        k
    }

    #[inline]
    pub fn multi_index(&self, node: usize) -> [usize; MAX_DIM] {
        let mut idx = [0usize; MAX_DIM];
        let mut r = node;
        for a in 0..self.dim() {
            idx[a] = r / self.strides[a];
            r %= self.strides[a];
        }
        idx
    }

    #[inline]
    pub fn coord(&self, node: usize) -> [f64; MAX_DIM] {
        let idx = self.multi_index(node);
        let mut x = [0.0; MAX_DIM];
        for a in 0..self.dim() {
            x[a] = self.origin[a] + idx[a] as f64 * self.spacing[a];
        }
        x
    }

    /// Node reached by an integer offset, wrapping on periodic axes.
    #[inline]
    pub fn offset(&self, node: usize, off: &[isize]) -> Option<usize> {
        let idx = self.multi_index(node);
        let mut k = 0usize;
        for a in 0..self.dim() {
            let n = self.shape[a] as isize;
            let mut j = idx[a] as isize + off[a];
            if self.periodic[a] {
                j = j.rem_euclid(n);
            } else if j < 0 || j >= n {
                return None;
            }
            k += j as usize * self.strides[a];
        }
        Some(k)
    }

    /// Nearest node to a chart point (clamped on non-periodic axes).
    pub fn nearest_node(&self, x: &[f64]) -> usize {
        let mut idx = [0usize; MAX_DIM];
        for a in 0..self.dim() {
            let n = self.shape[a] as isize;
            let t = ((x[a] - self.origin[a]) / self.spacing[a]).round() as isize;
            idx[a] = if self.periodic[a] { t.rem_euclid(n) as usize } else { t.clamp(0, n - 1) as usize };
        }
        self.node_index(&idx[..self.dim()])
    }

    /// Coordinate-space volume of one grid cell.
    pub fn cell_volume(&self) -> f64 {
        self.spacing.iter().product()
    }

    /// Volume of the dual cell of a node: a full cell, halved for every
    /// non-periodic axis on which the node lies on the boundary.
    pub fn dual_volume(&self, node: usize) -> f64 {
        let idx = self.multi_index(node);
        let mut v = self.cell_volume();
        for a in 0..self.dim() {
            if !self.periodic[a] && (idx[a] == 0 || idx[a] == self.shape[a] - 1) {
                v *= 0.5;
            }
        }
        v
    }

    pub fn is_boundary(&self, node: usize) -> bool {
        let idx = self.multi_index(node);
        (0..self.dim()).any(|a| !self.periodic[a] && (idx[a] == 0 || idx[a] == self.shape[a] - 1))
    }

    /// Length of the chart along an axis.
    pub fn extent(&self, axis: usize) -> f64 {
        let cells = if self.periodic[axis] { self.shape[axis] } else { self.shape[axis] - 1 };
        cells as f64 * self.spacing[axis]
    }

    /// Number of cells along an axis.
    pub fn cells_along(&self, axis: usize) -> usize {
        if self.periodic[axis] {
            self.shape[axis]
        } else {
            self.shape[axis] - 1
        }
    }

    pub fn n_cells(&self) -> usize {
        (0..self.dim()).map(|a| self.cells_along(a)).product()
    }

    /// Corner nodes of a cell, indexed by the bit pattern of the corner.
    pub fn cell_corners(&self, cell: usize) -> [usize; 16] {
        let d = self.dim();
        let mut base = [0usize; MAX_DIM];
        let mut r = cell;
        for a in (0..d).rev() {
            let c = self.cells_along(a);
            base[a] = r % c;
            r /= c;
        }
        let mut out = [0usize; 16];
        for (bits, slot) in out.iter_mut().enumerate().take(1 << d) {
            let mut k = 0usize;
            for a in 0..d {
                let mut j = base[a] + ((bits >> a) & 1);
                if j == self.shape[a] {
                    j = 0;
                }
                k += j * self.strides[a];
            }
            *slot = k;
        }
        out
    }

    /// Locates a chart point for multilinear interpolation: the base
    /// multi-index of its cell and the fractional position inside it.
    pub fn locate(&self, x: &[f64], tol: f64) -> Option<([usize; MAX_DIM], [f64; MAX_DIM])> {
        let mut base = [0usize; MAX_DIM];
        let mut frac = [0.0; MAX_DIM];
        for a in 0..self.dim() {
            let n = self.shape[a];
            let mut t = (x[a] - self.origin[a]) / self.spacing[a];
            if self.periodic[a] {
                t = t.rem_euclid(n as f64);
                let i = (t.floor() as usize).min(n - 1);
                base[a] = i;
                frac[a] = t - i as f64;
            } else {
                let last = (n - 1) as f64;
                if t < -tol || t > last + tol {
                    return None;
                }
                let t = t.clamp(0.0, last);
                let i = (t.floor() as usize).min(n - 2);
                base[a] = i;
                frac[a] = t - i as f64;
            }
        }
        Some((base, frac))
    }

    /// Nodes and weights of the multilinear interpolation stencil of a point.
    pub fn interpolation_stencil(&self, x: &[f64], tol: f64) -> Option<Vec<(usize, f64)>> {
        let (base, frac) = self.locate(x, tol)?;
        let d = self.dim();
        let mut out = Vec::with_capacity(1 << d);
        for bits in 0..(1usize << d) {
            let mut w = 1.0;
            let mut k = 0usize;
            for a in 0..d {
                let up = (bits >> a) & 1 == 1;
                w *= if up { frac[a] } else { 1.0 - frac[a] };
                let mut j = base[a] + up as usize;
                if j == self.shape[a] {
                    j = 0;
                }
                k += j * self.strides[a];
            }
            if w != 0.0 {
                out.push((k, w));
            }
        }
        Some(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_malformed_charts() {
        assert!(GridChart::new(vec![], vec![], vec![], vec![]).is_err());
        assert!(GridChart::new(vec![0.0; 5], vec![1.0; 5], vec![2; 5], vec![false; 5]).is_err());
        assert!(GridChart::new(vec![0.0], vec![0.0], vec![3], vec![false]).is_err());
        assert!(GridChart::new(vec![f64::NAN], vec![1.0], vec![3], vec![false]).is_err());
        assert!(GridChart::new(vec![0.0, 0.0], vec![1.0], vec![3, 3], vec![false, false]).is_err());
        assert!(GridChart::uniform(2, 1, 0.0, 1.0).is_err());
    }

    #[test]
    fn last_axis_is_fastest() {
        let c = GridChart::uniform(3, 4, 0.0, 3.0).unwrap();
        assert_eq!(c.node_index(&[0, 0, 1]), 1);
        assert_eq!(c.node_index(&[1, 0, 0]), 16);
        for k in 0..c.n_nodes() {
            assert_eq!(c.node_index(&c.multi_index(k)[..3]), k);
        }
        assert_eq!(c.coord(c.node_index(&[1, 2, 3]))[..3], [1.0, 2.0, 3.0]);
    }

    #[test]
    fn periodic_offsets_wrap() {
        let c = GridChart::new(vec![0.0, 0.0], vec![1.0, 1.0], vec![4, 4], vec![true, false]).unwrap();
        assert_eq!(c.offset(0, &[-1, 0]), Some(c.node_index(&[3, 0])));
        assert_eq!(c.offset(0, &[0, -1]), None);
        assert_eq!(c.extent(0), 4.0);
        assert_eq!(c.extent(1), 3.0);
        assert_eq!(c.n_cells(), 4 * 3);
        assert!(!c.is_boundary(c.node_index(&[0, 1])));
        assert_eq!(c.nearest_node(&[-0.9, 7.0]), c.node_index(&[3, 3]));
    }

    #[test]
    fn dual_volumes_tile_the_box() {
        let c = GridChart::uniform(2, 5, 0.0, 2.0).unwrap();
        let total: f64 = (0..c.n_nodes()).map(|k| c.dual_volume(k)).sum();
        assert!((total - 4.0).abs() < 1e-14);
    }

    #[test]
    fn interpolation_weights_sum_to_one() {
        let c = GridChart::uniform(2, 5, 0.0, 1.0).unwrap();
        let s = c.interpolation_stencil(&[0.3, 0.9], 1e-9).unwrap();
        assert!((s.iter().map(|(_, w)| w).sum::<f64>() - 1.0).abs() < 1e-15);
        assert!(c.interpolation_stencil(&[1.2, 0.5], 1e-9).is_none());
    }
}
