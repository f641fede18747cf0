//! Dense linear algebra for small (dim <= 4) matrices.
//!
//! Symmetric eigenproblems are solved with cyclic Jacobi rotations, which
//! converge to machine precision for these sizes and are fully deterministic.
//! Eigenvalues are returned in ascending order; each eigenvector is
//! normalized so that its first nonzero component is positive.

use std::ops::{Index, IndexMut, Mul};

use crate::error::{Error, Result};

pub const MAX_DIM: usize = 4;

/// Small dense square matrix, row-major.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat {
    dim: usize,
    a: [f64; 16],
}

impl Index<(usize, usize)> for Mat {
    type Output = f64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.a[i * MAX_DIM + j]
    }
}

impl IndexMut<(usize, usize)> for Mat {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.a[i * MAX_DIM + j]
    }
}

impl Mul for Mat {
    type Output = Mat;
    fn mul(self, rhs: Mat) -> Mat {
        self.matmul(&rhs)
    }
}

impl Mat {
    pub fn zeros(dim: usize) -> Mat {
        assert!((1..=MAX_DIM).contains(&dim), "matrix dimension {dim} out of range");
        Mat { dim, a: [0.0; 16] }
    }

    pub fn identity(dim: usize) -> Mat {
        let mut m = Mat::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn scalar(dim: usize, s: f64) -> Mat {
        let mut m = Mat::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = s;
        }
        m
    }

    pub fn from_diag(d: &[f64]) -> Mat {
        let mut m = Mat::zeros(d.len());
        for (i, &v) in d.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> f64) -> Mat {
        let mut m = Mat::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn from_rows<const N: usize>(rows: [[f64; N]; N]) -> Mat {
        Mat::from_fn(N, |i, j| rows[i][j])
    }

    /// Builds from a row-major slice of length dim*dim.
    pub fn from_slice(dim: usize, s: &[f64]) -> Result<Mat> {
        if s.len() != dim * dim {
            return Err(Error::DimensionMismatch { expected: dim * dim, found: s.len() });
        }
        Ok(Mat::from_fn(dim, |i, j| s[i * dim + j]))
    }

    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.dim * self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                v.push(self[(i, j)]);
            }
        }
        v
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn transpose(&self) -> Mat {
        Mat::from_fn(self.dim, |i, j| self[(j, i)])
    }

    pub fn matmul(&self, b: &Mat) -> Mat {
        assert_eq!(self.dim, b.dim, "matrix dimension mismatch");
        let n = self.dim;
        let mut c = Mat::zeros(n);
        for i in 0..n {
            for j in 0..n {
                let mut s = 0.0;
                for k in 0..n {
                    s += self[(i, k)] * b[(k, j)];
                }
                c[(i, j)] = s;
            }
        }
        c
    }

    pub fn add(&self, b: &Mat) -> Mat {
        Mat::from_fn(self.dim, |i, j| self[(i, j)] + b[(i, j)])
    }

    pub fn sub(&self, b: &Mat) -> Mat {
        Mat::from_fn(self.dim, |i, j| self[(i, j)] - b[(i, j)])
    }

    pub fn scale(&self, s: f64) -> Mat {
        Mat::from_fn(self.dim, |i, j| self[(i, j)] * s)
    }

    pub fn mul_vec(&self, u: &[f64]) -> [f64; MAX_DIM] {
        let mut out = [0.0; MAX_DIM];
        for i in 0..self.dim {
            let mut s = 0.0;
            for j in 0..self.dim {
                s += self[(i, j)] * u[j];
            }
            out[i] = s;
        }
        out
    }

    /// uᵀ A u
    #[inline]
    pub fn quad(&self, u: &[f64]) -> f64 {
        let mut s = 0.0;
        for i in 0..self.dim {
            let mut r = 0.0;
            for j in 0..self.dim {
                r += self[(i, j)] * u[j];
            }
            s += u[i] * r;
        }
        s
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius(&self) -> f64 {
        let mut s = 0.0;
        for i in 0..self.dim {
            for j in 0..self.dim {
                s += self[(i, j)] * self[(i, j)];
            }
        }
        s.sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.a[..].iter().all(|v| v.is_finite())
    }

    /// Exactly symmetric copy: both off-diagonal entries become (a_ij + a_ji)/2.
    pub fn symmetrized(&self) -> Mat {
        let mut m = *self;
        for i in 0..self.dim {
            for j in (i + 1)..self.dim {
                let v = 0.5 * (self[(i, j)] + self[(j, i)]);
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        m
    }

    pub fn max_abs_diff(&self, b: &Mat) -> f64 {
        let mut d: f64 = 0.0;
        for i in 0..self.dim {
            for j in 0..self.dim {
                d = d.max((self[(i, j)] - b[(i, j)]).abs());
            }
        }
        d
    }

    pub fn frobenius_diff(&self, b: &Mat) -> f64 {
        self.sub(b).frobenius()
    }

    pub fn det(&self) -> f64 {
        let n = self.dim;
        let mut m = *self;
        let mut det = 1.0;
        for c in 0..n {
            let mut piv = c;
            for r in (c + 1)..n {
                if m[(r, c)].abs() > m[(piv, c)].abs() {
                    piv = r;
                }
            }
            if m[(piv, c)] == 0.0 {
                return 0.0;
            }
            if piv != c {
                for k in 0..n {
                    let t = m[(c, k)];
                    m[(c, k)] = m[(piv, k)];
                    m[(piv, k)] = t;
                }
                det = -det;
            }
            det *= m[(c, c)];
            for r in (c + 1)..n {
                let f = m[(r, c)] / m[(c, c)];
                for k in c..n {
                    m[(r, k)] -= f * m[(c, k)];
                }
            }
        }
        det
    }

    /// Gauss-Jordan inverse with partial pivoting.
    pub fn inverse(&self) -> Result<Mat> {
        if !self.is_finite() {
            return Err(Error::NonFinite);
        }
        let n = self.dim;
        let mut m = *self;
        let mut inv = Mat::identity(n);
        let scale = self.frobenius();
        for c in 0..n {
            let mut piv = c;
            for r in (c + 1)..n {
                if m[(r, c)].abs() > m[(piv, c)].abs() {
                    piv = r;
                }
            }
            if m[(piv, c)].abs() <= 1e-300 || m[(piv, c)].abs() <= 1e-15 * scale * 1e-2 {
                return Err(Error::NotPositiveDefinite { min_eig: 0.0, eps: 0.0 });
            }
            if piv != c {
                for k in 0..n {
                    let t = m[(c, k)];
                    m[(c, k)] = m[(piv, k)];
                    m[(piv, k)] = t;
                    let t = inv[(c, k)];
                    inv[(c, k)] = inv[(piv, k)];
                    inv[(piv, k)] = t;
                }
            }
            let d = m[(c, c)];
            for k in 0..n {
                m[(c, k)] /= d;
                inv[(c, k)] /= d;
            }
            for r in 0..n {
                if r != c {
                    let f = m[(r, c)];
                    if f != 0.0 {
                        for k in 0..n {
                            m[(r, k)] -= f * m[(c, k)];
                            inv[(r, k)] -= f * inv[(c, k)];
                        }
                    }
                }
            }
        }
        Ok(inv)
    }

    /// Lower Cholesky factor, or None if a pivot is not positive.
    pub fn cholesky(&self) -> Option<Mat> {
        let n = self.dim;
        let mut l = Mat::zeros(n);
        for j in 0..n {
            let mut d = self[(j, j)];
            for k in 0..j {
                d -= l[(j, k)] * l[(j, k)];
            }
            if !(d > 0.0) {
                return None;
            }
            let djj = d.sqrt();
            l[(j, j)] = djj;
            for i in (j + 1)..n {
                let mut s = self[(i, j)];
                for k in 0..j {
                    s -= l[(i, k)] * l[(j, k)];
                }
                l[(i, j)] = s / djj;
            }
        }
        Some(l)
    }

    /// Spectral norm sqrt(λ_max(AᵀA)).
    pub fn op_norm(&self) -> f64 {
        let ata = self.transpose().matmul(self).symmetrized();
        let e = jacobi(&ata);
        e.values[..self.dim].iter().cloned().fold(0.0, f64::max).max(0.0).sqrt()
    }
}

/// Solves L x = b for lower-triangular L (forward substitution), column-wise on a matrix.
fn lower_solve(l: &Mat, b: &Mat) -> Mat {
    let n = l.dim;
    let mut x = Mat::zeros(n);
    for col in 0..n {
        for i in 0..n {
            let mut s = b[(i, col)];
            for k in 0..i {
                s -= l[(i, k)] * x[(k, col)];
            }
            x[(i, col)] = s / l[(i, i)];
        }
    }
    x
}

/// Eigendecomposition of a symmetric matrix.
#[derive(Clone, Copy, Debug)]
pub struct EigenDecomposition {
    dim: usize,
    values: [f64; MAX_DIM],
    /// eigenvectors stored as columns
    vectors: Mat,
}

impl EigenDecomposition {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Ascending eigenvalues.
    pub fn values(&self) -> &[f64] {
        &self.values[..self.dim]
    }

    pub fn vectors(&self) -> &Mat {
        &self.vectors
    }

    pub fn vector(&self, k: usize) -> [f64; MAX_DIM] {
        let mut v = [0.0; MAX_DIM];
        for i in 0..self.dim {
            v[i] = self.vectors[(i, k)];
        }
        v
    }

    pub fn min(&self) -> f64 {
        self.values[0]
    }

    pub fn max(&self) -> f64 {
        self.values[self.dim - 1]
    }

    /// Q f(Λ) Qᵀ, exactly symmetric.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Mat {
        let n = self.dim;
        let mut fl = [0.0; MAX_DIM];
        for k in 0..n {
            fl[k] = f(self.values[k]);
        }
        let q = &self.vectors;
        let mut m = Mat::zeros(n);
        for i in 0..n {
            for j in i..n {
                let mut s = 0.0;
                for k in 0..n {
                    s += q[(i, k)] * fl[k] * q[(j, k)];
                }
                m[(i, j)] = s;
                m[(j, i)] = s;
            }
        }
        m
    }

    pub fn reconstruct(&self) -> Mat {
        self.map(|x| x)
    }
}

fn jacobi(a: &Mat) -> EigenDecomposition {
    let n = a.dim;
    let mut m = a.symmetrized();
    let mut v = Mat::identity(n);
    for sweep in 0..64 {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += m[(p, q)] * m[(p, q)];
            }
        }
        if off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let app = m[(p, p)];
                let aqq = m[(q, q)];
                let g = 100.0 * apq.abs();
                if sweep > 3 && app.abs() + g == app.abs() && aqq.abs() + g == aqq.abs() {
                    m[(p, q)] = 0.0;
                    m[(q, p)] = 0.0;
                    continue;
                }
                let h = aqq - app;
                let t = if h.abs() + g == h.abs() {
                    apq / h
                } else {
                    let theta = 0.5 * h / apq;
                    let t = 1.0 / (theta.abs() + (theta * theta + 1.0).sqrt());
                    if theta < 0.0 {
                        -t
                    } else {
                        t
                    }
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[(k, p)];
                    let mkq = m[(k, q)];
                    m[(k, p)] = c * mkp - s * mkq;
                    m[(k, q)] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[(p, k)];
                    let mqk = m[(q, k)];
                    m[(p, k)] = c * mpk - s * mqk;
                    m[(q, k)] = s * mpk + c * mqk;
                }
                m[(p, q)] = 0.0;
                m[(q, p)] = 0.0;
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    let mut cols = [[0.0; MAX_DIM]; MAX_DIM];
    for k in 0..n {
        let mut col = [0.0; MAX_DIM];
        for i in 0..n {
            col[i] = v[(i, k)];
        }
        if let Some(first) = col[..n].iter().find(|x| **x != 0.0) {
            if *first < 0.0 {
                for x in col[..n].iter_mut() {
                    *x = -*x;
                }
            }
        }
        cols[k] = col;
    }
    order.sort_by(|&x, &y| {
        m[(x, x)]
            .partial_cmp(&m[(y, y)])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| {
                cols[y][..n]
                    .partial_cmp(&cols[x][..n])
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
    });
    let mut values = [0.0; MAX_DIM];
    let mut vectors = Mat::zeros(n);
    for (k, &src) in order.iter().enumerate() {
        values[k] = m[(src, src)];
        for i in 0..n {
            vectors[(i, k)] = cols[src][i];
        }
    }
    EigenDecomposition { dim: n, values, vectors }
}

/// Eigendecomposition of a symmetric matrix (the symmetric part is used).
pub fn eig_symmetric(a: &Mat) -> Result<EigenDecomposition> {
    if !a.is_finite() {
        return Err(Error::NonFinite);
    }
    Ok(jacobi(a))
}

/// Singularity threshold for a symmetric matrix: 1e-14 · trace / dim.
pub fn eps_spd(a: &Mat) -> f64 {
    1e-14 * a.trace() / a.dim() as f64
}

/// Symmetric positive-definite matrix, exactly symmetric by construction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpdMatrix(Mat);

impl SpdMatrix {
    /// Symmetrizes and validates positive definiteness.
    pub fn new(m: Mat) -> Result<SpdMatrix> {
        if !m.is_finite() {
            return Err(Error::NonFinite);
        }
        let s = m.symmetrized();
        let e = jacobi(&s);
        let eps = eps_spd(&s);
        if !(e.min() > eps) || !(e.min() > 0.0) {
            return Err(Error::NotPositiveDefinite { min_eig: e.min(), eps });
        }
        Ok(SpdMatrix(s))
    }

    pub fn identity(dim: usize) -> SpdMatrix {
        SpdMatrix(Mat::identity(dim))
    }

    pub fn scalar(dim: usize, s: f64) -> Result<SpdMatrix> {
        SpdMatrix::new(Mat::scalar(dim, s))
    }

    pub fn from_diag(d: &[f64]) -> Result<SpdMatrix> {
        SpdMatrix::new(Mat::from_diag(d))
    }

    #[inline]
    pub fn mat(&self) -> &Mat {
        &self.0
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.0.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }

    pub fn eig(&self) -> EigenDecomposition {
        jacobi(&self.0)
    }

    /// |u|_A = sqrt(uᵀ A u)
    #[inline]
    pub fn norm_of(&self, u: &[f64]) -> f64 {
        self.0.quad(u).max(0.0).sqrt()
    }
}

/// Eigendecomposition of an SPD matrix.
pub fn eig_sym(a: &SpdMatrix) -> Result<EigenDecomposition> {
    eig_symmetric(a.mat())
}

fn checked_eig(a: &SpdMatrix) -> Result<EigenDecomposition> {
    let e = a.eig();
    let eps = eps_spd(a.mat());
    if !(e.min() > eps) {
        return Err(Error::NotPositiveDefinite { min_eig: e.min(), eps });
    }
    Ok(e)
}

/// A^alpha = Q Λ^alpha Qᵀ.
pub fn spd_power(a: &SpdMatrix, alpha: f64) -> Result<SpdMatrix> {
    if !alpha.is_finite() {
        return Err(Error::NonFinite);
    }
    let e = checked_eig(a)?;
    let m = e.map(|x| x.powf(alpha));
    if !m.is_finite() {
        return Err(Error::NonFinite);
    }
    Ok(SpdMatrix(m))
}

pub fn spd_sqrt(a: &SpdMatrix) -> Result<SpdMatrix> {
    let e = checked_eig(a)?;
    Ok(SpdMatrix(e.map(f64::sqrt)))
}

pub fn spd_inv_sqrt(a: &SpdMatrix) -> Result<SpdMatrix> {
    let e = checked_eig(a)?;
    Ok(SpdMatrix(e.map(|x| 1.0 / x.sqrt())))
}

/// Matrix logarithm; the result is symmetric but not necessarily definite.
pub fn spd_log(a: &SpdMatrix) -> Result<Mat> {
    let e = checked_eig(a)?;
    Ok(e.map(f64::ln))
}

/// Matrix exponential of a symmetric matrix.
pub fn sym_exp(s: &Mat) -> Result<SpdMatrix> {
    let e = eig_symmetric(s)?;
    let m = e.map(f64::exp);
    if !m.is_finite() {
        return Err(Error::NonFinite);
    }
    Ok(SpdMatrix(m))
}

pub fn spd_det(a: &SpdMatrix) -> Result<f64> {
    let l = a
        .mat()
        .cholesky()
        .ok_or(Error::NotPositiveDefinite { min_eig: 0.0, eps: eps_spd(a.mat()) })?;
    let mut d = 1.0;
    for i in 0..a.dim() {
        d *= l[(i, i)];
    }
    Ok(d * d)
}

pub fn spd_inv(a: &SpdMatrix) -> Result<SpdMatrix> {
    let l = a
        .mat()
        .cholesky()
        .ok_or(Error::NotPositiveDefinite { min_eig: 0.0, eps: eps_spd(a.mat()) })?;
    let n = a.dim();
    // A^{-1} = L^{-T} L^{-1}
    let linv = lower_solve(&l, &Mat::identity(n));
    let inv = linv.transpose().matmul(&linv);
    Ok(SpdMatrix(inv.symmetrized()))
}

/// Generalized symmetric eigenproblem G u = λ H u.
#[derive(Clone, Copy, Debug)]
pub struct GenEig {
    /// ascending eigenvalues
    pub values: [f64; MAX_DIM],
    /// H-orthonormal eigenvectors as columns
    pub vectors: Mat,
    pub dim: usize,
}

pub fn gen_eig(g: &SpdMatrix, h: &SpdMatrix) -> Result<GenEig> {
    if g.dim() != h.dim() {
        return Err(Error::DimensionMismatch { expected: h.dim(), found: g.dim() });
    }
    let n = g.dim();
    let l = h
        .mat()
        .cholesky()
        .ok_or(Error::NotPositiveDefinite { min_eig: 0.0, eps: eps_spd(h.mat()) })?;
    let y = lower_solve(&l, g.mat());
    let c = lower_solve(&l, &y.transpose()).symmetrized();
    let e = jacobi(&c);
    // u = L^{-T} v
    let lt = l.transpose();
    let mut vectors = Mat::zeros(n);
    for k in 0..n {
        for i in (0..n).rev() {
            let mut s = e.vectors()[(i, k)];
            for j in (i + 1)..n {
                s -= lt[(i, j)] * vectors[(j, k)];
            }
            vectors[(i, k)] = s / lt[(i, i)];
        }
    }
    Ok(GenEig { values: e.values, vectors, dim: n })
}

/// Extreme eigenvalues of G u = λ H u. Returns exactly (1, 1) when G and H are identical.
pub fn gen_eig_extrema(g: &SpdMatrix, h: &SpdMatrix) -> Result<(f64, f64)> {
    if g.dim() != h.dim() {
        return Err(Error::DimensionMismatch { expected: h.dim(), found: g.dim() });
    }
    if g == h {
        return Ok((1.0, 1.0));
    }
    let e = gen_eig(g, h)?;
    let lo = e.values[0];
    let hi = e.values[e.dim - 1];
    if !(lo > 0.0) {
        return Err(Error::NotPositiveDefinite { min_eig: lo, eps: 0.0 });
    }
    Ok((lo, hi))
}
