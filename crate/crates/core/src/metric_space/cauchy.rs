//! Limits of Cauchy sequences of metric fields.
//!
//! With g₁ the first term, every term is g₁[X_n·, ·] for the g₁-self-adjoint
//! X_n = G₁⁻¹G_n (X_n = B_n² for the transport B_n from g₁ to g_n). The limit
//! of X_n is estimated by extrapolating log(G₁^{-1/2} G_n G₁^{-1/2}) entrywise,
//! then the limit metric is act(X^{1/2}, g₁) with the g₁-self-adjoint square root.
//!
//! A finite sequence only samples its tail, so the extrapolation model is
//! chosen from the consecutive distances: roughly constant ratios below one
//! mean geometric convergence (Aitken Δ² per entry), otherwise the terms are
//! treated as analytic in 1/n and extrapolated to 1/n = 0 by Neville's
//! scheme on the last few terms.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{same_chart, MetricField};
use crate::linalg::{spd_log, sym_exp, Mat, SpdMatrix};

use super::{act_matrix, dl};

const WINDOW: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum Extrapolation {
    /// All terms coincide.
    Constant,
    /// Geometric tail: Aitken Δ² on the last three terms.
    Geometric,
    /// Algebraic tail: polynomial extrapolation in 1/n.
    Harmonic,
}

#[derive(Clone, Debug)]
pub struct CauchyReport {
    pub limit: MetricField,
    pub scheme: Extrapolation,
    /// dl(gs[n], gs[n+1])
    pub consecutive: Vec<f64>,
    /// dl(gs[n], limit) over the whole sequence
    pub to_limit: Vec<f64>,
}

pub fn cauchy_limit(gs: &[MetricField]) -> Result<MetricField> {
    Ok(cauchy_limit_report(gs)?.limit)
}

fn neville_at_zero(h: &[f64], y: &[f64]) -> f64 {
    let mut p = y.to_vec();
    let n = h.len();
    for m in 1..n {
        for i in 0..(n - m) {
            p[i] = (h[i + m] * p[i] - h[i] * p[i + 1]) / (h[i + m] - h[i]);
        }
    }
    p[0]
}

fn entrywise(ms: &[Mat], f: impl Fn(&[f64]) -> f64) -> Mat {
    let d = ms[0].dim();
    let mut out = Mat::zeros(d);
    for i in 0..d {
        for j in i..d {
            let ys: Vec<f64> = ms.iter().map(|m| m[(i, j)]).collect();
            let v = f(&ys);
            out[(i, j)] = v;
            out[(j, i)] = v;
        }
    }
    out
}

/// Extrapolation to 1/n = 0 using the last m+1 terms, with m chosen where
/// successive degrees agree best.
fn polynomial_limit(h: &[f64], ms: &[Mat]) -> Mat {
    let w = ms.len();
    if w < 2 {
        return ms[w - 1];
    }
    let estimate = |m: usize| entrywise(&ms[w - m - 1..], |ys| neville_at_zero(&h[w - m - 1..], ys));
    let mut prev = estimate(1);
    let mut best = (f64::INFINITY, prev);
    for m in 2..w {
        let cur = estimate(m);
        let change = cur.max_abs_diff(&prev);
        if change < best.0 {
            best = (change, cur);
        }
        prev = cur;
    }
    best.1
}

fn aitken(x0: f64, x1: f64, x2: f64) -> f64 {
    let d1 = x1 - x0;
    let d2 = x2 - x1;
    let den = d2 - d1;
    let scale = x0.abs().max(x1.abs()).max(x2.abs());
    if den == 0.0 || den.abs() <= 1e-14 * scale {
        return x2;
    }
    x2 - d2 * d2 / den
}

fn detect_scheme(consecutive: &[f64]) -> Extrapolation {
    if consecutive.iter().all(|d| *d == 0.0) {
        return Extrapolation::Constant;
    }
    let tail: Vec<f64> = consecutive.iter().rev().take(5).rev().cloned().collect();
    if tail.len() >= 3 && tail.iter().all(|d| *d > 0.0) {
        let ratios: Vec<f64> = tail.windows(2).map(|w| w[1] / w[0]).collect();
        let lo = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = ratios.iter().cloned().fold(0.0, f64::max);
        if hi < 0.85 && hi / lo < 1.25 {
            return Extrapolation::Geometric;
        }
    }
    Extrapolation::Harmonic
}

pub fn cauchy_limit_report(gs: &[MetricField]) -> Result<CauchyReport> {
    let first = gs.first().ok_or(Error::EmptyRegion)?;
    for g in gs {
        same_chart(first.chart(), g.chart())?;
    }
    let consecutive = gs.windows(2).map(|w| dl(&w[0], &w[1]).map(|d| d.value)).collect::<Result<Vec<_>>>()?;
    if let Some(k) = consecutive.iter().position(|d| !d.is_finite()) {
        return Err(Error::NotCauchy { first: k, second: k + 1, distance: consecutive[k] });
    }
    if consecutive.len() >= 4 {
        let half = consecutive.len() / 2;
        let head = consecutive[..half].iter().cloned().fold(0.0, f64::max);
        let (k, tail) = consecutive[half..]
            .iter()
            .enumerate()
            .fold((0, 0.0), |acc, (i, &d)| if d > acc.1 { (i, d) } else { acc });
        if tail > 0.0 && tail >= head {
            let k = half + k;
            return Err(Error::NotCauchy { first: k, second: k + 1, distance: tail });
        }
    }
    let scheme = detect_scheme(&consecutive);
    let limit = match scheme {
        Extrapolation::Constant => gs.last().expect("non-empty").clone(),
        _ => extrapolate(gs, scheme)?,
    };
    let to_limit = gs.iter().map(|g| dl(g, &limit).map(|d| d.value)).collect::<Result<Vec<_>>>()?;
    Ok(CauchyReport { limit, scheme, consecutive, to_limit })
}

fn extrapolate(gs: &[MetricField], scheme: Extrapolation) -> Result<MetricField> {
    let g1 = &gs[0];
    let d = g1.dim();
    let n_terms = gs.len();
    let start = n_terms.saturating_sub(WINDOW);
    let window = &gs[start..];
    let h: Vec<f64> = (start..n_terms).map(|i| 1.0 / (i + 1) as f64).collect();
    let mut mask = g1.mask().to_vec();
    for g in gs {
        for (m, s) in mask.iter_mut().zip(g.mask()) {
            *m |= *s;
        }
    }
    let mut values = Vec::with_capacity(g1.n_nodes());
    for k in 0..g1.n_nodes() {
        if mask[k] {
            values.push(SpdMatrix::identity(d));
            continue;
        }
        let e1 = g1.value(k).eig();
        let g1_half = e1.map(f64::sqrt);
        let g1_inv_half = e1.map(|v| 1.0 / v.sqrt());
        // L_n = log(G1^{-1/2} G_n G1^{-1/2}); for g_n = act(B^{1/n}, g) this is affine in 1/n
        let ls = window
            .iter()
            .map(|g| spd_log(&SpdMatrix::new(g1_inv_half.matmul(g.value(k).mat()).matmul(&g1_inv_half).symmetrized())?))
            .collect::<Result<Vec<Mat>>>()?;
        let l = match scheme {
            Extrapolation::Geometric => entrywise(&ls, |ys| {
                let n = ys.len();
                if n >= 3 {
                    aitken(ys[n - 3], ys[n - 2], ys[n - 1])
                } else {
                    ys[n - 1]
                }
            }),
            _ => polynomial_limit(&h, &ls),
        };
        // limit of X_n = B_n² is G1^{-1/2} exp(L) G1^{1/2}; B = X^{1/2} is self-adjoint with respect to g1
        let s = sym_exp(&l.scale(0.5))?;
        let b = g1_inv_half.matmul(s.mat()).matmul(&g1_half);
        values.push(act_matrix(&b, g1.value(k))?);
    }
    MetricField::new(g1.chart().clone(), values, mask, "cauchy-limit")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn neville_recovers_polynomials_in_h() {
        let h: Vec<f64> = (5..=8).map(|n| 1.0 / n as f64).collect();
        let y: Vec<f64> = h.iter().map(|t| 3.0 - 2.0 * t + 0.5 * t * t * t).collect();
        assert!((neville_at_zero(&h, &y) - 3.0).abs() < 1e-11);
    }

    #[test]
    fn aitken_is_exact_on_geometric_tails() {
        assert!((aitken(1.0 + 0.5, 1.0 + 0.25, 1.0 + 0.125) - 1.0).abs() < 1e-15);
        assert_eq!(aitken(2.0, 2.0, 2.0), 2.0);
    }

    #[test]
    fn scheme_follows_the_distance_ratios() {
        let geo: Vec<f64> = (0..8).map(|k| 0.5f64.powi(k)).collect();
        assert_eq!(detect_scheme(&geo), Extrapolation::Geometric);
        let harm: Vec<f64> = (20..28).map(|n| 1.0 / (n * (n + 1)) as f64).collect();
        assert_eq!(detect_scheme(&harm), Extrapolation::Harmonic);
        assert_eq!(detect_scheme(&[0.0, 0.0]), Extrapolation::Constant);
        assert_eq!(detect_scheme(&[0.5, 0.25]), Extrapolation::Harmonic);
    }

    #[test]
    fn polynomial_limit_on_affine_entries() {
        let h: Vec<f64> = (1..=6).map(|n| 1.0 / n as f64).collect();
        let ms: Vec<Mat> = h.iter().map(|t| Mat::from_rows([[1.0 + t, -t], [-t, 2.0]])).collect();
        assert!(polynomial_limit(&h, &ms).max_abs_diff(&Mat::from_rows([[1.0, 0.0], [0.0, 2.0]])) < 1e-13);
        assert_eq!(polynomial_limit(&h[..1], &ms[..1]), ms[0]);
    }
}
