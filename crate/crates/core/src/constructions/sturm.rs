use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::chart::GridChart;
use crate::error::{Error, Result};
use crate::field::{MetricField, ScalarField};
use crate::geometry::{calibrate_stencil, DistanceSolver};
use crate::linalg::{spd_det, Mat, SpdMatrix};

const DIM: usize = 4;

/// Piecewise-linear curve between network points `k` and `l`, the m-th of
/// the family joining them.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Polyline {
    pub k: usize,
    pub l: usize,
    pub m: usize,
    pub vertices: Vec<[f64; DIM]>,
    pub length: f64,
}

impl Polyline {
    /// Euclidean distance from x to the curve.
    pub fn distance_to(&self, x: &[f64; DIM]) -> f64 {
        self.vertices.windows(2).map(|w| segment_distance(x, &w[0], &w[1])).fold(f64::INFINITY, f64::min)
    }
}

fn norm(v: &[f64; DIM]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

fn sub(a: &[f64; DIM], b: &[f64; DIM]) -> [f64; DIM] {
    std::array::from_fn(|i| a[i] - b[i])
}

fn segment_distance(x: &[f64; DIM], a: &[f64; DIM], b: &[f64; DIM]) -> f64 {
    let ab = sub(b, a);
    let ax = sub(x, a);
    let len2: f64 = ab.iter().map(|v| v * v).sum();
    let t = if len2 > 0.0 { (ax.iter().zip(&ab).map(|(p, q)| p * q).sum::<f64>() / len2).clamp(0.0, 1.0) } else { 0.0 };
    let foot: [f64; DIM] = std::array::from_fn(|i| a[i] + t * ab[i]);
    norm(&sub(x, &foot))
}

/// Tent from a to b through a midpoint displaced orthogonally, with total
/// length (1 + 1/(2m))·|b − a|.
fn tent(k: usize, l: usize, m: usize, a: [f64; DIM], b: [f64; DIM]) -> Polyline {
    let delta = sub(&b, &a);
    let dist = norm(&delta);
    let axis = (0..DIM).min_by(|&i, &j| delta[i].abs().total_cmp(&delta[j].abs())).expect("non-empty");
    let unit: [f64; DIM] = std::array::from_fn(|i| delta[i] / dist);
    let mut e = [0.0; DIM];
    e[axis] = 1.0;
    let proj = unit[axis];
    let mut perp: [f64; DIM] = std::array::from_fn(|i| e[i] - proj * unit[i]);
    let pn = norm(&perp);
    perp.iter_mut().for_each(|v| *v /= pn);
    let stretch = 1.0 + 0.5 / m as f64;
    let height = 0.5 * dist * (stretch * stretch - 1.0).sqrt();
    let apex: [f64; DIM] = std::array::from_fn(|i| 0.5 * (a[i] + b[i]) + height * perp[i]);
    let length = norm(&sub(&apex, &a)) + norm(&sub(&b, &apex));
    Polyline { k, l, m, vertices: vec![a, apex, b], length }
}

/// Finite sample of points x_k with curves γ_{k,l,m} between every pair for
/// m = 1..=m_max, and the radius of the bump tube around each curve.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CurveNetwork {
    pub points: Vec<[f64; DIM]>,
    pub point_nodes: Vec<usize>,
    pub curves: Vec<Polyline>,
    pub tube_radius: f64,
    pub m_max: usize,
}

impl CurveNetwork {
    /// `n_points` distinct interior nodes of a 4D chart, chosen by seed.
    pub fn random(chart: &GridChart, n_points: usize, m_max: usize, seed: u64) -> Result<CurveNetwork> {
        if chart.dim() != DIM {
            return Err(Error::DimensionError { expected: DIM, found: chart.dim() });
        }
        if n_points < 2 || m_max == 0 {
            return Err(Error::InvalidArgument("a network needs at least two points and m_max ≥ 1".into()));
        }
        let interior: Vec<usize> = (0..chart.n_nodes()).filter(|&k| !chart.is_boundary(k)).collect();
        if interior.len() < n_points {
            return Err(Error::InvalidArgument(format!("only {} interior nodes", interior.len())));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut nodes: Vec<usize> = sample(&mut rng, interior.len(), n_points).into_iter().map(|i| interior[i]).collect();
        nodes.sort_unstable();
        let points = nodes
            .iter()
            .map(|&k| {
                let c = chart.coord(k);
                [c[0], c[1], c[2], c[3]]
            })
            .collect();
        Ok(CurveNetwork::from_points(points, nodes, m_max))
    }

    pub fn from_points(points: Vec<[f64; DIM]>, point_nodes: Vec<usize>, m_max: usize) -> CurveNetwork {
        let mut curves = Vec::new();
        for k in 0..points.len() {
            for l in k + 1..points.len() {
                for m in 1..=m_max {
                    curves.push(tent(k, l, m, points[k], points[l]));
                }
            }
        }
        CurveNetwork { points, point_nodes, curves, tube_radius: 0.0, m_max }
    }

    pub fn with_tube_radius(mut self, r: f64) -> CurveNetwork {
        self.tube_radius = r;
        self
    }

    /// Largest violation of endpoint matching and of
    /// len ≤ (1 + 1/m)·|x_k − x_l|, relative to |x_k − x_l|.
    pub fn length_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for c in &self.curves {
            let (a, b) = (self.points[c.k], self.points[c.l]);
            let dist = norm(&sub(&b, &a));
            let ends = norm(&sub(&c.vertices[0], &a)).max(norm(&sub(c.vertices.last().expect("vertices"), &b)));
            let excess = c.length - (1.0 + 1.0 / c.m as f64) * dist;
            worst = worst.max(ends / dist).max(excess / dist);
        }
        worst
    }

    /// Tube bump of curve `i` at x: 1 on the curve, linear to 0 at the tube radius.
    pub fn bump(&self, i: usize, x: &[f64; DIM]) -> f64 {
        let d = self.curves[i].distance_to(x);
        if self.tube_radius > 0.0 {
            (1.0 - d / self.tube_radius).max(0.0)
        } else if d == 0.0 {
            1.0
        } else {
            0.0
        }
    }

    /// Ψ₀ = sup of the tube bumps.
    pub fn psi0(&self, x: &[f64; DIM]) -> f64 {
        (0..self.curves.len()).map(|i| self.bump(i, x)).fold(0.0, f64::max)
    }
}

fn node_point(chart: &GridChart, k: usize) -> [f64; DIM] {
    let c = chart.coord(k);
    [c[0], c[1], c[2], c[3]]
}

/// Smallest tube radius for which Ψ = ½ + ½Ψ₀ ≥ (1 + 1/m_max)^(−2) at every
/// node of the chart.
pub fn covering_tube_radius(network: &CurveNetwork, chart: &GridChart) -> Result<f64> {
    if chart.dim() != DIM {
        return Err(Error::DimensionError { expected: DIM, found: chart.dim() });
    }
    if network.curves.is_empty() {
        return Err(Error::InvalidArgument("network has no curves".into()));
    }
    let reach = (0..chart.n_nodes())
        .map(|k| {
            let x = node_point(chart, k);
            network.curves.iter().map(|c| c.distance_to(&x)).fold(f64::INFINITY, f64::min)
        })
        .fold(0.0f64, f64::max);
    let m = network.m_max as f64;
    let needed = 2.0 * ((1.0 + 1.0 / m).powi(-2) - 0.5);
    let r = reach / (1.0 - needed) * (1.0 + 1e-9);
    Ok(if r > 0.0 { r } else { chart.spacing()[0] })
}

/// g = (Ψ^α δ₂) ⊕ δ₂ and g′ = Ψ^(α/2) δ₄ with Ψ = ½ + ½Ψ₀; both have
/// determinant Ψ^(2α) at every node.
#[derive(Clone, Debug)]
pub struct SturmPair {
    pub g: MetricField,
    pub g_prime: MetricField,
    pub psi: ScalarField,
    pub alpha: f64,
}

pub fn sturm_pair(network: &CurveNetwork, alpha: f64, chart: &GridChart) -> Result<SturmPair> {
    if chart.dim() != DIM {
        return Err(Error::DimensionError { expected: DIM, found: chart.dim() });
    }
    if network.curves.is_empty() {
        return Err(Error::InvalidArgument("network has no curves".into()));
    }
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::InvalidArgument(format!("alpha {alpha} outside (0, 1]")));
    }
    let psi: Vec<f64> = (0..chart.n_nodes()).map(|k| 0.5 + 0.5 * network.psi0(&node_point(chart, k))).collect();
    let mut g = Vec::with_capacity(psi.len());
    let mut g_prime = Vec::with_capacity(psi.len());
    for &p in &psi {
        let a = p.powf(alpha);
        g.push(SpdMatrix::from_diag(&[a, a, 1.0, 1.0])?);
        g_prime.push(SpdMatrix::new(Mat::scalar(DIM, p.powf(0.5 * alpha)))?);
    }
    let mask = vec![false; psi.len()];
    Ok(SturmPair {
        g: MetricField::new(chart.clone(), g, mask.clone(), "sturm-product")?,
        g_prime: MetricField::new(chart.clone(), g_prime, mask, "sturm-conformal")?,
        psi: ScalarField::from_values(chart.clone(), psi)?,
        alpha,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NetworkPairRow {
    pub k: usize,
    pub l: usize,
    pub euclidean: f64,
    pub d_g: f64,
    pub d_g_prime: f64,
    pub lower: f64,
    pub upper: f64,
    pub within: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SturmReport {
    pub nodes: usize,
    pub curves: usize,
    pub m_max: usize,
    pub tube_radius: f64,
    pub length_defect: f64,
    /// max |det g − det g′| over nodes
    pub det_max_deviation: f64,
    pub psi_min: f64,
    pub psi_floor_required: f64,
    /// super-level α used for the tube-measure budget
    pub level: f64,
    /// smallest ε with Leb{ψ_klm > α} < (1 − α)·2^(−k−l−m)·ε for every curve
    /// (k and l counted from 1)
    pub budget_epsilon: f64,
    pub stencil_slack: f64,
    pub rows: Vec<NetworkPairRow>,
    pub violations: usize,
}

impl SturmPair {
    pub fn det_max_deviation(&self) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for k in 0..self.g.n_nodes() {
            worst = worst.max((spd_det(self.g.value(k))? - spd_det(self.g_prime.value(k))?).abs());
        }
        Ok(worst)
    }

    /// Determinant check, tube budget and the distance sandwich
    /// (1 + 1/m_max)^(−1)|x_k − x_l| − s ≤ d ≤ (1 + 1/m_max)|x_k − x_l| + s for
    /// both metrics on every network pair, with s the stencil overestimate
    /// times |x_k − x_l|.
    pub fn report(&self, network: &CurveNetwork, order: usize) -> Result<SturmReport> {
        let chart = self.g.chart();
        let det_max_deviation = self.det_max_deviation()?;
        let psi_min = self.psi.values().iter().cloned().fold(f64::INFINITY, f64::min);
        let m = network.m_max as f64;
        let level = 0.5;
        let cell = chart.cell_volume();
        let mut budget_epsilon: f64 = 0.0;
        for (i, c) in network.curves.iter().enumerate() {
            let count = (0..chart.n_nodes()).filter(|&k| network.bump(i, &node_point(chart, k)) > level).count();
            let measure = count as f64 * cell;
            let scale = ((c.k + 1 + c.l + 1 + c.m) as f64).exp2() / (1.0 - level);
            budget_epsilon = budget_epsilon.max(measure * scale);
        }
        let slack = calibrate_stencil(DIM, order);
        let sg = DistanceSolver::new(&self.g, order)?;
        let sp = DistanceSolver::new(&self.g_prime, order)?;
        let mut rows = Vec::new();
        let mut violations = 0;
        for k in 0..network.points.len() {
            let mg = sg.map(network.point_nodes[k])?;
            let mp = sp.map(network.point_nodes[k])?;
            for l in k + 1..network.points.len() {
                let euclidean = norm(&sub(&network.points[l], &network.points[k]));
                let target = network.point_nodes[l];
                let lower = euclidean / (1.0 + 1.0 / m) - slack * euclidean;
                let upper = euclidean * (1.0 + 1.0 / m) + slack * euclidean;
                let (d_g, d_g_prime) = (mg.values[target], mp.values[target]);
                let within = [d_g, d_g_prime].iter().all(|d| *d >= lower && *d <= upper);
                if !within {
                    violations += 1;
                }
                rows.push(NetworkPairRow { k, l, euclidean, d_g, d_g_prime, lower, upper, within });
            }
        }
        Ok(SturmReport {
            nodes: chart.n_nodes(),
            curves: network.curves.len(),
            m_max: network.m_max,
            tube_radius: network.tube_radius,
            length_defect: network.length_defect(),
            det_max_deviation,
            psi_min,
            psi_floor_required: (1.0 + 1.0 / m).powi(-2),
            level,
            budget_epsilon,
            stencil_slack: slack,
            rows,
            violations,
        })
    }
}
