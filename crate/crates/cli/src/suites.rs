//! Seeded verification suites. Each suite runs a fixed configuration and
//! compares the measured quantities against pinned tolerances; only the
//! seed is configurable.

use std::f64::consts::{LN_2, PI};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use metspace::constructions::{covering_tube_radius, nonapprox_metric, sturm_pair, unbounded_conformal, CurveNetwork};
use metspace::field::conformal_field;
use metspace::geometry::{calibrate_stencil, distance, distance_comparability_check, measure};
use metspace::linalg::{gen_eig, spd_power, sym_exp};
use metspace::metric_space::{
    act, cauchy_limit, dl, dl_exhaustion, geodesic, midpoint, relative_op_norm, smooth_approx, transport_b,
};
use metspace::operators::{
    assemble_laplacian, divform_factor, heat_run, operator_correspondence_check, poincare_measure,
    poincare_propagate, varadhan_estimate, BoundaryCondition,
};
use metspace::{EllField, GridChart, Mat, MetricField, Result, SpdMatrix};

pub const DEFAULT_SEED: u64 = 7;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    AtMost,
    #[serde(rename = ">=")]
    AtLeast,
    #[serde(rename = "==")]
    Equal,
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub relation: Relation,
    pub bound: f64,
    pub passed: bool,
}

impl Check {
    pub fn at_most(name: impl Into<String>, value: f64, bound: f64) -> Check {
        Check { name: name.into(), value, relation: Relation::AtMost, bound, passed: value <= bound }
    }

    pub fn at_least(name: impl Into<String>, value: f64, bound: f64) -> Check {
        Check { name: name.into(), value, relation: Relation::AtLeast, bound, passed: value >= bound }
    }

    pub fn equal(name: impl Into<String>, value: f64, target: f64) -> Check {
        Check { name: name.into(), value, relation: Relation::Equal, bound: target, passed: value == target }
    }

    pub fn describe(&self) -> String {
        let rel = match self.relation {
            Relation::AtMost => "<=",
            Relation::AtLeast => ">=",
            Relation::Equal => "==",
        };
        format!("{} = {:.6e} {} {:.6e}", self.name, self.value, rel, self.bound)
    }
}

pub struct Suite {
    pub name: &'static str,
    pub anchor: &'static str,
    run: fn(u64) -> Result<Vec<Check>>,
}

impl Suite {
    pub fn run(&self, seed: u64) -> Result<Vec<Check>> {
        (self.run)(seed)
    }
}

/// In acceptance order.
pub const SUITES: [Suite; 13] = [
    Suite { name: "metric-axioms", anchor: "dl is an extended metric", run: metric_axioms },
    Suite { name: "exponent", anchor: "two-sided norm bound e^(+-dl) is sharp", run: exponent },
    Suite { name: "transport", anchor: "group action and canonical transport", run: transport },
    Suite { name: "geodesic", anchor: "geodesics, midpoints and power bounds", run: geodesic_suite },
    Suite { name: "completeness", anchor: "completeness of the metric space", run: completeness },
    Suite { name: "smooth-closure", anchor: "closure of smooth metrics", run: smooth_closure },
    Suite { name: "distance", anchor: "discrete length distance", run: distance_suite },
    Suite { name: "comparability", anchor: "distance and measure comparability", run: comparability },
    Suite { name: "divform", anchor: "divergence-form coefficient dictionary", run: divform },
    Suite { name: "varadhan", anchor: "small-time heat kernel asymptotics", run: varadhan },
    Suite { name: "poincare", anchor: "Poincare constant transfer", run: poincare },
    Suite { name: "sturm", anchor: "distinct metrics with equal distance and measure", run: sturm },
    Suite { name: "disconnected", anchor: "metrics at infinite distance", run: disconnected },
];

pub fn find(name: &str) -> Option<&'static Suite> {
    SUITES.iter().find(|s| s.name == name)
}

fn random_spd(rng: &mut ChaCha8Rng, d: usize) -> SpdMatrix {
    let r = Mat::from_fn(d, |_, _| rng.gen_range(-1.0..1.0));
    SpdMatrix::new(r.matmul(&r.transpose()).add(&Mat::scalar(d, rng.gen_range(0.2..2.0)))).expect("r rᵀ + s I is SPD")
}

pub fn random_field(chart: &GridChart, seed: u64) -> Result<MetricField> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = chart.dim();
    let n = chart.n_nodes();
    let values = (0..n).map(|_| random_spd(&mut rng, d)).collect();
    MetricField::new(chart.clone(), values, vec![false; n], format!("random{seed}"))
}

fn random_ell(chart: &GridChart, rng: &mut ChaCha8Rng) -> Result<EllField> {
    let d = chart.dim();
    let values = (0..chart.n_nodes())
        .map(|_| Mat::from_fn(d, |i, j| if i == j { 1.0 } else { 0.0 } + 0.4 * rng.gen_range(-1.0..1.0)))
        .collect();
    EllField::new(chart.clone(), values, vec![false; chart.n_nodes()], None)
}

fn max_frobenius(a: &MetricField, b: &MetricField) -> f64 {
    a.values().iter().zip(b.values()).map(|(x, y)| x.mat().frobenius_diff(y.mat())).fold(0.0, f64::max)
}

const TRIANGLE_TOLERANCE: f64 = 1e-12;

fn metric_axioms(seed: u64) -> Result<Vec<Check>> {
    let chart = GridChart::uniform(2, 32, 0.0, 1.0)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut asymmetric = 0usize;
    let mut self_distance: f64 = 0.0;
    let mut excess = f64::NEG_INFINITY;
    for _ in 0..1000 {
        let a = random_field(&chart, rng.gen())?;
        let b = random_field(&chart, rng.gen())?;
        let c = random_field(&chart, rng.gen())?;
        let (ab, ba) = (dl(&a, &b)?.value, dl(&b, &a)?.value);
        let (bc, cb) = (dl(&b, &c)?.value, dl(&c, &b)?.value);
        let (ac, ca) = (dl(&a, &c)?.value, dl(&c, &a)?.value);
        asymmetric += [(ab, ba), (bc, cb), (ac, ca)].iter().filter(|(x, y)| x.to_bits() != y.to_bits()).count();
        for g in [&a, &b, &c] {
            self_distance = self_distance.max(dl(g, g)?.value);
        }
        excess = excess.max(ac - ab - bc).max(ab - ac - bc).max(bc - ab - ac);
    }
    Ok(vec![
        Check::equal("asymmetric pairs", asymmetric as f64, 0.0),
        Check::equal("max dl(g, g)", self_distance, 0.0),
        Check::at_most("max triangle excess", excess, TRIANGLE_TOLERANCE),
    ])
}

const BOUND_TOLERANCE: f64 = 1e-12;
const ATTAINMENT_TOLERANCE: f64 = 1e-9;

fn exponent(seed: u64) -> Result<Vec<Check>> {
    let chart = GridChart::uniform(2, 16, 0.0, 1.0)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut excess, mut gap) = (f64::NEG_INFINITY, 0.0f64);
    for _ in 0..100 {
        let g = random_field(&chart, rng.gen())?;
        let h = random_field(&chart, rng.gen())?;
        let d = dl(&g, &h)?;
        for k in 0..chart.n_nodes() {
            let (gk, hk) = (g.value(k), h.value(k));
            let e = gen_eig(gk, hk)?;
            let mut logs = Vec::new();
            for col in 0..e.dim {
                let u: Vec<f64> = (0..e.dim).map(|i| e.vectors[(i, col)]).collect();
                logs.push((gk.norm_of(&u) / hk.norm_of(&u)).ln());
            }
            for _ in 0..4 {
                let u = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
                logs.push((gk.norm_of(&u) / hk.norm_of(&u)).ln());
            }
            let worst = logs.iter().fold(0.0f64, |m, l| m.max(l.abs()));
            excess = excess.max(worst - d.value);
            if Some(k) == d.argmax_node {
                let extremal = logs[0].abs().max(logs[e.dim - 1].abs());
                gap = gap.max((extremal - d.value).abs());
            }
        }
    }
    Ok(vec![
        Check::at_most("max |log(|u|_g/|u|_h)| - dl", excess, BOUND_TOLERANCE),
        Check::at_most("attainment gap at argmax node", gap, ATTAINMENT_TOLERANCE),
    ])
}

const RECONSTRUCTION_TOLERANCE: f64 = 1e-9;
const ACTION_TOLERANCE: f64 = 1e-10;

fn transport(seed: u64) -> Result<Vec<Check>> {
    let chart = GridChart::uniform(2, 16, 0.0, 1.0)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut recon, mut identity, mut inverse, mut composition) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for _ in 0..100 {
        let g = random_field(&chart, rng.gen())?;
        let h = random_field(&chart, rng.gen())?;
        recon = recon.max(max_frobenius(&act(&transport_b(&g, &h)?, &h)?, &g));
        identity = identity.max(max_frobenius(&act(&EllField::identity(chart.clone()), &g)?, &g));
        let b1 = random_ell(&chart, &mut rng)?;
        let b2 = random_ell(&chart, &mut rng)?;
        inverse = inverse.max(max_frobenius(&act(&b1.inverse()?, &act(&b1, &g)?)?, &g));
        composition = composition.max(max_frobenius(&act(&b2, &act(&b1, &g)?)?, &act(&b1.compose(&b2)?, &g)?));
    }
    Ok(vec![
        Check::at_most("act(B(g,h), h) vs g", recon, RECONSTRUCTION_TOLERANCE),
        Check::at_most("identity law", identity, ACTION_TOLERANCE),
        Check::at_most("inverse law", inverse, ACTION_TOLERANCE),
        Check::at_most("composition law", composition, ACTION_TOLERANCE),
    ])
}

const ENDPOINT_TOLERANCE: f64 = 1e-10;
const MIDPOINT_TOLERANCE: f64 = 1e-9;

fn geodesic_suite(seed: u64) -> Result<Vec<Check>> {
    let chart = GridChart::uniform(2, 16, 0.0, 1.0)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut endpoints, mut mid, mut spectral) = (0.0f64, 0.0f64, f64::NEG_INFINITY);
    for _ in 0..100 {
        let g0 = random_field(&chart, rng.gen())?;
        let g1 = random_field(&chart, rng.gen())?;
        let path = geodesic(&g0, &g1)?;
        endpoints = endpoints.max(max_frobenius(&path.eval(0.0)?, &g0)).max(max_frobenius(&path.eval(1.0)?, &g1));
        let d = dl(&g0, &g1)?.value;
        let m = midpoint(&g0, &g1)?;
        mid = mid.max((dl(&g0, &m)?.value - 0.5 * d).abs()).max((dl(&m, &g1)?.value - 0.5 * d).abs());
        for t in [0.25, 0.5, 1.0, 2.0] {
            let bt = path.transport_power(t)?;
            for k in 0..chart.n_nodes() {
                let log_norm = relative_op_norm(bt.value(k), g0.value(k)).ln();
                spectral = spectral.max(log_norm - t * d).max(-t * d - log_norm);
            }
        }
    }
    Ok(vec![
        Check::at_most("endpoint deviation", endpoints, ENDPOINT_TOLERANCE),
        Check::at_most("midpoint deviation from dl/2", mid, MIDPOINT_TOLERANCE),
        Check::at_most("log ||B^t|| outside [-t dl, t dl]", spectral, BOUND_TOLERANCE),
    ])
}

const LIMIT_TOLERANCE: f64 = 1e-8;

/// B^t for a g-self-adjoint B with positive spectrum.
fn power_in(b: &Mat, g: &SpdMatrix, t: f64) -> Result<Mat> {
    let half = spd_power(g, 0.5)?;
    let inv_half = spd_power(g, -0.5)?;
    let s = SpdMatrix::new(half.mat().matmul(b).matmul(inv_half.mat()).symmetrized())?;
    Ok(inv_half.mat().matmul(spd_power(&s, t)?.mat()).matmul(half.mat()))
}

fn completeness(seed: u64) -> Result<Vec<Check>> {
    let chart = GridChart::uniform(2, 16, 0.0, 1.0)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..5 {
        let g = random_field(&chart, rng.gen())?;
        let b = transport_b(&random_field(&chart, rng.gen())?, &g)?;
        let gs = (1..=20)
            .map(|n| {
                let values = b
                    .values()
                    .iter()
                    .zip(g.values())
                    .map(|(m, gv)| power_in(m, gv, 1.0 / n as f64))
                    .collect::<Result<Vec<_>>>()?;
                act(&EllField::new(chart.clone(), values, vec![false; chart.n_nodes()], None)?, &g)
            })
            .collect::<Result<Vec<_>>>()?;
        worst = worst.max(dl(&cauchy_limit(&gs)?, &g)?.value);
    }
    Ok(vec![Check::at_most("dl(limit, g)", worst, LIMIT_TOLERANCE)])
}

const SMOOTH_TOLERANCE: f64 = 0.01;

fn smooth_closure(_seed: u64) -> Result<Vec<Check>> {
    let chart = GridChart::uniform(2, 64, -1.0, 1.0)?;
    let ladder: Vec<f64> = (0..5).map(|k| 1.0 / (1u32 << k) as f64).collect();
    let g = conformal_field(&chart, |x| 1.0 + x[0] * x[0] + x[1] * x[1])?;
    let last = dl(&smooth_approx(&g, ladder[4])?, &g)?.value;
    let jump = nonapprox_metric(&chart, 100.0, 0.5)?;
    let mut nearest = f64::INFINITY;
    for &eps in &ladder {
        nearest = nearest.min(dl(&smooth_approx(&jump, eps)?, &jump)?.value);
    }
    Ok(vec![
        Check::at_most("dl(g_eps, g) after 4 halvings, continuous", last, SMOOTH_TOLERANCE),
        Check::at_least("min over ladder dl(g_eps, g), jump K=100", nearest, 0.25 * 100f64.ln()),
    ])
}

const DISTANCE_TOLERANCE: f64 = 0.05;

fn distance_suite(_seed: u64) -> Result<Vec<Check>> {
    let chart = GridChart::uniform(2, 129, 0.0, 1.0)?;
    let corner = chart.node_index(&[128, 128]);
    let top = chart.node_index(&[0, 128]);
    let flat = distance(&MetricField::euclidean(chart.clone()), 0, corner, 2)?;
    let c = 3.0;
    let conformal = MetricField::constant(chart.clone(), SpdMatrix::scalar(2, c * c)?)?;
    let scaled = distance(&conformal, 0, corner, 2)?;
    let aniso = MetricField::constant(chart.clone(), SpdMatrix::from_diag(&[1.0, 4.0])?)?;
    let vertical = distance(&aniso, 0, top, 2)?;
    Ok(vec![
        Check::at_most("|d/sqrt(2) - 1|, flat diagonal", (flat / 2f64.sqrt() - 1.0).abs(), DISTANCE_TOLERANCE),
        Check::at_most("|d_c/(c d) - 1|, c = 3", (scaled / (c * flat) - 1.0).abs(), DISTANCE_TOLERANCE),
        Check::at_most("|d/2 - 1|, diag(1,4) vertical", (vertical / 2.0 - 1.0).abs(), DISTANCE_TOLERANCE),
    ])
}

const PAIR_DL: f64 = 0.3;
const MEASURE_SLACK: f64 = 1e-10;

/// h = G^{1/2} exp(2S) G^{1/2} per node with the spectral radii of S
/// scaled so that their maximum is `target`; then dl(g, h) = target.
fn perturbed(g: &MetricField, target: f64, rng: &mut ChaCha8Rng) -> Result<MetricField> {
    let d = g.dim();
    let raw: Vec<Mat> = (0..g.n_nodes())
        .map(|_| {
            let r = Mat::from_fn(d, |_, _| rng.gen_range(-1.0..1.0));
            r.add(&r.transpose())
        })
        .collect();
    let radius = |m: &Mat| m.op_norm();
    let top = raw.iter().map(radius).fold(0.0, f64::max);
    let values = raw
        .iter()
        .zip(g.values())
        .map(|(r, gv)| {
            let half = spd_power(gv, 0.5)?;
            let e = sym_exp(&r.scale(2.0 * target / top))?;
            SpdMatrix::new(half.mat().matmul(e.mat()).matmul(half.mat()).symmetrized())
        })
        .collect::<Result<Vec<_>>>()?;
    MetricField::new(g.chart().clone(), values, vec![false; g.n_nodes()], "perturbed")
}

fn comparability(seed: u64) -> Result<Vec<Check>> {
    let chart = GridChart::uniform(2, 33, 0.0, 1.0)?;
    let n = chart.n_nodes();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let slack = 2.0 * calibrate_stencil(2, 2);
    let (mut dl_dev, mut violations, mut measure_excess) = (0.0f64, 0usize, f64::NEG_INFINITY);
    let (lo_mu, hi_mu) = ((-2.0 * PAIR_DL).exp(), (2.0 * PAIR_DL).exp());
    for _ in 0..5 {
        let g = random_field(&chart, rng.gen())?;
        let h = perturbed(&g, PAIR_DL, &mut rng)?;
        dl_dev = dl_dev.max((dl(&g, &h)?.value - PAIR_DL).abs());
        let pairs: Vec<(usize, usize)> = (0..20).map(|_| (rng.gen_range(0..n), rng.gen_range(0..n))).collect();
        violations += distance_comparability_check(&g, &h, &pairs, 2, slack)?.violations;
        for _ in 0..20 {
            let (x0, y0) = (rng.gen_range(0..32), rng.gen_range(0..32));
            let (x1, y1) = (rng.gen_range(x0 + 1..=32), rng.gen_range(y0 + 1..=32));
            let region: Vec<usize> =
                (x0..=x1).flat_map(|i| (y0..=y1).map(move |j| (i, j))).map(|(i, j)| chart.node_index(&[i, j])).collect();
            let ratio = measure(&h, &region)?.volume / measure(&g, &region)?.volume;
            measure_excess = measure_excess.max(ratio / hi_mu - 1.0).max(lo_mu / ratio - 1.0);
        }
    }
    Ok(vec![
        Check::at_most("|dl(g, h) - 0.3|", dl_dev, BOUND_TOLERANCE),
        Check::equal("distance ratios outside [e^-0.3, e^0.3] (2x stencil slack)", violations as f64, 0.0),
        Check::at_most("relative excess of measure ratios over e^(+-0.6)", measure_excess, MEASURE_SLACK),
    ])
}

const ASSEMBLY_TOLERANCE: f64 = 1e-12;

/// Smooth SPD coefficients R(θ) diag(e^a, e^b) R(θ)ᵀ with trigonometric θ, a, b.
fn smooth_coefficients(chart: &GridChart, rng: &mut ChaCha8Rng, unit_det: bool) -> Result<EllField> {
    let p: Vec<f64> = (0..8).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let values = (0..chart.n_nodes())
        .map(|k| {
            let x = chart.coord(k);
            let theta = p[0] * (PI * x[0] + p[1]).sin() + p[2] * x[1];
            let a = 0.6 * (PI * (x[0] + x[1]) + p[3]).sin() * p[4];
            let b = if unit_det { -a } else { 0.6 * (PI * x[1] + p[5]).cos() * p[6] + 0.3 * p[7] * x[0] };
            let (c, s) = (theta.cos(), theta.sin());
            let r = Mat::from_rows([[c, -s], [s, c]]);
            r.matmul(&Mat::from_diag(&[a.exp(), b.exp()])).matmul(&r.transpose()).symmetrized()
        })
        .collect();
    EllField::new(chart.clone(), values, vec![false; chart.n_nodes()], None)
}

fn divform(seed: u64) -> Result<Vec<Check>> {
    let small = GridChart::uniform(2, 4, 0.0, 1.0)?;
    let four = EllField::constant(small, Mat::scalar(2, 4.0))?;
    let f_dev = divform_factor(&four).iter().map(|f| (f - 0.5).abs()).fold(0.0, f64::max);

    let chart = GridChart::uniform(2, 32, 0.0, 1.0)?;
    let g = MetricField::euclidean(chart.clone());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut random_dev, mut unit_dev) = (0.0f64, 0.0f64);
    for _ in 0..5 {
        let a = smooth_coefficients(&chart, &mut rng, false)?;
        random_dev = random_dev.max(operator_correspondence_check(&a, &g, 3, rng.gen())?.max_deviation);
        let a1 = smooth_coefficients(&chart, &mut rng, true)?;
        unit_dev = unit_dev.max(operator_correspondence_check(&a1, &g, 3, rng.gen())?.max_deviation);
    }
    Ok(vec![
        Check::equal("max |f - 1/2| for A = diag(4,4), n = 2", f_dev, 0.0),
        Check::at_most("correspondence deviation, random A", random_dev, 1e-8),
        Check::at_most("operator deviation, det A = 1", unit_dev, ASSEMBLY_TOLERANCE),
    ])
}

const VARADHAN_TOLERANCE: f64 = 0.15;

fn varadhan(_seed: u64) -> Result<Vec<Check>> {
    let chart = GridChart::uniform(1, 513, 0.0, 1.0)?;
    let (source, target) = (128, 384);
    let flat = MetricField::euclidean(chart.clone());
    let op = assemble_laplacian(&flat, None, BoundaryCondition::Neumann)?;
    let est = varadhan_estimate(&heat_run(&op, source, &[0.005, 0.01, 0.02], 5e-6)?, target)?;
    let c: f64 = 2.0;
    let conformal = MetricField::constant(chart, SpdMatrix::scalar(1, c * c)?)?;
    let op_c = assemble_laplacian(&conformal, None, BoundaryCondition::Neumann)?;
    let times: Vec<f64> = [0.005, 0.01, 0.02].iter().map(|t| t * c * c).collect();
    let est_c = varadhan_estimate(&heat_run(&op_c, source, &times, 5e-6 * c * c)?, target)?;
    let want_c = (c * 0.5).powi(2);
    Ok(vec![
        Check::at_most("relative error vs 0.25, flat", (est.extrapolated / 0.25 - 1.0).abs(), VARADHAN_TOLERANCE),
        Check::at_most("relative error vs (c 0.5)^2, c = 2", (est_c.extrapolated / want_c - 1.0).abs(), VARADHAN_TOLERANCE),
    ])
}

const POINCARE_TOLERANCE: f64 = 0.02;

fn poincare(seed: u64) -> Result<Vec<Check>> {
    let square = GridChart::uniform(2, 65, 0.0, 1.0)?;
    let flat = poincare_measure(&MetricField::euclidean(square), 0, 10.0, 2)?;

    let chart = GridChart::uniform(2, 33, 0.0, 1.0)?;
    let delta = MetricField::euclidean(chart.clone());
    let base = poincare_measure(&delta, 0, 10.0, 2)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut exceeded, mut worst_ratio) = (0usize, 0.0f64);
    for _ in 0..5 {
        let h = perturbed(&delta, LN_2, &mut rng)?;
        let d = dl(&delta, &h)?.value;
        let bound = poincare_propagate(base.c1, 1.0, 1.0, d, 2, 2.0, 2.0)?.c1;
        let measured = poincare_measure(&h, 0, 100.0, 2)?.c1;
        if measured > bound {
            exceeded += 1;
        }
        worst_ratio = worst_ratio.max(measured / bound);
    }
    Ok(vec![
        Check::at_most("|pi C1 - 1|, flat 65^2", (flat.c1 * PI - 1.0).abs(), POINCARE_TOLERANCE),
        Check::equal("trials with measured C1 above the propagated bound", exceeded as f64, 0.0),
        Check::at_most("max measured/propagated", worst_ratio, 1.0),
    ])
}

const DET_TOLERANCE: f64 = 1e-14;

fn sturm(seed: u64) -> Result<Vec<Check>> {
    let chart = GridChart::uniform(4, 6, 0.0, 1.0)?;
    let net = CurveNetwork::random(&chart, 3, 8, seed)?;
    let radius = covering_tube_radius(&net, &chart)?;
    let net = net.with_tube_radius(radius);
    let pair = sturm_pair(&net, 1.0, &chart)?;
    let report = pair.report(&net, 2)?;
    Ok(vec![
        Check::at_most("max |det g - det g'|", report.det_max_deviation, DET_TOLERANCE),
        Check::equal("network pairs outside (1+1/8)^(+-1)|x_k - x_l| +- slack", report.violations as f64, 0.0),
    ])
}

const INCREMENT_TOLERANCE: f64 = 1e-12;

fn disconnected(_seed: u64) -> Result<Vec<Check>> {
    let radii: Vec<f64> = (1..=150).map(f64::from).collect();
    let annuli = unbounded_conformal(radii.clone(), 2)?;
    let e = dl_exhaustion(|_: &[f64]| Mat::identity(2), annuli, 2, &radii, 0.5)?;
    let mut worst = (e.profile[0].1 - 0.5 * LN_2).abs();
    for w in e.profile.windows(2) {
        worst = worst.max((w[1].1 - w[0].1 - 0.5 * LN_2).abs());
    }
    Ok(vec![
        Check::equal("infinite with certificate", if e.is_infinite() && e.certificate.is_some() { 1.0 } else { 0.0 }, 1.0),
        Check::at_most("|increment - log(2)/2| per annulus", worst, INCREMENT_TOLERANCE),
    ])
}
