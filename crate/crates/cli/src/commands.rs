use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use metspace::constructions::{
    covering_tube_radius, lipschitz_graph_suite, nonapprox_metric, sturm_pair, unbounded_conformal, CurveNetwork,
    GraphFunction,
};
use metspace::field::build_field_with_cap;
use metspace::geometry::{calibrate_stencil, distance_comparability_check, DistanceSolver};
use metspace::metric_space::{dl, geodesic, midpoint, smooth_approx};
use metspace::operators::{
    assemble_laplacian, heat_run, poincare_measure, poincare_propagate, varadhan_estimate, BoundaryCondition,
};
use metspace::rmf::{read_field, write_field, write_scalar};
use metspace::{GridChart, MetricField};

use crate::config::{parse_chart, parse_pair};
use crate::report::{Format, Report};
use crate::row;
use crate::suites::{self, DEFAULT_SEED, SUITES};

#[derive(Debug, Parser)]
#[command(name = "metspace", version, about = "Distances, geodesics, operators and example constructions for rough metric fields")]
pub struct Cli {
    #[command(flatten)]
    pub globals: Globals,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Debug, Args)]
pub struct Globals {
    /// Chart for constructions: dim,shape,spacing,origin,periodic (per-axis values separated by ':')
    #[arg(long, global = true)]
    pub chart: Option<String>,
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Relative slack for distance comparisons (default: twice the calibrated stencil error)
    #[arg(long = "tol-stencil", global = true)]
    pub tol_stencil: Option<f64>,
    /// Directory for the report and any emitted fields
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
}

#[derive(Clone, Debug, Subcommand)]
pub enum Command {
    /// Extended distance between two metric fields
    Dl { a: PathBuf, b: PathBuf },
    /// Points g_t on the geodesic from g0 to g1
    Geodesic {
        g0: PathBuf,
        g1: PathBuf,
        #[arg(long = "t", value_delimiter = ',', default_value = "0,0.25,0.5,0.75,1")]
        ts: Vec<f64>,
    },
    Midpoint { g0: PathBuf, g1: PathBuf },
    /// Mollify with each radius of a ladder and report dl to the input
    Smooth {
        g: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        eps: Vec<f64>,
    },
    /// Length distance between node pairs, optionally compared with a second metric
    Distance {
        g: PathBuf,
        #[arg(long = "pair", value_parser = parse_pair, required = true)]
        pairs: Vec<(usize, usize)>,
        #[arg(long, default_value_t = 2)]
        order: usize,
        #[arg(long)]
        compare: Option<PathBuf>,
    },
    /// Volume of the whole chart, optionally compared with a second metric
    Measure {
        g: PathBuf,
        #[arg(long)]
        compare: Option<PathBuf>,
    },
    Laplacian {
        g: PathBuf,
        #[arg(long)]
        dirichlet: bool,
    },
    /// Heat kernel from a source node
    Heat {
        g: PathBuf,
        #[arg(long)]
        source: usize,
        #[arg(long, value_delimiter = ',', required = true)]
        times: Vec<f64>,
        #[arg(long = "max-dt", default_value_t = 1e-4)]
        max_dt: f64,
        #[arg(long)]
        dirichlet: bool,
    },
    /// −4t log ρ(t, source, target) against the squared length distance
    Varadhan {
        g: PathBuf,
        #[arg(long)]
        source: usize,
        #[arg(long)]
        target: usize,
        #[arg(long, value_delimiter = ',', required = true)]
        times: Vec<f64>,
        #[arg(long = "max-dt", default_value_t = 1e-5)]
        max_dt: f64,
        #[arg(long, default_value_t = 2)]
        order: usize,
    },
    /// Poincaré constant on a ball; with --compare, both metrics are measured on the whole chart
    /// and the constant propagated from the first bounds the second
    Poincare {
        g: PathBuf,
        #[arg(long, default_value_t = 0)]
        center: usize,
        /// Ball radius in the length distance of g (default: the whole chart)
        #[arg(long)]
        radius: Option<f64>,
        #[arg(long, default_value_t = 2)]
        order: usize,
        #[arg(long)]
        compare: Option<PathBuf>,
    },
    /// Emit an example metric as .rmf
    Construct {
        #[command(subcommand)]
        what: Construction,
    },
    /// Run a verification suite (or `all`)
    Verify { suite: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum GraphKind {
    Zero,
    Cone,
    Sawtooth,
    RandomCreases,
}

#[derive(Clone, Debug, Subcommand)]
pub enum Construction {
    /// Conformal jump K·δ outside a ball, δ inside
    Nonapprox {
        #[arg(long, default_value_t = 100.0)]
        jump: f64,
        #[arg(long, default_value_t = 1.0)]
        radius: f64,
    },
    /// 2^j·δ on the j-th max-norm annulus
    Unbounded {
        #[arg(long, value_delimiter = ',', required = true)]
        radii: Vec<f64>,
    },
    /// Pair of 4D metrics with equal determinant built on a curve network
    Sturm {
        #[arg(long = "m-max", default_value_t = 8)]
        m_max: usize,
        #[arg(long, default_value_t = 3)]
        points: usize,
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
    },
    /// Induced metric on the graph of a Lipschitz function
    Graph {
        #[arg(long, value_enum, default_value = "sawtooth")]
        function: GraphKind,
        #[arg(long, default_value_t = 8)]
        period: usize,
        #[arg(long, default_value_t = 1.0)]
        slope: f64,
        #[arg(long, default_value_t = 6)]
        count: usize,
    },
}

#[derive(Debug)]
pub enum Failure {
    /// Bad flag or flag combination: exit 64.
    Usage(String),
    /// Library or I/O error: exit 1.
    Run(String),
}

impl From<metspace::Error> for Failure {
    fn from(e: metspace::Error) -> Failure {
        Failure::Run(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Failure {
        Failure::Run(e.to_string())
    }
}

type Outcome = Result<Report, Failure>;

/// Tolerance on dl identities along geodesics.
const PATH_TOLERANCE: f64 = 1e-9;
const MEASURE_SLACK: f64 = 1e-10;
const SYMMETRY_TOLERANCE: f64 = 1e-12;
const DET_TOLERANCE: f64 = 1e-14;

fn load(path: &Path) -> Result<MetricField, Failure> {
    read_field(path).map_err(|e| Failure::Run(format!("{}: {e}", path.display())))
}

fn chart_or(globals: &Globals, default: &str) -> Result<GridChart, Failure> {
    parse_chart(globals.chart.as_deref().unwrap_or(default)).map_err(|e| Failure::Usage(format!("--chart: {e}")))
}

fn fields_dir(globals: &Globals) -> PathBuf {
    globals.out.clone().unwrap_or_else(|| PathBuf::from("."))
}

fn emit(globals: &Globals, g: &MetricField, name: &str) -> Result<String, Failure> {
    let dir = fields_dir(globals);
    std::fs::create_dir_all(&dir)?;
    let path = dir.join(name);
    write_field(g, &path)?;
    Ok(path.display().to_string())
}

fn paths(ps: &[&Path]) -> Vec<String> {
    ps.iter().map(|p| p.display().to_string()).collect()
}

fn config(globals: &Globals, inputs: Vec<String>, params: Value) -> Value {
    json!({
        "inputs": inputs,
        "chart": globals.chart,
        "seed": globals.seed,
        "tol_stencil": globals.tol_stencil,
        "out": globals.out.as_ref().map(|p| p.display().to_string()),
        "format": globals.format,
        "params": params,
    })
}

fn stencil_slack(globals: &Globals, dim: usize, order: usize) -> f64 {
    globals.tol_stencil.unwrap_or_else(|| 2.0 * calibrate_stencil(dim, order))
}

fn finite_or_null(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else {
        Value::Null
    }
}

pub fn run(command: &Command, globals: &Globals) -> Outcome {
    if let Some(t) = globals.tol_stencil {
        if !(t >= 0.0 && t.is_finite()) {
            return Err(Failure::Usage(format!("--tol-stencil must be a non-negative number, got {t}")));
        }
    }
    match command {
        Command::Dl { a, b } => cmd_dl(globals, a, b),
        Command::Geodesic { g0, g1, ts } => cmd_geodesic(globals, g0, g1, ts),
        Command::Midpoint { g0, g1 } => cmd_midpoint(globals, g0, g1),
        Command::Smooth { g, eps } => cmd_smooth(globals, g, eps),
        Command::Distance { g, pairs, order, compare } => cmd_distance(globals, g, pairs, *order, compare.as_deref()),
        Command::Measure { g, compare } => cmd_measure(globals, g, compare.as_deref()),
        Command::Laplacian { g, dirichlet } => cmd_laplacian(globals, g, *dirichlet),
        Command::Heat { g, source, times, max_dt, dirichlet } => cmd_heat(globals, g, *source, times, *max_dt, *dirichlet),
        Command::Varadhan { g, source, target, times, max_dt, order } => {
            cmd_varadhan(globals, g, *source, *target, times, *max_dt, *order)
        }
        Command::Poincare { g, center, radius, order, compare } => {
            cmd_poincare(globals, g, *center, *radius, *order, compare.as_deref())
        }
        Command::Construct { what } => cmd_construct(globals, what),
        Command::Verify { suite } => cmd_verify(globals, suite),
    }
}

fn cmd_dl(globals: &Globals, a: &Path, b: &Path) -> Outcome {
    let (g, h) = (load(a)?, load(b)?);
    let d = dl(&g, &h)?;
    let mut r = Report::new("dl", config(globals, paths(&[a, b]), json!({})), &["extended distance between metric fields"]);
    r.push(row! {
        "value" => finite_or_null(d.value),
        "infinite" => d.is_infinite(),
        "closeness_constant" => finite_or_null(d.value.exp()),
        "argmax_node" => d.argmax_node,
    });
    Ok(r)
}

fn cmd_geodesic(globals: &Globals, a: &Path, b: &Path, ts: &[f64]) -> Outcome {
    let (g0, g1) = (load(a)?, load(b)?);
    if ts.iter().any(|t| !t.is_finite()) {
        return Err(Failure::Usage("--t: times must be finite".into()));
    }
    let path = geodesic(&g0, &g1)?;
    let d = dl(&g0, &g1)?.value;
    let mut r = Report::new(
        "geodesic",
        config(globals, paths(&[a, b]), json!({ "t": ts })),
        &["geodesics via fractional powers of the transport"],
    );
    for &t in ts {
        let gt = path.eval(t)?;
        let (from, to) = (dl(&g0, &gt)?.value, dl(&gt, &g1)?.value);
        let mut row = row! {
            "t" => t,
            "dl_from_g0" => from,
            "dl_to_g1" => to,
            "expected_from_g0" => t.abs() * d,
            "expected_to_g1" => (1.0 - t).abs() * d,
        };
        if globals.out.is_some() {
            row.insert("field".into(), json!(emit(globals, &gt, &format!("geodesic-{t}.rmf"))?));
        }
        r.push(row);
        let dev = (from - t.abs() * d).abs().max((to - (1.0 - t).abs() * d).abs());
        r.require_at_most(&format!("dl along the geodesic at t = {t}"), dev, PATH_TOLERANCE * d.max(1.0));
    }
    Ok(r)
}

fn cmd_midpoint(globals: &Globals, a: &Path, b: &Path) -> Outcome {
    let (g0, g1) = (load(a)?, load(b)?);
    let m = midpoint(&g0, &g1)?;
    let d = dl(&g0, &g1)?.value;
    let (d0, d1) = (dl(&g0, &m)?.value, dl(&m, &g1)?.value);
    let mut r = Report::new("midpoint", config(globals, paths(&[a, b]), json!({})), &["midpoints at half distance"]);
    let mut row = row! { "dl_g0_g1" => d, "dl_g0_m" => d0, "dl_m_g1" => d1 };
    if globals.out.is_some() {
        row.insert("field".into(), json!(emit(globals, &m, "midpoint.rmf")?));
    }
    r.push(row);
    r.require_at_most("midpoint at half distance", (d0 - 0.5 * d).abs().max((d1 - 0.5 * d).abs()), PATH_TOLERANCE * d.max(1.0));
    Ok(r)
}

fn cmd_smooth(globals: &Globals, path: &Path, eps: &[f64]) -> Outcome {
    let g = load(path)?;
    let mut r = Report::new(
        "smooth",
        config(globals, paths(&[path]), json!({ "eps": eps })),
        &["approximation by smooth metrics"],
    );
    for &e in eps {
        let s = smooth_approx(&g, e)?;
        let mut row = row! { "eps" => e, "dl" => dl(&s, &g)?.value };
        if globals.out.is_some() {
            row.insert("field".into(), json!(emit(globals, &s, &format!("smooth-{e}.rmf"))?));
        }
        r.push(row);
    }
    Ok(r)
}

fn check_nodes(g: &MetricField, nodes: &[usize]) -> Result<(), Failure> {
    match nodes.iter().find(|&&k| k >= g.n_nodes()) {
        Some(k) => Err(Failure::Usage(format!("node {k} outside the chart ({} nodes)", g.n_nodes()))),
        None => Ok(()),
    }
}

fn cmd_distance(globals: &Globals, path: &Path, pairs: &[(usize, usize)], order: usize, compare: Option<&Path>) -> Outcome {
    let g = load(path)?;
    let nodes: Vec<usize> = pairs.iter().flat_map(|(x, y)| [*x, *y]).collect();
    check_nodes(&g, &nodes)?;
    let mut inputs = paths(&[path]);
    inputs.extend(compare.map(|p| p.display().to_string()));
    let params = json!({ "pairs": pairs, "order": order });
    let mut r = Report::new("distance", config(globals, inputs, params), &["induced length distance"]);
    match compare {
        None => {
            let solver = DistanceSolver::new(&g, order)?;
            for &(x, y) in pairs {
                r.push(row! { "x" => x, "y" => y, "distance" => finite_or_null(solver.map(x)?.values[y]) });
            }
        }
        Some(p) => {
            let h = load(p)?;
            let slack = stencil_slack(globals, g.dim(), order);
            let report = distance_comparability_check(&g, &h, pairs, order, slack)?;
            for row in &report.rows {
                r.push(row! {
                    "x" => row.x,
                    "y" => row.y,
                    "d_g" => row.d_g,
                    "d_h" => row.d_h,
                    "ratio" => row.ratio,
                    "lower" => report.lower * (1.0 - slack),
                    "upper" => report.upper * (1.0 + slack),
                    "within" => row.within_bounds,
                });
            }
            r.require_at_most("distance ratios within e^(+-dl)", report.violations as f64, 0.0);
        }
    }
    Ok(r)
}

fn cmd_measure(globals: &Globals, path: &Path, compare: Option<&Path>) -> Outcome {
    let g = load(path)?;
    let all = g.chart().all_nodes();
    let vg = metspace::geometry::measure(&g, &all)?.volume;
    let mut inputs = paths(&[path]);
    inputs.extend(compare.map(|p| p.display().to_string()));
    let mut r = Report::new("measure", config(globals, inputs, json!({})), &["induced measure"]);
    match compare {
        None => r.push(row! { "nodes" => all.len(), "volume" => vg }),
        Some(p) => {
            let h = load(p)?;
            let vh = metspace::geometry::measure(&h, &all)?.volume;
            let d = dl(&g, &h)?.value;
            let n = g.dim() as f64;
            let (lower, upper) = ((-n * d).exp(), (n * d).exp());
            let ratio = vh / vg;
            r.push(row! {
                "nodes" => all.len(),
                "volume_g" => vg,
                "volume_h" => vh,
                "ratio" => ratio,
                "lower" => finite_or_null(lower),
                "upper" => finite_or_null(upper),
            });
            let excess = (ratio / upper - 1.0).max(lower / ratio - 1.0);
            r.require_at_most("measure ratio within e^(+-n dl)", excess, MEASURE_SLACK);
        }
    }
    Ok(r)
}

fn boundary(dirichlet: bool) -> BoundaryCondition {
    if dirichlet {
        BoundaryCondition::Dirichlet
    } else {
        BoundaryCondition::Neumann
    }
}

fn cmd_laplacian(globals: &Globals, path: &Path, dirichlet: bool) -> Outcome {
    let g = load(path)?;
    let op = assemble_laplacian(&g, None, boundary(dirichlet))?;
    let ones = vec![1.0; op.n()];
    let row_sum = op.apply(&ones).iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut r = Report::new(
        "laplacian",
        config(globals, paths(&[path]), json!({ "dirichlet": dirichlet })),
        &["Laplace-Beltrami operator of a rough metric"],
    );
    r.push(row! {
        "dofs" => op.n(),
        "nonzeros" => op.vals.len(),
        "symmetry_defect" => op.symmetry_defect(),
        "max_abs_row_sum" => row_sum,
    });
    r.require_at_most("stiffness symmetry", op.symmetry_defect(), SYMMETRY_TOLERANCE);
    Ok(r)
}

fn cmd_heat(globals: &Globals, path: &Path, source: usize, times: &[f64], max_dt: f64, dirichlet: bool) -> Outcome {
    let g = load(path)?;
    check_nodes(&g, &[source])?;
    let op = assemble_laplacian(&g, None, boundary(dirichlet))?;
    let run = heat_run(&op, source, times, max_dt)?;
    let params = json!({ "source": source, "times": times, "max_dt": max_dt, "dirichlet": dirichlet });
    let mut r = Report::new("heat", config(globals, paths(&[path]), params), &["heat flow of the rough Laplacian"]);
    for (i, &t) in run.times.iter().enumerate() {
        let field = &run.fields[i];
        let total: f64 = field.values().iter().zip(&run.mass).map(|(u, m)| u * m).sum();
        let mut row = row! { "t" => t, "kernel_at_source" => run.kernel(i, source), "total_mass" => total };
        if let Some(dir) = &globals.out {
            std::fs::create_dir_all(dir)?;
            let p = dir.join(format!("heat-{t}.rmf"));
            write_scalar(field, &p)?;
            row.insert("field".into(), json!(p.display().to_string()));
        }
        r.push(row);
    }
    if !dirichlet {
        r.push(row! { "steps" => run.steps, "mass_drift" => run.mass_drift });
        r.require_at_most("mass conservation", run.mass_drift, 1e-10);
    }
    Ok(r)
}

fn cmd_varadhan(
    globals: &Globals,
    path: &Path,
    source: usize,
    target: usize,
    times: &[f64],
    max_dt: f64,
    order: usize,
) -> Outcome {
    let g = load(path)?;
    check_nodes(&g, &[source, target])?;
    let op = assemble_laplacian(&g, None, BoundaryCondition::Neumann)?;
    let est = varadhan_estimate(&heat_run(&op, source, times, max_dt)?, target)?;
    let d = DistanceSolver::new(&g, order)?.map(source)?.values[target];
    let params = json!({ "source": source, "target": target, "times": times, "max_dt": max_dt, "order": order });
    let mut r = Report::new("varadhan", config(globals, paths(&[path]), params), &["small-time heat kernel asymptotics"]);
    for (t, e) in est.times.iter().zip(&est.estimates) {
        r.push(row! { "t" => t, "estimate" => e });
    }
    r.push(row! {
        "extrapolated" => est.extrapolated,
        "distance_squared" => d * d,
        "relative_error" => (est.extrapolated / (d * d) - 1.0).abs(),
    });
    Ok(r)
}

fn cmd_poincare(
    globals: &Globals,
    path: &Path,
    center: usize,
    radius: Option<f64>,
    order: usize,
    compare: Option<&Path>,
) -> Outcome {
    if compare.is_some() && radius.is_some() {
        return Err(Failure::Usage("--radius cannot be combined with --compare".into()));
    }
    let g = load(path)?;
    check_nodes(&g, &[center])?;
    let radius = radius.unwrap_or(f64::INFINITY);
    let m = poincare_measure(&g, center, radius, order)?;
    let mut inputs = paths(&[path]);
    inputs.extend(compare.map(|p| p.display().to_string()));
    let params = json!({ "center": center, "radius": finite_or_null(radius), "order": order });
    let mut r = Report::new("poincare", config(globals, inputs, params), &["Poincare constant transfer"]);
    r.push(row! { "center" => center, "radius" => finite_or_null(radius), "ball_nodes" => m.ball_nodes, "lambda1" => m.lambda1, "c1" => m.c1 });
    if let Some(p) = compare {
        let h = load(p)?;
        let d = dl(&g, &h)?.value;
        if !d.is_finite() {
            return Err(Failure::Run("metrics are at infinite distance".into()));
        }
        let n = g.dim();
        let bound = poincare_propagate(m.c1, 1.0, 1.0, d, n, 2.0, 2.0)?.c1;
        let mh = poincare_measure(&h, center, f64::INFINITY, order)?;
        r.push(row! { "dl" => d, "c1_measured_h" => mh.c1, "c1_propagated" => bound });
        r.require_at_most("propagated Poincare constant bounds the measured one", mh.c1, bound);
    }
    Ok(r)
}

fn cmd_construct(globals: &Globals, what: &Construction) -> Outcome {
    match what {
        Construction::Nonapprox { jump, radius } => {
            let chart = chart_or(globals, "2,65,0.0625,-2,0")?;
            let g = nonapprox_metric(&chart, *jump, *radius)?;
            let file = emit(globals, &g, "nonapprox.rmf")?;
            let params = json!({ "name": "nonapprox", "jump": jump, "radius": radius });
            let mut r = Report::new("construct", config(globals, vec![], params), &["metric not approximable by smooth metrics"]);
            r.push(row! { "field" => file, "nodes" => g.n_nodes(), "jump" => jump, "dl_to_flat" => dl(&g, &MetricField::euclidean(chart))?.value });
            Ok(r)
        }
        Construction::Unbounded { radii } => {
            let last = radii.last().copied().unwrap_or(0.0);
            let default = format!("2,{},1,{},0", 2.0 * last.ceil() + 1.0, -last.ceil());
            let chart = chart_or(globals, &default)?;
            let gen = unbounded_conformal(radii.clone(), chart.dim())?;
            let g = build_field_with_cap(&chart, gen, 0.0)?.with_label("unbounded");
            let file = emit(globals, &g, "unbounded.rmf")?;
            let params = json!({ "name": "unbounded", "radii": radii });
            let mut r = Report::new("construct", config(globals, vec![], params), &["metrics at infinite distance"]);
            r.push(row! { "field" => file, "nodes" => g.n_nodes(), "dl_to_flat" => dl(&g, &MetricField::euclidean(chart))?.value });
            Ok(r)
        }
        Construction::Sturm { m_max, points, alpha } => {
            let chart = chart_or(globals, "4,6,0.2,0,0")?;
            let net = CurveNetwork::random(&chart, *points, *m_max, globals.seed)?;
            let radius = covering_tube_radius(&net, &chart)?;
            let net = net.with_tube_radius(radius);
            let pair = sturm_pair(&net, *alpha, &chart)?;
            let report = pair.report(&net, 2)?;
            let fg = emit(globals, &pair.g, "sturm-g.rmf")?;
            let fp = emit(globals, &pair.g_prime, "sturm-g-prime.rmf")?;
            let params = json!({ "name": "sturm", "m_max": m_max, "points": points, "alpha": alpha });
            let mut r = Report::new(
                "construct",
                config(globals, vec![], params),
                &["distinct metrics with equal distance and measure"],
            );
            r.push(row! {
                "field_g" => fg,
                "field_g_prime" => fp,
                "det_max_deviation" => report.det_max_deviation,
                "tube_radius" => report.tube_radius,
                "psi_min" => report.psi_min,
                "budget_epsilon" => report.budget_epsilon,
                "pairs" => report.rows.len(),
                "violations" => report.violations,
            });
            for row in &report.rows {
                r.push(row! {
                    "k" => row.k,
                    "l" => row.l,
                    "euclidean" => row.euclidean,
                    "d_g" => row.d_g,
                    "d_g_prime" => row.d_g_prime,
                    "lower" => row.lower,
                    "upper" => row.upper,
                    "within" => row.within,
                });
            }
            r.require_at_most("equal determinants", report.det_max_deviation, DET_TOLERANCE);
            r.require_at_most("network distances within (1+1/m_max)^(+-1)", report.violations as f64, 0.0);
            Ok(r)
        }
        Construction::Graph { function, period, slope, count } => {
            let chart = chart_or(globals, "2,33,0.0625,-1,0")?;
            let f = match function {
                GraphKind::Zero => GraphFunction::Zero,
                GraphKind::Cone => GraphFunction::Cone,
                GraphKind::Sawtooth => GraphFunction::Sawtooth { period: *period, slope: *slope },
                GraphKind::RandomCreases => GraphFunction::RandomCreases { count: *count, seed: globals.seed },
            };
            let (g, report) = lipschitz_graph_suite(&f, &chart)?;
            let file = emit(globals, &g, &format!("graph-{}.rmf", f.name()))?;
            let params = json!({ "name": "graph", "function": f.name(), "period": period, "slope": slope, "count": count });
            let mut r = Report::new("construct", config(globals, vec![], params), &["graphs of Lipschitz functions"]);
            r.push(row! {
                "field" => file,
                "function" => report.function,
                "nodes" => report.nodes,
                "crease_nodes" => report.crease_nodes,
                "crease_fraction" => report.crease_fraction,
                "mask_fraction" => report.mask_fraction,
                "max_slope" => report.max_slope,
            });
            Ok(r)
        }
    }
}

fn cmd_verify(globals: &Globals, name: &str) -> Outcome {
    let selected: Vec<&suites::Suite> = if name == "all" {
        SUITES.iter().collect()
    } else {
        let names: Vec<&str> = SUITES.iter().map(|s| s.name).collect();
        vec![suites::find(name)
            .ok_or_else(|| Failure::Usage(format!("unknown suite {name:?}; expected all or one of {}", names.join(", "))))?]
    };
    let anchors: Vec<&str> = selected.iter().map(|s| s.anchor).collect();
    let mut r = Report::new("verify", config(globals, vec![], json!({ "suite": name })), &anchors);
    for suite in selected {
        for check in suite.run(globals.seed)? {
            r.push(row! {
                "suite" => suite.name,
                "check" => check.name,
                "value" => finite_or_null(check.value),
                "relation" => check.relation,
                "bound" => check.bound,
                "passed" => check.passed,
            });
            if !check.passed {
                r.violations.push(crate::report::Violation {
                    invariant: format!("{}: {}", suite.name, check.name),
                    value: check.value,
                    bound: check.bound,
                });
            }
        }
    }
    Ok(r)
}
