use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::ScalarField;

use super::sparse::{cg, BoundaryCondition, SparseOperator, CG_TOLERANCE};

pub const HEAT_METHOD: &str = "backward-euler+rannacher";

/// Heat kernel column ρ(t, source, ·) at the requested times, normalized so
/// that Σ ρ·m = 1 at t = 0.
#[derive(Clone, Debug, Serialize)]
pub struct HeatRun {
    pub times: Vec<f64>,
    #[serde(skip)]
    pub fields: Vec<ScalarField>,
    pub source: usize,
    pub method: &'static str,
    /// per-node μ-weights (zero off the dofs)
    pub mass: Vec<f64>,
    pub steps: usize,
    /// largest change of Σ u·m over a single step (Neumann only, else NaN)
    pub mass_drift: f64,
}

impl HeatRun {
    pub fn kernel(&self, time_index: usize, node: usize) -> f64 {
        self.fields[time_index].value(node)
    }
}

fn implicit_step(op: &SparseOperator, diag_s: &[f64], u: &[f64], dt: f64) -> Result<Vec<f64>> {
    let n = op.n();
    let b: Vec<f64> = u.iter().zip(&op.mass).map(|(a, m)| a * m).collect();
    let diag: Vec<f64> = op.mass.iter().zip(diag_s).map(|(m, s)| m + dt * s).collect();
    let apply = |x: &[f64], y: &mut [f64]| {
        op.stiffness_apply(x, y);
        for i in 0..n {
            y[i] = op.mass[i] * x[i] + dt * y[i];
        }
    };
    Ok(cg(apply, &diag, &b, CG_TOLERANCE, 10 * n)?.x)
}

/// Backward Euler from the mass-normalized delta at `source`. Each interval
/// between requested times is split into equal steps no longer than
/// `max_dt`; the very first step is replaced by two half steps.
pub fn heat_run(op: &SparseOperator, source: usize, times: &[f64], max_dt: f64) -> Result<HeatRun> {
    if times.is_empty() || !(max_dt > 0.0) {
        return Err(Error::InvalidArgument("heat run needs times and a positive step".into()));
    }
    let mut prev = 0.0;
    for &t in times {
        if !(t > prev) || !t.is_finite() {
            return Err(Error::InvalidArgument("times must be positive and strictly ascending".into()));
        }
        prev = t;
    }
    let s = op.dof_of(source).ok_or_else(|| Error::InvalidArgument(format!("source node {source} is not a degree of freedom")))?;
    let diag_s = op.diagonal();
    let mut u = vec![0.0; op.n()];
    u[s] = 1.0 / op.mass[s];
    let neumann = op.bc == BoundaryCondition::Neumann;
    let mut drift: f64 = 0.0;
    let mut total = 1.0;
    let mut steps = 0;
    let mut fields = Vec::with_capacity(times.len());
    let mut t_now = 0.0;
    let mut started = false;
    for &t in times {
        let k = ((t - t_now) / max_dt).ceil().max(1.0) as usize;
        let dt = (t - t_now) / k as f64;
        for _ in 0..k {
            if started {
                u = implicit_step(op, &diag_s, &u, dt)?;
            } else {
                u = implicit_step(op, &diag_s, &u, 0.5 * dt)?;
                u = implicit_step(op, &diag_s, &u, 0.5 * dt)?;
                started = true;
            }
            steps += 1;
            if neumann {
                let now: f64 = u.iter().zip(&op.mass).map(|(a, m)| a * m).sum();
                drift = drift.max((now - total).abs());
                total = now;
            }
        }
        t_now = t;
        let nodal = op.scatter(&u);
        let mask: Vec<bool> = nodal.iter().map(|v| v.is_nan()).collect();
        let values: Vec<f64> = nodal.iter().map(|v| if v.is_nan() { 0.0 } else { *v }).collect();
        fields.push(ScalarField::new(op.chart.clone(), values, mask)?);
    }
    let mut mass = vec![0.0; op.chart.n_nodes()];
    for (i, &k) in op.dofs.iter().enumerate() {
        mass[k] = op.mass[i];
    }
    Ok(HeatRun {
        times: times.to_vec(),
        fields,
        source,
        method: HEAT_METHOD,
        mass,
        steps,
        mass_drift: if neumann { drift } else { f64::NAN },
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VaradhanEstimate {
    pub times: Vec<f64>,
    /// −4 t log ρ(t, source, target)
    pub estimates: Vec<f64>,
    pub extrapolated: f64,
}

/// −4 t log ρ per time, extrapolated linearly in t to t = 0 from the two
/// smallest times.
pub fn varadhan_estimate(run: &HeatRun, target: usize) -> Result<VaradhanEstimate> {
    let mut estimates = Vec::with_capacity(run.times.len());
    for (i, &t) in run.times.iter().enumerate() {
        let rho = run.kernel(i, target);
        if !(rho > 0.0) || run.fields[i].mask()[target] {
            return Err(Error::NonPositiveKernel { time: t });
        }
        estimates.push(-4.0 * t * rho.ln());
    }
    let mut order: Vec<usize> = (0..run.times.len()).collect();
    order.sort_by(|&a, &b| run.times[a].total_cmp(&run.times[b]));
    let extrapolated = if order.len() >= 2 {
        let (a, b) = (order[0], order[1]);
        let (t1, t2) = (run.times[a], run.times[b]);
        let (v1, v2) = (estimates[a], estimates[b]);
        v1 + (v1 - v2) * t1 / (t2 - t1)
    } else {
        estimates[0]
    };
    Ok(VaradhanEstimate { times: run.times.clone(), estimates, extrapolated })
}
