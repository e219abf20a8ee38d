//! CSV rows for solve and sweep.
//!
//! Columns, in order: the swept parameter (named after it), `order`,
//! `ansatz_size`, `seed`, `q`, `rng_seed`, `shots`, `noise_seed`,
//! `feas_tol`, `mode`, `status`, `feasible`, `subspace_residual`,
//! `true_residual`, `fidelity`, `x_mean`, `z_mean`, `zz_mean`, `error`.
//! The observable columns are site averages of `⟨X_j⟩`, `⟨Z_j⟩` and
//! `⟨Z_j Z_{j+1}⟩` computed from `β` and the ansatz overlaps. Empty cells
//! mean "not available".

use std::io::Write;

use ness_core::sdp::SolveStatus;
use ness_core::Error;

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::pipeline::PointResult;

pub const COLUMNS: [&str; 18] = [
    "order",
    "ansatz_size",
    "seed",
    "q",
    "rng_seed",
    "shots",
    "noise_seed",
    "feas_tol",
    "mode",
    "status",
    "feasible",
    "subspace_residual",
    "true_residual",
    "fidelity",
    "x_mean",
    "z_mean",
    "zz_mean",
    "error",
];

fn num(v: Option<f64>) -> String {
    v.map(|x| format!("{x:?}")).unwrap_or_default()
}

fn status_name(status: SolveStatus) -> &'static str {
    match status {
        SolveStatus::Feasible => "feasible",
        SolveStatus::LeastSquares => "least_squares",
        SolveStatus::Infeasible => "infeasible",
        SolveStatus::IterationBudget => "iteration_budget",
    }
}

pub fn header(parameter: &str) -> Vec<String> {
    std::iter::once(parameter.to_string()).chain(COLUMNS.iter().map(|c| c.to_string())).collect()
}

pub fn row(config: &RunConfig, value: &str, r: &PointResult) -> Vec<String> {
    let (status, residual, error) = match &r.outcome {
        Ok(b) => (status_name(b.status).to_string(), Some(b.diagnostics.subspace_residual), String::new()),
        Err(CliError::Core(Error::Infeasible(d))) => ("infeasible".into(), Some(d.subspace_residual), String::new()),
        Err(CliError::Core(Error::IterationBudget(d))) => {
            ("iteration_budget".into(), Some(d.subspace_residual), String::new())
        }
        Err(e) => ("error".into(), None, e.to_string()),
    };
    let error = if error.is_empty() { r.note.clone().unwrap_or_default() } else { error };
    let feasible = matches!(&r.outcome, Ok(b) if b.status == SolveStatus::Feasible);
    let obs = r.observables;
    vec![
        value.to_string(),
        r.order.to_string(),
        r.ansatz.as_ref().map(|a| a.len().to_string()).unwrap_or_default(),
        r.ansatz.as_ref().map(|a| a.seed().label()).unwrap_or_default(),
        config.ansatz.q.map(|q| q.to_string()).unwrap_or_default(),
        config.ansatz.q.map(|_| config.ansatz.rng_seed.to_string()).unwrap_or_default(),
        config.shots.map(|s| s.to_string()).unwrap_or_default(),
        config.shots.map(|_| config.noise_seed.to_string()).unwrap_or_default(),
        format!("{:?}", config.solver.feas_tol),
        if config.shots.is_some() { "noisy" } else { "exact" }.to_string(),
        status,
        feasible.to_string(),
        num(residual),
        num(r.true_residual),
        num(r.fidelity),
        num(obs.map(|o| o.x_mean)),
        num(obs.map(|o| o.z_mean)),
        num(obs.map(|o| o.zz_mean)),
        error,
    ]
}

pub fn write_csv<W: Write>(out: W, parameter: &str, rows: &[Vec<String>]) -> CliResult<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header(parameter))?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush()?;
    Ok(())
}
