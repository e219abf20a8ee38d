//! One solve: model, ansatz, assembly, solver, then oracle comparison.

use ness_core::linalg::CMat;
use ness_core::oracle::{
    exact_ness_with_limit, fidelity, sparse_steady_state, top_eigenvector, true_residual, SparseOptions,
    DENSE_ORACLE_LIMIT, SPARSE_ORACLE_LIMIT,
};
use ness_core::pauli::{ops, Pauli};
use ness_core::symmetry::{sector_constraint, sector_pin};
use ness_core::{
    assemble, moment_states, moment_states_random, observable_matrix, solve_feasibility, solve_least_squares,
    AnsatzSet, BetaMatrix, Error, FeasibilityProblem, LinearConstraint, OpenSystemModel, PauliSum, SeedDescriptor,
};
use serde::Serialize;

use crate::config::{RunConfig, SeedChoice};
use crate::error::{CliError, CliResult};

/// Exact steady state used for fidelities and oracle-advised seeds.
#[derive(Clone, Debug)]
pub enum OracleState {
    Unique(CMat),
    Unavailable(String),
}

impl OracleState {
    pub fn state(&self) -> Option<&CMat> {
        match self {
            OracleState::Unique(rho) => Some(rho),
            OracleState::Unavailable(_) => None,
        }
    }
}

pub fn dense_limit(config: &RunConfig) -> usize {
    config.dense_limit.unwrap_or(DENSE_ORACLE_LIMIT)
}

/// Fails with a size-limit error when no oracle can handle the model.
pub fn check_oracle_size(config: &RunConfig, n_qubits: usize) -> CliResult<()> {
    let needs_oracle = config.oracle || matches!(config.ansatz.seed, SeedChoice::Keyword(_));
    let limit = dense_limit(config).max(SPARSE_ORACLE_LIMIT);
    if needs_oracle && n_qubits > limit {
        return Err(Error::SizeLimit { n_qubits, limit }.into());
    }
    Ok(())
}

pub fn oracle_state(model: &OpenSystemModel, limit: usize) -> CliResult<OracleState> {
    let result = if model.n_qubits <= limit {
        exact_ness_with_limit(model, limit)
    } else {
        sparse_steady_state(model, &SparseOptions::default())
    };
    match result {
        Ok(rho) => Ok(OracleState::Unique(rho)),
        Err(Error::DegenerateSteadySpace(k)) => {
            Ok(OracleState::Unavailable(format!("steady space has dimension {k}")))
        }
        Err(e @ Error::SizeLimit { .. }) => Err(e.into()),
        Err(e) => Ok(OracleState::Unavailable(e.to_string())),
    }
}

pub fn build_ansatz(config: &RunConfig, model: &OpenSystemModel, order: usize, oracle: Option<&OracleState>) -> CliResult<AnsatzSet> {
    let seed = match &config.ansatz.seed {
        SeedChoice::Descriptor(d) => d.clone(),
        SeedChoice::Keyword(_) => {
            let rho = oracle
                .and_then(OracleState::state)
                .ok_or_else(|| CliError::config("the oracle seed needs a unique exact steady state"))?;
            let (_, top) = top_eigenvector(rho, model.n_qubits)?;
            SeedDescriptor::from_state(&top)
        }
    };
    let set = match config.ansatz.q {
        Some(q) => moment_states_random(&model.hamiltonian, &seed, order, q, config.ansatz.rng_seed)?,
        None => moment_states(&model.hamiltonian, &seed, order)?,
    };
    Ok(set)
}

pub fn constraints(config: &RunConfig, ansatz: &AnsatzSet) -> CliResult<Vec<LinearConstraint>> {
    let n = ansatz.n_qubits();
    let mut out = Vec::new();
    for c in &config.constraints {
        let op = c.operator.resolve(n)?;
        if c.pin {
            out.extend(sector_pin(&op, c.target, ansatz)?);
        } else {
            out.push(sector_constraint(&op, c.target, ansatz)?);
        }
    }
    Ok(out)
}

/// Site averages of `⟨X_j⟩`, `⟨Z_j⟩` and `⟨Z_j Z_{j+1}⟩` over an open chain.
#[derive(Clone, Copy, Debug, Default, Serialize)]
pub struct Observables {
    pub x_mean: f64,
    pub z_mean: f64,
    pub zz_mean: f64,
}

fn average(ops_list: Vec<PauliSum>, beta: &CMat, ansatz: &AnsatzSet) -> CliResult<f64> {
    if ops_list.is_empty() {
        return Ok(0.0);
    }
    let count = ops_list.len() as f64;
    let mut total = 0.0;
    for op in ops_list {
        total += observable_matrix("obs", &op, ansatz)?.expectation(beta).re;
    }
    Ok(total / count)
}

pub fn observables(beta: &CMat, ansatz: &AnsatzSet) -> CliResult<Observables> {
    let n = ansatz.n_qubits();
    Ok(Observables {
        x_mean: average((0..n).map(|j| ops::single(n, j, Pauli::X)).collect(), beta, ansatz)?,
        z_mean: average((0..n).map(|j| ops::single(n, j, Pauli::Z)).collect(), beta, ansatz)?,
        zz_mean: average(
            (0..n.saturating_sub(1)).map(|j| ops::pair(n, (j, Pauli::Z), (j + 1, Pauli::Z))).collect(),
            beta,
            ansatz,
        )?,
    })
}

#[derive(Debug)]
pub struct PointResult {
    pub order: usize,
    pub ansatz: Option<AnsatzSet>,
    pub outcome: CliResult<BetaMatrix>,
    pub true_residual: Option<f64>,
    pub fidelity: Option<f64>,
    pub observables: Option<Observables>,
    pub note: Option<String>,
}

impl PointResult {
    pub fn failed(order: usize, error: CliError) -> Self {
        Self {
            order,
            ansatz: None,
            outcome: Err(error),
            true_residual: None,
            fidelity: None,
            observables: None,
            note: None,
        }
    }
}

pub fn run_point(config: &RunConfig, model: &OpenSystemModel, order: usize, oracle: Option<&OracleState>) -> PointResult {
    match try_point(config, model, order, oracle) {
        Ok(r) => r,
        Err(e) => PointResult::failed(order, e),
    }
}

fn try_point(
    config: &RunConfig,
    model: &OpenSystemModel,
    order: usize,
    oracle: Option<&OracleState>,
) -> CliResult<PointResult> {
    let ansatz = build_ansatz(config, model, order, oracle)?;
    let mut overlaps = assemble(model, &ansatz)?;
    if let Some(shots) = config.shots {
        overlaps = overlaps.with_shot_noise(shots, config.noise_seed)?;
    }
    let problem = FeasibilityProblem {
        overlaps,
        constraints: constraints(config, &ansatz)?,
        options: config.solver.clone(),
    };
    let outcome = if config.shots.is_some() {
        solve_least_squares(&problem)
    } else {
        solve_feasibility(&problem)
    }
    .map_err(CliError::from);
    let mut result = PointResult {
        order,
        ansatz: None,
        outcome,
        true_residual: None,
        fidelity: None,
        observables: None,
        note: None,
    };
    if let Ok(beta) = &result.outcome {
        let rho = ansatz.density(&beta.beta)?;
        result.true_residual = Some(true_residual(&rho, model)?);
        result.observables = Some(observables(&beta.beta, &ansatz)?);
        match oracle {
            Some(OracleState::Unique(exact)) => result.fidelity = Some(fidelity(&rho, exact)),
            Some(OracleState::Unavailable(why)) => result.note = Some(format!("oracle: {why}")),
            None => {}
        }
    }
    result.ansatz = Some(ansatz);
    Ok(result)
}
