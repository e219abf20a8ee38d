use thiserror::Error;

use crate::sdp::Diagnostics;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("qubit count mismatch: expected {expected}, found {found}")]
    QubitMismatch { expected: usize, found: usize },

    #[error("matrix shape mismatch: {0}")]
    Shape(String),

    #[error("invalid Pauli word {0:?}: expected characters from I, X, Y, Z")]
    PauliParse(String),

    #[error("{n_qubits} qubits exceeds the dense limit of {limit}")]
    SizeLimit { n_qubits: usize, limit: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("ansatz Gram matrix is numerically zero")]
    DegenerateAnsatz,

    #[error("steady-state space has dimension {0}; a unique steady state was requested")]
    DegenerateSteadySpace(usize),

    #[error("problem is infeasible (best residual {:.3e} after {} iterations)", .0.subspace_residual.max(.0.trace_error), .0.iterations)]
    Infeasible(Box<Diagnostics>),

    #[error("iteration budget exhausted (best residual {:.3e} after {} iterations)", .0.subspace_residual.max(.0.trace_error), .0.iterations)]
    IterationBudget(Box<Diagnostics>),

    #[error("{what} did not converge: residual {residual:.3e} after {iterations} iterations")]
    NotConverged {
        what: &'static str,
        residual: f64,
        iterations: usize,
    },

    #[error("symmetry check failed: {0}")]
    Symmetry(String),

    #[error("sector phases coincide (e^{{i(λ_m - λ_n)}} = 1), cannot eliminate block ({m}, {n})")]
    DegenerateDivisor { m: usize, n: usize },

    #[error("symmetry operator has no Pauli expansion")]
    MissingPauliExpansion,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
