use thiserror::Error;

/// Process exit codes. Usage errors from argument parsing exit with 2.
pub mod exit {
    pub const OK: i32 = 0;
    pub const RUNTIME: i32 = 1;
    pub const CONFIG: i32 = 3;
    pub const INFEASIBLE: i32 = 4;
    pub const ITERATION_BUDGET: i32 = 5;
    pub const ORACLE_LIMIT: i32 = 6;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] ness_core::Error),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type CliResult<T> = std::result::Result<T, CliError>;

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    pub fn exit_code(&self) -> i32 {
        use ness_core::Error as E;
        match self {
            CliError::Config(_) | CliError::Json(_) => exit::CONFIG,
            CliError::Core(e) => match e {
                E::Infeasible(_) => exit::INFEASIBLE,
                E::IterationBudget(_) => exit::ITERATION_BUDGET,
                E::SizeLimit { .. } => exit::ORACLE_LIMIT,
                E::Io(_)
                | E::Json(_)
                | E::PauliParse(_)
                | E::InvalidParameter(_)
                | E::QubitMismatch { .. }
                | E::Symmetry(_)
                | E::MissingPauliExpansion => exit::CONFIG,
                _ => exit::RUNTIME,
            },
            CliError::Io(_) | CliError::Csv(_) => exit::RUNTIME,
        }
    }
}
