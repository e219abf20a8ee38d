//! Run configuration, read from JSON.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use ness_core::model::{reflection_flip, tfim_chain, xxz_boundary_driven, xxz_dephasing, SymmetryRecord};
use ness_core::pauli::{ops, TermRecord};
use ness_core::sdp::SolverOptions;
use ness_core::{OpenSystemModel, PauliSum, SeedDescriptor};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelSource,
    pub ansatz: AnsatzConfig,
    #[serde(default)]
    pub solver: SolverOptions,
    #[serde(default)]
    pub constraints: Vec<ConstraintConfig>,
    #[serde(default)]
    pub sweep: Option<SweepConfig>,
    /// Emulated measurement shots per overlap entry; switches to the
    /// least-squares solver.
    #[serde(default)]
    pub shots: Option<u64>,
    #[serde(default)]
    pub noise_seed: u64,
    #[serde(default = "enabled")]
    pub oracle: bool,
    #[serde(default)]
    pub dense_limit: Option<usize>,
    #[serde(default)]
    pub symmetry: Option<SymmetryConfig>,
}

fn enabled() -> bool {
    true
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ModelSource {
    Builder {
        builder: Builder,
        n_qubits: usize,
        #[serde(default)]
        params: BTreeMap<String, f64>,
    },
    File {
        file: PathBuf,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Builder {
    Tfim,
    XxzDephasing,
    XxzBoundary,
}

impl Builder {
    /// Parameter names with defaults; the first is the one reported when no
    /// sweep is given.
    pub fn parameters(self) -> &'static [(&'static str, f64)] {
        match self {
            Builder::Tfim => &[("g", 1.0), ("gamma", 1.0)],
            Builder::XxzDephasing => &[("delta", 1.0), ("gamma", 1.0)],
            Builder::XxzBoundary => &[("delta", 1.0), ("coupling", 1.0), ("bias", 0.5)],
        }
    }

    pub fn build(self, n: usize, params: &BTreeMap<String, f64>) -> CliResult<OpenSystemModel> {
        for key in params.keys() {
            if !self.parameters().iter().any(|(name, _)| name == key) {
                return Err(CliError::config(format!("unknown parameter {key:?} for {self:?}")));
            }
        }
        let get = |name: &str| {
            params
                .get(name)
                .copied()
                .unwrap_or_else(|| self.parameters().iter().find(|(p, _)| *p == name).unwrap().1)
        };
        let model = match self {
            Builder::Tfim => tfim_chain(n, get("g"), get("gamma")),
            Builder::XxzDephasing => xxz_dephasing(n, get("delta"), get("gamma")),
            Builder::XxzBoundary => xxz_boundary_driven(n, get("delta"), get("coupling"), get("bias")),
        };
        Ok(model?)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnsatzConfig {
    pub seed: SeedChoice,
    #[serde(default)]
    pub order: usize,
    #[serde(default)]
    pub q: Option<usize>,
    #[serde(default)]
    pub rng_seed: u64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SeedChoice {
    /// `"oracle"`: dominant eigenvector of the exact steady state.
    Keyword(SeedKeyword),
    Descriptor(SeedDescriptor),
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeedKeyword {
    Oracle,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OperatorSpec {
    Named(NamedOperator),
    Terms(Vec<TermRecord>),
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NamedOperator {
    /// `Σ_j Z_j`
    Magnetization,
    /// Site reflection times a global spin flip.
    ReflectionFlip,
}

impl OperatorSpec {
    pub fn resolve(&self, n: usize) -> CliResult<PauliSum> {
        Ok(match self {
            OperatorSpec::Named(NamedOperator::Magnetization) => ops::magnetization(n),
            OperatorSpec::Named(NamedOperator::ReflectionFlip) => reflection_flip(n),
            OperatorSpec::Terms(terms) => PauliSum::from_records(n, terms)?,
        })
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstraintConfig {
    pub operator: OperatorSpec,
    pub target: f64,
    /// Also require `Tr(ρO²) = target²`, selecting the eigenspace.
    #[serde(default)]
    pub pin: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub parameter: String,
    pub values: Vec<f64>,
    /// Ansatz orders to run at every value; defaults to the ansatz order.
    #[serde(default)]
    pub orders: Vec<usize>,
    #[serde(default)]
    pub threads: Option<usize>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SymmetryConfig {
    pub source: SymmetrySource,
    #[serde(default)]
    pub sector: Option<SectorConfig>,
    #[serde(default)]
    pub retries: usize,
    #[serde(default = "trace_floor")]
    pub trace_floor: f64,
}

fn trace_floor() -> f64 {
    ness_core::symmetry::TRACE_FLOOR
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SymmetrySource {
    /// A symmetry declared in the model.
    Model {
        #[serde(default)]
        index: usize,
    },
    Magnetization {
        generator: OperatorSpec,
    },
    Unitary {
        name: String,
        operator: OperatorSpec,
    },
}

impl SymmetrySource {
    pub fn record(&self, model: &OpenSystemModel) -> CliResult<SymmetryRecord> {
        let n = model.n_qubits;
        Ok(match self {
            SymmetrySource::Model { index } => model
                .symmetries
                .get(*index)
                .cloned()
                .ok_or_else(|| CliError::config(format!("model declares no symmetry #{index}")))?,
            SymmetrySource::Magnetization { generator } => SymmetryRecord::Magnetization {
                generator: generator.resolve(n)?.to_records(),
            },
            SymmetrySource::Unitary { name, operator } => SymmetryRecord::Unitary {
                name: name.clone(),
                operator: operator.resolve(n)?.to_records(),
            },
        })
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SectorConfig {
    pub operator: OperatorSpec,
    pub value: f64,
}

impl RunConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
        let mut config: RunConfig =
            serde_json::from_str(&text).map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
        // model files are relative to the config
        if let ModelSource::File { file } = &mut config.model {
            if file.is_relative() {
                if let Some(dir) = path.parent() {
                    *file = dir.join(&*file);
                }
            }
        }
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> CliResult<()> {
        if let ModelSource::File { file } = &self.model {
            if !file.exists() {
                return Err(CliError::config(format!("model file {} does not exist", file.display())));
            }
        }
        if let Some(sweep) = &self.sweep {
            if sweep.values.is_empty() {
                return Err(CliError::config("sweep has no values"));
            }
            if let Some(v) = sweep.values.iter().find(|v| !v.is_finite()) {
                return Err(CliError::config(format!("sweep value {v} is not finite")));
            }
            match &self.model {
                ModelSource::Builder { builder, .. } => {
                    if !builder.parameters().iter().any(|(p, _)| *p == sweep.parameter) {
                        return Err(CliError::config(format!(
                            "{builder:?} has no parameter {:?}",
                            sweep.parameter
                        )));
                    }
                }
                ModelSource::File { .. } => return Err(CliError::config("a model file cannot be swept")),
            }
        }
        if self.shots == Some(0) {
            return Err(CliError::config("shots must be positive"));
        }
        self.solver.validate()?;
        Ok(())
    }

    /// Name of the reported parameter column and its base value.
    pub fn parameter(&self) -> (String, Option<f64>) {
        match (&self.model, &self.sweep) {
            (_, Some(s)) => (s.parameter.clone(), None),
            (ModelSource::Builder { builder, params, .. }, None) => {
                let (name, default) = builder.parameters()[0];
                (name.to_string(), Some(params.get(name).copied().unwrap_or(default)))
            }
            (ModelSource::File { .. }, None) => ("model".to_string(), None),
        }
    }

    /// The model with `parameter = value` substituted when given.
    pub fn build_model(&self, value: Option<(&str, f64)>) -> CliResult<OpenSystemModel> {
        match &self.model {
            ModelSource::Builder { builder, n_qubits, params } => {
                let mut params = params.clone();
                if let Some((name, v)) = value {
                    params.insert(name.to_string(), v);
                }
                builder.build(*n_qubits, &params)
            }
            ModelSource::File { file } => Ok(OpenSystemModel::load(file)?),
        }
    }

    pub fn orders(&self) -> Vec<usize> {
        match &self.sweep {
            Some(s) if !s.orders.is_empty() => s.orders.clone(),
            _ => vec![self.ansatz.order],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> CliResult<RunConfig> {
        let config: RunConfig = serde_json::from_str(text).map_err(|e| CliError::config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    #[test]
    fn oracle_keyword_and_descriptor_seeds() {
        let c = parse(r#"{"model":{"builder":"tfim","n_qubits":2},"ansatz":{"seed":"oracle"}}"#).unwrap();
        assert!(matches!(c.ansatz.seed, SeedChoice::Keyword(SeedKeyword::Oracle)));
        let c = parse(r#"{"model":{"builder":"tfim","n_qubits":2},"ansatz":{"seed":{"kind":"bitstring","bits":"01"}}}"#)
            .unwrap();
        assert!(matches!(c.ansatz.seed, SeedChoice::Descriptor(SeedDescriptor::Bitstring { .. })));
        assert_eq!(c.parameter(), ("g".to_string(), Some(1.0)));
        assert!(c.oracle);
    }

    #[test]
    fn rejects_bad_sweeps() {
        let base = r#"{"model":{"builder":"tfim","n_qubits":2},"ansatz":{"seed":{"kind":"uniform"}},"sweep":"#;
        assert!(parse(&format!(r#"{base}{{"parameter":"g","values":[]}}}}"#)).is_err());
        assert!(parse(&format!(r#"{base}{{"parameter":"delta","values":[1.0]}}}}"#)).is_err());
        let ok = parse(&format!(r#"{base}{{"parameter":"gamma","values":[0.5,1.0],"orders":[1,3]}}}}"#)).unwrap();
        assert_eq!(ok.orders(), [1, 3]);
        assert_eq!(ok.parameter(), ("gamma".to_string(), None));
    }

    #[test]
    fn unknown_fields_and_zero_shots_fail() {
        assert!(parse(r#"{"model":{"builder":"tfim","n_qubits":2},"ansatz":{"seed":{"kind":"uniform"}},"extra":1}"#).is_err());
        assert!(parse(r#"{"model":{"builder":"tfim","n_qubits":2},"ansatz":{"seed":{"kind":"uniform"}},"shots":0}"#).is_err());
    }

    #[test]
    fn builder_substitutes_parameter() {
        let c = parse(r#"{"model":{"builder":"xxz_boundary","n_qubits":3,"params":{"bias":0.2}},"ansatz":{"seed":{"kind":"uniform"}}}"#)
            .unwrap();
        let m = c.build_model(Some(("delta", 0.5))).unwrap();
        assert!(m.label.contains("delta=0.5"));
        assert!(m.label.contains("bias=0.2"));
        assert!(Builder::Tfim.build(2, &BTreeMap::from([("h".to_string(), 1.0)])).is_err());
    }
}
