use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::Args;
use ness_core::linalg::{eigh, identity, trace, CMat, MatrixRecord};
use ness_core::oracle::{
    build_liouvillian_with_limit, fidelity, sparse_steady_state, steady_states_with_limit, top_eigenvector,
    SparseOptions, StationaryProjector, NULL_TOL,
};
use ness_core::sdp::{SolveReport, SolveStatus};
use ness_core::symmetry::{extract_all_ness, ExtractionOptions, SectorSelection, SymmetrySpec};
use ness_core::{AnsatzRecord, AnsatzSet, Error, OpenSystemModel};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{Builder, RunConfig};
use crate::error::{exit, CliError, CliResult};
use crate::pipeline::{build_ansatz, check_oracle_size, dense_limit, oracle_state, run_point, Observables, PointResult};
use crate::report;

/// Command-line overrides of config fields.
#[derive(Args, Debug, Default, Clone)]
pub struct Overrides {
    /// Ansatz order K
    #[arg(long)]
    pub order: Option<usize>,
    /// Random-subset size per level
    #[arg(long)]
    pub q: Option<usize>,
    #[arg(long)]
    pub rng_seed: Option<u64>,
    /// Emulated shots per overlap entry (switches to least squares)
    #[arg(long)]
    pub shots: Option<u64>,
    #[arg(long)]
    pub noise_seed: Option<u64>,
    #[arg(long)]
    pub feas_tol: Option<f64>,
    #[arg(long)]
    pub max_iter: Option<usize>,
    /// Largest qubit count for the dense oracle
    #[arg(long)]
    pub dense_limit: Option<usize>,
    /// Skip the exact steady-state comparison
    #[arg(long)]
    pub no_oracle: bool,
}

impl Overrides {
    pub fn apply(&self, config: &mut RunConfig) -> CliResult<()> {
        if let Some(k) = self.order {
            config.ansatz.order = k;
        }
        if self.q.is_some() {
            config.ansatz.q = self.q;
        }
        if let Some(s) = self.rng_seed {
            config.ansatz.rng_seed = s;
        }
        if self.shots.is_some() {
            config.shots = self.shots;
        }
        if let Some(s) = self.noise_seed {
            config.noise_seed = s;
        }
        if let Some(t) = self.feas_tol {
            config.solver.feas_tol = t;
        }
        if let Some(m) = self.max_iter {
            config.solver.max_iter = m;
        }
        if self.dense_limit.is_some() {
            config.dense_limit = self.dense_limit;
        }
        if self.no_oracle {
            config.oracle = false;
        }
        config.validate()
    }
}

pub fn load_config(path: &Path, overrides: &Overrides) -> CliResult<RunConfig> {
    let mut config = RunConfig::load(path)?;
    overrides.apply(&mut config)?;
    Ok(config)
}

fn wants_oracle(config: &RunConfig) -> bool {
    config.oracle || matches!(config.ansatz.seed, crate::config::SeedChoice::Keyword(_))
}

fn value_label(value: Option<f64>, model: &OpenSystemModel) -> String {
    value.map(|v| v.to_string()).unwrap_or_else(|| model.label.clone())
}

fn emit(out: Option<&Path>, text: &str) -> CliResult<()> {
    match out {
        Some(path) => fs::write(path, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn csv_string(parameter: &str, rows: &[Vec<String>]) -> CliResult<String> {
    let mut buf = Vec::new();
    report::write_csv(&mut buf, parameter, rows)?;
    Ok(String::from_utf8(buf).expect("csv output is UTF-8"))
}

#[derive(Serialize)]
struct SolutionRecord<'a> {
    parameter: &'a str,
    value: Option<f64>,
    model: &'a str,
    n_qubits: usize,
    mode: &'static str,
    solver: &'a ness_core::SolverOptions,
    ansatz: Option<AnsatzRecord>,
    report: Option<SolveReport>,
    observables: Option<Observables>,
    true_residual: Option<f64>,
    fidelity: Option<f64>,
    error: Option<String>,
}

fn solve_report(outcome: &CliResult<ness_core::BetaMatrix>) -> Option<SolveReport> {
    match outcome {
        Ok(b) => Some(SolveReport {
            status: b.status,
            diagnostics: b.diagnostics.clone(),
            beta: Some((&b.beta).into()),
        }),
        Err(CliError::Core(Error::Infeasible(d))) => Some(SolveReport {
            status: SolveStatus::Infeasible,
            diagnostics: (**d).clone(),
            beta: None,
        }),
        Err(CliError::Core(Error::IterationBudget(d))) => Some(SolveReport {
            status: SolveStatus::IterationBudget,
            diagnostics: (**d).clone(),
            beta: None,
        }),
        Err(_) => None,
    }
}

pub fn solve(config_path: &Path, out: Option<&Path>, overrides: &Overrides) -> CliResult<i32> {
    let config = load_config(config_path, overrides)?;
    let (parameter, value) = config.parameter();
    let model = config.build_model(value.map(|v| (parameter.as_str(), v)))?;
    check_oracle_size(&config, model.n_qubits)?;
    let oracle = if wants_oracle(&config) {
        Some(oracle_state(&model, dense_limit(&config))?)
    } else {
        None
    };
    let result = run_point(&config, &model, config.ansatz.order, oracle.as_ref());
    let rows = vec![report::row(&config, &value_label(value, &model), &result)];
    let csv = csv_string(&parameter, &rows)?;
    print!("{csv}");
    if let Some(dir) = out {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("report.csv"), &csv)?;
        let record = SolutionRecord {
            parameter: &parameter,
            value,
            model: &model.label,
            n_qubits: model.n_qubits,
            mode: if config.shots.is_some() { "noisy" } else { "exact" },
            solver: &config.solver,
            ansatz: result.ansatz.as_ref().map(AnsatzSet::record),
            report: solve_report(&result.outcome),
            observables: result.observables,
            true_residual: result.true_residual,
            fidelity: result.fidelity,
            error: result.outcome.as_ref().err().map(|e| e.to_string()).or(result.note.clone()),
        };
        fs::write(dir.join("solution.json"), serde_json::to_string_pretty(&record)?)?;
    }
    Ok(match &result.outcome {
        Ok(_) => exit::OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    })
}

fn sweep_value(config: &RunConfig, parameter: &str, value: f64, orders: &[usize]) -> Vec<Vec<String>> {
    let label = value.to_string();
    let failed = |e: CliError| -> Vec<Vec<String>> {
        orders
            .iter()
            .map(|&k| report::row(config, &label, &PointResult::failed(k, CliError::Config(e.to_string()))))
            .collect()
    };
    let model = match config.build_model(Some((parameter, value))) {
        Ok(m) => m,
        Err(e) => return failed(e),
    };
    let oracle = if wants_oracle(config) {
        match oracle_state(&model, dense_limit(config)) {
            Ok(o) => Some(o),
            Err(e) => return failed(e),
        }
    } else {
        None
    };
    orders
        .iter()
        .map(|&k| report::row(config, &label, &run_point(config, &model, k, oracle.as_ref())))
        .collect()
}

pub fn sweep(config_path: &Path, out: Option<&Path>, overrides: &Overrides, threads: Option<usize>) -> CliResult<i32> {
    let config = load_config(config_path, overrides)?;
    let sweep = config.sweep.clone().ok_or_else(|| CliError::config("sweep section missing"))?;
    let n = config.build_model(Some((&sweep.parameter, sweep.values[0])))?.n_qubits;
    check_oracle_size(&config, n)?;
    let orders = config.orders();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.or(sweep.threads).unwrap_or(0))
        .build()
        .map_err(|e| CliError::config(e.to_string()))?;
    let rows: Vec<Vec<String>> = pool.install(|| {
        sweep
            .values
            .par_iter()
            .map(|&v| sweep_value(&config, &sweep.parameter, v, &orders))
            .collect::<Vec<_>>()
            .into_iter()
            .flatten()
            .collect()
    });
    emit(out, &csv_string(&sweep.parameter, &rows)?)?;
    Ok(exit::OK)
}

pub fn oracle(config_path: &Path, out: Option<&Path>, basis_out: Option<&Path>, overrides: &Overrides) -> CliResult<i32> {
    let config = load_config(config_path, overrides)?;
    let (parameter, base) = config.parameter();
    let values: Vec<Option<f64>> = match &config.sweep {
        Some(s) => s.values.iter().map(|&v| Some(v)).collect(),
        None => vec![base],
    };
    let limit = dense_limit(&config);
    let mut rows = Vec::new();
    let mut bases = Vec::new();
    for value in values {
        let model = config.build_model(value.map(|v| (parameter.as_str(), v)))?;
        let label = value_label(value, &model);
        let (method, degeneracy, physical, rho) = if model.n_qubits <= limit {
            let basis = steady_states_with_limit(&model, NULL_TOL, limit)?;
            let unique = (basis.dimension() == 1).then(|| {
                let r = &basis.elements[0];
                r.unscale(trace(r).re)
            });
            bases.push((label.clone(), basis.to_record()));
            ("dense", basis.dimension().to_string(), basis.physical_count().to_string(), unique)
        } else {
            let rho = sparse_steady_state(&model, &SparseOptions::default())?;
            ("sparse", String::new(), String::new(), Some(rho))
        };
        let (overlap, purity) = match &rho {
            Some(r) => {
                let (lambda, _) = top_eigenvector(r, model.n_qubits)?;
                (format!("{lambda:?}"), format!("{:?}", trace(&(r * r)).re))
            }
            None => (String::new(), String::new()),
        };
        rows.push(vec![
            label,
            model.n_qubits.to_string(),
            method.to_string(),
            degeneracy,
            physical,
            overlap,
            purity,
        ]);
    }
    let mut buf = Vec::new();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        w.write_record([parameter.as_str(), "n_qubits", "method", "degeneracy", "physical_states", "seed_overlap", "purity"])?;
        for r in &rows {
            w.write_record(r)?;
        }
        w.flush()?;
    }
    emit(out, std::str::from_utf8(&buf).expect("csv output is UTF-8"))?;
    if let Some(path) = basis_out {
        let map: BTreeMap<String, _> = bases.into_iter().collect();
        fs::write(path, serde_json::to_string_pretty(&map)?)?;
    }
    Ok(exit::OK)
}

#[derive(Serialize)]
struct SectorStateRecord {
    sector: usize,
    eigenvalue: [f64; 2],
    weight: f64,
    state: MatrixRecord,
}

#[derive(Serialize)]
struct SymmetryReport {
    symmetry: String,
    eigenvalues: Vec<[f64; 2]>,
    missing: Vec<usize>,
    remedy: Option<String>,
    solutions: Vec<SolveReport>,
    states: Vec<SectorStateRecord>,
}

/// Eigenprojector of a Hermitian matrix onto eigenvalue `value`.
fn eigenprojector(m: &CMat, value: f64) -> CMat {
    let (values, vectors) = eigh(m);
    let mut p = CMat::zeros(m.nrows(), m.ncols());
    for (k, &v) in values.iter().enumerate() {
        if (v - value).abs() < 1e-8 {
            let col = vectors.column(k);
            p += &col * col.adjoint();
        }
    }
    p
}

pub fn symmetry(config_path: &Path, out: &Path, overrides: &Overrides) -> CliResult<i32> {
    let config = load_config(config_path, overrides)?;
    let sym = config.symmetry.clone().ok_or_else(|| CliError::config("symmetry section missing"))?;
    let (parameter, value) = config.parameter();
    let model = config.build_model(value.map(|v| (parameter.as_str(), v)))?;
    let n = model.n_qubits;
    let spec = SymmetrySpec::from_record(&sym.source.record(&model)?, n)?;
    let sector = match &sym.sector {
        Some(s) => Some(SectorSelection {
            generator: s.operator.resolve(n)?,
            value: s.value,
        }),
        None => None,
    };
    let oracle = if matches!(config.ansatz.seed, crate::config::SeedChoice::Keyword(_)) {
        Some(oracle_state(&model, dense_limit(&config))?)
    } else {
        None
    };
    let ansatz = build_ansatz(&config, &model, config.ansatz.order, oracle.as_ref())?;
    let options = ExtractionOptions {
        solver: config.solver.clone(),
        sector: sector.clone(),
        trace_floor: sym.trace_floor,
        retries: sym.retries,
        retry_seed: config.ansatz.rng_seed.wrapping_add(1),
    };
    let report = extract_all_ness(&model, &spec, &ansatz, &options)?;

    // oracle representatives P₀(Π/TrΠ) of each selected sector
    let projector = if config.oracle && n <= dense_limit(&config) {
        Some(StationaryProjector::new(&build_liouvillian_with_limit(&model, dense_limit(&config))?, NULL_TOL)?)
    } else {
        None
    };
    let selection = match &sector {
        Some(s) => eigenprojector(&s.generator.to_dense()?, s.value),
        None => identity(1 << n),
    };

    fs::create_dir_all(out)?;
    let mut w = csv::Writer::from_path(out.join("sectors.csv"))?;
    w.write_record(["sector", "eigenvalue_re", "eigenvalue_im", "weight", "true_residual", "min_eigenvalue", "oracle_fidelity"])?;
    for s in &report.states {
        let f = projector.as_ref().and_then(|p0| {
            let pi = &selection * spec.projector(s.sector) * &selection;
            p0.stationary_state_from(&pi).map(|expected| fidelity(&s.state, &expected))
        });
        w.write_record([
            s.sector.to_string(),
            format!("{:?}", s.eigenvalue[0]),
            format!("{:?}", s.eigenvalue[1]),
            format!("{:?}", s.weight),
            format!("{:?}", s.true_residual),
            format!("{:?}", s.min_eigenvalue),
            f.map(|x| format!("{x:?}")).unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    let mut w = csv::Writer::from_path(out.join("overlaps.csv"))?;
    w.write_record(["sector_a", "sector_b", "trace_overlap"])?;
    for (a, b, o) in report.pairwise_overlaps() {
        w.write_record([a.to_string(), b.to_string(), format!("{o:?}")])?;
    }
    w.flush()?;

    let remedy = (!report.missing.is_empty())
        .then(|| "sectors without weight: re-run the feasibility solve from a random start (raise `retries`)".to_string());
    if let Some(r) = &remedy {
        eprintln!("warning: missing sectors {:?}; {r}", report.missing);
    }
    let json = SymmetryReport {
        symmetry: spec.name.clone(),
        eigenvalues: spec.eigenvalues.iter().map(|z| [z.re, z.im]).collect(),
        missing: report.missing.clone(),
        remedy,
        solutions: report
            .solutions
            .iter()
            .map(|b| SolveReport {
                status: b.status,
                diagnostics: b.diagnostics.clone(),
                beta: Some((&b.beta).into()),
            })
            .collect(),
        states: report
            .states
            .iter()
            .map(|s| SectorStateRecord {
                sector: s.sector,
                eigenvalue: s.eigenvalue,
                weight: s.weight,
                state: (&s.state).into(),
            })
            .collect(),
    };
    fs::write(out.join("states.json"), serde_json::to_string_pretty(&json)?)?;
    println!(
        "{}: {} sector states extracted, {} missing",
        spec.name,
        report.states.len(),
        report.missing.len()
    );
    Ok(exit::OK)
}

pub fn ansatz_generate(config_path: &Path, out: Option<&Path>, overrides: &Overrides) -> CliResult<i32> {
    let config = load_config(config_path, overrides)?;
    let (parameter, value) = config.parameter();
    let model = config.build_model(value.map(|v| (parameter.as_str(), v)))?;
    let oracle = if matches!(config.ansatz.seed, crate::config::SeedChoice::Keyword(_)) {
        check_oracle_size(&config, model.n_qubits)?;
        Some(oracle_state(&model, dense_limit(&config))?)
    } else {
        None
    };
    let ansatz = build_ansatz(&config, &model, config.ansatz.order, oracle.as_ref())?;
    eprintln!("{} states, levels {:?}, fingerprint {}", ansatz.len(), ansatz.level_sizes(), ansatz.fingerprint());
    emit(out, &serde_json::to_string_pretty(&ansatz.record())?)?;
    Ok(exit::OK)
}

pub fn ansatz_inspect(file: &Path) -> CliResult<i32> {
    let text = fs::read_to_string(file).map_err(|e| CliError::config(format!("cannot read {}: {e}", file.display())))?;
    let record: AnsatzRecord = serde_json::from_str(&text)?;
    let set = AnsatzSet::from_record(&record)?;
    println!("n_qubits: {}", set.n_qubits());
    println!("size: {}", set.len());
    println!("order: {}", set.order());
    println!("level_sizes: {:?}", set.level_sizes());
    println!("seed: {}", set.seed().label());
    if let Some((q, rng_seed)) = set.subset() {
        println!("subset: q = {q}, rng_seed = {rng_seed}");
    }
    println!("fingerprint: {}", set.fingerprint());
    Ok(exit::OK)
}

pub fn model_validate(file: &Path) -> CliResult<i32> {
    if !file.exists() {
        return Err(CliError::config(format!("model file {} does not exist", file.display())));
    }
    let model = OpenSystemModel::load(file)?;
    let violations = model.validate();
    if violations.is_empty() {
        println!(
            "ok: {} ({} qubits, {} Hamiltonian terms, {} dissipators)",
            model.label,
            model.n_qubits,
            model.hamiltonian.len(),
            model.dissipators.len()
        );
        Ok(exit::OK)
    } else {
        for v in &violations {
            println!("violation: {v}");
        }
        Ok(exit::CONFIG)
    }
}

pub fn model_emit(builder: Builder, n: usize, params: &[(String, f64)], out: Option<&PathBuf>) -> CliResult<i32> {
    let params: BTreeMap<String, f64> = params.iter().cloned().collect();
    let model = builder.build(n, &params)?;
    emit(out.map(PathBuf::as_path), &(model.to_json()? + "\n"))?;
    Ok(exit::OK)
}
