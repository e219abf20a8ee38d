use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn ness(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ness")).args(args).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

/// Header plus rows, each row keyed by column name.
fn table(text: &str) -> Vec<std::collections::BTreeMap<String, String>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header: Vec<String> = r.headers().unwrap().iter().map(String::from).collect();
    r.records()
        .map(|rec| header.iter().cloned().zip(rec.unwrap().iter().map(String::from)).collect())
        .collect()
}

const TFIM: &str = r#"{"model":{"builder":"tfim","n_qubits":2,"params":{"g":1.0}},
  "ansatz":{"seed":{"kind":"bitstring","bits":"00"},"order":2}}"#;

#[test]
fn solve_reaches_exact_state() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "tfim.json", TFIM);
    let out_dir = dir.path().join("out");
    let out = ness(&["solve", p(&cfg), "--out", p(&out_dir)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = table(&stdout(&out));
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0]["status"], "feasible");
    assert_eq!(rows[0]["mode"], "exact");
    assert!(rows[0]["fidelity"].parse::<f64>().unwrap() >= 0.999);
    let record: serde_json::Value = serde_json::from_str(&fs::read_to_string(out_dir.join("solution.json")).unwrap()).unwrap();
    assert_eq!(record["report"]["status"], "feasible");
    assert_eq!(fs::read_to_string(out_dir.join("report.csv")).unwrap(), stdout(&out));
}

#[test]
fn shots_switch_to_least_squares() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "tfim.json", TFIM);
    let out = ness(&["solve", p(&cfg), "--shots", "1000000", "--noise-seed", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let rows = table(&stdout(&out));
    assert_eq!(rows[0]["mode"], "noisy");
    assert_eq!(rows[0]["status"], "least_squares");
    assert_eq!(rows[0]["shots"], "1000000");
    assert!(rows[0]["fidelity"].parse::<f64>().unwrap() > 0.99);
}

#[test]
fn exit_codes_separate_config_from_infeasible() {
    let dir = TempDir::new().unwrap();
    let missing = write(dir.path(), "missing.json", r#"{"model":{"file":"absent.json"},"ansatz":{"seed":{"kind":"uniform"}}}"#);
    assert_eq!(ness(&["solve", p(&missing)]).status.code(), Some(3));

    let unknown = write(dir.path(), "unknown.json", r#"{"model":{"builder":"tfim","n_qubits":2,"params":{"h":1.0}},"ansatz":{"seed":{"kind":"uniform"}}}"#);
    assert_eq!(ness(&["solve", p(&unknown)]).status.code(), Some(3));

    let cfg = write(dir.path(), "tfim.json", TFIM);
    let out = ness(&["solve", p(&cfg), "--order", "0"]);
    assert_eq!(out.status.code(), Some(4));
    assert_eq!(table(&stdout(&out))[0]["status"], "infeasible");

    assert_eq!(ness(&["solve"]).status.code(), Some(2));
}

#[test]
fn oracle_size_limit_has_its_own_code() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        dir.path(),
        "big.json",
        r#"{"model":{"builder":"tfim","n_qubits":11},"ansatz":{"seed":{"kind":"uniform"}}}"#,
    );
    assert_eq!(ness(&["solve", p(&cfg)]).status.code(), Some(6));
}

#[test]
fn single_value_sweep_matches_solve() {
    let dir = TempDir::new().unwrap();
    let solve_cfg = write(dir.path(), "tfim.json", TFIM);
    let sweep_cfg = write(
        dir.path(),
        "sweep.json",
        r#"{"model":{"builder":"tfim","n_qubits":2},
  "ansatz":{"seed":{"kind":"bitstring","bits":"00"},"order":2},
  "sweep":{"parameter":"g","values":[1.0]}}"#,
    );
    let solved = stdout(&ness(&["solve", p(&solve_cfg)]));
    let swept = ness(&["sweep", p(&sweep_cfg)]);
    assert_eq!(swept.status.code(), Some(0));
    assert_eq!(stdout(&swept), solved);
}

#[test]
fn sweep_is_reproducible() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        dir.path(),
        "sweep.json",
        r#"{"model":{"builder":"tfim","n_qubits":3},
  "ansatz":{"seed":{"kind":"bitstring","bits":"000"},"order":2,"q":3,"rng_seed":5},
  "shots":100000,"noise_seed":9,
  "sweep":{"parameter":"g","values":[0.25,0.5,1.0,2.0],"orders":[1,2]}}"#,
    );
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    assert_eq!(ness(&["sweep", p(&cfg), "--out", p(&a), "--threads", "1"]).status.code(), Some(0));
    assert_eq!(ness(&["sweep", p(&cfg), "--out", p(&b), "--threads", "4"]).status.code(), Some(0));
    let a = fs::read(&a).unwrap();
    assert_eq!(a, fs::read(&b).unwrap());
    assert_eq!(table(std::str::from_utf8(&a).unwrap()).len(), 8);
}

#[test]
fn sweep_keeps_failed_points_in_rows() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        dir.path(),
        "sweep.json",
        r#"{"model":{"builder":"tfim","n_qubits":2},
  "ansatz":{"seed":{"kind":"bitstring","bits":"00"},"order":0},
  "sweep":{"parameter":"g","values":[1.0,2.0],"orders":[0,2]}}"#,
    );
    let out = ness(&["sweep", p(&cfg)]);
    assert_eq!(out.status.code(), Some(0));
    let rows = table(&stdout(&out));
    let statuses: Vec<&str> = rows.iter().map(|r| r["status"].as_str()).collect();
    assert_eq!(statuses, ["infeasible", "feasible", "infeasible", "feasible"]);
}

#[test]
fn oracle_reports_degeneracy() {
    let dir = TempDir::new().unwrap();
    let tfim = write(dir.path(), "tfim.json", TFIM);
    let out = ness(&["oracle", p(&tfim)]);
    assert_eq!(out.status.code(), Some(0));
    let rows = table(&stdout(&out));
    assert_eq!(rows[0]["degeneracy"], "1");
    assert_eq!(rows[0]["physical_states"], "1");

    let xxz = write(
        dir.path(),
        "xxz.json",
        r#"{"model":{"builder":"xxz_dephasing","n_qubits":3},"ansatz":{"seed":{"kind":"uniform"}}}"#,
    );
    let basis = dir.path().join("basis.json");
    let out = ness(&["oracle", p(&xxz), "--basis", p(&basis)]);
    assert_eq!(out.status.code(), Some(0));
    let rows = table(&stdout(&out));
    assert!(rows[0]["physical_states"].parse::<usize>().unwrap() >= 4);
    assert!(basis.exists());
}

#[test]
fn symmetry_separates_sectors() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        dir.path(),
        "sym.json",
        r#"{"model":{"builder":"xxz_dephasing","n_qubits":3},
  "ansatz":{"seed":{"kind":"random","rng_seed":7},"order":2},
  "symmetry":{"source":{"kind":"model"}}}"#,
    );
    let out_dir = dir.path().join("sym");
    let out = ness(&["symmetry", p(&cfg), "--out", p(&out_dir)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let sectors = table(&fs::read_to_string(out_dir.join("sectors.csv")).unwrap());
    assert_eq!(sectors.len(), 4);
    for s in &sectors {
        assert!(s["oracle_fidelity"].parse::<f64>().unwrap() > 0.999);
    }
    for o in table(&fs::read_to_string(out_dir.join("overlaps.csv")).unwrap()) {
        assert!(o["trace_overlap"].parse::<f64>().unwrap() < 1e-8);
    }
    assert!(out_dir.join("states.json").exists());
}

#[test]
fn model_emit_validate_round_trip() {
    let dir = TempDir::new().unwrap();
    let file = dir.path().join("model.json");
    let out = ness(&["model", "emit", "--builder", "xxz-boundary", "-n", "3", "--param", "delta=0.5", "--out", p(&file)]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(ness(&["model", "validate", p(&file)]).status.code(), Some(0));

    let cfg = write(
        dir.path(),
        "from_file.json",
        r#"{"model":{"file":"model.json"},"ansatz":{"seed":{"kind":"bitstring","bits":"101"},"order":1},"oracle":false}"#,
    );
    let out = ness(&["solve", p(&cfg)]);
    assert!(matches!(out.status.code(), Some(0) | Some(4)));
    assert!(table(&stdout(&out))[0]["model"].contains("xxz"));

    let broken = write(dir.path(), "broken.json", r#"{"n_qubits":2}"#);
    assert_eq!(ness(&["model", "validate", p(&broken)]).status.code(), Some(3));
    assert_eq!(ness(&["model", "emit", "--builder", "tfim", "-n", "2", "--param", "g"]).status.code(), Some(2));
}

#[test]
fn ansatz_generate_and_inspect() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "tfim.json", TFIM);
    let file = dir.path().join("ansatz.json");
    assert_eq!(ness(&["ansatz", "generate", p(&cfg), "--out", p(&file)]).status.code(), Some(0));
    let out = ness(&["ansatz", "inspect", p(&file)]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("size: 4"));
    assert!(text.contains("level_sizes: [1, 2, 1]"));
}
