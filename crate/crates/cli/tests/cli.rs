use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use hdtlab_cli::output::{read_csv, write_csv, ResultRow};
use hdtlab_cli::{EXIT_COMPARISON, EXIT_OK, EXIT_RESOURCE_CAP, EXIT_VALIDATION};

fn hdtlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hdtlab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

const SMALL_HDT: &str = r#"{
  "experiment": "hdt",
  "id": "tiny",
  "master_seed": 3,
  "protocol": {"n_data": 1, "n_ancilla": 1, "steps": 3, "unitary": {"kind": "haar"}, "mode": "exact", "realizations": 2},
  "metrics": {"frame_potential": [1]}
}"#;

#[test]
fn run_writes_expected_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "tiny.json", SMALL_HDT);
    let out = dir.path().join("out");
    let res = hdtlab(&[
        "hdt",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(
        res.status.code(),
        Some(EXIT_OK),
        "{}",
        String::from_utf8_lossy(&res.stderr)
    );
    let rows = read_csv(&out.join("tiny_frame_potential.csv")).unwrap();
    assert_eq!(rows.iter().filter(|r| r.realization.is_some()).count(), 6);
    assert!(out.join("tiny_oracle.csv").exists());
    assert!(out.join("tiny_summary.txt").exists());
}

#[test]
fn seed_override_changes_results() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "tiny.json", SMALL_HDT);
    let read = |seed: &str| {
        let out = dir.path().join(format!("out{seed}"));
        let res = hdtlab(&[
            "run",
            "--config",
            cfg.to_str().unwrap(),
            "--seed",
            seed,
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(matches!(res.status.code(), Some(EXIT_OK | EXIT_COMPARISON)));
        std::fs::read(out.join("tiny_frame_potential.csv")).unwrap()
    };
    assert_eq!(read("1"), read("1"));
    assert_ne!(read("1"), read("2"));
}

#[test]
fn invalid_configs_exit_with_validation_code() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        (
            "unknown_key.json",
            SMALL_HDT.replace("\"realizations\"", "\"realisations\""),
        ),
        ("bad_dt.json", SMALL_HDT.replace("\"hdt\"", "\"dt\"")),
        ("not_json.json", "{ nope".to_string()),
    ];
    for (name, body) in cases {
        let cfg = write_config(dir.path(), name, &body);
        let res = hdtlab(&[
            "run",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            dir.path().to_str().unwrap(),
        ]);
        assert_eq!(res.status.code(), Some(EXIT_VALIDATION), "{name}");
        assert!(!res.stderr.is_empty(), "{name} should explain itself");
    }
}

#[test]
fn subcommand_must_match_experiment_kind() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "tiny.json", SMALL_HDT);
    let res = hdtlab(&[
        "pop",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(res.status.code(), Some(EXIT_VALIDATION));
}

#[test]
fn qubit_cap_is_reported_separately() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "tiny.json", SMALL_HDT);
    let res = hdtlab(&[
        "run",
        "--config",
        cfg.to_str().unwrap(),
        "--cap-qubits",
        "1",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(
        res.status.code(),
        Some(EXIT_RESOURCE_CAP),
        "{}",
        String::from_utf8_lossy(&res.stderr)
    );
}

#[test]
fn compare_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let sim_row = |r, v| ResultRow::new("e", Some(r), 1, "m", 1, v).with_error(0.01, 100);
    let sim = dir.path().join("sim.csv");
    let theory = dir.path().join("theory.csv");
    write_csv(&sim, &[sim_row(0, 0.50), sim_row(1, 0.52)]).unwrap();

    write_csv(&theory, &[ResultRow::new("e", None, 1, "m", 1, 0.51)]).unwrap();
    let ok = hdtlab(&[
        "compare",
        "--sim",
        sim.to_str().unwrap(),
        "--theory",
        theory.to_str().unwrap(),
    ]);
    assert_eq!(ok.status.code(), Some(EXIT_OK));

    write_csv(&theory, &[ResultRow::new("e", None, 1, "m", 1, 0.9)]).unwrap();
    let bad = hdtlab(&[
        "compare",
        "--sim",
        sim.to_str().unwrap(),
        "--theory",
        theory.to_str().unwrap(),
    ]);
    assert_eq!(bad.status.code(), Some(EXIT_COMPARISON));

    write_csv(&theory, &[ResultRow::new("other", None, 1, "m", 1, 0.9)]).unwrap();
    let none = hdtlab(&[
        "compare",
        "--sim",
        sim.to_str().unwrap(),
        "--theory",
        theory.to_str().unwrap(),
    ]);
    assert_eq!(none.status.code(), Some(EXIT_OK));
    assert!(String::from_utf8_lossy(&none.stdout).contains("no comparable points"));
}
