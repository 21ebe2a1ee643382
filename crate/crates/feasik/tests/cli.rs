use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use feasik::{read_trace, Document};
use feasik_core::Solver;

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_feasik"));
    cmd.env_remove("FEASIK_SEED");
    cmd
}

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs").join(name)
}

fn run(cmd: &mut Command) -> Output {
    cmd.output().expect("spawn feasik")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn solve(name: &str, trace: &Path) -> Output {
    run(bin().arg("solve").arg(config(name)).arg("-o").arg(trace))
}

#[test]
fn solve_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("t.csv");
    for (name, want) in [
        ("two_halfspaces.json", 0),
        ("a1_bracketed.json", 0),
        ("ball_box_random.json", 0),
        ("a1_raw.json", 2),
        ("bad_relaxation.json", 1),
    ] {
        let out = solve(name, &trace);
        assert_eq!(code(&out), want, "{name}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn bad_relaxation_names_field_once() {
    let dir = tempfile::tempdir().unwrap();
    let out = solve("bad_relaxation.json", &dir.path().join("t.csv"));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("run.relaxation"), "{err}");
    assert_eq!(err.matches("2.5").count(), 1, "{err}");
}

#[test]
fn missing_file_is_an_error() {
    let out = run(bin().arg("solve").arg("/nonexistent/cfg.json"));
    assert_eq!(code(&out), 1);
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(code(&run(bin().arg("solve"))), 1);
    assert_eq!(code(&run(bin().arg("reproduce").arg("a3"))), 1);
    assert_eq!(code(&run(bin().arg("--help"))), 0);
}

#[test]
fn trace_round_trips_bit_exact() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("t.csv");
    assert_eq!(code(&solve("ball_box_random.json", &trace)), 0);
    let rows = read_trace(fs::File::open(&trace).unwrap()).unwrap();

    let doc = Document::load(&config("ball_box_random.json")).unwrap();
    let res = Solver::new(doc.run_config(None).unwrap()).unwrap().solve().unwrap();
    assert_eq!(rows.len(), res.trace.len());
    for (row, rec) in rows.iter().zip(&res.trace) {
        assert_eq!(row.k, rec.k);
        assert_eq!(row.bracket_k, rec.bracket_k);
        assert_eq!(row.active, rec.active);
        assert_eq!(row.violated, rec.violated);
        assert_eq!(row.feasible, rec.feasible);
        assert_eq!(row.alpha.to_bits(), rec.alpha.to_bits());
        assert_eq!(row.r.to_bits(), rec.r.to_bits());
        assert_eq!(row.step_norm.to_bits(), rec.step_norm.to_bits());
        let bits: Vec<u64> = row.x.iter().map(|t| t.to_bits()).collect();
        let want: Vec<u64> = rec.x.as_slice().iter().map(|t| t.to_bits()).collect();
        assert_eq!(bits, want);
    }
    assert!(rows.last().unwrap().feasible);
}

#[test]
fn sample_configs_round_trip() {
    for name in [
        "two_halfspaces.json",
        "a1_raw.json",
        "a1_bracketed.json",
        "bad_relaxation.json",
        "ball_box_random.json",
    ] {
        let doc = Document::load(&config(name)).unwrap();
        let again = Document::from_json_str(&doc.to_json_string()).unwrap();
        assert_eq!(doc.to_json_string(), again.to_json_string(), "{name}");
    }
}

#[test]
fn unknown_field_inside_constraint_is_rejected() {
    let text = r#"{
        "dim": 2,
        "constraints": [{ "kind": "ball", "center": [0.0, 0.0], "radius": 1.0, "radiu": 2.0 }]
    }"#;
    let err = Document::from_json_str(text).unwrap_err().to_string();
    assert!(err.contains("radiu"), "{err}");
}

#[test]
fn seed_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let path = |n: &str| dir.path().join(n);
    let cfg = config("ball_box_random.json");
    let flag = run(bin().args(["solve", "--seed", "5", "-o"]).arg(path("flag.csv")).arg(&cfg));
    let both = run(bin().env("FEASIK_SEED", "9").args(["solve", "--seed", "5", "-o"]).arg(path("both.csv")).arg(&cfg));
    let env = run(bin().env("FEASIK_SEED", "5").args(["solve", "-o"]).arg(path("env.csv")).arg(&cfg));
    for out in [&flag, &both, &env] {
        assert_eq!(code(out), 0);
    }
    let read = |n: &str| fs::read(path(n)).unwrap();
    assert_eq!(read("flag.csv"), read("both.csv"));
    assert_eq!(read("flag.csv"), read("env.csv"));
}

#[test]
fn sweep_rows_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for out in [&a, &b] {
        let res = run(bin().arg("sweep").arg(config("grid.json")).arg("--no-timing").arg("-o").arg(out));
        assert_eq!(code(&res), 0, "{}", String::from_utf8_lossy(&res.stderr));
    }
    let text = fs::read_to_string(&a).unwrap();
    assert_eq!(text.lines().count(), 1 + 80);
    assert_eq!(text, fs::read_to_string(&b).unwrap());
}

#[test]
fn empty_grid_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let grid = dir.path().join("grid.json");
    fs::write(&grid, r#"{ "instances": 0, "controls": [{ "kind": "cyclic" }] }"#).unwrap();
    let out = run(bin().arg("sweep").arg(&grid).arg("-o").arg(dir.path().join("s.csv")));
    assert_eq!(code(&out), 1);
}

#[test]
fn reproduce_commands() {
    for (example, want) in [("a1", 0), ("a2", 0), ("a1-bracketed", 0), ("a2-bracketed", 0)] {
        let out = run(bin().args(["reproduce", example, "--max-iter", "20000"]));
        assert_eq!(code(&out), want, "{example}: {}", String::from_utf8_lossy(&out.stderr));
        assert!(!out.stdout.is_empty());
    }
}

#[test]
fn certify_and_validate() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("cert.json");
    let out = run(bin().arg("certify").arg(config("ball_box_random.json")).arg("-o").arg(&json));
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let value: serde_json::Value = serde_json::from_slice(&fs::read(&json).unwrap()).unwrap();
    assert!(value.is_object());
    let out = run(bin().arg("validate").arg(config("two_halfspaces.json")));
    assert_eq!(code(&out), 0);
}
