//! End-to-end checks of the `ouroboros` binary: exit codes, file handling,
//! locking, and byte-level trace determinism.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use ouroboros_core::memory::{self, MemoryEvent, MemoryEventKind, MemoryLedger};
use ouroboros_core::schema_store::save_store;
use ouroboros_core::{fixtures, harness, DimensionId, FeatureDatum, FeatureValue, Params};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ouroboros"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).to_string()
}

fn stderr(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).to_string()
}

struct Workdir {
    dir: tempfile::TempDir,
}

impl Workdir {
    fn new() -> Self {
        let dir = tempfile::tempdir().unwrap();
        save_store(&fixtures::face_store(), &dir.path().join("face.os")).unwrap();
        harness::save_scenario(&fixtures::face_scenario(), &dir.path().join("face.sc")).unwrap();
        Self { dir }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn arg(&self, name: &str) -> String {
        self.path(name).display().to_string()
    }
}

#[test]
fn run_concludes_and_writes_the_trace() {
    let w = Workdir::new();
    let out = run(&[
        "run",
        "--store",
        &w.arg("face.os"),
        "--scenario",
        &w.arg("face.sc"),
        "--seed",
        "7",
        "--trace-out",
        &w.arg("trace.jsonl"),
    ]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let summary = stdout(&out);
    assert!(summary.contains("terminal=conclude"), "summary: {summary}");
    assert!(summary.contains("schema=FACE"));
    let trace = fs::read_to_string(w.path("trace.jsonl")).unwrap();
    assert!(trace.lines().count() > 5);
}

#[test]
fn missing_store_exits_one_with_diagnostic() {
    let w = Workdir::new();
    let out = run(&[
        "run",
        "--store",
        &w.arg("absent.os"),
        "--scenario",
        &w.arg("face.sc"),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("absent.os"));
}

#[test]
fn out_of_range_threshold_exits_two() {
    let w = Workdir::new();
    let out = run(&[
        "run",
        "--store",
        &w.arg("face.os"),
        "--scenario",
        &w.arg("face.sc"),
        "--theta-sat",
        "1.5",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("range"), "stderr: {}", stderr(&out));
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let out = run(&["run", "--no-such-flag"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn repeated_runs_write_identical_traces() {
    let w = Workdir::new();
    for name in ["a.jsonl", "b.jsonl"] {
        let out = run(&[
            "run",
            "--store",
            &w.arg("face.os"),
            "--scenario",
            &w.arg("face.sc"),
            "--seed",
            "42",
            "--trace-out",
            &w.arg(name),
        ]);
        assert!(out.status.success());
    }
    let a = fs::read(w.path("a.jsonl")).unwrap();
    let b = fs::read(w.path("b.jsonl")).unwrap();
    assert_eq!(a, b);
}

fn seed_ledger(path: &Path, importance: f64) {
    let mut ledger = MemoryLedger::new();
    let window = vec![FeatureDatum {
        dim: DimensionId::new("tentacle"),
        value: FeatureValue::Symbol("tentacle".to_string()),
        pos: None,
        tick: 1,
        salience: 1.0,
    }];
    memory::record_event(
        &mut ledger,
        MemoryEvent {
            kind: MemoryEventKind::Impasse,
            window,
            importance,
            tick: 1,
        },
        &Params::default(),
    )
    .unwrap();
    memory::save_ledger(&ledger, path).unwrap();
}

#[test]
fn consolidate_promotes_and_reports_count() {
    let w = Workdir::new();
    seed_ledger(&w.path("mem.ol"), 0.9);
    let out = run(&[
        "consolidate",
        "--store",
        &w.arg("face.os"),
        "--ledger",
        &w.arg("mem.ol"),
    ]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    assert_eq!(stdout(&out).trim(), "promoted 1");
    let store = ouroboros_core::schema_store::load_store(&w.path("face.os")).unwrap();
    assert_eq!(store.len(), 2);
    let ledger = memory::load_ledger(&w.path("mem.ol")).unwrap();
    assert!(ledger.is_empty());
}

#[test]
fn sleep_on_empty_ledger_reports_zeros() {
    let w = Workdir::new();
    fs::write(w.path("mem.ol"), "").unwrap();
    let out = run(&[
        "sleep",
        "--store",
        &w.arg("face.os"),
        "--ledger",
        &w.arg("mem.ol"),
    ]);
    assert!(out.status.success());
    assert_eq!(stdout(&out).trim(), "pruned 0 decayed 0");
}

#[test]
fn sleep_appends_a_trace_record() {
    let w = Workdir::new();
    seed_ledger(&w.path("mem.ol"), 0.2);
    let out = run(&[
        "sleep",
        "--store",
        &w.arg("face.os"),
        "--ledger",
        &w.arg("mem.ol"),
        "--now",
        "10",
        "--trace-out",
        &w.arg("sleep.jsonl"),
    ]);
    assert!(out.status.success());
    let trace = fs::read_to_string(w.path("sleep.jsonl")).unwrap();
    assert!(trace.contains(r#""event":"sleep""#), "trace: {trace}");
}

#[test]
fn lock_conflict_exits_one() {
    let w = Workdir::new();
    seed_ledger(&w.path("mem.ol"), 0.9);
    fs::write(w.path("face.os.lock"), "").unwrap();
    let out = run(&[
        "consolidate",
        "--store",
        &w.arg("face.os"),
        "--ledger",
        &w.arg("mem.ol"),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("lock"));
}

#[test]
fn validate_accepts_good_files_and_rejects_bad_lines() {
    let w = Workdir::new();
    let out = run(&[
        "validate",
        "--store",
        &w.arg("face.os"),
        "--scenario",
        &w.arg("face.sc"),
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("1 schemata"));
    assert!(text.contains("5 features"));

    fs::write(w.path("broken.os"), "{\"id\":\"X\"}\n").unwrap();
    let out = run(&["validate", "--store", &w.arg("broken.os")]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("line 1"));

    let out = run(&["validate"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn env_config_applies_and_flags_win() {
    let w = Workdir::new();
    fs::write(w.path("cfg.json"), r#"{"theta_sat":2.0}"#).unwrap();
    let out = bin()
        .args([
            "run",
            "--store",
            &w.arg("face.os"),
            "--scenario",
            &w.arg("face.sc"),
        ])
        .env("OUROBOROS_CONFIG", w.path("cfg.json"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2), "config range violation surfaces");

    let out = bin()
        .args([
            "run",
            "--store",
            &w.arg("face.os"),
            "--scenario",
            &w.arg("face.sc"),
            "--theta-sat",
            "0.9",
        ])
        .env("OUROBOROS_CONFIG", w.path("cfg.json"))
        .output()
        .unwrap();
    assert!(out.status.success(), "explicit flag overrides the config file");

    fs::write(w.path("cfg.json"), r#"{"not_a_knob":1}"#).unwrap();
    let out = bin()
        .args([
            "run",
            "--store",
            &w.arg("face.os"),
            "--scenario",
            &w.arg("face.sc"),
        ])
        .env("OUROBOROS_CONFIG", w.path("cfg.json"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2), "unknown config keys are rejected");
}

#[test]
fn run_persists_memory_events_to_the_ledger() {
    let w = Workdir::new();
    harness::save_scenario(&fixtures::novel_scene_scenario(), &w.path("novel.sc")).unwrap();
    let out = run(&[
        "run",
        "--store",
        &w.arg("face.os"),
        "--scenario",
        &w.arg("novel.sc"),
        "--ledger",
        &w.arg("mem.ol"),
        "--max-ticks",
        "30",
    ]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    assert!(stdout(&out).contains("terminal=max_ticks"));
    let ledger = memory::load_ledger(&w.path("mem.ol")).unwrap();
    assert_eq!(ledger.len(), 1);
    assert!(ledger.candidates[0].repetitions >= 2);
}
