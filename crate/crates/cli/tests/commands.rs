use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use d2d_core::ScenarioConfig;
use d2dsim::runner::{sweep, write_sweep_csv, RunSummary, SWEEP_COLUMNS};
use tempfile::TempDir;

fn d2dsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_d2dsim"))
        .args(args)
        .output()
        .unwrap()
}

fn write_config(dir: &Path, pairs: usize) -> String {
    let path = dir.join(format!("n{pairs}.json"));
    fs::write(
        &path,
        serde_json::to_string(&ScenarioConfig::default().with_due_pairs(pairs)).unwrap(),
    )
    .unwrap();
    path.to_string_lossy().into_owned()
}

fn run(dir: &Path, config: &str, policy: &str, out: &str) -> RunSummary {
    let out = dir.join(out);
    let output = d2dsim(&[
        "run",
        "--config",
        config,
        "--policy",
        policy,
        "--episodes",
        "100",
        "--seed",
        "5",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(
        output.status.success(),
        "{}",
        String::from_utf8_lossy(&output.stderr)
    );
    serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap()
}

#[test]
fn run_without_pairs_has_no_d2d_capacity() {
    let dir = TempDir::new().unwrap();
    let config = write_config(dir.path(), 0);
    let summary = run(dir.path(), &config, "random", "a");
    let due = summary.aggregate.due_capacity_mbps.unwrap();
    assert_eq!((due.mean, due.sd), (0.0, 0.0));
    assert!(summary.aggregate.mean_due_tx_power_dbm.is_none());
    assert_eq!(summary.episodes.len(), 100);
}

#[test]
fn run_outputs_repeat_byte_for_byte() {
    let dir = TempDir::new().unwrap();
    let config = write_config(dir.path(), 10);
    run(dir.path(), &config, "random", "a");
    run(dir.path(), &config, "random", "b");
    for file in ["steps.jsonl", "summary.json"] {
        let a = fs::read(dir.path().join("a").join(file)).unwrap();
        let b = fs::read(dir.path().join("b").join(file)).unwrap();
        assert_eq!(a, b, "{file}");
    }
    let steps = fs::read_to_string(dir.path().join("a/steps.jsonl")).unwrap();
    let records: Vec<serde_json::Value> = steps
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(
        records.iter().filter(|r| r["record"] == "step").count(),
        1000
    );
    assert_eq!(
        records.iter().filter(|r| r["record"] == "episode").count(),
        100
    );
    assert_eq!(records[10]["record"], "episode");
}

#[test]
fn dense_random_run_falls_below_baseline() {
    let dir = TempDir::new().unwrap();
    let base = run(dir.path(), &write_config(dir.path(), 0), "noop", "base");
    let dense = run(dir.path(), &write_config(dir.path(), 50), "random", "dense");
    let mean = |s: &RunSummary| s.aggregate.total_capacity_mbps.unwrap().mean;
    assert!(
        mean(&dense) < mean(&base),
        "{} vs {}",
        mean(&dense),
        mean(&base)
    );
}

#[test]
fn sweep_table_shape() {
    let rows = sweep(&ScenarioConfig::default(), "greedy", &[10, 50], 2, 3, 9).unwrap();
    let cells: Vec<(usize, usize)> = rows.iter().map(|r| (r.density, r.trial)).collect();
    assert_eq!(cells, vec![(10, 0), (10, 1), (50, 0), (50, 1)]);
    let mut csv = Vec::new();
    write_sweep_csv(&rows, &mut csv).unwrap();
    let text = String::from_utf8(csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], SWEEP_COLUMNS.join(","));
    assert_eq!(lines.len(), 5);
    assert!(rows.iter().all(|r| r.mean_due_tx_power_dbm == Some(11.0)));
}

#[test]
fn greedy_sweep_beats_baseline_at_low_density() {
    let defaults = ScenarioConfig::default();
    let greedy = sweep(&defaults, "greedy", &[10], 3, 20, 1).unwrap();
    let base = sweep(&defaults, "noop", &[0], 3, 20, 1).unwrap();
    let mean = |rows: &[d2dsim::runner::SweepRow]| {
        rows.iter().map(|r| r.mean_total_capacity_mbps).sum::<f64>() / rows.len() as f64
    };
    assert!(mean(&greedy) > mean(&base));
}

#[test]
fn init_config_round_trips() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("default.json");
    assert!(d2dsim(&["init-config", "--out", path.to_str().unwrap()])
        .status
        .success());
    let loaded = d2dsim::load_config(&path).unwrap();
    assert_eq!(loaded, ScenarioConfig::default());
}

#[test]
fn bad_inputs_exit_nonzero() {
    let dir = TempDir::new().unwrap();
    let bad = dir.path().join("bad.json");
    let mut cfg = ScenarioConfig::default();
    cfg.num_cues = 30;
    fs::write(&bad, serde_json::to_string(&cfg).unwrap()).unwrap();
    let out = d2dsim(&["run", "--config", bad.to_str().unwrap(), "--episodes", "1"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("num_cues"));

    let out = d2dsim(&[
        "run",
        "--config",
        dir.path().join("missing.json").to_str().unwrap(),
    ]);
    assert!(!out.status.success());

    let out = d2dsim(&["run", "--policy", "dqn", "--episodes", "1"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown policy"));
}

#[test]
fn shipped_config_is_the_default_scenario() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/default.json");
    assert_eq!(
        d2dsim::load_config(&path).unwrap(),
        ScenarioConfig::default()
    );
}
