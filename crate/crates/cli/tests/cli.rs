use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const SMALL: &str = "[env]\nswaps_per_epoch = 40\nnum_users = 8\n";

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_ammsim"));
    cmd.env_remove("AMMSIM_OUT");
    cmd
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

struct Workspace {
    dir: TempDir,
    config: PathBuf,
}

impl Workspace {
    fn new() -> Self {
        let dir = tempfile::tempdir().unwrap();
        let config = dir.path().join("small.toml");
        fs::write(&config, SMALL).unwrap();
        Self { dir, config }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn train(&self, out: &str, extra: &[&str]) -> Output {
        let out = self.path(out);
        let mut args = vec!["train", "--config", self.config.to_str().unwrap(), "--out", out.to_str().unwrap()];
        args.extend_from_slice(extra);
        run(&args)
    }
}

fn files_named(root: &Path, name: &str) -> usize {
    fs::read_dir(root)
        .unwrap()
        .filter_map(Result::ok)
        .filter(|e| e.path().join(name).is_file())
        .count()
}

#[test]
fn train_writes_metrics_snapshots_and_manifest() {
    let ws = Workspace::new();
    let out = ws.train("runs", &["--agent", "combined", "--scenario", "normal", "--epochs", "3", "--seeds", "1,2,3"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let root = ws.path("runs");
    assert_eq!(files_named(&root, "metrics.csv"), 3);
    assert_eq!(files_named(&root, "qtable.json"), 3);
    assert!(root.join("manifest.json").is_file());
    assert!(root.join("combined-seed2").is_dir());
    let csv = fs::read_to_string(root.join("combined-seed1/metrics.csv")).unwrap();
    assert_eq!(csv.lines().count(), 4);
}

#[test]
fn zero_epochs_is_a_config_error() {
    let ws = Workspace::new();
    let out = ws.train("runs", &["--agent", "combined", "--epochs", "0"]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("epochs"), "{}", stderr(&out));
    assert!(!ws.path("runs").exists());
}

#[test]
fn missing_agent_names_the_key() {
    let ws = Workspace::new();
    let out = ws.train("runs", &["--epochs", "1"]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("agent"));
    let out = ws.train("runs", &["--agent", "agent-7", "--epochs", "1"]);
    assert_eq!(code(&out), 1);
}

#[test]
fn bad_config_file_key_is_reported() {
    let ws = Workspace::new();
    let cfg = ws.path("bad.toml");
    fs::write(&cfg, "epocs = 3\n").unwrap();
    let out = run(&["train", "--agent", "fee-only", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("epocs"), "{}", stderr(&out));
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(code(&run(&["launch"])), 1);
    assert_eq!(code(&run(&["train", "--turbo"])), 1);
    assert_eq!(code(&run(&[])), 1);
    assert_eq!(code(&run(&["--help"])), 0);
}

#[test]
fn identical_invocations_give_identical_csv() {
    let ws = Workspace::new();
    for out in ["a", "b"] {
        let o = ws.train(out, &["--agent", "leverage-only", "--epochs", "4", "--seeds", "11", "-k", "3"]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
    }
    let a = fs::read(ws.path("a/leverage-only-seed11/metrics.csv")).unwrap();
    let b = fs::read(ws.path("b/leverage-only-seed11/metrics.csv")).unwrap();
    assert_eq!(a, b);
    assert_eq!(
        fs::read(ws.path("a/leverage-only-seed11/qtable.json")).unwrap(),
        fs::read(ws.path("b/leverage-only-seed11/qtable.json")).unwrap()
    );
}

#[test]
fn parallel_jobs_match_serial_output() {
    let ws = Workspace::new();
    for (out, jobs) in [("serial", "1"), ("parallel", "3")] {
        let o = ws.train(out, &["--agent", "fee-only", "--epochs", "2", "--seeds", "1,2,3", "--jobs", jobs]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
    }
    for seed in 1..=3 {
        let rel = format!("fee-only-seed{seed}/metrics.csv");
        assert_eq!(fs::read(ws.path("serial").join(&rel)).unwrap(), fs::read(ws.path("parallel").join(&rel)).unwrap());
    }
}

#[test]
fn baseline_skips_snapshots() {
    let ws = Workspace::new();
    let out = ws.path("base");
    let o = run(&["baseline", "--config", ws.config.to_str().unwrap(), "--epochs", "2", "--seeds", "4", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(out.join("baseline-seed4/metrics.csv").is_file());
    assert!(!out.join("baseline-seed4/qtable.json").exists());
    let csv = fs::read_to_string(out.join("baseline-seed4/metrics.csv")).unwrap();
    let row: Vec<&str> = csv.lines().nth(1).unwrap().split(',').collect();
    let fee: f64 = row[10].parse().unwrap();
    let lev: f64 = row[11].parse().unwrap();
    assert!((fee - 0.17).abs() < 1e-12);
    assert_eq!(lev, 42.0);
}

#[test]
fn output_root_defaults_to_env_var() {
    let ws = Workspace::new();
    let root = ws.path("from-env");
    let o = bin()
        .env("AMMSIM_OUT", &root)
        .args(["baseline", "--config", ws.config.to_str().unwrap(), "--epochs", "1", "--seeds", "1"])
        .output()
        .unwrap();
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(root.join("manifest.json").is_file());
}

#[test]
fn sweep_writes_one_summary_table() {
    let ws = Workspace::new();
    let out = ws.path("sweep");
    let o = run(&[
        "sweep",
        "--config",
        ws.config.to_str().unwrap(),
        "--param",
        "update-interval",
        "--values",
        "5,1",
        "--agents",
        "baseline,combined",
        "--epochs",
        "2",
        "--seeds",
        "1",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let table = fs::read_to_string(out.join("sweep.csv")).unwrap();
    let lines: Vec<&str> = table.lines().collect();
    assert_eq!(lines[0], "param,value,agent,terminal_reward,per_seed");
    assert_eq!(lines.len(), 5);
    assert!(lines[1].starts_with("update-interval,1,baseline,"));
    assert!(lines[4].starts_with("update-interval,5,combined,"));
}

#[test]
fn sweep_without_values_is_a_config_error() {
    let ws = Workspace::new();
    let out = ws.path("sweep");
    let o = run(&["sweep", "--param", "tolerance", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("values"));
}

#[test]
fn behavior_change_records_the_switch() {
    let ws = Workspace::new();
    let out = ws.path("bc");
    let o = run(&[
        "behavior-change",
        "--config",
        ws.config.to_str().unwrap(),
        "--from",
        "normal",
        "--to",
        "loose",
        "--epochs",
        "2",
        "--seeds",
        "1",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let manifest = fs::read_to_string(out.join("manifest.json")).unwrap();
    assert!(manifest.contains("behavior-change:normal-to-loose"));
    assert!(out.join("combined-seed1/qtable.json").is_file());
    assert_eq!(code(&run(&["behavior-change", "--from", "calm", "--out", out.to_str().unwrap()])), 1);
}

#[test]
fn compare_reports_means_and_ratios() {
    let ws = Workspace::new();
    let base = ws.path("base");
    let o = run(&["baseline", "--config", ws.config.to_str().unwrap(), "--epochs", "2", "--seeds", "1,2", "--out", base.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let o = ws.train("comb", &["--agent", "combined", "--epochs", "2", "--seeds", "1,2"]);
    assert_eq!(code(&o), 0);

    let report = ws.path("report");
    let o = run(&["compare", base.to_str().unwrap(), ws.path("comb").to_str().unwrap(), "--out", report.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let summary = fs::read_to_string(report.join("compare.csv")).unwrap();
    assert_eq!(summary.lines().count(), 3);
    assert!(summary.contains(",baseline,1;2,"));
    let ratios = fs::read_to_string(report.join("compare_ratios.csv")).unwrap();
    assert_eq!(ratios.lines().count(), 3);
}

#[test]
fn comparing_a_directory_with_itself_gives_unit_ratio() {
    let ws = Workspace::new();
    let o = ws.train("runs", &["--agent", "fee-only", "--epochs", "2", "--seeds", "5"]);
    assert_eq!(code(&o), 0);
    let dir = ws.path("runs");
    let report = ws.path("report");
    let o = run(&["compare", dir.to_str().unwrap(), dir.to_str().unwrap(), "--out", report.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let ratios = fs::read_to_string(report.join("compare_ratios.csv")).unwrap();
    for line in ratios.lines().skip(1) {
        assert!(line.ends_with(",1"), "{line}");
    }
}

#[test]
fn compare_rejects_bad_inputs() {
    let ws = Workspace::new();
    let o = ws.train("normal", &["--agent", "fee-only", "--epochs", "1", "--seeds", "1"]);
    assert_eq!(code(&o), 0);
    let o = ws.train("loose", &["--agent", "fee-only", "--epochs", "1", "--seeds", "1", "--scenario", "loose"]);
    assert_eq!(code(&o), 0);
    let report = ws.path("report");
    let (n, l, r) = (ws.path("normal"), ws.path("loose"), report.to_str().unwrap());

    let single = run(&["compare", n.to_str().unwrap(), "--out", r]);
    assert_eq!(code(&single), 1);

    let mixed = run(&["compare", n.to_str().unwrap(), l.to_str().unwrap(), "--out", r]);
    assert_eq!(code(&mixed), 1);
    assert!(stderr(&mixed).contains("scenario"));

    // a run whose metrics vanished is a runtime failure, not a usage error
    fs::remove_file(n.join("fee-only-seed1/metrics.csv")).unwrap();
    let broken = run(&["compare", n.to_str().unwrap(), n.to_str().unwrap(), "--out", r]);
    assert_eq!(code(&broken), 2);
}

#[test]
fn shipped_configs_resolve() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut seen = 0;
    for entry in fs::read_dir(&root).unwrap() {
        let path = entry.unwrap().path();
        let text = fs::read_to_string(&path).unwrap();
        let file = ammsim::experiment::ConfigFile::parse(&text).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        assert!(file.epochs.unwrap_or(1) >= 1);
        if let Some(spec) = &file.sweep {
            assert!(!spec.is_empty(), "{}", path.display());
        }
        seen += 1;
    }
    assert!(seen >= 5);
}
