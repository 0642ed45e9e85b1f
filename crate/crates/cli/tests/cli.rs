use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use dpcnn_cli::{ReportTable, RunConfig};
use dpcnn_core::{parse_pattern_csv, TrialMetrics};

const SMALL: &str = "# tiny run used by the command-line tests
[data]
count = 20
train_count = 15
calibration_count = 5

[train]
iterations = 10
batch_size = 5

[run]
trials = 1
";

fn dpcnn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dpcnn")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn small_config(dir: &Path, extra: &str) -> PathBuf {
    let path = dir.join("run.toml");
    std::fs::write(&path, format!("{SMALL}{extra}")).unwrap();
    path
}

/// Value printed after `prefix` on some stdout line.
fn field(out: &str, prefix: &str) -> String {
    out.lines()
        .find_map(|l| l.strip_prefix(prefix))
        .unwrap_or_else(|| panic!("no {prefix:?} in {out}"))
        .trim()
        .to_string()
}

fn run_dir(out: &str) -> PathBuf {
    PathBuf::from(field(out, "run directory"))
}

fn metrics(dir: &Path) -> TrialMetrics {
    serde_json::from_str(&std::fs::read_to_string(dir.join("metrics.json")).unwrap()).unwrap()
}

#[test]
fn gen_data_is_deterministic_and_shaped() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_config(tmp.path(), "");
    let mut files = Vec::new();
    for sub in ["a", "b"] {
        let out_dir = tmp.path().join(sub);
        let o = dpcnn(&["gen-data", "--config", cfg.to_str().unwrap(), "--out", out_dir.to_str().unwrap()]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        let text = stdout(&o);
        assert_eq!(field(&text, "objects"), "20");
        assert_eq!(field(&text, "leds"), "25");
        assert!(field(&text, "noise reference").parse::<f64>().unwrap() > 0.0);
        files.push(PathBuf::from(field(&text, "wrote")));
    }
    let ds = dpcnn_data::load_dataset(&files[0]).unwrap();
    assert_eq!(ds.len(), 20);
    assert!(ds.examples.iter().all(|e| e.images.len() == 25 * 28 * 28));
    assert_eq!(std::fs::read(&files[0]).unwrap(), std::fs::read(&files[1]).unwrap());
    // the run directory name depends only on the resolved configuration
    assert_eq!(files[0].parent().unwrap().file_name(), files[1].parent().unwrap().file_name());
}

#[test]
fn config_is_echoed_byte_for_byte() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_config(tmp.path(), "");
    let out_dir = tmp.path().join("out");
    let o = dpcnn(&["train", "--strategy", "center", "--config", cfg.to_str().unwrap(), "--out", out_dir.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let dir = run_dir(&stdout(&o));
    assert_eq!(std::fs::read(dir.join("config.toml")).unwrap(), std::fs::read(&cfg).unwrap());
    let resolved = RunConfig::parse(&std::fs::read_to_string(dir.join("resolved.toml")).unwrap()).unwrap();
    assert_eq!(resolved.data.count, 20);
    assert_eq!(resolved.run.strategy, dpcnn_core::Strategy::Center);
    assert_eq!(resolved.run.out, out_dir);
}

#[test]
fn center_training_leaves_weights_alone() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_config(tmp.path(), "");
    let out_dir = tmp.path().join("out");
    let o = dpcnn(&["train", "--strategy", "center", "--config", cfg.to_str().unwrap(), "--out", out_dir.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let acc: f64 = field(&text, "mean accuracy").split_whitespace().next().unwrap().parse().unwrap();
    assert!((0.0..=1.0).contains(&acc));
    let trials = dpcnn_cli::find_trials(&run_dir(&text)).unwrap();
    assert_eq!(trials.len(), 1);
    let m = metrics(&trials[0]);
    let mut one_hot = vec![0.0; 25];
    one_hot[12] = 1.0;
    assert_eq!(m.w, one_hot);
    assert_eq!(m.loss_trace.len(), 10);
    for f in ["model.ck", "pattern.csv", "pattern.pgm", "pattern.sign.pgm"] {
        assert!(trials[0].join(f).is_file(), "{f}");
    }
}

#[test]
fn deterministic_training_repeats_byte_for_byte() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_config(tmp.path(), "");
    let mut dirs = Vec::new();
    for sub in ["a", "b"] {
        let out_dir = tmp.path().join(sub);
        let o = dpcnn(&[
            "train",
            "--strategy",
            "optimized",
            "--deterministic",
            "--seed",
            "7",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out_dir.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        dirs.push(dpcnn_cli::find_trials(&run_dir(&stdout(&o))).unwrap().remove(0));
    }
    for f in ["metrics.json", "model.ck"] {
        assert_eq!(std::fs::read(dirs[0].join(f)).unwrap(), std::fs::read(dirs[1].join(f)).unwrap(), "{f}");
    }
    assert_eq!(metrics(&dirs[0]).seed, 7);
}

#[test]
fn rerun_reuses_artifacts_without_rewriting() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_config(tmp.path(), "");
    let out_dir = tmp.path().join("out");
    let args = ["train", "--strategy", "dpc", "--config", cfg.to_str().unwrap(), "--out", out_dir.to_str().unwrap()];
    let first = dpcnn(&args);
    assert!(first.status.success());
    let trial = dpcnn_cli::find_trials(&run_dir(&stdout(&first))).unwrap().remove(0);
    let before = std::fs::metadata(trial.join("model.ck")).unwrap().modified().unwrap();
    let second = dpcnn(&args);
    assert!(stdout(&second).contains("(reused)"));
    assert_eq!(std::fs::metadata(trial.join("model.ck")).unwrap().modified().unwrap(), before);
}

#[test]
fn sweep_with_one_level_and_two_strategies() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_config(tmp.path(), "strategies = [\"center\", \"dpc\"]\nnoise_levels = [0.1]\n");
    let out_dir = tmp.path().join("out");
    let o = dpcnn(&["sweep", "--config", cfg.to_str().unwrap(), "--out", out_dir.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let dir = run_dir(&stdout(&o));
    let table = ReportTable::from_csv(&std::fs::read_to_string(dir.join("report.csv")).unwrap()).unwrap();
    assert_eq!(table.cells.len(), 2);
    assert_eq!(table.noise_levels, vec![0.1]);
    assert_eq!(table.to_csv(), std::fs::read_to_string(dir.join("report.csv")).unwrap());
    let text = std::fs::read_to_string(dir.join("report.txt")).unwrap();
    let header = text.lines().nth(1).unwrap();
    assert!(header.find("Center").unwrap() < header.find("DPC").unwrap());
    for c in &table.cells {
        assert_eq!((c.trials, c.failed), (1, 0));
        // a single trial is its own majority
        assert_eq!(c.mean, c.majority);
    }
}

#[test]
fn export_single_trial_and_group_statistics() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_config(tmp.path(), "");
    let out_dir = tmp.path().join("out");

    let o = dpcnn(&["train", "--strategy", "random", "--config", cfg.to_str().unwrap(), "--out", out_dir.to_str().unwrap()]);
    let single = run_dir(&stdout(&o));
    let e = dpcnn(&["export", single.to_str().unwrap()]);
    assert!(e.status.success(), "{}", String::from_utf8_lossy(&e.stderr));
    let mut files: Vec<String> = std::fs::read_dir(single.join("export"))
        .unwrap()
        .map(|d| d.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    files.sort();
    let want = ["random-sigma0-seed0.csv", "random-sigma0-seed0.pgm", "random-sigma0-seed0.sign.pgm", "random-sigma0-seed0.stats.json"];
    assert_eq!(files, want);

    // several random-signed trials: mean equals the element-wise mean of the exported CSVs
    let o = dpcnn(&[
        "train",
        "--strategy",
        "random",
        "--trials",
        "4",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    let multi = run_dir(&stdout(&o));
    assert!(dpcnn(&["export", multi.to_str().unwrap()]).status.success());
    let export = multi.join("export");
    let group = "random-sigma0";
    let patterns: Vec<Vec<f64>> = (0..4)
        .map(|s| parse_pattern_csv(&export.join(format!("{group}-seed{s}.csv"))).unwrap())
        .collect();
    let mean = parse_pattern_csv(&export.join(format!("{group}-mean.csv"))).unwrap();
    let var = parse_pattern_csv(&export.join(format!("{group}-variance.csv"))).unwrap();
    for l in 0..25 {
        let m = patterns.iter().map(|p| p[l]).sum::<f64>() / 4.0;
        let v = patterns.iter().map(|p| (p[l] - m).powi(2)).sum::<f64>() / 4.0;
        assert!((mean[l] - m).abs() < 1e-12, "led {l}: {} vs {m}", mean[l]);
        assert!((var[l] - v).abs() < 1e-12, "led {l}");
    }
    for p in &patterns {
        let peak = p.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        assert_eq!(peak, 1.0);
        assert!(p.iter().any(|&v| v == 1.0), "canonical sign puts +1 at the peak");
    }
}

#[test]
fn identical_patterns_give_a_zero_variance_map() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_config(tmp.path(), "");
    // 14 one-iteration center trials all carry the same one-hot pattern
    let text = std::fs::read_to_string(&cfg).unwrap().replace("iterations = 10", "iterations = 1");
    std::fs::write(&cfg, text).unwrap();
    let out_dir = tmp.path().join("out");
    let o = dpcnn(&[
        "train",
        "--strategy",
        "center",
        "--trials",
        "14",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let dir = run_dir(&stdout(&o));
    assert!(dpcnn(&["export", dir.to_str().unwrap()]).status.success());
    let var = parse_pattern_csv(&dir.join("export/center-sigma0-variance.csv")).unwrap();
    assert!(var.iter().all(|&v| v == 0.0));
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(dpcnn(&["no-such-verb"]).status.code(), Some(2));
    assert_eq!(dpcnn(&["train", "--trials", "many"]).status.code(), Some(2));
    let bad = tmp.path().join("bad.toml");
    std::fs::write(&bad, "[train]\nstep_size = -1.0\n").unwrap();
    assert_eq!(dpcnn(&["train", "--config", bad.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(dpcnn(&["train", "--config", "/nonexistent.toml"]).status.code(), Some(2));
    let o = dpcnn(&["export", tmp.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("missing artifact"));
    assert_eq!(dpcnn(&["--help"]).status.code(), Some(0));
}

#[test]
fn selftest_passes_and_names_a_corrupted_property() {
    let o = dpcnn(&["selftest"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert_eq!(stdout(&o).lines().filter(|l| l.starts_with("PASS ")).count(), 9);
    let o = dpcnn(&["selftest", "--corrupt", "pupil-symmetry"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("FAIL pupil-symmetry"));
    assert!(String::from_utf8_lossy(&o.stderr).contains("pupil-symmetry"));
}
