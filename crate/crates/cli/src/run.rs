use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use dpcnn_core::{
    default_input_gain, export_pattern, load_trial, majority_vote, run_trial, CoreError, Strategy, TrainConfig,
    TrialMetrics,
};
use dpcnn_data::{generate_dataset, load_dataset, save_dataset, split_shuffle, Dataset, DatasetHeader, SubImageStack};

use crate::config::{prepare_run_dir, LoadedConfig, RunConfig};
use crate::error::{io_err, CliError, Result};
use crate::report::{Cell, ReportTable};

pub const DATASET_FILE: &str = "dataset.ds";
pub const REPORT_CSV: &str = "report.csv";
pub const REPORT_TEXT: &str = "report.txt";
const FAILURE_FILE: &str = "error.txt";

/// The configured dataset, loaded from `data.path` or rendered in memory.
pub fn acquire_dataset(config: &RunConfig) -> Result<Dataset> {
    match &config.data.path {
        Some(p) => Ok(load_dataset(p)?),
        None => Ok(generate_dataset(&config.generation()?)?),
    }
}

pub struct Split {
    pub header: DatasetHeader,
    pub train: Vec<SubImageStack>,
    pub test: Vec<SubImageStack>,
}

/// Seeded shuffle into `train_count` training and remaining test examples.
pub fn split_dataset(ds: Dataset, config: &RunConfig) -> Result<Split> {
    let n = ds.len();
    let n_train = config.data.train_count;
    if !(n_train > 0 && n_train < n) {
        return Err(CliError::Usage(format!("train_count {n_train} must lie in (0, {n}) for this dataset")));
    }
    let header = ds.header;
    let (train, test) = split_shuffle(ds.examples, n_train as f64 / n as f64, config.data.seed)?;
    Ok(Split { header, train, test })
}

/// Training settings for one trial of a cell.
pub fn trial_config(config: &RunConfig, header: &DatasetHeader, sigma: f64, k: usize) -> TrainConfig {
    let mut t = config.train.clone();
    t.seed = config.train.seed + k as u64;
    t.noise_sigma = sigma;
    if config.run.auto_gain {
        t.input_gain = default_input_gain(header);
    }
    t
}

pub fn trial_dir(run_dir: &Path, strategy: Strategy, sigma: f64, seed: u64) -> PathBuf {
    run_dir
        .join("trials")
        .join(format!("{}-sigma{sigma}", strategy.name()))
        .join(format!("seed{seed}"))
}

/// Trains and evaluates one trial, or reuses the artifacts already in `dir`.
/// Returns the metrics and whether they were reused.
pub fn run_or_reuse(split: &Split, strategy: Strategy, config: &TrainConfig, dir: &Path) -> Result<(TrialMetrics, bool)> {
    if let Ok(done) = load_trial(dir) {
        if done.metrics.config == *config && done.metrics.strategy == strategy {
            return Ok((done.metrics, true));
        }
    }
    let classes = split.header.class_count;
    let result = match run_trial(&split.train, &split.test, classes, &split.header.array, strategy, config) {
        Ok(r) => r,
        Err(e) => {
            std::fs::create_dir_all(dir).map_err(io_err(dir))?;
            let path = dir.join(FAILURE_FILE);
            std::fs::write(&path, format!("{e}\n")).map_err(io_err(&path))?;
            return Err(e.into());
        }
    };
    result.save(dir)?;
    export_pattern(&result.metrics.w, &split.header.array, &dir.join("pattern"))?;
    let _ = std::fs::remove_file(dir.join(FAILURE_FILE));
    Ok((result.metrics, false))
}

pub struct GenSummary {
    pub path: PathBuf,
    pub count: usize,
    pub led_count: usize,
    pub noise_reference: f64,
}

pub fn cmd_gen_data(loaded: &LoadedConfig, config: &RunConfig) -> Result<GenSummary> {
    let dir = prepare_run_dir(loaded, config, "gen-data")?;
    let ds = generate_dataset(&config.generation()?)?;
    let path = dir.join(DATASET_FILE);
    save_dataset(&path, &ds)?;
    Ok(GenSummary {
        path,
        count: ds.len(),
        led_count: ds.header.led_count,
        noise_reference: ds.header.noise_reference,
    })
}

pub struct TrainSummary {
    pub run_dir: PathBuf,
    pub trials: Vec<(PathBuf, TrialMetrics)>,
}

/// `run.trials` trials of `run.strategy` on the configured data.
pub fn cmd_train(loaded: &LoadedConfig, config: &RunConfig, log: &mut dyn FnMut(&str)) -> Result<TrainSummary> {
    let run_dir = prepare_run_dir(loaded, config, "train")?;
    let split = split_dataset(acquire_dataset(config)?, config)?;
    let sigma = split.header.sensor.sample_sigma;
    let strategy = config.run.strategy;
    let mut trials = Vec::new();
    for k in 0..config.run.trials {
        let tc = trial_config(config, &split.header, sigma, k);
        let dir = trial_dir(&run_dir, strategy, sigma, tc.seed);
        let (metrics, reused) = run_or_reuse(&split, strategy, &tc, &dir)?;
        log(&format!(
            "{} seed {}: accuracy {:.4}{}",
            strategy.name(),
            tc.seed,
            metrics.accuracy,
            if reused { " (reused)" } else { "" }
        ));
        trials.push((dir, metrics));
    }
    Ok(TrainSummary { run_dir, trials })
}

/// Accuracy of the per-example majority vote over several trials.
pub fn majority_accuracy(trials: &[&TrialMetrics]) -> Result<Option<f64>> {
    let Some(first) = trials.first() else { return Ok(None) };
    if trials.iter().any(|t| t.labels != first.labels) {
        return Err(CliError::Failed("trials were evaluated on different test sets".into()));
    }
    let sets: Vec<Vec<u32>> = trials.iter().map(|t| t.predictions.clone()).collect();
    let votes = majority_vote(&sets)?;
    let hits = votes.iter().zip(&first.labels).filter(|(a, b)| a == b).count();
    Ok(Some(hits as f64 / first.labels.len() as f64))
}

pub struct SweepSummary {
    pub run_dir: PathBuf,
    pub table: ReportTable,
}

/// Every (noise level, strategy) cell with `run.trials` trials each. The
/// dataset for a row is the configured one with `sample_sigma` replaced by the
/// row's σ. Failed trials are logged, excluded and flagged in the table.
pub fn cmd_sweep(loaded: &LoadedConfig, config: &RunConfig, log: &mut (dyn FnMut(&str) + Send)) -> Result<SweepSummary> {
    if config.data.path.is_some() {
        return Err(CliError::Usage("sweep renders one dataset per noise level; unset data.path".into()));
    }
    let run_dir = prepare_run_dir(loaded, config, "sweep")?;
    let strategies = &config.run.strategies;
    let k = config.run.trials;
    let log = Mutex::new(log);
    let mut cells = Vec::new();
    for &sigma in &config.run.noise_levels {
        let mut row_config = config.clone();
        row_config.data.sample_sigma = sigma;
        let split = split_dataset(acquire_dataset(&row_config)?, &row_config)?;
        let tasks: Vec<(Strategy, usize)> = strategies.iter().flat_map(|&s| (0..k).map(move |i| (s, i))).collect();
        let outcomes: Vec<Mutex<Option<std::result::Result<TrialMetrics, String>>>> =
            tasks.iter().map(|_| Mutex::new(None)).collect();
        let next = AtomicUsize::new(0);
        std::thread::scope(|scope| {
            for _ in 0..config.run.jobs.min(tasks.len()) {
                scope.spawn(|| loop {
                    let i = next.fetch_add(1, Ordering::SeqCst);
                    let Some(&(strategy, trial)) = tasks.get(i) else { break };
                    let tc = trial_config(&row_config, &split.header, sigma, trial);
                    let dir = trial_dir(&run_dir, strategy, sigma, tc.seed);
                    let outcome = run_or_reuse(&split, strategy, &tc, &dir);
                    let line = match &outcome {
                        Ok((m, reused)) => format!(
                            "σ={sigma} {} seed {}: accuracy {:.4}{}",
                            strategy.name(),
                            tc.seed,
                            m.accuracy,
                            if *reused { " (reused)" } else { "" }
                        ),
                        Err(e) => format!("σ={sigma} {} seed {}: FAILED {e}", strategy.name(), tc.seed),
                    };
                    (log.lock().unwrap())(&line);
                    *outcomes[i].lock().unwrap() = Some(outcome.map(|(m, _)| m).map_err(|e| e.to_string()));
                });
            }
        });
        for (ci, &strategy) in strategies.iter().enumerate() {
            let results: Vec<_> = outcomes[ci * k..(ci + 1) * k]
                .iter()
                .map(|o| o.lock().unwrap().take().expect("every task ran"))
                .collect();
            let done: Vec<&TrialMetrics> = results.iter().filter_map(|r| r.as_ref().ok()).collect();
            let accuracies: Vec<f64> = done.iter().map(|m| m.accuracy).collect();
            let failed = results.len() - done.len();
            cells.push(Cell::from_accuracies(sigma, strategy, &accuracies, failed, majority_accuracy(&done)?));
        }
    }
    let table = ReportTable::new(config.run.noise_levels.clone(), strategies.clone(), cells).map_err(CliError::Failed)?;
    let csv = run_dir.join(REPORT_CSV);
    std::fs::write(&csv, table.to_csv()).map_err(io_err(&csv))?;
    let txt = run_dir.join(REPORT_TEXT);
    std::fs::write(&txt, table.to_text()).map_err(io_err(&txt))?;
    Ok(SweepSummary { run_dir, table })
}

/// Finished trial directories below `run_dir`, sorted by path.
pub fn find_trials(run_dir: &Path) -> Result<Vec<PathBuf>> {
    fn walk(dir: &Path, out: &mut Vec<PathBuf>) -> std::io::Result<()> {
        for entry in std::fs::read_dir(dir)? {
            let path = entry?.path();
            if path.is_dir() {
                if path.join(dpcnn_core::METRICS_FILE).is_file() {
                    out.push(path.clone());
                }
                walk(&path, out)?;
            }
        }
        Ok(())
    }
    let mut out = Vec::new();
    let root = run_dir.join("trials");
    if root.is_dir() {
        walk(&root, &mut out).map_err(io_err(&root))?;
    }
    out.sort();
    Ok(out)
}

pub fn is_non_finite(e: &CliError) -> bool {
    matches!(e, CliError::Core(CoreError::NonFiniteLoss { .. }))
}
