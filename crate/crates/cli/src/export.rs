//! Pattern export for a finished run: per-trial patterns after sign
//! canonicalization and max-abs normalization, plus mean and variance maps
//! for every group of trials sharing a strategy and noise level.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use dpcnn_core::{canonicalize_sign, export_pattern, pattern_stats, PatternStats, TrialMetrics};
use dpcnn_optics::LedArray;
use serde::Serialize;

use crate::config::load_resolved;
use crate::error::{io_err, CliError, Result};
use crate::run::find_trials;

pub const EXPORT_DIR: &str = "export";

#[derive(Debug, Serialize)]
struct TrialStats<'a> {
    trial: &'a str,
    accuracy: f64,
    raw: &'a [f64],
    normalized: &'a [f64],
    #[serde(flatten)]
    stats: PatternStats,
}

#[derive(Debug, Serialize)]
struct GroupStats<'a> {
    group: &'a str,
    trials: usize,
    mean: &'a [f64],
    variance: &'a [f64],
    #[serde(skip_serializing_if = "Option::is_none")]
    mean_stats: Option<PatternStats>,
}

/// `canonicalize_sign(w)` scaled so the largest magnitude is 1.
pub fn normalized_pattern(w: &[f64]) -> Result<Vec<f64>> {
    let c = canonicalize_sign(w)?;
    let max = c.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    Ok(c.iter().map(|v| v / max).collect())
}

/// Element-wise mean and population variance. The mean is accumulated as an
/// offset from the first pattern, so identical patterns give zero variance
/// exactly.
pub fn mean_and_variance(patterns: &[Vec<f64>]) -> (Vec<f64>, Vec<f64>) {
    let n = patterns.len() as f64;
    let first = &patterns[0];
    let mean: Vec<f64> = (0..first.len())
        .map(|i| first[i] + patterns.iter().map(|p| p[i] - first[i]).sum::<f64>() / n)
        .collect();
    let var = (0..first.len())
        .map(|i| patterns.iter().map(|p| (p[i] - mean[i]).powi(2)).sum::<f64>() / n)
        .collect();
    (mean, var)
}

pub struct ExportSummary {
    pub dir: PathBuf,
    pub trials: usize,
    pub groups: usize,
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Failed(e.to_string()))?;
    std::fs::write(path, text + "\n").map_err(io_err(path))
}

fn load_metrics(dir: &Path) -> Result<TrialMetrics> {
    let path = dir.join(dpcnn_core::METRICS_FILE);
    let text = std::fs::read_to_string(&path).map_err(io_err(&path))?;
    serde_json::from_str(&text).map_err(|e| CliError::Config {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

/// Writes into `<run_dir>/export/`: for each trial `<group>-<seed>.{csv,pgm,sign.pgm,stats.json}`,
/// and for each group with several trials `<group>-mean.*`, `<group>-variance.*`
/// and `<group>.stats.json`.
pub fn cmd_export(run_dir: &Path) -> Result<ExportSummary> {
    let config = load_resolved(run_dir)?;
    let array: LedArray = config.generation()?.layout.build(config.data.na)?;
    let trials = find_trials(run_dir)?;
    if trials.is_empty() {
        return Err(CliError::Missing(format!("no finished trials under {}", run_dir.display())));
    }
    let out = run_dir.join(EXPORT_DIR);
    std::fs::create_dir_all(&out).map_err(io_err(&out))?;
    let mut groups: BTreeMap<String, Vec<Vec<f64>>> = BTreeMap::new();
    for dir in &trials {
        let metrics = load_metrics(dir)?;
        let group = dir
            .parent()
            .and_then(Path::file_name)
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        let seed = dir.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        let name = format!("{group}-{seed}");
        let normalized = normalized_pattern(&metrics.w)?;
        export_pattern(&normalized, &array, &out.join(&name))?;
        let stats = TrialStats {
            trial: &name,
            accuracy: metrics.accuracy,
            raw: &metrics.w,
            normalized: &normalized,
            stats: pattern_stats(&normalized, &array)?,
        };
        write_json(&out.join(format!("{name}.stats.json")), &stats)?;
        groups.entry(group).or_default().push(normalized);
    }
    let mut multi = 0;
    for (group, patterns) in &groups {
        if patterns.len() < 2 {
            continue;
        }
        multi += 1;
        let (mean, variance) = mean_and_variance(patterns);
        export_pattern(&mean, &array, &out.join(format!("{group}-mean")))?;
        export_pattern(&variance, &array, &out.join(format!("{group}-variance")))?;
        let stats = GroupStats {
            group,
            trials: patterns.len(),
            mean: &mean,
            variance: &variance,
            mean_stats: pattern_stats(&mean, &array).ok(),
        };
        write_json(&out.join(format!("{group}.stats.json")), &stats)?;
    }
    Ok(ExportSummary {
        dir: out,
        trials: trials.len(),
        groups: multi,
    })
}
