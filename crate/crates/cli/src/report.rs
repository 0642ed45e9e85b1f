//! Sweep summary: one row per noise level, one column per strategy.

use std::fmt::Write as _;
use std::str::FromStr;

use dpcnn_core::Strategy;

#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub sigma: f64,
    pub strategy: Strategy,
    /// Trials that finished.
    pub trials: usize,
    /// Trials that aborted; they are excluded from the statistics.
    pub failed: usize,
    pub mean: Option<f64>,
    pub std: Option<f64>,
    /// Accuracy of the per-example majority vote across the finished trials.
    pub majority: Option<f64>,
}

impl Cell {
    /// Summary of the finished trials' accuracies. `std` is the sample
    /// standard deviation (0 for a single trial).
    pub fn from_accuracies(
        sigma: f64,
        strategy: Strategy,
        accuracies: &[f64],
        failed: usize,
        majority: Option<f64>,
    ) -> Cell {
        let n = accuracies.len();
        let mean = (n > 0).then(|| accuracies.iter().sum::<f64>() / n as f64);
        let std = mean.map(|m| {
            if n < 2 {
                0.0
            } else {
                (accuracies.iter().map(|a| (a - m).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
            }
        });
        Cell {
            sigma,
            strategy,
            trials: n,
            failed,
            mean,
            std,
            majority,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportTable {
    pub noise_levels: Vec<f64>,
    pub strategies: Vec<Strategy>,
    /// Row-major: `cells[row * strategies.len() + column]`.
    pub cells: Vec<Cell>,
}

pub const CSV_HEADER: &str = "sigma,strategy,trials,failed,mean,std,majority";

impl ReportTable {
    pub fn new(noise_levels: Vec<f64>, strategies: Vec<Strategy>, cells: Vec<Cell>) -> Result<Self, String> {
        let table = ReportTable {
            noise_levels,
            strategies,
            cells,
        };
        table.check()?;
        Ok(table)
    }

    fn check(&self) -> Result<(), String> {
        let cols = self.strategies.len();
        if self.cells.len() != self.noise_levels.len() * cols {
            return Err(format!(
                "{} cells for {}×{} table",
                self.cells.len(),
                self.noise_levels.len(),
                cols
            ));
        }
        for (i, c) in self.cells.iter().enumerate() {
            if c.sigma != self.noise_levels[i / cols] || c.strategy != self.strategies[i % cols] {
                return Err(format!("cell {i} is out of row/column order"));
            }
            for v in [c.mean, c.majority].into_iter().flatten() {
                if !(0.0..=1.0).contains(&v) {
                    return Err(format!("cell {i} accuracy {v} outside [0, 1]"));
                }
            }
        }
        Ok(())
    }

    pub fn cell(&self, sigma_row: usize, strategy: Strategy) -> Option<&Cell> {
        let col = self.strategies.iter().position(|&s| s == strategy)?;
        self.cells.get(sigma_row * self.strategies.len() + col)
    }

    /// Floats are written in shortest round-trip form; empty fields mean
    /// no finished trial.
    pub fn to_csv(&self) -> String {
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        let mut out = format!("{CSV_HEADER}\n");
        for c in &self.cells {
            writeln!(
                out,
                "{},{},{},{},{},{},{}",
                c.sigma,
                c.strategy.name(),
                c.trials,
                c.failed,
                opt(c.mean),
                opt(c.std),
                opt(c.majority)
            )
            .unwrap();
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self, String> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        if lines.next().map(str::trim) != Some(CSV_HEADER) {
            return Err("missing report header".into());
        }
        let mut cells = Vec::new();
        for (i, line) in lines.enumerate() {
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 7 {
                return Err(format!("row {}: expected 7 fields", i + 1));
            }
            let bad = |what: &str| format!("row {}: bad {what}", i + 1);
            let opt = |s: &str, what: &str| -> Result<Option<f64>, String> {
                if s.is_empty() {
                    Ok(None)
                } else {
                    s.parse().map(Some).map_err(|_| bad(what))
                }
            };
            cells.push(Cell {
                sigma: f[0].parse().map_err(|_| bad("sigma"))?,
                strategy: Strategy::from_str(f[1]).map_err(|_| bad("strategy"))?,
                trials: f[2].parse().map_err(|_| bad("trial count"))?,
                failed: f[3].parse().map_err(|_| bad("failure count"))?,
                mean: opt(f[4], "mean")?,
                std: opt(f[5], "std")?,
                majority: opt(f[6], "majority")?,
            });
        }
        let mut noise_levels: Vec<f64> = Vec::new();
        let mut strategies: Vec<Strategy> = Vec::new();
        for c in &cells {
            if !noise_levels.contains(&c.sigma) {
                noise_levels.push(c.sigma);
            }
            if !strategies.contains(&c.strategy) {
                strategies.push(c.strategy);
            }
        }
        ReportTable::new(noise_levels, strategies, cells)
    }

    /// Aligned text in the column order of the strategies, with blocks for
    /// mean, standard deviation and majority-vote accuracy. Cells with failed
    /// trials carry a `*`.
    pub fn to_text(&self) -> String {
        let label_width = 18;
        let col_width = 11;
        let mut out = String::new();
        let blocks: [(&str, fn(&Cell) -> Option<f64>); 3] = [
            ("Mean accuracy", |c| c.mean),
            ("Standard deviation", |c| c.std),
            ("Majority vote", |c| c.majority),
        ];
        for (title, get) in blocks {
            writeln!(out, "{title}").unwrap();
            write!(out, "{:<label_width$}", "Noise level").unwrap();
            for s in &self.strategies {
                write!(out, "{:>col_width$}", s.title()).unwrap();
            }
            out.push('\n');
            for (row, sigma) in self.noise_levels.iter().enumerate() {
                let label = if *sigma == 0.0 { "None (σ=0)".to_string() } else { format!("σ={sigma}") };
                // pad by characters, σ is multi-byte
                let pad = label_width.saturating_sub(label.chars().count());
                write!(out, "{label}{}", " ".repeat(pad)).unwrap();
                for col in 0..self.strategies.len() {
                    let c = &self.cells[row * self.strategies.len() + col];
                    let mark = if c.failed > 0 { "*" } else { "" };
                    let text = get(c).map_or("-".to_string(), |v| format!("{v:.4}{mark}"));
                    write!(out, "{text:>col_width$}").unwrap();
                }
                out.push('\n');
            }
            out.push('\n');
        }
        if self.cells.iter().any(|c| c.failed > 0) {
            writeln!(out, "* some trials in this cell failed and are excluded").unwrap();
        }
        let k = self.cells.iter().map(|c| c.trials + c.failed).max().unwrap_or(0);
        writeln!(out, "trials per cell: {k}").unwrap();
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table() -> ReportTable {
        let strategies = vec![Strategy::Center, Strategy::Optimized];
        let cells = vec![
            Cell::from_accuracies(0.0, Strategy::Center, &[0.3, 0.4], 0, Some(0.35)),
            Cell::from_accuracies(0.0, Strategy::Optimized, &[0.9], 1, Some(0.9)),
            Cell::from_accuracies(0.1, Strategy::Center, &[], 2, None),
            Cell::from_accuracies(0.1, Strategy::Optimized, &[0.1 + 0.2, 1.0 / 3.0], 0, Some(0.5)),
        ];
        ReportTable::new(vec![0.0, 0.1], strategies, cells).unwrap()
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let t = table();
        assert_eq!(ReportTable::from_csv(&t.to_csv()).unwrap(), t);
    }

    #[test]
    fn cell_statistics() {
        let c = Cell::from_accuracies(0.0, Strategy::All, &[0.5, 0.7, 0.9], 0, None);
        assert!((c.mean.unwrap() - 0.7).abs() < 1e-15);
        assert!((c.std.unwrap() - 0.2).abs() < 1e-15);
        assert_eq!(Cell::from_accuracies(0.0, Strategy::All, &[0.5], 0, None).std, Some(0.0));
    }

    #[test]
    fn text_marks_failures_and_keeps_order() {
        let text = table().to_text();
        assert!(text.contains("0.3500"));
        assert!(text.contains("0.9000*"));
        let header = text.lines().nth(1).unwrap();
        assert!(header.find("Center").unwrap() < header.find("Optimized").unwrap());
    }

    #[test]
    fn inconsistent_tables_are_rejected() {
        let mut t = table();
        t.cells.pop();
        assert!(ReportTable::new(t.noise_levels, t.strategies, t.cells).is_err());
        assert!(ReportTable::from_csv("sigma,strategy\n").is_err());
    }
}
