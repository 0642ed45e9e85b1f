use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use dpcnn_cli::config::RunConfig;
use dpcnn_cli::{cmd_export, cmd_gen_data, cmd_selftest, cmd_sweep, cmd_train, CliError, LoadedConfig};
use dpcnn_core::Strategy;

#[derive(Parser)]
#[command(name = "dpcnn", version, about = "Jointly learned LED illumination and CNN classification of simulated phase digits")]
struct Cli {
    /// TOML run configuration; defaults are used for anything it omits.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Sets both the data seed and the base training seed.
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,
    /// Root directory for run directories.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Record and require bit-reproducible training.
    #[arg(long, global = true)]
    deterministic: bool,
    /// Independent trials per cell.
    #[arg(long, global = true, value_name = "K")]
    trials: Option<usize>,
    /// Concurrent trials within a sweep.
    #[arg(long, global = true, value_name = "N")]
    jobs: Option<usize>,
    /// 50,000 / 10,000 objects and 50,000 iterations.
    #[arg(long, global = true)]
    full_scale: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Render the configured dataset into a container file.
    GenData,
    /// Train and evaluate one strategy.
    Train {
        #[arg(long, value_parser = parse_strategy)]
        strategy: Option<Strategy>,
        /// Existing dataset container instead of rendering one.
        #[arg(long, value_name = "FILE")]
        data: Option<PathBuf>,
    },
    /// Every strategy at every noise level, summarized as a table.
    Sweep,
    /// Sign-canonical patterns, statistics, mean and variance maps of a run.
    Export { run_dir: PathBuf },
    /// Fast invariant checks; exit 0 iff all pass.
    Selftest {
        #[arg(long, hide = true)]
        corrupt: Option<String>,
    },
}

fn parse_strategy(s: &str) -> Result<Strategy, String> {
    s.parse().map_err(|e: dpcnn_core::CoreError| e.to_string())
}

fn resolve(cli: &Cli, loaded: &LoadedConfig) -> Result<RunConfig, CliError> {
    let mut c = loaded.config.clone();
    if cli.full_scale {
        c.full_scale();
    }
    if let Some(seed) = cli.seed {
        c.data.seed = seed;
        c.train.seed = seed;
    }
    if let Some(out) = &cli.out {
        c.run.out = out.clone();
    }
    if cli.deterministic {
        c.train.deterministic = true;
    }
    if let Some(k) = cli.trials {
        c.run.trials = k;
    }
    if let Some(j) = cli.jobs {
        c.run.jobs = j;
    }
    if let Command::Train { strategy, data } = &cli.command {
        if let Some(s) = strategy {
            c.run.strategy = *s;
        }
        if let Some(d) = data {
            c.data.path = Some(d.clone());
        }
    }
    c.validate().map_err(CliError::Usage)?;
    Ok(c)
}

fn run(cli: Cli) -> Result<(), CliError> {
    let mut print = |line: &str| println!("{line}");
    match &cli.command {
        Command::Selftest { corrupt } => {
            return cmd_selftest(corrupt.as_deref(), &mut print)
                .map_err(|name| CliError::Failed(format!("property failed: {name}")));
        }
        Command::Export { run_dir } => {
            let s = cmd_export(run_dir)?;
            println!("exported {} trials ({} mean/variance groups) to {}", s.trials, s.groups, s.dir.display());
            return Ok(());
        }
        _ => {}
    }
    let loaded = LoadedConfig::load(cli.config.as_deref())?;
    let config = resolve(&cli, &loaded)?;
    match &cli.command {
        Command::GenData => {
            let s = cmd_gen_data(&loaded, &config)?;
            println!("objects {}", s.count);
            println!("leds {}", s.led_count);
            println!("noise reference {}", s.noise_reference);
            println!("wrote {}", s.path.display());
        }
        Command::Train { .. } => {
            let s = cmd_train(&loaded, &config, &mut print)?;
            let accs: Vec<f64> = s.trials.iter().map(|(_, m)| m.accuracy).collect();
            println!("mean accuracy {:.4} over {} trials", accs.iter().sum::<f64>() / accs.len() as f64, accs.len());
            println!("run directory {}", s.run_dir.display());
        }
        Command::Sweep => {
            let s = cmd_sweep(&loaded, &config, &mut |line: &str| println!("{line}"))?;
            print!("{}", s.table.to_text());
            println!("run directory {}", s.run_dir.display());
            if s.table.cells.iter().any(|c| c.failed > 0) {
                return Err(CliError::Failed("some trials failed".into()));
            }
        }
        Command::Export { .. } | Command::Selftest { .. } => unreachable!(),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
