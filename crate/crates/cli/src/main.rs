use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use adzoom::experiment::{self, AlgorithmChoice, ExperimentConfig};
use adzoom::metric::RepresentativePolicy;
use adzoom::Exec;
use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

/// Adversarial zooming experiments.
#[derive(Parser)]
#[command(name = "adzoom", version)]
struct Cli {
    /// Run seeds one after another instead of in parallel.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write traces, reports and a manifest.
    Run(RunArgs),
    /// Mean regret over a ladder of horizons and its log-log slope.
    Sweep(SweepArgs),
    /// Monte Carlo check of the Lipschitz condition of the environment.
    Audit(AuditArgs),
    /// Covering-dimension fit of the eps-optimal sets of a run.
    Cover(CoverArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Algorithm {
    AdversarialZooming,
    Exp3pUniform,
}

#[derive(Clone, Copy, ValueEnum)]
enum Representative {
    Center,
    LowEndpoint,
}

/// Flags that override keys of the config file.
#[derive(Args)]
struct Overrides {
    /// JSON experiment config.
    #[arg(long, short)]
    config: PathBuf,
    #[arg(long, value_enum)]
    algorithm: Option<Algorithm>,
    #[arg(long)]
    horizon: Option<usize>,
    #[arg(long)]
    anytime_rounds: Option<usize>,
    /// Comma-separated seeds.
    #[arg(long, value_delimiter = ',')]
    seeds: Option<Vec<u64>>,
    /// Relative paths resolve against ADZOOM_OUTPUT_ROOT when it is set.
    #[arg(long)]
    output_dir: Option<String>,
    #[arg(long)]
    record_pi: bool,
    #[arg(long)]
    debug_invariants: bool,
    #[arg(long)]
    grid_eps: Option<f64>,
    #[arg(long, value_enum)]
    representative: Option<Representative>,
    #[arg(long)]
    baseline_eps: Option<f64>,
    #[arg(long, env = "ADZOOM_OUTPUT_ROOT", hide_env_values = true)]
    output_root: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    cfg: Overrides,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    cfg: Overrides,
    /// Comma-separated horizons, at least three.
    #[arg(long, value_delimiter = ',', required = true)]
    horizons: Vec<usize>,
}

#[derive(Args)]
struct AuditArgs {
    #[command(flatten)]
    cfg: Overrides,
    #[arg(long, default_value_t = 200)]
    pairs: usize,
    #[arg(long, default_value_t = adzoom::env::DEFAULT_REPLICAS)]
    replicas: usize,
}

#[derive(Args)]
struct CoverArgs {
    #[command(flatten)]
    cfg: Overrides,
    /// Comma-separated scales, at least three.
    #[arg(long, value_delimiter = ',', default_value = "0.25,0.125,0.0625,0.03125")]
    eps: Vec<f64>,
    /// Leading constant of the eps-optimality threshold.
    #[arg(long)]
    multiplier: Option<f64>,
}

/// Reads a config file or the config embedded in a run's `manifest.json`.
fn read_config(path: &Path) -> Result<ExperimentConfig> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let value: serde_json::Value =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    if let Some(cfg) = value.get("config_hash").and(value.get("config")) {
        return Ok(ExperimentConfig::parse(&cfg.to_string())?);
    }
    Ok(ExperimentConfig::load(path)?)
}

impl Overrides {
    fn resolve(&self) -> Result<ExperimentConfig> {
        let mut cfg = read_config(&self.config)?;
        if let Some(a) = self.algorithm {
            cfg.algorithm = match a {
                Algorithm::AdversarialZooming => AlgorithmChoice::AdversarialZooming,
                Algorithm::Exp3pUniform => AlgorithmChoice::Exp3pUniform,
            };
        }
        if let Some(h) = self.horizon {
            cfg.horizon = Some(h);
            cfg.anytime_rounds = None;
        }
        if let Some(n) = self.anytime_rounds {
            cfg.anytime_rounds = Some(n);
            cfg.horizon = None;
        }
        if let Some(s) = &self.seeds {
            cfg.seeds = s.clone();
        }
        if let Some(d) = &self.output_dir {
            cfg.output_dir = d.clone();
        }
        cfg.record_pi |= self.record_pi;
        cfg.debug_invariants |= self.debug_invariants;
        if self.grid_eps.is_some() {
            cfg.grid_eps = self.grid_eps;
        }
        if let Some(r) = self.representative {
            cfg.representative = Some(match r {
                Representative::Center => RepresentativePolicy::Center,
                Representative::LowEndpoint => RepresentativePolicy::LowEndpoint,
            });
        }
        if self.baseline_eps.is_some() {
            cfg.baseline_eps = self.baseline_eps;
        }
        if let Some(root) = &self.output_root {
            if Path::new(&cfg.output_dir).is_relative() {
                cfg.output_dir = root.join(&cfg.output_dir).display().to_string();
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn write_report<T: serde::Serialize>(cfg: &ExperimentConfig, name: &str, report: &T) -> Result<()> {
    let json = serde_json::to_string_pretty(report)?;
    println!("{json}");
    if !cfg.output_dir.is_empty() {
        let dir = Path::new(&cfg.output_dir);
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        let path = dir.join(name);
        fs::write(&path, json + "\n").with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

fn main_inner(cli: Cli) -> Result<ExitCode> {
    let exec = if cli.sequential { Exec::Sequential } else { Exec::default() };
    match cli.command {
        Command::Run(a) => {
            let cfg = a.cfg.resolve()?;
            if cfg.output_dir.is_empty() {
                bail!("output_dir is empty");
            }
            let summary = experiment::run(&cfg, exec)?;
            for f in &summary.files {
                println!("{}", summary.output_dir.join(f).display());
            }
            eprintln!(
                "mean regret {:.3} over {} seed(s)",
                summary.aggregate.mean_regret,
                summary.aggregate.seeds.len()
            );
            if cfg.debug_invariants && summary.violations > 0 {
                eprintln!("{} invariant violation(s)", summary.violations);
                return Ok(ExitCode::from(2));
            }
        }
        Command::Sweep(a) => {
            let mut cfg = a.cfg.resolve()?;
            if cfg.anytime_rounds.is_some() {
                cfg.anytime_rounds = None;
                cfg.horizon = Some(a.horizons[0]);
            }
            let report = experiment::sweep(&cfg, &a.horizons, exec)?;
            write_report(&cfg, "sweep.json", &report)?;
            if cfg.debug_invariants && report.violations > 0 {
                eprintln!("{} invariant violation(s)", report.violations);
                return Ok(ExitCode::from(2));
            }
        }
        Command::Audit(a) => {
            let cfg = a.cfg.resolve()?;
            let report = experiment::audit(&cfg, a.pairs, a.replicas, exec)?;
            write_report(&cfg, "audit.json", &report)?;
            eprintln!("{} flagged pair(s) out of {}", report.flags.len(), report.pairs);
        }
        Command::Cover(a) => {
            let cfg = a.cfg.resolve()?;
            let report = experiment::cover(&cfg, &a.eps, a.multiplier, exec)?;
            write_report(&cfg, "cover.json", &report)?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match main_inner(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
