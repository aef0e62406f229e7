//! Experiment configs, per-seed runs, sweeps and on-disk artifacts.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::algo::{check_assumptions, run_anytime, AlgConfig, AlgError, AssumptionReport, Trace};
use crate::baselines::{default_grid_eps, discretize, Exp3PParams, Exp3PState};
use crate::env::{lipschitz_audit, AuditReport, EnvError, EnvSpec, Environment};
use crate::eval::{
    covering_count, default_regret_grid_eps, dimension_fit, eps_optimal_set, evaluation_grid, least_squares,
    monitor, regret, CoverReport, EpsOptimalParams, EvalError, RegretReport, Violation,
    EPS_OPTIMAL_MULTIPLIER,
};
use crate::metric::{ActionSpace, FiniteMetricSpace, MetricError, RepresentativePolicy};
use crate::parallel::Exec;
use crate::rng::derive_seed;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("config: {0}")]
    Config(String),
    #[error("{path}: {msg}")]
    Io { path: String, msg: String },
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error(transparent)]
    Alg(#[from] AlgError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> ExperimentError {
    ExperimentError::Io { path: path.display().to_string(), msg: e.to_string() }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlgorithmChoice {
    AdversarialZooming,
    Exp3pUniform,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum SpaceSpec {
    Cube {
        d: usize,
    },
    /// Distance-matrix file: `n`, then `n` rows of `n` distances.
    Finite {
        path: String,
        #[serde(default = "one")]
        covering_dim: f64,
    },
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub algorithm: AlgorithmChoice,
    pub space: SpaceSpec,
    pub environment: EnvSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<usize>,
    /// Run under the doubling trick for this many rounds instead of a
    /// fixed horizon.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub anytime_rounds: Option<usize>,
    pub seeds: Vec<u64>,
    pub output_dir: String,
    #[serde(default)]
    pub record_pi: bool,
    #[serde(default)]
    pub debug_invariants: bool,
    /// Regret evaluation grid; defaults by dimension and horizon.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_eps: Option<f64>,
    /// Defaults to the cell's low endpoint for pricing, its center otherwise.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub representative: Option<RepresentativePolicy>,
    /// Baseline discretization; defaults to `T^(-1/(d+2))`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub baseline_eps: Option<f64>,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, ExperimentError> {
        let cfg: ExperimentConfig = serde_json::from_str(text)
            .map_err(|e| ExperimentError::Config(format!("line {}, column {}: {e}", e.line(), e.column())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ExperimentError> {
        let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
        Self::parse(&text).map_err(|e| match e {
            ExperimentError::Config(m) => ExperimentError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        match (self.horizon, self.anytime_rounds) {
            (Some(0), _) | (_, Some(0)) => {
                return Err(ExperimentError::Config("horizon must be at least 1".into()))
            }
            (Some(_), Some(_)) => {
                return Err(ExperimentError::Config("set either horizon or anytime_rounds, not both".into()))
            }
            (None, None) => {
                return Err(ExperimentError::Config("one of horizon or anytime_rounds is required".into()))
            }
            _ => {}
        }
        if self.seeds.is_empty() {
            return Err(ExperimentError::Config("seeds must not be empty".into()));
        }
        if let SpaceSpec::Cube { d: 0 } = self.space {
            return Err(ExperimentError::Config("space.d must be at least 1".into()));
        }
        if self.anytime_rounds.is_some() && self.algorithm == AlgorithmChoice::Exp3pUniform {
            return Err(ExperimentError::Config("anytime_rounds needs adversarial_zooming".into()));
        }
        for (key, v) in [("grid_eps", self.grid_eps), ("baseline_eps", self.baseline_eps)] {
            if let Some(e) = v {
                if !(e > 0.0 && e <= 1.0) {
                    return Err(ExperimentError::Config(format!("{key} must lie in (0, 1]")));
                }
            }
        }
        Ok(())
    }

    /// Rounds played per seed.
    pub fn rounds(&self) -> usize {
        self.horizon.or(self.anytime_rounds).unwrap_or(0)
    }

    /// Hex SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serializes");
        hex::encode(Sha256::digest(canonical.as_bytes()))
    }

    pub fn build_space(&self) -> Result<ActionSpace, ExperimentError> {
        Ok(match &self.space {
            SpaceSpec::Cube { d } => ActionSpace::cube(*d)?,
            SpaceSpec::Finite { path, covering_dim } => {
                ActionSpace::finite(FiniteMetricSpace::load(Path::new(path))?, *covering_dim)
            }
        })
    }

    pub fn representative_policy(&self) -> RepresentativePolicy {
        self.representative.unwrap_or(if self.environment.is_pricing() {
            RepresentativePolicy::LowEndpoint
        } else {
            RepresentativePolicy::Center
        })
    }

    pub fn with_horizon(&self, horizon: usize) -> Self {
        ExperimentConfig { horizon: Some(horizon), anytime_rounds: None, ..self.clone() }
    }
}

pub const ENV_STREAM: u64 = 1;
pub const ALG_STREAM: u64 = 2;

/// Everything produced by one seed.
#[derive(Debug, Clone)]
pub struct SeedOutcome {
    pub seed: u64,
    pub trace: Trace,
    pub regret: RegretReport,
    pub violations: Vec<Violation>,
    pub assumptions: Vec<AssumptionReport>,
}

pub fn build_env(
    cfg: &ExperimentConfig,
    space: &ActionSpace,
    seed: u64,
) -> Result<Environment, ExperimentError> {
    Ok(cfg.environment.build(space, cfg.rounds(), derive_seed(seed, ENV_STREAM))?)
}

/// Plays one seed and evaluates it; `exec` drives the regret replay.
pub fn run_seed(
    cfg: &ExperimentConfig,
    space: &ActionSpace,
    seed: u64,
    exec: Exec,
) -> Result<SeedOutcome, ExperimentError> {
    let env = build_env(cfg, space, seed)?;
    let alg_seed = derive_seed(seed, ALG_STREAM);
    let record_pi = cfg.record_pi || cfg.debug_invariants;
    let trace = match cfg.algorithm {
        AlgorithmChoice::AdversarialZooming => {
            let mut ac = AlgConfig::new(cfg.rounds(), alg_seed);
            ac.representative = cfg.representative_policy();
            ac.record_pi = record_pi;
            match cfg.anytime_rounds {
                Some(n) => run_anytime(space, &env, &ac, n)?,
                None => Trace::single(crate::algo::run(space, &env, ac)?),
            }
        }
        AlgorithmChoice::Exp3pUniform => {
            let horizon = cfg.rounds();
            let d = match space {
                ActionSpace::Cube { d } => *d,
                ActionSpace::Finite(_) => 1,
            };
            let eps = cfg.baseline_eps.unwrap_or_else(|| default_grid_eps(horizon, d));
            let arms = discretize(space, eps)?;
            let params = Exp3PParams::standard(arms.len(), horizon);
            let mut s = Exp3PState::new(arms, eps, horizon, alg_seed, params)?.with_record_pi(record_pi);
            while !s.is_done() {
                s.step(&env)?;
            }
            Trace::single(s.into_phase(space))
        }
    };
    let grid_eps = cfg.grid_eps.unwrap_or_else(|| default_regret_grid_eps(space, cfg.rounds()));
    let regret = regret(&trace, &env, grid_eps, exec)?;
    let (violations, assumptions) = if cfg.debug_invariants {
        (monitor(&trace), trace.phases.iter().map(check_assumptions).collect())
    } else {
        (Vec::new(), Vec::new())
    };
    Ok(SeedOutcome { seed, trace, regret, violations, assumptions })
}

/// Runs every seed of `cfg`, seeds in parallel under `exec`.
pub fn run_seeds(cfg: &ExperimentConfig, exec: Exec) -> Result<Vec<SeedOutcome>, ExperimentError> {
    cfg.validate()?;
    let space = cfg.build_space()?;
    exec.map(&cfg.seeds, |&s| run_seed(cfg, &space, s, Exec::Sequential)).into_iter().collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Aggregate {
    pub seeds: Vec<u64>,
    pub regrets: Vec<f64>,
    pub mean_regret: f64,
    pub std_regret: f64,
}

pub fn aggregate(outcomes: &[SeedOutcome]) -> Aggregate {
    let regrets: Vec<f64> = outcomes.iter().map(|o| o.regret.regret).collect();
    let (mean, std) = mean_std(&regrets);
    Aggregate {
        seeds: outcomes.iter().map(|o| o.seed).collect(),
        regrets,
        mean_regret: mean,
        std_regret: std,
    }
}

/// Sample mean and standard deviation (`n - 1` denominator).
pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = if xs.len() > 1 { xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0) } else { 0.0 };
    (mean, var.sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Manifest {
    pub config_hash: String,
    pub config: ExperimentConfig,
    pub seeds: Vec<u64>,
    pub files: Vec<String>,
    pub version: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub output_dir: PathBuf,
    pub files: Vec<String>,
    pub violations: usize,
    pub aggregate: Aggregate,
}

fn write_file(dir: &Path, name: &str, bytes: &[u8]) -> Result<String, ExperimentError> {
    let path = dir.join(name);
    let mut f = fs::File::create(&path).map_err(|e| io_err(&path, e))?;
    f.write_all(bytes).map_err(|e| io_err(&path, e))?;
    Ok(name.to_string())
}

fn json<T: Serialize>(v: &T) -> Vec<u8> {
    let mut s = serde_json::to_vec_pretty(v).expect("report serializes");
    s.push(b'\n');
    s
}

/// `t,cum_reward,cum_best,regret,n_active` per round.
pub fn trace_csv(outcome: &SeedOutcome) -> Result<Vec<u8>, ExperimentError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let wrap = |e: csv::Error| ExperimentError::Io { path: "trace csv".into(), msg: e.to_string() };
    w.write_record(["t", "cum_reward", "cum_best", "regret", "n_active"]).map_err(wrap)?;
    let rep = &outcome.regret;
    for (k, (t, r)) in outcome.trace.iter_global().enumerate() {
        w.write_record(&[
            t.to_string(),
            rep.cum_reward[k].to_string(),
            rep.cum_best[k].to_string(),
            (rep.cum_best[k] - rep.cum_reward[k]).to_string(),
            r.n_active.to_string(),
        ])
        .map_err(wrap)?;
    }
    w.into_inner().map_err(|e| ExperimentError::Io { path: "trace csv".into(), msg: e.to_string() })
}

#[derive(Serialize)]
struct InvariantFile<'a> {
    seed: u64,
    violations: &'a [Violation],
    assumptions: &'a [AssumptionReport],
}

/// Runs the experiment and writes its artifacts into `output_dir`.
pub fn run(cfg: &ExperimentConfig, exec: Exec) -> Result<RunSummary, ExperimentError> {
    let outcomes = run_seeds(cfg, exec)?;
    let dir = PathBuf::from(&cfg.output_dir);
    fs::create_dir_all(&dir).map_err(|e| io_err(&dir, e))?;
    let mut files = Vec::new();
    let mut violations = 0;
    for o in &outcomes {
        files.push(write_file(&dir, &format!("trace_seed{}.csv", o.seed), &trace_csv(o)?)?);
        files.push(write_file(&dir, &format!("regret_seed{}.json", o.seed), &json(&o.regret))?);
        if cfg.debug_invariants {
            violations += o.violations.len();
            let inv = InvariantFile { seed: o.seed, violations: &o.violations, assumptions: &o.assumptions };
            files.push(write_file(&dir, &format!("invariants_seed{}.json", o.seed), &json(&inv))?);
        }
    }
    let agg = aggregate(&outcomes);
    if outcomes.len() > 1 {
        files.push(write_file(&dir, "aggregate.json", &json(&agg))?);
    }
    let mut listed = files.clone();
    listed.push("manifest.json".into());
    let manifest = Manifest {
        config_hash: cfg.hash(),
        config: cfg.clone(),
        seeds: cfg.seeds.clone(),
        files: listed.clone(),
        version: env!("CARGO_PKG_VERSION").into(),
    };
    write_file(&dir, "manifest.json", &json(&manifest))?;
    Ok(RunSummary { output_dir: dir, files: listed, violations, aggregate: agg })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepReport {
    pub horizons: Vec<usize>,
    pub mean_regret: Vec<f64>,
    pub std_regret: Vec<f64>,
    pub slope: f64,
    pub slope_std_err: f64,
    pub violations: usize,
}

/// Least-squares slope of `ln y` against `ln x`, with its standard error.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> Result<(f64, f64), EvalError> {
    if x.len() < 3 {
        return Err(EvalError::LadderTooShort(x.len()));
    }
    if let Some(v) = y.iter().find(|v| v.is_nan() || **v <= 0.0) {
        return Err(EvalError::Mismatch(format!("cannot take the log of {v}")));
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let (_, b, se) = least_squares(&lx, &ly);
    Ok((b, se))
}

/// Mean regret per horizon over the config's seeds and the fitted slope.
/// All `(horizon, seed)` pairs run in parallel under `exec`.
pub fn sweep(cfg: &ExperimentConfig, horizons: &[usize], exec: Exec) -> Result<SweepReport, ExperimentError> {
    if horizons.len() < 3 {
        return Err(ExperimentError::Config(format!(
            "sweep needs at least 3 horizons, got {}",
            horizons.len()
        )));
    }
    let space = cfg.build_space()?;
    let jobs: Vec<(usize, u64)> =
        horizons.iter().flat_map(|&h| cfg.seeds.iter().map(move |&s| (h, s))).collect();
    let cfgs: Vec<ExperimentConfig> = horizons.iter().map(|&h| cfg.with_horizon(h)).collect();
    for c in &cfgs {
        c.validate()?;
    }
    let results: Vec<Result<(f64, usize), ExperimentError>> = exec.map(&jobs, |&(h, s)| {
        let k = horizons.iter().position(|&x| x == h).unwrap();
        let o = run_seed(&cfgs[k], &space, s, Exec::Sequential)?;
        Ok((o.regret.regret, o.violations.len()))
    });
    let results: Vec<(f64, usize)> = results.into_iter().collect::<Result<_, _>>()?;
    let n = cfg.seeds.len();
    let mut mean_regret = Vec::new();
    let mut std_regret = Vec::new();
    for k in 0..horizons.len() {
        let r: Vec<f64> = results[k * n..(k + 1) * n].iter().map(|p| p.0).collect();
        let (m, s) = mean_std(&r);
        mean_regret.push(m);
        std_regret.push(s);
    }
    let x: Vec<f64> = horizons.iter().map(|&h| h as f64).collect();
    let (slope, slope_std_err) = loglog_slope(&x, &mean_regret)?;
    Ok(SweepReport {
        horizons: horizons.to_vec(),
        mean_regret,
        std_regret,
        slope,
        slope_std_err,
        violations: results.iter().map(|p| p.1).sum(),
    })
}

/// Lipschitz audit of the first seed's environment.
pub fn audit(
    cfg: &ExperimentConfig,
    pairs: usize,
    replicas: usize,
    exec: Exec,
) -> Result<AuditReport, ExperimentError> {
    let space = cfg.build_space()?;
    let seed = cfg.seeds[0];
    let env = build_env(cfg, &space, seed)?;
    Ok(lipschitz_audit(&env, pairs, replicas, derive_seed(seed, 3), exec))
}

/// Covering-dimension fit of the eps-optimal sets of the first seed's
/// environment over `eps_ladder`.
pub fn cover(
    cfg: &ExperimentConfig,
    eps_ladder: &[f64],
    multiplier: Option<f64>,
    exec: Exec,
) -> Result<CoverReport, ExperimentError> {
    let space = cfg.build_space()?;
    let seed = cfg.seeds[0];
    let env = build_env(cfg, &space, seed)?;
    let grid_eps = cfg.grid_eps.unwrap_or_else(|| default_regret_grid_eps(&space, cfg.rounds()));
    let grid = evaluation_grid(&space, grid_eps);
    let p = EpsOptimalParams {
        d: space.covering_dim(),
        n_dbl: space.doubling_constant() as f64,
        horizon: cfg.rounds(),
        multiplier: multiplier.unwrap_or(EPS_OPTIMAL_MULTIPLIER),
    };
    let mut ladder = Vec::new();
    for &eps in eps_ladder {
        let set: Vec<_> =
            eps_optimal_set(&env, &grid, eps, p, exec).into_iter().map(|i| grid[i].clone()).collect();
        let n = covering_count(&set, eps, &space)?;
        if n > 0 {
            ladder.push((eps, n as f64));
        }
    }
    Ok(dimension_fit(&ladder)?)
}
