use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    CheckFn,
    Solve,
    Flow,
    Slice,
    Quantities,
    Sweep,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::CheckFn => "check-fn",
            Command::Solve => "solve",
            Command::Flow => "flow",
            Command::Slice => "slice",
            Command::Quantities => "quantities",
            Command::Sweep => "sweep",
        }
    }
}

/// Flags shared by every subcommand. Anything left unset falls back to the
/// config file and then to the built-in default.
#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    /// Speed function spec, e.g. `quotient:2,1`. Repeat for sweeps.
    #[arg(long = "fn", value_name = "SPEC")]
    pub fn_spec: Vec<String>,
    /// Hypersurface dimension. Repeat for sweeps.
    #[arg(long)]
    pub n: Vec<usize>,
    /// Speed exponent. Repeat for sweeps.
    #[arg(long)]
    pub alpha: Vec<f64>,
    #[arg(long, value_name = "euclid|hemisphere")]
    pub ambient: Option<String>,
    /// Number of grid intervals on [0, π].
    #[arg(long)]
    pub grid: Option<usize>,
    /// Random seed. Repeat for sweeps.
    #[arg(long)]
    pub seed: Vec<u64>,
    /// Sample count for `check-fn`.
    #[arg(long)]
    pub samples: Option<usize>,
    /// Perturbation amplitude (sup norm, relative to the radius).
    #[arg(long)]
    pub perturb: Option<f64>,
    /// Perturbation mode: `p2` .. `p12`, or `random` for modes 2..=6.
    #[arg(long)]
    pub mode: Option<String>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Concurrent sweep jobs.
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Newton tolerance, flow anisotropy target or check slack.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Constant term `C ≤ 0` of the Euclidean shrinker equation.
    #[arg(long, allow_hyphen_values = true)]
    pub offset: Option<f64>,
    /// Profile file to start from (`solve`, `flow`) or to evaluate (`quantities`).
    #[arg(long)]
    pub body: Option<PathBuf>,
    /// Flow normalization: `min-support` or `mean-width`.
    #[arg(long)]
    pub normalization: Option<String>,
    #[arg(long)]
    pub max_steps: Option<usize>,
    /// Task run by each sweep job: `solve` or `flow`.
    #[arg(long)]
    pub task: Option<String>,
    /// TOML file with base settings.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    #[serde(rename = "fn")]
    pub fn_spec: Option<String>,
    pub n: Option<usize>,
    pub alpha: Option<f64>,
    pub ambient: Option<String>,
    pub grid: Option<usize>,
    pub seed: Option<u64>,
    pub samples: Option<usize>,
    pub perturb: Option<f64>,
    pub mode: Option<String>,
    pub out: Option<PathBuf>,
    pub jobs: Option<usize>,
    pub tol: Option<f64>,
    pub offset: Option<f64>,
    pub body: Option<PathBuf>,
    pub normalization: Option<String>,
    pub max_steps: Option<usize>,
    pub sweep: Option<SweepFile>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepFile {
    pub task: Option<String>,
    pub fns: Option<Vec<String>>,
    pub ns: Option<Vec<usize>>,
    pub alphas: Option<Vec<f64>>,
    pub seeds: Option<Vec<u64>>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::config(format!("config {}: {}", path.display(), e.message())))
    }
}

/// Fully resolved settings of one run. Serialized into every output file.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: Command,
    #[serde(rename = "fn")]
    pub fn_spec: String,
    pub n: usize,
    pub alpha: f64,
    pub ambient: String,
    pub grid: usize,
    pub seed: u64,
    pub samples: usize,
    pub perturb: f64,
    pub mode: String,
    pub tol: f64,
    pub offset: f64,
    pub normalization: String,
    pub max_steps: usize,
    pub body: Option<String>,
    pub out: String,
    pub jobs: usize,
}

/// Axes of a sweep, resolved like the scalar settings.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPlan {
    pub task: Command,
    pub fns: Vec<String>,
    pub ns: Vec<usize>,
    pub alphas: Vec<f64>,
    pub seeds: Vec<u64>,
}

fn single<T: Clone>(name: &str, values: &[T], command: Command) -> Result<Option<T>, CliError> {
    match values {
        [] => Ok(None),
        [v] => Ok(Some(v.clone())),
        _ if command == Command::Sweep => Ok(values.first().cloned()),
        _ => Err(CliError::config(format!("--{name} given more than once; only `sweep` accepts lists"))),
    }
}

fn default_grid(command: Command) -> usize {
    match command {
        Command::Solve => 128,
        Command::Flow => 32,
        _ => 64,
    }
}

fn default_tol(command: Command) -> f64 {
    match command {
        Command::Solve => 1e-11,
        Command::Flow => 1e-3,
        _ => shrink_core::symfun::MARGIN_SLACK,
    }
}

fn default_out() -> PathBuf {
    match std::env::var_os("SHRINK_OUT") {
        Some(v) if !v.is_empty() => PathBuf::from(v),
        _ => PathBuf::from("out"),
    }
}

fn positive(name: &str, v: f64) -> Result<f64, CliError> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(CliError::config(format!("{name} must be positive and finite, got {v}")))
    }
}

impl RunConfig {
    /// Applies flags over the config file over the defaults.
    pub fn resolve(command: Command, flags: &Flags) -> Result<(Self, FileConfig), CliError> {
        let file = match &flags.config {
            Some(p) => FileConfig::load(p)?,
            None => FileConfig::default(),
        };
        let ambient_default = if command == Command::Slice { "hemisphere" } else { "euclid" };
        let ambient = flags
            .ambient
            .clone()
            .or_else(|| file.ambient.clone())
            .unwrap_or_else(|| ambient_default.into());
        let ambient = match ambient.as_str() {
            "euclid" | "euclidean" => "euclid".to_string(),
            "hemisphere" => "hemisphere".to_string(),
            other => return Err(CliError::config(format!("unknown ambient {other:?}; expected euclid or hemisphere"))),
        };
        let config = RunConfig {
            command,
            fn_spec: single("fn", &flags.fn_spec, command)?
                .or_else(|| file.fn_spec.clone())
                .unwrap_or_else(|| "ek_root:2".into()),
            n: single("n", &flags.n, command)?.or(file.n).unwrap_or(3),
            alpha: single("alpha", &flags.alpha, command)?.or(file.alpha).unwrap_or(2.0),
            ambient,
            grid: flags.grid.or(file.grid).unwrap_or(default_grid(command)),
            seed: single("seed", &flags.seed, command)?.or(file.seed).unwrap_or(0),
            samples: flags.samples.or(file.samples).unwrap_or(10_000),
            perturb: flags.perturb.or(file.perturb).unwrap_or(0.2),
            mode: flags.mode.clone().or_else(|| file.mode.clone()).unwrap_or_else(|| "random".into()),
            tol: flags.tol.or(file.tol).unwrap_or(default_tol(command)),
            offset: flags.offset.or(file.offset).unwrap_or(0.0),
            normalization: flags
                .normalization
                .clone()
                .or_else(|| file.normalization.clone())
                .unwrap_or_else(|| "min-support".into()),
            max_steps: flags.max_steps.or(file.max_steps).unwrap_or(200_000),
            body: flags
                .body
                .clone()
                .or_else(|| file.body.clone())
                .map(|p| p.display().to_string()),
            out: flags
                .out
                .clone()
                .or_else(|| file.out.clone())
                .unwrap_or_else(default_out)
                .display()
                .to_string(),
            jobs: flags.jobs.or(file.jobs).unwrap_or(1),
        };
        config.validate()?;
        Ok((config, file))
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.n < 2 {
            return Err(CliError::config(format!("n must be at least 2, got {}", self.n)));
        }
        if self.grid < 4 {
            return Err(CliError::config(format!("grid must be at least 4, got {}", self.grid)));
        }
        if self.samples == 0 {
            return Err(CliError::config("samples must be positive"));
        }
        if self.jobs == 0 {
            return Err(CliError::config("jobs must be positive"));
        }
        positive("alpha", self.alpha)?;
        positive("tol", self.tol)?;
        if !(self.perturb.is_finite() && self.perturb >= 0.0) {
            return Err(CliError::config(format!("perturb must be nonnegative, got {}", self.perturb)));
        }
        if !(self.offset.is_finite() && self.offset <= 0.0) {
            return Err(CliError::config(format!("offset must be ≤ 0, got {}", self.offset)));
        }
        self.mode_modes()?;
        self.normalization
            .parse::<shrink_core::solver::Normalization>()
            .map_err(CliError::config)?;
        Ok(())
    }

    /// Perturbation modes selected by `mode`: a single Legendre degree or
    /// the random range.
    pub fn mode_modes(&self) -> Result<Option<usize>, CliError> {
        if self.mode == "random" {
            return Ok(None);
        }
        self.mode
            .strip_prefix('p')
            .and_then(|d| d.parse::<usize>().ok())
            .filter(|l| (1..=64).contains(l))
            .map(Some)
            .ok_or_else(|| CliError::config(format!("unknown mode {:?}; expected p2, p3, ... or random", self.mode)))
    }

    /// `key=value` lines in a fixed order.
    pub fn header_lines(&self) -> Vec<String> {
        let value = serde_json::to_value(self).expect("config serializes");
        let serde_json::Value::Object(map) = value else {
            unreachable!("config is a struct")
        };
        let order = [
            "command",
            "fn",
            "n",
            "alpha",
            "ambient",
            "grid",
            "seed",
            "samples",
            "perturb",
            "mode",
            "tol",
            "offset",
            "normalization",
            "max_steps",
            "body",
            "out",
            "jobs",
        ];
        order
            .iter()
            .map(|k| {
                let v = &map[*k];
                match v {
                    serde_json::Value::String(s) => format!("{k}={s}"),
                    serde_json::Value::Null => format!("{k}="),
                    other => format!("{k}={other}"),
                }
            })
            .collect()
    }

    pub fn out_dir(&self) -> PathBuf {
        PathBuf::from(&self.out)
    }
}

fn pick<T: Clone>(flag: &[T], from_file: Option<Vec<T>>, fallback: T) -> Vec<T> {
    if !flag.is_empty() {
        flag.to_vec()
    } else {
        from_file.unwrap_or_else(|| vec![fallback])
    }
}

impl SweepPlan {
    pub fn resolve(base: &RunConfig, flags: &Flags, file: &FileConfig) -> Result<Self, CliError> {
        let sweep = file.sweep.clone().unwrap_or_default();
        let task = flags
            .task
            .clone()
            .or(sweep.task)
            .unwrap_or_else(|| "solve".into());
        let task = match task.as_str() {
            "solve" => Command::Solve,
            "flow" => Command::Flow,
            other => return Err(CliError::config(format!("sweep task must be solve or flow, got {other:?}"))),
        };
        let plan = SweepPlan {
            task,
            fns: pick(&flags.fn_spec, sweep.fns, base.fn_spec.clone()),
            ns: pick(&flags.n, sweep.ns, base.n),
            alphas: pick(&flags.alpha, sweep.alphas, base.alpha),
            seeds: pick(&flags.seed, sweep.seeds, base.seed),
        };
        if plan.fns.is_empty() || plan.ns.is_empty() || plan.alphas.is_empty() || plan.seeds.is_empty() {
            return Err(CliError::config("sweep axes must be nonempty"));
        }
        Ok(plan)
    }

    /// One run config per grid point, each writing under its own directory.
    pub fn jobs(&self, base: &RunConfig, flags: &Flags, file: &FileConfig) -> Result<Vec<RunConfig>, CliError> {
        let root = base.out_dir().join("sweep");
        let mut jobs = Vec::new();
        for spec in &self.fns {
            for &n in &self.ns {
                for &alpha in &self.alphas {
                    for &seed in &self.seeds {
                        let index = jobs.len();
                        let mut cfg = base.clone();
                        cfg.command = self.task;
                        cfg.fn_spec = spec.clone();
                        cfg.n = n;
                        cfg.alpha = alpha;
                        cfg.seed = seed;
                        cfg.jobs = 1;
                        cfg.grid = flags.grid.or(file.grid).unwrap_or(default_grid(self.task));
                        cfg.tol = flags.tol.or(file.tol).unwrap_or(default_tol(self.task));
                        cfg.out = root.join(format!("job-{index:04}")).display().to_string();
                        cfg.validate()?;
                        jobs.push(cfg);
                    }
                }
            }
        }
        Ok(jobs)
    }
}
