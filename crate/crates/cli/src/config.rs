//! Experiment configuration: a TOML file, overridden field by field by flags.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use bare713::analysis::log_grid;
use bare713::circuits::Method;
use bare713::codes::{builtin, StabilizerCode};
use bare713::noise::NoiseKind;
use bare713::runner::{Experiment, Metric, RateOverrides, Sampler, SamplerConfig};
use clap::Args;
use serde::Deserialize;
use sha2::{Digest, Sha256};

/// Flags shared by every subcommand. Any flag given wins over the file.
#[derive(Args, Debug, Default, Clone)]
pub struct ConfigArgs {
    /// TOML file with the same keys as the flags (underscores for dashes).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// bare713, steane713 or fivequbit513.
    #[arg(long)]
    pub code: Option<String>,
    /// bare, flag or shor.
    #[arg(long)]
    pub method: Option<String>,
    /// standard or anisotropic.
    #[arg(long)]
    pub model: Option<String>,
    /// Explicit grid of physical rates, comma separated.
    #[arg(long = "p", value_delimiter = ',', num_args = 1..)]
    pub grid: Option<Vec<f64>>,
    /// Log-spaced grid: lower end.
    #[arg(long)]
    pub grid_min: Option<f64>,
    /// Log-spaced grid: upper end.
    #[arg(long)]
    pub grid_max: Option<f64>,
    /// Log-spaced grid: number of points.
    #[arg(long)]
    pub grid_points: Option<usize>,
    /// Fixed single-qubit rate instead of the grid value.
    #[arg(long)]
    pub p_s: Option<f64>,
    /// Fixed two-qubit rate instead of the grid value.
    #[arg(long)]
    pub p_t: Option<f64>,
    /// Fixed measurement-flip rate (traditional sampler only).
    #[arg(long)]
    pub p_meas: Option<f64>,
    /// importance or traditional.
    #[arg(long)]
    pub sampler: Option<String>,
    /// Shots per sampled subset (importance) or per grid point (traditional).
    #[arg(long)]
    pub shots: Option<u64>,
    /// Traditional-sampler shots per point for compare-samplers.
    #[arg(long)]
    pub traditional_shots: Option<u64>,
    /// Largest probability mass of subsets the importance sampler may skip.
    #[arg(long)]
    pub tolerance: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Shots per independent RNG stream.
    #[arg(long)]
    pub batch: Option<u64>,
    /// state or any-logical.
    #[arg(long)]
    pub metric: Option<String>,
    /// Output file; standard output if absent.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Deserialize, Debug, Default)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    code: Option<String>,
    method: Option<String>,
    model: Option<String>,
    grid: Option<Vec<f64>>,
    grid_min: Option<f64>,
    grid_max: Option<f64>,
    grid_points: Option<usize>,
    p_s: Option<f64>,
    p_t: Option<f64>,
    p_meas: Option<f64>,
    sampler: Option<String>,
    shots: Option<u64>,
    traditional_shots: Option<u64>,
    tolerance: Option<f64>,
    seed: Option<u64>,
    batch: Option<u64>,
    metric: Option<String>,
    output: Option<PathBuf>,
}

/// A validated configuration.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub code: StabilizerCode,
    pub method: Method,
    pub model: NoiseKind,
    pub grid: Vec<f64>,
    pub overrides: RateOverrides,
    pub sampler: Sampler,
    pub sampler_cfg: SamplerConfig,
    pub traditional_shots: u64,
    /// `None` when not given; subcommands pick their own default.
    pub metric: Option<Metric>,
    pub output: Option<PathBuf>,
}

fn parse<T: std::str::FromStr<Err = bare713::Error>>(v: Option<String>) -> Result<Option<T>> {
    v.map(|s| s.parse::<T>()).transpose().map_err(Into::into)
}

fn check_rate(name: &str, p: f64) -> Result<()> {
    // zero is accepted so a fault-free sanity row can be requested
    if !(0.0..0.5).contains(&p) {
        bail!("{name} = {p} is outside [0, 0.5)");
    }
    Ok(())
}

impl ExperimentConfig {
    pub fn resolve(args: &ConfigArgs) -> Result<Self> {
        let file = match &args.config {
            Some(path) => read_file(path)?,
            None => FileConfig::default(),
        };
        let a = args.clone();
        let code_name = a.code.or(file.code).unwrap_or_else(|| "bare713".into());
        let code = builtin(&code_name)?;
        let default_method = if code_name == "bare713" { Method::Bare } else { Method::Shor };
        let method = parse::<Method>(a.method.or(file.method))?.unwrap_or(default_method);
        match (code_name.as_str(), method) {
            ("bare713", Method::Bare | Method::Flag) => {}
            ("bare713", Method::Shor) => bail!("method shor is not available for bare713 (no Shor-style schedule)"),
            (_, Method::Shor) => {}
            (c, m) => bail!("method {m} is only available for bare713, not {c}"),
        }
        let model = parse::<NoiseKind>(a.model.or(file.model))?.unwrap_or(NoiseKind::Standard);

        let explicit = a.grid.or(file.grid);
        let grid_min = a.grid_min.or(file.grid_min);
        let grid_max = a.grid_max.or(file.grid_max);
        let grid_points = a.grid_points.or(file.grid_points);
        let grid = match explicit {
            Some(g) => g,
            None => {
                let (lo, hi, n) = (grid_min.unwrap_or(1e-5), grid_max.unwrap_or(5e-3), grid_points.unwrap_or(14));
                if !(lo > 0.0 && hi >= lo && n >= 1) {
                    bail!("log grid needs 0 < grid_min <= grid_max and grid_points >= 1");
                }
                log_grid(lo, hi, n)
            }
        };
        if grid.is_empty() {
            bail!("empty grid");
        }
        for &p in &grid {
            check_rate("grid value", p)?;
        }
        let overrides = RateOverrides {
            p_s: a.p_s.or(file.p_s),
            p_t: a.p_t.or(file.p_t),
            p_meas: a.p_meas.or(file.p_meas),
        };
        for (name, v) in [("p_s", overrides.p_s), ("p_t", overrides.p_t), ("p_meas", overrides.p_meas)] {
            if let Some(p) = v {
                check_rate(name, p)?;
            }
        }
        let sampler = parse::<Sampler>(a.sampler.or(file.sampler))?.unwrap_or(Sampler::Importance);
        let defaults = SamplerConfig::default();
        let sampler_cfg = SamplerConfig {
            shots: a.shots.or(file.shots).unwrap_or(defaults.shots),
            tolerance: a.tolerance.or(file.tolerance).unwrap_or(defaults.tolerance),
            seed: a.seed.or(file.seed).unwrap_or(defaults.seed),
            batch: a.batch.or(file.batch).unwrap_or(defaults.batch),
        };
        if sampler_cfg.shots == 0 || sampler_cfg.batch == 0 {
            bail!("shots and batch must be positive");
        }
        if !(sampler_cfg.tolerance > 0.0 && sampler_cfg.tolerance <= 1.0) {
            bail!("tolerance {} is outside (0, 1]", sampler_cfg.tolerance);
        }
        let traditional_shots = a.traditional_shots.or(file.traditional_shots).unwrap_or(1_000_000);
        if traditional_shots == 0 {
            bail!("traditional_shots must be positive");
        }
        Ok(ExperimentConfig {
            code,
            method,
            model,
            grid,
            overrides,
            sampler,
            sampler_cfg,
            traditional_shots,
            metric: parse::<Metric>(a.metric.or(file.metric))?,
            output: a.output.or(file.output),
        })
    }

    pub fn experiment(&self) -> Result<Experiment> {
        Ok(Experiment::new(&self.code, self.method)?)
    }

    /// Short hash of every setting that affects the numbers, plus the plan.
    pub fn hash(&self, exp: &Experiment, metric: Metric) -> String {
        let o = &self.overrides;
        let c = &self.sampler_cfg;
        let canonical = format!(
            "plan={};model={};grid={:?};p_s={:?};p_t={:?};p_meas={:?};sampler={};shots={};traditional_shots={};tolerance={:e};seed={};batch={};metric={}",
            exp.plan_hash(self.model),
            self.model,
            self.grid,
            o.p_s,
            o.p_t,
            o.p_meas,
            self.sampler.name(),
            c.shots,
            self.traditional_shots,
            c.tolerance,
            c.seed,
            c.batch,
            metric,
        );
        Sha256::digest(canonical.as_bytes()).iter().take(8).map(|b| format!("{b:02x}")).collect()
    }
}

fn read_file(path: &Path) -> Result<FileConfig> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}
