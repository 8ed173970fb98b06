//! `bare713`: sweeps, fault-tolerance certification, table dumps and sampler
//! comparisons for the simulated memory experiments.

mod config;
mod output;

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use anyhow::{Context, Result};
use bare713::analysis::summarize;
use bare713::decoder::{hook_rows, single_qubit_listing};
use bare713::runner::{Metric, Sampler, SamplerConfig, SubsetCache};
use clap::{Parser, Subcommand};

use config::{ConfigArgs, ExperimentConfig};
use output::{Comparison, FitJson, RowContext, Sidecar};

#[derive(Parser)]
#[command(name = "bare713", version, about = "Logical error rates of small distance-3 codes under circuit noise")]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Logical error rate over a grid; CSV plus a JSON sidecar with the fit.
    Sweep(ConfigArgs),
    /// Exhaustive fault-tolerance check at order 1 or 2.
    Certify {
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long, default_value_t = 1)]
        order: usize,
        /// Also write the full report as JSON here.
        #[arg(long)]
        json: Option<std::path::PathBuf>,
    },
    /// Single-qubit syndromes, the base lookup table and the flag tables.
    Tables(ConfigArgs),
    /// Importance and traditional sampling side by side.
    CompareSamplers(ConfigArgs),
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {e:#}");
        std::process::exit(2);
    }
}

fn run(cli: Cli) -> Result<()> {
    if let Some(j) = cli.jobs {
        rayon::ThreadPoolBuilder::new().num_threads(j.max(1)).build_global().context("starting worker pool")?;
    }
    match cli.command {
        Command::Sweep(a) => sweep(&ExperimentConfig::resolve(&a)?),
        Command::Certify { config, order, json } => certify(&ExperimentConfig::resolve(&config)?, order, json.as_deref()),
        Command::Tables(a) => tables(&ExperimentConfig::resolve(&a)?),
        Command::CompareSamplers(a) => compare(&ExperimentConfig::resolve(&a)?),
    }
}

fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            std::io::stdout().lock().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn sweep(cfg: &ExperimentConfig) -> Result<()> {
    let exp = cfg.experiment()?;
    let metric = cfg.metric.unwrap_or(Metric::State);
    let mut cache = match cfg.sampler {
        Sampler::Importance => SubsetCache::from_env()?,
        Sampler::Traditional => None,
    };
    let curve =
        exp.estimate_logical_rate(cfg.model, &cfg.grid, &cfg.overrides, cfg.sampler, metric, &cfg.sampler_cfg, cache.as_mut())?;
    let hash = cfg.hash(&exp, metric);
    let ctx = RowContext {
        sampler: cfg.sampler.name(),
        method: cfg.method.name(),
        model: cfg.model.name(),
        metric: metric.name(),
        config_hash: &hash,
        seed: cfg.sampler_cfg.seed,
    };
    emit(cfg.output.as_deref(), &output::sweep_csv(&curve, &ctx))?;

    let fault_tolerant = exp.certify_ft(cfg.model, 1, metric)?.is_fault_tolerant();
    let (fit, pseudothreshold, fit_error) = match summarize(&curve, fault_tolerant) {
        Ok(s) => (Some(FitJson::from_summary(&s)), Some((&s.pseudothreshold).into()), None),
        Err(e) => (None, None, Some(e.to_string())),
    };
    let sidecar = Sidecar {
        config_hash: hash.clone(),
        seed: cfg.sampler_cfg.seed,
        code: cfg.code.name().to_string(),
        method: cfg.method.name().into(),
        model: cfg.model.name().into(),
        metric: metric.name().into(),
        sampler: cfg.sampler.name().into(),
        fault_tolerant,
        fit,
        pseudothreshold,
        fit_error,
    };
    let json = serde_json::to_string_pretty(&sidecar)? + "\n";
    match &cfg.output {
        Some(p) => std::fs::write(p.with_extension("json"), json).context("writing sidecar")?,
        None => eprint!("{json}"),
    }
    Ok(())
}

fn certify(cfg: &ExperimentConfig, order: usize, json: Option<&Path>) -> Result<()> {
    let exp = cfg.experiment()?;
    let metric = cfg.metric.unwrap_or(Metric::AnyLogical);
    let rep = exp.certify_ft(cfg.model, order, metric)?;
    let mut out = String::new();
    writeln!(out, "code {} method {} model {} order {} metric {}", rep.code, rep.method, rep.model, rep.order, rep.metric)?;
    writeln!(
        out,
        "configurations {} malignant state {} malignant any-logical {}",
        rep.total_configurations, rep.malignant_state, rep.malignant_any
    )?;
    writeln!(out, "verdict {}", rep.verdict())?;
    for m in &rep.malignant {
        writeln!(out, "malignant {:?}", m.coset)?;
        for f in &m.faults {
            writeln!(out, "  fault {f}")?;
        }
        writeln!(out, "  rounds {}", m.trace.join(" | "))?;
        writeln!(out, "  correction {}", m.correction)?;
        writeln!(out, "  residual {}", m.residual)?;
    }
    emit(cfg.output.as_deref(), &out)?;
    if let Some(p) = json {
        std::fs::write(p, serde_json::to_string_pretty(&rep)? + "\n").with_context(|| format!("writing {}", p.display()))?;
    }
    Ok(())
}

fn tables(cfg: &ExperimentConfig) -> Result<()> {
    let exp = cfg.experiment()?;
    let code = &exp.plan.code;
    let mut out = String::new();
    writeln!(out, "# single-qubit syndromes ({})", code.name())?;
    out.push_str(&single_qubit_listing(code));
    writeln!(out, "\n# base lookup table ({} method)", cfg.method)?;
    out.push_str(&exp.decoder.base().dump());
    for (stab, _) in exp.plan.round.flagged_stabilizers() {
        writeln!(out, "\n# flagged stabilizer {stab}: {}", code.generators()[stab])?;
        let rows = hook_rows(code, &exp.plan.round, stab);
        let mut gate = None;
        for r in rows {
            if gate != Some(r.gate) {
                writeln!(out, "gate {}", r.gate)?;
                gate = Some(r.gate);
            }
            writeln!(out, "{r}")?;
        }
        if let Some(t) = exp.decoder.flag_tables().iter().find(|t| t.stabilizer == stab) {
            writeln!(out, "\n# flag-conditioned lookup, stabilizer {stab}")?;
            out.push_str(&t.table.dump());
        }
    }
    emit(cfg.output.as_deref(), &out)
}

fn compare(cfg: &ExperimentConfig) -> Result<()> {
    let exp = cfg.experiment()?;
    let metric = cfg.metric.unwrap_or(Metric::State);
    let mut cache = SubsetCache::from_env()?;
    let importance =
        exp.estimate_logical_rate(cfg.model, &cfg.grid, &cfg.overrides, Sampler::Importance, metric, &cfg.sampler_cfg, cache.as_mut())?;
    let trad_cfg = SamplerConfig { shots: cfg.traditional_shots, ..cfg.sampler_cfg.clone() };
    let traditional = exp.estimate_logical_rate(cfg.model, &cfg.grid, &cfg.overrides, Sampler::Traditional, metric, &trad_cfg, None)?;
    let rows: Vec<Comparison> =
        importance.into_iter().zip(traditional).map(|(importance, traditional)| Comparison { importance, traditional }).collect();
    let hash = cfg.hash(&exp, metric);
    let ctx = RowContext {
        sampler: "both",
        method: cfg.method.name(),
        model: cfg.model.name(),
        metric: metric.name(),
        config_hash: &hash,
        seed: cfg.sampler_cfg.seed,
    };
    emit(cfg.output.as_deref(), &output::compare_csv(&rows, &ctx))
}
