//! Memory experiments: single shots, subset (importance) sampling,
//! traditional Monte Carlo, and exhaustive fault-tolerance certification.

use std::collections::HashMap;
use std::fs::{self, OpenOptions};
use std::io::{BufRead, BufReader, Write as _};
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::circuits::{build_memory_experiment, ExperimentPlan, MeasRole, Method, MAX_NOISY_ROUNDS};
use crate::codes::{CosetClass, StabilizerCode};
use crate::decoder::{Decoder, FlagPolicy};
use crate::engine::{propagate_frame, RoundRecord};
use crate::error::{Error, Result};
use crate::noise::{
    for_each_configuration, sample_from_subset, sample_traditional, subset_configuration_count, FaultConfiguration,
    FaultSpace, InjectedFault, NoiseKind, NoiseModel,
};
use crate::pauli::PauliString;

/// Environment variable naming the subset-estimate cache directory.
pub const CACHE_DIR_ENV: &str = "BARE713_CACHE_DIR";

/// Failure criterion applied to the final residual.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Metric {
    /// The logical `|0>` changed: `X_L` or `Y_L` (`Z_L` leaves it invariant).
    State,
    /// Any non-trivial logical operator.
    AnyLogical,
}

impl Metric {
    pub fn name(self) -> &'static str {
        match self {
            Metric::State => "state",
            Metric::AnyLogical => "any-logical",
        }
    }

    pub fn fails(self, c: CosetClass) -> bool {
        match self {
            Metric::State => c.is_state_failure(),
            Metric::AnyLogical => c.is_any_failure(),
        }
    }
}

impl std::fmt::Display for Metric {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Metric {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "state" => Ok(Metric::State),
            "any-logical" => Ok(Metric::AnyLogical),
            _ => Err(Error::Parse(format!("unknown metric {s:?}"))),
        }
    }
}

/// A plan together with its decoder.
#[derive(Clone, Debug)]
pub struct Experiment {
    pub plan: ExperimentPlan,
    pub decoder: Decoder,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShotOutcome {
    pub coset: CosetClass,
    pub records: Vec<RoundRecord>,
    pub correction: PauliString,
    /// Data error after the decoded correction, before the final noise-free EC.
    pub after_correction: PauliString,
    /// Data error after the final noise-free EC.
    pub residual: PauliString,
}

impl ShotOutcome {
    pub fn fails(&self, metric: Metric) -> bool {
        metric.fails(self.coset)
    }
}

impl Experiment {
    pub fn new(code: &StabilizerCode, method: Method) -> Result<Self> {
        Self::with_policy(code, method, FlagPolicy::default())
    }

    pub fn with_policy(code: &StabilizerCode, method: Method, policy: FlagPolicy) -> Result<Self> {
        let plan = build_memory_experiment(code, method)?;
        let decoder = Decoder::new(&plan, policy)?;
        Ok(Experiment { plan, decoder })
    }

    pub fn fault_space(&self, kind: NoiseKind) -> FaultSpace {
        FaultSpace::new(&self.plan.noisy, kind)
    }

    /// Stable hash of everything that determines shot outcomes.
    pub fn plan_hash(&self, kind: NoiseKind) -> String {
        let mut h = Sha256::new();
        h.update(self.plan.code.to_definition());
        h.update(self.plan.method.name());
        h.update(self.plan.noisy.dump());
        h.update(format!("{:?}", self.decoder.policy()));
        h.update(self.decoder.base().dump());
        h.update(kind.name());
        let digest = h.finalize();
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }

    /// Runs one shot of the protocol with the given faults on the noisy rounds.
    ///
    /// The ideal encoded state is implicit: the frame starts empty. Round 3
    /// executes only when the decoder asks for it; faults placed there are
    /// otherwise discarded.
    pub fn run_shot(&self, faults: &FaultConfiguration) -> ShotOutcome {
        let noisy = &self.plan.noisy;
        let regs = noisy.registers();
        let mut frame = PauliString::identity(regs.total());
        let mut records = Vec::with_capacity(MAX_NOISY_ROUNDS);
        let list = faults.faults();
        let run_round = |r: usize, frame: &mut PauliString| {
            let range = self.plan.round_range(r);
            let faults = round_faults(list, range.clone());
            let mut rec = RoundRecord::new(noisy.n_stabilizers());
            let locs = noisy.locations();
            propagate_frame(noisy, range, faults, frame, |id, flip| {
                if let Some(role) = locs[id].tags.role {
                    record(&mut rec, role, flip);
                }
            });
            rec
        };
        records.push(run_round(0, &mut frame));
        records.push(run_round(1, &mut frame));
        if self.decoder.needs_third_round(&records[0], &records[1]) {
            records.push(run_round(2, &mut frame));
        }
        let decision = self.decoder.ec_correct(&records).expect("round count follows the decoder");
        let data = frame.slice(0, regs.n_data);
        let after = data.mul_unchecked(&decision.correction);
        let code = &self.plan.code;
        let final_fix = self.decoder.decode(&code.syndrome_unchecked(&after), 0);
        let residual = after.mul_unchecked(&final_fix);
        ShotOutcome {
            coset: code.classify_unchecked(&residual),
            records,
            correction: decision.correction,
            after_correction: after,
            residual,
        }
    }
}

fn record(rec: &mut RoundRecord, role: MeasRole, flip: bool) {
    if !flip {
        return;
    }
    match role {
        MeasRole::Syndrome(i) => {
            rec.syndrome = rec
                .syndrome
                .xor(&crate::codes::Syndrome::from_bits(1 << i, rec.syndrome.len()))
        }
        MeasRole::Flag(i) => rec.flags |= 1 << i,
    }
}

fn round_faults(list: &[InjectedFault], range: std::ops::Range<usize>) -> &[InjectedFault] {
    let a = list.partition_point(|f| f.location < range.start);
    let b = list.partition_point(|f| f.location < range.end);
    &list[a..b]
}

fn ln_binomial(n: usize, k: usize) -> f64 {
    let k = k.min(n - k);
    (0..k).map(|i| ((n - i) as f64).ln() - ((i + 1) as f64).ln()).sum()
}

fn ln_binomial_term(n: usize, k: usize, p: f64) -> f64 {
    if p == 0.0 {
        return if k == 0 { 0.0 } else { f64::NEG_INFINITY };
    }
    if p == 1.0 {
        return if k == n { 0.0 } else { f64::NEG_INFINITY };
    }
    ln_binomial(n, k) + k as f64 * p.ln() + (n - k) as f64 * (-p).ln_1p()
}

/// Occurrence probability of subset `(s, t)`:
/// `C(n_s,s) p_s^s (1-p_s)^(n_s-s) · C(n_t,t) p_t^t (1-p_t)^(n_t-t)`.
pub fn subset_weight(s: usize, t: usize, n_s: usize, n_t: usize, p_s: f64, p_t: f64) -> Result<f64> {
    if s > n_s || t > n_t {
        return Err(Error::SubsetOutOfRange { s, t, n_s, n_t });
    }
    if !(0.0..=1.0).contains(&p_s) || !(0.0..=1.0).contains(&p_t) {
        return Err(Error::InvalidParameter(format!("p_s = {p_s}, p_t = {p_t}")));
    }
    Ok((ln_binomial_term(n_s, s, p_s) + ln_binomial_term(n_t, t, p_t)).exp())
}

/// Subsets in decreasing weight at `(p_s, p_t)` until the excluded mass is at
/// most `tolerance`; returns the list and the excluded mass.
pub fn enumerate_subsets(
    n_s: usize,
    n_t: usize,
    p_s: f64,
    p_t: f64,
    tolerance: f64,
) -> Result<(Vec<(usize, usize)>, f64)> {
    if !(tolerance > 0.0 && tolerance <= 1.0) {
        return Err(Error::InvalidParameter(format!("tolerance {tolerance} not in (0, 1]")));
    }
    let mut all = Vec::with_capacity((n_s + 1) * (n_t + 1));
    for s in 0..=n_s {
        for t in 0..=n_t {
            all.push(((s, t), subset_weight(s, t, n_s, n_t, p_s, p_t)?));
        }
    }
    all.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    // suffix[i] = mass of all[i..]
    let mut suffix = vec![0.0; all.len() + 1];
    for i in (0..all.len()).rev() {
        suffix[i] = suffix[i + 1] + all[i].1;
    }
    let keep = (0..=all.len()).find(|&i| suffix[i] <= tolerance).unwrap_or(all.len());
    Ok((all[..keep].iter().map(|x| x.0).collect(), suffix[keep]))
}

/// Per-subset Monte Carlo (or exact) failure statistics.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubsetEstimate {
    pub s: usize,
    pub t: usize,
    /// Shots, or configurations when `exact`.
    pub shots: u64,
    pub exact: bool,
    /// State-discrepancy and any-logical failure fractions.
    pub p_state: f64,
    pub p_any: f64,
    /// Raw failure counts (sampled subsets only).
    pub failures_state: u64,
    pub failures_any: u64,
}

impl SubsetEstimate {
    pub fn p_l(&self, metric: Metric) -> f64 {
        match metric {
            Metric::State => self.p_state,
            Metric::AnyLogical => self.p_any,
        }
    }

    /// Binomial variance of the estimate; zero when exact.
    pub fn variance(&self, metric: Metric) -> f64 {
        if self.exact || self.shots == 0 {
            return 0.0;
        }
        let p = self.p_l(metric);
        p * (1.0 - p) / self.shots as f64
    }

    pub fn stderr(&self, metric: Metric) -> f64 {
        self.variance(metric).sqrt()
    }

    /// `A_{s,t}` at the given rates.
    pub fn weight(&self, n_s: usize, n_t: usize, p_s: f64, p_t: f64) -> f64 {
        subset_weight(self.s, self.t, n_s, n_t, p_s, p_t).unwrap_or(0.0)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    /// Shots per sampled subset (importance) or per grid point (traditional).
    pub shots: u64,
    pub tolerance: f64,
    pub seed: u64,
    /// Shots per independent RNG stream.
    pub batch: u64,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig { shots: 100_000, tolerance: 1e-8, seed: 1, batch: 10_000 }
    }
}

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Line-delimited JSON cache of subset estimates.
#[derive(Debug)]
pub struct SubsetCache {
    path: PathBuf,
    records: HashMap<String, SubsetEstimate>,
}

#[derive(Serialize, Deserialize)]
struct CacheRecord {
    key: String,
    plan: String,
    estimate: SubsetEstimate,
    seed: u64,
}

impl SubsetCache {
    pub fn open(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir)?;
        let path = dir.join("subsets.jsonl");
        let mut records = HashMap::new();
        if path.exists() {
            for line in BufReader::new(fs::File::open(&path)?).lines() {
                let line = line?;
                if line.trim().is_empty() {
                    continue;
                }
                // a torn final line from an interrupted run is skipped
                if let Ok(r) = serde_json::from_str::<CacheRecord>(&line) {
                    records.insert(r.key, r.estimate);
                }
            }
        }
        Ok(SubsetCache { path, records })
    }

    /// Opens the directory named by [`CACHE_DIR_ENV`], if set.
    pub fn from_env() -> Result<Option<Self>> {
        match std::env::var_os(CACHE_DIR_ENV) {
            Some(d) if !d.is_empty() => Ok(Some(Self::open(Path::new(&d))?)),
            _ => Ok(None),
        }
    }

    fn key(plan: &str, s: usize, t: usize, cfg: &SamplerConfig) -> String {
        format!("{plan}:{s}:{t}:{}:{}:{}", cfg.shots, cfg.batch, cfg.seed)
    }

    pub fn get(&self, plan: &str, s: usize, t: usize, cfg: &SamplerConfig) -> Option<SubsetEstimate> {
        self.records.get(&Self::key(plan, s, t, cfg)).copied()
    }

    pub fn insert(&mut self, plan: &str, est: SubsetEstimate, cfg: &SamplerConfig) -> Result<()> {
        let key = Self::key(plan, est.s, est.t, cfg);
        let rec = CacheRecord { key: key.clone(), plan: plan.to_string(), estimate: est, seed: cfg.seed };
        let mut f = OpenOptions::new().create(true).append(true).open(&self.path)?;
        writeln!(f, "{}", serde_json::to_string(&rec)?)?;
        self.records.insert(key, est);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

impl Experiment {
    /// Failure statistics of one subset: exhaustive when the configuration
    /// count fits in the shot budget, sampled otherwise.
    pub fn estimate_subset(&self, space: &FaultSpace, s: usize, t: usize, cfg: &SamplerConfig) -> Result<SubsetEstimate> {
        let (n_s, n_t) = space.counts();
        if s > n_s || t > n_t {
            return Err(Error::SubsetOutOfRange { s, t, n_s, n_t });
        }
        let count = subset_configuration_count(space, s, t);
        if count <= cfg.shots as f64 {
            let (mut p_state, mut p_any) = (0.0, 0.0);
            for_each_configuration(space, s, t, |c, w| {
                let o = self.run_shot(c);
                if o.fails(Metric::State) {
                    p_state += w;
                }
                if o.fails(Metric::AnyLogical) {
                    p_any += w;
                }
            })?;
            return Ok(SubsetEstimate {
                s,
                t,
                shots: count as u64,
                exact: true,
                p_state,
                p_any,
                failures_state: 0,
                failures_any: 0,
            });
        }
        let batch = cfg.batch.max(1);
        let n_batches = cfg.shots.div_ceil(batch);
        let (fs, fa) = (0..n_batches)
            .into_par_iter()
            .map(|b| {
                let mut rng = stream_rng(cfg.seed, (s as u64) << 44 | (t as u64) << 24 | b);
                let shots = batch.min(cfg.shots - b * batch);
                let (mut fs, mut fa) = (0u64, 0u64);
                for _ in 0..shots {
                    let c = sample_from_subset(space, s, t, &mut rng).expect("range checked");
                    let o = self.run_shot(&c);
                    fs += o.fails(Metric::State) as u64;
                    fa += o.fails(Metric::AnyLogical) as u64;
                }
                (fs, fa)
            })
            .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
        Ok(SubsetEstimate {
            s,
            t,
            shots: cfg.shots,
            exact: false,
            p_state: fs as f64 / cfg.shots as f64,
            p_any: fa as f64 / cfg.shots as f64,
            failures_state: fs,
            failures_any: fa,
        })
    }

    /// Estimates every subset needed for rates up to `(p_s_max, p_t_max)`.
    pub fn importance_subsets(
        &self,
        kind: NoiseKind,
        p_s_max: f64,
        p_t_max: f64,
        cfg: &SamplerConfig,
        mut cache: Option<&mut SubsetCache>,
    ) -> Result<Vec<SubsetEstimate>> {
        let space = self.fault_space(kind);
        let (n_s, n_t) = space.counts();
        let (subsets, _) = enumerate_subsets(n_s, n_t, p_s_max, p_t_max, cfg.tolerance)?;
        let plan = self.plan_hash(kind);
        let mut out = vec![None; subsets.len()];
        let mut todo = Vec::new();
        for (i, &(s, t)) in subsets.iter().enumerate() {
            match cache.as_ref().and_then(|c| c.get(&plan, s, t, cfg)) {
                Some(e) => out[i] = Some(e),
                None => todo.push(i),
            }
        }
        let computed: Vec<(usize, Result<SubsetEstimate>)> = todo
            .par_iter()
            .map(|&i| {
                let (s, t) = subsets[i];
                if s == 0 && t == 0 {
                    // nothing to simulate: the fault-free protocol never fails
                    return (i, Ok(SubsetEstimate { s, t, shots: 1, exact: true, p_state: 0.0, p_any: 0.0, failures_state: 0, failures_any: 0 }));
                }
                (i, self.estimate_subset(&space, s, t, cfg))
            })
            .collect();
        for (i, r) in computed {
            let e = r?;
            if let Some(c) = cache.as_deref_mut() {
                c.insert(&plan, e, cfg)?;
            }
            out[i] = Some(e);
        }
        Ok(out.into_iter().map(|e| e.expect("filled")).collect())
    }
}

/// One point of a logical-error-rate curve.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub p: f64,
    pub p_l: f64,
    pub stderr: f64,
    /// Shots that entered the estimate (configurations for exact subsets).
    pub shots: u64,
    /// Probability mass of subsets left out (an upper bound on the bias).
    pub excluded_mass: f64,
}

/// `p_L(p) = Σ A_{s,t}(p) p_L(s,t)` with `p_s = p_t = p`.
pub fn combine_subsets(estimates: &[SubsetEstimate], n_s: usize, n_t: usize, p: f64, metric: Metric) -> CurvePoint {
    combine_rates(estimates, n_s, n_t, p, p, metric)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sampler {
    Importance,
    Traditional,
}

impl Sampler {
    pub fn name(self) -> &'static str {
        match self {
            Sampler::Importance => "importance",
            Sampler::Traditional => "traditional",
        }
    }
}

impl std::str::FromStr for Sampler {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "importance" => Ok(Sampler::Importance),
            "traditional" => Ok(Sampler::Traditional),
            _ => Err(Error::Parse(format!("unknown sampler {s:?}"))),
        }
    }
}

/// Rates at grid point `p`: `p_s = p_t = p_meas = p` unless overridden.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RateOverrides {
    pub p_s: Option<f64>,
    pub p_t: Option<f64>,
    pub p_meas: Option<f64>,
}

impl RateOverrides {
    pub fn model(&self, kind: NoiseKind, p: f64) -> Result<NoiseModel> {
        NoiseModel::new(kind, self.p_s.unwrap_or(p), self.p_t.unwrap_or(p), self.p_meas.unwrap_or(self.p_s.unwrap_or(p)))
    }
}

impl Experiment {
    /// Traditional Monte Carlo at one noise model.
    pub fn traditional_point(&self, model: &NoiseModel, cfg: &SamplerConfig, stream_tag: u64) -> (u64, u64) {
        let space = self.fault_space(model.kind);
        let batch = cfg.batch.max(1);
        let n_batches = cfg.shots.div_ceil(batch);
        (0..n_batches)
            .into_par_iter()
            .map(|b| {
                let mut rng = stream_rng(cfg.seed, 1 << 63 | stream_tag << 32 | b);
                let shots = batch.min(cfg.shots - b * batch);
                let (mut fs, mut fa) = (0u64, 0u64);
                for _ in 0..shots {
                    let c = sample_traditional(&space, model, &mut rng);
                    if c.is_empty() {
                        continue;
                    }
                    let o = self.run_shot(&c);
                    fs += o.fails(Metric::State) as u64;
                    fa += o.fails(Metric::AnyLogical) as u64;
                }
                (fs, fa)
            })
            .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1))
    }

    /// Logical error rate over a grid of physical rates.
    #[allow(clippy::too_many_arguments)]
    pub fn estimate_logical_rate(
        &self,
        kind: NoiseKind,
        grid: &[f64],
        overrides: &RateOverrides,
        sampler: Sampler,
        metric: Metric,
        cfg: &SamplerConfig,
        cache: Option<&mut SubsetCache>,
    ) -> Result<Vec<CurvePoint>> {
        if grid.is_empty() {
            return Ok(Vec::new());
        }
        let models = grid.iter().map(|&p| overrides.model(kind, p)).collect::<Result<Vec<_>>>()?;
        match sampler {
            Sampler::Importance => {
                if models.iter().any(|m| m.p_meas != m.p_s) {
                    return Err(Error::InvalidParameter(
                        "the importance sampler needs p_meas = p_s (measurements count as single-qubit locations)".into(),
                    ));
                }
                let ps_max = models.iter().map(|m| m.p_s).fold(0.0, f64::max);
                let pt_max = models.iter().map(|m| m.p_t).fold(0.0, f64::max);
                let est = self.importance_subsets(kind, ps_max, pt_max, cfg, cache)?;
                let (n_s, n_t) = self.fault_space(kind).counts();
                Ok(models
                    .iter()
                    .zip(grid)
                    .map(|(m, &p)| {
                        let mut pt = combine_rates(&est, n_s, n_t, m.p_s, m.p_t, metric);
                        pt.p = p;
                        pt
                    })
                    .collect())
            }
            Sampler::Traditional => Ok(models
                .iter()
                .zip(grid)
                .enumerate()
                .map(|(i, (m, &p))| {
                    let (fs, fa) = self.traditional_point(m, cfg, i as u64);
                    let k = match metric {
                        Metric::State => fs,
                        Metric::AnyLogical => fa,
                    };
                    let n = cfg.shots.max(1) as f64;
                    let p_l = k as f64 / n;
                    CurvePoint { p, p_l, stderr: (p_l * (1.0 - p_l) / n).sqrt(), shots: cfg.shots, excluded_mass: 0.0 }
                })
                .collect()),
        }
    }
}

/// As [`combine_subsets`] with independent single- and two-qubit rates.
pub fn combine_rates(est: &[SubsetEstimate], n_s: usize, n_t: usize, p_s: f64, p_t: f64, metric: Metric) -> CurvePoint {
    let mut p_l = 0.0;
    let mut var = 0.0;
    let mut mass = 0.0;
    let mut shots = 0;
    for e in est {
        let a = e.weight(n_s, n_t, p_s, p_t);
        mass += a;
        p_l += a * e.p_l(metric);
        var += a * a * e.variance(metric);
        shots += e.shots;
    }
    CurvePoint { p: p_s, p_l, stderr: var.sqrt(), shots, excluded_mass: (1.0 - mass).max(0.0) }
}

/// A malignant fault configuration found by certification.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MalignantFault {
    /// Replay-log lines, one per fault.
    pub faults: Vec<String>,
    pub coset: CosetClass,
    /// Syndrome and flag bits of every executed round.
    pub trace: Vec<String>,
    pub correction: String,
    pub residual: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FtReport {
    pub code: String,
    pub method: Method,
    pub model: NoiseKind,
    pub order: usize,
    pub metric: Metric,
    pub total_configurations: u64,
    pub malignant_state: u64,
    pub malignant_any: u64,
    /// Configurations that fail under `metric`.
    pub malignant: Vec<MalignantFault>,
}

impl FtReport {
    pub fn is_fault_tolerant(&self) -> bool {
        self.malignant.is_empty()
    }

    pub fn verdict(&self) -> &'static str {
        if self.is_fault_tolerant() {
            "FT"
        } else {
            "NOT-FT"
        }
    }
}

impl Experiment {
    fn describe(&self, space: &FaultSpace, c: &FaultConfiguration, o: &ShotOutcome) -> MalignantFault {
        MalignantFault {
            faults: c.to_log(space).lines().map(str::to_string).collect(),
            coset: o.coset,
            trace: o
                .records
                .iter()
                .map(|r| {
                    if r.flags == 0 {
                        r.syndrome.to_string()
                    } else {
                        format!("{} flags={:b}", r.syndrome, r.flags)
                    }
                })
                .collect(),
            correction: o.correction.to_string(),
            residual: o.after_correction.to_string(),
        }
    }

    /// Runs the protocol on every fault (order 1) or pair of faults on
    /// distinct sites (order 2) and lists the failures under `metric`.
    pub fn certify_ft(&self, kind: NoiseKind, order: usize, metric: Metric) -> Result<FtReport> {
        if !(1..=2).contains(&order) {
            return Err(Error::InvalidParameter(format!("certification order {order} not in 1..=2")));
        }
        let space = self.fault_space(kind);
        let singles: Vec<InjectedFault> = space.order_one().collect();
        let check = |c: &FaultConfiguration| {
            let o = self.run_shot(c);
            (o.fails(Metric::State), o.fails(Metric::AnyLogical), metric.fails(o.coset).then(|| self.describe(&space, c, &o)))
        };
        let results: Vec<(bool, bool, Option<MalignantFault>)> = if order == 1 {
            singles
                .par_iter()
                .map(|&f| check(&FaultConfiguration::new(vec![f]).expect("single fault")))
                .collect()
        } else {
            (0..singles.len())
                .into_par_iter()
                .flat_map_iter(|i| {
                    let singles = &singles;
                    let check = &check;
                    (i + 1..singles.len())
                        .filter(move |&j| singles[j].site != singles[i].site)
                        .map(move |j| check(&FaultConfiguration::new(vec![singles[i], singles[j]]).expect("distinct sites")))
                })
                .collect()
        };
        let total = results.len() as u64;
        let malignant_state = results.iter().filter(|r| r.0).count() as u64;
        let malignant_any = results.iter().filter(|r| r.1).count() as u64;
        Ok(FtReport {
            code: self.plan.code.name().to_string(),
            method: self.plan.method,
            model: kind,
            order,
            metric,
            total_configurations: total,
            malignant_state,
            malignant_any,
            malignant: results.into_iter().filter_map(|r| r.2).collect(),
        })
    }

    /// Order-1 slope `n_s p_L(1,0) + n_t p_L(0,1)` from exact enumeration:
    /// the linear coefficient of `p_L(p)` at `p_s = p_t = p`.
    pub fn order_one_slope(&self, kind: NoiseKind, metric: Metric) -> Result<f64> {
        let space = self.fault_space(kind);
        let (n_s, n_t) = space.counts();
        let cfg = SamplerConfig { shots: u64::MAX, ..SamplerConfig::default() };
        let e10 = self.estimate_subset(&space, 1, 0, &cfg)?;
        let e01 = self.estimate_subset(&space, 0, 1, &cfg)?;
        Ok(n_s as f64 * e10.p_l(metric) + n_t as f64 * e01.p_l(metric))
    }
}
