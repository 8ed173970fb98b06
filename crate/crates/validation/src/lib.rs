//! Acceptance checks for the bare713 simulator.
//!
//! Each criterion returns an [`Outcome`] instead of panicking, so a runner can
//! report every criterion even when some fail.

use std::collections::BTreeMap;
use std::time::Instant;

use bare713::analysis::{log_grid, summarize, FitSummary};
use bare713::circuits::{build_bare_round, build_flag_round, Circuit, Method, Operation, Registers, Tags};
use bare713::codes::{bare_713, five_qubit_513, steane_713, CosetClass, StabilizerCode};
use bare713::decoder::single_qubit_listing;
use bare713::engine::{frame_matches_tableau, run_frame};
use bare713::noise::{
    for_each_configuration, sample_from_subset, sample_traditional, FaultConfiguration, FaultEffect, FaultSpace,
    NoiseKind, NoiseModel,
};
use bare713::pauli::{Pauli, PauliString};
use bare713::runner::{subset_weight, Experiment, Metric, RateOverrides, Sampler, SamplerConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Result of one criterion.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub pass: bool,
    /// One line per sub-check.
    pub details: Vec<String>,
    pub seconds: f64,
}

#[derive(Default)]
struct Report {
    failed: bool,
    details: Vec<String>,
}

impl Report {
    fn check(&mut self, ok: bool, line: impl Into<String>) {
        let line = line.into();
        self.failed |= !ok;
        self.details.push(format!("[{}] {line}", if ok { "ok" } else { "FAIL" }));
    }

    fn fail(&mut self, line: impl Into<String>) {
        self.check(false, line);
    }

    fn finish(self, start: Instant) -> Outcome {
        Outcome { pass: !self.failed, details: self.details, seconds: start.elapsed().as_secs_f64() }
    }
}

/// A numbered criterion with a short title.
pub struct Criterion {
    pub id: u32,
    pub title: &'static str,
    pub run: fn() -> Outcome,
}

pub const CRITERIA: &[Criterion] = &[
    Criterion { id: 1, title: "single-qubit syndrome table", run: criterion_1 },
    Criterion { id: 2, title: "hook and XX propagation", run: criterion_2 },
    Criterion { id: 3, title: "flag-circuit propagation tables", run: criterion_3 },
    Criterion { id: 4, title: "exhaustive order-1 certification", run: criterion_4 },
    Criterion { id: 5, title: "pseudothresholds", run: criterion_5 },
    Criterion { id: 6, title: "linear term of bare+standard", run: criterion_6 },
    Criterion { id: 7, title: "importance vs traditional sampler", run: criterion_7 },
    Criterion { id: 8, title: "tableau vs frame backends", run: criterion_8 },
    Criterion { id: 9, title: "subset weights and conditional sampling", run: criterion_9 },
];

pub const SINGLE_QUBIT_SYNDROMES: &str = "\
Z0 -> 100000
X0 -> 000001
Y0 -> 100001
Z1 -> 010000
X1 -> 000001
Y1 -> 010001
Z2 -> 001000
X2 -> 000011
Y2 -> 001011
Z3 -> 000101
X3 -> 000010
Y3 -> 000111
Z4 -> 110000
X4 -> 000001
Y4 -> 110001
Z5 -> 001010
X5 -> 000011
Y5 -> 001001
Z6 -> 000110
X6 -> 000010
Y6 -> 000100
";

/// (gate, fault as (data, ancilla), data error, syndrome) for the weight-4 generator.
pub const FLAG_WEIGHT_FOUR: &[(char, &str, &str, &str)] = &[
    ('b', "IX", "Y5 Y6", "001101"),
    ('b', "XX", "X3 Y5 Y6", "001111"),
    ('b', "YX", "Y3 Y5 Y6", "001010"),
    ('b', "ZX", "Z3 Y5 Y6", "001000"),
    ('c', "IX", "Y6", "000100"),
    ('c', "XX", "X5 Y6", "000111"),
    ('c', "YX", "Y5 Y6", "001101"),
    ('c', "ZX", "Z5 Y6", "001110"),
];

/// Same for the weight-6 generator.
pub const FLAG_WEIGHT_SIX: &[(char, &str, &str, &str)] = &[
    ('b', "IX", "Z1 Z2 Z4 Z5", "100010"),
    ('b', "XX", "Z1 Z2 X3 Z4 Z5", "100000"),
    ('b', "YX", "Z1 Z2 Y3 Z4 Z5", "100101"),
    ('b', "ZX", "Z1 Z2 Z3 Z4 Z5", "100111"),
    ('c', "IX", "Z1 Z2 Z5", "010010"),
    ('c', "XX", "Z1 Z2 X4 Z5", "010011"),
    ('c', "YX", "Z1 Z2 Y4 Z5", "100011"),
    ('c', "ZX", "Z1 Z2 Z4 Z5", "100010"),
    ('d', "IX", "Z1 Z5", "011010"),
    ('d', "XX", "Z1 X2 Z5", "011001"),
    ('d', "YX", "Z1 Y2 Z5", "010001"),
    ('d', "ZX", "Z1 Z2 Z5", "010010"),
    ('e', "IX", "Z5", "001010"),
    ('e', "XX", "X1 Z5", "001011"),
    ('e', "YX", "Y1 Z5", "011011"),
    ('e', "ZX", "Z1 Z5", "011010"),
];

fn p7(s: &str) -> PauliString {
    PauliString::parse_sparse(7, s).expect("valid literal")
}

fn letter(c: char) -> Pauli {
    Pauli::from_letter(c).expect("valid letter")
}

/// Location of coupling `gate` of stabilizer `stab` in round 0.
fn coupling(c: &Circuit, stab: usize, gate: char) -> Option<usize> {
    c.locations()
        .iter()
        .find(|l| l.tags.round == 0 && l.tags.stabilizer == Some(stab) && l.tags.gate == Some(gate))
        .map(|l| l.id)
}

/// The two-qubit fault `data ⊗ ancilla` right after a coupling.
fn pair_fault(space: &FaultSpace, c: &Circuit, location: usize, data: Pauli, ancilla: Pauli) -> Option<FaultConfiguration> {
    let Operation::ControlledPauli { control, target, .. } = c.locations()[location].op else {
        return None;
    };
    let site = space.sites().iter().position(|s| s.location == location)?;
    let option = space.sites()[site].options.iter().position(|o| match o {
        FaultEffect::Pauli(p) => p.get(control) == ancilla && p.get(target) == data,
        FaultEffect::MeasFlip => false,
    })?;
    FaultConfiguration::new(vec![space.fault(site, option).ok()?]).ok()
}

fn round_fault(c: &Circuit, stab: usize, gate: char, data: Pauli, ancilla: Pauli) -> Option<FaultConfiguration> {
    let space = FaultSpace::new(c, NoiseKind::Standard);
    pair_fault(&space, c, coupling(c, stab, gate)?, data, ancilla)
}

pub fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut r = Report::default();
    let listing = single_qubit_listing(&bare_713());
    let mismatches: Vec<String> = SINGLE_QUBIT_SYNDROMES
        .lines()
        .zip(listing.lines())
        .filter(|(a, b)| a != b)
        .map(|(a, b)| format!("want {a}, got {b}"))
        .collect();
    r.check(listing == SINGLE_QUBIT_SYNDROMES, format!("21 rows match exactly ({} mismatches) {mismatches:?}", mismatches.len()));
    let s = start.elapsed().as_secs_f64();
    r.check(s < 1.0, format!("runtime {s:.3} s < 1 s"));
    r.finish(start)
}

pub fn criterion_2() -> Outcome {
    let start = Instant::now();
    let mut r = Report::default();
    let code = bare_713();
    let c = match build_bare_round(&code) {
        Ok(c) => c,
        Err(e) => {
            r.fail(format!("bare round: {e}"));
            return r.finish(start);
        }
    };
    for (gate, rep, syn) in [('b', "Z0 Z2", "101000"), ('c', "Z0 Z2 X3", "101010"), ('d', "Z4 Z5", "111010")] {
        let Some(f) = round_fault(&c, 5, gate, Pauli::I, Pauli::X) else {
            r.fail(format!("no ancilla X fault after gate {gate}"));
            continue;
        };
        let e = run_frame(&c, &f).residual;
        let got = code.syndrome_unchecked(&e).to_string();
        let eq = code.equivalent(&e, &p7(rep)).unwrap_or(false);
        r.check(eq && got == syn, format!("ancilla X after gate {gate}: {e} ~ {rep}, syndrome {got} (want {syn})"));
    }
    let decoder = match Experiment::new(&code, Method::Bare) {
        Ok(e) => e.decoder,
        Err(e) => {
            r.fail(format!("experiment: {e}"));
            return r.finish(start);
        }
    };
    // (stabilizer, gate, residual, syndrome, correction, final class)
    let cases = [
        (5, 'b', "Z1 X2 X3 Z4 Z5", "101011", "Y1 Z4 Z5", CosetClass::LogicalX),
        (4, 'c', "X5 Y6", "000111", "Y3", CosetClass::LogicalZ),
    ];
    for (stab, gate, residual, syn, corr, class) in cases {
        let Some(f) = round_fault(&c, stab, gate, Pauli::X, Pauli::X) else {
            r.fail(format!("no XX fault at stabilizer {stab} gate {gate}"));
            continue;
        };
        let e = run_frame(&c, &f).residual;
        let s = code.syndrome_unchecked(&e);
        let correction = decoder.decode(&s, 0);
        let after = e.mul_unchecked(&correction);
        let got_class = code.classify_unchecked(&after);
        r.check(
            e.unsigned() == p7(residual) && s.to_string() == syn && correction.unsigned() == p7(corr) && got_class == class,
            format!("XX at stabilizer {stab} gate {gate}: {e} -> {s} -> correction {correction} -> {after} {got_class:?}"),
        );
    }
    let s = start.elapsed().as_secs_f64();
    r.check(s < 1.0, format!("runtime {s:.3} s < 1 s"));
    r.finish(start)
}

pub fn criterion_3() -> Outcome {
    let start = Instant::now();
    let mut r = Report::default();
    let code = bare_713();
    let c = match build_flag_round(&code) {
        Ok(c) => c,
        Err(e) => {
            r.fail(format!("flag round: {e}"));
            return r.finish(start);
        }
    };
    for (stab, rows) in [(4usize, FLAG_WEIGHT_FOUR), (5, FLAG_WEIGHT_SIX)] {
        let mut bad = Vec::new();
        for &(gate, fault, data, syn) in rows {
            let l: Vec<char> = fault.chars().collect();
            let Some(f) = round_fault(&c, stab, gate, letter(l[0]), letter(l[1])) else {
                bad.push(format!("{gate} {fault}: no such fault"));
                continue;
            };
            let run = run_frame(&c, &f);
            let s = code.syndrome_unchecked(&run.residual).to_string();
            if run.residual.unsigned() != p7(data) || s != syn || run.rounds[0].flags != 1 << stab {
                bad.push(format!("{gate} {fault}: got {} -> {s}, flags {:b}", run.residual, run.rounds[0].flags));
            }
        }
        r.check(bad.is_empty(), format!("stabilizer {stab}: {} rows, mismatches {bad:?}", rows.len()));
    }
    let s = start.elapsed().as_secs_f64();
    r.check(s < 1.0, format!("runtime {s:.3} s < 1 s"));
    r.finish(start)
}

/// Replay-log line of the round-0 `XX` fault at a bare-circuit coupling.
fn protocol_fault_log(exp: &Experiment, stab: usize, gate: char) -> Option<String> {
    let space = exp.fault_space(NoiseKind::Standard);
    let c = &exp.plan.noisy;
    let f = pair_fault(&space, c, coupling(c, stab, gate)?, Pauli::X, Pauli::X)?;
    Some(f.to_log(&space).trim_end().to_string())
}

pub fn criterion_4() -> Outcome {
    let start = Instant::now();
    let mut r = Report::default();
    let code = bare_713();
    let (Ok(bare), Ok(flag)) = (Experiment::new(&code, Method::Bare), Experiment::new(&code, Method::Flag)) else {
        r.fail("cannot build experiments");
        return r.finish(start);
    };
    for (name, exp, kind) in [("bare+anisotropic", &bare, NoiseKind::Anisotropic), ("flag+standard", &flag, NoiseKind::Standard)] {
        match exp.certify_ft(kind, 1, Metric::AnyLogical) {
            Ok(rep) => r.check(
                rep.malignant_any == 0 && rep.malignant_state == 0,
                format!("{name}: {} of {} order-1 faults malignant ({})", rep.malignant_any, rep.total_configurations, rep.verdict()),
            ),
            Err(e) => r.fail(format!("{name}: {e}")),
        }
    }
    match bare.certify_ft(NoiseKind::Standard, 1, Metric::AnyLogical) {
        Ok(rep) => {
            r.check(
                rep.malignant_any >= 1,
                format!("bare+standard: {} of {} order-1 faults malignant ({})", rep.malignant_any, rep.total_configurations, rep.verdict()),
            );
            for (label, stab, gate) in [("XX after C-Z2 of the weight-6 generator", 5, 'b'), ("XX after C-Y5 of the weight-4 generator", 4, 'c')] {
                let log = protocol_fault_log(&bare, stab, gate);
                let found = log.as_ref().is_some_and(|l| rep.malignant.iter().any(|m| m.faults.len() == 1 && &m.faults[0] == l));
                r.check(found, format!("malignant list contains {label} ({})", log.unwrap_or_default()));
            }
        }
        Err(e) => r.fail(format!("bare+standard: {e}")),
    }
    r.finish(start)
}

/// Importance-sampled state-metric curve and its fit on the standard grid.
fn fitted_curve(exp: &Experiment, kind: NoiseKind, fault_tolerant: bool) -> bare713::Result<FitSummary> {
    let grid = log_grid(1e-5, 5e-3, 14);
    let cfg = SamplerConfig { shots: 100_000, tolerance: 1e-8, ..SamplerConfig::default() };
    let curve = exp.estimate_logical_rate(kind, &grid, &RateOverrides::default(), Sampler::Importance, Metric::State, &cfg, None)?;
    summarize(&curve, fault_tolerant)
}

pub fn criterion_5() -> Outcome {
    let start = Instant::now();
    let mut r = Report::default();
    let code = bare_713();
    let mut found = BTreeMap::new();
    for (name, method, kind, target) in [
        ("flag+standard", Method::Flag, NoiseKind::Standard, 1.08e-3),
        ("bare+anisotropic", Method::Bare, NoiseKind::Anisotropic, 2.0e-4),
        ("flag+anisotropic", Method::Flag, NoiseKind::Anisotropic, 4.0e-4),
    ] {
        let fit = Experiment::new(&code, method).and_then(|e| fitted_curve(&e, kind, true));
        match fit {
            Ok(s) => match (s.pseudothreshold.p_star, s.pseudothreshold.interval) {
                (Some(p), Some((lo, hi))) => {
                    let rel = p / target - 1.0;
                    r.check(
                        rel.abs() <= 0.25,
                        format!("{name}: p* = {p:.3e} (± {:.1e}), target {target:.2e}, deviation {:+.0}%", (hi - lo) / 2.0, rel * 100.0),
                    );
                    found.insert(name, p);
                }
                _ => r.fail(format!("{name}: {}", s.pseudothreshold.label)),
            },
            Err(e) => r.fail(format!("{name}: {e}")),
        }
    }
    match (found.get("flag+anisotropic"), found.get("bare+anisotropic")) {
        (Some(f), Some(b)) => r.check(f > b, format!("ordering p*(flag, anisotropic) = {f:.3e} > p*(bare, anisotropic) = {b:.3e}")),
        _ => r.fail("ordering: missing pseudothreshold"),
    }
    r.finish(start)
}

pub fn criterion_6() -> Outcome {
    let start = Instant::now();
    let mut r = Report::default();
    let code = bare_713();
    let result = Experiment::new(&code, Method::Bare).and_then(|exp| {
        let slope = exp.order_one_slope(NoiseKind::Standard, Metric::State)?;
        let s = fitted_curve(&exp, NoiseKind::Standard, false)?;
        Ok((slope, s))
    });
    match result {
        Ok((slope, s)) => {
            let a = s.fit.coefficient(1);
            let sa = s.fit.coefficient_stderr(1);
            r.check(a > 0.0 && a / sa > 5.0, format!("linear coefficient a = {a:.5} ± {sa:.1e} ({:.0} σ)", a / sa));
            let z = (a - slope) / sa;
            r.check(z.abs() <= 3.0, format!("exhaustive order-1 mass {slope:.5}, difference {z:+.2} σ"));
        }
        Err(e) => r.fail(e.to_string()),
    }
    r.finish(start)
}

pub fn criterion_7() -> Outcome {
    let start = Instant::now();
    let mut r = Report::default();
    let grid = [5e-4, 1e-3];
    let importance = SamplerConfig { shots: 100_000, tolerance: 1e-8, ..SamplerConfig::default() };
    let traditional = SamplerConfig { shots: 1_000_000, seed: 2, ..SamplerConfig::default() };
    for (name, code, method) in [
        ("steane+shor", steane_713(), Method::Shor),
        ("five-qubit+shor", five_qubit_513(), Method::Shor),
        ("bare713+bare", bare_713(), Method::Bare),
    ] {
        let curves = Experiment::new(&code, method).and_then(|exp| {
            let o = RateOverrides::default();
            let a = exp.estimate_logical_rate(NoiseKind::Standard, &grid, &o, Sampler::Importance, Metric::State, &importance, None)?;
            let b = exp.estimate_logical_rate(NoiseKind::Standard, &grid, &o, Sampler::Traditional, Metric::State, &traditional, None)?;
            Ok((a, b))
        });
        match curves {
            Ok((a, b)) => {
                for (x, y) in a.iter().zip(&b) {
                    let sigma = x.stderr.hypot(x.excluded_mass).hypot(y.stderr);
                    let z = (x.p_l - y.p_l) / sigma;
                    r.check(
                        z.abs() <= 3.0,
                        format!("{name} p = {:.0e}: importance {:.4e} ± {:.1e}, traditional {:.4e} ± {:.1e} ({z:+.2} σ)", x.p, x.p_l, x.stderr, y.p_l, y.stderr),
                    );
                }
            }
            Err(e) => r.fail(format!("{name}: {e}")),
        }
    }
    r.finish(start)
}

fn plans() -> Vec<(StabilizerCode, Method)> {
    vec![
        (bare_713(), Method::Bare),
        (bare_713(), Method::Flag),
        (steane_713(), Method::Shor),
        (five_qubit_513(), Method::Shor),
    ]
}

pub fn criterion_8() -> Outcome {
    let start = Instant::now();
    let mut r = Report::default();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut spaces = Vec::new();
    let (mut exhaustive, mut bad) = (0usize, 0usize);
    for (code, method) in plans() {
        let Ok(exp) = Experiment::new(&code, method) else {
            r.fail(format!("cannot build {} {method}", code.name()));
            continue;
        };
        for kind in [NoiseKind::Standard, NoiseKind::Anisotropic] {
            let space = exp.fault_space(kind);
            for f in space.order_one() {
                let cfg = FaultConfiguration::new(vec![f]).expect("single fault");
                exhaustive += 1;
                bad += !frame_matches_tableau(&code, &exp.plan.noisy, &cfg, &mut rng) as usize;
            }
            spaces.push((code.clone(), exp.plan.noisy.clone(), space));
        }
    }
    r.check(bad == 0, format!("order 1: {} of {exhaustive} configurations agree", exhaustive - bad));
    let n = 10_000;
    let mut bad = 0;
    for _ in 0..n {
        let (code, circuit, space) = &spaces[rng.random_range(0..spaces.len())];
        let order = rng.random_range(1..=4);
        let s = rng.random_range(0..=order);
        match sample_from_subset(space, s, order - s, &mut rng) {
            Ok(cfg) => bad += !frame_matches_tableau(code, circuit, &cfg, &mut rng) as usize,
            Err(_) => bad += 1,
        }
    }
    r.check(bad == 0, format!("random order 1-4: {} of {n} configurations agree", n - bad));
    let s = start.elapsed().as_secs_f64();
    r.check(s < 600.0, format!("runtime {s:.1} s < 10 min"));
    r.finish(start)
}

/// Two data qubits read out through one ancilla.
fn tiny_circuit() -> Circuit {
    let mut c = Circuit::new(Registers { n_data: 2, n_ancilla: 1, n_flag: 0 }, 1);
    let tags = Tags { stabilizer: Some(0), ..Tags::default() };
    c.push(Operation::PrepZero(2), tags);
    c.push(Operation::ControlledPauli { pauli: Pauli::X, control: 0, target: 2 }, tags);
    c.push(Operation::ControlledPauli { pauli: Pauli::X, control: 1, target: 2 }, tags);
    c.push(Operation::MeasureZ(2), tags);
    c
}

/// Two-sample chi-square p-value between traditional draws conditioned on
/// subset `(1, 1)` and direct subset draws.
fn conditional_sampling_p_value(n: usize, seed: u64) -> bare713::Result<f64> {
    let c = tiny_circuit();
    let space = FaultSpace::new(&c, NoiseKind::Standard);
    let model = NoiseModel::uniform(NoiseKind::Standard, 0.2)?;
    let key = |cfg: &FaultConfiguration| cfg.faults().iter().map(|f| (f.site, f.option)).collect::<Vec<_>>();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut conditioned: BTreeMap<Vec<(usize, usize)>, f64> = BTreeMap::new();
    let mut kept = 0;
    while kept < n {
        let cfg = sample_traditional(&space, &model, &mut rng);
        if cfg.subset(&space) == (1, 1) {
            *conditioned.entry(key(&cfg)).or_default() += 1.0;
            kept += 1;
        }
    }
    let mut direct: BTreeMap<Vec<(usize, usize)>, f64> = BTreeMap::new();
    for _ in 0..n {
        *direct.entry(key(&sample_from_subset(&space, 1, 1, &mut rng)?)).or_default() += 1.0;
    }
    let mut cats = Vec::new();
    for_each_configuration(&space, 1, 1, |cfg, _| cats.push(key(cfg)))?;
    let mut chi2 = 0.0;
    for k in &cats {
        let a = conditioned.get(k).copied().unwrap_or(0.0);
        let b = direct.get(k).copied().unwrap_or(0.0);
        // equal sample sizes: both expectations are the pooled mean
        let e = (a + b) / 2.0;
        if e > 0.0 {
            chi2 += (a - e).powi(2) / e + (b - e).powi(2) / e;
        }
    }
    let dist = ChiSquared::new((cats.len() - 1) as f64).map_err(|e| bare713::Error::InvalidParameter(e.to_string()))?;
    Ok(1.0 - dist.cdf(chi2))
}

pub fn criterion_9() -> Outcome {
    let start = Instant::now();
    let mut r = Report::default();
    for (n_s, n_t, p) in [(144usize, 54usize, 1e-3), (180, 66, 5e-3), (66, 180, 0.2)] {
        let mut sum = 0.0;
        for s in 0..=n_s {
            for t in 0..=n_t {
                sum += subset_weight(s, t, n_s, n_t, p, p).unwrap_or(f64::NAN);
            }
        }
        r.check((sum - 1.0).abs() <= 1e-12, format!("sum of A over n_s = {n_s}, n_t = {n_t}, p = {p}: 1 {:+.1e}", sum - 1.0));
    }
    match conditional_sampling_p_value(20_000, 9) {
        Ok(p) => r.check(p > 0.01, format!("conditioned traditional vs subset sampler: chi-square p-value {p:.3}")),
        Err(e) => r.fail(e.to_string()),
    }
    let s = start.elapsed().as_secs_f64();
    r.check(s < 600.0, format!("runtime {s:.1} s < 10 min"));
    r.finish(start)
}

