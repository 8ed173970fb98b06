//! Fault models, fault sites and the two fault-configuration samplers.

use std::fmt::{self, Write as _};

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::circuits::{Circuit, Operation};
use crate::error::{Error, Result};
use crate::pauli::{Pauli, PauliString};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseKind {
    /// Uniform over the 15 non-identity two-qubit Paulis after each gate.
    Standard,
    /// Correlated `Z ⊗ P` after a controlled-`P`, then single-qubit depolarizing.
    Anisotropic,
}

impl NoiseKind {
    pub fn name(self) -> &'static str {
        match self {
            NoiseKind::Standard => "standard",
            NoiseKind::Anisotropic => "anisotropic",
        }
    }
}

impl fmt::Display for NoiseKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for NoiseKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "standard" => Ok(NoiseKind::Standard),
            "anisotropic" => Ok(NoiseKind::Anisotropic),
            _ => Err(Error::Parse(format!("unknown noise model {s:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub kind: NoiseKind,
    pub p_s: f64,
    pub p_t: f64,
    pub p_meas: f64,
}

impl NoiseModel {
    /// `p_s = p_t = p_meas = p`.
    pub fn uniform(kind: NoiseKind, p: f64) -> Result<Self> {
        Self::new(kind, p, p, p)
    }

    pub fn new(kind: NoiseKind, p_s: f64, p_t: f64, p_meas: f64) -> Result<Self> {
        for (name, v) in [("p_s", p_s), ("p_t", p_t), ("p_meas", p_meas)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidParameter(format!("{name} = {v} is not in [0, 1]")));
            }
        }
        Ok(NoiseModel { kind, p_s, p_t, p_meas })
    }

    /// Total fault probability of a site.
    pub fn rate(&self, site: &FaultSite) -> f64 {
        match site.channel {
            Channel::Qubit(_) => self.p_s,
            Channel::Measurement(_) => self.p_meas,
            Channel::Pair { .. } => self.p_t,
        }
    }
}

/// Whether a site counts toward `s` or `t` in subset bookkeeping.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SiteClass {
    Single,
    Two,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Channel {
    /// Single-qubit depolarizing on one qubit.
    Qubit(usize),
    /// Classical flip of a measurement outcome.
    Measurement(usize),
    /// Two-qubit fault after a controlled-`gate` operation.
    Pair { control: usize, target: usize, gate: Pauli },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FaultEffect {
    Pauli(PauliString),
    MeasFlip,
}

/// One independent fault channel attached to a circuit location.
#[derive(Clone, Debug, PartialEq)]
pub struct FaultSite {
    pub location: usize,
    pub channel: Channel,
    pub class: SiteClass,
    /// Non-identity outcomes, equally likely given that the site faults.
    pub options: Vec<FaultEffect>,
}

impl FaultSite {
    /// Short text for option `k`: letters on the channel's qubits or `FLIP`.
    pub fn option_label(&self, k: usize) -> String {
        match (self.channel, &self.options[k]) {
            (_, FaultEffect::MeasFlip) => "FLIP".to_string(),
            (Channel::Qubit(q), FaultEffect::Pauli(p)) => p.get(q).letter().to_string(),
            (Channel::Pair { control, target, .. }, FaultEffect::Pauli(p)) => {
                format!("{}{}", p.get(control).letter(), p.get(target).letter())
            }
            (Channel::Measurement(_), FaultEffect::Pauli(p)) => p.to_sparse_string(),
        }
    }

    pub fn channel_label(&self) -> String {
        match self.channel {
            Channel::Qubit(q) => format!("q{q}"),
            Channel::Measurement(q) => format!("m{q}"),
            Channel::Pair { control, target, .. } => format!("q{control},q{target}"),
        }
    }
}

/// The fault sites of a circuit under one noise kind, in location order.
#[derive(Clone, Debug)]
pub struct FaultSpace {
    kind: NoiseKind,
    n_qubits: usize,
    sites: Vec<FaultSite>,
    single: Vec<usize>,
    two: Vec<usize>,
}

fn two_qubit_paulis(n: usize, control: usize, target: usize) -> Vec<FaultEffect> {
    let mut out = Vec::with_capacity(15);
    for a in Pauli::ALL {
        for b in Pauli::ALL {
            if a == Pauli::I && b == Pauli::I {
                continue;
            }
            let mut p = PauliString::identity(n);
            p.set(control, a);
            p.set(target, b);
            out.push(FaultEffect::Pauli(p));
        }
    }
    out
}

fn single_qubit_paulis(n: usize, q: usize) -> Vec<FaultEffect> {
    Pauli::NON_IDENTITY
        .iter()
        .map(|&p| FaultEffect::Pauli(PauliString::single(n, q, p)))
        .collect()
}

/// Fault sites attached to one location: preps and single-qubit channels get
/// X/Y/Z, measurements a flip, two-qubit gates either the 15-fold channel or
/// the correlated `Z ⊗ P` followed by one depolarizing site per qubit.
pub fn fault_space(op: &Operation, location: usize, n_qubits: usize, kind: NoiseKind) -> Vec<FaultSite> {
    let qubit_site = |q| FaultSite {
        location,
        channel: Channel::Qubit(q),
        class: SiteClass::Single,
        options: single_qubit_paulis(n_qubits, q),
    };
    match *op {
        Operation::PrepPlus(q) | Operation::PrepZero(q) => vec![qubit_site(q)],
        Operation::MeasureX(q) | Operation::MeasureZ(q) => vec![FaultSite {
            location,
            channel: Channel::Measurement(q),
            class: SiteClass::Single,
            options: vec![FaultEffect::MeasFlip],
        }],
        Operation::ControlledPauli { .. } | Operation::FlagCoupling { .. } => {
            let (control, target, gate) = op.controlled().expect("two-qubit operation");
            let channel = Channel::Pair { control, target, gate };
            match kind {
                NoiseKind::Standard => vec![FaultSite {
                    location,
                    channel,
                    class: SiteClass::Two,
                    options: two_qubit_paulis(n_qubits, control, target),
                }],
                NoiseKind::Anisotropic => {
                    let mut zp = PauliString::identity(n_qubits);
                    zp.set(control, Pauli::Z);
                    zp.set(target, gate);
                    vec![
                        FaultSite {
                            location,
                            channel,
                            class: SiteClass::Two,
                            options: vec![FaultEffect::Pauli(zp)],
                        },
                        qubit_site(control),
                        qubit_site(target),
                    ]
                }
            }
        }
    }
}

impl FaultSpace {
    pub fn new(circuit: &Circuit, kind: NoiseKind) -> Self {
        let n = circuit.registers().total();
        let mut sites = Vec::new();
        for loc in circuit.locations() {
            sites.extend(fault_space(&loc.op, loc.id, n, kind));
        }
        let single = (0..sites.len()).filter(|&i| sites[i].class == SiteClass::Single).collect();
        let two = (0..sites.len()).filter(|&i| sites[i].class == SiteClass::Two).collect();
        FaultSpace { kind, n_qubits: n, sites, single, two }
    }

    pub fn kind(&self) -> NoiseKind {
        self.kind
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn sites(&self) -> &[FaultSite] {
        &self.sites
    }

    /// Indices of single-class sites.
    pub fn single(&self) -> &[usize] {
        &self.single
    }

    /// Indices of two-qubit-class sites.
    pub fn two(&self) -> &[usize] {
        &self.two
    }

    /// `(n_s, n_t)`.
    pub fn counts(&self) -> (usize, usize) {
        (self.single.len(), self.two.len())
    }

    pub fn fault(&self, site: usize, option: usize) -> Result<InjectedFault> {
        let s = self.sites.get(site).ok_or(Error::InvalidFaultLocation(site))?;
        let effect = *s.options.get(option).ok_or(Error::InvalidFaultLocation(site))?;
        Ok(InjectedFault { site, option, location: s.location, effect })
    }

    /// Every order-1 fault, site by site.
    pub fn order_one(&self) -> impl Iterator<Item = InjectedFault> + '_ {
        self.sites.iter().enumerate().flat_map(|(i, s)| {
            (0..s.options.len()).map(move |k| InjectedFault {
                site: i,
                option: k,
                location: s.location,
                effect: s.options[k],
            })
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct InjectedFault {
    pub site: usize,
    pub option: usize,
    pub location: usize,
    pub effect: FaultEffect,
}

/// Faults sorted by site (hence by location, and by channel order within a location).
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FaultConfiguration {
    faults: Vec<InjectedFault>,
}

impl FaultConfiguration {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn new(mut faults: Vec<InjectedFault>) -> Result<Self> {
        faults.sort_by_key(|f| f.site);
        if faults.windows(2).any(|w| w[0].site == w[1].site) {
            return Err(Error::InvalidParameter("two faults on one site".into()));
        }
        Ok(FaultConfiguration { faults })
    }

    pub fn faults(&self) -> &[InjectedFault] {
        &self.faults
    }

    pub fn is_empty(&self) -> bool {
        self.faults.is_empty()
    }

    pub fn len(&self) -> usize {
        self.faults.len()
    }

    /// Subset label `(s, t)`.
    pub fn subset(&self, space: &FaultSpace) -> (usize, usize) {
        let t = self
            .faults
            .iter()
            .filter(|f| space.sites[f.site].class == SiteClass::Two)
            .count();
        (self.faults.len() - t, t)
    }

    /// Replay log: one `location site channel fault` line per fault.
    pub fn to_log(&self, space: &FaultSpace) -> String {
        let mut out = String::new();
        for f in &self.faults {
            let s = &space.sites[f.site];
            let _ = writeln!(out, "{} {} {} {}", f.location, f.site, s.channel_label(), s.option_label(f.option));
        }
        out
    }

    pub fn from_log(space: &FaultSpace, text: &str) -> Result<Self> {
        let mut faults = Vec::new();
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')) {
            let fields: Vec<&str> = line.split_whitespace().collect();
            let bad = || Error::Parse(format!("fault log line {line:?}"));
            if fields.len() != 4 {
                return Err(bad());
            }
            let location: usize = fields[0].parse().map_err(|_| bad())?;
            let site: usize = fields[1].parse().map_err(|_| bad())?;
            let s = space.sites.get(site).ok_or(Error::InvalidFaultLocation(site))?;
            if s.location != location || s.channel_label() != fields[2] {
                return Err(bad());
            }
            let option = (0..s.options.len())
                .find(|&k| s.option_label(k) == fields[3])
                .ok_or_else(bad)?;
            faults.push(space.fault(site, option)?);
        }
        Self::new(faults)
    }
}

/// Independent Bernoulli draw per site with the model's rate; a faulting site
/// picks one of its options uniformly.
pub fn sample_traditional<R: Rng + ?Sized>(space: &FaultSpace, model: &NoiseModel, rng: &mut R) -> FaultConfiguration {
    let mut faults = Vec::new();
    for (i, s) in space.sites.iter().enumerate() {
        let rate = model.rate(s);
        if rate > 0.0 && rng.random::<f64>() < rate {
            let k = rng.random_range(0..s.options.len());
            faults.push(InjectedFault { site: i, option: k, location: s.location, effect: s.options[k] });
        }
    }
    FaultConfiguration { faults }
}

/// Exactly `s` distinct single-class and `t` distinct two-qubit-class sites,
/// each with a uniformly chosen non-identity option.
pub fn sample_from_subset<R: Rng + ?Sized>(
    space: &FaultSpace,
    s: usize,
    t: usize,
    rng: &mut R,
) -> Result<FaultConfiguration> {
    let (n_s, n_t) = space.counts();
    if s > n_s || t > n_t {
        return Err(Error::SubsetOutOfRange { s, t, n_s, n_t });
    }
    let mut faults = Vec::with_capacity(s + t);
    for (pool, k) in [(&space.single, s), (&space.two, t)] {
        for j in index::sample(rng, pool.len(), k) {
            let site = pool[j];
            let st = &space.sites[site];
            let opt = rng.random_range(0..st.options.len());
            faults.push(InjectedFault { site, option: opt, location: st.location, effect: st.options[opt] });
        }
    }
    faults.sort_by_key(|f| f.site);
    Ok(FaultConfiguration { faults })
}

/// Number of configurations in subset `(s, t)`, counting every option choice.
pub fn subset_configuration_count(space: &FaultSpace, s: usize, t: usize) -> f64 {
    let esp = |pool: &[usize], k: usize| {
        // elementary symmetric polynomial of the option counts
        let mut e = vec![0.0f64; k + 1];
        e[0] = 1.0;
        for &i in pool {
            let m = space.sites[i].options.len() as f64;
            for j in (1..=k).rev() {
                e[j] += e[j - 1] * m;
            }
        }
        e[k]
    };
    esp(&space.single, s) * esp(&space.two, t)
}

/// Visits every configuration of subset `(s, t)` with its probability
/// conditioned on the subset (all single sites share one rate, as do all
/// two-qubit sites).
pub fn for_each_configuration(
    space: &FaultSpace,
    s: usize,
    t: usize,
    mut f: impl FnMut(&FaultConfiguration, f64),
) -> Result<()> {
    let (n_s, n_t) = space.counts();
    if s > n_s || t > n_t {
        return Err(Error::SubsetOutOfRange { s, t, n_s, n_t });
    }
    let subsets = binomial(n_s, s) * binomial(n_t, t);
    let mut chosen: Vec<usize> = Vec::with_capacity(s + t);
    let mut config = FaultConfiguration::empty();

    fn choose(pool: &[usize], k: usize, start: usize, chosen: &mut Vec<usize>, f: &mut dyn FnMut(&mut Vec<usize>)) {
        if k == 0 {
            f(chosen);
            return;
        }
        for i in start..=pool.len() - k {
            chosen.push(pool[i]);
            choose(pool, k - 1, i + 1, chosen, f);
            chosen.pop();
        }
    }

    fn options(
        space: &FaultSpace,
        sites: &[usize],
        depth: usize,
        weight: f64,
        config: &mut FaultConfiguration,
        f: &mut dyn FnMut(&FaultConfiguration, f64),
    ) {
        if depth == sites.len() {
            let mut sorted = config.clone();
            sorted.faults.sort_by_key(|x| x.site);
            f(&sorted, weight);
            return;
        }
        let st = &space.sites[sites[depth]];
        let w = weight / st.options.len() as f64;
        for (k, &effect) in st.options.iter().enumerate() {
            config.faults.push(InjectedFault { site: sites[depth], option: k, location: st.location, effect });
            options(space, sites, depth + 1, w, config, f);
            config.faults.pop();
        }
    }

    let single = space.single.clone();
    let two = space.two.clone();
    choose(&single, s, 0, &mut chosen, &mut |chosen_s| {
        let mut inner: Vec<usize> = Vec::with_capacity(t);
        choose(&two, t, 0, &mut inner, &mut |chosen_t| {
            let all: Vec<usize> = chosen_s.iter().chain(chosen_t.iter()).copied().collect();
            options(space, &all, 0, 1.0 / subsets, &mut config, &mut f);
        });
    });
    Ok(())
}

/// Binomial coefficient as a float.
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuits::build_bare_round;
    use crate::codes::bare_713;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn bare_space(kind: NoiseKind) -> FaultSpace {
        FaultSpace::new(&build_bare_round(&bare_713()).unwrap(), kind)
    }

    #[test]
    fn counts_match_circuit() {
        let c = build_bare_round(&bare_713()).unwrap();
        for kind in [NoiseKind::Standard, NoiseKind::Anisotropic] {
            assert_eq!(FaultSpace::new(&c, kind).counts(), c.location_counts(kind));
        }
    }

    #[test]
    fn anisotropic_correlated_faults_are_z_times_gate() {
        let space = bare_space(NoiseKind::Anisotropic);
        for s in space.sites().iter().filter(|s| s.class == SiteClass::Two) {
            let Channel::Pair { control, target, gate } = s.channel else { panic!() };
            assert_eq!(s.options.len(), 1);
            let FaultEffect::Pauli(p) = s.options[0] else { panic!() };
            assert_eq!(p.get(control), Pauli::Z);
            assert_eq!(p.get(target), gate);
            assert_eq!(p.weight(), 2);
        }
    }

    #[test]
    fn control_y_correlated_fault() {
        let space = bare_space(NoiseKind::Anisotropic);
        let s = space
            .sites()
            .iter()
            .find(|s| matches!(s.channel, Channel::Pair { gate: Pauli::Y, .. }))
            .unwrap();
        assert_eq!(s.option_label(0), "ZY");
        // correlated site is followed by the two single-qubit sites
        let i = space.sites().iter().position(|x| x == s).unwrap();
        assert_eq!(space.sites()[i + 1].location, s.location);
        assert_eq!(space.sites()[i + 2].location, s.location);
    }

    #[test]
    fn standard_pair_has_fifteen_distinct_options() {
        let space = bare_space(NoiseKind::Standard);
        let s = &space.sites()[space.two()[0]];
        let labels: std::collections::BTreeSet<String> = (0..15).map(|k| s.option_label(k)).collect();
        assert_eq!(labels.len(), 15);
        assert!(!labels.contains("II"));
        assert!(labels.contains("XX"));
    }

    #[test]
    fn zero_rates_sample_nothing() {
        let space = bare_space(NoiseKind::Standard);
        let m = NoiseModel::uniform(NoiseKind::Standard, 0.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            assert!(sample_traditional(&space, &m, &mut rng).is_empty());
        }
    }

    #[test]
    fn subset_sampler_hits_label() {
        let space = bare_space(NoiseKind::Anisotropic);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for (s, t) in [(0, 0), (0, 1), (3, 2), (10, 18)] {
            let c = sample_from_subset(&space, s, t, &mut rng).unwrap();
            assert_eq!(c.subset(&space), (s, t));
        }
        assert!(sample_from_subset(&space, 0, 19, &mut rng).is_err());
    }

    #[test]
    fn configuration_enumeration_weights_sum_to_one() {
        let space = bare_space(NoiseKind::Standard);
        for (s, t) in [(0, 0), (1, 0), (0, 1), (1, 1), (2, 0)] {
            let mut total = 0.0;
            let mut count = 0usize;
            for_each_configuration(&space, s, t, |c, w| {
                assert_eq!(c.subset(&space), (s, t));
                total += w;
                count += 1;
            })
            .unwrap();
            assert!((total - 1.0).abs() < 1e-12, "({s},{t}) total {total}");
            assert_eq!(count as f64, subset_configuration_count(&space, s, t));
        }
    }

    #[test]
    fn log_round_trip() {
        let space = bare_space(NoiseKind::Anisotropic);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let c = sample_from_subset(&space, 4, 3, &mut rng).unwrap();
        let log = c.to_log(&space);
        assert_eq!(log.lines().count(), 7);
        assert_eq!(FaultConfiguration::from_log(&space, &log).unwrap(), c);
        assert!(FaultConfiguration::from_log(&space, "0 0 q9 X").is_err());
    }

    #[test]
    fn invalid_probabilities_rejected() {
        assert!(NoiseModel::uniform(NoiseKind::Standard, 1.5).is_err());
        assert!(NoiseModel::new(NoiseKind::Standard, 0.1, -0.1, 0.1).is_err());
    }

    #[test]
    fn binomial_values() {
        assert_eq!(binomial(5, 2), 10.0);
        assert_eq!(binomial(5, 0), 1.0);
        assert_eq!(binomial(3, 4), 0.0);
    }
}
