//! Lookup-table decoding: a base table, one flag-conditioned table per
//! flagged stabilizer, and the two/three-round agreement protocol.

use std::fmt::{self, Write as _};

use crate::circuits::{Circuit, ExperimentPlan, Method};
use crate::codes::{for_each_pauli_of_weight, CosetClass, StabilizerCode, Syndrome};
use crate::engine::{run_frame, RoundRecord};
use crate::error::{Error, Result};
use crate::noise::{Channel, FaultConfiguration, FaultEffect, FaultSpace, NoiseKind};
use crate::pauli::{Pauli, PauliString};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Provenance {
    /// A single-qubit data error.
    DataError,
    /// Residual of one single-qubit fault inside the extraction circuit.
    PropagatedSingle,
    /// Residual of one two-qubit gate fault.
    PropagatedPair,
    /// Lightest Pauli with the syndrome; covers syndromes no single fault reaches.
    MinWeight,
}

impl Provenance {
    pub fn label(self) -> &'static str {
        match self {
            Provenance::DataError => "data",
            Provenance::PropagatedSingle => "propagated",
            Provenance::PropagatedPair => "propagated-pair",
            Provenance::MinWeight => "min-weight",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Entry {
    pub correction: PauliString,
    pub provenance: Provenance,
    /// The fault that produced the entry, e.g. `XX @ 37`.
    pub source: String,
}

/// Syndrome → correction, dense over all `2^m` syndromes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LookupTable {
    n_generators: usize,
    entries: Vec<Option<Entry>>,
}

impl LookupTable {
    pub fn new(n_generators: usize) -> Self {
        LookupTable { n_generators, entries: vec![None; 1 << n_generators] }
    }

    pub fn get(&self, s: &Syndrome) -> Option<&Entry> {
        self.entries.get(s.bits() as usize).and_then(Option::as_ref)
    }

    pub fn len(&self) -> usize {
        self.entries.iter().filter(|e| e.is_some()).count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Entries ordered by syndrome bits.
    pub fn iter(&self) -> impl Iterator<Item = (Syndrome, &Entry)> {
        let m = self.n_generators;
        self.entries
            .iter()
            .enumerate()
            .filter_map(move |(b, e)| e.as_ref().map(|e| (Syndrome::from_bits(b as u64, m), e)))
    }

    /// Inserts unless an entry exists; an existing entry must be
    /// stabilizer-equivalent to the candidate.
    pub fn insert_strict(&mut self, code: &StabilizerCode, entry: Entry) -> Result<()> {
        let s = code.syndrome_of(&entry.correction)?;
        match &self.entries[s.bits() as usize] {
            Some(old) => {
                if !code.equivalent(&old.correction, &entry.correction)? {
                    return Err(Error::TableCollision {
                        syndrome: s.to_string(),
                        existing: format!("{} ({})", old.correction, old.source),
                        candidate: format!("{} ({})", entry.correction, entry.source),
                    });
                }
            }
            None => self.entries[s.bits() as usize] = Some(entry),
        }
        Ok(())
    }

    /// Inserts only into an empty slot.
    pub fn insert_fill(&mut self, code: &StabilizerCode, entry: Entry) -> Result<bool> {
        let s = code.syndrome_of(&entry.correction)?;
        let slot = &mut self.entries[s.bits() as usize];
        if slot.is_some() {
            return Ok(false);
        }
        *slot = Some(entry);
        Ok(true)
    }

    /// Aligned `syndrome -> correction` dump.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for (s, e) in self.iter() {
            let _ = writeln!(out, "{s} -> {:<22} [{}] {}", e.correction.to_string(), e.provenance.label(), e.source);
        }
        out
    }
}

/// Flag-conditioned table of one flagged stabilizer.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FlagTable {
    pub stabilizer: usize,
    pub table: LookupTable,
    /// `(fault label on (data, ancilla) or channel, data error, syndrome)`, one row
    /// per distinct data error, in circuit order.
    pub rows: Vec<(Vec<String>, PauliString, Syndrome)>,
}

/// Order-1 fault in a single round, with what it leaves behind.
#[derive(Clone, Debug)]
pub struct PropagatedFault {
    pub location: usize,
    pub channel: Channel,
    /// Letters on the channel's qubits, e.g. `XZ` for (control, target).
    pub label: String,
    pub residual: PauliString,
    pub round: RoundRecord,
}

impl PropagatedFault {
    pub fn is_pair(&self) -> bool {
        matches!(self.channel, Channel::Pair { .. })
    }

    pub fn source(&self) -> String {
        format!("{} @ {}", self.label, self.location)
    }
}

/// Every distinct order-1 fault of `round` under either noise kind, in
/// circuit order (standard channels before the anisotropic-only ones).
pub fn propagate_order_one(round: &Circuit) -> Vec<PropagatedFault> {
    let mut seen = std::collections::HashSet::new();
    let mut out = Vec::new();
    for kind in [NoiseKind::Standard, NoiseKind::Anisotropic] {
        let space = FaultSpace::new(round, kind);
        for f in space.order_one() {
            if !seen.insert((f.location, f.effect)) {
                continue;
            }
            let site = &space.sites()[f.site];
            let run = run_frame(round, &FaultConfiguration::new(vec![f]).expect("single fault"));
            out.push(PropagatedFault {
                location: f.location,
                channel: site.channel,
                label: site.option_label(f.option),
                residual: run.residual,
                round: run.rounds[0],
            });
        }
    }
    out.sort_by_key(|f| f.location);
    out
}

/// Which data errors the base table is derived from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TableRecipe {
    /// Single-qubit data errors, then the minimum-weight fill.
    DataOnly,
    /// Adds residuals of non-flagging order-1 circuit faults.
    Propagated,
}

/// Builds the base table.
///
/// Order: single-qubit data errors; with [`TableRecipe::Propagated`], the
/// residuals of non-flagging single-qubit faults (an inequivalent collision is
/// an error, as it means a single fault cannot be corrected) and then those of
/// two-qubit faults, lightest first, into still-empty slots; finally the
/// lightest Pauli (by symplectic weight) for every remaining syndrome.
pub fn build_lookup(code: &StabilizerCode, round: &Circuit, recipe: TableRecipe) -> Result<LookupTable> {
    let n = code.n();
    let mut table = LookupTable::new(code.num_generators());
    for q in 0..n {
        for p in Pauli::NON_IDENTITY {
            let e = PauliString::single(n, q, p);
            table.insert_strict(
                code,
                Entry { correction: e, provenance: Provenance::DataError, source: format!("{}{}", p.letter(), q) },
            )?;
        }
    }
    table.entries[0] = Some(Entry {
        correction: PauliString::identity(n),
        provenance: Provenance::DataError,
        source: "I".into(),
    });
    if recipe == TableRecipe::Propagated {
        let faults: Vec<PropagatedFault> = propagate_order_one(round)
            .into_iter()
            .filter(|f| f.round.flags == 0 && !code.syndrome_unchecked(&f.residual).is_zero())
            .collect();
        for f in faults.iter().filter(|f| !f.is_pair()) {
            table.insert_strict(
                code,
                Entry { correction: f.residual.unsigned(), provenance: Provenance::PropagatedSingle, source: f.source() },
            )?;
        }
        let mut pairs: Vec<&PropagatedFault> = faults.iter().filter(|f| f.is_pair()).collect();
        pairs.sort_by_key(|f| f.residual.weight());
        for f in pairs {
            table.insert_fill(
                code,
                Entry { correction: f.residual.unsigned(), provenance: Provenance::PropagatedPair, source: f.source() },
            )?;
        }
    }
    // Remaining slots: lowest symplectic weight (Y counts twice), then lowest
    // weight, then enumeration order. Any Pauli of weight > w has symplectic
    // weight > w, so the scan can stop once every best candidate is that light.
    let mut best: Vec<Option<(usize, PauliString)>> = vec![None; table.entries.len()];
    let open: Vec<bool> = table.entries.iter().map(Option::is_none).collect();
    for w in 1..=n {
        let done = open
            .iter()
            .zip(&best)
            .all(|(&o, b)| !o || b.as_ref().is_some_and(|(k, _)| *k <= w));
        if done {
            break;
        }
        for_each_pauli_of_weight(n, w, |e| {
            let slot = code.syndrome_unchecked(e).bits() as usize;
            let k = (e.x_bits().count_ones() + e.z_bits().count_ones()) as usize;
            if open[slot] && best[slot].as_ref().is_none_or(|(bk, _)| k < *bk) {
                best[slot] = Some((k, *e));
            }
        });
    }
    for (_, e) in best.into_iter().flatten() {
        table.insert_fill(code, Entry { correction: e, provenance: Provenance::MinWeight, source: String::new() })?;
    }
    Ok(table)
}

/// Builds one table per flagged stabilizer from the order-1 faults that raise
/// exactly that flag.
pub fn build_flag_tables(code: &StabilizerCode, round: &Circuit) -> Result<Vec<FlagTable>> {
    let faults = propagate_order_one(round);
    let mut out = Vec::new();
    for (stab, _) in round.flagged_stabilizers() {
        let mut table = LookupTable::new(code.num_generators());
        let mut rows = Vec::new();
        for f in faults.iter().filter(|f| f.round.flags == 1 << stab) {
            let residual = f.residual.unsigned();
            let s = code.syndrome_of(&residual)?;
            if s.is_zero() {
                if code.classify_coset(&residual)? != CosetClass::InStabilizer {
                    return Err(Error::TableCollision {
                        syndrome: s.to_string(),
                        existing: "I".into(),
                        candidate: format!("{residual} ({})", f.source()),
                    });
                }
                continue;
            }
            if let Some(old) = table.get(&s) {
                // within one flag table, distinct errors must have distinct syndromes
                if !code.equivalent(&old.correction, &residual)? {
                    return Err(Error::TableCollision {
                        syndrome: s.to_string(),
                        existing: format!("{} ({})", old.correction, old.source),
                        candidate: format!("{residual} ({})", f.source()),
                    });
                }
            }
            let label = flag_row_label(f);
            match rows.iter_mut().find(|r: &&mut (Vec<String>, PauliString, Syndrome)| r.1 == residual) {
                Some(row) => {
                    if !row.0.contains(&label) {
                        row.0.push(label);
                    }
                }
                None => rows.push((vec![label], residual, s)),
            }
            table.insert_strict(
                code,
                Entry {
                    correction: residual,
                    provenance: if f.is_pair() { Provenance::PropagatedPair } else { Provenance::PropagatedSingle },
                    source: f.source(),
                },
            )?;
        }
        out.push(FlagTable { stabilizer: stab, table, rows });
    }
    Ok(out)
}

/// Fault letters written as (data/target, ancilla/control).
fn flag_row_label(f: &PropagatedFault) -> String {
    match f.channel {
        Channel::Pair { .. } => {
            let mut c = f.label.chars();
            let (a, b) = (c.next().unwrap_or('I'), c.next().unwrap_or('I'));
            format!("{b}{a}")
        }
        _ => f.label.clone(),
    }
}

/// When a third round is measured.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FlagPolicy {
    /// Third round when the first two syndromes differ or any flag fired in
    /// them; flags from every executed round select the flag table.
    #[default]
    FlagTriggersThirdRound,
    /// Third round only on syndrome disagreement; earlier flags carry forward.
    SyndromeOnly,
}

impl FlagPolicy {
    pub fn needs_third_round(self, r0: &RoundRecord, r1: &RoundRecord) -> bool {
        match self {
            FlagPolicy::FlagTriggersThirdRound => r0.syndrome != r1.syndrome || (r0.flags | r1.flags) != 0,
            FlagPolicy::SyndromeOnly => r0.syndrome != r1.syndrome,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EcDecision {
    /// Number of noisy rounds the protocol executed.
    pub rounds_used: usize,
    pub syndrome: Syndrome,
    pub flags: u64,
    pub correction: PauliString,
}

#[derive(Clone, Debug)]
pub struct Decoder {
    code: StabilizerCode,
    base: LookupTable,
    flag_tables: Vec<FlagTable>,
    policy: FlagPolicy,
}

impl Decoder {
    pub fn new(plan: &ExperimentPlan, policy: FlagPolicy) -> Result<Self> {
        let recipe = match plan.method {
            Method::Bare | Method::Flag => TableRecipe::Propagated,
            Method::Shor => TableRecipe::DataOnly,
        };
        Ok(Decoder {
            code: plan.code.clone(),
            base: build_lookup(&plan.code, &plan.round, recipe)?,
            flag_tables: build_flag_tables(&plan.code, &plan.round)?,
            policy,
        })
    }

    pub fn base(&self) -> &LookupTable {
        &self.base
    }

    pub fn flag_tables(&self) -> &[FlagTable] {
        &self.flag_tables
    }

    pub fn policy(&self) -> FlagPolicy {
        self.policy
    }

    pub fn code(&self) -> &StabilizerCode {
        &self.code
    }

    /// Raised flags consult their tables in stabilizer order; a miss falls
    /// back to the base table; an unknown syndrome decodes to identity.
    pub fn decode(&self, syndrome: &Syndrome, flags: u64) -> PauliString {
        for ft in &self.flag_tables {
            if flags >> ft.stabilizer & 1 == 1 {
                if let Some(e) = ft.table.get(syndrome) {
                    return e.correction;
                }
            }
        }
        self.base
            .get(syndrome)
            .map_or_else(|| PauliString::identity(self.code.n()), |e| e.correction)
    }

    pub fn needs_third_round(&self, r0: &RoundRecord, r1: &RoundRecord) -> bool {
        self.policy.needs_third_round(r0, r1)
    }

    /// Chooses the syndrome to act on from two or three rounds.
    pub fn ec_correct(&self, rounds: &[RoundRecord]) -> Result<EcDecision> {
        if !(2..=3).contains(&rounds.len()) {
            return Err(Error::Protocol(format!("expected 2 or 3 rounds, got {}", rounds.len())));
        }
        let (used, chosen) = if self.needs_third_round(&rounds[0], &rounds[1]) {
            if rounds.len() < 3 {
                return Err(Error::Protocol("rounds disagree; a third round is required".into()));
            }
            (3, rounds[2].syndrome)
        } else {
            (2, rounds[0].syndrome)
        };
        let flags = rounds[..used].iter().fold(0, |acc, r| acc | r.flags);
        Ok(EcDecision { rounds_used: used, syndrome: chosen, flags, correction: self.decode(&chosen, flags) })
    }
}

/// The single-qubit syndrome listing, grouped by qubit, as `Z0 -> 100000`.
pub fn single_qubit_listing(code: &StabilizerCode) -> String {
    let mut out = String::new();
    for q in 0..code.n() {
        for p in [Pauli::Z, Pauli::X, Pauli::Y] {
            let e = PauliString::single(code.n(), q, p);
            let _ = writeln!(out, "{}{} -> {}", p.letter(), q, code.syndrome_unchecked(&e));
        }
    }
    out
}

impl fmt::Display for FlagTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (labels, e, s) in &self.rows {
            writeln!(f, "{} -> {e} -> {s}", labels.join(","))?;
        }
        Ok(())
    }
}

/// A two-qubit fault `data ⊗ X` right after a data coupling that raises the
/// stabilizer's flag, with the data error it leaves.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HookRow {
    /// Letter of the coupling the fault follows.
    pub gate: char,
    /// Letters on (data, ancilla), e.g. `ZX`.
    pub label: String,
    pub error: PauliString,
    pub syndrome: Syndrome,
}

impl fmt::Display for HookRow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} -> {} -> {}", self.label, self.error, self.syndrome)
    }
}

/// Propagation of `P ⊗ X` faults (P on the data qubit, X on the ancilla)
/// after every coupling of stabilizer `stab` whose ancilla-X fault is caught
/// by the flag. Empty if the stabilizer is not flagged in `round`.
pub fn hook_rows(code: &StabilizerCode, round: &Circuit, stab: usize) -> Vec<HookRow> {
    let space = FaultSpace::new(round, NoiseKind::Standard);
    let mut out = Vec::new();
    for loc in round.locations() {
        let (Some(gate), Some((control, target, _))) = (loc.tags.gate, loc.op.controlled()) else {
            continue;
        };
        if loc.tags.stabilizer != Some(stab) {
            continue;
        }
        let Some(site) = space.sites().iter().position(|s| s.location == loc.id) else {
            continue;
        };
        let mut rows = Vec::new();
        for data in Pauli::ALL {
            let option = space.sites()[site].options.iter().position(|o| match o {
                FaultEffect::Pauli(p) => p.get(control) == Pauli::X && p.get(target) == data,
                FaultEffect::MeasFlip => false,
            });
            let Some(option) = option else { continue };
            let fault = space.fault(site, option).expect("listed option");
            let run = run_frame(round, &FaultConfiguration::new(vec![fault]).expect("single fault"));
            rows.push((data, run));
        }
        // keep the coupling only if the bare ancilla flip is flagged
        if rows.iter().any(|(d, r)| *d == Pauli::I && r.rounds[0].flags & (1 << stab) != 0) {
            for (data, run) in rows {
                out.push(HookRow {
                    gate,
                    label: format!("{}X", data.letter()),
                    syndrome: code.syndrome_unchecked(&run.residual),
                    error: run.residual.unsigned(),
                });
            }
        }
    }
    out
}
