//! Syndrome-extraction circuits as ordered fault-location lists.
//!
//! Qubits are laid out as `[data | syndrome ancillas | flags]`. Every round
//! re-prepares its ancillas, so the registers are reused across rounds.

use std::fmt::{self, Write as _};
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::codes::{self, StabilizerCode};
use crate::error::{Error, Result};
use crate::noise::NoiseKind;
use crate::pauli::Pauli;

/// Syndrome-extraction method.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Bare,
    Flag,
    Shor,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Bare => "bare",
            Method::Flag => "flag",
            Method::Shor => "shor",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bare" => Ok(Method::Bare),
            "flag" => Ok(Method::Flag),
            "shor" => Ok(Method::Shor),
            _ => Err(Error::Parse(format!("unknown method {s:?}"))),
        }
    }
}

/// What a measurement contributes to a round record.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MeasRole {
    /// XOR-ed into the syndrome bit of this stabilizer.
    Syndrome(usize),
    /// The flag bit of this stabilizer.
    Flag(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Operation {
    PrepPlus(usize),
    PrepZero(usize),
    /// Ancilla-controlled Pauli on the target.
    ControlledPauli { pauli: Pauli, control: usize, target: usize },
    /// CNOT from a syndrome ancilla onto its flag qubit.
    FlagCoupling { control: usize, target: usize },
    MeasureX(usize),
    MeasureZ(usize),
}

impl Operation {
    pub fn is_two_qubit(&self) -> bool {
        matches!(self, Operation::ControlledPauli { .. } | Operation::FlagCoupling { .. })
    }

    pub fn is_prep(&self) -> bool {
        matches!(self, Operation::PrepPlus(_) | Operation::PrepZero(_))
    }

    pub fn is_measurement(&self) -> bool {
        matches!(self, Operation::MeasureX(_) | Operation::MeasureZ(_))
    }

    /// For two-qubit operations: `(control, target, Pauli applied to target)`.
    pub fn controlled(&self) -> Option<(usize, usize, Pauli)> {
        match *self {
            Operation::ControlledPauli { pauli, control, target } => Some((control, target, pauli)),
            Operation::FlagCoupling { control, target } => Some((control, target, Pauli::X)),
            _ => None,
        }
    }

    pub fn qubits(&self) -> Vec<usize> {
        match *self {
            Operation::PrepPlus(q) | Operation::PrepZero(q) | Operation::MeasureX(q) | Operation::MeasureZ(q) => {
                vec![q]
            }
            Operation::ControlledPauli { control, target, .. } | Operation::FlagCoupling { control, target } => {
                vec![control, target]
            }
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct Tags {
    pub stabilizer: Option<usize>,
    pub round: usize,
    /// Letter of a data coupling within its stabilizer (`a`, `b`, ...).
    pub gate: Option<char>,
    pub role: Option<MeasRole>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Location {
    pub id: usize,
    pub op: Operation,
    pub tags: Tags,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Registers {
    pub n_data: usize,
    pub n_ancilla: usize,
    pub n_flag: usize,
}

impl Registers {
    pub fn total(&self) -> usize {
        self.n_data + self.n_ancilla + self.n_flag
    }

    pub fn ancilla(&self, i: usize) -> usize {
        debug_assert!(i < self.n_ancilla);
        self.n_data + i
    }

    pub fn flag(&self, i: usize) -> usize {
        debug_assert!(i < self.n_flag);
        self.n_data + self.n_ancilla + i
    }

    pub fn is_data(&self, q: usize) -> bool {
        q < self.n_data
    }

    fn label(&self, q: usize) -> String {
        if q < self.n_data {
            format!("d{q}")
        } else if q < self.n_data + self.n_ancilla {
            format!("a{}", q - self.n_data)
        } else {
            format!("f{}", q - self.n_data - self.n_ancilla)
        }
    }
}

/// An ordered list of fault locations over fixed registers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Circuit {
    registers: Registers,
    n_stabilizers: usize,
    n_rounds: usize,
    locations: Vec<Location>,
}

impl Circuit {
    pub fn new(registers: Registers, n_stabilizers: usize) -> Self {
        Circuit {
            registers,
            n_stabilizers,
            n_rounds: 0,
            locations: Vec::new(),
        }
    }

    pub fn registers(&self) -> &Registers {
        &self.registers
    }

    pub fn n_stabilizers(&self) -> usize {
        self.n_stabilizers
    }

    pub fn n_rounds(&self) -> usize {
        self.n_rounds
    }

    pub fn locations(&self) -> &[Location] {
        &self.locations
    }

    pub fn len(&self) -> usize {
        self.locations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.locations.is_empty()
    }

    pub fn push(&mut self, op: Operation, tags: Tags) -> usize {
        let id = self.locations.len();
        self.n_rounds = self.n_rounds.max(tags.round + 1);
        self.locations.push(Location { id, op, tags });
        id
    }

    /// Appends `round` re-tagged as round `index`.
    pub fn append_round(&mut self, round: &Circuit, index: usize) {
        assert_eq!(round.registers, self.registers);
        for loc in &round.locations {
            self.push(loc.op, Tags { round: index, ..loc.tags });
        }
    }

    /// Location-id range belonging to round `r`.
    pub fn round_range(&self, r: usize) -> Range<usize> {
        let start = self.locations.iter().position(|l| l.tags.round == r).unwrap_or(self.len());
        let end = self.locations[start..]
            .iter()
            .position(|l| l.tags.round != r)
            .map_or(self.len(), |p| start + p);
        start..end
    }

    /// Counts of single-qubit (`n_s`) and two-qubit (`n_t`) fault locations.
    pub fn location_counts(&self, kind: NoiseKind) -> (usize, usize) {
        let mut n_s = 0;
        let mut n_t = 0;
        for loc in &self.locations {
            if loc.op.is_two_qubit() {
                n_t += 1;
                if kind == NoiseKind::Anisotropic {
                    n_s += 2;
                }
            } else {
                n_s += 1;
            }
        }
        (n_s, n_t)
    }

    /// Stabilizers that carry a flag qubit, with the flag's register index.
    pub fn flagged_stabilizers(&self) -> Vec<(usize, usize)> {
        let mut out: Vec<(usize, usize)> = self
            .locations
            .iter()
            .filter_map(|l| match (l.op, l.tags.role) {
                (Operation::MeasureZ(q), Some(MeasRole::Flag(s))) => Some((s, q)),
                _ => None,
            })
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    /// One location per line: id, kind, qubits, tags.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        let r = &self.registers;
        for loc in &self.locations {
            let (kind, qubits) = match loc.op {
                Operation::PrepPlus(q) => ("PrepPlus".to_string(), r.label(q)),
                Operation::PrepZero(q) => ("PrepZero".to_string(), r.label(q)),
                Operation::ControlledPauli { pauli, control, target } => {
                    (format!("C{}", pauli.letter()), format!("{} {}", r.label(control), r.label(target)))
                }
                Operation::FlagCoupling { control, target } => {
                    ("FlagCX".to_string(), format!("{} {}", r.label(control), r.label(target)))
                }
                Operation::MeasureX(q) => ("MeasureX".to_string(), r.label(q)),
                Operation::MeasureZ(q) => ("MeasureZ".to_string(), r.label(q)),
            };
            let _ = write!(out, "{:>4} {:<8} {:<7} round={}", loc.id, kind, qubits, loc.tags.round);
            if let Some(s) = loc.tags.stabilizer {
                let _ = write!(out, " stab={s}");
            }
            if let Some(g) = loc.tags.gate {
                let _ = write!(out, " gate={g}");
            }
            match loc.tags.role {
                Some(MeasRole::Syndrome(s)) => {
                    let _ = write!(out, " role=syndrome:{s}");
                }
                Some(MeasRole::Flag(s)) => {
                    let _ = write!(out, " role=flag:{s}");
                }
                None => {}
            }
            out.push('\n');
        }
        out
    }
}

/// Coupling order per generator plus which generators get a flag qubit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Schedule {
    /// Data qubits of each generator, in coupling order.
    pub order: Vec<Vec<usize>>,
    pub flagged: Vec<bool>,
}

impl Schedule {
    /// Ascending data-qubit order for every generator, no flags.
    pub fn ascending(code: &StabilizerCode) -> Self {
        Schedule {
            order: code
                .generators()
                .iter()
                .map(|g| g.iter_support().map(|(q, _)| q).collect())
                .collect(),
            flagged: vec![false; code.num_generators()],
        }
    }

    /// Bare-ancilla schedule: weight-6 generator as Z0, Z2, X3, Z1, Z4, Z5.
    pub fn bare_713() -> Self {
        Schedule {
            order: vec![
                vec![0, 4],
                vec![1, 4],
                vec![2, 5],
                vec![3, 6],
                vec![2, 3, 5, 6],
                vec![0, 2, 3, 1, 4, 5],
            ],
            flagged: vec![false; 6],
        }
    }

    /// Flagged schedule: weight-6 generator reordered to Z0, X3, Z4, Z2, Z1, Z5.
    pub fn flag_713() -> Self {
        Schedule {
            order: vec![
                vec![0, 4],
                vec![1, 4],
                vec![2, 5],
                vec![3, 6],
                vec![2, 3, 5, 6],
                vec![0, 3, 4, 2, 1, 5],
            ],
            flagged: vec![false, false, false, false, true, true],
        }
    }

    fn validate(&self, code: &StabilizerCode) -> Result<()> {
        if self.order.len() != code.num_generators() || self.flagged.len() != code.num_generators() {
            return Err(Error::Unsupported("schedule does not match generator count".into()));
        }
        for (i, (g, order)) in code.generators().iter().zip(&self.order).enumerate() {
            let mut sorted = order.clone();
            sorted.sort_unstable();
            let support: Vec<usize> = g.iter_support().map(|(q, _)| q).collect();
            if sorted != support {
                return Err(Error::Unsupported(format!(
                    "schedule for generator {i} does not cover its support"
                )));
            }
        }
        Ok(())
    }
}

fn gate_letter(j: usize) -> char {
    (b'a' + j as u8) as char
}

/// One round of bare-ancilla (optionally flagged) extraction under a schedule.
///
/// Flag couplings sit right after the first and right before the last data
/// coupling of a flagged generator.
pub fn build_round_with_schedule(code: &StabilizerCode, schedule: &Schedule) -> Result<Circuit> {
    schedule.validate(code)?;
    let m = code.num_generators();
    let n_flag = schedule.flagged.iter().filter(|&&f| f).count();
    let registers = Registers { n_data: code.n(), n_ancilla: m, n_flag };
    if registers.total() > crate::pauli::MAX_QUBITS {
        return Err(Error::TooManyQubits(registers.total()));
    }
    let mut c = Circuit::new(registers, m);
    let mut next_flag = 0;
    for (i, order) in schedule.order.iter().enumerate() {
        let anc = registers.ancilla(i);
        let tags = Tags { stabilizer: Some(i), ..Tags::default() };
        let flag = schedule.flagged[i].then(|| {
            let f = registers.flag(next_flag);
            next_flag += 1;
            f
        });
        c.push(Operation::PrepPlus(anc), tags);
        if let Some(f) = flag {
            c.push(Operation::PrepZero(f), tags);
        }
        let g = &code.generators()[i];
        let w = order.len();
        for (j, &q) in order.iter().enumerate() {
            if let Some(f) = flag {
                if j == w - 1 && w > 1 {
                    c.push(Operation::FlagCoupling { control: anc, target: f }, tags);
                }
            }
            c.push(
                Operation::ControlledPauli { pauli: g.get(q), control: anc, target: q },
                Tags { gate: Some(gate_letter(j)), ..tags },
            );
            if let Some(f) = flag {
                if j == 0 && w > 1 {
                    c.push(Operation::FlagCoupling { control: anc, target: f }, tags);
                }
            }
        }
        c.push(Operation::MeasureX(anc), Tags { role: Some(MeasRole::Syndrome(i)), ..tags });
        if let Some(f) = flag {
            c.push(Operation::MeasureZ(f), Tags { role: Some(MeasRole::Flag(i)), ..tags });
        }
    }
    Ok(c)
}

fn require_bare_713(code: &StabilizerCode, what: &str) -> Result<()> {
    if code.generators() != codes::bare_713().generators() {
        return Err(Error::Unsupported(format!(
            "{what} schedule is defined only for bare713, not {}",
            code.name()
        )));
    }
    Ok(())
}

/// Bare-ancilla round for the Bare [[7,1,3]] code.
pub fn build_bare_round(code: &StabilizerCode) -> Result<Circuit> {
    require_bare_713(code, "bare")?;
    build_round_with_schedule(code, &Schedule::bare_713())
}

/// Flagged round for the Bare [[7,1,3]] code.
pub fn build_flag_round(code: &StabilizerCode) -> Result<Circuit> {
    require_bare_713(code, "flag")?;
    build_round_with_schedule(code, &Schedule::flag_713())
}

/// Shor-style round with unverified cat states, one cat qubit per support site.
pub fn build_shor_round(code: &StabilizerCode) -> Result<Circuit> {
    let weights: Vec<usize> = code.generators().iter().map(|g| g.weight()).collect();
    let registers = Registers {
        n_data: code.n(),
        n_ancilla: weights.iter().sum(),
        n_flag: 0,
    };
    if registers.total() > crate::pauli::MAX_QUBITS {
        return Err(Error::TooManyQubits(registers.total()));
    }
    let mut c = Circuit::new(registers, code.num_generators());
    let mut offset = 0;
    for (i, g) in code.generators().iter().enumerate() {
        let tags = Tags { stabilizer: Some(i), ..Tags::default() };
        let cat: Vec<usize> = (0..weights[i]).map(|j| registers.ancilla(offset + j)).collect();
        offset += weights[i];
        c.push(Operation::PrepPlus(cat[0]), tags);
        for &q in &cat[1..] {
            c.push(Operation::PrepZero(q), tags);
        }
        for pair in cat.windows(2) {
            c.push(
                Operation::ControlledPauli { pauli: Pauli::X, control: pair[0], target: pair[1] },
                tags,
            );
        }
        for (j, ((q, p), &a)) in g.iter_support().zip(&cat).enumerate() {
            c.push(
                Operation::ControlledPauli { pauli: p, control: a, target: q },
                Tags { gate: Some(gate_letter(j)), ..tags },
            );
        }
        for &a in &cat {
            c.push(Operation::MeasureX(a), Tags { role: Some(MeasRole::Syndrome(i)), ..tags });
        }
    }
    Ok(c)
}

/// Maximum number of noisy extraction rounds in one error-correction step.
pub const MAX_NOISY_ROUNDS: usize = 3;

/// A 1-Rec memory experiment: a noise-free projection, up to three noisy
/// rounds (the third only on disagreement), correction, and a noise-free
/// final error correction. Only the noisy rounds carry fault locations.
#[derive(Clone, Debug)]
pub struct ExperimentPlan {
    pub code: StabilizerCode,
    pub method: Method,
    /// One extraction round; the template for all noisy rounds.
    pub round: Circuit,
    /// Three copies of `round`, tagged 0, 1, 2.
    pub noisy: Circuit,
}

impl ExperimentPlan {
    pub fn round_range(&self, r: usize) -> Range<usize> {
        self.noisy.round_range(r)
    }
}

pub fn build_memory_experiment(code: &StabilizerCode, method: Method) -> Result<ExperimentPlan> {
    let round = match method {
        Method::Bare => build_bare_round(code)?,
        Method::Flag => build_flag_round(code)?,
        Method::Shor => {
            if code.generators() == codes::bare_713().generators() {
                return Err(Error::Unsupported("no Shor-style schedule for bare713".into()));
            }
            build_shor_round(code)?
        }
    };
    let mut noisy = Circuit::new(*round.registers(), round.n_stabilizers());
    for r in 0..MAX_NOISY_ROUNDS {
        noisy.append_round(&round, r);
    }
    Ok(ExperimentPlan {
        code: code.clone(),
        method,
        round,
        noisy,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::{bare_713, five_qubit_513, steane_713};

    fn couplings(c: &Circuit, stab: usize) -> Vec<(Pauli, usize)> {
        c.locations()
            .iter()
            .filter(|l| l.tags.stabilizer == Some(stab) && l.tags.gate.is_some())
            .filter_map(|l| match l.op {
                Operation::ControlledPauli { pauli, target, .. } => Some((pauli, target)),
                _ => None,
            })
            .collect()
    }

    #[test]
    fn bare_round_shape() {
        let c = build_bare_round(&bare_713()).unwrap();
        let data: usize = c
            .locations()
            .iter()
            .filter(|l| matches!(l.op, Operation::ControlledPauli { .. }))
            .count();
        assert_eq!(data, 18);
        assert_eq!(
            couplings(&c, 4),
            vec![(Pauli::Z, 2), (Pauli::Z, 3), (Pauli::Y, 5), (Pauli::Y, 6)]
        );
        let w6 = couplings(&c, 5);
        assert_eq!(w6[3], (Pauli::Z, 1));
        assert_eq!(
            w6.iter().map(|&(_, q)| q).collect::<Vec<_>>(),
            vec![0, 2, 3, 1, 4, 5]
        );
        assert_eq!(c.location_counts(NoiseKind::Standard), (12, 18));
        assert_eq!(c.location_counts(NoiseKind::Anisotropic), (12 + 36, 18));
    }

    #[test]
    fn flag_round_shape() {
        let c = build_flag_round(&bare_713()).unwrap();
        assert_eq!(c.registers().n_flag, 2);
        assert_eq!(
            couplings(&c, 5).iter().map(|&(_, q)| q).collect::<Vec<_>>(),
            vec![0, 3, 4, 2, 1, 5]
        );
        // Flag couplings: after gate a, before the last gate.
        let seq: Vec<String> = c
            .locations()
            .iter()
            .filter(|l| l.tags.stabilizer == Some(4) && l.op.is_two_qubit())
            .map(|l| match l.op {
                Operation::FlagCoupling { .. } => "F".to_string(),
                _ => l.tags.gate.unwrap().to_string(),
            })
            .collect();
        assert_eq!(seq.join(""), "aFbcFd");
        assert_eq!(c.flagged_stabilizers().len(), 2);
        assert_eq!(c.location_counts(NoiseKind::Standard), (16, 22));
    }

    #[test]
    fn shor_round_shape() {
        let c = build_shor_round(&steane_713()).unwrap();
        let stab0: Vec<&Location> = c.locations().iter().filter(|l| l.tags.stabilizer == Some(0)).collect();
        let preps = stab0.iter().filter(|l| l.op.is_prep()).count();
        let chain = stab0
            .iter()
            .filter(|l| l.op.is_two_qubit() && l.tags.gate.is_none())
            .count();
        let data = stab0.iter().filter(|l| l.tags.gate.is_some()).count();
        assert_eq!((preps, chain, data), (4, 3, 4));
        assert_eq!(c.registers().total(), 7 + 24);
        assert!(build_shor_round(&five_qubit_513()).is_ok());
    }

    #[test]
    fn unsupported_combinations() {
        assert!(build_bare_round(&steane_713()).is_err());
        assert!(build_flag_round(&five_qubit_513()).is_err());
        assert!(build_memory_experiment(&bare_713(), Method::Shor).is_err());
        assert!(build_memory_experiment(&steane_713(), Method::Bare).is_err());
    }

    #[test]
    fn memory_plan_has_three_tagged_rounds() {
        let plan = build_memory_experiment(&bare_713(), Method::Flag).unwrap();
        assert_eq!(plan.noisy.n_rounds(), 3);
        assert_eq!(plan.noisy.len(), 3 * plan.round.len());
        for r in 0..3 {
            assert_eq!(plan.round_range(r).len(), plan.round.len());
        }
        assert_eq!(plan.noisy.registers().n_flag, 2);
    }

    #[test]
    fn every_ancilla_prepared_before_use_and_measured_after() {
        for plan in [
            build_memory_experiment(&bare_713(), Method::Bare).unwrap(),
            build_memory_experiment(&bare_713(), Method::Flag).unwrap(),
            build_memory_experiment(&steane_713(), Method::Shor).unwrap(),
        ] {
            let regs = *plan.noisy.registers();
            // state per ancilla: 0 = idle, 1 = prepared, 2 = measured
            let mut state = vec![0u8; regs.total()];
            for loc in plan.noisy.locations() {
                for q in loc.op.qubits() {
                    if regs.is_data(q) {
                        continue;
                    }
                    if loc.op.is_prep() {
                        assert_ne!(state[q], 1, "re-prepared before measurement");
                        state[q] = 1;
                    } else {
                        assert_eq!(state[q], 1, "used while not prepared at {}", loc.id);
                        if loc.op.is_measurement() {
                            state[q] = 2;
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn empty_circuit_counts() {
        let c = Circuit::new(Registers { n_data: 1, n_ancilla: 0, n_flag: 0 }, 0);
        assert_eq!(c.location_counts(NoiseKind::Standard), (0, 0));
        assert_eq!(c.location_counts(NoiseKind::Anisotropic), (0, 0));
    }

    #[test]
    fn dump_lists_each_location() {
        let c = build_flag_round(&bare_713()).unwrap();
        let dump = c.dump();
        assert_eq!(dump.lines().count(), c.len());
        assert!(dump.contains("FlagCX   a4 f0"));
        assert!(dump.lines().next().unwrap().contains("PrepPlus"));
    }
}
