//! Two simulation backends over the same circuits: a stabilizer tableau
//! (state vectors of signs, used as the reference) and a Pauli frame (the
//! fast path for Monte Carlo).

use rand::Rng;

use crate::circuits::{Circuit, MeasRole, Operation};
use crate::codes::{StabilizerCode, Syndrome};
use crate::noise::{FaultConfiguration, FaultEffect, InjectedFault};
use crate::pauli::{Pauli, PauliString};

/// Syndrome and flag bits of one extraction round.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RoundRecord {
    pub syndrome: Syndrome,
    /// Bit `i` set when the flag of stabilizer `i` fired.
    pub flags: u64,
}

impl RoundRecord {
    pub fn new(n_stabilizers: usize) -> Self {
        RoundRecord { syndrome: Syndrome::zero(n_stabilizers), flags: 0 }
    }

    fn record(&mut self, role: MeasRole, bit: bool) {
        match role {
            MeasRole::Syndrome(i) => {
                if bit {
                    self.syndrome = self.syndrome.xor(&Syndrome::from_bits(1 << i, self.syndrome.len()));
                }
            }
            MeasRole::Flag(i) => self.flags |= (bit as u64) << i,
        }
    }
}

/// Result of running a circuit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunResult {
    /// Raw measurement outcomes (tableau) or flips relative to the ideal run (frame).
    pub outcomes: Vec<bool>,
    pub rounds: Vec<RoundRecord>,
    /// Frame backend: accumulated Pauli on the data register. Tableau: identity.
    pub residual: PauliString,
}

/// Which logical eigenstate the tableau projection targets.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LogicalState {
    Zero,
    Plus,
}

/// Aaronson–Gottesman tableau: rows `0..n` destabilizers, `n..2n` stabilizers.
///
/// Rows are Hermitian Paulis with phase 0 or 2 (a sign).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Tableau {
    n: usize,
    rows: Vec<PauliString>,
}

impl Tableau {
    /// `|0…0⟩`.
    pub fn new(n: usize) -> Self {
        let mut rows = Vec::with_capacity(2 * n);
        for q in 0..n {
            rows.push(PauliString::single(n, q, Pauli::X));
        }
        for q in 0..n {
            rows.push(PauliString::single(n, q, Pauli::Z));
        }
        Tableau { n, rows }
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn stabilizers(&self) -> &[PauliString] {
        &self.rows[self.n..]
    }

    fn bit(w: u64, q: usize) -> u64 {
        (w >> q) & 1
    }

    fn rebuild(row: &PauliString, x: u64, z: u64, flip: bool) -> PauliString {
        let phase = if flip { row.phase() ^ 2 } else { row.phase() };
        PauliString::from_bits(row.num_qubits(), x, z, phase)
    }

    pub fn h(&mut self, q: usize) {
        for row in &mut self.rows {
            let (x, z) = (row.x_bits(), row.z_bits());
            let (xq, zq) = (Self::bit(x, q), Self::bit(z, q));
            let nx = (x & !(1 << q)) | (zq << q);
            let nz = (z & !(1 << q)) | (xq << q);
            *row = Self::rebuild(row, nx, nz, xq & zq == 1);
        }
    }

    pub fn s(&mut self, q: usize) {
        for row in &mut self.rows {
            let (x, z) = (row.x_bits(), row.z_bits());
            let (xq, zq) = (Self::bit(x, q), Self::bit(z, q));
            *row = Self::rebuild(row, x, z ^ (xq << q), xq & zq == 1);
        }
    }

    pub fn sdg(&mut self, q: usize) {
        self.s(q);
        self.s(q);
        self.s(q);
    }

    pub fn cnot(&mut self, a: usize, b: usize) {
        for row in &mut self.rows {
            let (x, z) = (row.x_bits(), row.z_bits());
            let (xa, za, xb, zb) = (Self::bit(x, a), Self::bit(z, a), Self::bit(x, b), Self::bit(z, b));
            let flip = xa & zb & (xb ^ za ^ 1) == 1;
            *row = Self::rebuild(row, x ^ (xa << b), z ^ (zb << a), flip);
        }
    }

    /// Controlled-`p`, compiled to CNOT with a basis change on the target.
    pub fn controlled(&mut self, p: Pauli, control: usize, target: usize) {
        match p {
            Pauli::X => self.cnot(control, target),
            Pauli::Z => {
                self.h(target);
                self.cnot(control, target);
                self.h(target);
            }
            Pauli::Y => {
                self.sdg(target);
                self.cnot(control, target);
                self.s(target);
            }
            Pauli::I => {}
        }
    }

    /// Applies a Pauli operator (signs of anticommuting rows flip).
    pub fn apply_pauli(&mut self, p: &PauliString) {
        for row in &mut self.rows {
            if !row.commutes_unchecked(p) {
                *row = row.with_phase(row.phase() ^ 2);
            }
        }
    }

    /// Measures a Hermitian Pauli `p` (phase 0 or 2); returns `true` for the -1 outcome.
    pub fn measure_pauli<R: Rng + ?Sized>(&mut self, p: &PauliString, rng: &mut R) -> bool {
        let n = self.n;
        let anti = (n..2 * n).find(|&i| !self.rows[i].commutes_unchecked(p));
        match anti {
            Some(pi) => {
                for i in 0..2 * n {
                    if i != pi && !self.rows[i].commutes_unchecked(p) {
                        self.rows[i] = self.rows[i].mul_unchecked(&self.rows[pi]);
                    }
                }
                self.rows[pi - n] = self.rows[pi];
                let outcome = rng.random::<bool>();
                let sign = if outcome { 2 } else { 0 };
                self.rows[pi] = p.with_phase(p.phase() ^ sign);
                outcome
            }
            None => self.peek(p).expect("commuting Pauli is in the stabilizer group up to sign"),
        }
    }

    /// Deterministic outcome of measuring `p` if it is (up to sign) a stabilizer.
    pub fn peek(&self, p: &PauliString) -> Option<bool> {
        let n = self.n;
        if (n..2 * n).any(|i| !self.rows[i].commutes_unchecked(p)) {
            return None;
        }
        let mut acc = PauliString::identity(n);
        for i in 0..n {
            if !self.rows[i].commutes_unchecked(p) {
                acc = acc.mul_unchecked(&self.rows[i + n]);
            }
        }
        debug_assert!(acc.eq_up_to_phase(p));
        Some(acc.phase() != p.phase())
    }

    pub fn measure_z<R: Rng + ?Sized>(&mut self, q: usize, rng: &mut R) -> bool {
        self.measure_pauli(&PauliString::single(self.n, q, Pauli::Z), rng)
    }

    pub fn measure_x<R: Rng + ?Sized>(&mut self, q: usize, rng: &mut R) -> bool {
        self.measure_pauli(&PauliString::single(self.n, q, Pauli::X), rng)
    }

    pub fn reset_zero<R: Rng + ?Sized>(&mut self, q: usize, rng: &mut R) {
        if self.measure_z(q, rng) {
            self.apply_pauli(&PauliString::single(self.n, q, Pauli::X));
        }
    }

    pub fn reset_plus<R: Rng + ?Sized>(&mut self, q: usize, rng: &mut R) {
        self.reset_zero(q, rng);
        self.h(q);
    }
}

/// Projects the data register of an `n_total`-qubit tableau onto the code
/// space with every generator at +1 and the chosen logical operator at +1.
pub fn project_initial<R: Rng + ?Sized>(
    code: &StabilizerCode,
    n_total: usize,
    state: LogicalState,
    rng: &mut R,
) -> Tableau {
    let mut t = Tableau::new(n_total);
    let mut bits = 0u64;
    for (i, g) in code.generators().iter().enumerate() {
        if t.measure_pauli(&g.embed(n_total, 0), rng) {
            bits |= 1 << i;
        }
    }
    let logical = match state {
        LogicalState::Zero => code.logical_z(),
        LogicalState::Plus => code.logical_x(),
    };
    let flipped = t.measure_pauli(&logical.embed(n_total, 0), rng);
    let syndrome = Syndrome::from_bits(bits, code.num_generators());
    let (anti_z, anti_x) = match state {
        LogicalState::Zero => (flipped, false),
        LogicalState::Plus => (false, flipped),
    };
    let fix = code.pauli_with_pattern(&syndrome, anti_z, anti_x);
    t.apply_pauli(&fix.embed(n_total, 0));
    t
}

fn faults_at(faults: &[InjectedFault], cursor: &mut usize, location: usize) -> std::ops::Range<usize> {
    while *cursor < faults.len() && faults[*cursor].location < location {
        *cursor += 1;
    }
    let start = *cursor;
    while *cursor < faults.len() && faults[*cursor].location == location {
        *cursor += 1;
    }
    start..*cursor
}

/// Runs `circuit` on `tableau` with faults injected after their locations.
/// Measurement outcomes are the physical ±1 results (XOR any flip faults).
pub fn run_tableau<R: Rng + ?Sized>(
    circuit: &Circuit,
    faults: &FaultConfiguration,
    tableau: &mut Tableau,
    rng: &mut R,
) -> RunResult {
    let n_stab = circuit.n_stabilizers();
    let mut rounds = vec![RoundRecord::new(n_stab); circuit.n_rounds()];
    let mut outcomes = Vec::new();
    let mut cursor = 0;
    let list = faults.faults();
    for loc in circuit.locations() {
        let mut outcome = None;
        match loc.op {
            Operation::PrepPlus(q) => tableau.reset_plus(q, rng),
            Operation::PrepZero(q) => tableau.reset_zero(q, rng),
            Operation::ControlledPauli { pauli, control, target } => tableau.controlled(pauli, control, target),
            Operation::FlagCoupling { control, target } => tableau.cnot(control, target),
            Operation::MeasureX(q) => outcome = Some(tableau.measure_x(q, rng)),
            Operation::MeasureZ(q) => outcome = Some(tableau.measure_z(q, rng)),
        }
        for f in &list[faults_at(list, &mut cursor, loc.id)] {
            match f.effect {
                FaultEffect::Pauli(p) => tableau.apply_pauli(&p),
                FaultEffect::MeasFlip => {
                    if let Some(o) = outcome.as_mut() {
                        *o = !*o;
                    }
                }
            }
        }
        if let Some(o) = outcome {
            outcomes.push(o);
            if let Some(role) = loc.tags.role {
                rounds[loc.tags.round].record(role, o);
            }
        }
    }
    RunResult {
        outcomes,
        rounds,
        residual: PauliString::identity(circuit.registers().n_data),
    }
}

/// Propagates a Pauli frame through locations `range` of `circuit`.
///
/// `frame` spans all registers. Flips are reported to `on_measure(location, flip)`.
pub fn propagate_frame(
    circuit: &Circuit,
    range: std::ops::Range<usize>,
    faults: &[InjectedFault],
    frame: &mut PauliString,
    mut on_measure: impl FnMut(usize, bool),
) {
    let locs = &circuit.locations()[range];
    let mut cursor = 0;
    for loc in locs {
        let mut flip = None;
        match loc.op {
            Operation::PrepPlus(q) | Operation::PrepZero(q) => frame.clear(q),
            Operation::ControlledPauli { pauli, control, target } => {
                frame.conjugate_controlled_letters(control, target, pauli)
            }
            Operation::FlagCoupling { control, target } => {
                frame.conjugate_controlled_letters(control, target, Pauli::X)
            }
            Operation::MeasureX(q) => flip = Some((frame.z_bits() >> q) & 1 == 1),
            Operation::MeasureZ(q) => flip = Some((frame.x_bits() >> q) & 1 == 1),
        }
        for f in &faults[faults_at(faults, &mut cursor, loc.id)] {
            match f.effect {
                FaultEffect::Pauli(p) => frame.mul_assign_letters(&p),
                FaultEffect::MeasFlip => {
                    if let Some(b) = flip.as_mut() {
                        *b = !*b;
                    }
                }
            }
        }
        if let Some(b) = flip {
            on_measure(loc.id, b);
        }
    }
}

/// Frame backend over the whole circuit, starting from an empty frame.
pub fn run_frame(circuit: &Circuit, faults: &FaultConfiguration) -> RunResult {
    run_frame_from(circuit, faults, PauliString::identity(circuit.registers().total()))
}

/// Frame backend starting from a given frame on all registers.
pub fn run_frame_from(circuit: &Circuit, faults: &FaultConfiguration, mut frame: PauliString) -> RunResult {
    let mut rounds = vec![RoundRecord::new(circuit.n_stabilizers()); circuit.n_rounds()];
    let mut outcomes = Vec::new();
    let locs = circuit.locations();
    propagate_frame(circuit, 0..circuit.len(), faults.faults(), &mut frame, |id, b| {
        outcomes.push(b);
        if let Some(role) = locs[id].tags.role {
            rounds[locs[id].tags.round].record(role, b);
        }
    });
    RunResult {
        outcomes,
        rounds,
        residual: frame.slice(0, circuit.registers().n_data),
    }
}

/// Checks one configuration against the tableau oracle: for both `|0_L⟩` and
/// `|+_L⟩` inputs the tableau must reproduce the frame's round records, and
/// undoing the frame residual must return every generator and the input's
/// logical operator to a deterministic +1.
pub fn frame_matches_tableau<R: Rng + ?Sized>(
    code: &StabilizerCode,
    circuit: &Circuit,
    faults: &FaultConfiguration,
    rng: &mut R,
) -> bool {
    let frame = run_frame(circuit, faults);
    let n_total = circuit.registers().total();
    for state in [LogicalState::Zero, LogicalState::Plus] {
        let mut t = project_initial(code, n_total, state, rng);
        let run = run_tableau(circuit, faults, &mut t, rng);
        if run.rounds != frame.rounds {
            return false;
        }
        t.apply_pauli(&frame.residual.embed(n_total, 0));
        let logical = match state {
            LogicalState::Zero => code.logical_z(),
            LogicalState::Plus => code.logical_x(),
        };
        for op in code.generators().iter().chain(std::iter::once(logical)) {
            if t.peek(&op.embed(n_total, 0)) != Some(false) {
                return false;
            }
        }
    }
    true
}
