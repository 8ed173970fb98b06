//! Phased Pauli operators in binary-symplectic form and their Clifford conjugation.
//!
//! A [`PauliString`] on `n <= 64` qubits stores one machine word per symplectic
//! component, so products and commutation checks are a handful of word ops.
//! The stored operator is `i^phase * (P_0 ⊗ P_1 ⊗ ...)` where each `P_q` is one
//! of `I, X, Y, Z` (with `Y` itself, not `XZ`).

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Maximum number of qubits a [`PauliString`] can address.
pub const MAX_QUBITS: usize = 64;

/// Single-qubit Pauli letter.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const NON_IDENTITY: [Pauli; 3] = [Pauli::X, Pauli::Y, Pauli::Z];
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

    #[inline]
    pub fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }

    #[inline]
    pub fn from_bits(x: bool, z: bool) -> Pauli {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    pub fn letter(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    pub fn from_letter(c: char) -> Option<Pauli> {
        match c {
            'I' => Some(Pauli::I),
            'X' => Some(Pauli::X),
            'Y' => Some(Pauli::Y),
            'Z' => Some(Pauli::Z),
            _ => None,
        }
    }

    pub fn commutes_with(self, other: Pauli) -> bool {
        self == Pauli::I || other == Pauli::I || self == other
    }
}

/// Multiplies two single-qubit Paulis; returns the phase exponent `k` of `i^k`.
#[inline]
fn mul_letters(a: Pauli, b: Pauli) -> (u8, Pauli) {
    use Pauli::*;
    let (ax, az) = a.bits();
    let (bx, bz) = b.bits();
    let out = Pauli::from_bits(ax ^ bx, az ^ bz);
    let k = match (a, b) {
        (X, Y) | (Y, Z) | (Z, X) => 1,
        (Y, X) | (Z, Y) | (X, Z) => 3,
        _ => 0,
    };
    (k, out)
}

/// A phased n-qubit Pauli operator.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct PauliString {
    n: u8,
    phase: u8,
    x: u64,
    z: u64,
}

#[inline]
fn mask(n: usize) -> u64 {
    if n == 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

impl PauliString {
    /// The identity on `n` qubits.
    ///
    /// Panics if `n > 64`; use [`PauliString::try_identity`] for a fallible version.
    pub fn identity(n: usize) -> Self {
        Self::try_identity(n).expect("qubit count exceeds 64")
    }

    pub fn try_identity(n: usize) -> Result<Self> {
        if n > MAX_QUBITS {
            return Err(Error::TooManyQubits(n));
        }
        Ok(PauliString {
            n: n as u8,
            phase: 0,
            x: 0,
            z: 0,
        })
    }

    /// Builds a Pauli from raw symplectic words. Bits above `n` are discarded.
    pub fn from_bits(n: usize, x: u64, z: u64, phase: u8) -> Self {
        assert!(n <= MAX_QUBITS, "qubit count exceeds 64");
        let m = mask(n);
        PauliString {
            n: n as u8,
            phase: phase & 3,
            x: x & m,
            z: z & m,
        }
    }

    /// A single Pauli letter on one qubit.
    pub fn single(n: usize, qubit: usize, p: Pauli) -> Self {
        let mut out = Self::identity(n);
        out.set(qubit, p);
        out
    }

    /// Builds a Pauli from `(qubit, letter)` pairs; repeated qubits multiply.
    pub fn from_sparse(n: usize, terms: &[(usize, Pauli)]) -> Result<Self> {
        let mut out = Self::try_identity(n)?;
        for &(q, p) in terms {
            if q >= n {
                return Err(Error::QubitOutOfRange { qubit: q, n });
            }
            out = out.mul(&Self::single(n, q, p))?;
        }
        Ok(out)
    }

    #[inline]
    pub fn num_qubits(&self) -> usize {
        self.n as usize
    }

    #[inline]
    pub fn x_bits(&self) -> u64 {
        self.x
    }

    #[inline]
    pub fn z_bits(&self) -> u64 {
        self.z
    }

    /// Phase exponent `k` of the prefactor `i^k`.
    #[inline]
    pub fn phase(&self) -> u8 {
        self.phase
    }

    pub fn with_phase(mut self, phase: u8) -> Self {
        self.phase = phase & 3;
        self
    }

    #[inline]
    pub fn get(&self, qubit: usize) -> Pauli {
        Pauli::from_bits((self.x >> qubit) & 1 == 1, (self.z >> qubit) & 1 == 1)
    }

    /// Overwrites the letter on `qubit` without touching the phase.
    #[inline]
    pub fn set(&mut self, qubit: usize, p: Pauli) {
        assert!(qubit < self.num_qubits(), "qubit {qubit} out of range");
        let (x, z) = p.bits();
        let b = 1u64 << qubit;
        self.x = (self.x & !b) | if x { b } else { 0 };
        self.z = (self.z & !b) | if z { b } else { 0 };
    }

    /// Clears the letter on `qubit`.
    #[inline]
    pub fn clear(&mut self, qubit: usize) {
        let b = !(1u64 << qubit);
        self.x &= b;
        self.z &= b;
    }

    /// True when every site is `I` (the phase is ignored).
    #[inline]
    pub fn is_identity(&self) -> bool {
        self.x == 0 && self.z == 0
    }

    /// Number of non-identity sites.
    #[inline]
    pub fn weight(&self) -> usize {
        (self.x | self.z).count_ones() as usize
    }

    #[inline]
    pub fn support(&self) -> u64 {
        self.x | self.z
    }

    /// The same letters with phase `+1`.
    #[inline]
    pub fn unsigned(&self) -> Self {
        PauliString { phase: 0, ..*self }
    }

    /// Equality up to global phase.
    #[inline]
    pub fn eq_up_to_phase(&self, other: &Self) -> bool {
        self.n == other.n && self.x == other.x && self.z == other.z
    }

    fn check_size(&self, other: &Self) -> Result<()> {
        if self.n != other.n {
            return Err(Error::SizeMismatch {
                left: self.num_qubits(),
                right: other.num_qubits(),
            });
        }
        Ok(())
    }

    /// Operator product `self * other`, phase included.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_size(other)?;
        Ok(self.mul_unchecked(other))
    }

    /// Product without the size check (sizes must match).
    #[inline]
    pub fn mul_unchecked(&self, other: &Self) -> Self {
        let (x1, z1, x2, z2) = (self.x, self.z, other.x, other.z);
        let a_x = x1 & !z1;
        let a_y = x1 & z1;
        let a_z = !x1 & z1;
        let b_x = x2 & !z2;
        let b_y = x2 & z2;
        let b_z = !x2 & z2;
        let pos = (a_x & b_y) | (a_y & b_z) | (a_z & b_x);
        let neg = (a_y & b_x) | (a_z & b_y) | (a_x & b_z);
        let k = self.phase as u32 + other.phase as u32 + pos.count_ones() + 3 * neg.count_ones();
        PauliString {
            n: self.n,
            phase: (k & 3) as u8,
            x: x1 ^ x2,
            z: z1 ^ z2,
        }
    }

    /// In-place product ignoring phase; used on hot paths where only the
    /// letters matter.
    #[inline]
    pub fn mul_assign_letters(&mut self, other: &Self) {
        self.x ^= other.x;
        self.z ^= other.z;
    }

    /// Whether the two operators commute (symplectic inner product zero).
    pub fn commutes(&self, other: &Self) -> Result<bool> {
        self.check_size(other)?;
        Ok(self.commutes_unchecked(other))
    }

    #[inline]
    pub fn commutes_unchecked(&self, other: &Self) -> bool {
        ((self.x & other.z) ^ (self.z & other.x)).count_ones().is_multiple_of(2)
    }

    /// `g · self · g†`, phase-exact.
    pub fn conjugate(&self, gate: &CliffordGate) -> Result<Self> {
        gate.check_range(self.num_qubits())?;
        let mut out = *self;
        out.conjugate_in_place(gate);
        Ok(out)
    }

    /// In-place conjugation; the gate must already be range-checked.
    pub fn conjugate_in_place(&mut self, gate: &CliffordGate) {
        match gate.kind {
            GateKind::H => {
                let q = gate.qubits[0];
                let p = self.get(q);
                let (np, k) = match p {
                    Pauli::X => (Pauli::Z, 0),
                    Pauli::Z => (Pauli::X, 0),
                    Pauli::Y => (Pauli::Y, 2),
                    Pauli::I => (Pauli::I, 0),
                };
                self.set(q, np);
                self.phase = (self.phase + k) & 3;
            }
            GateKind::S | GateKind::Sdg => {
                let q = gate.qubits[0];
                let p = self.get(q);
                // S: X -> Y, Y -> -X.  S†: X -> -Y, Y -> X.
                let (np, k) = match (gate.kind, p) {
                    (GateKind::S, Pauli::X) => (Pauli::Y, 0),
                    (GateKind::S, Pauli::Y) => (Pauli::X, 2),
                    (GateKind::Sdg, Pauli::X) => (Pauli::Y, 2),
                    (GateKind::Sdg, Pauli::Y) => (Pauli::X, 0),
                    (_, other) => (other, 0),
                };
                self.set(q, np);
                self.phase = (self.phase + k) & 3;
            }
            GateKind::Cx | GateKind::Cz | GateKind::Cy => {
                let target_pauli = gate.kind.controlled_pauli().expect("controlled kind");
                self.conjugate_controlled(gate.qubits[0], gate.qubits[1], target_pauli);
            }
        }
    }

    /// Conjugation by controlled-`p` with the given control and target.
    ///
    /// `a ⊗ b` maps to `(a · Z^[b anticommutes with p]) ⊗ (p^[a has X] · b)`.
    #[inline]
    pub fn conjugate_controlled(&mut self, control: usize, target: usize, p: Pauli) {
        let a = self.get(control);
        let b = self.get(target);
        let a_has_x = matches!(a, Pauli::X | Pauli::Y);
        let anti = !b.commutes_with(p);
        let (k1, new_a) = if anti { mul_letters(a, Pauli::Z) } else { (0, a) };
        let (k2, new_b) = if a_has_x { mul_letters(p, b) } else { (0, b) };
        self.set(control, new_a);
        self.set(target, new_b);
        self.phase = (self.phase + k1 + k2) & 3;
    }

    /// Letters-only conjugation by controlled-`p`; the frame simulator's hot path.
    #[inline]
    pub fn conjugate_controlled_letters(&mut self, control: usize, target: usize, p: Pauli) {
        let cx = (self.x >> control) & 1;
        let tx = (self.x >> target) & 1;
        let tz = (self.z >> target) & 1;
        let (px, pz) = p.bits();
        let (px, pz) = (px as u64, pz as u64);
        // b anticommutes with p iff the symplectic product is odd.
        let anti = (tx & pz) ^ (tz & px);
        self.z ^= anti << control;
        self.x ^= (cx & px) << target;
        self.z ^= (cx & pz) << target;
    }

    /// Restricts to the qubits `offset..offset + len`, renumbered from zero.
    pub fn slice(&self, offset: usize, len: usize) -> Self {
        PauliString::from_bits(len, self.x >> offset, self.z >> offset, self.phase)
    }

    /// Embeds into a larger register starting at `offset`.
    pub fn embed(&self, n: usize, offset: usize) -> Self {
        assert!(offset + self.num_qubits() <= n);
        PauliString::from_bits(n, self.x << offset, self.z << offset, self.phase)
    }

    /// Iterates over `(qubit, letter)` for non-identity sites.
    pub fn iter_support(&self) -> impl Iterator<Item = (usize, Pauli)> + '_ {
        (0..self.num_qubits()).filter_map(move |q| {
            let p = self.get(q);
            (p != Pauli::I).then_some((q, p))
        })
    }

    /// Dense letter string such as `"IXZY"`, without phase.
    pub fn to_dense_letters(&self) -> String {
        (0..self.num_qubits()).map(|q| self.get(q).letter()).collect()
    }

    /// Sparse rendering in index notation, e.g. `"Z0 Z1 Z2 X3 Z4 Z5"`.
    /// The identity renders as `"I"`; a non-trivial phase is prefixed.
    pub fn to_sparse_string(&self) -> String {
        let prefix = match self.phase {
            0 => "",
            1 => "+i ",
            2 => "-",
            _ => "-i ",
        };
        if self.is_identity() {
            return format!("{prefix}I");
        }
        let body: Vec<String> = self
            .iter_support()
            .map(|(q, p)| format!("{}{}", p.letter(), q))
            .collect();
        format!("{prefix}{}", body.join(" "))
    }

    /// Parses sparse index notation (`"X1 X2 X3"`, `"Z0Z1Z4"`, `"-i Y3"`, `"I"`).
    pub fn parse_sparse(n: usize, s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("invalid Pauli string {s:?}"));
        let mut rest = s.trim();
        let mut phase = 0u8;
        for (pre, k) in [("+i", 1u8), ("-i", 3), ("i", 1), ("+", 0), ("-", 2)] {
            if let Some(r) = rest.strip_prefix(pre) {
                // "i" alone must be followed by whitespace to not be confused with a letter.
                if pre.ends_with('i') && !r.starts_with(char::is_whitespace) {
                    continue;
                }
                phase = k;
                rest = r.trim_start();
                break;
            }
        }
        let mut out = Self::try_identity(n)?;
        if rest == "I" || rest.is_empty() {
            return if rest.is_empty() { Err(bad()) } else { Ok(out.with_phase(phase)) };
        }
        let chars: Vec<char> = rest.chars().filter(|c| !c.is_whitespace() && *c != '*').collect();
        let mut i = 0;
        while i < chars.len() {
            let p = Pauli::from_letter(chars[i]).ok_or_else(bad)?;
            i += 1;
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            if start == i {
                return Err(bad());
            }
            let q: usize = chars[start..i].iter().collect::<String>().parse().map_err(|_| bad())?;
            if q >= n {
                return Err(Error::QubitOutOfRange { qubit: q, n });
            }
            out = out.mul_unchecked(&PauliString::single(n, q, p));
        }
        Ok(out.with_phase((out.phase + phase) & 3))
    }

    /// Parses a dense letter string like `"XZZXI"` (optionally signed).
    pub fn parse_dense(s: &str) -> Result<Self> {
        let s = s.trim();
        let (phase, body) = if let Some(b) = s.strip_prefix('-') {
            (2, b)
        } else {
            (0, s.strip_prefix('+').unwrap_or(s))
        };
        let n = body.chars().count();
        let mut out = Self::try_identity(n)?;
        for (q, c) in body.chars().enumerate() {
            let p = Pauli::from_letter(c)
                .ok_or_else(|| Error::Parse(format!("invalid Pauli letter {c:?} in {s:?}")))?;
            out.set(q, p);
        }
        Ok(out.with_phase(phase))
    }
}

impl fmt::Debug for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PauliString[{}]({})", self.n, self.to_sparse_string())
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_sparse_string())
    }
}

impl FromStr for PauliString {
    type Err = Error;

    /// Dense letters only; sparse notation needs an explicit qubit count.
    fn from_str(s: &str) -> Result<Self> {
        PauliString::parse_dense(s)
    }
}

/// Clifford gate kinds supported by both simulation backends.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GateKind {
    H,
    S,
    Sdg,
    Cx,
    Cy,
    Cz,
}

impl GateKind {
    /// Alias kept for readability at call sites that speak of CNOT.
    pub const CNOT: GateKind = GateKind::Cx;

    pub fn arity(self) -> usize {
        match self {
            GateKind::H | GateKind::S | GateKind::Sdg => 1,
            _ => 2,
        }
    }

    /// For controlled gates, the Pauli applied to the target.
    pub fn controlled_pauli(self) -> Option<Pauli> {
        match self {
            GateKind::Cx => Some(Pauli::X),
            GateKind::Cy => Some(Pauli::Y),
            GateKind::Cz => Some(Pauli::Z),
            _ => None,
        }
    }

    pub fn controlled(p: Pauli) -> Option<GateKind> {
        match p {
            Pauli::X => Some(GateKind::Cx),
            Pauli::Y => Some(GateKind::Cy),
            Pauli::Z => Some(GateKind::Cz),
            Pauli::I => None,
        }
    }
}

/// A Clifford gate with its qubit operands (control first for two-qubit kinds).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct CliffordGate {
    pub kind: GateKind,
    qubits: [usize; 2],
}

impl CliffordGate {
    pub fn single(kind: GateKind, q: usize) -> Result<Self> {
        if kind.arity() != 1 {
            return Err(Error::InvalidGate(format!("{kind:?} needs two qubits")));
        }
        Ok(CliffordGate { kind, qubits: [q, q] })
    }

    pub fn two(kind: GateKind, control: usize, target: usize) -> Result<Self> {
        if kind.arity() != 2 {
            return Err(Error::InvalidGate(format!("{kind:?} acts on one qubit")));
        }
        if control == target {
            return Err(Error::InvalidGate(format!(
                "{kind:?} with identical control and target {control}"
            )));
        }
        Ok(CliffordGate {
            kind,
            qubits: [control, target],
        })
    }

    pub fn h(q: usize) -> Self {
        CliffordGate { kind: GateKind::H, qubits: [q, q] }
    }

    pub fn s(q: usize) -> Self {
        CliffordGate { kind: GateKind::S, qubits: [q, q] }
    }

    pub fn cnot(c: usize, t: usize) -> Self {
        Self::two(GateKind::Cx, c, t).expect("distinct qubits")
    }

    pub fn cz(c: usize, t: usize) -> Self {
        Self::two(GateKind::Cz, c, t).expect("distinct qubits")
    }

    pub fn cy(c: usize, t: usize) -> Self {
        Self::two(GateKind::Cy, c, t).expect("distinct qubits")
    }

    pub fn qubits(&self) -> &[usize] {
        &self.qubits[..self.kind.arity()]
    }

    /// The inverse gate.
    pub fn inverse(&self) -> Self {
        let kind = match self.kind {
            GateKind::S => GateKind::Sdg,
            GateKind::Sdg => GateKind::S,
            k => k,
        };
        CliffordGate { kind, ..*self }
    }

    fn check_range(&self, n: usize) -> Result<()> {
        for &q in self.qubits() {
            if q >= n {
                return Err(Error::QubitOutOfRange { qubit: q, n });
            }
        }
        Ok(())
    }
}
