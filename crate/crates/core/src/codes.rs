//! Stabilizer code definitions, syndromes and logical-coset classification.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf2;
use crate::pauli::{Pauli, PauliString};

/// Outcome of measuring every generator against an error.
///
/// Bit `i` belongs to generator `i`; the string form lists generator 0 first.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Syndrome {
    bits: u64,
    len: u8,
}

impl Syndrome {
    pub fn zero(len: usize) -> Self {
        Syndrome { bits: 0, len: len as u8 }
    }

    pub fn from_bits(bits: u64, len: usize) -> Self {
        let mask = if len == 64 { u64::MAX } else { (1u64 << len) - 1 };
        Syndrome { bits: bits & mask, len: len as u8 }
    }

    #[inline]
    pub fn bits(&self) -> u64 {
        self.bits
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len as usize
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn is_zero(&self) -> bool {
        self.bits == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        (self.bits >> i) & 1 == 1
    }

    pub fn xor(&self, other: &Syndrome) -> Syndrome {
        Syndrome { bits: self.bits ^ other.bits, len: self.len }
    }

    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        let mut bits = 0;
        for (i, c) in s.chars().enumerate() {
            match c {
                '0' => {}
                '1' => bits |= 1 << i,
                _ => return Err(Error::Parse(format!("invalid syndrome {s:?}"))),
            }
        }
        Ok(Syndrome { bits, len: s.len() as u8 })
    }
}

impl fmt::Display for Syndrome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len() {
            f.write_str(if self.get(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for Syndrome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Syndrome({self})")
    }
}

/// Coset of the normalizer an error falls into.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CosetClass {
    InStabilizer,
    LogicalX,
    LogicalY,
    LogicalZ,
    NonzeroSyndrome,
}

impl CosetClass {
    /// Flips the logical `|0>` state: `X_L` or `Y_L`, or leaves the codespace.
    pub fn is_state_failure(self) -> bool {
        matches!(self, CosetClass::LogicalX | CosetClass::LogicalY | CosetClass::NonzeroSyndrome)
    }

    /// Anything other than a stabilizer element.
    pub fn is_any_failure(self) -> bool {
        self != CosetClass::InStabilizer
    }
}

/// An `[[n, 1, d]]` stabilizer code.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StabilizerCode {
    name: String,
    n: usize,
    generators: Vec<PauliString>,
    logical_x: PauliString,
    logical_z: PauliString,
}

impl StabilizerCode {
    /// Validates commutation, independence and logical anticommutation.
    pub fn new(
        name: impl Into<String>,
        generators: Vec<PauliString>,
        logical_x: PauliString,
        logical_z: PauliString,
    ) -> Result<Self> {
        let name = name.into();
        let n = logical_x.num_qubits();
        let bad = |msg: String| Err(Error::InvalidCode(format!("{name}: {msg}")));
        if generators.iter().chain([&logical_z]).any(|g| g.num_qubits() != n) {
            return bad("operators act on different qubit counts".into());
        }
        if generators.len() + 1 != n {
            return bad(format!("expected {} generators for k = 1, got {}", n - 1, generators.len()));
        }
        for (i, a) in generators.iter().enumerate() {
            for (j, b) in generators.iter().enumerate().skip(i + 1) {
                if !a.commutes_unchecked(b) {
                    return bad(format!("generators {i} and {j} anticommute"));
                }
            }
            if !a.commutes_unchecked(&logical_x) || !a.commutes_unchecked(&logical_z) {
                return bad(format!("generator {i} anticommutes with a logical operator"));
            }
        }
        if logical_x.commutes_unchecked(&logical_z) {
            return bad("logical X and Z commute".into());
        }
        let vecs: Vec<u128> = generators.iter().map(gf2::symplectic).collect();
        if gf2::rank(&vecs) != generators.len() {
            return bad("generators are not independent".into());
        }
        Ok(StabilizerCode {
            name,
            n,
            generators,
            logical_x,
            logical_z,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        1
    }

    pub fn generators(&self) -> &[PauliString] {
        &self.generators
    }

    pub fn num_generators(&self) -> usize {
        self.generators.len()
    }

    pub fn logical_x(&self) -> &PauliString {
        &self.logical_x
    }

    pub fn logical_z(&self) -> &PauliString {
        &self.logical_z
    }

    fn check_size(&self, e: &PauliString) -> Result<()> {
        if e.num_qubits() != self.n {
            return Err(Error::SizeMismatch { left: e.num_qubits(), right: self.n });
        }
        Ok(())
    }

    pub fn syndrome_of(&self, e: &PauliString) -> Result<Syndrome> {
        self.check_size(e)?;
        Ok(self.syndrome_unchecked(e))
    }

    #[inline]
    pub fn syndrome_unchecked(&self, e: &PauliString) -> Syndrome {
        let mut bits = 0u64;
        for (i, g) in self.generators.iter().enumerate() {
            if !e.commutes_unchecked(g) {
                bits |= 1 << i;
            }
        }
        Syndrome::from_bits(bits, self.generators.len())
    }

    pub fn classify_coset(&self, e: &PauliString) -> Result<CosetClass> {
        self.check_size(e)?;
        Ok(self.classify_unchecked(e))
    }

    #[inline]
    pub fn classify_unchecked(&self, e: &PauliString) -> CosetClass {
        if !self.syndrome_unchecked(e).is_zero() {
            return CosetClass::NonzeroSyndrome;
        }
        let anti_z = !e.commutes_unchecked(&self.logical_z);
        let anti_x = !e.commutes_unchecked(&self.logical_x);
        match (anti_z, anti_x) {
            (false, false) => CosetClass::InStabilizer,
            (true, false) => CosetClass::LogicalX,
            (false, true) => CosetClass::LogicalZ,
            (true, true) => CosetClass::LogicalY,
        }
    }

    /// Membership in the stabilizer group up to sign, by elimination.
    pub fn in_stabilizer_group(&self, e: &PauliString) -> Result<bool> {
        self.check_size(e)?;
        let vecs: Vec<u128> = self.generators.iter().map(gf2::symplectic).collect();
        Ok(gf2::solve_span(&vecs, gf2::symplectic(e)).is_some())
    }

    /// Whether `a` and `b` differ by a stabilizer element (ignoring sign).
    pub fn equivalent(&self, a: &PauliString, b: &PauliString) -> Result<bool> {
        self.in_stabilizer_group(&a.mul(b)?)
    }

    /// Every element of the stabilizer group, as products of generator subsets.
    pub fn stabilizer_group(&self) -> Vec<PauliString> {
        let m = self.generators.len();
        (0u64..1 << m)
            .map(|mask| {
                (0..m)
                    .filter(|i| mask >> i & 1 == 1)
                    .fold(PauliString::identity(self.n), |acc, i| acc.mul_unchecked(&self.generators[i]))
            })
            .collect()
    }

    /// A Pauli with the given syndrome that commutes with both logicals
    /// except where `anti_logical_z` / `anti_logical_x` request otherwise.
    pub fn pauli_with_pattern(
        &self,
        syndrome: &Syndrome,
        anti_logical_z: bool,
        anti_logical_x: bool,
    ) -> PauliString {
        let mut ops = self.generators.clone();
        ops.push(self.logical_z);
        ops.push(self.logical_x);
        let m = self.generators.len();
        let pattern = syndrome.bits()
            | (anti_logical_z as u64) << m
            | (anti_logical_x as u64) << (m + 1);
        gf2::solve_commutation(self.n, &ops, pattern)
            .expect("generators and logicals are independent")
    }

    /// True iff no Pauli of weight `1..d` has zero syndrome outside the stabilizer group.
    pub fn check_distance(&self, d: usize) -> bool {
        (1..d.min(self.n + 1)).all(|w| {
            let mut ok = true;
            for_each_pauli_of_weight(self.n, w, |e| {
                if ok && self.classify_unchecked(e) != CosetClass::InStabilizer
                    && self.syndrome_unchecked(e).is_zero()
                {
                    ok = false;
                }
            });
            ok
        })
    }

    /// Serializes to the TOML code-definition format.
    pub fn to_definition(&self) -> String {
        let def = CodeDefinition {
            name: self.name.clone(),
            n: self.n,
            generators: self.generators.iter().map(|g| g.to_sparse_string()).collect(),
            logical_x: self.logical_x.to_sparse_string(),
            logical_z: self.logical_z.to_sparse_string(),
        };
        toml::to_string(&def).expect("code definition serializes")
    }

    /// Parses the TOML code-definition format.
    pub fn from_definition(text: &str) -> Result<Self> {
        let def: CodeDefinition =
            toml::from_str(text).map_err(|e| Error::Parse(format!("code definition: {e}")))?;
        let parse = |s: &str| PauliString::parse_sparse(def.n, s);
        let generators = def.generators.iter().map(|g| parse(g)).collect::<Result<Vec<_>>>()?;
        StabilizerCode::new(def.name.clone(), generators, parse(&def.logical_x)?, parse(&def.logical_z)?)
    }
}

#[derive(Serialize, Deserialize)]
struct CodeDefinition {
    name: String,
    n: usize,
    generators: Vec<String>,
    logical_x: String,
    logical_z: String,
}

/// Calls `f` on every Pauli of exactly weight `w` on `n` qubits, in a fixed
/// order: qubit subsets lexicographically, then letters X < Y < Z with the
/// lowest qubit varying slowest.
pub fn for_each_pauli_of_weight(n: usize, w: usize, mut f: impl FnMut(&PauliString)) {
    fn rec(
        n: usize,
        w: usize,
        start: usize,
        cur: &mut PauliString,
        f: &mut dyn FnMut(&PauliString),
    ) {
        if w == 0 {
            f(cur);
            return;
        }
        for q in start..n {
            if n - q < w {
                break;
            }
            for p in Pauli::NON_IDENTITY {
                cur.set(q, p);
                rec(n, w - 1, q + 1, cur, f);
            }
            cur.clear(q);
        }
    }
    let mut cur = PauliString::identity(n);
    rec(n, w, 0, &mut cur, &mut f);
}

fn sparse(n: usize, s: &str) -> PauliString {
    PauliString::parse_sparse(n, s).expect("built-in operator")
}

/// The non-CSS, degenerate Bare [[7,1,3]] code.
pub fn bare_713() -> StabilizerCode {
    let gens = [
        "X0 X4",
        "X1 X4",
        "X2 X5",
        "X3 X6",
        "Z2 Z3 Y5 Y6",
        "Z0 Z1 Z2 X3 Z4 Z5",
    ];
    StabilizerCode::new(
        "bare713",
        gens.iter().map(|g| sparse(7, g)).collect(),
        sparse(7, "X1 X2 X3"),
        sparse(7, "Z0 Z1 Z4"),
    )
    .expect("bare [[7,1,3]] is a valid code")
}

/// The Steane [[7,1,3]] code: three X-type then three Z-type Hamming checks.
pub fn steane_713() -> StabilizerCode {
    let supports = ["3 4 5 6", "1 2 5 6", "0 2 4 6"];
    let typed = |p: char| {
        supports
            .iter()
            .map(move |s| {
                let terms: Vec<String> = s.split(' ').map(|q| format!("{p}{q}")).collect();
                sparse(7, &terms.join(" "))
            })
            .collect::<Vec<_>>()
    };
    let mut gens = typed('X');
    gens.extend(typed('Z'));
    StabilizerCode::new(
        "steane713",
        gens,
        sparse(7, "X0 X1 X2 X3 X4 X5 X6"),
        sparse(7, "Z0 Z1 Z2 Z3 Z4 Z5 Z6"),
    )
    .expect("Steane code is valid")
}

/// The perfect [[5,1,3]] code with cyclic `XZZXI` generators.
pub fn five_qubit_513() -> StabilizerCode {
    let gens = ["XZZXI", "IXZZX", "XIXZZ", "ZXIXZ"];
    StabilizerCode::new(
        "fivequbit513",
        gens.iter().map(|g| g.parse().expect("built-in")).collect(),
        "XXXXX".parse().expect("built-in"),
        "ZZZZZ".parse().expect("built-in"),
    )
    .expect("five-qubit code is valid")
}

/// Names accepted by [`builtin`].
pub const BUILTIN_CODES: [&str; 3] = ["bare713", "steane713", "fivequbit513"];

/// A built-in code by name.
pub fn builtin(name: &str) -> Result<StabilizerCode> {
    match name {
        "bare713" => Ok(bare_713()),
        "steane713" => Ok(steane_713()),
        "fivequbit513" => Ok(five_qubit_513()),
        _ => Err(Error::Parse(format!("unknown code {name:?} (expected one of {})", BUILTIN_CODES.join(", ")))),
    }
}
