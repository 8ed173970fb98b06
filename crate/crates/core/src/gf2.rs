//! Small dense linear algebra over GF(2) on symplectic vectors.
//!
//! A Pauli on `n <= 64` qubits is the 128-bit vector `x | z << 64`.

use crate::pauli::PauliString;

#[inline]
pub fn symplectic(p: &PauliString) -> u128 {
    p.x_bits() as u128 | ((p.z_bits() as u128) << 64)
}

#[inline]
pub fn from_symplectic(n: usize, v: u128) -> PauliString {
    PauliString::from_bits(n, v as u64, (v >> 64) as u64, 0)
}

/// Row echelon form: each pivot row with the column it owns.
#[derive(Clone, Debug)]
struct Echelon {
    rows: Vec<(u128, u64, u32)>,
}

impl Echelon {
    /// Reduces `vectors`, tracking which inputs were combined in a u64 mask.
    fn new(vectors: &[u128]) -> Self {
        assert!(vectors.len() <= 64, "at most 64 vectors");
        let mut rows: Vec<(u128, u64, u32)> = Vec::new();
        for (i, &v) in vectors.iter().enumerate() {
            let (mut v, mut combo) = (v, 1u64 << i);
            for &(r, c, pivot) in &rows {
                if (v >> pivot) & 1 == 1 {
                    v ^= r;
                    combo ^= c;
                }
            }
            if v != 0 {
                let pivot = v.trailing_zeros();
                // Keep the basis fully reduced on pivot columns.
                for row in rows.iter_mut() {
                    if (row.0 >> pivot) & 1 == 1 {
                        row.0 ^= v;
                        row.1 ^= combo;
                    }
                }
                rows.push((v, combo, pivot));
            }
        }
        Echelon { rows }
    }

    fn reduce(&self, mut v: u128) -> (u128, u64) {
        let mut combo = 0;
        for &(r, c, pivot) in &self.rows {
            if (v >> pivot) & 1 == 1 {
                v ^= r;
                combo ^= c;
            }
        }
        (v, combo)
    }
}

/// Rank of a set of vectors.
pub fn rank(vectors: &[u128]) -> usize {
    Echelon::new(vectors).rows.len()
}

/// If `target` lies in the span of `vectors`, returns a bitmask selecting a
/// subset whose XOR equals `target`.
pub fn solve_span(vectors: &[u128], target: u128) -> Option<u64> {
    let e = Echelon::new(vectors);
    let (rest, combo) = e.reduce(target);
    (rest == 0).then_some(combo)
}

/// Finds a Pauli `f` on `n` qubits whose commutation with each `ops[i]` is
/// prescribed: bit `i` of `pattern` set means `f` must anticommute with `ops[i]`.
pub fn solve_commutation(n: usize, ops: &[PauliString], pattern: u64) -> Option<PauliString> {
    // <f, op> = f.x·op.z + f.z·op.x, so the constraint row is op with x/z swapped.
    let rows: Vec<u128> = ops
        .iter()
        .map(|op| op.z_bits() as u128 | ((op.x_bits() as u128) << 64))
        .collect();
    let m = rows.len();
    assert!(m <= 64);
    // Gaussian elimination on [rows | rhs].
    let mut aug: Vec<(u128, bool)> = rows
        .iter()
        .enumerate()
        .map(|(i, &r)| (r, (pattern >> i) & 1 == 1))
        .collect();
    let mut pivots: Vec<(usize, u32)> = Vec::new();
    let mut row = 0;
    for col in 0..128u32 {
        if row == m {
            break;
        }
        let Some(sel) = (row..m).find(|&r| (aug[r].0 >> col) & 1 == 1) else {
            continue;
        };
        aug.swap(row, sel);
        let pr = aug[row];
        for (r, entry) in aug.iter_mut().enumerate() {
            if r != row && (entry.0 >> col) & 1 == 1 {
                entry.0 ^= pr.0;
                entry.1 ^= pr.1;
            }
        }
        pivots.push((row, col));
        row += 1;
    }
    if aug[row..].iter().any(|&(r, b)| r == 0 && b) {
        return None;
    }
    let mut sol = 0u128;
    for &(r, col) in &pivots {
        if aug[r].1 {
            sol |= 1u128 << col;
        }
    }
    let f = from_symplectic(n, sol);
    debug_assert!(ops
        .iter()
        .enumerate()
        .all(|(i, op)| f.commutes_unchecked(op) == ((pattern >> i) & 1 == 0)));
    Some(f)
}
