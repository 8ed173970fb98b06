//! Symplectic Pauli algebra checked against explicit complex matrices.

use bare713::pauli::{CliffordGate, GateKind, Pauli, PauliString};
use num_complex::Complex64 as C;
use proptest::prelude::*;

type Mat = Vec<Vec<C>>;

fn zeros(d: usize) -> Mat {
    vec![vec![C::new(0.0, 0.0); d]; d]
}

fn eye(d: usize) -> Mat {
    let mut m = zeros(d);
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = C::new(1.0, 0.0);
    }
    m
}

fn matmul(a: &Mat, b: &Mat) -> Mat {
    let d = a.len();
    let mut out = zeros(d);
    for i in 0..d {
        for k in 0..d {
            if a[i][k] == C::new(0.0, 0.0) {
                continue;
            }
            for j in 0..d {
                out[i][j] += a[i][k] * b[k][j];
            }
        }
    }
    out
}

fn dagger(a: &Mat) -> Mat {
    let d = a.len();
    let mut out = zeros(d);
    for i in 0..d {
        for j in 0..d {
            out[j][i] = a[i][j].conj();
        }
    }
    out
}

fn kron(a: &Mat, b: &Mat) -> Mat {
    let (da, db) = (a.len(), b.len());
    let mut out = zeros(da * db);
    for i in 0..da {
        for j in 0..da {
            for k in 0..db {
                for l in 0..db {
                    out[i * db + k][j * db + l] = a[i][j] * b[k][l];
                }
            }
        }
    }
    out
}

fn add(a: &Mat, b: &Mat) -> Mat {
    a.iter().zip(b).map(|(r, s)| r.iter().zip(s).map(|(x, y)| x + y).collect()).collect()
}

fn close(a: &Mat, b: &Mat) -> bool {
    a.iter().flatten().zip(b.iter().flatten()).all(|(x, y)| (x - y).norm() < 1e-12)
}

fn single(p: Pauli) -> Mat {
    let (o, z, i) = (C::new(1.0, 0.0), C::new(0.0, 0.0), C::new(0.0, 1.0));
    match p {
        Pauli::I => vec![vec![o, z], vec![z, o]],
        Pauli::X => vec![vec![z, o], vec![o, z]],
        Pauli::Y => vec![vec![z, -i], vec![i, z]],
        Pauli::Z => vec![vec![o, z], vec![z, -o]],
    }
}

/// Qubit 0 is the leftmost tensor factor.
fn embed(n: usize, ops: &[(usize, Mat)]) -> Mat {
    let mut out = vec![vec![C::new(1.0, 0.0)]];
    for q in 0..n {
        let m = ops.iter().find(|(k, _)| *k == q).map(|(_, m)| m.clone()).unwrap_or_else(|| eye(2));
        out = kron(&out, &m);
    }
    out
}

fn dense(p: &PauliString) -> Mat {
    let n = p.num_qubits();
    let ops: Vec<(usize, Mat)> = (0..n).map(|q| (q, single(p.get(q)))).collect();
    let phase = [C::new(1.0, 0.0), C::new(0.0, 1.0), C::new(-1.0, 0.0), C::new(0.0, -1.0)][p.phase() as usize];
    embed(n, &ops).into_iter().map(|r| r.into_iter().map(|x| x * phase).collect()).collect()
}

fn gate_matrix(n: usize, g: &CliffordGate) -> Mat {
    let h = 1.0 / 2f64.sqrt();
    let (o, z, i) = (C::new(1.0, 0.0), C::new(0.0, 0.0), C::new(0.0, 1.0));
    match g.kind {
        GateKind::H => embed(n, &[(g.qubits()[0], vec![vec![o * h, o * h], vec![o * h, -o * h]])]),
        GateKind::S => embed(n, &[(g.qubits()[0], vec![vec![o, z], vec![z, i]])]),
        GateKind::Sdg => embed(n, &[(g.qubits()[0], vec![vec![o, z], vec![z, -i]])]),
        k => {
            let (c, t) = (g.qubits()[0], g.qubits()[1]);
            let p0 = vec![vec![o, z], vec![z, z]];
            let p1 = vec![vec![z, z], vec![z, o]];
            let target = single(k.controlled_pauli().unwrap());
            add(&embed(n, &[(c, p0)]), &embed(n, &[(c, p1), (t, target)]))
        }
    }
}

fn all_paulis(n: usize) -> Vec<PauliString> {
    let mut out = Vec::new();
    for code in 0..4usize.pow(n as u32) {
        let mut p = PauliString::identity(n);
        for q in 0..n {
            p.set(q, Pauli::ALL[(code >> (2 * q)) & 3]);
        }
        out.push(p);
    }
    out
}

fn gates(n: usize) -> Vec<CliffordGate> {
    let mut g = Vec::new();
    for q in 0..n {
        g.push(CliffordGate::h(q));
        g.push(CliffordGate::s(q));
        g.push(CliffordGate::s(q).inverse());
    }
    for c in 0..n {
        for t in 0..n {
            if c != t {
                g.push(CliffordGate::cnot(c, t));
                g.push(CliffordGate::cy(c, t));
                g.push(CliffordGate::cz(c, t));
            }
        }
    }
    g
}

#[test]
fn products_of_two_qubit_paulis() {
    let ps = all_paulis(2);
    let mut pairs = 0;
    for a in &ps {
        for b in &ps {
            let prod = a.mul(b).unwrap();
            assert!(close(&dense(&prod), &matmul(&dense(a), &dense(b))), "{a} * {b}");
            let anti = !a.commutes(b).unwrap();
            let ab = matmul(&dense(a), &dense(b));
            let ba = matmul(&dense(b), &dense(a));
            let neg_ba: Mat = ba.iter().map(|r| r.iter().map(|x| -x).collect()).collect();
            assert!(close(&ab, if anti { &neg_ba } else { &ba }));
            pairs += 1;
        }
    }
    assert_eq!(pairs, 256);
}

#[test]
fn conjugation_through_every_gate() {
    let n = 2;
    for g in gates(n) {
        let u = gate_matrix(n, &g);
        for phase in 0..4u8 {
            for p in all_paulis(n) {
                let p = p.with_phase(phase);
                let got = p.conjugate(&g).unwrap();
                let want = matmul(&matmul(&u, &dense(&p)), &dagger(&u));
                assert!(close(&dense(&got), &want), "{g:?} on {p}");
            }
        }
    }
}

#[test]
fn letters_only_conjugation_agrees_up_to_phase() {
    let n = 3;
    for p in all_paulis(n) {
        for c in 0..n {
            for t in 0..n {
                if c == t {
                    continue;
                }
                for target in Pauli::NON_IDENTITY {
                    let mut exact = p;
                    exact.conjugate_controlled(c, t, target);
                    let mut letters = p;
                    letters.conjugate_controlled_letters(c, t, target);
                    assert!(exact.eq_up_to_phase(&letters));
                }
            }
        }
    }
}

fn arb_pauli(n: usize) -> impl Strategy<Value = PauliString> {
    (0u64..(1 << n), 0u64..(1 << n), 0u8..4).prop_map(move |(x, z, k)| PauliString::from_bits(n, x, z, k))
}

fn arb_gate(n: usize) -> impl Strategy<Value = CliffordGate> {
    let all = gates(n);
    (0..all.len()).prop_map(move |i| all[i])
}

proptest! {
    #[test]
    fn circuits_conjugate_like_matrices(p in arb_pauli(3), seq in prop::collection::vec(arb_gate(3), 1..8)) {
        let mut u = eye(8);
        let mut q = p;
        for g in &seq {
            u = matmul(&gate_matrix(3, g), &u);
            q = q.conjugate(g).unwrap();
        }
        let want = matmul(&matmul(&u, &dense(&p)), &dagger(&u));
        prop_assert!(close(&dense(&q), &want));
    }

    #[test]
    fn product_is_associative(a in arb_pauli(5), b in arb_pauli(5), c in arb_pauli(5)) {
        let l = a.mul(&b).unwrap().mul(&c).unwrap();
        let r = a.mul(&b.mul(&c).unwrap()).unwrap();
        prop_assert_eq!(l, r);
    }

    #[test]
    fn conjugation_preserves_commutation(a in arb_pauli(4), b in arb_pauli(4), g in arb_gate(4)) {
        let before = a.commutes(&b).unwrap();
        let after = a.conjugate(&g).unwrap().commutes(&b.conjugate(&g).unwrap()).unwrap();
        prop_assert_eq!(before, after);
    }

    #[test]
    fn inverse_gate_undoes_conjugation(a in arb_pauli(4), g in arb_gate(4)) {
        let back = a.conjugate(&g).unwrap().conjugate(&g.inverse()).unwrap();
        prop_assert_eq!(back, a);
    }

    #[test]
    fn sparse_text_round_trips(a in arb_pauli(9)) {
        let s = a.unsigned();
        let text = s.to_sparse_string();
        prop_assert_eq!(PauliString::parse_sparse(9, &text).unwrap(), s);
    }
}
