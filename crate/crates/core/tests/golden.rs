//! Exact syndromes and propagated errors of the Bare [[7,1,3]] circuits.

use bare713::circuits::{build_bare_round, build_flag_round, Circuit, Method, Operation};
use bare713::codes::{bare_713, CosetClass, Syndrome};
use bare713::decoder::single_qubit_listing;
use bare713::engine::run_frame;
use bare713::noise::{FaultConfiguration, FaultSpace, InjectedFault, NoiseKind};
use bare713::pauli::{Pauli, PauliString};
use bare713::runner::Experiment;

const SINGLE_QUBIT_SYNDROMES: &str = "\
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

fn p7(s: &str) -> PauliString {
    PauliString::parse_sparse(7, s).unwrap()
}

/// Location id of coupling `gate` of stabilizer `stab`.
fn coupling(c: &Circuit, stab: usize, gate: char) -> usize {
    c.locations()
        .iter()
        .find(|l| l.tags.stabilizer == Some(stab) && l.tags.gate == Some(gate))
        .unwrap()
        .id
}

/// Two-qubit fault after a coupling, written as (data letter, ancilla letter).
fn pair_fault(c: &Circuit, location: usize, data: Pauli, ancilla: Pauli) -> FaultConfiguration {
    let space = FaultSpace::new(c, NoiseKind::Standard);
    let Operation::ControlledPauli { control, target, .. } = c.locations()[location].op else {
        panic!("not a coupling")
    };
    let site = space.sites().iter().position(|s| s.location == location).unwrap();
    let option = space.sites()[site]
        .options
        .iter()
        .position(|o| match o {
            bare713::noise::FaultEffect::Pauli(p) => p.get(control) == ancilla && p.get(target) == data,
            _ => false,
        })
        .unwrap();
    FaultConfiguration::new(vec![space.fault(site, option).unwrap()]).unwrap()
}

fn ancilla_x_after(c: &Circuit, location: usize) -> FaultConfiguration {
    pair_fault(c, location, Pauli::I, Pauli::X)
}

#[test]
fn single_qubit_syndrome_table() {
    let t = std::time::Instant::now();
    let code = bare_713();
    // the listing iterates Z, X, Y per qubit, matching the table layout
    assert_eq!(single_qubit_listing(&code), SINGLE_QUBIT_SYNDROMES);
    assert!(t.elapsed().as_secs_f64() < 1.0);
}

#[test]
fn weight_four_hook_is_z2_z3() {
    let code = bare_713();
    let c = build_bare_round(&code).unwrap();
    let run = run_frame(&c, &ancilla_x_after(&c, coupling(&c, 4, 'b')));
    assert_eq!(run.residual.unsigned(), p7("Y5 Y6"));
    assert!(code.equivalent(&run.residual, &p7("Z2 Z3")).unwrap());
    assert_eq!(code.syndrome_of(&run.residual).unwrap().to_string(), "001101");
}

#[test]
fn weight_six_hooks() {
    let code = bare_713();
    let c = build_bare_round(&code).unwrap();
    // (gate after which the ancilla flips, documented representative, syndrome)
    for (gate, rep, syn) in [('b', "Z0 Z2", "101000"), ('c', "Z0 Z2 X3", "101010"), ('d', "Z4 Z5", "111010")] {
        let run = run_frame(&c, &ancilla_x_after(&c, coupling(&c, 5, gate)));
        assert!(code.equivalent(&run.residual, &p7(rep)).unwrap(), "gate {gate}: {}", run.residual);
        assert_eq!(code.syndrome_of(&run.residual).unwrap().to_string(), syn);
    }
    let last = run_frame(&c, &ancilla_x_after(&c, coupling(&c, 5, 'd')));
    assert_eq!(last.residual.unsigned(), p7("Z4 Z5"));
}

#[test]
fn hook_syndromes_are_unique() {
    let code = bare_713();
    let singles: Vec<String> = SINGLE_QUBIT_SYNDROMES.lines().map(|l| l[6..].to_string()).collect();
    for e in ["Z2 Z3", "Z0 Z2", "Z0 Z2 X3", "Z4 Z5"] {
        let s = code.syndrome_of(&p7(e)).unwrap().to_string();
        assert!(!singles.contains(&s), "{e} -> {s}");
    }
}

#[test]
fn xx_on_weight_six_gives_logical_x() {
    let code = bare_713();
    let c = build_bare_round(&code).unwrap();
    let f = pair_fault(&c, coupling(&c, 5, 'b'), Pauli::X, Pauli::X);
    let run = run_frame(&c, &f);
    assert_eq!(run.residual.unsigned(), p7("Z1 X2 X3 Z4 Z5"));
    assert_eq!(code.syndrome_of(&run.residual).unwrap(), Syndrome::parse("101011").unwrap());

    let exp = Experiment::new(&code, Method::Bare).unwrap();
    let correction = exp.decoder.decode(&Syndrome::parse("101011").unwrap(), 0);
    assert_eq!(correction.unsigned(), p7("Y1 Z4 Z5"));
    let after = run.residual.mul(&correction).unwrap();
    assert_eq!(after.unsigned(), p7("X1 X2 X3"));
    assert_eq!(code.classify_coset(&after).unwrap(), CosetClass::LogicalX);

    // the same fault inside the full protocol, first noisy round
    let full = exp.fault_space(NoiseKind::Standard);
    let loc = coupling(&exp.plan.noisy, 5, 'b');
    let site = full.sites().iter().position(|s| s.location == loc).unwrap();
    let opt = full.sites()[site].options.iter().position(|o| *o == f.faults()[0].effect).unwrap();
    let shot = exp.run_shot(&FaultConfiguration::new(vec![full.fault(site, opt).unwrap()]).unwrap());
    assert_eq!(shot.coset, CosetClass::LogicalX);
}

#[test]
fn xx_on_control_y_gives_logical_z() {
    let code = bare_713();
    let c = build_bare_round(&code).unwrap();
    let f = pair_fault(&c, coupling(&c, 4, 'c'), Pauli::X, Pauli::X);
    let run = run_frame(&c, &f);
    assert_eq!(run.residual.unsigned(), p7("X5 Y6"));
    assert_eq!(code.syndrome_of(&run.residual).unwrap().to_string(), "000111");
    let exp = Experiment::new(&code, Method::Bare).unwrap();
    let correction = exp.decoder.decode(&Syndrome::parse("000111").unwrap(), 0);
    assert_eq!(correction.unsigned(), p7("Y3"));
    let after = run.residual.mul(&correction).unwrap();
    assert_eq!(code.classify_coset(&after).unwrap(), CosetClass::LogicalZ);
}

/// (gate, fault as (data, ancilla), data error, syndrome)
const FLAG_WEIGHT_FOUR: &[(char, &str, &str, &str)] = &[
    ('b', "IX", "Y5 Y6", "001101"),
    ('b', "XX", "X3 Y5 Y6", "001111"),
    ('b', "YX", "Y3 Y5 Y6", "001010"),
    ('b', "ZX", "Z3 Y5 Y6", "001000"),
    ('c', "IX", "Y6", "000100"),
    ('c', "XX", "X5 Y6", "000111"),
    ('c', "YX", "Y5 Y6", "001101"),
    ('c', "ZX", "Z5 Y6", "001110"),
];

const FLAG_WEIGHT_SIX: &[(char, &str, &str, &str)] = &[
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

fn check_flag_rows(stab: usize, rows: &[(char, &str, &str, &str)]) {
    let code = bare_713();
    let c = build_flag_round(&code).unwrap();
    let exp = Experiment::new(&code, Method::Flag).unwrap();
    for &(gate, fault, data, syn) in rows {
        let letters: Vec<Pauli> = fault.chars().map(|ch| Pauli::from_letter(ch).unwrap()).collect();
        let run = run_frame(&c, &pair_fault(&c, coupling(&c, stab, gate), letters[0], letters[1]));
        assert_eq!(run.residual.unsigned(), p7(data), "{gate} {fault}");
        assert_eq!(code.syndrome_of(&run.residual).unwrap().to_string(), syn, "{gate} {fault}");
        assert_eq!(run.rounds[0].flags, 1 << stab, "{gate} {fault} must raise the flag");
        // the flag table corrects it
        let corr = exp.decoder.decode(&Syndrome::parse(syn).unwrap(), 1 << stab);
        let after = run.residual.mul(&corr).unwrap();
        assert_eq!(code.classify_coset(&after).unwrap(), CosetClass::InStabilizer, "{gate} {fault}");
    }
}

#[test]
fn flagged_weight_four_rows() {
    check_flag_rows(4, FLAG_WEIGHT_FOUR);
}

#[test]
fn flagged_weight_six_rows() {
    check_flag_rows(5, FLAG_WEIGHT_SIX);
}

#[test]
fn flag_tables_have_distinct_syndromes() {
    let code = bare_713();
    let exp = Experiment::new(&code, Method::Flag).unwrap();
    let tables = exp.decoder.flag_tables();
    assert_eq!(tables.len(), 2);
    for t in tables {
        let mut seen = std::collections::HashMap::new();
        for (_, e, s) in &t.rows {
            if let Some(prev) = seen.insert(*s, *e) {
                assert!(code.equivalent(&prev, e).unwrap());
            }
        }
    }
    let w4 = &tables[0];
    assert_eq!(w4.stabilizer, 4);
    for (data, syn) in [
        ("Y5 Y6", "001101"),
        ("X3 Y5 Y6", "001111"),
        ("Y3 Y5 Y6", "001010"),
        ("Z3 Y5 Y6", "001000"),
        ("Y6", "000100"),
        ("X5 Y6", "000111"),
        ("Z5 Y6", "001110"),
    ] {
        let e = w4.table.get(&Syndrome::parse(syn).unwrap()).unwrap();
        assert!(code.equivalent(&e.correction, &p7(data)).unwrap());
    }
}

#[test]
fn flag_faults_do_not_touch_data() {
    let code = bare_713();
    let c = build_flag_round(&code).unwrap();
    let space = FaultSpace::new(&c, NoiseKind::Standard);
    let flags: Vec<usize> = (0..c.registers().n_flag).map(|i| c.registers().flag(i)).collect();
    for f in space.order_one() {
        let InjectedFault { effect: bare713::noise::FaultEffect::Pauli(p), .. } = f else { continue };
        if p.iter_support().all(|(q, _)| flags.contains(&q)) {
            let run = run_frame(&c, &FaultConfiguration::new(vec![f]).unwrap());
            assert!(run.residual.is_identity());
        }
    }
}
