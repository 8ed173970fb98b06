//! Helpers shared by the integration test targets.

#![allow(dead_code)]

use bare713::circuits::Method;
use bare713::codes::{bare_713, five_qubit_513, steane_713, StabilizerCode};
use bare713::engine::frame_matches_tableau;
use bare713::noise::{sample_from_subset, FaultConfiguration, NoiseKind};
use bare713::runner::Experiment;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Every supported (code, method) pair.
pub fn plans() -> Vec<(StabilizerCode, Method)> {
    vec![
        (bare_713(), Method::Bare),
        (bare_713(), Method::Flag),
        (steane_713(), Method::Shor),
        (five_qubit_513(), Method::Shor),
    ]
}

/// Tableau/frame agreement counts: `(checked, mismatched)`.
///
/// Covers every order-1 fault of every plan under both models, then
/// `n_random` configurations of order 1 to 4 drawn across plans and models.
pub fn engine_agreement(n_random: usize, seed: u64) -> (usize, usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut checked, mut bad) = (0, 0);
    let mut spaces = Vec::new();
    for (code, method) in plans() {
        let exp = Experiment::new(&code, method).unwrap();
        for kind in [NoiseKind::Standard, NoiseKind::Anisotropic] {
            let space = exp.fault_space(kind);
            for f in space.order_one() {
                let cfg = FaultConfiguration::new(vec![f]).unwrap();
                checked += 1;
                bad += !frame_matches_tableau(&code, &exp.plan.noisy, &cfg, &mut rng) as usize;
            }
            spaces.push((code.clone(), exp.plan.noisy.clone(), space));
        }
    }
    for _ in 0..n_random {
        let (code, circuit, space) = &spaces[rng.random_range(0..spaces.len())];
        let order = rng.random_range(1..=4);
        let s = rng.random_range(0..=order);
        let cfg = sample_from_subset(space, s, order - s, &mut rng).unwrap();
        checked += 1;
        bad += !frame_matches_tableau(code, circuit, &cfg, &mut rng) as usize;
    }
    (checked, bad)
}
