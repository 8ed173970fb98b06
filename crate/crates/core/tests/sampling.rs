//! Subset weights, sampler distributions and the subset cache.

use std::collections::BTreeMap;

use bare713::circuits::{Circuit, Method, Operation, Registers, Tags};
use bare713::codes::{bare_713, five_qubit_513};
use bare713::noise::{
    for_each_configuration, sample_from_subset, sample_traditional, subset_configuration_count, FaultSpace, NoiseKind,
    NoiseModel,
};
use bare713::pauli::Pauli;
use bare713::runner::{
    combine_subsets, enumerate_subsets, subset_weight, Experiment, Metric, RateOverrides, Sampler, SamplerConfig,
    SubsetCache,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Two data qubits read out through one ancilla.
fn tiny_circuit() -> Circuit {
    let mut c = Circuit::new(Registers { n_data: 2, n_ancilla: 1, n_flag: 0 }, 1);
    let tags = Tags { stabilizer: Some(0), ..Tags::default() };
    c.push(Operation::PrepZero(2), tags);
    c.push(Operation::ControlledPauli { pauli: Pauli::X, control: 0, target: 2 }, tags);
    c.push(Operation::ControlledPauli { pauli: Pauli::X, control: 1, target: 2 }, tags);
    c.push(Operation::MeasureZ(2), tags);
    c
}

#[test]
fn subset_weights_sum_to_one() {
    for (n_s, n_t, p) in [(144usize, 54usize, 1e-3), (180, 66, 5e-3), (60, 120, 0.3)] {
        let mut sum = 0.0;
        for s in 0..=n_s {
            for t in 0..=n_t {
                sum += subset_weight(s, t, n_s, n_t, p, p).unwrap();
            }
        }
        assert!((sum - 1.0).abs() < 1e-12, "({n_s}, {n_t}, {p}): {sum}");
    }
}

#[test]
fn subset_weight_matches_direct_product() {
    // small enough for the naive formula
    let (n_s, n_t, p_s, p_t) = (10usize, 7usize, 0.1f64, 0.2f64);
    let c = |n: u64, k: u64| (0..k).fold(1.0, |a, i| a * (n - i) as f64 / (i + 1) as f64);
    for s in 0..=n_s {
        for t in 0..=n_t {
            let direct = c(n_s as u64, s as u64) * p_s.powi(s as i32) * (1.0 - p_s).powi((n_s - s) as i32)
                * c(n_t as u64, t as u64) * p_t.powi(t as i32) * (1.0 - p_t).powi((n_t - t) as i32);
            let w = subset_weight(s, t, n_s, n_t, p_s, p_t).unwrap();
            assert!((w - direct).abs() <= 1e-14 + 1e-12 * direct);
        }
    }
}

#[test]
fn truncation_respects_tolerance() {
    let (list, excluded) = enumerate_subsets(144, 54, 5e-3, 5e-3, 1e-8).unwrap();
    assert!(excluded <= 1e-8);
    let kept: f64 = list.iter().map(|&(s, t)| subset_weight(s, t, 144, 54, 5e-3, 5e-3).unwrap()).sum();
    assert!((kept + excluded - 1.0).abs() < 1e-12);
    assert_eq!(list[0], (0, 0));
}

#[test]
fn configuration_count_matches_enumeration() {
    let code = bare_713();
    let exp = Experiment::new(&code, Method::Bare).unwrap();
    let c = bare713::circuits::build_bare_round(&code).unwrap();
    let space = FaultSpace::new(&c, NoiseKind::Standard);
    for (s, t) in [(1, 0), (0, 1), (2, 0), (1, 1)] {
        let mut n = 0usize;
        let mut total = 0.0;
        for_each_configuration(&space, s, t, |_, w| {
            n += 1;
            total += w;
        })
        .unwrap();
        assert_eq!(n as f64, subset_configuration_count(&space, s, t));
        assert!((total - 1.0).abs() < 1e-12);
    }
    assert!(subset_configuration_count(&exp.fault_space(NoiseKind::Standard), 2, 2) > 1e8);
}

#[test]
fn conditioned_traditional_matches_subset_sampler() {
    let c = tiny_circuit();
    let space = FaultSpace::new(&c, NoiseKind::Standard);
    let model = NoiseModel::uniform(NoiseKind::Standard, 0.2).unwrap();
    let (s, t) = (1, 1);
    let key = |cfg: &bare713::noise::FaultConfiguration| {
        cfg.faults().iter().map(|f| (f.site, f.option)).collect::<Vec<_>>()
    };

    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut traditional: BTreeMap<Vec<(usize, usize)>, f64> = BTreeMap::new();
    let mut kept = 0;
    while kept < 20_000 {
        let cfg = sample_traditional(&space, &model, &mut rng);
        if cfg.subset(&space) == (s, t) {
            *traditional.entry(key(&cfg)).or_default() += 1.0;
            kept += 1;
        }
    }
    let mut subset: BTreeMap<Vec<(usize, usize)>, f64> = BTreeMap::new();
    for _ in 0..20_000 {
        let cfg = sample_from_subset(&space, s, t, &mut rng).unwrap();
        *subset.entry(key(&cfg)).or_default() += 1.0;
    }

    // two-sample homogeneity test over all configurations of the subset
    let mut cats = Vec::new();
    for_each_configuration(&space, s, t, |cfg, _| cats.push(key(cfg))).unwrap();
    let (n1, n2) = (kept as f64, 20_000.0);
    let mut chi2 = 0.0;
    for k in &cats {
        let a = traditional.get(k).copied().unwrap_or(0.0);
        let b = subset.get(k).copied().unwrap_or(0.0);
        let tot = a + b;
        let ea = tot * n1 / (n1 + n2);
        let eb = tot * n2 / (n1 + n2);
        chi2 += (a - ea).powi(2) / ea + (b - eb).powi(2) / eb;
    }
    assert!(traditional.keys().chain(subset.keys()).all(|k| cats.contains(k)));
    let dof = (cats.len() - 1) as f64;
    let p_value = 1.0 - ChiSquared::new(dof).unwrap().cdf(chi2);
    assert!(p_value > 0.01, "chi2 {chi2} over {dof} dof, p = {p_value}");
}

#[test]
fn traditional_marginal_rates() {
    let c = tiny_circuit();
    let space = FaultSpace::new(&c, NoiseKind::Standard);
    let model = NoiseModel::new(NoiseKind::Standard, 0.05, 0.1, 0.05).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let n = 100_000;
    let mut hits = vec![0usize; space.sites().len()];
    for _ in 0..n {
        for f in sample_traditional(&space, &model, &mut rng).faults() {
            hits[f.site] += 1;
        }
    }
    for (i, site) in space.sites().iter().enumerate() {
        let p = model.rate(site);
        let sigma = (p * (1.0 - p) / n as f64).sqrt();
        let got = hits[i] as f64 / n as f64;
        assert!((got - p).abs() < 5.0 * sigma, "site {i}: {got} vs {p}");
    }
}

#[test]
fn zero_rate_gives_zero_curve() {
    let code = five_qubit_513();
    let exp = Experiment::new(&code, Method::Shor).unwrap();
    let cfg = SamplerConfig { shots: 100, ..SamplerConfig::default() };
    for sampler in [Sampler::Importance, Sampler::Traditional] {
        let curve = exp
            .estimate_logical_rate(NoiseKind::Standard, &[0.0], &RateOverrides::default(), sampler, Metric::State, &cfg, None)
            .unwrap();
        assert_eq!(curve[0].p_l, 0.0);
        assert_eq!(curve[0].stderr, 0.0);
    }
}

#[test]
fn importance_curve_is_deterministic_and_thread_independent() {
    let code = bare_713();
    let exp = Experiment::new(&code, Method::Bare).unwrap();
    let cfg = SamplerConfig { shots: 2_000, batch: 500, ..SamplerConfig::default() };
    let grid = [1e-3, 3e-3];
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(|| {
            exp.estimate_logical_rate(NoiseKind::Standard, &grid, &RateOverrides::default(), Sampler::Importance, Metric::State, &cfg, None)
                .unwrap()
        })
    };
    let a = run(1);
    assert_eq!(a, run(4));
    assert_eq!(a, run(4));
}

#[test]
fn importance_rejects_separate_measurement_rate() {
    let code = bare_713();
    let exp = Experiment::new(&code, Method::Bare).unwrap();
    let o = RateOverrides { p_meas: Some(1e-2), ..RateOverrides::default() };
    let r = exp.estimate_logical_rate(NoiseKind::Standard, &[1e-3], &o, Sampler::Importance, Metric::State, &SamplerConfig::default(), None);
    assert!(r.is_err());
}

#[test]
fn cache_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let code = bare_713();
    let exp = Experiment::new(&code, Method::Flag).unwrap();
    let cfg = SamplerConfig { shots: 500, batch: 250, ..SamplerConfig::default() };
    let first = {
        let mut cache = SubsetCache::open(dir.path()).unwrap();
        let est = exp.importance_subsets(NoiseKind::Standard, 2e-3, 2e-3, &cfg, Some(&mut cache)).unwrap();
        assert_eq!(cache.len(), est.len());
        est
    };
    // a torn trailing line must not poison the cache
    let path = dir.path().join("subsets.jsonl");
    let mut text = std::fs::read_to_string(&path).unwrap();
    text.push_str("{\"key\":\"trunc");
    std::fs::write(&path, text).unwrap();

    let mut cache = SubsetCache::open(dir.path()).unwrap();
    assert_eq!(cache.len(), first.len());
    let again = exp.importance_subsets(NoiseKind::Standard, 2e-3, 2e-3, &cfg, Some(&mut cache)).unwrap();
    assert_eq!(first, again);
    let (n_s, n_t) = exp.fault_space(NoiseKind::Standard).counts();
    let a = combine_subsets(&first, n_s, n_t, 1e-3, Metric::State);
    let b = combine_subsets(&again, n_s, n_t, 1e-3, Metric::State);
    assert_eq!(a, b);
}
