use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use tod_jumps::detector::{detect_jumps, jump_sizes, DetectorConfig, JumpReport, SizeMode};
use tod_jumps::grid::ReturnGrid;
use tod_jumps::simulator::{simulate_path, SimConfig};

fn grid_strategy() -> impl Strategy<Value = ReturnGrid> {
    (2usize..9, 2usize..25, any::<u64>()).prop_map(|(m, days, seed)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let r: Vec<f64> = (0..m * days)
            .map(|k| {
                let z: f64 = StandardNormal.sample(&mut rng);
                let spike = if k % 37 == 11 { 9.0 } else { 1.0 };
                0.002 * z * spike
            })
            .collect();
        ReturnGrid::new(r, m, 1.0 / (252.0 * m as f64)).unwrap()
    })
}

/// Round-1 flags recomputed with explicit loops from the definitions.
fn round_one_oracle(grid: &ReturnGrid, cfg: &DetectorConfig) -> Vec<usize> {
    let (m, days, delta) = (grid.m(), grid.days(), grid.delta());
    let r = grid.returns();
    let mut bpv = 0.0;
    for s in 0..days {
        for i in 1..m {
            bpv += r[s * m + i].abs() * r[s * m + i - 1].abs();
        }
    }
    let bar_alpha = 3.0 * (std::f64::consts::FRAC_PI_2).sqrt() * (bpv / days as f64).sqrt();
    let level = bar_alpha * (1.0 / m as f64).powf(cfg.truncation_exponent);

    let mut kept = vec![0usize; m];
    let mut col = vec![0.0; m];
    let mut total_kept = 0usize;
    let mut rv = 0.0;
    for s in 0..days {
        for i in 0..m {
            let x = r[s * m + i];
            rv += x * x;
            if x.abs() <= level {
                kept[i] += 1;
                col[i] += x * x;
                total_kept += 1;
            }
        }
    }
    let tod: Vec<f64> = (0..m)
        .map(|i| {
            if kept[i] == 0 {
                cfg.tod_cap
            } else {
                (total_kept as f64 / kept[i] as f64 * col[i] / rv).min(cfg.tod_cap)
            }
        })
        .collect();

    let mc = (2.0 * delta * (1.0 / delta).ln()).sqrt();
    let raw = cfg.raw_multiplier * bar_alpha * mc;
    let mut flagged = Vec::new();
    for s in 0..days {
        let mut acc = 0.0;
        for i in 0..m {
            let x = r[s * m + i];
            if x.abs() <= raw {
                acc += x * x;
            }
        }
        let sigmaq = acc / (m as f64 * delta);
        for i in 0..m {
            let thr = cfg.round_multiplier * tod[i] * sigmaq.sqrt() * mc;
            if r[s * m + i].abs() > thr {
                flagged.push(s * m + i);
            }
        }
    }
    flagged
}

fn assert_bookkeeping(report: &JumpReport) {
    let mut union: Vec<usize> = report
        .rounds
        .iter()
        .flat_map(|r| r.new_indices.clone())
        .collect();
    let total: usize = report.round_counts().iter().sum();
    union.sort_unstable();
    let before = union.len();
    union.dedup();
    assert_eq!(before, union.len(), "rounds overlap");
    assert_eq!(union, report.jump_indices);
    assert_eq!(total, report.total());
    assert!(report.rounds.len() <= 20);
    if report.converged {
        assert!(report.rounds.last().unwrap().new_indices.is_empty());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn round_one_matches_oracle(grid in grid_strategy()) {
        let cfg = DetectorConfig::default();
        let report = detect_jumps(&grid, &cfg).unwrap();
        prop_assert_eq!(&report.rounds[0].new_indices, &round_one_oracle(&grid, &cfg));
    }

    #[test]
    fn rounds_disjoint_and_complete(grid in grid_strategy(), max_rounds in 1usize..5) {
        let cfg = DetectorConfig { max_rounds, ..DetectorConfig::default() };
        assert_bookkeeping(&detect_jumps(&grid, &cfg).unwrap());
    }

    #[test]
    fn scale_invariant(grid in grid_strategy(), c in prop::sample::select(vec![0.1, 0.5, 3.0, 10.0])) {
        let cfg = DetectorConfig::default();
        let a = detect_jumps(&grid, &cfg).unwrap();
        let b = detect_jumps(&grid.scaled(c).unwrap(), &cfg).unwrap();
        prop_assert_eq!(a.jump_indices, b.jump_indices);
    }

    #[test]
    fn larger_round_multiplier_flags_subset(grid in grid_strategy(), k in 1.0f64..4.0, extra in 0.0f64..3.0) {
        let lo = DetectorConfig { round_multiplier: k, max_rounds: 1, ..DetectorConfig::default() };
        let hi = DetectorConfig { round_multiplier: k + extra, ..lo.clone() };
        let a = detect_jumps(&grid, &lo).unwrap();
        let b = detect_jumps(&grid, &hi).unwrap();
        prop_assert!(b.jump_indices.iter().all(|j| a.jump_indices.contains(j)));
    }

    #[test]
    fn deterministic_sizes_consistent(grid in grid_strategy()) {
        let report = detect_jumps(&grid, &DetectorConfig::default()).unwrap();
        for (k, &j) in report.jump_indices.iter().enumerate() {
            let s2 = report.sigmaq_final[j / grid.m()];
            let want = grid.returns()[j] - (s2 * grid.delta()).sqrt();
            let got = report.sizes_deterministic[k];
            prop_assert!((got - want).abs() <= 1e-12 * want.abs().max(1e-300), "{} vs {}", got, want);
        }
    }
}

#[test]
fn constant_volatility_sample_has_no_jumps() {
    let path = simulate_path(&SimConfig::constant_volatility(0.2, 77, 252, 2024)).unwrap();
    assert_eq!(path.grid.len(), 19404);
    let report = detect_jumps(&path.grid, &DetectorConfig::default()).unwrap();
    assert_eq!(report.total(), 0, "{:?}", report.jump_indices);
    assert!(report.converged);
    // round-1 cutoff in increment standard deviations
    let sd = (0.04 * path.grid.delta()).sqrt();
    let ratio = 2.0 * report.modulus_mc / path.grid.delta().sqrt();
    assert!((ratio - 8.887400).abs() < 1e-6, "{ratio}");
    let thr = report.rounds[0].thresholds[0];
    assert!((thr / sd - ratio).abs() < 1.5, "{}", thr / sd);
}

#[test]
fn injected_large_jumps_are_found() {
    let path = simulate_path(&SimConfig::constant_volatility(0.2, 77, 120, 77)).unwrap();
    let clean = detect_jumps(&path.grid, &DetectorConfig::default()).unwrap();
    let thr1 = &clean.rounds[0].thresholds;
    let targets = [5usize, 800, 2_310, 4_444, 6_000, 7_700, 9_239];
    let mut r = path.grid.returns().to_vec();
    for (k, &j) in targets.iter().enumerate() {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        r[j] += sign * 3.5 * thr1[j];
    }
    let grid = ReturnGrid::new(r, 77, path.grid.delta()).unwrap();
    let report = detect_jumps(&grid, &DetectorConfig::default()).unwrap();
    for j in targets {
        assert!(report.jump_indices.contains(&j), "missed {j}");
    }
    assert_bookkeeping(&report);
}

#[test]
fn randomized_sizes_reproducible() {
    let path = simulate_path(&SimConfig {
        days: 80,
        seed: 3,
        ..SimConfig::default()
    })
    .unwrap();
    let cfg = DetectorConfig {
        size_seed: Some(17),
        ..DetectorConfig::default()
    };
    let a = detect_jumps(&path.grid, &cfg).unwrap();
    let b = detect_jumps(&path.grid, &cfg).unwrap();
    assert!(a.total() > 0);
    assert_eq!(a.sizes_randomized, b.sizes_randomized);
    let other = detect_jumps(
        &path.grid,
        &DetectorConfig {
            size_seed: Some(18),
            ..cfg
        },
    )
    .unwrap();
    assert_ne!(a.sizes_randomized, other.sizes_randomized);
}

#[test]
fn zero_variance_sizes_equal_returns() {
    let grid = ReturnGrid::new(vec![0.01, -0.02, 0.03, 0.0], 2, 0.01).unwrap();
    let idx = [0, 1, 2];
    for mode in [SizeMode::Deterministic, SizeMode::Randomized] {
        let s = jump_sizes(&grid, &[0.0; 4], &idx, mode, 5).unwrap();
        assert_eq!(s, vec![0.01, -0.02, 0.03]);
    }
    assert!(jump_sizes(&grid, &[0.0; 4], &[4], SizeMode::Deterministic, 0).is_err());
}
