mod common;

use mara_core::channel::{AntennaState, ChannelModel};
use mara_core::optim::{
    alternating_optimize, brute_force_positions, digital_precoder, objective, optimize_patterns,
    optimize_positions, rank_one_pattern, solve_schemes, BruteForceOptions, OptimOptions, PrecoderMethod,
};
use mara_core::scenario::{generate_scenario, PathSet, PropagationPath, Scenario, Scheme};
use mara_core::se::PrecoderSet;
use mara_core::{Error, C64};

use common::*;

fn mrt(model: &ChannelModel<'_>, state: &AntennaState) -> PrecoderSet {
    let cfg = &model.scenario().config;
    let h = model.evaluate(state, Scheme::Mara);
    digital_precoder(&h, cfg.total_power_w, cfg.noise_power_w, PrecoderMethod::MatchedFilter).unwrap()
}

/// Single antenna, single UE, two paths leaving at ±β from broadside in
/// the x–z plane, so the SE depends on x only through
/// `Re(c₁ c̄₂ e^{-j2κx sinβ})`. The second gain's phase is chosen to put the
/// unique maximum at `x = peak`.
fn coplanar_scenario(beta: f64, magnitudes: [f64; 2], phase: f64, peak: f64, seed: u64) -> Scenario {
    let cfg = small_config(1, 1, 1, 2, seed);
    let mut sc = generate_scenario(&cfg).unwrap();
    let kappa = 2.0 * std::f64::consts::PI / sc.wavelength();
    let gains = [
        C64::from_polar(magnitudes[0], phase),
        C64::from_polar(magnitudes[1], phase - 2.0 * kappa * beta.sin() * peak),
    ];
    let paths = [1.0, -1.0]
        .iter()
        .zip(gains)
        .map(|(&s, gain)| PropagationPath {
            gain,
            tx_wave: [s * beta.sin(), 0.0, beta.cos()],
            rx_wave: [0.0, 0.0, 1.0],
            delay: 0.0,
        })
        .collect();
    sc.path_sets = vec![PathSet::new(paths)];
    sc
}

#[test]
fn coplanar_two_path_matches_line_search() {
    // (β, |c₁|, |c₂|, phase of c₁, peak in grid steps of d/1000)
    let cases = [
        (0.3, 1.0, 0.6, 0.4, 200),
        (0.9, 0.3, 0.3, -2.0, -350),
        (1.4, 0.7, 0.8, 1.1, 37),
    ];
    for (i, (beta, a, b, phase, peak_steps)) in cases.into_iter().enumerate() {
        let cfg = small_config(1, 1, 1, 2, 0);
        let step = cfg.antenna_spacing_m() / 1000.0;
        let sc = coplanar_scenario(beta, [a, b], phase, peak_steps as f64 * step, 10 + i as u64);
        let model = ChannelModel::new(&sc);
        let start = AntennaState::initial(&sc);
        let w = mrt(&model, &start);

        // Test-side scan along x.
        let steps = (sc.config.movement_radius() / step).floor() as i64;
        let (scan, arg) = (-steps..=steps)
            .map(|n| {
                let mut s = start.clone();
                s.positions[0][0] += n as f64 * step;
                (direct_objective(&sc, model.basis(), &s, &w), n)
            })
            .fold((f64::NEG_INFINITY, 0), |best, x| if x.0 > best.0 { x } else { best });
        assert_eq!(arg, peak_steps);

        let mut grid = BruteForceOptions::new(step);
        grid.axes = [true, false, false];
        let bf = brute_force_positions(&model, &start, &w, &grid).unwrap();
        assert!((bf.positions[0][0] - peak_steps as f64 * step).abs() < 1e-12);
        assert!((objective(&model, &bf, &w) - scan).abs() <= 1e-12 * scan);

        let found = optimize_positions(&model, Scheme::Sma, &start, &w, &OptimOptions::default()).unwrap();
        let se = objective(&model, &found, &w);
        assert!((se - scan).abs() <= 1e-6 * scan, "case {i}: optimizer {se} vs grid {scan}");
    }
}

#[test]
fn single_path_position_is_irrelevant() {
    for seed in 0..5 {
        let cfg = small_config(1, 1, 3, 1, seed);
        let sc = generate_scenario(&cfg).unwrap();
        let model = ChannelModel::new(&sc);
        let start = AntennaState::initial(&sc);
        let w = mrt(&model, &start);
        let before = objective(&model, &start, &w);
        let found = optimize_positions(&model, Scheme::Sma, &start, &w, &OptimOptions::default()).unwrap();
        assert!((objective(&model, &found, &w) - before).abs() <= 1e-12 * before);
        // Every point is stationary, so the start is kept.
        for c in 0..3 {
            assert!((found.positions[0][c] - start.positions[0][c]).abs() <= 1e-9);
        }
    }
}

#[test]
fn rank_one_patterns_match_eigenvector() {
    let opts = OptimOptions::default();
    for seed in 0..5 {
        let cfg = small_config(1, 1, 1, 4, 100 + seed);
        let sc = generate_scenario(&cfg).unwrap();
        let model = ChannelModel::new(&sc);
        let start = AntennaState::initial(&sc);
        let w = mrt(&model, &start);
        let q = model.ecsi(0, 0, &start.positions[0]);
        let alpha = rank_one_pattern(&q.0);
        let norm: f64 = alpha.iter().map(|a| a * a).sum();
        assert!((norm - 1.0).abs() < 1e-12);

        let mut closed = start.clone();
        closed.patterns[0] = alpha.clone().into();
        let best = objective(&model, &closed, &w);
        let found = optimize_patterns(&model, Scheme::Era, &start, &w, &opts).unwrap();
        let se = objective(&model, &found, &w);
        assert!((best - se).abs() <= 1e-6 * best, "{se} vs {best}");
        // Aligned up to sign.
        let overlap: f64 = found.patterns[0].iter().zip(&alpha).map(|(a, b)| a * b).sum();
        assert!(overlap.abs() > 1.0 - 1e-4, "overlap {overlap}");
    }
}

#[test]
fn block_steps_respect_constraints_and_never_decrease() {
    let opts = OptimOptions::default();
    for seed in 0..4 {
        let cfg = small_config(3, 2, 3, 4, 200 + seed);
        let sc = generate_scenario(&cfg).unwrap();
        let model = ChannelModel::new(&sc);
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(seed);
        let start = random_state(&sc, &mut rng);
        let w = mrt(&model, &start);
        let before = objective(&model, &start, &w);

        let moved = optimize_positions(&model, Scheme::Mara, &start, &w, &opts).unwrap();
        moved.check(&sc, Scheme::Mara).unwrap();
        assert_eq!(moved.patterns, start.patterns);
        let after_p = objective(&model, &moved, &w);
        assert!(after_p >= before);

        let shaped = optimize_patterns(&model, Scheme::Mara, &moved, &w, &opts).unwrap();
        shaped.check(&sc, Scheme::Mara).unwrap();
        assert_eq!(shaped.positions, moved.positions);
        assert!(objective(&model, &shaped, &w) >= after_p);
    }
}

#[test]
fn pinned_blocks_are_rejected() {
    let cfg = small_config(2, 1, 1, 2, 1);
    let sc = generate_scenario(&cfg).unwrap();
    let model = ChannelModel::new(&sc);
    let start = AntennaState::initial(&sc);
    let w = mrt(&model, &start);
    let opts = OptimOptions::default();
    assert!(matches!(
        optimize_positions(&model, Scheme::Era, &start, &w, &opts),
        Err(Error::Contract(_))
    ));
    assert!(matches!(
        optimize_patterns(&model, Scheme::Sma, &start, &w, &opts),
        Err(Error::Contract(_))
    ));
}

#[test]
fn schemes_nest_and_traces_rise() {
    let opts = OptimOptions {
        max_outer_iters: 10,
        ..OptimOptions::default()
    };
    for seed in 0..4 {
        let cfg = small_config(3, 2, 4, 4, 300 + seed);
        let sc = generate_scenario(&cfg).unwrap();
        let model = ChannelModel::new(&sc);
        let results = solve_schemes(&model, &Scheme::ALL, &opts).unwrap();
        let se: Vec<f64> = results.iter().map(|r| r.final_se()).collect();
        let (tfa, sma, era, mara) = (se[0], se[1], se[2], se[3]);
        assert!(sma >= tfa - 1e-9 && era >= tfa - 1e-9);
        assert!(mara >= sma - 1e-9 && mara >= era - 1e-9);
        for r in &results {
            assert!(r.se_trace.windows(2).all(|w| w[1] >= w[0] - 1e-9), "{:?}", r.se_trace);
            r.state.check(&sc, r.scheme).unwrap();
            assert!((r.precoders.total_power() - cfg.total_power_w).abs() < 1e-9 * cfg.total_power_w);
        }
        assert_eq!(results[0].state, AntennaState::initial(&sc));
        assert_eq!(results[0].se_trace.len(), 1);
    }
}

#[test]
fn solving_is_deterministic() {
    let cfg = small_config(2, 2, 2, 3, 7);
    let sc = generate_scenario(&cfg).unwrap();
    let model = ChannelModel::new(&sc);
    let opts = OptimOptions::default();
    let a = alternating_optimize(&model, Scheme::Mara, &opts).unwrap();
    let b = alternating_optimize(&model, Scheme::Mara, &opts).unwrap();
    assert_eq!(a.se_trace, b.se_trace);
    assert_eq!(a.state, b.state);
}

#[test]
fn rederived_brute_force_never_loses_to_the_start() {
    let cfg = small_config(2, 2, 2, 3, 9);
    let sc = generate_scenario(&cfg).unwrap();
    let model = ChannelModel::new(&sc);
    let start = AntennaState::initial(&sc);
    let mut grid = BruteForceOptions::new(cfg.antenna_spacing_m() / 8.0);
    grid.rederive = Some(PrecoderMethod::ZeroForcing);
    let w = mrt(&model, &start);
    let best = brute_force_positions(&model, &start, &w, &grid).unwrap();
    best.check(&sc, Scheme::Sma).unwrap();
    let zf_se = |s: &AntennaState| {
        let h = model.evaluate(s, Scheme::Mara);
        let w = digital_precoder(&h, cfg.total_power_w, cfg.noise_power_w, PrecoderMethod::ZeroForcing).unwrap();
        mara_core::se::sum_se(&h, &w, cfg.noise_power_w).unwrap().sum
    };
    assert!(zf_se(&best) >= zf_se(&start));
}
