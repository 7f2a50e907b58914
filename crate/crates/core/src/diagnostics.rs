//! Self-checks and brute-force cross-checks run by the `check` and `oracle`
//! subcommands.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, UnitBall};

use crate::channel::{AntennaState, ChannelModel};
use crate::optim::{
    brute_force_positions, digital_precoder, objective, optimize_patterns, optimize_positions, rank_one_pattern,
    se_gradients, BruteForceOptions, OptimOptions, PrecoderMethod,
};
use crate::scenario::{generate_scenario, Scheme, SystemConfig};
use crate::se::PrecoderSet;
use crate::shod::{build_basis, departure_angles, pattern_gain, pattern_power, PatternCoefficients};
use crate::{Result, C64};

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteReport {
    pub name: &'static str,
    pub cases: usize,
    /// Largest observed error.
    pub worst: f64,
    pub tolerance: f64,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.worst < self.tolerance
    }
}

impl fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {:<22} worst {:.3e} (tolerance {:.0e}, {} cases)",
            if self.passed() { "PASS" } else { "FAIL" },
            self.name,
            self.worst,
            self.tolerance,
            self.cases
        )
    }
}

fn unit_vector(rng: &mut ChaCha8Rng, len: usize) -> PatternCoefficients {
    let v: Vec<f64> = (0..len).map(|_| StandardNormal.sample(rng)).collect();
    PatternCoefficients(v).normalized()
}

/// Random admissible MARA state: positions uniform in each ball, patterns
/// uniform on the sphere.
pub fn random_state(model: &ChannelModel<'_>, rng: &mut ChaCha8Rng) -> AntennaState {
    let sc = model.scenario();
    let radius = sc.config.movement_radius();
    let k = sc.config.num_basis();
    let mut state = AntennaState::initial(sc);
    for (p, c) in state.positions.iter_mut().zip(&sc.initial_positions) {
        let o: [f64; 3] = UnitBall.sample(rng);
        *p = [c[0] + radius * o[0], c[1] + radius * o[1], c[2] + radius * o[2]];
    }
    for a in &mut state.patterns {
        *a = unit_vector(rng, k);
    }
    state
}

/// Max `|G - I|` over basis degrees `0..=max_degree`.
pub fn check_orthonormality(max_degree: usize) -> SuiteReport {
    let mut worst: f64 = 0.0;
    for n in 0..=max_degree {
        let basis = build_basis(n);
        let gram = basis.gram();
        for i in 0..basis.len() {
            for j in 0..basis.len() {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((gram[(i, j)] - target).abs());
            }
        }
    }
    SuiteReport {
        name: "basis orthonormality",
        cases: max_degree + 1,
        worst,
        tolerance: 1e-8,
    }
}

/// Max `|∮ f² - ‖α‖²|` over random, unnormalized `α`.
pub fn check_parseval(max_degree: usize, instances: usize, seed: u64) -> Result<SuiteReport> {
    let basis = build_basis(max_degree);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..instances {
        let scale = rng.random_range(0.1..3.0);
        let alpha: Vec<f64> = unit_vector(&mut rng, basis.len()).iter().map(|a| a * scale).collect();
        let norm_sq: f64 = alpha.iter().map(|a| a * a).sum();
        worst = worst.max((pattern_power(&basis, &alpha)? - norm_sq).abs());
    }
    Ok(SuiteReport {
        name: "parseval",
        cases: instances,
        worst,
        tolerance: 1e-8,
    })
}

/// `qᴴα` against the multipath sum `Σ_i x_i f(θ_i, φ_i) b_i a_i`, one factor
/// at a time, with the pattern evaluated pointwise.
pub fn check_factorization(config: &SystemConfig, instances: usize, seed: u64) -> Result<SuiteReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    let per_scenario = 100;
    let mut done = 0;
    let mut round = 0;
    while done < instances {
        let mut cfg = config.clone();
        cfg.seed = seed.wrapping_add(round);
        round += 1;
        let sc = generate_scenario(&cfg)?;
        let model = ChannelModel::new(&sc);
        let lambda = sc.wavelength();
        let kappa = 2.0 * std::f64::consts::PI / lambda;
        for _ in 0..per_scenario.min(instances - done) {
            let state = random_state(&model, &mut rng);
            let u = rng.random_range(0..sc.num_ues());
            let m = rng.random_range(0..sc.num_antennas());
            let g = rng.random_range(0..sc.num_subcarriers());
            let factored = model.ecsi(u, g, &state.positions[m]).apply(&state.patterns[m])?;

            let f = sc.subcarrier_frequencies[g];
            let (p, q) = (state.positions[m], sc.ue_positions[u]);
            let mut direct = C64::new(0.0, 0.0);
            for path in &sc.path_sets[u].paths {
                let (theta, phi) = departure_angles(&path.tx_wave);
                let gain = pattern_gain(model.basis(), &state.patterns[m], theta, phi)?;
                let x = path.gain * C64::from_polar(1.0, -2.0 * std::f64::consts::PI * path.delay * f);
                let tx = C64::from_polar(1.0, -kappa * crate::dot3(&path.tx_wave, &p));
                let rx = C64::from_polar(1.0, -kappa * crate::dot3(&path.rx_wave, &q));
                direct += x * gain * tx * rx;
            }
            worst = worst.max((factored - direct).norm());
            done += 1;
        }
    }
    Ok(SuiteReport {
        name: "factorization",
        cases: instances,
        worst,
        tolerance: 1e-12,
    })
}

fn random_precoders(model: &ChannelModel<'_>, state: &AntennaState, rng: &mut ChaCha8Rng) -> PrecoderSet {
    let cfg = &model.scenario().config;
    let channel = model.evaluate(state, Scheme::Mara);
    let method = if rng.random_bool(0.5) {
        PrecoderMethod::ZeroForcing
    } else {
        PrecoderMethod::MatchedFilter
    };
    digital_precoder(&channel, cfg.total_power_w, cfg.noise_power_w, method)
        .or_else(|_| digital_precoder(&channel, cfg.total_power_w, cfg.noise_power_w, PrecoderMethod::MatchedFilter))
        .expect("matched filtering always succeeds")
}

fn relative_error(analytic: &[f64], numeric: &[f64]) -> f64 {
    let diff: f64 = analytic.iter().zip(numeric).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
    let scale: f64 = numeric.iter().map(|b| b * b).sum::<f64>().sqrt();
    diff / scale.max(1e-12)
}

/// Analytic gradients against central differences with `fd_step` (a
/// fraction of λ for positions, absolute for coefficients). Returns the
/// position and pattern suites.
pub fn check_gradients(
    config: &SystemConfig,
    instances: usize,
    seed: u64,
    fd_step: f64,
) -> Result<(SuiteReport, SuiteReport)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst_pos: f64 = 0.0;
    let mut worst_pat: f64 = 0.0;
    for i in 0..instances {
        let mut cfg = config.clone();
        cfg.seed = seed.wrapping_add(i as u64);
        let sc = generate_scenario(&cfg)?;
        let model = ChannelModel::new(&sc);
        let state = random_state(&model, &mut rng);
        let w = random_precoders(&model, &state, &mut rng);
        let grads = se_gradients(&model, &state, &w);
        let h = fd_step * sc.wavelength();
        for m in 0..sc.num_antennas() {
            let mut numeric = [0.0; 3];
            for (c, slot) in numeric.iter_mut().enumerate() {
                let mut plus = state.clone();
                plus.positions[m][c] += h;
                let mut minus = state.clone();
                minus.positions[m][c] -= h;
                *slot = (objective(&model, &plus, &w) - objective(&model, &minus, &w)) / (2.0 * h);
            }
            worst_pos = worst_pos.max(relative_error(&grads.positions[m], &numeric));

            let numeric: Vec<f64> = (0..cfg.num_basis())
                .map(|k| {
                    let mut plus = state.clone();
                    plus.patterns[m].0[k] += fd_step;
                    let mut minus = state.clone();
                    minus.patterns[m].0[k] -= fd_step;
                    (objective(&model, &plus, &w) - objective(&model, &minus, &w)) / (2.0 * fd_step)
                })
                .collect();
            worst_pat = worst_pat.max(relative_error(&grads.patterns[m], &numeric));
        }
    }
    let report = |name, worst| SuiteReport {
        name,
        cases: instances,
        worst,
        tolerance: 1e-5,
    };
    Ok((report("position gradient", worst_pos), report("pattern gradient", worst_pat)))
}

/// Single-antenna, single-UE, single-subcarrier variant of `config` with
/// `paths` propagation paths.
pub fn oracle_config(config: &SystemConfig, paths: usize, seed: u64) -> SystemConfig {
    SystemConfig {
        num_bs_antennas: 1,
        num_ues: 1,
        num_subcarriers: 1,
        num_paths_per_ue: paths,
        seed,
        ..config.clone()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport {
    pub name: &'static str,
    pub cases: usize,
    /// Largest `(reference − optimizer) / |reference|`; negative when the
    /// optimizer beat the reference everywhere.
    pub max_gap: f64,
    pub tolerance: f64,
}

impl OracleReport {
    pub fn passed(&self) -> bool {
        self.max_gap <= self.tolerance
    }
}

impl fmt::Display for OracleReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {:<22} max relative gap {:.3e} (tolerance {:.0e}, {} cases)",
            if self.passed() { "PASS" } else { "FAIL" },
            self.name,
            self.max_gap,
            self.tolerance,
            self.cases
        )
    }
}

fn initial_precoders(model: &ChannelModel<'_>, state: &AntennaState) -> PrecoderSet {
    let cfg = &model.scenario().config;
    let channel = model.evaluate(state, Scheme::Mara);
    digital_precoder(&channel, cfg.total_power_w, cfg.noise_power_w, PrecoderMethod::MatchedFilter)
        .expect("matched filtering always succeeds")
}

/// Projected gradient ascent against a 3-D grid search on two-path
/// single-antenna instances. `grid_step` is a fraction of the antenna
/// spacing.
pub fn position_oracle(
    config: &SystemConfig,
    instances: usize,
    grid_step: f64,
    opts: &OptimOptions,
) -> Result<OracleReport> {
    let mut max_gap = f64::NEG_INFINITY;
    for i in 0..instances {
        let cfg = oracle_config(config, 2, config.seed.wrapping_add(i as u64));
        let sc = generate_scenario(&cfg)?;
        let model = ChannelModel::new(&sc);
        let start = AntennaState::initial(&sc);
        let w = initial_precoders(&model, &start);
        let grid = BruteForceOptions::new(grid_step * cfg.antenna_spacing_m());
        let reference = objective(&model, &brute_force_positions(&model, &start, &w, &grid)?, &w);
        let found = objective(&model, &optimize_positions(&model, Scheme::Sma, &start, &w, opts)?, &w);
        max_gap = max_gap.max((reference - found) / reference.abs());
    }
    Ok(OracleReport {
        name: "positions vs grid",
        cases: instances,
        max_gap,
        tolerance: 1e-4,
    })
}

/// Sphere ascent against the leading eigenvector of `Re(q qᴴ)` on
/// single-antenna instances.
pub fn pattern_oracle(config: &SystemConfig, instances: usize, opts: &OptimOptions) -> Result<OracleReport> {
    let mut max_gap = f64::NEG_INFINITY;
    for i in 0..instances {
        let cfg = oracle_config(config, config.num_paths_per_ue, config.seed.wrapping_add(i as u64));
        let sc = generate_scenario(&cfg)?;
        let model = ChannelModel::new(&sc);
        let start = AntennaState::initial(&sc);
        let w = initial_precoders(&model, &start);
        let q = model.ecsi(0, 0, &start.positions[0]);
        let mut best = start.clone();
        best.patterns[0] = PatternCoefficients(rank_one_pattern(&q.0));
        let reference = objective(&model, &best, &w);
        let found = objective(&model, &optimize_patterns(&model, Scheme::Era, &start, &w, opts)?, &w);
        max_gap = max_gap.max((reference - found) / reference.abs());
    }
    Ok(OracleReport {
        name: "patterns vs rank-one",
        cases: instances,
        max_gap,
        tolerance: 1e-6,
    })
}
