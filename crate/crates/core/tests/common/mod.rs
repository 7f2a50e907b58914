//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

use mara_core::channel::AntennaState;
use mara_core::scenario::{PropagationPath, Scenario, SystemConfig};
use mara_core::se::PrecoderSet;
use mara_core::shod::{pattern_gain, BasisSet, PatternCoefficients};
use mara_core::C64;
use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn small_config(m: usize, u: usize, g: usize, l: usize, seed: u64) -> SystemConfig {
    let mut cfg = SystemConfig::reference();
    cfg.num_bs_antennas = m;
    cfg.num_ues = u;
    cfg.num_subcarriers = g;
    cfg.num_paths_per_ue = l;
    cfg.seed = seed;
    cfg
}

pub fn gaussian_c(rng: &mut ChaCha8Rng) -> C64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    C64::new(re, im)
}

pub fn random_unit(rng: &mut ChaCha8Rng, k: usize) -> PatternCoefficients {
    loop {
        let v: Vec<f64> = (0..k).map(|_| StandardNormal.sample(rng)).collect();
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-3 {
            return PatternCoefficients(v.iter().map(|x| x / n).collect());
        }
    }
}

/// Positions uniform in each ball (rejection sampling), patterns uniform on
/// the sphere.
pub fn random_state(sc: &Scenario, rng: &mut ChaCha8Rng) -> AntennaState {
    let r = sc.config.movement_radius();
    let mut state = AntennaState::initial(sc);
    for (p, c) in state.positions.iter_mut().zip(&sc.initial_positions) {
        let o = loop {
            let o = [
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
            ];
            if o[0] * o[0] + o[1] * o[1] + o[2] * o[2] <= 1.0 {
                break o;
            }
        };
        *p = [c[0] + r * o[0], c[1] + r * o[1], c[2] + r * o[2]];
    }
    for a in &mut state.patterns {
        *a = random_unit(rng, sc.config.num_basis());
    }
    state
}

pub fn random_precoders(rng: &mut ChaCha8Rng, m: usize, u: usize, g: usize) -> PrecoderSet {
    PrecoderSet {
        matrices: (0..g)
            .map(|_| DMatrix::from_fn(m, u, |_, _| gaussian_c(rng)))
            .collect(),
    }
}

fn dot(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Departure angles of a unit direction, computed here rather than through
/// the library.
pub fn angles(k: &[f64; 3]) -> (f64, f64) {
    (k[2].clamp(-1.0, 1.0).acos(), k[1].atan2(k[0]))
}

/// `x̃_i e^{-j2πτ_i f_g} e^{-jκ k_tx·p} e^{-jκ k_rx·q}` for one path of UE `u`.
pub fn path_weight(sc: &Scenario, u: usize, path: &PropagationPath, p: &[f64; 3], g: usize) -> C64 {
    let kappa = 2.0 * PI / sc.wavelength();
    let f = sc.subcarrier_frequencies[g];
    let q = &sc.ue_positions[u];
    let x = path.gain * C64::from_polar(1.0, -2.0 * PI * path.delay * f);
    let tx = C64::from_polar(1.0, -kappa * dot(&path.tx_wave, p));
    let rx = C64::from_polar(1.0, -kappa * dot(&path.rx_wave, q));
    x * tx * rx
}

/// One channel coefficient as the plain multipath sum
/// `Σ_i f(θ_i, φ_i) · path_weight_i`.
pub fn direct_coefficient(
    sc: &Scenario,
    basis: &BasisSet,
    alpha: &[f64],
    u: usize,
    p: &[f64; 3],
    g: usize,
) -> C64 {
    sc.path_sets[u]
        .paths
        .iter()
        .map(|path| {
            let (theta, phi) = angles(&path.tx_wave);
            let gain = pattern_gain(basis, alpha, theta, phi).unwrap();
            path_weight(sc, u, path, p, g) * gain
        })
        .sum()
}

/// Channel indexed `[g][u][m]`.
pub fn direct_channel(sc: &Scenario, basis: &BasisSet, state: &AntennaState) -> Vec<Vec<Vec<C64>>> {
    (0..sc.num_subcarriers())
        .map(|g| {
            (0..sc.num_ues())
                .map(|u| {
                    (0..sc.num_antennas())
                        .map(|m| direct_coefficient(sc, basis, &state.patterns[m], u, &state.positions[m], g))
                        .collect()
                })
                .collect()
        })
        .collect()
}

/// `Σ_g Σ_u log₂(1 + |h_uᵀw_u|² / (Σ_{v≠u} |h_uᵀw_v|² + σ²))`.
pub fn direct_sum_se(h: &[Vec<Vec<C64>>], w: &PrecoderSet, noise: f64) -> f64 {
    let mut total = 0.0;
    for (g, hg) in h.iter().enumerate() {
        let wg = &w.matrices[g];
        for (u, hu) in hg.iter().enumerate() {
            let gains: Vec<f64> = (0..wg.ncols())
                .map(|v| {
                    hu.iter()
                        .enumerate()
                        .map(|(m, x)| x * wg[(m, v)])
                        .sum::<C64>()
                        .norm_sqr()
                })
                .collect();
            let interference: f64 = gains.iter().enumerate().filter(|(v, _)| *v != u).map(|(_, x)| x).sum();
            total += (1.0 + gains[u] / (interference + noise)).log2();
        }
    }
    total
}

pub fn direct_objective(sc: &Scenario, basis: &BasisSet, state: &AntennaState, w: &PrecoderSet) -> f64 {
    direct_sum_se(&direct_channel(sc, basis, state), w, sc.config.noise_power_w)
}

/// Central differences of the SE with respect to antenna `m`'s position,
/// step `h` meters.
pub fn fd_position_gradient(
    sc: &Scenario,
    basis: &BasisSet,
    state: &AntennaState,
    w: &PrecoderSet,
    m: usize,
    h: f64,
) -> [f64; 3] {
    let mut out = [0.0; 3];
    for (c, slot) in out.iter_mut().enumerate() {
        let mut plus = state.clone();
        plus.positions[m][c] += h;
        let mut minus = state.clone();
        minus.positions[m][c] -= h;
        *slot = (direct_objective(sc, basis, &plus, w) - direct_objective(sc, basis, &minus, w)) / (2.0 * h);
    }
    out
}

/// Central differences with respect to the raw coefficients `α_m`.
pub fn fd_pattern_gradient(
    sc: &Scenario,
    basis: &BasisSet,
    state: &AntennaState,
    w: &PrecoderSet,
    m: usize,
    h: f64,
) -> Vec<f64> {
    (0..sc.config.num_basis())
        .map(|k| {
            let mut plus = state.clone();
            plus.patterns[m].0[k] += h;
            let mut minus = state.clone();
            minus.patterns[m].0[k] -= h;
            (direct_objective(sc, basis, &plus, w) - direct_objective(sc, basis, &minus, w)) / (2.0 * h)
        })
        .collect()
}

/// `‖a − b‖ / ‖b‖`.
pub fn relative_error(a: &[f64], b: &[f64]) -> f64 {
    let d: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
    let n: f64 = b.iter().map(|y| y * y).sum::<f64>().sqrt();
    d / n.max(1e-300)
}

/// Gauss–Legendre nodes and weights on [-1, 1] by Newton iteration on
/// `P_n`, independent of the library's quadrature.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    (0..n)
        .map(|i| {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                let pn = if n == 0 { 1.0 } else { p1 };
                let pn1 = if n == 0 { 0.0 } else { p0 };
                dp = n as f64 * (x * pn - pn1) / (x * x - 1.0);
                let dx = pn / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            (x, 2.0 / ((1.0 - x * x) * dp * dp))
        })
        .collect()
}

/// `∮ F(θ, φ) dΩ` on a product rule exact for band limit `2·max_degree`.
pub fn sphere_integral(max_degree: usize, mut f: impl FnMut(f64, f64) -> f64) -> f64 {
    let nodes = gauss_legendre(max_degree + 2);
    let n_phi = 4 * max_degree + 3;
    let d_phi = 2.0 * PI / n_phi as f64;
    let mut total = 0.0;
    for (x, wx) in nodes {
        let theta = x.acos();
        for j in 0..n_phi {
            total += wx * d_phi * f(theta, (j as f64 + 0.5) * d_phi);
        }
    }
    total
}
