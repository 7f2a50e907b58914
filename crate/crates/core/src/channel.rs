//! Channel coefficients `h_{u,m,g}` for all four antenna schemes.
//!
//! Every scheme goes through the same factorization
//! `h_{u,m,g} = q_{u,m,g}ᴴ α_m` with
//! `q_{u,m,g}ᴴ = (a_u ⊙ x_{u,g} ⊙ b_{u,m})ᵀ Ω_u`. Schemes without pattern
//! control use the isotropic coefficient `α = e₁`, so the four feasible sets
//! nest inside one another. The UE antenna is fixed and isotropic with unit
//! gain, which is absorbed into the path gains.

use std::f64::consts::PI;

use crate::scenario::{PathSet, Scenario, Scheme};
use crate::shod::{build_basis, build_omega, BasisSet, OmegaMatrix, PatternCoefficients};
use crate::{dot3, norm3, sub3, Error, Result, Vec3, C64};

/// Decision variables of the base station array.
#[derive(Debug, Clone, PartialEq)]
pub struct AntennaState {
    pub positions: Vec<Vec3>,
    pub patterns: Vec<PatternCoefficients>,
}

impl AntennaState {
    /// Nominal positions with isotropic patterns: the TFA configuration.
    pub fn initial(scenario: &Scenario) -> Self {
        let k = scenario.config.num_basis();
        AntennaState {
            positions: scenario.initial_positions.clone(),
            patterns: vec![PatternCoefficients::isotropic(k); scenario.num_antennas()],
        }
    }

    pub fn num_antennas(&self) -> usize {
        self.positions.len()
    }

    /// Checks the movement balls, unit-norm patterns and the pins implied by
    /// `scheme`.
    pub fn check(&self, scenario: &Scenario, scheme: Scheme) -> Result<()> {
        let m_count = scenario.num_antennas();
        let k = scenario.config.num_basis();
        if self.positions.len() != m_count || self.patterns.len() != m_count {
            return Err(Error::Contract(format!(
                "state describes {} positions and {} patterns, array has {m_count} antennas",
                self.positions.len(),
                self.patterns.len()
            )));
        }
        let d = scenario.config.antenna_spacing_m();
        let radius = scenario.config.movement_radius();
        let isotropic = PatternCoefficients::isotropic(k);
        for m in 0..m_count {
            let offset = norm3(&sub3(&self.positions[m], &scenario.initial_positions[m]));
            if offset > radius + 1e-12 * d {
                return Err(Error::Contract(format!(
                    "antenna {m} is {offset:e} m from its nominal position, beyond the {radius:e} m region"
                )));
            }
            if !scheme.moves_positions() && offset > 1e-12 * d {
                return Err(Error::Contract(format!(
                    "{scheme} pins positions but antenna {m} moved by {offset:e} m"
                )));
            }
            let alpha = &self.patterns[m];
            if alpha.len() != k {
                return Err(Error::Contract(format!(
                    "antenna {m} pattern has {} coefficients, expected {k}",
                    alpha.len()
                )));
            }
            if (alpha.norm() - 1.0).abs() > 1e-10 {
                return Err(Error::Contract(format!(
                    "antenna {m} pattern has norm {}, expected 1",
                    alpha.norm()
                )));
            }
            if !scheme.reshapes_patterns() {
                let dev: f64 = alpha
                    .iter()
                    .zip(isotropic.iter())
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt();
                if dev > 1e-12 {
                    return Err(Error::Contract(format!(
                        "{scheme} pins patterns to isotropic but antenna {m} deviates by {dev:e}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Electromagnetic-domain CSI `q_{u,m,g} ∈ ℂ^K`.
#[derive(Debug, Clone, PartialEq)]
pub struct EcsiVector(pub Vec<C64>);

impl EcsiVector {
    /// `qᴴ α`.
    pub fn apply(&self, alpha: &[f64]) -> Result<C64> {
        if alpha.len() != self.0.len() {
            return Err(Error::Contract(format!(
                "pattern has {} coefficients, eCSI has {}",
                alpha.len(),
                self.0.len()
            )));
        }
        Ok(self.0.iter().zip(alpha).map(|(q, a)| q.conj() * *a).sum())
    }
}

/// Channel coefficients for every (UE, antenna, subcarrier).
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelTensor {
    pub scheme: Scheme,
    num_ues: usize,
    num_antennas: usize,
    num_subcarriers: usize,
    /// Subcarrier-major: `data[(g·U + u)·M + m]`.
    data: Vec<C64>,
}

impl ChannelTensor {
    pub fn zeros(scheme: Scheme, num_ues: usize, num_antennas: usize, num_subcarriers: usize) -> Self {
        ChannelTensor {
            scheme,
            num_ues,
            num_antennas,
            num_subcarriers,
            data: vec![C64::new(0.0, 0.0); num_ues * num_antennas * num_subcarriers],
        }
    }

    pub fn num_ues(&self) -> usize {
        self.num_ues
    }

    pub fn num_antennas(&self) -> usize {
        self.num_antennas
    }

    pub fn num_subcarriers(&self) -> usize {
        self.num_subcarriers
    }

    fn index(&self, u: usize, m: usize, g: usize) -> usize {
        (g * self.num_ues + u) * self.num_antennas + m
    }

    pub fn get(&self, u: usize, m: usize, g: usize) -> C64 {
        self.data[self.index(u, m, g)]
    }

    pub fn set(&mut self, u: usize, m: usize, g: usize, value: C64) {
        let i = self.index(u, m, g);
        self.data[i] = value;
    }

    /// `[h_{u,1,g}, …, h_{u,M,g}]`, the row UE `u` sees at subcarrier `g`.
    pub fn row(&self, u: usize, g: usize) -> &[C64] {
        let start = self.index(u, 0, g);
        &self.data[start..start + self.num_antennas]
    }

    pub fn iter(&self) -> impl Iterator<Item = &C64> {
        self.data.iter()
    }
}

fn steering(waves: impl Iterator<Item = Vec3>, point: &Vec3, wavelength: f64) -> Vec<C64> {
    let kappa = 2.0 * PI / wavelength;
    waves
        .map(|k| C64::from_polar(1.0, -kappa * dot3(&k, point)))
        .collect()
}

/// `b = [e^{-j(2π/λ) k_tx,iᵀ p}]_i`.
pub fn tx_steering(path_set: &PathSet, p: &Vec3, wavelength: f64) -> Vec<C64> {
    steering(path_set.paths.iter().map(|x| x.tx_wave), p, wavelength)
}

/// `a = [e^{-j(2π/λ) k_rx,iᵀ q}]_i`.
pub fn rx_steering(path_set: &PathSet, q: &Vec3, wavelength: f64) -> Vec<C64> {
    steering(path_set.paths.iter().map(|x| x.rx_wave), q, wavelength)
}

/// `x_{i,g} = x̃_i e^{-j2π τ_i f_g}`.
pub fn path_gains(path_set: &PathSet, frequency: f64) -> Vec<C64> {
    path_set
        .paths
        .iter()
        .map(|x| x.gain * C64::from_polar(1.0, -2.0 * PI * x.delay * frequency))
        .collect()
}

/// `q = Ω_uᵀ conj(a_u ⊙ x_g ⊙ b_{u,m})`.
pub fn ecsi(
    path_set: &PathSet,
    omega: &OmegaMatrix,
    p: &Vec3,
    q: &Vec3,
    frequency: f64,
    wavelength: f64,
) -> Result<EcsiVector> {
    if omega.num_paths() != path_set.len() {
        return Err(Error::Contract(format!(
            "Ω has {} rows for {} paths",
            omega.num_paths(),
            path_set.len()
        )));
    }
    let a = rx_steering(path_set, q, wavelength);
    let x = path_gains(path_set, frequency);
    let b = tx_steering(path_set, p, wavelength);
    let weights: Vec<C64> = (0..path_set.len()).map(|i| a[i] * x[i] * b[i]).collect();
    Ok(EcsiVector(project_onto_basis(omega, &weights)))
}

fn project_onto_basis(omega: &OmegaMatrix, weights: &[C64]) -> Vec<C64> {
    (0..omega.num_basis())
        .map(|k| {
            weights
                .iter()
                .enumerate()
                .map(|(i, w)| w.conj() * omega.0[(i, k)])
                .sum()
        })
        .collect()
}

/// Per-UE quantities that do not depend on the antenna state.
#[derive(Debug, Clone)]
pub(crate) struct UeTerms {
    pub omega: OmegaMatrix,
    /// `a_i x_{i,g}`, indexed `[g][i]`.
    pub rx_times_gain: Vec<Vec<C64>>,
    pub tx_waves: Vec<Vec3>,
}

/// A scenario with its basis and all state-independent channel factors
/// cached, so channel tensors and eCSI can be re-evaluated cheaply for many
/// antenna states.
#[derive(Debug, Clone)]
pub struct ChannelModel<'a> {
    scenario: &'a Scenario,
    basis: BasisSet,
    pub(crate) ues: Vec<UeTerms>,
}

impl<'a> ChannelModel<'a> {
    pub fn new(scenario: &'a Scenario) -> Self {
        let basis = build_basis(scenario.config.shod_max_degree);
        let wavelength = scenario.wavelength();
        let ues = scenario
            .path_sets
            .iter()
            .zip(&scenario.ue_positions)
            .map(|(ps, q)| {
                let a = rx_steering(ps, q, wavelength);
                let rx_times_gain = scenario
                    .subcarrier_frequencies
                    .iter()
                    .map(|&f| {
                        path_gains(ps, f)
                            .iter()
                            .zip(&a)
                            .map(|(x, a)| x * a)
                            .collect()
                    })
                    .collect();
                UeTerms {
                    omega: build_omega(&basis, ps),
                    rx_times_gain,
                    tx_waves: ps.paths.iter().map(|p| p.tx_wave).collect(),
                }
            })
            .collect();
        ChannelModel {
            scenario,
            basis,
            ues,
        }
    }

    pub fn scenario(&self) -> &'a Scenario {
        self.scenario
    }

    pub fn basis(&self) -> &BasisSet {
        &self.basis
    }

    pub fn omega(&self, u: usize) -> &OmegaMatrix {
        &self.ues[u].omega
    }

    /// Per-path weights `b_{u,m,i} f_{u,m,i}` of antenna `m` toward UE `u`.
    pub(crate) fn tx_path_weights(&self, u: usize, position: &Vec3, alpha: &[f64]) -> Vec<C64> {
        let ue = &self.ues[u];
        let kappa = 2.0 * PI / self.scenario.wavelength();
        let gains = ue.omega.apply_unchecked(alpha);
        ue.tx_waves
            .iter()
            .zip(gains)
            .map(|(k, f)| C64::from_polar(f, -kappa * dot3(k, position)))
            .collect()
    }

    /// `q_{u,m,g}` for an antenna at `position`.
    pub fn ecsi(&self, u: usize, g: usize, position: &Vec3) -> EcsiVector {
        let ue = &self.ues[u];
        let kappa = 2.0 * PI / self.scenario.wavelength();
        let weights: Vec<C64> = ue
            .tx_waves
            .iter()
            .zip(&ue.rx_times_gain[g])
            .map(|(k, ax)| ax * C64::from_polar(1.0, -kappa * dot3(k, position)))
            .collect();
        EcsiVector(project_onto_basis(&ue.omega, &weights))
    }

    /// Channel tensor without feasibility checks; `scheme` is only a tag.
    pub fn evaluate(&self, state: &AntennaState, scheme: Scheme) -> ChannelTensor {
        let sc = self.scenario;
        let (u_count, m_count, g_count) = (sc.num_ues(), sc.num_antennas(), sc.num_subcarriers());
        let mut tensor = ChannelTensor::zeros(scheme, u_count, m_count, g_count);
        for u in 0..u_count {
            for m in 0..m_count {
                let v = self.tx_path_weights(u, &state.positions[m], &state.patterns[m]);
                for g in 0..g_count {
                    let h = self.ues[u].rx_times_gain[g]
                        .iter()
                        .zip(&v)
                        .map(|(ax, v)| ax * v)
                        .sum();
                    tensor.set(u, m, g, h);
                }
            }
        }
        tensor
    }

    /// Channel tensor for `scheme`, rejecting states the scheme cannot reach.
    pub fn channel_tensor(&self, state: &AntennaState, scheme: Scheme) -> Result<ChannelTensor> {
        state.check(self.scenario, scheme)?;
        Ok(self.evaluate(state, scheme))
    }
}

/// Builds a [`ChannelModel`] and evaluates one tensor.
pub fn channel_tensor(scenario: &Scenario, state: &AntennaState, scheme: Scheme) -> Result<ChannelTensor> {
    ChannelModel::new(scenario).channel_tensor(state, scheme)
}
