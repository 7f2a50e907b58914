//! Per-user SINR and sum spectral efficiency.
//!
//! `SINR_{u,g} = |h_{u,g}ᴴ w_{u,g}|² / (Σ_{u'≠u} |h_{u,g}ᴴ w_{u',g}|² + σ²)`.
//! The interference term pairs UE `u`'s own channel with the other users'
//! precoders.

use nalgebra::DMatrix;

use crate::channel::{AntennaState, ChannelModel, ChannelTensor};
use crate::{Error, Result, C64};

/// Digital precoders `W_g ∈ ℂ^{M×U}`, one per subcarrier.
#[derive(Debug, Clone, PartialEq)]
pub struct PrecoderSet {
    pub matrices: Vec<DMatrix<C64>>,
}

impl PrecoderSet {
    pub fn zeros(num_antennas: usize, num_ues: usize, num_subcarriers: usize) -> Self {
        PrecoderSet {
            matrices: vec![DMatrix::zeros(num_antennas, num_ues); num_subcarriers],
        }
    }

    /// `Σ_g ‖W_g‖_F²`.
    pub fn total_power(&self) -> f64 {
        self.matrices
            .iter()
            .map(|w| w.iter().map(|c| c.norm_sqr()).sum::<f64>())
            .sum()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        PrecoderSet {
            matrices: self
                .matrices
                .iter()
                .map(|w| w.map(|c| c * factor))
                .collect(),
        }
    }
}

/// Sum SE and its per-subcarrier mean, bits/s/Hz.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeReport {
    pub sum: f64,
    pub per_subcarrier: f64,
}

/// `h_{u,g}ᴴ w_{u',g} = Σ_m h_{u,m,g} [W_g]_{m,u'}`.
pub(crate) fn amplitude(row: &[C64], w: &DMatrix<C64>, col: usize) -> C64 {
    row.iter().enumerate().map(|(m, h)| h * w[(m, col)]).sum()
}

fn sinr_from_amplitudes(amps: &[C64], u: usize, noise: f64) -> f64 {
    let signal = amps[u].norm_sqr();
    let interference: f64 = amps
        .iter()
        .enumerate()
        .filter(|(v, _)| *v != u)
        .map(|(_, a)| a.norm_sqr())
        .sum();
    signal / (interference + noise)
}

pub fn sinr(channel: &ChannelTensor, precoders: &PrecoderSet, u: usize, g: usize, noise: f64) -> Result<f64> {
    check_shapes(channel, precoders)?;
    if u >= channel.num_ues() || g >= channel.num_subcarriers() {
        return Err(Error::Contract(format!(
            "index (u={u}, g={g}) outside {}×{} grid",
            channel.num_ues(),
            channel.num_subcarriers()
        )));
    }
    let w = &precoders.matrices[g];
    let row = channel.row(u, g);
    let amps: Vec<C64> = (0..channel.num_ues()).map(|v| amplitude(row, w, v)).collect();
    Ok(sinr_from_amplitudes(&amps, u, noise))
}

fn check_shapes(channel: &ChannelTensor, precoders: &PrecoderSet) -> Result<()> {
    let ok = precoders.matrices.len() == channel.num_subcarriers()
        && precoders
            .matrices
            .iter()
            .all(|w| w.shape() == (channel.num_antennas(), channel.num_ues()));
    if ok {
        Ok(())
    } else {
        Err(Error::Contract(format!(
            "precoders do not match a {}-antenna, {}-UE, {}-subcarrier channel",
            channel.num_antennas(),
            channel.num_ues(),
            channel.num_subcarriers()
        )))
    }
}

/// `Σ_g Σ_u log₂(1 + SINR_{u,g})`.
pub fn sum_se(channel: &ChannelTensor, precoders: &PrecoderSet, noise: f64) -> Result<SeReport> {
    check_shapes(channel, precoders)?;
    let sum = sum_se_unchecked(channel, precoders, noise);
    Ok(SeReport {
        sum,
        per_subcarrier: sum / channel.num_subcarriers() as f64,
    })
}

pub(crate) fn sum_se_unchecked(channel: &ChannelTensor, precoders: &PrecoderSet, noise: f64) -> f64 {
    let u_count = channel.num_ues();
    let mut amps = vec![C64::new(0.0, 0.0); u_count];
    let mut total = 0.0;
    for (g, w) in precoders.matrices.iter().enumerate() {
        for u in 0..u_count {
            let row = channel.row(u, g);
            for (v, a) in amps.iter_mut().enumerate() {
                *a = amplitude(row, w, v);
            }
            total += sinr_from_amplitudes(&amps, u, noise).ln_1p();
        }
    }
    total / std::f64::consts::LN_2
}

/// Sum SE written through the eCSI: `|q_{u,g}ᴴ Λ w_{u',g}|²` with
/// `q_{u,g}` the stacked `q_{u,m,g}` and `Λ = blkdiag(α_1, …, α_M)`.
pub fn sum_se_ecsi(
    model: &ChannelModel<'_>,
    state: &AntennaState,
    precoders: &PrecoderSet,
    noise: f64,
) -> Result<f64> {
    let sc = model.scenario();
    let (u_count, m_count, g_count) = (sc.num_ues(), sc.num_antennas(), sc.num_subcarriers());
    let k = sc.config.num_basis();
    if precoders.matrices.len() != g_count {
        return Err(Error::Contract("precoder count does not match subcarriers".into()));
    }
    let mut total = 0.0;
    for g in 0..g_count {
        let w = &precoders.matrices[g];
        for u in 0..u_count {
            // q_{u,g} ∈ ℂ^{MK}
            let stacked: Vec<C64> = (0..m_count)
                .flat_map(|m| model.ecsi(u, g, &state.positions[m]).0)
                .collect();
            // qᴴ Λ ∈ ℂ^{1×M}
            let q_lambda: Vec<C64> = (0..m_count)
                .map(|m| {
                    (0..k)
                        .map(|j| stacked[m * k + j].conj() * state.patterns[m][j])
                        .sum()
                })
                .collect();
            let amps: Vec<C64> = (0..u_count).map(|v| amplitude(&q_lambda, w, v)).collect();
            total += (1.0 + sinr_from_amplitudes(&amps, u, noise)).log2();
        }
    }
    Ok(total)
}
