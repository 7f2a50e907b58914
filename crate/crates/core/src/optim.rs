//! Spectral-efficiency maximization over digital precoders, antenna
//! positions and pattern coefficients.
//!
//! Each scheme is solved by block-coordinate ascent. A precoder step picks
//! the best of the incumbent, zero-forcing with water-filling, and matched
//! filtering. Position steps run projected gradient ascent inside each
//! antenna's ball. Pattern steps run gradient ascent on the unit spheres
//! with a normalizing retraction. Every block step is non-decreasing, so the
//! recorded objective trace is monotone. Warm starts chain the schemes
//! (TFA → SMA, ERA → MARA) so the final SE respects the nesting of their
//! feasible sets.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, UnitSphere};

use crate::channel::{AntennaState, ChannelModel, ChannelTensor};
use crate::scenario::Scheme;
use crate::se::{amplitude, sum_se_unchecked, PrecoderSet};
use crate::shod::PatternCoefficients;
use crate::{norm3, sub3, Error, Result, Vec3, C64};

/// Digital precoding rule for the W-subproblem.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PrecoderMethod {
    /// Zero-forcing with water-filling over all (UE, subcarrier) streams.
    ZeroForcing,
    /// Maximum-ratio transmission with an equal power split.
    MatchedFilter,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimOptions {
    pub max_outer_iters: usize,
    pub inner_grad_iters: usize,
    /// Initial position step as a fraction of the antenna spacing `d`.
    pub position_step: f64,
    /// Initial pattern step (radians on the coefficient sphere).
    pub pattern_step: f64,
    pub armijo_c: f64,
    pub backtrack_ratio: f64,
    pub tol_rel: f64,
    /// Finite-difference step for gradient checks; a fraction of λ for
    /// positions, absolute for pattern coefficients.
    pub fd_step: f64,
    /// Number of starts per block step, the first being the incoming state.
    pub restarts: usize,
    pub seed: u64,
}

impl Default for OptimOptions {
    fn default() -> Self {
        OptimOptions {
            max_outer_iters: 50,
            inner_grad_iters: 100,
            position_step: 1e-2,
            pattern_step: 1e-1,
            armijo_c: 1e-4,
            backtrack_ratio: 0.5,
            tol_rel: 1e-6,
            fd_step: 1e-6,
            restarts: 4,
            seed: 0,
        }
    }
}

/// Option keys accepted as `key=value` overrides.
pub const OPTION_KEYS: [&str; 10] = [
    "max_outer_iters",
    "inner_grad_iters",
    "position_step",
    "pattern_step",
    "armijo_c",
    "backtrack_ratio",
    "tol_rel",
    "fd_step",
    "restarts",
    "seed",
];

impl OptimOptions {
    pub fn validate(&self) -> Result<()> {
        let reals = [
            ("position_step", self.position_step),
            ("pattern_step", self.pattern_step),
            ("armijo_c", self.armijo_c),
            ("tol_rel", self.tol_rel),
            ("fd_step", self.fd_step),
        ];
        for (name, v) in reals {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::validation(name, format!("must be positive, got {v}")));
            }
        }
        if !(self.backtrack_ratio > 0.0 && self.backtrack_ratio < 1.0) {
            return Err(Error::validation("backtrack_ratio", "must lie in (0, 1)"));
        }
        if self.restarts == 0 {
            return Err(Error::validation("restarts", "at least one start required"));
        }
        Ok(())
    }

    /// Sets one option from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
            value
                .trim()
                .parse()
                .map_err(|_| Error::validation(key, format!("cannot parse `{value}`")))
        }
        match key {
            "max_outer_iters" => self.max_outer_iters = parse(key, value)?,
            "inner_grad_iters" => self.inner_grad_iters = parse(key, value)?,
            "position_step" => self.position_step = parse(key, value)?,
            "pattern_step" => self.pattern_step = parse(key, value)?,
            "armijo_c" => self.armijo_c = parse(key, value)?,
            "backtrack_ratio" => self.backtrack_ratio = parse(key, value)?,
            "tol_rel" => self.tol_rel = parse(key, value)?,
            "fd_step" => self.fd_step = parse(key, value)?,
            "restarts" => self.restarts = parse(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            other => return Err(Error::UnknownKey(other.to_string())),
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimResult {
    pub scheme: Scheme,
    pub state: AntennaState,
    pub precoders: PrecoderSet,
    /// Sum SE after each outer iteration.
    pub se_trace: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// Time spent in this scheme's own solve, excluding warm-start stages.
    pub wall_time_s: f64,
}

impl OptimResult {
    pub fn final_se(&self) -> f64 {
        *self.se_trace.last().expect("trace has at least one entry")
    }
}

// ---------------------------------------------------------------------------
// Digital precoding

/// Water-filling over parallel channels with inverse gains `1/γ_i`:
/// `p_i = max(0, μ - 1/γ_i)`, `Σ p_i = budget`.
///
/// The water level is bracketed by bisection to a 1e-10 power residual, then
/// recomputed in closed form on the resulting active set.
pub fn water_filling(inverse_gains: &[f64], budget: f64) -> Vec<f64> {
    if inverse_gains.is_empty() {
        return Vec::new();
    }
    let filled = |mu: f64| -> f64 { inverse_gains.iter().map(|g| (mu - g).max(0.0)).sum() };
    let floor = inverse_gains.iter().cloned().fold(f64::INFINITY, f64::min);
    let mut lo = floor;
    let mut hi = floor + budget;
    while filled(hi) < budget {
        hi += budget;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let p = filled(mid);
        if (p - budget).abs() <= 1e-10 {
            lo = mid;
            hi = mid;
            break;
        }
        if p < budget {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let level = 0.5 * (lo + hi);
    let active: Vec<usize> = (0..inverse_gains.len())
        .filter(|&i| inverse_gains[i] < level)
        .collect();
    let active = if active.is_empty() {
        let best = (0..inverse_gains.len())
            .min_by(|&a, &b| inverse_gains[a].total_cmp(&inverse_gains[b]))
            .expect("nonempty");
        vec![best]
    } else {
        active
    };
    let mu = (budget + active.iter().map(|&i| inverse_gains[i]).sum::<f64>()) / active.len() as f64;
    let mut powers = vec![0.0; inverse_gains.len()];
    for &i in &active {
        powers[i] = (mu - inverse_gains[i]).max(0.0);
    }
    powers
}

fn channel_matrix(channel: &ChannelTensor, g: usize) -> DMatrix<C64> {
    DMatrix::from_fn(channel.num_ues(), channel.num_antennas(), |u, m| channel.get(u, m, g))
}

/// Precoders meeting `Σ_g ‖W_g‖_F² = P_T`.
///
/// Zero-forcing uses `W_g = H_gᴴ (H_g H_gᴴ)⁻¹ D_g` with unit-norm columns
/// scaled by water-filling powers; matched filtering uses normalized
/// conjugate channels and an equal power split.
pub fn digital_precoder(
    channel: &ChannelTensor,
    total_power: f64,
    noise: f64,
    method: PrecoderMethod,
) -> Result<PrecoderSet> {
    let (u_count, m_count, g_count) = (channel.num_ues(), channel.num_antennas(), channel.num_subcarriers());
    match method {
        PrecoderMethod::MatchedFilter => {
            let share = (total_power / (u_count * g_count) as f64).sqrt();
            let matrices = (0..g_count)
                .map(|g| {
                    let mut w = DMatrix::zeros(m_count, u_count);
                    for u in 0..u_count {
                        let row = channel.row(u, g);
                        let norm = row.iter().map(|h| h.norm_sqr()).sum::<f64>().sqrt();
                        for m in 0..m_count {
                            w[(m, u)] = if norm > 0.0 {
                                row[m].conj() * (share / norm)
                            } else if m == 0 {
                                C64::new(share, 0.0)
                            } else {
                                C64::new(0.0, 0.0)
                            };
                        }
                    }
                    w
                })
                .collect();
            Ok(PrecoderSet { matrices })
        }
        PrecoderMethod::ZeroForcing => {
            let mut directions = Vec::with_capacity(g_count);
            let mut inverse_gains = Vec::with_capacity(g_count * u_count);
            for g in 0..g_count {
                let h = channel_matrix(channel, g);
                let gram = &h * h.adjoint();
                let eig = gram.clone().symmetric_eigenvalues();
                let max = eig.iter().cloned().fold(0.0, f64::max);
                let min = eig.iter().cloned().fold(f64::INFINITY, f64::min);
                if max.is_nan() || max <= 0.0 || min <= 1e-12 * max {
                    return Err(Error::Singular { subcarrier: g });
                }
                let inv = gram
                    .try_inverse()
                    .ok_or(Error::Singular { subcarrier: g })?;
                let z = h.adjoint() * inv;
                let mut unit = DMatrix::zeros(m_count, u_count);
                for u in 0..u_count {
                    let col = z.column(u);
                    let norm2: f64 = col.iter().map(|c| c.norm_sqr()).sum();
                    let norm = norm2.sqrt();
                    for m in 0..m_count {
                        unit[(m, u)] = col[m] / norm;
                    }
                    // Received power per unit transmit power is 1/‖z_u‖².
                    inverse_gains.push(norm2 * noise);
                }
                directions.push(unit);
            }
            let powers = water_filling(&inverse_gains, total_power);
            let matrices = directions
                .into_iter()
                .enumerate()
                .map(|(g, mut w)| {
                    for u in 0..u_count {
                        let amp = powers[g * u_count + u].sqrt();
                        w.column_mut(u).scale_mut(amp);
                    }
                    w
                })
                .collect();
            Ok(PrecoderSet { matrices })
        }
    }
}

// ---------------------------------------------------------------------------
// Objective and gradients

fn noise(model: &ChannelModel<'_>) -> f64 {
    model.scenario().config.noise_power_w
}

/// Sum SE of `state` under fixed precoders.
pub fn objective(model: &ChannelModel<'_>, state: &AntennaState, precoders: &PrecoderSet) -> f64 {
    sum_se_unchecked(&model.evaluate(state, Scheme::Mara), precoders, noise(model))
}

/// Euclidean gradients of the sum SE with respect to every position and
/// every coefficient vector, precoders held fixed.
#[derive(Debug, Clone, PartialEq)]
pub struct SeGradients {
    pub positions: Vec<Vec3>,
    pub patterns: Vec<Vec<f64>>,
}

/// `∂R/∂h_{u,m,g}` in the sense `dR = Re Σ G_{u,m,g} dh_{u,m,g}`, laid out
/// like the channel tensor's rows (`[g][u][m]`).
fn channel_sensitivities(channel: &ChannelTensor, precoders: &PrecoderSet, noise: f64) -> Vec<C64> {
    let (u_count, m_count, g_count) = (channel.num_ues(), channel.num_antennas(), channel.num_subcarriers());
    let scale = 2.0 / std::f64::consts::LN_2;
    let mut out = vec![C64::new(0.0, 0.0); u_count * m_count * g_count];
    let mut amps = vec![C64::new(0.0, 0.0); u_count];
    let mut coef = vec![C64::new(0.0, 0.0); u_count];
    for g in 0..g_count {
        let w = &precoders.matrices[g];
        for u in 0..u_count {
            let row = channel.row(u, g);
            for (v, a) in amps.iter_mut().enumerate() {
                *a = amplitude(row, w, v);
            }
            let total: f64 = amps.iter().map(|a| a.norm_sqr()).sum::<f64>() + noise;
            let interference = total - amps[u].norm_sqr();
            for v in 0..u_count {
                let weight = if v == u {
                    1.0 / total
                } else {
                    1.0 / total - 1.0 / interference
                };
                coef[v] = amps[v].conj() * (scale * weight);
            }
            let base = (g * u_count + u) * m_count;
            for m in 0..m_count {
                out[base + m] = (0..u_count).map(|v| coef[v] * w[(m, v)]).sum();
            }
        }
    }
    out
}

pub fn se_gradients(model: &ChannelModel<'_>, state: &AntennaState, precoders: &PrecoderSet) -> SeGradients {
    let sc = model.scenario();
    let (u_count, m_count, g_count) = (sc.num_ues(), sc.num_antennas(), sc.num_subcarriers());
    let k_count = sc.config.num_basis();
    let kappa = 2.0 * std::f64::consts::PI / sc.wavelength();
    let channel = model.evaluate(state, Scheme::Mara);
    let sens = channel_sensitivities(&channel, precoders, noise(model));

    let mut positions = vec![[0.0; 3]; m_count];
    let mut patterns = vec![vec![0.0; k_count]; m_count];
    for u in 0..u_count {
        let ue = &model.ues[u];
        let paths = ue.tx_waves.len();
        for m in 0..m_count {
            let p = &state.positions[m];
            let gains = ue.omega.apply_unchecked(&state.patterns[m]);
            for i in 0..paths {
                let k = &ue.tx_waves[i];
                let b = C64::from_polar(1.0, -kappa * crate::dot3(k, p));
                let s: C64 = (0..g_count)
                    .map(|g| sens[(g * u_count + u) * m_count + m] * ue.rx_times_gain[g][i])
                    .sum();
                let bs = b * s;
                let dir = kappa * gains[i] * bs.im;
                for c in 0..3 {
                    positions[m][c] += dir * k[c];
                }
                for (kk, grad) in patterns[m].iter_mut().enumerate() {
                    *grad += ue.omega.0[(i, kk)] * bs.re;
                }
            }
        }
    }
    SeGradients { positions, patterns }
}

/// Gradient of the sum SE with respect to antenna `m`'s position.
pub fn se_gradient_positions(
    model: &ChannelModel<'_>,
    state: &AntennaState,
    precoders: &PrecoderSet,
    m: usize,
) -> Vec3 {
    se_gradients(model, state, precoders).positions[m]
}

/// Euclidean gradient of the sum SE with respect to `α_m`.
pub fn se_gradient_patterns(
    model: &ChannelModel<'_>,
    state: &AntennaState,
    precoders: &PrecoderSet,
    m: usize,
) -> Vec<f64> {
    se_gradients(model, state, precoders).patterns.swap_remove(m)
}

/// Component of `grad` tangent to the unit sphere at `alpha`:
/// `(I - ααᵀ) grad`.
pub fn tangential(alpha: &[f64], grad: &[f64]) -> Vec<f64> {
    let radial: f64 = alpha.iter().zip(grad).map(|(a, g)| a * g).sum();
    grad.iter().zip(alpha).map(|(g, a)| g - radial * a).collect()
}

// ---------------------------------------------------------------------------
// Block steps

fn project_to_ball(center: &Vec3, point: &Vec3, radius: f64) -> Vec3 {
    let offset = sub3(point, center);
    let dist = norm3(&offset);
    if dist <= radius {
        return *point;
    }
    let mut scale = radius / dist;
    let mut out = [0.0; 3];
    for _ in 0..4 {
        for c in 0..3 {
            out[c] = center[c] + offset[c] * scale;
        }
        if norm3(&sub3(&out, center)) <= radius {
            break;
        }
        scale *= 1.0 - 4.0 * f64::EPSILON;
    }
    out
}

/// Variables a block step updates.
#[derive(Clone, Copy, PartialEq, Eq)]
enum Block {
    Positions,
    Patterns,
}

/// Relative first-order gain below which a point counts as stationary.
const STATIONARY_TOL: f64 = 1e-12;
/// Replacing the best start requires at least this relative improvement.
const RESTART_MARGIN: f64 = 1e-12;

struct BlockSolver<'s, 'a> {
    model: &'s ChannelModel<'a>,
    precoders: &'s PrecoderSet,
    opts: &'s OptimOptions,
    block: Block,
}

impl BlockSolver<'_, '_> {
    fn eval(&self, state: &AntennaState) -> f64 {
        objective(self.model, state, self.precoders)
    }

    fn radius(&self) -> f64 {
        self.model.scenario().config.movement_radius()
    }

    fn retract(&self, state: &mut AntennaState) {
        match self.block {
            Block::Positions => {
                let r = self.radius();
                let centers = &self.model.scenario().initial_positions;
                for (p, c) in state.positions.iter_mut().zip(centers) {
                    *p = project_to_ball(c, p, r);
                }
            }
            Block::Patterns => {
                for a in &mut state.patterns {
                    *a = a.normalized();
                }
            }
        }
    }

    /// Ascent direction scaled so its largest per-antenna block has unit
    /// norm, the raw gradient for the Armijo test, and that largest norm.
    fn direction(&self, state: &AntennaState) -> (Vec<Vec<f64>>, Vec<Vec<f64>>, f64) {
        let grads = se_gradients(self.model, state, self.precoders);
        let (raw, dir): (Vec<Vec<f64>>, Vec<Vec<f64>>) = match self.block {
            Block::Positions => {
                let raw: Vec<Vec<f64>> = grads.positions.iter().map(|g| g.to_vec()).collect();
                (raw.clone(), raw)
            }
            Block::Patterns => {
                let dir = grads
                    .patterns
                    .iter()
                    .zip(&state.patterns)
                    .map(|(g, a)| tangential(a, g))
                    .collect();
                (grads.patterns, dir)
            }
        };
        let largest = dir
            .iter()
            .map(|d| d.iter().map(|x| x * x).sum::<f64>().sqrt())
            .fold(0.0, f64::max);
        if largest == 0.0 || !largest.is_finite() {
            return (raw, Vec::new(), 0.0);
        }
        let dir = dir
            .into_iter()
            .map(|d| d.into_iter().map(|x| x / largest).collect())
            .collect();
        (raw, dir, largest)
    }

    fn displaced(&self, state: &AntennaState, dir: &[Vec<f64>], step: f64) -> AntennaState {
        let mut next = state.clone();
        match self.block {
            Block::Positions => {
                for (p, d) in next.positions.iter_mut().zip(dir) {
                    for c in 0..3 {
                        p[c] += step * d[c];
                    }
                }
            }
            Block::Patterns => {
                for (a, d) in next.patterns.iter_mut().zip(dir) {
                    for (x, dx) in a.0.iter_mut().zip(d) {
                        *x += step * dx;
                    }
                }
            }
        }
        self.retract(&mut next);
        next
    }

    fn inner_product(&self, raw: &[Vec<f64>], from: &AntennaState, to: &AntennaState) -> f64 {
        match self.block {
            Block::Positions => raw
                .iter()
                .zip(from.positions.iter().zip(&to.positions))
                .map(|(g, (a, b))| (0..3).map(|c| g[c] * (b[c] - a[c])).sum::<f64>())
                .sum(),
            Block::Patterns => raw
                .iter()
                .zip(from.patterns.iter().zip(&to.patterns))
                .map(|(g, (a, b))| g.iter().zip(a.iter().zip(b.iter())).map(|(g, (a, b))| g * (b - a)).sum::<f64>())
                .sum(),
        }
    }

    fn step_bounds(&self) -> (f64, f64, f64) {
        let d = self.model.scenario().config.antenna_spacing_m();
        match self.block {
            Block::Positions => (self.opts.position_step * d, 2.0 * self.radius(), 1e-12 * d),
            Block::Patterns => (self.opts.pattern_step, std::f64::consts::PI, 1e-14),
        }
    }

    /// Monotone projected/retracted gradient ascent from `state`.
    fn ascend(&self, mut state: AntennaState, mut value: f64) -> (AntennaState, f64) {
        let (mut step, max_step, min_step) = self.step_bounds();
        let ratio = self.opts.backtrack_ratio;
        for _ in 0..self.opts.inner_grad_iters {
            let (raw, dir, slope) = self.direction(&state);
            // A first-order gain below roundoff over the longest step means
            // the point is stationary; normalizing such a gradient would
            // only chase noise.
            if dir.is_empty() || slope * max_step <= STATIONARY_TOL * value.abs() {
                break;
            }
            let mut accepted = None;
            while step >= min_step {
                let cand = self.displaced(&state, &dir, step);
                let cand_value = self.eval(&cand);
                let predicted = self.inner_product(&raw, &state, &cand);
                if cand_value >= value + self.opts.armijo_c * predicted && cand_value >= value {
                    accepted = Some((cand, cand_value));
                    break;
                }
                step *= ratio;
            }
            let Some((cand, cand_value)) = accepted else {
                break;
            };
            let gain = cand_value - value;
            state = cand;
            value = cand_value;
            step = (step / ratio).min(max_step);
            if gain <= 1e-3 * self.opts.tol_rel * value.abs().max(1e-300) {
                break;
            }
        }
        (state, value)
    }

    fn random_start(&self, base: &AntennaState, rng: &mut ChaCha8Rng) -> AntennaState {
        let mut state = base.clone();
        match self.block {
            Block::Positions => {
                let r = self.radius();
                let centers = &self.model.scenario().initial_positions;
                for (p, c) in state.positions.iter_mut().zip(centers) {
                    let dir: [f64; 3] = UnitSphere.sample(rng);
                    let s = r * rng.random::<f64>().cbrt();
                    *p = project_to_ball(c, &[c[0] + s * dir[0], c[1] + s * dir[1], c[2] + s * dir[2]], r);
                }
            }
            Block::Patterns => {
                for a in &mut state.patterns {
                    let v: Vec<f64> = (0..a.len()).map(|_| StandardNormal.sample(rng)).collect();
                    *a = PatternCoefficients(v).normalized();
                }
            }
        }
        state
    }

    /// Best of `restarts` ascents; start 0 is `incoming` (after retraction).
    fn solve(&self, incoming: &AntennaState) -> (AntennaState, f64) {
        let mut start = incoming.clone();
        self.retract(&mut start);
        let start_value = self.eval(&start);
        if self.opts.inner_grad_iters == 0 {
            return (start, start_value);
        }
        let (mut best, mut best_value) = self.ascend(start, start_value);
        for r in 1..self.opts.restarts {
            let mut rng = ChaCha8Rng::seed_from_u64(self.opts.seed.wrapping_add(r as u64));
            let init = self.random_start(incoming, &mut rng);
            let init_value = self.eval(&init);
            let (cand, value) = self.ascend(init, init_value);
            if value > best_value + RESTART_MARGIN * best_value.abs() {
                best = cand;
                best_value = value;
            }
        }
        (best, best_value)
    }
}

fn block_solver<'s, 'a>(
    model: &'s ChannelModel<'a>,
    precoders: &'s PrecoderSet,
    opts: &'s OptimOptions,
    block: Block,
) -> BlockSolver<'s, 'a> {
    BlockSolver {
        model,
        precoders,
        opts,
        block,
    }
}

/// Projected gradient ascent over positions inside each antenna's ball,
/// precoders fixed.
pub fn optimize_positions(
    model: &ChannelModel<'_>,
    scheme: Scheme,
    state: &AntennaState,
    precoders: &PrecoderSet,
    opts: &OptimOptions,
) -> Result<AntennaState> {
    if !scheme.moves_positions() {
        return Err(Error::Contract(format!("{scheme} does not move antennas")));
    }
    opts.validate()?;
    Ok(block_solver(model, precoders, opts, Block::Positions).solve(state).0)
}

/// Gradient ascent over the coefficient spheres, precoders fixed.
pub fn optimize_patterns(
    model: &ChannelModel<'_>,
    scheme: Scheme,
    state: &AntennaState,
    precoders: &PrecoderSet,
    opts: &OptimOptions,
) -> Result<AntennaState> {
    if !scheme.reshapes_patterns() {
        return Err(Error::Contract(format!("{scheme} has fixed radiation patterns")));
    }
    opts.validate()?;
    Ok(block_solver(model, precoders, opts, Block::Patterns).solve(state).0)
}

// ---------------------------------------------------------------------------
// Alternating solver

/// Best precoders among the incumbent, ZF and MRT; ties keep the earlier
/// candidate.
fn precoder_step(
    model: &ChannelModel<'_>,
    state: &AntennaState,
    incumbent: Option<&PrecoderSet>,
) -> (PrecoderSet, f64) {
    let cfg = &model.scenario().config;
    let channel = model.evaluate(state, Scheme::Mara);
    let mut best: Option<(PrecoderSet, f64)> = incumbent.map(|w| {
        let v = sum_se_unchecked(&channel, w, cfg.noise_power_w);
        (w.clone(), v)
    });
    for method in [PrecoderMethod::ZeroForcing, PrecoderMethod::MatchedFilter] {
        let Ok(w) = digital_precoder(&channel, cfg.total_power_w, cfg.noise_power_w, method) else {
            continue;
        };
        let v = sum_se_unchecked(&channel, &w, cfg.noise_power_w);
        if best.as_ref().is_none_or(|(_, b)| v > *b) {
            best = Some((w, v));
        }
    }
    best.expect("matched filtering always succeeds")
}

fn run_scheme(
    model: &ChannelModel<'_>,
    scheme: Scheme,
    start: AntennaState,
    start_precoders: Option<PrecoderSet>,
    opts: &OptimOptions,
) -> OptimResult {
    let clock = std::time::Instant::now();
    let (mut precoders, mut value) = precoder_step(model, &start, start_precoders.as_ref());
    let mut state = start;
    let mut trace = Vec::new();
    if scheme == Scheme::Tfa {
        return OptimResult {
            scheme,
            state,
            precoders,
            se_trace: vec![value],
            iterations: 1,
            converged: true,
            wall_time_s: clock.elapsed().as_secs_f64(),
        };
    }

    let mut converged = false;
    let mut iterations = 0;
    let mut previous = value;
    for _ in 0..opts.max_outer_iters.max(1) {
        iterations += 1;
        if scheme.moves_positions() {
            state = block_solver(model, &precoders, opts, Block::Positions).solve(&state).0;
            (precoders, value) = precoder_step(model, &state, Some(&precoders));
        }
        if scheme.reshapes_patterns() {
            state = block_solver(model, &precoders, opts, Block::Patterns).solve(&state).0;
            (precoders, value) = precoder_step(model, &state, Some(&precoders));
        }
        trace.push(value);
        if value - previous <= opts.tol_rel * previous.abs() {
            converged = true;
            break;
        }
        previous = value;
    }
    OptimResult {
        scheme,
        state,
        precoders,
        se_trace: trace,
        iterations,
        converged,
        wall_time_s: clock.elapsed().as_secs_f64(),
    }
}

/// Solves `schemes` on one scenario, sharing warm starts: SMA and ERA start
/// from the TFA solution and MARA from the better of SMA and ERA. Results
/// follow the order of `schemes`.
pub fn solve_schemes(
    model: &ChannelModel<'_>,
    schemes: &[Scheme],
    opts: &OptimOptions,
) -> Result<Vec<OptimResult>> {
    opts.validate()?;
    let want = |s: Scheme| schemes.contains(&s);
    let need_mara = want(Scheme::Mara);
    let need_sma = want(Scheme::Sma) || need_mara;
    let need_era = want(Scheme::Era) || need_mara;

    let tfa = run_scheme(model, Scheme::Tfa, AntennaState::initial(model.scenario()), None, opts);
    let from_tfa = |scheme| run_scheme(model, scheme, tfa.state.clone(), Some(tfa.precoders.clone()), opts);
    let sma = need_sma.then(|| from_tfa(Scheme::Sma));
    let era = need_era.then(|| from_tfa(Scheme::Era));
    let mara = need_mara.then(|| {
        let (sma, era) = (sma.as_ref().unwrap(), era.as_ref().unwrap());
        let seed = if era.final_se() > sma.final_se() { era } else { sma };
        run_scheme(model, Scheme::Mara, seed.state.clone(), Some(seed.precoders.clone()), opts)
    });

    let slots = [Some(tfa), sma, era, mara];
    schemes
        .iter()
        .map(|s| {
            let idx = Scheme::ALL.iter().position(|x| x == s).expect("known scheme");
            slots[idx]
                .clone()
                .ok_or_else(|| Error::Contract(format!("{s} was not solved")))
        })
        .collect()
}

/// Solves one scheme, including the warm-start chain it depends on.
pub fn alternating_optimize(
    model: &ChannelModel<'_>,
    scheme: Scheme,
    opts: &OptimOptions,
) -> Result<OptimResult> {
    Ok(solve_schemes(model, &[scheme], opts)?.remove(0))
}

// ---------------------------------------------------------------------------
// Brute force

/// Candidate evaluations allowed in one brute-force search.
pub const BRUTE_FORCE_LIMIT: u64 = 10_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct BruteForceOptions {
    /// Grid spacing in meters.
    pub grid_step: f64,
    /// Axes spanned by the grid; disabled axes stay at the ball center.
    pub axes: [bool; 3],
    /// Re-derive precoders for every candidate instead of keeping them fixed.
    pub rederive: Option<PrecoderMethod>,
}

impl BruteForceOptions {
    pub fn new(grid_step: f64) -> Self {
        BruteForceOptions {
            grid_step,
            axes: [true; 3],
            rederive: None,
        }
    }
}

fn grid_offsets(radius: f64, opts: &BruteForceOptions) -> (Vec<Vec3>, u64) {
    let n = if opts.grid_step > 0.0 {
        (radius / opts.grid_step).floor() as i64
    } else {
        i64::MAX / 4
    };
    let span = |on: bool| if on { 2 * n as u64 + 1 } else { 1 };
    let bound = opts
        .axes
        .iter()
        .map(|&on| span(on))
        .fold(1u64, |a, b| a.saturating_mul(b));
    if bound > BRUTE_FORCE_LIMIT {
        return (Vec::new(), bound);
    }
    let range = |on: bool| if on { -n..=n } else { 0..=0 };
    let mut out = Vec::new();
    for i in range(opts.axes[0]) {
        for j in range(opts.axes[1]) {
            for k in range(opts.axes[2]) {
                let o = [
                    i as f64 * opts.grid_step,
                    j as f64 * opts.grid_step,
                    k as f64 * opts.grid_step,
                ];
                if norm3(&o) <= radius {
                    out.push(o);
                }
            }
        }
    }
    (out, bound)
}

/// Coordinate-wise exhaustive search: antenna by antenna in index order, the
/// incoming position and every grid point inside the ball are evaluated and
/// the best kept (ties go to the earliest candidate).
pub fn brute_force_positions(
    model: &ChannelModel<'_>,
    state: &AntennaState,
    precoders: &PrecoderSet,
    opts: &BruteForceOptions,
) -> Result<AntennaState> {
    let sc = model.scenario();
    let radius = sc.config.movement_radius();
    let (offsets, bound) = grid_offsets(radius, opts);
    let total = bound.saturating_mul(sc.num_antennas() as u64);
    if total > BRUTE_FORCE_LIMIT {
        return Err(Error::SizeGuard {
            points: total,
            limit: BRUTE_FORCE_LIMIT,
        });
    }
    let cfg = &sc.config;
    let evaluate = |s: &AntennaState| -> Option<f64> {
        match opts.rederive {
            None => Some(objective(model, s, precoders)),
            Some(method) => {
                let channel = model.evaluate(s, Scheme::Mara);
                let w = digital_precoder(&channel, cfg.total_power_w, cfg.noise_power_w, method).ok()?;
                Some(sum_se_unchecked(&channel, &w, cfg.noise_power_w))
            }
        }
    };

    let mut current = state.clone();
    let mut current_value = evaluate(&current).unwrap_or(f64::NEG_INFINITY);
    for m in 0..sc.num_antennas() {
        let center = sc.initial_positions[m];
        let mut best_pos = current.positions[m];
        for o in &offsets {
            let mut cand = current.clone();
            cand.positions[m] = [center[0] + o[0], center[1] + o[1], center[2] + o[2]];
            if let Some(v) = evaluate(&cand) {
                if v > current_value {
                    current_value = v;
                    best_pos = cand.positions[m];
                }
            }
        }
        current.positions[m] = best_pos;
    }
    Ok(current)
}

/// Leading eigenvector of `Re(q qᴴ)`: the unit real `α` maximizing
/// `|qᴴα|²`.
pub fn rank_one_pattern(q: &[C64]) -> Vec<f64> {
    let k = q.len();
    let gram = DMatrix::from_fn(k, k, |a, b| (q[a] * q[b].conj()).re);
    let eig = gram.symmetric_eigen();
    let idx = eig.eigenvalues.imax();
    let v: DVector<f64> = eig.eigenvectors.column(idx).into_owned();
    v.iter().copied().collect()
}
