//! Radiation patterns expanded in orthonormal real spherical harmonics.
//!
//! A pattern is `f(θ, φ) = Σ_k α_k ω_k(θ, φ)` with `ω_k` the real spherical
//! harmonics `Y_ℓm`, `ℓ = 0..=N`, `m = -ℓ..=ℓ`, flattened as
//! `k = ℓ² + ℓ + m`. They satisfy `∬ ω_k ω_k' sinθ dθ dφ = δ_kk'`, so the
//! radiated power of `f` equals `‖α‖²`.

use std::f64::consts::{PI, SQRT_2};
use std::num::NonZeroUsize;
use std::ops::Deref;

use gauss_quad::GaussLegendre;
use nalgebra::{DMatrix, DVector};

use crate::scenario::PathSet;
use crate::{Error, Result, Vec3};

/// Product quadrature node on the unit sphere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureNode {
    pub theta: f64,
    pub phi: f64,
    /// Includes the `sinθ` Jacobian (the rule integrates in `cosθ`).
    pub weight: f64,
}

/// Orthonormal pattern basis of maximum degree `N` with `K = (N+1)²`
/// functions and a quadrature rule that integrates products of any two of
/// them exactly.
#[derive(Debug, Clone)]
pub struct BasisSet {
    max_degree: usize,
    nodes: Vec<QuadratureNode>,
    /// Basis values at the quadrature nodes, one row per node.
    node_values: DMatrix<f64>,
}

/// Weighting coefficients `α` of a pattern.
#[derive(Debug, Clone, PartialEq)]
pub struct PatternCoefficients(pub Vec<f64>);

impl PatternCoefficients {
    /// `(1, 0, …, 0)`: the normalized isotropic pattern `1/√(4π)`.
    pub fn isotropic(num_basis: usize) -> Self {
        let mut v = vec![0.0; num_basis];
        v[0] = 1.0;
        PatternCoefficients(v)
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|a| a * a).sum::<f64>().sqrt()
    }

    /// Scales onto the unit sphere. A zero vector maps to the isotropic one.
    pub fn normalized(&self) -> Self {
        let n = self.norm();
        if n == 0.0 {
            return Self::isotropic(self.0.len());
        }
        PatternCoefficients(self.0.iter().map(|a| a / n).collect())
    }
}

impl Deref for PatternCoefficients {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl From<Vec<f64>> for PatternCoefficients {
    fn from(v: Vec<f64>) -> Self {
        PatternCoefficients(v)
    }
}

impl BasisSet {
    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    /// `K = (N+1)²`.
    pub fn len(&self) -> usize {
        (self.max_degree + 1) * (self.max_degree + 1)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn quadrature(&self) -> &[QuadratureNode] {
        &self.nodes
    }

    /// All `K` basis values at `(θ, φ)`.
    pub fn evaluate(&self, theta: f64, phi: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.len()];
        real_harmonics_into(self.max_degree, theta, phi, &mut out);
        out
    }

    pub fn evaluate_into(&self, theta: f64, phi: f64, out: &mut [f64]) {
        real_harmonics_into(self.max_degree, theta, phi, out);
    }

    /// Gram matrix `∬ ω_k ω_k' dΩ` under the quadrature rule.
    pub fn gram(&self) -> DMatrix<f64> {
        let weights = DVector::from_iterator(self.nodes.len(), self.nodes.iter().map(|n| n.weight));
        let weighted = DMatrix::from_fn(self.node_values.nrows(), self.node_values.ncols(), |i, k| {
            self.node_values[(i, k)] * weights[i]
        });
        self.node_values.transpose() * weighted
    }

    fn check_dim(&self, alpha: &[f64]) -> Result<()> {
        if alpha.len() != self.len() {
            return Err(Error::Contract(format!(
                "pattern has {} coefficients, basis has {}",
                alpha.len(),
                self.len()
            )));
        }
        Ok(())
    }
}

/// Builds the degree-`N` basis with a Gauss–Legendre (in `cosθ`) × uniform
/// `φ` product rule of `2(N+1)` × `2(2N+1)` nodes.
pub fn build_basis(max_degree: usize) -> BasisSet {
    let polar = 2 * (max_degree + 1);
    let azimuthal = 2 * (2 * max_degree + 1);
    let rule = GaussLegendre::new(NonZeroUsize::new(polar).expect("polar node count is nonzero"));
    let dphi = 2.0 * PI / azimuthal as f64;

    let mut nodes = Vec::with_capacity(polar * azimuthal);
    for &(x, w) in rule.as_node_weight_pairs() {
        let theta = x.clamp(-1.0, 1.0).acos();
        for j in 0..azimuthal {
            nodes.push(QuadratureNode {
                theta,
                phi: j as f64 * dphi,
                weight: w * dphi,
            });
        }
    }

    let k = (max_degree + 1) * (max_degree + 1);
    let mut node_values = DMatrix::zeros(nodes.len(), k);
    let mut row = vec![0.0; k];
    for (i, n) in nodes.iter().enumerate() {
        real_harmonics_into(max_degree, n.theta, n.phi, &mut row);
        for (c, v) in row.iter().enumerate() {
            node_values[(i, c)] = *v;
        }
    }

    BasisSet {
        max_degree,
        nodes,
        node_values,
    }
}

/// Real spherical harmonics up to degree `max_degree`, no Condon–Shortley
/// phase. Uses the fully normalized associated Legendre recursion.
fn real_harmonics_into(max_degree: usize, theta: f64, phi: f64, out: &mut [f64]) {
    debug_assert_eq!(out.len(), (max_degree + 1) * (max_degree + 1));
    let (s, x) = theta.sin_cos();
    let mut pmm = 1.0 / (4.0 * PI).sqrt();
    for m in 0..=max_degree {
        if m > 0 {
            let mf = m as f64;
            pmm *= ((2.0 * mf + 1.0) / (2.0 * mf)).sqrt() * s;
        }
        let (sin_m, cos_m) = (m as f64 * phi).sin_cos();
        let mut store = |l: usize, p: f64| {
            let base = l * l + l;
            if m == 0 {
                out[base] = p;
            } else {
                out[base + m] = SQRT_2 * p * cos_m;
                out[base - m] = SQRT_2 * p * sin_m;
            }
        };

        store(m, pmm);
        if m == max_degree {
            break;
        }
        let mut prev2 = pmm;
        let mut prev1 = (2.0 * m as f64 + 3.0).sqrt() * x * pmm;
        store(m + 1, prev1);
        let m2 = (m * m) as f64;
        for l in (m + 2)..=max_degree {
            let lf = l as f64;
            let l1 = lf - 1.0;
            let a = ((4.0 * lf * lf - 1.0) / (lf * lf - m2)).sqrt();
            let b = ((l1 * l1 - m2) / (4.0 * l1 * l1 - 1.0)).sqrt();
            let p = a * (x * prev1 - b * prev2);
            store(l, p);
            prev2 = prev1;
            prev1 = p;
        }
    }
}

/// `f(θ, φ) = Σ_k α_k ω_k(θ, φ)`.
pub fn pattern_gain(basis: &BasisSet, alpha: &[f64], theta: f64, phi: f64) -> Result<f64> {
    basis.check_dim(alpha)?;
    let w = basis.evaluate(theta, phi);
    Ok(w.iter().zip(alpha).map(|(w, a)| w * a).sum())
}

/// Quadrature value of `∬ |f(θ, φ)|² sinθ dθ dφ`.
pub fn pattern_power(basis: &BasisSet, alpha: &[f64]) -> Result<f64> {
    basis.check_dim(alpha)?;
    let a = DVector::from_column_slice(alpha);
    let f = &basis.node_values * a;
    Ok(basis
        .nodes
        .iter()
        .zip(f.iter())
        .map(|(n, v)| n.weight * v * v)
        .sum())
}

/// Departure angles of a unit wave vector: `θ = arccos k_z`,
/// `φ = atan2(k_y, k_x)` in `[0, 2π)`.
pub fn departure_angles(k: &Vec3) -> (f64, f64) {
    let theta = k[2].clamp(-1.0, 1.0).acos();
    let mut phi = k[1].atan2(k[0]);
    if phi < 0.0 {
        phi += 2.0 * PI;
    }
    if phi >= 2.0 * PI {
        phi = 0.0;
    }
    (theta, phi)
}

/// `Ω_u` with `[Ω_u]_{i,k} = ω_k(θ_i, φ_i)` at each path's departure angles.
#[derive(Debug, Clone, PartialEq)]
pub struct OmegaMatrix(pub DMatrix<f64>);

impl OmegaMatrix {
    pub fn num_paths(&self) -> usize {
        self.0.nrows()
    }

    pub fn num_basis(&self) -> usize {
        self.0.ncols()
    }

    /// Pattern gains toward every path: `Ω α`.
    pub fn apply(&self, alpha: &[f64]) -> Result<Vec<f64>> {
        if alpha.len() != self.num_basis() {
            return Err(Error::Contract(format!(
                "pattern has {} coefficients, Ω has {} columns",
                alpha.len(),
                self.num_basis()
            )));
        }
        Ok(self.apply_unchecked(alpha))
    }

    pub(crate) fn apply_unchecked(&self, alpha: &[f64]) -> Vec<f64> {
        let (rows, cols) = self.0.shape();
        (0..rows)
            .map(|i| (0..cols).map(|k| self.0[(i, k)] * alpha[k]).sum())
            .collect()
    }
}

pub fn build_omega(basis: &BasisSet, path_set: &PathSet) -> OmegaMatrix {
    let k = basis.len();
    let mut omega = DMatrix::zeros(path_set.len(), k);
    let mut row = vec![0.0; k];
    for (i, path) in path_set.paths.iter().enumerate() {
        let (theta, phi) = departure_angles(&path.tx_wave);
        basis.evaluate_into(theta, phi, &mut row);
        for (c, v) in row.iter().enumerate() {
            omega[(i, c)] = *v;
        }
    }
    OmegaMatrix(omega)
}
