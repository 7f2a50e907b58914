//! Downlink multi-user MIMO-OFDM simulation for base stations whose antennas
//! can move within a small region (SMA), reshape their radiation pattern
//! (ERA), or both (MARA).
//!
//! The crate is organised bottom-up:
//!
//! * [`scenario`] – configuration, seeded multipath instances, subcarrier grid.
//! * [`shod`] – real spherical-harmonic pattern basis and quadrature.
//! * [`channel`] – steering vectors, eCSI factorization, channel tensors.
//! * [`se`] – SINR and sum spectral efficiency.
//! * [`optim`] – precoding, position and pattern ascent, alternating solver.
//! * [`harness`] – multi-seed experiments, CSV and summary output.
//! * [`cli`] – the `mara-sim` command line.

pub mod channel;
pub mod cli;
pub mod diagnostics;
pub mod error;
pub mod harness;
pub mod optim;
pub mod scenario;
pub mod se;
pub mod shod;

pub use error::{Error, Result};

/// Complex sample type used throughout the crate.
pub type C64 = num_complex::Complex64;

/// Cartesian 3-vector in meters (positions) or dimensionless (wave vectors).
pub type Vec3 = [f64; 3];

pub(crate) fn dot3(a: &Vec3, b: &Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub(crate) fn norm3(a: &Vec3) -> f64 {
    dot3(a, a).sqrt()
}

pub(crate) fn sub3(a: &Vec3, b: &Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}
