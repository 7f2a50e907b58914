//! System configuration, seeded problem instances and the OFDM subcarrier grid.

use std::f64::consts::PI;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, UnitSphere};
use serde::{Deserialize, Serialize};

use crate::{Error, Result, Vec3, C64};

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Antenna architecture evaluated at the base station.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Scheme {
    /// Fixed position, fixed isotropic pattern.
    #[serde(rename = "TFA")]
    Tfa,
    /// Movable position, fixed isotropic pattern.
    #[serde(rename = "SMA")]
    Sma,
    /// Fixed position, reconfigurable pattern.
    #[serde(rename = "ERA")]
    Era,
    /// Movable position and reconfigurable pattern.
    #[serde(rename = "MARA")]
    Mara,
}

impl Scheme {
    pub const ALL: [Scheme; 4] = [Scheme::Tfa, Scheme::Sma, Scheme::Era, Scheme::Mara];

    pub fn moves_positions(self) -> bool {
        matches!(self, Scheme::Sma | Scheme::Mara)
    }

    pub fn reshapes_patterns(self) -> bool {
        matches!(self, Scheme::Era | Scheme::Mara)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::Tfa => "TFA",
            Scheme::Sma => "SMA",
            Scheme::Era => "ERA",
            Scheme::Mara => "MARA",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "TFA" => Ok(Scheme::Tfa),
            "SMA" => Ok(Scheme::Sma),
            "ERA" => Ok(Scheme::Era),
            "MARA" => Ok(Scheme::Mara),
            other => Err(Error::validation(
                "schemes",
                format!("unknown scheme `{other}` (expected TFA, SMA, ERA or MARA)"),
            )),
        }
    }
}

fn default_spacing() -> f64 {
    0.5
}

/// Validated system parameters. Field names are the JSON keys.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    pub carrier_frequency_hz: f64,
    pub num_subcarriers: usize,
    pub subcarrier_spacing_hz: f64,
    pub num_ues: usize,
    pub num_bs_antennas: usize,
    /// Initial inter-antenna spacing in carrier wavelengths.
    #[serde(default = "default_spacing")]
    pub antenna_spacing_wavelengths: f64,
    pub num_paths_per_ue: usize,
    pub max_delay_s: f64,
    pub total_power_w: f64,
    pub noise_power_w: f64,
    pub shod_max_degree: usize,
    pub seed: u64,
    pub schemes: Vec<Scheme>,
}

/// JSON keys accepted in a configuration file.
pub const CONFIG_KEYS: [&str; 13] = [
    "carrier_frequency_hz",
    "num_subcarriers",
    "subcarrier_spacing_hz",
    "num_ues",
    "num_bs_antennas",
    "antenna_spacing_wavelengths",
    "num_paths_per_ue",
    "max_delay_s",
    "total_power_w",
    "noise_power_w",
    "shod_max_degree",
    "seed",
    "schemes",
];

impl SystemConfig {
    /// Reference configuration: 3.5 GHz carrier, M=4, U=2, G=8, L=6, N=2.
    pub fn reference() -> Self {
        SystemConfig {
            carrier_frequency_hz: 3.5e9,
            num_subcarriers: 8,
            subcarrier_spacing_hz: 30e3,
            num_ues: 2,
            num_bs_antennas: 4,
            antenna_spacing_wavelengths: 0.5,
            num_paths_per_ue: 6,
            max_delay_s: 1e-6,
            total_power_w: 1.0,
            noise_power_w: 1.0,
            shod_max_degree: 2,
            seed: 1,
            schemes: Scheme::ALL.to_vec(),
        }
    }

    pub fn wavelength(&self) -> f64 {
        SPEED_OF_LIGHT / self.carrier_frequency_hz
    }

    /// Initial inter-antenna spacing `d` in meters.
    pub fn antenna_spacing_m(&self) -> f64 {
        self.antenna_spacing_wavelengths * self.wavelength()
    }

    /// Number of pattern basis functions, `(N+1)^2`.
    pub fn num_basis(&self) -> usize {
        (self.shod_max_degree + 1) * (self.shod_max_degree + 1)
    }

    /// Radius of each antenna's movement ball: `d/2 - 1e-6 d`.
    pub fn movement_radius(&self) -> f64 {
        let d = self.antenna_spacing_m();
        0.5 * d - 1e-6 * d
    }

    pub fn validate(&self) -> Result<()> {
        fn positive(field: &str, v: f64) -> Result<()> {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::validation(field, format!("must be positive and finite, got {v}")))
            }
        }
        positive("carrier_frequency_hz", self.carrier_frequency_hz)?;
        if !(self.subcarrier_spacing_hz.is_finite() && self.subcarrier_spacing_hz >= 0.0) {
            return Err(Error::validation("subcarrier_spacing_hz", "must be finite and ≥ 0"));
        }
        if self.num_subcarriers < 1 {
            return Err(Error::validation("num_subcarriers", "G ≥ 1 required"));
        }
        if self.num_ues < 1 {
            return Err(Error::validation("num_ues", "U ≥ 1 required"));
        }
        if self.num_bs_antennas < self.num_ues {
            return Err(Error::validation("num_bs_antennas", "M ≥ U required"));
        }
        if self.num_paths_per_ue < 1 {
            return Err(Error::validation("num_paths_per_ue", "L ≥ 1 required"));
        }
        positive("antenna_spacing_wavelengths", self.antenna_spacing_wavelengths)?;
        if !(self.max_delay_s.is_finite() && self.max_delay_s >= 0.0) {
            return Err(Error::validation("max_delay_s", "must be finite and ≥ 0"));
        }
        positive("total_power_w", self.total_power_w)?;
        positive("noise_power_w", self.noise_power_w)?;
        if self.schemes.is_empty() {
            return Err(Error::validation("schemes", "at least one scheme required"));
        }
        Ok(())
    }

    /// Parses and validates a JSON configuration.
    pub fn from_json_str(text: &str) -> Result<Self> {
        Self::from_json_with_overrides(text, &[])
    }

    /// Parses a JSON configuration, applies `key=value` overrides, then
    /// validates. Override values are read as JSON, falling back to a bare
    /// string; `schemes` also accepts a comma-separated list.
    pub fn from_json_with_overrides(text: &str, overrides: &[(String, String)]) -> Result<Self> {
        let config: SystemConfig = serde_json::from_str(text).map_err(json_error)?;
        let config = if overrides.is_empty() {
            config
        } else {
            let mut value = serde_json::to_value(&config).expect("config serializes");
            let map = value.as_object_mut().expect("config is an object");
            for (key, raw) in overrides {
                if !CONFIG_KEYS.contains(&key.as_str()) {
                    return Err(Error::UnknownKey(key.clone()));
                }
                map.insert(key.clone(), override_value(key, raw));
            }
            serde_json::from_value(value).map_err(|e| Error::Validation {
                field: "override".into(),
                message: e.to_string(),
            })?
        };
        config.validate()?;
        Ok(config)
    }
}

fn override_value(key: &str, raw: &str) -> serde_json::Value {
    if let Ok(v) = serde_json::from_str::<serde_json::Value>(raw) {
        return v;
    }
    if key == "schemes" {
        return serde_json::Value::Array(
            raw.split(',')
                .map(|s| serde_json::Value::String(s.trim().to_ascii_uppercase()))
                .collect(),
        );
    }
    serde_json::Value::String(raw.to_string())
}

fn json_error(e: serde_json::Error) -> Error {
    Error::Config {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    }
}

/// Reads, parses and validates a configuration file.
pub fn load_config(path: impl AsRef<Path>) -> Result<SystemConfig> {
    load_config_with_overrides(path, &[])
}

pub fn load_config_with_overrides(
    path: impl AsRef<Path>,
    overrides: &[(String, String)],
) -> Result<SystemConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    SystemConfig::from_json_with_overrides(&text, overrides)
}

/// One propagation path between the base station and a UE.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagationPath {
    /// Complex gain `x̃`.
    pub gain: C64,
    /// Unit wave vector at the transmitter.
    pub tx_wave: Vec3,
    /// Unit wave vector at the receiver.
    pub rx_wave: Vec3,
    /// Propagation delay, seconds.
    pub delay: f64,
}

/// Multipath parameters of a single UE.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PathSet {
    pub paths: Vec<PropagationPath>,
}

impl PathSet {
    pub fn new(paths: Vec<PropagationPath>) -> Self {
        PathSet { paths }
    }

    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }
}

/// Annulus in the horizontal plane from which UE positions are drawn.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UePlacement {
    pub min_radius_m: f64,
    pub max_radius_m: f64,
}

impl Default for UePlacement {
    fn default() -> Self {
        UePlacement {
            min_radius_m: 20.0,
            max_radius_m: 200.0,
        }
    }
}

/// Complete, immutable problem instance.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub config: SystemConfig,
    /// Nominal antenna positions `p⁰`: a uniform linear array along x.
    pub initial_positions: Vec<Vec3>,
    pub ue_positions: Vec<Vec3>,
    pub path_sets: Vec<PathSet>,
    pub subcarrier_frequencies: Vec<f64>,
}

impl Scenario {
    pub fn num_ues(&self) -> usize {
        self.config.num_ues
    }

    pub fn num_antennas(&self) -> usize {
        self.config.num_bs_antennas
    }

    pub fn num_subcarriers(&self) -> usize {
        self.config.num_subcarriers
    }

    pub fn wavelength(&self) -> f64 {
        self.config.wavelength()
    }
}

/// `f_g = f_c + (g - (G+1)/2) Δf` for `g = 1..G`.
pub fn subcarrier_frequencies(config: &SystemConfig) -> Vec<f64> {
    let g_count = config.num_subcarriers;
    let center = (g_count as f64 - 1.0) / 2.0;
    (0..g_count)
        .map(|g| config.carrier_frequency_hz + (g as f64 - center) * config.subcarrier_spacing_hz)
        .collect()
}

/// Uniform linear array along the x-axis, centered on the origin.
pub fn initial_positions(config: &SystemConfig) -> Vec<Vec3> {
    let d = config.antenna_spacing_m();
    let center = (config.num_bs_antennas as f64 - 1.0) / 2.0;
    (0..config.num_bs_antennas)
        .map(|m| [(m as f64 - center) * d, 0.0, 0.0])
        .collect()
}

pub fn generate_scenario(config: &SystemConfig) -> Result<Scenario> {
    generate_scenario_with(config, UePlacement::default())
}

/// Draws a scenario from `config.seed`.
///
/// Gains are CN(0, 1/L), wave vectors uniform on the unit sphere and delays
/// uniform on `[0, max_delay]`. The draw order is fixed (per UE: position,
/// then per path: gain, tx wave, rx wave, delay), so a seed always yields the
/// same instance.
pub fn generate_scenario_with(config: &SystemConfig, placement: UePlacement) -> Result<Scenario> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let paths_per_ue = config.num_paths_per_ue;
    let gain_std = (0.5 / paths_per_ue as f64).sqrt();

    let mut ue_positions = Vec::with_capacity(config.num_ues);
    let mut path_sets = Vec::with_capacity(config.num_ues);
    for _ in 0..config.num_ues {
        let r2_lo = placement.min_radius_m * placement.min_radius_m;
        let r2_hi = placement.max_radius_m * placement.max_radius_m;
        let radius = rng.random_range(r2_lo..=r2_hi).sqrt();
        let azimuth = rng.random_range(0.0..2.0 * PI);
        ue_positions.push([radius * azimuth.cos(), radius * azimuth.sin(), 0.0]);

        let paths = (0..paths_per_ue)
            .map(|_| {
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = StandardNormal.sample(&mut rng);
                let tx_wave = unit(UnitSphere.sample(&mut rng));
                let rx_wave = unit(UnitSphere.sample(&mut rng));
                let delay = if config.max_delay_s > 0.0 {
                    rng.random_range(0.0..=config.max_delay_s)
                } else {
                    0.0
                };
                PropagationPath {
                    gain: C64::new(re * gain_std, im * gain_std),
                    tx_wave,
                    rx_wave,
                    delay,
                }
            })
            .collect();
        path_sets.push(PathSet::new(paths));
    }

    Ok(Scenario {
        config: config.clone(),
        initial_positions: initial_positions(config),
        ue_positions,
        path_sets,
        subcarrier_frequencies: subcarrier_frequencies(config),
    })
}

fn unit(v: [f64; 3]) -> Vec3 {
    let n = crate::norm3(&v);
    [v[0] / n, v[1] / n, v[2] / n]
}
