//! TOML configuration files.
//!
//! A file holds exactly one of a `[physical]` or a `[dimensionless]` table, with an
//! optional top-level `mode` that must agree with it. Per-resonator keys (`*_j`)
//! accept either a list or a single value broadcast to every resonator.

use std::path::Path;

use serde::Deserialize;

use super::{
    occupancy_from_temperature, ChainParams, PhysicalParams, ThermalMode, DEFAULT_ZETA,
    SPEED_OF_LIGHT,
};
use crate::error::{Error, Result};

/// A parsed configuration: either lab-frame or dimensionless inputs.
#[derive(Debug, Clone, PartialEq)]
pub enum Config {
    Physical(PhysicalParams),
    Dimensionless(ChainParams),
}

impl Config {
    /// Dimensionless parameters, converting physical inputs if needed.
    pub fn chain(&self) -> Result<ChainParams> {
        match self {
            Config::Physical(p) => super::to_dimensionless(p),
            Config::Dimensionless(c) => Ok(c.clone()),
        }
    }

    pub fn mode(&self) -> &'static str {
        match self {
            Config::Physical(_) => "physical",
            Config::Dimensionless(_) => "dimensionless",
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum PerResonator {
    One(f64),
    Many(Vec<f64>),
}

impl PerResonator {
    fn len(&self) -> Option<usize> {
        match self {
            PerResonator::One(_) => None,
            PerResonator::Many(v) => Some(v.len()),
        }
    }

    fn expand(self, n: usize) -> Vec<f64> {
        match self {
            PerResonator::One(x) => vec![x; n],
            PerResonator::Many(v) => v,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Shape {
    mode: Option<String>,
    physical: Option<serde::de::IgnoredAny>,
    dimensionless: Option<serde::de::IgnoredAny>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFile {
    #[serde(rename = "mode")]
    _mode: Option<String>,
    physical: Option<RawPhysical>,
    dimensionless: Option<RawDimensionless>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDimensionless {
    #[serde(rename = "N")]
    n: Option<usize>,
    omega_j: Option<PerResonator>,
    gamma_j: PerResonator,
    eta_tilde_j: Option<PerResonator>,
    kappa: f64,
    #[serde(rename = "G")]
    coupling: f64,
    g_cd: f64,
    omega_fb: f64,
    zeta: Option<f64>,
    nbar_j: PerResonator,
    thermal_mode: Option<String>,
    #[serde(rename = "Delta")]
    detuning: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPhysical {
    #[serde(rename = "N")]
    n: Option<usize>,
    m_j: PerResonator,
    omega_tilde_j: PerResonator,
    eta_j: Option<PerResonator>,
    kappa: f64,
    #[serde(rename = "P_L")]
    power: f64,
    #[serde(rename = "omega_L")]
    omega_laser: Option<f64>,
    wavelength: Option<f64>,
    omega_c: f64,
    #[serde(rename = "L")]
    length: f64,
    gamma_j: PerResonator,
    nbar_j: Option<PerResonator>,
    #[serde(rename = "T_j")]
    temperature_j: Option<PerResonator>,
    zeta: Option<f64>,
    g_cd: f64,
    omega_fb: f64,
    thermal_mode: Option<String>,
    #[serde(rename = "Delta")]
    detuning: Option<f64>,
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

fn resonator_count(declared: Option<usize>, arrays: &[Option<usize>]) -> Result<usize> {
    let listed = arrays.iter().flatten().max().copied();
    match (declared, listed) {
        (Some(0), _) => Err(Error::config("N must be at least 1")),
        (Some(n), _) => Ok(n),
        (None, Some(n)) => Ok(n),
        (None, None) => Ok(1),
    }
}

fn zeta_or_default(zeta: Option<f64>) -> f64 {
    zeta.unwrap_or_else(|| {
        log::warn!("zeta not given; using detection efficiency {DEFAULT_ZETA}");
        DEFAULT_ZETA
    })
}

fn check_detuning(d: Option<f64>) -> Result<()> {
    match d {
        Some(x) if x != 0.0 => Err(Error::config(format!(
            "Delta = {x}: only zero effective detuning is supported"
        ))),
        _ => Ok(()),
    }
}

fn thermal_mode(s: Option<String>) -> Result<ThermalMode> {
    s.map_or(Ok(ThermalMode::Markovian), |s| s.parse())
}

fn link_count(n: usize) -> usize {
    n.saturating_sub(1)
}

impl RawDimensionless {
    fn finish(self) -> Result<ChainParams> {
        check_detuning(self.detuning)?;
        let n = resonator_count(
            self.n,
            &[
                self.omega_j.as_ref().and_then(PerResonator::len),
                self.gamma_j.len(),
                self.nbar_j.len(),
                self.eta_tilde_j.as_ref().and_then(PerResonator::len).map(|l| l + 1),
            ],
        )?;
        let chain = ChainParams {
            omega: self.omega_j.map_or(vec![1.0; n], |v| v.expand(n)),
            gamma: self.gamma_j.expand(n),
            eta_tilde: self
                .eta_tilde_j
                .map_or(vec![0.0; link_count(n)], |v| v.expand(link_count(n))),
            kappa: self.kappa,
            coupling: self.coupling,
            g_cd: self.g_cd,
            omega_fb: self.omega_fb,
            zeta: zeta_or_default(self.zeta),
            nbar: self.nbar_j.expand(n),
            thermal_mode: thermal_mode(self.thermal_mode)?,
        };
        chain.validate()?;
        Ok(chain)
    }
}

impl RawPhysical {
    fn finish(self) -> Result<PhysicalParams> {
        check_detuning(self.detuning)?;
        let n = resonator_count(
            self.n,
            &[
                self.m_j.len(),
                self.omega_tilde_j.len(),
                self.gamma_j.len(),
                self.nbar_j.as_ref().and_then(PerResonator::len),
                self.temperature_j.as_ref().and_then(PerResonator::len),
                self.eta_j.as_ref().and_then(PerResonator::len).map(|l| l + 1),
            ],
        )?;
        let omega_laser = match (self.omega_laser, self.wavelength) {
            (Some(w), None) => w,
            (None, Some(l)) if l > 0.0 => 2.0 * std::f64::consts::PI * SPEED_OF_LIGHT / l,
            (None, Some(l)) => {
                return Err(Error::config(format!("wavelength must be positive, got {l}")))
            }
            (Some(_), Some(_)) => {
                return Err(Error::config("give either omega_L or wavelength, not both"))
            }
            (None, None) => return Err(Error::config("missing omega_L (or wavelength)")),
        };
        let mut p = PhysicalParams {
            mass: self.m_j.expand(n),
            omega_tilde: self.omega_tilde_j.expand(n),
            eta: self
                .eta_j
                .map_or(vec![0.0; link_count(n)], |v| v.expand(link_count(n))),
            kappa: self.kappa,
            power: self.power,
            omega_laser,
            omega_cavity: self.omega_c,
            cavity_length: self.length,
            gamma: self.gamma_j.expand(n),
            nbar: Vec::new(),
            zeta: zeta_or_default(self.zeta),
            g_cd: self.g_cd,
            omega_fb: self.omega_fb,
            thermal_mode: thermal_mode(self.thermal_mode)?,
        };
        p.nbar = match (self.nbar_j, self.temperature_j) {
            (Some(nb), None) => nb.expand(n),
            (None, Some(t)) => {
                let t = t.expand(n);
                if t.len() != n {
                    return Err(Error::config(format!("T_j has {} entries, expected {n}", t.len())));
                }
                if let Some(bad) = t.iter().find(|&&x| !(x > 0.0)) {
                    return Err(Error::config(format!("T_j must be positive, got {bad}")));
                }
                // frequencies must be valid before they are used for the conversion
                p.nbar = vec![0.0; n];
                p.validate()?;
                p.normalized_frequencies()
                    .iter()
                    .zip(&t)
                    .map(|(&w, &tj)| occupancy_from_temperature(w, tj))
                    .collect()
            }
            (Some(_), Some(_)) => return Err(Error::config("give either nbar_j or T_j, not both")),
            (None, None) => return Err(Error::config("missing nbar_j (or T_j)")),
        };
        p.validate()?;
        Ok(p)
    }
}

/// Parses configuration text.
pub fn parse_config(text: &str) -> Result<Config> {
    let parse_err = |e: toml::de::Error| Error::Config {
        line: e.span().map(|s| line_of(text, s.start)),
        message: e.message().to_string(),
    };
    let shape: Shape = toml::from_str(text).map_err(parse_err)?;
    let mode = shape.mode.as_deref();
    match (mode, shape.physical.is_some(), shape.dimensionless.is_some()) {
        (_, true, true) => Err(Error::config(
            "mixed-mode config: both [physical] and [dimensionless] sections present",
        )),
        (None | Some("physical"), true, false) | (None | Some("dimensionless"), false, true) => {
            let raw: RawFile = toml::from_str(text).map_err(parse_err)?;
            match (raw.physical, raw.dimensionless) {
                (Some(p), None) => Ok(Config::Physical(p.finish()?)),
                (None, Some(d)) => Ok(Config::Dimensionless(d.finish()?)),
                _ => unreachable!("section shape checked above"),
            }
        }
        (Some(m @ ("physical" | "dimensionless")), _, _) => Err(Error::config(format!(
            "mixed-mode config: mode = \"{m}\" but the [{m}] section is missing"
        ))),
        (Some(m), _, _) => Err(Error::config(format!(
            "unknown mode {m:?} (expected \"physical\" or \"dimensionless\")"
        ))),
        (None, false, false) => Err(Error::config(
            "config needs a [physical] or [dimensionless] section",
        )),
    }
}

/// Reads and parses a configuration file.
pub fn load_config(path: impl AsRef<Path>) -> Result<Config> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|e| std::io::Error::new(e.kind(), format!("cannot read {}: {e}", path.display())))?;
    parse_config(&text)
}
