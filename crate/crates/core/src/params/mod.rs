//! Parameter sets and the lab-frame to dimensionless conversion.
//!
//! All solvers work on [`ChainParams`], whose rates are expressed in units of
//! the first resonator's normalized frequency `omega_1`. [`PhysicalParams`]
//! holds SI inputs and is converted with [`to_dimensionless`].

mod config;

pub use config::{load_config, parse_config, Config};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Reduced Planck constant (J s).
pub const HBAR: f64 = 1.054_571_817e-34;
/// Boltzmann constant (J/K).
pub const K_B: f64 = 1.380_649e-23;
/// Speed of light (m/s).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Detection efficiency used when a config omits `zeta`.
pub const DEFAULT_ZETA: f64 = 0.8;

/// How the Brownian force spectrum of each mechanical bath is modeled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ThermalMode {
    /// Flat spectrum `gamma_j (2 nbar_j + 1)`.
    #[default]
    Markovian,
    /// `gamma_j omega / omega_j coth(hbar omega / 2 k_B T_j)`, with `T_j` inferred
    /// from `nbar_j` at the resonator frequency.
    FullCoth,
}

impl std::str::FromStr for ThermalMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "markovian" => Ok(ThermalMode::Markovian),
            "full-coth" => Ok(ThermalMode::FullCoth),
            other => Err(Error::config(format!(
                "unknown thermal_mode {other:?} (expected \"markovian\" or \"full-coth\")"
            ))),
        }
    }
}

/// Lab-frame inputs, SI units, angular frequencies in rad/s.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    /// Resonator masses (kg).
    pub mass: Vec<f64>,
    /// Bare mechanical angular frequencies.
    pub omega_tilde: Vec<f64>,
    /// Position-position couplings between neighbours (N/m), `N - 1` entries.
    pub eta: Vec<f64>,
    /// Cavity amplitude decay rate.
    pub kappa: f64,
    /// Drive power (W).
    pub power: f64,
    /// Laser angular frequency.
    pub omega_laser: f64,
    /// Cavity angular frequency.
    pub omega_cavity: f64,
    /// Cavity rest length (m).
    pub cavity_length: f64,
    /// Mechanical damping rates.
    pub gamma: Vec<f64>,
    /// Bath occupancies.
    pub nbar: Vec<f64>,
    pub zeta: f64,
    /// Dimensionless feedback gain.
    pub g_cd: f64,
    /// Feedback bandwidth.
    pub omega_fb: f64,
    #[serde(default)]
    pub thermal_mode: ThermalMode,
}

/// Dimensionless working parameters, every rate in units of `omega_1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainParams {
    pub omega: Vec<f64>,
    pub gamma: Vec<f64>,
    /// Nearest-neighbour couplings, `N - 1` entries.
    pub eta_tilde: Vec<f64>,
    pub kappa: f64,
    /// Linearized optomechanical coupling `G`.
    #[serde(rename = "G")]
    pub coupling: f64,
    pub g_cd: f64,
    pub omega_fb: f64,
    pub zeta: f64,
    pub nbar: Vec<f64>,
    #[serde(default)]
    pub thermal_mode: ThermalMode,
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::config(format!("{name} must be positive and finite, got {v}")))
    }
}

fn non_negative(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(Error::config(format!("{name} must be non-negative and finite, got {v}")))
    }
}

fn check_len(name: &str, v: &[f64], want: usize) -> Result<()> {
    if v.len() == want {
        Ok(())
    } else {
        Err(Error::config(format!(
            "{name} has {} entries, expected {want}",
            v.len()
        )))
    }
}

fn check_zeta(zeta: f64) -> Result<()> {
    if zeta.is_finite() && zeta > 0.0 && zeta <= 1.0 {
        Ok(())
    } else {
        Err(Error::config(format!("zeta must lie in (0, 1], got {zeta}")))
    }
}

/// Bath occupancy of a mode at angular frequency `omega` (rad/s) and temperature `t` (K).
pub fn occupancy_from_temperature(omega: f64, t: f64) -> f64 {
    1.0 / ((HBAR * omega / (K_B * t)).exp_m1())
}

impl PhysicalParams {
    pub fn n(&self) -> usize {
        self.mass.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n();
        if n == 0 {
            return Err(Error::config("at least one resonator is required"));
        }
        check_len("omega_tilde_j", &self.omega_tilde, n)?;
        check_len("eta_j", &self.eta, n - 1)?;
        check_len("gamma_j", &self.gamma, n)?;
        check_len("nbar_j", &self.nbar, n)?;
        for (j, &m) in self.mass.iter().enumerate() {
            positive(&format!("m_{}", j + 1), m)?;
        }
        for (j, &w) in self.omega_tilde.iter().enumerate() {
            positive(&format!("omega_tilde_{}", j + 1), w)?;
        }
        for (j, &e) in self.eta.iter().enumerate() {
            non_negative(&format!("eta_{}", j + 1), e)?;
        }
        for (j, &g) in self.gamma.iter().enumerate() {
            positive(&format!("gamma_{}", j + 1), g)?;
        }
        for (j, &nb) in self.nbar.iter().enumerate() {
            non_negative(&format!("nbar_{}", j + 1), nb)?;
        }
        positive("kappa", self.kappa)?;
        positive("P_L", self.power)?;
        positive("omega_L", self.omega_laser)?;
        positive("omega_c", self.omega_cavity)?;
        positive("L", self.cavity_length)?;
        positive("omega_fb", self.omega_fb)?;
        non_negative("g_cd", self.g_cd)?;
        check_zeta(self.zeta)
    }

    /// Normalized mechanical frequencies (rad/s), including the static shift
    /// from the neighbouring springs.
    pub fn normalized_frequencies(&self) -> Vec<f64> {
        let n = self.n();
        (0..n)
            .map(|j| {
                let left = if j > 0 { self.eta[j - 1] } else { 0.0 };
                let right = if j + 1 < n { self.eta[j] } else { 0.0 };
                (self.omega_tilde[j].powi(2) + 2.0 * (left + right) / self.mass[j]).sqrt()
            })
            .collect()
    }

    /// The reference frequency `omega_1` (rad/s) that every dimensionless rate is divided by.
    pub fn omega_ref(&self) -> f64 {
        self.normalized_frequencies()[0]
    }

    /// Linearized optomechanical coupling `G` in rad/s at zero effective detuning.
    ///
    /// `G = sqrt(2) lambda_tilde <a>` with `lambda_tilde = (omega_c / L) sqrt(hbar / (m_1 omega_1))`
    /// and `<a> = Omega / kappa`, `Omega = sqrt(2 P_L kappa / (hbar omega_L))`. The two factors
    /// of hbar cancel.
    pub fn coupling(&self) -> f64 {
        let omega_1 = self.omega_ref();
        let lambda = self.omega_cavity / self.cavity_length;
        let lambda_tilde = lambda * (HBAR / (self.mass[0] * omega_1)).sqrt();
        let drive = (2.0 * self.power * self.kappa / (HBAR * self.omega_laser)).sqrt();
        std::f64::consts::SQRT_2 * lambda_tilde * drive / self.kappa
    }
}

/// Converts lab-frame inputs to the dimensionless chain parameters (units of `omega_1`).
pub fn to_dimensionless(p: &PhysicalParams) -> Result<ChainParams> {
    p.validate()?;
    let omega = p.normalized_frequencies();
    let w_ref = omega[0];
    let n = p.n();
    let eta_tilde = (0..n - 1)
        .map(|j| p.eta[j] / (p.mass[j] * p.mass[j + 1] * omega[j] * omega[j + 1]).sqrt() / w_ref)
        .collect();
    let chain = ChainParams {
        omega: omega.iter().map(|w| w / w_ref).collect(),
        gamma: p.gamma.iter().map(|g| g / w_ref).collect(),
        eta_tilde,
        kappa: p.kappa / w_ref,
        coupling: p.coupling() / w_ref,
        g_cd: p.g_cd,
        omega_fb: p.omega_fb / w_ref,
        zeta: p.zeta,
        nbar: p.nbar.clone(),
        thermal_mode: p.thermal_mode,
    };
    chain.validate()?;
    Ok(chain)
}

impl ChainParams {
    pub fn n(&self) -> usize {
        self.omega.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n();
        if n == 0 {
            return Err(Error::config("at least one resonator is required"));
        }
        check_len("gamma_j", &self.gamma, n)?;
        check_len("eta_tilde_j", &self.eta_tilde, n - 1)?;
        check_len("nbar_j", &self.nbar, n)?;
        for (j, &w) in self.omega.iter().enumerate() {
            positive(&format!("omega_{}", j + 1), w)?;
        }
        for (j, &g) in self.gamma.iter().enumerate() {
            positive(&format!("gamma_{}", j + 1), g)?;
        }
        for (j, &e) in self.eta_tilde.iter().enumerate() {
            non_negative(&format!("eta_tilde_{}", j + 1), e)?;
        }
        for (j, &nb) in self.nbar.iter().enumerate() {
            non_negative(&format!("nbar_{}", j + 1), nb)?;
        }
        positive("kappa", self.kappa)?;
        non_negative("G", self.coupling)?;
        non_negative("g_cd", self.g_cd)?;
        positive("omega_fb", self.omega_fb)?;
        check_zeta(self.zeta)?;
        self.check_static_stability()
    }

    /// The mechanical stiffness matrix `diag(omega_j) - 2 eta_tilde (shift)` must be
    /// positive definite; otherwise the chain buckles and the effective frequencies
    /// at zero probe frequency become imaginary.
    fn check_static_stability(&self) -> Result<()> {
        if self.n() == 2 {
            let ratio = 4.0 * self.eta_tilde[0].powi(2) / (self.omega[0] * self.omega[1]);
            if ratio >= 1.0 {
                return Err(Error::config(format!(
                    "buckling: 4 eta_tilde_1^2 / (omega_1 omega_2) = {ratio:.6} must be < 1"
                )));
            }
            return Ok(());
        }
        let mut pivot = self.omega[0];
        for j in 1..self.n() {
            pivot = self.omega[j] - 4.0 * self.eta_tilde[j - 1].powi(2) / pivot;
            if pivot <= 0.0 {
                return Err(Error::config(format!(
                    "buckling: stiffness matrix is not positive definite (pivot {} = {pivot:.6e})",
                    j + 1
                )));
            }
        }
        Ok(())
    }

    /// Symmetrized Brownian-force spectral density of bath `j` at probe frequency `omega`.
    pub fn thermal_psd(&self, j: usize, omega: f64) -> f64 {
        let gamma = self.gamma[j];
        let nbar = self.nbar[j];
        match self.thermal_mode {
            ThermalMode::Markovian => gamma * (2.0 * nbar + 1.0),
            ThermalMode::FullCoth => {
                let w_j = self.omega[j];
                if nbar == 0.0 {
                    return gamma * omega.abs() / w_j;
                }
                // hbar omega_j / k_B T_j, fixed so that coth(x/2) = 2 nbar + 1 at omega_j
                let x = (1.0 / nbar).ln_1p();
                let r = 0.5 * x * omega / w_j;
                if r.abs() < 1e-6 {
                    2.0 * gamma / x * (1.0 + r * r / 3.0)
                } else {
                    gamma * omega / w_j / r.tanh()
                }
            }
        }
    }

    /// `sqrt(zeta^-1 - 1)`, the weight of the extra vacuum port in the estimated quadrature.
    pub fn detection_loss(&self) -> f64 {
        (1.0 / self.zeta - 1.0).max(0.0).sqrt()
    }
}
