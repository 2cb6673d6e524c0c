//! Frequency-domain solver for chains of any length.
//!
//! At each probe frequency the Fourier-transformed fluctuation equations for
//! `(X, Y, q_1..q_N, p_1..p_N)` are solved for the positions in terms of the
//! noise inputs `(X_in, Y_in, Y_v, xi_1..xi_N)`. The feedback kernel enters
//! exactly as `g_cd (-i omega) omega_fb / (omega_fb - i omega)`.

pub mod quadrature;
mod stability;

pub use stability::{routh_first_column, stability_check, RouthHurwitz, StabilityReport};

use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::oracle::drift_matrix;
use crate::params::{ChainParams, ThermalMode};

/// Transfer matrix from the noise inputs to the resonator positions at one frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyResponse {
    pub omega: f64,
    /// `N x (3 + N)`, columns ordered `X_in, Y_in, Y_v, xi_1..xi_N`.
    pub transfer: DMatrix<Complex64>,
    pub input_psd: Vec<f64>,
}

/// Tolerances and budget for the spectral integrals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureOptions {
    /// Absolute tolerance on each variance.
    pub tol: f64,
    /// Relative tolerance on each variance; the looser of the two applies.
    pub rel_tol: f64,
    /// Maximum number of integrand evaluations.
    pub max_nodes: usize,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        QuadratureOptions {
            tol: 1e-9,
            rel_tol: 1e-10,
            max_nodes: 2_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuadratureDiagnostics {
    pub nodes: usize,
    pub panels: usize,
    /// Error estimate of each integrated variance, positions first.
    pub error_estimate: Vec<f64>,
}

/// Integrated position and momentum variances.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Variances {
    pub position: Vec<f64>,
    pub momentum: Option<Vec<f64>>,
    pub diagnostics: QuadratureDiagnostics,
}

/// Feedback kernel in the frequency domain.
pub fn feedback_kernel(p: &ChainParams, omega: f64) -> Complex64 {
    let num = Complex64::new(0.0, -omega) * p.g_cd * p.omega_fb;
    num / Complex64::new(p.omega_fb, -omega)
}

/// Spectral density of every noise input at `omega`.
pub fn input_psd(p: &ChainParams, omega: f64) -> Vec<f64> {
    let mut psd = vec![0.5; 3];
    psd.extend((0..p.n()).map(|j| p.thermal_psd(j, omega)));
    psd
}

fn solve_positions(p: &ChainParams, omega: f64) -> Result<DMatrix<Complex64>> {
    let n = p.n();
    let dim = 2 + 2 * n;
    let (x, y) = (0, 1);
    let q = |j: usize| 2 + j;
    let pm = |j: usize| 2 + n + j;
    let kernel = feedback_kernel(p, omega);
    let r = (2.0 * p.kappa).sqrt();
    let s = p.detection_loss();

    // M v = B u with M = -i omega - A(omega)
    let mut m = DMatrix::<Complex64>::zeros(dim, dim);
    for i in 0..dim {
        m[(i, i)] = Complex64::new(0.0, -omega);
    }
    m[(x, x)] += p.kappa;
    m[(y, y)] += p.kappa;
    m[(y, q(0))] -= p.coupling;
    for j in 0..n {
        m[(q(j), pm(j))] -= p.omega[j];
        m[(pm(j), q(j))] += p.omega[j];
        m[(pm(j), pm(j))] += p.gamma[j];
        if j > 0 {
            m[(pm(j), q(j - 1))] -= 2.0 * p.eta_tilde[j - 1];
        }
        if j + 1 < n {
            m[(pm(j), q(j + 1))] -= 2.0 * p.eta_tilde[j];
        }
    }
    m[(pm(0), x)] -= p.coupling;
    m[(pm(0), y)] += kernel;

    let mut b = DMatrix::<Complex64>::zeros(dim, 3 + n);
    b[(x, 0)] = r.into();
    b[(y, 1)] = r.into();
    b[(pm(0), 1)] = kernel / r;
    b[(pm(0), 2)] = kernel * s / r;
    for j in 0..n {
        b[(pm(j), 3 + j)] = 1.0.into();
    }

    let sol = m.lu().solve(&b).ok_or(Error::Pole { omega })?;
    let t = sol.rows(2, n).into_owned();
    if t.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(t)
    } else {
        Err(Error::Pole { omega })
    }
}

/// Assembles and solves the frequency-domain system at `omega`.
pub fn assemble_response(p: &ChainParams, omega: f64) -> Result<FrequencyResponse> {
    Ok(FrequencyResponse {
        omega,
        transfer: solve_positions(p, omega)?,
        input_psd: input_psd(p, omega),
    })
}

impl FrequencyResponse {
    /// Position spectrum of resonator `j`.
    pub fn position_spectrum(&self, j: usize) -> f64 {
        self.transfer
            .row(j)
            .iter()
            .zip(&self.input_psd)
            .map(|(t, s)| t.norm_sqr() * s)
            .sum()
    }

    /// Contribution of input `k` to the position spectrum of resonator `j`.
    pub fn contribution(&self, j: usize, k: usize) -> f64 {
        self.transfer[(j, k)].norm_sqr() * self.input_psd[k]
    }
}

/// Position spectra of all resonators at `omega`.
pub fn spectra(p: &ChainParams, omega: f64) -> Result<Vec<f64>> {
    let r = assemble_response(p, omega)?;
    Ok((0..p.n()).map(|j| r.position_spectrum(j)).collect())
}

/// Position spectrum of resonator `j` (0-based).
pub fn spectrum(p: &ChainParams, omega: f64, j: usize) -> Result<f64> {
    check_index(p, j)?;
    Ok(assemble_response(p, omega)?.position_spectrum(j))
}

/// Momentum spectrum `omega^2 S_q / omega_j^2` of resonator `j`.
pub fn momentum_spectrum(p: &ChainParams, omega: f64, j: usize) -> Result<f64> {
    Ok(spectrum(p, omega, j)? * (omega / p.omega[j]).powi(2))
}

fn check_index(p: &ChainParams, j: usize) -> Result<()> {
    if j < p.n() {
        Ok(())
    } else {
        Err(Error::config(format!("resonator index {j} out of range for N = {}", p.n())))
    }
}

/// Frequency scale of the tangent map.
pub fn frequency_scale(p: &ChainParams) -> f64 {
    let w_max = p.omega.iter().copied().fold(0.0, f64::max);
    p.kappa.max(p.omega_fb).max(2.0 * w_max)
}

/// Break points (in the mapped variable) clustered around each spectral peak.
/// Peaks sit at `omega = +-tau` for every drift pole `-sigma + i tau`, with width `sigma`.
fn break_points(p: &ChainParams, scale: f64, lo: f64, hi: f64) -> Vec<f64> {
    const OFFSETS: [f64; 9] = [0.0, 1.0, -1.0, 4.0, -4.0, 16.0, -16.0, 64.0, -64.0];
    let mut omegas = vec![0.0];
    for z in drift_matrix(p).complex_eigenvalues().iter() {
        let (sigma, tau) = (z.re.abs(), z.im.abs());
        if tau > 0.0 {
            for sign in [1.0, -1.0] {
                omegas.extend(OFFSETS.iter().map(|k| sign * tau + k * sigma));
            }
        }
    }
    let mut theta: Vec<f64> = omegas
        .into_iter()
        .map(|w| (w / scale).atan())
        .filter(|&t| t > lo && t < hi)
        .collect();
    theta.push(lo);
    theta.push(hi);
    theta.sort_by(f64::total_cmp);
    theta.dedup_by(|a, b| (*a - *b).abs() <= 1e-15);
    theta
}

/// Variances over `omega_lo <= omega <= omega_hi` (either end may be infinite),
/// `(1 / 2 pi) int S_q` and, in markovian mode, `(1 / 2 pi omega_j^2) int omega^2 S_q`.
pub fn variances_over(
    p: &ChainParams,
    opts: &QuadratureOptions,
    omega_lo: f64,
    omega_hi: f64,
) -> Result<Variances> {
    let n = p.n();
    let scale = frequency_scale(p);
    let lo = (omega_lo / scale).atan().max(-FRAC_PI_2);
    let hi = (omega_hi / scale).atan().min(FRAC_PI_2);
    let with_momentum = p.thermal_mode == ThermalMode::Markovian;
    let breaks = break_points(p, scale, lo, hi);
    let integrand = |theta: f64| -> Result<Vec<f64>> {
        let (sin, cos) = theta.sin_cos();
        let omega = scale * sin / cos;
        let jac = scale / (cos * cos) / (2.0 * PI);
        let s = spectra(p, omega)?;
        let mut out: Vec<f64> = s.iter().map(|v| v * jac).collect();
        if with_momentum {
            out.extend((0..n).map(|j| s[j] * jac * (omega / p.omega[j]).powi(2)));
        }
        Ok(out)
    };
    let r = quadrature::integrate(integrand, &breaks, opts.tol, opts.rel_tol, opts.max_nodes)?;
    Ok(Variances {
        position: r.value[..n].to_vec(),
        momentum: with_momentum.then(|| r.value[n..].to_vec()),
        diagnostics: QuadratureDiagnostics {
            nodes: r.evaluations,
            panels: r.panels,
            error_estimate: r.error,
        },
    })
}

/// Phonon numbers from integrating the position and momentum spectra over all frequencies.
///
/// Full-coth baths are rejected: their zero-point tail makes the momentum
/// variance logarithmically divergent. Their position variance is still
/// available from [`variances_over`].
pub fn phonon_numbers(p: &ChainParams, opts: &QuadratureOptions) -> Result<crate::CoolingResult> {
    p.validate()?;
    if p.thermal_mode != ThermalMode::Markovian {
        return Err(Error::UnsupportedMode(
            "phonon numbers with full-coth baths: the momentum variance diverges; \
             use thermal_mode = \"markovian\""
                .into(),
        ));
    }
    let stability = stability_check(p);
    stability.require_stable()?;
    let v = variances_over(p, opts, f64::NEG_INFINITY, f64::INFINITY)?;
    let momentum = v.momentum.clone().expect("markovian mode integrates momenta");
    let n_f = v
        .position
        .iter()
        .zip(&momentum)
        .map(|(q, pp)| 0.5 * (q + pp - 1.0))
        .collect();
    Ok(crate::CoolingResult {
        n_f,
        solver: crate::Solver::Quadrature,
        stability,
        position_variance: v.position,
        momentum_variance: momentum,
        quadrature: Some(v.diagnostics),
        imag_residue: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair() -> ChainParams {
        ChainParams {
            omega: vec![1.0, 1.0],
            gamma: vec![1e-5, 1e-5],
            eta_tilde: vec![0.05],
            kappa: 3.5,
            coupling: 0.4556522003007523,
            g_cd: 0.9,
            omega_fb: 3.0,
            zeta: 0.8,
            nbar: vec![1e3, 1e3],
            thermal_mode: ThermalMode::Markovian,
        }
    }

    #[test]
    fn vacuum_convention_reproduces_radiation_pressure_noise() {
        // with the feedback off, the force on resonator 1 from X_in has spectrum G^2 kappa / (kappa^2 + w^2)
        let mut p = pair();
        p.g_cd = 0.0;
        p.eta_tilde = vec![0.0];
        for &w in &[0.0, 0.5, 1.3, 7.0] {
            let r = assemble_response(&p, w).unwrap();
            let chi = p.omega[0] / Complex64::new(1.0 - w * w, -w * p.gamma[0]);
            let force = r.contribution(0, 0) / chi.norm_sqr();
            let expect = p.coupling.powi(2) * p.kappa / (p.kappa * p.kappa + w * w);
            assert!((force - expect).abs() <= 1e-12 * expect, "{force} vs {expect}");
        }
    }

    #[test]
    fn broken_loop_has_no_cavity_noise() {
        let mut p = pair();
        p.coupling = 0.0;
        p.g_cd = 0.0;
        let r = assemble_response(&p, 0.8).unwrap();
        for j in 0..2 {
            for k in 0..3 {
                assert_eq!(r.transfer[(j, k)].norm(), 0.0);
            }
        }
    }

    #[test]
    fn break_points_are_sorted_and_bounded() {
        let p = pair();
        let b = break_points(&p, frequency_scale(&p), -FRAC_PI_2, FRAC_PI_2);
        assert_eq!(b[0], -FRAC_PI_2);
        assert_eq!(*b.last().unwrap(), FRAC_PI_2);
        assert!(b.windows(2).all(|w| w[0] < w[1]));
        assert!(b.contains(&0.0));
    }

    #[test]
    fn full_coth_phonon_numbers_rejected() {
        let mut p = pair();
        p.thermal_mode = ThermalMode::FullCoth;
        assert!(matches!(
            phonon_numbers(&p, &QuadratureOptions::default()),
            Err(Error::UnsupportedMode(_))
        ));
        let v = variances_over(&p, &QuadratureOptions::default(), f64::NEG_INFINITY, f64::INFINITY).unwrap();
        assert!(v.momentum.is_none());
        assert!(v.position.iter().all(|&x| x > 0.0));
    }

    #[test]
    fn index_checked() {
        assert!(spectrum(&pair(), 0.1, 2).is_err());
    }
}
