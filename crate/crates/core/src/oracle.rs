//! Markovian state-space model of the feedback-cooled chain.
//!
//! The derivative-plus-low-pass feedback kernel is realized by one filter state
//! `z` with `dz/dt = -omega_fb z + omega_fb Y_est`, so the feedback force on the
//! first resonator is `-g_cd dz/dt`. The state vector is
//! `(X, Y, q_1..q_N, p_1..p_N, z)`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::chain::stability_check;
use crate::error::{Error, Result};
use crate::params::{ChainParams, ThermalMode};

/// Drift and diffusion of the augmented linear system `dx = A x dt + noise`.
#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedModel {
    pub n: usize,
    pub drift: DMatrix<f64>,
    pub diffusion: DMatrix<f64>,
}

/// State indices in the augmented vector.
#[derive(Debug, Clone, Copy)]
pub struct Layout {
    pub n: usize,
}

impl Layout {
    pub const X: usize = 0;
    pub const Y: usize = 1;

    pub fn dim(self) -> usize {
        2 + 2 * self.n + 1
    }

    pub fn q(self, j: usize) -> usize {
        2 + j
    }

    pub fn p(self, j: usize) -> usize {
        2 + self.n + j
    }

    pub fn z(self) -> usize {
        2 + 2 * self.n
    }
}

/// Drift matrix of the augmented system. Independent of the bath model.
pub fn drift_matrix(p: &ChainParams) -> DMatrix<f64> {
    let n = p.n();
    let at = Layout { n };
    let (x, y, z) = (Layout::X, Layout::Y, at.z());
    let mut a = DMatrix::zeros(at.dim(), at.dim());
    a[(x, x)] = -p.kappa;
    a[(y, y)] = -p.kappa;
    a[(y, at.q(0))] = p.coupling;
    for j in 0..n {
        a[(at.q(j), at.p(j))] = p.omega[j];
        a[(at.p(j), at.q(j))] = -p.omega[j];
        a[(at.p(j), at.p(j))] = -p.gamma[j];
        if j > 0 {
            a[(at.p(j), at.q(j - 1))] = 2.0 * p.eta_tilde[j - 1];
        }
        if j + 1 < n {
            a[(at.p(j), at.q(j + 1))] = 2.0 * p.eta_tilde[j];
        }
    }
    a[(at.p(0), x)] = p.coupling;
    a[(at.p(0), z)] += p.g_cd * p.omega_fb;
    a[(at.p(0), y)] -= p.g_cd * p.omega_fb;
    a[(z, z)] = -p.omega_fb;
    a[(z, y)] = p.omega_fb;
    a
}

/// Noise input matrix (columns `X_in, Y_in, Y_v, xi_1..xi_N`) and the flat
/// spectral density of each input.
pub fn noise_inputs(p: &ChainParams) -> (DMatrix<f64>, Vec<f64>) {
    let n = p.n();
    let at = Layout { n };
    let r = (2.0 * p.kappa).sqrt();
    let s = p.detection_loss();
    let gf = p.g_cd * p.omega_fb;
    let mut b = DMatrix::zeros(at.dim(), 3 + n);
    b[(Layout::X, 0)] = r;
    b[(Layout::Y, 1)] = r;
    b[(at.p(0), 1)] = gf / r;
    b[(at.p(0), 2)] = gf * s / r;
    b[(at.z(), 1)] = -p.omega_fb / r;
    b[(at.z(), 2)] = -p.omega_fb * s / r;
    for j in 0..n {
        b[(at.p(j), 3 + j)] = 1.0;
    }
    let mut psd = vec![0.5; 3];
    psd.extend((0..n).map(|j| p.gamma[j] * (2.0 * p.nbar[j] + 1.0)));
    (b, psd)
}

/// Builds the augmented model. Only flat thermal baths have a finite-dimensional realization.
pub fn build(p: &ChainParams) -> Result<AugmentedModel> {
    if p.thermal_mode != ThermalMode::Markovian {
        return Err(Error::UnsupportedMode(
            "the state-space model needs flat (markovian) thermal baths".into(),
        ));
    }
    let (b, psd) = noise_inputs(p);
    let sigma = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(psd));
    let diffusion = &b * sigma * b.transpose();
    Ok(AugmentedModel {
        n: p.n(),
        drift: drift_matrix(p),
        diffusion,
    })
}

/// Solves `A V + V A^T + D = 0` for Hurwitz `A` by complex Schur decomposition
/// and triangular back-substitution.
pub fn solve_lyapunov(a: &DMatrix<f64>, d: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    let ac = a.map(Complex64::from);
    let (u, t) = ac.schur().unpack();
    for i in 0..n {
        if !(t[(i, i)].re < 0.0) {
            return Err(Error::Stability {
                eigenvalue: t[(i, i)],
                max_real_part: t[(i, i)].re,
            });
        }
    }
    let c = -(u.adjoint() * d.map(Complex64::from) * &u);
    // T Y + Y T^H = C, solved from the bottom-right corner.
    let mut y = DMatrix::<Complex64>::zeros(n, n);
    for i in (0..n).rev() {
        for j in (0..n).rev() {
            let mut acc = c[(i, j)];
            for k in i + 1..n {
                acc -= t[(i, k)] * y[(k, j)];
            }
            for k in j + 1..n {
                acc -= y[(i, k)] * t[(j, k)].conj();
            }
            y[(i, j)] = acc / (t[(i, i)] + t[(j, j)].conj());
        }
    }
    let v = (&u * y * u.adjoint()).map(|z| z.re);
    let v = (&v + v.transpose()) * 0.5;
    let residual = (a * &v + &v * a.transpose() + d).norm();
    let scale = d.norm().max(f64::MIN_POSITIVE);
    if !(residual <= 1e-10 * scale) {
        return Err(Error::Numerical(format!(
            "Lyapunov residual {residual:.3e} exceeds 1e-10 * |D| = {:.3e}",
            1e-10 * scale
        )));
    }
    Ok(v)
}

/// Steady-state covariance of the augmented model.
pub fn steady_covariance(m: &AugmentedModel) -> Result<DMatrix<f64>> {
    solve_lyapunov(&m.drift, &m.diffusion)
}

/// Phonon numbers `(V_qq + V_pp - 1) / 2` read off a steady covariance.
pub fn phonon_numbers_from_covariance(n: usize, v: &DMatrix<f64>) -> Vec<f64> {
    let at = Layout { n };
    (0..n)
        .map(|j| 0.5 * (v[(at.q(j), at.q(j))] + v[(at.p(j), at.p(j))] - 1.0))
        .collect()
}

/// Position and momentum variances read off a steady covariance.
pub fn variances_from_covariance(n: usize, v: &DMatrix<f64>) -> (Vec<f64>, Vec<f64>) {
    let at = Layout { n };
    (
        (0..n).map(|j| v[(at.q(j), at.q(j))]).collect(),
        (0..n).map(|j| v[(at.p(j), at.p(j))]).collect(),
    )
}

/// Checks stability, builds the model and returns its steady covariance.
pub fn stable_covariance(p: &ChainParams) -> Result<DMatrix<f64>> {
    let model = build(p)?;
    stability_check(p).require_stable()?;
    steady_covariance(&model)
}
