//! Closed-form analytics for a two-resonator chain.
//!
//! Effective susceptibilities, cooling rates and the component noise spectra
//! follow from eliminating the cavity, the feedback filter and the second
//! resonator from the frequency-domain equations. The exact phonon numbers are
//! the standard rational-spectrum integrals of a degree-6 characteristic polynomial.

use num_complex::Complex64;
use serde::Serialize;

use crate::chain::stability_check;
use crate::error::{Error, Result};
use crate::params::{ChainParams, ThermalMode};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Effective response of both resonators at one probe frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EffectiveResponse {
    pub omega: f64,
    /// Effective resonance frequencies.
    pub frequency: [f64; 2],
    /// Effective dampings, bare damping plus cooling rate.
    pub damping: [f64; 2],
    pub cooling_rate: [f64; 2],
    pub susceptibility: [Complex64; 2],
}

/// Noise spectra driving the two resonators at one probe frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NoiseBreakdown {
    pub omega: f64,
    /// Measurement noise fed back onto resonator 1.
    pub feedback: f64,
    /// Radiation-pressure noise on resonator 1.
    pub radiation_pressure: f64,
    pub thermal: [f64; 2],
    /// Noise reaching each resonator through the mechanical coupling.
    pub mechanical: [f64; 2],
}

/// Characteristic and numerator coefficients of the exact phonon-number integrals.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AppendixCoefficients {
    pub a: [Complex64; 7],
    /// `b[l][k]` for resonator `l`.
    pub b: [[Complex64; 6]; 2],
    pub delta6: Complex64,
    pub d6: [Complex64; 2],
    pub m6: [Complex64; 2],
}

/// Exact two-mode phonon numbers with the discarded imaginary parts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExactPhononNumbers {
    pub n: [f64; 2],
    pub imag_residue: [f64; 2],
}

fn require_two(p: &ChainParams) -> Result<()> {
    if p.n() == 2 {
        Ok(())
    } else {
        Err(Error::config(format!(
            "two-mode analytics need N = 2, got N = {}",
            p.n()
        )))
    }
}

struct Loop {
    w1: f64,
    w2: f64,
    g1: f64,
    g2: f64,
    e: f64,
    k: f64,
    gg: f64,
    f: f64,
}

impl Loop {
    fn new(p: &ChainParams) -> Self {
        Loop {
            w1: p.omega[0],
            w2: p.omega[1],
            g1: p.gamma[0],
            g2: p.gamma[1],
            e: p.eta_tilde[0],
            k: p.kappa,
            gg: p.coupling * p.g_cd,
            f: p.omega_fb,
        }
    }

    fn coef_a(&self, w: f64) -> f64 {
        let Loop { w1, w2, k, gg, f, .. } = *self;
        let w2_ = w * w;
        w1 * w2
            * (w2_.powi(3) - gg * k * w2_ * w1 * f - w2_ * w1 * (gg + w1) * f * f
                + k * k * (w2_ - w1 * w1) * (w2_ + f * f)
                + w2_ * w2_ * (f * f - w1 * w1))
    }

    fn coef_b(&self, w: f64) -> f64 {
        let Loop { w1, w2, g1, k, gg, f, .. } = *self;
        let w2_ = w * w;
        w1 * w2
            * (gg * k * w1 * f * f
                + k * k * g1 * (w2_ + f * f)
                + w2_ * (-gg * w1 * f + g1 * (w2_ + f * f)))
    }

    fn coef_c(&self, w: f64) -> f64 {
        let Loop { w1, g1, k, gg, f, .. } = *self;
        let w2_ = w * w;
        let re = w2_ * (-k * g1 + w2_ - w1 * w1) - ((k + g1) * w2_ - k * w1 * w1) * f;
        let im = w * (g1 * w2_ + (w2_ - w1 * (gg + w1)) * f + k * (w2_ - w1 * w1 - g1 * f));
        re * re + im * im
    }

    fn coef_d(&self, w: f64) -> Complex64 {
        let Loop { w1, g1, k, gg, f, .. } = *self;
        let kw = Complex64::new(k, -w);
        kw * Complex64::new(w1 * w1 - w * w, -g1 * w) * w
            + (kw * Complex64::new(g1, -w) * w + gg * w * w1 + Complex64::new(w, k) * w1 * w1) * f
    }

    fn lorentz2(&self, w: f64) -> f64 {
        let d = w * w - self.w2 * self.w2;
        self.g2 * self.g2 * w * w + d * d
    }

    fn frequency_sq(&self, w: f64) -> [f64; 2] {
        let Loop { w1, w2, e, k, gg, f, .. } = *self;
        let first = w1 * w1
            + gg * w * w * f * w1 * (k + f) / ((k * k + w * w) * (w * w + f * f))
            + 4.0 * e * e * w1 * w2 * (w * w - w2 * w2) / self.lorentz2(w);
        let second = w2 * w2 + 4.0 * e * e * self.coef_a(w) / self.coef_c(w);
        [first, second]
    }

    fn cooling_rate(&self, w: f64) -> [f64; 2] {
        let Loop { w1, w2, g2, e, k, gg, f, .. } = *self;
        let first = gg * f * w1 * (k * f - w * w) / ((k * k + w * w) * (w * w + f * f))
            + 4.0 * e * e * w1 * w2 * g2 / self.lorentz2(w);
        let second = 4.0 * e * e * self.coef_b(w) / self.coef_c(w);
        [first, second]
    }
}

fn susceptibility(omega_j: f64, freq_sq: f64, w: f64, damping: f64) -> Complex64 {
    omega_j / Complex64::new(freq_sq - w * w, -w * damping)
}

/// Effective frequencies, dampings and susceptibilities at probe frequency `omega`.
pub fn effective_response(p: &ChainParams, omega: f64) -> Result<EffectiveResponse> {
    require_two(p)?;
    let l = Loop::new(p);
    let sq = l.frequency_sq(omega);
    let rate = l.cooling_rate(omega);
    const NAMES: [&str; 2] = ["Omega_1,eff", "Omega_2,eff"];
    for j in 0..2 {
        if !(sq[j] >= 0.0) {
            return Err(Error::domain(
                NAMES[j],
                format!("squared effective frequency {:.6e} at omega = {omega}", sq[j]),
            ));
        }
    }
    let damping = [p.gamma[0] + rate[0], p.gamma[1] + rate[1]];
    Ok(EffectiveResponse {
        omega,
        frequency: [sq[0].sqrt(), sq[1].sqrt()],
        damping,
        cooling_rate: rate,
        susceptibility: [
            susceptibility(p.omega[0], sq[0], omega, damping[0]),
            susceptibility(p.omega[1], sq[1], omega, damping[1]),
        ],
    })
}

/// Effective dampings at `omega`; defined even where a squared effective frequency is negative.
pub fn effective_damping(p: &ChainParams, omega: f64) -> Result<[f64; 2]> {
    require_two(p)?;
    let rate = Loop::new(p).cooling_rate(omega);
    Ok([p.gamma[0] + rate[0], p.gamma[1] + rate[1]])
}

/// Cooling rates at resonance (`omega = 0`): feedback-loop channel and mechanical channel.
pub fn cooling_rates_resonant(p: &ChainParams) -> Result<(f64, f64)> {
    require_two(p)?;
    let Loop { w1, w2, g1, g2, e, k, gg, .. } = Loop::new(p);
    let first = gg * w1 / k + 4.0 * e * e * w1 * g2 / w2.powi(3);
    let second = 4.0 * e * e * w2 * (gg * w1 + k * g1) / (w1.powi(3) * k);
    Ok((first, second))
}

/// Component noise spectra at probe frequency `omega`.
pub fn noise_breakdown(p: &ChainParams, omega: f64) -> Result<NoiseBreakdown> {
    require_two(p)?;
    if !(p.zeta > 0.0) {
        return Err(Error::domain("S_fb,1", format!("detection efficiency zeta = {}", p.zeta)));
    }
    let l = Loop::new(p);
    let w = omega;
    let (k, f, g_cd, zeta) = (p.kappa, p.omega_fb, p.g_cd, p.zeta);
    let feedback = g_cd * g_cd * f * f * w * w / (4.0 * k * zeta * (w * w + f * f));
    let radiation_pressure = p.coupling.powi(2) * k / (k * k + w * w);
    let thermal = [p.thermal_psd(0, w), p.thermal_psd(1, w)];
    let e = p.eta_tilde[0];
    let me1 = 4.0 * e * e * l.w2 * l.w2 / l.lorentz2(w) * thermal[1];
    let big_e = 4.0
        * (w * w + f * f)
        * (p.coupling.powi(2) * k + thermal[0] * (k * k + w * w))
        * l.w1
        * l.w1
        + g_cd * g_cd * w * w * l.w1 * l.w1 * f * f / (k * zeta) * (k * k + w * w);
    let me2 = e * e * big_e / l.coef_d(w).norm_sqr();
    Ok(NoiseBreakdown {
        omega,
        feedback,
        radiation_pressure,
        thermal,
        mechanical: [me1, me2],
    })
}

/// Position spectrum of resonator `j` (0-based) from the two-mode closed forms.
pub fn position_spectrum_twomode(p: &ChainParams, omega: f64, j: usize) -> Result<f64> {
    require_two(p)?;
    if j > 1 {
        return Err(Error::config(format!("resonator index {j} out of range for N = 2")));
    }
    let l = Loop::new(p);
    let sq = l.frequency_sq(omega);
    let damping = p.gamma[j] + l.cooling_rate(omega)[j];
    let chi = susceptibility(p.omega[j], sq[j], omega, damping);
    let nb = noise_breakdown(p, omega)?;
    let drive = if j == 0 {
        nb.feedback + nb.radiation_pressure + nb.thermal[0] + nb.mechanical[0]
    } else {
        nb.thermal[1] + nb.mechanical[1]
    };
    Ok(chi.norm_sqr() * drive)
}

/// The real characteristic polynomial `sum_k c_k s^(6-k)` of the coupled dynamics,
/// obtained from `a_k` by substituting `omega = i s`.
pub fn characteristic_polynomial(a: &[Complex64; 7]) -> [f64; 7] {
    let mut c = [0.0; 7];
    let mut phase = Complex64::new(0.0, -1.0);
    for k in 0..7 {
        c[k] = (phase * a[k]).re;
        phase *= I;
    }
    c
}

/// Coefficients `a_k`, `b_k` and the determinant expansions in a form ready for evaluation.
pub fn appendix_coefficients(p: &ChainParams) -> Result<AppendixCoefficients> {
    require_two(p)?;
    let Loop { w1, w2, g1, g2, e, k, gg, f } = Loop::new(p);
    let (g, z, big_g) = (p.g_cd, p.zeta, p.coupling);
    let n1 = 1.0 + 2.0 * p.nbar[0];
    let n2 = 1.0 + 2.0 * p.nbar[1];
    let e2 = e * e;
    let (w1s, w2s, fs, ks) = (w1 * w1, w2 * w2, f * f, k * k);
    let r = Complex64::from;

    let a = [
        I,
        r(k + g1 + g2 + f),
        -I * (w1s + w2s + g2 * f + g1 * (g2 + f) + k * (g1 + g2 + f)),
        r(-w1 * f * (gg + w1)
            - w2s * (g1 + f)
            - g2 * (w1s + g1 * f)
            - k * (w1s + w2s + g2 * f + g1 * (g2 + f))),
        I * (g1 * w2s * f
            + w1s * (w2s + g2 * f)
            + k * (w1s * f + w2s * (g1 + f) + g2 * (w1s + g1 * f))
            + w1 * (gg * g2 * f - 4.0 * w2 * e2)),
        r(w1 * w2 * f * (gg * w2 + w1 * w2 - 4.0 * e2)
            + k * (g1 * w2s * f + w1s * (w2s + g2 * f) - 4.0 * w1 * w2 * e2)),
        -I * k * w1 * w2 * f * (w1 * w2 - 4.0 * e2),
    ];

    let gf = g * g * fs;
    let pre1 = -w1s / (4.0 * k * z);
    let b1 = [
        0.0,
        pre1 * (gf + 4.0 * k * g1 * z * n1),
        pre1 * (gf * (ks + g2 * g2 - 2.0 * w2s)
            + 4.0 * k * (big_g * big_g * k + g1 * n1 * (ks + g2 * g2 - 2.0 * w2s + fs)) * z),
        pre1 * (gf * (w2s * w2s + ks * (g2 * g2 - 2.0 * w2s))
            + 4.0
                * k
                * (big_g * big_g * k * (g2 * g2 - 2.0 * w2s + fs)
                    + n1 * g1
                        * (ks * g2 * g2 - 2.0 * ks * w2s
                            + w2s * w2s
                            + (ks + g2 * g2 - 2.0 * w2s) * fs)
                    + 4.0 * n2 * g2 * w2s * e2)
                * z),
        -w1s / (4.0 * z)
            * (gf * k * w2s * w2s
                + 4.0
                    * (big_g * big_g * k * (w2s * w2s + g2 * g2 * fs - 2.0 * w2s * fs)
                        + n1 * g1
                            * (w2s * w2s * fs + ks * (w2s * w2s + g2 * g2 * fs - 2.0 * w2s * fs))
                        + 4.0 * n2 * g2 * w2s * (ks + fs) * e2)
                    * z),
        -k * w1s * w2s * fs * ((big_g * big_g + k * g1 * n1) * w2s + 4.0 * k * n2 * g2 * e2),
    ];
    let b2 = [
        0.0,
        -n2 * g2 * w2s,
        -n2 * g2 * w2s * (ks + g1 * g1 - 2.0 * w1s + fs),
        -w2s / (k * z)
            * (g * g * w1s * fs * e2 - 2.0 * big_g * g * k * n2 * g2 * w1 * f * (k + g1 + f) * z
                + k * (n2
                    * g2
                    * (w1s * w1s + g1 * g1 * fs - 2.0 * w1s * fs
                        + ks * (g1 * g1 - 2.0 * w1s + fs))
                    + 4.0 * n1 * g1 * w1s * e2)
                    * z),
        -w2s / z
            * (2.0 * big_g * g * n2 * g2 * w1 * f * (w1s * f + k * (w1s + g1 * f)) * z
                + (n2 * g2 * (w1s * w1s * fs + ks * (w1s * w1s + g1 * g1 * fs - 2.0 * w1s * fs))
                    + 4.0 * w1s * (big_g * big_g * k + n1 * g1 * (ks + fs)) * e2)
                    * z
                + g * g * w1s * fs * (k * e2 + big_g * big_g * n2 * g2 * z)),
        -k * w1s * w2s * fs * (k * n2 * g2 * w1s + 4.0 * (big_g * big_g + k * n1 * g1) * e2),
    ];
    let b = [b1.map(r), b2.map(r)];

    // The determinant expansions hold for a monic polynomial, so evaluate them on
    // a_k / a_0 and b_k / a_0^2.
    let ah: Vec<Complex64> = a.iter().map(|x| x / a[0]).collect();
    let [a0, a1, a2, a3, a4, a5, a6] = [ah[0], ah[1], ah[2], ah[3], ah[4], ah[5], ah[6]];
    let delta6 = a5
        * (a4 * (-a1 * a2 * a3 + a3 * a3 + a1 * a1 * a4)
            + (-a2 * a3 + a1 * (a2 * a2 - 2.0 * a4)) * a5
            + a5 * a5)
        - (a3 * a3 * a3 - a1 * a3 * (a2 * a3 + 3.0 * a5) + a1 * a1 * (a3 * a4 + 2.0 * a2 * a5)) * a6
        + a1 * a1 * a1 * a6 * a6;
    let c1 = -a3 * a4 * a5 + a3 * a3 * a6 + a5 * (a2 * a5 - a1 * a6);
    let c2 = a1 * a4 * a5 - a5 * a5 - a1 * a3 * a6;
    let c3 = -a1 * a2 * a5 + a3 * a5 + a1 * a1 * a6;
    let c4 = -a3 * a3 - a1 * a1 * a4 + a1 * (a2 * a3 + a5);
    let c5 = (a3 * a3 * a4 - a2 * a3 * a5
        + a5 * a5
        + a1 * a1 * (a4 * a4 - a2 * a6)
        + a1 * (-a2 * a3 * a4 + a2 * a2 * a5 - 2.0 * a4 * a5 + a3 * a6))
        / a6;
    let m0 = -(a5 * (-a2 * a3 * a4 + a2 * a2 * a5 + a4 * (a1 * a4 - a0 * a5))
        + (-a1 * a3 * a4 + a0 * a3 * a5 + a2 * (a3 * a3 - 2.0 * a1 * a5)) * a6
        + a1 * a1 * a6 * a6);
    let scale = a[0] * a[0];
    let mut d6 = [Complex64::default(); 2];
    let mut m6 = [Complex64::default(); 2];
    for l in 0..2 {
        let bh: Vec<Complex64> = b[l].iter().map(|x| x / scale).collect();
        d6[l] = c1 * bh[1] + c2 * bh[2] + c3 * bh[3] + c4 * bh[4] + c5 * bh[5];
        m6[l] = (m0 * bh[1] + c1 * bh[2] + c2 * bh[3] + c3 * bh[4] + c4 * bh[5]) / p.omega[l].powi(2);
    }
    Ok(AppendixCoefficients { a, b, delta6, d6, m6 })
}

/// Exact steady-state phonon numbers of both resonators (flat thermal baths only).
pub fn exact_phonon_numbers(p: &ChainParams) -> Result<ExactPhononNumbers> {
    require_two(p)?;
    if p.thermal_mode != ThermalMode::Markovian {
        return Err(Error::UnsupportedMode(
            "the exact two-mode expression assumes flat (markovian) thermal baths".into(),
        ));
    }
    let report = stability_check(p);
    report.require_stable()?;
    let c = appendix_coefficients(p)?;
    if c.delta6.norm() == 0.0 {
        return Err(Error::Numerical("vanishing Hurwitz determinant".into()));
    }
    let mut n = [0.0; 2];
    let mut imag_residue = [0.0; 2];
    for l in 0..2 {
        let v = (I * c.d6[l] / (2.0 * c.delta6) + I * c.m6[l] / (2.0 * c.delta6) - 1.0) / 2.0;
        if !(v.im.abs() <= 1e-9 * v.re.abs().max(1.0)) {
            return Err(Error::Numerical(format!(
                "exact phonon number of resonator {} has imaginary part {:.3e} (real part {:.6e})",
                l + 1,
                v.im,
                v.re
            )));
        }
        n[l] = v.re;
        imag_residue[l] = v.im;
    }
    Ok(ExactPhononNumbers { n, imag_residue })
}
