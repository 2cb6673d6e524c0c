//! Parameter sets of the reference figures.

use std::f64::consts::PI;

use crate::params::{to_dimensionless, ChainParams, PhysicalParams, ThermalMode, SPEED_OF_LIGHT};

/// Normalized mechanical frequency of the reference resonators (rad/s).
pub const OMEGA_M: f64 = 2.0 * PI * 10e6;

/// Two identical resonators with `G = 0.3`, `g_cd = 4`, `eta_tilde = 0.1`,
/// `omega_fb = 3`, `kappa = 3.5`, `gamma = 1e-5` (units of `omega_m`).
pub fn effective_damping() -> ChainParams {
    ChainParams {
        omega: vec![1.0, 1.0],
        gamma: vec![1e-5, 1e-5],
        eta_tilde: vec![0.1],
        kappa: 3.5,
        coupling: 0.3,
        g_cd: 4.0,
        omega_fb: 3.0,
        zeta: 0.8,
        nbar: vec![1e3, 1e3],
        thermal_mode: ThermalMode::Markovian,
    }
}

/// The lab-frame two-resonator device: 250 ng resonators at 10 MHz
/// (normalized), a 0.5 mm cavity with `omega_c = 2.817e7 omega_1`, a 1064 nm
/// drive at power `power` (W), cavity decay `kappa_rel * omega_1`,
/// `eta_tilde = 0.05`, `g_cd = 0.9`, `omega_fb = 3 omega_1`, `zeta = 0.8`,
/// `gamma = 1e-5 omega_1` and `nbar = 1e3`.
pub fn device(power: f64, kappa_rel: f64) -> PhysicalParams {
    let m = 250e-12;
    let eta_rel: f64 = 0.05;
    let w = OMEGA_M;
    PhysicalParams {
        mass: vec![m, m],
        omega_tilde: vec![w * (1.0 - 2.0 * eta_rel).sqrt(); 2],
        eta: vec![eta_rel * m * w * w],
        kappa: kappa_rel * w,
        power,
        omega_laser: 2.0 * PI * SPEED_OF_LIGHT / 1064e-9,
        omega_cavity: 2.817e7 * w,
        cavity_length: 0.5e-3,
        gamma: vec![1e-5 * w; 2],
        nbar: vec![1e3; 2],
        zeta: 0.8,
        g_cd: 0.9,
        omega_fb: 3.0 * w,
        thermal_mode: ThermalMode::Markovian,
    }
}

/// [`device`] at 100 mW and `kappa = 3.5 omega_1`, in dimensionless form.
pub fn device_operating_point() -> ChainParams {
    to_dimensionless(&device(0.1, 3.5)).expect("device preset is valid")
}

/// A uniform chain of `n` resonators sharing the device operating point's
/// optical and feedback parameters, with every link set to `eta_tilde`.
pub fn uniform_chain(n: usize, eta_tilde: f64) -> ChainParams {
    let base = device_operating_point();
    ChainParams {
        omega: vec![1.0; n],
        gamma: vec![1e-5; n],
        eta_tilde: vec![eta_tilde; n.saturating_sub(1)],
        nbar: vec![1e3; n],
        kappa: 3.5,
        omega_fb: 3.0,
        ..base
    }
}
