#![allow(dead_code)]

use domino_core::chain::stability_check;
use domino_core::{ChainParams, ThermalMode};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn log_uniform(r: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    r.random_range(lo.ln()..hi.ln()).exp()
}

/// A random two-resonator parameter set; may be unstable.
pub fn draw_pair(r: &mut ChaCha8Rng) -> ChainParams {
    let w1: f64 = r.random_range(0.6..1.6);
    let w2: f64 = r.random_range(0.6..1.6);
    let eta_max = 0.45 * (w1 * w2).sqrt();
    ChainParams {
        omega: vec![w1, w2],
        gamma: vec![log_uniform(r, 1e-5, 1e-2), log_uniform(r, 1e-5, 1e-2)],
        eta_tilde: vec![r.random_range(0.0..eta_max)],
        kappa: r.random_range(0.5..6.0),
        coupling: r.random_range(0.0..0.6),
        g_cd: r.random_range(0.0..3.0),
        omega_fb: r.random_range(0.5..6.0),
        zeta: r.random_range(0.3..1.0),
        nbar: vec![log_uniform(r, 1.0, 1e3), log_uniform(r, 1.0, 1e3)],
        thermal_mode: ThermalMode::Markovian,
    }
}

/// Draws until `count` stable parameter sets are collected.
pub fn stable_pairs(seed: u64, count: usize) -> Vec<ChainParams> {
    let mut r = rng(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let p = draw_pair(&mut r);
        if p.validate().is_ok() && stability_check(&p).stable {
            out.push(p);
        }
    }
    out
}
