mod common;

use domino_core::chain::{self, stability_check};
use domino_core::oracle;
use domino_core::params::to_dimensionless;
use domino_core::twomode::{self, effective_response};
use domino_core::{presets, solve, ChainParams, QuadratureOptions, Solver};
use proptest::prelude::*;

// G / omega_1 of the device preset, from a hand evaluation of the coupling formula.
const DEVICE_COUPLING: f64 = 0.4556522003007523;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

fn pair_strategy() -> impl Strategy<Value = ChainParams> {
    any::<u64>().prop_filter_map("unstable draw", |seed| {
        let p = common::draw_pair(&mut common::rng(seed));
        (p.validate().is_ok() && stability_check(&p).stable).then_some(p)
    })
}

#[test]
fn device_coupling_is_frozen() {
    let c = presets::device_operating_point();
    assert!(rel(c.coupling, DEVICE_COUPLING) < 1e-12, "{}", c.coupling);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn rescaling_every_frequency_leaves_phonon_numbers(c in 0.2f64..5.0) {
        let base = presets::device(0.1, 3.5);
        let mut scaled = base.clone();
        scaled.omega_tilde.iter_mut().for_each(|w| *w *= c);
        scaled.eta.iter_mut().for_each(|e| *e *= c * c);
        scaled.kappa *= c;
        scaled.omega_laser *= c;
        scaled.omega_cavity *= c;
        scaled.gamma.iter_mut().for_each(|g| *g *= c);
        scaled.omega_fb *= c;
        scaled.power *= c.powi(3);
        let a = to_dimensionless(&base).unwrap();
        let b = to_dimensionless(&scaled).unwrap();
        prop_assert!(rel(b.coupling, a.coupling) < 1e-12);
        let na = solve(&a, Solver::Lyapunov, &QuadratureOptions::default()).unwrap().n_f;
        let nb = solve(&b, Solver::Lyapunov, &QuadratureOptions::default()).unwrap().n_f;
        for j in 0..2 {
            prop_assert!(rel(nb[j], na[j]) < 1e-9);
        }
    }

    #[test]
    fn link_sign_does_not_matter(p in pair_strategy()) {
        // flipping q_2, p_2 maps the model with -eta_tilde onto the original
        let covariance = |p: &ChainParams| {
            let m = oracle::build(p).unwrap();
            oracle::steady_covariance(&m).unwrap()
        };
        let mut q = p.clone();
        q.eta_tilde[0] = -q.eta_tilde[0];
        let a = oracle::phonon_numbers_from_covariance(2, &covariance(&p));
        let b = oracle::phonon_numbers_from_covariance(2, &covariance(&q));
        for j in 0..2 {
            prop_assert!(rel(b[j], a[j]) < 1e-9, "{a:?} {b:?}");
        }
    }

    #[test]
    fn noise_terms_are_non_negative(p in pair_strategy(), w in -8.0f64..8.0) {
        let b = twomode::noise_breakdown(&p, w).unwrap();
        prop_assert!(b.feedback >= 0.0);
        prop_assert!(b.radiation_pressure >= 0.0);
        prop_assert!(b.thermal.iter().all(|&x| x >= 0.0));
        prop_assert!(b.mechanical.iter().all(|&x| x >= 0.0));
        for j in 0..2 {
            prop_assert!(chain::spectrum(&p, w, j).unwrap() >= 0.0);
        }
    }

    #[test]
    fn chain_spectrum_matches_two_mode_closed_form(p in pair_strategy(), w in -6.0f64..6.0) {
        for j in 0..2 {
            let a = chain::spectrum(&p, w, j).unwrap();
            let b = twomode::position_spectrum_twomode(&p, w, j).unwrap();
            prop_assert!(rel(a, b) < 1e-10, "j={j} w={w}: {a} vs {b}");
        }
    }

    #[test]
    fn spectra_are_even_in_frequency(p in pair_strategy(), w in 0.0f64..6.0) {
        for j in 0..2 {
            let a = chain::spectrum(&p, w, j).unwrap();
            let b = chain::spectrum(&p, -w, j).unwrap();
            prop_assert!(rel(a, b) < 1e-12);
        }
    }

    #[test]
    fn without_gain_detection_is_irrelevant(p in pair_strategy(), zeta in 0.2f64..1.0, fb in 0.5f64..6.0) {
        let off = ChainParams { g_cd: 0.0, ..p.clone() };
        let other = ChainParams { zeta, omega_fb: fb, ..off.clone() };
        let a = solve(&off, Solver::Lyapunov, &QuadratureOptions::default()).unwrap().n_f;
        let b = solve(&other, Solver::Lyapunov, &QuadratureOptions::default()).unwrap().n_f;
        for j in 0..2 {
            prop_assert!(rel(b[j], a[j]) < 1e-9);
        }
    }

    #[test]
    fn phonon_numbers_are_positive(p in pair_strategy()) {
        let n = solve(&p, Solver::Lyapunov, &QuadratureOptions::default()).unwrap().n_f;
        prop_assert!(n.iter().all(|&x| x > 0.0), "{n:?}");
    }

    #[test]
    fn reversed_uncontrolled_chain_reverses_occupancies(
        w in prop::collection::vec(0.7f64..1.5, 3),
        nbar in prop::collection::vec(1.0f64..1e3, 3),
        eta in 0.0f64..0.2,
    ) {
        let p = ChainParams {
            omega: w.clone(),
            gamma: vec![1e-3, 2e-3, 5e-4],
            eta_tilde: vec![eta, 0.5 * eta],
            coupling: 0.0,
            g_cd: 0.0,
            nbar: nbar.clone(),
            ..presets::device_operating_point()
        };
        let mut r = p.clone();
        r.omega.reverse();
        r.gamma.reverse();
        r.eta_tilde.reverse();
        r.nbar.reverse();
        let a = solve(&p, Solver::Lyapunov, &QuadratureOptions::default()).unwrap().n_f;
        let mut b = solve(&r, Solver::Lyapunov, &QuadratureOptions::default()).unwrap().n_f;
        b.reverse();
        for j in 0..3 {
            prop_assert!(rel(b[j], a[j]) < 1e-8, "{a:?} {b:?}");
        }
    }
}

#[test]
fn equal_baths_without_cooling_reach_the_gibbs_state() {
    let eta = 0.05;
    let p = ChainParams {
        coupling: 0.0,
        g_cd: 0.0,
        ..presets::uniform_chain(3, eta)
    };
    // V_pp = nbar + 1/2 and V_qq = (nbar + 1/2) K^-1 with stiffness K = 1 - 2 eta (adjacency)
    let k = nalgebra::DMatrix::from_fn(3, 3, |i, j| match i.abs_diff(j) {
        0 => 1.0,
        1 => -2.0 * eta,
        _ => 0.0,
    });
    let kinv = k.try_inverse().unwrap();
    let h = 1e3 + 0.5;
    for s in [Solver::Quadrature, Solver::Lyapunov] {
        let n = solve(&p, s, &QuadratureOptions::default()).unwrap().n_f;
        for j in 0..3 {
            let expected = 0.5 * (h * (1.0 + kinv[(j, j)]) - 1.0);
            assert!(rel(n[j], expected) < 1e-9, "{s} j={j}: {} vs {expected}", n[j]);
        }
    }
}

#[test]
fn decoupled_pair_reduces_to_single_resonator() {
    let pair = ChainParams {
        eta_tilde: vec![0.0],
        ..presets::device_operating_point()
    };
    let single = ChainParams {
        omega: vec![1.0],
        gamma: vec![pair.gamma[0]],
        eta_tilde: vec![],
        nbar: vec![pair.nbar[0]],
        ..pair.clone()
    };
    let opts = QuadratureOptions::default();
    let a = solve(&pair, Solver::Quadrature, &opts).unwrap().n_f;
    let b = solve(&single, Solver::Quadrature, &opts).unwrap().n_f;
    assert!(rel(a[0], b[0]) < 1e-8, "{a:?} {b:?}");
    assert!(rel(a[1], pair.nbar[1]) < 1e-6, "{a:?}");
}

#[test]
fn loop_damping_grows_with_gain() {
    let base = presets::effective_damping();
    let mut last = f64::NEG_INFINITY;
    for k in 0..20 {
        let p = ChainParams {
            g_cd: 4.0 * k as f64 / 19.0,
            ..base.clone()
        };
        let g = effective_response(&p, 0.0).unwrap().damping[0];
        assert!(g > last, "g_cd step {k}: {g} <= {last}");
        last = g;
    }
}

#[test]
fn quadrature_is_independent_of_worker_count() {
    let p = presets::uniform_chain(3, 0.05);
    let opts = QuadratureOptions::default();
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| solve(&p, Solver::Quadrature, &opts).unwrap().n_f)
    };
    let one = run(1);
    let many = run(4);
    for (a, b) in one.iter().zip(&many) {
        assert_eq!(a.to_bits(), b.to_bits());
    }
}

#[test]
fn closed_form_keeps_imaginary_parts_small() {
    for p in common::stable_pairs(7, 40) {
        let e = twomode::exact_phonon_numbers(&p).unwrap();
        for j in 0..2 {
            assert!(e.imag_residue[j].abs() < 1e-9 * e.n[j].abs().max(1.0));
        }
    }
}
