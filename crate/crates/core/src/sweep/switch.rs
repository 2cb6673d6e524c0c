use serde::Serialize;

use super::{apply, ParamPath};
use crate::chain::QuadratureOptions;
use crate::error::{Error, Result};
use crate::params::Config;
use crate::solver::{solve, Solver};

const MAX_ITERATIONS: usize = 200;

/// Parameter value at which the first two resonators exchange the lower phonon number.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SwitchPoint {
    pub parameter: String,
    pub value: f64,
    pub n_f: Vec<f64>,
    pub iterations: usize,
    pub residual: f64,
}

/// Bisection on `f` over a sign-changing bracket.
///
/// `f` returns the signed quantity and a scale; iteration stops once
/// `|f| <= rel_tol * scale` or the bracket collapses to adjacent floats.
/// Returns the root estimate, the evaluation there and the iteration count.
pub fn bisect<F, T>(mut f: F, lo: f64, hi: f64, rel_tol: f64) -> Result<(f64, T, usize)>
where
    F: FnMut(f64) -> Result<(f64, f64, T)>,
{
    let (f_lo, s_lo, at_lo) = f(lo)?;
    if f_lo.abs() <= rel_tol * s_lo {
        return Ok((lo, at_lo, 0));
    }
    let (f_hi, s_hi, at_hi) = f(hi)?;
    if f_hi.abs() <= rel_tol * s_hi {
        return Ok((hi, at_hi, 0));
    }
    if f_lo.signum() == f_hi.signum() || f_lo.is_nan() || f_hi.is_nan() {
        return Err(Error::Bracket { lo, hi, f_lo, f_hi });
    }
    let (mut a, mut b, mut fa) = (lo, hi, f_lo);
    let mut best = (lo, at_lo, f_lo.abs());
    for it in 1..=MAX_ITERATIONS {
        let m = 0.5 * (a + b);
        let (fm, sm, at) = f(m)?;
        if fm.abs() <= rel_tol * sm || m == a || m == b {
            return Ok((m, at, it));
        }
        if fm.abs() < best.2 {
            best = (m, at, fm.abs());
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    Ok((best.0, best.1, MAX_ITERATIONS))
}

/// Locates where `n_1 - n_2` changes sign as `path` moves across `[lo, hi]`.
pub fn find_switch_point(
    base: &Config,
    path: ParamPath,
    lo: f64,
    hi: f64,
    solver: Solver,
    opts: &QuadratureOptions,
) -> Result<SwitchPoint> {
    if !(lo.is_finite() && hi.is_finite()) || lo >= hi {
        return Err(Error::config(format!("switch-point bracket [{lo}, {hi}] must be finite and increasing")));
    }
    let eval = |x: f64| -> Result<(f64, f64, Vec<f64>)> {
        let p = apply(base, &[(path, x)])?;
        if p.n() < 2 {
            return Err(Error::config("a switch point needs at least two resonators"));
        }
        let n = solve(&p, solver, opts)?.n_f;
        let scale = n[0].abs().max(n[1].abs());
        Ok((n[0] - n[1], scale, n))
    };
    let (value, n_f, iterations) = bisect(eval, lo, hi, 1e-6)?;
    let residual = n_f[0] - n_f[1];
    Ok(SwitchPoint {
        parameter: path.to_string(),
        value,
        n_f,
        iterations,
        residual,
    })
}
