use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{apply, ParamPath, Scale};
use crate::chain::QuadratureOptions;
use crate::error::{Error, Result};
use crate::params::Config;
use crate::solver::{solve, Solver};

/// Scalar figure of merit minimized by [`optimize_cooling`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Objective {
    /// Largest phonon number in the chain.
    MaxN,
    /// Phonon number of the first resonator.
    N1,
    /// Mean phonon number.
    #[default]
    MeanN,
}

impl Objective {
    pub fn score(self, n: &[f64]) -> f64 {
        match self {
            Objective::MaxN => n.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            Objective::N1 => n[0],
            Objective::MeanN => n.iter().sum::<f64>() / n.len() as f64,
        }
    }
}

impl FromStr for Objective {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "max-n" => Ok(Objective::MaxN),
            "n1" => Ok(Objective::N1),
            "mean-n" => Ok(Objective::MeanN),
            other => Err(Error::config(format!("unknown objective {other:?} (max-n, n1, mean-n)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NelderMeadOptions {
    /// Initial simplex edge in unit-box coordinates.
    pub step: f64,
    pub x_tol: f64,
    pub f_tol: f64,
    pub max_evals: usize,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        NelderMeadOptions {
            step: 0.1,
            x_tol: 1e-6,
            f_tol: 1e-10,
            max_evals: 400,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimplexResult {
    pub x: Vec<f64>,
    pub f: f64,
    pub evaluations: usize,
    pub converged: bool,
}

/// Nelder–Mead minimization over the unit box `[0, 1]^d`; trial points are clamped to the box.
pub fn nelder_mead<F>(mut f: F, start: &[f64], opts: &NelderMeadOptions) -> SimplexResult
where
    F: FnMut(&[f64]) -> f64,
{
    let d = start.len();
    let clamp = |x: &mut Vec<f64>| x.iter_mut().for_each(|v| *v = v.clamp(0.0, 1.0));
    let mut evals = 0;
    let mut eval = |x: &[f64], evals: &mut usize| {
        *evals += 1;
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(d + 1);
    let x0 = {
        let mut x = start.to_vec();
        clamp(&mut x);
        x
    };
    simplex.push((x0.clone(), eval(&x0, &mut evals)));
    for i in 0..d {
        let mut x = x0.clone();
        x[i] += if x[i] + opts.step <= 1.0 { opts.step } else { -opts.step };
        let fx = eval(&x, &mut evals);
        simplex.push((x, fx));
    }
    let mut converged = false;
    while evals < opts.max_evals {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let best = simplex[0].1;
        let worst = simplex[d].1;
        let diameter = simplex[1..]
            .iter()
            .map(|(x, _)| x.iter().zip(&simplex[0].0).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
            .fold(0.0, f64::max);
        if best.is_finite() && (worst - best).abs() <= opts.f_tol * (best.abs() + 1e-300) && diameter <= opts.x_tol
            || diameter <= 1e-3 * opts.x_tol
        {
            converged = best.is_finite();
            break;
        }
        let centroid: Vec<f64> = (0..d)
            .map(|k| simplex[..d].iter().map(|(x, _)| x[k]).sum::<f64>() / d as f64)
            .collect();
        let along = |t: f64| -> Vec<f64> {
            let mut x: Vec<f64> = (0..d).map(|k| centroid[k] + t * (simplex[d].0[k] - centroid[k])).collect();
            clamp(&mut x);
            x
        };
        let xr = along(-1.0);
        let fr = eval(&xr, &mut evals);
        if fr < simplex[0].1 {
            let xe = along(-2.0);
            let fe = eval(&xe, &mut evals);
            simplex[d] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[d - 1].1 {
            simplex[d] = (xr, fr);
        } else {
            let (xc, fc) = if fr < worst {
                let x = along(-0.5);
                let v = eval(&x, &mut evals);
                (x, v)
            } else {
                let x = along(0.5);
                let v = eval(&x, &mut evals);
                (x, v)
            };
            if fc < fr.min(worst) {
                simplex[d] = (xc, fc);
            } else {
                let x_best = simplex[0].0.clone();
                for item in simplex.iter_mut().skip(1) {
                    let x: Vec<f64> = item.0.iter().zip(&x_best).map(|(v, b)| b + 0.5 * (v - b)).collect();
                    let fx = eval(&x, &mut evals);
                    *item = (x, fx);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (x, f) = simplex.swap_remove(0);
    SimplexResult {
        x,
        f,
        evaluations: evals,
        converged,
    }
}

/// Box bound of one optimized parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bound {
    pub path: ParamPath,
    pub lo: f64,
    pub hi: f64,
    #[serde(default)]
    pub scale: Scale,
}

impl Bound {
    pub fn new(path: ParamPath, lo: f64, hi: f64, scale: Scale) -> Self {
        Bound { path, lo, hi, scale }
    }

    /// Parses `name:lo:hi[:lin|log]`.
    pub fn parse(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        if !(3..=4).contains(&parts.len()) {
            return Err(Error::config(format!("bound {s:?} must look like name:lo:hi[:lin|log]")));
        }
        let num = |t: &str| -> Result<f64> {
            t.parse().map_err(|_| Error::config(format!("bad number {t:?} in bound {s:?}")))
        };
        let b = Bound {
            path: parts[0].parse()?,
            lo: num(parts[1])?,
            hi: num(parts[2])?,
            scale: parts.get(3).map_or(Ok(Scale::Lin), |t| t.parse())?,
        };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lo.is_finite() && self.hi.is_finite() && self.lo < self.hi) {
            return Err(Error::config(format!("bound on {} must be finite and increasing", self.path)));
        }
        if self.scale == Scale::Log && self.lo <= 0.0 {
            return Err(Error::config(format!("log bound on {} needs a positive range", self.path)));
        }
        Ok(())
    }

    fn map(&self, u: f64) -> f64 {
        match self.scale {
            Scale::Lin => self.lo + u * (self.hi - self.lo),
            Scale::Log => (self.lo.ln() + u * (self.hi.ln() - self.lo.ln())).exp(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Optimum {
    pub parameters: Vec<String>,
    pub values: Vec<f64>,
    pub n_f: Vec<f64>,
    pub objective: Objective,
    pub objective_value: f64,
    pub evaluations: usize,
    pub starts: usize,
    pub converged: bool,
}

/// Minimizes `objective` over box-bounded parameters with a multi-start Nelder–Mead.
///
/// Starts sit on the lattice `{0.25, 0.5, 0.75}^d` of the unit box. Points that fail
/// to solve (unstable, buckled, not converged) score `+inf`.
pub fn optimize_cooling(
    base: &Config,
    bounds: &[Bound],
    objective: Objective,
    solver: Solver,
    quadrature: &QuadratureOptions,
    opts: &NelderMeadOptions,
) -> Result<Optimum> {
    if bounds.is_empty() {
        return Err(Error::config("optimization needs at least one bounded parameter"));
    }
    for b in bounds {
        b.validate()?;
    }
    let d = bounds.len();
    let to_params = |u: &[f64]| -> Vec<(ParamPath, f64)> { bounds.iter().zip(u).map(|(b, &x)| (b.path, b.map(x))).collect() };
    let score = |u: &[f64]| -> f64 {
        apply(base, &to_params(u))
            .and_then(|p| solve(&p, solver, quadrature))
            .map_or(f64::INFINITY, |r| objective.score(&r.n_f))
    };
    let lattice = [0.25, 0.5, 0.75];
    let starts: Vec<Vec<f64>> = (0..lattice.len().pow(d as u32))
        .map(|mut k| {
            (0..d)
                .map(|_| {
                    let v = lattice[k % 3];
                    k /= 3;
                    v
                })
                .collect()
        })
        .collect();
    let runs: Vec<SimplexResult> = starts.par_iter().map(|s| nelder_mead(score, s, opts)).collect();
    let evaluations = runs.iter().map(|r| r.evaluations).sum();
    let best = runs
        .into_iter()
        .filter(|r| r.f.is_finite())
        .min_by(|a, b| a.f.total_cmp(&b.f))
        .ok_or_else(|| Error::Optimization(format!("every one of {} starts failed to produce a solvable point", starts.len())))?;
    let assignments = to_params(&best.x);
    let p = apply(base, &assignments)?;
    let n_f = solve(&p, solver, quadrature)?.n_f;
    Ok(Optimum {
        parameters: bounds.iter().map(|b| b.path.to_string()).collect(),
        values: assignments.iter().map(|&(_, v)| v).collect(),
        objective_value: objective.score(&n_f),
        n_f,
        objective,
        evaluations,
        starts: starts.len(),
        converged: best.converged,
    })
}
