use serde::{Deserialize, Serialize};

use crate::chain::{self, stability_check, QuadratureDiagnostics, QuadratureOptions, StabilityReport};
use crate::error::{Error, Result};
use crate::oracle;
use crate::params::ChainParams;
use crate::twomode;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Solver {
    /// Spectral integration of the frequency-domain solution.
    Quadrature,
    /// Closed form, two resonators only.
    Appendix,
    /// Steady covariance of the state-space model.
    Lyapunov,
}

impl Solver {
    pub const ALL: [Solver; 3] = [Solver::Quadrature, Solver::Appendix, Solver::Lyapunov];

    pub fn name(self) -> &'static str {
        match self {
            Solver::Quadrature => "quadrature",
            Solver::Appendix => "appendix",
            Solver::Lyapunov => "lyapunov",
        }
    }
}

impl std::fmt::Display for Solver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Solver {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "quadrature" => Ok(Solver::Quadrature),
            "appendix" => Ok(Solver::Appendix),
            "lyapunov" => Ok(Solver::Lyapunov),
            other => Err(Error::config(format!("unknown solver {other:?}"))),
        }
    }
}

/// Final phonon numbers with provenance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoolingResult {
    pub n_f: Vec<f64>,
    pub solver: Solver,
    pub stability: StabilityReport,
    pub position_variance: Vec<f64>,
    pub momentum_variance: Vec<f64>,
    pub quadrature: Option<QuadratureDiagnostics>,
    /// Imaginary parts discarded by the closed-form solver.
    pub imag_residue: Option<Vec<f64>>,
}

/// Computes final phonon numbers with the chosen solver.
pub fn solve(p: &ChainParams, solver: Solver, opts: &QuadratureOptions) -> Result<CoolingResult> {
    p.validate()?;
    match solver {
        Solver::Quadrature => chain::phonon_numbers(p, opts),
        Solver::Appendix => {
            let exact = twomode::exact_phonon_numbers(p)?;
            Ok(CoolingResult {
                n_f: exact.n.to_vec(),
                solver,
                stability: stability_check(p),
                position_variance: Vec::new(),
                momentum_variance: Vec::new(),
                quadrature: None,
                imag_residue: Some(exact.imag_residue.to_vec()),
            })
        }
        Solver::Lyapunov => {
            let model = oracle::build(p)?;
            let stability = stability_check(p);
            stability.require_stable()?;
            let v = oracle::steady_covariance(&model)?;
            let (position_variance, momentum_variance) = oracle::variances_from_covariance(p.n(), &v);
            Ok(CoolingResult {
                n_f: oracle::phonon_numbers_from_covariance(p.n(), &v),
                solver,
                stability,
                position_variance,
                momentum_variance,
                quadrature: None,
                imag_residue: None,
            })
        }
    }
}
