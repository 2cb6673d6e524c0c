use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::oracle::drift_matrix;
use crate::params::ChainParams;
use crate::twomode;

/// Routh–Hurwitz test on the real degree-6 characteristic polynomial of a two-resonator chain.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RouthHurwitz {
    /// Coefficients of `s^6 .. s^0`.
    pub coefficients: Vec<f64>,
    /// First column of the Routh array.
    pub first_column: Vec<f64>,
    pub stable: bool,
    /// Whether the verdict agrees with the eigenvalue test.
    pub agrees: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityReport {
    pub eigenvalues: Vec<Complex64>,
    pub max_real_part: f64,
    pub stable: bool,
    pub routh_hurwitz: Option<RouthHurwitz>,
}

impl StabilityReport {
    /// Eigenvalue with the largest real part.
    pub fn worst_eigenvalue(&self) -> Complex64 {
        self.eigenvalues
            .iter()
            .copied()
            .fold(Complex64::new(f64::NEG_INFINITY, 0.0), |m, z| if z.re > m.re { z } else { m })
    }

    pub fn require_stable(&self) -> Result<()> {
        if self.stable {
            Ok(())
        } else {
            Err(Error::Stability {
                eigenvalue: self.worst_eigenvalue(),
                max_real_part: self.max_real_part,
            })
        }
    }
}

/// First column of the Routh array of `c[0] s^n + ... + c[n]`.
pub fn routh_first_column(c: &[f64]) -> Vec<f64> {
    let deg = c.len() - 1;
    let width = deg / 2 + 1;
    let row = |start: usize| -> Vec<f64> {
        (0..width).map(|k| c.get(start + 2 * k).copied().unwrap_or(0.0)).collect()
    };
    let mut prev = row(0);
    let mut cur = row(1);
    let mut column = vec![prev[0], cur[0]];
    for _ in 2..=deg {
        if cur[0] == 0.0 {
            column.push(0.0);
            break;
        }
        let next: Vec<f64> = (0..width)
            .map(|k| {
                let a = prev.get(k + 1).copied().unwrap_or(0.0);
                let b = cur.get(k + 1).copied().unwrap_or(0.0);
                (cur[0] * a - prev[0] * b) / cur[0]
            })
            .collect();
        column.push(next[0]);
        prev = cur;
        cur = next;
    }
    column
}

/// Eigenvalue stability of the augmented drift matrix, cross-checked by
/// Routh–Hurwitz for two-resonator chains. Both tests must pass.
pub fn stability_check(p: &ChainParams) -> StabilityReport {
    let a = drift_matrix(p);
    let eigenvalues: Vec<Complex64> = a.complex_eigenvalues().iter().copied().collect();
    let max_real_part = eigenvalues
        .iter()
        .map(|z| z.re)
        .fold(f64::NEG_INFINITY, f64::max);
    let eig_stable = max_real_part < 0.0 && max_real_part.is_finite();
    let routh_hurwitz = if p.n() == 2 {
        twomode::appendix_coefficients(p).ok().map(|coef| {
            let coefficients = twomode::characteristic_polynomial(&coef.a).to_vec();
            let first_column = routh_first_column(&coefficients);
            let stable = first_column.len() == coefficients.len()
                && first_column.iter().all(|&x| x > 0.0);
            RouthHurwitz {
                coefficients,
                first_column,
                stable,
                agrees: stable == eig_stable,
            }
        })
    } else {
        None
    };
    if let Some(rh) = &routh_hurwitz {
        if !rh.agrees {
            log::warn!(
                "eigenvalue and Routh-Hurwitz stability verdicts disagree (max real part {max_real_part:.3e})"
            );
        }
    }
    let stable = eig_stable && routh_hurwitz.as_ref().is_none_or(|r| r.stable);
    StabilityReport {
        eigenvalues,
        max_real_part,
        stable,
        routh_hurwitz,
    }
}
