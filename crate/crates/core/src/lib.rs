//! Cold-damping feedback cooling of a chain of coupled mechanical resonators.
//!
//! Three independent solvers compute the steady-state phonon numbers:
//! frequency-domain spectral integration ([`chain`]), the closed-form two-mode
//! expression ([`twomode`]) and a Lyapunov covariance solve ([`oracle`]).

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod chain;
pub mod error;
pub mod figures;
pub mod oracle;
pub mod params;
pub mod presets;
mod solver;
pub mod sweep;
pub mod twomode;

pub use chain::{QuadratureOptions, StabilityReport};
pub use error::{Error, Result};
pub use params::{ChainParams, Config, PhysicalParams, ThermalMode};
pub use solver::{solve, CoolingResult, Solver};
pub use sweep::format_number;
