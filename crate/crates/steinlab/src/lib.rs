//! steinlab: a numerical laboratory for the standard normal Stein equation.
//!
//! The solution f_h of f'(x) - xf(x) = h(x) - E[h(Z)] is evaluated through
//! three independent representations (direct integral, smoothing-semigroup
//! integral, Mills-ratio form for the (k+1)-st derivative), cross-validated
//! against exact polynomial and finite-difference oracles. Extremal
//! test-function families, exact lattice convolutions for the CLT side, and
//! a claim-by-claim experiment CLI sit on top.

pub mod distributions;
pub mod error;
pub mod experiments;
pub mod normal_kernel;
pub mod poly;
pub mod quadrature;
pub mod report;
pub mod stein_solver;
pub mod sums;
pub mod test_functions;

pub use error::{Result, SteinError};
pub use quadrature::{IntegrationResult, QuadratureSpec};
pub use test_functions::{abs_family, monomial, ramp_family, smooth_probe, Side, TestFunction};
