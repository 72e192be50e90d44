//! Symmetric exclusion process toolkit.
//!
//! Finite kernels and their Green functions ([`kernels`]), generating
//! polynomials of occupancy laws ([`genpoly`]), exact master-equation
//! evolution ([`exactevolve`]), two-particle dual covariances ([`dualcorr`]),
//! stirring Monte Carlo ([`simulate`]) and the statistics used to read the
//! limit theorems off samples ([`stats`]).

pub mod cli;
pub mod dualcorr;
pub mod error;
pub mod exactevolve;
pub mod genpoly;
pub mod kernels;
pub mod numeric;
pub mod simulate;
pub mod stats;

pub use error::{Result, SepError};
