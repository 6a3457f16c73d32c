//! Difference operators on the full one-sided shift space over `N` symbols.
//!
//! The space is approximated by the nested vertex sets `V_m` of eventually
//! constant sequences. This crate assembles the exact integer difference
//! operators `H_m` on the ordered `V_m`, produces their complete Dirichlet
//! spectra with multiplicities and explicit eigenbases by spectral
//! decimation, verifies everything against an independent dense symmetric
//! eigensolver, and iterates the renormalized limit `N^{m+1} λ_m` that yields
//! Dirichlet eigenvalues of the continuum Laplacian.
//!
//! Modules:
//!
//! * [`symbolic`] — points, vertex sets, neighborhoods, metric, measure.
//! * [`operator`] — exact assembly of `H_m` and its Dirichlet restriction.
//! * [`decimation`] — eigenvalue refinement maps, spectra, eigenbases.
//! * [`oracle`] — cyclic-Jacobi eigensolver and spectrum comparison.
//! * [`continuum`] — fibre extension, renormalized limits, diagnostics.
//!
//! All floating-point computations are generic over [`Scalar`] (`f32` or
//! `f64`); matrix entries, multiplicities, metric and measure stay exact
//! (`i64`, `u64`, big rationals).

pub mod continuum;
pub mod decimation;
mod error;
pub mod operator;
pub mod oracle;
mod scalar;
pub mod symbolic;

pub use error::{Error, Result};
pub use scalar::Scalar;
pub use symbolic::DEFAULT_SIZE_CAP;

/// `f64` instantiations of the scalar-generic types.
pub type GridFunction64 = operator::GridFunction<f64>;
pub type SpectrumEntry64 = decimation::SpectrumEntry<f64>;
pub type EigenPair64 = decimation::EigenPair<f64>;
pub type OracleSpectrum64 = oracle::OracleSpectrum<f64>;
pub type ComparisonReport64 = oracle::ComparisonReport<f64>;
pub type LimitTrace64 = continuum::LimitTrace<f64>;
pub type ExtendedEigenfunction64 = continuum::ExtendedEigenfunction<f64>;

/// `f32` instantiations of the scalar-generic types.
pub type GridFunction32 = operator::GridFunction<f32>;
pub type SpectrumEntry32 = decimation::SpectrumEntry<f32>;
pub type EigenPair32 = decimation::EigenPair<f32>;
pub type OracleSpectrum32 = oracle::OracleSpectrum<f32>;
pub type ComparisonReport32 = oracle::ComparisonReport<f32>;
pub type LimitTrace32 = continuum::LimitTrace<f32>;
pub type ExtendedEigenfunction32 = continuum::ExtendedEigenfunction<f32>;
