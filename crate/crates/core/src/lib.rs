//! Explicit certificates for bounded normal generation of unitary groups.
//!
//! Given a target unitary `u` and a base unitary `v`, the pipelines in
//! [`certify`] write `u` (up to a global phase) as a short product of
//! conjugates of `v` and `v⁻¹`, and [`certify::verify`] checks such a
//! product from the certificate alone. The number of factors is bounded by
//! a constant times `ℓ(u)/ℓ_ess(v)`, where `ℓ` is the projective length of
//! [`length`].
//!
//! Infinite-multiplicity spectra are represented by [`ClusteredModel`] and
//! truncated to finite diagonals; all checks are carried out on those
//! truncations.

pub mod certify;
pub mod decomp;
pub mod diagonal;
pub mod error;
pub mod length;
pub mod matrix;
pub mod oracle;
pub mod phase;
pub mod sample;
pub mod selftest;
pub mod su2;
pub mod typeiii;

pub use diagonal::{ClusteredModel, DiagonalUnitary};
pub use error::{Error, Result};
pub use matrix::UnitaryMatrix;
pub use phase::{normalize_phase, Phase};

/// Unitarity tolerance for matrices entering a computation.
pub const UNITARITY_TOL: f64 = 1e-10;
/// Residual allowed for constructed decompositions and chains.
pub const DECOMPOSITION_TOL: f64 = 1e-8;
/// Default verification tolerance for certificates.
pub const VERIFY_TOL: f64 = 1e-6;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/lengths.md")]
    mod lengths {}
    #[doc = include_str!("../../../book/src/decompositions.md")]
    mod decompositions {}
    #[doc = include_str!("../../../book/src/su2.md")]
    mod su2 {}
    #[doc = include_str!("../../../book/src/certificates.md")]
    mod certificates {}
    #[doc = include_str!("../../../book/src/commutators.md")]
    mod commutators {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
    #[doc = include_str!("../../../book/src/acceptance.md")]
    mod acceptance {}
}
