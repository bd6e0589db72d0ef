//! Computational backend for semi-simple cohomological field theories built
//! from modular functor data (label set, normalized S-matrix, conformal
//! weights, central charge).
//!
//! The crate exposes three computational pipelines that are designed to be
//! cross-checked against each other:
//!
//! * [`frobenius`] — the Frobenius algebra of the S-matrix: fusion rules,
//!   Verlinde dimensions, curve-operator eigenvalues, fusion potentials;
//! * [`cohft`] — the Givental side: stable graphs and graph-sum evaluation of
//!   CohFT correlator integrals from a diagonal R-matrix and translation;
//! * [`toprec`] — the residue side: local spectral curves and the
//!   Eynard-Orantin topological recursion, with decomposition of the output
//!   forms on the polar basis carrying the CohFT integrals as coefficients.
//!
//! Supporting modules: [`series`] (truncated Laurent arithmetic), [`intersect`]
//! (exact psi-class intersection numbers via the Virasoro/DVV recursion),
//! [`catalog`] (built-in modular functors: SU(2) and sl_N WZW data, finite
//! group quantum doubles) and [`hurwitz`] (symmetric-group characters and
//! restricted double Hurwitz series).

pub mod catalog;
pub mod cohft;
pub mod frobenius;
pub mod hurwitz;
pub mod intersect;
pub mod scalar;
pub mod series;
pub mod tensor;
pub mod toprec;

pub use frobenius::ModularFunctorData;
pub use scalar::{Rational, Scalar, Tolerance};
pub use series::LaurentSeries;
pub use tensor::CorrelatorTensor;
