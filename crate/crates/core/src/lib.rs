//! Root systems with exact arithmetic, elliptic function kernels, and the
//! machinery built on top of them: transition operators for nontrivial
//! bundles over an elliptic curve, generalized-sin bases, twisted elliptic
//! Lax operators, quadratic Hamiltonians, dynamical r-matrices and
//! characteristic-class bookkeeping.

pub mod rat;
pub mod lie;
pub mod elliptic;
pub mod transition;
pub mod gs;
pub mod lax;
pub mod rmatrix;
pub mod charclass;
pub mod report;
