//! Numerical machinery for entropy-method inequalities on truncated convex
//! domains: nonlinearity bundles, extremal profiles, a discrete
//! Gamma-calculus, a desingularized gradient-flow simulator, and verifiers
//! for sharp trace log-Sobolev and Gagliardo-Nirenberg-Sobolev inequalities.

pub mod error;
pub mod flow;
pub mod functionals;
pub mod grid;
pub mod inequalities;
pub mod nonlinearity;
pub mod potential;
pub mod sampling;

pub use error::{Error, Result};
