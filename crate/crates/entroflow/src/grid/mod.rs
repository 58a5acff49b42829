//! Discretization of truncated convex domains and the Gamma-calculus,
//! differential operators and quadrature used by every other module.

mod domain;
mod field;
mod ops;

pub use domain::{Domain, FaceKind, Side};
pub use field::Field;
pub use ops::{
    boundary_flux, check_cd_condition, check_hessian_gamma_identity, deriv_axis, divergence,
    gamma, gamma2, gradient, hessian, integrate, laplacian, second_deriv_axis,
    surface_integral_normal_derivative, trace_integrate, CdReport, IdentityReport,
};
