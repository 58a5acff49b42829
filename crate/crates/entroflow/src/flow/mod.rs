//! Desingularized gradient flow: the regularized nonlinearity, the
//! conservative finite-volume scheme, and the dynamic certificates (mass
//! conservation, entropy decay, the entropy second-derivative identity,
//! exponential production decay, and the comparison principle).

mod desingularize;
mod scheme;

pub use desingularize::{desingularize, DesingularizedNonlinearity};
pub use scheme::{
    check_comparison, check_second_derivative_identity, choose_epsilon, fit_decay_rate, run_flow,
    stationary_family, ComparisonReport, FlowConfig, FlowTrace, IdentityCheckReport,
};
