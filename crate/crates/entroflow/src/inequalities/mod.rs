//! The assembled sharp inequalities: the entropy - entropy production
//! bound, the trace logarithmic Sobolev inequality, and the trace
//! Gagliardo-Nirenberg-Sobolev family, plus the dilation machinery and a
//! JSON report schema shared with the command line front end.

mod gns;
mod logsob;
mod report;
mod rescale;

pub use gns::{
    gns_constant, gns_extremizer, gns_rhs_at_lambda, gns_theta, trace_gns_report, verify_gns,
    verify_gns_with_constant, GnsReport, TraceGnsReport,
};
pub use logsob::{
    fisher_information, logsob_rhs_at_lambda, trace_logsob_report, TraceLogSobReport,
};
pub use report::{GridInfo, Params, VerificationReport};
pub use rescale::rescale;

use crate::error::Result;
use crate::functionals::{deficit, DeficitReport};
use crate::grid::Field;
use crate::nonlinearity::Nonlinearity;
use crate::potential::{ExtremalProfile, Potential};

/// A deficit report stamped with the theorem variant that applies and an
/// advisory flag for out-of-hypothesis inputs.
#[derive(Clone, Debug)]
pub struct EntropyVerdict {
    pub report: DeficitReport,
    /// "positive-profile" when the stationary profile is strictly positive,
    /// "generalized-inverse" when it has compact support
    pub variant: String,
    /// true when the curvature hypothesis failed and the numbers are
    /// reported without a theorem verdict
    pub advisory: bool,
}

/// Evaluates the entropy inequality `F(u) - F(v) <= I(u) / (2C)` with `C`
/// the convexity constant of the potential.
pub fn verify_entropy_inequality(
    nl: &Nonlinearity,
    pot: &Potential,
    v: &ExtremalProfile,
    u: &Field,
) -> Result<EntropyVerdict> {
    let d = u.domain().dim();
    let hyp = nl.check_hypothesis_u(d, &Nonlinearity::default_hypothesis_grid());
    let report = deficit(nl, pot, v, u, pot.convexity_constant())?;
    let variant = if v.v.min() > 0.0 {
        "positive-profile"
    } else {
        "generalized-inverse"
    };
    Ok(EntropyVerdict {
        report,
        variant: variant.to_string(),
        advisory: !hyp.satisfied,
    })
}
