//! Serializable verification report shared by the library and the command
//! line front end.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::functionals::DeficitReport;
use crate::grid::Domain;
use crate::inequalities::{GnsReport, TraceGnsReport, TraceLogSobReport};

pub const REPORT_SCHEMA: u32 = 1;

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct Params {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    pub h: f64,
    pub d: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct GridInfo {
    pub cells: Vec<usize>,
    pub box_lo: Vec<f64>,
    pub box_hi: Vec<f64>,
}

impl GridInfo {
    pub fn from_domain(dom: &Domain) -> Self {
        GridInfo {
            cells: (0..dom.dim()).map(|a| dom.cells(a)).collect(),
            box_lo: (0..dom.dim()).map(|a| dom.lo(a)).collect(),
            box_hi: (0..dom.dim()).map(|a| dom.hi(a)).collect(),
        }
    }
}

/// One verification, one JSON object.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct VerificationReport {
    pub schema: u32,
    pub inequality: String,
    pub params: Params,
    pub lhs: f64,
    pub rhs: f64,
    pub deficit: f64,
    pub constants: BTreeMap<String, f64>,
    pub grid: GridInfo,
    pub pass: bool,
}

fn passes(deficit: f64, rhs: f64) -> bool {
    deficit >= -1e-8 * (1.0 + rhs.abs())
}

impl VerificationReport {
    pub fn from_logsob(rep: &TraceLogSobReport, dom: &Domain) -> Self {
        let mut constants = BTreeMap::new();
        constants.insert("fisher".into(), rep.fisher);
        constants.insert("trace".into(), rep.trace);
        constants.insert("gaussian_mass".into(), rep.gaussian_mass);
        constants.insert("lambda".into(), rep.lambda);
        constants.insert("pre_rhs".into(), rep.pre_rhs);
        constants.insert("pre_deficit".into(), rep.pre_deficit);
        VerificationReport {
            schema: REPORT_SCHEMA,
            inequality: "trace-logsob".into(),
            params: Params {
                alpha: None,
                h: rep.h,
                d: rep.d,
            },
            lhs: rep.lhs,
            rhs: rep.rhs,
            deficit: rep.deficit,
            constants,
            grid: GridInfo::from_domain(dom),
            pass: passes(rep.deficit, rep.rhs) && passes(rep.pre_deficit, rep.pre_rhs),
        }
    }

    pub fn from_trace_gns(rep: &TraceGnsReport, dom: &Domain) -> Self {
        let mut constants = BTreeMap::new();
        constants.insert("A".into(), rep.a);
        constants.insert("B".into(), rep.b);
        constants.insert("D".into(), rep.dcoef);
        constants.insert("delta".into(), rep.delta);
        constants.insert("beta".into(), rep.beta);
        constants.insert("a_h".into(), rep.a_h);
        constants.insert("b_h".into(), rep.b_h);
        constants.insert("lambda".into(), rep.lambda);
        constants.insert("grad_norm".into(), rep.grad_norm);
        constants.insert("trace".into(), rep.trace);
        constants.insert("rhs_unrescaled".into(), rep.rhs_unrescaled);
        constants.insert("deficit_unrescaled".into(), rep.deficit_unrescaled);
        VerificationReport {
            schema: REPORT_SCHEMA,
            inequality: "trace-gns".into(),
            params: Params {
                alpha: Some(rep.alpha),
                h: rep.h,
                d: rep.d,
            },
            lhs: rep.lhs,
            rhs: rep.rhs,
            deficit: rep.deficit,
            constants,
            grid: GridInfo::from_domain(dom),
            pass: passes(rep.deficit, rep.rhs)
                && passes(rep.deficit_unrescaled, rep.rhs_unrescaled),
        }
    }

    pub fn from_gns(rep: &GnsReport, dom: &Domain) -> Self {
        let mut constants = BTreeMap::new();
        constants.insert("C".into(), rep.c_alpha);
        constants.insert("theta".into(), rep.theta);
        constants.insert("grad_norm".into(), rep.grad_norm);
        constants.insert("low_norm".into(), rep.low_norm);
        VerificationReport {
            schema: REPORT_SCHEMA,
            inequality: "gns".into(),
            params: Params {
                alpha: Some(rep.alpha),
                h: 0.0,
                d: rep.d,
            },
            lhs: rep.target_norm,
            rhs: rep.rhs,
            deficit: rep.deficit,
            constants,
            grid: GridInfo::from_domain(dom),
            pass: passes(rep.deficit, rep.rhs),
        }
    }

    pub fn from_entropy(
        rep: &DeficitReport,
        dom: &Domain,
        alpha: Option<f64>,
        h: f64,
        advisory: bool,
    ) -> Self {
        let mut constants = BTreeMap::new();
        constants.insert("C".into(), rep.c);
        constants.insert("advisory".into(), if advisory { 1.0 } else { 0.0 });
        VerificationReport {
            schema: REPORT_SCHEMA,
            inequality: "entropy".into(),
            params: Params {
                alpha,
                h,
                d: dom.dim(),
            },
            lhs: rep.lhs,
            rhs: rep.rhs / (2.0 * rep.c),
            deficit: rep.deficit,
            constants,
            grid: GridInfo::from_domain(dom),
            pass: passes(rep.deficit, rep.rhs / (2.0 * rep.c)),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Domain;
    use crate::inequalities::trace_logsob_report;
    use crate::sampling::random_bumps;
    use std::sync::Arc;

    #[test]
    fn json_round_trip() {
        let dom = Arc::new(Domain::half_space(1, 0.0, 6.0, 512).unwrap());
        let u = random_bumps(dom.clone(), 5);
        let rep = trace_logsob_report(&u, 0.25).unwrap();
        let json = VerificationReport::from_logsob(&rep, &dom);
        let text = json.to_json();
        let back: VerificationReport = serde_json::from_str(&text).unwrap();
        assert_eq!(json, back);
        assert_eq!(back.schema, REPORT_SCHEMA);
        assert_eq!(back.inequality, "trace-logsob");
        assert!(back.pass);
    }
}
