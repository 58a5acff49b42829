//! Entropy-generating nonlinearities.
//!
//! A [`Nonlinearity`] bundles a strictly convex `H` on the positive reals
//! (with `H(0) = 0`) together with `psi = H'`, `U(x) = x psi(x) - H(x)`,
//! `U2(x) = x U'(x) - U(x)` and the endpoint values `psi(0+)`, `psi(+inf)`.
//! All evaluators are closed-form per family; exactness matters for the
//! borderline hypothesis check, which is identically zero for the Sobolev
//! family.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

type Evaluator = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Tags the built-in families plus a user-supplied bundle.
#[derive(Clone)]
pub enum Family {
    /// `H(x) = x log x - x`
    Boltzmann,
    /// `H(x) = -x^alpha / alpha`, `alpha` in `(1 - 1/d, 1)`
    PowerConcave { alpha: f64, d: usize },
    /// `H(x) = x^alpha / (alpha (alpha - 1))`, `alpha > 1`
    PowerConvex { alpha: f64 },
    /// `H(x) = -x^(1 - 1/d)`, the borderline concave case
    Sobolev { d: usize },
    Custom {
        h: Evaluator,
        psi: Evaluator,
        psi_prime: Evaluator,
        big_u: Evaluator,
        u2: Evaluator,
        psi_at_zero: f64,
        psi_at_inf: f64,
    },
}

impl fmt::Debug for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::Boltzmann => write!(f, "boltzmann"),
            Family::PowerConcave { alpha, d } => {
                write!(f, "power-concave(alpha={alpha}, d={d})")
            }
            Family::PowerConvex { alpha } => write!(f, "power-convex(alpha={alpha})"),
            Family::Sobolev { d } => write!(f, "sobolev(d={d})"),
            Family::Custom { .. } => write!(f, "custom"),
        }
    }
}

/// One entropy family: `H`, `psi`, `U`, `U2` and the `psi` endpoints.
#[derive(Clone, Debug)]
pub struct Nonlinearity {
    family: Family,
}

/// Outcome of the structural hypothesis check `U2 + U/d >= 0`.
#[derive(Clone, Debug)]
pub struct HypothesisReport {
    pub satisfied: bool,
    pub worst_point: f64,
    pub worst_value: f64,
    pub grid_spec: String,
}

impl Nonlinearity {
    pub fn boltzmann() -> Self {
        Nonlinearity {
            family: Family::Boltzmann,
        }
    }

    pub fn power_convex(alpha: f64) -> Result<Self> {
        if !(alpha > 1.0) {
            return Err(Error::ParameterOutOfRange(format!(
                "power-convex requires alpha > 1, got {alpha}"
            )));
        }
        Ok(Nonlinearity {
            family: Family::PowerConvex { alpha },
        })
    }

    pub fn power_concave(alpha: f64, d: usize) -> Result<Self> {
        let lo = 1.0 - 1.0 / d as f64;
        if d == 0 || !(alpha > lo && alpha < 1.0) {
            return Err(Error::ParameterOutOfRange(format!(
                "power-concave requires alpha in (1 - 1/d, 1) = ({lo}, 1), got {alpha}"
            )));
        }
        Ok(Nonlinearity {
            family: Family::PowerConcave { alpha, d },
        })
    }

    pub fn sobolev(d: usize) -> Result<Self> {
        if d < 3 {
            return Err(Error::ParameterOutOfRange(format!(
                "sobolev family requires d >= 3, got {d}"
            )));
        }
        Ok(Self::sobolev_unchecked(d))
    }

    /// Builds the Sobolev bundle without the `d >= 3` window check. The
    /// evaluators are well defined for any `d >= 2`; the hypothesis margin is
    /// identically zero regardless.
    pub fn sobolev_unchecked(d: usize) -> Self {
        Nonlinearity {
            family: Family::Sobolev { d },
        }
    }

    /// User-supplied bundle. The evaluators are validated for algebraic
    /// consistency on a log grid rather than trusted.
    pub fn custom(
        h: Evaluator,
        psi: Evaluator,
        psi_prime: Evaluator,
        big_u: Evaluator,
        u2: Evaluator,
        psi_at_zero: f64,
        psi_at_inf: f64,
    ) -> Result<Self> {
        let nl = Nonlinearity {
            family: Family::Custom {
                h,
                psi,
                psi_prime,
                big_u,
                u2,
                psi_at_zero,
                psi_at_inf,
            },
        };
        nl.validate()?;
        Ok(nl)
    }

    /// CLI entry point: builds a family from its tag.
    pub fn make(family: &str, alpha: Option<f64>, d: usize) -> Result<Self> {
        match family {
            "boltzmann" => Ok(Self::boltzmann()),
            "power-convex" => Self::power_convex(
                alpha.ok_or_else(|| Error::Config("power-convex requires --alpha".into()))?,
            ),
            "power-concave" => Self::power_concave(
                alpha.ok_or_else(|| Error::Config("power-concave requires --alpha".into()))?,
                d,
            ),
            "sobolev" => Self::sobolev(d),
            other => Err(Error::Config(format!("unknown family tag `{other}`"))),
        }
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn family_tag(&self) -> String {
        format!("{:?}", self.family)
    }

    pub fn is_boltzmann(&self) -> bool {
        matches!(self.family, Family::Boltzmann)
    }

    /// `H(x)`, extended by `H(0) = 0`.
    pub fn h(&self, x: f64) -> f64 {
        if x == 0.0 {
            return 0.0;
        }
        match &self.family {
            Family::Boltzmann => x * x.ln() - x,
            Family::PowerConcave { alpha, .. } => -x.powf(*alpha) / alpha,
            Family::PowerConvex { alpha } => x.powf(*alpha) / (alpha * (alpha - 1.0)),
            Family::Sobolev { d } => -x.powf(1.0 - 1.0 / *d as f64),
            Family::Custom { h, .. } => h(x),
        }
    }

    /// `psi(x) = H'(x)` for `x > 0`.
    pub fn psi(&self, x: f64) -> f64 {
        match &self.family {
            Family::Boltzmann => x.ln(),
            Family::PowerConcave { alpha, .. } => -x.powf(alpha - 1.0),
            Family::PowerConvex { alpha } => x.powf(alpha - 1.0) / (alpha - 1.0),
            Family::Sobolev { d } => {
                let d = *d as f64;
                -(1.0 - 1.0 / d) * x.powf(-1.0 / d)
            }
            Family::Custom { psi, .. } => psi(x),
        }
    }

    pub fn psi_prime(&self, x: f64) -> f64 {
        match &self.family {
            Family::Boltzmann => 1.0 / x,
            Family::PowerConcave { alpha, .. } => (1.0 - alpha) * x.powf(alpha - 2.0),
            Family::PowerConvex { alpha } => x.powf(alpha - 2.0),
            Family::Sobolev { d } => {
                let d = *d as f64;
                (1.0 - 1.0 / d) / d * x.powf(-1.0 / d - 1.0)
            }
            Family::Custom { psi_prime, .. } => psi_prime(x),
        }
    }

    /// `U(x) = x psi(x) - H(x)`, extended by `U(0) = 0`.
    pub fn big_u(&self, x: f64) -> f64 {
        if x == 0.0 {
            return 0.0;
        }
        match &self.family {
            Family::Boltzmann => x,
            Family::PowerConcave { alpha, .. } => (1.0 - alpha) / alpha * x.powf(*alpha),
            Family::PowerConvex { alpha } => x.powf(*alpha) / alpha,
            Family::Sobolev { d } => {
                let d = *d as f64;
                x.powf(1.0 - 1.0 / d) / d
            }
            Family::Custom { big_u, .. } => big_u(x),
        }
    }

    /// `U'(x) = x psi'(x)`.
    pub fn big_u_prime(&self, x: f64) -> f64 {
        match &self.family {
            Family::Boltzmann => 1.0,
            Family::PowerConcave { alpha, .. } => (1.0 - alpha) * x.powf(alpha - 1.0),
            Family::PowerConvex { alpha } => x.powf(alpha - 1.0),
            Family::Sobolev { d } => {
                let d = *d as f64;
                (1.0 - 1.0 / d) / d * x.powf(-1.0 / d)
            }
            Family::Custom { .. } => x * self.psi_prime(x),
        }
    }

    /// `U2(x) = x U'(x) - U(x)`.
    pub fn u2(&self, x: f64) -> f64 {
        match &self.family {
            Family::Boltzmann => 0.0,
            Family::PowerConcave { alpha, .. } => {
                -(1.0 - alpha) * (1.0 - alpha) / alpha * x.powf(*alpha)
            }
            Family::PowerConvex { alpha } => (alpha - 1.0) / alpha * x.powf(*alpha),
            Family::Sobolev { d } => {
                let d = *d as f64;
                -x.powf(1.0 - 1.0 / d) / (d * d)
            }
            Family::Custom { u2, .. } => u2(x),
        }
    }

    pub fn psi_at_zero(&self) -> f64 {
        match &self.family {
            Family::Boltzmann => f64::NEG_INFINITY,
            Family::PowerConcave { .. } => f64::NEG_INFINITY,
            Family::PowerConvex { .. } => 0.0,
            Family::Sobolev { .. } => f64::NEG_INFINITY,
            Family::Custom { psi_at_zero, .. } => *psi_at_zero,
        }
    }

    pub fn psi_at_inf(&self) -> f64 {
        match &self.family {
            Family::Boltzmann => f64::INFINITY,
            Family::PowerConcave { .. } => 0.0,
            Family::PowerConvex { .. } => f64::INFINITY,
            Family::Sobolev { .. } => 0.0,
            Family::Custom { psi_at_inf, .. } => *psi_at_inf,
        }
    }

    /// Generalized inverse `psi^{-1*}` of Def.-style form: `0` at or below
    /// `psi(0+)`, `+inf` at or above `psi(+inf)`, the true inverse in between.
    pub fn generalized_inverse(&self, t: f64) -> f64 {
        if t <= self.psi_at_zero() {
            return 0.0;
        }
        if t >= self.psi_at_inf() {
            return f64::INFINITY;
        }
        match &self.family {
            Family::Boltzmann => t.exp(),
            Family::PowerConcave { alpha, .. } => (-t).powf(1.0 / (alpha - 1.0)),
            Family::PowerConvex { alpha } => ((alpha - 1.0) * t).powf(1.0 / (alpha - 1.0)),
            Family::Sobolev { d } => {
                let d = *d as f64;
                ((1.0 - 1.0 / d) / -t).powf(d)
            }
            Family::Custom { .. } => self.invert_psi_numeric(t),
        }
    }

    /// Bracketed bisection for custom families, relative tolerance 1e-12.
    fn invert_psi_numeric(&self, t: f64) -> f64 {
        let mut lo = 1.0;
        let mut hi = 1.0;
        while self.psi(lo) > t {
            lo *= 0.5;
            if lo < 1e-300 {
                return 0.0;
            }
        }
        while self.psi(hi) < t {
            hi *= 2.0;
            if hi > 1e300 {
                return f64::INFINITY;
            }
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.psi(mid) < t {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-12 * mid.abs() {
                break;
            }
        }
        0.5 * (lo + hi)
    }

    /// Default sample grid for the hypothesis check: 500 log-spaced points
    /// across [1e-4, 1e4].
    pub fn default_hypothesis_grid() -> Vec<f64> {
        log_grid(1e-4, 1e4, 500)
    }

    /// Checks `U2(x) + U(x)/d >= 0` on the given strictly positive samples.
    pub fn check_hypothesis_u(&self, d: usize, grid: &[f64]) -> HypothesisReport {
        let d = d as f64;
        let mut worst_point = f64::NAN;
        let mut worst_value = f64::INFINITY;
        let mut worst_scale = 1.0;
        for &x in grid {
            let value = self.u2(x) + self.big_u(x) / d;
            if value < worst_value {
                worst_value = value;
                worst_point = x;
                worst_scale = self.big_u(x).abs().max(1.0);
            }
        }
        HypothesisReport {
            satisfied: worst_value >= -1e-12 * worst_scale,
            worst_point,
            worst_value,
            grid_spec: format!(
                "{} samples in [{:.3e}, {:.3e}]",
                grid.len(),
                grid.first().copied().unwrap_or(f64::NAN),
                grid.last().copied().unwrap_or(f64::NAN)
            ),
        }
    }

    /// Consistency validation of the bundle on a log grid: `U = x psi - H`,
    /// `U2 = x U' - U`, `psi` strictly increasing.
    pub fn validate(&self) -> Result<()> {
        for &x in &log_grid(1e-4, 1e4, 200) {
            let u = self.big_u(x);
            let alg = x * self.psi(x) - self.h(x);
            if (u - alg).abs() > 1e-9 * (1.0 + self.h(x).abs()) {
                return Err(Error::HypothesisViolation(format!(
                    "U(x) != x psi(x) - H(x) at x = {x}: {u} vs {alg}"
                )));
            }
            let step = 1e-5 * x;
            let fd_uprime = (self.big_u(x + step) - self.big_u(x - step)) / (2.0 * step);
            let u2 = self.u2(x);
            let alg2 = x * fd_uprime - u;
            if (u2 - alg2).abs() > 1e-5 * (1.0 + u2.abs()) {
                return Err(Error::HypothesisViolation(format!(
                    "U2(x) != x U'(x) - U(x) at x = {x}: {u2} vs {alg2}"
                )));
            }
            if self.psi_prime(x) <= 0.0 {
                return Err(Error::HypothesisViolation(format!(
                    "psi'(x) <= 0 at x = {x}"
                )));
            }
        }
        Ok(())
    }
}

pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (llo, lhi) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| (llo + (lhi - llo) * i as f64 / (n - 1) as f64).exp())
        .collect()
}
