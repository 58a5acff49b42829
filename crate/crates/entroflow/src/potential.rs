//! Convex confinement potentials and the extremal profiles they generate.

use std::sync::Arc;

use libm::erf;

use crate::error::{Error, Result};
use crate::grid::{integrate, Domain, Field};
use crate::nonlinearity::Nonlinearity;

enum Kind {
    /// `V(x) = a + scale * ||x + h e_d||^2`
    Quadratic { a: f64, h: f64, scale: f64 },
    Custom {
        value: Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>,
        grad: Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>,
    },
}

/// A convex potential on `R^d` with a known convexity constant, i.e. a lower
/// bound `C` with `Hess V >= C * Identity`.
pub struct Potential {
    kind: Kind,
    dim: usize,
    convexity: f64,
}

impl Potential {
    /// `V(x) = a + scale * ||x + h e||^2` with `e` the d-th unit vector.
    pub fn shifted_quadratic(a: f64, h: f64, scale: f64, d: usize) -> Result<Self> {
        if !(scale > 0.0) {
            return Err(Error::ParameterOutOfRange(format!(
                "quadratic scale must be positive, got {scale}"
            )));
        }
        if !(1..=3).contains(&d) {
            return Err(Error::ParameterOutOfRange(format!(
                "potential dimension must be 1, 2, or 3, got {d}"
            )));
        }
        Ok(Potential {
            kind: Kind::Quadratic { a, h, scale },
            dim: d,
            convexity: 2.0 * scale,
        })
    }

    /// Arbitrary smooth potential with caller-supplied gradient and a caller
    /// certified convexity constant.
    pub fn custom(
        value: Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>,
        grad: Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>,
        convexity: f64,
        dim: usize,
    ) -> Result<Self> {
        if !(convexity > 0.0) {
            return Err(Error::ParameterOutOfRange(format!(
                "convexity constant must be positive, got {convexity}"
            )));
        }
        Ok(Potential {
            kind: Kind::Custom { value, grad },
            dim,
            convexity,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Lower bound on the Hessian; for quadratic potentials exactly
    /// `2 * scale`.
    pub fn convexity_constant(&self) -> f64 {
        self.convexity
    }

    /// The shift parameter `h`; zero for custom potentials.
    pub fn shift(&self) -> f64 {
        match self.kind {
            Kind::Quadratic { h, .. } => h,
            Kind::Custom { .. } => 0.0,
        }
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dim);
        match &self.kind {
            Kind::Quadratic { a, h, scale } => {
                let mut s = 0.0;
                for (i, &xi) in x.iter().enumerate() {
                    let sh = if i == self.dim - 1 { xi + h } else { xi };
                    s += sh * sh;
                }
                a + scale * s
            }
            Kind::Custom { value, .. } => value(x),
        }
    }

    pub fn grad(&self, x: &[f64]) -> Vec<f64> {
        match &self.kind {
            Kind::Quadratic { h, scale, .. } => x
                .iter()
                .enumerate()
                .map(|(i, &xi)| {
                    let sh = if i == self.dim - 1 { xi + h } else { xi };
                    2.0 * scale * sh
                })
                .collect(),
            Kind::Custom { grad, .. } => grad(x),
        }
    }

    /// Samples `V` at cell centers.
    pub fn field_on(&self, domain: Arc<Domain>) -> Field {
        Field::from_fn(domain, |x| self.value(x))
    }

    /// Samples one gradient component at cell centers.
    pub fn grad_field_on(&self, domain: Arc<Domain>, axis: usize) -> Field {
        Field::from_fn(domain, |x| self.grad(x)[axis])
    }
}

impl std::fmt::Debug for Potential {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match &self.kind {
            Kind::Quadratic { a, h, scale } => write!(
                f,
                "Potential::shifted_quadratic(a={a}, h={h}, scale={scale}, d={})",
                self.dim
            ),
            Kind::Custom { .. } => write!(f, "Potential::custom(d={})", self.dim),
        }
    }
}

/// Standard Gaussian measure of the half line `(-h, infinity)`.
pub fn gaussian_halfspace_mass(h: f64) -> f64 {
    0.5 * (1.0 + erf(h / std::f64::consts::SQRT_2))
}

/// The stationary profile `v = psi^{-1*}(beta - V)` with its normalizer.
#[derive(Clone, Debug)]
pub struct ExtremalProfile {
    pub v: Field,
    pub beta: f64,
    pub mass: f64,
}

/// Builds `v = psi^{-1*}(beta - V)` on the grid, solving for the normalizer
/// `beta` by bisection so that the quadrature mass matches `target_mass`.
/// The mass is strictly increasing in `beta`, so the bracket is expanded
/// geometrically until it straddles the target.
pub fn extremal_profile(
    nl: &Nonlinearity,
    pot: &Potential,
    domain: Arc<Domain>,
    target_mass: f64,
) -> Result<ExtremalProfile> {
    if !(target_mass > 0.0) {
        return Err(Error::ParameterOutOfRange(format!(
            "target mass must be positive, got {target_mass}"
        )));
    }
    let vpot = pot.field_on(domain.clone());
    let mass_at = |beta: f64| -> f64 {
        let mut m = 0.0;
        for &vv in vpot.data() {
            let val = nl.generalized_inverse(beta - vv);
            if !val.is_finite() {
                return f64::INFINITY;
            }
            m += val;
        }
        m * domain.cell_volume()
    };
    // `beta - V` must stay below psi(+inf) somewhere for the profile to be
    // finite; expand the bracket from [-1, 1].
    let mut lo = -1.0;
    let mut hi = 1.0;
    let mut expansions = 0;
    while mass_at(lo) > target_mass {
        lo = 2.0 * lo - 1.0;
        expansions += 1;
        if expansions > 200 {
            return Err(Error::BracketFailure(
                "no lower normalizer bracket: mass exceeds target for all beta".into(),
            ));
        }
    }
    while mass_at(hi) < target_mass {
        hi = 2.0 * hi + 1.0;
        expansions += 1;
        if expansions > 200 {
            return Err(Error::BracketFailure(
                "no upper normalizer bracket: domain truncation may be too small".into(),
            ));
        }
    }
    let mut beta = 0.5 * (lo + hi);
    for _ in 0..200 {
        beta = 0.5 * (lo + hi);
        let m = mass_at(beta);
        if (m - target_mass).abs() <= 1e-13 * target_mass {
            break;
        }
        if m < target_mass {
            lo = beta;
        } else {
            hi = beta;
        }
        if hi - lo <= f64::EPSILON * (1.0 + beta.abs()) {
            break;
        }
    }
    let v = vpot.map(|vv| nl.generalized_inverse(beta - vv));
    if v.data().iter().any(|x| !x.is_finite()) {
        return Err(Error::HypothesisViolation(
            "extremal profile is not finite on the grid".into(),
        ));
    }
    let mass = integrate(&v);
    if (mass - target_mass).abs() > 1e-10 * target_mass {
        return Err(Error::MassMismatch {
            got: mass,
            want: target_mass,
        });
    }
    Ok(ExtremalProfile { v, beta, mass })
}
