//! Generalized entropy, relative entropy, and entropy production.

use crate::error::{Error, Result};
use crate::grid::{deriv_axis, integrate, Field};
use crate::nonlinearity::Nonlinearity;
use crate::potential::{ExtremalProfile, Potential};

/// Reference data for the entropy: either the positive stationary profile or
/// the potential itself.
pub enum Reference<'a> {
    Profile(&'a Field),
    Potential(&'a Potential),
}

/// Both sides of the entropy inequality together with the certified deficit.
#[derive(Clone, Debug)]
pub struct DeficitReport {
    /// relative entropy `F(u) - F(v)`
    pub lhs: f64,
    /// entropy production `I(u)`
    pub rhs: f64,
    /// `rhs / (2C) - lhs`
    pub deficit: f64,
    pub c: f64,
    pub family: String,
    pub potential: String,
    pub grid: String,
}

fn check_nonnegative(u: &Field) -> Result<()> {
    for (i, &v) in u.data().iter().enumerate() {
        if v < 0.0 || !v.is_finite() {
            return Err(Error::NegativeCell { index: i, value: v });
        }
    }
    Ok(())
}

/// `H` extended by continuity with `H(0) = 0`.
fn h_ext(nl: &Nonlinearity, x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        nl.h(x)
    }
}

/// The generalized entropy `int H(u) - u psi(v)` (profile form) or
/// `int H(u) + u V` (potential form).
pub fn entropy(nl: &Nonlinearity, reference: Reference<'_>, u: &Field) -> Result<f64> {
    check_nonnegative(u)?;
    let integrand = match reference {
        Reference::Profile(v) => u.zip_map(v, |uu, vv| {
            if uu == 0.0 {
                0.0
            } else {
                h_ext(nl, uu) - uu * nl.psi(vv)
            }
        })?,
        Reference::Potential(pot) => {
            let vf = pot.field_on(u.domain().clone());
            u.zip_map(&vf, |uu, vv| h_ext(nl, uu) + uu * vv)?
        }
    };
    Ok(integrate(&integrand))
}

/// Scales `u` onto the mass of `v` when the drift is within the 1e-8
/// relative tolerance, errors otherwise.
fn renormalized_to(u: &Field, target_mass: f64) -> Result<Field> {
    let m = integrate(u);
    if (m - target_mass).abs() > 1e-8 * target_mass.abs() {
        return Err(Error::MassMismatch {
            got: m,
            want: target_mass,
        });
    }
    Ok(u.scale(target_mass / m))
}

/// Relative entropy `int H(u) - H(v) + (u - v) V`, nonnegative under mass
/// matching by convexity of `H`.
pub fn relative_entropy(
    nl: &Nonlinearity,
    pot: &Potential,
    v: &ExtremalProfile,
    u: &Field,
) -> Result<f64> {
    check_nonnegative(u)?;
    let u = renormalized_to(u, v.mass)?;
    let vf = pot.field_on(u.domain().clone());
    let mut total = 0.0;
    for i in 0..u.len() {
        let uu = u.data()[i];
        let vv = v.v.data()[i];
        total += h_ext(nl, uu) - h_ext(nl, vv) + (uu - vv) * vf.data()[i];
    }
    Ok(total * u.domain().cell_volume())
}

/// Entropy production `I(u) = int u || grad psi(u) + grad V ||^2`.
///
/// The inner gradient is computed by the chain rule `psi'(u) grad u`, and
/// the integrand is defined as zero on cells where `u` vanishes.
pub fn entropy_production(nl: &Nonlinearity, pot: &Potential, u: &Field) -> Result<f64> {
    check_nonnegative(u)?;
    let dom = u.domain().clone();
    let dim = dom.dim();
    let grads: Vec<Field> = (0..dim).map(|a| deriv_axis(u, a)).collect();
    let mut total = 0.0;
    for i in 0..u.len() {
        let uu = u.data()[i];
        if uu == 0.0 {
            continue;
        }
        let psip = nl.psi_prime(uu);
        let x = dom.cell_center(i);
        let gv = pot.grad(&x[..dim]);
        let mut norm2 = 0.0;
        for (a, g) in grads.iter().enumerate() {
            let comp = psip * g.data()[i] + gv[a];
            norm2 += comp * comp;
        }
        total += uu * norm2;
    }
    Ok(total * dom.cell_volume())
}

/// Evaluates both sides of the entropy inequality
/// `F(u) - F(v) <= I(u) / (2C)` and the resulting deficit.
pub fn deficit(
    nl: &Nonlinearity,
    pot: &Potential,
    v: &ExtremalProfile,
    u: &Field,
    c: f64,
) -> Result<DeficitReport> {
    if !(c > 0.0) {
        return Err(Error::ParameterOutOfRange(format!(
            "convexity constant must be positive, got {c}"
        )));
    }
    let u = renormalized_to(u, v.mass)?;
    let lhs = relative_entropy(nl, pot, v, &u)?;
    let rhs = entropy_production(nl, pot, &u)?;
    let dom = u.domain();
    let grid = (0..dom.dim())
        .map(|a| dom.cells(a).to_string())
        .collect::<Vec<_>>()
        .join("x");
    Ok(DeficitReport {
        lhs,
        rhs,
        deficit: rhs / (2.0 * c) - lhs,
        c,
        family: nl.family_tag(),
        potential: format!("{pot:?}"),
        grid,
    })
}
