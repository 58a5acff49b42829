//! Trace Gagliardo-Nirenberg-Sobolev machinery: the intermediate
//! scale-optimized inequality for power nonlinearities and the classical
//! GNS quotient with its operational sharp constant.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::{gradient, integrate, trace_integrate, Domain, FaceKind, Field, Side};
use crate::nonlinearity::Nonlinearity;
use crate::potential::{extremal_profile, Potential};

/// The intermediate trace GNS inequality
/// `A int u^a <= B lambda^{1-delta} - (h/lambda) int_bdry u^a
///  + D lambda^{1+delta} int |grad u^{a-1/2}|^2`
/// at the optimizing `lambda`, together with the unrescaled (`lambda = 1`)
/// entropy form it comes from.
#[derive(Clone, Debug)]
pub struct TraceGnsReport {
    pub alpha: f64,
    pub h: f64,
    pub d: usize,
    /// `delta = d (alpha - 1) + 1`
    pub delta: f64,
    /// `A = 1/(alpha - 1) + d`
    pub a: f64,
    /// `B = int v (alpha beta_h - v^{alpha-1}) = alpha beta_h - int v^alpha`
    pub b: f64,
    /// `D = alpha / (2 alpha - 1)^2`
    pub dcoef: f64,
    /// normalizer of the extremal profile
    pub beta: f64,
    /// `a_h`, `b_h`: the scale-free constants of the closed form obtained by
    /// substituting the optimizing lambda
    pub a_h: f64,
    pub b_h: f64,
    /// `int |grad u^{alpha - 1/2}|^2`
    pub grad_norm: f64,
    /// `int_bdry u^alpha`
    pub trace: f64,
    pub lambda: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub deficit: f64,
    pub rhs_unrescaled: f64,
    pub deficit_unrescaled: f64,
}

fn unit_mass(u: &Field) -> Result<Field> {
    let m = integrate(u);
    if (m - 1.0).abs() > 1e-8 {
        return Err(Error::MassMismatch { got: m, want: 1.0 });
    }
    Ok(u.scale(1.0 / m))
}

fn check_half_space(dom: &Domain) -> Result<usize> {
    let d = dom.dim();
    if dom.face_kind(d - 1, Side::Low) != FaceKind::TrueBoundary {
        return Err(Error::Config(
            "trace GNS needs a half-space domain with its true boundary at x_d = 0".into(),
        ));
    }
    Ok(d)
}

/// Right-hand side of the intermediate inequality as a function of the
/// scaling parameter.
pub fn gns_rhs_at_lambda(
    b: f64,
    dcoef: f64,
    delta: f64,
    h: f64,
    trace: f64,
    grad_norm: f64,
    lambda: f64,
) -> f64 {
    b * lambda.powf(1.0 - delta) - (h / lambda) * trace
        + dcoef * lambda.powf(1.0 + delta) * grad_norm
}

/// Evaluates the intermediate trace GNS inequality for a unit-mass density
/// on the truncated half space.
pub fn trace_gns_report(u: &Field, alpha: f64, h: f64) -> Result<TraceGnsReport> {
    if !(alpha > 1.0) {
        return Err(Error::ParameterOutOfRange(format!(
            "trace GNS needs alpha > 1, got {alpha}"
        )));
    }
    let dom = u.domain().clone();
    let d = check_half_space(&dom)?;
    let df = d as f64;
    let u = unit_mass(u)?;

    let delta = df * (alpha - 1.0) + 1.0;
    let a = 1.0 / (alpha - 1.0) + df;
    let dcoef = alpha / ((2.0 * alpha - 1.0) * (2.0 * alpha - 1.0));

    let nl = Nonlinearity::power_convex(alpha)?;
    let pot = Potential::shifted_quadratic(0.0, h, 1.0, d)?;
    let prof = extremal_profile(&nl, &pot, dom.clone(), 1.0)?;
    let beta = prof.beta;
    let b = alpha * beta - integrate(&prof.v.map(|x| x.powf(alpha)));

    let f = u.map(|x| x.powf(alpha - 0.5));
    let grads = gradient(&f);
    let mut g2 = Field::zeros(dom.clone());
    for g in &grads {
        for (o, &v) in g2.data_mut().iter_mut().zip(g.data()) {
            *o += v * v;
        }
    }
    let grad_norm = integrate(&g2);
    let u_alpha = u.map(|x| x.powf(alpha));
    let trace = trace_integrate(&u_alpha, d - 1, Side::Low)?;
    let lhs = a * integrate(&u_alpha);

    let lambda =
        (b * (delta - 1.0) / (dcoef * (delta + 1.0) * grad_norm)).powf(1.0 / (2.0 * delta));
    let rhs = gns_rhs_at_lambda(b, dcoef, delta, h, trace, grad_norm, lambda);
    let rhs_unrescaled = gns_rhs_at_lambda(b, dcoef, delta, h, trace, grad_norm, 1.0);

    let a_h = 1.0 / (lambda * grad_norm.powf(1.0 / (2.0 * delta)));
    let b_h = (b * lambda.powf(1.0 - delta) + dcoef * lambda.powf(1.0 + delta) * grad_norm)
        / grad_norm.powf((delta - 1.0) / (2.0 * delta));

    Ok(TraceGnsReport {
        alpha,
        h,
        d,
        delta,
        a,
        b,
        dcoef,
        beta,
        a_h,
        b_h,
        grad_norm,
        trace,
        lambda,
        lhs,
        rhs,
        deficit: rhs - lhs,
        rhs_unrescaled,
        deficit_unrescaled: rhs_unrescaled - lhs,
    })
}

/// Classical GNS quotient data for a nonnegative test function.
#[derive(Clone, Debug)]
pub struct GnsReport {
    pub alpha: f64,
    pub d: usize,
    pub theta: f64,
    pub c_alpha: f64,
    /// `|| f ||_{2 alpha / (2 alpha - 1)}`
    pub target_norm: f64,
    pub grad_norm: f64,
    /// `|| f ||_{2 / (2 alpha - 1)}`
    pub low_norm: f64,
    pub rhs: f64,
    pub deficit: f64,
}

/// `theta = (1 - 1/delta)(1 - 1/(2 alpha))`.
pub fn gns_theta(alpha: f64, d: usize) -> f64 {
    let delta = d as f64 * (alpha - 1.0) + 1.0;
    (1.0 - 1.0 / delta) * (1.0 - 0.5 / alpha)
}

fn p_norm(f: &Field, p: f64) -> f64 {
    integrate(&f.map(|x| x.powf(p))).powf(1.0 / p)
}

fn grad_l2(f: &Field) -> f64 {
    let grads = gradient(f);
    let mut g2 = Field::zeros(f.domain().clone());
    for g in &grads {
        for (o, &v) in g2.data_mut().iter_mut().zip(g.data()) {
            *o += v * v;
        }
    }
    integrate(&g2).sqrt()
}

fn gns_quotient(f: &Field, alpha: f64, d: usize) -> Result<f64> {
    if f.max_abs() == 0.0 {
        return Err(Error::ZeroField);
    }
    let theta = gns_theta(alpha, d);
    let target = p_norm(f, 2.0 * alpha / (2.0 * alpha - 1.0));
    let grad = grad_l2(f);
    let low = p_norm(f, 2.0 / (2.0 * alpha - 1.0));
    Ok(target / (grad.powf(theta) * low.powf(1.0 - theta)))
}

/// The sharp-constant extremizer `(1 - |x|^2)_+^{(2 alpha - 1)/(2 (alpha - 1))}`
/// on the half space, optionally translated along the boundary hyperplane.
pub fn gns_extremizer(domain: Arc<Domain>, alpha: f64, shift: &[f64]) -> Field {
    let e = (2.0 * alpha - 1.0) / (2.0 * (alpha - 1.0));
    let dim = domain.dim();
    let shift = shift.to_vec();
    Field::from_fn(domain, |x| {
        let mut r2 = 0.0;
        for a in 0..dim {
            let s = if a < shift.len() { shift[a] } else { 0.0 };
            r2 += (x[a] - s) * (x[a] - s);
        }
        (1.0 - r2).max(0.0).powf(e)
    })
}

fn default_extremizer_domain(d: usize) -> Arc<Domain> {
    let n = match d {
        1 => 8192,
        2 => 768,
        _ => 160,
    };
    Arc::new(Domain::half_space(d, 1.05, 1.05, n).unwrap())
}

/// Sharp GNS constant, computed operationally as the quotient at the
/// extremizer.
pub fn gns_constant(alpha: f64, d: usize) -> Result<f64> {
    if !(alpha > 1.0) {
        return Err(Error::ParameterOutOfRange(format!(
            "GNS constant needs alpha > 1, got {alpha}"
        )));
    }
    let dom = default_extremizer_domain(d);
    let f = gns_extremizer(dom, alpha, &[]);
    gns_quotient(&f, alpha, d)
}

/// Checks `|| f ||_{2a/(2a-1)} <= C_a ||grad f||_2^theta ||f||_{2/(2a-1)}^{1-theta}`
/// against a caller-supplied constant.
pub fn verify_gns_with_constant(
    f: &Field,
    alpha: f64,
    c_alpha: f64,
) -> Result<GnsReport> {
    if f.max_abs() == 0.0 {
        return Err(Error::ZeroField);
    }
    for (i, &v) in f.data().iter().enumerate() {
        if v < 0.0 || !v.is_finite() {
            return Err(Error::NegativeCell { index: i, value: v });
        }
    }
    let d = f.domain().dim();
    let theta = gns_theta(alpha, d);
    let target = p_norm(f, 2.0 * alpha / (2.0 * alpha - 1.0));
    let grad = grad_l2(f);
    let low = p_norm(f, 2.0 / (2.0 * alpha - 1.0));
    let rhs = c_alpha * grad.powf(theta) * low.powf(1.0 - theta);
    Ok(GnsReport {
        alpha,
        d,
        theta,
        c_alpha,
        target_norm: target,
        grad_norm: grad,
        low_norm: low,
        rhs,
        deficit: rhs - target,
    })
}

/// As `verify_gns_with_constant`, computing the sharp constant internally.
pub fn verify_gns(f: &Field, alpha: f64) -> Result<GnsReport> {
    let c = gns_constant(alpha, f.domain().dim())?;
    verify_gns_with_constant(f, alpha, c)
}
