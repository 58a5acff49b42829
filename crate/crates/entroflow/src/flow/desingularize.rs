//! Desingularized nonlinearities: `U_eps` coincides with `U` on
//! `[eps, 1/eps]`, is affine with positive slope outside
//! `[eps/2, 1/eps + eps]`, and is glued with C^2 connectors chosen so that
//! the curvature combination `W_eps = (1/d - 1) U_eps + x U_eps'` stays
//! nonnegative. This restores uniform parabolicity: `0 < m_eps <= U_eps' <=
//! M_eps`.
//!
//! The connector is built on `W` rather than `U`: on each gluing interval
//! `W_eps` is a quintic-smoothstep blend of the exact `W` and the affine
//! model `a x / d`, which matches value and first derivative at both ends
//! and is nonnegative by construction. `U_eps` is then recovered from the
//! identity `W_eps = x^{2 - 1/d} (x^{-1 + 1/d} U_eps)'`, which determines
//! the affine slope through a scalar linear equation.

use crate::error::{Error, Result};
use crate::nonlinearity::Nonlinearity;

/// 4-point Gauss-Legendre nodes and weights on [-1, 1].
const GL_NODES: [f64; 4] = [
    -0.8611363115940526,
    -0.3399810435848563,
    0.3399810435848563,
    0.8611363115940526,
];
const GL_WEIGHTS: [f64; 4] = [
    0.3478548451374538,
    0.6521451548625461,
    0.6521451548625461,
    0.3478548451374538,
];

fn gl4(a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    GL_NODES
        .iter()
        .zip(&GL_WEIGHTS)
        .map(|(&x, &w)| w * f(mid + half * x))
        .sum::<f64>()
        * half
}

fn composite_gl4(a: f64, b: f64, panels: usize, f: impl Fn(f64) -> f64) -> f64 {
    let h = (b - a) / panels as f64;
    (0..panels)
        .map(|k| gl4(a + k as f64 * h, a + (k + 1) as f64 * h, &f))
        .sum()
}

/// Quintic smoothstep: C^2 monotone ramp with vanishing first and second
/// derivatives at both ends.
fn smoothstep(theta: f64) -> f64 {
    let t = theta.clamp(0.0, 1.0);
    t * t * t * (10.0 + t * (-15.0 + 6.0 * t))
}

const CONNECTOR_NODES: usize = 1024;

/// Tabulated connector: `U_eps`, its exact derivative, and `psi_eps` on a
/// uniform grid, evaluated in between by cubic Hermite interpolation.
struct Connector {
    x_lo: f64,
    step: f64,
    u: Vec<f64>,
    up: Vec<f64>,
    psi: Vec<f64>,
}

impl Connector {
    fn locate(&self, x: f64) -> (usize, f64) {
        let raw = (x - self.x_lo) / self.step;
        let k = (raw.floor() as usize).min(CONNECTOR_NODES - 1);
        (k, raw - k as f64)
    }

    fn hermite(&self, vals: &[f64], derivs: &[f64], x: f64) -> f64 {
        let (k, t) = self.locate(x);
        let (v0, v1) = (vals[k], vals[k + 1]);
        let (d0, d1) = (derivs[k] * self.step, derivs[k + 1] * self.step);
        let t2 = t * t;
        let t3 = t2 * t;
        (2.0 * t3 - 3.0 * t2 + 1.0) * v0
            + (t3 - 2.0 * t2 + t) * d0
            + (-2.0 * t3 + 3.0 * t2) * v1
            + (t3 - t2) * d1
    }

    fn u_at(&self, x: f64) -> f64 {
        self.hermite(&self.u, &self.up, x)
    }

    /// Linear interpolation of the tabulated derivative (the table is dense
    /// enough that this is far below the PDE discretization error).
    fn up_at(&self, x: f64) -> f64 {
        let (k, t) = self.locate(x);
        self.up[k] * (1.0 - t) + self.up[k + 1] * t
    }

    fn psi_at(&self, x: f64) -> f64 {
        let (k, t) = self.locate(x);
        let d0 = self.up[k] / (self.x_lo + k as f64 * self.step);
        let d1 = self.up[k + 1] / (self.x_lo + (k + 1) as f64 * self.step);
        let (v0, v1) = (self.psi[k], self.psi[k + 1]);
        let (d0, d1) = (d0 * self.step, d1 * self.step);
        let t2 = t * t;
        let t3 = t2 * t;
        (2.0 * t3 - 3.0 * t2 + 1.0) * v0
            + (t3 - 2.0 * t2 + t) * d0
            + (-2.0 * t3 + 3.0 * t2) * v1
            + (t3 - t2) * d1
    }
}

/// `U` with its gluing data; see the module docs.
pub struct DesingularizedNonlinearity {
    base: Nonlinearity,
    epsilon: f64,
    d: usize,
    /// true when the base `U` is already globally affine (Boltzmann)
    trivial: bool,
    a_lo: f64,
    a_hi: f64,
    lower: Option<Connector>,
    upper: Option<Connector>,
    /// psi_eps at the four knots eps/2, eps, 1/eps, 1/eps + eps
    psi_knots: [f64; 4],
    m_eps: f64,
    big_m_eps: f64,
}

fn w_base(nl: &Nonlinearity, d: f64, t: f64) -> f64 {
    (1.0 / d - 1.0) * nl.big_u(t) + t * nl.big_u_prime(t)
}

impl DesingularizedNonlinearity {
    pub fn base(&self) -> &Nonlinearity {
        &self.base
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    /// Lower parabolicity bound: `U_eps' >= m_eps > 0`.
    pub fn m_eps(&self) -> f64 {
        self.m_eps
    }

    /// Upper parabolicity bound: `U_eps' <= M_eps`.
    pub fn big_m_eps(&self) -> f64 {
        self.big_m_eps
    }

    fn knots(&self) -> [f64; 4] {
        let e = self.epsilon;
        [0.5 * e, e, 1.0 / e, 1.0 / e + e]
    }

    pub fn u_eps(&self, x: f64) -> f64 {
        if self.trivial {
            return x;
        }
        let [x0, x1, x2, x3] = self.knots();
        if x <= x0 {
            self.a_lo * x
        } else if x < x1 {
            self.lower.as_ref().unwrap().u_at(x)
        } else if x <= x2 {
            self.base.big_u(x)
        } else if x < x3 {
            self.upper.as_ref().unwrap().u_at(x)
        } else {
            self.a_hi * x
        }
    }

    pub fn u_eps_prime(&self, x: f64) -> f64 {
        if self.trivial {
            return 1.0;
        }
        let [x0, x1, x2, x3] = self.knots();
        if x <= x0 {
            self.a_lo
        } else if x < x1 {
            self.lower.as_ref().unwrap().up_at(x)
        } else if x <= x2 {
            self.base.big_u_prime(x)
        } else if x < x3 {
            self.upper.as_ref().unwrap().up_at(x)
        } else {
            self.a_hi
        }
    }

    /// `U_{eps,2}(x) = x U_eps'(x) - U_eps(x)`.
    pub fn u2_eps(&self, x: f64) -> f64 {
        x * self.u_eps_prime(x) - self.u_eps(x)
    }

    /// The curvature combination `W_eps = (1/d - 1) U_eps + x U_eps'`,
    /// nonnegative by construction.
    pub fn w_eps(&self, x: f64) -> f64 {
        (1.0 / self.d as f64 - 1.0) * self.u_eps(x) + x * self.u_eps_prime(x)
    }

    /// `psi_eps(x) = psi(eps) + int_eps^x U_eps'(t)/t dt`, strictly
    /// increasing from -inf to +inf.
    pub fn psi_eps(&self, x: f64) -> f64 {
        if self.trivial {
            return x.ln();
        }
        let [x0, x1, x2, x3] = self.knots();
        if x <= x0 {
            self.psi_knots[0] + self.a_lo * (x / x0).ln()
        } else if x < x1 {
            self.lower.as_ref().unwrap().psi_at(x)
        } else if x <= x2 {
            self.base.psi(x)
        } else if x < x3 {
            self.upper.as_ref().unwrap().psi_at(x)
        } else {
            self.psi_knots[3] + self.a_hi * (x / x3).ln()
        }
    }

    /// `H_eps = x psi_eps - U_eps` (with `H_eps(0) = 0`).
    pub fn h_eps(&self, x: f64) -> f64 {
        if x == 0.0 {
            return 0.0;
        }
        x * self.psi_eps(x) - self.u_eps(x)
    }

    /// Inverse of `psi_eps`; closed form on the affine tails and the
    /// coincidence region, bisection inside the connectors.
    pub fn psi_eps_inv(&self, t: f64) -> f64 {
        if self.trivial {
            return t.exp();
        }
        let [x0, x1, x2, x3] = self.knots();
        let [p0, p1, p2, p3] = self.psi_knots;
        if t <= p0 {
            x0 * ((t - p0) / self.a_lo).exp()
        } else if t < p1 {
            self.bisect_psi(x0, x1, t)
        } else if t <= p2 {
            self.base.generalized_inverse(t)
        } else if t < p3 {
            self.bisect_psi(x2, x3, t)
        } else {
            x3 * ((t - p3) / self.a_hi).exp()
        }
    }

    fn bisect_psi(&self, mut lo: f64, mut hi: f64, t: f64) -> f64 {
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if self.psi_eps(mid) < t {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }
}

fn build_connector(
    nl: &Nonlinearity,
    d: f64,
    x_lo: f64,
    x_hi: f64,
    slope: f64,
    affine_on_low_side: bool,
    g_start: f64,
    psi_anchor: (f64, f64),
) -> Connector {
    let step = (x_hi - x_lo) / CONNECTOR_NODES as f64;
    let w_eps = |t: f64| -> f64 {
        let s = smoothstep((t - x_lo) / (x_hi - x_lo));
        let affine = slope * t / d;
        let exact = w_base(nl, d, t);
        if affine_on_low_side {
            (1.0 - s) * affine + s * exact
        } else {
            (1.0 - s) * exact + s * affine
        }
    };
    let g_prime = |t: f64| t.powf(-2.0 + 1.0 / d) * w_eps(t);
    let mut g = Vec::with_capacity(CONNECTOR_NODES + 1);
    g.push(g_start);
    for k in 0..CONNECTOR_NODES {
        let a = x_lo + k as f64 * step;
        let last = *g.last().unwrap();
        g.push(last + gl4(a, a + step, g_prime));
    }
    let mut u = Vec::with_capacity(g.len());
    let mut up = Vec::with_capacity(g.len());
    for (k, &gk) in g.iter().enumerate() {
        let t = x_lo + k as f64 * step;
        let uk = t.powf(1.0 - 1.0 / d) * gk;
        u.push(uk);
        up.push((w_eps(t) + (1.0 - 1.0 / d) * uk) / t);
    }
    let conn = Connector {
        x_lo,
        step,
        u,
        up,
        psi: vec![0.0; CONNECTOR_NODES + 1],
    };
    // psi_eps' = U_eps'/t; integrate node to node and pin the anchor value
    let integrand = |t: f64| conn.up_at(t) / t;
    let mut psi = vec![0.0; CONNECTOR_NODES + 1];
    for k in 0..CONNECTOR_NODES {
        let a = x_lo + k as f64 * step;
        psi[k + 1] = psi[k] + gl4(a, a + step, integrand);
    }
    let (anchor_x, anchor_val) = psi_anchor;
    let anchor_k = ((anchor_x - x_lo) / step).round() as usize;
    let shift = anchor_val - psi[anchor_k];
    for p in &mut psi {
        *p += shift;
    }
    Connector { psi, ..conn }
}

/// Builds the desingularized bundle. `eps` must lie in `(0, 1)` and the base
/// family must satisfy the dimensional curvature hypothesis, which is what
/// makes `W >= 0` on the coincidence region.
pub fn desingularize(
    nl: &Nonlinearity,
    eps: f64,
    d: usize,
) -> Result<DesingularizedNonlinearity> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::ParameterOutOfRange(format!(
            "desingularization eps must lie in (0,1), got {eps}"
        )));
    }
    let hyp = nl.check_hypothesis_u(d, &Nonlinearity::default_hypothesis_grid());
    if !hyp.satisfied {
        return Err(Error::HypothesisViolation(format!(
            "curvature hypothesis fails at x = {}",
            hyp.worst_point
        )));
    }
    if nl.is_boltzmann() {
        return Ok(DesingularizedNonlinearity {
            base: nl.clone(),
            epsilon: eps,
            d,
            trivial: true,
            a_lo: 1.0,
            a_hi: 1.0,
            lower: None,
            upper: None,
            psi_knots: [0.0; 4],
            m_eps: 1.0,
            big_m_eps: 1.0,
        });
    }
    let df = d as f64;
    let (x0, x1, x2, x3) = (0.5 * eps, eps, 1.0 / eps, 1.0 / eps + eps);
    let panels = 256;

    // lower slope: continuity of g = x^{-1+1/d} U_eps across the connector
    let s_of = |t: f64, lo: f64, hi: f64| smoothstep((t - lo) / (hi - lo));
    let j_w = composite_gl4(x0, x1, panels, |t| {
        s_of(t, x0, x1) * t.powf(-2.0 + 1.0 / df) * w_base(nl, df, t)
    });
    let j_s = composite_gl4(x0, x1, panels, |t| {
        (1.0 - s_of(t, x0, x1)) * t.powf(-1.0 + 1.0 / df)
    });
    let a_lo = (x1.powf(-1.0 + 1.0 / df) * nl.big_u(x1) - j_w)
        / (x0.powf(1.0 / df) + j_s / df);
    if !(a_lo > 0.0) || !a_lo.is_finite() {
        return Err(Error::ConnectorInfeasible(format!(
            "lower affine slope {a_lo} is not positive"
        )));
    }

    let g_x2 = x2.powf(-1.0 + 1.0 / df) * nl.big_u(x2);
    let j_w_hi = composite_gl4(x2, x3, panels, |t| {
        (1.0 - s_of(t, x2, x3)) * t.powf(-2.0 + 1.0 / df) * w_base(nl, df, t)
    });
    let j_s_hi = composite_gl4(x2, x3, panels, |t| {
        s_of(t, x2, x3) * t.powf(-1.0 + 1.0 / df)
    });
    let a_hi = (g_x2 + j_w_hi) / (x3.powf(1.0 / df) - j_s_hi / df);
    if !(a_hi > 0.0) || !a_hi.is_finite() {
        return Err(Error::ConnectorInfeasible(format!(
            "upper affine slope {a_hi} is not positive"
        )));
    }

    let lower = build_connector(
        nl,
        df,
        x0,
        x1,
        a_lo,
        true,
        a_lo * x0.powf(1.0 / df),
        (x1, nl.psi(x1)),
    );
    let upper = build_connector(nl, df, x2, x3, a_hi, false, g_x2, (x2, nl.psi(x2)));
    let psi_knots = [
        lower.psi[0],
        nl.psi(x1),
        nl.psi(x2),
        upper.psi[CONNECTOR_NODES],
    ];

    let mut dnl = DesingularizedNonlinearity {
        base: nl.clone(),
        epsilon: eps,
        d,
        trivial: false,
        a_lo,
        a_hi,
        lower: Some(lower),
        upper: Some(upper),
        psi_knots,
        m_eps: f64::INFINITY,
        big_m_eps: 0.0,
    };
    let grid = crate::nonlinearity::log_grid(x0 * 0.1, x3 * 10.0, 10_000);
    let mut m = f64::INFINITY;
    let mut big_m = 0.0f64;
    for &x in &grid {
        let up = dnl.u_eps_prime(x);
        if !(up > 0.0) {
            return Err(Error::ConnectorInfeasible(format!(
                "U_eps' = {up} at x = {x}"
            )));
        }
        if dnl.w_eps(x) < -1e-12 * (1.0 + dnl.u_eps(x).abs()) {
            return Err(Error::ConnectorInfeasible(format!(
                "W_eps = {} at x = {x}",
                dnl.w_eps(x)
            )));
        }
        m = m.min(up);
        big_m = big_m.max(up);
    }
    dnl.m_eps = m;
    dnl.big_m_eps = big_m;
    Ok(dnl)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn simpson(a: f64, b: f64, n: usize, f: impl Fn(f64) -> f64) -> f64 {
        let h = (b - a) / n as f64;
        let mut s = f(a) + f(b);
        for k in 1..n {
            let c = if k % 2 == 1 { 4.0 } else { 2.0 };
            s += c * f(a + k as f64 * h);
        }
        s * h / 3.0
    }

    #[test]
    fn boltzmann_is_left_untouched() {
        let dnl = desingularize(&Nonlinearity::boltzmann(), 0.1, 1).unwrap();
        for x in [0.01, 0.5, 1.0, 20.0] {
            assert_eq!(dnl.u_eps(x), x);
            assert_eq!(dnl.u_eps_prime(x), 1.0);
            assert_relative_eq!(dnl.psi_eps(x), x.ln());
            assert_relative_eq!(dnl.psi_eps_inv(x.ln()), x, max_relative = 1e-14);
        }
        assert_eq!(dnl.m_eps(), 1.0);
        assert_eq!(dnl.big_m_eps(), 1.0);
    }

    #[test]
    fn coincidence_region_is_exact() {
        let nl = Nonlinearity::power_convex(2.0).unwrap();
        let dnl = desingularize(&nl, 0.1, 1).unwrap();
        assert_relative_eq!(dnl.u_eps(0.5), 0.125, max_relative = 1e-14);
        for x in [0.1, 0.2, 1.0, 5.0, 10.0] {
            assert_relative_eq!(dnl.u_eps(x), nl.big_u(x), max_relative = 1e-12);
            assert_relative_eq!(dnl.u_eps_prime(x), nl.big_u_prime(x), max_relative = 1e-12);
            assert_relative_eq!(dnl.psi_eps(x), nl.psi(x), max_relative = 1e-12);
        }
    }

    #[test]
    fn tails_are_affine_through_the_origin() {
        let nl = Nonlinearity::power_convex(2.0).unwrap();
        let dnl = desingularize(&nl, 0.1, 1).unwrap();
        let slope_lo = dnl.u_eps(0.05) / 0.05;
        for x in [1e-4, 0.01, 0.03, 0.05] {
            assert_relative_eq!(dnl.u_eps(x), slope_lo * x, max_relative = 1e-13);
        }
        let slope_hi = dnl.u_eps(10.1) / 10.1;
        for x in [10.1, 20.0, 1e3] {
            assert_relative_eq!(dnl.u_eps(x), slope_hi * x, max_relative = 1e-13);
        }
        assert!(slope_lo > 0.0 && slope_hi > 0.0);
    }

    #[test]
    fn connector_satisfies_the_recovery_identity() {
        // g(x1) - g(x0) = int x^{-2+1/d} W_eps, with the integral evaluated
        // by an independent Simpson rule over the tabulated W_eps.
        for (nl, d) in [
            (Nonlinearity::power_convex(2.0).unwrap(), 1usize),
            (Nonlinearity::power_concave(0.75, 2).unwrap(), 2),
        ] {
            let eps = 0.1;
            let dnl = desingularize(&nl, eps, d).unwrap();
            let df = d as f64;
            for (a, b) in [(0.5 * eps, eps), (1.0 / eps, 1.0 / eps + eps)] {
                let lhs = b.powf(-1.0 + 1.0 / df) * dnl.u_eps(b)
                    - a.powf(-1.0 + 1.0 / df) * dnl.u_eps(a);
                let rhs = simpson(a, b, 2000, |t| t.powf(-2.0 + 1.0 / df) * dnl.w_eps(t));
                assert_relative_eq!(lhs, rhs, max_relative = 1e-6);
            }
        }
    }

    #[test]
    fn derivative_is_continuous_at_the_knots() {
        let nl = Nonlinearity::power_concave(0.75, 2).unwrap();
        let dnl = desingularize(&nl, 0.05, 2).unwrap();
        let e = 0.05;
        for x in [0.5 * e, e, 1.0 / e, 1.0 / e + e] {
            let left = dnl.u_eps_prime(x * (1.0 - 1e-9));
            let right = dnl.u_eps_prime(x * (1.0 + 1e-9));
            assert_relative_eq!(left, right, max_relative = 1e-4);
            let ul = dnl.u_eps(x * (1.0 - 1e-9));
            let ur = dnl.u_eps(x * (1.0 + 1e-9));
            assert_relative_eq!(ul, ur, max_relative = 1e-8);
            let pl = dnl.psi_eps(x * (1.0 - 1e-9));
            let pr = dnl.psi_eps(x * (1.0 + 1e-9));
            assert!((pl - pr).abs() < 1e-6 * (1.0 + pl.abs()));
        }
    }

    #[test]
    fn invariants_hold_on_the_validation_grid() {
        for (nl, d) in [
            (Nonlinearity::power_convex(2.0).unwrap(), 1usize),
            (Nonlinearity::power_convex(1.5).unwrap(), 3),
            (Nonlinearity::power_concave(0.75, 2).unwrap(), 2),
        ] {
            for eps in [0.1, 0.05] {
                let dnl = desingularize(&nl, eps, d).unwrap();
                assert!(dnl.m_eps() > 0.0);
                assert!(dnl.big_m_eps() >= dnl.m_eps());
                assert!(dnl.big_m_eps().is_finite());
            }
        }
    }

    #[test]
    fn psi_eps_is_monotone_and_inverts() {
        let nl = Nonlinearity::power_concave(0.75, 2).unwrap();
        let dnl = desingularize(&nl, 0.1, 2).unwrap();
        let xs = crate::nonlinearity::log_grid(1e-3, 1e3, 400);
        let mut prev = f64::NEG_INFINITY;
        for &x in &xs {
            let p = dnl.psi_eps(x);
            assert!(p > prev, "psi_eps not increasing at {x}");
            prev = p;
            let back = dnl.psi_eps_inv(p);
            assert_relative_eq!(back, x, max_relative = 1e-6);
        }
    }

    #[test]
    fn u2_identity_matches_the_base_inside() {
        let nl = Nonlinearity::power_convex(3.0).unwrap();
        let dnl = desingularize(&nl, 0.2, 2).unwrap();
        for x in [0.3, 1.0, 2.0, 4.0] {
            assert_relative_eq!(dnl.u2_eps(x), nl.u2(x), max_relative = 1e-12);
        }
        // affine tails have vanishing U_{eps,2}
        assert!(dnl.u2_eps(0.05).abs() < 1e-12);
        assert!(dnl.u2_eps(50.0).abs() < 1e-9);
    }

    #[test]
    fn h_eps_matches_h_on_the_coincidence_region() {
        let nl = Nonlinearity::power_convex(2.0).unwrap();
        let dnl = desingularize(&nl, 0.1, 1).unwrap();
        for x in [0.1, 0.7, 3.0, 10.0] {
            assert_relative_eq!(dnl.h_eps(x), nl.h(x), max_relative = 1e-10);
        }
        assert_eq!(dnl.h_eps(0.0), 0.0);
    }

    #[test]
    fn rejects_bad_parameters() {
        let nl = Nonlinearity::power_convex(2.0).unwrap();
        assert!(desingularize(&nl, 0.0, 1).is_err());
        assert!(desingularize(&nl, 1.5, 1).is_err());
        // power-concave outside the curvature window of the target dimension
        let bad = Nonlinearity::power_concave(0.6, 2).unwrap();
        assert!(matches!(
            desingularize(&bad, 0.1, 3),
            Err(Error::HypothesisViolation(_))
        ));
    }
}
