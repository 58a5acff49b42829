//! Conservative finite-volume discretization of the desingularized flow
//! `d_t u = Lap U_eps(u) - div(u grad psi_eps(v))` with zero flux through
//! every face of the box.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::flow::DesingularizedNonlinearity;
use crate::grid::{
    gamma, gamma2, gradient, hessian, integrate, laplacian,
    surface_integral_normal_derivative, Domain, Field,
};

/// Stepping parameters. `safety` scales the parabolic CFL bound
/// `dt <= safety * min_step^2 / (2 d M_eps)`.
#[derive(Clone, Debug)]
pub struct FlowConfig {
    pub safety: f64,
    pub t_end: f64,
    /// record scalar diagnostics every this many steps (first and last step
    /// are always recorded)
    pub snapshot_every: usize,
    /// times at which the full field is captured (snapped to step times)
    pub capture_times: Vec<f64>,
}

impl Default for FlowConfig {
    fn default() -> Self {
        FlowConfig {
            safety: 0.5,
            t_end: 1.0,
            snapshot_every: 10,
            capture_times: Vec::new(),
        }
    }
}

/// Scalar history of one run plus captured fields.
#[derive(Clone, Debug)]
pub struct FlowTrace {
    pub times: Vec<f64>,
    pub mass: Vec<f64>,
    /// the Lyapunov functional `Lambda(t) = int H_eps(u) - u psi_eps(v)`
    pub entropy: Vec<f64>,
    /// discrete entropy production `I(t)`
    pub production: Vec<f64>,
    pub fields: Vec<(f64, Field)>,
    pub final_u: Field,
    pub dt: f64,
    pub steps: usize,
    /// largest single-step increase of `Lambda` observed (should be at the
    /// 1e-12 roundoff scale)
    pub max_entropy_jump: f64,
    /// largest relative mass deviation from the initial mass
    pub max_mass_drift: f64,
}

impl FlowTrace {
    /// CSV export with full round-trip precision.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,mass,entropy,production\n");
        for i in 0..self.times.len() {
            out.push_str(&format!(
                "{},{},{},{}\n",
                self.times[i], self.mass[i], self.entropy[i], self.production[i]
            ));
        }
        out
    }
}

/// The scenario rule for the regularization parameter:
/// `eps = min(eps0, min(field)/2, ...) / 2`.
pub fn choose_epsilon(eps0: f64, fields: &[&Field]) -> f64 {
    let mut e = eps0;
    for f in fields {
        e = e.min(0.5 * f.min());
    }
    0.5 * e
}

struct Stepper<'a> {
    dnl: &'a DesingularizedNonlinearity,
    dom: Arc<Domain>,
    dt: f64,
    psi_v: Vec<f64>,
}

fn time_step(
    dnl: &DesingularizedNonlinearity,
    dom: &Domain,
    psi_v: &[f64],
    cfg: &FlowConfig,
) -> Result<f64> {
    if !(cfg.safety > 0.0 && cfg.safety <= 1.0) {
        return Err(Error::Config(format!(
            "CFL safety factor must lie in (0,1], got {}",
            cfg.safety
        )));
    }
    let d = dom.dim() as f64;
    let hmin = dom.min_spacing();
    let mut dt = cfg.safety * hmin * hmin / (2.0 * d * dnl.big_m_eps());
    // advection restriction from the drift field grad psi_eps(v)
    let mut vmax = 0.0f64;
    for axis in 0..dom.dim() {
        let stride = dom.strides()[axis];
        let na = dom.cells(axis);
        let h = dom.spacing(axis);
        for lin in 0..psi_v.len() {
            if dom.multi_index(lin)[axis] + 1 < na {
                vmax = vmax.max(((psi_v[lin + stride] - psi_v[lin]) / h).abs());
            }
        }
    }
    if vmax > 0.0 {
        dt = dt.min(cfg.safety * hmin / (2.0 * d * vmax));
    }
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::CflViolation(dt));
    }
    Ok(dt)
}

impl<'a> Stepper<'a> {
    fn new(
        dnl: &'a DesingularizedNonlinearity,
        v: &Field,
        cfg: &FlowConfig,
    ) -> Result<Self> {
        v.check_positive()?;
        let dom = v.domain().clone();
        let psi_v: Vec<f64> = v.data().iter().map(|&x| dnl.psi_eps(x)).collect();
        let dt = time_step(dnl, &dom, &psi_v, cfg)?;
        Ok(Stepper { dnl, dom, dt, psi_v })
    }

    /// One explicit Euler step; flux form, so mass telescopes exactly.
    fn step(&self, u: &mut [f64], ueps: &mut [f64]) -> Result<()> {
        for (e, &x) in ueps.iter_mut().zip(u.iter()) {
            *e = self.dnl.u_eps(x);
        }
        let dim = self.dom.dim();
        let snapshot: Vec<f64> = u.to_vec();
        for axis in 0..dim {
            let stride = self.dom.strides()[axis];
            let na = self.dom.cells(axis);
            let h = self.dom.spacing(axis);
            let c = self.dt / (h * h);
            for lin in 0..snapshot.len() {
                if self.dom.multi_index(lin)[axis] + 1 >= na {
                    continue;
                }
                let j = lin + stride;
                let flux = -(ueps[j] - ueps[lin])
                    + 0.5 * (snapshot[lin] + snapshot[j]) * (self.psi_v[j] - self.psi_v[lin]);
                u[lin] -= c * flux;
                u[j] += c * flux;
            }
        }
        for (i, &x) in u.iter().enumerate() {
            if !(x >= 0.0) || !x.is_finite() {
                return Err(Error::NegativeCell { index: i, value: x });
            }
        }
        Ok(())
    }

    fn lyapunov(&self, u: &[f64]) -> f64 {
        let mut s = 0.0;
        for (i, &x) in u.iter().enumerate() {
            s += self.dnl.h_eps(x) - x * self.psi_v[i];
        }
        s * self.dom.cell_volume()
    }

    /// Discrete production: sum over faces of
    /// `u_face * (d_face phi)^2 * face_area * h` with
    /// `phi = psi_eps(v) - psi_eps(u)`.
    fn production(&self, u: &[f64]) -> f64 {
        let phi: Vec<f64> = u
            .iter()
            .zip(&self.psi_v)
            .map(|(&x, &pv)| pv - self.dnl.psi_eps(x))
            .collect();
        let mut s = 0.0;
        for axis in 0..self.dom.dim() {
            let stride = self.dom.strides()[axis];
            let na = self.dom.cells(axis);
            let h = self.dom.spacing(axis);
            for lin in 0..u.len() {
                if self.dom.multi_index(lin)[axis] + 1 >= na {
                    continue;
                }
                let j = lin + stride;
                let slope = (phi[j] - phi[lin]) / h;
                s += 0.5 * (u[lin] + u[j]) * slope * slope;
            }
        }
        s * self.dom.cell_volume()
    }

    fn mass(&self, u: &[f64]) -> f64 {
        u.iter().sum::<f64>() * self.dom.cell_volume()
    }
}

/// Runs the flow from `u0` against the strictly positive reference profile
/// `v`. The initial mass need not match the mass of `v`; the scheme
/// conserves whatever mass it is given, which is what the comparison
/// principle exercises.
pub fn run_flow(
    dnl: &DesingularizedNonlinearity,
    v: &Field,
    u0: &Field,
    cfg: &FlowConfig,
) -> Result<FlowTrace> {
    v.check_same_domain(u0)?;
    u0.check_positive()?;
    let stepper = Stepper::new(dnl, v, cfg)?;
    let dt = stepper.dt;
    let steps = (cfg.t_end / dt).ceil().max(1.0) as usize;
    let dt = cfg.t_end / steps as f64;
    let stepper = Stepper { dt, ..stepper };

    let mut capture_times = cfg.capture_times.clone();
    capture_times.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut capture_idx = 0;

    let mut u: Vec<f64> = u0.data().to_vec();
    let mut ueps = vec![0.0; u.len()];
    let mass0 = stepper.mass(&u);
    let mut lam_prev = stepper.lyapunov(&u);

    let mut trace = FlowTrace {
        times: vec![0.0],
        mass: vec![mass0],
        entropy: vec![lam_prev],
        production: vec![stepper.production(&u)],
        fields: Vec::new(),
        final_u: u0.clone(),
        dt,
        steps,
        max_entropy_jump: 0.0,
        max_mass_drift: 0.0,
    };
    while capture_idx < capture_times.len() && capture_times[capture_idx] <= 1e-12 {
        trace.fields.push((0.0, u0.clone()));
        capture_idx += 1;
    }

    for n in 1..=steps {
        stepper.step(&mut u, &mut ueps)?;
        let t = n as f64 * dt;
        let lam = stepper.lyapunov(&u);
        trace.max_entropy_jump = trace.max_entropy_jump.max(lam - lam_prev);
        lam_prev = lam;
        let m = stepper.mass(&u);
        trace.max_mass_drift = trace.max_mass_drift.max(((m - mass0) / mass0).abs());
        if n % cfg.snapshot_every == 0 || n == steps {
            trace.times.push(t);
            trace.mass.push(m);
            trace.entropy.push(lam);
            trace.production.push(stepper.production(&u));
        }
        while capture_idx < capture_times.len() && t >= capture_times[capture_idx] - 1e-12 {
            trace
                .fields
                .push((t, Field::from_vec(v.domain().clone(), u.clone()).unwrap()));
            capture_idx += 1;
        }
    }
    trace.final_u = Field::from_vec(v.domain().clone(), u).unwrap();
    Ok(trace)
}

/// The one-parameter stationary family `v_alpha = psi_eps^{-1}(psi_eps(v) +
/// alpha)`, strictly increasing in `alpha` pointwise.
pub fn stationary_family(
    dnl: &DesingularizedNonlinearity,
    v: &Field,
    alpha: f64,
) -> Field {
    v.map(|x| dnl.psi_eps_inv(dnl.psi_eps(x) + alpha))
}

#[derive(Clone, Debug)]
pub struct ComparisonReport {
    /// min over time and cells of `u2 - u1`
    pub min_margin: f64,
    pub steps: usize,
}

/// Runs two flows with identical stepping from ordered initial data and
/// reports the worst ordering margin along the way.
pub fn check_comparison(
    dnl: &DesingularizedNonlinearity,
    v: &Field,
    u1_0: &Field,
    u2_0: &Field,
    cfg: &FlowConfig,
) -> Result<ComparisonReport> {
    u1_0.check_same_domain(u2_0)?;
    u1_0.check_positive()?;
    u2_0.check_positive()?;
    let stepper = Stepper::new(dnl, v, cfg)?;
    let dt = stepper.dt;
    let steps = (cfg.t_end / dt).ceil().max(1.0) as usize;
    let dt = cfg.t_end / steps as f64;
    let stepper = Stepper { dt, ..stepper };
    let mut u1: Vec<f64> = u1_0.data().to_vec();
    let mut u2: Vec<f64> = u2_0.data().to_vec();
    let mut scratch = vec![0.0; u1.len()];
    let mut margin = u1
        .iter()
        .zip(&u2)
        .map(|(a, b)| b - a)
        .fold(f64::INFINITY, f64::min);
    for _ in 0..steps {
        stepper.step(&mut u1, &mut scratch)?;
        stepper.step(&mut u2, &mut scratch)?;
        for (a, b) in u1.iter().zip(&u2) {
            margin = margin.min(b - a);
        }
    }
    Ok(ComparisonReport {
        min_margin: margin,
        steps,
    })
}

#[derive(Clone, Debug)]
pub struct IdentityCheckReport {
    /// per probe: (time, finite-difference value, formula value, relative
    /// error)
    pub probes: Vec<(f64, f64, f64, f64)>,
    pub worst_rel_error: f64,
}

/// `Lambda'(t) = -int u Gamma(phi)` evaluated from a snapshot.
fn lambda_prime(dnl: &DesingularizedNonlinearity, v: &Field, u: &Field) -> f64 {
    let phi = v
        .zip_map(u, |vv, uu| dnl.psi_eps(vv) - dnl.psi_eps(uu))
        .unwrap();
    let g = gamma(&phi, &phi).unwrap();
    let integrand = u.zip_map(&g, |uu, gg| uu * gg).unwrap();
    -integrate(&integrand)
}

/// Compares a centered finite difference of `Lambda'` against the closed
/// second-derivative formula
/// `2 int [ -Hess psi_eps(v)(grad phi, grad phi) u + (Lap phi)^2 U_{eps,2}(u)
/// + Gamma_2(phi) U_eps(u) ] - boundary term` at the probe times.
pub fn check_second_derivative_identity(
    dnl: &DesingularizedNonlinearity,
    v: &Field,
    u0: &Field,
    cfg: &FlowConfig,
    probe_times: &[f64],
    delta: f64,
) -> Result<IdentityCheckReport> {
    let stepper = Stepper::new(dnl, v, cfg)?;
    // mirror the dt adjustment made by run_flow so that probe times snap to
    // exact step times
    let steps = (cfg.t_end / stepper.dt).ceil().max(1.0) as usize;
    let dt = cfg.t_end / steps as f64;
    let k = (delta / dt).round().max(1.0);
    for &t in probe_times {
        if t - k * dt < -1e-12 || t + k * dt > cfg.t_end + 1e-12 {
            return Err(Error::ProbeOutsideTrace(t));
        }
    }
    let mut cfg = cfg.clone();
    for &t in probe_times {
        let tq = (t / dt).round() * dt;
        let dq = k * dt;
        cfg.capture_times.push(tq - dq);
        cfg.capture_times.push(tq);
        cfg.capture_times.push(tq + dq);
    }
    let trace = run_flow(dnl, v, u0, &cfg)?;
    debug_assert!((trace.dt - dt).abs() <= 1e-15 * dt);
    let find = |t: f64| -> Result<&Field> {
        trace
            .fields
            .iter()
            .find(|(s, _)| (s - t).abs() <= 0.51 * dt)
            .map(|(_, f)| f)
            .ok_or(Error::ProbeOutsideTrace(t))
    };

    let psi_v = v.map(|x| dnl.psi_eps(x));
    let hess_psi_v = hessian(&psi_v);
    let dim = v.domain().dim();

    let mut probes = Vec::new();
    let mut worst = 0.0f64;
    for &t in probe_times {
        let tq = (t / dt).round() * dt;
        let dq = k * dt;
        let fd = (lambda_prime(dnl, v, find(tq + dq)?)
            - lambda_prime(dnl, v, find(tq - dq)?))
            / (2.0 * dq);

        let u = find(tq)?;
        let phi = v
            .zip_map(u, |vv, uu| dnl.psi_eps(vv) - dnl.psi_eps(uu))
            .unwrap();
        let grads = gradient(&phi);
        let mut hess_term = Field::zeros(v.domain().clone());
        for i in 0..dim {
            for j in 0..dim {
                let comp = &hess_psi_v[i * dim + j];
                for (((o, h), gi), gj) in hess_term
                    .data_mut()
                    .iter_mut()
                    .zip(comp.data())
                    .zip(grads[i].data())
                    .zip(grads[j].data())
                {
                    *o += h * gi * gj;
                }
            }
        }
        let lap_phi = laplacian(&phi);
        let g2 = gamma2(&phi, &phi).unwrap();
        let mut integrand = Field::zeros(v.domain().clone());
        for i in 0..integrand.len() {
            let uu = u.data()[i];
            integrand.data_mut()[i] = -hess_term.data()[i] * uu
                + lap_phi.data()[i] * lap_phi.data()[i] * dnl.u2_eps(uu)
                + g2.data()[i] * dnl.u_eps(uu);
        }
        let gphi = gamma(&phi, &phi).unwrap();
        let u_eps_field = u.map(|x| dnl.u_eps(x));
        let boundary = surface_integral_normal_derivative(&gphi, &u_eps_field)?;
        let formula = 2.0 * integrate(&integrand) - boundary;
        let rel = (fd - formula).abs() / formula.abs().max(1e-300);
        worst = worst.max(rel);
        probes.push((tq, fd, formula, rel));
    }
    Ok(IdentityCheckReport {
        probes,
        worst_rel_error: worst,
    })
}

/// Least-squares slope of `log I(t)` over the window; returns the decay
/// rate (the negated slope).
pub fn fit_decay_rate(trace: &FlowTrace, window: (f64, f64)) -> Result<f64> {
    let mut ts = Vec::new();
    let mut logs = Vec::new();
    for (i, &t) in trace.times.iter().enumerate() {
        if t < window.0 || t > window.1 {
            continue;
        }
        let p = trace.production[i];
        if !(p > 0.0) {
            return Err(Error::WindowTooShort(format!(
                "nonpositive production {p} at t = {t}"
            )));
        }
        ts.push(t);
        logs.push(p.ln());
    }
    if ts.len() < 10 {
        return Err(Error::WindowTooShort(format!(
            "{} samples in window, need at least 10",
            ts.len()
        )));
    }
    let n = ts.len() as f64;
    let tbar = ts.iter().sum::<f64>() / n;
    let lbar = logs.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (t, l) in ts.iter().zip(&logs) {
        num += (t - tbar) * (l - lbar);
        den += (t - tbar) * (t - tbar);
    }
    Ok(-num / den)
}
