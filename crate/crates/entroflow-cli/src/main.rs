//! Batch front end: configures scenarios, runs verifications, flows and
//! identity checks, and writes machine-readable reports.
//!
//! Exit codes: 0 all checks pass, 1 a mathematical check failed, 2
//! configuration or hypothesis error.

use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use entroflow::error::Error;
use entroflow::flow::{
    check_second_derivative_identity, choose_epsilon, desingularize, fit_decay_rate, run_flow,
    FlowConfig,
};
use entroflow::grid::{
    check_cd_condition, check_hessian_gamma_identity, integrate, Domain, Field,
};
use entroflow::inequalities::{
    gns_constant, gns_extremizer, trace_gns_report, trace_logsob_report, verify_entropy_inequality,
    verify_gns_with_constant, VerificationReport,
};
use entroflow::nonlinearity::Nonlinearity;
use entroflow::potential::{extremal_profile, Potential};
use entroflow::sampling::random_bumps;

#[derive(Parser)]
#[command(name = "entroflow", version, about = "entropy-method inequality verifiers")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Verify one of the sharp inequalities on seeded random sweeps plus its
    /// equality case.
    Verify(VerifyArgs),
    /// Run the desingularized gradient flow and export the trace.
    Flow(FlowArgs),
    /// Check one of the structural identities of the discrete calculus.
    IdentityCheck(IdentityArgs),
}

#[derive(Args)]
struct VerifyArgs {
    /// inequality tag: trace-logsob | trace-gns | gns | entropy
    #[arg(long)]
    ineq: String,
    /// nonlinearity family for `entropy`: boltzmann | power-convex |
    /// power-concave | sobolev
    #[arg(long, default_value = "boltzmann")]
    family: String,
    #[arg(long, allow_negative_numbers = true)]
    alpha: Option<f64>,
    #[arg(long, default_value_t = 1)]
    dim: usize,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    h: f64,
    /// cells per axis
    #[arg(long, default_value_t = 4096)]
    grid: usize,
    /// box length per axis
    #[arg(long, default_value_t = 8.0)]
    box_len: f64,
    #[arg(long, default_value_t = 20)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// relative deficit tolerance for sweeps
    #[arg(long, default_value_t = 1e-8)]
    tol_deficit: f64,
    /// absolute tolerance for equality cases
    #[arg(long, default_value_t = 1e-5)]
    tol_equality: f64,
    /// JSON report output path
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct FlowArgs {
    #[arg(long, default_value = "boltzmann")]
    family: String,
    #[arg(long, allow_negative_numbers = true)]
    alpha: Option<f64>,
    #[arg(long, default_value_t = 1)]
    dim: usize,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    h: f64,
    #[arg(long, default_value_t = 256)]
    grid: usize,
    #[arg(long, default_value_t = 6.0)]
    box_len: f64,
    #[arg(long, default_value_t = 1.0)]
    t_end: f64,
    #[arg(long, default_value_t = 0.5)]
    safety: f64,
    /// desingularization parameter cap
    #[arg(long, default_value_t = 0.05)]
    eps: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// start from the stationary profile itself
    #[arg(long, default_value_t = false)]
    stationary: bool,
    /// CSV trace output path
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct IdentityArgs {
    /// which identity: second-derivative | cd | hessian-gamma
    #[arg(long)]
    which: String,
    #[arg(long, default_value_t = 2)]
    dim: usize,
    #[arg(long, default_value_t = 64)]
    grid: usize,
    #[arg(long, default_value_t = 20)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Serialize, Deserialize)]
struct CliReport {
    schema: u32,
    command: String,
    timestamp: u64,
    pass: bool,
    notes: Vec<String>,
    reports: Vec<VerificationReport>,
}

fn write_atomic(path: &PathBuf, contents: &str) -> std::io::Result<()> {
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, contents)?;
    std::fs::rename(&tmp, path)
}

fn exit_code_for(e: &Error) -> ExitCode {
    match e {
        Error::ParameterOutOfRange(_)
        | Error::Config(_)
        | Error::HypothesisViolation(_)
        | Error::DimensionMismatch => ExitCode::from(2),
        _ => ExitCode::from(1),
    }
}

fn now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

fn finish(
    command: &str,
    pass: bool,
    notes: Vec<String>,
    reports: Vec<VerificationReport>,
    out: &Option<PathBuf>,
) -> Result<ExitCode, Error> {
    for n in &notes {
        println!("{n}");
    }
    let report = CliReport {
        schema: 1,
        command: command.to_string(),
        timestamp: now(),
        pass,
        notes,
        reports,
    };
    if let Some(path) = out {
        let json =
            serde_json::to_string_pretty(&report).expect("report serialization cannot fail");
        write_atomic(path, &json).map_err(|e| Error::Config(format!("cannot write report: {e}")))?;
    }
    Ok(if pass { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn half_space(dim: usize, box_len: f64, grid: usize) -> Result<Arc<Domain>, Error> {
    Ok(Arc::new(Domain::half_space(dim, box_len, box_len, grid)?))
}

fn cmd_verify(args: &VerifyArgs) -> Result<ExitCode, Error> {
    let dom = half_space(args.dim, args.box_len, args.grid)?;
    let mut notes = Vec::new();
    let mut reports = Vec::new();
    let mut pass = true;
    match args.ineq.as_str() {
        "trace-logsob" => {
            let pot = Potential::shifted_quadratic(0.0, args.h, 0.5, args.dim)?;
            let v = extremal_profile(&Nonlinearity::boltzmann(), &pot, dom.clone(), 1.0)?.v;
            let eq = trace_logsob_report(&v, args.h)?;
            let ok = eq.pre_deficit.abs() <= args.tol_equality;
            notes.push(format!(
                "equality case: pre-rescaled deficit {:.3e} (tolerance {:.1e}) -> {}",
                eq.pre_deficit,
                args.tol_equality,
                if ok { "pass" } else { "FAIL" }
            ));
            pass &= ok;
            reports.push(VerificationReport::from_logsob(&eq, &dom));
            let sweep: Result<Vec<_>, Error> = (0..args.samples)
                .into_par_iter()
                .map(|i| {
                    let u = random_bumps(dom.clone(), args.seed + i as u64);
                    trace_logsob_report(&u, args.h)
                })
                .collect();
            for rep in sweep? {
                let ok = rep.deficit >= -args.tol_deficit * (1.0 + rep.rhs.abs())
                    && rep.pre_deficit >= -args.tol_deficit * (1.0 + rep.pre_rhs.abs());
                pass &= ok;
                reports.push(VerificationReport::from_logsob(&rep, &dom));
            }
            notes.push(format!("sweep: {} samples", args.samples));
        }
        "trace-gns" => {
            let alpha = args
                .alpha
                .ok_or_else(|| Error::Config("trace-gns needs --alpha".into()))?;
            let nl = Nonlinearity::power_convex(alpha)?;
            let pot = Potential::shifted_quadratic(0.0, args.h, 1.0, args.dim)?;
            let v = extremal_profile(&nl, &pot, dom.clone(), 1.0)?.v;
            let eq = trace_gns_report(&v, alpha, args.h)?;
            let ok = eq.deficit_unrescaled.abs() <= args.tol_equality * (1.0 + eq.lhs.abs());
            notes.push(format!(
                "equality case: unrescaled deficit {:.3e} -> {}",
                eq.deficit_unrescaled,
                if ok { "pass" } else { "FAIL" }
            ));
            pass &= ok;
            reports.push(VerificationReport::from_trace_gns(&eq, &dom));
            let sweep: Result<Vec<_>, Error> = (0..args.samples)
                .into_par_iter()
                .map(|i| {
                    let u = random_bumps(dom.clone(), args.seed + i as u64);
                    trace_gns_report(&u, alpha, args.h)
                })
                .collect();
            for rep in sweep? {
                pass &= rep.deficit >= -args.tol_deficit * (1.0 + rep.rhs.abs());
                reports.push(VerificationReport::from_trace_gns(&rep, &dom));
            }
            notes.push(format!("sweep: {} samples", args.samples));
        }
        "gns" => {
            let alpha = args
                .alpha
                .ok_or_else(|| Error::Config("gns needs --alpha".into()))?;
            if !(alpha > 1.0) {
                return Err(Error::ParameterOutOfRange(format!(
                    "gns needs alpha > 1, got {alpha}"
                )));
            }
            let c = gns_constant(alpha, args.dim)?;
            notes.push(format!("sharp constant C_alpha = {c:.12}"));
            let exdom = Arc::new(Domain::half_space(args.dim, 1.05, 1.05, args.grid.min(8192))?);
            let f = gns_extremizer(exdom.clone(), alpha, &[]);
            let eq = verify_gns_with_constant(&f, alpha, c)?;
            let ok = eq.deficit.abs() <= args.tol_equality * eq.target_norm;
            notes.push(format!(
                "extremizer self-test deficit {:.3e} -> {}",
                eq.deficit,
                if ok { "pass" } else { "FAIL" }
            ));
            pass &= ok;
            reports.push(VerificationReport::from_gns(&eq, &exdom));
            let sweep: Result<Vec<_>, Error> = (0..args.samples)
                .into_par_iter()
                .map(|i| {
                    let u = random_bumps(dom.clone(), args.seed + i as u64);
                    verify_gns_with_constant(&u, alpha, c)
                })
                .collect();
            for rep in sweep? {
                pass &= rep.deficit >= -1e-6 * rep.rhs;
                reports.push(VerificationReport::from_gns(&rep, &dom));
            }
            notes.push(format!("sweep: {} samples", args.samples));
        }
        "entropy" => {
            let nl = Nonlinearity::make(&args.family, args.alpha, args.dim)?;
            let pot = Potential::shifted_quadratic(0.0, args.h, 1.0, args.dim)?;
            let prof = extremal_profile(&nl, &pot, dom.clone(), 1.0)?;
            let self_test = verify_entropy_inequality(&nl, &pot, &prof, &prof.v)?;
            // discretization error dominates at coarse grids
            let step = dom.max_spacing();
            let tol = args.tol_equality.max(step * step);
            let ok = self_test.report.deficit.abs() <= tol;
            notes.push(format!(
                "self-test at u = v ({}): deficit {:.3e} -> {}",
                self_test.variant,
                self_test.report.deficit,
                if ok { "pass" } else { "FAIL" }
            ));
            pass &= ok;
            reports.push(VerificationReport::from_entropy(
                &self_test.report,
                &dom,
                args.alpha,
                args.h,
                self_test.advisory,
            ));
            let sweep: Result<Vec<_>, Error> = (0..args.samples)
                .into_par_iter()
                .map(|i| {
                    let u = random_bumps(dom.clone(), args.seed + i as u64);
                    let u = u.scale(prof.mass / integrate(&u));
                    verify_entropy_inequality(&nl, &pot, &prof, &u)
                })
                .collect();
            for verdict in sweep? {
                let scaled_rhs = verdict.report.rhs / (2.0 * verdict.report.c);
                pass &= verdict.report.deficit >= -args.tol_deficit * (1.0 + scaled_rhs.abs());
                reports.push(VerificationReport::from_entropy(
                    &verdict.report,
                    &dom,
                    args.alpha,
                    args.h,
                    verdict.advisory,
                ));
            }
            notes.push(format!("sweep: {} samples", args.samples));
        }
        other => {
            return Err(Error::Config(format!("unknown inequality tag `{other}`")));
        }
    }
    notes.push(format!("verdict: {}", if pass { "pass" } else { "FAIL" }));
    finish("verify", pass, notes, reports, &args.out)
}

fn cmd_flow(args: &FlowArgs) -> Result<ExitCode, Error> {
    let nl = Nonlinearity::make(&args.family, args.alpha, args.dim)?;
    let scale = if nl.is_boltzmann() { 0.5 } else { 1.0 };
    let pot = Potential::shifted_quadratic(0.0, args.h, scale, args.dim)?;
    let dom = half_space(args.dim, args.box_len, args.grid)?;
    let prof = extremal_profile(&nl, &pot, dom.clone(), 1.0)?;

    let u0 = if args.stationary {
        None
    } else {
        let bumps = random_bumps(dom.clone(), args.seed);
        let u = prof.v.zip_map(&bumps, |a, b| a * (1.0 + 0.5 * b)).unwrap();
        Some(u.scale(prof.mass / integrate(&u)))
    };

    // strictly positive reference profile for the drift
    let eps = {
        let mut fields: Vec<&Field> = vec![];
        if prof.v.min() > 0.0 {
            fields.push(&prof.v);
        }
        if let Some(u) = &u0 {
            if u.min() > 0.0 {
                fields.push(u);
            }
        }
        choose_epsilon(args.eps, &fields)
    };
    let dnl = desingularize(&nl, eps, args.dim)?;
    let vflow = if prof.v.min() > 0.0 {
        prof.v.clone()
    } else {
        let vpot = pot.field_on(dom.clone());
        vpot.map(|vv| dnl.psi_eps_inv(prof.beta - vv))
    };
    let u0 = match u0 {
        Some(u) => {
            let floor = 1e-10 * u.max();
            u.map(|x| x.max(floor))
        }
        None => vflow.clone(),
    };

    let cfg = FlowConfig {
        safety: args.safety,
        t_end: args.t_end,
        snapshot_every: 10,
        capture_times: Vec::new(),
    };
    let trace = run_flow(&dnl, &vflow, &u0, &cfg)?;
    let mut pass = true;
    let drift_ok = trace.max_mass_drift <= 1e-12 * trace.steps as f64;
    let mono_ok = trace.max_entropy_jump <= 1e-12;
    pass &= drift_ok && mono_ok;
    println!(
        "steps {} dt {:.3e}; mass drift {:.3e} -> {}; entropy slack {:.3e} -> {}",
        trace.steps,
        trace.dt,
        trace.max_mass_drift,
        if drift_ok { "pass" } else { "FAIL" },
        trace.max_entropy_jump,
        if mono_ok { "pass" } else { "FAIL" }
    );
    match fit_decay_rate(&trace, (0.2 * args.t_end, args.t_end)) {
        Ok(rate) => println!(
            "fitted production decay rate {rate:.4}, reference 2C = {:.4}",
            2.0 * pot.convexity_constant()
        ),
        Err(_) => println!("production too small to fit a decay rate"),
    }
    if let Some(path) = &args.out {
        write_atomic(path, &trace.to_csv())
            .map_err(|e| Error::Config(format!("cannot write trace: {e}")))?;
    }
    Ok(if pass { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn cmd_identity(args: &IdentityArgs) -> Result<ExitCode, Error> {
    let mut notes = Vec::new();
    let mut pass = true;
    match args.which.as_str() {
        "cd" => {
            let lo = vec![0.0; args.dim];
            let hi = vec![1.0; args.dim];
            let n = vec![args.grid; args.dim];
            let dom = Arc::new(Domain::bounded_box(&lo, &hi, &n)?);
            let step = dom.max_spacing();
            let quad = Field::from_fn(dom.clone(), |x| {
                0.5 * x.iter().map(|c| c * c).sum::<f64>()
            });
            let eq_margin = check_cd_condition(&quad).worst_margin;
            let ok = eq_margin.abs() <= 1e-9;
            notes.push(format!(
                "equality case margin {eq_margin:.3e} -> {}",
                if ok { "pass" } else { "FAIL" }
            ));
            pass &= ok;
            let worst = (0..args.samples)
                .into_par_iter()
                .map(|i| {
                    let f = random_bumps(dom.clone(), args.seed + i as u64);
                    check_cd_condition(&f).worst_margin
                })
                .reduce(|| f64::INFINITY, f64::min);
            let ok = worst >= -10.0 * step * step;
            notes.push(format!(
                "worst CD(0,d) margin over {} samples: {worst:.3e} -> {}",
                args.samples,
                if ok { "pass" } else { "FAIL" }
            ));
            pass &= ok;
        }
        "hessian-gamma" => {
            let mut errors = Vec::new();
            for n in [args.grid, args.grid * 2] {
                let lo = vec![0.0; args.dim];
                let hi = vec![1.0; args.dim];
                let nn = vec![n; args.dim];
                let dom = Arc::new(Domain::bounded_box(&lo, &hi, &nn)?);
                let worst = (0..args.samples)
                    .into_par_iter()
                    .map(|i| {
                        let f = random_bumps(dom.clone(), args.seed + 3 * i as u64);
                        let g = random_bumps(dom.clone(), args.seed + 3 * i as u64 + 1);
                        let h = random_bumps(dom.clone(), args.seed + 3 * i as u64 + 2);
                        check_hessian_gamma_identity(&f, &g, &h)
                            .map(|r| r.worst_error)
                            .unwrap_or(f64::INFINITY)
                    })
                    .reduce(|| 0.0, f64::max)
                    ;
                errors.push(worst);
            }
            let order = (errors[0] / errors[1]).log2();
            let ok = order >= 1.0;
            notes.push(format!(
                "worst absolute identity errors {:.3e} -> {:.3e}, convergence order {order:.2} -> {}",
                errors[0],
                errors[1],
                if ok { "pass" } else { "FAIL" }
            ));
            pass &= ok;
        }
        "second-derivative" => {
            let nl = Nonlinearity::boltzmann();
            let pot = Potential::shifted_quadratic(0.0, 0.0, 0.5, 1)?;
            let dom = half_space(1, 6.0, args.grid.max(300))?;
            let prof = extremal_profile(&nl, &pot, dom.clone(), 1.0)?;
            let bumps = random_bumps(dom.clone(), args.seed);
            let u0 = prof.v.zip_map(&bumps, |a, b| a * (1.0 + 0.5 * b)).unwrap();
            let u0 = u0.scale(1.0 / integrate(&u0));
            let dnl = desingularize(&nl, 0.05, 1)?;
            let cfg = FlowConfig {
                t_end: 0.2,
                ..Default::default()
            };
            let rep = check_second_derivative_identity(
                &dnl,
                &prof.v,
                &u0,
                &cfg,
                &[0.05, 0.1, 0.15],
                2e-3,
            )?;
            let ok = rep.worst_rel_error <= 0.02;
            for (t, fd, formula, rel) in &rep.probes {
                notes.push(format!(
                    "t = {t:.4}: finite difference {fd:.6e}, formula {formula:.6e}, relative error {rel:.3e}"
                ));
            }
            notes.push(format!(
                "worst relative error {:.3e} -> {}",
                rep.worst_rel_error,
                if ok { "pass" } else { "FAIL" }
            ));
            pass &= ok;
        }
        other => {
            return Err(Error::Config(format!("unknown identity tag `{other}`")));
        }
    }
    notes.push(format!("verdict: {}", if pass { "pass" } else { "FAIL" }));
    finish("identity-check", pass, notes, Vec::new(), &args.out)
}

fn main() -> ExitCode {
    if let Ok(threads) = std::env::var("ENTROFLOW_THREADS") {
        if let Ok(n) = threads.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
    let cli = Cli::parse();
    let result = match &cli.cmd {
        Cmd::Verify(args) => cmd_verify(args),
        Cmd::Flow(args) => cmd_flow(args),
        Cmd::IdentityCheck(args) => cmd_identity(args),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code_for(&e)
        }
    }
}
