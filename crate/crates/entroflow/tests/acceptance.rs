//! Acceptance gate: one test per criterion, each printing a single
//! pass/fail line. Run with `cargo test --test acceptance -- --nocapture`
//! to see the lines for passing criteria as well.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use entroflow::flow::{
    check_comparison, check_second_derivative_identity, desingularize, fit_decay_rate, run_flow,
    stationary_family, FlowConfig,
};
use entroflow::grid::{
    check_cd_condition, check_hessian_gamma_identity, integrate, Domain, Field,
};
use entroflow::inequalities::{
    gns_constant, gns_extremizer, trace_gns_report, trace_logsob_report, verify_entropy_inequality,
    verify_gns_with_constant, VerificationReport,
};
use entroflow::nonlinearity::Nonlinearity;
use entroflow::potential::{extremal_profile, ExtremalProfile, Potential};
use entroflow::sampling::random_bumps;

fn conclude(number: u32, name: &str, pass: bool) {
    println!(
        "criterion {number} ({name}): {}",
        if pass { "pass" } else { "FAIL" }
    );
    assert!(pass, "criterion {number} ({name}) failed");
}

fn boltzmann_profile(d: usize, h: f64, normal_len: f64, n: usize) -> (Arc<Domain>, ExtremalProfile) {
    let transverse = if d == 1 { 0.0 } else { normal_len / 2.0 };
    let dom = Arc::new(Domain::half_space(d, transverse, normal_len, n).unwrap());
    let pot = Potential::shifted_quadratic(0.0, h, 0.5, d).unwrap();
    let prof = extremal_profile(&Nonlinearity::boltzmann(), &pot, dom.clone(), 1.0).unwrap();
    (dom, prof)
}

#[test]
fn criterion_01_trace_logsob_equality_at_extremizers() {
    let mut pass = true;
    for h in [-0.5, 0.0, 0.5] {
        let (_, prof) = boltzmann_profile(1, h, 9.0, 8192);
        let rep = trace_logsob_report(&prof.v, h).unwrap();
        pass &= rep.pre_deficit.abs() <= 1e-6;
    }
    for h in [-0.5, 0.0, 0.5] {
        let (_, prof) = boltzmann_profile(2, h, 10.0, 512);
        let rep = trace_logsob_report(&prof.v, h).unwrap();
        pass &= rep.pre_deficit.abs() <= 1e-4;
    }
    conclude(1, "trace log-Sobolev equality at extremizers", pass);
}

fn trace_gns_equality_deficit(h: f64, n: usize) -> f64 {
    let dom = Arc::new(Domain::half_space(1, 0.0, 2.0, n).unwrap());
    let pot = Potential::shifted_quadratic(0.0, h, 1.0, 1).unwrap();
    let nl = Nonlinearity::power_convex(2.0).unwrap();
    let prof = extremal_profile(&nl, &pot, dom, 1.0).unwrap();
    trace_gns_report(&prof.v, 2.0, h).unwrap().deficit_unrescaled
}

#[test]
fn criterion_02_trace_gns_equality_and_convergence() {
    let mut pass = true;
    for h in [-0.3, 0.0, 0.3] {
        pass &= trace_gns_equality_deficit(h, 8192).abs() <= 1e-5;
    }
    // the support-boundary kink limits the scheme to first order; fit the
    // observed order by least squares over a grid refinement ladder
    let grids = [1024usize, 2048, 4096, 8192];
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for &n in &grids {
        let x = (n as f64).ln();
        let y = trace_gns_equality_deficit(0.0, n).abs().ln();
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    let m = grids.len() as f64;
    let order = -(m * sxy - sx * sy) / (m * sxx - sx * sx);
    pass &= order >= 1.0;
    conclude(
        2,
        "trace GNS intermediate equality with order >= 1 convergence",
        pass,
    );
}

#[test]
fn criterion_03_gns_with_oracle_constant() {
    let alpha = 2.0;
    let c = gns_constant(alpha, 1).unwrap();
    let mut pass = true;

    let exdom = Arc::new(Domain::half_space(1, 0.0, 1.05, 8192).unwrap());
    let f = gns_extremizer(exdom.clone(), alpha, &[]);
    let eq = verify_gns_with_constant(&f, alpha, c).unwrap();
    pass &= eq.deficit.abs() <= 1e-5 * eq.target_norm;

    let dom = Arc::new(Domain::half_space(1, 0.0, 6.0, 2048).unwrap());
    let worst = (0..100u64)
        .into_par_iter()
        .map(|seed| {
            let u = random_bumps(dom.clone(), 500 + seed);
            let rep = verify_gns_with_constant(&u, alpha, c).unwrap();
            rep.deficit / rep.rhs
        })
        .reduce(|| f64::INFINITY, f64::min);
    pass &= worst >= -1e-6;

    // scalar invariance of the quotient
    let q0 = eq.target_norm / eq.rhs;
    let scaled = verify_gns_with_constant(&f.scale(3.7), alpha, c).unwrap();
    pass &= ((scaled.target_norm / scaled.rhs) / q0 - 1.0).abs() <= 1e-8;
    // dilation invariance: the same samples on a dilated box represent
    // f(mu x), and the quotient must not move
    let dil = Arc::new(Domain::half_space(1, 0.0, 1.05 / 2.5, 8192).unwrap());
    let fd = Field::from_vec(dil, f.data().to_vec()).unwrap();
    let drep = verify_gns_with_constant(&fd, alpha, c).unwrap();
    pass &= ((drep.target_norm / drep.rhs) / q0 - 1.0).abs() <= 1e-8;

    conclude(3, "sharp GNS with oracle constant on random sweeps", pass);
}

#[test]
fn criterion_04_entropy_inequality_sweeps() {
    struct Case {
        nl: Nonlinearity,
        d: usize,
        normal_len: f64,
        n: usize,
    }
    let mut cases = vec![Case {
        nl: Nonlinearity::boltzmann(),
        d: 1,
        normal_len: 6.0,
        n: 2048,
    }];
    for alpha in [1.5, 2.0, 3.0] {
        cases.push(Case {
            nl: Nonlinearity::power_convex(alpha).unwrap(),
            d: 1,
            normal_len: 6.0,
            n: 2048,
        });
    }
    for d in [1usize, 2, 3] {
        let alpha = 1.0 - 1.0 / (2.0 * d as f64);
        cases.push(Case {
            nl: Nonlinearity::power_concave(alpha, d).unwrap(),
            d,
            normal_len: 5.0,
            n: [2048, 96, 40][d - 1],
        });
    }
    let mut pass = true;
    for case in &cases {
        let transverse = if case.d == 1 { 0.0 } else { case.normal_len / 2.0 };
        let dom =
            Arc::new(Domain::half_space(case.d, transverse, case.normal_len, case.n).unwrap());
        let pot = Potential::shifted_quadratic(0.0, 0.0, 1.0, case.d).unwrap();
        let prof = extremal_profile(&case.nl, &pot, dom.clone(), 1.0).unwrap();

        let self_test = verify_entropy_inequality(&case.nl, &pot, &prof, &prof.v).unwrap();
        let step = dom.max_spacing();
        pass &= self_test.report.deficit.abs() <= (1e-6f64).max(100.0 * step * step);

        let ok = (0..100u64)
            .into_par_iter()
            .all(|seed| {
                let u = random_bumps(dom.clone(), 9000 + seed);
                let u = u.scale(prof.mass / integrate(&u));
                let v = verify_entropy_inequality(&case.nl, &pot, &prof, &u).unwrap();
                v.report.deficit >= -1e-8 * (1.0 + v.report.rhs.abs())
            });
        pass &= ok;
    }
    conclude(4, "entropy inequality sweeps across all families", pass);
}

fn flow_scenario(n: usize) -> (Arc<Domain>, ExtremalProfile, Field) {
    let (dom, prof) = boltzmann_profile(1, 0.0, 6.0, n);
    let u0 = Field::from_fn(dom.clone(), |x| 1.0 + 0.3 * (2.0 * x[0]).cos());
    let u0 = prof.v.zip_map(&u0, |a, b| a * b).unwrap();
    let m = integrate(&u0);
    (dom.clone(), prof, u0.scale(1.0 / m))
}

#[test]
fn criterion_05_flow_dynamics() {
    let (dom, prof, u0) = flow_scenario(300);
    let dnl = desingularize(&Nonlinearity::boltzmann(), 0.05, 1).unwrap();
    let cfg = FlowConfig {
        t_end: 1.0,
        snapshot_every: 20,
        ..Default::default()
    };
    let trace = run_flow(&dnl, &prof.v, &u0, &cfg).unwrap();
    let mut pass = true;
    pass &= trace.max_mass_drift <= 1e-12 * trace.steps as f64;
    pass &= trace.max_entropy_jump <= 1e-12;
    let rate = fit_decay_rate(&trace, (0.2, 1.0)).unwrap();
    pass &= rate >= 1.9;

    // the one-parameter stationary family barely moves under the flow
    let v_alpha = stationary_family(&dnl, &prof.v, 0.3);
    let scfg = FlowConfig {
        t_end: 0.1,
        ..Default::default()
    };
    let strace = run_flow(&dnl, &prof.v, &v_alpha, &scfg).unwrap();
    let step = dom.max_spacing();
    let residual = strace
        .final_u
        .zip_map(&v_alpha, |a, b| (a - b).abs())
        .unwrap()
        .max();
    pass &= residual <= 10.0 * step * step;
    conclude(5, "flow dynamics: mass, monotonicity, rate, stationarity", pass);
}

#[test]
fn criterion_06_second_derivative_identity() {
    let cfg = FlowConfig {
        t_end: 0.2,
        ..Default::default()
    };
    let probes = [0.05, 0.1, 0.15];
    let mut worsts = Vec::new();
    for (n, delta) in [(200usize, 4e-3), (400, 2e-3)] {
        let (_, prof, u0) = flow_scenario(n);
        let dnl = desingularize(&Nonlinearity::boltzmann(), 0.05, 1).unwrap();
        let rep =
            check_second_derivative_identity(&dnl, &prof.v, &u0, &cfg, &probes, delta).unwrap();
        worsts.push(rep.worst_rel_error);
    }
    let pass = worsts[1] <= 0.02 && worsts[0] / worsts[1] >= 1.5;
    conclude(6, "second-derivative identity at mid-flow probes", pass);
}

#[test]
fn criterion_07_comparison_principle() {
    let (dom, prof, _) = flow_scenario(200);
    let dnl = desingularize(&Nonlinearity::boltzmann(), 0.05, 1).unwrap();
    let cfg = FlowConfig {
        t_end: 0.3,
        ..Default::default()
    };
    let step = dom.max_spacing();
    let worst = (0..20u64)
        .into_par_iter()
        .map(|seed| {
            let u1 = random_bumps(dom.clone(), 100 + seed);
            let gap = random_bumps(dom.clone(), 2100 + seed);
            let u2 = u1.zip_map(&gap, |a, b| a + 0.5 * b).unwrap();
            check_comparison(&dnl, &prof.v, &u1, &u2, &cfg)
                .unwrap()
                .min_margin
        })
        .reduce(|| f64::INFINITY, f64::min);
    let pass = worst >= -10.0 * step * step;
    conclude(7, "comparison principle on ordered pairs", pass);
}

fn band_limited(dom: &Arc<Domain>, seed: u64) -> Field {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = dom.dim();
    let mut modes = Vec::new();
    for _ in 0..5 {
        let amp: f64 = rng.gen_range(-1.0..1.0);
        let ks: Vec<f64> = (0..d).map(|_| rng.gen_range(0..=3) as f64).collect();
        let phases: Vec<f64> = (0..d)
            .map(|_| rng.gen_range(0.0..std::f64::consts::TAU))
            .collect();
        modes.push((amp, ks, phases));
    }
    Field::from_fn(dom.clone(), |x| {
        modes
            .iter()
            .map(|(amp, ks, ph)| {
                amp * (0..d)
                    .map(|i| (ks[i] * std::f64::consts::PI * x[i] + ph[i]).cos())
                    .product::<f64>()
            })
            .sum()
    })
}

#[test]
fn criterion_08_gamma_calculus() {
    let mut pass = true;
    for d in [1usize, 2, 3] {
        let n = [512, 64, 24][d - 1];
        let dom = Arc::new(
            Domain::bounded_box(&vec![0.0; d], &vec![1.0; d], &vec![n; d]).unwrap(),
        );
        let step = dom.max_spacing();
        let quad = Field::from_fn(dom.clone(), |x| {
            0.5 * x.iter().map(|c| c * c).sum::<f64>()
        });
        pass &= check_cd_condition(&quad).worst_margin.abs() <= 1e-9;
        let worst = (0..100u64)
            .into_par_iter()
            .map(|seed| check_cd_condition(&band_limited(&dom, 7000 + seed)).worst_margin)
            .reduce(|| f64::INFINITY, f64::min);
        pass &= worst >= -10.0 * step * step;
    }
    // Hessian representation of Gamma: first-order convergence
    let mut errors = Vec::new();
    for n in [32usize, 64] {
        let dom = Arc::new(Domain::bounded_box(&[0.0; 2], &[1.0; 2], &[n; 2]).unwrap());
        let worst = (0..10u64)
            .into_par_iter()
            .map(|s| {
                let f = band_limited(&dom, 8000 + 3 * s);
                let g = band_limited(&dom, 8001 + 3 * s);
                let h = band_limited(&dom, 8002 + 3 * s);
                check_hessian_gamma_identity(&f, &g, &h).unwrap().worst_error
            })
            .reduce(|| 0.0, f64::max);
        errors.push(worst);
    }
    pass &= (errors[0] / errors[1]).log2() >= 1.0;
    conclude(8, "Gamma-calculus: CD(0,d) and Hessian identity", pass);
}

#[test]
fn criterion_09_desingularization() {
    let cases = [
        (Nonlinearity::power_convex(2.0).unwrap(), 1usize),
        (Nonlinearity::power_concave(0.75, 2).unwrap(), 2),
    ];
    let mut pass = true;
    for (nl, d) in &cases {
        for eps in [0.1, 0.05] {
            let dnl = desingularize(nl, eps, *d).unwrap();
            // exact coincidence on [eps, 1/eps]
            for i in 0..1000 {
                let x = eps + (1.0 / eps - eps) * i as f64 / 999.0;
                let u = dnl.u_eps(x);
                let b = nl.big_u(x);
                pass &= (u - b).abs() <= 1e-14 * b.abs().max(1.0);
            }
            // affine tails: vanishing second differences
            let dx = 1e-3;
            for i in 1..100 {
                let x = 0.5 * eps * i as f64 / 101.0;
                let s =
                    dnl.u_eps(x + dx * x) + dnl.u_eps(x - dx * x) - 2.0 * dnl.u_eps(x);
                pass &= s.abs() <= 1e-12 * dnl.u_eps(x).abs().max(1.0);
            }
            for i in 1..100 {
                let x = (1.0 / eps + eps) * (1.0 + i as f64 / 10.0);
                let s =
                    dnl.u_eps(x + dx * x) + dnl.u_eps(x - dx * x) - 2.0 * dnl.u_eps(x);
                pass &= s.abs() <= 1e-12 * dnl.u_eps(x).abs().max(1.0);
            }
            // parabolicity and curvature sign on a wide log grid
            let grid = entroflow::nonlinearity::log_grid(0.05 * eps, 10.0 / eps + 10.0, 10_000);
            for &x in &grid {
                pass &= dnl.u_eps_prime(x) > 0.0;
                pass &= dnl.w_eps(x) >= -1e-12 * dnl.u_eps(x).abs().max(1.0);
            }
            // psi and H agree with the base bundle on the coincidence region
            for i in 0..1000 {
                let x = eps + (1.0 / eps - eps) * i as f64 / 999.0;
                pass &= (dnl.psi_eps(x) - nl.psi(x)).abs() <= 1e-10 * nl.psi(x).abs().max(1.0);
                pass &= (dnl.h_eps(x) - nl.h(x)).abs() <= 1e-10 * nl.h(x).abs().max(1.0);
            }
        }
    }
    conclude(9, "desingularization invariants across families", pass);
}

#[test]
fn criterion_10_determinism() {
    let render = || {
        let dom = Arc::new(Domain::half_space(1, 0.0, 6.0, 1024).unwrap());
        let u = random_bumps(dom.clone(), 42);
        let rep = trace_logsob_report(&u, 0.25).unwrap();
        VerificationReport::from_logsob(&rep, &dom).to_json()
    };
    let a = render();
    let b = render();
    conclude(10, "byte-identical reports under a fixed seed", a == b);
}
