//! Acceptance suite. Prints one PASS/FAIL line per criterion and a summary.
//!
//! A criterion that fails its numerical check is reported as FAIL and does
//! not change the exit status; the process exits nonzero only when a
//! criterion could not be evaluated (an error or a panic). Set
//! `ACCEPTANCE_ONLY=3,7` to run a subset.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use dnd_sde_core::dnd::{
    dnd_bilinear_step, dnd_general_step, dnd_scalar_step, dnd_step, raw_step, DndState, DndWorkspace,
    GeneralWorkspace, Safeguard,
};
use dnd_sde_core::stats::observed_order;
use dnd_sde_core::{
    make_test_problem, substream, BilinearModel, Functional, NoiseLaw, NoiseSpec, NoiseStream, PathSimulator,
    SchemeId, SdeModel, TestProblem, TestProblemId, TimeGrid,
};
use dnd_sde_harness::reference::{quadrature_reference, reference_times, scheme_reference, Reference};
use dnd_sde_harness::{
    lyapunov_rates, mean_series, parse_plan, run_experiment, strong_error_rel, weak_error_abs, weak_error_rel,
    Executor, SchemeRun,
};

struct Verdict {
    pass: bool,
    detail: String,
}

type Check = Result<Verdict, String>;

fn verdict(pass: bool, detail: String) -> Check {
    Ok(Verdict { pass, detail })
}

fn within(elapsed: Duration, limit_s: f64) -> (bool, String) {
    let s = elapsed.as_secs_f64();
    (s < limit_s, format!("runtime {s:.1} s (limit {limit_s} s)"))
}

fn executor() -> Executor {
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get());
    Executor::new(workers).expect("thread pool")
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

const STABLE: TestProblemId = TestProblemId::Rotation41 { b: -4.0, sigma: 8.0, eps: 8.0 };
const UNSTABLE: TestProblemId = TestProblemId::Rotation41 { b: 4.0, sigma: 4.0, eps: 3.0 };
const EX1: TestProblemId = TestProblemId::GinzburgLandau46 { a: 1.0, b: 1.0, sigma: 2.0 };
const LOG_X1: Functional = Functional::Log1pSq { coord: 0 };

/// Uniform draws on `[lo, hi)` from a noise stream.
struct Uniform(NoiseStream);

impl Uniform {
    fn new(seed: u64) -> Self {
        Self(substream(NoiseSpec::new(NoiseLaw::UniformSqrt3, seed), 0))
    }

    fn next(&mut self, lo: f64, hi: f64) -> f64 {
        let u = 0.5 * (self.0.standard() / 3f64.sqrt() + 1.0);
        lo + (hi - lo) * u
    }
}

fn c1_gbm() -> Check {
    let start = Instant::now();
    let (a, s) = (1.0, 0.5);
    let model = BilinearModel::new(1, vec![a], vec![vec![s]]).map_err(err)?;
    let grid = TimeGrid::new(1.0, 1.0).map_err(err)?;
    let mut sim = PathSimulator::new(&model, SchemeId::Dnd, 0.0, grid).map_err(err)?;
    let noise = NoiseSpec::new(NoiseLaw::Gaussian, 1001);
    let n = 100_000u64;
    let mut logs = Vec::with_capacity(n as usize);
    for p in 0..n {
        let mut stream = substream(noise, p);
        let mut last = f64::NAN;
        let out = sim.run_stream(&[1.0], &mut stream, |_, _, x| last = x[0]);
        if out.failed() || !(last > 0.0) {
            return Err(format!("path {p} failed or lost its sign"));
        }
        logs.push(last.ln());
    }
    let nf = n as f64;
    let mean = logs.iter().sum::<f64>() / nf;
    let var = logs.iter().map(|l| (l - mean).powi(2)).sum::<f64>() / (nf - 1.0);
    let (m_exp, v_exp) = (a - 0.5 * s * s, s * s);
    let se_mean = (v_exp / nf).sqrt();
    let se_var = v_exp * (2.0 / (nf - 1.0)).sqrt();
    let (fast, time) = within(start.elapsed(), 5.0);
    let ok_m = (mean - m_exp).abs() < 4.0 * se_mean;
    let ok_v = (var - v_exp).abs() < 4.0 * se_var;
    verdict(
        ok_m && ok_v && fast,
        format!(
            "mean log X = {mean:.5} (exact {m_exp}, 4 SE {:.5}), variance {var:.5} (exact {v_exp}, 4 SE {:.5}); {time}",
            4.0 * se_mean,
            4.0 * se_var
        ),
    )
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

fn c2_equivalences() -> Check {
    let start = Instant::now();
    let mut rng = Uniform::new(2002);
    let mut worst_bilinear: f64 = 0.0;
    let mut bitwise = true;
    for _ in 0..100 {
        let d = rng.next(1.0, 4.0) as usize;
        let m = rng.next(1.0, 3.0) as usize;
        let mat = |rng: &mut Uniform| (0..d * d).map(|_| rng.next(-2.0, 2.0)).collect::<Vec<_>>();
        let drift = mat(&mut rng);
        let sigmas = (0..m).map(|_| mat(&mut rng)).collect();
        let model = BilinearModel::new(d, drift, sigmas).map_err(err)?;
        let x: Vec<f64> = (0..d).map(|_| rng.next(-3.0, 3.0)).collect();
        let dt = rng.next(1e-3, 0.5);
        let dw: Vec<f64> = (0..m).map(|_| rng.next(-2.5, 2.5) * dt.sqrt()).collect();
        let state = DndState::from_point(&x).ok_or("zero initial point")?;
        let generic = dnd_step(&model, &state, dt, &dw).map_err(err)?;
        let special = dnd_bilinear_step(&model, &state, dt, &dw).map_err(err)?;
        worst_bilinear = worst_bilinear.max(rel(generic.eta, special.eta));
        let dz = generic.zhat.iter().zip(&special.zhat).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        worst_bilinear = worst_bilinear.max(dz);
        let general = dnd_general_step(&model, &x, 0.0, dt, &dw).map_err(err)?;
        bitwise &= general
            .iter()
            .zip(generic.point())
            .all(|(a, b)| a.to_bits() == b.to_bits());
    }
    let mut worst_scalar: f64 = 0.0;
    for _ in 0..100 {
        let id = TestProblemId::GinzburgLandau46 {
            a: rng.next(-5.0, 10.0),
            b: rng.next(0.01, 10.0),
            sigma: rng.next(0.01, 5.0),
        };
        let model = make_test_problem(id).map_err(err)?;
        let x = rng.next(0.01, 5.0) * if rng.next(0.0, 1.0) < 0.5 { -1.0 } else { 1.0 };
        let dt = rng.next(1e-3, 1.0);
        let dw = [rng.next(-3.0, 3.0) * dt.sqrt()];
        let scalar = dnd_scalar_step(&model, x, dt, &dw).map_err(err)?;
        let state = DndState::from_point(&[x]).ok_or("zero initial point")?;
        let generic = dnd_step(&model, &state, dt, &dw).map_err(err)?.point()[0];
        worst_scalar = worst_scalar.max(rel(scalar, generic));
    }
    let (fast, time) = within(start.elapsed(), 1.0);
    verdict(
        worst_bilinear <= 1e-13 && worst_scalar <= 1e-13 && bitwise && fast,
        format!(
            "bilinear max deviation {worst_bilinear:.2e}, scalar max relative deviation {worst_scalar:.2e} (tol 1e-13), \
             alpha = 0 bitwise: {bitwise}; {time}"
        ),
    )
}

fn c3_norm_identity() -> Check {
    let mut rng = Uniform::new(3003);
    let mut worst: f64 = 0.0;
    let mut normal = substream(NoiseSpec::new(NoiseLaw::Gaussian, 3003), 1);
    for _ in 0..10_000 {
        let (b, sigma, eps) = (rng.next(-5.0, 5.0), rng.next(-8.0, 8.0), rng.next(-10.0, 10.0));
        let model = make_test_problem(TestProblemId::Rotation41 { b, sigma, eps }).map_err(err)?;
        let dt = rng.next(1e-4, 1.0);
        let w = [normal.standard(), normal.standard()];
        let theta = rng.next(0.0, std::f64::consts::TAU);
        let (eta, z) = (rng.next(0.1, 10.0), [theta.cos(), theta.sin()]);
        let mut ws = DndWorkspace::for_model(&model);
        raw_step(&model, eta, &z, dt, &[w[0] * dt.sqrt(), w[1] * dt.sqrt()], &mut ws).map_err(err)?;
        let got = ws.zbar.iter().map(|v| v * v).sum::<f64>();
        let e2dt = eps * eps * dt;
        let want = (1.0 - 0.5 * e2dt).powi(2) + e2dt * w[1] * w[1];
        worst = worst.max(rel(got, want));
    }
    let model = make_test_problem(STABLE).map_err(err)?;
    let dt = 1.0 / 32.0;
    let mut special: Vec<f64> = Vec::new();
    for w2 in [1.0, -1.0] {
        let mut ws = DndWorkspace::for_model(&model);
        raw_step(&model, 1.0, &[0.6, 0.8], dt, &[0.3 * dt.sqrt(), w2 * dt.sqrt()], &mut ws).map_err(err)?;
        special.push(ws.zbar.iter().map(|v| v * v).sum());
    }
    let special_ok = special.iter().all(|s| (s - 2.0).abs() <= 1e-12);
    verdict(
        worst <= 1e-12 && special_ok,
        format!("max relative deviation over 10^4 steps {worst:.2e} (tol 1e-12); eps^2 dt = 2, W = ±1: {special:?}"),
    )
}

fn weak_reference(problem: &TestProblem, x0: [f64; 2], horizon: f64) -> Result<Reference, String> {
    quadrature_reference(problem, x0, &reference_times(horizon), LOG_X1).map_err(err)
}

fn c4_stability(exec: &Executor) -> Check {
    let start = Instant::now();
    let problem = make_test_problem(STABLE).map_err(err)?;
    let x0 = [1.0, 2.0];
    let noise = NoiseSpec::new(NoiseLaw::Gaussian, 4004);
    let mut worst = f64::NEG_INFINITY;
    let mut above = 0;
    for dt in [1.0, 0.125] {
        let grid = TimeGrid::new(dt, 50.0).map_err(err)?;
        let rates = lyapunov_rates(exec, &problem, SchemeId::Dnd, 0.0, &x0, grid, 200, noise).map_err(err)?;
        for r in rates {
            let r = r.ok_or("a DND path failed")?;
            worst = worst.max(r);
            above += usize::from(r > -3.5);
        }
    }
    let part_a = above == 0;

    let run = SchemeRun {
        model: &problem,
        scheme: SchemeId::Dnd,
        alpha: 0.0,
        x0: &x0,
        grid: TimeGrid::new(1.0, 50.0).map_err(err)?,
        functional: LOG_X1,
        noise: noise.derived(1),
    };
    let series = mean_series(exec, &run, 100_000).map_err(err)?;
    let terminal = series.terminal().mean();
    let part_b = terminal < 0.01;

    let reference = weak_reference(&problem, x0, 10.0)?;
    let be = SchemeRun {
        scheme: SchemeId::backward_euler(),
        grid: TimeGrid::new(1.0 / 16.0, 10.0).map_err(err)?,
        noise: noise.derived(2),
        ..run
    };
    let be_series = mean_series(exec, &be, 10_000).map_err(err)?;
    let be_err = weak_error_abs(&be_series, &reference).map_err(err)?;
    let part_c = be_err.eps_a > 10.0;
    let (fast, time) = within(start.elapsed(), 60.0);
    verdict(
        part_a && part_b && part_c && fast,
        format!(
            "(a) {above} of 400 Lyapunov estimates above -3.5, largest {worst:.3}; \
             (b) mean log(1+(X1_50)^2) = {terminal:.3e} at 10^5 samples (< 0.01); \
             (c) backward Euler eps_a = {:.1} at dt = 1/16 (> 10, {} failed paths); {time}",
            be_err.eps_a, be_series.failed_paths
        ),
    )
}

fn c5_instability(exec: &Executor) -> Check {
    let start = Instant::now();
    let problem = make_test_problem(UNSTABLE).map_err(err)?;
    let x0 = [2.0, 4.0];
    let noise = NoiseSpec::new(NoiseLaw::Gaussian, 5005);
    let grid = TimeGrid::new(1.0, 10.0).map_err(err)?;
    let rates = lyapunov_rates(exec, &problem, SchemeId::Dnd, 0.0, &x0, grid, 200, noise).map_err(err)?;
    let mut below = 0;
    let mut smallest = f64::INFINITY;
    for r in rates {
        let growth = r.ok_or("a DND path failed")? * 10.0;
        smallest = smallest.min(growth);
        below += usize::from(growth <= 10f64.ln());
    }
    let part_a = below == 0;

    let reference = quadrature_reference(&problem, x0, &[0.0, 10.0], LOG_X1).map_err(err)?;
    let run = SchemeRun {
        model: &problem,
        scheme: SchemeId::Dnd,
        alpha: 0.0,
        x0: &x0,
        grid,
        functional: LOG_X1,
        noise: noise.derived(1),
    };
    let s = mean_series(exec, &run, 1_000_000).map_err(err)?;
    let rel_err = weak_error_rel((s.terminal().mean(), s.terminal().ci99()), reference.terminal()).map_err(err)?;
    let part_b = 100.0 * rel_err.eps_r < 0.5;
    let (fast, time) = within(start.elapsed(), 120.0);
    verdict(
        part_a && part_b && fast,
        format!(
            "(a) {below} of 200 paths with eta_T <= 10 eta_0, smallest log(eta_T/eta_0) = {smallest:.2}; \
             (b) 100 eps_r = {:.3} ± {:.3} (reference {:.6}, < 0.5); {time}",
            100.0 * rel_err.eps_r,
            100.0 * rel_err.ci,
            reference.terminal().0
        ),
    )
}

fn c6_strong_order(exec: &Executor) -> Check {
    let start = Instant::now();
    let problem = make_test_problem(STABLE).map_err(err)?;
    let noise = NoiseSpec::new(NoiseLaw::Gaussian, 6006);
    let mut pairs = Vec::new();
    let mut shown = Vec::new();
    for k in [11, 12, 13] {
        let dt = 2f64.powi(-k);
        let grid = TimeGrid::new(dt, 2.0).map_err(err)?;
        let s = strong_error_rel(exec, &problem, SchemeId::Dnd, 0.0, [1.0, 2.0], grid, 10_000, noise).map_err(err)?;
        pairs.push((dt, s.eps_hat));
        shown.push(format!("2^-{k}: {:.4e} ± {:.1e}", s.eps_hat, s.ci));
    }
    let slope = observed_order(&pairs).map_err(err)?;
    let (fast, time) = within(start.elapsed(), 120.0);
    verdict(
        slope >= 0.8 && fast,
        format!("eps_hat {}; slope {slope:.3} (>= 0.8); {time}", shown.join(", ")),
    )
}

const GL_REFERENCE_VALUE: f64 = 0.035435;

struct GlShared {
    reference: Reference,
    elapsed: Duration,
}

fn gl_reference(exec: &Executor) -> Result<GlShared, String> {
    let start = Instant::now();
    let problem = make_test_problem(EX1).map_err(err)?;
    let noise = NoiseSpec::new(NoiseLaw::TwoPoint, 7007);
    let reference = scheme_reference(
        exec,
        &problem,
        SchemeId::backward_euler(),
        1.0 / 2048.0,
        0.0,
        &[1.0],
        5.0,
        LOG_X1,
        1_000_000,
        noise,
    )
    .map_err(err)?;
    Ok(GlShared {
        reference,
        elapsed: start.elapsed(),
    })
}

fn gl_eps_r(exec: &Executor, reference: &Reference, scheme: SchemeId, dt: f64, seed: u64) -> Result<f64, String> {
    let problem = make_test_problem(EX1).map_err(err)?;
    let run = SchemeRun {
        model: &problem,
        scheme,
        alpha: 0.0,
        x0: &[1.0],
        grid: TimeGrid::new(dt, 5.0).map_err(err)?,
        functional: LOG_X1,
        noise: NoiseSpec::new(NoiseLaw::UniformSqrt3, seed),
    };
    let s = mean_series(exec, &run, 1_000_000).map_err(err)?;
    let r = weak_error_rel((s.terminal().mean(), s.terminal().ci99()), reference.terminal()).map_err(err)?;
    Ok(r.eps_r)
}

fn c7_weak_order(exec: &Executor, shared: &GlShared) -> Check {
    let start = Instant::now();
    let mut pairs = Vec::new();
    for k in 4..=7 {
        let dt = 2f64.powi(-k);
        pairs.push((dt, gl_eps_r(exec, &shared.reference, SchemeId::Dnd, dt, 7100)?));
    }
    let slope = observed_order(&pairs).map_err(err)?;
    let total = start.elapsed() + shared.elapsed;
    let (fast, time) = within(total, 600.0);
    let shown: Vec<String> = pairs.iter().map(|(dt, e)| format!("1/{}: {e:.4}", (1.0 / dt) as u64)).collect();
    verdict(
        (0.7..=1.3).contains(&slope) && pairs[0].1 < 0.06 && fast,
        format!(
            "eps_r {}; slope {slope:.3} (in [0.7, 1.3]); eps_r(1/16) < 0.06; {time} including the reference",
            shown.join(", ")
        ),
    )
}

fn c8_reference_value(shared: &GlShared) -> Check {
    let (value, ci) = shared.reference.terminal();
    verdict(
        (value - GL_REFERENCE_VALUE).abs() <= ci,
        format!(
            "backward Euler reference {value:.6} ± {ci:.6} ({} samples, {} failed); target {GL_REFERENCE_VALUE}",
            shared.reference.samples, shared.reference.failed_paths
        ),
    )
}

fn c9_baselines(exec: &Executor, shared: &GlShared) -> Check {
    let tamed = gl_eps_r(exec, &shared.reference, SchemeId::TamedEuler, 1.0, 9100)?;
    let mut balanced = Vec::new();
    for k in 0..=5 {
        balanced.push(gl_eps_r(exec, &shared.reference, SchemeId::Balanced, 2f64.powi(-k), 9200)?);
    }
    let decreasing = balanced.windows(2).all(|w| w[1] < w[0]);
    let above_one = balanced.iter().all(|&e| e > 1.0);
    let shown: Vec<String> = balanced.iter().map(|e| format!("{e:.3}")).collect();
    verdict(
        tamed > 10.0 && decreasing && above_one,
        format!(
            "tamed Euler eps_r(1) = {tamed:.2} (> 10); balanced eps_r over 1..1/32: {} (decreasing and > 1)",
            shown.join(", ")
        ),
    )
}

#[derive(Default)]
struct InvariantTally {
    steps: u64,
    worst_norm: f64,
    nonpositive: u64,
    sign_flips: u64,
    preconditioned: u64,
    failures: u64,
    overflows: u64,
}

/// A step error from a state whose normalized coefficients are finite means
/// the exponential update itself left the double range.
fn is_overflow<M: SdeModel + ?Sized>(model: &M, eta: f64, z: &[f64]) -> bool {
    dnd_sde_core::dnd::mu(model, eta, z).is_ok_and(f64::is_finite)
}

fn c10_invariants() -> Check {
    let problems = [
        STABLE,
        UNSTABLE,
        EX1,
        TestProblemId::GinzburgLandau46 { a: 6.0, b: 9.0, sigma: 3.0 },
        TestProblemId::GinzburgLandau46 { a: 9.0, b: 1.0, sigma: 4.0 },
        TestProblemId::NonlinearRot47 { a: 6.0, b: 3.0 },
        TestProblemId::NonlinearRot47 { a: 2.5, b: 5.0 },
        TestProblemId::Shifted48,
    ];
    let deltas = [1.0, 2f64.powi(-5), 2f64.powi(-10)];
    let per_run = 1_000_000 / (problems.len() * deltas.len()) as u64 + 1;
    let path_len = 50u64;
    let mut t = InvariantTally::default();
    for (i, &id) in problems.iter().enumerate() {
        let model = make_test_problem(id).map_err(err)?;
        let alpha = dnd_sde_core::dnd::alpha_default(&model);
        let x0: Vec<f64> = match id {
            TestProblemId::Rotation41 { .. } => vec![1.0, 2.0],
            TestProblemId::GinzburgLandau46 { .. } => vec![1.0],
            _ => vec![4.0, 2.0],
        };
        for (j, &dt) in deltas.iter().enumerate() {
            let noise = NoiseSpec::new(NoiseLaw::Gaussian, 10_000 + (i * 10 + j) as u64);
            let mut done = 0u64;
            let mut path = 0u64;
            let mut dw = vec![0.0; model.noise_dim()];
            while done < per_run {
                let mut stream = substream(noise, path);
                path += 1;
                let mut x = x0.clone();
                let mut state = DndState::from_point(&x0).ok_or("zero start")?;
                let mut ws = DndWorkspace::for_model(&model);
                let mut gws = GeneralWorkspace::for_model(&model);
                for _ in 0..path_len.min(per_run - done) {
                    stream.increments(dt, &mut dw);
                    done += 1;
                    t.steps += 1;
                    let guard = if model.dim() == 1 {
                        match dnd_scalar_step(&model, x[0], dt, &dw) {
                            Ok(next) => {
                                if next == 0.0 || next.is_sign_negative() != x[0].is_sign_negative() {
                                    t.sign_flips += 1;
                                }
                                x[0] = next;
                                Safeguard::None
                            }
                            Err(_) if is_overflow(&model, x[0].abs(), &[x[0].signum()]) => {
                                t.overflows += 1;
                                break;
                            }
                            Err(e) => {
                                t.failures += 1;
                                eprintln!("  c10 failure: {id:?} dt = {dt}: {e}");
                                break;
                            }
                        }
                    } else if alpha != 0.0 {
                        match gws.step(&model, &mut x, alpha, dt, &dw) {
                            Ok(g) => {
                                let n = gws.uv.iter().map(|v| v * v).sum::<f64>().sqrt();
                                t.worst_norm = t.worst_norm.max((n - 1.0).abs());
                                g
                            }
                            Err(e) => {
                                t.failures += 1;
                                eprintln!("  c10 failure: {id:?} dt = {dt}: {e}");
                                break;
                            }
                        }
                    } else {
                        match state.advance(&model, dt, &dw, &mut ws) {
                            Ok(g) => {
                                let n = state.zhat.iter().map(|v| v * v).sum::<f64>().sqrt();
                                t.worst_norm = t.worst_norm.max((n - 1.0).abs());
                                if !(state.eta > 0.0) {
                                    t.nonpositive += 1;
                                }
                                g
                            }
                            Err(_) if is_overflow(&model, state.eta, &state.zhat) => {
                                t.overflows += 1;
                                break;
                            }
                            Err(e) => {
                                t.failures += 1;
                                eprintln!("  c10 failure: {id:?} dt = {dt}: {e}");
                                break;
                            }
                        }
                    };
                    if guard != Safeguard::None && dt <= 2f64.powi(-5) {
                        t.preconditioned += 1;
                    }
                }
            }
        }
    }
    verdict(
        t.worst_norm <= 1e-12 && t.nonpositive == 0 && t.sign_flips == 0 && t.preconditioned == 0 && t.failures == 0,
        format!(
            "{} steps: max | |Z| - 1 | = {:.2e}, {} nonpositive norms, {} sign changes, \
             {} safeguard triggers at dt <= 2^-5, {} failed steps; {} paths restarted after the norm \
             overflowed the double range",
            t.steps, t.worst_norm, t.nonpositive, t.sign_flips, t.preconditioned, t.failures, t.overflows
        ),
    )
}

const REPRO_PLANS: [&str; 2] = [
    "[model]\nproblem = ginzburg_landau46\n[run]\nmode = weak_rel\nhorizon = 5\n\
     deltas = 1, 1/8, 1/32\nschemes = dnd, tamed_euler, balanced, backward_euler\nsamples = 5000\n\
     reference_delta = 1/256\nreference_samples = 5000\n[noise]\nseed = 11\n",
    "[model]\nproblem = rotation41\n[run]\nmode = strong\nhorizon = 1\ndeltas = 1/16, 1/64\n\
     schemes = dnd, euler_maruyama, srock\nsamples = 3000\n[noise]\nseed = 12\n",
];

fn c11_reproducibility() -> Check {
    let mut details = Vec::new();
    let mut same = true;
    for text in REPRO_PLANS {
        let plan = parse_plan(text).map_err(err)?;
        let mut outputs = Vec::new();
        for workers in [1, 4, 16] {
            let exec = Executor::new(workers).map_err(err)?;
            outputs.push(run_experiment(&plan, &exec).map_err(err)?.errors.to_csv());
        }
        same &= outputs.iter().all(|o| o.as_bytes() == outputs[0].as_bytes());
        details.push(format!("{} rows", outputs[0].lines().count() - 1));
    }
    verdict(same, format!("errors.csv identical for 1, 4 and 16 workers ({})", details.join(", ")))
}

fn main() {
    let only: Option<Vec<usize>> = std::env::var("ACCEPTANCE_ONLY")
        .ok()
        .map(|s| s.split(',').filter_map(|v| v.trim().parse().ok()).collect());
    let wanted = |n: usize| only.as_ref().map_or(true, |o| o.contains(&n));
    let exec = executor();
    let mut passed = 0;
    let mut failed = 0;
    let mut broken = 0;
    let mut report = |n: usize, name: &str, f: &mut dyn FnMut() -> Check| {
        if !wanted(n) {
            return;
        }
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(|| f()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(Ok(v)) => {
                let tag = if v.pass { "PASS" } else { "FAIL" };
                if v.pass {
                    passed += 1
                } else {
                    failed += 1
                }
                println!("criterion {n:>2} {tag}  {name}: {} [{secs:.1} s]", v.detail);
            }
            Ok(Err(e)) => {
                broken += 1;
                println!("criterion {n:>2} ERROR {name}: {e} [{secs:.1} s]");
            }
            Err(_) => {
                broken += 1;
                println!("criterion {n:>2} ERROR {name}: panicked [{secs:.1} s]");
            }
        }
    };
    report(1, "GBM exactness", &mut c1_gbm);
    report(2, "scheme equivalences", &mut c2_equivalences);
    report(3, "norm identity", &mut c3_norm_identity);
    report(4, "almost sure stability", &mut || c4_stability(&exec));
    report(5, "instability", &mut || c5_instability(&exec));
    report(6, "strong order", &mut || c6_strong_order(&exec));
    let needs_gl = [7, 8, 9].iter().any(|&n| wanted(n));
    let shared = needs_gl.then(|| {
        catch_unwind(AssertUnwindSafe(|| gl_reference(&exec))).unwrap_or_else(|_| Err("panicked".into()))
    });
    let with_shared = |f: &dyn Fn(&GlShared) -> Check| match &shared {
        Some(Ok(s)) => f(s),
        Some(Err(e)) => Err(format!("reference failed: {e}")),
        None => Err("reference not computed".into()),
    };
    report(7, "weak order", &mut || with_shared(&|s| c7_weak_order(&exec, s)));
    report(8, "reference value", &mut || with_shared(&|s| c8_reference_value(s)));
    report(9, "baseline sanity", &mut || with_shared(&|s| c9_baselines(&exec, s)));
    report(10, "invariant suite", &mut c10_invariants);
    report(11, "reproducibility", &mut c11_reproducibility);
    println!("acceptance: {passed} passed, {failed} failed, {broken} could not run");
    if broken > 0 {
        std::process::exit(1);
    }
}
