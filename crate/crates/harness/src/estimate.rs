//! Monte Carlo estimators: functional means on the observation grid, weak
//! errors against a reference, relative strong errors under common random
//! numbers, and per-path Lyapunov rates.

use std::cell::Cell;

use dnd_sde_core::dnd::SafeguardCounts;
use dnd_sde_core::model::{rotation41_exact, TestProblem, TestProblemId};
use dnd_sde_core::stats::{lyapunov_estimate, RunningStats};
use dnd_sde_core::{substream, Functional, NoiseLaw, NoiseSpec, PathSimulator, SchemeId, SdeModel, TimeGrid};

use crate::batch::Executor;
use crate::error::HarnessError;
use crate::reference::Reference;

/// Tolerance used to match observation times of different grids.
pub const TIME_MATCH: f64 = 1e-9;

/// One scheme at one step size.
#[derive(Debug, Clone, Copy)]
pub struct SchemeRun<'a, M: SdeModel + ?Sized> {
    pub model: &'a M,
    pub scheme: SchemeId,
    pub alpha: f64,
    pub x0: &'a [f64],
    pub grid: TimeGrid,
    pub functional: Functional,
    pub noise: NoiseSpec,
}

/// Per-time statistics of `φ(X̄)` over the successful paths.
#[derive(Debug, Clone, PartialEq)]
pub struct MeanSeries {
    pub times: Vec<f64>,
    pub stats: Vec<RunningStats>,
    pub paths: u64,
    pub failed_paths: u64,
    pub safeguards: SafeguardCounts,
}

impl MeanSeries {
    fn empty(times: Vec<f64>) -> Self {
        let stats = vec![RunningStats::new(); times.len()];
        Self {
            times,
            stats,
            paths: 0,
            failed_paths: 0,
            safeguards: SafeguardCounts::default(),
        }
    }

    fn merge(&mut self, other: &Self) {
        for (a, b) in self.stats.iter_mut().zip(&other.stats) {
            a.merge(b);
        }
        self.paths += other.paths;
        self.failed_paths += other.failed_paths;
        self.safeguards.merge(&other.safeguards);
    }

    pub fn terminal(&self) -> &RunningStats {
        self.stats.last().expect("a series has at least the initial time")
    }

    pub fn all_failed(&self) -> bool {
        self.paths > 0 && self.failed_paths == self.paths
    }
}

/// Simulates `samples` paths (path `p` on substream `p`) and collects
/// `φ(X̄)` on the observation grid. Paths that fail or produce a non-finite
/// value are excluded and counted in `failed_paths`.
pub fn mean_series<M: SdeModel + Sync + ?Sized>(
    exec: &Executor,
    run: &SchemeRun<'_, M>,
    samples: u64,
) -> Result<MeanSeries, HarnessError> {
    // Surface construction errors before spawning work.
    PathSimulator::new(run.model, run.scheme, run.alpha, run.grid)?;
    let times = run.grid.observation_times();
    let parts = exec.map_blocks(samples, |block| {
        let mut part = MeanSeries::empty(times.clone());
        let mut sim = PathSimulator::new(run.model, run.scheme, run.alpha, run.grid).expect("checked above");
        let mut values = vec![0.0; times.len()];
        for p in block {
            let mut stream = substream(run.noise, p);
            let outcome = sim.run_stream(run.x0, &mut stream, |j, _, x| values[j] = run.functional.eval(x));
            part.paths += 1;
            part.safeguards.merge(&outcome.safeguards);
            if outcome.failed() || !values.iter().all(|v| v.is_finite()) {
                part.failed_paths += 1;
                continue;
            }
            for (s, &v) in part.stats.iter_mut().zip(&values) {
                s.push(v);
            }
        }
        part
    });
    let mut total = MeanSeries::empty(times);
    for part in &parts {
        total.merge(part);
    }
    Ok(total)
}

/// `ε_a` with its conservative half-width and the time where the maximum
/// is attained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeakAbs {
    pub eps_a: f64,
    pub ci: f64,
    pub worst_time: f64,
}

/// Maximum over the scheme's observation times of `|E φ(X_t) − mean_t|`.
/// The half-width is the maximum over the grid of scheme plus reference
/// half-widths.
pub fn weak_error_abs(series: &MeanSeries, reference: &Reference) -> Result<WeakAbs, HarnessError> {
    if series.stats.iter().any(|s| s.count() == 0) {
        return Err(HarnessError::AllPathsFailed { paths: series.paths });
    }
    let mut out = WeakAbs {
        eps_a: 0.0,
        ci: 0.0,
        worst_time: 0.0,
    };
    for (&t, s) in series.times.iter().zip(&series.stats) {
        let (value, ci) = reference.at(t).ok_or(HarnessError::MissingReference(t))?;
        let err = (value - s.mean()).abs();
        if err > out.eps_a || (err.is_nan() && !out.eps_a.is_nan()) {
            out.eps_a = err;
            out.worst_time = t;
        }
        out.ci = out.ci.max(s.ci99() + ci);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeakRel {
    pub eps_r: f64,
    pub ci: f64,
}

/// `|r − m| / |r|` for a reference `r ± ci_r` and an estimate `m ± ci_m`.
/// The half-width is propagated to first order. Undefined unless
/// `|r| > 10 ci_r`.
pub fn weak_error_rel(estimate: (f64, f64), reference: (f64, f64)) -> Result<WeakRel, HarnessError> {
    let (m, ci_m) = estimate;
    let (r, ci_r) = reference;
    if !(r.abs() > 10.0 * ci_r) {
        return Err(HarnessError::UndefinedRelative { reference: r, ci: ci_r });
    }
    Ok(WeakRel {
        eps_r: (r - m).abs() / r.abs(),
        ci: ci_m / r.abs() + ci_r * m.abs() / (r * r),
    })
}

/// Relative strong error and its bookkeeping.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StrongError {
    pub eps_hat: f64,
    pub ci: f64,
    /// Time at which the supremum over the grid is attained.
    pub worst_time: f64,
    pub paths: u64,
    pub failed_paths: u64,
}

/// `sup_n E(‖X_{Tₙ} − Ỹₙ‖² / ‖X_{Tₙ}‖²)` for the rotation problem, with the
/// exact solution driven by the same Brownian increments as the scheme.
///
/// The increments handed to the scheme are accumulated into `(W¹, W²)` as
/// they are drawn, and each path checks that the stream produced exactly
/// two draws per step, so both solutions see one increment sequence.
pub fn strong_error_rel(
    exec: &Executor,
    model: &TestProblem,
    scheme: SchemeId,
    alpha: f64,
    x0: [f64; 2],
    grid: TimeGrid,
    samples: u64,
    noise: NoiseSpec,
) -> Result<StrongError, HarnessError> {
    let TestProblemId::Rotation41 { b, sigma, eps } = model.id() else {
        return Err(HarnessError::Unsupported(
            "strong errors need the pathwise exact solution of the rotation problem".into(),
        ));
    };
    if noise.law != NoiseLaw::Gaussian {
        return Err(HarnessError::Unsupported(
            "strong errors need Gaussian increments".into(),
        ));
    }
    let every_step = TimeGrid { stride: 1, ..grid };
    PathSimulator::new(model, scheme, alpha, every_step)?;
    let steps = every_step.steps;
    let parts = exec.map_blocks(samples, |block| {
        let mut stats = vec![RunningStats::new(); steps + 1];
        let mut failed = 0u64;
        let mut sim = PathSimulator::new(model, scheme, alpha, every_step).expect("checked above");
        let mut ratios = vec![0.0; steps + 1];
        for p in block.clone() {
            let mut stream = substream(noise, p);
            let w1 = Cell::new(0.0);
            let w2 = Cell::new(0.0);
            let calls = Cell::new(0usize);
            let outcome = sim.run(
                &x0,
                |dw| {
                    stream.increments(every_step.dt, dw);
                    w1.set(w1.get() + dw[0]);
                    w2.set(w2.get() + dw[1]);
                    calls.set(calls.get() + 1);
                },
                |j, t, x| {
                    let exact = rotation41_exact(b, sigma, eps, x0, t, w1.get(), w2.get());
                    let num = (exact[0] - x[0]).powi(2) + (exact[1] - x[1]).powi(2);
                    let den = exact[0] * exact[0] + exact[1] * exact[1];
                    ratios[j] = num / den;
                },
            );
            let consumed = calls.get();
            let finished = !outcome.failed() && ratios.iter().all(|r| r.is_finite());
            if finished {
                assert_eq!(consumed, steps, "one increment per step");
                assert_eq!(stream.draws(), 2 * steps as u64, "two draws per increment");
                for (s, &r) in stats.iter_mut().zip(&ratios) {
                    s.push(r);
                }
            } else {
                failed += 1;
            }
        }
        (stats, failed, block.end - block.start)
    });
    let mut stats = vec![RunningStats::new(); steps + 1];
    let (mut failed, mut paths) = (0, 0);
    for (part, f, n) in &parts {
        for (a, b) in stats.iter_mut().zip(part) {
            a.merge(b);
        }
        failed += f;
        paths += n;
    }
    if paths > 0 && failed == paths {
        return Err(HarnessError::AllPathsFailed { paths });
    }
    let (mut best, mut at) = (0.0, 0);
    for (n, s) in stats.iter().enumerate() {
        if s.mean() > best || s.mean().is_nan() {
            best = s.mean();
            at = n;
        }
    }
    Ok(StrongError {
        eps_hat: best,
        ci: stats[at].ci99(),
        worst_time: at as f64 * every_step.dt,
        paths,
        failed_paths: failed,
    })
}

/// Per-path `(1/T) log(‖X̄_N‖/‖X̄_0‖)`; `None` where the path failed or the
/// rate is undefined. DND schemes report `η̄_N` directly.
pub fn lyapunov_rates<M: SdeModel + Sync + ?Sized>(
    exec: &Executor,
    model: &M,
    scheme: SchemeId,
    alpha: f64,
    x0: &[f64],
    grid: TimeGrid,
    paths: u64,
    noise: NoiseSpec,
) -> Result<Vec<Option<f64>>, HarnessError> {
    PathSimulator::new(model, scheme, alpha, grid)?;
    let parts = exec.map_blocks(paths, |block| {
        let mut sim = PathSimulator::new(model, scheme, alpha, grid).expect("checked above");
        block
            .map(|p| {
                let mut stream = substream(noise, p);
                let outcome = sim.run_stream(x0, &mut stream, |_, _, _| {});
                if outcome.failed() {
                    return None;
                }
                lyapunov_estimate(outcome.initial_norm, outcome.terminal_norm, grid.horizon).ok()
            })
            .collect::<Vec<_>>()
    });
    Ok(parts.into_iter().flatten().collect())
}
