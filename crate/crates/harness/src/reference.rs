//! Reference values `E φ(X_t)` on the 1/16 observation grid.
//!
//! Three routes: Gauss–Legendre quadrature of the exact law and the exact
//! pathwise sampler, both for the rotation problem, and a fine-step scheme
//! (by default backward Euler at Δ = 2⁻¹¹ with ±1 increments) for any model.

use dnd_sde_core::model::{rotation41_exact, TestProblem, TestProblemId};
use dnd_sde_core::path::OBSERVATION_SPACING;
use dnd_sde_core::stats::RunningStats;
use dnd_sde_core::{substream, Functional, NoiseLaw, NoiseSpec, SchemeId, SdeModel, TimeGrid};

use crate::batch::Executor;
use crate::error::HarnessError;
use crate::estimate::{mean_series, SchemeRun, TIME_MATCH};
use crate::quadrature::rotation_expectation;

pub const REFERENCE_DT: f64 = 1.0 / 2048.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ReferenceMethod {
    Quadrature,
    ExactSampler,
    Scheme { scheme: SchemeId, dt: f64 },
}

impl ReferenceMethod {
    pub fn backward_euler() -> Self {
        Self::Scheme {
            scheme: SchemeId::backward_euler(),
            dt: REFERENCE_DT,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Quadrature => "quadrature",
            Self::ExactSampler => "exact_sampler",
            Self::Scheme { scheme, .. } => scheme.name(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Reference {
    pub method: ReferenceMethod,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    /// 99% half-widths; zero for quadrature.
    pub ci: Vec<f64>,
    pub samples: u64,
    pub failed_paths: u64,
}

impl Reference {
    /// Value and half-width at time `t`.
    pub fn at(&self, t: f64) -> Option<(f64, f64)> {
        let i = self.times.partition_point(|&s| s < t - TIME_MATCH);
        match self.times.get(i) {
            Some(&s) if (s - t).abs() <= TIME_MATCH => Some((self.values[i], self.ci[i])),
            _ => None,
        }
    }

    pub fn terminal(&self) -> (f64, f64) {
        (*self.values.last().unwrap(), *self.ci.last().unwrap())
    }

    fn initial_only(method: ReferenceMethod, x0: &[f64], functional: Functional) -> Self {
        Self {
            method,
            times: vec![0.0],
            values: vec![functional.eval(x0)],
            ci: vec![0.0],
            samples: 0,
            failed_paths: 0,
        }
    }
}

/// `0, 1/16, 2/16, …` up to `horizon`, with `horizon` appended when it is
/// not on the grid.
pub fn reference_times(horizon: f64) -> Vec<f64> {
    let n = (horizon / OBSERVATION_SPACING + TIME_MATCH).floor() as usize;
    let mut times: Vec<f64> = (0..=n).map(|k| k as f64 * OBSERVATION_SPACING).collect();
    if (times[n] - horizon).abs() > TIME_MATCH {
        times.push(horizon);
    }
    times
}

fn rotation_parameters(problem: &TestProblem) -> Result<(f64, f64, f64), HarnessError> {
    match problem.id() {
        TestProblemId::Rotation41 { b, sigma, eps } => Ok((b, sigma, eps)),
        _ => Err(HarnessError::Unsupported(format!(
            "the exact law is only available for rotation41, not {}",
            problem.id().name()
        ))),
    }
}

fn check_horizon(horizon: f64) -> Result<(), HarnessError> {
    if horizon >= 0.0 && horizon.is_finite() {
        Ok(())
    } else {
        Err(HarnessError::Unsupported(format!("horizon {horizon} must be finite and nonnegative")))
    }
}

/// Quadrature of the exact law at `times`.
pub fn quadrature_reference(
    problem: &TestProblem,
    x0: [f64; 2],
    times: &[f64],
    functional: Functional,
) -> Result<Reference, HarnessError> {
    let (b, sigma, eps) = rotation_parameters(problem)?;
    let values = times
        .iter()
        .map(|&t| rotation_expectation(b, sigma, eps, x0, t, functional))
        .collect();
    Ok(Reference {
        method: ReferenceMethod::Quadrature,
        times: times.to_vec(),
        values,
        ci: vec![0.0; times.len()],
        samples: 0,
        failed_paths: 0,
    })
}

/// Monte Carlo over the exact solution; the Brownian values are built from
/// Gaussian increments between consecutive grid times, whatever law `noise`
/// names.
pub fn exact_sampler_reference(
    exec: &Executor,
    problem: &TestProblem,
    x0: [f64; 2],
    horizon: f64,
    functional: Functional,
    samples: u64,
    noise: NoiseSpec,
) -> Result<Reference, HarnessError> {
    let (b, sigma, eps) = rotation_parameters(problem)?;
    check_horizon(horizon)?;
    if horizon == 0.0 {
        return Ok(Reference::initial_only(ReferenceMethod::ExactSampler, &x0, functional));
    }
    let times = reference_times(horizon);
    let noise = noise.with_law(NoiseLaw::Gaussian);
    let parts = exec.map_blocks(samples, |block| {
        let mut stats = vec![RunningStats::new(); times.len()];
        let mut dw = [0.0; 2];
        for p in block {
            let mut stream = substream(noise, p);
            let (mut w1, mut w2) = (0.0, 0.0);
            stats[0].push(functional.eval(&x0));
            for (j, pair) in times.windows(2).enumerate() {
                stream.increments(pair[1] - pair[0], &mut dw);
                w1 += dw[0];
                w2 += dw[1];
                let x = rotation41_exact(b, sigma, eps, x0, pair[1], w1, w2);
                stats[j + 1].push(functional.eval(&x));
            }
        }
        stats
    });
    let mut stats = vec![RunningStats::new(); times.len()];
    for part in &parts {
        for (a, b) in stats.iter_mut().zip(part) {
            a.merge(b);
        }
    }
    Ok(Reference {
        method: ReferenceMethod::ExactSampler,
        values: stats.iter().map(|s| s.mean()).collect(),
        ci: stats.iter().map(|s| s.ci99()).collect(),
        times,
        samples,
        failed_paths: 0,
    })
}

/// Monte Carlo over a fine-step scheme. `dt` must be at most 1/16 so that
/// the observations land on the 1/16 grid.
pub fn scheme_reference<M: SdeModel + Sync + ?Sized>(
    exec: &Executor,
    model: &M,
    scheme: SchemeId,
    dt: f64,
    alpha: f64,
    x0: &[f64],
    horizon: f64,
    functional: Functional,
    samples: u64,
    noise: NoiseSpec,
) -> Result<Reference, HarnessError> {
    let method = ReferenceMethod::Scheme { scheme, dt };
    check_horizon(horizon)?;
    if horizon == 0.0 {
        return Ok(Reference::initial_only(method, x0, functional));
    }
    if dt > OBSERVATION_SPACING {
        return Err(HarnessError::Unsupported(format!(
            "reference step {dt} is coarser than the 1/16 observation grid"
        )));
    }
    let grid = TimeGrid::new(dt, horizon)?;
    let run = SchemeRun {
        model,
        scheme,
        alpha,
        x0,
        grid,
        functional,
        noise,
    };
    let series = mean_series(exec, &run, samples)?;
    if series.all_failed() {
        return Err(HarnessError::AllPathsFailed { paths: series.paths });
    }
    Ok(Reference {
        method,
        values: series.stats.iter().map(|s| s.mean()).collect(),
        ci: series.stats.iter().map(|s| s.ci99()).collect(),
        times: series.times,
        samples,
        failed_paths: series.failed_paths,
    })
}
