//! Single-path driver: iterates a one-step map over a uniform grid, draws the
//! increments, and reports the state on a coarser observation grid.

use alloc::vec;
use alloc::vec::Vec;

use crate::baselines::{BaselineWorkspace, SchemeId};
use crate::dnd::{dnd_scalar_step, DndState, DndWorkspace, GeneralWorkspace, SafeguardCounts};
use crate::error::{EstimateError, ModelError, StepError, StepFailure};
use crate::linalg::norm;
use crate::model::SdeModel;
use crate::noise::NoiseStream;

/// Coarsest observation spacing used by the weak-error functionals.
pub const OBSERVATION_SPACING: f64 = 0.0625;

/// `φ(x) = log(1 + (xⁱ)²)` or `arctan(1 + (xⁱ)²)` for a 0-based coordinate `i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Functional {
    Log1pSq { coord: usize },
    Atan1pSq { coord: usize },
}

impl Functional {
    #[inline]
    pub fn eval(&self, x: &[f64]) -> f64 {
        match *self {
            Self::Log1pSq { coord } => libm::log1p(x[coord] * x[coord]),
            Self::Atan1pSq { coord } => libm::atan(1.0 + x[coord] * x[coord]),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Log1pSq { .. } => "log1p_sq",
            Self::Atan1pSq { .. } => "atan1p_sq",
        }
    }

    pub fn coord(&self) -> usize {
        match *self {
            Self::Log1pSq { coord } | Self::Atan1pSq { coord } => coord,
        }
    }
}

/// `N = T/Δ` steps with observations every `stride` steps, where
/// `stride Δ = max(Δ, 1/16)`, plus the terminal step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub dt: f64,
    pub horizon: f64,
    pub steps: usize,
    pub stride: usize,
}

fn integer_ratio(num: f64, den: f64) -> Option<usize> {
    let r = num / den;
    let n = libm::round(r);
    if n >= 1.0 && libm::fabs(r - n) <= 1e-9 * n && n < 1e15 {
        Some(n as usize)
    } else {
        None
    }
}

impl TimeGrid {
    pub fn new(dt: f64, horizon: f64) -> Result<Self, EstimateError> {
        let grid_error = EstimateError::Grid { horizon, dt };
        if !(dt > 0.0) || !dt.is_finite() || !(horizon > 0.0) || !horizon.is_finite() {
            return Err(grid_error);
        }
        let steps = integer_ratio(horizon, dt).ok_or(grid_error.clone())?;
        let stride = if dt >= OBSERVATION_SPACING {
            1
        } else {
            integer_ratio(OBSERVATION_SPACING, dt).ok_or(grid_error)?
        };
        Ok(Self {
            dt,
            horizon,
            steps,
            stride,
        })
    }

    /// Step indices at which the state is observed: `0, stride, 2·stride, …`
    /// and always `N`.
    pub fn observation_steps(&self) -> Vec<usize> {
        let mut out: Vec<usize> = (0..=self.steps).step_by(self.stride).collect();
        if *out.last().unwrap() != self.steps {
            out.push(self.steps);
        }
        out
    }

    pub fn observation_times(&self) -> Vec<f64> {
        self.observation_steps().iter().map(|&n| n as f64 * self.dt).collect()
    }

    pub fn observation_count(&self) -> usize {
        self.steps / self.stride + 1 + usize::from(self.steps % self.stride != 0)
    }

    #[inline]
    fn observes(&self, n: usize) -> bool {
        n % self.stride == 0 || n == self.steps
    }
}

/// Summary of one simulated path.
#[derive(Debug, Clone, PartialEq)]
pub struct PathOutcome {
    /// `Err` carries the failing step.
    pub status: Result<(), StepError>,
    /// Steps completed before a failure (or `N`).
    pub steps_done: usize,
    /// `η̄₀` for direction-and-norm runs, `‖X₀‖` otherwise.
    pub initial_norm: f64,
    /// Norm after the last completed step.
    pub terminal_norm: f64,
    pub safeguards: SafeguardCounts,
}

impl PathOutcome {
    pub fn failed(&self) -> bool {
        self.status.is_err()
    }
}

enum Stepper {
    /// Scheme 3 on `x[0]`.
    Scalar,
    /// Scheme 1 on `(η̄, Ẑ)`.
    Sphere(DndState, DndWorkspace),
    /// Scheme 4 on `X̄` with `α ≠ 0`.
    Augmented(GeneralWorkspace),
    Baseline(BaselineWorkspace),
}

/// Reusable driver for many paths of one `(model, scheme, Δ, T)` setting.
pub struct PathSimulator<'m, M: SdeModel + ?Sized> {
    model: &'m M,
    scheme: SchemeId,
    alpha: f64,
    grid: TimeGrid,
    stepper: Stepper,
    x: Vec<f64>,
    dw: Vec<f64>,
}

impl<'m, M: SdeModel + ?Sized> PathSimulator<'m, M> {
    /// `alpha` only matters for `SchemeId::Dnd`: 0 selects Scheme 1 (Scheme 3
    /// when `d = 1`), nonzero selects Scheme 4.
    pub fn new(model: &'m M, scheme: SchemeId, alpha: f64, grid: TimeGrid) -> Result<Self, ModelError> {
        let d = model.dim();
        let m = model.noise_dim();
        let stepper = match scheme {
            SchemeId::Dnd if alpha != 0.0 => Stepper::Augmented(GeneralWorkspace::new(d, m)),
            SchemeId::Dnd => {
                if !model.equilibrium_at_zero() {
                    return Err(ModelError::Unsupported {
                        required: "an equilibrium at the origin (or a nonzero alpha)",
                    });
                }
                if d == 1 {
                    Stepper::Scalar
                } else {
                    Stepper::Sphere(
                        DndState {
                            eta: 0.0,
                            zhat: vec![0.0; d],
                        },
                        DndWorkspace::new(d, m),
                    )
                }
            }
            other => {
                other.validate().map_err(|reason| ModelError::ParameterDomain {
                    name: "scheme options",
                    value: f64::NAN,
                    reason,
                })?;
                Stepper::Baseline(BaselineWorkspace::new(d, m))
            }
        };
        Ok(Self {
            model,
            scheme,
            alpha,
            grid,
            stepper,
            x: vec![0.0; d],
            dw: vec![0.0; m],
        })
    }

    pub fn grid(&self) -> TimeGrid {
        self.grid
    }

    pub fn scheme(&self) -> SchemeId {
        self.scheme
    }

    /// Runs one path from `x0`. `increments` fills the `m` values `√Δ Ŵᵏ` for
    /// each step; `observe(j, t, x)` is called for the `j`-th observation.
    /// After a failure no further observations are made.
    pub fn run<F, O>(&mut self, x0: &[f64], mut increments: F, mut observe: O) -> PathOutcome
    where
        F: FnMut(&mut [f64]),
        O: FnMut(usize, f64, &[f64]),
    {
        let grid = self.grid;
        let model = self.model;
        let dt = grid.dt;
        let mut safeguards = SafeguardCounts::default();
        self.x.copy_from_slice(x0);
        observe(0, 0.0, &self.x);
        let mut obs = 1;

        let initial_norm = match &mut self.stepper {
            Stepper::Sphere(state, _) => match DndState::from_point(x0) {
                Some(s) => {
                    *state = s;
                    state.eta
                }
                None => {
                    let failure = if x0.iter().all(|v| v.is_finite()) {
                        StepFailure::Precondition("the initial state must be nonzero")
                    } else {
                        StepFailure::NonFinite
                    };
                    return PathOutcome {
                        status: Err(StepError::new(failure, norm(x0), x0).at_step(0)),
                        steps_done: 0,
                        initial_norm: norm(x0),
                        terminal_norm: norm(x0),
                        safeguards,
                    };
                }
            },
            _ => norm(x0),
        };

        let mut status = Ok(());
        let mut done = 0;
        for n in 1..=grid.steps {
            increments(&mut self.dw);
            let result = match &mut self.stepper {
                Stepper::Scalar => dnd_scalar_step(model, self.x[0], dt, &self.dw).map(|v| self.x[0] = v),
                Stepper::Sphere(state, ws) => state.advance(model, dt, &self.dw, ws).map(|g| safeguards.record(g)),
                Stepper::Augmented(ws) => ws
                    .step(model, &mut self.x, self.alpha, dt, &self.dw)
                    .map(|g| safeguards.record(g)),
                Stepper::Baseline(ws) => ws.step(self.scheme, model, &mut self.x, dt, &self.dw),
            };
            if let Err(e) = result {
                status = Err(e.at_step(n));
                break;
            }
            done = n;
            if grid.observes(n) {
                if let Stepper::Sphere(state, _) = &self.stepper {
                    state.write_point(&mut self.x);
                }
                observe(obs, n as f64 * dt, &self.x);
                obs += 1;
            }
        }
        let terminal_norm = match &self.stepper {
            Stepper::Sphere(state, _) => state.eta,
            _ => norm(&self.x),
        };
        PathOutcome {
            status,
            steps_done: done,
            initial_norm,
            terminal_norm,
            safeguards,
        }
    }

    /// The state after the last [`run`](Self::run) call.
    pub fn state(&mut self) -> &[f64] {
        if let Stepper::Sphere(state, _) = &self.stepper {
            state.write_point(&mut self.x);
        }
        &self.x
    }

    /// Runs with increments drawn from `stream`.
    pub fn run_stream<O: FnMut(usize, f64, &[f64])>(
        &mut self,
        x0: &[f64],
        stream: &mut NoiseStream,
        observe: O,
    ) -> PathOutcome {
        let dt = self.grid.dt;
        self.run(x0, |dw| stream.increments(dt, dw), observe)
    }
}

/// One path with its observations `(t, φ(X̄))`.
#[derive(Debug, Clone, PartialEq)]
pub struct PathResult {
    pub observations: Vec<(f64, f64)>,
    pub terminal: Vec<f64>,
    pub outcome: PathOutcome,
}

/// Convenience wrapper around [`PathSimulator`] for a single path.
pub fn simulate_path<M: SdeModel + ?Sized>(
    scheme: SchemeId,
    model: &M,
    alpha: f64,
    x0: &[f64],
    dt: f64,
    horizon: f64,
    stream: &mut NoiseStream,
    functional: Functional,
) -> Result<PathResult, EstimateError> {
    let grid = TimeGrid::new(dt, horizon)?;
    let mut sim = PathSimulator::new(model, scheme, alpha, grid)?;
    let mut observations = Vec::with_capacity(grid.observation_count());
    let outcome = sim.run_stream(x0, stream, |_, t, x| observations.push((t, functional.eval(x))));
    Ok(PathResult {
        observations,
        terminal: sim.state().to_vec(),
        outcome,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{make_test_problem, BilinearModel, TestProblemId};
    use crate::noise::{substream, NoiseLaw, NoiseSpec};

    #[test]
    fn grid_rules() {
        let g = TimeGrid::new(1.0 / 128.0, 5.0).unwrap();
        assert_eq!((g.steps, g.stride), (640, 8));
        assert_eq!(g.observation_count(), 81);
        assert_eq!(g.observation_times().len(), 81);
        let g = TimeGrid::new(1.0, 10.0).unwrap();
        assert_eq!((g.steps, g.stride), (10, 1));
        assert!(TimeGrid::new(1.0 / 3.0, 10.0).is_ok());
        assert!(TimeGrid::new(0.3, 1.0).is_err());
        assert!(TimeGrid::new(0.0, 1.0).is_err());
        let odd = TimeGrid::new(0.25, 0.75).unwrap();
        assert_eq!(odd.observation_steps(), vec![0, 1, 2, 3]);
        let g = TimeGrid::new(0.0625, 0.125).unwrap();
        assert_eq!(g.observation_steps(), vec![0, 1, 2]);
    }

    #[test]
    fn zero_model_keeps_the_initial_state() {
        let m = BilinearModel::new(2, vec![0.0; 4], vec![vec![0.0; 4]]).unwrap();
        for scheme in [
            SchemeId::Dnd,
            SchemeId::EulerMaruyama,
            SchemeId::backward_euler(),
            SchemeId::Balanced,
            SchemeId::srock3(),
            SchemeId::TamedEuler,
        ] {
            let mut s = substream(NoiseSpec::new(NoiseLaw::Gaussian, 1), 0);
            let r = simulate_path(scheme, &m, 0.0, &[1.0, -2.0], 0.25, 2.0, &mut s, Functional::Log1pSq { coord: 0 })
                .unwrap();
            assert!(r.outcome.status.is_ok());
            // The direction-and-norm split rounds once when forming η̄Ẑ.
            let tol = if scheme == SchemeId::Dnd { 1e-15 } else { 0.0 };
            assert!((r.terminal[0] - 1.0).abs() <= tol && (r.terminal[1] + 2.0).abs() <= 2.0 * tol, "{scheme:?}");
            assert!(r.observations.iter().all(|&(_, v)| (v - 2f64.ln()).abs() <= tol));
        }
    }

    #[test]
    fn failures_are_captured() {
        let m = make_test_problem(TestProblemId::Rotation41 { b: -4.0, sigma: 8.0, eps: 8.0 }).unwrap();
        let mut s = substream(NoiseSpec::new(NoiseLaw::Gaussian, 1), 0);
        let r = simulate_path(SchemeId::Dnd, &m, 0.0, &[0.0, 0.0], 1.0, 2.0, &mut s, Functional::Log1pSq { coord: 0 })
            .unwrap();
        assert!(r.outcome.failed());
        assert_eq!(r.observations.len(), 1);
    }

    #[test]
    fn shifted_problem_needs_alpha() {
        let m = make_test_problem(TestProblemId::Shifted48).unwrap();
        let g = TimeGrid::new(0.25, 1.0).unwrap();
        assert!(PathSimulator::new(&m, SchemeId::Dnd, 0.0, g).is_err());
        assert!(PathSimulator::new(&m, SchemeId::Dnd, 1.0, g).is_ok());
    }

    #[test]
    fn functionals() {
        let x = [3.0, -1.0];
        assert_eq!(Functional::Log1pSq { coord: 0 }.eval(&x), 10f64.ln());
        assert_eq!(Functional::Atan1pSq { coord: 1 }.eval(&x), 2f64.atan());
    }
}
