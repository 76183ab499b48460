//! Direction-and-norm decomposition (DND) integrators for Itô SDEs
//! `dX = b(X) dt + Σ σᵏ(X) dWᵏ` with multiplicative noise, together with the
//! baseline schemes they are compared against and the single-path driver.
//!
//! The crate is `no_std` and only needs `alloc`. Parallel Monte Carlo, file
//! formats and the command line live in the companion harness crate.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod baselines;
pub mod dnd;
pub mod error;
pub mod linalg;
pub mod model;
pub mod noise;
pub mod path;
pub mod stats;

pub use baselines::SchemeId;
pub use dnd::{dnd_step, DndState};
pub use error::{EstimateError, ModelError, StepError, StepFailure};
pub use model::{make_test_problem, BilinearModel, ClosureModel, SdeModel, TestProblem, TestProblemId};
pub use noise::{substream, NoiseLaw, NoiseSpec, NoiseStream};
pub use path::{simulate_path, Functional, PathOutcome, PathResult, PathSimulator, TimeGrid};
