//! Monte Carlo error estimation and the experiment runner for the
//! `dnd-sde-core` integrators.
//!
//! Parallel batches are deterministic: results depend on the seed and the
//! sample count, never on the number of worker threads.

pub mod batch;
pub mod error;
pub mod estimate;
pub mod plan;
pub mod quadrature;
pub mod reference;
pub mod run;
pub mod table;

pub use batch::Executor;
pub use error::HarnessError;
pub use estimate::{
    lyapunov_rates, mean_series, strong_error_rel, weak_error_abs, weak_error_rel, MeanSeries, SchemeRun,
    StrongError, WeakAbs, WeakRel,
};
pub use plan::{parse_plan, render_plan, ExperimentPlan, Mode, PlanError};
pub use reference::{Reference, ReferenceMethod};
pub use run::{execute_plan, run_experiment, RunOptions, RunReport};
pub use table::{ErrorRow, ErrorTable, SeriesRow, SeriesTable};
