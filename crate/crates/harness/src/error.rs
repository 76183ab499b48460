use std::path::PathBuf;

use dnd_sde_core::{EstimateError, ModelError};

use crate::plan::PlanError;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Estimate(#[from] EstimateError),
    #[error(transparent)]
    Plan(#[from] PlanError),
    #[error("{what}: {source}")]
    Io {
        what: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("relative error undefined: reference {reference} is within 10 CI half-widths ({ci}) of zero")]
    UndefinedRelative { reference: f64, ci: f64 },
    #[error("no reference value at t = {0}")]
    MissingReference(f64),
    #[error("every one of the {paths} paths failed")]
    AllPathsFailed { paths: u64 },
    #[error("thread pool: {0}")]
    Pool(String),
}
