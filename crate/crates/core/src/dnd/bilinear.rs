//! Scheme 2: the direction-and-norm step written out for `dX = BX dt + Σ σᵏX dWᵏ`.
//!
//! The direction update is assembled through the matrix
//! `Bₙ = B − ⟨Ẑ,BẐ⟩I + Σ_k (3/2⟨Ẑ,σᵏẐ⟩² I − ⟨Ẑ,σᵏẐ⟩σᵏ − ½‖σᵏẐ‖² I)`,
//! reading every scalar term as a multiple of the identity.

use alloc::vec;

use super::{project_direction, DndState};
use crate::error::{StepError, StepFailure};
use crate::linalg::{dot, mat_vec};
use crate::model::BilinearModel;

pub fn dnd_bilinear_step(
    model: &BilinearModel,
    state: &DndState,
    dt: f64,
    dw: &[f64],
) -> Result<DndState, StepError> {
    let fail = |f| StepError::new(f, state.eta, &state.zhat);
    if !(dt > 0.0) {
        return Err(fail(StepFailure::Precondition("step size must be positive")));
    }
    let z = &state.zhat;
    let d = z.len();
    let b = model.drift_matrix();

    let mut work = vec![0.0; d];
    mat_vec(b, z, &mut work);
    let zbz = dot(z, &work);

    let mut bn = b.to_vec();
    for i in 0..d {
        bn[i * d + i] -= zbz;
    }
    let mut exponent = zbz * dt;
    let mut zbar = z.clone();
    for (sigma, &dwk) in model.sigma_matrices().iter().zip(dw) {
        mat_vec(sigma, z, &mut work);
        let s = dot(z, &work);
        let n2 = dot(&work, &work);
        let diag = 1.5 * s * s - 0.5 * n2;
        for i in 0..d {
            for j in 0..d {
                bn[i * d + j] -= s * sigma[i * d + j];
            }
            bn[i * d + i] += diag;
            zbar[i] += (work[i] - s * z[i]) * dwk;
        }
        exponent += (0.5 * n2 - s * s) * dt + s * dwk;
    }
    mat_vec(&bn, z, &mut work);
    for i in 0..d {
        zbar[i] += work[i] * dt;
    }
    let eta = super::exp_scale(state.eta, exponent);
    if !eta.is_finite() || !zbar.iter().all(|v| v.is_finite()) {
        return Err(fail(StepFailure::NonFinite));
    }
    project_direction(&mut zbar, z).map_err(fail)?;
    Ok(DndState { eta, zhat: zbar })
}
