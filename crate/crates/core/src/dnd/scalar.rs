//! Scheme 3: the one-dimensional exponential update
//! `X' = X exp((b(X)/X − ½Σ(σᵏ(X)/X)²)Δ + Σ σᵏ(X)/X · dWᵏ)`.
//!
//! The ratio `f(x)/x` is `z·f̄(|x|, z)` with `z = sign(x)`, so the update never
//! divides by `x` and keeps the sign of `x` exactly.

use crate::error::{StepError, StepFailure};
use crate::model::{normalized_diffusion, normalized_drift, SdeModel};

pub fn dnd_scalar_step<M: SdeModel + ?Sized>(model: &M, x: f64, dt: f64, dw: &[f64]) -> Result<f64, StepError> {
    let fail = |f| StepError::new(f, libm::fabs(x), &[libm::copysign(1.0, x)]);
    if model.dim() != 1 {
        return Err(fail(StepFailure::Precondition("the scalar scheme needs d = 1")));
    }
    if !(dt > 0.0) {
        return Err(fail(StepFailure::Precondition("step size must be positive")));
    }
    if !x.is_finite() {
        return Err(fail(StepFailure::NonFinite));
    }
    let z = libm::copysign(1.0, x);
    let eta = libm::fabs(x);
    let mut f = [0.0];
    normalized_drift(model, eta, &[z], &mut f).map_err(|_| fail(StepFailure::NonFinite))?;
    let mut exponent = z * f[0] * dt;
    for (k, &dwk) in dw.iter().enumerate().take(model.noise_dim()) {
        normalized_diffusion(model, k, eta, &[z], &mut f).map_err(|_| fail(StepFailure::NonFinite))?;
        let s = z * f[0];
        exponent += s * dwk - 0.5 * s * s * dt;
    }
    let next = super::exp_scale(x, exponent);
    if next.is_finite() {
        Ok(next)
    } else {
        Err(fail(StepFailure::NonFinite))
    }
}
