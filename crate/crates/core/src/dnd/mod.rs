//! Direction-and-norm decomposition integrators.
//!
//! For an SDE with an equilibrium at the origin the solution is split into its
//! norm `η = ‖X‖` and its direction `Z = X/‖X‖`. The norm obeys a scalar linear
//! SDE once the normalized coefficients are frozen over a step, so it is
//! advanced by an exponential update; the direction is advanced by an Euler
//! step and projected back onto the unit sphere. The product `η Z` is only
//! formed when the caller asks for the state.

mod bilinear;
mod general;
mod scalar;

pub use bilinear::dnd_bilinear_step;
pub use general::{
    alpha_default, dnd_general_step, scheme4_direction_closed_form, AugmentedModel, AugmentedParams,
    GeneralWorkspace,
};
pub use scalar::dnd_scalar_step;

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{ModelError, StepError, StepFailure};
use crate::linalg::{dot, norm, norm_inf};
use crate::model::{normalized_diffusion, normalized_drift, SdeModel};

/// Below this norm the projected direction goes through the ∞-norm
/// preconditioner.
pub const DEGENERATE_DIRECTION: f64 = 1e-8;

/// `scale · eᵉ`, rounded away from zero when the product underflows so that a
/// positive norm stays positive. The result is within one subnormal ulp of
/// the correctly rounded product.
pub fn exp_scale(scale: f64, exponent: f64) -> f64 {
    let v = scale * libm::exp(exponent);
    if v == 0.0 && scale != 0.0 && !exponent.is_nan() {
        libm::copysign(f64::from_bits(1), scale)
    } else {
        v
    }
}

/// Norm estimate and unit direction estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct DndState {
    pub eta: f64,
    pub zhat: Vec<f64>,
}

impl DndState {
    /// Splits a nonzero state. Returns `None` for the zero vector or
    /// non-finite input.
    pub fn from_point(x: &[f64]) -> Option<Self> {
        let eta = norm(x);
        if !(eta > 0.0) || !eta.is_finite() {
            return None;
        }
        Some(Self {
            eta,
            zhat: x.iter().map(|v| v / eta).collect(),
        })
    }

    /// `η̄ Ẑ`.
    pub fn point(&self) -> Vec<f64> {
        self.zhat.iter().map(|z| self.eta * z).collect()
    }

    pub fn write_point(&self, out: &mut [f64]) {
        out.iter_mut().zip(&self.zhat).for_each(|(o, z)| *o = self.eta * z);
    }

    /// Advances the state by one step in place.
    pub fn advance<M: SdeModel + ?Sized>(
        &mut self,
        model: &M,
        dt: f64,
        dw: &[f64],
        ws: &mut DndWorkspace,
    ) -> Result<Safeguard, StepError> {
        let eta_next = raw_step(model, self.eta, &self.zhat, dt, dw, ws)
            .map_err(|f| StepError::new(f, self.eta, &self.zhat))?;
        let guard = project_direction(&mut ws.zbar, &self.zhat)
            .map_err(|f| StepError::new(f, self.eta, &self.zhat))?;
        self.zhat.copy_from_slice(&ws.zbar);
        self.eta = eta_next;
        Ok(guard)
    }
}

/// Which projection branch a step took.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Safeguard {
    None,
    /// `‖Z̄‖` was below [`DEGENERATE_DIRECTION`]; rescaled by `‖Z̄‖∞` first.
    Preconditioned,
    /// `Z̄` was exactly zero; the previous direction was kept.
    KeptDirection,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SafeguardCounts {
    pub preconditioned: u64,
    pub kept_direction: u64,
}

impl SafeguardCounts {
    pub fn record(&mut self, g: Safeguard) {
        match g {
            Safeguard::None => {}
            Safeguard::Preconditioned => self.preconditioned += 1,
            Safeguard::KeptDirection => self.kept_direction += 1,
        }
    }

    pub fn total(&self) -> u64 {
        self.preconditioned + self.kept_direction
    }

    pub fn merge(&mut self, other: &Self) {
        self.preconditioned += other.preconditioned;
        self.kept_direction += other.kept_direction;
    }
}

/// Scratch space for one-step evaluations; size it once per path.
#[derive(Debug, Clone)]
pub struct DndWorkspace {
    d: usize,
    bbar: Vec<f64>,
    /// `m` consecutive blocks of length `d`.
    sbar: Vec<f64>,
    inner: Vec<f64>,
    sq_norm: Vec<f64>,
    /// Unprojected direction `Z̄` after [`raw_step`].
    pub zbar: Vec<f64>,
}

impl DndWorkspace {
    pub fn new(d: usize, m: usize) -> Self {
        Self {
            d,
            bbar: vec![0.0; d],
            sbar: vec![0.0; d * m],
            inner: vec![0.0; m],
            sq_norm: vec![0.0; m],
            zbar: vec![0.0; d],
        }
    }

    pub fn for_model<M: SdeModel + ?Sized>(model: &M) -> Self {
        Self::new(model.dim(), model.noise_dim())
    }
}

fn load_coefficients<M: SdeModel + ?Sized>(
    model: &M,
    eta: f64,
    z: &[f64],
    ws: &mut DndWorkspace,
) -> Result<(), ModelError> {
    let d = ws.d;
    normalized_drift(model, eta, z, &mut ws.bbar)?;
    for k in 0..ws.inner.len() {
        let s = &mut ws.sbar[k * d..(k + 1) * d];
        normalized_diffusion(model, k, eta, z, s)?;
        ws.inner[k] = dot(z, s);
        ws.sq_norm[k] = dot(s, s);
    }
    Ok(())
}

/// One Scheme 1 step without the projection: returns the next norm estimate
/// and leaves `Z̄` in `ws.zbar`.
pub fn raw_step<M: SdeModel + ?Sized>(
    model: &M,
    eta: f64,
    z: &[f64],
    dt: f64,
    dw: &[f64],
    ws: &mut DndWorkspace,
) -> Result<f64, StepFailure> {
    if !(dt > 0.0) {
        return Err(StepFailure::Precondition("step size must be positive"));
    }
    let d = ws.d;
    load_coefficients(model, eta, z, ws).map_err(|_| StepFailure::NonFinite)?;
    let bz = dot(z, &ws.bbar);
    let m = ws.inner.len();
    let mut half_sq = 0.0;
    let mut inner_sq = 0.0;
    let mut noise = 0.0;
    for k in 0..m {
        half_sq += ws.sq_norm[k];
        inner_sq += ws.inner[k] * ws.inner[k];
        noise += ws.inner[k] * dw[k];
    }
    let mu = bz + 0.5 * half_sq - inner_sq;
    let eta_next = exp_scale(eta, mu * dt + noise);

    for i in 0..d {
        let mut psi = 0.0;
        let mut diffusive = 0.0;
        for k in 0..m {
            let s = ws.inner[k];
            let sk = ws.sbar[k * d + i];
            psi += (1.5 * s * s - 0.5 * ws.sq_norm[k]) * z[i] - s * sk;
            diffusive += (sk - s * z[i]) * dw[k];
        }
        ws.zbar[i] = z[i] + (ws.bbar[i] - bz * z[i] + psi) * dt + diffusive;
    }
    if !eta_next.is_finite() || !ws.zbar.iter().all(|v| v.is_finite()) {
        return Err(StepFailure::NonFinite);
    }
    Ok(eta_next)
}

/// Projects `zbar` onto the unit sphere in place, with the round-off
/// safeguards: ∞-norm preconditioning when `‖Z̄‖` is tiny, and keeping
/// `previous` when `Z̄` vanishes.
pub fn project_direction(zbar: &mut [f64], previous: &[f64]) -> Result<Safeguard, StepFailure> {
    let n = norm(zbar);
    if !n.is_finite() {
        return Err(StepFailure::NonFinite);
    }
    if n >= DEGENERATE_DIRECTION {
        zbar.iter_mut().for_each(|v| *v /= n);
        return Ok(Safeguard::None);
    }
    let scale = norm_inf(zbar);
    if scale == 0.0 {
        zbar.copy_from_slice(previous);
        return Ok(Safeguard::KeptDirection);
    }
    zbar.iter_mut().for_each(|v| *v /= scale);
    let n = norm(zbar);
    zbar.iter_mut().for_each(|v| *v /= n);
    Ok(Safeguard::Preconditioned)
}

/// One Scheme 1 step `(η̄ₙ, Ẑₙ) ↦ (η̄ₙ₊₁, Ẑₙ₊₁)`.
///
/// `dw[k]` is the increment `√Δ Ŵᵏ` for the k-th Wiener process.
pub fn dnd_step<M: SdeModel + ?Sized>(
    model: &M,
    state: &DndState,
    dt: f64,
    dw: &[f64],
) -> Result<DndState, StepError> {
    let mut ws = DndWorkspace::for_model(model);
    let mut next = state.clone();
    next.advance(model, dt, dw, &mut ws)?;
    Ok(next)
}

/// Itô correction of the direction dynamics,
/// `Ψ(η, z) = Σ_k ((3/2⟨z,σ̄ᵏ⟩² − ½‖σ̄ᵏ‖²) z − ⟨z,σ̄ᵏ⟩ σ̄ᵏ)`.
pub fn psi<M: SdeModel + ?Sized>(model: &M, eta: f64, z: &[f64]) -> Result<Vec<f64>, ModelError> {
    let mut ws = DndWorkspace::for_model(model);
    load_coefficients(model, eta, z, &mut ws)?;
    let d = ws.d;
    let mut out = vec![0.0; d];
    for (k, (&s, &n)) in ws.inner.iter().zip(&ws.sq_norm).enumerate() {
        for i in 0..d {
            out[i] += (1.5 * s * s - 0.5 * n) * z[i] - s * ws.sbar[k * d + i];
        }
    }
    Ok(out)
}

/// Drift exponent of the norm update,
/// `μ = ⟨z,b̄⟩ + ½Σ‖σ̄ᵏ‖² − Σ⟨z,σ̄ᵏ⟩²`.
pub fn mu<M: SdeModel + ?Sized>(model: &M, eta: f64, z: &[f64]) -> Result<f64, ModelError> {
    let mut ws = DndWorkspace::for_model(model);
    load_coefficients(model, eta, z, &mut ws)?;
    let half: f64 = ws.sq_norm.iter().sum();
    let inner: f64 = ws.inner.iter().map(|s| s * s).sum();
    Ok(dot(z, &ws.bbar) + 0.5 * half - inner)
}
