//! Scheme 4: models without an equilibrium at the origin.
//!
//! A constant auxiliary coordinate `V ≡ α` is appended and the drift and
//! diffusions are rewritten as
//! `f(x, v) = (b(x) − b(0) + b(0)v/α, 0)`, `gᵏ(x, v) = (σᵏ(x) − σᵏ(0) + σᵏ(0)v/α, 0)`,
//! which vanish at the origin of ℝᵈ⁺¹. One Scheme 1 step is taken from
//! `(X̄ₙ, α)` and the first `d` coordinates are kept. Since `v = α` at the
//! start of every step, the normalized augmented coefficients reduce to
//! `b(X̄ₙ)/η̄ₙ` and `σᵏ(X̄ₙ)/η̄ₙ` with `η̄ₙ = √(‖X̄ₙ‖² + α²)`.

use alloc::vec;
use alloc::vec::Vec;

use super::{dnd_step, project_direction, DndState, Safeguard};
use crate::error::{StepError, StepFailure};
use crate::linalg::{dot, norm, norm_inf};
use crate::model::SdeModel;

/// `max{‖b(0)‖∞, ‖σ¹(0)‖∞, …, ‖σᵐ(0)‖∞}/2`, and 0 for models with an
/// equilibrium at the origin.
pub fn alpha_default<M: SdeModel + ?Sized>(model: &M) -> f64 {
    if model.equilibrium_at_zero() {
        return 0.0;
    }
    let d = model.dim();
    let zero = vec![0.0; d];
    let mut out = vec![0.0; d];
    model.drift(&zero, &mut out);
    let mut largest = norm_inf(&out);
    for k in 0..model.noise_dim() {
        model.diffusion(k, &zero, &mut out);
        largest = largest.max(norm_inf(&out));
    }
    largest / 2.0
}

/// Norm and direction of the augmented point `(x, α)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedParams {
    pub alpha: f64,
    /// `√(‖x‖² + α²)`.
    pub eta_aug: f64,
    /// `x / eta_aug`.
    pub uhat: Vec<f64>,
    /// `α / eta_aug`.
    pub vhat: f64,
}

impl AugmentedParams {
    /// `None` when `(x, α)` is zero or non-finite.
    pub fn new(x: &[f64], alpha: f64) -> Option<Self> {
        let eta_aug = libm::sqrt(dot(x, x) + alpha * alpha);
        if !(eta_aug > 0.0) || !eta_aug.is_finite() {
            return None;
        }
        Some(Self {
            alpha,
            eta_aug,
            uhat: x.iter().map(|v| v / eta_aug).collect(),
            vhat: alpha / eta_aug,
        })
    }
}

/// Scratch space for [`GeneralWorkspace::step`].
#[derive(Debug, Clone)]
pub struct GeneralWorkspace {
    d: usize,
    f: Vec<f64>,
    g: Vec<f64>,
    inner: Vec<f64>,
    sq_norm: Vec<f64>,
    /// `(Ū, V̄)` after the last step, before projection.
    pub uv: Vec<f64>,
    previous: Vec<f64>,
}

impl GeneralWorkspace {
    pub fn new(d: usize, m: usize) -> Self {
        Self {
            d,
            f: vec![0.0; d],
            g: vec![0.0; d * m],
            inner: vec![0.0; m],
            sq_norm: vec![0.0; m],
            uv: vec![0.0; d + 1],
            previous: vec![0.0; d + 1],
        }
    }

    pub fn for_model<M: SdeModel + ?Sized>(model: &M) -> Self {
        Self::new(model.dim(), model.noise_dim())
    }

    /// Computes `ρ̄ₙ₊₁` and `(Ūₙ₊₁, V̄ₙ₊₁)` (left in `self.uv`) from `x`,
    /// `α ≠ 0`.
    fn raw<M: SdeModel + ?Sized>(
        &mut self,
        model: &M,
        x: &[f64],
        alpha: f64,
        dt: f64,
        dw: &[f64],
    ) -> Result<f64, StepFailure> {
        let d = self.d;
        let m = self.inner.len();
        let eta = libm::sqrt(dot(x, x) + alpha * alpha);
        if !eta.is_finite() {
            return Err(StepFailure::NonFinite);
        }
        let v = alpha / eta;
        for i in 0..d {
            self.previous[i] = x[i] / eta;
        }
        self.previous[d] = v;
        let u = &self.previous[..d];

        model.drift(x, &mut self.f);
        self.f.iter_mut().for_each(|c| *c /= eta);
        let bu = dot(u, &self.f);
        let mut half_sq = 0.0;
        let mut inner_sq = 0.0;
        let mut noise = 0.0;
        let mut correction = 0.0;
        for k in 0..m {
            let g = &mut self.g[k * d..(k + 1) * d];
            model.diffusion(k, x, g);
            g.iter_mut().for_each(|c| *c /= eta);
            let s = dot(u, g);
            let n = dot(g, g);
            self.inner[k] = s;
            self.sq_norm[k] = n;
            half_sq += n;
            inner_sq += s * s;
            noise += s * dw[k];
            correction += 1.5 * s * s - 0.5 * n;
        }
        let mu = bu + 0.5 * half_sq - inner_sq;
        let rho = super::exp_scale(eta, mu * dt + noise);

        for i in 0..d {
            let mut psi = 0.0;
            let mut diffusive = 0.0;
            for k in 0..m {
                let s = self.inner[k];
                let gk = self.g[k * d + i];
                psi += (1.5 * s * s - 0.5 * self.sq_norm[k]) * u[i] - s * gk;
                diffusive += (gk - s * u[i]) * dw[k];
            }
            self.uv[i] = u[i] + (self.f[i] - bu * u[i] + psi) * dt + diffusive;
        }
        self.uv[d] = v - v * bu * dt + v * dt * correction - v * noise;
        if !rho.is_finite() || !self.uv.iter().all(|c| c.is_finite()) {
            return Err(StepFailure::NonFinite);
        }
        Ok(rho)
    }

    /// One Scheme 4 step in place. Requires `α ≠ 0`; see
    /// [`dnd_general_step`] for the `α = 0` case.
    pub fn step<M: SdeModel + ?Sized>(
        &mut self,
        model: &M,
        x: &mut [f64],
        alpha: f64,
        dt: f64,
        dw: &[f64],
    ) -> Result<Safeguard, StepError> {
        let fail = |f, x: &[f64]| StepError::new(f, libm::sqrt(dot(x, x) + alpha * alpha), x);
        if alpha == 0.0 {
            return Err(fail(StepFailure::Precondition("the in-place augmented step needs alpha != 0"), x));
        }
        if !(dt > 0.0) {
            return Err(fail(StepFailure::Precondition("step size must be positive"), x));
        }
        let rho = self.raw(model, x, alpha, dt, dw).map_err(|f| fail(f, x))?;
        let guard = project_direction(&mut self.uv, &self.previous).map_err(|f| fail(f, x))?;
        for i in 0..self.d {
            x[i] = rho * self.uv[i];
        }
        Ok(guard)
    }
}

/// One Scheme 4 step `X̄ₙ ↦ X̄ₙ₊₁`.
///
/// With `α = 0` this is exactly [`dnd_step`] from `(‖x‖, x/‖x‖)` followed by
/// `η̄ Ẑ`.
pub fn dnd_general_step<M: SdeModel + ?Sized>(
    model: &M,
    x: &[f64],
    alpha: f64,
    dt: f64,
    dw: &[f64],
) -> Result<Vec<f64>, StepError> {
    if alpha == 0.0 {
        if !model.equilibrium_at_zero() {
            return Err(StepError::new(
                StepFailure::Precondition("alpha must be nonzero without an equilibrium at the origin"),
                norm(x),
                x,
            ));
        }
        let state = DndState::from_point(x).ok_or_else(|| {
            StepError::new(StepFailure::Precondition("x must be nonzero when alpha = 0"), norm(x), x)
        })?;
        return dnd_step(model, &state, dt, dw).map(|s| s.point());
    }
    let mut ws = GeneralWorkspace::for_model(model);
    let mut out = x.to_vec();
    ws.step(model, &mut out, alpha, dt, dw)?;
    Ok(out)
}

/// `(ρ̄ₙ₊₁, (Ūₙ₊₁, V̄ₙ₊₁))` of one Scheme 4 step with `α ≠ 0`, before the
/// final projection.
pub fn scheme4_direction_closed_form<M: SdeModel + ?Sized>(
    model: &M,
    x: &[f64],
    alpha: f64,
    dt: f64,
    dw: &[f64],
) -> Result<(f64, Vec<f64>), StepError> {
    let mut ws = GeneralWorkspace::for_model(model);
    let rho = ws
        .raw(model, x, alpha, dt, dw)
        .map_err(|f| StepError::new(f, libm::sqrt(dot(x, x) + alpha * alpha), x))?;
    Ok((rho, ws.uv))
}

/// The `ℝᵈ⁺¹` system with drift `f` and diffusions `gᵏ`, built from `model`
/// and `α ≠ 0`. It has an equilibrium at the origin, so Scheme 1 applies to
/// it directly.
#[derive(Debug, Clone)]
pub struct AugmentedModel<M> {
    inner: M,
    alpha: f64,
    drift_at_zero: Vec<f64>,
    diffusion_at_zero: Vec<Vec<f64>>,
}

impl<M: SdeModel> AugmentedModel<M> {
    /// `None` when `alpha` is zero or non-finite.
    pub fn new(inner: M, alpha: f64) -> Option<Self> {
        if alpha == 0.0 || !alpha.is_finite() {
            return None;
        }
        let d = inner.dim();
        let zero = vec![0.0; d];
        let mut drift_at_zero = vec![0.0; d];
        inner.drift(&zero, &mut drift_at_zero);
        let diffusion_at_zero = (0..inner.noise_dim())
            .map(|k| {
                let mut s = vec![0.0; d];
                inner.diffusion(k, &zero, &mut s);
                s
            })
            .collect();
        Some(Self {
            inner,
            alpha,
            drift_at_zero,
            diffusion_at_zero,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    fn lift(&self, value_at_x: &mut [f64], at_zero: &[f64], v: f64) {
        let d = at_zero.len();
        for i in 0..d {
            value_at_x[i] += at_zero[i] * (v / self.alpha - 1.0);
        }
        value_at_x[d] = 0.0;
    }
}

impl<M: SdeModel> SdeModel for AugmentedModel<M> {
    fn dim(&self) -> usize {
        self.inner.dim() + 1
    }
    fn noise_dim(&self) -> usize {
        self.inner.noise_dim()
    }
    fn equilibrium_at_zero(&self) -> bool {
        true
    }
    fn drift(&self, xv: &[f64], out: &mut [f64]) {
        let d = self.inner.dim();
        self.inner.drift(&xv[..d], &mut out[..d]);
        self.lift(out, &self.drift_at_zero, xv[d]);
    }
    fn diffusion(&self, k: usize, xv: &[f64], out: &mut [f64]) {
        let d = self.inner.dim();
        self.inner.diffusion(k, &xv[..d], &mut out[..d]);
        self.lift(out, &self.diffusion_at_zero[k], xv[d]);
    }
}
