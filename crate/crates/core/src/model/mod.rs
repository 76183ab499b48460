//! SDE problem interface and the normalized coefficients built on it.
//!
//! A model describes `dX = b(X) dt + Σ_k σᵏ(X) dWᵏ` on ℝᵈ with `m` independent
//! Wiener processes. The integrators never look at `b` and `σᵏ` directly near the
//! origin; they go through the normalized coefficients
//!
//! ```text
//! b̄(η, z) = (b(ηz) − b(0)) / η     η > 0
//! b̄(0, z) = Jb(0) z
//! ```
//!
//! (and likewise for `σᵏ`). For models with an equilibrium at the origin
//! `b(0) = 0`, so this is `b(ηz)/η`.

mod bilinear;
mod closure;
mod diagnostics;
mod problems;

pub use bilinear::BilinearModel;
pub use closure::ClosureModel;
pub use diagnostics::{check_model, stability_bracket, stability_margin, StabilityMargin};
pub use problems::{
    exact_rotation41_path, make_test_problem, rotation41_exact, TestProblem, TestProblemId,
};

use alloc::vec;
use alloc::vec::Vec;

use crate::error::ModelError;

/// Below this norm estimate the generic normalized evaluation switches from
/// direct division to the Jacobian/Taylor branch.
pub const ETA_SWITCH: f64 = 1e-6;

/// Identifies one coefficient field: the drift or the k-th diffusion (0-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Coefficient {
    Drift,
    Diffusion(usize),
}

/// An Itô SDE `dX = b(X) dt + Σ σᵏ(X) dWᵏ`.
///
/// Only `dim`, `noise_dim`, `drift`, `diffusion` and `equilibrium_at_zero` are
/// required. Everything else has a default that either reports "not available"
/// (`false`) or derives the quantity numerically.
///
/// Diffusion indices are 0-based: `k = 0` is the first Wiener process.
pub trait SdeModel: Sync {
    fn dim(&self) -> usize;
    fn noise_dim(&self) -> usize;
    fn drift(&self, x: &[f64], out: &mut [f64]);
    fn diffusion(&self, k: usize, x: &[f64], out: &mut [f64]);

    /// True iff `b(0) = σ¹(0) = … = σᵐ(0) = 0`.
    fn equilibrium_at_zero(&self) -> bool;

    /// Row-major `Jb(x)`; returns `false` when not provided.
    fn drift_jacobian(&self, _x: &[f64], _out: &mut [f64]) -> bool {
        false
    }

    /// Row-major `Jσᵏ(x)`; returns `false` when not provided.
    fn diffusion_jacobian(&self, _k: usize, _x: &[f64], _out: &mut [f64]) -> bool {
        false
    }

    /// Closed form of `(b(ηz) − b(0))/η`, valid for all `η ≥ 0` including the
    /// `η = 0` limit.
    fn normalized_drift_closed(&self, _eta: f64, _z: &[f64], _out: &mut [f64]) -> bool {
        false
    }

    /// Closed form of `(σᵏ(ηz) − σᵏ(0))/η`.
    fn normalized_diffusion_closed(
        &self,
        _k: usize,
        _eta: f64,
        _z: &[f64],
        _out: &mut [f64],
    ) -> bool {
        false
    }

    /// Second directional derivative `D²b(0)[z, z]`.
    fn drift_second_derivative_at_zero(&self, _z: &[f64], _out: &mut [f64]) -> bool {
        false
    }

    /// Second directional derivative `D²σᵏ(0)[z, z]`.
    fn diffusion_second_derivative_at_zero(
        &self,
        _k: usize,
        _z: &[f64],
        _out: &mut [f64],
    ) -> bool {
        false
    }
}

impl<M: SdeModel + ?Sized> SdeModel for &M {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn noise_dim(&self) -> usize {
        (**self).noise_dim()
    }
    fn drift(&self, x: &[f64], out: &mut [f64]) {
        (**self).drift(x, out)
    }
    fn diffusion(&self, k: usize, x: &[f64], out: &mut [f64]) {
        (**self).diffusion(k, x, out)
    }
    fn equilibrium_at_zero(&self) -> bool {
        (**self).equilibrium_at_zero()
    }
    fn drift_jacobian(&self, x: &[f64], out: &mut [f64]) -> bool {
        (**self).drift_jacobian(x, out)
    }
    fn diffusion_jacobian(&self, k: usize, x: &[f64], out: &mut [f64]) -> bool {
        (**self).diffusion_jacobian(k, x, out)
    }
    fn normalized_drift_closed(&self, eta: f64, z: &[f64], out: &mut [f64]) -> bool {
        (**self).normalized_drift_closed(eta, z, out)
    }
    fn normalized_diffusion_closed(&self, k: usize, eta: f64, z: &[f64], out: &mut [f64]) -> bool {
        (**self).normalized_diffusion_closed(k, eta, z, out)
    }
    fn drift_second_derivative_at_zero(&self, z: &[f64], out: &mut [f64]) -> bool {
        (**self).drift_second_derivative_at_zero(z, out)
    }
    fn diffusion_second_derivative_at_zero(&self, k: usize, z: &[f64], out: &mut [f64]) -> bool {
        (**self).diffusion_second_derivative_at_zero(k, z, out)
    }
}

/// Evaluates `b` or `σᵏ` at `x`.
#[inline]
pub fn eval_coefficient<M: SdeModel + ?Sized>(model: &M, c: Coefficient, x: &[f64], out: &mut [f64]) {
    match c {
        Coefficient::Drift => model.drift(x, out),
        Coefficient::Diffusion(k) => model.diffusion(k, x, out),
    }
}

/// Row-major Jacobian of a coefficient at `x`: the model's own when it has one,
/// otherwise central differences.
pub fn coefficient_jacobian<M: SdeModel + ?Sized>(
    model: &M,
    c: Coefficient,
    x: &[f64],
    out: &mut [f64],
) {
    let provided = match c {
        Coefficient::Drift => model.drift_jacobian(x, out),
        Coefficient::Diffusion(k) => model.diffusion_jacobian(k, x, out),
    };
    if provided {
        return;
    }
    let d = x.len();
    let mut xp = x.to_vec();
    let mut fp = vec![0.0; d];
    let mut fm = vec![0.0; d];
    for j in 0..d {
        let h = 1e-6 * (1.0 + libm::fabs(x[j]));
        xp[j] = x[j] + h;
        eval_coefficient(model, c, &xp, &mut fp);
        xp[j] = x[j] - h;
        eval_coefficient(model, c, &xp, &mut fm);
        xp[j] = x[j];
        for i in 0..d {
            out[i * d + j] = (fp[i] - fm[i]) / (2.0 * h);
        }
    }
}

/// `Jb(0)` (or `Jσᵏ(0)`) as a row-major matrix.
pub fn jacobian_at_zero<M: SdeModel + ?Sized>(model: &M, c: Coefficient) -> Vec<f64> {
    let d = model.dim();
    let zero = vec![0.0; d];
    let mut out = vec![0.0; d * d];
    coefficient_jacobian(model, c, &zero, &mut out);
    out
}

/// Normalized coefficient of `c` at `(η, z)`, written into `out`.
///
/// Uses the model's closed form when it has one. Otherwise divides directly for
/// `η ≥ ETA_SWITCH` and falls back to the first-order Taylor expansion
/// `J(0)z + η·D²f(0)[z,z]/2` below it (the second term only when the model
/// registers second derivatives).
pub fn normalized<M: SdeModel + ?Sized>(
    model: &M,
    c: Coefficient,
    eta: f64,
    z: &[f64],
    out: &mut [f64],
) -> Result<(), ModelError> {
    debug_assert!(eta >= 0.0);
    let closed = match c {
        Coefficient::Drift => model.normalized_drift_closed(eta, z, out),
        Coefficient::Diffusion(k) => model.normalized_diffusion_closed(k, eta, z, out),
    };
    if !closed {
        generic_normalized(model, c, eta, z, out);
    }
    if out.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(ModelError::NonFinite {
            what: match c {
                Coefficient::Drift => "normalized drift",
                Coefficient::Diffusion(_) => "normalized diffusion",
            },
        })
    }
}

/// The division/Taylor evaluation, ignoring any closed form.
pub fn generic_normalized<M: SdeModel + ?Sized>(
    model: &M,
    c: Coefficient,
    eta: f64,
    z: &[f64],
    out: &mut [f64],
) {
    let d = z.len();
    if eta >= ETA_SWITCH {
        let x: Vec<f64> = z.iter().map(|zi| eta * zi).collect();
        eval_coefficient(model, c, &x, out);
        if !model.equilibrium_at_zero() {
            let mut at_zero = vec![0.0; d];
            eval_coefficient(model, c, &vec![0.0; d], &mut at_zero);
            out.iter_mut().zip(&at_zero).for_each(|(o, f0)| *o -= f0);
        }
        out.iter_mut().for_each(|o| *o /= eta);
        return;
    }
    let jac = jacobian_at_zero(model, c);
    crate::linalg::mat_vec(&jac, z, out);
    if eta > 0.0 {
        let mut second = vec![0.0; d];
        let registered = match c {
            Coefficient::Drift => model.drift_second_derivative_at_zero(z, &mut second),
            Coefficient::Diffusion(k) => model.diffusion_second_derivative_at_zero(k, z, &mut second),
        };
        if registered {
            out.iter_mut().zip(&second).for_each(|(o, s)| *o += 0.5 * eta * s);
        }
    }
}

/// `b̄(η, z)`.
pub fn normalized_drift<M: SdeModel + ?Sized>(
    model: &M,
    eta: f64,
    z: &[f64],
    out: &mut [f64],
) -> Result<(), ModelError> {
    normalized(model, Coefficient::Drift, eta, z, out)
}

/// `σ̄ᵏ(η, z)` with 0-based `k`.
pub fn normalized_diffusion<M: SdeModel + ?Sized>(
    model: &M,
    k: usize,
    eta: f64,
    z: &[f64],
    out: &mut [f64],
) -> Result<(), ModelError> {
    normalized(model, Coefficient::Diffusion(k), eta, z, out)
}

/// How the order-(ℓ+1) directional derivative of `f` at the origin is obtained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DirectionalDerivative {
    /// The caller knows `D^{ℓ+1}_z f(0)` exactly.
    Registered(f64),
    /// Central differences with Richardson extrapolation.
    FiniteDifference,
}

/// ℓ-th derivative in η at η = 0 of `η ↦ (f(ηz) − f(0))/η`, which equals
/// `D^{ℓ+1}_z f(0) / (ℓ+1)`. Divide by `ℓ!` for the Taylor coefficient.
pub fn taylor_derivative<F: Fn(&[f64]) -> f64>(
    f: F,
    order: usize,
    z: &[f64],
    source: DirectionalDerivative,
) -> Result<f64, ModelError> {
    let n = order + 1;
    let dn = match source {
        DirectionalDerivative::Registered(v) => v,
        DirectionalDerivative::FiniteDifference => {
            let mut x = vec![0.0; z.len()];
            let mut g = |t: f64| {
                x.iter_mut().zip(z).for_each(|(xi, zi)| *xi = t * zi);
                f(&x)
            };
            let h = 0.02 * (n as f64);
            let coarse = central_difference(&mut g, n, h);
            let fine = central_difference(&mut g, n, 0.5 * h);
            (4.0 * fine - coarse) / 3.0
        }
    };
    if dn.is_finite() {
        Ok(dn / n as f64)
    } else {
        Err(ModelError::NonFinite {
            what: "directional derivative",
        })
    }
}

fn central_difference<G: FnMut(f64) -> f64>(g: &mut G, n: usize, h: f64) -> f64 {
    let mut binom = 1.0;
    let mut acc = 0.0;
    for i in 0..=n {
        let t = (n as f64 / 2.0 - i as f64) * h;
        let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
        acc += sign * binom * g(t);
        binom = binom * (n - i) as f64 / (i + 1) as f64;
    }
    acc / libm::pow(h, n as f64)
}
