//! Numerical spot checks on a model and sampled stability diagnostics.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::{eval_coefficient, normalized, Coefficient, SdeModel};
use crate::error::ModelError;
use crate::linalg::{dot, norm, norm_inf};
use crate::noise::NoiseStream;

const EQUILIBRIUM_TOL: f64 = 1e-14;
const CLOSED_FORM_TOL: f64 = 1e-12;
const INSTABILITY_THETA: f64 = 0.01;

fn random_unit(stream: &mut NoiseStream, d: usize) -> Vec<f64> {
    loop {
        let mut z: Vec<f64> = (0..d).map(|_| stream.standard()).collect();
        let n = norm(&z);
        if n > 1e-12 {
            z.iter_mut().for_each(|v| *v /= n);
            return z;
        }
    }
}

/// `i`-th of `n` points log-spaced over `[10^lo, 10^hi]`; the single point
/// case is `1`.
fn log_spaced(i: usize, n: usize, lo: f64, hi: f64) -> f64 {
    if n == 1 {
        return 1.0;
    }
    libm::pow(10.0, lo + (hi - lo) * i as f64 / (n - 1) as f64)
}

/// Checks the claimed equilibrium at the origin and, for `n_probe` random
/// `(η, z)` with `η` log-spaced over `[1e-6, 1e3]`, that the normalized
/// coefficients reproduce `f(ηz) − f(0)` after multiplication by `η`.
pub fn check_model<M: SdeModel + ?Sized>(
    model: &M,
    n_probe: usize,
    stream: &mut NoiseStream,
) -> Result<(), ModelError> {
    let d = model.dim();
    let m = model.noise_dim();
    let zero = vec![0.0; d];
    let mut at_zero = vec![0.0; d];
    let coefficients: Vec<Coefficient> = core::iter::once(Coefficient::Drift)
        .chain((0..m).map(Coefficient::Diffusion))
        .collect();
    let mut largest_at_zero = 0.0f64;
    for &c in &coefficients {
        eval_coefficient(model, c, &zero, &mut at_zero);
        largest_at_zero = largest_at_zero.max(norm_inf(&at_zero));
    }
    if model.equilibrium_at_zero() && largest_at_zero > EQUILIBRIUM_TOL {
        return Err(ModelError::Check(format!(
            "model claims an equilibrium at 0 but a coefficient has norm {largest_at_zero:e} there"
        )));
    }

    let mut x = vec![0.0; d];
    let mut fx = vec![0.0; d];
    let mut fbar = vec![0.0; d];
    for i in 0..n_probe {
        let z = random_unit(stream, d);
        let eta = log_spaced(i, n_probe, -6.0, 3.0);
        x.iter_mut().zip(&z).for_each(|(xi, zi)| *xi = eta * zi);
        for &c in &coefficients {
            eval_coefficient(model, c, &x, &mut fx);
            eval_coefficient(model, c, &zero, &mut at_zero);
            normalized(model, c, eta, &z, &mut fbar)?;
            let scale = norm(&fx) + norm(&at_zero) + eta * norm(&fbar);
            let mut diff = 0.0f64;
            for j in 0..d {
                diff = diff.max(libm::fabs(eta * fbar[j] + at_zero[j] - fx[j]));
            }
            if diff > CLOSED_FORM_TOL * scale.max(f64::MIN_POSITIVE) {
                return Err(ModelError::Check(format!(
                    "normalized {c:?} at eta = {eta:e} misses f(eta z) - f(0) by {diff:e}"
                )));
            }
        }
    }
    Ok(())
}

/// The bracket whose supremum over `x ≠ 0` defines `−λ`, evaluated at
/// `x = ηz`:
/// `⟨z,b̄⟩ + ½Σ‖σ̄ᵏ‖² − Σ⟨z,σ̄ᵏ⟩²`.
pub fn stability_bracket<M: SdeModel + ?Sized>(model: &M, eta: f64, z: &[f64]) -> Result<f64, ModelError> {
    bracket_parts(model, eta, z).map(|(lin, quad)| lin - quad)
}

/// `(⟨z,b̄⟩ + ½Σ‖σ̄ᵏ‖², Σ⟨z,σ̄ᵏ⟩²)`.
fn bracket_parts<M: SdeModel + ?Sized>(model: &M, eta: f64, z: &[f64]) -> Result<(f64, f64), ModelError> {
    let d = model.dim();
    let mut f = vec![0.0; d];
    normalized(model, Coefficient::Drift, eta, z, &mut f)?;
    let mut lin = dot(z, &f);
    let mut quad = 0.0;
    for k in 0..model.noise_dim() {
        normalized(model, Coefficient::Diffusion(k), eta, z, &mut f)?;
        lin += 0.5 * dot(&f, &f);
        let s = dot(z, &f);
        quad += s * s;
    }
    Ok((lin, quad))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityMargin {
    /// `−max` of the sampled bracket: a sampled estimate of `λ` that can only
    /// overestimate the true value.
    pub lambda_hat: f64,
    /// Whether the instability condition with `θ = 0.01` held at every probe.
    pub instability_theta_ok: bool,
    pub probes: usize,
}

/// Samples the stability bracket at `n_probe` points: directions drawn from
/// `stream` (Gaussian noise gives uniform directions) and radii log-spaced
/// over `[1e-4, 1e3]`.
pub fn stability_margin<M: SdeModel + ?Sized>(
    model: &M,
    n_probe: usize,
    stream: &mut NoiseStream,
) -> Result<StabilityMargin, ModelError> {
    if !model.equilibrium_at_zero() {
        return Err(ModelError::Unsupported {
            required: "an equilibrium at the origin",
        });
    }
    if n_probe == 0 {
        return Err(ModelError::ParameterDomain {
            name: "n_probe",
            value: 0.0,
            reason: "at least one probe is needed",
        });
    }
    let d = model.dim();
    let mut sup = f64::NEG_INFINITY;
    let mut theta_ok = true;
    for i in 0..n_probe {
        let z = random_unit(stream, d);
        let eta = log_spaced(i, n_probe, -4.0, 3.0);
        let (lin, quad) = bracket_parts(model, eta, &z)?;
        sup = sup.max(lin - quad);
        if lin - (1.0 + INSTABILITY_THETA) * quad < 0.0 {
            theta_ok = false;
        }
    }
    Ok(StabilityMargin {
        lambda_hat: -sup,
        instability_theta_ok: theta_ok,
        probes: n_probe,
    })
}
