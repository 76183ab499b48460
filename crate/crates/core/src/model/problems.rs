//! The four benchmark problems: a commuting bilinear rotation system, the
//! stochastic Ginzburg–Landau equation, a nonlinear rotation system and its
//! shifted variant without an equilibrium at the origin.

use alloc::vec::Vec;

use super::SdeModel;
use crate::error::ModelError;

/// Parameters of one benchmark problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TestProblemId {
    /// `dX = bX dt + σX dW¹ + εJX dW²` on ℝ², `J` the quarter turn.
    Rotation41 { b: f64, sigma: f64, eps: f64 },
    /// `dX = (aX − bX³) dt + σX dW` on ℝ, with `b, σ > 0`.
    GinzburgLandau46 { a: f64, b: f64, sigma: f64 },
    /// `dX = a√(2+cos X¹) X dW¹ + b√(2+sin X²) JX dW²` on ℝ².
    NonlinearRot47 { a: f64, b: f64 },
    /// `NonlinearRot47 { a: 6, b: 3 }` with `(2, 0.5)` and `(1, −1)` added to
    /// the two diffusions.
    Shifted48,
}

impl TestProblemId {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Rotation41 { .. } => "rotation41",
            Self::GinzburgLandau46 { .. } => "ginzburg_landau46",
            Self::NonlinearRot47 { .. } => "nonlinear_rot47",
            Self::Shifted48 => "shifted48",
        }
    }
}

const SHIFT1: [f64; 2] = [2.0, 0.5];
const SHIFT2: [f64; 2] = [1.0, -1.0];
const SHIFTED_A: f64 = 6.0;
const SHIFTED_B: f64 = 3.0;

/// A validated benchmark problem. Every variant has closed-form normalized
/// coefficients and analytic Jacobians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestProblem {
    id: TestProblemId,
}

/// Validates the parameters and builds the model.
pub fn make_test_problem(id: TestProblemId) -> Result<TestProblem, ModelError> {
    fn finite(name: &'static str, v: f64) -> Result<(), ModelError> {
        if v.is_finite() {
            Ok(())
        } else {
            Err(ModelError::ParameterDomain {
                name,
                value: v,
                reason: "must be finite",
            })
        }
    }
    match id {
        TestProblemId::Rotation41 { b, sigma, eps } => {
            finite("b", b)?;
            finite("sigma", sigma)?;
            finite("eps", eps)?;
        }
        TestProblemId::GinzburgLandau46 { a, b, sigma } => {
            finite("a", a)?;
            finite("b", b)?;
            finite("sigma", sigma)?;
            if b <= 0.0 {
                return Err(ModelError::ParameterDomain {
                    name: "b",
                    value: b,
                    reason: "must be > 0",
                });
            }
            if sigma <= 0.0 {
                return Err(ModelError::ParameterDomain {
                    name: "sigma",
                    value: sigma,
                    reason: "must be > 0",
                });
            }
        }
        TestProblemId::NonlinearRot47 { a, b } => {
            finite("a", a)?;
            finite("b", b)?;
        }
        TestProblemId::Shifted48 => {}
    }
    Ok(TestProblem { id })
}

impl TestProblem {
    pub fn id(&self) -> TestProblemId {
        self.id
    }

    /// `(B, [σ¹, σ²])` when the problem is bilinear.
    pub fn bilinear_parts(&self) -> Option<(Vec<f64>, Vec<Vec<f64>>)> {
        match self.id {
            TestProblemId::Rotation41 { b, sigma, eps } => Some((
                alloc::vec![b, 0.0, 0.0, b],
                alloc::vec![
                    alloc::vec![sigma, 0.0, 0.0, sigma],
                    alloc::vec![0.0, -eps, eps, 0.0],
                ],
            )),
            _ => None,
        }
    }

    fn rotation_params(&self) -> (f64, f64) {
        match self.id {
            TestProblemId::NonlinearRot47 { a, b } => (a, b),
            _ => (SHIFTED_A, SHIFTED_B),
        }
    }
}

#[inline]
fn quarter_turn(z: &[f64]) -> [f64; 2] {
    [-z[1], z[0]]
}

impl SdeModel for TestProblem {
    fn dim(&self) -> usize {
        match self.id {
            TestProblemId::GinzburgLandau46 { .. } => 1,
            _ => 2,
        }
    }

    fn noise_dim(&self) -> usize {
        match self.id {
            TestProblemId::GinzburgLandau46 { .. } => 1,
            _ => 2,
        }
    }

    fn equilibrium_at_zero(&self) -> bool {
        !matches!(self.id, TestProblemId::Shifted48)
    }

    #[inline]
    fn drift(&self, x: &[f64], out: &mut [f64]) {
        match self.id {
            TestProblemId::Rotation41 { b, .. } => {
                out[0] = b * x[0];
                out[1] = b * x[1];
            }
            TestProblemId::GinzburgLandau46 { a, b, .. } => {
                out[0] = a * x[0] - b * x[0] * x[0] * x[0];
            }
            TestProblemId::NonlinearRot47 { .. } | TestProblemId::Shifted48 => {
                out[0] = 0.0;
                out[1] = 0.0;
            }
        }
    }

    #[inline]
    fn diffusion(&self, k: usize, x: &[f64], out: &mut [f64]) {
        match self.id {
            TestProblemId::Rotation41 { sigma, eps, .. } => {
                if k == 0 {
                    out[0] = sigma * x[0];
                    out[1] = sigma * x[1];
                } else {
                    out[0] = -eps * x[1];
                    out[1] = eps * x[0];
                }
            }
            TestProblemId::GinzburgLandau46 { sigma, .. } => out[0] = sigma * x[0],
            TestProblemId::NonlinearRot47 { .. } | TestProblemId::Shifted48 => {
                let (a, b) = self.rotation_params();
                let shifted = matches!(self.id, TestProblemId::Shifted48);
                if k == 0 {
                    let s = a * libm::sqrt(2.0 + libm::cos(x[0]));
                    out[0] = s * x[0];
                    out[1] = s * x[1];
                    if shifted {
                        out[0] += SHIFT1[0];
                        out[1] += SHIFT1[1];
                    }
                } else {
                    let s = b * libm::sqrt(2.0 + libm::sin(x[1]));
                    out[0] = -s * x[1];
                    out[1] = s * x[0];
                    if shifted {
                        out[0] += SHIFT2[0];
                        out[1] += SHIFT2[1];
                    }
                }
            }
        }
    }

    fn drift_jacobian(&self, x: &[f64], out: &mut [f64]) -> bool {
        match self.id {
            TestProblemId::Rotation41 { b, .. } => out.copy_from_slice(&[b, 0.0, 0.0, b]),
            TestProblemId::GinzburgLandau46 { a, b, .. } => out[0] = a - 3.0 * b * x[0] * x[0],
            _ => out.iter_mut().for_each(|v| *v = 0.0),
        }
        true
    }

    fn diffusion_jacobian(&self, k: usize, x: &[f64], out: &mut [f64]) -> bool {
        match self.id {
            TestProblemId::Rotation41 { sigma, eps, .. } => {
                if k == 0 {
                    out.copy_from_slice(&[sigma, 0.0, 0.0, sigma]);
                } else {
                    out.copy_from_slice(&[0.0, -eps, eps, 0.0]);
                }
            }
            TestProblemId::GinzburgLandau46 { sigma, .. } => out[0] = sigma,
            _ => {
                let (a, b) = self.rotation_params();
                if k == 0 {
                    // σ¹ = s(x¹)·x with s = a√(2+cos x¹): J = s I + x ⊗ ∇s.
                    let root = libm::sqrt(2.0 + libm::cos(x[0]));
                    let s = a * root;
                    let ds = -a * libm::sin(x[0]) / (2.0 * root);
                    out.copy_from_slice(&[s + ds * x[0], 0.0, ds * x[1], s]);
                } else {
                    // σ² = s(x²)·Jx with s = b√(2+sin x²).
                    let root = libm::sqrt(2.0 + libm::sin(x[1]));
                    let s = b * root;
                    let ds = b * libm::cos(x[1]) / (2.0 * root);
                    out.copy_from_slice(&[0.0, -s - ds * x[1], s, ds * x[0]]);
                }
            }
        }
        true
    }

    #[inline]
    fn normalized_drift_closed(&self, eta: f64, z: &[f64], out: &mut [f64]) -> bool {
        match self.id {
            TestProblemId::Rotation41 { b, .. } => {
                out[0] = b * z[0];
                out[1] = b * z[1];
            }
            TestProblemId::GinzburgLandau46 { a, b, .. } => {
                out[0] = a * z[0] - b * eta * eta * z[0] * z[0] * z[0];
            }
            _ => {
                out[0] = 0.0;
                out[1] = 0.0;
            }
        }
        true
    }

    #[inline]
    fn normalized_diffusion_closed(&self, k: usize, eta: f64, z: &[f64], out: &mut [f64]) -> bool {
        match self.id {
            TestProblemId::Rotation41 { sigma, eps, .. } => {
                if k == 0 {
                    out[0] = sigma * z[0];
                    out[1] = sigma * z[1];
                } else {
                    let jz = quarter_turn(z);
                    out[0] = eps * jz[0];
                    out[1] = eps * jz[1];
                }
            }
            TestProblemId::GinzburgLandau46 { sigma, .. } => out[0] = sigma * z[0],
            _ => {
                let (a, b) = self.rotation_params();
                if k == 0 {
                    let s = a * libm::sqrt(2.0 + libm::cos(eta * z[0]));
                    out[0] = s * z[0];
                    out[1] = s * z[1];
                } else {
                    let s = b * libm::sqrt(2.0 + libm::sin(eta * z[1]));
                    let jz = quarter_turn(z);
                    out[0] = s * jz[0];
                    out[1] = s * jz[1];
                }
            }
        }
        true
    }

    fn drift_second_derivative_at_zero(&self, _z: &[f64], out: &mut [f64]) -> bool {
        // Every drift here is linear or has a vanishing second derivative at 0.
        out.iter_mut().for_each(|v| *v = 0.0);
        true
    }

    fn diffusion_second_derivative_at_zero(&self, k: usize, z: &[f64], out: &mut [f64]) -> bool {
        match self.id {
            TestProblemId::Rotation41 { .. } | TestProblemId::GinzburgLandau46 { .. } => {
                out.iter_mut().for_each(|v| *v = 0.0)
            }
            _ => {
                let (_, b) = self.rotation_params();
                if k == 0 {
                    out[0] = 0.0;
                    out[1] = 0.0;
                } else {
                    // 2·s'(0)·z²·Jz with s'(0) = b/(2√2).
                    let c = b * z[1] / core::f64::consts::SQRT_2;
                    let jz = quarter_turn(z);
                    out[0] = c * jz[0];
                    out[1] = c * jz[1];
                }
            }
        }
        true
    }
}

/// Exact strong solution of the rotation problem at time `t` given the Brownian
/// values `w1 = W¹_t`, `w2 = W²_t`:
/// `exp((b − σ²/2 + ε²/2)t + σW¹) · R(εW²) x₀`.
///
/// `bI`, `σI` and `εJ` commute, so the matrix exponential factorizes.
pub fn rotation41_exact(b: f64, sigma: f64, eps: f64, x0: [f64; 2], t: f64, w1: f64, w2: f64) -> [f64; 2] {
    let scale = libm::exp((b - 0.5 * sigma * sigma + 0.5 * eps * eps) * t + sigma * w1);
    let (s, c) = (libm::sin(eps * w2), libm::cos(eps * w2));
    [scale * (c * x0[0] - s * x0[1]), scale * (s * x0[0] + c * x0[1])]
}

/// Exact rotation-problem path on a time grid from Brownian path values at the
/// same grid points.
pub fn exact_rotation41_path(
    model: &TestProblem,
    x0: [f64; 2],
    times: &[f64],
    w1: &[f64],
    w2: &[f64],
) -> Result<Vec<[f64; 2]>, ModelError> {
    let TestProblemId::Rotation41 { b, sigma, eps } = model.id else {
        return Err(ModelError::Unsupported {
            required: "the rotation41 problem",
        });
    };
    if w1.len() != times.len() {
        return Err(ModelError::Dimension {
            expected: times.len(),
            got: w1.len(),
        });
    }
    if w2.len() != times.len() {
        return Err(ModelError::Dimension {
            expected: times.len(),
            got: w2.len(),
        });
    }
    Ok(times
        .iter()
        .zip(w1.iter().zip(w2))
        .map(|(&t, (&a, &c))| rotation41_exact(b, sigma, eps, x0, t, a, c))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{normalized_diffusion, normalized_drift};
    use core::f64::consts::PI;

    fn gl() -> TestProblem {
        make_test_problem(TestProblemId::GinzburgLandau46 { a: 1.0, b: 1.0, sigma: 2.0 }).unwrap()
    }

    #[test]
    fn ginzburg_landau_drift_vanishes_at_one() {
        let mut out = [0.0];
        gl().drift(&[1.0], &mut out);
        assert_eq!(out[0], 0.0);
    }

    #[test]
    fn rotation_second_diffusion_is_a_quarter_turn() {
        let m = make_test_problem(TestProblemId::Rotation41 { b: -4.0, sigma: 8.0, eps: 8.0 }).unwrap();
        let mut out = [0.0; 2];
        m.diffusion(1, &[1.0, 0.0], &mut out);
        assert_eq!(out, [0.0, 8.0]);
    }

    #[test]
    fn shifted_problem_has_no_equilibrium() {
        let m = make_test_problem(TestProblemId::Shifted48).unwrap();
        let mut out = [0.0; 2];
        m.diffusion(0, &[0.0, 0.0], &mut out);
        assert_eq!(out, [2.0, 0.5]);
        assert!(!m.equilibrium_at_zero());
    }

    #[test]
    fn ginzburg_landau_rejects_bad_parameters() {
        assert!(make_test_problem(TestProblemId::GinzburgLandau46 { a: 1.0, b: 0.0, sigma: 2.0 }).is_err());
        assert!(make_test_problem(TestProblemId::GinzburgLandau46 { a: 1.0, b: 1.0, sigma: -1.0 }).is_err());
        assert!(make_test_problem(TestProblemId::Rotation41 { b: f64::NAN, sigma: 1.0, eps: 1.0 }).is_err());
    }

    #[test]
    fn normalized_forms_of_ginzburg_landau() {
        let m = gl();
        let mut out = [0.0];
        normalized_drift(&m, 2.0, &[1.0], &mut out).unwrap();
        assert_eq!(out[0], -3.0);
        normalized_drift(&m, 0.0, &[1.0], &mut out).unwrap();
        assert_eq!(out[0], 1.0);
        normalized_drift(&m, 0.0, &[-1.0], &mut out).unwrap();
        assert_eq!(out[0], -1.0);
    }

    #[test]
    fn normalized_diffusion_of_nonlinear_rotation() {
        let m = make_test_problem(TestProblemId::NonlinearRot47 { a: 6.0, b: 3.0 }).unwrap();
        let z = [0.6, -0.8];
        let eta = 1.7;
        let mut out = [0.0; 2];
        normalized_diffusion(&m, 0, eta, &z, &mut out).unwrap();
        let s = 6.0 * (2.0 + (eta * z[0]).cos()).sqrt();
        assert!((out[0] - s * z[0]).abs() < 1e-15 && (out[1] - s * z[1]).abs() < 1e-15);
    }

    #[test]
    fn analytic_jacobians_match_finite_differences() {
        let problems = [
            TestProblemId::NonlinearRot47 { a: 2.5, b: 5.0 },
            TestProblemId::Shifted48,
            TestProblemId::GinzburgLandau46 { a: 6.0, b: 9.0, sigma: 3.0 },
        ];
        for id in problems {
            let m = make_test_problem(id).unwrap();
            let d = m.dim();
            let x: Vec<f64> = [0.7, -1.3][..d].to_vec();
            for c in core::iter::once(crate::model::Coefficient::Drift)
                .chain((0..m.noise_dim()).map(crate::model::Coefficient::Diffusion))
            {
                let mut analytic = alloc::vec![0.0; d * d];
                match c {
                    crate::model::Coefficient::Drift => m.drift_jacobian(&x, &mut analytic),
                    crate::model::Coefficient::Diffusion(k) => m.diffusion_jacobian(k, &x, &mut analytic),
                };
                let closure = crate::model::ClosureModel::new(d, m.noise_dim(), m.equilibrium_at_zero(), {
                    move |x: &[f64], out: &mut [f64]| m.drift(x, out)
                }, move |k, x: &[f64], out: &mut [f64]| m.diffusion(k, x, out));
                let mut numeric = alloc::vec![0.0; d * d];
                crate::model::coefficient_jacobian(&closure, c, &x, &mut numeric);
                for (p, q) in analytic.iter().zip(&numeric) {
                    assert!((p - q).abs() < 1e-7, "{id:?} {c:?}: {analytic:?} vs {numeric:?}");
                }
            }
        }
    }

    #[test]
    fn exact_path_deterministic_exponential() {
        let m = make_test_problem(TestProblemId::Rotation41 { b: 1.0, sigma: 0.0, eps: 0.0 }).unwrap();
        let p = exact_rotation41_path(&m, [1.0, 0.0], &[0.0, 1.0], &[0.0, 0.3], &[0.0, -2.0]).unwrap();
        assert_eq!(p[0], [1.0, 0.0]);
        assert!((p[1][0] - core::f64::consts::E).abs() < 1e-15 && p[1][1] == 0.0);
    }

    #[test]
    fn exact_path_half_turn() {
        let m = make_test_problem(TestProblemId::Rotation41 { b: 0.0, sigma: 0.0, eps: PI }).unwrap();
        let p = exact_rotation41_path(&m, [1.0, 0.0], &[1.0], &[0.0], &[1.0]).unwrap();
        let expected = libm::exp(PI * PI / 2.0);
        assert!((p[0][0] + expected).abs() < 1e-12 * expected);
        assert!(p[0][1].abs() < 1e-12 * expected);
    }

    #[test]
    fn exact_path_rejects_other_problems() {
        assert!(exact_rotation41_path(&gl(), [1.0, 0.0], &[0.0], &[0.0], &[0.0]).is_err());
    }

    #[test]
    fn exact_path_at_time_zero_is_initial_condition() {
        let m = make_test_problem(TestProblemId::Rotation41 { b: 4.0, sigma: 4.0, eps: 3.0 }).unwrap();
        let p = exact_rotation41_path(&m, [2.0, 4.0], &[0.0], &[0.0], &[0.0]).unwrap();
        assert_eq!(p[0], [2.0, 4.0]);
    }
}
