use alloc::vec::Vec;

use super::SdeModel;
use crate::error::ModelError;
use crate::linalg::mat_vec;

/// `dX = B X dt + Σ σᵏ X dWᵏ` with constant `d x d` matrices (row-major).
#[derive(Debug, Clone, PartialEq)]
pub struct BilinearModel {
    d: usize,
    drift: Vec<f64>,
    sigmas: Vec<Vec<f64>>,
}

impl BilinearModel {
    pub fn new(d: usize, drift: Vec<f64>, sigmas: Vec<Vec<f64>>) -> Result<Self, ModelError> {
        if d == 0 {
            return Err(ModelError::Dimension { expected: 1, got: 0 });
        }
        if sigmas.is_empty() {
            return Err(ModelError::Dimension { expected: 1, got: 0 });
        }
        for m in core::iter::once(&drift).chain(&sigmas) {
            if m.len() != d * d {
                return Err(ModelError::Dimension {
                    expected: d * d,
                    got: m.len(),
                });
            }
            if !m.iter().all(|v| v.is_finite()) {
                return Err(ModelError::NonFinite {
                    what: "bilinear coefficient matrix",
                });
            }
        }
        Ok(Self { d, drift, sigmas })
    }

    pub fn drift_matrix(&self) -> &[f64] {
        &self.drift
    }

    pub fn sigma_matrices(&self) -> &[Vec<f64>] {
        &self.sigmas
    }
}

impl SdeModel for BilinearModel {
    fn dim(&self) -> usize {
        self.d
    }
    fn noise_dim(&self) -> usize {
        self.sigmas.len()
    }
    fn equilibrium_at_zero(&self) -> bool {
        true
    }
    fn drift(&self, x: &[f64], out: &mut [f64]) {
        mat_vec(&self.drift, x, out)
    }
    fn diffusion(&self, k: usize, x: &[f64], out: &mut [f64]) {
        mat_vec(&self.sigmas[k], x, out)
    }
    fn drift_jacobian(&self, _x: &[f64], out: &mut [f64]) -> bool {
        out.copy_from_slice(&self.drift);
        true
    }
    fn diffusion_jacobian(&self, k: usize, _x: &[f64], out: &mut [f64]) -> bool {
        out.copy_from_slice(&self.sigmas[k]);
        true
    }
    fn normalized_drift_closed(&self, _eta: f64, z: &[f64], out: &mut [f64]) -> bool {
        mat_vec(&self.drift, z, out);
        true
    }
    fn normalized_diffusion_closed(&self, k: usize, _eta: f64, z: &[f64], out: &mut [f64]) -> bool {
        mat_vec(&self.sigmas[k], z, out);
        true
    }
    fn drift_second_derivative_at_zero(&self, _z: &[f64], out: &mut [f64]) -> bool {
        out.iter_mut().for_each(|v| *v = 0.0);
        true
    }
    fn diffusion_second_derivative_at_zero(&self, _k: usize, _z: &[f64], out: &mut [f64]) -> bool {
        out.iter_mut().for_each(|v| *v = 0.0);
        true
    }
}
