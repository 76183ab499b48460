use alloc::boxed::Box;

use super::SdeModel;

type VecField = Box<dyn Fn(&[f64], &mut [f64]) + Send + Sync>;
type IndexedField = Box<dyn Fn(usize, &[f64], &mut [f64]) + Send + Sync>;

/// A model assembled from closures. Has no closed-form normalized coefficients,
/// so the integrators go through the generic division/Taylor path.
pub struct ClosureModel {
    d: usize,
    m: usize,
    equilibrium: bool,
    drift: VecField,
    diffusion: IndexedField,
    drift_jacobian: Option<VecField>,
    diffusion_jacobian: Option<IndexedField>,
}

impl ClosureModel {
    pub fn new(
        d: usize,
        m: usize,
        equilibrium_at_zero: bool,
        drift: impl Fn(&[f64], &mut [f64]) + Send + Sync + 'static,
        diffusion: impl Fn(usize, &[f64], &mut [f64]) + Send + Sync + 'static,
    ) -> Self {
        Self {
            d,
            m,
            equilibrium: equilibrium_at_zero,
            drift: Box::new(drift),
            diffusion: Box::new(diffusion),
            drift_jacobian: None,
            diffusion_jacobian: None,
        }
    }

    pub fn with_drift_jacobian(mut self, f: impl Fn(&[f64], &mut [f64]) + Send + Sync + 'static) -> Self {
        self.drift_jacobian = Some(Box::new(f));
        self
    }

    pub fn with_diffusion_jacobian(
        mut self,
        f: impl Fn(usize, &[f64], &mut [f64]) + Send + Sync + 'static,
    ) -> Self {
        self.diffusion_jacobian = Some(Box::new(f));
        self
    }
}

impl core::fmt::Debug for ClosureModel {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("ClosureModel")
            .field("d", &self.d)
            .field("m", &self.m)
            .field("equilibrium", &self.equilibrium)
            .finish_non_exhaustive()
    }
}

impl SdeModel for ClosureModel {
    fn dim(&self) -> usize {
        self.d
    }
    fn noise_dim(&self) -> usize {
        self.m
    }
    fn equilibrium_at_zero(&self) -> bool {
        self.equilibrium
    }
    fn drift(&self, x: &[f64], out: &mut [f64]) {
        (self.drift)(x, out)
    }
    fn diffusion(&self, k: usize, x: &[f64], out: &mut [f64]) {
        (self.diffusion)(k, x, out)
    }
    fn drift_jacobian(&self, x: &[f64], out: &mut [f64]) -> bool {
        match &self.drift_jacobian {
            Some(f) => {
                f(x, out);
                true
            }
            None => false,
        }
    }
    fn diffusion_jacobian(&self, k: usize, x: &[f64], out: &mut [f64]) -> bool {
        match &self.diffusion_jacobian {
            Some(f) => {
                f(k, x, out);
                true
            }
            None => false,
        }
    }
}
