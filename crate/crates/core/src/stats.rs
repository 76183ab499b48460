//! Running moments, confidence intervals and rate fits.

use crate::error::EstimateError;

/// Two-sided 99% normal quantile.
pub const Z99: f64 = 2.576;

/// Welford accumulator. Merging is exact up to round-off and deterministic
/// for a fixed merge order.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RunningStats {
    n: u64,
    mean: f64,
    m2: f64,
}

impl RunningStats {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    /// Chan et al. pairwise update.
    pub fn merge(&mut self, other: &Self) {
        if other.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = *other;
            return;
        }
        let n = self.n + other.n;
        let delta = other.mean - self.mean;
        let w = other.n as f64 / n as f64;
        self.mean += delta * w;
        self.m2 += other.m2 + delta * delta * self.n as f64 * w;
        self.n = n;
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Unbiased sample variance; 0 below two samples.
    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            (self.m2 / (self.n - 1) as f64).max(0.0)
        }
    }

    /// 99% half-width of the mean.
    pub fn ci99(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        confidence_interval(self.variance(), self.n)
    }
}

/// Normal-approximation 99% half-width `2.576 √(var/n)`.
pub fn confidence_interval(sample_var: f64, n: u64) -> f64 {
    if n == 0 {
        return f64::INFINITY;
    }
    Z99 * libm::sqrt(sample_var.max(0.0) / n as f64)
}

/// Least-squares slope of `log error` against `log Δ`.
pub fn observed_order(pairs: &[(f64, f64)]) -> Result<f64, EstimateError> {
    if pairs.len() < 3 {
        return Err(EstimateError::TooFewPoints {
            needed: 3,
            got: pairs.len(),
        });
    }
    for &(dt, err) in pairs {
        if !(dt > 0.0) {
            return Err(EstimateError::NonPositive(dt));
        }
        if !(err > 0.0) {
            return Err(EstimateError::NonPositive(err));
        }
    }
    let n = pairs.len() as f64;
    let (mut sx, mut sy) = (0.0, 0.0);
    for &(dt, err) in pairs {
        sx += libm::log(dt);
        sy += libm::log(err);
    }
    let (mx, my) = (sx / n, sy / n);
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for &(dt, err) in pairs {
        let dx = libm::log(dt) - mx;
        sxy += dx * (libm::log(err) - my);
        sxx += dx * dx;
    }
    if sxx == 0.0 {
        return Err(EstimateError::TooFewPoints { needed: 2, got: 1 });
    }
    Ok(sxy / sxx)
}

/// `(1/T) log(η_T/η_0)`.
pub fn lyapunov_estimate(initial_norm: f64, terminal_norm: f64, horizon: f64) -> Result<f64, EstimateError> {
    if !(initial_norm > 0.0) || !(terminal_norm > 0.0) {
        return Err(EstimateError::UndefinedRate);
    }
    if !(horizon > 0.0) {
        return Err(EstimateError::NonPositive(horizon));
    }
    Ok(libm::log(terminal_norm / initial_norm) / horizon)
}
