//! Comparison schemes: Euler–Maruyama, drift-implicit (backward) Euler, a
//! balanced implicit method, the stabilized explicit S-ROCK scheme and tamed
//! Euler.
//!
//! Every scheme reads the noise as `dw[k] = √Δ Ŵᵏ`.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{StepError, StepFailure};
use crate::linalg::{gram_sqrt, norm, solve_in_place};
use crate::model::SdeModel;

pub const NEWTON_TOL: f64 = 1e-12;
pub const NEWTON_MAX_ITER: usize = 50;
pub const SROCK_STAGES: usize = 3;
pub const SROCK_DAMPING: f64 = 2.2;

/// A scheme plus its options.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SchemeId {
    /// The direction-and-norm scheme; the path driver picks the Scheme 1, 3 or
    /// 4 variant from the model.
    Dnd,
    EulerMaruyama,
    BackwardEuler { tol: f64, max_iter: usize },
    Balanced,
    SRock { stages: usize, damping: f64 },
    TamedEuler,
}

impl SchemeId {
    pub fn backward_euler() -> Self {
        Self::BackwardEuler {
            tol: NEWTON_TOL,
            max_iter: NEWTON_MAX_ITER,
        }
    }

    pub fn srock3() -> Self {
        Self::SRock {
            stages: SROCK_STAGES,
            damping: SROCK_DAMPING,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Dnd => "dnd",
            Self::EulerMaruyama => "euler_maruyama",
            Self::BackwardEuler { .. } => "backward_euler",
            Self::Balanced => "balanced",
            Self::SRock { .. } => "srock",
            Self::TamedEuler => "tamed_euler",
        }
    }

    /// Checks the option ranges: `tol > 0`, `max_iter ≥ 1`, `stages ≥ 2`,
    /// `damping ≥ 0`.
    pub fn validate(&self) -> Result<(), &'static str> {
        match *self {
            Self::BackwardEuler { tol, max_iter } => {
                if !(tol > 0.0) || !tol.is_finite() {
                    return Err("Newton tolerance must be positive");
                }
                if max_iter == 0 {
                    return Err("Newton iteration limit must be at least 1");
                }
            }
            Self::SRock { stages, damping } => {
                if stages < 2 {
                    return Err("S-ROCK needs at least 2 stages");
                }
                if !(damping >= 0.0) || !damping.is_finite() {
                    return Err("S-ROCK damping must be nonnegative");
                }
            }
            _ => {}
        }
        Ok(())
    }
}

/// Buffers shared by the baseline steps. One per path.
#[derive(Debug, Clone)]
pub struct BaselineWorkspace {
    d: usize,
    m: usize,
    f: Vec<f64>,
    rhs: Vec<f64>,
    y: Vec<f64>,
    prev: Vec<f64>,
    prev2: Vec<f64>,
    jac: Vec<f64>,
    mat: Vec<f64>,
    root: Vec<f64>,
}

impl BaselineWorkspace {
    pub fn new(d: usize, m: usize) -> Self {
        Self {
            d,
            m,
            f: vec![0.0; d],
            rhs: vec![0.0; d],
            y: vec![0.0; d],
            prev: vec![0.0; d],
            prev2: vec![0.0; d],
            jac: vec![0.0; d * d],
            mat: vec![0.0; d * d],
            root: vec![0.0; d * d],
        }
    }

    pub fn for_model<M: SdeModel + ?Sized>(model: &M) -> Self {
        Self::new(model.dim(), model.noise_dim())
    }

    /// Advances `x` by one step of `scheme`. `SchemeId::Dnd` is not a baseline
    /// and is rejected.
    pub fn step<M: SdeModel + ?Sized>(
        &mut self,
        scheme: SchemeId,
        model: &M,
        x: &mut [f64],
        dt: f64,
        dw: &[f64],
    ) -> Result<(), StepError> {
        let result = match scheme {
            SchemeId::Dnd => Err(StepFailure::Precondition("not a baseline scheme")),
            SchemeId::EulerMaruyama => self.euler_maruyama(model, x, dt, dw),
            SchemeId::BackwardEuler { tol, max_iter } => self.backward_euler(model, x, dt, dw, tol, max_iter),
            SchemeId::Balanced => self.balanced(model, x, dt, dw),
            SchemeId::SRock { stages, damping } => self.srock(model, x, dt, dw, stages, damping),
            SchemeId::TamedEuler => self.tamed(model, x, dt, dw),
        };
        let result = result.and_then(|()| {
            if self.y.iter().all(|v| v.is_finite()) {
                Ok(())
            } else {
                Err(StepFailure::NonFinite)
            }
        });
        match result {
            Ok(()) => {
                x.copy_from_slice(&self.y);
                Ok(())
            }
            Err(f) => Err(StepError::new(f, norm(x), x)),
        }
    }

    /// `out += Σ σᵏ(x) dwᵏ`, using `self.f` as scratch.
    fn add_noise<M: SdeModel + ?Sized>(f: &mut [f64], model: &M, x: &[f64], dw: &[f64], out: &mut [f64]) {
        for (k, &dwk) in dw.iter().enumerate() {
            model.diffusion(k, x, f);
            out.iter_mut().zip(f.iter()).for_each(|(o, s)| *o += s * dwk);
        }
    }

    fn euler_maruyama<M: SdeModel + ?Sized>(
        &mut self,
        model: &M,
        x: &[f64],
        dt: f64,
        dw: &[f64],
    ) -> Result<(), StepFailure> {
        model.drift(x, &mut self.f);
        for i in 0..self.d {
            self.y[i] = x[i] + self.f[i] * dt;
        }
        Self::add_noise(&mut self.f, model, x, dw, &mut self.y);
        Ok(())
    }

    fn backward_euler<M: SdeModel + ?Sized>(
        &mut self,
        model: &M,
        x: &[f64],
        dt: f64,
        dw: &[f64],
        tol: f64,
        max_iter: usize,
    ) -> Result<(), StepFailure> {
        let d = self.d;
        if d == 1 {
            return self.backward_euler_scalar(model, x[0], dt, dw, tol, max_iter);
        }
        // rhs = x + Σ σᵏ(x) dWᵏ, the explicit part.
        self.rhs.copy_from_slice(x);
        Self::add_noise(&mut self.f, model, x, dw, &mut self.rhs);
        model.drift(x, &mut self.f);
        for i in 0..d {
            self.y[i] = self.rhs[i] + self.f[i] * dt;
        }
        let mut iterations = 0;
        loop {
            model.drift(&self.y, &mut self.f);
            let mut residual = 0.0;
            for i in 0..d {
                // G(y) = y − rhs − b(y)Δ, stored negated as the Newton right-hand side.
                self.prev[i] = self.rhs[i] + self.f[i] * dt - self.y[i];
                residual += self.prev[i] * self.prev[i];
            }
            let residual = libm::sqrt(residual);
            if !residual.is_finite() {
                return Err(StepFailure::NonFinite);
            }
            if residual <= tol * (1.0 + norm(&self.y)) {
                return Ok(());
            }
            if iterations == max_iter {
                return Err(StepFailure::NewtonDiverged { iterations, residual });
            }
            if !model.drift_jacobian(&self.y, &mut self.jac) {
                return Err(StepFailure::Missing("a drift Jacobian"));
            }
            for r in 0..d {
                for c in 0..d {
                    self.mat[r * d + c] = if r == c { 1.0 } else { 0.0 } - dt * self.jac[r * d + c];
                }
            }
            if !solve_in_place(&mut self.mat, &mut self.prev) {
                return Err(StepFailure::Singular);
            }
            for i in 0..d {
                self.y[i] += self.prev[i];
            }
            iterations += 1;
        }
    }

    /// The same Newton iteration without the matrix bookkeeping.
    fn backward_euler_scalar<M: SdeModel + ?Sized>(
        &mut self,
        model: &M,
        x: f64,
        dt: f64,
        dw: &[f64],
        tol: f64,
        max_iter: usize,
    ) -> Result<(), StepFailure> {
        let mut f = [0.0];
        let mut rhs = x;
        for (k, &dwk) in dw.iter().enumerate() {
            model.diffusion(k, &[x], &mut f);
            rhs += f[0] * dwk;
        }
        model.drift(&[x], &mut f);
        let mut y = rhs + f[0] * dt;
        let mut jac = [0.0];
        let mut iterations = 0;
        loop {
            model.drift(&[y], &mut f);
            let g = rhs + f[0] * dt - y;
            let residual = libm::fabs(g);
            if !residual.is_finite() {
                return Err(StepFailure::NonFinite);
            }
            if residual <= tol * (1.0 + libm::fabs(y)) {
                self.y[0] = y;
                return Ok(());
            }
            if iterations == max_iter {
                return Err(StepFailure::NewtonDiverged { iterations, residual });
            }
            if !model.drift_jacobian(&[y], &mut jac) {
                return Err(StepFailure::Missing("a drift Jacobian"));
            }
            let slope = 1.0 - dt * jac[0];
            if slope == 0.0 || !slope.is_finite() {
                return Err(StepFailure::Singular);
            }
            y += g / slope;
            iterations += 1;
        }
    }

    fn balanced<M: SdeModel + ?Sized>(
        &mut self,
        model: &M,
        x: &[f64],
        dt: f64,
        dw: &[f64],
    ) -> Result<(), StepFailure> {
        let d = self.d;
        // C = −½ Jb(x) Δ + Σ √(Jσᵏᵀ Jσᵏ) |dWᵏ|
        if !model.drift_jacobian(x, &mut self.jac) {
            return Err(StepFailure::Missing("a drift Jacobian"));
        }
        for (c, j) in self.mat.iter_mut().zip(&self.jac) {
            *c = -0.5 * dt * j;
        }
        for (k, &dwk) in dw.iter().enumerate().take(self.m) {
            if !model.diffusion_jacobian(k, x, &mut self.jac) {
                return Err(StepFailure::Missing("diffusion Jacobians"));
            }
            gram_sqrt(&self.jac, d, &mut self.root);
            let w = libm::fabs(dwk);
            for (c, r) in self.mat.iter_mut().zip(&self.root) {
                *c += r * w;
            }
        }
        // rhs = x + b(x)Δ + Σσᵏ(x)dWᵏ + C x
        model.drift(x, &mut self.f);
        for i in 0..d {
            let cx: f64 = (0..d).map(|j| self.mat[i * d + j] * x[j]).sum();
            self.rhs[i] = x[i] + self.f[i] * dt + cx;
        }
        Self::add_noise(&mut self.f, model, x, dw, &mut self.rhs);
        for i in 0..d {
            self.mat[i * d + i] += 1.0;
        }
        if !solve_in_place(&mut self.mat, &mut self.rhs) {
            return Err(StepFailure::Singular);
        }
        self.y.copy_from_slice(&self.rhs);
        Ok(())
    }

    fn srock<M: SdeModel + ?Sized>(
        &mut self,
        model: &M,
        x: &[f64],
        dt: f64,
        dw: &[f64],
        stages: usize,
        damping: f64,
    ) -> Result<(), StepFailure> {
        let d = self.d;
        let c = ChebyshevStages::new(stages, damping);
        // K₀ = x in prev2, K₁ in prev.
        self.prev2.copy_from_slice(x);
        model.drift(x, &mut self.f);
        for i in 0..d {
            self.prev[i] = x[i] + dt * (c.y1 / c.y0) * self.f[i];
        }
        let (mut t_jm2, mut t_jm1) = (1.0, c.y0);
        for _ in 2..=stages {
            let t_j = 2.0 * c.y0 * t_jm1 - t_jm2;
            let drift_weight = 2.0 * dt * c.y1 * (t_jm1 / t_j);
            let memory = t_jm2 / t_j;
            model.drift(&self.prev, &mut self.f);
            // K_j = K_{j−1} + 2Δy₁(T_{j−1}/T_j) b(K_{j−1}) + (T_{j−2}/T_j)(K_{j−1} − K_{j−2}),
            // which is the three-term stage recursion rearranged with
            // 2y₀T_{j−1} = T_j + T_{j−2}.
            for i in 0..d {
                let k = self.prev[i] + drift_weight * self.f[i] + memory * (self.prev[i] - self.prev2[i]);
                self.prev2[i] = self.prev[i];
                self.prev[i] = k;
            }
            t_jm2 = t_jm1;
            t_jm1 = t_j;
        }
        self.y.copy_from_slice(&self.prev);
        Self::add_noise(&mut self.f, model, &self.prev, dw, &mut self.y);
        Ok(())
    }

    fn tamed<M: SdeModel + ?Sized>(&mut self, model: &M, x: &[f64], dt: f64, dw: &[f64]) -> Result<(), StepFailure> {
        model.drift(x, &mut self.f);
        let scale = dt / (1.0 + norm(&self.f) * dt);
        for i in 0..self.d {
            self.y[i] = x[i] + self.f[i] * scale;
        }
        Self::add_noise(&mut self.f, model, x, dw, &mut self.y);
        Ok(())
    }
}

/// Chebyshev data of the damped S-ROCK recursion:
/// `y₀ = 1 + damping/s²`, `y₁ = T_s(y₀)/T'_s(y₀)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChebyshevStages {
    pub stages: usize,
    pub y0: f64,
    pub y1: f64,
    /// `T_s(y₀)`.
    pub ts: f64,
}

impl ChebyshevStages {
    pub fn new(stages: usize, damping: f64) -> Self {
        let s = stages as f64;
        let y0 = 1.0 + damping / (s * s);
        // T_j and T'_j by their three-term recurrences.
        let (mut t_prev, mut t) = (1.0, y0);
        let (mut dt_prev, mut dt) = (0.0, 1.0);
        for _ in 2..=stages {
            let t_next = 2.0 * y0 * t - t_prev;
            let dt_next = 2.0 * t + 2.0 * y0 * dt - dt_prev;
            t_prev = t;
            t = t_next;
            dt_prev = dt;
            dt = dt_next;
        }
        Self {
            stages,
            y0,
            y1: t / dt,
            ts: t,
        }
    }

    /// Length `ℓ_s = (1 + y₀)/y₁` of the real interval `[−ℓ_s, 0]` on which the
    /// deterministic stability function stays in `[−1, 1]`.
    pub fn stability_interval(&self) -> f64 {
        (1.0 + self.y0) / self.y1
    }
}

fn run<M: SdeModel + ?Sized>(scheme: SchemeId, model: &M, x: &[f64], dt: f64, dw: &[f64]) -> Result<Vec<f64>, StepError> {
    let mut ws = BaselineWorkspace::for_model(model);
    let mut y = x.to_vec();
    ws.step(scheme, model, &mut y, dt, dw)?;
    Ok(y)
}

/// `x + b(x)Δ + Σ σᵏ(x) dWᵏ`.
pub fn euler_maruyama_step<M: SdeModel + ?Sized>(model: &M, x: &[f64], dt: f64, dw: &[f64]) -> Result<Vec<f64>, StepError> {
    run(SchemeId::EulerMaruyama, model, x, dt, dw)
}

/// Solves `y = x + b(y)Δ + Σ σᵏ(x) dWᵏ` by Newton's method started from the
/// Euler–Maruyama predictor. Stops when the residual is at most
/// `tol·(1 + ‖y‖)`.
pub fn backward_euler_step<M: SdeModel + ?Sized>(
    model: &M,
    x: &[f64],
    dt: f64,
    dw: &[f64],
    tol: f64,
    max_iter: usize,
) -> Result<Vec<f64>, StepError> {
    run(SchemeId::BackwardEuler { tol, max_iter }, model, x, dt, dw)
}

/// Solves `(I + C) y = x + b(x)Δ + Σ σᵏ(x) dWᵏ + C x` with
/// `C = −½ Jb(x) Δ + Σ_k √(Jσᵏ(x)ᵀ Jσᵏ(x)) |dWᵏ|`.
pub fn balanced_step<M: SdeModel + ?Sized>(model: &M, x: &[f64], dt: f64, dw: &[f64]) -> Result<Vec<f64>, StepError> {
    run(SchemeId::Balanced, model, x, dt, dw)
}

/// S-ROCK with `stages` Chebyshev stages on the drift, then one explicit
/// diffusion step from the last stage.
pub fn srock_step<M: SdeModel + ?Sized>(
    model: &M,
    x: &[f64],
    dt: f64,
    dw: &[f64],
    stages: usize,
    damping: f64,
) -> Result<Vec<f64>, StepError> {
    run(SchemeId::SRock { stages, damping }, model, x, dt, dw)
}

/// [`srock_step`] with 3 stages and damping 2.2.
pub fn srock3_step<M: SdeModel + ?Sized>(model: &M, x: &[f64], dt: f64, dw: &[f64]) -> Result<Vec<f64>, StepError> {
    run(SchemeId::srock3(), model, x, dt, dw)
}

/// `x + b(x)Δ/(1 + ‖b(x)‖Δ) + Σ σᵏ(x) dWᵏ`.
pub fn tamed_euler_step<M: SdeModel + ?Sized>(model: &M, x: &[f64], dt: f64, dw: &[f64]) -> Result<Vec<f64>, StepError> {
    run(SchemeId::TamedEuler, model, x, dt, dw)
}
