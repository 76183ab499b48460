//! Deterministic `E φ(X_t)` for the rotation problem.
//!
//! The exact solution is `X_t = e^{ct + σW¹_t} R(εW²_t) x₀` with
//! `c = b − σ²/2 + ε²/2`, so one coordinate equals `e^{y} r₀ cos(θ + ψ)` with
//! `y ~ N(ct, σ²t)` and `θ ~ N(0, ε²t)` independent. Writing
//! `v = y + log|r₀ cos(θ + ψ)|`, both functionals are `f(v)` with
//! `f(v) = log(1 + e^{2v})` or `arctan(1 + e^{2v})`.
//!
//! The inner expectation over `y` splits `f` into a part with a closed-form
//! Gaussian expectation plus a remainder that decays like `e^{−2|v|}`; the
//! remainder is integrated by composite Gauss–Legendre. The outer integral
//! over `θ` has logarithmic endpoint behaviour at the zeros of the cosine,
//! so panels are graded geometrically towards them. For wide angle spreads
//! the wrapped normal density on one period is summed through its Fourier
//! series.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, TAU};

use dnd_sde_core::Functional;

const GL_NODES: [f64; 8] = [
    -0.960_289_856_497_536_3,
    -0.796_666_477_413_626_7,
    -0.525_532_409_916_329,
    -0.183_434_642_495_649_8,
    0.183_434_642_495_649_8,
    0.525_532_409_916_329,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_3,
];
const GL_WEIGHTS: [f64; 8] = [
    0.101_228_536_290_376_26,
    0.222_381_034_453_374_47,
    0.313_706_645_877_887_3,
    0.362_683_783_378_362,
    0.362_683_783_378_362,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_47,
    0.101_228_536_290_376_26,
];

/// Beyond this many standard deviations the Gaussian weight is below 1e-18.
const TAIL: f64 = 9.0;
/// The remainder `f − closed-form part` is below `e^{−2·REMAINDER_RANGE}`
/// outside `[−REMAINDER_RANGE, REMAINDER_RANGE]`.
const REMAINDER_RANGE: f64 = 20.0;
/// Smallest distance to a cosine zero resolved by the graded panels.
const GRADE_FLOOR: f64 = 1e-13;
/// Angle spread above which the wrapped density is used.
const WRAP_SPREAD: f64 = 2.5;

fn panel<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> f64 {
    let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
    half * GL_NODES.iter().zip(&GL_WEIGHTS).map(|(x, w)| w * f(mid + half * x)).sum::<f64>()
}

/// Uniform panels of width at most `width` on `[a, b]`.
fn uniform<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, width: f64) -> f64 {
    if !(b > a) {
        return 0.0;
    }
    let n = ((b - a) / width).ceil().max(1.0) as usize;
    let h = (b - a) / n as f64;
    (0..n).map(|i| panel(f, a + i as f64 * h, a + (i + 1) as f64 * h)).sum()
}

/// `[a, b]` with panels halving towards `a`, then uniform panels of width at
/// most `width`.
fn graded_from<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, width: f64) -> f64 {
    let len = b - a;
    if !(len > 0.0) {
        return 0.0;
    }
    let mut total = 0.0;
    let mut outer = width.min(len);
    let mut inner = 0.5 * outer;
    while inner > GRADE_FLOOR * len.max(1.0) {
        total += panel(f, a + inner, a + outer);
        outer = inner;
        inner *= 0.5;
    }
    total += panel(f, a, a + outer);
    total + uniform(f, a + width.min(len), b, width)
}

/// `[a, b]` graded towards both ends.
fn graded_both<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, width: f64) -> f64 {
    let mid = 0.5 * (a + b);
    graded_from(f, a, mid, width) + graded_from(&|x| f(a + b - x), a, mid, width)
}

fn normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z / std::f64::consts::SQRT_2)
}

fn normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (TAU).sqrt()
}

/// `f(v)` for the functional applied to a coordinate of modulus `e^{v}`.
fn f_of_log(functional: Functional, v: f64) -> f64 {
    match functional {
        Functional::Log1pSq { .. } => {
            if v > 0.0 {
                2.0 * v + (-2.0 * v).exp().ln_1p()
            } else {
                (2.0 * v).exp().ln_1p()
            }
        }
        Functional::Atan1pSq { .. } => (1.0 + (2.0 * v).exp()).atan(),
    }
}

/// `f(v)` minus its closed-form part: `2v⁺` for the logarithm and
/// `π/4 + (π/4)·1[v > 0]` for the arctangent.
fn remainder(functional: Functional, v: f64) -> f64 {
    match functional {
        Functional::Log1pSq { .. } => (-2.0 * v.abs()).exp().ln_1p(),
        Functional::Atan1pSq { .. } => {
            let step = if v > 0.0 { FRAC_PI_2 } else { FRAC_PI_4 };
            (1.0 + (2.0 * v).exp()).atan() - step
        }
    }
}

/// `E f(V)` for `V ~ N(m, s²)`.
fn inner_expectation(functional: Functional, m: f64, s: f64) -> f64 {
    if m == f64::NEG_INFINITY {
        return f_of_log(functional, m);
    }
    if s == 0.0 {
        return f_of_log(functional, m);
    }
    let z = m / s;
    let closed = match functional {
        Functional::Log1pSq { .. } => 2.0 * (m * normal_cdf(z) + s * normal_pdf(z)),
        Functional::Atan1pSq { .. } => FRAC_PI_4 + FRAC_PI_4 * normal_cdf(z),
    };
    let lo = (m - TAIL * s).max(-REMAINDER_RANGE);
    let hi = (m + TAIL * s).min(REMAINDER_RANGE);
    if !(hi > lo) {
        return closed;
    }
    let width = (0.5 * s).min(0.5);
    let g = |v: f64| remainder(functional, v) * normal_pdf((v - m) / s) / s;
    let rest = if lo < 0.0 && hi > 0.0 {
        uniform(&g, lo, 0.0, width) + uniform(&g, 0.0, hi, width)
    } else {
        uniform(&g, lo, hi, width)
    };
    closed + rest
}

/// Exact `E φ(X_t)` for the rotation problem with parameters `(b, σ, ε)`.
pub fn rotation_expectation(b: f64, sigma: f64, eps: f64, x0: [f64; 2], t: f64, functional: Functional) -> f64 {
    let r0 = x0[0].hypot(x0[1]);
    if t == 0.0 || r0 == 0.0 {
        return functional.eval(&x0);
    }
    let phase = x0[1].atan2(x0[0]) - functional.coord() as f64 * FRAC_PI_2;
    let drift = (b - 0.5 * sigma * sigma + 0.5 * eps * eps) * t + r0.ln();
    let s = sigma.abs() * t.sqrt();
    let h = |theta: f64| {
        let c = (theta + phase).cos().abs();
        let m = if c == 0.0 { f64::NEG_INFINITY } else { drift + c.ln() };
        inner_expectation(functional, m, s)
    };
    let spread = eps.abs() * t.sqrt();
    if spread == 0.0 {
        return h(0.0);
    }
    // Zeros of cos(θ + ψ): θ = π/2 − ψ + kπ.
    let zero0 = FRAC_PI_2 - phase;
    if spread >= WRAP_SPREAD {
        let terms: Vec<f64> = (1..)
            .map(|n: i32| (-0.5 * (n as f64 * spread).powi(2)).exp())
            .take_while(|&w| w > 1e-18)
            .collect();
        let density = |theta: f64| {
            let mut p = 1.0;
            for (n, w) in terms.iter().enumerate() {
                p += 2.0 * w * ((n + 1) as f64 * theta).cos();
            }
            p / TAU
        };
        let g = |theta: f64| h(theta) * density(theta);
        return graded_both(&g, zero0, zero0 + PI, 0.25) + graded_both(&g, zero0 + PI, zero0 + TAU, 0.25);
    }
    let lo = -TAIL * spread;
    let hi = TAIL * spread;
    let g = |theta: f64| h(theta) * normal_pdf(theta / spread) / spread;
    let width = (0.5 * spread).min(0.25);
    let k_first = ((lo - zero0) / PI).ceil() as i64;
    let k_last = ((hi - zero0) / PI).floor() as i64;
    if k_first > k_last {
        return uniform(&g, lo, hi, width);
    }
    let zeros: Vec<f64> = (k_first..=k_last).map(|k| zero0 + k as f64 * PI).collect();
    let mut total = graded_from(&|x| g(lo + zeros[0] - x), lo, zeros[0], width);
    for pair in zeros.windows(2) {
        total += graded_both(&g, pair[0], pair[1], width);
    }
    total + graded_from(&g, *zeros.last().unwrap(), hi, width)
}
