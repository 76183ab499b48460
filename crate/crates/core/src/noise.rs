//! Reproducible increment generation.
//!
//! Every path gets its own ChaCha8 stream: the key comes from the experiment
//! seed, the 64-bit stream id is the path index, and the block counter walks
//! through the draws. A path's increments therefore depend only on
//! `(seed, path_index, draw position)`, never on how paths are scheduled.
//!
//! All three laws are symmetric with mean 0 and variance 1. The two bounded
//! laws satisfy `E exp(sŴ) ≤ exp(s²(b−a)²/8)` by Hoeffding's lemma
//! (`(b−a)²/8 = 1/2` for ±1 and `3/2` for the uniform law on `[−√3, √3]`);
//! the Gaussian has `E exp(sŴ) = exp(s²/2)`.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

const SQRT3: f64 = 1.732_050_807_568_877_2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NoiseLaw {
    Gaussian,
    /// ±1 with probability 1/2 each.
    TwoPoint,
    /// Uniform on `[−√3, √3]`.
    UniformSqrt3,
}

impl NoiseLaw {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Gaussian => "gaussian",
            Self::TwoPoint => "two_point",
            Self::UniformSqrt3 => "uniform_sqrt3",
        }
    }

    /// Constant `γ` with `E exp(sŴ) ≤ exp(γ s²)`.
    pub fn sub_gaussian_constant(&self) -> f64 {
        match self {
            Self::Gaussian | Self::TwoPoint => 0.5,
            Self::UniformSqrt3 => 1.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct NoiseSpec {
    pub law: NoiseLaw,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn new(law: NoiseLaw, seed: u64) -> Self {
        Self { law, seed }
    }

    /// Same law, seed mixed with `purpose`. Used to give reference runs and
    /// scheme runs unrelated streams.
    pub fn derived(&self, purpose: u64) -> Self {
        Self {
            law: self.law,
            seed: splitmix64(self.seed ^ splitmix64(purpose)),
        }
    }

    pub fn with_law(&self, law: NoiseLaw) -> Self {
        Self { law, seed: self.seed }
    }
}

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn key_from_seed(seed: u64) -> [u8; 32] {
    let mut key = [0u8; 32];
    let mut state = seed;
    for chunk in key.chunks_exact_mut(8) {
        state = splitmix64(state);
        chunk.copy_from_slice(&state.to_le_bytes());
    }
    key
}

/// A single-owner stream of standardized noise draws for one path.
#[derive(Debug, Clone)]
pub struct NoiseStream {
    rng: ChaCha8Rng,
    law: NoiseLaw,
    path_index: u64,
    draws: u64,
    bits: u64,
    bits_left: u32,
}

/// Stream for path `path_index`. Two calls with equal arguments give identical
/// sequences; distinct indices select disjoint ChaCha streams.
pub fn substream(spec: NoiseSpec, path_index: u64) -> NoiseStream {
    let mut rng = ChaCha8Rng::from_seed(key_from_seed(spec.seed));
    rng.set_stream(path_index);
    NoiseStream {
        rng,
        law: spec.law,
        path_index,
        draws: 0,
        bits: 0,
        bits_left: 0,
    }
}

impl NoiseStream {
    pub fn law(&self) -> NoiseLaw {
        self.law
    }

    pub fn path_index(&self) -> u64 {
        self.path_index
    }

    /// Number of standardized draws taken so far.
    pub fn draws(&self) -> u64 {
        self.draws
    }

    /// One draw of `Ŵ` (mean 0, variance 1).
    #[inline]
    pub fn standard(&mut self) -> f64 {
        self.draws += 1;
        match self.law {
            NoiseLaw::Gaussian => StandardNormal.sample(&mut self.rng),
            NoiseLaw::TwoPoint => {
                if self.bits_left == 0 {
                    self.bits = self.rng.next_u64();
                    self.bits_left = 64;
                }
                let bit = self.bits & 1;
                self.bits >>= 1;
                self.bits_left -= 1;
                if bit == 1 {
                    1.0
                } else {
                    -1.0
                }
            }
            NoiseLaw::UniformSqrt3 => {
                let u = (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
                (2.0 * u - 1.0) * SQRT3
            }
        }
    }

    /// Writes `√dt · Ŵᵏ` for `k = 1..=out.len()`.
    #[inline]
    pub fn increments(&mut self, dt: f64, out: &mut [f64]) {
        let scale = libm::sqrt(dt);
        for o in out.iter_mut() {
            *o = scale * self.standard();
        }
    }
}
