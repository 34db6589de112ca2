//! Counter-based Gaussian increments.
//!
//! Every Brownian increment is addressed as (seed, stream_id, step_index), so
//! any increment can be regenerated without storing the path. That is what
//! makes the cocycle test, the pullback offset trick, and deterministic
//! parallel Monte Carlo possible: shifting a noise realization in time is
//! just re-indexing step offsets, and thread scheduling cannot change what
//! any path sees.

use std::f64::consts::TAU;

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;
const LANE_A: u64 = 0xd1b5_4a32_d192_ed03;
const LANE_B: u64 = 0x8cb9_2ba7_2f3d_8dd7;

/// splitmix64 finalizer: full-avalanche 64-bit mix.
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Absorb (seed, stream, step) into one well-mixed word.
fn absorb(seed: u64, stream: u64, step: u64) -> u64 {
    let mut h = mix64(seed ^ GOLDEN);
    h = mix64(h.wrapping_add(stream.wrapping_mul(GOLDEN)) ^ LANE_A);
    mix64(h.wrapping_add(step.wrapping_mul(GOLDEN)) ^ LANE_B)
}

/// u64 -> uniform in (0, 1]; never zero, so ln(u) is finite.
fn to_open_unit(x: u64) -> f64 {
    ((x >> 11) + 1) as f64 * (1.0 / 9_007_199_254_740_992.0)
}

/// u64 -> uniform in [0, 1).
fn to_half_open_unit(x: u64) -> f64 {
    (x >> 11) as f64 * (1.0 / 9_007_199_254_740_992.0)
}

/// Standard normal draw for a single counter position (Box-Muller, cosine
/// branch; the sine branch is discarded to keep one draw per address).
fn standard_normal(seed: u64, stream: u64, step: u64) -> f64 {
    let h = absorb(seed, stream, step);
    let u1 = to_open_unit(mix64(h ^ LANE_A));
    let u2 = to_half_open_unit(mix64(h ^ LANE_B));
    (-2.0 * u1.ln()).sqrt() * (TAU * u2).cos()
}

/// Addressable Brownian increment source: `increment(k)` is the k-th
/// increment dW_k ~ N(0, dt) of stream `stream_id`, shifted by `offset`
/// steps. Copy-cheap and immutable; substreams never share increments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseStream {
    seed: u64,
    dt: f64,
    stream_id: u64,
    offset: u64,
}

impl NoiseStream {
    pub fn new(seed: u64, dt: f64) -> Self {
        Self {
            seed,
            dt,
            stream_id: 0,
            offset: 0,
        }
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Independent stream for ensemble member / Monte Carlo path `id`.
    pub fn substream(&self, id: u64) -> Self {
        Self {
            stream_id: id,
            ..*self
        }
    }

    /// Same stream viewed from `offset_steps` later; realizes the time shift
    /// of a fixed noise realization.
    pub fn with_offset(&self, offset_steps: u64) -> Self {
        Self {
            offset: self.offset + offset_steps,
            ..*self
        }
    }

    /// dW_k ~ N(0, dt).
    pub fn increment(&self, step: u64) -> f64 {
        self.unit_normal(step) * self.dt.sqrt()
    }

    /// Unit-variance draw at the same address (used by tests).
    pub fn unit_normal(&self, step: u64) -> f64 {
        standard_normal(self.seed, self.stream_id, self.offset + step)
    }
}
