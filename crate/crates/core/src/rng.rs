//! Counter-based random streams.
//!
//! Every draw is a pure function of `(key, counter)`, so any entry of any
//! stream can be produced independently and in any order. Keys are derived
//! from a seed and a stream label, which gives cheap splitting: the sparsity
//! pattern, the non-zero values and the noise of one trial each live on
//! their own stream.
//!
//! The mixing function is the SplitMix64 finalizer. Normal variates use the
//! AS241 (PPND16) inverse normal CDF on a single uniform, so one counter
//! maps to exactly one normal draw.

use serde::{Deserialize, Serialize};

const GOLDEN_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

/// Name of the normal sampling method, recorded in provenance.
pub const NORMAL_METHOD: &str = "inverse-cdf-as241";

/// SplitMix64 finalizer. A bijection on `u64`.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derive a child seed from a parent seed and a label.
#[inline]
pub fn derive_seed(seed: u64, label: u64) -> u64 {
    mix64(seed ^ mix64(label.wrapping_add(GOLDEN_GAMMA)))
}

/// Labels for the sub-streams used across the crate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StreamLabel {
    Pattern,
    Values,
    Noise,
    Signs,
    Thinning,
    Auxiliary(u64),
}

impl StreamLabel {
    fn code(self) -> u64 {
        match self {
            StreamLabel::Pattern => 0x5041_5454,
            StreamLabel::Values => 0x5641_4c53,
            StreamLabel::Noise => 0x4e4f_4953,
            StreamLabel::Signs => 0x5349_474e,
            StreamLabel::Thinning => 0x5448_494e,
            StreamLabel::Auxiliary(x) => mix64(x ^ 0x4155_5849),
        }
    }
}

/// A keyed counter-based stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Stream {
    key: u64,
}

impl Stream {
    pub fn new(seed: u64, label: StreamLabel) -> Self {
        Stream {
            key: derive_seed(seed, label.code()),
        }
    }

    /// Raw 64 random bits at position `counter`.
    #[inline]
    pub fn bits(&self, counter: u64) -> u64 {
        mix64(
            self.key
                .wrapping_add(counter.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA)),
        )
    }

    /// Uniform on `[0, 1)` with 53 bits of resolution.
    #[inline]
    pub fn uniform(&self, counter: u64) -> f64 {
        (self.bits(counter) >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform on the open interval `(0, 1)`.
    #[inline]
    pub fn open_uniform(&self, counter: u64) -> f64 {
        ((self.bits(counter) >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }

    /// Bernoulli draw with success probability `prob`.
    #[inline]
    pub fn bernoulli(&self, counter: u64, prob: f64) -> bool {
        self.uniform(counter) < prob
    }

    /// Standard normal draw.
    #[inline]
    pub fn normal(&self, counter: u64) -> f64 {
        inverse_normal_cdf(self.open_uniform(counter))
    }
}

/// Sequential cursor over a [`Stream`], for code that just wants "the next draw".
#[derive(Debug, Clone)]
pub struct Cursor {
    stream: Stream,
    counter: u64,
}

impl Cursor {
    pub fn new(seed: u64, label: StreamLabel) -> Self {
        Cursor {
            stream: Stream::new(seed, label),
            counter: 0,
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        let v = self.stream.bits(self.counter);
        self.counter += 1;
        v
    }

    pub fn next_uniform(&mut self) -> f64 {
        let v = self.stream.uniform(self.counter);
        self.counter += 1;
        v
    }

    pub fn next_normal(&mut self) -> f64 {
        let v = self.stream.normal(self.counter);
        self.counter += 1;
        v
    }
}

/// Inverse of the standard normal CDF (Wichura, AS241 PPND16).
///
/// Relative accuracy about 1e-16 on `(0, 1)`. Returns `±inf` at the endpoints.
pub fn inverse_normal_cdf(p: f64) -> f64 {
    if p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
    let q = p - 0.5;
    if q.abs() <= 0.425 {
        let r = 0.180625 - q * q;
        let num = ((((((2.509_080_928_730_122_7e3 * r + 3.343_057_558_358_813e4) * r
            + 6.726_577_092_700_87e4)
            * r
            + 4.592_195_393_154_987e4)
            * r
            + 1.373_169_376_550_946e4)
            * r
            + 1.971_590_950_306_551_3e3)
            * r
            + 1.331_416_678_917_843_8e2)
            * r
            + 3.387_132_872_796_366_5;
        let den = ((((((5.226_495_278_852_854_5e3 * r + 2.872_908_573_572_194_3e4) * r
            + 3.930_789_580_009_271e4)
            * r
            + 2.121_379_430_158_659_7e4)
            * r
            + 5.394_196_021_424_751e3)
            * r
            + 6.871_870_074_920_579e2)
            * r
            + 4.231_333_070_160_091e1)
            * r
            + 1.0;
        return q * num / den;
    }
    let tail = if q < 0.0 { p } else { 1.0 - p };
    let mut r = (-tail.ln()).sqrt();
    let value = if r <= 5.0 {
        r -= 1.6;
        let num = ((((((7.745_450_142_783_414e-4 * r + 2.272_384_498_926_918_4e-2) * r
            + 2.417_807_251_774_506e-1)
            * r
            + 1.270_458_252_452_368_4)
            * r
            + 3.647_848_324_763_204_5)
            * r
            + 5.769_497_221_460_691)
            * r
            + 4.630_337_846_156_546)
            * r
            + 1.423_437_110_749_683_5;
        let den = ((((((1.050_750_071_644_416_9e-9 * r + 5.475_938_084_995_345e-4) * r
            + 1.519_866_656_361_645_7e-2)
            * r
            + 1.481_039_764_274_800_8e-1)
            * r
            + 6.897_673_349_851e-1)
            * r
            + 1.676_384_830_183_803_8)
            * r
            + 2.053_191_626_637_759)
            * r
            + 1.0;
        num / den
    } else {
        r -= 5.0;
        let num = ((((((2.010_334_399_292_288_1e-7 * r + 2.711_555_568_743_487_6e-5) * r
            + 1.242_660_947_388_078_4e-3)
            * r
            + 2.653_218_952_657_612_4e-2)
            * r
            + 2.965_605_718_285_048_7e-1)
            * r
            + 1.784_826_539_917_291_3)
            * r
            + 5.463_784_911_164_114)
            * r
            + 6.657_904_643_501_103;
        let den = ((((((2.044_263_103_389_939_7e-15 * r + 1.421_511_758_316_445_9e-7) * r
            + 1.846_318_317_510_054_8e-5)
            * r
            + 7.868_691_311_456_133e-4)
            * r
            + 1.487_536_129_085_061_5e-2)
            * r
            + 1.369_298_809_227_358e-1)
            * r
            + 5.998_322_065_558_88e-1)
            * r
            + 1.0;
        num / den
    };
    if q < 0.0 {
        -value
    } else {
        value
    }
}
