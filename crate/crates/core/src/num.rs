//! Scalar abstraction shared by the information-theoretic and thermodynamic formulas.
//!
//! Formulas that only need field arithmetic (cost sums, amortization) are generic over
//! [`num_traits::Num`] so they also run on exact rationals; anything involving logarithms
//! or physical constants requires a [`Scalar`].

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive};

/// Floating point type usable in every formula of the crate: `f32` or `f64`.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts an `f64` literal, rounding to the nearest representable value.
    fn lit(x: f64) -> Self;

    /// Converts an unsigned count.
    fn from_count(n: u64) -> Self {
        Self::lit(n as f64)
    }
}

macro_rules! impl_scalar {
    ($f:ty) => {
        impl Scalar for $f {
            #[inline]
            fn lit(x: f64) -> Self {
                x as $f
            }
        }
    };
}

impl_scalar!(f32);
impl_scalar!(f64);

/// Unit in which an information quantity is expressed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InfoUnit {
    Bits,
    Nats,
}

impl InfoUnit {
    pub fn label(self) -> &'static str {
        match self {
            InfoUnit::Bits => "bits",
            InfoUnit::Nats => "nats",
        }
    }
}

#[inline]
pub fn bits_to_nats<S: Scalar>(bits: S) -> S {
    bits * S::LN_2()
}

#[inline]
pub fn nats_to_bits<S: Scalar>(nats: S) -> S {
    nats / S::LN_2()
}

/// Re-expresses `value`, given in `from`, in unit `to`.
pub fn convert<S: Scalar>(value: S, from: InfoUnit, to: InfoUnit) -> S {
    match (from, to) {
        (InfoUnit::Bits, InfoUnit::Nats) => bits_to_nats(value),
        (InfoUnit::Nats, InfoUnit::Bits) => nats_to_bits(value),
        _ => value,
    }
}

/// Portable 64-bit mixer (SplitMix64 finalizer). Used for fingerprints and seeded
/// per-item draws that must not depend on the platform's hasher.
#[inline]
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Maps a 64-bit word to a uniform draw in `[0, 1)` using the top 53 bits.
#[inline]
pub fn unit_interval(word: u64) -> f64 {
    (word >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}
