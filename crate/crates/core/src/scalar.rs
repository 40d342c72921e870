use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumCast};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Floating point element type used for geometry, heights and embeddings: f32 or f64.
pub trait Scalar:
    Float
    + FromPrimitive
    + NumCast
    + Default
    + Debug
    + Display
    + Sum
    + Send
    + Sync
    + Serialize
    + DeserializeOwned
    + 'static
{
    /// Tag written into binary files so readers can reject a mismatched element type.
    const DTYPE: ElementType;

    fn from_f64_lossy(v: f64) -> Self {
        Self::from_f64(v).unwrap_or_else(Self::nan)
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Widens via the shortest decimal that round-trips, so an `f32` read from `0.05`
    /// becomes `0.05` rather than `0.0500000007…`.
    fn to_f64_decimal(self) -> f64 {
        self.to_string().parse().unwrap_or_else(|_| self.to_f64_lossy())
    }
}

impl Scalar for f32 {
    const DTYPE: ElementType = ElementType::F32;
}

impl Scalar for f64 {
    const DTYPE: ElementType = ElementType::F64;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, serde::Deserialize)]
#[repr(u32)]
pub enum ElementType {
    F32 = 1,
    F64 = 2,
}

impl ElementType {
    pub fn code(self) -> u32 {
        self as u32
    }

    pub fn from_code(code: u32) -> Option<Self> {
        match code {
            1 => Some(ElementType::F32),
            2 => Some(ElementType::F64),
            _ => None,
        }
    }
}
