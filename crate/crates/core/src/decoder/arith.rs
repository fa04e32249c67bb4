//! Message arithmetic used by the min-sum check update.
//!
//! The layered decoder is written once against [`LlrArithmetic`]; the
//! saturating fixed-point domain is the hardware model, the floating-point
//! domains (generic over `num_traits::Float`) serve as unquantized references.

use std::fmt::Debug;

use num_traits::Float;

use super::fixed::{QFormat, QLlr};
use crate::error::{Error, Result};

pub trait LlrArithmetic: Sync {
    type Value: Copy + Debug + PartialOrd + PartialEq + Send + Sync;

    fn zero(&self) -> Self::Value;
    fn from_channel(&self, llr: f64) -> Self::Value;
    fn add(&self, a: Self::Value, b: Self::Value) -> Self::Value;
    fn sub(&self, a: Self::Value, b: Self::Value) -> Self::Value;
    fn magnitude(&self, a: Self::Value) -> Self::Value;
    fn is_negative(&self, a: Self::Value) -> bool;
    /// Applies a sign to a non-negative magnitude.
    fn with_sign(&self, magnitude: Self::Value, negative: bool) -> Self::Value;
    /// Normalization of a magnitude by `1/alpha`.
    fn normalize(&self, magnitude: Self::Value) -> Self::Value;
    fn to_f64(&self, a: Self::Value) -> f64;
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha >= 1.0 && alpha.is_finite()) {
        return Err(Error::InvalidParam(format!(
            "normalization factor {alpha} must be a finite value >= 1"
        )));
    }
    Ok(())
}

/// Saturating `n_m` arithmetic; division by alpha is a multiply by the
/// double-precision reciprocal followed by re-quantization.
#[derive(Clone, Copy, Debug)]
pub struct FixedPoint {
    format: QFormat,
    inv_alpha: f64,
    unit_alpha: bool,
}

impl FixedPoint {
    pub fn new(format: QFormat, alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        Ok(Self {
            format,
            inv_alpha: 1.0 / alpha,
            unit_alpha: alpha == 1.0,
        })
    }

    pub fn format(&self) -> QFormat {
        self.format
    }
}

impl LlrArithmetic for FixedPoint {
    type Value = QLlr;

    fn zero(&self) -> QLlr {
        QLlr::ZERO
    }

    fn from_channel(&self, llr: f64) -> QLlr {
        self.format.quantize(llr)
    }

    #[inline]
    fn add(&self, a: QLlr, b: QLlr) -> QLlr {
        self.format.add(a, b)
    }

    #[inline]
    fn sub(&self, a: QLlr, b: QLlr) -> QLlr {
        self.format.sub(a, b)
    }

    #[inline]
    fn magnitude(&self, a: QLlr) -> QLlr {
        self.format.abs(a)
    }

    #[inline]
    fn is_negative(&self, a: QLlr) -> bool {
        a.is_negative()
    }

    #[inline]
    fn with_sign(&self, magnitude: QLlr, negative: bool) -> QLlr {
        if negative {
            self.format.neg(magnitude)
        } else {
            magnitude
        }
    }

    #[inline]
    fn normalize(&self, magnitude: QLlr) -> QLlr {
        if self.unit_alpha {
            magnitude
        } else {
            self.format.scale(magnitude, self.inv_alpha)
        }
    }

    fn to_f64(&self, a: QLlr) -> f64 {
        self.format.to_f64(a)
    }
}

/// Unquantized arithmetic in any `Float` type.
#[derive(Clone, Copy, Debug)]
pub struct FloatingPoint<T> {
    inv_alpha: T,
}

impl<T: Float> FloatingPoint<T> {
    pub fn new(alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        let inv = T::from(1.0 / alpha)
            .ok_or_else(|| Error::InvalidParam("alpha not representable".into()))?;
        Ok(Self { inv_alpha: inv })
    }
}

impl<T> LlrArithmetic for FloatingPoint<T>
where
    T: Float + Debug + Send + Sync,
{
    type Value = T;

    fn zero(&self) -> T {
        T::zero()
    }

    fn from_channel(&self, llr: f64) -> T {
        T::from(llr).unwrap_or_else(T::nan)
    }

    #[inline]
    fn add(&self, a: T, b: T) -> T {
        a + b
    }

    #[inline]
    fn sub(&self, a: T, b: T) -> T {
        a - b
    }

    #[inline]
    fn magnitude(&self, a: T) -> T {
        a.abs()
    }

    #[inline]
    fn is_negative(&self, a: T) -> bool {
        a < T::zero()
    }

    #[inline]
    fn with_sign(&self, magnitude: T, negative: bool) -> T {
        if negative {
            -magnitude
        } else {
            magnitude
        }
    }

    #[inline]
    fn normalize(&self, magnitude: T) -> T {
        magnitude * self.inv_alpha
    }

    fn to_f64(&self, a: T) -> f64 {
        a.to_f64().unwrap_or(f64::NAN)
    }
}
