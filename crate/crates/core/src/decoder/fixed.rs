//! Saturating fixed-point LLRs in `n_m` format.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Word format: `bits` total (two's complement) with `frac` fractional bits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct QFormat {
    bits: u8,
    frac: u8,
}

/// A quantized LLR, stored as its integer code. The scale `2^-frac` lives in
/// the [`QFormat`] that produced it.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct QLlr(i32);

impl QLlr {
    pub const ZERO: QLlr = QLlr(0);

    pub fn raw(self) -> i32 {
        self.0
    }

    pub fn is_negative(self) -> bool {
        self.0 < 0
    }
}

impl QFormat {
    /// The format used throughout the decoder unless configured otherwise.
    pub const DEFAULT: QFormat = QFormat { bits: 8, frac: 1 };

    pub fn new(bits: u8, frac: u8) -> Result<Self> {
        if !(2..=24).contains(&bits) {
            return Err(Error::InvalidParam(format!(
                "fixed-point width {bits} outside 2..=24"
            )));
        }
        if frac >= bits {
            return Err(Error::InvalidParam(format!(
                "{frac} fractional bits do not fit a {bits}-bit word"
            )));
        }
        Ok(Self { bits, frac })
    }

    pub fn bits(self) -> u8 {
        self.bits
    }

    pub fn frac(self) -> u8 {
        self.frac
    }

    pub fn max_raw(self) -> i32 {
        (1i32 << (self.bits - 1)) - 1
    }

    pub fn min_raw(self) -> i32 {
        -(1i32 << (self.bits - 1))
    }

    /// Value of one least significant bit.
    pub fn lsb(self) -> f64 {
        1.0 / f64::from(1u32 << self.frac)
    }

    pub fn max_value(self) -> f64 {
        f64::from(self.max_raw()) * self.lsb()
    }

    pub fn min_value(self) -> f64 {
        f64::from(self.min_raw()) * self.lsb()
    }

    fn clamp(self, raw: i64) -> QLlr {
        QLlr(raw.clamp(i64::from(self.min_raw()), i64::from(self.max_raw())) as i32)
    }

    /// Nearest code (ties away from zero), saturated to the format range.
    pub fn quantize(self, x: f64) -> QLlr {
        let scaled = (x * f64::from(1u32 << self.frac)).round();
        if scaled >= f64::from(self.max_raw()) {
            QLlr(self.max_raw())
        } else if scaled <= f64::from(self.min_raw()) {
            QLlr(self.min_raw())
        } else {
            QLlr(scaled as i32)
        }
    }

    pub fn from_raw(self, raw: i64) -> QLlr {
        self.clamp(raw)
    }

    pub fn to_f64(self, v: QLlr) -> f64 {
        f64::from(v.0) * self.lsb()
    }

    pub fn add(self, a: QLlr, b: QLlr) -> QLlr {
        self.clamp(i64::from(a.0) + i64::from(b.0))
    }

    pub fn sub(self, a: QLlr, b: QLlr) -> QLlr {
        self.clamp(i64::from(a.0) - i64::from(b.0))
    }

    pub fn neg(self, a: QLlr) -> QLlr {
        self.clamp(-i64::from(a.0))
    }

    /// Magnitude; the most negative code saturates to the largest positive one.
    pub fn abs(self, a: QLlr) -> QLlr {
        self.clamp(i64::from(a.0).abs())
    }

    /// `a * factor` re-quantized to this format.
    pub fn scale(self, a: QLlr, factor: f64) -> QLlr {
        self.quantize(self.to_f64(a) * factor)
    }
}

impl Default for QFormat {
    fn default() -> Self {
        Self::DEFAULT
    }
}

impl fmt::Display for QFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}_{}", self.bits, self.frac)
    }
}

impl FromStr for QFormat {
    type Err = Error;

    /// Parses the `n_m` notation, e.g. `8_1`.
    fn from_str(s: &str) -> Result<Self> {
        let (n, m) = s
            .split_once('_')
            .ok_or_else(|| Error::InvalidParam(format!("format '{s}' is not of the form n_m")))?;
        let parse = |t: &str| {
            t.trim()
                .parse::<u8>()
                .map_err(|_| Error::InvalidParam(format!("format '{s}' is not of the form n_m")))
        };
        Self::new(parse(n)?, parse(m)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q81() -> QFormat {
        QFormat::new(8, 1).unwrap()
    }

    #[test]
    fn quantize_examples() {
        let f = q81();
        assert_eq!(f.quantize(0.0), QLlr(0));
        assert_eq!(f.quantize(3.7), QLlr(7));
        assert_eq!(f.to_f64(f.quantize(3.7)), 3.5);
        assert_eq!(f.quantize(1000.0), QLlr(127));
        assert_eq!(f.to_f64(f.quantize(1000.0)), 63.5);
        assert_eq!(f.quantize(-1000.0), QLlr(-128));
        // ties away from zero
        assert_eq!(f.quantize(0.25), QLlr(1));
        assert_eq!(f.quantize(-0.25), QLlr(-1));
    }

    #[test]
    fn range_of_8_1() {
        let f = q81();
        assert_eq!(f.max_value(), 63.5);
        assert_eq!(f.min_value(), -64.0);
    }

    #[test]
    fn abs_and_neg_saturate() {
        let f = q81();
        assert_eq!(f.abs(QLlr(-128)), QLlr(127));
        assert_eq!(f.neg(QLlr(-128)), QLlr(127));
        assert_eq!(f.neg(QLlr(5)), QLlr(-5));
    }

    #[test]
    fn parse_notation() {
        assert_eq!("9_2".parse::<QFormat>().unwrap(), QFormat::new(9, 2).unwrap());
        assert_eq!(q81().to_string(), "8_1");
        assert!("8".parse::<QFormat>().is_err());
        assert!("4_4".parse::<QFormat>().is_err());
        assert!("1_0".parse::<QFormat>().is_err());
    }

    proptest! {
        #[test]
        fn saturating_ops_stay_in_range(a in -128i64..128, b in -128i64..128, bits in 3u8..12) {
            let f = QFormat::new(bits, 1).unwrap();
            let (a, b) = (f.from_raw(a), f.from_raw(b));
            for r in [f.add(a, b), f.sub(a, b), f.neg(a), f.abs(a)] {
                prop_assert!(r.raw() <= f.max_raw() && r.raw() >= f.min_raw());
            }
            // no wraparound: the sign of a saturated sum follows the exact sum
            let exact = i64::from(a.raw()) + i64::from(b.raw());
            let s = f.add(a, b).raw();
            prop_assert!(exact.signum() == i64::from(s).signum() || s == 0);
        }

        #[test]
        fn quantize_is_nearest(x in -80.0f64..80.0) {
            let f = q81();
            let q = f.to_f64(f.quantize(x));
            if x > f.min_value() && x < f.max_value() {
                prop_assert!((q - x).abs() <= 0.25 + 1e-12);
            }
        }
    }
}
