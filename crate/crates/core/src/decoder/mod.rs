//! Golden-model decoders: fixed-point layered normalized min-sum and a
//! floating-point flooding sum-product reference.

pub mod arith;
pub mod fixed;
mod flooding;
mod layered;

pub use arith::{FixedPoint, FloatingPoint, LlrArithmetic};
pub use fixed::{QFormat, QLlr};
pub use flooding::{psi, FloodingDecoder, PSI_EPSILON};
pub use layered::{check_update, layer_update, min2, CheckState, LayeredDecoder};

use serde::{Deserialize, Serialize};

use crate::codes::ParityCheckMatrix;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecodeParams {
    /// Normalization factor, `>= 1`.
    pub alpha: f64,
    pub it_max: u32,
    pub format: QFormat,
    pub early_stop: bool,
}

impl Default for DecodeParams {
    fn default() -> Self {
        Self {
            alpha: 1.15,
            it_max: 10,
            format: QFormat::DEFAULT,
            early_stop: true,
        }
    }
}

impl DecodeParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha >= 1.0 && self.alpha.is_finite()) {
            return Err(Error::InvalidParam(format!(
                "normalization factor {} must be >= 1",
                self.alpha
            )));
        }
        if self.it_max == 0 {
            return Err(Error::InvalidParam("it_max must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecodeResult<V> {
    pub hard_bits: Vec<u8>,
    pub iterations_run: u32,
    /// Syndrome of `hard_bits` is zero.
    pub converged: bool,
    pub final_llrs: Vec<V>,
}

/// True iff every row of `h` has even parity over `bits`.
pub fn syndrome_check(h: &ParityCheckMatrix, bits: &[u8]) -> Result<bool> {
    if bits.len() != h.n_cols() {
        return Err(Error::Dimension {
            expected: h.n_cols(),
            got: bits.len(),
        });
    }
    Ok(syndrome_zero(h, bits))
}

pub(crate) fn syndrome_zero(h: &ParityCheckMatrix, bits: &[u8]) -> bool {
    h.rows()
        .iter()
        .all(|row| row.iter().fold(0u8, |acc, &j| acc ^ (bits[j] & 1)) == 0)
}

/// Fixed-point layered normalized min-sum with the format and alpha from
/// `params`.
pub fn decode_layered_nms(
    h: &ParityCheckMatrix,
    channel_llrs: &[f64],
    params: &DecodeParams,
) -> Result<DecodeResult<QLlr>> {
    let arith = FixedPoint::new(params.format, params.alpha)?;
    LayeredDecoder::new(h, arith, *params)?.decode(channel_llrs)
}

/// Double-precision flooding sum-product.
pub fn decode_flooding_spa(
    h: &ParityCheckMatrix,
    channel_llrs: &[f64],
    params: &DecodeParams,
) -> Result<DecodeResult<f64>> {
    FloodingDecoder::<f64>::new(h, *params)?.decode(channel_llrs)
}

/// Frame-level decoding interface used by the Monte Carlo harness.
pub trait FrameDecoder: Sync {
    fn decode_frame(&self, channel_llrs: &[f64]) -> Result<FrameOutcome>;
    fn code(&self) -> &ParityCheckMatrix;
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FrameOutcome {
    pub hard_bits: Vec<u8>,
    pub iterations: u32,
    pub converged: bool,
}

impl<V> From<DecodeResult<V>> for FrameOutcome {
    fn from(r: DecodeResult<V>) -> Self {
        Self {
            hard_bits: r.hard_bits,
            iterations: r.iterations_run,
            converged: r.converged,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn toy() -> ParityCheckMatrix {
        ParityCheckMatrix::new(6, vec![vec![0, 1, 3], vec![1, 2, 4], vec![0, 2, 5]], "toy")
            .unwrap()
            .with_greedy_layers()
    }

    #[test]
    fn syndrome_examples() {
        let h = toy();
        assert!(syndrome_check(&h, &[0; 6]).unwrap());
        assert!(!syndrome_check(&h, &[0, 0, 0, 1, 0, 0]).unwrap());
        assert!(syndrome_check(&h, &[0; 5]).is_err());
    }

    #[test]
    fn syndrome_matches_dense_oracle() {
        let h = crate::codes::random_code(40, 20, 6, 4).unwrap();
        let mut dense = vec![vec![0u8; 40]; 20];
        for (m, row) in h.rows().iter().enumerate() {
            for &j in row {
                dense[m][j] = 1;
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let bits: Vec<u8> = (0..40).map(|_| rng.random_range(0..2)).collect();
            let oracle = dense
                .iter()
                .all(|r| r.iter().zip(&bits).map(|(a, b)| a * b).sum::<u8>() % 2 == 0);
            assert_eq!(syndrome_check(&h, &bits).unwrap(), oracle);
        }
    }

    #[test]
    fn params_validation() {
        let mut p = DecodeParams::default();
        assert!(p.validate().is_ok());
        p.it_max = 0;
        assert!(p.validate().is_err());
        p.it_max = 1;
        p.alpha = 0.5;
        assert!(p.validate().is_err());
    }
}
