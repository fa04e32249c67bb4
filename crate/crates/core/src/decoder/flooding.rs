use std::fmt::Debug;

use num_traits::Float;

use super::{syndrome_zero, DecodeParams, DecodeResult, FrameDecoder, FrameOutcome};
use crate::codes::ParityCheckMatrix;
use crate::error::{Error, Result};

/// Smallest magnitude fed to [`psi`].
pub const PSI_EPSILON: f64 = 1e-12;

/// `Ψ(x) = −ln tanh(|x|/2)`, its own inverse on `(0, ∞)`.
pub fn psi(x: f64) -> f64 {
    let x = x.abs().max(PSI_EPSILON);
    -(x * 0.5).tanh().ln()
}

/// Two-phase sum-product over the whole graph per iteration.
///
/// Messages are stored in `T`; the check-node sums are accumulated in `f64`.
pub struct FloodingDecoder<'h, T> {
    h: &'h ParityCheckMatrix,
    params: DecodeParams,
    offsets: Vec<usize>,
    _value: std::marker::PhantomData<T>,
}

impl<'h, T: Float + Debug + Send + Sync> FloodingDecoder<'h, T> {
    pub fn new(h: &'h ParityCheckMatrix, params: DecodeParams) -> Result<Self> {
        params.validate()?;
        let mut offsets = Vec::with_capacity(h.n_rows() + 1);
        offsets.push(0);
        for row in h.rows() {
            offsets.push(offsets.last().unwrap() + row.len());
        }
        Ok(Self {
            h,
            params,
            offsets,
            _value: std::marker::PhantomData,
        })
    }

    pub fn decode(&self, channel_llrs: &[f64]) -> Result<DecodeResult<T>> {
        let h = self.h;
        let n = h.n_cols();
        if channel_llrs.len() != n {
            return Err(Error::Dimension {
                expected: n,
                got: channel_llrs.len(),
            });
        }
        let cast = |x: f64| T::from(x).unwrap_or_else(T::nan);
        let channel: Vec<T> = channel_llrs.iter().map(|&x| cast(x)).collect();
        let mut r = vec![T::zero(); *self.offsets.last().unwrap()];
        let mut total = channel.clone();
        let mut q = Vec::with_capacity(h.max_row_degree());
        let mut bits = vec![0u8; n];
        let mut iterations = 0;
        let mut converged = false;

        for it in 1..=self.params.it_max {
            for (m, row) in h.rows().iter().enumerate() {
                let edges = &mut r[self.offsets[m]..self.offsets[m + 1]];
                q.clear();
                let mut sum = 0.0;
                let mut parity = false;
                for (&j, &rv) in row.iter().zip(edges.iter()) {
                    let v = (total[j] - rv).to_f64().unwrap_or(f64::NAN);
                    sum += psi(v);
                    parity ^= v < 0.0;
                    q.push(v);
                }
                for (e, &v) in edges.iter_mut().zip(&q) {
                    let mag = psi(sum - psi(v));
                    let negative = parity ^ (v < 0.0);
                    *e = cast(if negative { -mag } else { mag });
                }
            }
            total.copy_from_slice(&channel);
            for (m, row) in h.rows().iter().enumerate() {
                for (&j, &rv) in row.iter().zip(&r[self.offsets[m]..self.offsets[m + 1]]) {
                    total[j] = total[j] + rv;
                }
            }
            iterations = it;
            for (b, &l) in bits.iter_mut().zip(&total) {
                *b = u8::from(l < T::zero());
            }
            converged = syndrome_zero(h, &bits);
            if converged && self.params.early_stop {
                break;
            }
        }
        Ok(DecodeResult {
            hard_bits: bits,
            iterations_run: iterations,
            converged,
            final_llrs: total,
        })
    }
}

impl<T: Float + Debug + Send + Sync> FrameDecoder for FloodingDecoder<'_, T> {
    fn decode_frame(&self, channel_llrs: &[f64]) -> Result<FrameOutcome> {
        self.decode(channel_llrs).map(FrameOutcome::from)
    }

    fn code(&self) -> &ParityCheckMatrix {
        self.h
    }
}
