use super::arith::LlrArithmetic;
use super::{syndrome_zero, DecodeParams, DecodeResult, FrameDecoder, FrameOutcome};
use crate::codes::ParityCheckMatrix;
use crate::error::{Error, Result};

/// First minimum, its index and the minimum over the remaining positions.
/// Ties on the first minimum resolve to the lowest index, which makes the
/// second minimum equal to the first.
pub fn min2<V: Copy + PartialOrd>(values: &[V]) -> Result<(V, usize, V)> {
    if values.len() < 2 {
        return Err(Error::InvalidParam(format!(
            "two-minimum search needs at least 2 values, got {}",
            values.len()
        )));
    }
    let (mut m1, mut t, mut m2) = if values[1] < values[0] {
        (values[1], 1, values[0])
    } else {
        (values[0], 0, values[1])
    };
    for (i, &v) in values.iter().enumerate().skip(2) {
        if v < m1 {
            m2 = m1;
            m1 = v;
            t = i;
        } else if v < m2 {
            m2 = v;
        }
    }
    Ok((m1, t, m2))
}

/// One normalized min-sum check-node update.
///
/// `lq` holds `L(q_j)` for the check's variables and is overwritten with
/// `L(q_j^new)`; `r` holds `R_mj^old` and is overwritten with `R_mj^new`.
/// `scratch` is caller-provided working storage.
///
/// `R_mj^new` carries the product of the other positions' signs, so a
/// negative extrinsic sum pushes bit `j` towards 1.
pub fn check_update<A: LlrArithmetic>(
    arith: &A,
    lq: &mut [A::Value],
    r: &mut [A::Value],
    scratch: &mut Vec<A::Value>,
) -> Result<()> {
    debug_assert_eq!(lq.len(), r.len());
    scratch.clear();
    let mut parity = false;
    for (l, &rv) in lq.iter_mut().zip(r.iter()) {
        let q = arith.sub(*l, rv);
        parity ^= arith.is_negative(q);
        *l = q;
        scratch.push(arith.magnitude(q));
    }
    let (m1, t, m2) = min2(scratch)?;
    let norm1 = arith.normalize(m1);
    let norm2 = arith.normalize(m2);
    for (pos, (l, rv)) in lq.iter_mut().zip(r.iter_mut()).enumerate() {
        let negative = parity ^ arith.is_negative(*l);
        let mag = if pos == t { norm2 } else { norm1 };
        let new_r = arith.with_sign(mag, negative);
        *rv = new_r;
        *l = arith.add(*l, new_r);
    }
    Ok(())
}

/// Decoder state: one `R_mj` per edge, indexed by (row, position in `N(m)`),
/// and the current `L(q_j)` per variable.
#[derive(Clone, Debug, PartialEq)]
pub struct CheckState<V> {
    offsets: Vec<usize>,
    pub r: Vec<V>,
    pub lq: Vec<V>,
    gather: Vec<V>,
    gather_r: Vec<V>,
    scratch: Vec<V>,
}

impl<V: Copy> CheckState<V> {
    pub fn new(h: &ParityCheckMatrix, lq: Vec<V>, zero: V) -> Self {
        let mut offsets = Vec::with_capacity(h.n_rows() + 1);
        let mut acc = 0;
        offsets.push(0);
        for row in h.rows() {
            acc += row.len();
            offsets.push(acc);
        }
        let nd = h.max_row_degree();
        Self {
            offsets,
            r: vec![zero; acc],
            lq,
            gather: Vec::with_capacity(nd),
            gather_r: Vec::with_capacity(nd),
            scratch: Vec::with_capacity(nd),
        }
    }

    pub fn r_row(&self, m: usize) -> &[V] {
        &self.r[self.offsets[m]..self.offsets[m + 1]]
    }
}

/// Applies the check update to every row of one layer, in place.
pub fn layer_update<A: LlrArithmetic>(
    h: &ParityCheckMatrix,
    rows: &[usize],
    state: &mut CheckState<A::Value>,
    arith: &A,
) -> Result<()> {
    for &m in rows {
        let vars = h.row(m);
        let (lo, hi) = (state.offsets[m], state.offsets[m + 1]);
        state.gather.clear();
        state.gather.extend(vars.iter().map(|&j| state.lq[j]));
        state.gather_r.clear();
        state.gather_r.extend_from_slice(&state.r[lo..hi]);
        check_update(arith, &mut state.gather, &mut state.gather_r, &mut state.scratch)?;
        state.r[lo..hi].copy_from_slice(&state.gather_r);
        for (&j, &v) in vars.iter().zip(state.gather.iter()) {
            state.lq[j] = v;
        }
    }
    Ok(())
}

/// Layered normalized min-sum over a layered matrix.
pub struct LayeredDecoder<'h, A> {
    h: &'h ParityCheckMatrix,
    arith: A,
    params: DecodeParams,
}

impl<'h, A: LlrArithmetic> LayeredDecoder<'h, A> {
    pub fn new(h: &'h ParityCheckMatrix, arith: A, params: DecodeParams) -> Result<Self> {
        params.validate()?;
        h.require_layers()?;
        if let Some(m) = h.rows().iter().position(|r| r.len() < 2) {
            return Err(Error::InvalidCode(format!(
                "row {m} has degree below 2; min-sum needs two inputs per check"
            )));
        }
        Ok(Self { h, arith, params })
    }

    pub fn arith(&self) -> &A {
        &self.arith
    }

    pub fn params(&self) -> &DecodeParams {
        &self.params
    }

    pub fn decode(&self, channel_llrs: &[f64]) -> Result<DecodeResult<A::Value>> {
        let h = self.h;
        if channel_llrs.len() != h.n_cols() {
            return Err(Error::Dimension {
                expected: h.n_cols(),
                got: channel_llrs.len(),
            });
        }
        let lq = channel_llrs
            .iter()
            .map(|&x| self.arith.from_channel(x))
            .collect();
        let mut state = CheckState::new(h, lq, self.arith.zero());
        let layers = h.require_layers()?;
        let mut bits = vec![0u8; h.n_cols()];
        let mut iterations = 0;
        let mut converged = false;
        for it in 1..=self.params.it_max {
            for layer in layers {
                layer_update(h, layer, &mut state, &self.arith)?;
            }
            iterations = it;
            self.hard_decide(&state.lq, &mut bits);
            converged = syndrome_zero(h, &bits);
            if converged && self.params.early_stop {
                break;
            }
        }
        Ok(DecodeResult {
            hard_bits: bits,
            iterations_run: iterations,
            converged,
            final_llrs: state.lq,
        })
    }

    fn hard_decide(&self, lq: &[A::Value], bits: &mut [u8]) {
        for (b, &l) in bits.iter_mut().zip(lq) {
            *b = u8::from(self.arith.is_negative(l));
        }
    }
}

impl<A: LlrArithmetic> FrameDecoder for LayeredDecoder<'_, A> {
    fn decode_frame(&self, channel_llrs: &[f64]) -> Result<FrameOutcome> {
        self.decode(channel_llrs).map(FrameOutcome::from)
    }

    fn code(&self) -> &ParityCheckMatrix {
        self.h
    }
}
