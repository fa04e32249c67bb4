use serde::{Deserialize, Serialize};

use crate::codes::{message_chains, ParityCheckMatrix};
use crate::error::{Error, Result};
use crate::mapper::Mapping;

/// Cycles between the last input of a check and its first output.
pub const DEFAULT_PE_DELAY: u64 = 4;

/// One `L(q_j)` transfer per iteration between consecutive checks of the
/// chain of variable `var`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Message {
    pub var: usize,
    pub src_check: usize,
    pub dst_check: usize,
    /// Index of `var` in `N(dst_check)`.
    pub dst_position: usize,
    pub src_pe: usize,
    pub dst_pe: usize,
    /// Last-to-first transfer; consumed in the following iteration.
    pub wrap: bool,
}

impl Message {
    /// Source and destination share a PE; the value never enters the network.
    pub fn bypass(&self) -> bool {
        self.src_pe == self.dst_pe
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScheduledCheck {
    pub row: usize,
    pub degree: usize,
    /// Wrap messages feeding this check, in `N(m)` order.
    pub wrap_inputs: Vec<usize>,
    /// Inputs produced during the same iteration.
    pub needed: usize,
    /// Outgoing message per position of `N(m)`.
    pub out: Vec<usize>,
}

impl ScheduledCheck {
    /// Values received per iteration, `|N(m)|`.
    pub fn receive_count(&self) -> usize {
        self.wrap_inputs.len() + self.needed
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InjectionSchedule {
    pub n_pe: usize,
    pub pe_delay: u64,
    /// Largest row degree, the block size of the PE memories.
    pub n_d: usize,
    pub messages: Vec<Message>,
    /// Checks of every PE in serving order.
    pub pes: Vec<Vec<ScheduledCheck>>,
    /// `(pe, serving position)` of every row.
    pub location: Vec<(usize, usize)>,
}

impl InjectionSchedule {
    pub fn network_messages(&self) -> usize {
        self.messages.iter().filter(|m| !m.bypass()).count()
    }

    /// Largest number of checks served by one PE.
    pub fn n_pc(&self) -> usize {
        self.pes.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn with_pe_delay(mut self, delay: u64) -> Self {
        self.pe_delay = delay;
        self
    }
}

/// Builds the per-iteration message set of the chain model: for every
/// variable with checks `c_1..c_d` in (layer, row) order, `c_t` sends to
/// `c_{t+1}` and `c_d` sends to `c_1` for the next iteration. A variable of
/// degree one loops back to its only check.
pub fn build_schedule(h: &ParityCheckMatrix, mapping: &Mapping) -> Result<InjectionSchedule> {
    mapping.validate(h)?;
    let chains = message_chains(h)?;
    let mut location = vec![(usize::MAX, usize::MAX); h.n_rows()];
    for (pe, list) in mapping.order.iter().enumerate() {
        for (pos, &m) in list.iter().enumerate() {
            location[m] = (pe, pos);
        }
    }
    let position_in = |m: usize, j: usize| -> Result<usize> {
        h.row(m)
            .binary_search(&j)
            .map_err(|_| Error::Integrity(format!("variable {j} missing from row {m}")))
    };

    let mut messages = Vec::with_capacity(h.nnz());
    let mut out: Vec<Vec<usize>> = h.rows().iter().map(|r| vec![usize::MAX; r.len()]).collect();
    let mut wraps: Vec<Vec<(usize, usize)>> = vec![Vec::new(); h.n_rows()];
    let mut needed = vec![0usize; h.n_rows()];
    for (j, chain) in chains.iter().enumerate() {
        let d = chain.len();
        for t in 0..d {
            let (src, dst) = (chain[t], chain[(t + 1) % d]);
            let id = messages.len();
            let wrap = t + 1 == d;
            let dst_position = position_in(dst, j)?;
            messages.push(Message {
                var: j,
                src_check: src,
                dst_check: dst,
                dst_position,
                src_pe: location[src].0,
                dst_pe: location[dst].0,
                wrap,
            });
            out[src][position_in(src, j)?] = id;
            if wrap {
                wraps[dst].push((dst_position, id));
            } else {
                needed[dst] += 1;
            }
        }
    }

    let mut pes = Vec::with_capacity(mapping.p);
    for list in &mapping.order {
        let mut checks = Vec::with_capacity(list.len());
        for &m in list {
            let mut w = std::mem::take(&mut wraps[m]);
            w.sort_unstable();
            checks.push(ScheduledCheck {
                row: m,
                degree: h.row(m).len(),
                wrap_inputs: w.into_iter().map(|(_, id)| id).collect(),
                needed: needed[m],
                out: std::mem::take(&mut out[m]),
            });
        }
        pes.push(checks);
    }
    Ok(InjectionSchedule {
        n_pe: mapping.p,
        pe_delay: DEFAULT_PE_DELAY,
        n_d: h.max_row_degree(),
        messages,
        pes,
        location,
    })
}
