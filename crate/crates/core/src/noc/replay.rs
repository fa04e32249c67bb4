//! Decoding driven only by a configuration image.
//!
//! Routers follow their routing-memory words, PEs write through their
//! write-address sequences and serve checks in the configured order. The
//! cycle structure is the one of [`simulate_iteration`](super::simulate_iteration),
//! so a correct image reproduces the golden layered decoder bit for bit.

use std::collections::VecDeque;

use super::topology::{Port, Topology, PORTS};
use super::NocTrace;
use crate::codes::ParityCheckMatrix;
use crate::config::{encode_rm, CheckEntry, ConfigImage};
use crate::decoder::{check_update, syndrome_check, DecodeParams, DecodeResult, FixedPoint, LlrArithmetic, QLlr};
use crate::error::{Error, Result};
use crate::mapper::Mapping;

/// A configuration checked against its trace, ready to decode frames.
pub struct Replayer<'a> {
    h: &'a ParityCheckMatrix,
    config: &'a ConfigImage,
    topo: Topology,
    arith: FixedPoint,
    params: DecodeParams,
}

impl<'a> Replayer<'a> {
    pub fn new(
        h: &'a ParityCheckMatrix,
        mapping: &Mapping,
        trace: &NocTrace,
        config: &'a ConfigImage,
        params: DecodeParams,
    ) -> Result<Self> {
        params.validate()?;
        let topo = Topology::new(config.n)?;
        if trace.digest()? != config.trace_digest {
            return Err(Error::Integrity("trace digest does not match the image".into()));
        }
        if config.n != trace.n || config.k_i != trace.k_i || config.pe_cycles != trace.pe_cycles {
            return Err(Error::Integrity("image timing differs from the trace".into()));
        }
        let rm = encode_rm(trace)?;
        if config.nodes.len() != rm.len() || config.pes.len() != rm.len() {
            return Err(Error::Integrity("image node count differs from the trace".into()));
        }
        for (node, (cfg, words)) in config.nodes.iter().zip(&rm).enumerate() {
            if let Some(c) = cfg.rm.iter().zip(words).position(|(a, b)| a != b) {
                return Err(Error::Integrity(format!(
                    "routing word of node {node} at cycle {c} differs from the trace"
                )));
            }
            if cfg.rm.len() != words.len() {
                return Err(Error::Integrity(format!("node {node} has a truncated routing memory")));
            }
        }
        if config.n_vars != h.n_cols() {
            return Err(Error::Dimension {
                expected: h.n_cols(),
                got: config.n_vars,
            });
        }
        mapping.validate(h)?;
        for (pe, (cfg, list)) in config.pes.iter().zip(&mapping.order).enumerate() {
            if cfg.checks.len() != list.len() {
                return Err(Error::Integrity(format!("PE {pe} serves a different number of checks")));
            }
            for (e, &m) in cfg.checks.iter().zip(list) {
                if e.degree as usize != h.row(m).len() || e.needed > e.degree {
                    return Err(Error::Integrity(format!("PE {pe}: entry for row {m} is inconsistent")));
                }
            }
        }
        let mut owner = vec![0u32; h.n_cols()];
        for cfg in &config.pes {
            for &(_, j) in &cfg.wrap_vars {
                owner[j as usize] += 1;
            }
        }
        let degrees = h.column_degrees();
        if let Some(j) = (0..h.n_cols()).find(|&j| owner[j] != u32::from(degrees[j] > 0)) {
            return Err(Error::Integrity(format!("variable {j} has {} wrap slots", owner[j])));
        }
        Ok(Self {
            h,
            config,
            topo,
            arith: FixedPoint::new(params.format, params.alpha)?,
            params,
        })
    }

    /// Cycles per decoding iteration.
    pub fn iteration_cycles(&self) -> u64 {
        self.config.iteration_cycles()
    }

    pub fn decode(&self, channel_llrs: &[f64]) -> Result<DecodeResult<QLlr>> {
        let h = self.h;
        if channel_llrs.len() != h.n_cols() {
            return Err(Error::Dimension {
                expected: h.n_cols(),
                got: channel_llrs.len(),
            });
        }
        let cfg = self.config;
        let block = cfg.n_pc * cfg.n_d;
        let mut mem: Vec<Vec<QLlr>> = vec![vec![QLlr::ZERO; block]; cfg.pes.len()];
        let mut rmem: Vec<Vec<QLlr>> = vec![vec![QLlr::ZERO; block]; cfg.pes.len()];
        let mut llrs: Vec<QLlr> = channel_llrs.iter().map(|&x| self.arith.from_channel(x)).collect();
        for (pe, p) in cfg.pes.iter().enumerate() {
            for &(addr, j) in &p.wrap_vars {
                mem[pe][addr as usize] = llrs[j as usize];
            }
        }
        let mut bits = vec![0u8; h.n_cols()];
        let mut iterations = 0;
        let mut converged = false;
        for it in 1..=self.params.it_max {
            self.iteration(&mut mem, &mut rmem)?;
            for (pe, p) in cfg.pes.iter().enumerate() {
                for &(addr, j) in &p.wrap_vars {
                    llrs[j as usize] = mem[pe][addr as usize];
                }
            }
            for (b, &l) in bits.iter_mut().zip(&llrs) {
                *b = u8::from(l.is_negative());
            }
            iterations = it;
            converged = syndrome_check(h, &bits)?;
            if converged && self.params.early_stop {
                break;
            }
        }
        Ok(DecodeResult {
            hard_bits: bits,
            iterations_run: iterations,
            converged,
            final_llrs: llrs,
        })
    }

    fn iteration(&self, mem: &mut [Vec<QLlr>], rmem: &mut [Vec<QLlr>]) -> Result<()> {
        let cfg = self.config;
        let nodes = self.topo.nodes();
        let local = Port::Local.index();
        let mut fifos: Vec<[VecDeque<(QLlr, u64)>; PORTS]> =
            (0..nodes).map(|_| std::array::from_fn(|_| VecDeque::new())).collect();
        let mut regs: Vec<[Option<QLlr>; PORTS]> = vec![[None; PORTS]; nodes];
        let mut inject: Vec<VecDeque<(QLlr, u64)>> = vec![VecDeque::new(); nodes];
        let mut pes: Vec<PeState> = (0..nodes).map(|_| PeState::default()).collect();
        let mut scratch = Vec::with_capacity(cfg.n_d);
        let fault = |node: usize, c: u64, what: &str| {
            Error::Integrity(format!("node {node}, cycle {c}: {what}"))
        };

        for c in 0..self.iteration_cycles() {
            let word = |node: usize| cfg.nodes[node].rm.get(c as usize).copied().unwrap_or_default();
            // 1. links
            for node in 0..nodes {
                for o in 0..4 {
                    if let Some(v) = regs[node][o].take() {
                        let port = Port::from_index(o).unwrap();
                        let nb = self.topo.neighbor(node, port);
                        let i = port.opposite().index();
                        if !word(nb).push(i) {
                            return Err(fault(nb, c, "link transfer without a push"));
                        }
                        fifos[nb][i].push_back((v, c + 1));
                    }
                }
            }
            // 2. injection
            for pe in 0..nodes {
                if let Some(&(v, eligible)) = inject[pe].front() {
                    if eligible <= c {
                        inject[pe].pop_front();
                        if !word(pe).push(local) {
                            return Err(fault(pe, c, "injection without a push"));
                        }
                        fifos[pe][local].push_back((v, c));
                    }
                }
            }
            // 3. crossbars
            for node in 0..nodes {
                let w = word(node);
                for o in 0..PORTS {
                    let Some(i) = w.select(o) else { continue };
                    if i >= PORTS {
                        return Err(fault(node, c, "input select out of range"));
                    }
                    let Some(&(v, ready)) = fifos[node][i].front() else {
                        return Err(fault(node, c, "pop from an empty FIFO"));
                    };
                    if ready > c {
                        return Err(fault(node, c, "pop of a flit not yet latched"));
                    }
                    fifos[node][i].pop_front();
                    if o == local {
                        pes[node].write(&cfg.pes[node], &mut mem[node], cfg.n_d, v, c)
                            .map_err(|e| fault(node, c, &e))?;
                    } else {
                        regs[node][o] = Some(v);
                    }
                }
            }
            // 4. PEs
            for pe in 0..nodes {
                let p = &cfg.pes[pe];
                loop {
                    let st = &mut pes[pe];
                    let Some(&entry) = p.checks.get(st.check) else { break };
                    if st.emit_start.is_none() {
                        if st.received(entry) < entry.needed as usize {
                            break;
                        }
                        let start = (st.last_input(entry) + cfg.pe_delay).max(st.prev_end);
                        st.emit_start = Some(start);
                        let span = entry.offset as usize..(entry.offset + entry.degree) as usize;
                        st.out.clear();
                        st.out.extend_from_slice(&mem[pe][span.clone()]);
                        check_update(&self.arith, &mut st.out, &mut rmem[pe][span], &mut scratch)?;
                    }
                    if st.emit_start.unwrap() + st.emitted as u64 != c {
                        break;
                    }
                    let v = st.out[st.emitted];
                    st.emitted += 1;
                    if st.emitted == entry.degree as usize {
                        st.check += 1;
                        st.emit_start = None;
                        st.emitted = 0;
                        st.prev_end = c + 1;
                    }
                    let Some(&is_local) = p.local_mask.get(st.produced) else {
                        return Err(fault(pe, c, "emission beyond the local mask"));
                    };
                    st.produced += 1;
                    if is_local {
                        st.write(p, &mut mem[pe], cfg.n_d, v, c).map_err(|e| fault(pe, c, &e))?;
                    } else {
                        inject[pe].push_back((v, c + 1));
                    }
                }
            }
        }

        for (pe, st) in pes.iter().enumerate() {
            let p = &cfg.pes[pe];
            if st.check != p.checks.len() || st.writes != p.wag.len() || !inject[pe].is_empty() {
                return Err(Error::Integrity(format!("PE {pe} did not finish its iteration")));
            }
            if fifos[pe].iter().any(|f| !f.is_empty()) || regs[pe].iter().any(Option::is_some) {
                return Err(Error::Integrity(format!("flits left at node {pe}")));
            }
        }
        Ok(())
    }
}

#[derive(Default)]
struct PeState {
    check: usize,
    emit_start: Option<u64>,
    emitted: usize,
    prev_end: u64,
    produced: usize,
    writes: usize,
    /// Per block, same-iteration writes and the cycle of the last one.
    current: Vec<(usize, u64)>,
    out: Vec<QLlr>,
}

impl PeState {
    fn received(&self, e: CheckEntry) -> usize {
        self.current.get(e.offset as usize).map_or(0, |x| x.0)
    }

    fn last_input(&self, e: CheckEntry) -> u64 {
        self.current.get(e.offset as usize).map_or(0, |x| x.1)
    }

    fn write(
        &mut self,
        p: &crate::config::PeConfig,
        mem: &mut [QLlr],
        n_d: usize,
        v: QLlr,
        c: u64,
    ) -> std::result::Result<(), String> {
        let Some(&addr) = p.wag.get(self.writes) else {
            return Err("write address sequence exhausted".into());
        };
        self.writes += 1;
        let addr = addr as usize;
        let Some(cell) = mem.get_mut(addr) else {
            return Err(format!("write address {addr} out of range"));
        };
        *cell = v;
        let base = addr - addr % n_d.max(1);
        let Some(e) = p.checks.iter().find(|e| e.offset as usize == base) else {
            return Err(format!("write address {addr} outside every block"));
        };
        if addr - base >= e.degree as usize {
            return Err(format!("write address {addr} beyond its check"));
        }
        if addr - base >= e.wraps() as usize {
            if self.current.len() <= base {
                self.current.resize(base + 1, (0, 0));
            }
            let slot = &mut self.current[base];
            slot.0 += 1;
            slot.1 = c;
        }
        Ok(())
    }
}

/// Decodes one frame on the configured network.
pub fn replay_decode(
    h: &ParityCheckMatrix,
    mapping: &Mapping,
    trace: &NocTrace,
    config: &ConfigImage,
    channel_llrs: &[f64],
    params: &DecodeParams,
) -> Result<DecodeResult<QLlr>> {
    Replayer::new(h, mapping, trace, config, *params)?.decode(channel_llrs)
}
