//! Static decoder configuration derived from a simulated iteration.
//!
//! # Routing-memory word
//!
//! One 32-bit word per node per cycle, little-endian in the binary file:
//!
//! | bits    | field                                                  |
//! |---------|--------------------------------------------------------|
//! | 4o..4o+2 | input port switched to output `o` (N=0 S=1 E=2 W=3 L=4) |
//! | 4o+3    | output `o` valid                                        |
//! | 20+i    | pop input FIFO `i`                                      |
//! | 25+i    | push into input FIFO `i`                                |
//!
//! Bits 30 and 31 are zero.
//!
//! # Binary image
//!
//! `b"LNCF"`, format version (u32), header length (u32), the JSON header
//! (the image with empty routing memories), then for every node the word
//! count (u32) followed by the words (u32 each). All integers little-endian.

mod upload;

pub use upload::{
    min_buffer_size, plan_upload, plan_upload_with, simulate_upload, Alignment, Phase, UploadEvent,
    UploadOptions,
    UploadPlan, UploadReport,
};

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::codes::ParityCheckMatrix;
use crate::error::{Error, Result};
use crate::mapper::Mapping;
use crate::noc::{build_schedule, NocTrace, Port, Topology, IDLE, PORTS};

pub const FORMAT_VERSION: u32 = 1;
const MAGIC: &[u8; 4] = b"LNCF";

/// Routing-memory control word.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RmWord(pub u32);

impl RmWord {
    pub const IDLE: RmWord = RmWord(0);

    pub fn new(select: [u8; PORTS], push: [bool; PORTS]) -> Self {
        let mut w = 0u32;
        for (o, &s) in select.iter().enumerate() {
            if s != IDLE {
                w |= (8 | u32::from(s)) << (4 * o);
                w |= 1 << (20 + u32::from(s));
            }
        }
        for (i, &p) in push.iter().enumerate() {
            if p {
                w |= 1 << (25 + i);
            }
        }
        RmWord(w)
    }

    /// Input port switched to `output`, if any.
    pub fn select(self, output: usize) -> Option<usize> {
        let f = (self.0 >> (4 * output)) & 0xF;
        (f & 8 != 0).then_some((f & 7) as usize)
    }

    pub fn pop(self, input: usize) -> bool {
        self.0 & (1 << (20 + input)) != 0
    }

    pub fn push(self, input: usize) -> bool {
        self.0 & (1 << (25 + input)) != 0
    }
}

/// Read-address generator entry of one served check.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckEntry {
    pub offset: u32,
    pub degree: u32,
    /// Values written during the iteration before the check may start.
    pub needed: u32,
}

impl CheckEntry {
    /// Leading slots of the block that carry values from the previous
    /// iteration.
    pub fn wraps(&self) -> u32 {
        self.degree - self.needed
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PeConfig {
    /// Write addresses in write order.
    pub wag: Vec<u32>,
    /// Checks in serving order.
    pub checks: Vec<CheckEntry>,
    /// Per emission, whether the value is written locally instead of
    /// injected.
    pub local_mask: Vec<bool>,
    /// `(address, variable)` of every wrap slot; these hold the channel
    /// values before the first iteration and the decisions after each one.
    pub wrap_vars: Vec<(u32, u32)>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeConfig {
    pub rm: Vec<RmWord>,
    pub fifo_depth: [u32; PORTS],
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfigImage {
    pub format_version: u32,
    pub label: String,
    pub n: usize,
    pub k_i: u64,
    /// Cycles until the last PE emission; an iteration lasts
    /// `max(k_i, pe_cycles)`.
    pub pe_cycles: u64,
    pub n_d: usize,
    pub n_pc: usize,
    pub pe_delay: u64,
    pub n_vars: usize,
    pub trace_digest: String,
    pub nodes: Vec<NodeConfig>,
    pub pes: Vec<PeConfig>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ConfigOptions {
    /// Round FIFO depths up to a power of two.
    pub pow2_depths: bool,
}

impl ConfigImage {
    pub fn iteration_cycles(&self) -> u64 {
        self.k_i.max(self.pe_cycles)
    }

    pub fn max_fifo_depth(&self) -> [u32; PORTS] {
        let mut d = [0; PORTS];
        for node in &self.nodes {
            for (a, &b) in d.iter_mut().zip(&node.fifo_depth) {
                *a = (*a).max(b);
            }
        }
        d
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<()> {
        let mut header = self.clone();
        for node in &mut header.nodes {
            node.rm.clear();
        }
        let json = serde_json::to_vec(&header)?;
        w.write_all(MAGIC)?;
        w.write_all(&FORMAT_VERSION.to_le_bytes())?;
        w.write_all(&(json.len() as u32).to_le_bytes())?;
        w.write_all(&json)?;
        for node in &self.nodes {
            w.write_all(&(node.rm.len() as u32).to_le_bytes())?;
            for word in &node.rm {
                w.write_all(&word.0.to_le_bytes())?;
            }
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(Error::Integrity("not a configuration image".into()));
        }
        let version = read_u32(&mut r)?;
        if version != FORMAT_VERSION {
            return Err(Error::Integrity(format!("unsupported image version {version}")));
        }
        let len = read_u32(&mut r)? as usize;
        let mut json = vec![0u8; len];
        r.read_exact(&mut json)?;
        let mut image: ConfigImage = serde_json::from_slice(&json)?;
        for node in &mut image.nodes {
            let words = read_u32(&mut r)? as usize;
            node.rm = (0..words).map(|_| read_u32(&mut r).map(RmWord)).collect::<Result<_>>()?;
        }
        Ok(image)
    }
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

/// Routing-memory words of every node, reconstructed from the trace.
pub fn encode_rm(trace: &NocTrace) -> Result<Vec<Vec<RmWord>>> {
    let topo = Topology::new(trace.n)?;
    let nodes = topo.nodes();
    let k = trace.k_i as usize;
    let mut pushes = vec![vec![[false; PORTS]; k]; nodes];
    for (node, words) in trace.crossbar.iter().enumerate() {
        for (c, sel) in words.iter().enumerate() {
            for port in &Port::ALL[..4] {
                if sel[port.index()] != IDLE && c + 1 < k {
                    let nb = topo.neighbor(node, *port);
                    pushes[nb][c + 1][port.opposite().index()] = true;
                }
            }
        }
    }
    for (pe, list) in trace.injections.iter().enumerate() {
        for &(c, _) in list {
            if let Some(p) = pushes[pe].get_mut(c as usize) {
                p[Port::Local.index()] = true;
            }
        }
    }
    Ok(trace
        .crossbar
        .iter()
        .zip(&pushes)
        .map(|(words, push)| words.iter().zip(push).map(|(s, p)| RmWord::new(*s, *p)).collect())
        .collect())
}

/// Builds the configuration image of a simulated iteration.
pub fn gen_config(
    trace: &NocTrace,
    mapping: &Mapping,
    h: &ParityCheckMatrix,
    options: ConfigOptions,
) -> Result<ConfigImage> {
    let schedule = build_schedule(h, mapping)?;
    let nodes = trace.n * trace.n;
    if schedule.n_pe != nodes || trace.arrivals.len() != nodes {
        return Err(Error::Integrity(format!(
            "trace for {nodes} nodes does not match a mapping on {} PEs",
            schedule.n_pe
        )));
    }
    let n_d = schedule.n_d;
    let msgs = &schedule.messages;
    // slot of every message inside its destination block
    let mut slot = vec![usize::MAX; msgs.len()];
    let mut filled = vec![0usize; h.n_rows()];
    for check in schedule.pes.iter().flatten() {
        for (k, &id) in check.wrap_inputs.iter().enumerate() {
            slot[id] = k;
        }
        filled[check.row] = check.wrap_inputs.len();
    }
    let mut seen = vec![false; msgs.len()];
    for a in trace.arrivals.iter().flatten() {
        let Some(m) = msgs.get(a.message) else {
            return Err(Error::Integrity(format!("unknown message {}", a.message)));
        };
        if std::mem::replace(&mut seen[a.message], true) {
            return Err(Error::Integrity(format!("message {} arrives twice", a.message)));
        }
        if !m.wrap {
            slot[a.message] = filled[m.dst_check];
            filled[m.dst_check] += 1;
        }
    }
    if let Some(id) = seen.iter().position(|&s| !s) {
        return Err(Error::Integrity(format!("trace has no arrival for message {id}")));
    }

    let mut pes = Vec::with_capacity(nodes);
    for pe in 0..nodes {
        let list = &schedule.pes[pe];
        let mut cfg = PeConfig::default();
        for (pos, check) in list.iter().enumerate() {
            let offset = (pos * n_d) as u32;
            cfg.checks.push(CheckEntry {
                offset,
                degree: check.degree as u32,
                needed: check.needed as u32,
            });
            for (k, &id) in check.wrap_inputs.iter().enumerate() {
                cfg.wrap_vars.push((offset + k as u32, msgs[id].var as u32));
            }
        }
        for a in &trace.arrivals[pe] {
            let m = &msgs[a.message];
            let (dst_pe, pos) = schedule.location[m.dst_check];
            if dst_pe != pe {
                return Err(Error::Integrity(format!(
                    "message {} recorded at PE {pe}, mapped to PE {dst_pe}",
                    a.message
                )));
            }
            cfg.wag.push((pos * n_d + slot[a.message]) as u32);
        }
        cfg.local_mask = trace.productions[pe].iter().map(|&(_, id)| msgs[id].bypass()).collect();
        pes.push(cfg);
    }

    let rm = encode_rm(trace)?;
    let nodes_cfg = rm
        .into_iter()
        .zip(&trace.max_occupancy)
        .map(|(rm, occ)| NodeConfig {
            rm,
            fifo_depth: occ.map(|d| {
                let d = d as u32;
                if options.pow2_depths && d > 0 {
                    d.next_power_of_two()
                } else {
                    d
                }
            }),
        })
        .collect();

    Ok(ConfigImage {
        format_version: FORMAT_VERSION,
        label: h.label().to_string(),
        n: trace.n,
        k_i: trace.k_i,
        pe_cycles: trace.pe_cycles,
        n_d,
        n_pc: schedule.n_pc(),
        pe_delay: trace.pe_delay,
        n_vars: h.n_cols(),
        trace_digest: trace.digest()?,
        nodes: nodes_cfg,
        pes,
    })
}
