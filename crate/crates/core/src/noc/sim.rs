//! Cycle-accurate model of one decoding iteration on the torus.
//!
//! Cycle `c` runs four steps in order:
//! 1. output registers latched at `c − 1` cross their links into the
//!    neighbors' input FIFOs, where the flits become eligible at `c + 1`;
//! 2. every PE injects at most one queued flit into its LOCAL input FIFO,
//!    eligible at once;
//! 3. every router grants each output port to one eligible head-of-line flit,
//!    round-robin over the input ports; a flit granted the LOCAL output is
//!    delivered to the PE at `c`, any other is latched in the output register;
//! 4. every PE emits the outputs of its current check that fall on cycle `c`.
//!
//! A flit crossing `h` links thus arrives `2h` cycles after injection.

use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::schedule::{InjectionSchedule, ScheduledCheck};
use super::topology::{route_o1turn, Port, Topology, PORTS};
use crate::error::{Error, Result};

/// Crossbar entry of an output port that carries nothing.
pub const IDLE: u8 = 7;

/// A value written into a PE's extrinsic memory.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Arrival {
    pub cycle: u64,
    pub message: usize,
    pub check: usize,
    pub position: usize,
    /// Written by the PE itself rather than delivered by the network.
    pub bypass: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NocTrace {
    pub n: usize,
    pub seed: u64,
    pub pe_delay: u64,
    /// Last network delivery cycle plus one; zero without network traffic.
    pub k_i: u64,
    /// Last PE emission cycle plus one.
    pub pe_cycles: u64,
    /// O1Turn coin per message; zero for bypass messages.
    pub coins: Vec<u8>,
    /// Per node, per cycle below `k_i`, the input port granted to each
    /// output port, or [`IDLE`].
    pub crossbar: Vec<Vec<[u8; PORTS]>>,
    /// Per PE, `(cycle, message)` injections.
    pub injections: Vec<Vec<(u64, usize)>>,
    /// Per PE, memory writes in the order they happen.
    pub arrivals: Vec<Vec<Arrival>>,
    /// Per PE, `(cycle, message)` emissions.
    pub productions: Vec<Vec<(u64, usize)>>,
    /// Per node and input port, the largest FIFO occupancy.
    pub max_occupancy: Vec<[usize; PORTS]>,
    /// Per node and output port, the flits granted over the iteration.
    pub port_load: Vec<[usize; PORTS]>,
    pub max_hops: usize,
    pub injected: usize,
    pub delivered: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceSummary {
    pub n: usize,
    pub k_i: u64,
    pub pe_cycles: u64,
    pub network_messages: usize,
    pub bypass_messages: usize,
    pub max_fifo_occupancy: [usize; PORTS],
    pub max_port_load: usize,
    pub max_hops: usize,
    pub digest: String,
}

impl NocTrace {
    /// Hex SHA-256 of the JSON encoding.
    pub fn digest(&self) -> Result<String> {
        let bytes = serde_json::to_vec(self)?;
        Ok(hex(&Sha256::digest(&bytes)))
    }

    /// `k_i` can be no smaller than the busiest port's flit count, nor than
    /// the latency of the longest route.
    pub fn k_lower_bound(&self) -> u64 {
        let load = self.port_load.iter().flatten().copied().max().unwrap_or(0);
        let inject = self.injections.iter().map(Vec::len).max().unwrap_or(0);
        let hops = if self.injected > 0 { 2 * self.max_hops + 1 } else { 0 };
        (load.max(inject) as u64).max(hops as u64)
    }

    pub fn summary(&self) -> Result<TraceSummary> {
        let mut occ = [0; PORTS];
        for node in &self.max_occupancy {
            for (o, &v) in occ.iter_mut().zip(node) {
                *o = (*o).max(v);
            }
        }
        let bypass = self.arrivals.iter().flatten().filter(|a| a.bypass).count();
        Ok(TraceSummary {
            n: self.n,
            k_i: self.k_i,
            pe_cycles: self.pe_cycles,
            network_messages: self.injected,
            bypass_messages: bypass,
            max_fifo_occupancy: occ,
            max_port_load: self.port_load.iter().flatten().copied().max().unwrap_or(0),
            max_hops: self.max_hops,
            digest: self.digest()?,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

pub(crate) fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Order in which a check's inputs occupy its memory block and in which its
/// outputs are emitted: wrap inputs in `N(m)` order, then same-iteration
/// inputs in arrival order. Entries are positions in `N(m)`.
pub(crate) fn slot_positions(
    check: &ScheduledCheck,
    schedule: &InjectionSchedule,
    current: &[usize],
) -> Vec<usize> {
    check
        .wrap_inputs
        .iter()
        .map(|&id| schedule.messages[id].dst_position)
        .chain(current.iter().copied())
        .collect()
}

/// Timing of the check currently served by a PE.
#[derive(Clone, Debug, Default)]
pub(crate) struct PeCursor {
    pub check: usize,
    pub emit_start: Option<u64>,
    pub emitted: usize,
    pub prev_end: u64,
    pub slots: Vec<usize>,
}

impl PeCursor {
    /// First emission cycle of a check whose inputs are complete.
    pub fn start(&self, last_input: u64, delay: u64) -> u64 {
        (last_input + delay).max(self.prev_end)
    }
}

struct Fifo {
    q: VecDeque<(usize, u64)>,
}

pub fn simulate_iteration(
    topology: &Topology,
    schedule: &InjectionSchedule,
    seed: u64,
) -> Result<NocTrace> {
    let n_nodes = topology.nodes();
    if schedule.n_pe != n_nodes {
        return Err(Error::InvalidParam(format!(
            "{} PEs scheduled on a {}-node torus",
            schedule.n_pe, n_nodes
        )));
    }
    let msgs = &schedule.messages;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut coins = vec![0u8; msgs.len()];
    let mut routes: Vec<Vec<Port>> = vec![Vec::new(); msgs.len()];
    let mut max_hops = 0;
    for (id, m) in msgs.iter().enumerate() {
        if m.bypass() {
            continue;
        }
        coins[id] = rng.random_range(0..2);
        routes[id] = route_o1turn(m.src_pe, m.dst_pe, topology.side(), coins[id])?;
        max_hops = max_hops.max(routes[id].len());
    }
    let n_rows = schedule.location.len();
    let mut hop = vec![0usize; msgs.len()];
    let mut fifos: Vec<[Fifo; PORTS]> = (0..n_nodes)
        .map(|_| std::array::from_fn(|_| Fifo { q: VecDeque::new() }))
        .collect();
    let mut regs: Vec<[Option<usize>; PORTS]> = vec![[None; PORTS]; n_nodes];
    let mut last_grant = vec![[PORTS - 1; PORTS]; n_nodes];
    let mut inject_q: Vec<VecDeque<(usize, u64)>> = vec![VecDeque::new(); n_nodes];
    let mut received = vec![0usize; n_rows];
    let mut last_input = vec![0u64; n_rows];
    let mut current: Vec<Vec<usize>> = vec![Vec::new(); n_rows];
    let mut cursors = vec![PeCursor::default(); n_nodes];

    let mut trace = NocTrace {
        n: topology.side(),
        seed,
        pe_delay: schedule.pe_delay,
        k_i: 0,
        pe_cycles: 0,
        coins,
        crossbar: vec![Vec::new(); n_nodes],
        injections: vec![Vec::new(); n_nodes],
        arrivals: vec![Vec::new(); n_nodes],
        productions: vec![Vec::new(); n_nodes],
        max_occupancy: vec![[0; PORTS]; n_nodes],
        port_load: vec![[0; PORTS]; n_nodes],
        max_hops,
        injected: 0,
        delivered: 0,
    };

    let record = |trace: &mut NocTrace,
                  received: &mut [usize],
                  last_input: &mut [u64],
                  current: &mut [Vec<usize>],
                  pe: usize,
                  id: usize,
                  cycle: u64,
                  bypass: bool| {
        let m = &msgs[id];
        trace.arrivals[pe].push(Arrival {
            cycle,
            message: id,
            check: m.dst_check,
            position: m.dst_position,
            bypass,
        });
        if !m.wrap {
            received[m.dst_check] += 1;
            last_input[m.dst_check] = cycle;
            current[m.dst_check].push(m.dst_position);
        }
    };

    let mut in_flight = 0usize;
    let mut idle = 0u64;
    let idle_limit = (n_nodes as u64) + schedule.pe_delay + 2;
    let mut c: u64 = 0;
    loop {
        let done = in_flight == 0
            && cursors
                .iter()
                .zip(&schedule.pes)
                .all(|(cur, list)| cur.check == list.len());
        if done {
            break;
        }
        let mut active = false;

        // 1. links
        for node in 0..n_nodes {
            for o in 0..4 {
                if let Some(f) = regs[node][o].take() {
                    let port = Port::from_index(o).unwrap();
                    let nb = topology.neighbor(node, port);
                    fifos[nb][port.opposite().index()].q.push_back((f, c + 1));
                    active = true;
                }
            }
        }
        // 2. injection
        for pe in 0..n_nodes {
            if let Some(&(f, eligible)) = inject_q[pe].front() {
                if eligible <= c {
                    inject_q[pe].pop_front();
                    fifos[pe][Port::Local.index()].q.push_back((f, c));
                    trace.injections[pe].push((c, f));
                    trace.injected += 1;
                    active = true;
                }
            }
        }
        for node in 0..n_nodes {
            for p in 0..PORTS {
                let occ = &mut trace.max_occupancy[node][p];
                *occ = (*occ).max(fifos[node][p].q.len());
            }
        }
        // 3. switch allocation
        for node in 0..n_nodes {
            let mut request = [None; PORTS];
            for (i, fifo) in fifos[node].iter().enumerate() {
                if let Some(&(f, ready)) = fifo.q.front() {
                    if ready <= c {
                        let out = routes[f].get(hop[f]).copied().unwrap_or(Port::Local);
                        request[i] = Some(out.index());
                    }
                }
            }
            let mut word = [IDLE; PORTS];
            for o in 0..PORTS {
                let start = (last_grant[node][o] + 1) % PORTS;
                let Some(i) = (0..PORTS)
                    .map(|k| (start + k) % PORTS)
                    .find(|&i| request[i] == Some(o))
                else {
                    continue;
                };
                let (f, _) = fifos[node][i].q.pop_front().unwrap();
                last_grant[node][o] = i;
                word[o] = i as u8;
                trace.port_load[node][o] += 1;
                active = true;
                if o == Port::Local.index() {
                    record(&mut trace, &mut received, &mut last_input, &mut current, node, f, c, false);
                    trace.delivered += 1;
                    trace.k_i = c + 1;
                    in_flight -= 1;
                } else {
                    hop[f] += 1;
                    regs[node][o] = Some(f);
                }
            }
            trace.crossbar[node].push(word);
        }
        // 4. PE emissions
        for pe in 0..n_nodes {
            let list = &schedule.pes[pe];
            loop {
                let cur = &mut cursors[pe];
                let Some(check) = list.get(cur.check) else { break };
                if cur.emit_start.is_none() {
                    if received[check.row] < check.needed {
                        break;
                    }
                    let start = cur.start(last_input[check.row], schedule.pe_delay);
                    cur.emit_start = Some(start);
                    cur.slots = slot_positions(check, schedule, &current[check.row]);
                }
                let start = cur.emit_start.unwrap();
                if start + cur.emitted as u64 != c {
                    break;
                }
                let id = check.out[cur.slots[cur.emitted]];
                cur.emitted += 1;
                if cur.emitted == check.degree {
                    cur.check += 1;
                    cur.emit_start = None;
                    cur.emitted = 0;
                    cur.prev_end = c + 1;
                }
                trace.productions[pe].push((c, id));
                trace.pe_cycles = c + 1;
                active = true;
                if msgs[id].bypass() {
                    record(&mut trace, &mut received, &mut last_input, &mut current, pe, id, c, true);
                } else {
                    inject_q[pe].push_back((id, c + 1));
                    in_flight += 1;
                }
            }
        }

        if active {
            idle = 0;
        } else {
            idle += 1;
            if idle > idle_limit {
                let waiting: Vec<String> = cursors
                    .iter()
                    .zip(&schedule.pes)
                    .enumerate()
                    .filter(|(_, (cur, list))| cur.check < list.len())
                    .map(|(pe, (cur, list))| format!("PE {pe} at row {}", list[cur.check].row))
                    .collect();
                return Err(Error::Deadlock {
                    cycle: c,
                    detail: format!("{in_flight} flits in flight; waiting: {}", waiting.join(", ")),
                });
            }
        }
        c += 1;
    }

    for words in &mut trace.crossbar {
        words.truncate(trace.k_i as usize);
    }
    verify(&trace, schedule)?;
    Ok(trace)
}

/// Conservation and completeness checks on a finished trace.
fn verify(trace: &NocTrace, schedule: &InjectionSchedule) -> Result<()> {
    let expected = schedule.network_messages();
    if trace.injected != expected || trace.delivered != expected {
        return Err(Error::Integrity(format!(
            "{} scheduled, {} injected, {} delivered",
            expected, trace.injected, trace.delivered
        )));
    }
    let mut seen = vec![false; schedule.messages.len()];
    for (pe, list) in trace.arrivals.iter().enumerate() {
        for a in list {
            let m = &schedule.messages[a.message];
            if m.dst_pe != pe || std::mem::replace(&mut seen[a.message], true) {
                return Err(Error::Integrity(format!(
                    "message {} written twice or at the wrong PE",
                    a.message
                )));
            }
        }
    }
    if let Some(id) = seen.iter().position(|&s| !s) {
        return Err(Error::Integrity(format!("message {id} never arrived")));
    }
    if trace.k_i < trace.k_lower_bound() {
        return Err(Error::Integrity(format!(
            "k_i = {} below its lower bound {}",
            trace.k_i,
            trace.k_lower_bound()
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::ParityCheckMatrix;
    use crate::mapper::Mapping;
    use crate::noc::schedule::{build_schedule, Message};

    fn hand_schedule(n_pe: usize, msgs: Vec<(usize, usize)>) -> InjectionSchedule {
        // one single-input check per destination, one emitting check per source
        let mut pes: Vec<Vec<ScheduledCheck>> = vec![Vec::new(); n_pe];
        let mut messages = Vec::new();
        let mut location = Vec::new();
        for (id, &(src, dst)) in msgs.iter().enumerate() {
            let src_row = location.len();
            location.push((src, pes[src].len()));
            pes[src].push(ScheduledCheck {
                row: src_row,
                degree: 1,
                wrap_inputs: vec![id],
                needed: 0,
                out: vec![id],
            });
            let dst_row = location.len();
            location.push((dst, 0));
            messages.push(Message {
                var: id,
                src_check: src_row,
                dst_check: dst_row,
                dst_position: 0,
                src_pe: src,
                dst_pe: dst,
                wrap: true,
            });
        }
        InjectionSchedule {
            n_pe,
            pe_delay: 0,
            n_d: 1,
            messages,
            pes,
            location,
        }
    }

    #[test]
    fn empty_schedule_takes_no_cycles() {
        let t = Topology::new(2).unwrap();
        let s = hand_schedule(4, Vec::new());
        let tr = simulate_iteration(&t, &s, 0).unwrap();
        assert_eq!(tr.k_i, 0);
        assert!(tr.crossbar.iter().all(Vec::is_empty));
    }

    #[test]
    fn one_hop_costs_two_cycles() {
        let t = Topology::new(3).unwrap();
        let s = hand_schedule(9, vec![(0, 1)]);
        let tr = simulate_iteration(&t, &s, 0).unwrap();
        let (inj, _) = tr.injections[0][0];
        let arr = tr.arrivals[1][0].cycle;
        assert_eq!(arr - inj, 2);
        assert_eq!(tr.k_i, arr + 1);
    }

    #[test]
    fn contention_is_round_robin_from_port_zero() {
        // nodes 1 (east of 0) and 3 (south of 0) both send to node 0 over one
        // hop; both arrive at node 0's router in the same cycle and compete
        // for LOCAL
        let t = Topology::new(3).unwrap();
        let s = hand_schedule(9, vec![(1, 0), (3, 0)]);
        let tr = simulate_iteration(&t, &s, 0).unwrap();
        let a = &tr.arrivals[0];
        assert_eq!(a.len(), 2);
        assert_eq!(a[1].cycle, a[0].cycle + 1);
        // node 3 is south of 0: enters on the SOUTH input (port 1), node 1
        // enters on EAST (port 2); port 1 wins first
        assert_eq!(a[0].message, 1);
        let first = tr.crossbar[0][a[0].cycle as usize][Port::Local.index()];
        assert_eq!(first, Port::South.index() as u8);
    }

    fn wimax_trace(seed: u64) -> (NocTrace, InjectionSchedule) {
        let h = crate::codes::standard::builtin("wimax_576_r12").unwrap();
        let g = crate::mapper::WeightedGraph::from_message_chains(&h).unwrap();
        let mut m = crate::mapper::partition_kway(&g, 9, 1).unwrap();
        m.apply_serving_order(&h).unwrap();
        let s = build_schedule(&h, &m).unwrap();
        (simulate_iteration(&Topology::new(3).unwrap(), &s, seed).unwrap(), s)
    }

    #[test]
    fn deterministic_and_conservative() {
        let (a, s) = wimax_trace(5);
        let (b, _) = wimax_trace(5);
        assert_eq!(a, b);
        assert_eq!(a.digest().unwrap(), b.digest().unwrap());
        assert_eq!(a.injected, s.network_messages());
        assert!(a.k_i >= a.k_lower_bound());
        assert!(a.crossbar.iter().all(|w| w.len() as u64 == a.k_i));
    }

    #[test]
    fn single_pe_has_no_network_traffic() {
        let h = crate::codes::standard::builtin("wimax_576_r12").unwrap();
        let mut m = Mapping::from_assignment(1, vec![0; h.n_rows()]).unwrap();
        m.apply_serving_order(&h).unwrap();
        let s = build_schedule(&h, &m).unwrap();
        let tr = simulate_iteration(&Topology::new(1).unwrap(), &s, 0).unwrap();
        assert_eq!(tr.k_i, 0);
        assert_eq!(tr.injected, 0);
        assert_eq!(tr.arrivals[0].len(), h.nnz());
    }

    #[test]
    fn removing_a_flit_never_slows_the_iteration() {
        let t = Topology::new(3).unwrap();
        let flows = vec![(1, 0), (3, 0), (2, 0), (4, 8), (0, 8), (6, 0)];
        let full = simulate_iteration(&t, &hand_schedule(9, flows.clone()), 1).unwrap().k_i;
        for skip in 0..flows.len() {
            let mut fewer = flows.clone();
            fewer.remove(skip);
            let k = simulate_iteration(&t, &hand_schedule(9, fewer), 1).unwrap().k_i;
            assert!(k <= full, "dropping flow {skip}: {k} > {full}");
        }
    }

    #[test]
    fn pe_count_must_match_torus() {
        let h = ParityCheckMatrix::new(2, vec![vec![0, 1]], "t").unwrap().with_greedy_layers();
        let mut m = Mapping::from_assignment(1, vec![0]).unwrap();
        m.apply_serving_order(&h).unwrap();
        let s = build_schedule(&h, &m).unwrap();
        assert!(simulate_iteration(&Topology::new(2).unwrap(), &s, 0).is_err());
    }
}
