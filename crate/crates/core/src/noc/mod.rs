//! Torus network-on-chip: topology and routing, the per-iteration message
//! schedule, a cycle-accurate simulator and a replay of decoding on the
//! generated configuration.

mod replay;
mod schedule;
mod sim;
mod topology;

pub use replay::{replay_decode, Replayer};
pub use schedule::{build_schedule, InjectionSchedule, Message, ScheduledCheck, DEFAULT_PE_DELAY};
pub use sim::{simulate_iteration, Arrival, NocTrace, TraceSummary, IDLE};
pub use topology::{route_o1turn, Port, Topology, PORTS};
