//! Assignment of parity checks to processing elements.

mod kway;

pub use kway::{partition_kway, partition_kway_with, KwayOptions};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::codes::{message_chains, CheckGraph, ParityCheckMatrix};
use crate::error::{Error, Result};

/// Undirected graph in compressed adjacency form with vertex and edge weights.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightedGraph {
    xadj: Vec<usize>,
    adjncy: Vec<usize>,
    adjwgt: Vec<u64>,
    vwgt: Vec<u64>,
}

impl WeightedGraph {
    /// Builds from a weighted edge list. Parallel edges are merged by summing
    /// their weights; self-loops are dropped.
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize, u64)>) -> Self {
        let mut lists: Vec<Vec<(usize, u64)>> = vec![Vec::new(); n];
        for (a, b, w) in edges {
            if a == b || w == 0 {
                continue;
            }
            lists[a].push((b, w));
            lists[b].push((a, w));
        }
        let mut xadj = Vec::with_capacity(n + 1);
        let mut adjncy = Vec::new();
        let mut adjwgt = Vec::new();
        xadj.push(0);
        for list in &mut lists {
            list.sort_unstable();
            for &(v, w) in list.iter() {
                if adjncy.len() > *xadj.last().unwrap() && *adjncy.last().unwrap() == v {
                    *adjwgt.last_mut().unwrap() += w;
                } else {
                    adjncy.push(v);
                    adjwgt.push(w);
                }
            }
            xadj.push(adjncy.len());
        }
        Self {
            xadj,
            adjncy,
            adjwgt,
            vwgt: vec![1; n],
        }
    }

    /// Unit weight per check pair.
    pub fn from_check_graph(g: &CheckGraph) -> Self {
        Self::from_edges(g.n_vertices, g.edges.iter().map(|&(a, b)| (a, b, 1)))
    }

    /// One unit per message of the layered chain model: a variable with
    /// checks `c_1..c_d` contributes `c_t -> c_{t+1 mod d}` for every `t`.
    /// The cut weight of a mapping is then the number of network messages
    /// per iteration.
    pub fn from_message_chains(h: &ParityCheckMatrix) -> Result<Self> {
        let chains = message_chains(h)?;
        let edges = chains.iter().filter(|c| c.len() >= 2).flat_map(|c| {
            (0..c.len()).map(move |t| (c[t], c[(t + 1) % c.len()], 1))
        });
        Ok(Self::from_edges(h.n_rows(), edges))
    }

    /// One unit per shared variable for every check pair.
    pub fn from_shared_variables(h: &ParityCheckMatrix) -> Self {
        let edges = h.columns().into_iter().flat_map(|col| {
            let mut pairs = Vec::new();
            for a in 0..col.len() {
                for b in a + 1..col.len() {
                    pairs.push((col[a], col[b], 1));
                }
            }
            pairs
        });
        Self::from_edges(h.n_rows(), edges)
    }

    pub fn n_vertices(&self) -> usize {
        self.vwgt.len()
    }

    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = (usize, u64)> + '_ {
        let r = self.xadj[v]..self.xadj[v + 1];
        self.adjncy[r.clone()].iter().copied().zip(self.adjwgt[r].iter().copied())
    }

    pub fn vertex_weight(&self, v: usize) -> u64 {
        self.vwgt[v]
    }

    pub fn total_vertex_weight(&self) -> u64 {
        self.vwgt.iter().sum()
    }

    /// Sum of all edge weights, each undirected edge counted once.
    pub fn total_edge_weight(&self) -> u64 {
        self.adjwgt.iter().sum::<u64>() / 2
    }

    /// Subgraph induced by `vertices`, renumbered in the given order.
    fn induced(&self, vertices: &[usize]) -> Self {
        let mut local = vec![usize::MAX; self.n_vertices()];
        for (i, &v) in vertices.iter().enumerate() {
            local[v] = i;
        }
        let mut xadj = Vec::with_capacity(vertices.len() + 1);
        let mut adjncy = Vec::new();
        let mut adjwgt = Vec::new();
        xadj.push(0);
        for &v in vertices {
            for (u, w) in self.neighbors(v) {
                if local[u] != usize::MAX {
                    adjncy.push(local[u]);
                    adjwgt.push(w);
                }
            }
            xadj.push(adjncy.len());
        }
        Self {
            xadj,
            adjncy,
            adjwgt,
            vwgt: vertices.iter().map(|&v| self.vwgt[v]).collect(),
        }
    }
}

impl From<&CheckGraph> for WeightedGraph {
    fn from(g: &CheckGraph) -> Self {
        Self::from_check_graph(g)
    }
}

/// Rows assigned to each PE, plus the order in which each PE serves them.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mapping {
    pub p: usize,
    /// PE of every row.
    pub assignment: Vec<usize>,
    /// Per-PE serving order.
    pub order: Vec<Vec<usize>>,
}

impl Mapping {
    /// Mapping with per-PE rows in increasing index order.
    pub fn from_assignment(p: usize, assignment: Vec<usize>) -> Result<Self> {
        if p == 0 {
            return Err(Error::InvalidParam("PE count must be positive".into()));
        }
        let mut order = vec![Vec::new(); p];
        for (row, &pe) in assignment.iter().enumerate() {
            if pe >= p {
                return Err(Error::InvalidParam(format!("row {row} mapped to PE {pe} of {p}")));
            }
            order[pe].push(row);
        }
        Ok(Self { p, assignment, order })
    }

    /// Rows per PE.
    pub fn sizes(&self) -> Vec<usize> {
        self.order.iter().map(Vec::len).collect()
    }

    /// `max − min` partition size is at most `ceil(n/p) − floor(n/p) + slack`.
    pub fn is_balanced(&self, slack: usize) -> bool {
        let sizes = self.sizes();
        let n = self.assignment.len();
        let spread = usize::from(!n.is_multiple_of(self.p));
        let (lo, hi) = (sizes.iter().min(), sizes.iter().max());
        matches!((lo, hi), (Some(lo), Some(hi)) if hi - lo <= spread + slack)
    }

    /// Replaces the per-PE order with the layered serving order.
    pub fn apply_serving_order(&mut self, h: &ParityCheckMatrix) -> Result<()> {
        self.order = serving_order(h, self)?;
        Ok(())
    }

    /// Checks that the mapping covers `h` and that every PE serves its rows
    /// layer by layer.
    pub fn validate(&self, h: &ParityCheckMatrix) -> Result<()> {
        if self.assignment.len() != h.n_rows() {
            return Err(Error::Dimension {
                expected: h.n_rows(),
                got: self.assignment.len(),
            });
        }
        if self.order.len() != self.p {
            return Err(Error::Integrity(format!(
                "{} serving lists for {} PEs",
                self.order.len(),
                self.p
            )));
        }
        let layer_of = h.layer_of_rows()?;
        let mut seen = vec![false; h.n_rows()];
        for (pe, list) in self.order.iter().enumerate() {
            for &m in list {
                if m >= h.n_rows() || self.assignment[m] != pe || std::mem::replace(&mut seen[m], true) {
                    return Err(Error::Integrity(format!("PE {pe} lists row {m} inconsistently")));
                }
            }
            if list.windows(2).any(|w| layer_of[w[0]] > layer_of[w[1]]) {
                return Err(Error::Integrity(format!("PE {pe} does not serve layers in order")));
            }
        }
        if let Some(m) = seen.iter().position(|&s| !s) {
            return Err(Error::Integrity(format!("row {m} is not served by any PE")));
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Per-PE rows sorted by (layer, row).
pub fn serving_order(h: &ParityCheckMatrix, mapping: &Mapping) -> Result<Vec<Vec<usize>>> {
    let layer_of = h.layer_of_rows()?;
    if mapping.assignment.len() != h.n_rows() {
        return Err(Error::Dimension {
            expected: h.n_rows(),
            got: mapping.assignment.len(),
        });
    }
    let mut order = vec![Vec::new(); mapping.p];
    for (m, &pe) in mapping.assignment.iter().enumerate() {
        order[pe].push(m);
    }
    for list in &mut order {
        list.sort_by_key(|&m| (layer_of[m], m));
    }
    Ok(order)
}

/// Total weight of edges whose endpoints lie on different PEs.
pub fn cutset(graph: &WeightedGraph, mapping: &Mapping) -> u64 {
    cut_weight(graph, &mapping.assignment)
}

pub(crate) fn cut_weight(graph: &WeightedGraph, part: &[usize]) -> u64 {
    let mut cut = 0;
    for v in 0..graph.n_vertices() {
        for (u, w) in graph.neighbors(v) {
            if u > v && part[u] != part[v] {
                cut += w;
            }
        }
    }
    cut
}

fn check_p(n: usize, p: usize) -> Result<()> {
    if p == 0 {
        return Err(Error::InvalidParam("PE count must be positive".into()));
    }
    if p > n {
        return Err(Error::InvalidParam(format!("{p} PEs for only {n} checks")));
    }
    Ok(())
}

/// Shuffles the rows and deals them round-robin, so part sizes differ by at
/// most one.
pub fn partition_random(graph: &WeightedGraph, p: usize, seed: u64) -> Result<Mapping> {
    let n = graph.n_vertices();
    check_p(n, p)?;
    let mut rows: Vec<usize> = (0..n).collect();
    rows.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut assignment = vec![0; n];
    for (i, &m) in rows.iter().enumerate() {
        assignment[m] = i % p;
    }
    Mapping::from_assignment(p, assignment)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::build_check_graph;
    use rand::Rng;

    fn path3() -> WeightedGraph {
        WeightedGraph::from_edges(3, [(0, 1, 1), (1, 2, 1)])
    }

    #[test]
    fn cutset_examples() {
        let g = path3();
        let one = Mapping::from_assignment(1, vec![0, 0, 0]).unwrap();
        assert_eq!(cutset(&g, &one), 0);
        let split = Mapping::from_assignment(2, vec![0, 1, 1]).unwrap();
        assert_eq!(cutset(&g, &split), 1);
    }

    #[test]
    fn cutset_matches_edge_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..50 {
            let n = 30;
            let edges: Vec<(usize, usize)> = (0..80)
                .map(|_| (rng.random_range(0..n), rng.random_range(0..n)))
                .filter(|(a, b)| a != b)
                .map(|(a, b)| (a.min(b), a.max(b)))
                .collect::<std::collections::BTreeSet<_>>()
                .into_iter()
                .collect();
            let g = WeightedGraph::from_edges(n, edges.iter().map(|&(a, b)| (a, b, 1)));
            let part: Vec<usize> = (0..n).map(|_| rng.random_range(0..4)).collect();
            let brute = edges.iter().filter(|&&(a, b)| part[a] != part[b]).count() as u64;
            let m = Mapping::from_assignment(4, part).unwrap();
            assert_eq!(cutset(&g, &m), brute);
        }
    }

    #[test]
    fn parallel_edges_merge() {
        let g = WeightedGraph::from_edges(2, [(0, 1, 1), (1, 0, 1), (0, 0, 5)]);
        assert_eq!(g.neighbors(0).collect::<Vec<_>>(), vec![(1, 2)]);
        assert_eq!(g.total_edge_weight(), 2);
    }

    #[test]
    fn chain_weight_counts_messages() {
        let h = crate::codes::standard::builtin("wimax_576_r12").unwrap();
        let g = WeightedGraph::from_message_chains(&h).unwrap();
        assert_eq!(g.total_edge_weight() as usize, crate::codes::message_count(&h));
        let pairs = WeightedGraph::from_check_graph(&build_check_graph(&h));
        assert_eq!(pairs.total_edge_weight() as usize, build_check_graph(&h).edge_count());
    }

    #[test]
    fn random_partition_extremes() {
        let h = crate::codes::standard::builtin("wimax_576_r12").unwrap();
        let g = WeightedGraph::from_message_chains(&h).unwrap();
        let one = partition_random(&g, 1, 3).unwrap();
        assert_eq!(cutset(&g, &one), 0);
        let all = partition_random(&g, h.n_rows(), 3).unwrap();
        assert_eq!(cutset(&g, &all), g.total_edge_weight());
        assert!(partition_random(&g, 0, 3).is_err());
        assert!(partition_random(&g, h.n_rows() + 1, 3).is_err());
    }

    #[test]
    fn serving_order_is_layer_major() {
        let h = ParityCheckMatrix::new(
            4,
            vec![vec![0, 1], vec![2, 3], vec![0, 2], vec![1, 3]],
            "t",
        )
        .unwrap()
        .with_layers(vec![vec![0, 1], vec![2, 3]])
        .unwrap();
        let mut m = Mapping::from_assignment(3, vec![1, 0, 0, 0]).unwrap();
        m.order = vec![vec![3, 2, 1], vec![0], vec![]];
        assert!(m.validate(&h).is_err());
        m.apply_serving_order(&h).unwrap();
        assert_eq!(m.order, vec![vec![1, 2, 3], vec![0], vec![]]);
        m.validate(&h).unwrap();
    }

    #[test]
    fn bundled_orders_are_layer_monotone() {
        for name in ["wimax_576_r12", "wifi_1944_r34", "random_1057_244"] {
            let h = crate::codes::standard::builtin(name).unwrap();
            let g = WeightedGraph::from_message_chains(&h).unwrap();
            let mut m = partition_random(&g, 9, 1).unwrap();
            m.apply_serving_order(&h).unwrap();
            let layer_of = h.layer_of_rows().unwrap();
            for list in &m.order {
                assert!(list.windows(2).all(|w| layer_of[w[0]] <= layer_of[w[1]]));
            }
        }
    }

    #[test]
    fn mapping_json_round_trip() {
        let m = Mapping::from_assignment(2, vec![0, 1, 1]).unwrap();
        assert_eq!(Mapping::from_json(&m.to_json().unwrap()).unwrap(), m);
    }
}
