use serde::{Deserialize, Serialize};

use super::ParityCheckMatrix;
use crate::error::Result;

/// Check-adjacency graph: one vertex per parity check, one undirected edge
/// for every pair of checks sharing at least one variable.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckGraph {
    pub n_vertices: usize,
    /// Edges `(i, j)` with `i < j`, sorted.
    pub edges: Vec<(usize, usize)>,
}

impl CheckGraph {
    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }
}

/// Lists, for every row, the later rows it shares a variable with.
pub fn build_check_graph(h: &ParityCheckMatrix) -> CheckGraph {
    let cols = h.columns();
    let mut edges = Vec::new();
    let mut scratch = Vec::new();
    for (i, row) in h.rows().iter().enumerate() {
        scratch.clear();
        for &v in row {
            scratch.extend(cols[v].iter().copied().filter(|&r| r > i));
        }
        scratch.sort_unstable();
        scratch.dedup();
        edges.extend(scratch.iter().map(|&j| (i, j)));
    }
    CheckGraph {
        n_vertices: h.n_rows(),
        edges,
    }
}

/// Per-variable message chains: the checks of each variable sorted by
/// (layer, row). Layered decoding hands `L(q_j)` from each check of the
/// chain to the next one, and from the last back to the first at the end of
/// an iteration.
pub fn message_chains(h: &ParityCheckMatrix) -> Result<Vec<Vec<usize>>> {
    let layer_of = h.layer_of_rows()?;
    let mut cols = h.columns();
    for col in &mut cols {
        col.sort_by_key(|&m| (layer_of[m], m));
    }
    Ok(cols)
}

/// Number of check-to-check messages per decoding iteration under the chain
/// model: every variable of degree `d >= 2` sends `d` values.
pub fn message_count(h: &ParityCheckMatrix) -> usize {
    h.column_degrees().into_iter().filter(|&d| d >= 2).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn h(rows: Vec<Vec<usize>>, n: usize) -> ParityCheckMatrix {
        ParityCheckMatrix::new(n, rows, "t").unwrap()
    }

    #[test]
    fn only_sharing_rows_are_adjacent() {
        let g = build_check_graph(&h(vec![vec![0, 1], vec![1, 2], vec![3, 4]], 5));
        assert_eq!(g.edges, vec![(0, 1)]);
    }

    #[test]
    fn duplicate_support_gives_one_edge() {
        let g = build_check_graph(&h(vec![vec![0, 1], vec![0, 1]], 2));
        assert_eq!(g.edge_count(), 1);
    }

    #[test]
    fn pair_listing_matches_brute_force() {
        let m = h(
            vec![vec![0, 3, 5], vec![1, 2], vec![2, 3, 6], vec![4], vec![0, 6], vec![1, 5]],
            7,
        );
        let g = build_check_graph(&m);
        let mut brute = Vec::new();
        for i in 0..m.n_rows() {
            for j in i + 1..m.n_rows() {
                let a: HashSet<_> = m.row(i).iter().collect();
                if m.row(j).iter().any(|v| a.contains(v)) {
                    brute.push((i, j));
                }
            }
        }
        assert_eq!(g.edges, brute);
    }

    #[test]
    fn chains_follow_layer_order() {
        let m = h(vec![vec![0, 1], vec![1, 2], vec![0, 2]], 3)
            .with_layers(vec![vec![2], vec![1], vec![0]])
            .unwrap();
        let chains = message_chains(&m).unwrap();
        assert_eq!(chains[0], vec![2, 0]);
        assert_eq!(chains[1], vec![1, 0]);
        assert_eq!(chains[2], vec![2, 1]);
        assert_eq!(message_count(&m), 6);
    }
}
