//! Multilevel recursive bisection.
//!
//! Each bisection coarsens the graph by heavy-edge matching, grows several
//! initial splits on the coarsest graph, then projects back level by level
//! with Fiduccia–Mattheyses refinement. Part sizes are exact after the
//! bisections; a final k-way greedy pass may trade cut weight for up to
//! `slack` rows of imbalance.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{check_p, Mapping, WeightedGraph};
use crate::error::Result;
use crate::seed::derive;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct KwayOptions {
    /// Extra rows a part may hold beyond `ceil(n/p)`.
    pub slack: usize,
    /// Initial bisections grown on each coarsest graph.
    pub trials: usize,
    /// Coarsening stops below this many vertices.
    pub coarsen_to: usize,
    pub fm_passes: usize,
}

impl Default for KwayOptions {
    fn default() -> Self {
        Self {
            slack: 1,
            trials: 8,
            coarsen_to: 40,
            fm_passes: 8,
        }
    }
}

pub fn partition_kway(graph: &WeightedGraph, p: usize, seed: u64) -> Result<Mapping> {
    partition_kway_with(graph, p, seed, &KwayOptions::default())
}

pub fn partition_kway_with(
    graph: &WeightedGraph,
    p: usize,
    seed: u64,
    opts: &KwayOptions,
) -> Result<Mapping> {
    let n = graph.n_vertices();
    check_p(n, p)?;
    let sizes: Vec<u64> = (0..p).map(|i| (n / p + usize::from(i < n % p)) as u64).collect();
    let vertices: Vec<usize> = (0..n).collect();
    let mut part = vec![0; n];
    for (v, q) in recurse(graph, &vertices, 0, &sizes, seed, opts) {
        part[v] = q;
    }
    let lo = n / p;
    let hi = n.div_ceil(p) + opts.slack;
    kway_refine(graph, &mut part, p, lo, hi, opts.fm_passes);
    Mapping::from_assignment(p, part)
}

fn recurse(
    g: &WeightedGraph,
    vertices: &[usize],
    first: usize,
    sizes: &[u64],
    seed: u64,
    opts: &KwayOptions,
) -> Vec<(usize, usize)> {
    if sizes.len() == 1 {
        return vertices.iter().map(|&v| (v, first)).collect();
    }
    let k0 = sizes.len() / 2;
    let target0: u64 = sizes[..k0].iter().sum();
    let sub = g.induced(vertices);
    let side = bisect(&sub, target0, seed, opts);
    let (mut v0, mut v1) = (Vec::new(), Vec::new());
    for (i, &v) in vertices.iter().enumerate() {
        if side[i] == 0 {
            v0.push(v);
        } else {
            v1.push(v);
        }
    }
    let (mut a, b) = rayon::join(
        || recurse(g, &v0, first, &sizes[..k0], derive(seed, 1), opts),
        || recurse(g, &v1, first + k0, &sizes[k0..], derive(seed, 2), opts),
    );
    a.extend(b);
    a
}

/// Splits `g` into sides 0 and 1 with side 0 weighing exactly `target0`
/// whenever the vertex weights allow it.
fn bisect(g: &WeightedGraph, target0: u64, seed: u64, opts: &KwayOptions) -> Vec<u8> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let total = g.total_vertex_weight();
    let cap = (total / 20).max(2);
    let mut levels: Vec<(WeightedGraph, Vec<usize>)> = Vec::new();
    loop {
        let cur = levels.last().map_or(g, |(c, _)| c);
        if cur.n_vertices() <= opts.coarsen_to {
            break;
        }
        let (coarse, cmap) = coarsen(cur, cap, &mut rng);
        if coarse.n_vertices() * 20 > cur.n_vertices() * 19 {
            break;
        }
        levels.push((coarse, cmap));
    }

    let coarsest = levels.last().map_or(g, |(c, _)| c);
    let tol = max_vertex_weight(coarsest);
    let exact = levels.is_empty();
    let mut best: Option<((u64, u64), Vec<u8>)> = None;
    for _ in 0..opts.trials.max(1) {
        let mut side = grow(coarsest, target0, &mut rng);
        fm_refine(coarsest, &mut side, target0, tol, exact, opts.fm_passes);
        let score = score(coarsest, &side, target0, if exact { 0 } else { tol });
        if best.as_ref().is_none_or(|(s, _)| score < *s) {
            best = Some((score, side));
        }
    }
    let mut side = best.map(|(_, s)| s).unwrap_or_default();

    for li in (0..levels.len()).rev() {
        let finer = if li == 0 { g } else { &levels[li - 1].0 };
        let cmap = &levels[li].1;
        side = cmap.iter().map(|&c| side[c]).collect();
        let tol = max_vertex_weight(finer);
        fm_refine(finer, &mut side, target0, tol, li == 0, opts.fm_passes);
    }
    rebalance(g, &mut side, target0);
    side
}

fn max_vertex_weight(g: &WeightedGraph) -> u64 {
    (0..g.n_vertices()).map(|v| g.vertex_weight(v)).max().unwrap_or(1)
}

fn side_weight(g: &WeightedGraph, side: &[u8]) -> u64 {
    (0..g.n_vertices()).filter(|&v| side[v] == 0).map(|v| g.vertex_weight(v)).sum()
}

fn cut(g: &WeightedGraph, side: &[u8]) -> u64 {
    let part: Vec<usize> = side.iter().map(|&s| usize::from(s)).collect();
    super::cut_weight(g, &part)
}

fn score(g: &WeightedGraph, side: &[u8], target0: u64, free: u64) -> (u64, u64) {
    (side_weight(g, side).abs_diff(target0).saturating_sub(free), cut(g, side))
}

/// Heavy-edge matching. Returns the coarse graph and the fine-to-coarse map.
fn coarsen(g: &WeightedGraph, cap: u64, rng: &mut ChaCha8Rng) -> (WeightedGraph, Vec<usize>) {
    let n = g.n_vertices();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut cmap = vec![usize::MAX; n];
    let mut next = 0;
    for &v in &order {
        if cmap[v] != usize::MAX {
            continue;
        }
        let wv = g.vertex_weight(v);
        let mate = g
            .neighbors(v)
            .filter(|&(u, _)| cmap[u] == usize::MAX && wv + g.vertex_weight(u) <= cap)
            .max_by_key(|&(u, w)| (w, std::cmp::Reverse(g.vertex_weight(u)), std::cmp::Reverse(u)));
        cmap[v] = next;
        if let Some((u, _)) = mate {
            cmap[u] = next;
        }
        next += 1;
    }
    let mut edges = Vec::new();
    for v in 0..n {
        for (u, w) in g.neighbors(v) {
            if u > v {
                edges.push((cmap[v], cmap[u], w));
            }
        }
    }
    let mut coarse = WeightedGraph::from_edges(next, edges);
    coarse.vwgt = vec![0; next];
    for v in 0..n {
        coarse.vwgt[cmap[v]] += g.vertex_weight(v);
    }
    (coarse, cmap)
}

/// Greedy graph growing: side 0 starts from a random vertex and absorbs the
/// frontier vertex with the best cut gain until it reaches `target0`.
fn grow(g: &WeightedGraph, target0: u64, rng: &mut ChaCha8Rng) -> Vec<u8> {
    let n = g.n_vertices();
    let mut side = vec![1u8; n];
    if n == 0 || target0 == 0 {
        return side;
    }
    // gain of moving a side-1 vertex into side 0
    let mut gain: Vec<i64> = (0..n).map(|v| -(g.neighbors(v).map(|(_, w)| w as i64).sum::<i64>())).collect();
    let mut frontier = vec![false; n];
    let mut w0 = 0;
    let add = |v: usize, side: &mut Vec<u8>, gain: &mut Vec<i64>, frontier: &mut Vec<bool>| {
        side[v] = 0;
        for (u, w) in g.neighbors(v) {
            gain[u] += 2 * w as i64;
            frontier[u] = true;
        }
        g.vertex_weight(v)
    };
    w0 += add(rng.random_range(0..n), &mut side, &mut gain, &mut frontier);
    while w0 < target0 {
        let pick = (0..n)
            .filter(|&v| side[v] == 1 && frontier[v])
            .max_by_key(|&v| (gain[v], std::cmp::Reverse(v)));
        let v = match pick {
            Some(v) => v,
            None => {
                let rest: Vec<usize> = (0..n).filter(|&v| side[v] == 1).collect();
                if rest.is_empty() {
                    break;
                }
                rest[rng.random_range(0..rest.len())]
            }
        };
        w0 += add(v, &mut side, &mut gain, &mut frontier);
    }
    side
}

fn gains(g: &WeightedGraph, side: &[u8]) -> Vec<i64> {
    (0..g.n_vertices())
        .map(|v| {
            g.neighbors(v)
                .map(|(u, w)| if side[u] == side[v] { -(w as i64) } else { w as i64 })
                .sum()
        })
        .collect()
}

/// Fiduccia–Mattheyses passes. Moves keep side 0 within `target0 ± tol`;
/// the best prefix of each pass is kept, ranking first by imbalance beyond
/// the allowed amount (zero when `exact`) and then by cut.
fn fm_refine(g: &WeightedGraph, side: &mut [u8], target0: u64, tol: u64, exact: bool, passes: usize) {
    const STALL: usize = 64;
    let n = g.n_vertices();
    let free = if exact { 0 } else { tol };
    let lo = target0.saturating_sub(tol);
    let hi = target0 + tol;
    for _ in 0..passes {
        let mut gain = gains(g, side);
        let mut w0 = side_weight(g, side);
        let mut cur = cut(g, side);
        let mut best = (w0.abs_diff(target0).saturating_sub(free), cur);
        let start = best;
        let mut best_len = 0;
        let mut locked = vec![false; n];
        let mut moves = Vec::new();
        loop {
            let pick = (0..n)
                .filter(|&v| !locked[v])
                .filter(|&v| {
                    let wv = g.vertex_weight(v);
                    let nw = if side[v] == 0 { w0 - wv } else { w0 + wv };
                    (lo..=hi).contains(&nw) || nw.abs_diff(target0) < w0.abs_diff(target0)
                })
                .max_by_key(|&v| (gain[v], std::cmp::Reverse(v)));
            let Some(v) = pick else { break };
            let wv = g.vertex_weight(v);
            if side[v] == 0 {
                w0 -= wv;
                side[v] = 1;
            } else {
                w0 += wv;
                side[v] = 0;
            }
            cur = (cur as i64 - gain[v]) as u64;
            gain[v] = -gain[v];
            for (u, w) in g.neighbors(v) {
                if side[u] == side[v] {
                    gain[u] -= 2 * w as i64;
                } else {
                    gain[u] += 2 * w as i64;
                }
            }
            locked[v] = true;
            moves.push(v);
            let s = (w0.abs_diff(target0).saturating_sub(free), cur);
            if s < best {
                best = s;
                best_len = moves.len();
            }
            if moves.len() - best_len > STALL {
                break;
            }
        }
        for &v in &moves[best_len..] {
            side[v] ^= 1;
        }
        if best >= start {
            break;
        }
    }
}

/// Moves the cheapest vertices off the heavy side until side 0 weighs
/// `target0` or no vertex fits the remaining difference.
fn rebalance(g: &WeightedGraph, side: &mut [u8], target0: u64) {
    loop {
        let w0 = side_weight(g, side);
        if w0 == target0 {
            return;
        }
        let from = u8::from(w0 < target0);
        let diff = w0.abs_diff(target0);
        let gain = gains(g, side);
        let pick = (0..g.n_vertices())
            .filter(|&v| side[v] == from && g.vertex_weight(v) <= diff)
            .max_by_key(|&v| (gain[v], std::cmp::Reverse(v)));
        match pick {
            Some(v) => side[v] ^= 1,
            None => return,
        }
    }
}

/// Greedy single-vertex moves between parts with part sizes kept in
/// `[lo, hi]`.
fn kway_refine(g: &WeightedGraph, part: &mut [usize], p: usize, lo: usize, hi: usize, passes: usize) {
    let n = g.n_vertices();
    let mut sizes = vec![0usize; p];
    for &q in part.iter() {
        sizes[q] += 1;
    }
    let mut conn = vec![0u64; p];
    let mut touched = Vec::new();
    for _ in 0..passes {
        let mut moved = false;
        for v in 0..n {
            let from = part[v];
            if sizes[from] <= lo {
                continue;
            }
            for (u, w) in g.neighbors(v) {
                if conn[part[u]] == 0 {
                    touched.push(part[u]);
                }
                conn[part[u]] += w;
            }
            let internal = conn[from];
            let target = touched
                .iter()
                .copied()
                .filter(|&q| q != from && sizes[q] < hi && conn[q] > internal)
                .max_by_key(|&q| (conn[q], std::cmp::Reverse(sizes[q]), std::cmp::Reverse(q)));
            if let Some(q) = target {
                part[v] = q;
                sizes[from] -= 1;
                sizes[q] += 1;
                moved = true;
            }
            for q in touched.drain(..) {
                conn[q] = 0;
            }
        }
        if !moved {
            break;
        }
    }
}
