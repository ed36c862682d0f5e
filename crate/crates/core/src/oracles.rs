//! Brute-force ground truth for MIS and matching questions on small graphs.

use std::collections::BTreeSet;

use petgraph::graph::UnGraph;
use serde::{Deserialize, Serialize};

use crate::model::{Graph, Matching};

/// Largest vertex count accepted by the exhaustive routines.
pub const EXHAUSTIVE_LIMIT: usize = 24;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OracleError {
    #[error("graph has {0} vertices; exhaustive search is capped at {EXHAUSTIVE_LIMIT}")]
    TooLarge(usize),
    #[error("pairs share vertex {0}")]
    NotDisjoint(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchingScore {
    pub valid_edges: usize,
    pub total_pairs: usize,
}

pub fn is_independent(graph: &Graph, s: &BTreeSet<usize>) -> bool {
    s.iter().all(|&v| v < graph.n() && graph.neighbors(v).iter().all(|u| !s.contains(u)))
}

pub fn is_mis(graph: &Graph, s: &BTreeSet<usize>) -> bool {
    is_independent(graph, s)
        && (0..graph.n()).all(|v| s.contains(&v) || graph.neighbors(v).iter().any(|u| s.contains(u)))
}

fn neighbor_masks(graph: &Graph) -> Vec<u32> {
    (0..graph.n())
        .map(|v| graph.neighbors(v).iter().fold(0u32, |m, &u| m | (1 << u)))
        .collect()
}

/// Every maximal independent set, in lexicographic order of sorted members.
pub fn enumerate_all_mis(graph: &Graph) -> Result<Vec<BTreeSet<usize>>, OracleError> {
    let n = graph.n();
    if n > EXHAUSTIVE_LIMIT {
        return Err(OracleError::TooLarge(n));
    }
    let nb = neighbor_masks(graph);
    let mut found = Vec::new();
    search_mis(0, 0, n, &nb, &mut found);
    let mut sets: Vec<BTreeSet<usize>> = found
        .into_iter()
        .map(|m| (0..n).filter(|v| m & (1 << v) != 0).collect())
        .collect();
    sets.sort();
    Ok(sets)
}

fn search_mis(v: usize, chosen: u32, n: usize, nb: &[u32], out: &mut Vec<u32>) {
    if v == n {
        let covered = (0..n).all(|x| chosen & (1 << x) != 0 || chosen & nb[x] != 0);
        if covered {
            out.push(chosen);
        }
        return;
    }
    if chosen & nb[v] == 0 {
        search_mis(v + 1, chosen | (1 << v), n, nb, out);
    }
    // Excluding v is only viable if it is already covered or some later
    // neighbor could still cover it.
    let later = nb[v] >> (v + 1) != 0;
    if chosen & nb[v] != 0 || later {
        search_mis(v + 1, chosen, n, nb, out);
    }
}

/// Maximum matching size by memoised search over vertex subsets.
pub fn max_matching_exhaustive(graph: &Graph) -> Result<usize, OracleError> {
    let n = graph.n();
    if n > EXHAUSTIVE_LIMIT {
        return Err(OracleError::TooLarge(n));
    }
    let nb = neighbor_masks(graph);
    let mut memo = vec![u8::MAX; 1usize << n];
    let full = if n == 0 { 0 } else { (1u32 << n) - 1 };
    Ok(matching_dp(full, &nb, &mut memo) as usize)
}

fn matching_dp(mask: u32, nb: &[u32], memo: &mut [u8]) -> u8 {
    if mask == 0 {
        return 0;
    }
    if memo[mask as usize] != u8::MAX {
        return memo[mask as usize];
    }
    let v = mask.trailing_zeros() as usize;
    let rest = mask & !(1 << v);
    let mut best = matching_dp(rest, nb, memo);
    let mut cand = nb[v] & rest;
    while cand != 0 {
        let u = cand.trailing_zeros();
        cand &= cand - 1;
        best = best.max(1 + matching_dp(rest & !(1 << u), nb, memo));
    }
    memo[mask as usize] = best;
    best
}

/// A maximum matching via the blossom method.
pub fn max_matching_blossom(graph: &Graph) -> Matching {
    let mut g = UnGraph::<(), ()>::with_capacity(graph.n(), graph.edge_count());
    let nodes: Vec<_> = (0..graph.n()).map(|_| g.add_node(())).collect();
    for &(a, b) in graph.edges() {
        g.add_edge(nodes[a], nodes[b], ());
    }
    let m = petgraph::algo::maximum_matching(&g);
    Matching::new(m.edges().map(|(a, b)| (a.index(), b.index()))).expect("a matching is disjoint")
}

/// μ(G). Small graphs use the exhaustive search, larger ones the blossom method.
pub fn max_matching_size(graph: &Graph) -> usize {
    if graph.n() <= 16 {
        max_matching_exhaustive(graph).expect("under the cap")
    } else {
        max_matching_blossom(graph).len()
    }
}

pub fn matching_score(graph: &Graph, pairs: &[(usize, usize)]) -> Result<MatchingScore, OracleError> {
    let mut seen = BTreeSet::new();
    for &(a, b) in pairs {
        for x in [a, b] {
            if !seen.insert(x) {
                return Err(OracleError::NotDisjoint(x));
            }
        }
    }
    let valid_edges = pairs.iter().filter(|&&(a, b)| graph.has_edge(a, b)).count();
    Ok(MatchingScore { valid_edges, total_pairs: pairs.len() })
}

/// Matching edges `(2i, 2i+1)` of the base MIS instance that an MIS proves absent.
pub fn decode_dropped_edges(k: usize, s: &BTreeSet<usize>) -> Vec<(usize, usize)> {
    (0..k)
        .map(|i| (2 * i, 2 * i + 1))
        .filter(|(a, b)| s.contains(a) && s.contains(b))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(v: &[usize]) -> BTreeSet<usize> {
        v.iter().copied().collect()
    }

    #[test]
    fn mis_checks() {
        let k2 = Graph::complete(2);
        assert!(is_mis(&k2, &set(&[0])));
        assert!(!is_mis(&k2, &set(&[0, 1])));
        assert!(!is_mis(&Graph::path(3), &set(&[0])));
    }

    #[test]
    fn enumeration_examples() {
        assert_eq!(enumerate_all_mis(&Graph::empty(3)).unwrap(), vec![set(&[0, 1, 2])]);
        assert_eq!(
            enumerate_all_mis(&Graph::complete(3)).unwrap(),
            vec![set(&[0]), set(&[1]), set(&[2])]
        );
        assert_eq!(enumerate_all_mis(&Graph::cycle(4)).unwrap(), vec![set(&[0, 2]), set(&[1, 3])]);
        assert_eq!(enumerate_all_mis(&Graph::empty(25)), Err(OracleError::TooLarge(25)));
    }

    #[test]
    fn matching_examples() {
        assert_eq!(max_matching_size(&Graph::complete(2)), 1);
        assert_eq!(max_matching_size(&Graph::cycle(4)), 2);
        assert_eq!(max_matching_blossom(&Graph::cycle(5)).len(), 2);
        let g = Graph::new(4, [(0, 1)]).unwrap();
        assert_eq!(matching_score(&g, &[(0, 1)]).unwrap().valid_edges, 1);
        assert_eq!(
            matching_score(&g, &[(0, 1), (2, 3)]).unwrap(),
            MatchingScore { valid_edges: 1, total_pairs: 2 }
        );
        assert_eq!(matching_score(&g, &[(0, 1), (1, 2)]), Err(OracleError::NotDisjoint(1)));
    }

    #[test]
    fn decoding() {
        assert_eq!(decode_dropped_edges(1, &set(&[0, 1])), vec![(0, 1)]);
        assert!(decode_dropped_edges(1, &set(&[0])).is_empty());
        assert_eq!(decode_dropped_edges(2, &set(&[0, 2, 3])), vec![(2, 3)]);
    }
}
