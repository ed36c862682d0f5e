use std::collections::{BTreeSet, HashMap};
use std::sync::Mutex;

use crate::distributions::Variant;
use crate::model::{MessageContext, Output, Protocol, Transcript};
use crate::oracles::max_matching_blossom;
use crate::{Bits, Coins, Graph, Matching};

use super::zero_round::{best_zero_round_referee_apx, best_zero_round_referee_mis};

/// Output used by referees that learn nothing: every vertex for MIS, the
/// pairing (i, i + n/2) for matching.
pub fn blind_output(variant: Variant, n: usize) -> Output {
    match variant {
        Variant::Mis => Output::Mis((0..n).collect()),
        Variant::Apx => Output::Matching(Matching::new((0..n / 2).map(|i| (i, i + n / 2))).expect("disjoint")),
    }
}

/// Sends empty messages for a number of rounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Silent {
    pub rounds: usize,
    pub variant: Variant,
}

impl Protocol for Silent {
    fn name(&self) -> String {
        format!("silent:{}", self.rounds)
    }
    fn rounds(&self) -> usize {
        self.rounds
    }
    fn bandwidth(&self) -> usize {
        0
    }
    fn message(&self, _: &MessageContext<'_>) -> Bits {
        Bits::empty()
    }
    fn referee(&self, transcript: &Transcript, _: &Coins) -> Output {
        blind_output(self.variant, transcript.n())
    }
}

/// No communication; the referee answers with a fixed output.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FixedOutput(pub Output);

impl Protocol for FixedOutput {
    fn name(&self) -> String {
        "fixed".into()
    }
    fn rounds(&self) -> usize {
        0
    }
    fn bandwidth(&self) -> usize {
        0
    }
    fn message(&self, _: &MessageContext<'_>) -> Bits {
        Bits::empty()
    }
    fn referee(&self, _: &Transcript, _: &Coins) -> Output {
        self.0.clone()
    }
}

/// No communication; the referee answers with the best fixed output for the
/// base-case distribution on `n = 2k` vertices, found by exhaustive search.
/// Larger inputs fall back to the blind output.
#[derive(Debug)]
pub struct ZeroRound {
    pub variant: Variant,
    cache: Mutex<HashMap<usize, Output>>,
}

impl ZeroRound {
    pub fn new(variant: Variant) -> Self {
        ZeroRound { variant, cache: Mutex::new(HashMap::new()) }
    }

    fn best(&self, n: usize) -> Output {
        let mut cache = self.cache.lock().expect("cache poisoned");
        cache
            .entry(n)
            .or_insert_with(|| {
                let found = match self.variant {
                    _ if n % 2 == 1 => None,
                    Variant::Mis => best_zero_round_referee_mis(n / 2).ok(),
                    Variant::Apx => best_zero_round_referee_apx(n / 2).ok(),
                };
                found.map_or_else(|| blind_output(self.variant, n), |(o, _)| o)
            })
            .clone()
    }
}

impl Protocol for ZeroRound {
    fn name(&self) -> String {
        "zero-round".into()
    }
    fn rounds(&self) -> usize {
        0
    }
    fn bandwidth(&self) -> usize {
        0
    }
    fn message(&self, _: &MessageContext<'_>) -> Bits {
        Bits::empty()
    }
    fn referee(&self, transcript: &Transcript, _: &Coins) -> Output {
        self.best(transcript.n())
    }
}

fn adjacency_row(ctx: &MessageContext<'_>) -> Bits {
    let mut row = vec![false; ctx.view.n];
    for &w in &ctx.view.neighbors {
        row[w] = true;
    }
    Bits::from_bools(row)
}

fn graph_from_rows(rows: &[Bits]) -> Graph {
    let n = rows.len();
    let edges = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).filter(|&(a, b)| rows[a].get(b) == Some(true));
    Graph::new(n, edges).expect("rows describe a simple graph")
}

pub fn greedy_mis(graph: &Graph) -> BTreeSet<usize> {
    let mut chosen = BTreeSet::new();
    let mut blocked = vec![false; graph.n()];
    for v in 0..graph.n() {
        if !blocked[v] {
            chosen.insert(v);
            for &w in graph.neighbors(v) {
                blocked[w] = true;
            }
        }
    }
    chosen
}

/// Every vertex writes its adjacency row in one round; the referee solves the
/// problem exactly (lexicographic greedy MIS, or a maximum matching).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FullBroadcast {
    pub variant: Variant,
    pub bandwidth: usize,
}

impl Protocol for FullBroadcast {
    fn name(&self) -> String {
        format!("full-broadcast:{}", self.bandwidth)
    }
    fn rounds(&self) -> usize {
        1
    }
    fn bandwidth(&self) -> usize {
        self.bandwidth
    }
    fn message(&self, ctx: &MessageContext<'_>) -> Bits {
        adjacency_row(ctx)
    }
    fn referee(&self, transcript: &Transcript, _: &Coins) -> Output {
        let graph = graph_from_rows(transcript.round(1));
        match self.variant {
            Variant::Mis => Output::Mis(greedy_mis(&graph)),
            Variant::Apx => Output::Matching(max_matching_blossom(&graph)),
        }
    }
}

/// Number of bits needed to write values `0..=n`.
pub fn label_width(n: usize) -> usize {
    (usize::BITS - n.leading_zeros()) as usize
}

/// One-round matching: each vertex proposes its smallest neighbour (written as
/// `w + 1`, 0 for none); the referee accepts proposals in vertex order while
/// both ends are free.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Greedy {
    pub bandwidth: usize,
}

impl Protocol for Greedy {
    fn name(&self) -> String {
        format!("greedy:{}", self.bandwidth)
    }
    fn rounds(&self) -> usize {
        1
    }
    fn bandwidth(&self) -> usize {
        self.bandwidth
    }
    fn message(&self, ctx: &MessageContext<'_>) -> Bits {
        let width = label_width(ctx.view.n);
        let value = ctx.view.neighbors.first().map_or(0, |&w| w + 1);
        Bits::from_bools((0..width).rev().map(|i| value >> i & 1 == 1).collect())
    }
    fn referee(&self, transcript: &Transcript, _: &Coins) -> Output {
        let n = transcript.n();
        let mut used = vec![false; n];
        let mut pairs = Vec::new();
        for (v, m) in transcript.round(1).iter().enumerate() {
            let value = m.as_slice().iter().fold(0usize, |acc, &b| acc << 1 | b as usize);
            if value == 0 || value > n {
                continue;
            }
            let w = value - 1;
            if w != v && !used[v] && !used[w] {
                used[v] = true;
                used[w] = true;
                pairs.push((v, w));
            }
        }
        Output::Matching(Matching::new(pairs).expect("disjoint by construction"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::run_protocol;
    use crate::oracles::{is_mis, matching_score, max_matching_size};
    use rand::SeedableRng;

    #[test]
    fn full_broadcast_is_exact() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        for _ in 0..20 {
            let g = Graph::gnp(9, 0.4, &mut rng);
            let mis = run_protocol(&g, None, &FullBroadcast { variant: Variant::Mis, bandwidth: 9 }, 0).unwrap();
            match mis.output {
                Output::Mis(s) => assert!(is_mis(&g, &s)),
                o => panic!("{o:?}"),
            }
            let mm = run_protocol(&g, None, &FullBroadcast { variant: Variant::Apx, bandwidth: 9 }, 0).unwrap();
            match mm.output {
                Output::Matching(m) => assert_eq!(m.len(), max_matching_size(&g)),
                o => panic!("{o:?}"),
            }
        }
    }

    #[test]
    fn greedy_matches_real_edges() {
        let g = Graph::complete(4);
        let ex = run_protocol(&g, None, &Greedy { bandwidth: 3 }, 0).unwrap();
        assert_eq!(ex.max_bits, 3);
        let Output::Matching(m) = ex.output else { panic!() };
        let score = matching_score(&g, m.pairs()).unwrap();
        assert_eq!(score.valid_edges, score.total_pairs);
        assert!(score.valid_edges >= 1);
    }

    #[test]
    fn zero_round_referee_uses_best_output() {
        let p = ZeroRound::new(Variant::Mis);
        let ex = run_protocol(&Graph::empty(4), None, &p, 0).unwrap();
        assert_eq!(ex.transcript.round_count(), 0);
        let Output::Mis(s) = ex.output else { panic!() };
        assert!(is_mis(&Graph::empty(4), &s));
    }

    #[test]
    fn label_widths() {
        assert_eq!(label_width(4), 3);
        assert_eq!(label_width(3), 2);
        assert_eq!(label_width(0), 0);
    }
}
