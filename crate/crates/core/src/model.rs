//! The shared-blackboard execution model.
//!
//! Every vertex sees its own label, `n`, and its neighbor list. In each
//! synchronous round all vertices post a message computed from that view and
//! the blackboard contents of earlier rounds. A referee maps the final
//! blackboard to an output.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bits::Bits;
use crate::coins::Coins;
use crate::layout::BlockLayout;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ModelError {
    #[error("vertex {vertex} sent {len} bits in round {round}, bandwidth is {bandwidth}")]
    BandwidthExceeded { vertex: usize, round: usize, len: usize, bandwidth: usize },
    #[error("vertex {0} out of range for n = {1}")]
    OutOfRange(usize, usize),
    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(usize, usize),
    #[error("graph must have at least one vertex")]
    EmptyGraph,
    #[error("protocol {0} requires a block layout")]
    LayoutRequired(String),
    #[error("layout covers {layout} vertices but graph has {graph}")]
    LayoutMismatch { layout: usize, graph: usize },
    #[error("matching pairs share vertex {0}")]
    NotDisjoint(usize),
}

#[derive(Serialize, Deserialize)]
struct GraphRepr {
    n: usize,
    edges: Vec<(usize, usize)>,
}

/// A simple undirected graph on `0..n` with a canonical sorted edge list.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "GraphRepr", into = "GraphRepr")]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize)>,
    adj: Vec<Vec<usize>>,
}

impl TryFrom<GraphRepr> for Graph {
    type Error = ModelError;
    fn try_from(r: GraphRepr) -> Result<Self, Self::Error> {
        Graph::new(r.n, r.edges)
    }
}

impl From<Graph> for GraphRepr {
    fn from(g: Graph) -> Self {
        GraphRepr { n: g.n, edges: g.edges }
    }
}

impl Graph {
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self, ModelError> {
        let mut canon = Vec::new();
        for (a, b) in edges {
            if a >= n {
                return Err(ModelError::OutOfRange(a, n));
            }
            if b >= n {
                return Err(ModelError::OutOfRange(b, n));
            }
            if a == b {
                return Err(ModelError::SelfLoop(a));
            }
            canon.push((a.min(b), a.max(b)));
        }
        canon.sort_unstable();
        if let Some(w) = canon.windows(2).find(|w| w[0] == w[1]) {
            return Err(ModelError::DuplicateEdge(w[0].0, w[0].1));
        }
        let mut adj = vec![Vec::new(); n];
        for &(a, b) in &canon {
            adj[a].push(b);
            adj[b].push(a);
        }
        for row in &mut adj {
            row.sort_unstable();
        }
        Ok(Graph { n, edges: canon, adj })
    }

    /// Like [`Graph::new`] but silently merges duplicate edges.
    pub fn from_edge_set(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self, ModelError> {
        let set: BTreeSet<(usize, usize)> = edges.into_iter().map(|(a, b)| (a.min(b), a.max(b))).collect();
        Graph::new(n, set)
    }

    pub fn empty(n: usize) -> Self {
        Graph { n, edges: Vec::new(), adj: vec![Vec::new(); n] }
    }

    pub fn complete(n: usize) -> Self {
        Graph::new(n, (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b)))).expect("valid")
    }

    pub fn path(n: usize) -> Self {
        Graph::new(n, (1..n).map(|b| (b - 1, b))).expect("valid")
    }

    pub fn cycle(n: usize) -> Self {
        assert!(n >= 3, "cycle needs at least 3 vertices");
        Graph::new(n, (0..n).map(|a| (a, (a + 1) % n))).expect("valid")
    }

    /// Erdős–Rényi G(n, p).
    pub fn gnp<R: Rng + ?Sized>(n: usize, p: f64, rng: &mut R) -> Self {
        let edges: Vec<_> = (0..n)
            .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
            .filter(|_| rng.gen_bool(p))
            .collect();
        Graph::new(n, edges).expect("valid")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        a < self.n && self.adj[a].binary_search(&b).is_ok()
    }

    /// Apply a relabeling `perm[old] = new`.
    pub fn relabel(&self, perm: &[usize]) -> Self {
        Graph::new(self.n, self.edges.iter().map(|&(a, b)| (perm[a], perm[b]))).expect("perm is a bijection")
    }

    /// Induced subgraph on `vertices`, relabeled to `0..vertices.len()` in the given order.
    pub fn induced(&self, vertices: &[usize]) -> Self {
        let mut local = vec![usize::MAX; self.n];
        for (i, &v) in vertices.iter().enumerate() {
            local[v] = i;
        }
        let edges = self
            .edges
            .iter()
            .filter(|&&(a, b)| local[a] != usize::MAX && local[b] != usize::MAX)
            .map(|&(a, b)| (local[a], local[b]));
        Graph::new(vertices.len(), edges).expect("induced subgraph is simple")
    }

    /// Keep only the edges satisfying `keep`.
    pub fn filter_edges(&self, mut keep: impl FnMut(usize, usize) -> bool) -> Self {
        let edges: Vec<_> = self.edges.iter().copied().filter(|&(a, b)| keep(a, b)).collect();
        Graph::new(self.n, edges).expect("subset of a simple graph")
    }

    pub fn random_relabel<R: Rng + ?Sized>(&self, rng: &mut R) -> (Self, Vec<usize>) {
        let mut perm: Vec<usize> = (0..self.n).collect();
        perm.shuffle(rng);
        (self.relabel(&perm), perm)
    }
}

/// What a single vertex knows about the input.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct VertexView {
    pub id: usize,
    pub n: usize,
    pub neighbors: Vec<usize>,
}

impl VertexView {
    pub fn has_neighbor(&self, u: usize) -> bool {
        self.neighbors.binary_search(&u).is_ok()
    }
}

pub fn vertex_view(graph: &Graph, v: usize) -> Result<VertexView, ModelError> {
    if v >= graph.n {
        return Err(ModelError::OutOfRange(v, graph.n));
    }
    Ok(VertexView { id: v, n: graph.n, neighbors: graph.adj[v].clone() })
}

/// A matching candidate: pairwise vertex-disjoint pairs, not necessarily edges.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Matching(Vec<(usize, usize)>);

impl Matching {
    pub fn new(pairs: impl IntoIterator<Item = (usize, usize)>) -> Result<Self, ModelError> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for (a, b) in pairs {
            if a == b {
                return Err(ModelError::NotDisjoint(a));
            }
            for x in [a, b] {
                if !seen.insert(x) {
                    return Err(ModelError::NotDisjoint(x));
                }
            }
            out.push((a.min(b), a.max(b)));
        }
        out.sort_unstable();
        Ok(Matching(out))
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Pairs with both endpoints in `keep`.
    pub fn restrict(&self, keep: &BTreeSet<usize>) -> Matching {
        Matching(self.0.iter().copied().filter(|(a, b)| keep.contains(a) && keep.contains(b)).collect())
    }
}

impl<'de> Deserialize<'de> for Matching {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let pairs = Vec::<(usize, usize)>::deserialize(d)?;
        Matching::new(pairs).map_err(serde::de::Error::custom)
    }
}

/// Referee output.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum Output {
    Mis(BTreeSet<usize>),
    Matching(Matching),
    /// The protocol ran out of rounds; carries what it had decided so far.
    Unfinished(BTreeSet<usize>),
}

impl Output {
    /// Restrict to a vertex subset: MIS sets are intersected, matchings keep
    /// only pairs inside the subset.
    pub fn restrict(&self, keep: &BTreeSet<usize>) -> Output {
        match self {
            Output::Mis(s) => Output::Mis(s.intersection(keep).copied().collect()),
            Output::Unfinished(s) => Output::Unfinished(s.intersection(keep).copied().collect()),
            Output::Matching(m) => Output::Matching(m.restrict(keep)),
        }
    }

    /// Relabel through `map[old] = new`; labels outside the map are dropped.
    pub fn relabel(&self, map: impl Fn(usize) -> Option<usize>) -> Output {
        let set = |s: &BTreeSet<usize>| s.iter().filter_map(|&v| map(v)).collect();
        match self {
            Output::Mis(s) => Output::Mis(set(s)),
            Output::Unfinished(s) => Output::Unfinished(set(s)),
            Output::Matching(m) => Output::Matching(
                Matching::new(m.pairs().iter().filter_map(|&(a, b)| Some((map(a)?, map(b)?))))
                    .expect("injective relabel keeps pairs disjoint"),
            ),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct RoundRepr {
    messages: Vec<Bits>,
}

#[derive(Serialize, Deserialize)]
struct TranscriptRepr {
    rounds: Vec<RoundRepr>,
}

/// Blackboard contents, `rounds[t][v]` is vertex v's message in round t+1.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(from = "TranscriptRepr", into = "TranscriptRepr")]
pub struct Transcript {
    n: usize,
    rounds: Vec<Vec<Bits>>,
}

impl From<TranscriptRepr> for Transcript {
    fn from(r: TranscriptRepr) -> Self {
        let rounds: Vec<Vec<Bits>> = r.rounds.into_iter().map(|x| x.messages).collect();
        Transcript { n: rounds.first().map_or(0, Vec::len), rounds }
    }
}

impl From<Transcript> for TranscriptRepr {
    fn from(t: Transcript) -> Self {
        TranscriptRepr { rounds: t.rounds.into_iter().map(|messages| RoundRepr { messages }).collect() }
    }
}

impl Transcript {
    pub fn new(n: usize, rounds: Vec<Vec<Bits>>) -> Self {
        debug_assert!(rounds.iter().all(|r| r.len() == n));
        Transcript { n, rounds }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn round_count(&self) -> usize {
        self.rounds.len()
    }

    pub fn rounds(&self) -> &[Vec<Bits>] {
        &self.rounds
    }

    /// Messages of round `t` (1-based).
    pub fn round(&self, t: usize) -> &[Bits] {
        &self.rounds[t - 1]
    }

    pub fn message(&self, t: usize, v: usize) -> &Bits {
        &self.rounds[t - 1][v]
    }

    pub fn max_bits(&self) -> usize {
        self.rounds.iter().flatten().map(Bits::len).max().unwrap_or(0)
    }

    /// Messages of round `t` from the given vertices, in order.
    pub fn messages_of(&self, t: usize, vertices: &[usize]) -> Vec<Bits> {
        vertices.iter().map(|&v| self.rounds[t - 1][v].clone()).collect()
    }

    /// Round-`t` messages of principal block `i`.
    pub fn principal_block(&self, layout: &BlockLayout, t: usize, i: usize) -> Vec<Bits> {
        self.messages_of(t, &layout.principal()[i])
    }

    /// Round-`t` messages of all fooling vertices, block by block.
    pub fn fooling_blocks(&self, layout: &BlockLayout, t: usize) -> Vec<Bits> {
        layout.fooling().iter().flat_map(|b| self.messages_of(t, b)).collect()
    }
}

/// Arguments available to a vertex when it writes its message.
pub struct MessageContext<'a> {
    pub view: &'a VertexView,
    /// 1-based round index.
    pub round: usize,
    /// Messages of rounds `1..round`.
    pub board: &'a [Vec<Bits>],
    pub coins: &'a Coins,
    /// Public block structure when the input comes from a hard distribution.
    pub layout: Option<&'a BlockLayout>,
}

pub trait Protocol: Send + Sync {
    fn name(&self) -> String;
    fn rounds(&self) -> usize;
    fn bandwidth(&self) -> usize;
    fn requires_layout(&self) -> bool {
        false
    }
    fn message(&self, ctx: &MessageContext<'_>) -> Bits;
    fn referee(&self, transcript: &Transcript, coins: &Coins) -> Output;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RunMode {
    /// Fail on the first over-long message.
    #[default]
    Strict,
    /// Record violations and keep going, so the referee still runs.
    Diagnostic,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Execution {
    pub transcript: Transcript,
    pub output: Output,
    pub max_bits: usize,
    pub violations: Vec<ModelError>,
}

pub fn run_protocol(
    graph: &Graph,
    layout: Option<&BlockLayout>,
    protocol: &dyn Protocol,
    seed: u64,
) -> Result<Execution, ModelError> {
    run_protocol_with(graph, layout, protocol, seed, RunMode::Strict)
}

pub fn run_protocol_with(
    graph: &Graph,
    layout: Option<&BlockLayout>,
    protocol: &dyn Protocol,
    seed: u64,
    mode: RunMode,
) -> Result<Execution, ModelError> {
    if graph.n() == 0 {
        return Err(ModelError::EmptyGraph);
    }
    if let Some(l) = layout {
        if l.n() != graph.n() {
            return Err(ModelError::LayoutMismatch { layout: l.n(), graph: graph.n() });
        }
    } else if protocol.requires_layout() {
        return Err(ModelError::LayoutRequired(protocol.name()));
    }
    let coins = Coins::new(seed);
    let views: Vec<VertexView> = (0..graph.n()).map(|v| vertex_view(graph, v).expect("in range")).collect();
    let bandwidth = protocol.bandwidth();
    let mut board: Vec<Vec<Bits>> = Vec::with_capacity(protocol.rounds());
    let mut violations = Vec::new();
    for round in 1..=protocol.rounds() {
        let mut messages = Vec::with_capacity(graph.n());
        for view in &views {
            let ctx = MessageContext { view, round, board: &board, coins: &coins, layout };
            let m = protocol.message(&ctx);
            if m.len() > bandwidth {
                let err = ModelError::BandwidthExceeded { vertex: view.id, round, len: m.len(), bandwidth };
                match mode {
                    RunMode::Strict => return Err(err),
                    RunMode::Diagnostic => violations.push(err),
                }
            }
            messages.push(m);
        }
        board.push(messages);
    }
    let transcript = Transcript::new(graph.n(), board);
    let output = protocol.referee(&transcript, &coins);
    Ok(Execution { max_bits: transcript.max_bits(), transcript, output, violations })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn graph_is_canonical() {
        let g = Graph::new(3, [(2, 1), (0, 1)]).unwrap();
        assert_eq!(g.edges(), &[(0, 1), (1, 2)]);
        assert_eq!(serde_json::to_string(&g).unwrap(), r#"{"n":3,"edges":[[0,1],[1,2]]}"#);
        assert_eq!(Graph::new(2, [(0, 0)]), Err(ModelError::SelfLoop(0)));
        assert_eq!(Graph::new(2, [(0, 1), (1, 0)]), Err(ModelError::DuplicateEdge(0, 1)));
        assert_eq!(Graph::new(2, [(0, 2)]), Err(ModelError::OutOfRange(2, 2)));
        let back: Graph = serde_json::from_str(r#"{"n":3,"edges":[[2,1]]}"#).unwrap();
        assert_eq!(back.edges(), &[(1, 2)]);
    }

    #[test]
    fn views() {
        assert_eq!(vertex_view(&Graph::complete(2), 0).unwrap().neighbors, vec![1]);
        assert!(vertex_view(&Graph::empty(4), 2).unwrap().neighbors.is_empty());
        assert_eq!(vertex_view(&Graph::path(3), 1).unwrap().neighbors, vec![0, 2]);
        assert_eq!(vertex_view(&Graph::path(3), 3), Err(ModelError::OutOfRange(3, 3)));
    }

    #[test]
    fn matching_rejects_overlap() {
        assert_eq!(Matching::new([(0, 1), (1, 2)]), Err(ModelError::NotDisjoint(1)));
        let m = Matching::new([(3, 2), (0, 1)]).unwrap();
        assert_eq!(m.pairs(), &[(0, 1), (2, 3)]);
    }

    #[test]
    fn transcript_json_shape() {
        let t = Transcript::new(2, vec![vec!["01".parse().unwrap(), Bits::empty()]]);
        let s = serde_json::to_string(&t).unwrap();
        assert_eq!(s, r#"{"rounds":[{"messages":["01",""]}]}"#);
        let back: Transcript = serde_json::from_str(&s).unwrap();
        assert_eq!(back, t);
        assert_eq!(back.max_bits(), 2);
    }

    struct Loud;
    impl Protocol for Loud {
        fn name(&self) -> String {
            "loud".into()
        }
        fn rounds(&self) -> usize {
            1
        }
        fn bandwidth(&self) -> usize {
            1
        }
        fn message(&self, _: &MessageContext<'_>) -> Bits {
            "11".parse().unwrap()
        }
        fn referee(&self, _: &Transcript, _: &Coins) -> Output {
            Output::Mis(BTreeSet::new())
        }
    }

    #[test]
    fn bandwidth_strict_and_diagnostic() {
        let g = Graph::empty(2);
        let err = run_protocol(&g, None, &Loud, 0).unwrap_err();
        assert_eq!(err, ModelError::BandwidthExceeded { vertex: 0, round: 1, len: 2, bandwidth: 1 });
        let ex = run_protocol_with(&g, None, &Loud, 0, RunMode::Diagnostic).unwrap();
        assert_eq!(ex.violations.len(), 2);
        assert_eq!(ex.max_bits, 2);
        assert_eq!(ex.output, Output::Mis(BTreeSet::new()));
    }
}
