use crate::model::{MessageContext, Output, Protocol, Transcript, VertexView};
use crate::{Bits, Coins, Graph};

const CUT_TAG: u64 = 0xC07;
const INNER_TAG: u64 = 0x1221;

/// Public side assignment z in {0,1}^n used by the wrapper.
pub fn cut_sides(coins: &Coins, n: usize) -> Vec<bool> {
    let cut = coins.derive(CUT_TAG);
    (0..n).map(|v| cut.public_word(0, v as u64) & 1 == 1).collect()
}

/// Subgraph keeping only edges whose endpoints lie on different sides.
pub fn cut_subgraph(graph: &Graph, sides: &[bool]) -> Graph {
    graph.filter_edges(|a, b| sides[a] != sides[b])
}

/// Runs the inner protocol on the public random cut subgraph. Rounds and
/// bandwidth are those of the inner protocol.
pub struct BipartiteWrapper<P> {
    pub inner: P,
}

impl<P: Protocol> BipartiteWrapper<P> {
    pub fn new(inner: P) -> Self {
        BipartiteWrapper { inner }
    }
}

impl<P: Protocol> Protocol for BipartiteWrapper<P> {
    fn name(&self) -> String {
        format!("bipartite:{}", self.inner.name())
    }
    fn rounds(&self) -> usize {
        self.inner.rounds()
    }
    fn bandwidth(&self) -> usize {
        self.inner.bandwidth()
    }
    fn requires_layout(&self) -> bool {
        self.inner.requires_layout()
    }
    fn message(&self, ctx: &MessageContext<'_>) -> Bits {
        let sides = cut_sides(ctx.coins, ctx.view.n);
        let me = sides[ctx.view.id];
        let view = VertexView {
            id: ctx.view.id,
            n: ctx.view.n,
            neighbors: ctx.view.neighbors.iter().copied().filter(|&w| sides[w] != me).collect(),
        };
        let coins = ctx.coins.derive(INNER_TAG);
        self.inner.message(&MessageContext { view: &view, round: ctx.round, board: ctx.board, coins: &coins, layout: ctx.layout })
    }
    fn referee(&self, transcript: &Transcript, coins: &Coins) -> Output {
        self.inner.referee(transcript, &coins.derive(INNER_TAG))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::Variant;
    use crate::model::run_protocol;
    use crate::oracles::max_matching_size;
    use crate::protocols::{FullBroadcast, Greedy};

    #[test]
    fn k2_edge_survives_half_the_time() {
        let g = Graph::complete(2);
        let kept = (0..4000).filter(|&s| cut_subgraph(&g, &cut_sides(&Coins::new(s), 2)).edge_count() == 1).count();
        assert!((kept as f64 / 4000.0 - 0.5).abs() < 0.03, "{kept}");
    }

    #[test]
    fn wrapper_matches_inner_on_cut_graph() {
        let g = Graph::complete(6);
        let inner = FullBroadcast { variant: Variant::Apx, bandwidth: 6 };
        let wrapped = BipartiteWrapper::new(inner);
        for seed in 0..20 {
            let ex = run_protocol(&g, None, &wrapped, seed).unwrap();
            let cut = cut_subgraph(&g, &cut_sides(&Coins::new(seed), 6));
            let Output::Matching(m) = ex.output else { panic!() };
            assert_eq!(m.len(), max_matching_size(&cut));
            assert!(m.pairs().iter().all(|&(a, b)| cut.has_edge(a, b)));
            assert_eq!(ex.transcript.round_count(), 1);
        }
    }

    #[test]
    fn wrapper_keeps_bandwidth() {
        let inner = Greedy { bandwidth: 3 };
        let w = BipartiteWrapper::new(inner);
        assert_eq!(w.bandwidth(), inner.bandwidth());
        assert_eq!(w.rounds(), inner.rounds());
    }
}
