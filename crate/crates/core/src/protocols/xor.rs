use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::layout::Role;
use crate::model::{MessageContext, Output, Protocol, Transcript};
use crate::{Bits, BlockLayout, Coins};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum XorVariant {
    /// One round. Edges get a public orientation; principal vertices send the
    /// parity of their outgoing edges, fooling vertices the parity of their
    /// incoming edges from the target block.
    DirectedRound1,
    /// One round. Principal vertices send 0, fooling vertices the parity of
    /// their edges to principal vertices.
    FoolingXor,
    /// Two rounds. Round 1: principal vertices send the parity of their edges
    /// inside their block. Round 2: every vertex sends the parity of its
    /// principal-fooling edges.
    SymmetricXor,
}

impl XorVariant {
    pub const ALL: [XorVariant; 3] = [XorVariant::DirectedRound1, XorVariant::FoolingXor, XorVariant::SymmetricXor];
}

impl fmt::Display for XorVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            XorVariant::DirectedRound1 => "directed_round1",
            XorVariant::FoolingXor => "fooling_xor",
            XorVariant::SymmetricXor => "symmetric_xor",
        })
    }
}

impl FromStr for XorVariant {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        XorVariant::ALL
            .into_iter()
            .find(|v| v.to_string() == s)
            .ok_or_else(|| format!("unknown xor variant {s:?}"))
    }
}

/// Parity-leaking one-bit protocols used to stress the leakage accounting.
///
/// Roles are read from the public block layout.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct XorProtocol {
    pub variant: XorVariant,
    /// Principal block targeted by `DirectedRound1`.
    pub target: usize,
}

impl XorProtocol {
    pub fn new(variant: XorVariant) -> Self {
        XorProtocol { variant, target: 0 }
    }

    pub fn targeting(variant: XorVariant, target: usize) -> Self {
        XorProtocol { variant, target }
    }
}

/// Public orientation of edge {a, b}: true when it points from min to max.
pub fn orientation(coins: &Coins, a: usize, b: usize, n: usize) -> bool {
    let (x, y) = (a.min(b), a.max(b));
    coins.public_word(1, (x * n + y) as u64) & 1 == 0
}

fn parity(it: impl Iterator<Item = bool>) -> Bits {
    Bits::single(it.fold(false, |acc, b| acc ^ b))
}

fn fooling_edges(layout: &BlockLayout, v: usize, neighbors: &[usize]) -> usize {
    let principal = layout.is_principal(v);
    neighbors.iter().filter(|&&w| layout.is_principal(w) != principal).count()
}

impl Protocol for XorProtocol {
    fn name(&self) -> String {
        format!("xor:{}", self.variant)
    }

    fn rounds(&self) -> usize {
        match self.variant {
            XorVariant::SymmetricXor => 2,
            _ => 1,
        }
    }

    fn bandwidth(&self) -> usize {
        1
    }

    fn requires_layout(&self) -> bool {
        true
    }

    fn message(&self, ctx: &MessageContext<'_>) -> Bits {
        let layout = ctx.layout.expect("layout checked by the runner");
        let v = ctx.view.id;
        let nb = &ctx.view.neighbors;
        let (role, _) = layout.role(v);
        match (self.variant, ctx.round, role) {
            (XorVariant::DirectedRound1, _, Role::Principal(_)) => {
                parity(nb.iter().map(|&w| orientation(ctx.coins, v, w, ctx.view.n) == (v < w)))
            }
            (XorVariant::DirectedRound1, _, Role::Fooling(_)) => parity(
                nb.iter()
                    .filter(|&&w| layout.role(w).0 == Role::Principal(self.target))
                    .map(|&w| orientation(ctx.coins, w, v, ctx.view.n) == (w < v)),
            ),
            (XorVariant::FoolingXor, _, Role::Principal(_)) => Bits::single(false),
            (XorVariant::FoolingXor, _, Role::Fooling(_)) => {
                parity(std::iter::repeat_n(true, fooling_edges(layout, v, nb)))
            }
            (XorVariant::SymmetricXor, 1, Role::Principal(i)) => {
                parity(nb.iter().map(|&w| layout.role(w).0 == Role::Principal(i)))
            }
            (XorVariant::SymmetricXor, 1, Role::Fooling(_)) => Bits::single(false),
            (XorVariant::SymmetricXor, _, _) => parity(std::iter::repeat_n(true, fooling_edges(layout, v, nb))),
        }
    }

    fn referee(&self, transcript: &Transcript, _: &Coins) -> Output {
        Output::Mis((0..transcript.n()).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::{make_params, sample_mis_hard, SigmaMode, ToyOverrides, Variant};
    use crate::model::run_protocol;
    use crate::Graph;

    #[test]
    fn directed_parity_recovers_block_parity() {
        let params = make_params(1, 1, Some(&ToyOverrides { f: vec![1], p: vec![2] }), Variant::Mis).unwrap();
        for seed in 0..40 {
            let inst = sample_mis_hard(&params, seed, SigmaMode::Full).unwrap();
            let layout = inst.layout.as_ref().unwrap();
            for target in 0..layout.principal_count() {
                let p = XorProtocol::targeting(XorVariant::DirectedRound1, target);
                let ex = run_protocol(&inst.graph, Some(layout), &p, seed).unwrap();
                let mut acc = false;
                for m in ex.transcript.principal_block(layout, 1, target) {
                    acc ^= m.parity();
                }
                for m in ex.transcript.fooling_blocks(layout, 1) {
                    acc ^= m.parity();
                }
                assert_eq!(acc, inst.blocks[target].b.len() % 2 == 1, "seed {seed} block {target}");
            }
        }
    }

    #[test]
    fn zero_edges_zero_bits() {
        let params = make_params(1, 1, Some(&ToyOverrides { f: vec![1], p: vec![1] }), Variant::Apx).unwrap();
        let inst = crate::distributions::sample_apx_hard(&params, 0, SigmaMode::Identity).unwrap();
        let layout = inst.layout.unwrap();
        for v in XorVariant::ALL {
            let ex = run_protocol(&Graph::empty(layout.n()), Some(&layout), &XorProtocol::new(v), 1).unwrap();
            assert!(ex.transcript.rounds().iter().flatten().all(|m| m.as_slice() == [false]));
        }
    }

    #[test]
    fn layout_is_required() {
        let err = run_protocol(&Graph::empty(3), None, &XorProtocol::new(XorVariant::FoolingXor), 0).unwrap_err();
        assert!(matches!(err, crate::model::ModelError::LayoutRequired(_)));
    }

    #[test]
    fn variant_names_round_trip() {
        for v in XorVariant::ALL {
            assert_eq!(v.to_string().parse::<XorVariant>().unwrap(), v);
        }
    }
}
