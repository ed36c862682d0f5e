use std::collections::BTreeSet;

use rand::seq::SliceRandom;

use crate::model::{MessageContext, Output, Protocol, Transcript};
use crate::{Bits, Coins};

const JOINED: [bool; 2] = [true, true];
const COVERED: [bool; 2] = [false, true];
const WAITING: [bool; 2] = [false, false];

/// Luby's MIS algorithm on the blackboard, one phase per round.
///
/// Each phase draws a public priority order. An active vertex joins when it
/// outranks every neighbour that has not yet announced itself inactive.
/// Status codes: `11` joined, `01` covered, `00` still active, empty once
/// inactive.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Luby {
    pub max_phases: usize,
}

impl Luby {
    pub fn new(max_phases: usize) -> Self {
        assert!(max_phases >= 1, "Luby needs at least one phase");
        Luby { max_phases }
    }

    /// `8 * ceil(log2 n)` phases, at least one.
    pub fn for_size(n: usize) -> Self {
        let log = usize::BITS - n.saturating_sub(1).leading_zeros();
        Luby::new((8 * log as usize).max(1))
    }
}

fn priorities(coins: &Coins, round: usize, n: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut coins.public(round));
    let mut rank = vec![0; n];
    for (r, &v) in order.iter().enumerate() {
        rank[v] = r;
    }
    rank
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Status {
    Active,
    Joined,
    Covered,
}

fn statuses(board: &[Vec<Bits>], n: usize) -> Vec<Status> {
    let mut s = vec![Status::Active; n];
    for round in board {
        for (v, m) in round.iter().enumerate() {
            if m.as_slice() == JOINED {
                s[v] = Status::Joined;
            } else if m.as_slice() == COVERED {
                s[v] = Status::Covered;
            }
        }
    }
    s
}

/// Number of phases until every vertex had announced itself, if that happened.
pub fn luby_phases(transcript: &Transcript) -> Option<usize> {
    let n = transcript.n();
    let mut done = vec![false; n];
    let mut left = n;
    for (t, round) in transcript.rounds().iter().enumerate() {
        for (v, m) in round.iter().enumerate() {
            if !done[v] && (m.as_slice() == JOINED || m.as_slice() == COVERED) {
                done[v] = true;
                left -= 1;
            }
        }
        if left == 0 {
            return Some(t + 1);
        }
    }
    (left == 0).then_some(0)
}

impl Protocol for Luby {
    fn name(&self) -> String {
        format!("luby:{}", self.max_phases)
    }

    fn rounds(&self) -> usize {
        self.max_phases
    }

    fn bandwidth(&self) -> usize {
        2
    }

    fn message(&self, ctx: &MessageContext<'_>) -> Bits {
        let n = ctx.view.n;
        let status = statuses(ctx.board, n);
        let v = ctx.view.id;
        if status[v] != Status::Active {
            return Bits::empty();
        }
        if ctx.view.neighbors.iter().any(|&w| status[w] == Status::Joined) {
            return Bits::from_bools(COVERED.to_vec());
        }
        let rank = priorities(ctx.coins, ctx.round, n);
        let wins = ctx
            .view
            .neighbors
            .iter()
            .filter(|&&w| status[w] == Status::Active)
            .all(|&w| rank[v] < rank[w]);
        Bits::from_bools(if wins { JOINED } else { WAITING }.to_vec())
    }

    fn referee(&self, transcript: &Transcript, _: &Coins) -> Output {
        let status = statuses(transcript.rounds(), transcript.n());
        let joined: BTreeSet<usize> = (0..transcript.n()).filter(|&v| status[v] == Status::Joined).collect();
        if status.contains(&Status::Active) {
            Output::Unfinished(joined)
        } else {
            Output::Mis(joined)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::run_protocol;
    use crate::oracles::is_mis;
    use crate::Graph;
    use rand::SeedableRng;

    #[test]
    fn empty_graph_finishes_in_one_phase() {
        let ex = run_protocol(&Graph::empty(5), None, &Luby::new(1), 3).unwrap();
        assert_eq!(ex.output, Output::Mis((0..5).collect()));
        assert!(ex.max_bits <= 2);
        assert_eq!(luby_phases(&ex.transcript), Some(1));
    }

    #[test]
    fn complete_graph_picks_one() {
        let ex = run_protocol(&Graph::complete(6), None, &Luby::new(3), 11).unwrap();
        match ex.output {
            Output::Mis(s) => assert_eq!(s.len(), 1),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn random_graphs_give_valid_mis() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        for seed in 0..50 {
            let g = Graph::gnp(16, 0.5, &mut rng);
            let ex = run_protocol(&g, None, &Luby::for_size(16), seed).unwrap();
            match ex.output {
                Output::Mis(s) => assert!(is_mis(&g, &s)),
                other => panic!("{other:?}"),
            }
        }
    }

    #[test]
    fn phase_budget() {
        assert_eq!(Luby::for_size(16).max_phases, 32);
        assert_eq!(Luby::for_size(1).max_phases, 1);
    }
}
