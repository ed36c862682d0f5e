use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::distributions::{base_law, Variant};
use crate::model::Output;
use crate::oracles::is_mis;
use crate::{Graph, Matching};

use super::ProtocolError;

pub const MIS_REFEREE_LIMIT: usize = 4;
pub const APX_REFEREE_LIMIT: usize = 6;

/// Best fixed output against the MIS base case on 2k vertices and its exact
/// success probability. Ties go to the larger vertex mask, so the all-vertices
/// output wins when it is optimal.
pub fn best_zero_round_referee_mis(k: usize) -> Result<(Output, BigRational), ProtocolError> {
    if k == 0 || k > MIS_REFEREE_LIMIT {
        return Err(ProtocolError::TooLarge { k, limit: MIS_REFEREE_LIMIT });
    }
    let n = 2 * k;
    let graphs: Vec<(Graph, u128)> =
        base_law(Variant::Mis, k).into_iter().map(|(e, w)| (Graph::new(n, e).expect("valid"), w)).collect();
    let total: u128 = graphs.iter().map(|(_, w)| w).sum();
    let mut best: Option<(u128, BTreeSet<usize>)> = None;
    for mask in (0..1u32 << n).rev() {
        let s: BTreeSet<usize> = (0..n).filter(|v| mask >> v & 1 == 1).collect();
        let hits: u128 = graphs.iter().filter(|(g, _)| is_mis(g, &s)).map(|(_, w)| w).sum();
        if best.as_ref().is_none_or(|(b, _)| hits > *b) {
            best = Some((hits, s));
        }
    }
    let (hits, s) = best.expect("at least one candidate");
    Ok((Output::Mis(s), BigRational::new(BigInt::from(hits), BigInt::from(total))))
}

/// Best fixed set of disjoint pairs against the matching base case on 2k
/// vertices and its exact expected number of valid edges.
pub fn best_zero_round_referee_apx(k: usize) -> Result<(Output, BigRational), ProtocolError> {
    if k == 0 || k > APX_REFEREE_LIMIT {
        return Err(ProtocolError::TooLarge { k, limit: APX_REFEREE_LIMIT });
    }
    let n = 2 * k;
    let law = base_law(Variant::Apx, k);
    let total: u128 = law.iter().map(|(_, w)| w).sum();
    let mut weight = vec![vec![0u128; n]; n];
    for (edges, w) in &law {
        for &(a, b) in edges {
            weight[a][b] += w;
            weight[b][a] += w;
        }
    }
    // Exhaustive over all partial matchings of K_{2k}.
    fn search(
        v: usize,
        used: &mut [bool],
        weight: &[Vec<u128>],
        current: &mut Vec<(usize, usize)>,
        score: u128,
        best: &mut (u128, Vec<(usize, usize)>),
    ) {
        let n = used.len();
        let Some(v) = (v..n).find(|&x| !used[x]) else {
            if score > best.0 {
                *best = (score, current.clone());
            }
            return;
        };
        used[v] = true;
        search(v + 1, used, weight, current, score, best);
        for w in v + 1..n {
            if !used[w] {
                used[w] = true;
                current.push((v, w));
                search(v + 1, used, weight, current, score + weight[v][w], best);
                current.pop();
                used[w] = false;
            }
        }
        used[v] = false;
    }
    let mut best = (0u128, Vec::new());
    search(0, &mut vec![false; n], &weight, &mut Vec::new(), 0, &mut best);
    let value = BigRational::new(BigInt::from(best.0), BigInt::from(total));
    Ok((Output::Matching(Matching::new(best.1).expect("disjoint")), value))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn frac(a: i64, b: i64) -> BigRational {
        BigRational::new(a.into(), b.into())
    }

    #[test]
    fn mis_optimum_is_two_to_minus_k() {
        for k in 1..=3 {
            let (out, p) = best_zero_round_referee_mis(k).unwrap();
            assert_eq!(p, frac(1, 1 << k));
            assert_eq!(out, Output::Mis((0..2 * k).collect()));
        }
        assert!(best_zero_round_referee_mis(5).is_err());
    }

    #[test]
    fn apx_optimum_is_one_over_k() {
        for k in 1..=4 {
            let (out, e) = best_zero_round_referee_apx(k).unwrap();
            assert_eq!(e, frac(1, k as i64));
            let Output::Matching(m) = out else { panic!() };
            assert!(m.pairs().iter().all(|&(a, b)| a < k && b >= k));
        }
    }
}
