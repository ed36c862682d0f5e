use std::collections::BTreeSet;

use blackboard_core::distributions::{make_params, InstanceLaw, SigmaMode, ToyOverrides, Variant};
use blackboard_core::embedding::enumerate_law;
use blackboard_core::infotheory::{to_f64, DiscreteDist};
use blackboard_core::oracles::{enumerate_all_mis, is_mis, max_matching_exhaustive, max_matching_size};
use blackboard_core::protocols::{greedy_mis, ProtocolSpec};
use blackboard_core::{run_protocol, Bits, Exec, Graph, Output};
use proptest::prelude::*;

fn graph(max_n: usize) -> impl Strategy<Value = Graph> {
    (1..=max_n).prop_flat_map(|n| {
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
        let len = pairs.len();
        proptest::collection::vec(any::<bool>(), len)
            .prop_map(move |keep| Graph::new(n, pairs.iter().zip(&keep).filter(|(_, &k)| k).map(|(&e, _)| e)).unwrap())
    })
}

fn dist() -> impl Strategy<Value = DiscreteDist> {
    proptest::collection::vec(0u128..6, 8).prop_filter("nonempty", |w| w.iter().any(|&x| x > 0)).prop_map(|w| {
        let atoms = w.into_iter().enumerate().map(|(i, x)| (vec![i as u64 & 1, i as u64 >> 1 & 1, i as u64 >> 2], x));
        DiscreteDist::new(["X", "Y", "Z"], atoms).unwrap()
    })
}

proptest! {
    #[test]
    fn bits_round_trip(v in proptest::collection::vec(any::<bool>(), 0..40)) {
        let b = Bits::from_bools(v.clone());
        prop_assert_eq!(b.to_string().parse::<Bits>().unwrap(), b.clone());
        let json = serde_json::to_string(&b).unwrap();
        prop_assert_eq!(serde_json::from_str::<Bits>(&json).unwrap(), b.clone());
        prop_assert_eq!(b.parity(), v.iter().filter(|&&x| x).count() % 2 == 1);
        prop_assert_eq!(b.len(), v.len());
    }

    #[test]
    fn adjacency_is_symmetric(g in graph(12)) {
        let degrees: usize = (0..g.n()).map(|v| g.degree(v)).sum();
        prop_assert_eq!(degrees, 2 * g.edge_count());
        for &(a, b) in g.edges() {
            prop_assert!(a < b);
            prop_assert!(g.neighbors(a).contains(&b) && g.neighbors(b).contains(&a));
        }
        let all: Vec<usize> = (0..g.n()).collect();
        prop_assert_eq!(g.induced(&all), g.clone());
        let back = serde_json::from_str::<Graph>(&serde_json::to_string(&g).unwrap()).unwrap();
        prop_assert_eq!(back, g);
    }

    #[test]
    fn relabelling_preserves_degrees(g in graph(10), seed in any::<u64>()) {
        use rand::SeedableRng;
        let (h, perm) = g.random_relabel(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
        prop_assert_eq!(h.edge_count(), g.edge_count());
        for (v, &w) in perm.iter().enumerate() {
            prop_assert_eq!(h.degree(w), g.degree(v));
        }
    }

    #[test]
    fn every_enumerated_set_is_maximal(g in graph(9)) {
        let all = enumerate_all_mis(&g).unwrap();
        prop_assert!(!all.is_empty());
        prop_assert!(all.iter().all(|s| is_mis(&g, s)));
        prop_assert!(all.contains(&greedy_mis(&g)));
        let distinct: BTreeSet<_> = all.iter().collect();
        prop_assert_eq!(distinct.len(), all.len());
    }

    #[test]
    fn blossom_matches_exhaustive(g in graph(9)) {
        prop_assert_eq!(max_matching_size(&g), max_matching_exhaustive(&g).unwrap());
    }

    #[test]
    fn runs_are_deterministic(g in graph(12), seed in any::<u64>()) {
        let p = "luby".parse::<ProtocolSpec>().unwrap().build(Variant::Mis, g.n()).unwrap();
        let a = run_protocol(&g, None, p.as_ref(), seed).unwrap();
        let b = run_protocol(&g, None, p.as_ref(), seed).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert!(a.max_bits <= p.bandwidth());
        if let Output::Mis(s) = &a.output {
            prop_assert!(is_mis(&g, s));
        }
    }

    #[test]
    fn information_measures_are_consistent(d in dist(), e in dist()) {
        let h = d.entropy(&["X", "Y"], &[]).unwrap();
        prop_assert!(h >= -1e-12 && h <= (d.support_size() as f64).log2() + 1e-12);
        let ixy = d.mutual_info(&["X"], &["Y"], &["Z"]).unwrap();
        let iyx = d.mutual_info(&["Y"], &["X"], &["Z"]).unwrap();
        prop_assert!(ixy >= -1e-12);
        prop_assert!((ixy - iyx).abs() < 1e-9);
        prop_assert_eq!(to_f64(&d.tvd(&d).unwrap()), 0.0);
        let t = d.tvd(&e).unwrap();
        prop_assert_eq!(&t, &e.tvd(&d).unwrap());
        prop_assert!((0.0..=1.0).contains(&to_f64(&t)));
    }

    #[test]
    fn strategies_agree(xs in proptest::collection::vec(any::<u32>(), 0..200)) {
        let f = |x: u32| x.wrapping_mul(2654435761).rotate_left(7);
        prop_assert_eq!(Exec::Sequential.map(xs.clone(), f), Exec::Parallel.map(xs, f));
    }
}

#[test]
fn enumeration_is_independent_of_the_strategy() {
    let toy = ToyOverrides { f: vec![1], p: vec![1] };
    let params = make_params(2, 1, Some(&toy), Variant::Apx).unwrap();
    let law = InstanceLaw::new(&params).unwrap();
    for name in ["greedy", "xor:symmetric_xor", "luby:1"] {
        let p = name.parse::<ProtocolSpec>().unwrap().build(Variant::Apx, law.n()).unwrap();
        let seq = enumerate_law(law.clone(), p.as_ref(), SigmaMode::Blocks, Exec::Sequential).unwrap();
        let par = enumerate_law(law.clone(), p.as_ref(), SigmaMode::Blocks, Exec::Parallel).unwrap();
        assert_eq!(seq.total(), par.total(), "{name}");
        assert!(seq.rows().eq(par.rows()), "{name}");
    }
}
