use std::collections::{BTreeMap, BTreeSet, HashMap};

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::EmbeddingError;
use crate::distributions::{base_law, sigma_atoms, InstanceLaw, Params, SigmaMode, Variant};
use crate::infotheory::{log_ratio, mutual_info_idx, DiscreteDist};
use crate::model::{run_protocol, Output, Protocol};
use crate::oracles::{is_mis, matching_score, max_matching_size};
use crate::{Bits, BlockLayout, Exec, Graph};

/// Largest number of (graph, Σ) configurations enumerated.
pub const ENUMERATION_LIMIT: u128 = 1 << 26;

/// Seed of the protocol's coins for every enumerated configuration.
pub const LAW_SEED: u64 = 0x5EED;

/// Index of pair (a, b), a < b, among the pairs of `0..m` in lexicographic order.
pub fn pair_index(a: usize, b: usize, m: usize) -> usize {
    let (a, b) = (a.min(b), a.max(b));
    a * (2 * m - a - 1) / 2 + (b - a - 1)
}

/// Bit mask of a local edge set over the pairs of `0..m`.
pub fn edge_mask(edges: &[(usize, usize)], m: usize) -> u64 {
    edges.iter().fold(0, |acc, &(a, b)| acc | 1 << pair_index(a, b, m))
}

/// Local edges encoded by `mask`.
pub fn mask_edges(mask: u64, m: usize) -> Vec<(usize, usize)> {
    (0..m).flat_map(|a| (a + 1..m).map(move |b| (a, b))).filter(|&(a, b)| mask >> pair_index(a, b, m) & 1 == 1).collect()
}

/// Messages are stored as `1 << len | bits`, first bit most significant.
pub fn message_id(m: &Bits) -> u64 {
    assert!(m.len() < 64, "message too long to index");
    m.as_slice().iter().fold(1u64, |acc, &b| acc << 1 | b as u64)
}

pub fn message_from_id(id: u64) -> Bits {
    let len = 63 - id.leading_zeros() as usize;
    Bits::from_bools((0..len).rev().map(|i| id >> i & 1 == 1).collect())
}

/// How the protocol did on one configuration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RowEval {
    /// MIS: the output is a valid MIS. Matching: every output pair is an edge.
    pub valid: bool,
    /// MIS: 1 if valid. Matching: number of output pairs that are edges.
    pub score: u32,
    /// μ(G) for matching, 1 for MIS.
    pub opt: u32,
    /// MIS: restriction to block i is a valid MIS of B_i. Matching: output
    /// pairs inside block i that are edges.
    pub block_score: Vec<u32>,
    /// μ(B_i) for matching, 1 for MIS.
    pub block_opt: Vec<u32>,
}

/// Scores `output` on `graph` block by block. Unfinished outputs score 0.
pub(crate) fn evaluate(variant: Variant, graph: &Graph, layout: &BlockLayout, output: &Output) -> RowEval {
    let blocks: Vec<Vec<usize>> = layout.principal().to_vec();
    match variant {
        Variant::Mis => {
            let valid = matches!(output, Output::Mis(s) if is_mis(graph, s));
            let block_score = blocks.iter().map(|b| block_mis_ok(graph, b, output) as u32).collect();
            RowEval { valid, score: valid as u32, opt: 1, block_score, block_opt: vec![1; blocks.len()] }
        }
        Variant::Apx => {
            let (valid, score) = match output {
                Output::Matching(m) => {
                    let s = matching_score(graph, m.pairs()).expect("matching is disjoint");
                    (s.valid_edges == s.total_pairs, s.valid_edges as u32)
                }
                _ => (false, 0),
            };
            let block_score = blocks.iter().map(|b| block_matching_score(graph, b, output)).collect();
            let block_opt = blocks.iter().map(|b| max_matching_size(&graph.induced(b)) as u32).collect();
            RowEval { valid, score, opt: max_matching_size(graph) as u32, block_score, block_opt }
        }
    }
}

pub(crate) fn block_mis_ok(graph: &Graph, block: &[usize], output: &Output) -> bool {
    let Output::Mis(s) = output else { return false };
    let sub = graph.induced(block);
    let local = block.iter().enumerate().filter(|(_, v)| s.contains(v)).map(|(i, _)| i).collect();
    is_mis(&sub, &local)
}

pub(crate) fn block_matching_score(graph: &Graph, block: &[usize], output: &Output) -> u32 {
    let Output::Matching(m) = output else { return 0 };
    let keep: BTreeSet<usize> = block.iter().copied().collect();
    m.restrict(&keep).pairs().iter().filter(|&&(a, b)| graph.has_edge(a, b)).count() as u32
}

type Weighted = (Vec<u64>, u128);

/// Conditional law of some columns given others, read off the joint law.
pub(crate) struct CondTable {
    map: HashMap<Vec<u64>, (u128, Vec<Weighted>)>,
}

impl CondTable {
    /// Options and their total weight, or `None` outside the support.
    pub fn get(&self, cond: &[u64]) -> Option<(u128, &[Weighted])> {
        self.map.get(cond).map(|(t, v)| (*t, v.as_slice()))
    }
}

/// Exact law of (Σ, per-block inputs, transcript) for one protocol on a
/// level-1 hard distribution. Row keys use canonical pre-permutation labels.
pub struct JointLaw<'p> {
    pub(crate) protocol: &'p dyn Protocol,
    pub(crate) law: InstanceLaw,
    pub(crate) sigma_mode: SigmaMode,
    pub(crate) sigmas: Vec<Vec<usize>>,
    pub(crate) names: Vec<String>,
    index: HashMap<String, usize>,
    pub(crate) keys: Vec<Vec<u64>>,
    pub(crate) weights: Vec<u128>,
    pub(crate) evals: Vec<RowEval>,
    pub(crate) total: u128,
    /// Fooling pre-labels in layout order; bit j of a T column is fooling[j].
    pub(crate) fooling: Vec<usize>,
}

impl std::fmt::Debug for JointLaw<'_> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("JointLaw")
            .field("protocol", &self.protocol.name())
            .field("rows", &self.keys.len())
            .field("columns", &self.names.len())
            .finish()
    }
}

pub fn enumerate_joint<'p>(
    params: &Params,
    protocol: &'p dyn Protocol,
    sigma_mode: SigmaMode,
) -> Result<JointLaw<'p>, EmbeddingError> {
    enumerate_law(InstanceLaw::new(params)?, protocol, sigma_mode, Exec::default())
}

/// Runs `protocol` on every (instance atom, Σ) pair of `law`.
pub fn enumerate_law(
    law: InstanceLaw,
    protocol: &dyn Protocol,
    sigma_mode: SigmaMode,
    exec: Exec,
) -> Result<JointLaw<'_>, EmbeddingError> {
    let n = law.n();
    let sigmas = sigma_atoms(sigma_mode, n)?;
    let atoms = law.atom_count();
    let count = atoms * sigmas.len() as u128;
    if count > ENUMERATION_LIMIT {
        return Err(EmbeddingError::TooLarge { count, limit: ENUMERATION_LIMIT });
    }
    let layout = law.layout.clone();
    let fooling = layout.fooling_vertices();
    if fooling.len() > 64 {
        return Err(EmbeddingError::TooLarge { count: fooling.len() as u128, limit: 64 });
    }
    let mut names = vec!["S".to_string()];
    for (i, block) in layout.principal().iter().enumerate() {
        names.push(format!("B{i}"));
        names.extend((0..block.len()).map(|p| format!("B{i}.{p}")));
        names.extend((0..block.len()).map(|p| format!("T{i}.{p}")));
    }
    for t in 1..=protocol.rounds() {
        names.extend((0..n).map(|x| format!("M{t}.{x}")));
    }
    let index = names.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();
    let mut joint = JointLaw {
        protocol,
        law,
        sigma_mode,
        sigmas,
        names,
        index,
        keys: Vec::new(),
        weights: Vec::new(),
        evals: Vec::new(),
        total: 0,
        fooling,
    };
    let rows = exec.map_range(0..count as u64, |r| joint.compute_row(r as u128));
    for row in rows {
        let (key, w, eval) = row?;
        joint.keys.push(key);
        joint.weights.push(w);
        joint.evals.push(eval);
    }
    joint.total = joint.law.total_weight() * joint.sigmas.len() as u128;
    Ok(joint)
}

impl<'p> JointLaw<'p> {
    fn compute_row(&self, r: u128) -> Result<(Vec<u64>, u128, RowEval), EmbeddingError> {
        let atoms = self.law.atom_count();
        let (s, a) = ((r / atoms) as usize, r % atoms);
        let (edges, w) = self.law.atom(a);
        let sigma = &self.sigmas[s];
        let n = self.law.n();
        let graph = Graph::new(n, edges.iter().map(|&(x, y)| (sigma[x], sigma[y])))?;
        let layout = self.law.layout.with_sigma(sigma.clone())?;
        let ex = run_protocol(&graph, Some(&layout), self.protocol, LAW_SEED)?;
        let mut adj = vec![BTreeSet::new(); n];
        for &(x, y) in &edges {
            adj[x].insert(y);
            adj[y].insert(x);
        }
        let mut key = vec![s as u64];
        for block in self.law.layout.principal() {
            let m = block.len();
            let local: Vec<(usize, usize)> = (0..m)
                .flat_map(|a| (a + 1..m).map(move |b| (a, b)))
                .filter(|&(a, b)| adj[block[a]].contains(&block[b]))
                .collect();
            key.push(edge_mask(&local, m));
            for &u in block {
                key.push(block.iter().enumerate().filter(|(_, w)| adj[u].contains(w)).fold(0, |acc, (q, _)| acc | 1 << q));
            }
            for &u in block {
                key.push(self.fooling.iter().enumerate().filter(|(_, f)| adj[u].contains(f)).fold(0, |acc, (j, _)| acc | 1 << j));
            }
        }
        for t in 1..=self.protocol.rounds() {
            key.extend(sigma.iter().map(|&v| message_id(ex.transcript.message(t, v))));
        }
        let eval = evaluate(self.law.params.variant, &graph, &layout, &ex.output);
        Ok((key, w, eval))
    }

    /// Re-runs the protocol on `samples` random rows and compares transcripts.
    pub fn check_determinism(&self, samples: usize, seed: u64) -> Result<(), EmbeddingError> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..samples {
            let r = rng.gen_range(0..self.keys.len());
            let (key, _, _) = self.compute_row(r as u128)?;
            if key != self.keys[r] {
                return Err(EmbeddingError::Nondeterministic(r));
            }
        }
        Ok(())
    }

    pub fn protocol(&self) -> &'p dyn Protocol {
        self.protocol
    }
    pub fn params(&self) -> &Params {
        &self.law.params
    }
    pub fn variant(&self) -> Variant {
        self.law.params.variant
    }
    pub fn sigma_mode(&self) -> SigmaMode {
        self.sigma_mode
    }
    /// Canonical layout (identity σ).
    pub fn layout(&self) -> &BlockLayout {
        &self.law.layout
    }
    pub fn sigmas(&self) -> &[Vec<usize>] {
        &self.sigmas
    }
    pub fn rounds(&self) -> usize {
        self.protocol.rounds()
    }
    pub fn blocks(&self) -> usize {
        self.law.layout.principal_count()
    }
    pub fn row_count(&self) -> usize {
        self.keys.len()
    }
    pub fn total(&self) -> u128 {
        self.total
    }
    pub fn names(&self) -> &[String] {
        &self.names
    }
    pub fn evals(&self) -> &[RowEval] {
        &self.evals
    }
    pub fn rows(&self) -> impl Iterator<Item = (&Vec<u64>, &u128)> + Clone {
        self.keys.iter().zip(self.weights.iter())
    }

    pub fn col(&self, name: &str) -> usize {
        self.index[name]
    }

    pub(crate) fn check_block(&self, i: usize) -> Result<(), EmbeddingError> {
        if i < self.blocks() {
            Ok(())
        } else {
            Err(EmbeddingError::BadBlock(i))
        }
    }

    pub fn s_cols(&self) -> Vec<usize> {
        vec![0]
    }
    pub fn b_col(&self, i: usize) -> usize {
        self.col(&format!("B{i}"))
    }
    pub fn bu_col(&self, i: usize, pos: usize) -> usize {
        self.col(&format!("B{i}.{pos}"))
    }
    pub fn t_col(&self, i: usize, pos: usize) -> usize {
        self.col(&format!("T{i}.{pos}"))
    }
    pub fn block_len(&self, i: usize) -> usize {
        self.law.layout.principal()[i].len()
    }
    pub fn t_cols(&self, i: usize) -> Vec<usize> {
        (0..self.block_len(i)).map(|p| self.t_col(i, p)).collect()
    }
    /// Columns determining G_i: B_i and T_i.
    pub fn g_cols(&self, i: usize) -> Vec<usize> {
        let mut c = vec![self.b_col(i)];
        c.extend(self.t_cols(i));
        c
    }
    pub fn g_all(&self) -> Vec<usize> {
        (0..self.blocks()).flat_map(|i| self.g_cols(i)).collect()
    }
    pub fn g_others(&self, i: usize) -> Vec<usize> {
        (0..self.blocks()).filter(|&j| j != i).flat_map(|j| self.g_cols(j)).collect()
    }

    /// Round-`t` message columns of the given pre-labels; empty past the last round.
    pub fn msg_cols(&self, t: usize, vertices: &[usize]) -> Vec<usize> {
        if t == 0 || t > self.rounds() {
            return Vec::new();
        }
        vertices.iter().map(|x| self.col(&format!("M{t}.{x}"))).collect()
    }
    pub fn principal_of(&self, i: usize) -> Vec<usize> {
        self.law.layout.principal()[i].clone()
    }
    pub fn principal_all(&self) -> Vec<usize> {
        self.law.layout.principal_vertices()
    }
    pub fn principal_except(&self, i: usize) -> Vec<usize> {
        let block: BTreeSet<usize> = self.principal_of(i).into_iter().collect();
        self.principal_all().into_iter().filter(|v| !block.contains(v)).collect()
    }
    pub fn fooling_all(&self) -> Vec<usize> {
        self.fooling.clone()
    }
    pub fn all_vertices(&self) -> Vec<usize> {
        (0..self.law.n()).collect()
    }
    /// Message columns of rounds `1..t` for the given vertices.
    pub fn msg_before(&self, t: usize, vertices: &[usize]) -> Vec<usize> {
        (1..t).flat_map(|s| self.msg_cols(s, vertices)).collect()
    }
    pub fn all_msgs(&self) -> Vec<usize> {
        self.msg_before(self.rounds() + 1, &self.all_vertices())
    }

    /// I(X; Y | Z) in bits.
    pub fn mi(&self, x: &[usize], y: &[usize], z: &[usize]) -> f64 {
        mutual_info_idx(self.rows(), self.total, x, y, z)
    }

    /// H(X | Z) in bits.
    pub fn entropy(&self, x: &[usize], z: &[usize]) -> f64 {
        let mut xz: BTreeMap<Vec<u64>, u128> = BTreeMap::new();
        let mut zz: BTreeMap<Vec<u64>, u128> = BTreeMap::new();
        for (k, &w) in self.rows() {
            let kz: Vec<u64> = z.iter().map(|&c| k[c]).collect();
            let mut kxz: Vec<u64> = x.iter().map(|&c| k[c]).collect();
            kxz.extend_from_slice(&kz);
            *xz.entry(kxz).or_default() += w;
            *zz.entry(kz).or_default() += w;
        }
        let acc: f64 = xz.iter().map(|(k, &w)| w as f64 * -log_ratio(w, 1, zz[&k[x.len()..]], 1)).sum();
        (acc / self.total as f64).max(0.0)
    }

    /// Weights of each projected key.
    pub fn marginal(&self, cols: &[usize]) -> BTreeMap<Vec<u64>, u128> {
        let mut out = BTreeMap::new();
        for (k, &w) in self.rows() {
            *out.entry(cols.iter().map(|&c| k[c]).collect()).or_default() += w;
        }
        out
    }

    pub(crate) fn cond_table(&self, target: &[usize], cond: &[usize]) -> CondTable {
        let mut acc: BTreeMap<Vec<u64>, BTreeMap<Vec<u64>, u128>> = BTreeMap::new();
        for (k, &w) in self.rows() {
            let c: Vec<u64> = cond.iter().map(|&i| k[i]).collect();
            let t: Vec<u64> = target.iter().map(|&i| k[i]).collect();
            *acc.entry(c).or_default().entry(t).or_default() += w;
        }
        let map = acc
            .into_iter()
            .map(|(c, opts)| {
                let total = opts.values().sum();
                (c, (total, opts.into_iter().collect()))
            })
            .collect();
        CondTable { map }
    }

    /// The law over named columns as a [`DiscreteDist`].
    pub fn to_dist(&self, cols: &[usize]) -> Result<DiscreteDist, EmbeddingError> {
        let names: Vec<String> = cols.iter().map(|&c| self.names[c].clone()).collect();
        Ok(DiscreteDist::new(names, self.marginal(cols))?)
    }

    /// Weighted average of a per-row quantity, as an exact fraction.
    pub fn expect_rows(&self, f: impl Fn(&RowEval) -> u128) -> BigRational {
        let num: BigInt = self.evals.iter().zip(&self.weights).map(|(e, &w)| BigInt::from(f(e)) * BigInt::from(w)).sum();
        BigRational::new(num, BigInt::from(self.total))
    }

    /// Exact check that the marginal of B_i equals the level-0 law.
    pub fn block_marginal_matches(&self, i: usize) -> Result<bool, EmbeddingError> {
        self.check_block(i)?;
        let k = self.law.params.k as usize;
        let m = 2 * k;
        let mu = self.marginal(&[self.b_col(i)]);
        let base = base_law(self.variant(), k);
        let base_total: u128 = base.iter().map(|(_, w)| w).sum();
        let mut expected: BTreeMap<Vec<u64>, u128> = BTreeMap::new();
        for (e, w) in &base {
            *expected.entry(vec![edge_mask(e, m)]).or_default() += w;
        }
        if mu.len() != expected.len() {
            return Ok(false);
        }
        Ok(mu.iter().all(|(key, &w)| {
            expected.get(key).is_some_and(|&e| BigInt::from(w) * BigInt::from(base_total) == BigInt::from(e) * BigInt::from(self.total))
        }))
    }

    /// The Σ marginal is uniform over the Σ atoms.
    pub fn sigma_marginal_uniform(&self) -> bool {
        let m = self.marginal(&self.s_cols());
        m.len() == self.sigmas.len() && m.values().all(|&w| w * self.sigmas.len() as u128 == self.total)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pair_indices_are_dense() {
        let m = 5;
        let mut seen: Vec<usize> = (0..m).flat_map(|a| (a + 1..m).map(move |b| pair_index(a, b, m))).collect();
        seen.sort();
        assert_eq!(seen, (0..10).collect::<Vec<_>>());
        let e = vec![(0, 3), (2, 4)];
        assert_eq!(mask_edges(edge_mask(&e, m), m), e);
    }

    #[test]
    fn message_ids_round_trip() {
        for s in ["", "0", "1", "0110", "00"] {
            let b: Bits = s.parse().unwrap();
            assert_eq!(message_from_id(message_id(&b)), b);
        }
        assert_ne!(message_id(&"0".parse().unwrap()), message_id(&"00".parse().unwrap()));
    }
}
