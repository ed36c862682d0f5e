use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::params::{make_params, Params, Variant};
use crate::layout::{BlockLayout, Side};
use crate::model::Graph;
use crate::oracles::is_mis;

/// Instances above this many vertices are refused rather than materialised.
pub const MAX_VERTICES: u64 = 1 << 20;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DistError {
    #[error("instance too large to materialise: n = {n} vertices with p_hat = {p_hat} principal blocks per half (limit {MAX_VERTICES} vertices)")]
    Overflow { n: u64, p_hat: u64 },
    #[error(transparent)]
    Params(#[from] super::params::ParamsError),
    #[error("level {0} needs r >= 1")]
    NeedsRecursion(usize),
    #[error("{0}")]
    Unsupported(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SigmaMode {
    /// Uniform over all permutations.
    Full,
    /// Uniform over the cyclic rotations of the canonical block layout, so each
    /// block receives a contiguous arc of labels.
    Blocks,
    Identity,
}

impl SigmaMode {
    pub fn sample<R: Rng + ?Sized>(self, n: usize, rng: &mut R) -> Vec<usize> {
        match self {
            SigmaMode::Identity => (0..n).collect(),
            SigmaMode::Blocks => {
                let s = rng.gen_range(0..n.max(1));
                (0..n).map(|x| (x + s) % n).collect()
            }
            SigmaMode::Full => {
                let mut p: Vec<usize> = (0..n).collect();
                p.shuffle(rng);
                p
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum InstanceKind {
    MisHard0,
    MisHalf,
    MisHard,
    ApxHard0,
    ApxHard,
}

/// Edges belonging to one principal block: `b` inside the block, `t` from the
/// block to fooling vertices. Public labels.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct BlockEdges {
    pub b: Vec<(usize, usize)>,
    pub t: Vec<(usize, usize)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Instance {
    pub kind: InstanceKind,
    pub params: Params,
    #[serde(flatten)]
    pub graph: Graph,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub layout: Option<BlockLayout>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub blocks: Vec<BlockEdges>,
}

impl Instance {
    pub fn level(&self) -> usize {
        self.layout.as_ref().map_or(0, BlockLayout::level)
    }
}

/// Canonical pre-permutation block structure.
pub(crate) struct PreLayout {
    pub n: usize,
    pub principal: Vec<Vec<usize>>,
    pub fooling: Vec<Vec<usize>>,
    pub side: Vec<Side>,
}

/// Halves laid out one after the other; in each half principal blocks come
/// first, then fooling blocks.
pub(crate) fn pre_layout(params: &Params, level: usize, halves: usize) -> PreLayout {
    let lv = params.level(level);
    let m = params.n(level - 1) as usize;
    let (p_hat, f_hat) = (lv.p_hat as usize, lv.f_hat as usize);
    let half = lv.n_hat as usize;
    let sides = [Side::U, Side::V];
    let mut principal = Vec::new();
    let mut fooling = Vec::new();
    let mut pside = Vec::new();
    let mut fside = Vec::new();
    for (h, &side) in sides.iter().enumerate().take(halves) {
        let base = h * half;
        for i in 0..p_hat {
            principal.push((base + i * m..base + (i + 1) * m).collect());
            pside.push(side);
        }
        let fbase = base + p_hat * m;
        for j in 0..f_hat {
            fooling.push((fbase + j * (m - 1)..fbase + (j + 1) * (m - 1)).collect());
            fside.push(side);
        }
    }
    pside.extend(fside);
    PreLayout { n: half * halves, principal, fooling, side: pside }
}

fn check_size(params: &Params, level: usize) -> Result<(), DistError> {
    let n = params.n(level);
    if n > MAX_VERTICES {
        return Err(DistError::Overflow { n, p_hat: params.level(level).p_hat });
    }
    Ok(())
}

fn base_edges<R: Rng + ?Sized>(variant: Variant, k: usize, rng: &mut R) -> Vec<(usize, usize)> {
    match variant {
        Variant::Mis => (0..k).filter(|_| rng.gen_bool(0.5)).map(|i| (2 * i, 2 * i + 1)).collect(),
        Variant::Apx => vec![(rng.gen_range(0..k), k + rng.gen_range(0..k))],
    }
}

/// Edges of a level-`level` instance on `0..n_level`, its own permutation
/// drawn uniformly.
fn full_edges<R: Rng + ?Sized>(params: &Params, level: usize, rng: &mut R) -> Vec<(usize, usize)> {
    if level == 0 {
        return base_edges(params.variant, params.k as usize, rng);
    }
    let halves = if params.variant == Variant::Mis { 2 } else { 1 };
    let pre = pre_layout(params, level, halves);
    let edges = pre_edges(params, level, &pre, rng);
    let sigma = SigmaMode::Full.sample(pre.n, rng);
    edges.into_iter().map(|(a, b)| (sigma[a], sigma[b])).collect()
}

/// Pre-permutation edges for the given layout.
fn pre_edges<R: Rng + ?Sized>(params: &Params, level: usize, pre: &PreLayout, rng: &mut R) -> Vec<(usize, usize)> {
    let mut edges = Vec::new();
    for block in &pre.principal {
        edges.extend(full_edges(params, level - 1, rng).into_iter().map(|(a, b)| (block[a], block[b])));
    }
    let np = pre.principal.len();
    for (i, block) in pre.principal.iter().enumerate() {
        for &u in block {
            for (j, fb) in pre.fooling.iter().enumerate() {
                if pre.side[np + j] != pre.side[i] {
                    continue;
                }
                let mut members = fb.clone();
                members.push(u);
                members.shuffle(rng);
                for (a, b) in full_edges(params, level - 1, rng) {
                    let (x, y) = (members[a], members[b]);
                    if x == u || y == u {
                        edges.push((x, y));
                    }
                }
            }
        }
    }
    if params.variant == Variant::Mis && pre.side.contains(&Side::V) {
        let fu: Vec<usize> = fooling_on(pre, Side::U);
        let fv: Vec<usize> = fooling_on(pre, Side::V);
        for &a in &fu {
            for &b in &fv {
                edges.push((a, b));
            }
        }
    }
    edges
}

fn fooling_on(pre: &PreLayout, side: Side) -> Vec<usize> {
    let np = pre.principal.len();
    pre.fooling
        .iter()
        .enumerate()
        .filter(|(j, _)| pre.side[np + j] == side)
        .flat_map(|(_, b)| b.iter().copied())
        .collect()
}

pub(crate) fn provenance(graph: &Graph, layout: &BlockLayout) -> Vec<BlockEdges> {
    let mut out = vec![BlockEdges::default(); layout.principal_count()];
    for &(a, b) in graph.edges() {
        match (layout.role(a).0, layout.role(b).0) {
            (crate::Role::Principal(i), crate::Role::Principal(j)) if i == j => out[i].b.push((a, b)),
            (crate::Role::Principal(i), crate::Role::Fooling(_))
            | (crate::Role::Fooling(_), crate::Role::Principal(i)) => out[i].t.push((a, b)),
            _ => {}
        }
    }
    out
}

fn build(
    params: &Params,
    level: usize,
    halves: usize,
    kind: InstanceKind,
    seed: u64,
    sigma_mode: SigmaMode,
) -> Result<Instance, DistError> {
    if level == 0 || level > params.r {
        return Err(DistError::NeedsRecursion(level));
    }
    check_size(params, level)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pre = pre_layout(params, level, halves);
    let edges = pre_edges(params, level, &pre, &mut rng);
    let sigma = sigma_mode.sample(pre.n, &mut rng);
    let layout = BlockLayout::new(level, pre.principal, pre.fooling, pre.side, sigma.clone())
        .expect("canonical layout is a partition");
    let graph = Graph::new(pre.n, edges.into_iter().map(|(a, b)| (sigma[a], sigma[b])))
        .map_err(|e| DistError::Unsupported(e.to_string()))?;
    let blocks = provenance(&graph, &layout);
    Ok(Instance { kind, params: params.clone(), graph, layout: Some(layout), blocks })
}

fn base_instance(variant: Variant, k: u64, seed: u64) -> Instance {
    let params = make_params(k, 0, None, variant).expect("k >= 1");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let edges = base_edges(variant, k as usize, &mut rng);
    let kind = match variant {
        Variant::Mis => InstanceKind::MisHard0,
        Variant::Apx => InstanceKind::ApxHard0,
    };
    Instance { kind, params, graph: Graph::new(2 * k as usize, edges).expect("valid"), layout: None, blocks: vec![] }
}

/// Fixed pairing (2i, 2i+1), each pair edge kept with probability 1/2.
pub fn sample_mis_hard0(k: u64, seed: u64) -> Instance {
    base_instance(Variant::Mis, k, seed)
}

/// A single uniformly random edge between {0..k} and {k..2k}.
pub fn sample_apx_hard0(k: u64, seed: u64) -> Instance {
    base_instance(Variant::Apx, k, seed)
}

pub fn sample_mis_half(params: &Params, level: usize, seed: u64, sigma_mode: SigmaMode) -> Result<Instance, DistError> {
    if params.variant != Variant::Mis {
        return Err(DistError::Unsupported("half instances belong to the MIS variant".into()));
    }
    let mut inst = build(params, level, 1, InstanceKind::MisHalf, seed, sigma_mode)?;
    inst.params.levels.truncate(level + 1);
    Ok(inst)
}

pub fn sample_mis_hard(params: &Params, seed: u64, sigma_mode: SigmaMode) -> Result<Instance, DistError> {
    if params.variant != Variant::Mis {
        return Err(DistError::Unsupported("expected MIS parameters".into()));
    }
    if params.r == 0 {
        return Ok(sample_mis_hard0(params.k, seed));
    }
    build(params, params.r, 2, InstanceKind::MisHard, seed, sigma_mode)
}

pub fn sample_apx_hard(params: &Params, seed: u64, sigma_mode: SigmaMode) -> Result<Instance, DistError> {
    if params.variant != Variant::Apx {
        return Err(DistError::Unsupported("expected matching parameters".into()));
    }
    if params.r == 0 {
        return Ok(sample_apx_hard0(params.k, seed));
    }
    build(params, params.r, 1, InstanceKind::ApxHard, seed, sigma_mode)
}

/// Dispatch on the parameter variant.
pub fn sample_instance(params: &Params, seed: u64, sigma_mode: SigmaMode) -> Result<Instance, DistError> {
    match params.variant {
        Variant::Mis => sample_mis_hard(params, seed, sigma_mode),
        Variant::Apx => sample_apx_hard(params, seed, sigma_mode),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HalfSolved {
    UHolds,
    VHolds,
    Both,
    Neither,
}

/// Which halves' principal subgraphs an MIS of the full instance also solves.
pub fn verify_solve_half(instance: &Instance, s: &BTreeSet<usize>) -> HalfSolved {
    let layout = instance.layout.as_ref().expect("recursive instance");
    let check = |side| {
        let verts = layout.principal_vertices_on(side);
        let sub = instance.graph.induced(&verts);
        let local: BTreeSet<usize> = verts.iter().enumerate().filter(|(_, v)| s.contains(v)).map(|(i, _)| i).collect();
        is_mis(&sub, &local)
    };
    match (check(Side::U), check(Side::V)) {
        (true, true) => HalfSolved::Both,
        (true, false) => HalfSolved::UHolds,
        (false, true) => HalfSolved::VHolds,
        (false, false) => HalfSolved::Neither,
    }
}
