use std::collections::BTreeMap;

use num_integer::Integer;

use super::instance::{pre_layout, InstanceKind};
use super::params::{Params, Variant};
use crate::layout::BlockLayout;

/// Largest number of permutations enumerated for a full-permutation Σ.
pub const FULL_SIGMA_LIMIT: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LawError {
    #[error("exact laws exist only for recursion level 1, got {0}")]
    Level(usize),
    #[error("{what} has {count} atoms, above the limit {limit}")]
    TooLarge { what: &'static str, count: u128, limit: u128 },
    #[error("component {0} is empty or has zero weight")]
    EmptyComponent(usize),
}

/// An independent factor of the instance law: one of several edge sets, with
/// integer weights.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Component {
    pub alternatives: Vec<(Vec<(usize, usize)>, u128)>,
}

impl Component {
    pub fn new(alternatives: Vec<(Vec<(usize, usize)>, u128)>) -> Self {
        let mut merged: BTreeMap<Vec<(usize, usize)>, u128> = BTreeMap::new();
        for (mut e, w) in alternatives {
            if w == 0 {
                continue;
            }
            for p in e.iter_mut() {
                if p.0 > p.1 {
                    *p = (p.1, p.0);
                }
            }
            e.sort_unstable();
            *merged.entry(e).or_default() += w;
        }
        let g = merged.values().fold(0u128, |g, &w| g.gcd(&w));
        Component { alternatives: merged.into_iter().map(|(e, w)| (e, w / g.max(1))).collect() }
    }

    pub fn total(&self) -> u128 {
        self.alternatives.iter().map(|(_, w)| w).sum()
    }
}

/// Weighted edge sets of the level-0 instance.
pub fn base_law(variant: Variant, k: usize) -> Vec<(Vec<(usize, usize)>, u128)> {
    match variant {
        Variant::Mis => (0..1u64 << k)
            .map(|mask| ((0..k).filter(|i| mask >> i & 1 == 1).map(|i| (2 * i, 2 * i + 1)).collect(), 1))
            .collect(),
        Variant::Apx => (0..k).flat_map(|a| (0..k).map(move |b| (vec![(a, k + b)], 1))).collect(),
    }
}

pub(crate) fn permutations(m: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for x in 0..used.len() {
            if !used[x] {
                used[x] = true;
                prefix.push(x);
                rec(prefix, used, out);
                prefix.pop();
                used[x] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; m], &mut out);
    out
}

/// Exact law of a level-1 instance before Σ is applied, as a product of
/// independent components. Edges use canonical pre-permutation labels.
#[derive(Debug, Clone)]
pub struct InstanceLaw {
    pub params: Params,
    pub kind: InstanceKind,
    /// Canonical layout with identity σ.
    pub layout: BlockLayout,
    pub components: Vec<Component>,
}

impl InstanceLaw {
    pub fn new(params: &Params) -> Result<Self, LawError> {
        if params.r != 1 {
            return Err(LawError::Level(params.r));
        }
        let k = params.k as usize;
        let (halves, kind) = match params.variant {
            Variant::Mis => (2, InstanceKind::MisHard),
            Variant::Apx => (1, InstanceKind::ApxHard),
        };
        let pre = pre_layout(params, 1, halves);
        let base = base_law(params.variant, k);
        let mut components = Vec::new();
        for block in &pre.principal {
            match params.variant {
                Variant::Mis => {
                    for i in 0..k {
                        let e = (block[2 * i], block[2 * i + 1]);
                        components.push(Component::new(vec![(vec![e], 1), (vec![], 1)]));
                    }
                }
                Variant::Apx => components.push(Component::new(
                    base.iter().map(|(es, w)| (es.iter().map(|&(a, b)| (block[a], block[b])).collect(), *w)).collect(),
                )),
            }
        }
        let perms = permutations(2 * k);
        let np = pre.principal.len();
        for (i, block) in pre.principal.iter().enumerate() {
            for &u in block {
                for (j, fb) in pre.fooling.iter().enumerate() {
                    if pre.side[np + j] != pre.side[i] {
                        continue;
                    }
                    let mut members = fb.clone();
                    members.push(u);
                    let mut alts = Vec::new();
                    for perm in &perms {
                        for (es, w) in &base {
                            let kept = es
                                .iter()
                                .map(|&(a, b)| (members[perm[a]], members[perm[b]]))
                                .filter(|&(x, y)| x == u || y == u)
                                .collect();
                            alts.push((kept, *w));
                        }
                    }
                    components.push(Component::new(alts));
                }
            }
        }
        if halves == 2 {
            let np = pre.principal.len();
            let on = |side| -> Vec<usize> {
                pre.fooling
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| pre.side[np + j] == side)
                    .flat_map(|(_, b)| b.iter().copied())
                    .collect()
            };
            let (fu, fv) = (on(crate::Side::U), on(crate::Side::V));
            let biclique = fu.iter().flat_map(|&a| fv.iter().map(move |&b| (a, b))).collect();
            components.push(Component::new(vec![(biclique, 1)]));
        }
        let layout = BlockLayout::new(1, pre.principal, pre.fooling, pre.side, (0..pre.n).collect())
            .expect("canonical layout is a partition");
        Ok(InstanceLaw { params: params.clone(), kind, layout, components })
    }

    /// Replaces the components, e.g. to build a deliberately malformed law.
    pub fn with_components(mut self, components: Vec<Component>) -> Result<Self, LawError> {
        for (i, c) in components.iter().enumerate() {
            if c.total() == 0 {
                return Err(LawError::EmptyComponent(i));
            }
        }
        self.components = components;
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.layout.n()
    }

    pub fn atom_count(&self) -> u128 {
        self.components.iter().map(|c| c.alternatives.len() as u128).product()
    }

    pub fn total_weight(&self) -> u128 {
        self.components.iter().map(Component::total).product()
    }

    /// Mixed-radix decoding of atom `index` into its edge set and weight.
    pub fn atom(&self, mut index: u128) -> (Vec<(usize, usize)>, u128) {
        let mut edges = Vec::new();
        let mut weight = 1u128;
        for c in &self.components {
            let len = c.alternatives.len() as u128;
            let (es, w) = &c.alternatives[(index % len) as usize];
            index /= len;
            edges.extend_from_slice(es);
            weight *= w;
        }
        edges.sort_unstable();
        edges.dedup();
        (edges, weight)
    }
}

/// Permutations that Σ ranges over, each with weight 1.
pub fn sigma_atoms(mode: super::SigmaMode, n: usize) -> Result<Vec<Vec<usize>>, LawError> {
    use super::SigmaMode::*;
    match mode {
        Identity => Ok(vec![(0..n).collect()]),
        Blocks => Ok((0..n).map(|s| (0..n).map(|x| (x + s) % n).collect()).collect()),
        Full => {
            if n > FULL_SIGMA_LIMIT {
                let count = (1..=n as u128).product();
                return Err(LawError::TooLarge { what: "full permutation set", count, limit: 40320 });
            }
            Ok(permutations(n))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::params::{make_params, ToyOverrides};

    fn toy(k: u64, variant: Variant, f: u64, p: u64) -> Params {
        make_params(k, 1, Some(&ToyOverrides { f: vec![f], p: vec![p] }), variant).unwrap()
    }

    #[test]
    fn toy_mis_has_4096_atoms() {
        let law = InstanceLaw::new(&toy(1, Variant::Mis, 1, 2)).unwrap();
        assert_eq!(law.atom_count(), 4096);
        assert_eq!(law.total_weight(), 4096);
        assert_eq!(law.n(), 10);
        let (edges, w) = law.atom(0);
        assert_eq!(w, 1);
        assert!(edges.contains(&(4, 9)));
    }

    #[test]
    fn apx_fooling_component_is_uniform_over_position() {
        let law = InstanceLaw::new(&toy(2, Variant::Apx, 1, 1)).unwrap();
        assert_eq!(law.n(), 7);
        assert_eq!(law.atom_count(), 1024);
        let c = &law.components[1];
        assert_eq!(c.total(), 6);
        assert_eq!(c.alternatives.iter().find(|(e, _)| e.is_empty()).unwrap().1, 3);
    }

    #[test]
    fn sigma_atom_sets() {
        use crate::distributions::SigmaMode;
        assert_eq!(sigma_atoms(SigmaMode::Blocks, 5).unwrap().len(), 5);
        assert_eq!(sigma_atoms(SigmaMode::Full, 4).unwrap().len(), 24);
        assert!(sigma_atoms(SigmaMode::Full, 10).is_err());
    }

    #[test]
    fn deeper_levels_are_refused() {
        let p = make_params(1, 2, Some(&ToyOverrides { f: vec![1], p: vec![1] }), Variant::Mis).unwrap();
        assert_eq!(InstanceLaw::new(&p).unwrap_err(), LawError::Level(2));
    }
}
