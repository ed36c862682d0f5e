use serde::{Deserialize, Serialize};

/// Which half of a doubled instance a block belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    U,
    V,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Role {
    Principal(usize),
    Fooling(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LayoutError {
    #[error("sigma is not a permutation of 0..{0}")]
    NotPermutation(usize),
    #[error("blocks do not partition 0..{0}")]
    NotPartition(usize),
    #[error("expected {expected} side tags, got {got}")]
    SideCount { expected: usize, got: usize },
}

#[derive(Serialize, Deserialize)]
struct LayoutRepr {
    level: usize,
    principal: Vec<Vec<usize>>,
    fooling: Vec<Vec<usize>>,
    sigma: Vec<usize>,
    side: Vec<Side>,
}

/// Block structure of a recursive hard instance.
///
/// `principal` and `fooling` hold public labels, i.e. the images under
/// `sigma` of the canonical pre-permutation blocks. `side` has one tag per
/// block, principal blocks first.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "LayoutRepr", into = "LayoutRepr")]
pub struct BlockLayout {
    level: usize,
    principal: Vec<Vec<usize>>,
    fooling: Vec<Vec<usize>>,
    sigma: Vec<usize>,
    side: Vec<Side>,
    sigma_inv: Vec<usize>,
    roles: Vec<(Role, usize)>,
}

impl TryFrom<LayoutRepr> for BlockLayout {
    type Error = LayoutError;

    fn try_from(r: LayoutRepr) -> Result<Self, Self::Error> {
        let n = r.sigma.len();
        let sigma_inv = invert(&r.sigma).ok_or(LayoutError::NotPermutation(n))?;
        let pre = |blocks: &[Vec<usize>]| -> Vec<Vec<usize>> {
            blocks
                .iter()
                .map(|b| b.iter().map(|&v| sigma_inv.get(v).copied().unwrap_or(usize::MAX)).collect())
                .collect()
        };
        let (pp, pf) = (pre(&r.principal), pre(&r.fooling));
        BlockLayout::new(r.level, pp, pf, r.side, r.sigma)
    }
}

impl From<BlockLayout> for LayoutRepr {
    fn from(l: BlockLayout) -> Self {
        LayoutRepr {
            level: l.level,
            principal: l.principal,
            fooling: l.fooling,
            sigma: l.sigma,
            side: l.side,
        }
    }
}

fn invert(sigma: &[usize]) -> Option<Vec<usize>> {
    let n = sigma.len();
    let mut inv = vec![usize::MAX; n];
    for (x, &y) in sigma.iter().enumerate() {
        if y >= n || inv[y] != usize::MAX {
            return None;
        }
        inv[y] = x;
    }
    Some(inv)
}

impl BlockLayout {
    /// Build a layout from pre-permutation blocks and a permutation
    /// `sigma[pre] = public`.
    pub fn new(
        level: usize,
        pre_principal: Vec<Vec<usize>>,
        pre_fooling: Vec<Vec<usize>>,
        side: Vec<Side>,
        sigma: Vec<usize>,
    ) -> Result<Self, LayoutError> {
        let n = sigma.len();
        let sigma_inv = invert(&sigma).ok_or(LayoutError::NotPermutation(n))?;
        let blocks = pre_principal.len() + pre_fooling.len();
        if side.len() != blocks {
            return Err(LayoutError::SideCount { expected: blocks, got: side.len() });
        }
        let mut roles = vec![None; n];
        let tagged = pre_principal
            .iter()
            .enumerate()
            .map(|(i, b)| (Role::Principal(i), b))
            .chain(pre_fooling.iter().enumerate().map(|(j, b)| (Role::Fooling(j), b)));
        for (role, block) in tagged {
            for (pos, &x) in block.iter().enumerate() {
                if x >= n || roles[sigma[x]].is_some() {
                    return Err(LayoutError::NotPartition(n));
                }
                roles[sigma[x]] = Some((role, pos));
            }
        }
        let roles: Vec<(Role, usize)> = roles
            .into_iter()
            .collect::<Option<_>>()
            .ok_or(LayoutError::NotPartition(n))?;
        let image = |blocks: &[Vec<usize>]| -> Vec<Vec<usize>> {
            blocks.iter().map(|b| b.iter().map(|&x| sigma[x]).collect()).collect()
        };
        Ok(BlockLayout {
            level,
            principal: image(&pre_principal),
            fooling: image(&pre_fooling),
            sigma,
            side,
            sigma_inv,
            roles,
        })
    }

    /// Same blocks, different permutation.
    pub fn with_sigma(&self, sigma: Vec<usize>) -> Result<Self, LayoutError> {
        let pre = |blocks: &[Vec<usize>]| -> Vec<Vec<usize>> {
            blocks.iter().map(|b| b.iter().map(|&v| self.sigma_inv[v]).collect()).collect()
        };
        BlockLayout::new(
            self.level,
            pre(&self.principal),
            pre(&self.fooling),
            self.side.clone(),
            sigma,
        )
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn n(&self) -> usize {
        self.sigma.len()
    }

    pub fn sigma(&self) -> &[usize] {
        &self.sigma
    }

    pub fn sigma_inv(&self) -> &[usize] {
        &self.sigma_inv
    }

    pub fn principal(&self) -> &[Vec<usize>] {
        &self.principal
    }

    pub fn fooling(&self) -> &[Vec<usize>] {
        &self.fooling
    }

    pub fn principal_count(&self) -> usize {
        self.principal.len()
    }

    pub fn fooling_count(&self) -> usize {
        self.fooling.len()
    }

    pub fn sides(&self) -> &[Side] {
        &self.side
    }

    pub fn principal_side(&self, i: usize) -> Side {
        self.side[i]
    }

    pub fn fooling_side(&self, j: usize) -> Side {
        self.side[self.principal.len() + j]
    }

    /// Role of a public label and its position inside its block.
    pub fn role(&self, v: usize) -> (Role, usize) {
        self.roles[v]
    }

    pub fn is_principal(&self, v: usize) -> bool {
        matches!(self.roles[v].0, Role::Principal(_))
    }

    /// All public principal labels, ascending.
    pub fn principal_vertices(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.principal.iter().flatten().copied().collect();
        v.sort_unstable();
        v
    }

    /// All public fooling labels, ascending.
    pub fn fooling_vertices(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.fooling.iter().flatten().copied().collect();
        v.sort_unstable();
        v
    }

    /// Public principal labels on one side, ascending.
    pub fn principal_vertices_on(&self, side: Side) -> Vec<usize> {
        let mut v: Vec<usize> = self
            .principal
            .iter()
            .enumerate()
            .filter(|(i, _)| self.side[*i] == side)
            .flat_map(|(_, b)| b.iter().copied())
            .collect();
        v.sort_unstable();
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> BlockLayout {
        BlockLayout::new(
            1,
            vec![vec![0, 1], vec![2, 3]],
            vec![vec![4]],
            vec![Side::U, Side::U, Side::U],
            vec![4, 3, 2, 1, 0],
        )
        .unwrap()
    }

    #[test]
    fn public_blocks_are_sigma_images() {
        let l = toy();
        assert_eq!(l.principal(), &[vec![4, 3], vec![2, 1]]);
        assert_eq!(l.fooling(), &[vec![0]]);
        assert_eq!(l.role(3), (Role::Principal(0), 1));
        assert_eq!(l.role(0), (Role::Fooling(0), 0));
        assert_eq!(l.principal_vertices(), vec![1, 2, 3, 4]);
    }

    #[test]
    fn json_round_trip() {
        let l = toy();
        let s = serde_json::to_string(&l).unwrap();
        assert!(s.contains("\"principal\":[[4,3],[2,1]]"));
        let back: BlockLayout = serde_json::from_str(&s).unwrap();
        assert_eq!(back, l);
    }

    #[test]
    fn rejects_bad_partition() {
        let r = BlockLayout::new(1, vec![vec![0, 1]], vec![vec![1]], vec![Side::U; 2], vec![0, 1, 2]);
        assert_eq!(r, Err(LayoutError::NotPartition(3)));
        let r = BlockLayout::new(1, vec![vec![0]], vec![], vec![Side::U], vec![0, 0]);
        assert_eq!(r, Err(LayoutError::NotPermutation(2)));
    }
}
