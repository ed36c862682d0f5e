use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

use super::joint::JointLaw;
use super::EmbeddingError;

/// Tolerance for comparing floating-point information quantities.
pub const INFO_TOLERANCE: f64 = 1e-9;

fn cat(parts: &[&[usize]]) -> Vec<usize> {
    parts.concat()
}

/// I(M^1_{P,i}; B_i | Σ).
pub fn mi_first_round(j: &JointLaw<'_>, i: usize) -> Result<f64, EmbeddingError> {
    j.check_block(i)?;
    let m1 = j.msg_cols(1, &j.principal_of(i));
    Ok(j.mi(&m1, &[j.b_col(i)], &j.s_cols()))
}

/// Per-row probability table keyed by a column projection, as fractions of
/// the law's total weight.
type Grouped = BTreeMap<Vec<u64>, BTreeMap<Vec<u64>, u128>>;

fn grouped(j: &JointLaw<'_>, cond: &[usize], target: &[usize]) -> Grouped {
    let mut out: Grouped = BTreeMap::new();
    for (k, &w) in j.rows() {
        let c = cond.iter().map(|&x| k[x]).collect();
        let t = target.iter().map(|&x| k[x]).collect();
        *out.entry(c).or_default().entry(t).or_default() += w;
    }
    out
}

/// Largest TV distance, over conditionings c = (B_i, M^1_{P,i}, Σ), between
/// the law of T_i given c and the product over u of the laws of T_i(u) given
/// (B_i(u), M^1_{P,i}, Σ).
pub fn check_product_property(j: &JointLaw<'_>, i: usize) -> Result<BigRational, EmbeddingError> {
    j.check_block(i)?;
    let m1 = j.msg_cols(1, &j.principal_of(i));
    let s = j.s_cols();
    let len = j.block_len(i);
    let joint = grouped(j, &cat(&[&[j.b_col(i)], &m1, &s]), &j.t_cols(i));
    // Per-vertex conditionals keyed by (B_i(u), M^1_{P,i}, Σ).
    let per_vertex: Vec<Grouped> =
        (0..len).map(|p| grouped(j, &cat(&[&[j.bu_col(i, p)], &m1, &s]), &[j.t_col(i, p)])).collect();
    // B_i(u) is a function of B_i; recover it from any row with the given B_i.
    let mut bu_of: BTreeMap<u64, Vec<u64>> = BTreeMap::new();
    for (k, _) in j.rows() {
        bu_of.entry(k[j.b_col(i)]).or_insert_with(|| (0..len).map(|p| k[j.bu_col(i, p)]).collect());
    }
    let mut worst = BigRational::zero();
    for (c, dist) in &joint {
        let total: u128 = dist.values().sum();
        let bu = &bu_of[&c[0]];
        let rest = &c[1..];
        let factors: Vec<(u128, Vec<(u64, u128)>)> = (0..len)
            .map(|p| {
                let key: Vec<u64> = std::iter::once(bu[p]).chain(rest.iter().copied()).collect();
                let d = &per_vertex[p][&key];
                (d.values().sum(), d.iter().map(|(t, &w)| (t[0], w)).collect())
            })
            .collect();
        // Sum |joint - product| over the product's support; joint atoms lie inside it.
        let mut diff = BigRational::zero();
        let mut idx = vec![0usize; len];
        loop {
            let tkey: Vec<u64> = idx.iter().enumerate().map(|(p, &x)| factors[p].1[x].0).collect();
            let mut prod = BigRational::new(1.into(), 1.into());
            for (p, &x) in idx.iter().enumerate() {
                prod *= BigRational::new(BigInt::from(factors[p].1[x].1), BigInt::from(factors[p].0));
            }
            let q = BigRational::new(BigInt::from(*dist.get(&tkey).unwrap_or(&0)), BigInt::from(total));
            diff += (q - prod).abs();
            let mut p = 0;
            while p < len {
                idx[p] += 1;
                if idx[p] < factors[p].1.len() {
                    break;
                }
                idx[p] = 0;
                p += 1;
            }
            if p == len {
                break;
            }
        }
        let tv = diff / BigRational::from_integer(2.into());
        if tv > worst {
            worst = tv;
        }
    }
    Ok(worst)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoundTerms {
    /// I(M^t_{P,-i}; G_i | M^{<t}, M^t_{P,i}, Σ)
    pub term_p: f64,
    /// I(M^t_F; G_i | M^{<t}, M^t_P, Σ)
    pub term_f: f64,
}

pub fn mi_round_t(j: &JointLaw<'_>, i: usize, t: usize) -> Result<RoundTerms, EmbeddingError> {
    j.check_block(i)?;
    if t == 0 {
        return Err(EmbeddingError::BadRound(t));
    }
    let all = j.all_vertices();
    let before = j.msg_before(t, &all);
    let pi = j.msg_cols(t, &j.principal_of(i));
    let p_rest = j.msg_cols(t, &j.principal_except(i));
    let p_all = j.msg_cols(t, &j.principal_all());
    let f = j.msg_cols(t, &j.fooling_all());
    let g = j.g_cols(i);
    let s = j.s_cols();
    Ok(RoundTerms {
        term_p: j.mi(&p_rest, &g, &cat(&[&before, &pi, &s])),
        term_f: j.mi(&f, &g, &cat(&[&before, &p_all, &s])),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SumInfo {
    /// I(M^{≤t}_P; G | M^{<t}_F, Σ)
    pub lhs: f64,
    /// Σ_i I(M^{<t}_P, M^t_{P,i}; G_i | M^{<t}_F, Σ)
    pub rhs: f64,
}

impl SumInfo {
    pub fn holds(&self) -> bool {
        self.lhs <= self.rhs + INFO_TOLERANCE
    }
}

pub fn check_sum_info(j: &JointLaw<'_>, t: usize) -> Result<SumInfo, EmbeddingError> {
    if t == 0 {
        return Err(EmbeddingError::BadRound(t));
    }
    let p_all = j.principal_all();
    let f_before = j.msg_before(t, &j.fooling_all());
    let cond = cat(&[&f_before, &j.s_cols()]);
    let p_upto = j.msg_before(t + 1, &p_all);
    let lhs = j.mi(&p_upto, &j.g_all(), &cond);
    let p_before = j.msg_before(t, &p_all);
    let rhs = (0..j.blocks())
        .map(|i| j.mi(&cat(&[&p_before, &j.msg_cols(t, &j.principal_of(i))]), &j.g_cols(i), &cond))
        .sum();
    Ok(SumInfo { lhs, rhs })
}

/// H(M^{<t}_F) and H(M^t_F), the fooling-entropy terms bounding the leakage.
pub fn fooling_entropy(j: &JointLaw<'_>, t: usize) -> (f64, f64) {
    let f = j.fooling_all();
    (j.entropy(&j.msg_before(t, &f), &[]), j.entropy(&j.msg_cols(t, &f), &[]))
}

#[derive(Debug, Clone, PartialEq)]
pub struct RectangleGap {
    /// I(G_i; G_{-i} | M^{≤t}, Σ)
    pub mi: f64,
    /// E_c TV(law of (G_i, G_{-i}) given c, product of its marginals), c = (M^{≤t}, Σ).
    pub tvd: BigRational,
}

/// How far G_i and the other blocks' inputs are from independent once the
/// first t rounds of messages are known.
pub fn rectangle_gap(j: &JointLaw<'_>, i: usize, t: usize) -> Result<RectangleGap, EmbeddingError> {
    j.check_block(i)?;
    let gi = j.g_cols(i);
    let go = j.g_others(i);
    let c = cat(&[&j.msg_before(t + 1, &j.all_vertices()), &j.s_cols()]);
    let mi = j.mi(&gi, &go, &c);
    let both = cat(&[&gi, &go]);
    let groups = grouped(j, &c, &both);
    let total = BigInt::from(j.total());
    let mut acc = BigRational::zero();
    for dist in groups.values() {
        let wc: u128 = dist.values().sum();
        let mut left: BTreeMap<&[u64], u128> = BTreeMap::new();
        let mut right: BTreeMap<&[u64], u128> = BTreeMap::new();
        for (k, &w) in dist {
            *left.entry(&k[..gi.len()]).or_default() += w;
            *right.entry(&k[gi.len()..]).or_default() += w;
        }
        // Σ |w(a,b)·wc − w(a)·w(b)| / wc², weighted by wc/total.
        let mut diff = BigInt::zero();
        for (a, &wa) in &left {
            for (b, &wb) in &right {
                let key = [*a, *b].concat();
                let joint = BigInt::from(*dist.get(&key).unwrap_or(&0)) * BigInt::from(wc);
                diff += (joint - BigInt::from(wa) * BigInt::from(wb)).abs();
            }
        }
        acc += BigRational::new(diff, BigInt::from(wc) * &total);
    }
    Ok(RectangleGap { mi, tvd: acc / BigRational::from_integer(2.into()) })
}

/// Closed-form budgets from the explicit intermediate bounds, evaluated with
/// the actual parameter counts. `k` is the protocol bandwidth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Budgets {
    pub k: f64,
    /// Largest entropy of one message of at most k bits: log2(2^{k+1} - 1).
    pub capacity: f64,
    pub n_prev: f64,
    pub f_hat: f64,
    pub f: f64,
    pub p: f64,
}

impl Budgets {
    pub fn new(j: &JointLaw<'_>) -> Self {
        let params = j.params();
        let lv = params.level(1);
        let k = j.protocol().bandwidth() as f64;
        Budgets {
            k,
            capacity: ((2.0f64).powf(k + 1.0) - 1.0).log2(),
            n_prev: params.n(0) as f64,
            f_hat: lv.f_hat as f64,
            f: lv.f as f64,
            p: lv.p as f64,
        }
    }

    /// n_{r-1} · k / f̂_r.
    pub fn first_round(&self) -> f64 {
        self.n_prev * self.k / self.f_hat
    }

    /// k · (n_{r-1} - 1) · f_r · (t - 1) / p_r.
    pub fn term_p(&self, t: usize) -> f64 {
        self.k * (self.n_prev - 1.0) * self.f * (t as f64 - 1.0) / self.p
    }

    /// k · (n_{r-1} - 1) · f_r · t / p_r.
    pub fn term_f(&self, t: usize) -> f64 {
        self.k * (self.n_prev - 1.0) * self.f * t as f64 / self.p
    }
}
