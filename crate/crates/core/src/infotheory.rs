//! Exact finite joint distributions over named variables.
//!
//! Atoms carry nonnegative integer weights over a common total, so every
//! probability is an exact rational. Entropic quantities take logarithms
//! (base 2) only at the last step, and a log-ratio whose integer numerator and
//! denominator agree contributes exactly zero.

use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum InfoError {
    #[error("unknown variable {0:?}")]
    UnknownVariable(String),
    #[error("conditioning event has probability zero")]
    ZeroProbabilityEvent,
    #[error("support of p is not contained in support of q")]
    SupportMismatch,
    #[error("variable lists differ")]
    VariableMismatch,
    #[error("atom has {got} values, expected {expected}")]
    Arity { expected: usize, got: usize },
    #[error("distribution has no mass")]
    Empty,
    #[error("weights overflow 128 bits")]
    Overflow,
    #[error("malformed probability {0:?}")]
    BadProbability(String),
}

/// Joint law over named variables with `u64` values.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiscreteDist {
    names: Vec<String>,
    atoms: BTreeMap<Vec<u64>, u128>,
    total: u128,
}

impl DiscreteDist {
    /// Build from weighted atoms. Duplicate keys are merged; zero weights dropped.
    pub fn new<S: Into<String>>(
        names: impl IntoIterator<Item = S>,
        atoms: impl IntoIterator<Item = (Vec<u64>, u128)>,
    ) -> Result<Self, InfoError> {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        let mut map: BTreeMap<Vec<u64>, u128> = BTreeMap::new();
        let mut total: u128 = 0;
        for (key, w) in atoms {
            if key.len() != names.len() {
                return Err(InfoError::Arity { expected: names.len(), got: key.len() });
            }
            if w == 0 {
                continue;
            }
            total = total.checked_add(w).ok_or(InfoError::Overflow)?;
            *map.entry(key).or_insert(0) += w;
        }
        if total == 0 {
            return Err(InfoError::Empty);
        }
        Ok(DiscreteDist { names, atoms: map, total })
    }

    /// Uniform law on the given values of a single variable.
    pub fn uniform(name: &str, values: impl IntoIterator<Item = u64>) -> Result<Self, InfoError> {
        DiscreteDist::new([name], values.into_iter().map(|v| (vec![v], 1)))
    }

    /// Independent product; variable lists are concatenated.
    pub fn product(&self, other: &DiscreteDist) -> Result<Self, InfoError> {
        let names = self.names.iter().chain(&other.names).cloned();
        let mut atoms = Vec::with_capacity(self.atoms.len() * other.atoms.len());
        for (a, &wa) in &self.atoms {
            for (b, &wb) in &other.atoms {
                let mut key = a.clone();
                key.extend_from_slice(b);
                atoms.push((key, wa.checked_mul(wb).ok_or(InfoError::Overflow)?));
            }
        }
        DiscreteDist::new(names, atoms)
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn total(&self) -> u128 {
        self.total
    }

    pub fn support_size(&self) -> usize {
        self.atoms.len()
    }

    pub fn atoms(&self) -> impl Iterator<Item = (&[u64], u128)> + '_ {
        self.atoms.iter().map(|(k, &w)| (k.as_slice(), w))
    }

    /// Sorted distinct values observed for each variable.
    pub fn domains(&self) -> Vec<Vec<u64>> {
        (0..self.names.len())
            .map(|i| {
                let mut d: Vec<u64> = self.atoms.keys().map(|k| k[i]).collect();
                d.sort_unstable();
                d.dedup();
                d
            })
            .collect()
    }

    pub fn index_of(&self, name: &str) -> Result<usize, InfoError> {
        self.names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| InfoError::UnknownVariable(name.to_string()))
    }

    fn indices(&self, vars: &[&str]) -> Result<Vec<usize>, InfoError> {
        vars.iter().map(|v| self.index_of(v)).collect()
    }

    pub fn prob(&self, key: &[u64]) -> BigRational {
        let w = self.atoms.get(key).copied().unwrap_or(0);
        ratio(w, self.total)
    }

    /// Group weights by the projection onto `idx`.
    fn group(&self, idx: &[usize]) -> BTreeMap<Vec<u64>, u128> {
        let mut m: BTreeMap<Vec<u64>, u128> = BTreeMap::new();
        for (k, &w) in &self.atoms {
            *m.entry(idx.iter().map(|&i| k[i]).collect()).or_insert(0) += w;
        }
        m
    }

    pub fn marginal(&self, vars: &[&str]) -> Result<Self, InfoError> {
        let idx = self.indices(vars)?;
        DiscreteDist::new(vars.iter().map(|s| s.to_string()), self.group(&idx))
    }

    /// Law of the remaining variables given `assignment`.
    pub fn condition(&self, assignment: &[(&str, u64)]) -> Result<Self, InfoError> {
        let fixed: Vec<(usize, u64)> = assignment
            .iter()
            .map(|&(n, v)| Ok((self.index_of(n)?, v)))
            .collect::<Result<_, InfoError>>()?;
        let keep: Vec<usize> = (0..self.names.len()).filter(|i| !fixed.iter().any(|(j, _)| j == i)).collect();
        let atoms: Vec<(Vec<u64>, u128)> = self
            .atoms
            .iter()
            .filter(|(k, _)| fixed.iter().all(|&(i, v)| k[i] == v))
            .map(|(k, &w)| (keep.iter().map(|&i| k[i]).collect(), w))
            .collect();
        let names = keep.iter().map(|&i| self.names[i].clone());
        DiscreteDist::new(names, atoms).map_err(|e| match e {
            InfoError::Empty => InfoError::ZeroProbabilityEvent,
            other => other,
        })
    }

    /// H(X | Z) in bits.
    pub fn entropy(&self, x: &[&str], z: &[&str]) -> Result<f64, InfoError> {
        let xz = self.indices(&[x, z].concat())?;
        let zi = self.indices(z)?;
        let joint = self.group(&xz);
        let cond = self.group(&zi);
        let zlen = x.len();
        let mut h = 0.0;
        for (k, &w) in &joint {
            let wz = cond[&k[zlen..]];
            h += w as f64 * log_ratio(wz, 1, w, 1);
        }
        Ok(h / self.total as f64)
    }

    /// I(X ; Y | Z) in bits.
    pub fn mutual_info(&self, x: &[&str], y: &[&str], z: &[&str]) -> Result<f64, InfoError> {
        let xi = self.indices(x)?;
        let yi = self.indices(y)?;
        let zi = self.indices(z)?;
        Ok(mutual_info_idx(&self.atoms, self.total, &xi, &yi, &zi))
    }

    /// Exact total variation distance; both laws must share the variable list.
    pub fn tvd(&self, other: &DiscreteDist) -> Result<BigRational, InfoError> {
        if self.names != other.names {
            return Err(InfoError::VariableMismatch);
        }
        let tp = BigInt::from(self.total);
        let tq = BigInt::from(other.total);
        let mut sum = BigInt::zero();
        for (k, &wp) in &self.atoms {
            let wq = other.atoms.get(k).copied().unwrap_or(0);
            sum += (BigInt::from(wp) * &tq - BigInt::from(wq) * &tp).abs();
        }
        for (k, &wq) in &other.atoms {
            if !self.atoms.contains_key(k) {
                sum += BigInt::from(wq) * &tp;
            }
        }
        Ok(BigRational::new(sum, BigInt::from(2) * tp * tq))
    }

    /// KL(self ‖ other) in bits.
    pub fn kl(&self, other: &DiscreteDist) -> Result<f64, InfoError> {
        if self.names != other.names {
            return Err(InfoError::VariableMismatch);
        }
        let mut d = 0.0;
        for (k, &wp) in &self.atoms {
            let wq = *other.atoms.get(k).ok_or(InfoError::SupportMismatch)?;
            d += wp as f64 * log_ratio(wp, other.total, wq, self.total);
        }
        Ok(d / self.total as f64)
    }

    /// Expectation of a real function of the atom.
    pub fn expect(&self, f: impl Fn(&[u64]) -> f64) -> f64 {
        self.atoms.iter().map(|(k, &w)| w as f64 * f(k)).sum::<f64>() / self.total as f64
    }

    /// Push forward through a map of atoms, giving new variable names.
    pub fn map<S: Into<String>>(
        &self,
        names: impl IntoIterator<Item = S>,
        f: impl Fn(&[u64]) -> Vec<u64>,
    ) -> Result<Self, InfoError> {
        DiscreteDist::new(names, self.atoms.iter().map(|(k, &w)| (f(k), w)))
    }

    /// Same atoms, new names.
    pub fn rename<S: Into<String>>(&self, names: impl IntoIterator<Item = S>) -> Result<Self, InfoError> {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        if names.len() != self.names.len() {
            return Err(InfoError::VariableMismatch);
        }
        Ok(DiscreteDist { names, atoms: self.atoms.clone(), total: self.total })
    }
}

pub(crate) fn ratio(num: u128, den: u128) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// log2((a·b) / (c·d)), exactly 0 when the products agree.
pub(crate) fn log_ratio(a: u128, b: u128, c: u128, d: u128) -> f64 {
    let equal = match (a.checked_mul(b), c.checked_mul(d)) {
        (Some(x), Some(y)) => x == y,
        _ => BigUint::from(a) * BigUint::from(b) == BigUint::from(c) * BigUint::from(d),
    };
    if equal {
        0.0
    } else {
        (a as f64).log2() + (b as f64).log2() - (c as f64).log2() - (d as f64).log2()
    }
}

/// I(X;Y|Z) for weighted keys; X, Y, Z given as column indices.
pub(crate) fn mutual_info_idx<'a, K>(
    rows: impl IntoIterator<Item = (&'a K, &'a u128)> + Clone,
    total: u128,
    x: &[usize],
    y: &[usize],
    z: &[usize],
) -> f64
where
    K: AsRef<[u64]> + 'a,
{
    let proj = |k: &[u64], cols: &[&[usize]]| -> Vec<u64> {
        cols.iter().flat_map(|c| c.iter().map(|&i| k[i])).collect()
    };
    // Ordered so the floating-point sum does not depend on hash order.
    let mut xyz: BTreeMap<Vec<u64>, u128> = BTreeMap::new();
    let mut xz: BTreeMap<Vec<u64>, u128> = BTreeMap::new();
    let mut yz: BTreeMap<Vec<u64>, u128> = BTreeMap::new();
    let mut zz: BTreeMap<Vec<u64>, u128> = BTreeMap::new();
    for (k, &w) in rows {
        let k = k.as_ref();
        *xyz.entry(proj(k, &[x, y, z])).or_insert(0) += w;
        *xz.entry(proj(k, &[x, z])).or_insert(0) += w;
        *yz.entry(proj(k, &[y, z])).or_insert(0) += w;
        *zz.entry(proj(k, &[z])).or_insert(0) += w;
    }
    let (lx, ly) = (x.len(), y.len());
    let mut acc = 0.0;
    for (k, &w) in &xyz {
        let kx = &k[..lx];
        let ky = &k[lx..lx + ly];
        let kz = &k[lx + ly..];
        let wxz = xz[&[kx, kz].concat()];
        let wyz = yz[&[ky, kz].concat()];
        let wz = zz[kz];
        acc += w as f64 * log_ratio(w, wz, wxz, wyz);
    }
    (acc / total as f64).max(0.0)
}

/// Render an exact rational as "p/q".
pub fn fraction_string(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub fn parse_fraction(s: &str) -> Result<BigRational, InfoError> {
    let bad = || InfoError::BadProbability(s.to_string());
    let (p, q) = s.split_once('/').unwrap_or((s, "1"));
    let p: BigInt = p.trim().parse().map_err(|_| bad())?;
    let q: BigInt = q.trim().parse().map_err(|_| bad())?;
    if q.is_zero() {
        return Err(bad());
    }
    Ok(BigRational::new(p, q))
}

pub fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

#[derive(Serialize, Deserialize)]
struct VariableRepr {
    name: String,
    domain: Vec<u64>,
}

#[derive(Serialize, Deserialize)]
struct AtomRepr {
    values: Vec<u64>,
    p: String,
}

#[derive(Serialize, Deserialize)]
struct DistRepr {
    variables: Vec<VariableRepr>,
    atoms: Vec<AtomRepr>,
}

impl Serialize for DiscreteDist {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let variables = self
            .names
            .iter()
            .zip(self.domains())
            .map(|(name, domain)| VariableRepr { name: name.clone(), domain })
            .collect();
        let atoms = self
            .atoms
            .iter()
            .map(|(k, &w)| AtomRepr { values: k.clone(), p: fraction_string(&ratio(w, self.total)) })
            .collect();
        DistRepr { variables, atoms }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for DiscreteDist {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let r = DistRepr::deserialize(d)?;
        let probs: Vec<BigRational> =
            r.atoms.iter().map(|a| parse_fraction(&a.p)).collect::<Result<_, _>>().map_err(D::Error::custom)?;
        let one = BigRational::from_integer(1.into());
        if probs.iter().sum::<BigRational>() != one || probs.iter().any(|p| p < &BigRational::zero()) {
            return Err(D::Error::custom("probabilities must be nonnegative and sum to 1"));
        }
        let den = probs
            .iter()
            .fold(BigInt::from(1), |acc, p| num_integer::Integer::lcm(&acc, p.denom()));
        let atoms = r
            .atoms
            .into_iter()
            .zip(&probs)
            .map(|(a, p)| {
                let w = (p * BigRational::from_integer(den.clone())).to_integer();
                w.to_u128().map(|w| (a.values, w)).ok_or_else(|| D::Error::custom("weights overflow"))
            })
            .collect::<Result<Vec<_>, _>>()?;
        DiscreteDist::new(r.variables.into_iter().map(|v| v.name), atoms).map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fair_pair_equal() -> DiscreteDist {
        DiscreteDist::new(["a", "b"], [(vec![0, 0], 1), (vec![1, 1], 1)]).unwrap()
    }

    #[test]
    fn entropy_examples() {
        let bit = DiscreteDist::uniform("x", 0..2).unwrap();
        assert_eq!(bit.entropy(&["x"], &[]).unwrap(), 1.0);
        let four = DiscreteDist::uniform("x", 0..4).unwrap();
        assert!((four.mutual_info(&["x"], &["x"], &[]).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn marginal_and_condition() {
        let d = fair_pair_equal();
        assert_eq!(d.marginal(&["b"]).unwrap(), DiscreteDist::uniform("b", 0..2).unwrap());
        let c = d.condition(&[("a", 1)]).unwrap();
        assert_eq!(c.prob(&[1]), ratio(1, 1));
        assert_eq!(d.condition(&[("a", 5)]), Err(InfoError::ZeroProbabilityEvent));
        assert_eq!(d.marginal(&["zz"]), Err(InfoError::UnknownVariable("zz".into())));
    }

    #[test]
    fn independent_product_has_exact_zero_information() {
        let a = DiscreteDist::new(["a"], [(vec![0], 1), (vec![1], 2)]).unwrap();
        let b = DiscreteDist::new(["b"], [(vec![0], 3), (vec![1], 5), (vec![2], 7)]).unwrap();
        let p = a.product(&b).unwrap();
        assert_eq!(p.mutual_info(&["a"], &["b"], &[]).unwrap(), 0.0);
    }

    #[test]
    fn kl_and_tvd() {
        let p = DiscreteDist::new(["x"], [(vec![0], 1), (vec![1], 1)]).unwrap();
        let q = DiscreteDist::new(["x"], [(vec![0], 1), (vec![1], 3)]).unwrap();
        assert_eq!(p.tvd(&q).unwrap(), ratio(1, 4));
        assert!(p.kl(&q).unwrap() > 0.0);
        let point = DiscreteDist::new(["x"], [(vec![0], 1)]).unwrap();
        assert_eq!(p.kl(&point), Err(InfoError::SupportMismatch));
        assert_eq!(p.kl(&p).unwrap(), 0.0);
    }

    #[test]
    fn json_uses_fraction_strings() {
        let d = DiscreteDist::new(["x"], [(vec![0], 1), (vec![1], 3)]).unwrap();
        let s = serde_json::to_string(&d).unwrap();
        assert!(s.contains("\"p\":\"3/4\""), "{s}");
        let back: DiscreteDist = serde_json::from_str(&s).unwrap();
        assert_eq!(back.tvd(&d).unwrap(), BigRational::zero());
    }
}
