//! Property checks for the information-theoretic facts used by the leakage
//! analysis, run on random small joint distributions with exact weights.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{Entry, Relation};
use crate::infotheory::{to_f64, DiscreteDist, InfoError};
use crate::Coins;

/// Slack on identities and inequalities between logarithmic quantities.
pub const FACT_TOLERANCE: f64 = 1e-9;

const TOL: f64 = FACT_TOLERANCE;

fn rng_for(seed: u64, tag: u64) -> ChaCha8Rng {
    Coins::new(seed).derive(tag).public(0)
}

/// Random weights, at least one of them positive.
fn weights(rng: &mut ChaCha8Rng, len: usize, allow_zero: bool) -> Vec<u128> {
    let lo = if allow_zero { 0 } else { 1 };
    let mut w: Vec<u128> = (0..len).map(|_| rng.gen_range(lo..=6)).collect();
    if w.iter().all(|&x| x == 0) {
        let i = rng.gen_range(0..len);
        w[i] = 1;
    }
    w
}

fn grid(domains: &[u64]) -> Vec<Vec<u64>> {
    let mut out = vec![Vec::new()];
    for &d in domains {
        out = out.into_iter().flat_map(|p| (0..d).map(move |x| [p.clone(), vec![x]].concat())).collect();
    }
    out
}

fn random_domains(rng: &mut ChaCha8Rng, vars: usize) -> Vec<u64> {
    (0..vars).map(|_| rng.gen_range(2..=3)).collect()
}

fn dist_on(names: &[&str], domains: &[u64], rng: &mut ChaCha8Rng, allow_zero: bool) -> DiscreteDist {
    let cells = grid(domains);
    let w = weights(rng, cells.len(), allow_zero);
    DiscreteDist::new(names.iter().copied(), cells.into_iter().zip(w)).expect("positive mass")
}

fn random_dist(rng: &mut ChaCha8Rng, names: &[&str]) -> DiscreteDist {
    let domains = random_domains(rng, names.len());
    dist_on(names, &domains, rng, true)
}

/// Law on the full grid with the given weight for each cell.
fn built(names: &[&str], domains: &[u64], weight: impl Fn(&[u64]) -> u128) -> DiscreteDist {
    DiscreteDist::new(names.iter().copied(), grid(domains).into_iter().map(|k| {
        let w = weight(&k);
        (k, w)
    }))
    .expect("positive mass")
}

/// Conditional table: one weight row per conditioning value, all rows
/// scaled to a common sum so that products of tables stay normalised.
fn table(rng: &mut ChaCha8Rng, rows: usize, len: u64) -> Vec<Vec<u128>> {
    let raw: Vec<Vec<u128>> = (0..rows).map(|_| weights(rng, len as usize, true)).collect();
    let sums: Vec<u128> = raw.iter().map(|r| r.iter().sum()).collect();
    let common = sums.iter().fold(1u128, |acc, &x| acc.lcm(&x));
    raw.into_iter().zip(sums).map(|(r, s)| r.into_iter().map(|w| w * (common / s)).collect()).collect()
}

/// A, B, C with A ⊥ B | C: p(c) p(a|c) p(b|c).
fn ci_dist(rng: &mut ChaCha8Rng) -> DiscreteDist {
    let d = random_domains(rng, 3);
    let pc = weights(rng, d[2] as usize, false);
    let pa = table(rng, d[2] as usize, d[0]);
    let pb = table(rng, d[2] as usize, d[1]);
    built(&["A", "B", "C"], &d, |k| pc[k[2] as usize] * pa[k[2] as usize][k[0] as usize] * pb[k[2] as usize][k[1] as usize])
}

/// A, B, C, D with A ⊥ D | C: p(c) p(a|c) p(d|c) p(b|a,c,d).
fn increase_premise(rng: &mut ChaCha8Rng) -> DiscreteDist {
    let d = random_domains(rng, 4);
    let pc = weights(rng, d[2] as usize, false);
    let pa = table(rng, d[2] as usize, d[0]);
    let pd = table(rng, d[2] as usize, d[3]);
    let pb = table(rng, (d[0] * d[2] * d[3]) as usize, d[1]);
    built(&["A", "B", "C", "D"], &d, |k| {
        let row = ((k[0] * d[2] + k[2]) * d[3] + k[3]) as usize;
        pc[k[2] as usize] * pa[k[2] as usize][k[0] as usize] * pd[k[2] as usize][k[3] as usize] * pb[row][k[1] as usize]
    })
}

/// A, B, C, D with A ⊥ D | B, C: p(b,c) p(a|b,c) p(d|b,c).
fn decrease_premise(rng: &mut ChaCha8Rng) -> DiscreteDist {
    let d = random_domains(rng, 4);
    let rows = (d[1] * d[2]) as usize;
    let pbc = weights(rng, rows, false);
    let pa = table(rng, rows, d[0]);
    let pd = table(rng, rows, d[3]);
    built(&["A", "B", "C", "D"], &d, |k| {
        let row = (k[1] * d[2] + k[2]) as usize;
        pbc[row] * pa[row][k[0] as usize] * pd[row][k[3] as usize]
    })
}

fn weight_map(d: &DiscreteDist, vars: &[&str]) -> Result<BTreeMap<Vec<u64>, u128>, InfoError> {
    Ok(d.marginal(vars)?.atoms().map(|(k, w)| (k.to_vec(), w)).collect())
}

/// Exact test of X ⊥ Y | Z: w(x,y,z)·w(z) = w(x,z)·w(y,z) for all values.
pub(crate) fn cond_independent(d: &DiscreteDist, x: &[&str], y: &[&str], z: &[&str]) -> Result<bool, InfoError> {
    let xyz = weight_map(d, &[x, y, z].concat())?;
    let xz = weight_map(d, &[x, z].concat())?;
    let yz = weight_map(d, &[y, z].concat())?;
    let zz = weight_map(d, z)?;
    let (lx, lz) = (x.len(), z.len());
    for (kx, &wx) in &xz {
        let zk = &kx[lx..];
        for (ky, &wy) in &yz {
            if &ky[ky.len() - lz..] != zk {
                continue;
            }
            let key = [&kx[..lx], &ky[..ky.len() - lz], zk].concat();
            let joint = xyz.get(&key).copied().unwrap_or(0);
            if BigUint::from(joint) * BigUint::from(zz[zk]) != BigUint::from(wx) * BigUint::from(wy) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

fn is_uniform(d: &DiscreteDist) -> bool {
    let mut w = d.atoms().map(|(_, w)| w);
    let first = w.next();
    w.all(|x| Some(x) == first)
}

fn max_slack(trials: u64, mut f: impl FnMut(u64) -> Result<f64, InfoError>) -> Result<f64, InfoError> {
    let mut worst = f64::NEG_INFINITY;
    for t in 0..trials {
        worst = worst.max(f(t)?);
    }
    Ok(worst)
}

fn max_exact(trials: u64, mut f: impl FnMut(u64) -> Result<BigRational, InfoError>) -> Result<BigRational, InfoError> {
    let mut worst: Option<BigRational> = None;
    for t in 0..trials {
        let s = f(t)?;
        if worst.as_ref().is_none_or(|w| s > *w) {
            worst = Some(s);
        }
    }
    Ok(worst.unwrap_or_else(BigRational::zero))
}

fn count(trials: u64, mut f: impl FnMut(u64) -> Result<bool, InfoError>) -> Result<usize, InfoError> {
    let mut bad = 0;
    for t in 0..trials {
        if !f(t)? {
            bad += 1;
        }
    }
    Ok(bad)
}

fn expectation(d: &DiscreteDist, x: &BTreeMap<Vec<u64>, u64>) -> BigRational {
    d.atoms()
        .map(|(k, _)| d.prob(k) * BigRational::from_integer(x[k].into()))
        .sum()
}

/// Two laws on the same variables and value grid; `q` has full support.
fn pair_on_grid(rng: &mut ChaCha8Rng, names: &[&str]) -> (DiscreteDist, DiscreteDist, Vec<u64>) {
    let domains = random_domains(rng, names.len());
    let p = dist_on(names, &domains, rng, true);
    let q = dist_on(names, &domains, rng, false);
    (p, q, domains)
}

/// Σ_i E_{x_<i ~ p} TV(p(X_i | x_<i), q(X_i | x_<i)).
fn tvd_chain_bound(p: &DiscreteDist, q: &DiscreteDist, names: &[&str]) -> Result<BigRational, InfoError> {
    let mut bound = BigRational::zero();
    for i in 0..names.len() {
        let prefix = &names[..i];
        let target = [names[i]];
        if prefix.is_empty() {
            bound += p.marginal(&target)?.tvd(&q.marginal(&target)?)?;
            continue;
        }
        let pm = p.marginal(prefix)?;
        for (key, _) in pm.atoms() {
            let assignment: Vec<(&str, u64)> = prefix.iter().copied().zip(key.iter().copied()).collect();
            let pc = p.condition(&assignment)?.marginal(&target)?;
            let qc = q.condition(&assignment)?.marginal(&target)?;
            bound += pm.prob(key) * pc.tvd(&qc)?;
        }
    }
    Ok(bound)
}

fn fair_bits(names: &[&str], f: impl Fn(u64, u64) -> Vec<u64>) -> DiscreteDist {
    DiscreteDist::new(names.iter().copied(), (0..4).map(|x| (f(x & 1, x >> 1), 1))).expect("positive mass")
}

/// Runs every property on `trials` random distributions each, plus fixtures
/// whose premises fail so that the corresponding inequality is violated.
pub fn infotheory_suite(trials: u64, seed: u64) -> Result<Vec<Entry>, InfoError> {
    let mut out = Vec::new();
    let le = |name: &str, v: f64| Entry::float(name, v, Relation::Le, 0.0, TOL);

    let mut rng = rng_for(seed, 1);
    let v = max_slack(trials, |_| {
        let m = rng.gen_range(1..=5);
        let d = dist_on(&["A"], &[m], &mut rng, true);
        let h = d.entropy(&["A"], &[])?;
        Ok((-h).max(h - (d.support_size() as f64).log2()))
    })?;
    out.push(le("entropy lies in [0, log |supp|]: worst excess", v));

    let mut rng = rng_for(seed, 2);
    let bad = count(trials, |t| {
        let d = if t % 4 == 0 {
            DiscreteDist::uniform("A", 0..(t % 7 + 1))?
        } else {
            let m = rng.gen_range(1..=4);
            dist_on(&["A"], &[m], &mut rng, true)
        };
        let gap = (d.support_size() as f64).log2() - d.entropy(&["A"], &[])?;
        Ok((gap.abs() <= TOL) == is_uniform(&d))
    })?;
    out.push(Entry::none("entropy equals log |supp| exactly for uniform laws: mismatches", bad));

    let mut rng = rng_for(seed, 3);
    let mut consistency = 0.0f64;
    let v = max_slack(trials, |_| {
        let d = random_dist(&mut rng, &["A", "B", "C"]);
        let via_entropy = d.entropy(&["A"], &["C"])? - d.entropy(&["A"], &["B", "C"])?;
        consistency = consistency.max((via_entropy - d.mutual_info(&["A"], &["B"], &["C"])?).abs());
        Ok(-via_entropy)
    })?;
    out.push(le("conditional mutual information is nonnegative: worst negative part", v));
    out.push(le("I(A;B|C) = H(A|C) - H(A|B,C): worst deviation", consistency));

    let mut rng = rng_for(seed, 4);
    let bad = count(trials, |t| {
        let d = if t % 2 == 0 { ci_dist(&mut rng) } else { random_dist(&mut rng, &["A", "B", "C"]) };
        let zero = d.mutual_info(&["A"], &["B"], &["C"])? <= TOL;
        Ok(zero == cond_independent(&d, &["A"], &["B"], &["C"])?)
    })?;
    out.push(Entry::none("zero conditional information iff conditional independence: mismatches", bad));

    let mut rng = rng_for(seed, 5);
    let mut mismatches = 0;
    let v = max_slack(trials, |t| {
        let d = if t % 2 == 0 {
            ci_dist(&mut rng).rename(["A", "C", "B"])?
        } else {
            random_dist(&mut rng, &["A", "B", "C"])
        };
        let slack = d.entropy(&["A"], &["B", "C"])? - d.entropy(&["A"], &["B"])?;
        if (slack.abs() <= TOL) != cond_independent(&d, &["A"], &["C"], &["B"])? {
            mismatches += 1;
        }
        Ok(slack)
    })?;
    out.push(le("conditioning reduces entropy: worst H(A|B,C) - H(A|B)", v));
    out.push(Entry::none("conditioning leaves entropy unchanged iff A and C independent given B: mismatches", mismatches));

    let mut rng = rng_for(seed, 6);
    let mut chain = 0.0f64;
    let v = max_slack(trials, |_| {
        let d = random_dist(&mut rng, &["A", "B", "C"]);
        let joint = d.entropy(&["A", "B"], &["C"])?;
        chain = chain.max((joint - d.entropy(&["A"], &["C"])? - d.entropy(&["B"], &["C", "A"])?).abs());
        Ok(joint - d.entropy(&["A"], &["C"])? - d.entropy(&["B"], &["C"])?)
    })?;
    out.push(le("entropy is subadditive: worst excess", v));
    out.push(le("chain rule for entropy: worst deviation", chain));

    let mut rng = rng_for(seed, 7);
    let v = max_slack(trials, |_| {
        let d = random_dist(&mut rng, &["A", "B", "C", "D"]);
        let lhs = d.mutual_info(&["A", "B"], &["C"], &["D"])?;
        let rhs = d.mutual_info(&["A"], &["C"], &["D"])? + d.mutual_info(&["B"], &["C"], &["A", "D"])?;
        Ok((lhs - rhs).abs())
    })?;
    out.push(le("chain rule for mutual information: worst deviation", v));

    let mut rng = rng_for(seed, 8);
    let v = max_slack(trials, |_| {
        let d = random_dist(&mut rng, &["A", "B", "C"]);
        let f: Vec<u64> = (0..3).map(|_| rng.gen_range(0..2)).collect();
        let e = d.map(["A", "B", "C", "F"], |k| vec![k[0], k[1], k[2], f[k[0] as usize]])?;
        Ok(e.mutual_info(&["F"], &["B"], &["C"])? - e.mutual_info(&["A"], &["B"], &["C"])?)
    })?;
    out.push(le("data processing: worst I(f(A);B|C) - I(A;B|C)", v));

    let mut rng = rng_for(seed, 9);
    let mut premise = true;
    let v = max_slack(trials, |_| {
        let d = increase_premise(&mut rng);
        premise &= cond_independent(&d, &["A"], &["D"], &["C"])?;
        Ok(d.mutual_info(&["A"], &["B"], &["C"])? - d.mutual_info(&["A"], &["B"], &["C", "D"])?)
    })?;
    out.push(Entry::flag("constructed laws satisfy A independent of D given C", premise));
    out.push(le("A independent of D given C implies I(A;B|C) <= I(A;B|C,D): worst excess", v));

    let mut rng = rng_for(seed, 10);
    let mut premise = true;
    let v = max_slack(trials, |_| {
        let d = decrease_premise(&mut rng);
        premise &= cond_independent(&d, &["A"], &["D"], &["B", "C"])?;
        Ok(d.mutual_info(&["A"], &["B"], &["C", "D"])? - d.mutual_info(&["A"], &["B"], &["C"])?)
    })?;
    out.push(Entry::flag("constructed laws satisfy A independent of D given B, C", premise));
    out.push(le("A independent of D given B, C implies I(A;B|C,D) <= I(A;B|C): worst excess", v));

    let mut rng = rng_for(seed, 11);
    let v = max_slack(trials, |_| {
        let d = random_dist(&mut rng, &["A", "B", "C"]);
        let bc = d.marginal(&["B", "C"])?;
        let mut avg = 0.0;
        for (key, _) in bc.atoms() {
            let post = d.condition(&[("B", key[0]), ("C", key[1])])?;
            let prior = d.condition(&[("C", key[1])])?.marginal(&["A"])?;
            avg += to_f64(&bc.prob(key)) * post.kl(&prior)?;
        }
        Ok((avg - d.mutual_info(&["A"], &["B"], &["C"])?).abs())
    })?;
    out.push(le("I(A;B|C) = E KL(A|b,c || A|c): worst deviation", v));

    let mut rng = rng_for(seed, 12);
    let v = max_slack(trials, |_| {
        let (p, q, _) = pair_on_grid(&mut rng, &["X", "Y"]);
        let kl_nats = p.kl(&q)? * std::f64::consts::LN_2;
        Ok(to_f64(&p.tvd(&q)?) - (kl_nats / 2.0).sqrt())
    })?;
    out.push(le("Pinsker: worst TV - sqrt(KL/2)", v));

    let mut rng = rng_for(seed, 13);
    let v = max_exact(trials, |_| {
        let (p, q, domains) = pair_on_grid(&mut rng, &["X", "Y"]);
        let x: BTreeMap<Vec<u64>, u64> = grid(&domains).into_iter().map(|k| (k, rng.gen_range(0..10))).collect();
        let top = BigRational::from_integer((*x.values().max().expect("nonempty")).into());
        Ok(expectation(&p, &x) - expectation(&q, &x) - p.tvd(&q)? * top)
    })?;
    out.push(Entry::exact("E_p X <= E_q X + TV(p,q) max X: worst excess", &v, Relation::Le, &BigRational::zero()));

    let mut rng = rng_for(seed, 14);
    let v = max_exact(trials, |_| {
        let names = ["X1", "X2", "X3"];
        let (p, q, _) = pair_on_grid(&mut rng, &names);
        Ok(p.tvd(&q)? - tvd_chain_bound(&p, &q, &names)?)
    })?;
    out.push(Entry::exact("TV chain rule: worst joint TV minus the sum of conditional TVs", &v, Relation::Le, &BigRational::zero()));

    let mut rng = rng_for(seed, 15);
    let v = max_exact(trials, |_| {
        let domains = random_domains(&mut rng, 2);
        let p = dist_on(&["X", "Y"], &domains, &mut rng, true);
        let q = dist_on(&["X", "Y"], &domains, &mut rng, true);
        Ok(p.marginal(&["X"])?.tvd(&q.marginal(&["X"])?)? - p.tvd(&q)?)
    })?;
    out.push(Entry::exact("marginalising never increases TV: worst excess", &v, Relation::Le, &BigRational::zero()));

    let mut rng = rng_for(seed, 16);
    let bad = count(trials, |_| {
        let domains = random_domains(&mut rng, 2);
        let d = dist_on(&["A", "B"], &domains, &mut rng, true);
        let b = d.marginal(&["B"])?;
        for key in grid(&domains) {
            let pb = b.prob(&key[1..]);
            let rebuilt = if pb.is_zero() { pb } else { &pb * d.condition(&[("B", key[1])])?.prob(&key[..1]) };
            if rebuilt != d.prob(&key) {
                return Ok(false);
            }
        }
        Ok(true)
    })?;
    out.push(Entry::none("P(b) P(a|b) recomposes the joint law exactly: mismatches", bad));

    // Fixtures with violated premises: the inequalities must then fail.
    let copies = fair_bits(&["A", "B", "C", "D"], |a, _| vec![a, a, 0, a]);
    let premise = cond_independent(&copies, &["A"], &["D"], &["C"])?;
    let gap = copies.mutual_info(&["A"], &["B"], &["C"])? - copies.mutual_info(&["A"], &["B"], &["C", "D"])?;
    out.push(Entry::flag("A = B = D breaks the premise and the increase inequality", !premise && gap > TOL));

    let xor = fair_bits(&["A", "B", "C", "D"], |a, b| vec![a, b, 0, a ^ b]);
    let premise = cond_independent(&xor, &["A"], &["D"], &["B", "C"])?;
    let gap = xor.mutual_info(&["A"], &["B"], &["C", "D"])? - xor.mutual_info(&["A"], &["B"], &["C"])?;
    out.push(Entry::flag("D = A xor B breaks the premise and the decrease inequality", !premise && gap > TOL));

    let diff = xor.marginal(&["A", "D"])?.tvd(&xor.marginal(&["A"])?.product(&xor.marginal(&["D"])?)?)?;
    out.push(Entry::flag("D = A xor B is pairwise independent of A", diff.abs().is_zero()));

    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_passes() {
        let entries = infotheory_suite(30, 9).unwrap();
        for e in &entries {
            assert!(e.pass, "{e:?}");
        }
    }

    #[test]
    fn independence_test_is_exact() {
        let xor = fair_bits(&["A", "B", "D"], |a, b| vec![a, b, a ^ b]);
        assert!(cond_independent(&xor, &["A"], &["B"], &[]).unwrap());
        assert!(!cond_independent(&xor, &["A"], &["B"], &["D"]).unwrap());
        let mut rng = rng_for(1, 1);
        for _ in 0..20 {
            let d = ci_dist(&mut rng);
            assert!(cond_independent(&d, &["A"], &["B"], &["C"]).unwrap());
        }
    }

    #[test]
    fn suite_is_reproducible() {
        assert_eq!(infotheory_suite(5, 3).unwrap(), infotheory_suite(5, 3).unwrap());
    }
}
