use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use super::{Entry, Relation, VerifyConfig};
use crate::distributions::{
    base_law, make_params, matching_size_bound, sample_apx_hard, sample_mis_hard, verify_solve_half, DistError,
    HalfSolved, InstanceLaw, LawError, Params, ParamsError, ToyOverrides, Variant,
};
use crate::embedding::{
    check_pinsker, check_product_property, check_sum_info, enumerate_law, mi_first_round, mi_round_t, monte_carlo_tau,
    round_elim_audit, AuditCheck, Budgets, EmbeddingError, JointLaw, INFO_TOLERANCE,
};
use crate::infotheory::{to_f64, InfoError};
use crate::oracles::{enumerate_all_mis, max_matching_exhaustive, max_matching_size, OracleError};
use crate::protocols::{best_zero_round_referee_apx, best_zero_round_referee_mis, stress_suite, ProtocolError};
use crate::{Coins, Exec, Graph, Protocol};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SuiteError {
    #[error(transparent)]
    Params(#[from] ParamsError),
    #[error(transparent)]
    Dist(#[from] DistError),
    #[error(transparent)]
    Law(#[from] LawError),
    #[error(transparent)]
    Embedding(#[from] EmbeddingError),
    #[error(transparent)]
    Info(#[from] InfoError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
}

fn frac(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn variant_name(v: Variant) -> &'static str {
    match v {
        Variant::Mis => "mis",
        Variant::Apx => "apx",
    }
}

/// Exhaustive zero-round optima: 2^-k for MIS and 1/k valid edges (ratio k)
/// for matching, k = 1..=4.
pub fn base_cases_suite() -> Result<Vec<Entry>, SuiteError> {
    let mut out = Vec::new();
    for k in 1..=4usize {
        let (_, p) = best_zero_round_referee_mis(k)?;
        out.push(Entry::exact(format!("mis k={k}: best zero-round success probability"), &p, Relation::Eq, &frac(1, 1 << k)));
    }
    for k in 1..=4usize {
        let (_, value) = best_zero_round_referee_apx(k)?;
        let law = base_law(Variant::Apx, k);
        let total: u128 = law.iter().map(|(_, w)| w).sum();
        let mut mu = BigRational::zero();
        for (edges, w) in &law {
            let g = Graph::new(2 * k, edges.iter().copied()).expect("valid base instance");
            mu += BigRational::new(BigInt::from(max_matching_exhaustive(&g)? as u128 * w), BigInt::from(total));
        }
        let bound = frac(1, k as i64);
        out.push(Entry::exact(format!("apx k={k}: best zero-round expected valid edges (above 1/k is a discrepancy)"), &value, Relation::Le, &bound));
        let ratio = if value.is_zero() { BigRational::from_integer((k as i64 + 1).into()) } else { &mu / &value };
        out.push(Entry::exact(format!("apx k={k}: expected maximum matching over best zero-round value"), &ratio, Relation::Ge, &BigRational::from_integer((k as i64).into())));
    }
    Ok(out)
}

fn default_k(v: Variant) -> u64 {
    match v {
        Variant::Mis => 1,
        Variant::Apx => 2,
    }
}

fn toy_params(config: &VerifyConfig, variant: Variant, toy: ToyOverrides) -> Result<Params, SuiteError> {
    let k = config.k.unwrap_or(default_k(variant));
    let toy = config.toy.clone().unwrap_or(toy);
    Ok(make_params(k, 1, Some(&toy), variant)?)
}

fn variants(config: &VerifyConfig) -> Vec<Variant> {
    config.variant.map_or(vec![Variant::Mis, Variant::Apx], |v| vec![v])
}

/// Sampled hard instances obey their structural guarantees: every MIS of a
/// matching-free toy instance solves at least one half, and every matching
/// instance has a maximum matching at least the recursive size bound.
pub fn structure_suite(config: &VerifyConfig, exec: Exec) -> Result<Vec<Entry>, SuiteError> {
    let trials = config.trials.unwrap_or(200);
    let coins = Coins::new(config.seed);
    let mut out = Vec::new();
    for variant in variants(config) {
        match variant {
            Variant::Mis => {
                let params = toy_params(config, variant, ToyOverrides { f: vec![1], p: vec![2] })?;
                let runs = exec.map_range(0..trials, |s| -> Result<(usize, usize, bool), SuiteError> {
                    let inst = sample_mis_hard(&params, coins.public_word(0, s), config.sigma_mode)?;
                    let all = enumerate_all_mis(&inst.graph)?;
                    let neither = all.iter().filter(|m| verify_solve_half(&inst, m) == HalfSolved::Neither).count();
                    Ok((neither, all.len(), inst.graph.n() as u64 == params.n_r()))
                });
                let runs: Vec<_> = runs.into_iter().collect::<Result<_, _>>()?;
                out.push(Entry::none("mis: maximal independent sets that solve neither half", runs.iter().map(|r| r.0).sum()));
                let checked = runs.iter().map(|r| r.1).sum::<usize>() as f64;
                out.push(Entry::float("mis: maximal independent sets checked", checked, Relation::Ge, trials as f64, 0.0));
                out.push(Entry::flag("mis: every instance has n_r vertices", runs.iter().all(|r| r.2)));
            }
            Variant::Apx => {
                let params = toy_params(config, variant, ToyOverrides { f: vec![1], p: vec![2] })?;
                let bound = matching_size_bound(&params);
                let runs = exec.map_range(0..trials, |s| -> Result<(usize, bool), SuiteError> {
                    let inst = sample_apx_hard(&params, coins.public_word(1, s), config.sigma_mode)?;
                    let mu = max_matching_size(&inst.graph);
                    Ok((mu, mu == max_matching_exhaustive(&inst.graph)?))
                });
                let runs: Vec<_> = runs.into_iter().collect::<Result<_, _>>()?;
                let min = runs.iter().map(|r| r.0).min().unwrap_or(0);
                out.push(Entry::exact(
                    "apx: smallest maximum matching against the recursive size bound",
                    &BigRational::from_integer(min.into()),
                    Relation::Ge,
                    &bound,
                ));
                out.push(Entry::none("apx: blossom and exhaustive matching sizes disagree", runs.iter().filter(|r| !r.1).count()));
            }
        }
    }
    Ok(out)
}

fn audit_entry(prefix: &str, c: &AuditCheck) -> Entry {
    Entry { pass: c.pass, ..Entry::float(format!("{prefix}: {}", c.name), c.lhs, Relation::Ge, c.rhs, 0.0) }
}

fn mean_over_blocks(j: &JointLaw<'_>, f: impl Fn(usize) -> Result<f64, EmbeddingError>) -> Result<f64, EmbeddingError> {
    Ok((0..j.blocks()).map(f).sum::<Result<f64, _>>()? / j.blocks() as f64)
}

/// Exact checks of one protocol's transcript law on the toy instance law.
fn embedding_entries(
    j: &JointLaw<'_>,
    prefix: &str,
    trials: u64,
    seed: u64,
    exec: Exec,
) -> Result<Vec<Entry>, SuiteError> {
    let mut out = Vec::new();
    out.push(Entry::flag(format!("{prefix}: transcripts are reproducible"), j.check_determinism(16, seed).is_ok()));
    let marginals = (0..j.blocks()).map(|i| j.block_marginal_matches(i)).collect::<Result<Vec<_>, _>>()?;
    out.push(Entry::flag(format!("{prefix}: every block is distributed as the base instance"), marginals.iter().all(|&m| m)));
    out.push(Entry::flag(format!("{prefix}: the permutation is uniform"), j.sigma_marginal_uniform()));

    let mut product = BigRational::zero();
    for i in 0..j.blocks() {
        product = product.max(check_product_property(j, i)?);
    }
    out.push(Entry::exact(format!("{prefix}: first-round product property, largest TV"), &product, Relation::Eq, &BigRational::zero()));

    let budgets = Budgets::new(j);
    let first = mean_over_blocks(j, |i| mi_first_round(j, i))?;
    out.push(Entry::float(format!("{prefix}: first-round leakage"), first, Relation::Le, budgets.first_round(), INFO_TOLERANCE));
    for t in 1..=j.rounds() {
        let sum = check_sum_info(j, t)?;
        out.push(Entry::float(format!("{prefix}: round {t} joint leakage against the per-block sum"), sum.lhs, Relation::Le, sum.rhs, INFO_TOLERANCE));
        let tp = mean_over_blocks(j, |i| Ok(mi_round_t(j, i, t)?.term_p))?;
        let tf = mean_over_blocks(j, |i| Ok(mi_round_t(j, i, t)?.term_f))?;
        out.push(Entry::float(format!("{prefix}: round {t} other principal blocks' leakage"), tp, Relation::Le, budgets.term_p(t), INFO_TOLERANCE));
        out.push(Entry::float(format!("{prefix}: round {t} fooling blocks' leakage"), tf, Relation::Le, budgets.term_f(t), INFO_TOLERANCE));
    }

    let audit = round_elim_audit(j, exec)?;
    out.extend(audit.checks.iter().map(|c| audit_entry(prefix, c)));
    let pinsker = check_pinsker(j, &audit.avg_tvd)?;
    out.push(Entry {
        pass: pinsker.pass,
        exact: Some(crate::infotheory::fraction_string(&audit.avg_tvd)),
        ..Entry::float(format!("{prefix}: {}", pinsker.name), pinsker.lhs, Relation::Le, pinsker.rhs, INFO_TOLERANCE)
    });
    let silent = j.rounds() == 0 || j.protocol().name().starts_with("silent");
    if silent {
        out.push(Entry::exact(format!("{prefix}: simulation TV of a silent protocol"), &audit.avg_tvd, Relation::Eq, &BigRational::zero()));
    }

    let block = audit.best_block;
    let mc = monte_carlo_tau(j, block, trials, seed, exec)?;
    let exact = to_f64(&audit.blocks[block].success_nu);
    out.push(Entry::float(
        format!("{prefix}: block {block} Monte Carlo success over {trials} runs, distance to the exact value (budget 3 sigma)"),
        (mc.mean - exact).abs(),
        Relation::Le,
        3.0 * mc.std_error(),
        1e-12,
    ));
    Ok(out)
}

/// The round-elimination checks for the stress protocols (or the configured
/// one) on each variant's toy instance law.
pub fn embedding_suite(config: &VerifyConfig, exec: Exec) -> Result<Vec<Entry>, SuiteError> {
    let trials = config.trials.unwrap_or(10_000);
    let mut out = Vec::new();
    for variant in variants(config) {
        let default_toy = match variant {
            Variant::Mis => ToyOverrides { f: vec![1], p: vec![2] },
            Variant::Apx => ToyOverrides { f: vec![1], p: vec![1] },
        };
        let params = toy_params(config, variant, default_toy)?;
        let law = InstanceLaw::new(&params)?;
        let n = law.n();
        let protocols: Vec<Box<dyn Protocol>> = match &config.protocol {
            Some(spec) => vec![spec.build(variant, n)?],
            None => stress_suite(variant, n),
        };
        for p in &protocols {
            let j = enumerate_law(law.clone(), p.as_ref(), config.sigma_mode, exec)?;
            let prefix = format!("{} {}", variant_name(variant), p.name());
            out.extend(embedding_entries(&j, &prefix, trials, config.seed, exec)?);
        }
    }
    Ok(out)
}
