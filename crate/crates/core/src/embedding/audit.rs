use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use serde::Serialize;

use super::joint::JointLaw;
use super::leakage::{mi_first_round, mi_round_t, INFO_TOLERANCE};
use super::nu::{build_nu, expected_tvd_mu_nu};
use super::EmbeddingError;
use crate::distributions::Variant;
use crate::infotheory::to_f64;
use crate::Exec;

/// Per-block quantities of the round-elimination argument.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockAudit {
    pub i: usize,
    /// E_μ of τ_i's score: restriction of π's output to block i, scored on B_i.
    pub success_mu: BigRational,
    /// E_ν of τ_i's score.
    pub success_nu: BigRational,
    /// E_{B_i} TV(μ_i(M, Σ | B_i), ν_i(M, Σ | B_i)).
    pub tvd: BigRational,
    /// Mass of ν_i sent to ⊥.
    pub bottom: BigRational,
    /// MIS: Pr[π's output is a valid MIS and its restriction solves B_i].
    pub solved_by_pi: BigRational,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditCheck {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuditReport {
    pub variant: Variant,
    /// MIS: success probability of π. Matching: E[valid output edges].
    pub delta: BigRational,
    pub blocks: Vec<BlockAudit>,
    pub avg_success_mu: BigRational,
    pub avg_success_nu: BigRational,
    pub avg_tvd: BigRational,
    /// Block maximising τ_i's success under ν_i.
    pub best_block: usize,
    pub checks: Vec<AuditCheck>,
}

impl AuditReport {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

fn frac(n: u128, d: u128) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn check(name: &str, lhs: &BigRational, rhs: &BigRational) -> AuditCheck {
    AuditCheck { name: name.into(), lhs: to_f64(lhs), rhs: to_f64(rhs), pass: lhs >= rhs }
}

fn mean(xs: impl Iterator<Item = BigRational>, count: usize) -> BigRational {
    xs.sum::<BigRational>() / BigRational::from_integer(count.into())
}

/// Exact round-elimination accounting for one protocol.
///
/// MIS: E_i succ_ν(τ_i) ≥ E_i succ_μ(τ_i) − E_i TV, E_i Pr[π solves block i]
/// ≥ δ/2, and the combination E_i succ_ν(τ_i) ≥ δ/2 − E_i TV.
/// Matching: per-atom O^π ≤ |F| + Σ_i O^π_i, per-atom μ(G) ≥ Σ_i μ(B_i), and
/// per block E_ν O^τ_i ≥ E_μ O^τ_i − (n_{r-1}/2)·TV.
pub fn round_elim_audit(j: &JointLaw<'_>, exec: Exec) -> Result<AuditReport, EmbeddingError> {
    let p = j.blocks();
    let per_block = exec.map((0..p).collect(), |i| -> Result<BlockAudit, EmbeddingError> {
        let nu = build_nu(j, i)?;
        Ok(BlockAudit {
            i,
            success_mu: j.expect_rows(|e| e.block_score[i] as u128),
            success_nu: nu.expected_score(),
            tvd: expected_tvd_mu_nu(j, &nu),
            bottom: nu.bottom_mass(),
            solved_by_pi: j.expect_rows(|e| (e.valid && e.block_score[i] > 0) as u128),
        })
    });
    let blocks: Vec<BlockAudit> = per_block.into_iter().collect::<Result<_, _>>()?;
    let delta = j.expect_rows(|e| e.score as u128);
    let avg_success_mu = mean(blocks.iter().map(|b| b.success_mu.clone()), p);
    let avg_success_nu = mean(blocks.iter().map(|b| b.success_nu.clone()), p);
    let avg_tvd = mean(blocks.iter().map(|b| b.tvd.clone()), p);
    let best_block = blocks
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.success_nu.cmp(&b.1.success_nu).then(b.0.cmp(&a.0)))
        .map_or(0, |(i, _)| i);
    let mut checks = Vec::new();
    match j.variant() {
        Variant::Mis => {
            let half = &delta / BigRational::from_integer(2.into());
            let solved = mean(blocks.iter().map(|b| b.solved_by_pi.clone()), p);
            checks.push(check("simulation loses at most the TV distance", &avg_success_nu, &(&avg_success_mu - &avg_tvd)));
            checks.push(check("restriction success dominates solved blocks", &avg_success_mu, &solved));
            checks.push(check("a valid MIS solves half the blocks on average", &solved, &half));
            checks.push(check("round elimination", &avg_success_nu, &(&half - &avg_tvd)));
        }
        Variant::Apx => {
            let fooling = j.fooling_all().len() as u32;
            let split = j.evals().iter().all(|e| e.score <= fooling + e.block_score.iter().sum::<u32>());
            let opt_split = j.evals().iter().all(|e| e.opt >= e.block_opt.iter().sum::<u32>());
            let bool_check = |name: &str, pass: bool| AuditCheck { name: name.into(), lhs: pass as u8 as f64, rhs: 1.0, pass };
            checks.push(bool_check("output edges split into blocks plus fooling edges", split));
            checks.push(bool_check("maximum matching dominates the block optima", opt_split));
            let half_block = frac(j.params().n(0) as u128, 2);
            for b in &blocks {
                let rhs = &b.success_mu - &half_block * &b.tvd;
                checks.push(check(&format!("block {} simulation loses at most n/2 times TV", b.i), &b.success_nu, &rhs));
            }
        }
    }
    Ok(AuditReport { variant: j.variant(), delta, blocks, avg_success_mu, avg_success_nu, avg_tvd, best_block, checks })
}

/// The sum-of-square-roots bound on E_i TV(μ_i, ν_i):
/// sqrt(E_i I_1) + Σ_t [sqrt(E_i term_P(t)) + sqrt(E_i term_F(t))].
///
/// Each term bounds one factor of the hybrid argument through Pinsker's
/// inequality; TV ≤ sqrt(KL_nats / 2) ≤ sqrt(KL_bits).
pub fn pinsker_budget(j: &JointLaw<'_>) -> Result<f64, EmbeddingError> {
    let p = j.blocks() as f64;
    let avg = |f: &dyn Fn(usize) -> Result<f64, EmbeddingError>| -> Result<f64, EmbeddingError> {
        Ok((0..j.blocks()).map(f).sum::<Result<f64, _>>()? / p)
    };
    let mut budget = avg(&|i| mi_first_round(j, i))?.sqrt();
    for t in 1..=j.rounds() {
        budget += avg(&|i| Ok(mi_round_t(j, i, t)?.term_p))?.sqrt();
        budget += avg(&|i| Ok(mi_round_t(j, i, t)?.term_f))?.sqrt();
    }
    Ok(budget)
}

/// E_i TV ≤ Pinsker budget, with the two sides.
pub fn check_pinsker(j: &JointLaw<'_>, avg_tvd: &BigRational) -> Result<AuditCheck, EmbeddingError> {
    let budget = pinsker_budget(j)?;
    let tv = to_f64(avg_tvd);
    Ok(AuditCheck { name: "TV within the Pinsker budget".into(), lhs: tv, rhs: budget, pass: tv <= budget + INFO_TOLERANCE || avg_tvd.is_zero() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::{make_params, SigmaMode, ToyOverrides};
    use crate::embedding::enumerate_joint;
    use crate::protocols::{FullBroadcast, Silent};

    #[test]
    fn full_broadcast_solves_everything() {
        let params = make_params(1, 1, Some(&ToyOverrides { f: vec![1], p: vec![2] }), Variant::Mis).unwrap();
        let p = FullBroadcast { variant: Variant::Mis, bandwidth: 10 };
        let j = enumerate_joint(&params, &p, SigmaMode::Blocks).unwrap();
        let report = round_elim_audit(&j, Exec::default()).unwrap();
        assert_eq!(report.delta, BigRational::from_integer(1.into()));
        assert!(report.pass(), "{:?}", report.checks);
    }

    #[test]
    fn silent_matching_audit() {
        let params = make_params(2, 1, Some(&ToyOverrides { f: vec![1], p: vec![1] }), Variant::Apx).unwrap();
        let p = Silent { rounds: 1, variant: Variant::Apx };
        let j = enumerate_joint(&params, &p, SigmaMode::Blocks).unwrap();
        let report = round_elim_audit(&j, Exec::default()).unwrap();
        assert!(report.avg_tvd.is_zero());
        assert!(report.pass(), "{:?}", report.checks);
    }
}
