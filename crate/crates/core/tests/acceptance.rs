//! Acceptance criteria. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails.

use std::time::{Duration, Instant};

use blackboard_core::distributions::{
    base_law, make_params, InstanceLaw, Params, SigmaMode, ToyOverrides, Variant,
};
use blackboard_core::embedding::{
    build_nu, check_product_property, check_sum_info, enumerate_law, expected_tvd_mu_nu, mi_first_round, mi_round_t,
    monte_carlo_tau, pinsker_budget, round_elim_audit, Budgets, JointLaw, INFO_TOLERANCE,
};
use blackboard_core::infotheory::to_f64;
use blackboard_core::oracles::{is_mis, max_matching_exhaustive, max_matching_size};
use blackboard_core::protocols::{
    best_zero_round_referee_apx, best_zero_round_referee_mis, cut_sides, cut_subgraph, luby_phases, stress_suite,
    BipartiteWrapper, FullBroadcast, Greedy, Luby,
};
use blackboard_core::verify::{infotheory_suite, structure_suite, VerifyConfig};
use blackboard_core::{run_protocol, Coins, Exec, Graph, Output, Protocol};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const MC_SEEDS: u64 = 10_000;

type Check = Result<String, String>;

fn frac(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn toy(variant: Variant) -> Params {
    match variant {
        Variant::Mis => make_params(1, 1, Some(&ToyOverrides { f: vec![1], p: vec![2] }), variant),
        Variant::Apx => make_params(2, 1, Some(&ToyOverrides { f: vec![1], p: vec![1] }), variant),
    }
    .expect("toy parameters")
}

/// Runs `f` on the exact law of every stress protocol for both variants.
fn for_each_law(mut f: impl FnMut(&JointLaw<'_>, &str) -> Result<(), String>) -> Result<usize, String> {
    let mut count = 0;
    for variant in [Variant::Mis, Variant::Apx] {
        let law = InstanceLaw::new(&toy(variant)).map_err(|e| e.to_string())?;
        for p in stress_suite(variant, law.n()) {
            let j = enumerate_law(law.clone(), p.as_ref(), SigmaMode::Blocks, Exec::default()).map_err(|e| e.to_string())?;
            f(&j, &format!("{variant:?} {}", p.name()))?;
            count += 1;
        }
    }
    Ok(count)
}

fn base_case_mis() -> Check {
    for k in 1..=4 {
        let (_, p) = best_zero_round_referee_mis(k).map_err(|e| e.to_string())?;
        ensure(p == frac(1, 1 << k), || format!("k={k}: optimum {p}, expected 1/{}", 1 << k))?;
    }
    Ok("best zero-round success is exactly 2^-k for k = 1..4".into())
}

fn base_case_matching() -> Check {
    let mut notes = Vec::new();
    for k in 1..=3usize {
        let (_, value) = best_zero_round_referee_apx(k).map_err(|e| e.to_string())?;
        let law = base_law(Variant::Apx, k);
        let total: u128 = law.iter().map(|(_, w)| w).sum();
        let mut mu = BigRational::zero();
        for (edges, w) in &law {
            let g = Graph::new(2 * k, edges.iter().copied()).map_err(|e| e.to_string())?;
            let size = max_matching_exhaustive(&g).map_err(|e| e.to_string())?;
            mu += BigRational::new(BigInt::from(size as u128 * w), BigInt::from(total));
        }
        ensure(value > BigRational::zero(), || format!("k={k}: zero optimum"))?;
        let ratio = &mu / &value;
        if value > frac(1, k as i64) {
            notes.push(format!("discrepancy at k={k}: optimum {value} exceeds 1/{k}"));
        }
        ensure(ratio >= BigRational::from_integer(BigInt::from(k)), || format!("k={k}: ratio {ratio} below {k}"))?;
        notes.push(format!("k={k}: E[valid]={value}, ratio {ratio}"));
    }
    Ok(notes.join("; "))
}

fn structure() -> Check {
    let config = VerifyConfig { seed: 7, trials: Some(200), ..VerifyConfig::default() };
    let entries = structure_suite(&config, Exec::default()).map_err(|e| e.to_string())?;
    for e in &entries {
        ensure(e.pass, || format!("{}: {} {:?} {}", e.name, e.value, e.relation, e.budget))?;
    }
    Ok(format!("{} checks on 200 MIS and 200 matching instances", entries.len()))
}

fn marginal_product() -> Check {
    let n = for_each_law(|j, name| {
        for i in 0..j.blocks() {
            ensure(j.block_marginal_matches(i).map_err(|e| e.to_string())?, || format!("{name}: block {i} marginal differs"))?;
            let tv = check_product_property(j, i).map_err(|e| e.to_string())?;
            ensure(tv.is_zero(), || format!("{name}: block {i} product TV {tv}"))?;
        }
        Ok(())
    })?;
    Ok(format!("block marginals exact and product TV = 0 for {n} protocol laws"))
}

fn leakage() -> Check {
    let mut worst = f64::NEG_INFINITY;
    let n = for_each_law(|j, name| {
        let b = Budgets::new(j);
        let p = j.blocks() as f64;
        let mut check = |what: String, value: f64, budget: f64| {
            worst = worst.max(value - budget);
            ensure(value <= budget + INFO_TOLERANCE, || format!("{name}: {what} {value} exceeds {budget}"))
        };
        let first = (0..j.blocks()).map(|i| mi_first_round(j, i)).sum::<Result<f64, _>>().map_err(|e| e.to_string())? / p;
        check("first-round leakage".into(), first, b.first_round())?;
        for t in 1..=j.rounds() {
            let s = check_sum_info(j, t).map_err(|e| e.to_string())?;
            check(format!("round {t} joint leakage"), s.lhs, s.rhs)?;
            let terms = (0..j.blocks()).map(|i| mi_round_t(j, i, t)).collect::<Result<Vec<_>, _>>().map_err(|e| e.to_string())?;
            let tp = terms.iter().map(|x| x.term_p).sum::<f64>() / p;
            let tf = terms.iter().map(|x| x.term_f).sum::<f64>() / p;
            check(format!("round {t} principal leakage"), tp, b.term_p(t))?;
            check(format!("round {t} fooling leakage"), tf, b.term_f(t))?;
        }
        Ok(())
    })?;
    Ok(format!("{n} protocol laws within budget; largest value minus budget {worst:.3e}"))
}

fn embedding() -> Check {
    let mut mc_checked = 0;
    let n = for_each_law(|j, name| {
        let audit = round_elim_audit(j, Exec::default()).map_err(|e| e.to_string())?;
        for c in &audit.checks {
            ensure(c.pass, || format!("{name}: {} fails: {} vs {}", c.name, c.lhs, c.rhs))?;
        }
        let budget = pinsker_budget(j).map_err(|e| e.to_string())?;
        let tv = to_f64(&audit.avg_tvd);
        ensure(tv <= budget + INFO_TOLERANCE, || format!("{name}: TV {tv} exceeds Pinsker budget {budget}"))?;
        let silent = j.rounds() == 0 || j.protocol().name().starts_with("silent");
        if silent {
            ensure(audit.avg_tvd.is_zero(), || format!("{name}: silent protocol has TV {}", audit.avg_tvd))?;
        }
        let i = audit.best_block;
        let nu = build_nu(j, i).map_err(|e| e.to_string())?;
        ensure(expected_tvd_mu_nu(j, &nu) == audit.blocks[i].tvd, || format!("{name}: TV recomputation differs"))?;
        let exact = to_f64(&nu.expected_score());
        let mc = monte_carlo_tau(j, i, MC_SEEDS, 0xACCE, Exec::default()).map_err(|e| e.to_string())?;
        let dist = (mc.mean - exact).abs();
        ensure(dist <= 3.0 * mc.std_error() + 1e-12, || {
            format!("{name}: Monte Carlo {} vs exact {exact} (3 sigma = {})", mc.mean, 3.0 * mc.std_error())
        })?;
        mc_checked += 1;
        Ok(())
    })?;
    Ok(format!("{n} protocol laws: audit, Pinsker budget and {mc_checked} Monte Carlo comparisons over {MC_SEEDS} seeds"))
}

fn luby() -> Check {
    let mut runs = 0;
    let mut quiet = 0;
    let mut max_bits = 0;
    for n in [8usize, 16, 32, 64] {
        let mut rng = ChaCha8Rng::seed_from_u64(n as u64);
        let protocol = Luby::for_size(n);
        let limit = 8 * (n as f64).log2().ceil() as usize;
        for g in 0..100 {
            let p = [0.1, 0.3, 0.5, 0.8][g % 4];
            let graph = Graph::gnp(n, p, &mut rng);
            let ex = run_protocol(&graph, None, &protocol, rng.gen()).map_err(|e| e.to_string())?;
            let valid = matches!(&ex.output, Output::Mis(s) if is_mis(&graph, s));
            ensure(valid, || format!("n={n} graph {g}: output {:?} is not an MIS", ex.output))?;
            max_bits = max_bits.max(ex.transcript.max_bits());
            runs += 1;
            if luby_phases(&ex.transcript).is_some_and(|ph| ph <= limit) {
                quiet += 1;
            }
        }
    }
    ensure(max_bits <= 2, || format!("a vertex sent {max_bits} bits"))?;
    ensure(quiet * 100 >= runs * 99, || format!("only {quiet}/{runs} runs quiesced in time"))?;
    Ok(format!("{runs}/{runs} valid, max {max_bits} bits, {quiet}/{runs} quiesced within 8 log2 n phases"))
}

fn bipartite() -> Check {
    const SAMPLES: u64 = 2000;
    let mut rng = ChaCha8Rng::seed_from_u64(0xB1);
    let mut worst = f64::INFINITY;
    for g in 0..20 {
        let n = rng.gen_range(4..=12);
        let graph = Graph::gnp(n, rng.gen_range(0.2..0.9), &mut rng);
        let mu = max_matching_size(&graph) as f64;
        let sizes: Vec<f64> = (0..SAMPLES)
            .map(|_| {
                let coins = Coins::new(rng.gen());
                max_matching_size(&cut_subgraph(&graph, &cut_sides(&coins, n))) as f64
            })
            .collect();
        let mean = sizes.iter().sum::<f64>() / SAMPLES as f64;
        let var = sizes.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (SAMPLES - 1) as f64;
        let sigma = (var / SAMPLES as f64).sqrt();
        ensure(mean >= mu / 2.0 - 3.0 * sigma, || format!("graph {g}: mean {mean} below {mu}/2 - 3 sigma"))?;
        worst = worst.min(mean - mu / 2.0);

        let inners: Vec<Box<dyn Protocol>> = vec![Box::new(Greedy { bandwidth: 4 }), Box::new(FullBroadcast { variant: Variant::Apx, bandwidth: n })];
        for inner in inners {
            let (rounds, bandwidth) = (inner.rounds(), inner.bandwidth());
            let plain = run_protocol(&graph, None, inner.as_ref(), g).map_err(|e| e.to_string())?;
            let wrapped = BipartiteWrapper::new(inner);
            ensure(wrapped.rounds() == rounds && wrapped.bandwidth() == bandwidth, || "wrapper changed rounds or bandwidth".into())?;
            let ex = run_protocol(&graph, None, &wrapped, g).map_err(|e| e.to_string())?;
            ensure(ex.transcript.round_count() == plain.transcript.round_count(), || "wrapper changed the round count".into())?;
            ensure(ex.transcript.max_bits() <= bandwidth, || "wrapper exceeded the bandwidth".into())?;
        }
    }
    Ok(format!("20 graphs x {SAMPLES} cuts; smallest mean mu(G') - mu(G)/2 = {worst:.3}"))
}

fn infotheory() -> Check {
    let entries = infotheory_suite(100, 0x1F0).map_err(|e| e.to_string())?;
    for e in &entries {
        ensure(e.pass, || format!("{}: {} vs {}", e.name, e.value, e.budget))?;
    }
    let fixtures = entries.iter().filter(|e| e.name.contains("breaks the premise")).count();
    ensure(fixtures >= 2, || "premise-violating fixtures missing".into())?;
    Ok(format!("{} properties on 100 random laws each, {fixtures} violated-premise fixtures detected", entries.len()))
}

type Criterion = (&'static str, fn() -> Check, Option<Duration>);

fn main() {
    let criteria: [Criterion; 9] = [
        ("base case MIS", base_case_mis, Some(Duration::from_secs(5))),
        ("base case matching", base_case_matching, Some(Duration::from_secs(30))),
        ("structure suite", structure, Some(Duration::from_secs(60))),
        ("marginal and product laws", marginal_product, Some(Duration::from_secs(180))),
        ("leakage inequalities", leakage, Some(Duration::from_secs(300))),
        ("embedding faithfulness", embedding, Some(Duration::from_secs(300))),
        ("Luby upper bound", luby, None),
        ("bipartite reduction", bipartite, None),
        ("information-theory properties", infotheory, None),
    ];
    let mut failed = 0;
    for (name, run, limit) in criteria {
        let start = Instant::now();
        let result = run();
        let elapsed = start.elapsed();
        let late = limit.is_some_and(|l| elapsed > l);
        let limit_text = limit.map_or(String::new(), |l| format!(" (limit {}s)", l.as_secs()));
        match (&result, late) {
            (Ok(msg), false) => println!("PASS {name} [{:.2}s{limit_text}]: {msg}", elapsed.as_secs_f64()),
            (Ok(msg), true) => {
                failed += 1;
                println!("FAIL {name} [{:.2}s{limit_text}]: too slow; {msg}", elapsed.as_secs_f64());
            }
            (Err(msg), _) => {
                failed += 1;
                println!("FAIL {name} [{:.2}s{limit_text}]: {msg}", elapsed.as_secs_f64());
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
    println!("all 9 acceptance criteria passed");
}
