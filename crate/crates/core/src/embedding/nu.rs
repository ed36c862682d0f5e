use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::joint::{mask_edges, message_from_id, message_id, CondTable, JointLaw, LAW_SEED};
use super::EmbeddingError;
use crate::distributions::Variant;
use crate::model::{MessageContext, Output, Transcript, VertexView};
use crate::oracles::is_mis;
use crate::{Bits, BlockLayout, Coins, Graph};

/// One sampling step of the simulation: draw `target` columns from a
/// conditional of μ given `cond` columns.
struct Draw {
    table: CondTable,
    target: Vec<usize>,
    cond: Vec<usize>,
}

enum Step {
    Draw(Draw),
    /// Block i computes its real round-t messages from G_i.
    BlockMessages(usize),
}

/// Everything the simulation τ_i needs: the μ-conditionals it samples from
/// and the public layouts.
pub(crate) struct Simulation<'a, 'p> {
    j: &'a JointLaw<'p>,
    i: usize,
    steps: Vec<Step>,
    /// Σ given B_i, for drawing the public permutation once the input is fixed.
    sigma_given_b: CondTable,
    /// Marginal law of B_i.
    b_law: Vec<(Vec<u64>, u128)>,
    layouts: Vec<BlockLayout>,
    block: Vec<usize>,
}

type Vals = Vec<Option<u64>>;

impl<'a, 'p> Simulation<'a, 'p> {
    pub fn new(j: &'a JointLaw<'p>, i: usize) -> Result<Self, EmbeddingError> {
        j.check_block(i)?;
        let s = j.s_cols();
        let block = j.principal_of(i);
        let len = block.len();
        let all = j.all_vertices();
        let draw = |target: Vec<usize>, cond: Vec<usize>| Step::Draw(Draw { table: j.cond_table(&target, &cond), target, cond });
        let mut steps = vec![draw(vec![j.b_col(i), s[0]], vec![])];
        let m1 = j.msg_cols(1, &block);
        if j.rounds() >= 1 {
            steps.push(draw(m1.clone(), s.clone()));
        }
        for p in 0..len {
            steps.push(draw(vec![j.t_col(i, p)], [vec![j.bu_col(i, p)], m1.clone(), s.clone()].concat()));
        }
        for t in 1..=j.rounds() {
            if t >= 2 {
                steps.push(Step::BlockMessages(t));
            }
            let before = j.msg_before(t, &all);
            let pi = j.msg_cols(t, &block);
            steps.push(draw(j.msg_cols(t, &j.principal_except(i)), [before.clone(), pi, s.clone()].concat()));
            let p_all = j.msg_cols(t, &j.principal_all());
            steps.push(draw(j.msg_cols(t, &j.fooling_all()), [before, p_all, s.clone()].concat()));
        }
        let layouts = j
            .sigmas()
            .iter()
            .map(|sg| j.layout().with_sigma(sg.clone()))
            .collect::<Result<_, _>>()?;
        let b_law = j.marginal(&[j.b_col(i)]).into_iter().collect();
        Ok(Simulation { j, i, steps, sigma_given_b: j.cond_table(&s, &[j.b_col(i)]), b_law, layouts, block })
    }

    fn set_b(&self, vals: &mut Vals, b: u64) {
        let m = self.block.len();
        vals[self.j.b_col(self.i)] = Some(b);
        let mut bu = vec![0u64; m];
        for (a, c) in mask_edges(b, m) {
            bu[a] |= 1 << c;
            bu[c] |= 1 << a;
        }
        for (p, x) in bu.into_iter().enumerate() {
            vals[self.j.bu_col(self.i, p)] = Some(x);
        }
    }

    fn sigma(&self, vals: &Vals) -> usize {
        vals[0].expect("Σ drawn first") as usize
    }

    fn board(&self, vals: &Vals, rounds: usize, sigma: &[usize]) -> Vec<Vec<Bits>> {
        let n = sigma.len();
        (1..=rounds)
            .map(|t| {
                let mut row = vec![Bits::empty(); n];
                for x in 0..n {
                    let c = self.j.msg_cols(t, &[x])[0];
                    row[sigma[x]] = message_from_id(vals[c].expect("earlier rounds are complete"));
                }
                row
            })
            .collect()
    }

    /// Real round-t messages of block i, computed from each vertex's view.
    fn block_messages(&self, vals: &mut Vals, t: usize) {
        let s = self.sigma(vals);
        let sigma = &self.j.sigmas()[s];
        let n = sigma.len();
        let board = self.board(vals, t - 1, sigma);
        let coins = Coins::new(LAW_SEED);
        let fooling = self.j.fooling_all();
        for (p, &u) in self.block.iter().enumerate() {
            let bu = vals[self.j.bu_col(self.i, p)].expect("B_i drawn");
            let tu = vals[self.j.t_col(self.i, p)].expect("T_i drawn");
            let mut neighbors: Vec<usize> = (0..self.block.len())
                .filter(|q| bu >> q & 1 == 1)
                .map(|q| sigma[self.block[q]])
                .chain(fooling.iter().enumerate().filter(|(f, _)| tu >> f & 1 == 1).map(|(_, &x)| sigma[x]))
                .collect();
            neighbors.sort_unstable();
            let view = VertexView { id: sigma[u], n, neighbors };
            let ctx = MessageContext { view: &view, round: t, board: &board, coins: &coins, layout: Some(&self.layouts[s]) };
            let m = self.j.protocol().message(&ctx);
            vals[self.j.msg_cols(t, &[u])[0]] = Some(message_id(&m));
        }
    }

    /// Runs π's referee on the assembled blackboard and scores its output
    /// restricted to block i against the input B_i.
    fn finish(&self, vals: &Vals) -> (Output, u32) {
        let s = self.sigma(vals);
        let sigma = &self.j.sigmas()[s];
        let board = self.board(vals, self.j.rounds(), sigma);
        let transcript = Transcript::new(sigma.len(), board);
        let output = self.j.protocol().referee(&transcript, &Coins::new(LAW_SEED));
        let local = output.relabel(|v| self.block.iter().position(|&x| sigma[x] == v));
        let m = self.block.len();
        let graph = Graph::new(m, mask_edges(vals[self.j.b_col(self.i)].expect("B_i drawn"), m)).expect("valid");
        let score = score_local(self.j.variant(), &graph, &local);
        (local, score)
    }

    fn cond_key(vals: &Vals, cols: &[usize]) -> Option<Vec<u64>> {
        cols.iter().map(|&c| vals[c]).collect()
    }

    fn expand(&self, step: usize, vals: &mut Vals, prob: BigRational, out: &mut Vec<NuAtom>) {
        if step == self.steps.len() {
            let (_, score) = self.finish(vals);
            out.push(self.atom(vals, prob, false, score));
            return;
        }
        match &self.steps[step] {
            Step::BlockMessages(t) => {
                let mut v = vals.clone();
                self.block_messages(&mut v, *t);
                self.expand(step + 1, &mut v, prob, out);
            }
            Step::Draw(d) => {
                let key = Self::cond_key(vals, &d.cond).expect("conditioning columns are set");
                let Some((total, options)) = d.table.get(&key) else {
                    out.push(self.atom(vals, prob, true, 0));
                    return;
                };
                for (target, w) in options {
                    let mut v = vals.clone();
                    for (&c, &x) in d.target.iter().zip(target) {
                        v[c] = Some(x);
                    }
                    if step == 0 {
                        self.set_b(&mut v, target[0]);
                    }
                    let p = &prob * BigRational::new(BigInt::from(*w), BigInt::from(total));
                    self.expand(step + 1, &mut v, p, out);
                }
            }
        }
    }

    fn atom(&self, vals: &Vals, prob: BigRational, bottom: bool, score: u32) -> NuAtom {
        let b = vals[self.j.b_col(self.i)].expect("B_i drawn");
        let key = (!bottom).then(|| {
            let mut k = vec![vals[0].expect("Σ drawn")];
            k.extend(self.j.all_msgs().iter().map(|&c| vals[c].expect("complete")));
            k
        });
        let t = self.j.t_cols(self.i).iter().map(|&c| vals[c].unwrap_or(u64::MAX)).collect();
        NuAtom { b, t, key, prob, score }
    }

    /// Samples one run of τ_i on input B_i = `b`.
    fn sample(&self, b: u64, rng: &mut ChaCha8Rng) -> TauRun {
        let ncols = self.j.names().len();
        let mut vals: Vals = vec![None; ncols];
        self.set_b(&mut vals, b);
        let m = self.block.len();
        let input = Graph::new(m, mask_edges(b, m)).expect("valid");
        let bottom = |input| TauRun { input, output: None, score: 0, communication_rounds: 0 };
        let Some((total, opts)) = self.sigma_given_b.get(&[b]) else { return bottom(input) };
        vals[0] = Some(pick(opts, total, rng)[0]);
        let mut communication_rounds = 0;
        for step in &self.steps[1..] {
            match step {
                Step::BlockMessages(t) => {
                    self.block_messages(&mut vals, *t);
                    communication_rounds += 1;
                }
                Step::Draw(d) => {
                    let key = Self::cond_key(&vals, &d.cond).expect("conditioning columns are set");
                    let Some((total, opts)) = d.table.get(&key) else { return bottom(input) };
                    let target = pick(opts, total, rng);
                    for (&c, &x) in d.target.iter().zip(target) {
                        vals[c] = Some(x);
                    }
                }
            }
        }
        let (output, score) = self.finish(&vals);
        TauRun { input, output: Some(output), score, communication_rounds }
    }
}

fn pick<'o>(opts: &'o [(Vec<u64>, u128)], total: u128, rng: &mut ChaCha8Rng) -> &'o [u64] {
    let mut x = rng.gen_range(0..total);
    for (t, w) in opts {
        if x < *w {
            return t;
        }
        x -= w;
    }
    unreachable!("weights sum to total")
}

/// MIS: 1 if the output is a valid MIS of `graph`. Matching: output pairs
/// that are edges. Unfinished outputs score 0.
pub(crate) fn score_local(variant: Variant, graph: &Graph, output: &Output) -> u32 {
    match (variant, output) {
        (Variant::Mis, Output::Mis(s)) => is_mis(graph, s) as u32,
        (Variant::Apx, Output::Matching(m)) => m.pairs().iter().filter(|&&(a, b)| graph.has_edge(a, b)).count() as u32,
        _ => 0,
    }
}

/// An atom of ν_i. `key` is (Σ, all messages), or `None` for the ⊥ atom
/// reached when a conditional of μ is undefined.
#[derive(Debug, Clone, PartialEq)]
pub struct NuAtom {
    pub b: u64,
    pub t: Vec<u64>,
    pub key: Option<Vec<u64>>,
    pub prob: BigRational,
    /// Score of τ_i's output on this atom, 0 on ⊥.
    pub score: u32,
}

/// The law ν_i of (G_i, transcript, Σ) produced by the simulation τ_i.
#[derive(Debug, Clone)]
pub struct NuLaw {
    pub i: usize,
    pub atoms: Vec<NuAtom>,
}

impl NuLaw {
    pub fn total(&self) -> BigRational {
        self.atoms.iter().map(|a| &a.prob).sum()
    }

    pub fn bottom_mass(&self) -> BigRational {
        self.atoms.iter().filter(|a| a.key.is_none()).map(|a| &a.prob).sum()
    }

    /// Expected score of τ_i under ν_i.
    pub fn expected_score(&self) -> BigRational {
        self.atoms.iter().map(|a| &a.prob * BigRational::from_integer(a.score.into())).sum()
    }
}

pub fn build_nu(j: &JointLaw<'_>, i: usize) -> Result<NuLaw, EmbeddingError> {
    let sim = Simulation::new(j, i)?;
    let mut atoms = Vec::new();
    let mut vals: Vals = vec![None; j.names().len()];
    sim.expand(0, &mut vals, BigRational::one(), &mut atoms);
    Ok(NuLaw { i, atoms })
}

/// E_{B_i ~ μ} TV(μ_i(M, Σ | B_i), ν_i(M, Σ | B_i)). Since ν_i(B_i) = μ(B_i)
/// this is the TV distance between the joint laws of (B_i, M, Σ).
pub fn expected_tvd_mu_nu(j: &JointLaw<'_>, nu: &NuLaw) -> BigRational {
    let i = nu.i;
    let mut cols = vec![j.b_col(i)];
    cols.extend(j.s_cols());
    cols.extend(j.all_msgs());
    let total = BigInt::from(j.total());
    let mut diff: BTreeMap<(u64, Option<Vec<u64>>), BigRational> = BTreeMap::new();
    for (key, w) in j.marginal(&cols) {
        *diff.entry((key[0], Some(key[1..].to_vec()))).or_insert_with(BigRational::zero) += BigRational::new(BigInt::from(w), total.clone());
    }
    for a in &nu.atoms {
        *diff.entry((a.b, a.key.clone())).or_insert_with(BigRational::zero) -= &a.prob;
    }
    diff.values().map(|d| d.abs()).sum::<BigRational>() / BigRational::from_integer(2.into())
}

/// One run of the simulation protocol τ_i.
#[derive(Debug, Clone, PartialEq)]
pub struct TauRun {
    /// The level-0 input B_i in local labels.
    pub input: Graph,
    /// π's output restricted to block i in local labels; `None` when a
    /// conditional of μ was undefined.
    pub output: Option<Output>,
    pub score: u32,
    /// Rounds in which block i actually communicated.
    pub communication_rounds: usize,
}

/// Draws an input B_i from its marginal and runs τ_i on it.
pub fn simulate_tau(j: &JointLaw<'_>, i: usize, seed: u64) -> Result<TauRun, EmbeddingError> {
    let sim = Simulation::new(j, i)?;
    Ok(sample_tau(&sim, seed))
}

pub(crate) fn sample_tau(sim: &Simulation<'_, '_>, seed: u64) -> TauRun {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let b = pick(&sim.b_law, sim.j.total(), &mut rng)[0];
    sim.sample(b, &mut rng)
}

/// Sample statistics of τ_i's score over independent seeds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonteCarlo {
    pub trials: u64,
    pub mean: f64,
    /// Unbiased sample variance of the score.
    pub variance: f64,
    /// Runs that hit an undefined conditional.
    pub bottoms: u64,
}

impl MonteCarlo {
    pub fn std_error(&self) -> f64 {
        (self.variance / self.trials as f64).sqrt()
    }
}

/// Runs τ_i on `trials` independent seeds derived from `seed`.
pub fn monte_carlo_tau(j: &JointLaw<'_>, i: usize, trials: u64, seed: u64, exec: crate::Exec) -> Result<MonteCarlo, EmbeddingError> {
    let sim = Simulation::new(j, i)?;
    let coins = Coins::new(seed);
    let runs = exec.map_range(0..trials, |s| {
        let r = sample_tau(&sim, coins.public_word(0, s));
        (r.score, r.output.is_none())
    });
    let n = trials.max(1) as f64;
    let mean = runs.iter().map(|r| r.0 as f64).sum::<f64>() / n;
    let variance = if trials > 1 {
        runs.iter().map(|r| (r.0 as f64 - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    let bottoms = runs.iter().filter(|r| r.1).count() as u64;
    Ok(MonteCarlo { trials, mean, variance, bottoms })
}
