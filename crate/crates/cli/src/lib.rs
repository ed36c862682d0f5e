//! Command implementations behind the `blackboard` binary.

use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;

use blackboard_core::distributions::{
    make_params, sample_instance, DistError, Instance, ParamsError, SigmaMode, ToyOverrides, Variant,
};
use blackboard_core::embedding::EmbeddingError;
use blackboard_core::model::ModelError;
use blackboard_core::oracles::{is_mis, matching_score, max_matching_size, OracleError};
use blackboard_core::protocols::{ProtocolError, ProtocolSpec};
use blackboard_core::verify::{run_suite, Suite, SuiteError, SuiteReport, VerifyConfig, CSV_SCHEMA};
use blackboard_core::{run_protocol, BlockLayout, Coins, Exec, Graph, Output, Protocol};
use serde::{Deserialize, Serialize};

pub const EXIT_OK: i32 = 0;
pub const EXIT_SUITE_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_OVERFLOW: i32 = 3;
pub const EXIT_BANDWIDTH: i32 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Gen,
    Run,
    Verify,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

/// Everything a command needs; together with the seed it determines the
/// output bytes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: Command,
    pub variant: Option<Variant>,
    pub k: Option<u64>,
    pub r: Option<usize>,
    pub toy: Option<ToyOverrides>,
    pub sigma_mode: SigmaMode,
    pub protocol: Option<ProtocolSpec>,
    pub seed: u64,
    pub trials: Option<u64>,
    pub format: Format,
    pub out: Option<PathBuf>,
    pub suite: Option<Suite>,
    pub instance: Option<PathBuf>,
}

impl RunConfig {
    pub fn new(command: Command) -> Self {
        RunConfig {
            command,
            variant: None,
            k: None,
            r: None,
            toy: None,
            sigma_mode: SigmaMode::Blocks,
            protocol: None,
            seed: 0,
            trials: None,
            format: Format::Json,
            out: None,
            suite: None,
            instance: None,
        }
    }

    /// Rejects combinations that cannot work, before any computation.
    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: &str| Err(CliError::Config(m.to_string()));
        if self.k == Some(0) {
            return bad("--k must be at least 1");
        }
        if self.trials == Some(0) {
            return bad("--trials must be at least 1");
        }
        if let Some(toy) = &self.toy {
            if toy.f.is_empty() || toy.p.is_empty() {
                return bad("--toy-f and --toy-p must be given together");
            }
        }
        match self.command {
            Command::Gen => {
                if self.k.is_none() {
                    return bad("gen needs --k");
                }
                if self.format == Format::Csv {
                    return bad("gen writes instances as JSON only");
                }
                if self.suite.is_some() || self.protocol.is_some() || self.instance.is_some() {
                    return bad("gen takes no --suite, --protocol or --instance");
                }
            }
            Command::Run => {
                if self.protocol.is_none() {
                    return bad("run needs --protocol");
                }
                if self.instance.is_none() && self.k.is_none() {
                    return bad("run needs --instance or instance parameters (--k)");
                }
                if self.instance.is_some() && (self.k.is_some() || self.r.is_some() || self.toy.is_some()) {
                    return bad("--instance cannot be combined with --k, --r or toy overrides");
                }
                if self.suite.is_some() {
                    return bad("run takes no --suite");
                }
            }
            Command::Verify => {
                if self.suite.is_none() {
                    return bad("verify needs --suite");
                }
                if self.r.is_some_and(|r| r != 1) {
                    return bad("the verification suites work on one-level instances (--r 1)");
                }
                if self.instance.is_some() {
                    return bad("verify takes no --instance");
                }
            }
        }
        Ok(())
    }

    fn params(&self, variant: Variant) -> Result<blackboard_core::distributions::Params, CliError> {
        let k = self.k.ok_or_else(|| CliError::Config("missing --k".into()))?;
        Ok(make_params(k, self.r.unwrap_or(0), self.toy.as_ref(), variant)?)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CliError {
    Config(String),
    Overflow(String),
    Bandwidth(String),
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Internal(_) => EXIT_CONFIG,
            CliError::Overflow(_) => EXIT_OVERFLOW,
            CliError::Bandwidth(_) => EXIT_BANDWIDTH,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Overflow(m) => write!(f, "overflow: {m}"),
            CliError::Bandwidth(m) => write!(f, "bandwidth violation: {m}"),
            CliError::Internal(m) => write!(f, "error: {m}"),
        }
    }
}

impl From<ParamsError> for CliError {
    fn from(e: ParamsError) -> Self {
        match e {
            ParamsError::Overflow { .. } | ParamsError::SizeBound { .. } => CliError::Overflow(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

impl From<DistError> for CliError {
    fn from(e: DistError) -> Self {
        match e {
            DistError::Overflow { .. } => CliError::Overflow(e.to_string()),
            DistError::Params(p) => p.into(),
            _ => CliError::Config(e.to_string()),
        }
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        match e {
            ModelError::BandwidthExceeded { .. } => CliError::Bandwidth(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

impl From<ProtocolError> for CliError {
    fn from(e: ProtocolError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<OracleError> for CliError {
    fn from(e: OracleError) -> Self {
        match e {
            OracleError::TooLarge(_) => CliError::Overflow(e.to_string()),
            _ => CliError::Internal(e.to_string()),
        }
    }
}

impl From<SuiteError> for CliError {
    fn from(e: SuiteError) -> Self {
        match e {
            SuiteError::Params(p) => p.into(),
            SuiteError::Dist(d) => d.into(),
            SuiteError::Protocol(p) => p.into(),
            SuiteError::Oracle(o) => o.into(),
            SuiteError::Embedding(EmbeddingError::TooLarge { .. }) => CliError::Overflow(e.to_string()),
            SuiteError::Embedding(EmbeddingError::Model(m)) => m.into(),
            _ => CliError::Internal(e.to_string()),
        }
    }
}

/// What a command produced: the file body, a human summary and whether a
/// verification failed.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub body: String,
    pub summary: String,
    pub failed: bool,
}

pub fn execute(config: &RunConfig, exec: Exec) -> Result<Outcome, CliError> {
    config.validate()?;
    match config.command {
        Command::Gen => cmd_gen(config),
        Command::Run => cmd_run(config, exec),
        Command::Verify => cmd_verify(config, exec),
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serialisable");
    s.push('\n');
    s
}

pub fn cmd_gen(config: &RunConfig) -> Result<Outcome, CliError> {
    let variant = config.variant.unwrap_or(Variant::Mis);
    let params = config.params(variant)?;
    let inst = sample_instance(&params, config.seed, config.sigma_mode)?;
    let summary = format!("n_r={} blocks={} edges={}", inst.graph.n(), inst.blocks.len(), inst.graph.edge_count());
    Ok(Outcome { body: to_json(&inst), summary, failed: false })
}

/// Aggregate of repeated protocol runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub config: RunConfig,
    pub protocol: String,
    pub variant: Variant,
    pub n: usize,
    pub trials: u64,
    pub rounds: usize,
    pub bandwidth: usize,
    pub max_bits: usize,
    /// MIS: fraction of runs whose output is a maximal independent set.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub validity_rate: Option<f64>,
    /// Matching: mean number of output pairs that are edges.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub mean_valid_edges: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub mean_max_matching: Option<f64>,
    /// Matching: mean maximum matching over mean valid output edges.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub ratio: Option<f64>,
    /// Standard error of the per-run score.
    pub std_error: f64,
}

impl RunResult {
    fn to_csv(&self) -> String {
        let opt = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_default();
        let mut s = format!(
            "schema={CSV_SCHEMA}\nprotocol,variant,n,trials,rounds,bandwidth,max_bits,validity_rate,mean_valid_edges,mean_max_matching,ratio,std_error\n"
        );
        let variant = match self.variant {
            Variant::Mis => "mis",
            Variant::Apx => "apx",
        };
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            self.protocol,
            variant,
            self.n,
            self.trials,
            self.rounds,
            self.bandwidth,
            self.max_bits,
            opt(self.validity_rate),
            opt(self.mean_valid_edges),
            opt(self.mean_max_matching),
            opt(self.ratio),
            self.std_error
        );
        s
    }
}

/// A graph file holds either a full instance or a bare `{n, edges}` graph.
fn load_graph(path: &PathBuf) -> Result<(Graph, Option<BlockLayout>, Option<Variant>), CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    if let Ok(inst) = serde_json::from_str::<Instance>(&text) {
        return Ok((inst.graph, inst.layout, Some(inst.params.variant)));
    }
    let graph: Graph =
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{} is not an instance or graph: {e}", path.display())))?;
    Ok((graph, None, None))
}

struct Trial {
    score: f64,
    mu: usize,
    rounds: usize,
    max_bits: usize,
}

fn score_run(variant: Variant, graph: &Graph, output: &Output) -> Result<f64, CliError> {
    Ok(match (variant, output) {
        (Variant::Mis, Output::Mis(s)) => is_mis(graph, s) as u8 as f64,
        (Variant::Apx, Output::Matching(m)) => matching_score(graph, m.pairs())?.valid_edges as f64,
        _ => 0.0,
    })
}

pub fn cmd_run(config: &RunConfig, exec: Exec) -> Result<Outcome, CliError> {
    let spec = config.protocol.clone().ok_or_else(|| CliError::Config("missing --protocol".into()))?;
    let trials = config.trials.unwrap_or(1);
    let coins = Coins::new(config.seed);
    // A fixed file is rerun with fresh coins; parameters draw a fresh instance per trial.
    let fixed = match &config.instance {
        Some(path) => Some(load_graph(path)?),
        None => None,
    };
    let variant = config.variant.or(fixed.as_ref().and_then(|f| f.2)).unwrap_or(Variant::Mis);
    let params = match fixed {
        Some(_) => None,
        None => Some(config.params(variant)?),
    };
    let n = match (&fixed, &params) {
        (Some(f), _) => f.0.n(),
        (None, Some(p)) => p.n_r() as usize,
        _ => unreachable!("validated"),
    };
    let protocol: Box<dyn Protocol> = spec.build(variant, n)?;
    let runs = exec.map_range(0..trials, |t| -> Result<Trial, CliError> {
        let seed = coins.public_word(0, t);
        let owned;
        let (graph, layout) = match (&fixed, &params) {
            (Some(f), _) => (&f.0, f.1.as_ref()),
            (None, Some(p)) => {
                owned = sample_instance(p, coins.public_word(1, t), config.sigma_mode)?;
                (&owned.graph, owned.layout.as_ref())
            }
            _ => unreachable!("validated"),
        };
        let ex = run_protocol(graph, layout, protocol.as_ref(), seed)?;
        let mu = if variant == Variant::Apx { max_matching_size(graph) } else { 0 };
        Ok(Trial {
            score: score_run(variant, graph, &ex.output)?,
            mu,
            rounds: ex.transcript.round_count(),
            max_bits: ex.transcript.max_bits(),
        })
    });
    let runs: Vec<Trial> = runs.into_iter().collect::<Result<_, _>>()?;
    let count = runs.len() as f64;
    let mean = runs.iter().map(|r| r.score).sum::<f64>() / count;
    let var = if runs.len() > 1 { runs.iter().map(|r| (r.score - mean).powi(2)).sum::<f64>() / (count - 1.0) } else { 0.0 };
    let mean_mu = runs.iter().map(|r| r.mu as f64).sum::<f64>() / count;
    let (validity_rate, mean_valid_edges, mean_max_matching, ratio) = match variant {
        Variant::Mis => (Some(mean), None, None, None),
        Variant::Apx => (None, Some(mean), Some(mean_mu), (mean > 0.0).then(|| mean_mu / mean)),
    };
    let result = RunResult {
        config: config.clone(),
        protocol: protocol.name(),
        variant,
        n,
        trials,
        rounds: runs.iter().map(|r| r.rounds).max().unwrap_or(0),
        bandwidth: protocol.bandwidth(),
        max_bits: runs.iter().map(|r| r.max_bits).max().unwrap_or(0),
        validity_rate,
        mean_valid_edges,
        mean_max_matching,
        ratio,
        std_error: (var / count).sqrt(),
    };
    let summary = match variant {
        Variant::Mis => format!("{}: validity rate {mean} over {trials} trials", result.protocol),
        Variant::Apx => format!("{}: mean valid edges {mean}, mean maximum matching {mean_mu}", result.protocol),
    };
    let body = match config.format {
        Format::Json => to_json(&result),
        Format::Csv => result.to_csv(),
    };
    Ok(Outcome { body, summary, failed: false })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyOutput {
    pub config: RunConfig,
    #[serde(flatten)]
    pub report: SuiteReport,
}

pub fn cmd_verify(config: &RunConfig, exec: Exec) -> Result<Outcome, CliError> {
    let suite = config.suite.ok_or_else(|| CliError::Config("missing --suite".into()))?;
    let vc = VerifyConfig {
        variant: config.variant,
        k: config.k,
        toy: config.toy.clone(),
        sigma_mode: config.sigma_mode,
        protocol: config.protocol.clone(),
        seed: config.seed,
        trials: config.trials,
    };
    let report = run_suite(suite, &vc, exec)?;
    let failed: Vec<&str> = report.failures().map(|e| e.name.as_str()).collect();
    let summary = if failed.is_empty() {
        format!("suite {suite}: {} checks passed", report.entries.len())
    } else {
        format!("suite {suite}: {} of {} checks failed: {}", failed.len(), report.entries.len(), failed.join("; "))
    };
    let failed = !report.pass;
    let body = match config.format {
        Format::Json => to_json(&VerifyOutput { config: config.clone(), report }),
        Format::Csv => report.to_csv(),
    };
    Ok(Outcome { body, summary, failed })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_round_trips() {
        let mut c = RunConfig::new(Command::Verify);
        c.suite = Some(Suite::Embedding);
        c.k = Some(1);
        c.toy = Some(ToyOverrides { f: vec![1], p: vec![2] });
        c.protocol = Some("xor:directed_round1".parse().unwrap());
        c.format = Format::Csv;
        let json = serde_json::to_string(&c).unwrap();
        assert_eq!(serde_json::from_str::<RunConfig>(&json).unwrap(), c);
    }

    #[test]
    fn invalid_combinations_are_rejected() {
        let mut c = RunConfig::new(Command::Gen);
        assert_eq!(c.validate().unwrap_err().exit_code(), EXIT_CONFIG);
        c.k = Some(1);
        c.format = Format::Csv;
        assert!(c.validate().is_err());
        let mut r = RunConfig::new(Command::Run);
        r.k = Some(2);
        assert!(r.validate().is_err());
        r.protocol = Some("luby".parse().unwrap());
        r.validate().unwrap();
        r.trials = Some(0);
        assert!(r.validate().is_err());
    }

    #[test]
    fn full_scale_generation_overflows() {
        let mut c = RunConfig::new(Command::Gen);
        c.k = Some(2);
        c.r = Some(1);
        let err = execute(&c, Exec::Sequential).unwrap_err();
        assert_eq!(err.exit_code(), EXIT_OVERFLOW);
        assert!(err.to_string().contains("16777216"), "{err}");
    }
}
