//! Verification suites with machine-readable reports.
//!
//! Every entry records the computed value next to its budget, so a failing
//! report can be diagnosed without rerunning. Exact quantities also carry
//! their value as a "p/q" fraction string.

mod facts;
mod suites;

use std::fmt;
use std::str::FromStr;

use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::distributions::{SigmaMode, ToyOverrides, Variant};
use crate::infotheory::{fraction_string, to_f64};
use crate::protocols::ProtocolSpec;
use crate::Exec;

pub use facts::{infotheory_suite, FACT_TOLERANCE};
pub use suites::{base_cases_suite, embedding_suite, structure_suite, SuiteError};

/// Version of the CSV column layout.
pub const CSV_SCHEMA: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    BaseCases,
    Structure,
    Infotheory,
    Embedding,
    All,
}

impl Suite {
    pub const ALL: [Suite; 5] = [Suite::BaseCases, Suite::Structure, Suite::Infotheory, Suite::Embedding, Suite::All];

    pub fn as_str(self) -> &'static str {
        match self {
            Suite::BaseCases => "base-cases",
            Suite::Structure => "structure",
            Suite::Infotheory => "infotheory",
            Suite::Embedding => "embedding",
            Suite::All => "all",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Suite {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Suite::ALL
            .into_iter()
            .find(|x| x.as_str() == s)
            .ok_or_else(|| format!("unknown suite {s:?}; expected base-cases, structure, infotheory, embedding or all"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = "==")]
    Eq,
}

impl Relation {
    fn symbol(self) -> &'static str {
        match self {
            Relation::Le => "<=",
            Relation::Ge => ">=",
            Relation::Eq => "==",
        }
    }
}

/// One checked quantity: `value relation budget`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Entry {
    pub name: String,
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub exact: Option<String>,
    pub relation: Relation,
    pub budget: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub budget_exact: Option<String>,
    /// Slack allowed on floating-point comparisons.
    pub tolerance: f64,
    pub pass: bool,
}

impl Entry {
    pub fn float(name: impl Into<String>, value: f64, relation: Relation, budget: f64, tolerance: f64) -> Self {
        let pass = match relation {
            Relation::Le => value <= budget + tolerance,
            Relation::Ge => value + tolerance >= budget,
            Relation::Eq => (value - budget).abs() <= tolerance,
        };
        Entry { name: name.into(), value, exact: None, relation, budget, budget_exact: None, tolerance, pass }
    }

    pub fn exact(name: impl Into<String>, value: &BigRational, relation: Relation, budget: &BigRational) -> Self {
        let pass = match relation {
            Relation::Le => value <= budget,
            Relation::Ge => value >= budget,
            Relation::Eq => value == budget,
        };
        Entry {
            name: name.into(),
            value: to_f64(value),
            exact: Some(fraction_string(value)),
            relation,
            budget: to_f64(budget),
            budget_exact: Some(fraction_string(budget)),
            tolerance: 0.0,
            pass,
        }
    }

    /// A yes/no property, recorded as 1 == 1.
    pub fn flag(name: impl Into<String>, holds: bool) -> Self {
        let value = BigRational::from_integer((holds as i32).into());
        Entry::exact(name, &value, Relation::Eq, &BigRational::from_integer(1.into()))
    }

    /// A count that must be zero.
    pub fn none(name: impl Into<String>, count: usize) -> Self {
        let value = BigRational::from_integer(count.into());
        Entry::exact(name, &value, Relation::Eq, &BigRational::from_integer(0.into()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub pass: bool,
    pub entries: Vec<Entry>,
}

impl SuiteReport {
    pub fn new(suite: Suite, entries: Vec<Entry>) -> Self {
        SuiteReport { suite, pass: entries.iter().all(|e| e.pass), entries }
    }

    pub fn failures(&self) -> impl Iterator<Item = &Entry> {
        self.entries.iter().filter(|e| !e.pass)
    }

    /// CSV with a `schema=1` first row, then a column header.
    pub fn to_csv(&self) -> String {
        let mut out = format!("schema={CSV_SCHEMA}\nsuite,name,value,exact,relation,budget,budget_exact,tolerance,pass\n");
        for e in &self.entries {
            let row = [
                self.suite.to_string(),
                csv_field(&e.name),
                e.value.to_string(),
                e.exact.clone().unwrap_or_default(),
                e.relation.symbol().to_string(),
                e.budget.to_string(),
                e.budget_exact.clone().unwrap_or_default(),
                e.tolerance.to_string(),
                e.pass.to_string(),
            ];
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Parameters shared by the suites. Unset fields take per-suite defaults.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifyConfig {
    pub variant: Option<Variant>,
    pub k: Option<u64>,
    pub toy: Option<ToyOverrides>,
    pub sigma_mode: SigmaMode,
    pub protocol: Option<ProtocolSpec>,
    pub seed: u64,
    pub trials: Option<u64>,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig { variant: None, k: None, toy: None, sigma_mode: SigmaMode::Blocks, protocol: None, seed: 0, trials: None }
    }
}

pub fn run_suite(suite: Suite, config: &VerifyConfig, exec: Exec) -> Result<SuiteReport, SuiteError> {
    let entries = match suite {
        Suite::BaseCases => base_cases_suite()?,
        Suite::Structure => structure_suite(config, exec)?,
        Suite::Infotheory => infotheory_suite(config.trials.unwrap_or(100), config.seed)?,
        Suite::Embedding => embedding_suite(config, exec)?,
        Suite::All => {
            let mut all = Vec::new();
            for s in [Suite::BaseCases, Suite::Structure, Suite::Infotheory, Suite::Embedding] {
                let report = run_suite(s, config, exec)?;
                all.extend(report.entries.into_iter().map(|mut e| {
                    e.name = format!("{s}: {}", e.name);
                    e
                }));
            }
            all
        }
    };
    Ok(SuiteReport::new(suite, entries))
}
