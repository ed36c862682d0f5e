//! Protocol library: Luby, parity-leaking stress protocols, baselines,
//! zero-round optimal referees and the bipartite wrapper.

mod baselines;
mod bipartite;
mod luby;
mod xor;
mod zero_round;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::distributions::Variant;
use crate::model::{MessageContext, Output, Protocol, Transcript};
use crate::{Bits, Coins};

pub use baselines::{blind_output, greedy_mis, label_width, FixedOutput, FullBroadcast, Greedy, Silent, ZeroRound};
pub use bipartite::{cut_sides, cut_subgraph, BipartiteWrapper};
pub use luby::{luby_phases, Luby};
pub use xor::{orientation, XorProtocol, XorVariant};
pub use zero_round::{best_zero_round_referee_apx, best_zero_round_referee_mis, APX_REFEREE_LIMIT, MIS_REFEREE_LIMIT};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ProtocolError {
    #[error("exhaustive referee search supports k <= {limit}, got {k}")]
    TooLarge { k: usize, limit: usize },
    #[error("unknown protocol {0:?}")]
    Unknown(String),
    #[error("bad parameters for {name}: {reason}")]
    BadParams { name: String, reason: String },
}

impl Protocol for Box<dyn Protocol> {
    fn name(&self) -> String {
        (**self).name()
    }
    fn rounds(&self) -> usize {
        (**self).rounds()
    }
    fn bandwidth(&self) -> usize {
        (**self).bandwidth()
    }
    fn requires_layout(&self) -> bool {
        (**self).requires_layout()
    }
    fn message(&self, ctx: &MessageContext<'_>) -> Bits {
        (**self).message(ctx)
    }
    fn referee(&self, transcript: &Transcript, coins: &Coins) -> Output {
        (**self).referee(transcript, coins)
    }
}

/// A protocol selected by `NAME[:PARAMS]`, e.g. `luby:12`, `xor:fooling_xor`,
/// `bipartite:greedy`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct ProtocolSpec {
    pub name: String,
    pub params: Option<String>,
}

impl fmt::Display for ProtocolSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.params {
            Some(p) => write!(f, "{}:{}", self.name, p),
            None => f.write_str(&self.name),
        }
    }
}

const NAMES: [&str; 7] = ["luby", "xor", "silent", "zero-round", "full-broadcast", "greedy", "bipartite"];

impl FromStr for ProtocolSpec {
    type Err = ProtocolError;
    fn from_str(s: &str) -> Result<Self, ProtocolError> {
        let (name, params) = match s.split_once(':') {
            Some((n, p)) => (n, Some(p.to_string())),
            None => (s, None),
        };
        if !NAMES.contains(&name) {
            return Err(ProtocolError::Unknown(s.to_string()));
        }
        let spec = ProtocolSpec { name: name.to_string(), params };
        spec.build(Variant::Mis, 2)?;
        Ok(spec)
    }
}

impl TryFrom<String> for ProtocolSpec {
    type Error = ProtocolError;
    fn try_from(s: String) -> Result<Self, ProtocolError> {
        s.parse()
    }
}

impl From<ProtocolSpec> for String {
    fn from(p: ProtocolSpec) -> String {
        p.to_string()
    }
}

impl ProtocolSpec {
    fn bad(&self, reason: impl Into<String>) -> ProtocolError {
        ProtocolError::BadParams { name: self.name.clone(), reason: reason.into() }
    }

    fn number(&self, default: usize) -> Result<usize, ProtocolError> {
        match &self.params {
            None => Ok(default),
            Some(p) => p.parse().map_err(|_| self.bad(format!("expected an integer, got {p:?}"))),
        }
    }

    /// Instantiates the protocol for inputs with `n` vertices.
    pub fn build(&self, variant: Variant, n: usize) -> Result<Box<dyn Protocol>, ProtocolError> {
        Ok(match self.name.as_str() {
            "luby" => {
                let phases = self.number(Luby::for_size(n).max_phases)?;
                if phases == 0 {
                    return Err(self.bad("at least one phase"));
                }
                Box::new(Luby::new(phases))
            }
            "xor" => {
                let p = self.params.as_deref().ok_or_else(|| self.bad("missing variant"))?;
                let (v, target) = match p.split_once(',') {
                    Some((v, t)) => (v, t.parse().map_err(|_| self.bad(format!("bad target {t:?}")))?),
                    None => (p, 0),
                };
                let variant: XorVariant = v.parse().map_err(|e: String| self.bad(e))?;
                Box::new(XorProtocol::targeting(variant, target))
            }
            "silent" => Box::new(Silent { rounds: self.number(1)?, variant }),
            "zero-round" => Box::new(ZeroRound::new(variant)),
            "full-broadcast" => Box::new(FullBroadcast { variant, bandwidth: self.number(n)? }),
            "greedy" => Box::new(Greedy { bandwidth: self.number(label_width(n))? }),
            "bipartite" => {
                let inner: ProtocolSpec = self.params.as_deref().ok_or_else(|| self.bad("missing inner protocol"))?.parse()?;
                Box::new(BipartiteWrapper::new(inner.build(variant, n)?))
            }
            _ => return Err(ProtocolError::Unknown(self.name.clone())),
        })
    }
}

/// Protocols every leakage check is run against: silent, zero-round,
/// full-broadcast, the three parity protocols and Luby cut to two phases.
pub fn stress_suite(variant: Variant, n: usize) -> Vec<Box<dyn Protocol>> {
    let mut out: Vec<Box<dyn Protocol>> = vec![
        Box::new(Silent { rounds: 1, variant }),
        Box::new(ZeroRound::new(variant)),
        Box::new(FullBroadcast { variant, bandwidth: n }),
    ];
    out.extend(XorVariant::ALL.into_iter().map(|v| Box::new(XorProtocol::new(v)) as Box<dyn Protocol>));
    out.push(Box::new(Luby::new(2)));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn specs_parse_and_build() {
        for s in ["luby", "luby:12", "xor:directed_round1", "xor:fooling_xor,1", "silent:2", "zero-round", "full-broadcast", "greedy:4", "bipartite:greedy", "bipartite:full-broadcast:8"] {
            let spec: ProtocolSpec = s.parse().unwrap();
            assert_eq!(spec.to_string(), s);
            spec.build(Variant::Apx, 8).unwrap();
        }
        assert!("nope".parse::<ProtocolSpec>().is_err());
        assert!("xor:bogus".parse::<ProtocolSpec>().is_err());
        assert!("luby:x".parse::<ProtocolSpec>().is_err());
    }

    #[test]
    fn spec_serde_is_a_string() {
        let spec: ProtocolSpec = "luby:3".parse().unwrap();
        assert_eq!(serde_json::to_string(&spec).unwrap(), "\"luby:3\"");
    }

    #[test]
    fn stress_suite_names() {
        let names: Vec<String> = stress_suite(Variant::Mis, 10).iter().map(|p| p.name()).collect();
        assert_eq!(names.len(), 7);
        assert!(names.contains(&"xor:symmetric_xor".to_string()));
    }
}
