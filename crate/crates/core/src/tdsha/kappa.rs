//! Partition vectors: which RTS edges are treated as continuous.

use crate::ir::ResetLaw;
use crate::rts::{Rts, RtsEdge};

/// `continuous[c][e]` for edge `e` of component `c`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartitionVector {
    pub continuous: Vec<Vec<bool>>,
}

impl PartitionVector {
    pub fn all_discrete(comps: &[Rts]) -> Self {
        PartitionVector {
            continuous: comps.iter().map(|c| vec![false; c.edges.len()]).collect(),
        }
    }

    /// Every edge that may be continuous is.
    pub fn all_continuous(comps: &[Rts]) -> Self {
        PartitionVector {
            continuous: comps
                .iter()
                .map(|c| c.edges.iter().map(|e| !forced_discrete(e)).collect())
                .collect(),
        }
    }

    pub fn is_all_discrete(&self) -> bool {
        self.continuous.iter().flatten().all(|c| !c)
    }

    /// Pointwise order: `self <= other` when every continuous edge of
    /// `self` is continuous in `other`.
    pub fn le(&self, other: &PartitionVector) -> bool {
        self.continuous
            .iter()
            .flatten()
            .zip(other.continuous.iter().flatten())
            .all(|(a, b)| !a || *b)
    }
}

/// Instantaneous edges and edges whose reset is not an increment must
/// stay discrete.
pub fn forced_discrete(e: &RtsEdge) -> bool {
    e.action.rate.is_infinite()
        || e.action
            .reset
            .iter()
            .any(|r| !matches!(r.law, ResetLaw::Increment(_)))
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum KappaError {
    #[error("malformed partition entry `{0}` (expected `agent.branch=c` or `agent.branch=d`)")]
    Malformed(String),
    #[error("no edge `{0}` in any component")]
    UnknownEdge(String),
    #[error("edge `{0}` must stay discrete (instantaneous or non-increment reset)")]
    ForcedDiscrete(String),
    #[error("`{0}` may only appear as the first entry")]
    MisplacedBase(String),
}

/// Textual partition: optional base (`all-discrete` or `all-continuous`,
/// default discrete) followed by comma-separated `agent.branch=c|d`
/// overrides that apply to every component containing that edge.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KappaSpec {
    pub base_continuous: bool,
    pub overrides: Vec<(String, usize, bool)>,
}

impl KappaSpec {
    pub const ALL_DISCRETE: KappaSpec = KappaSpec {
        base_continuous: false,
        overrides: Vec::new(),
    };

    pub const ALL_CONTINUOUS: KappaSpec = KappaSpec {
        base_continuous: true,
        overrides: Vec::new(),
    };

    pub fn parse(s: &str) -> Result<KappaSpec, KappaError> {
        let mut spec = KappaSpec::ALL_DISCRETE;
        for (i, tok) in s
            .split(',')
            .map(str::trim)
            .filter(|t| !t.is_empty())
            .enumerate()
        {
            match tok {
                "all-discrete" | "all-continuous" if i == 0 => {
                    spec.base_continuous = tok == "all-continuous";
                }
                "all-discrete" | "all-continuous" => {
                    return Err(KappaError::MisplacedBase(tok.to_string()))
                }
                _ => {
                    let bad = || KappaError::Malformed(tok.to_string());
                    let (edge, kind) = tok.split_once('=').ok_or_else(bad)?;
                    let (agent, branch) = edge.trim().rsplit_once('.').ok_or_else(bad)?;
                    let branch: usize = branch.parse().map_err(|_| bad())?;
                    let cont = match kind.trim() {
                        "c" => true,
                        "d" => false,
                        _ => return Err(bad()),
                    };
                    if agent.is_empty() {
                        return Err(bad());
                    }
                    spec.overrides.push((agent.to_string(), branch, cont));
                }
            }
        }
        Ok(spec)
    }

    pub fn resolve(&self, comps: &[Rts]) -> Result<PartitionVector, KappaError> {
        let mut pv = if self.base_continuous {
            PartitionVector::all_continuous(comps)
        } else {
            PartitionVector::all_discrete(comps)
        };
        for (agent, branch, cont) in &self.overrides {
            let mut found = false;
            for (c, rts) in comps.iter().enumerate() {
                for (i, e) in rts.edges.iter().enumerate() {
                    if e.agent == *agent && e.branch == *branch {
                        found = true;
                        if *cont && forced_discrete(e) {
                            return Err(KappaError::ForcedDiscrete(e.label()));
                        }
                        pv.continuous[c][i] = *cont;
                    }
                }
            }
            if !found {
                return Err(KappaError::UnknownEdge(format!("{agent}.{branch}")));
            }
        }
        Ok(pv)
    }
}

impl std::str::FromStr for KappaSpec {
    type Err = KappaError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        KappaSpec::parse(s)
    }
}

impl std::fmt::Display for KappaSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(if self.base_continuous {
            "all-continuous"
        } else {
            "all-discrete"
        })?;
        for (a, b, c) in &self.overrides {
            write!(f, ",{a}.{b}={}", if *c { "c" } else { "d" })?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_forms() {
        assert_eq!(
            KappaSpec::parse("all-continuous").unwrap(),
            KappaSpec::ALL_CONTINUOUS
        );
        let s = KappaSpec::parse("all-continuous, growthAD.0=d,mutation.0=c").unwrap();
        assert!(s.base_continuous);
        assert_eq!(s.overrides[0], ("growthAD".to_string(), 0, false));
        assert_eq!(s.to_string(), "all-continuous,growthAD.0=d,mutation.0=c");
        assert!(KappaSpec::parse("a.x=c").is_err());
        assert!(KappaSpec::parse("a.0=q").is_err());
        assert!(KappaSpec::parse("a.0=c,all-discrete").is_err());
    }
}
