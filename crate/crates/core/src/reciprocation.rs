//! Follow-back probabilities `r_v` and their realized outcomes `R_v`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::graph::{NodeId, SocialGraph};
use crate::rng::{keyed_unit, stream_key, RECIPROCATION_STREAM};

#[derive(Clone, Debug, PartialEq)]
pub enum ReciprocationModel {
    /// Everyone follows back.
    Certain,
    Constant(f64),
    /// `min(followings / (followers + 100), 1)`
    RatioFormula,
    /// One probability per node.
    Table(Vec<f64>),
}

/// Follow-back probability from follow counts.
pub fn ratio_formula(followings: u32, followers: u32) -> f64 {
    (followings as f64 / (followers as f64 + 100.0)).min(1.0)
}

impl ReciprocationModel {
    pub fn is_certain(&self) -> bool {
        match self {
            Self::Certain => true,
            Self::Constant(r) => *r == 1.0,
            Self::Table(t) => t.iter().all(|&r| r == 1.0),
            Self::RatioFormula => false,
        }
    }

    /// `r_v` for every node of `graph`.
    pub fn probabilities(&self, graph: &SocialGraph) -> Result<Vec<f64>> {
        let n = graph.node_count();
        let r = match self {
            Self::Certain => vec![1.0; n],
            Self::Constant(r) => vec![*r; n],
            Self::RatioFormula => {
                graph.nodes().map(|v| ratio_formula(graph.in_degree(v), graph.out_degree(v))).collect()
            }
            Self::Table(t) => {
                if t.len() != n {
                    return Err(Error::InvalidArgument(format!(
                        "reciprocation table has {} entries for {n} nodes",
                        t.len()
                    )));
                }
                t.clone()
            }
        };
        if let Some(bad) = r.iter().find(|x| !(0.0..=1.0).contains(*x)) {
            return Err(Error::InvalidArgument(format!("reciprocation probability {bad} outside [0, 1]")));
        }
        Ok(r)
    }
}

impl fmt::Display for ReciprocationModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Certain => f.write_str("certain"),
            Self::Constant(r) => write!(f, "const={r}"),
            Self::RatioFormula => f.write_str("ratio"),
            Self::Table(t) => write!(f, "table[{}]", t.len()),
        }
    }
}

impl FromStr for ReciprocationModel {
    type Err = Error;

    /// `certain`, `ratio` or `const=R`.
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "certain" => Ok(Self::Certain),
            "ratio" => Ok(Self::RatioFormula),
            _ => {
                let r = s
                    .strip_prefix("const=")
                    .and_then(|x| x.parse::<f64>().ok())
                    .ok_or_else(|| Error::InvalidArgument(format!("unknown reciprocation model {s:?}")))?;
                if !(0.0..=1.0).contains(&r) {
                    return Err(Error::InvalidArgument(format!("reciprocation probability {r} outside [0, 1]")));
                }
                Ok(Self::Constant(r))
            }
        }
    }
}

/// Does `v` follow back in the outcome keyed by `seed`? One draw per node.
#[inline]
pub fn reciprocates(key: u64, v: NodeId, r: f64) -> bool {
    r >= 1.0 || keyed_unit(key, v as u64) < r
}

pub fn outcome_key(seed: u64) -> u64 {
    stream_key(seed, RECIPROCATION_STREAM)
}

/// Realize `R_v ~ Bernoulli(r_v)` for every node.
pub fn realize(probabilities: &[f64], seed: u64) -> Vec<bool> {
    let key = outcome_key(seed);
    probabilities.iter().enumerate().map(|(v, &r)| reciprocates(key, v as NodeId, r)).collect()
}
