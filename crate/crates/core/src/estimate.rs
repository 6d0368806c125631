//! Monte Carlo estimation of expected retweeters and readers.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::condense::{condense, CondensedDag};
use crate::error::{Error, Result};
use crate::graph::{NodeId, SocialGraph};
use crate::io::fingerprint;
use crate::par;
use crate::prune::prune;
use crate::reach::{reader_count_with, ReachScratch};

/// 97.5% standard normal quantile.
pub const Z_95: f64 = 1.96;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    /// Users who end up active (retweet).
    Retweeters,
    /// Users who see the tweet: active users and their followers.
    Readers,
}

impl Metric {
    pub fn as_str(&self) -> &'static str {
        match self {
            Metric::Retweeters => "retweeters",
            Metric::Readers => "readers",
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "retweeters" | "retweets" => Ok(Metric::Retweeters),
            "readers" => Ok(Metric::Readers),
            _ => Err(Error::InvalidArgument(format!("unknown metric {s:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct InfluenceEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub n_samples: usize,
    pub ci95: (f64, f64),
    pub metric: Metric,
}

impl InfluenceEstimate {
    /// Sample mean with the unbiased standard error. A single sample has
    /// unknown spread and reports `stderr = +inf`.
    pub fn from_values(values: &[f64], metric: Metric) -> Self {
        let n = values.len();
        assert!(n > 0, "estimate needs at least one sample");
        let mean = values.iter().sum::<f64>() / n as f64;
        let stderr = if n == 1 {
            f64::INFINITY
        } else {
            let ss: f64 = values.iter().map(|x| (x - mean).powi(2)).sum();
            (ss / (n - 1) as f64 / n as f64).sqrt()
        };
        Self::with_stderr(mean, stderr, n, metric)
    }

    /// A value known without sampling error.
    pub fn exact(value: f64, metric: Metric) -> Self {
        Self::with_stderr(value, 0.0, 0, metric)
    }

    fn with_stderr(mean: f64, stderr: f64, n_samples: usize, metric: Metric) -> Self {
        let half = Z_95 * stderr;
        Self { mean, stderr, n_samples, ci95: (mean - half, mean + half), metric }
    }
}

/// One pruned-and-condensed cascade sample.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sample {
    pub seed: u64,
    pub kept_arcs: usize,
    pub dag: CondensedDag,
}

/// Samples of one graph at one retention probability, reused across
/// strategies so they compare on common random numbers.
#[derive(Clone, Debug)]
pub struct SampleBank {
    samples: Vec<Sample>,
    p: f64,
    graph_fingerprint: String,
    node_count: usize,
}

/// Sample `i` uses seed `base_seed + i`.
pub fn build_sample_bank(graph: &SocialGraph, p: f64, n_samples: usize, base_seed: u64) -> Result<SampleBank> {
    if n_samples == 0 {
        return Err(Error::InvalidArgument("sample bank needs at least one sample".into()));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidArgument(format!("p = {p} outside [0, 1]")));
    }
    let samples = par::map_range(n_samples, |i| {
        let seed = base_seed.wrapping_add(i as u64);
        let pruned = prune(graph, p, seed);
        Sample { seed, kept_arcs: pruned.kept_count(), dag: condense(&pruned) }
    });
    Ok(SampleBank { samples, p, graph_fingerprint: fingerprint(graph), node_count: graph.node_count() })
}

impl SampleBank {
    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn graph_fingerprint(&self) -> &str {
        &self.graph_fingerprint
    }

    pub fn seeds(&self) -> Vec<u64> {
        self.samples.iter().map(|s| s.seed).collect()
    }

    /// Canonical encoding: header, then every sample's seed, kept-arc count
    /// and condensed DAG.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(b"SBK1");
        out.extend_from_slice(&self.p.to_bits().to_le_bytes());
        out.extend_from_slice(&(self.samples.len() as u64).to_le_bytes());
        out.extend_from_slice(self.graph_fingerprint.as_bytes());
        for s in &self.samples {
            out.extend_from_slice(&s.seed.to_le_bytes());
            out.extend_from_slice(&(s.kept_arcs as u64).to_le_bytes());
            s.dag.write_to(&mut out).expect("writing to a Vec cannot fail");
        }
        out
    }

    pub(crate) fn check_graph(&self, graph: &SocialGraph) -> Result<()> {
        if graph.node_count() != self.node_count {
            return Err(Error::InvalidArgument(format!(
                "bank built on {} nodes, graph has {}",
                self.node_count,
                graph.node_count()
            )));
        }
        Ok(())
    }
}

/// Seed nodes are active with certainty; the cascade spreads over each
/// sample's kept arcs. Retweeters counts reached nodes, readers counts reached
/// nodes plus their followers in the full graph.
pub fn estimate_influence(
    bank: &SampleBank,
    graph: &SocialGraph,
    seeds: &[NodeId],
    metric: Metric,
) -> Result<InfluenceEstimate> {
    bank.check_graph(graph)?;
    for &s in seeds {
        graph.check_node(s)?;
    }
    let values = par::map_init(
        bank.samples(),
        || (ReachScratch::new(), ReachScratch::new(), Vec::new()),
        |(scratch, reader_scratch, comps), sample| match metric {
            Metric::Retweeters => sample.dag.reach_count_with(seeds, scratch) as f64,
            Metric::Readers => {
                sample.dag.reach_components(seeds, scratch, comps);
                let active = comps.iter().flat_map(|&c| sample.dag.members(c).iter().copied());
                reader_count_with(graph, active, reader_scratch) as f64
            }
        },
    );
    Ok(InfluenceEstimate::from_values(&values, metric))
}
