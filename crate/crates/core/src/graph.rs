//! Immutable follow graph in tweet-propagation orientation.

use std::collections::BTreeMap;
use std::ops::Range;

use crate::error::{Error, Result};

pub type NodeId = u32;

/// Directed graph stored as compressed adjacency: `followers(u)` lists every
/// `v` with an arc `u -> v`, sorted and without duplicates or self-loops.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SocialGraph {
    offsets: Vec<usize>,
    targets: Vec<NodeId>,
    in_degree: Vec<u32>,
}

/// What was discarded while building a graph from raw arcs.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct BuildReport {
    pub self_loops: usize,
    pub duplicates: usize,
}

impl SocialGraph {
    /// Build from raw arcs over nodes `0..node_count`. Self-loops are dropped
    /// and repeated arcs collapsed; both are counted in the report.
    pub fn from_arcs<I>(node_count: usize, arcs: I) -> Result<(Self, BuildReport)>
    where
        I: IntoIterator<Item = (NodeId, NodeId)>,
    {
        let mut report = BuildReport::default();
        let mut list = Vec::new();
        for (u, v) in arcs {
            for x in [u, v] {
                if x as usize >= node_count {
                    return Err(Error::UnknownNode { node: x as u64, node_count });
                }
            }
            if u == v {
                report.self_loops += 1;
            } else {
                list.push((u, v));
            }
        }
        list.sort_unstable();
        let before = list.len();
        list.dedup();
        report.duplicates = before - list.len();

        let mut offsets = vec![0usize; node_count + 1];
        for &(u, _) in &list {
            offsets[u as usize + 1] += 1;
        }
        for i in 0..node_count {
            offsets[i + 1] += offsets[i];
        }
        let targets = list.into_iter().map(|(_, v)| v).collect();
        Ok((Self::from_sorted_csr(offsets, targets), report))
    }

    /// Caller guarantees each row is strictly increasing, in range and loop-free.
    pub(crate) fn from_sorted_csr(offsets: Vec<usize>, targets: Vec<NodeId>) -> Self {
        let n = offsets.len() - 1;
        let mut in_degree = vec![0u32; n];
        for &v in &targets {
            in_degree[v as usize] += 1;
        }
        Self { offsets, targets, in_degree }
    }

    pub fn empty(node_count: usize) -> Self {
        Self::from_sorted_csr(vec![0; node_count + 1], Vec::new())
    }

    #[inline]
    pub fn node_count(&self) -> usize {
        self.offsets.len() - 1
    }

    #[inline]
    pub fn arc_count(&self) -> usize {
        self.targets.len()
    }

    /// Accounts that receive `u`'s tweets.
    #[inline]
    pub fn followers(&self, u: NodeId) -> &[NodeId] {
        &self.targets[self.arc_range(u)]
    }

    /// Positions of `u`'s out-arcs in the global arc numbering.
    #[inline]
    pub fn arc_range(&self, u: NodeId) -> Range<usize> {
        self.offsets[u as usize]..self.offsets[u as usize + 1]
    }

    /// Follower count `d_u`.
    #[inline]
    pub fn out_degree(&self, u: NodeId) -> u32 {
        (self.offsets[u as usize + 1] - self.offsets[u as usize]) as u32
    }

    /// Number of accounts `u` follows.
    #[inline]
    pub fn in_degree(&self, u: NodeId) -> u32 {
        self.in_degree[u as usize]
    }

    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    pub fn targets(&self) -> &[NodeId] {
        &self.targets
    }

    pub fn nodes(&self) -> Range<NodeId> {
        0..self.node_count() as NodeId
    }

    /// All arcs in global arc order.
    pub fn arcs(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.nodes().flat_map(move |u| self.followers(u).iter().map(move |&v| (u, v)))
    }

    pub fn has_arc(&self, u: NodeId, v: NodeId) -> bool {
        self.followers(u).binary_search(&v).is_ok()
    }

    pub fn check_node(&self, v: NodeId) -> Result<()> {
        if (v as usize) < self.node_count() {
            Ok(())
        } else {
            Err(Error::UnknownNode { node: v as u64, node_count: self.node_count() })
        }
    }
}

/// Out-degree (follower count) summary.
#[derive(Clone, Debug, PartialEq)]
pub struct DegreeStats {
    pub node_count: usize,
    pub arc_count: usize,
    /// `<k>`
    pub mean_out_degree: f64,
    /// `<k^2>`
    pub second_moment_out_degree: f64,
    pub max_out_degree: u32,
    /// degree -> fraction of nodes (`q_k`)
    pub degree_histogram: BTreeMap<u32, f64>,
}

impl DegreeStats {
    /// Build from absolute counts `degree -> number of nodes`.
    pub fn from_counts(counts: &BTreeMap<u32, u64>) -> Result<Self> {
        let n: u64 = counts.values().sum();
        if n == 0 {
            return Err(Error::InvalidArgument("degree histogram is empty".into()));
        }
        let mut arcs: u128 = 0;
        let mut squares: u128 = 0;
        for (&k, &c) in counts {
            arcs += k as u128 * c as u128;
            squares += (k as u128) * (k as u128) * c as u128;
        }
        let degree_histogram = counts.iter().filter(|(_, &c)| c > 0).map(|(&k, &c)| (k, c as f64 / n as f64)).collect();
        Ok(Self {
            node_count: n as usize,
            arc_count: arcs as usize,
            mean_out_degree: arcs as f64 / n as f64,
            second_moment_out_degree: squares as f64 / n as f64,
            max_out_degree: counts.iter().filter(|(_, &c)| c > 0).map(|(&k, _)| k).max().unwrap_or(0),
            degree_histogram,
        })
    }
}

pub fn degree_stats(graph: &SocialGraph) -> Result<DegreeStats> {
    let mut counts = BTreeMap::new();
    for u in graph.nodes() {
        *counts.entry(graph.out_degree(u)).or_insert(0u64) += 1;
    }
    DegreeStats::from_counts(&counts)
}
