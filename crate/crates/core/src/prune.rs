//! One cascade sample: the follow graph with each arc kept with probability `p`.

use crate::graph::{NodeId, SocialGraph};
use crate::rng::{keyed_unit, stream_key, ARC_STREAM};

/// Arc `i` of the parent survives iff `U(seed, i) < p`. Because the draw does
/// not depend on `p`, samples with the same seed are nested as `p` grows.
#[derive(Clone, Debug)]
pub struct PrunedGraph<'g> {
    parent: &'g SocialGraph,
    offsets: Vec<usize>,
    targets: Vec<NodeId>,
    p: f64,
    seed: u64,
}

pub fn prune(graph: &SocialGraph, p: f64, seed: u64) -> PrunedGraph<'_> {
    assert!((0.0..=1.0).contains(&p), "retention probability {p} outside [0, 1]");
    let n = graph.node_count();
    let key = stream_key(seed, ARC_STREAM);
    let mut offsets = Vec::with_capacity(n + 1);
    offsets.push(0);
    let mut targets = Vec::with_capacity((graph.arc_count() as f64 * p * 1.1) as usize + 16);
    if p >= 1.0 {
        targets.extend_from_slice(graph.targets());
        offsets.extend_from_slice(&graph.offsets()[1..]);
    } else if p <= 0.0 {
        offsets.resize(n + 1, 0);
    } else {
        for u in graph.nodes() {
            let range = graph.arc_range(u);
            for (i, &v) in range.clone().zip(graph.followers(u)) {
                if keyed_unit(key, i as u64) < p {
                    targets.push(v);
                }
            }
            offsets.push(targets.len());
        }
    }
    PrunedGraph { parent: graph, offsets, targets, p, seed }
}

impl<'g> PrunedGraph<'g> {
    pub fn parent(&self) -> &'g SocialGraph {
        self.parent
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn node_count(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn kept_count(&self) -> usize {
        self.targets.len()
    }

    pub fn followers(&self, u: NodeId) -> &[NodeId] {
        &self.targets[self.offsets[u as usize]..self.offsets[u as usize + 1]]
    }

    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    pub fn targets(&self) -> &[NodeId] {
        &self.targets
    }

    pub fn arcs(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        (0..self.node_count() as NodeId).flat_map(move |u| self.followers(u).iter().map(move |&v| (u, v)))
    }
}
