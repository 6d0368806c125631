//! Graph rewrites that turn follow-back and reader counting into plain
//! weighted cascades. Evaluated only with the exact enumerator; they exist to
//! cross-check the direct implementations.

use crate::error::{Error, Result};
use crate::exact::exact_weighted_influence;
use crate::graph::{NodeId, SocialGraph};
use crate::reciprocation::ReciprocationModel;

#[derive(Clone, Debug)]
pub struct TransformedGraph {
    /// Nodes `0..N` are the originals, `N..2N` the added copies.
    pub graph: SocialGraph,
    /// `node_map[u]` is the copy attached to original node `u`.
    pub node_map: Vec<NodeId>,
    /// Success probability of each arc in CSR order of `graph`.
    pub arc_probability: Vec<f64>,
    pub node_weight: Vec<f64>,
    pub original_nodes: usize,
}

impl TransformedGraph {
    fn build(
        original: &SocialGraph,
        extra: impl Iterator<Item = (NodeId, NodeId)>,
        probability: impl Fn(NodeId, NodeId) -> f64,
        node_weight: Vec<f64>,
    ) -> Result<Self> {
        let n = original.node_count();
        if 2 * n > NodeId::MAX as usize {
            return Err(Error::TooLarge(format!("{n} nodes cannot be doubled")));
        }
        let (graph, _) = SocialGraph::from_arcs(2 * n, original.arcs().chain(extra))?;
        let arc_probability = graph.arcs().map(|(u, v)| probability(u, v)).collect();
        Ok(Self {
            graph,
            node_map: (0..n as NodeId).map(|u| u + n as NodeId).collect(),
            arc_probability,
            node_weight,
            original_nodes: n,
        })
    }

    /// `h(B)`.
    pub fn map_seeds(&self, seeds: &[NodeId]) -> Vec<NodeId> {
        seeds.iter().map(|&v| self.node_map[v as usize]).collect()
    }

    /// Exact expected weight of the active set when `seeds` (transformed node
    /// ids) start active.
    pub fn exact_influence(&self, seeds: &[NodeId]) -> Result<f64> {
        exact_weighted_influence(&self.graph, &self.arc_probability, &self.node_weight, seeds)
    }
}

/// Add `u'` with a single arc `u' -> u` that succeeds with probability
/// `r_u * p0(u)`. Following `u` is then the same as activating `u'`, so the
/// transformed influence of `h(B)` is the original influence of `B` plus
/// `|B|`. `p0` defaults to 1. All weights are 1.
pub fn follow_back_transform(
    graph: &SocialGraph,
    p: f64,
    reciprocation: &ReciprocationModel,
    p0: Option<&[f64]>,
) -> Result<TransformedGraph> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidArgument(format!("p = {p} outside [0, 1]")));
    }
    let n = graph.node_count();
    let r = reciprocation.probabilities(graph)?;
    let ones = vec![1.0; n];
    let p0 = p0.unwrap_or(&ones);
    if p0.len() != n || p0.iter().any(|x| !(0.0..=1.0).contains(x)) {
        return Err(Error::InvalidArgument("p0 must hold one probability per node".into()));
    }
    let nn = n as NodeId;
    TransformedGraph::build(
        graph,
        (0..nn).map(|u| (u + nn, u)),
        |u, _| {
            if u >= nn {
                let o = (u - nn) as usize;
                r[o] * p0[o]
            } else {
                p
            }
        },
        vec![1.0; 2 * n],
    )
}

/// Add `u''` fed by `u` and by every account `u` follows, all with
/// probability 1. Only the copies carry weight, so the expected weight equals
/// the expected number of readers.
pub fn reader_transform(graph: &SocialGraph, p: f64) -> Result<TransformedGraph> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidArgument(format!("p = {p} outside [0, 1]")));
    }
    let n = graph.node_count();
    let nn = n as NodeId;
    let own = (0..nn).map(|u| (u, u + nn));
    let fed = graph.arcs().map(|(v, u)| (v, u + nn));
    let mut weight = vec![0.0; n];
    weight.resize(2 * n, 1.0);
    TransformedGraph::build(graph, own.chain(fed), |_, v| if v >= nn { 1.0 } else { p }, weight)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimate::Metric;
    use crate::exact::exact_influence;
    use crate::reach::reader_set;

    fn graph(n: usize, arcs: &[(u32, u32)]) -> SocialGraph {
        SocialGraph::from_arcs(n, arcs.iter().copied()).unwrap().0
    }

    #[test]
    fn follow_back_certain() {
        let g = graph(3, &[(0, 1), (1, 2)]);
        let t = follow_back_transform(&g, 0.5, &ReciprocationModel::Certain, None).unwrap();
        assert_eq!(t.graph.node_count(), 6);
        assert_eq!(t.graph.arc_count(), 5);
        let b = [0, 2];
        let plain = exact_influence(&g, &b, 0.5, Metric::Retweeters, None).unwrap();
        assert!((t.exact_influence(&t.map_seeds(&b)).unwrap() - (plain + 2.0)).abs() < 1e-12);
    }

    #[test]
    fn follow_back_nobody_reciprocates() {
        let g = graph(3, &[(0, 1), (1, 2), (2, 0)]);
        let t = follow_back_transform(&g, 1.0, &ReciprocationModel::Constant(0.0), None).unwrap();
        assert_eq!(t.exact_influence(&t.map_seeds(&[0, 1])).unwrap(), 2.0);
    }

    #[test]
    fn follow_back_half() {
        let g = graph(4, &[(0, 1), (1, 2), (0, 3), (3, 2)]);
        let model = ReciprocationModel::Constant(0.5);
        let r = model.probabilities(&g).unwrap();
        let t = follow_back_transform(&g, 0.5, &model, None).unwrap();
        for b in [vec![0], vec![1, 3], vec![0, 1, 2, 3]] {
            let direct = exact_influence(&g, &b, 0.5, Metric::Retweeters, Some(&r)).unwrap();
            let via = t.exact_influence(&t.map_seeds(&b)).unwrap() - b.len() as f64;
            assert!((direct - via).abs() < 1e-12, "{b:?}: {direct} vs {via}");
        }
    }

    #[test]
    fn follow_back_response_probability() {
        let g = graph(2, &[(0, 1)]);
        let t = follow_back_transform(&g, 1.0, &ReciprocationModel::Constant(0.5), Some(&[0.5, 1.0])).unwrap();
        // u0' -> u0 fires w.p. 0.25, then u1 follows
        assert!((t.exact_influence(&[2]).unwrap() - 1.5).abs() < 1e-12);
        assert!(follow_back_transform(&g, 1.0, &ReciprocationModel::Certain, Some(&[0.5])).is_err());
    }

    #[test]
    fn reader_empty_graph() {
        let g = SocialGraph::empty(3);
        let t = reader_transform(&g, 0.3).unwrap();
        assert_eq!(t.node_weight.iter().sum::<f64>(), 3.0);
        for u in 0..3 {
            assert_eq!(t.exact_influence(&[u]).unwrap(), 1.0);
        }
    }

    #[test]
    fn reader_chain() {
        let g = graph(2, &[(0, 1)]);
        let t = reader_transform(&g, 1.0).unwrap();
        assert_eq!(t.exact_influence(&[0]).unwrap(), 2.0);
        let half = reader_transform(&g, 0.5).unwrap();
        // u1 always reads; u1'' is the only copy of u1
        assert_eq!(half.exact_influence(&[0]).unwrap(), 2.0);
        assert_eq!(half.exact_influence(&[1]).unwrap(), 1.0);
    }

    #[test]
    fn reader_matches_direct() {
        let g = graph(5, &[(0, 1), (1, 2), (2, 0), (2, 3), (4, 3)]);
        let t = reader_transform(&g, 0.5).unwrap();
        for b in [vec![0], vec![3], vec![4, 1]] {
            let direct = exact_influence(&g, &b, 0.5, Metric::Readers, None).unwrap();
            assert!((t.exact_influence(&b).unwrap() - direct).abs() < 1e-12);
        }
        let full = reader_transform(&g, 1.0).unwrap();
        assert_eq!(full.exact_influence(&[4]).unwrap(), reader_set(&g, &[4, 3]).len() as f64);
    }

    #[test]
    fn original_subgraph_preserved() {
        let g = graph(4, &[(0, 1), (1, 2), (2, 3), (3, 1)]);
        for t in [
            reader_transform(&g, 0.5).unwrap(),
            follow_back_transform(&g, 0.5, &ReciprocationModel::Certain, None).unwrap(),
        ] {
            let inner: Vec<_> = t.graph.arcs().filter(|&(u, v)| u < 4 && v < 4).collect();
            assert_eq!(inner, g.arcs().collect::<Vec<_>>());
            for (i, (u, v)) in t.graph.arcs().enumerate() {
                if u < 4 && v < 4 {
                    assert_eq!(t.arc_probability[i], 0.5);
                }
            }
        }
    }
}
