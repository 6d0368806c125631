//! Exact expectations by enumerating every arc-retention outcome.
//!
//! With a constant success probability per arc, the final active set of an
//! order-independent cascade has the same law as the set reachable from the
//! seeds in a randomly thinned graph, so enumerating thinned graphs gives the
//! expectation exactly. Only feasible for tiny graphs; used as a test oracle
//! and for exhaustive optimum search.

use crate::error::{Error, Result};
use crate::estimate::Metric;
use crate::graph::{NodeId, SocialGraph};

/// Largest number of probabilistic arcs enumerated.
pub const MAX_UNCERTAIN_ARCS: usize = 25;
/// Nodes are tracked in a `u64` bitmask.
pub const MAX_NODES: usize = 64;
/// Largest seed set whose follow-back outcomes are enumerated.
pub const MAX_RECIPROCATING_SEEDS: usize = 16;

struct Outcomes {
    base_out: Vec<u64>,
    uncertain: Vec<(usize, u32, f64)>,
}

impl Outcomes {
    /// Arcs with probability 1 go into the base graph. Arcs with probability
    /// strictly between 0 and 1 are enumerated, but only if their tail can be
    /// activated from `seed_mask`; the rest cannot change any outcome.
    fn new(graph: &SocialGraph, arc_probability: &[f64], seed_mask: u64) -> Result<Self> {
        let n = graph.node_count();
        let mut possible = vec![0u64; n];
        for (i, (u, v)) in graph.arcs().enumerate() {
            if arc_probability[i] > 0.0 {
                possible[u as usize] |= 1 << v;
            }
        }
        let live = closure(&possible, seed_mask);
        let mut base_out = vec![0u64; n];
        let mut uncertain = Vec::new();
        for (i, (u, v)) in graph.arcs().enumerate() {
            let q = arc_probability[i];
            if q >= 1.0 {
                base_out[u as usize] |= 1 << v;
            } else if q > 0.0 && live & (1 << u) != 0 {
                uncertain.push((u as usize, v, q));
            }
        }
        if uncertain.len() > MAX_UNCERTAIN_ARCS {
            return Err(Error::TooLarge(format!(
                "{} probabilistic arcs to enumerate (limit {MAX_UNCERTAIN_ARCS})",
                uncertain.len()
            )));
        }
        Ok(Self { base_out, uncertain })
    }

    fn for_each<F: FnMut(f64, &[u64])>(&self, mut f: F) {
        let mut out = self.base_out.clone();
        self.recurse(0, 1.0, &mut out, &mut f);
    }

    fn recurse<F: FnMut(f64, &[u64])>(&self, i: usize, weight: f64, out: &mut Vec<u64>, f: &mut F) {
        if i == self.uncertain.len() {
            f(weight, out);
            return;
        }
        let (u, v, q) = self.uncertain[i];
        self.recurse(i + 1, weight * (1.0 - q), out, f);
        out[u] |= 1 << v;
        self.recurse(i + 1, weight * q, out, f);
        out[u] &= !(1 << v);
    }
}

/// Nodes reachable from `from` through `out` adjacency masks.
fn closure(out: &[u64], from: u64) -> u64 {
    let mut reached = from;
    let mut frontier = from;
    while frontier != 0 {
        let mut next = 0u64;
        let mut f = frontier;
        while f != 0 {
            next |= out[f.trailing_zeros() as usize];
            f &= f - 1;
        }
        frontier = next & !reached;
        reached |= frontier;
    }
    reached
}

fn seed_mask(graph: &SocialGraph, seeds: &[NodeId]) -> Result<u64> {
    if graph.node_count() > MAX_NODES {
        return Err(Error::TooLarge(format!("{} nodes (limit {MAX_NODES})", graph.node_count())));
    }
    let mut mask = 0u64;
    for &s in seeds {
        graph.check_node(s)?;
        mask |= 1 << s;
    }
    Ok(mask)
}

/// `E[sum of node_weight over active nodes]` with independent per-arc
/// success probabilities and `seeds` initially active.
pub fn exact_weighted_influence(
    graph: &SocialGraph,
    arc_probability: &[f64],
    node_weight: &[f64],
    seeds: &[NodeId],
) -> Result<f64> {
    if arc_probability.len() != graph.arc_count() || node_weight.len() != graph.node_count() {
        return Err(Error::InvalidArgument("probability/weight vectors do not match the graph".into()));
    }
    let mask = seed_mask(graph, seeds)?;
    let outcomes = Outcomes::new(graph, arc_probability, mask)?;
    let mut total = 0.0;
    outcomes.for_each(|w, out| {
        let mut reached = closure(out, mask);
        let mut value = 0.0;
        while reached != 0 {
            value += node_weight[reached.trailing_zeros() as usize];
            reached &= reached - 1;
        }
        total += w * value;
    });
    Ok(total)
}

/// Exact `E|phi(B)|` (retweeters) or `E|psi(B)|` (readers) when every arc
/// fires with probability `p`. With `reciprocation`, each `v` in `B` joins the
/// initially active set only with probability `r_v`, independently.
pub fn exact_influence(
    graph: &SocialGraph,
    seeds: &[NodeId],
    p: f64,
    metric: Metric,
    reciprocation: Option<&[f64]>,
) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidArgument(format!("p = {p} outside [0, 1]")));
    }
    let all = seed_mask(graph, seeds)?;
    let members: Vec<usize> = (0..64).filter(|&v| all & (1 << v) != 0).collect();

    let subsets: Vec<(u64, f64)> = match reciprocation {
        None => vec![(all, 1.0)],
        Some(r) => {
            if r.len() != graph.node_count() || r.iter().any(|x| !(0.0..=1.0).contains(x)) {
                return Err(Error::InvalidArgument("reciprocation table must hold one probability per node".into()));
            }
            if members.len() > MAX_RECIPROCATING_SEEDS {
                return Err(Error::TooLarge(format!("{} seeds with uncertain follow-back", members.len())));
            }
            (0u64..1 << members.len())
                .filter_map(|bits| {
                    let mut mask = 0u64;
                    let mut w = 1.0;
                    for (j, &v) in members.iter().enumerate() {
                        if bits & (1 << j) != 0 {
                            mask |= 1 << v;
                            w *= r[v];
                        } else {
                            w *= 1.0 - r[v];
                        }
                    }
                    (w > 0.0).then_some((mask, w))
                })
                .collect()
        }
    };

    let full_out: Vec<u64> = graph.nodes().map(|u| graph.followers(u).iter().fold(0u64, |m, &v| m | 1 << v)).collect();
    let probabilities = vec![p; graph.arc_count()];
    let outcomes = Outcomes::new(graph, &probabilities, all)?;

    let mut total = 0.0;
    outcomes.for_each(|w, out| {
        let mut value = 0.0;
        for &(mask, wr) in &subsets {
            let reached = closure(out, mask);
            let count = match metric {
                Metric::Retweeters => reached.count_ones(),
                Metric::Readers => {
                    let mut seen = reached;
                    let mut f = reached;
                    while f != 0 {
                        seen |= full_out[f.trailing_zeros() as usize];
                        f &= f - 1;
                    }
                    seen.count_ones()
                }
            };
            value += wr * count as f64;
        }
        total += w * value;
    });
    Ok(total)
}
