//! Choosing which accounts `u0` follows.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use itertools::Itertools;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::estimate::{InfluenceEstimate, Metric};
use crate::graph::{NodeId, SocialGraph};
use crate::objective::{ExactObjective, Objective};
use crate::reciprocation::{realize, ReciprocationModel};

/// Upper bound on subsets examined by [`brute_force_optimal`].
pub const MAX_BRUTE_FORCE_SUBSETS: u128 = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    Greedy,
    HighDegree,
    Random,
    DynamicGreedy,
    Optimal,
}

impl Strategy {
    pub fn as_str(&self) -> &'static str {
        match self {
            Strategy::Greedy => "greedy",
            Strategy::HighDegree => "high_degree",
            Strategy::Random => "random",
            Strategy::DynamicGreedy => "dynamic_greedy",
            Strategy::Optimal => "optimal",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "greedy" => Ok(Strategy::Greedy),
            "high_degree" | "high-degree" => Ok(Strategy::HighDegree),
            "random" => Ok(Strategy::Random),
            "dynamic_greedy" | "dynamic-greedy" => Ok(Strategy::DynamicGreedy),
            _ => Err(Error::InvalidArgument(format!("unknown strategy {s:?}"))),
        }
    }
}

/// One proposal of the online strategy.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Attempt {
    pub node: NodeId,
    pub reciprocated: bool,
}

#[derive(Clone, Debug)]
pub struct SelectionResult {
    pub strategy: Strategy,
    pub k: usize,
    pub picks: Vec<NodeId>,
    /// Marginal gain credited to each pick (greedy strategies only).
    pub gains: Vec<f64>,
    /// `objective_curve[i]` is the value of the first `i` picks; empty until
    /// evaluated.
    pub objective_curve: Vec<InfluenceEstimate>,
    pub curve_excluding_seeds: Vec<InfluenceEstimate>,
    pub attempts: Option<Vec<Attempt>>,
    /// Size of the candidate pool when it was restricted.
    pub candidate_pool: Option<usize>,
}

impl SelectionResult {
    fn new(strategy: Strategy, k: usize, picks: Vec<NodeId>) -> Self {
        Self {
            strategy,
            k,
            picks,
            gains: Vec::new(),
            objective_curve: Vec::new(),
            curve_excluding_seeds: Vec::new(),
            attempts: None,
            candidate_pool: None,
        }
    }

    /// Fill both curves by adding the picks one at a time to `objective`.
    pub fn evaluate<O: Objective>(&mut self, objective: &O) {
        let mut state = objective.initial_state();
        self.objective_curve = vec![objective.value(&state)];
        self.curve_excluding_seeds = vec![objective.value_excluding_seeds(&state)];
        for &v in &self.picks {
            objective.commit(&mut state, v);
            self.objective_curve.push(objective.value(&state));
            self.curve_excluding_seeds.push(objective.value_excluding_seeds(&state));
        }
    }

    /// Rows `strategy,K_prefix,mean,stderr,ci_low,ci_high,picks`; picks of a
    /// prefix are `;`-separated and passed through `label`.
    pub fn write_csv<W: Write, F: Fn(NodeId) -> String>(&self, mut w: W, label: F) -> std::io::Result<()> {
        writeln!(w, "strategy,K_prefix,mean,stderr,ci_low,ci_high,picks")?;
        for (k, e) in self.objective_curve.iter().enumerate() {
            let picks = self.picks[..k].iter().map(|&v| label(v)).join(";");
            writeln!(w, "{},{},{},{},{},{},{}", self.strategy, k, e.mean, e.stderr, e.ci95.0, e.ci95.1, picks)?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default)]
pub struct GreedyOptions {
    /// Re-evaluate only the head of a priority queue of stale gains.
    pub lazy: bool,
    /// Restrict candidates; `None` means every node.
    pub candidates: Option<Vec<NodeId>>,
}

impl GreedyOptions {
    pub fn lazy() -> Self {
        Self { lazy: true, candidates: None }
    }

    pub fn eager() -> Self {
        Self { lazy: false, candidates: None }
    }

    pub fn with_candidates(mut self, candidates: Vec<NodeId>) -> Self {
        self.candidates = Some(candidates);
        self
    }
}

#[derive(Clone, Copy, Debug)]
struct Entry {
    gain: f64,
    node: NodeId,
    version: u64,
}

/// Larger gain first, then smaller node id.
fn better(a_gain: f64, a_node: NodeId, b_gain: f64, b_node: NodeId) -> Ordering {
    a_gain.total_cmp(&b_gain).then(b_node.cmp(&a_node))
}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        better(self.gain, self.node, other.gain, other.node)
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl PartialEq for Entry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Entry {}

/// Source of the next best candidate. `version` counts commits; lazy entries
/// computed at an older version are upper bounds by submodularity.
enum Queue {
    Eager(Vec<NodeId>),
    Lazy(BinaryHeap<Entry>),
}

impl Queue {
    fn new<O: Objective>(objective: &O, state: &O::State, candidates: Vec<NodeId>, lazy: bool) -> Self {
        if !lazy {
            return Queue::Eager(candidates);
        }
        let gains = objective.gains(state, &candidates);
        Queue::Lazy(candidates.into_iter().zip(gains).map(|(node, gain)| Entry { gain, node, version: 0 }).collect())
    }

    fn pop_best<O: Objective>(&mut self, objective: &O, state: &O::State, version: u64) -> Option<(NodeId, f64)> {
        match self {
            Queue::Eager(remaining) => {
                let gains = objective.gains(state, remaining);
                let best =
                    (0..remaining.len()).max_by(|&i, &j| better(gains[i], remaining[i], gains[j], remaining[j]))?;
                Some((remaining.swap_remove(best), gains[best]))
            }
            Queue::Lazy(heap) => loop {
                let top = heap.pop()?;
                if top.version == version {
                    return Some((top.node, top.gain));
                }
                let gain = objective.gain(state, top.node);
                heap.push(Entry { gain, node: top.node, version });
            },
        }
    }
}

fn candidate_list(n: usize, candidates: Option<Vec<NodeId>>) -> Result<Vec<NodeId>> {
    match candidates {
        None => Ok((0..n as NodeId).collect()),
        Some(mut c) => {
            c.sort_unstable();
            c.dedup();
            if let Some(&bad) = c.iter().find(|&&v| v as usize >= n) {
                return Err(Error::UnknownNode { node: bad as u64, node_count: n });
            }
            Ok(c)
        }
    }
}

/// Pick `k` followings one at a time, each maximizing the expected marginal
/// gain of `objective`. Ties go to the smaller node id. Lazy and eager modes
/// return identical picks whenever the objective's gains are submodular.
pub fn greedy_select<O: Objective>(objective: &O, k: usize, options: GreedyOptions) -> Result<SelectionResult> {
    let restricted = options.candidates.as_ref().map(|c| c.len());
    let candidates = candidate_list(objective.node_count(), options.candidates)?;
    let mut k_eff = k;
    if k > candidates.len() {
        log::warn!("K = {k} exceeds the {} candidates; truncating", candidates.len());
        k_eff = candidates.len();
    }
    let mut state = objective.initial_state();
    let mut result = SelectionResult::new(Strategy::Greedy, k, Vec::with_capacity(k_eff));
    result.candidate_pool = restricted;
    result.objective_curve.push(objective.value(&state));
    result.curve_excluding_seeds.push(objective.value_excluding_seeds(&state));
    let mut queue = Queue::new(objective, &state, candidates, options.lazy);
    for version in 0..k_eff as u64 {
        let (v, gain) = queue.pop_best(objective, &state, version).expect("k_eff <= candidates");
        objective.commit(&mut state, v);
        result.picks.push(v);
        result.gains.push(gain);
        result.objective_curve.push(objective.value(&state));
        result.curve_excluding_seeds.push(objective.value_excluding_seeds(&state));
    }
    Ok(result)
}

/// Online greedy without advance knowledge of who follows back.
///
/// `objective` must value a node as if it follows back (certain
/// reciprocation): each proposal is the best candidate under that assumption,
/// then `R_v ~ Bernoulli(r_v)` is drawn once from `seed`. Nodes that decline
/// are dropped for good. Stops at `k` follow-backs, `max_attempts` proposals
/// or when candidates run out.
pub fn dynamic_greedy_simulate<O: Objective>(
    objective: &O,
    k: usize,
    reciprocation: &[f64],
    seed: u64,
    max_attempts: usize,
    options: GreedyOptions,
) -> Result<SelectionResult> {
    if max_attempts < k {
        return Err(Error::InvalidArgument(format!("max_attempts {max_attempts} is below K = {k}")));
    }
    if reciprocation.len() != objective.node_count() {
        return Err(Error::InvalidArgument("reciprocation vector does not match the graph".into()));
    }
    let outcome = realize(reciprocation, seed);
    let restricted = options.candidates.as_ref().map(|c| c.len());
    let candidates = candidate_list(objective.node_count(), options.candidates)?;
    let mut state = objective.initial_state();
    let mut result = SelectionResult::new(Strategy::DynamicGreedy, k, Vec::new());
    result.candidate_pool = restricted;
    result.objective_curve.push(objective.value(&state));
    result.curve_excluding_seeds.push(objective.value_excluding_seeds(&state));
    let mut attempts = Vec::new();
    let mut queue = Queue::new(objective, &state, candidates, options.lazy);
    let mut version = 0u64;
    while result.picks.len() < k && attempts.len() < max_attempts {
        let Some((v, gain)) = queue.pop_best(objective, &state, version) else { break };
        let reciprocated = outcome[v as usize];
        attempts.push(Attempt { node: v, reciprocated });
        if reciprocated {
            objective.commit(&mut state, v);
            version += 1;
            result.picks.push(v);
            result.gains.push(gain);
            result.objective_curve.push(objective.value(&state));
            result.curve_excluding_seeds.push(objective.value_excluding_seeds(&state));
        }
    }
    result.attempts = Some(attempts);
    Ok(result)
}

/// All nodes ordered by effective degree `r_v * d_v`, descending, ties by id.
pub fn effective_degree_order(graph: &SocialGraph, reciprocation: &[f64]) -> Vec<NodeId> {
    let key = |v: NodeId| reciprocation[v as usize] * graph.out_degree(v) as f64;
    let mut order: Vec<NodeId> = graph.nodes().collect();
    order.sort_by(|&a, &b| key(b).total_cmp(&key(a)).then(a.cmp(&b)));
    order
}

/// Follow the `k` accounts with the largest effective degree.
pub fn high_degree_select(
    graph: &SocialGraph,
    k: usize,
    reciprocation: &ReciprocationModel,
) -> Result<SelectionResult> {
    let r = reciprocation.probabilities(graph)?;
    let mut order = effective_degree_order(graph, &r);
    order.truncate(k);
    Ok(SelectionResult::new(Strategy::HighDegree, k, order))
}

/// `k` distinct accounts uniformly at random.
pub fn random_select(graph: &SocialGraph, k: usize, seed: u64) -> Result<SelectionResult> {
    let n = graph.node_count();
    if k > n {
        return Err(Error::InvalidArgument(format!("K = {k} exceeds {n} nodes")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let picks = rand::seq::index::sample(&mut rng, n, k).into_iter().map(|i| i as NodeId).collect();
    Ok(SelectionResult::new(Strategy::Random, k, picks))
}

fn binomial(n: u128, k: u128) -> u128 {
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc.saturating_mul(n - i) / (i + 1))
}

/// Best `k`-subset by exhaustive search over exact values. Among equal
/// values the lexicographically first subset wins.
pub fn brute_force_optimal(
    graph: &SocialGraph,
    k: usize,
    p: f64,
    metric: Metric,
    reciprocation: &ReciprocationModel,
) -> Result<(Vec<NodeId>, f64)> {
    let n = graph.node_count();
    if k > n {
        return Err(Error::InvalidArgument(format!("K = {k} exceeds {n} nodes")));
    }
    let subsets = binomial(n as u128, k as u128);
    if subsets > MAX_BRUTE_FORCE_SUBSETS {
        return Err(Error::TooLarge(format!("{subsets} subsets of size {k}")));
    }
    let objective = ExactObjective::new(graph, p, metric, reciprocation)?;
    let mut best: Option<(Vec<NodeId>, f64)> = None;
    for subset in (0..n as NodeId).combinations(k) {
        let value = objective.evaluate(&subset);
        if best.as_ref().is_none_or(|(_, b)| value > *b) {
            best = Some((subset, value));
        }
    }
    Ok(best.expect("at least one subset"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimate::build_sample_bank;
    use crate::generate::{generate_configuration_graph, DegreeSpec};
    use crate::objective::MonteCarloObjective;

    fn graph(n: usize, arcs: &[(u32, u32)]) -> SocialGraph {
        SocialGraph::from_arcs(n, arcs.iter().copied()).unwrap().0
    }

    fn star(m: u32) -> SocialGraph {
        graph(m as usize + 1, &(1..=m).map(|v| (0, v)).collect::<Vec<_>>())
    }

    #[test]
    fn star_center_first() {
        let g = star(6);
        let bank = build_sample_bank(&g, 1.0, 2, 0).unwrap();
        let obj = MonteCarloObjective::new(&g, &bank, Metric::Retweeters, &ReciprocationModel::Certain).unwrap();
        let r = greedy_select(&obj, 1, GreedyOptions::lazy()).unwrap();
        assert_eq!(r.picks, vec![0]);
        assert_eq!(r.objective_curve[1].mean, 7.0);
        let (set, value) = brute_force_optimal(&g, 1, 1.0, Metric::Retweeters, &ReciprocationModel::Certain).unwrap();
        assert_eq!((set, value), (vec![0], 7.0));
    }

    #[test]
    fn disjoint_chains_longer_first() {
        // chain 0->1->2 and chain 3->4
        let g = graph(5, &[(0, 1), (1, 2), (3, 4)]);
        let obj = ExactObjective::new(&g, 1.0, Metric::Retweeters, &ReciprocationModel::Certain).unwrap();
        for opts in [GreedyOptions::lazy(), GreedyOptions::eager()] {
            let r = greedy_select(&obj, 2, opts).unwrap();
            assert_eq!(r.picks, vec![0, 3]);
            assert_eq!(r.gains, vec![3.0, 2.0]);
        }
    }

    #[test]
    fn k_larger_than_graph_truncates() {
        let g = graph(3, &[(0, 1)]);
        let obj = ExactObjective::new(&g, 1.0, Metric::Retweeters, &ReciprocationModel::Certain).unwrap();
        let r = greedy_select(&obj, 10, GreedyOptions::lazy()).unwrap();
        assert_eq!(r.picks, vec![0, 2, 1]);
        assert_eq!(r.k, 10);
    }

    #[test]
    fn restricted_pool() {
        let g = star(4);
        let obj = ExactObjective::new(&g, 1.0, Metric::Retweeters, &ReciprocationModel::Certain).unwrap();
        let r = greedy_select(&obj, 2, GreedyOptions::lazy().with_candidates(vec![3, 1, 3])).unwrap();
        assert_eq!(r.picks, vec![1, 3]);
        assert_eq!(r.candidate_pool, Some(3));
        assert!(greedy_select(&obj, 1, GreedyOptions::lazy().with_candidates(vec![9])).is_err());
    }

    #[test]
    fn high_degree_orders() {
        // degrees: 0 -> 5, 1 -> 3, 2 -> 1
        let arcs: Vec<_> = (3..8).map(|v| (0, v)).chain((3..6).map(|v| (1, v))).chain([(2, 3)]).collect();
        let g = graph(8, &arcs);
        let r = high_degree_select(&g, 2, &ReciprocationModel::Certain).unwrap();
        assert_eq!(r.picks, vec![0, 1]);
    }

    #[test]
    fn effective_degree_uses_reciprocation() {
        // node 0 has 10 followers, node 1 has 4
        let arcs: Vec<_> = (2..12).map(|v| (0, v)).chain((2..6).map(|v| (1, v))).collect();
        let g = graph(12, &arcs);
        let mut table = vec![1.0; 12];
        table[0] = 0.1;
        let r = high_degree_select(&g, 2, &ReciprocationModel::Table(table.clone())).unwrap();
        assert_eq!(r.picks[0], 1);
        // scaling every r_v keeps the order
        let scaled: Vec<f64> = table.iter().map(|x| x * 0.37).collect();
        assert_eq!(effective_degree_order(&g, &table), effective_degree_order(&g, &scaled));
    }

    #[test]
    fn random_selection() {
        let g = SocialGraph::empty(20);
        let all = random_select(&g, 20, 4).unwrap();
        let mut sorted = all.picks.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, (0..20).collect::<Vec<_>>());
        assert_eq!(random_select(&g, 5, 9).unwrap().picks, random_select(&g, 5, 9).unwrap().picks);
        assert!(random_select(&g, 21, 0).is_err());
    }

    #[test]
    fn random_selection_is_uniform() {
        let g = SocialGraph::empty(100);
        let trials = 10_000u64;
        let mut counts = [0u32; 100];
        for seed in 0..trials {
            counts[random_select(&g, 1, seed).unwrap().picks[0] as usize] += 1;
        }
        let expected = trials as f64 / 100.0;
        let sigma = (trials as f64 * 0.01 * 0.99).sqrt();
        assert!(counts.iter().all(|&c| (c as f64 - expected).abs() < 4.0 * sigma), "{counts:?}");
    }

    #[test]
    fn dynamic_extremes() {
        let g = generate_configuration_graph(&DegreeSpec::power_law(2.0, 1, 10), 40, 2).unwrap();
        let bank = build_sample_bank(&g, 0.3, 10, 0).unwrap();
        let obj = MonteCarloObjective::new(&g, &bank, Metric::Retweeters, &ReciprocationModel::Certain).unwrap();
        let all_yes = dynamic_greedy_simulate(&obj, 5, &[1.0; 40], 3, 40, GreedyOptions::lazy()).unwrap();
        let greedy = greedy_select(&obj, 5, GreedyOptions::lazy()).unwrap();
        assert_eq!(all_yes.picks, greedy.picks);
        let all_no = dynamic_greedy_simulate(&obj, 5, &[0.0; 40], 3, 30, GreedyOptions::lazy()).unwrap();
        assert!(all_no.picks.is_empty());
        assert_eq!(all_no.attempts.unwrap().len(), 30);
        let exhausted = dynamic_greedy_simulate(&obj, 5, &[0.0; 40], 3, 100, GreedyOptions::eager()).unwrap();
        assert_eq!(exhausted.attempts.unwrap().len(), 40);
        assert!(dynamic_greedy_simulate(&obj, 5, &[1.0; 40], 3, 4, GreedyOptions::lazy()).is_err());
    }

    #[test]
    fn brute_force_limits() {
        let g = SocialGraph::empty(40);
        assert!(matches!(
            brute_force_optimal(&g, 20, 0.5, Metric::Retweeters, &ReciprocationModel::Certain),
            Err(Error::TooLarge(_))
        ));
        let (set, v) = brute_force_optimal(&star(3), 4, 0.5, Metric::Retweeters, &ReciprocationModel::Certain).unwrap();
        assert_eq!((set, v), (vec![0, 1, 2, 3], 4.0));
    }

    #[test]
    fn curve_csv() {
        let g = star(3);
        let obj = ExactObjective::new(&g, 1.0, Metric::Retweeters, &ReciprocationModel::Certain).unwrap();
        let r = greedy_select(&obj, 2, GreedyOptions::lazy()).unwrap();
        let mut buf = Vec::new();
        r.write_csv(&mut buf, |v| v.to_string()).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], "strategy,K_prefix,mean,stderr,ci_low,ci_high,picks");
        assert_eq!(lines[1], "greedy,0,0,0,0,0,");
        assert_eq!(lines[2], "greedy,1,4,0,4,4,0");
        assert_eq!(lines[3], "greedy,2,4,0,4,4,0;1");
    }
}
