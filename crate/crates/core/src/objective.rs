//! Set functions that selection strategies maximize.
//!
//! An [`Objective`] evaluates the expected influence of a growing set of
//! followings `B`. The Monte Carlo version works on a shared [`SampleBank`]
//! and keeps each sample's reached set for the current `B`, so a marginal
//! gain only explores what is not reached yet. The exact version enumerates
//! outcomes and is meant for tiny graphs.

use crate::condense::ComponentId;
use crate::error::{Error, Result};
use crate::estimate::{InfluenceEstimate, Metric, SampleBank};
use crate::exact::{exact_influence, MAX_NODES, MAX_UNCERTAIN_ARCS};
use crate::graph::{NodeId, SocialGraph};
use crate::par;
use crate::reach::ReachScratch;
use crate::reciprocation::{outcome_key, reciprocates, ReciprocationModel};

pub trait Objective: Sync {
    type State: Send + Sync;

    fn node_count(&self) -> usize;

    fn metric(&self) -> Metric;

    fn initial_state(&self) -> Self::State;

    /// Expected increase of the objective when `v` is added to the
    /// followings, including the chance that `v` does not follow back.
    fn gain(&self, state: &Self::State, v: NodeId) -> f64;

    fn gains(&self, state: &Self::State, candidates: &[NodeId]) -> Vec<f64> {
        candidates.iter().map(|&v| self.gain(state, v)).collect()
    }

    fn commit(&self, state: &mut Self::State, v: NodeId);

    fn value(&self, state: &Self::State) -> InfluenceEstimate;

    /// Same as [`Objective::value`] but not counting the followings
    /// themselves.
    fn value_excluding_seeds(&self, state: &Self::State) -> InfluenceEstimate;
}

#[inline]
fn test_bit(bits: &[u64], i: usize) -> bool {
    bits[i >> 6] & (1 << (i & 63)) != 0
}

#[inline]
fn set_bit(bits: &mut [u64], i: usize) {
    bits[i >> 6] |= 1 << (i & 63);
}

/// Value of `set` added in order, as `(including, excluding)` the followed
/// accounts themselves.
pub fn evaluate_set<O: Objective>(objective: &O, set: &[NodeId]) -> (InfluenceEstimate, InfluenceEstimate) {
    let mut state = objective.initial_state();
    for &v in set {
        objective.commit(&mut state, v);
    }
    (objective.value(&state), objective.value_excluding_seeds(&state))
}

/// Monte Carlo objective over a sample bank.
///
/// In sample `s`, candidate `v` enters `B_s` only if it follows back in that
/// sample's reciprocation outcome. Marginal gains use the expected form
/// `r_v * mean_s |reach(B_s + v) \ reach(B_s)|`, which keeps per-sample
/// coverage submodular and comparisons between candidates exact integers.
pub struct MonteCarloObjective<'a> {
    graph: &'a SocialGraph,
    bank: &'a SampleBank,
    metric: Metric,
    reciprocation: Option<Vec<f64>>,
    outcome_keys: Vec<u64>,
}

#[derive(Clone, Debug)]
pub struct SampleState {
    reached: Vec<u64>,
    readers: Vec<u64>,
    reached_count: u64,
    reader_count: u64,
    seeds: u64,
}

#[derive(Clone, Debug)]
pub struct McState {
    samples: Vec<SampleState>,
    picked: Vec<u64>,
}

impl<'a> MonteCarloObjective<'a> {
    pub fn new(
        graph: &'a SocialGraph,
        bank: &'a SampleBank,
        metric: Metric,
        reciprocation: &ReciprocationModel,
    ) -> Result<Self> {
        bank.check_graph(graph)?;
        let reciprocation = if reciprocation.is_certain() { None } else { Some(reciprocation.probabilities(graph)?) };
        let outcome_keys = bank.samples().iter().map(|s| outcome_key(s.seed)).collect();
        Ok(Self { graph, bank, metric, reciprocation, outcome_keys })
    }

    fn follow_back(&self, v: NodeId) -> f64 {
        self.reciprocation.as_ref().map_or(1.0, |r| r[v as usize])
    }

    /// New coverage from `v` in sample `s`, assuming `v` follows back.
    fn marginal(&self, s: usize, st: &SampleState, v: NodeId, scratch: &mut ReachScratch) -> u64 {
        let dag = &self.bank.samples()[s].dag;
        let c = dag.component_of(v);
        if test_bit(&st.reached, c as usize) {
            return 0;
        }
        let readers = self.metric == Metric::Readers;
        scratch.begin(dag.component_count(), if readers { dag.node_count() } else { 0 });
        scratch.visit_component(c);
        scratch.stack.push(c);
        let mut total = 0u64;
        while let Some(c) = scratch.stack.pop() {
            if readers {
                for &u in dag.members(c) {
                    for w in std::iter::once(u).chain(self.graph.followers(u).iter().copied()) {
                        if !test_bit(&st.readers, w as usize) && scratch.visit_node(w) {
                            total += 1;
                        }
                    }
                }
            } else {
                total += dag.size(c) as u64;
            }
            for &d in dag.successors(c) {
                if !test_bit(&st.reached, d as usize) && scratch.visit_component(d) {
                    scratch.stack.push(d);
                }
            }
        }
        total
    }

    fn commit_sample(&self, s: usize, st: &mut SampleState, v: NodeId, stack: &mut Vec<ComponentId>) {
        if let Some(r) = &self.reciprocation {
            if !reciprocates(self.outcome_keys[s], v, r[v as usize]) {
                return;
            }
        }
        st.seeds += 1;
        let dag = &self.bank.samples()[s].dag;
        let c = dag.component_of(v);
        if test_bit(&st.reached, c as usize) {
            return;
        }
        set_bit(&mut st.reached, c as usize);
        stack.clear();
        stack.push(c);
        while let Some(c) = stack.pop() {
            st.reached_count += dag.size(c) as u64;
            if self.metric == Metric::Readers {
                for &u in dag.members(c) {
                    for w in std::iter::once(u).chain(self.graph.followers(u).iter().copied()) {
                        if !test_bit(&st.readers, w as usize) {
                            set_bit(&mut st.readers, w as usize);
                            st.reader_count += 1;
                        }
                    }
                }
            }
            for &d in dag.successors(c) {
                if !test_bit(&st.reached, d as usize) {
                    set_bit(&mut st.reached, d as usize);
                    stack.push(d);
                }
            }
        }
    }

    fn scale(&self, v: NodeId, total: u64) -> f64 {
        self.follow_back(v) * (total as f64 / self.bank.len() as f64)
    }

    fn per_sample(&self, state: &McState, f: impl Fn(&SampleState) -> u64) -> Vec<f64> {
        state.samples.iter().map(|st| f(st) as f64).collect()
    }

    fn covered(&self, st: &SampleState) -> u64 {
        match self.metric {
            Metric::Retweeters => st.reached_count,
            Metric::Readers => st.reader_count,
        }
    }
}

impl Objective for MonteCarloObjective<'_> {
    type State = McState;

    fn node_count(&self) -> usize {
        self.graph.node_count()
    }

    fn metric(&self) -> Metric {
        self.metric
    }

    fn initial_state(&self) -> McState {
        let node_words = match self.metric {
            Metric::Readers => self.graph.node_count().div_ceil(64),
            Metric::Retweeters => 0,
        };
        let samples = self
            .bank
            .samples()
            .iter()
            .map(|s| SampleState {
                reached: vec![0; s.dag.component_count().div_ceil(64)],
                readers: vec![0; node_words],
                reached_count: 0,
                reader_count: 0,
                seeds: 0,
            })
            .collect();
        McState { samples, picked: vec![0; self.graph.node_count().div_ceil(64)] }
    }

    fn gain(&self, state: &McState, v: NodeId) -> f64 {
        if self.follow_back(v) == 0.0 {
            return 0.0;
        }
        let parts = par::map_range_init(self.bank.len(), ReachScratch::new, |scratch, s| {
            self.marginal(s, &state.samples[s], v, scratch)
        });
        self.scale(v, parts.iter().sum())
    }

    fn gains(&self, state: &McState, candidates: &[NodeId]) -> Vec<f64> {
        par::map_init(candidates, ReachScratch::new, |scratch, &v| {
            if self.follow_back(v) == 0.0 {
                return 0.0;
            }
            let total = (0..self.bank.len()).map(|s| self.marginal(s, &state.samples[s], v, scratch)).sum();
            self.scale(v, total)
        })
    }

    fn commit(&self, state: &mut McState, v: NodeId) {
        if test_bit(&state.picked, v as usize) {
            return;
        }
        set_bit(&mut state.picked, v as usize);
        par::for_each_mut(&mut state.samples, Vec::new, |stack, s, st| self.commit_sample(s, st, v, stack));
    }

    fn value(&self, state: &McState) -> InfluenceEstimate {
        InfluenceEstimate::from_values(&self.per_sample(state, |st| self.covered(st)), self.metric)
    }

    fn value_excluding_seeds(&self, state: &McState) -> InfluenceEstimate {
        InfluenceEstimate::from_values(&self.per_sample(state, |st| self.covered(st) - st.seeds), self.metric)
    }
}

/// Exact objective by outcome enumeration; tiny graphs only.
pub struct ExactObjective<'a> {
    graph: &'a SocialGraph,
    p: f64,
    metric: Metric,
    reciprocation: Option<Vec<f64>>,
}

#[derive(Clone, Debug)]
pub struct ExactState {
    picks: Vec<NodeId>,
    value: f64,
}

impl<'a> ExactObjective<'a> {
    pub fn new(graph: &'a SocialGraph, p: f64, metric: Metric, reciprocation: &ReciprocationModel) -> Result<Self> {
        if graph.node_count() > MAX_NODES || (p > 0.0 && p < 1.0 && graph.arc_count() > MAX_UNCERTAIN_ARCS) {
            return Err(Error::TooLarge(format!(
                "{} nodes / {} arcs is beyond exact enumeration",
                graph.node_count(),
                graph.arc_count()
            )));
        }
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidArgument(format!("p = {p} outside [0, 1]")));
        }
        let reciprocation = if reciprocation.is_certain() { None } else { Some(reciprocation.probabilities(graph)?) };
        Ok(Self { graph, p, metric, reciprocation })
    }

    pub fn evaluate(&self, set: &[NodeId]) -> f64 {
        exact_influence(self.graph, set, self.p, self.metric, self.reciprocation.as_deref())
            .expect("instance size checked at construction")
    }
}

impl Objective for ExactObjective<'_> {
    type State = ExactState;

    fn node_count(&self) -> usize {
        self.graph.node_count()
    }

    fn metric(&self) -> Metric {
        self.metric
    }

    fn initial_state(&self) -> ExactState {
        ExactState { picks: Vec::new(), value: 0.0 }
    }

    fn gain(&self, state: &ExactState, v: NodeId) -> f64 {
        if state.picks.contains(&v) {
            return 0.0;
        }
        let mut set = state.picks.clone();
        set.push(v);
        self.evaluate(&set) - state.value
    }

    fn commit(&self, state: &mut ExactState, v: NodeId) {
        if !state.picks.contains(&v) {
            state.picks.push(v);
            state.value = self.evaluate(&state.picks);
        }
    }

    fn value(&self, state: &ExactState) -> InfluenceEstimate {
        InfluenceEstimate::exact(state.value, self.metric)
    }

    fn value_excluding_seeds(&self, state: &ExactState) -> InfluenceEstimate {
        let expected_seeds: f64 = match &self.reciprocation {
            None => state.picks.len() as f64,
            Some(r) => state.picks.iter().map(|&v| r[v as usize]).sum(),
        };
        InfluenceEstimate::exact(state.value - expected_seeds, self.metric)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimate::{build_sample_bank, estimate_influence};
    use crate::generate::{generate_configuration_graph, DegreeSpec};

    fn graph() -> SocialGraph {
        generate_configuration_graph(&DegreeSpec::power_law(2.1, 1, 30), 300, 8).unwrap()
    }

    #[test]
    fn incremental_state_matches_direct_estimate() {
        let g = graph();
        let bank = build_sample_bank(&g, 0.35, 12, 3).unwrap();
        for metric in [Metric::Retweeters, Metric::Readers] {
            let obj = MonteCarloObjective::new(&g, &bank, metric, &ReciprocationModel::Certain).unwrap();
            let mut st = obj.initial_state();
            let mut picks = Vec::new();
            for v in [5u32, 17, 5, 200, 42] {
                let predicted = obj.gain(&st, v);
                let before = obj.value(&st).mean;
                obj.commit(&mut st, v);
                picks.push(v);
                let after = obj.value(&st);
                let direct = estimate_influence(&bank, &g, &picks, metric).unwrap();
                assert_eq!(after.mean, direct.mean);
                assert!((after.mean - before - predicted).abs() < 1e-9);
                let without = obj.value_excluding_seeds(&st).mean;
                assert!(without <= after.mean);
            }
        }
    }

    #[test]
    fn batch_and_single_gains_agree() {
        let g = graph();
        let bank = build_sample_bank(&g, 0.5, 6, 0).unwrap();
        let obj = MonteCarloObjective::new(&g, &bank, Metric::Readers, &ReciprocationModel::RatioFormula).unwrap();
        let mut st = obj.initial_state();
        obj.commit(&mut st, 1);
        let cands: Vec<NodeId> = (0..50).collect();
        let batch = obj.gains(&st, &cands);
        for (&v, &g) in cands.iter().zip(&batch) {
            assert_eq!(g, obj.gain(&st, v));
        }
    }

    #[test]
    fn zero_follow_back_contributes_nothing() {
        let g = graph();
        let bank = build_sample_bank(&g, 0.5, 6, 0).unwrap();
        let obj = MonteCarloObjective::new(&g, &bank, Metric::Retweeters, &ReciprocationModel::Constant(0.0)).unwrap();
        let mut st = obj.initial_state();
        assert_eq!(obj.gain(&st, 3), 0.0);
        obj.commit(&mut st, 3);
        assert_eq!(obj.value(&st).mean, 0.0);
    }

    #[test]
    fn exact_objective_tracks_reciprocation() {
        let (g, _) = SocialGraph::from_arcs(3, [(0, 1), (1, 2)]).unwrap();
        let model = ReciprocationModel::Table(vec![0.5, 1.0, 1.0]);
        let obj = ExactObjective::new(&g, 1.0, Metric::Retweeters, &model).unwrap();
        let mut st = obj.initial_state();
        assert_eq!(obj.gain(&st, 0), 1.5);
        obj.commit(&mut st, 0);
        assert_eq!(obj.value(&st).mean, 1.5);
        assert_eq!(obj.value_excluding_seeds(&st).mean, 1.0);
        assert!(ExactObjective::new(&graph(), 0.5, Metric::Readers, &model).is_err());
    }
}
