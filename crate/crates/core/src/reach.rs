//! Reachability and reader queries on condensed samples.

use crate::condense::{ComponentId, CondensedDag};
use crate::graph::{NodeId, SocialGraph};

/// Reusable marks for repeated traversals. Marks are epoch-stamped so a new
/// query costs O(1) setup instead of clearing the arrays.
#[derive(Clone, Debug, Default)]
pub struct ReachScratch {
    comp_mark: Vec<u32>,
    node_mark: Vec<u32>,
    epoch: u32,
    pub(crate) stack: Vec<ComponentId>,
}

impl ReachScratch {
    pub fn new() -> Self {
        Self::default()
    }

    /// Start a fresh query over `components` components and `nodes` nodes.
    pub(crate) fn begin(&mut self, components: usize, nodes: usize) {
        if self.comp_mark.len() < components {
            self.comp_mark.resize(components, 0);
        }
        if self.node_mark.len() < nodes {
            self.node_mark.resize(nodes, 0);
        }
        if self.epoch == u32::MAX {
            self.comp_mark.iter_mut().for_each(|m| *m = 0);
            self.node_mark.iter_mut().for_each(|m| *m = 0);
            self.epoch = 0;
        }
        self.epoch += 1;
        self.stack.clear();
    }

    /// Mark component `c`; true if it was not marked in this query.
    #[inline]
    pub(crate) fn visit_component(&mut self, c: ComponentId) -> bool {
        let m = &mut self.comp_mark[c as usize];
        if *m == self.epoch {
            false
        } else {
            *m = self.epoch;
            true
        }
    }

    #[inline]
    pub(crate) fn visit_node(&mut self, v: NodeId) -> bool {
        let m = &mut self.node_mark[v as usize];
        if *m == self.epoch {
            false
        } else {
            *m = self.epoch;
            true
        }
    }
}

impl CondensedDag {
    /// Components reachable from `sources` (each listed once, in visit order).
    pub fn reach_components(&self, sources: &[NodeId], scratch: &mut ReachScratch, out: &mut Vec<ComponentId>) {
        out.clear();
        scratch.begin(self.component_count(), 0);
        for &s in sources {
            let c = self.component_of(s);
            if scratch.visit_component(c) {
                scratch.stack.push(c);
            }
        }
        while let Some(c) = scratch.stack.pop() {
            out.push(c);
            for &d in self.successors(c) {
                if scratch.visit_component(d) {
                    scratch.stack.push(d);
                }
            }
        }
    }

    /// Sorted set of nodes reachable from `sources`, sources included.
    pub fn reach_set(&self, sources: &[NodeId]) -> Vec<NodeId> {
        let mut scratch = ReachScratch::new();
        let mut comps = Vec::new();
        self.reach_components(sources, &mut scratch, &mut comps);
        let mut nodes: Vec<NodeId> = comps.iter().flat_map(|&c| self.members(c).iter().copied()).collect();
        nodes.sort_unstable();
        nodes
    }

    /// `|reach_set(sources)|`, accumulated over component weights.
    pub fn reach_count_with(&self, sources: &[NodeId], scratch: &mut ReachScratch) -> u64 {
        scratch.begin(self.component_count(), 0);
        let mut total = 0u64;
        for &s in sources {
            let c = self.component_of(s);
            if scratch.visit_component(c) {
                scratch.stack.push(c);
            }
        }
        while let Some(c) = scratch.stack.pop() {
            total += self.size(c) as u64;
            for &d in self.successors(c) {
                if scratch.visit_component(d) {
                    scratch.stack.push(d);
                }
            }
        }
        total
    }

    pub fn reach_count(&self, sources: &[NodeId]) -> u64 {
        self.reach_count_with(sources, &mut ReachScratch::new())
    }
}

/// Users who see a tweet once `active` have posted it: the active users and
/// all their followers. Returned sorted.
pub fn reader_set(graph: &SocialGraph, active: &[NodeId]) -> Vec<NodeId> {
    let mut seen = vec![false; graph.node_count()];
    for &u in active {
        seen[u as usize] = true;
        for &v in graph.followers(u) {
            seen[v as usize] = true;
        }
    }
    seen.iter().enumerate().filter(|(_, &s)| s).map(|(v, _)| v as NodeId).collect()
}

/// `|reader_set(active)|` using epoch marks.
pub fn reader_count_with<I>(graph: &SocialGraph, active: I, scratch: &mut ReachScratch) -> u64
where
    I: IntoIterator<Item = NodeId>,
{
    scratch.begin(0, graph.node_count());
    let mut total = 0;
    for u in active {
        if scratch.visit_node(u) {
            total += 1;
        }
        for &v in graph.followers(u) {
            if scratch.visit_node(v) {
                total += 1;
            }
        }
    }
    total
}
