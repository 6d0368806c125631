//! Strongly connected components of a pruned graph and the DAG between them.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::graph::NodeId;
use crate::io::{read_u32, read_u64};
use crate::prune::PrunedGraph;

pub type ComponentId = u32;

const UNVISITED: u32 = u32::MAX;
pub const DAG_MAGIC: &[u8; 4] = b"CDG1";

/// Condensation of a directed graph.
///
/// Components are numbered in the order Tarjan's algorithm closes them, which
/// is a reverse topological order: every DAG arc `c -> d` has `d < c`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CondensedDag {
    scc_id: Vec<ComponentId>,
    member_offsets: Vec<u32>,
    members: Vec<NodeId>,
    dag_offsets: Vec<u32>,
    dag_targets: Vec<ComponentId>,
}

pub fn condense(pruned: &PrunedGraph<'_>) -> CondensedDag {
    condense_csr(pruned.offsets(), pruned.targets())
}

/// Iterative Tarjan over a CSR adjacency; stack use is heap-allocated, so
/// path length is not bounded by the call stack.
pub fn condense_csr(offsets: &[usize], targets: &[NodeId]) -> CondensedDag {
    let n = offsets.len() - 1;
    let mut index = vec![UNVISITED; n];
    let mut low = vec![0u32; n];
    let mut scc_id = vec![UNVISITED; n];
    let mut stack: Vec<NodeId> = Vec::new();
    let mut call: Vec<(NodeId, usize)> = Vec::new();
    let mut counter = 0u32;
    let mut components = 0u32;

    for root in 0..n as NodeId {
        if index[root as usize] != UNVISITED {
            continue;
        }
        index[root as usize] = counter;
        low[root as usize] = counter;
        counter += 1;
        stack.push(root);
        call.push((root, offsets[root as usize]));

        while let Some(frame) = call.last_mut() {
            let v = frame.0;
            if frame.1 < offsets[v as usize + 1] {
                let w = targets[frame.1];
                frame.1 += 1;
                if index[w as usize] == UNVISITED {
                    index[w as usize] = counter;
                    low[w as usize] = counter;
                    counter += 1;
                    stack.push(w);
                    call.push((w, offsets[w as usize]));
                } else if scc_id[w as usize] == UNVISITED {
                    // visited and still on the Tarjan stack
                    low[v as usize] = low[v as usize].min(index[w as usize]);
                }
            } else {
                call.pop();
                if low[v as usize] == index[v as usize] {
                    loop {
                        let w = stack.pop().expect("v is on the stack");
                        scc_id[w as usize] = components;
                        if w == v {
                            break;
                        }
                    }
                    components += 1;
                }
                if let Some(&(u, _)) = call.last() {
                    low[u as usize] = low[u as usize].min(low[v as usize]);
                }
            }
        }
    }
    CondensedDag::from_assignment(scc_id, components as usize, offsets, targets)
}

impl CondensedDag {
    fn from_assignment(scc_id: Vec<ComponentId>, c: usize, offsets: &[usize], targets: &[NodeId]) -> Self {
        let (member_offsets, members) = group_members(&scc_id, c);
        let mut dag_offsets = Vec::with_capacity(c + 1);
        dag_offsets.push(0u32);
        let mut dag_targets = Vec::new();
        let mut last_seen = vec![UNVISITED; c];
        for comp in 0..c {
            let lo = member_offsets[comp] as usize;
            let hi = member_offsets[comp + 1] as usize;
            for &u in &members[lo..hi] {
                for &v in &targets[offsets[u as usize]..offsets[u as usize + 1]] {
                    let d = scc_id[v as usize];
                    if d as usize != comp && last_seen[d as usize] != comp as u32 {
                        last_seen[d as usize] = comp as u32;
                        dag_targets.push(d);
                    }
                }
            }
            dag_offsets.push(dag_targets.len() as u32);
        }
        Self { scc_id, member_offsets, members, dag_offsets, dag_targets }
    }

    pub fn node_count(&self) -> usize {
        self.scc_id.len()
    }

    pub fn component_count(&self) -> usize {
        self.member_offsets.len() - 1
    }

    pub fn dag_arc_count(&self) -> usize {
        self.dag_targets.len()
    }

    #[inline]
    pub fn component_of(&self, v: NodeId) -> ComponentId {
        self.scc_id[v as usize]
    }

    pub fn scc_ids(&self) -> &[ComponentId] {
        &self.scc_id
    }

    /// Component weight (number of nodes).
    #[inline]
    pub fn size(&self, c: ComponentId) -> u32 {
        self.member_offsets[c as usize + 1] - self.member_offsets[c as usize]
    }

    #[inline]
    pub fn members(&self, c: ComponentId) -> &[NodeId] {
        &self.members[self.member_offsets[c as usize] as usize..self.member_offsets[c as usize + 1] as usize]
    }

    #[inline]
    pub fn successors(&self, c: ComponentId) -> &[ComponentId] {
        &self.dag_targets[self.dag_offsets[c as usize] as usize..self.dag_offsets[c as usize + 1] as usize]
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        w.write_all(DAG_MAGIC)?;
        w.write_all(&(self.node_count() as u64).to_le_bytes())?;
        w.write_all(&(self.component_count() as u64).to_le_bytes())?;
        w.write_all(&(self.dag_arc_count() as u64).to_le_bytes())?;
        for &c in &self.scc_id {
            w.write_all(&c.to_le_bytes())?;
        }
        for &o in &self.dag_offsets {
            w.write_all(&(o as u64).to_le_bytes())?;
        }
        for &t in &self.dag_targets {
            w.write_all(&t.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic).map_err(|e| Error::BadCache(e.to_string()))?;
        if &magic != DAG_MAGIC {
            return Err(Error::BadCache("wrong condensed-DAG magic".into()));
        }
        let n = read_u64(&mut r)? as usize;
        let c = read_u64(&mut r)? as usize;
        let m = read_u64(&mut r)? as usize;
        if c > n || m > u32::MAX as usize {
            return Err(Error::BadCache("inconsistent counts".into()));
        }
        let scc_id = (0..n).map(|_| read_u32(&mut r)).collect::<Result<Vec<_>>>()?;
        let dag_offsets = (0..=c).map(|_| read_u64(&mut r).map(|x| x as u32)).collect::<Result<Vec<_>>>()?;
        let dag_targets = (0..m).map(|_| read_u32(&mut r)).collect::<Result<Vec<_>>>()?;
        if scc_id.iter().any(|&x| x as usize >= c)
            || dag_offsets[0] != 0
            || dag_offsets[c] as usize != m
            || dag_offsets.windows(2).any(|w| w[0] > w[1])
        {
            return Err(Error::BadCache("component ids or offsets out of range".into()));
        }
        for comp in 0..c {
            let row = &dag_targets[dag_offsets[comp] as usize..dag_offsets[comp + 1] as usize];
            if row.iter().any(|&d| d as usize >= comp) {
                return Err(Error::BadCache("DAG arcs must point to lower component ids".into()));
            }
        }
        let (member_offsets, members) = group_members(&scc_id, c);
        if member_offsets.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::BadCache("empty component".into()));
        }
        Ok(Self { scc_id, member_offsets, members, dag_offsets, dag_targets })
    }
}

/// Counting sort of nodes by component; members stay in ascending node order.
fn group_members(scc_id: &[ComponentId], c: usize) -> (Vec<u32>, Vec<NodeId>) {
    let mut member_offsets = vec![0u32; c + 1];
    for &s in scc_id {
        member_offsets[s as usize + 1] += 1;
    }
    for i in 0..c {
        member_offsets[i + 1] += member_offsets[i];
    }
    let mut fill = member_offsets.clone();
    let mut members = vec![0; scc_id.len()];
    for (v, &s) in scc_id.iter().enumerate() {
        members[fill[s as usize] as usize] = v as NodeId;
        fill[s as usize] += 1;
    }
    (member_offsets, members)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::SocialGraph;
    use crate::prune::prune;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn dag_of(n: usize, arcs: &[(u32, u32)]) -> CondensedDag {
        let (g, _) = SocialGraph::from_arcs(n, arcs.iter().copied()).unwrap();
        condense(&prune(&g, 1.0, 0))
    }

    /// O(n^2) mutual-reachability oracle.
    fn reachability(n: usize, arcs: &[(u32, u32)]) -> Vec<Vec<bool>> {
        let mut adj = vec![Vec::new(); n];
        for &(u, v) in arcs {
            adj[u as usize].push(v as usize);
        }
        (0..n)
            .map(|s| {
                let mut seen = vec![false; n];
                seen[s] = true;
                let mut queue = vec![s];
                while let Some(u) = queue.pop() {
                    for &v in &adj[u] {
                        if !seen[v] {
                            seen[v] = true;
                            queue.push(v);
                        }
                    }
                }
                seen
            })
            .collect()
    }

    #[test]
    fn dag_input_is_left_alone() {
        let arcs = [(0, 1), (0, 2), (1, 3), (2, 3), (3, 4)];
        let d = dag_of(5, &arcs);
        assert_eq!(d.component_count(), 5);
        assert_eq!(d.dag_arc_count(), arcs.len());
        for &(u, v) in &arcs {
            assert!(d.successors(d.component_of(u)).contains(&d.component_of(v)));
        }
    }

    #[test]
    fn cycle_collapses() {
        let n = 7u32;
        let arcs: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        let d = dag_of(n as usize, &arcs);
        assert_eq!(d.component_count(), 1);
        assert_eq!(d.size(0), n);
        assert_eq!(d.dag_arc_count(), 0);
    }

    #[test]
    fn parallel_arcs_between_components_are_merged() {
        // {0,1} and {2,3} cycles joined by two arcs
        let d = dag_of(4, &[(0, 1), (1, 0), (2, 3), (3, 2), (0, 2), (1, 3)]);
        assert_eq!(d.component_count(), 2);
        assert_eq!(d.dag_arc_count(), 1);
    }

    #[test]
    fn long_path_does_not_overflow() {
        let n = 1_000_000u32;
        let arcs: Vec<_> = (0..n - 1).map(|i| (i, i + 1)).chain([(n - 1, 0)]).collect();
        let d = dag_of(n as usize, &arcs);
        assert_eq!(d.component_count(), 1);
    }

    #[test]
    fn partition_matches_pairwise_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        for _ in 0..1000 {
            let n = rng.random_range(1..=50usize);
            let arcs: Vec<(u32, u32)> = (0..n as u32)
                .flat_map(|u| (0..n as u32).map(move |v| (u, v)))
                .filter(|&(u, v)| u != v)
                .filter(|_| rng.random_bool(0.1))
                .collect();
            let d = dag_of(n, &arcs);
            let r = reachability(n, &arcs);
            for (u, row) in r.iter().enumerate() {
                for (v, &forward) in row.iter().enumerate() {
                    let same = d.component_of(u as u32) == d.component_of(v as u32);
                    assert_eq!(same, forward && r[v][u]);
                }
            }
            let total: u32 = (0..d.component_count() as u32).map(|c| d.size(c)).sum();
            assert_eq!(total as usize, n);
            for c in 0..d.component_count() as u32 {
                assert!(d.successors(c).iter().all(|&s| s < c));
            }
        }
    }

    #[test]
    fn binary_round_trip() {
        let d = dag_of(6, &[(0, 1), (1, 0), (1, 2), (3, 4), (4, 5), (5, 3), (2, 3)]);
        let mut buf = Vec::new();
        d.write_to(&mut buf).unwrap();
        assert_eq!(CondensedDag::read_from(buf.as_slice()).unwrap(), d);
        buf[0] = b'X';
        assert!(CondensedDag::read_from(buf.as_slice()).is_err());
    }
}
