//! Reference implementations used only by tests: plain BFS and brute-force
//! enumeration over every arc outcome, sharing no code with the library.

#![allow(dead_code)]

use std::collections::VecDeque;

use followcast::{Metric, SocialGraph};
use rand::Rng;

/// Random simple digraph: `n` nodes, up to `max_arcs` distinct non-loop arcs.
pub fn random_arcs<R: Rng>(rng: &mut R, n: usize, max_arcs: usize) -> Vec<(u32, u32)> {
    let mut pairs: Vec<(u32, u32)> =
        (0..n as u32).flat_map(|u| (0..n as u32).filter(move |&v| v != u).map(move |v| (u, v))).collect();
    let m = rng.random_range(0..=max_arcs.min(pairs.len()));
    let mut arcs = Vec::with_capacity(m);
    for _ in 0..m {
        let i = rng.random_range(0..pairs.len());
        arcs.push(pairs.swap_remove(i));
    }
    arcs
}

pub fn build(n: usize, arcs: &[(u32, u32)]) -> SocialGraph {
    SocialGraph::from_arcs(n, arcs.iter().copied()).unwrap().0
}

/// Random nonempty subset of `0..n` with at most `max` members, sorted.
pub fn random_set<R: Rng>(rng: &mut R, n: usize, max: usize) -> Vec<u32> {
    let size = rng.random_range(1..=max.min(n));
    let mut all: Vec<u32> = (0..n as u32).collect();
    let mut out = Vec::with_capacity(size);
    for _ in 0..size {
        let i = rng.random_range(0..all.len());
        out.push(all.swap_remove(i));
    }
    out.sort_unstable();
    out
}

pub fn bfs_reach(n: usize, arcs: &[(u32, u32)], sources: &[u32]) -> Vec<u32> {
    let mut adj = vec![Vec::new(); n];
    for &(u, v) in arcs {
        adj[u as usize].push(v);
    }
    let mut seen = vec![false; n];
    let mut queue = VecDeque::new();
    for &s in sources {
        if !seen[s as usize] {
            seen[s as usize] = true;
            queue.push_back(s);
        }
    }
    while let Some(u) = queue.pop_front() {
        for &v in &adj[u as usize] {
            if !seen[v as usize] {
                seen[v as usize] = true;
                queue.push_back(v);
            }
        }
    }
    (0..n as u32).filter(|&v| seen[v as usize]).collect()
}

fn count(n: usize, arcs: &[(u32, u32)], kept: &[(u32, u32)], seeds: &[u32], metric: Metric) -> usize {
    let active = bfs_reach(n, kept, seeds);
    match metric {
        Metric::Retweeters => active.len(),
        Metric::Readers => {
            let mut seen = vec![false; n];
            for &v in &active {
                seen[v as usize] = true;
            }
            for &(u, v) in arcs {
                if active.binary_search(&u).is_ok() {
                    seen[v as usize] = true;
                }
            }
            seen.iter().filter(|&&b| b).count()
        }
    }
}

/// Expected metric by enumerating all `2^m` retention patterns and, with
/// `reciprocation`, all follow-back patterns of the seeds.
pub fn oracle_influence(
    n: usize,
    arcs: &[(u32, u32)],
    seeds: &[u32],
    p: f64,
    metric: Metric,
    reciprocation: Option<&[f64]>,
) -> f64 {
    assert!(arcs.len() <= 20 && seeds.len() <= 12);
    let mut total = 0.0;
    let seed_patterns = if reciprocation.is_some() { 1u32 << seeds.len() } else { 1 };
    for sp in 0..seed_patterns {
        let (active_seeds, w_seeds): (Vec<u32>, f64) = match reciprocation {
            None => (seeds.to_vec(), 1.0),
            Some(r) => {
                let mut w = 1.0;
                let mut chosen = Vec::new();
                for (j, &s) in seeds.iter().enumerate() {
                    if sp & (1 << j) != 0 {
                        chosen.push(s);
                        w *= r[s as usize];
                    } else {
                        w *= 1.0 - r[s as usize];
                    }
                }
                (chosen, w)
            }
        };
        if w_seeds == 0.0 {
            continue;
        }
        for pattern in 0u32..1 << arcs.len() {
            let kept: Vec<(u32, u32)> =
                arcs.iter().enumerate().filter(|(i, _)| pattern & (1 << i) != 0).map(|(_, &a)| a).collect();
            let k = kept.len() as i32;
            let w = p.powi(k) * (1.0 - p).powi(arcs.len() as i32 - k);
            if w == 0.0 {
                continue;
            }
            total += w_seeds * w * count(n, arcs, &kept, &active_seeds, metric) as f64;
        }
    }
    total
}

/// Active set distribution as (probability, active nodes) pairs.
pub fn active_outcomes(n: usize, arcs: &[(u32, u32)], seeds: &[u32], p: f64) -> Vec<(f64, Vec<u32>)> {
    (0u32..1 << arcs.len())
        .filter_map(|pattern| {
            let kept: Vec<(u32, u32)> =
                arcs.iter().enumerate().filter(|(i, _)| pattern & (1 << i) != 0).map(|(_, &a)| a).collect();
            let k = kept.len() as i32;
            let w = p.powi(k) * (1.0 - p).powi(arcs.len() as i32 - k);
            (w > 0.0).then(|| (w, bfs_reach(n, &kept, seeds)))
        })
        .collect()
}
