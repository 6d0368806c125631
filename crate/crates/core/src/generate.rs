//! Synthetic follow graphs with a prescribed follower-count distribution.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{NodeId, SocialGraph};

#[derive(Clone, Debug, PartialEq)]
pub enum DegreeSpec {
    /// `P(k) ∝ k^-exponent` for `min_degree <= k <= max_degree`.
    PowerLaw { exponent: f64, min_degree: u32, max_degree: u32 },
    /// Explicit `(degree, weight)` pairs; weights need not sum to one.
    Histogram(Vec<(u32, f64)>),
}

impl DegreeSpec {
    pub fn power_law(exponent: f64, min_degree: u32, max_degree: u32) -> Self {
        Self::PowerLaw { exponent, min_degree, max_degree }
    }

    pub fn regular(degree: u32) -> Self {
        Self::Histogram(vec![(degree, 1.0)])
    }

    /// Normalized probability mass function, ascending in degree.
    pub fn pmf(&self) -> Result<Vec<(u32, f64)>> {
        let raw: Vec<(u32, f64)> = match *self {
            Self::PowerLaw { exponent, min_degree, max_degree } => {
                if !(exponent.is_finite() && exponent > 1.0) {
                    return Err(Error::DegreeSpec(format!("exponent must be > 1, got {exponent}")));
                }
                if min_degree == 0 {
                    return Err(Error::DegreeSpec("power-law minimum degree must be >= 1".into()));
                }
                if min_degree > max_degree {
                    return Err(Error::DegreeSpec(format!("min degree {min_degree} exceeds max degree {max_degree}")));
                }
                (min_degree..=max_degree).map(|k| (k, (k as f64).powf(-exponent))).collect()
            }
            Self::Histogram(ref h) => {
                if h.is_empty() || h.iter().any(|&(_, w)| !(w.is_finite() && w >= 0.0)) {
                    return Err(Error::DegreeSpec("histogram needs finite non-negative weights".into()));
                }
                let mut h = h.clone();
                h.sort_by_key(|&(k, _)| k);
                h
            }
        };
        let total: f64 = raw.iter().map(|&(_, w)| w).sum();
        if total <= 0.0 {
            return Err(Error::DegreeSpec("weights sum to zero".into()));
        }
        Ok(raw.into_iter().map(|(k, w)| (k, w / total)).collect())
    }

    pub fn mean(&self) -> Result<f64> {
        Ok(self.pmf()?.iter().map(|&(k, q)| k as f64 * q).sum())
    }

    pub fn max_degree(&self) -> Result<u32> {
        Ok(self.pmf()?.iter().filter(|&&(_, q)| q > 0.0).map(|&(k, _)| k).max().unwrap_or(0))
    }
}

/// Out-degrees are drawn i.i.d. from `spec`; each node then picks that many
/// distinct followers uniformly among the other nodes. Realized out-degrees
/// equal the drawn ones exactly. Deterministic for a fixed `seed`.
pub fn generate_configuration_graph(spec: &DegreeSpec, node_count: usize, seed: u64) -> Result<SocialGraph> {
    let pmf = spec.pmf()?;
    if node_count <= 1 {
        return Ok(SocialGraph::empty(node_count));
    }
    if node_count > NodeId::MAX as usize {
        return Err(Error::TooLarge(format!("{node_count} nodes")));
    }
    let max_degree = spec.max_degree()?;
    if max_degree as usize >= node_count {
        return Err(Error::DegreeSpec(format!("max degree {max_degree} must be below node count {node_count}")));
    }
    let degrees: Vec<u32> = pmf.iter().map(|&(k, _)| k).collect();
    let picker = WeightedIndex::new(pmf.iter().map(|&(_, q)| q)).map_err(|e| Error::DegreeSpec(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut offsets = Vec::with_capacity(node_count + 1);
    offsets.push(0usize);
    let mut targets: Vec<NodeId> = Vec::new();
    let mut row = Vec::new();
    for u in 0..node_count {
        let k = degrees[picker.sample(&mut rng)] as usize;
        row.clear();
        // sample among the n - 1 other nodes, then shift past u
        row.extend(
            rand::seq::index::sample(&mut rng, node_count - 1, k)
                .into_iter()
                .map(|i| if i >= u { i + 1 } else { i } as NodeId),
        );
        row.sort_unstable();
        targets.extend_from_slice(&row);
        offsets.push(targets.len());
    }
    Ok(SocialGraph::from_sorted_csr(offsets, targets))
}
