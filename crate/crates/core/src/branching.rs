//! Branching-process approximation of a cascade: criticality, extinction
//! probability and how many Monte Carlo samples a target precision needs.
//!
//! A retweeter reached along an arc has `k` followers with the size-biased
//! probability `k q_k / <k>`, and each of them retweets with probability `p`.

use std::io::Write;

use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::graph::DegreeStats;

/// Upper-tail mass of the offspring law dropped before renormalizing.
pub const TAIL_MASS: f64 = 1e-12;
/// Binomial terms below this fraction of the mode term are skipped.
const TERM_CUTOFF: f64 = 1e-18;
const SOLVER_TOLERANCE: f64 = 1e-13;
const MAX_ITERATIONS: usize = 100_000;

/// Size-biased follower-count law `k -> k q_k / <k>`.
pub fn size_biased(stats: &DegreeStats) -> Result<Vec<(u32, f64)>> {
    let mean = stats.mean_out_degree;
    if mean <= 0.0 {
        return Err(Error::InvalidArgument("<k> = 0: no arcs to follow".into()));
    }
    Ok(stats
        .degree_histogram
        .iter()
        .filter(|(&k, &q)| k > 0 && q > 0.0)
        .map(|(&k, &q)| (k, k as f64 * q / mean))
        .collect())
}

/// Add `weight * Binomial(k, p)` into `pmf`, walking out from the mode.
fn add_binomial(pmf: &mut Vec<f64>, k: u32, p: f64, weight: f64) {
    if pmf.len() <= k as usize {
        pmf.resize(k as usize + 1, 0.0);
    }
    if p <= 0.0 {
        pmf[0] += weight;
        return;
    }
    if p >= 1.0 {
        pmf[k as usize] += weight;
        return;
    }
    let kf = k as f64;
    let mode = (((kf + 1.0) * p).floor() as u32).min(k);
    let ln_mode = ln_gamma(kf + 1.0) - ln_gamma(mode as f64 + 1.0) - ln_gamma((k - mode) as f64 + 1.0)
        + mode as f64 * p.ln()
        + (k - mode) as f64 * (-p).ln_1p();
    let peak = ln_mode.exp();
    let odds = p / (1.0 - p);
    pmf[mode as usize] += weight * peak;
    let mut term = peak;
    for j in mode..k {
        term *= (kf - j as f64) / (j as f64 + 1.0) * odds;
        if term < TERM_CUTOFF * peak {
            break;
        }
        pmf[j as usize + 1] += weight * term;
    }
    let mut term = peak;
    for j in (1..=mode).rev() {
        term *= j as f64 / (kf - j as f64 + 1.0) / odds;
        if term < TERM_CUTOFF * peak {
            break;
        }
        pmf[j as usize - 1] += weight * term;
    }
}

fn normalize(mut pmf: Vec<f64>) -> Vec<f64> {
    let total: f64 = pmf.iter().sum();
    let mut tail = 0.0;
    while pmf.len() > 1 {
        let last = *pmf.last().expect("nonempty");
        if (tail + last) / total > TAIL_MASS {
            break;
        }
        tail += last;
        pmf.pop();
    }
    let kept = total - tail;
    pmf.iter_mut().for_each(|x| *x /= kept);
    pmf
}

/// Law of the number of retweeting followers of a retweeter, indexed by count.
pub fn offspring_distribution(stats: &DegreeStats, p: f64) -> Result<Vec<f64>> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidArgument(format!("p = {p} outside [0, 1]")));
    }
    let mut pmf = Vec::new();
    for (k, w) in size_biased(stats)? {
        add_binomial(&mut pmf, k, p, w);
    }
    Ok(normalize(pmf))
}

pub fn pmf_mean(pmf: &[f64]) -> f64 {
    pmf.iter().enumerate().map(|(j, &x)| j as f64 * x).sum()
}

/// Probability generating function `G(s)`.
pub fn pgf(pmf: &[f64], s: f64) -> f64 {
    pmf.iter().rev().fold(0.0, |acc, &x| acc * s + x)
}

fn pgf_derivative(pmf: &[f64], s: f64) -> f64 {
    pmf.iter().enumerate().skip(1).rev().fold(0.0, |acc, (j, &x)| acc * s + j as f64 * x)
}

/// `p_c = <k> / <k^2>`, the retweet probability at which a retweeter has one
/// retweeting follower on average.
pub fn critical_probability(stats: &DegreeStats) -> Result<f64> {
    if stats.mean_out_degree <= 0.0 || stats.second_moment_out_degree <= 0.0 {
        return Err(Error::InvalidArgument("degree moments are zero".into()));
    }
    Ok(stats.mean_out_degree / stats.second_moment_out_degree)
}

/// Offspring mean `p <k^2> / <k>`.
pub fn mean_offspring(stats: &DegreeStats, p: f64) -> Result<f64> {
    Ok(p / critical_probability(stats)?)
}

/// Smallest root of `G(s) = s` in `[0, 1]`.
///
/// Starts at 0 and takes the larger of a fixed-point step and a Newton step;
/// below the root both stay below it, and Newton keeps near-critical laws
/// from converging at a crawl.
pub fn extinction_probability(pmf: &[f64]) -> f64 {
    if pmf_mean(pmf) <= 1.0 {
        return 1.0;
    }
    let mut s = 0.0f64;
    for _ in 0..MAX_ITERATIONS {
        let g = pgf(pmf, s);
        if (g - s).abs() <= SOLVER_TOLERANCE {
            return g.clamp(0.0, 1.0);
        }
        let slope = pgf_derivative(pmf, s);
        let newton = if slope < 1.0 { s + (g - s) / (1.0 - slope) } else { g };
        s = g.max(newton).min(1.0);
    }
    log::warn!("extinction probability did not converge; returning {s}");
    s
}

/// Samples from which the two-point model (`N` w.p. `1 - p_ext`, else 0)
/// gives a CI half-width of `epsilon` times the mean at `confidence`:
/// `ceil(z^2 p_ext / ((1 - p_ext) epsilon^2))`, at least 1. Degenerate
/// `p_ext` of 0 or 1 yields `degenerate`.
pub fn sample_size_estimate(p_ext: f64, epsilon: f64, confidence: f64, degenerate: usize) -> Result<usize> {
    if !(0.0..=1.0).contains(&p_ext) {
        return Err(Error::InvalidArgument(format!("p_ext = {p_ext} outside [0, 1]")));
    }
    if epsilon.is_nan() || epsilon <= 0.0 {
        return Err(Error::InvalidArgument(format!("precision {epsilon} must be positive")));
    }
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(Error::InvalidArgument(format!("confidence {confidence} outside (0, 1)")));
    }
    if p_ext <= 0.0 || p_ext >= 1.0 {
        return Ok(degenerate);
    }
    let z = normal_quantile(0.5 + confidence / 2.0);
    let n = (z * z * p_ext / ((1.0 - p_ext) * epsilon * epsilon)).ceil();
    Ok(if n.is_finite() { (n as usize).max(1) } else { usize::MAX })
}

fn normal_quantile(q: f64) -> f64 {
    Normal::standard().inverse_cdf(q)
}

/// Expected retweeters below criticality for a seed with `seed_followers`
/// followers: `d p / (1 - m)`.
pub fn subcritical_mean_size(stats: &DegreeStats, p: f64, seed_followers: u32) -> Result<f64> {
    if p == 0.0 {
        return Ok(0.0);
    }
    let m = mean_offspring(stats, p)?;
    if m >= 1.0 {
        return Err(Error::InvalidArgument(format!("offspring mean {m} >= 1: expected cascade size is infinite")));
    }
    Ok(seed_followers as f64 * p / (1.0 - m))
}

/// How many samples to draw when the count is "auto".
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SampleSizePolicy {
    pub epsilon: f64,
    pub confidence: f64,
    pub min_samples: usize,
    pub max_samples: usize,
}

impl Default for SampleSizePolicy {
    fn default() -> Self {
        Self { epsilon: 0.2, confidence: 0.95, min_samples: 30, max_samples: 200 }
    }
}

impl SampleSizePolicy {
    pub fn recommend(&self, p_ext: f64) -> Result<usize> {
        sample_size_estimate(p_ext, self.epsilon, self.confidence, self.min_samples)
    }

    pub fn auto(&self, p_ext: f64) -> Result<usize> {
        Ok(self.recommend(p_ext)?.clamp(self.min_samples, self.max_samples.max(self.min_samples)))
    }
}

#[derive(Clone, Debug)]
pub struct BranchingModel {
    pub offspring_pmf: Vec<f64>,
    pub mean_offspring: f64,
    pub p: f64,
    pub p_ext: f64,
    pub node_count: usize,
}

impl BranchingModel {
    pub fn new(stats: &DegreeStats, p: f64) -> Result<Self> {
        let offspring_pmf = offspring_distribution(stats, p)?;
        let p_ext = extinction_probability(&offspring_pmf);
        Ok(Self { mean_offspring: pmf_mean(&offspring_pmf), offspring_pmf, p, p_ext, node_count: stats.node_count })
    }
}

/// One line of the `analyze` report.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AnalysisRow {
    pub p: f64,
    pub effective_density: f64,
    pub mean_offspring: f64,
    pub critical_p: f64,
    pub p_ext: f64,
    pub recommended_samples: usize,
    pub auto_samples: usize,
}

pub fn analyze(stats: &DegreeStats, ps: &[f64], policy: &SampleSizePolicy) -> Result<Vec<AnalysisRow>> {
    let critical_p = critical_probability(stats)?;
    ps.iter()
        .map(|&p| {
            let model = BranchingModel::new(stats, p)?;
            Ok(AnalysisRow {
                p,
                effective_density: stats.mean_out_degree * p,
                mean_offspring: model.mean_offspring,
                critical_p,
                p_ext: model.p_ext,
                recommended_samples: policy.recommend(model.p_ext)?,
                auto_samples: policy.auto(model.p_ext)?,
            })
        })
        .collect()
}

pub fn write_analysis_csv<W: Write>(rows: &[AnalysisRow], mut w: W) -> std::io::Result<()> {
    writeln!(w, "p,effective_density,mean_offspring,p_c,p_ext,recommended_samples,auto_samples")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            r.p, r.effective_density, r.mean_offspring, r.critical_p, r.p_ext, r.recommended_samples, r.auto_samples
        )?;
    }
    Ok(())
}
