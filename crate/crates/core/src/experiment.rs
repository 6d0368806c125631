//! Config-driven comparison runs: influence versus K per strategy, per `p`
//! and per metric, written as CSV plus a JSON manifest.

use std::collections::BTreeMap;
use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use serde::Serialize;

use crate::branching::{BranchingModel, SampleSizePolicy};
use crate::error::{Error, Result};
use crate::estimate::{build_sample_bank, InfluenceEstimate, Metric};
use crate::generate::{generate_configuration_graph, DegreeSpec};
use crate::graph::{degree_stats, NodeId, SocialGraph};
use crate::io::{fingerprint, load_graph_file, LoadedGraph, Orientation};
use crate::objective::MonteCarloObjective;
use crate::par;
use crate::reciprocation::ReciprocationModel;
use crate::rng::stream_key;
use crate::select::{
    dynamic_greedy_simulate, effective_degree_order, greedy_select, high_degree_select, random_select, GreedyOptions,
    SelectionResult, Strategy,
};

pub const CSV_HEADER: &str = "strategy,p,metric,K,mean,stderr,ci_low,ci_high,includes_seed_set,elapsed_ms";
pub const DEFAULT_K_GRID: [usize; 8] = [1, 2, 5, 10, 20, 50, 100, 200];

const RANDOM_STRATEGY_STREAM: u64 = 3;
const DYNAMIC_STRATEGY_STREAM: u64 = 4;

#[derive(Clone, Debug, PartialEq)]
pub enum GraphSource {
    /// Edgelist or binary cache, told apart by the cache magic.
    File(PathBuf),
    Synthetic {
        exponent: f64,
        nodes: usize,
        min_degree: u32,
        max_degree: u32,
        seed: u64,
    },
}

impl GraphSource {
    /// Parse `exponent,n,minDeg,maxDeg`.
    pub fn synthetic(spec: &str, seed: u64) -> Result<Self> {
        let parts: Vec<&str> = spec.split(',').map(str::trim).collect();
        let bad = || Error::Config(format!("synthetic spec {spec:?} is not exponent,n,minDeg,maxDeg"));
        if parts.len() != 4 {
            return Err(bad());
        }
        Ok(GraphSource::Synthetic {
            exponent: parts[0].parse().map_err(|_| bad())?,
            nodes: parts[1].parse::<f64>().map_err(|_| bad())? as usize,
            min_degree: parts[2].parse().map_err(|_| bad())?,
            max_degree: parts[3].parse().map_err(|_| bad())?,
            seed,
        })
    }

    pub fn load(&self, orientation: Orientation) -> Result<LoadedGraph> {
        match self {
            GraphSource::File(path) => load_graph_file(path, orientation),
            GraphSource::Synthetic { exponent, nodes, min_degree, max_degree, seed } => {
                let spec = DegreeSpec::power_law(*exponent, *min_degree, *max_degree);
                let graph = generate_configuration_graph(&spec, *nodes, *seed)?;
                Ok(LoadedGraph { id_map: (0..graph.node_count() as u64).collect(), graph, report: Default::default() })
            }
        }
    }
}

impl fmt::Display for GraphSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphSource::File(p) => write!(f, "{}", p.display()),
            GraphSource::Synthetic { exponent, nodes, min_degree, max_degree, seed } => {
                write!(f, "synthetic:{exponent},{nodes},{min_degree},{max_degree}@{seed}")
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SampleCount {
    Fixed(usize),
    Auto,
}

impl FromStr for SampleCount {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "auto" {
            return Ok(SampleCount::Auto);
        }
        match s.parse::<usize>() {
            Ok(n) if n > 0 => Ok(SampleCount::Fixed(n)),
            _ => Err(Error::Config(format!("samples must be a positive count or \"auto\", got {s:?}"))),
        }
    }
}

impl fmt::Display for SampleCount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SampleCount::Fixed(n) => write!(f, "{n}"),
            SampleCount::Auto => f.write_str("auto"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub graph: Option<GraphSource>,
    pub orientation: Orientation,
    pub p_list: Vec<f64>,
    /// Defaults to the largest grid point.
    pub k_max: Option<usize>,
    pub k_grid: Vec<usize>,
    pub strategies: Vec<Strategy>,
    pub metrics: Vec<Metric>,
    pub reciprocation: ReciprocationModel,
    pub samples: SampleCount,
    pub sample_policy: SampleSizePolicy,
    pub base_seed: u64,
    pub output: Option<PathBuf>,
    /// Greedy candidates restricted to the top-M effective degrees.
    pub candidate_pool: Option<usize>,
    pub threads: Option<usize>,
    pub lazy: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            graph: None,
            orientation: Orientation::Propagation,
            p_list: Vec::new(),
            k_max: None,
            k_grid: DEFAULT_K_GRID.to_vec(),
            strategies: vec![Strategy::Greedy, Strategy::HighDegree, Strategy::Random],
            metrics: vec![Metric::Retweeters],
            reciprocation: ReciprocationModel::Certain,
            samples: SampleCount::Auto,
            sample_policy: SampleSizePolicy::default(),
            base_seed: 0,
            output: None,
            candidate_pool: None,
            threads: None,
            lazy: true,
        }
    }
}

fn parse_list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<T>().map_err(|_| Error::Config(format!("{key}: cannot parse {s:?}"))))
        .collect()
}

fn parse_value<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value.parse::<T>().map_err(|_| Error::Config(format!("{key}: cannot parse {value:?}")))
}

fn join<T: fmt::Display>(items: &[T]) -> String {
    items.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

impl ExperimentConfig {
    /// Parse `key = value` lines; `#` starts a comment.
    pub fn from_kv_text(text: &str) -> Result<Self> {
        let mut config = Self::default();
        let mut synthetic: Option<String> = None;
        let mut synthetic_seed: Option<u64> = None;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) =
                line.split_once('=').ok_or_else(|| Error::Config(format!("line {}: expected key=value", i + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "synthetic" => synthetic = Some(value.to_string()),
                "synthetic_seed" => synthetic_seed = Some(parse_value(key, value)?),
                _ => config.set(key, value)?,
            }
        }
        if let Some(spec) = synthetic {
            config.graph = Some(GraphSource::synthetic(&spec, synthetic_seed.unwrap_or(config.base_seed))?);
        }
        Ok(config)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::from_kv_text(&std::fs::read_to_string(path)?)
    }

    /// Apply one setting. `synthetic` takes its generator seed from the
    /// current `seed`.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "graph" => self.graph = Some(GraphSource::File(PathBuf::from(value))),
            "synthetic" => self.graph = Some(GraphSource::synthetic(value, self.base_seed)?),
            "orientation" => {
                self.orientation = match value {
                    "propagation" => Orientation::Propagation,
                    "follows" => Orientation::Follows,
                    _ => return Err(Error::Config(format!("orientation: unknown {value:?}"))),
                }
            }
            "p" => self.p_list = parse_list(key, value)?,
            "k_max" => self.k_max = Some(parse_value(key, value)?),
            "k_grid" => self.k_grid = parse_list(key, value)?,
            "strategies" => self.strategies = parse_list(key, value)?,
            "metrics" => self.metrics = parse_list(key, value)?,
            "recip" => self.reciprocation = parse_value(key, value)?,
            "samples" => self.samples = value.parse()?,
            "epsilon" => self.sample_policy.epsilon = parse_value(key, value)?,
            "confidence" => self.sample_policy.confidence = parse_value(key, value)?,
            "min_samples" => self.sample_policy.min_samples = parse_value(key, value)?,
            "max_samples" => self.sample_policy.max_samples = parse_value(key, value)?,
            "seed" => self.base_seed = parse_value(key, value)?,
            "out" => self.output = Some(PathBuf::from(value)),
            "candidate_pool" => {
                self.candidate_pool = if value == "all" { None } else { Some(parse_value(key, value)?) }
            }
            "threads" => self.threads = Some(parse_value(key, value)?),
            "lazy" => self.lazy = parse_value(key, value)?,
            _ => return Err(Error::Config(format!("unknown key {key:?}"))),
        }
        Ok(())
    }

    pub fn effective_k_max(&self) -> usize {
        self.k_max.unwrap_or_else(|| self.k_grid.iter().copied().max().unwrap_or(0))
    }

    pub fn validate(&self) -> Result<()> {
        if self.graph.is_none() {
            return Err(Error::Config("no graph source (graph or synthetic)".into()));
        }
        if self.output.is_none() {
            return Err(Error::Config("no output path".into()));
        }
        if self.p_list.is_empty() {
            return Err(Error::Config("p list is empty".into()));
        }
        if let Some(p) = self.p_list.iter().find(|&&p| !(p > 0.0 && p <= 1.0)) {
            return Err(Error::Config(format!("p = {p} outside (0, 1]")));
        }
        if self.effective_k_max() == 0 {
            return Err(Error::Config("K_max must be at least 1".into()));
        }
        if self.strategies.is_empty() || self.metrics.is_empty() {
            return Err(Error::Config("need at least one strategy and one metric".into()));
        }
        if self.strategies.contains(&Strategy::Optimal) {
            return Err(Error::Config("the exhaustive optimum is not available in experiments".into()));
        }
        if self.threads == Some(0) || self.candidate_pool == Some(0) {
            return Err(Error::Config("threads and candidate_pool must be positive".into()));
        }
        Ok(())
    }

    /// Canonical settings, one entry per key.
    pub fn echo(&self) -> BTreeMap<String, String> {
        let mut m = BTreeMap::new();
        let mut put = |k: &str, v: String| {
            m.insert(k.to_string(), v);
        };
        if let Some(g) = &self.graph {
            put("graph", g.to_string());
        }
        put("orientation", format!("{:?}", self.orientation).to_lowercase());
        put("p", join(&self.p_list));
        put("k_max", self.effective_k_max().to_string());
        put("k_grid", join(&self.k_grid));
        put("strategies", join(&self.strategies));
        put("metrics", join(&self.metrics));
        put("recip", self.reciprocation.to_string());
        put("samples", self.samples.to_string());
        put("epsilon", self.sample_policy.epsilon.to_string());
        put("confidence", self.sample_policy.confidence.to_string());
        put("min_samples", self.sample_policy.min_samples.to_string());
        put("max_samples", self.sample_policy.max_samples.to_string());
        put("seed", self.base_seed.to_string());
        if let Some(o) = &self.output {
            put("out", o.display().to_string());
        }
        put("candidate_pool", self.candidate_pool.map_or("all".into(), |m| m.to_string()));
        put("lazy", self.lazy.to_string());
        m
    }
}

/// `results.csv` -> `results.manifest.json`.
pub fn manifest_path(csv: &Path) -> PathBuf {
    csv.with_extension("manifest.json")
}

#[derive(Clone, Debug, Serialize)]
pub struct GraphInfo {
    pub source: String,
    pub fingerprint: String,
    pub nodes: usize,
    pub arcs: usize,
    pub mean_out_degree: f64,
    pub second_moment_out_degree: f64,
}

/// Per-`p` sampling record.
#[derive(Clone, Debug, Serialize)]
pub struct CellInfo {
    pub p: f64,
    pub effective_density: f64,
    pub mean_offspring: f64,
    pub critical_p: f64,
    pub p_ext: f64,
    pub recommended_samples: usize,
    pub samples_used: usize,
    /// Sample seeds are `first_seed..first_seed + samples_used`.
    pub first_seed: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunInfo {
    pub strategy: Strategy,
    pub p: f64,
    pub metric: Metric,
    /// External ids, in pick order.
    pub picks: Vec<u64>,
    pub candidate_pool: Option<usize>,
    pub attempts: Option<usize>,
    pub elapsed_ms: u128,
}

#[derive(Clone, Debug, Serialize)]
pub struct Manifest {
    pub status: String,
    pub error: Option<String>,
    pub version: String,
    pub parallel: bool,
    pub base_seed: u64,
    pub random_strategy_seed: u64,
    pub dynamic_strategy_seed: u64,
    pub graph: Option<GraphInfo>,
    pub config: BTreeMap<String, String>,
    pub cells: Vec<CellInfo>,
    pub runs: Vec<RunInfo>,
    pub rows: usize,
}

#[derive(Clone, Debug)]
pub struct ExperimentReport {
    pub csv_path: PathBuf,
    pub manifest_path: PathBuf,
    pub manifest: Manifest,
}

fn bool_str(b: bool) -> &'static str {
    if b {
        "true"
    } else {
        "false"
    }
}

/// `strategy,p,metric` followed by one estimate at prefix size `k`.
fn write_row<W: Write>(
    w: &mut W,
    cell: &str,
    k: usize,
    e: &InfluenceEstimate,
    includes_seeds: bool,
    elapsed_ms: u128,
) -> std::io::Result<()> {
    writeln!(
        w,
        "{cell},{k},{},{},{},{},{},{elapsed_ms}",
        e.mean,
        e.stderr,
        e.ci95.0,
        e.ci95.1,
        bool_str(includes_seeds)
    )
}

/// Drop the trailing `elapsed_ms` column so runs can be compared byte for byte.
pub fn strip_elapsed(csv: &str) -> String {
    csv.lines().map(|l| l.rsplit_once(',').map_or(l, |(head, _)| head)).collect::<Vec<_>>().join("\n")
}

struct Runner<'a> {
    config: &'a ExperimentConfig,
    loaded: &'a LoadedGraph,
    reciprocation: Vec<f64>,
    pool: Option<Vec<NodeId>>,
}

impl Runner<'_> {
    fn graph(&self) -> &SocialGraph {
        &self.loaded.graph
    }

    fn options(&self) -> GreedyOptions {
        GreedyOptions { lazy: self.config.lazy, candidates: self.pool.clone() }
    }

    fn run_strategy(
        &self,
        strategy: Strategy,
        objective: &MonteCarloObjective<'_>,
        certain: &MonteCarloObjective<'_>,
    ) -> Result<SelectionResult> {
        let k = self.config.effective_k_max();
        let n = self.graph().node_count();
        let seed = self.config.base_seed;
        match strategy {
            Strategy::Greedy => greedy_select(objective, k, self.options()),
            Strategy::HighDegree => {
                let mut r = high_degree_select(self.graph(), k, &self.config.reciprocation)?;
                r.evaluate(objective);
                Ok(r)
            }
            Strategy::Random => {
                let mut r = random_select(self.graph(), k.min(n), stream_key(seed, RANDOM_STRATEGY_STREAM))?;
                r.k = k;
                r.evaluate(objective);
                Ok(r)
            }
            Strategy::DynamicGreedy => dynamic_greedy_simulate(
                certain,
                k,
                &self.reciprocation,
                stream_key(seed, DYNAMIC_STRATEGY_STREAM),
                n.max(k),
                self.options(),
            ),
            Strategy::Optimal => Err(Error::Config("the exhaustive optimum is not available in experiments".into())),
        }
    }
}

/// Run every `(p, metric, strategy)` cell, writing CSV rows as they finish.
/// On failure the rows written so far stay on disk and the manifest is marked
/// `partial`.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let csv_path = config.output.clone().expect("validated");
    let manifest_path = manifest_path(&csv_path);
    let mut manifest = Manifest {
        status: "running".into(),
        error: None,
        version: env!("CARGO_PKG_VERSION").into(),
        parallel: par::is_parallel(),
        base_seed: config.base_seed,
        random_strategy_seed: stream_key(config.base_seed, RANDOM_STRATEGY_STREAM),
        dynamic_strategy_seed: stream_key(config.base_seed, DYNAMIC_STRATEGY_STREAM),
        graph: None,
        config: config.echo(),
        cells: Vec::new(),
        runs: Vec::new(),
        rows: 0,
    };
    let mut out = BufWriter::new(File::create(&csv_path)?);
    let outcome = par::with_threads(config.threads, || run_cells(config, &mut out, &mut manifest)).and_then(|r| r);
    out.flush()?;
    drop(out);
    match &outcome {
        Ok(()) => manifest.status = "complete".into(),
        Err(e) => {
            manifest.status = "partial".into();
            manifest.error = Some(e.to_string());
        }
    }
    let json = serde_json::to_string_pretty(&manifest).map_err(|e| Error::Config(e.to_string()))?;
    std::fs::write(&manifest_path, json + "\n")?;
    outcome?;
    Ok(ExperimentReport { csv_path, manifest_path, manifest })
}

fn run_cells<W: Write>(config: &ExperimentConfig, out: &mut W, manifest: &mut Manifest) -> Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    let loaded = config.graph.as_ref().expect("validated").load(config.orientation)?;
    let graph = &loaded.graph;
    let stats = degree_stats(graph)?;
    manifest.graph = Some(GraphInfo {
        source: config.graph.as_ref().expect("validated").to_string(),
        fingerprint: fingerprint(graph),
        nodes: graph.node_count(),
        arcs: graph.arc_count(),
        mean_out_degree: stats.mean_out_degree,
        second_moment_out_degree: stats.second_moment_out_degree,
    });
    let reciprocation = config.reciprocation.probabilities(graph)?;
    let pool = config.candidate_pool.map(|m| {
        let mut order = effective_degree_order(graph, &reciprocation);
        order.truncate(m);
        order
    });
    let runner = Runner { config, loaded: &loaded, reciprocation, pool };
    let k_max = config.effective_k_max();

    for &p in &config.p_list {
        let model = BranchingModel::new(&stats, p);
        let (mean_offspring, p_ext) = match &model {
            Ok(m) => (m.mean_offspring, m.p_ext),
            Err(_) => (0.0, 1.0),
        };
        let recommended = config.sample_policy.recommend(p_ext)?;
        let n_samples = match config.samples {
            SampleCount::Fixed(n) => n,
            SampleCount::Auto => config.sample_policy.auto(p_ext)?,
        };
        log::info!("p = {p}: p_ext = {p_ext:.4}, recommended {recommended} samples, using {n_samples}");
        manifest.cells.push(CellInfo {
            p,
            effective_density: stats.mean_out_degree * p,
            mean_offspring,
            critical_p: crate::branching::critical_probability(&stats).unwrap_or(f64::INFINITY),
            p_ext,
            recommended_samples: recommended,
            samples_used: n_samples,
            first_seed: config.base_seed,
        });
        let bank = build_sample_bank(graph, p, n_samples, config.base_seed)?;
        for &metric in &config.metrics {
            let objective = MonteCarloObjective::new(graph, &bank, metric, &config.reciprocation)?;
            let certain = MonteCarloObjective::new(graph, &bank, metric, &ReciprocationModel::Certain)?;
            for &strategy in &config.strategies {
                let start = Instant::now();
                let run = runner.run_strategy(strategy, &objective, &certain)?;
                let elapsed_ms = start.elapsed().as_millis();
                let cell = format!("{},{p},{metric}", run.strategy);
                for &k in &config.k_grid {
                    if k > k_max {
                        continue;
                    }
                    let (Some(with), Some(without)) = (run.objective_curve.get(k), run.curve_excluding_seeds.get(k))
                    else {
                        log::warn!("{strategy} at p = {p}: only {} picks, no row for K = {k}", run.picks.len());
                        continue;
                    };
                    write_row(out, &cell, k, with, true, elapsed_ms)?;
                    write_row(out, &cell, k, without, false, elapsed_ms)?;
                    manifest.rows += 2;
                }
                out.flush()?;
                manifest.runs.push(RunInfo {
                    strategy,
                    p,
                    metric,
                    picks: run.picks.iter().map(|&v| loaded.external_id(v)).collect(),
                    candidate_pool: run.candidate_pool,
                    attempts: run.attempts.as_ref().map(Vec::len),
                    elapsed_ms,
                });
            }
        }
    }
    Ok(())
}
