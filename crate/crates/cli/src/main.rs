use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use followcast::branching::{analyze, write_analysis_csv, BranchingModel, SampleSizePolicy};
use followcast::experiment::{run_experiment, ExperimentConfig, GraphSource, SampleCount};
use followcast::io::{fingerprint, save_cache, save_edgelist, save_id_map, LoadedGraph, Orientation};
use followcast::objective::{evaluate_set, MonteCarloObjective};
use followcast::par;
use followcast::select::{
    dynamic_greedy_simulate, effective_degree_order, greedy_select, high_degree_select, random_select, GreedyOptions,
    SelectionResult,
};
use followcast::{build_sample_bank, degree_stats, estimate_influence, Metric, NodeId, ReciprocationModel, Strategy};

#[derive(Parser, Debug)]
#[command(name = "followcast", version, about = "Pick whom to follow so your tweets travel furthest")]
struct Cli {
    /// Worker threads (default: all cores)
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Node, arc and degree-moment summary
    Stats {
        #[command(flatten)]
        graph: GraphArgs,
    },
    /// Write a synthetic power-law graph
    Generate {
        /// exponent,n,minDeg,maxDeg
        #[arg(long)]
        synthetic: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Write the binary cache instead of an edgelist
        #[arg(long)]
        binary: bool,
    },
    /// Convert a graph to the binary cache, optionally with a sample bank
    PruneCache {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long)]
        out: PathBuf,
        /// Where to write the external id of each internal node
        #[arg(long)]
        id_map: Option<PathBuf>,
        /// Also prune and condense samples at this p
        #[arg(long)]
        p: Option<f64>,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        /// Sample bank output (requires --p)
        #[arg(long)]
        bank: Option<PathBuf>,
    },
    /// Choose K accounts to follow
    Select {
        #[command(flatten)]
        graph: GraphArgs,
        #[command(flatten)]
        sampling: SamplingArgs,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value = "greedy")]
        strategy: Strategy,
        /// Restrict greedy candidates to the top-M effective degrees
        #[arg(long)]
        pool: Option<usize>,
        /// Per-prefix CSV of the objective curve
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Expected influence of a given set of followings
    Estimate {
        #[command(flatten)]
        graph: GraphArgs,
        #[command(flatten)]
        sampling: SamplingArgs,
        /// Comma-separated external node ids
        #[arg(long, value_delimiter = ',', required = true)]
        nodes: Vec<u64>,
    },
    /// Branching-process criticality and sample-size table
    Analyze {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long, value_delimiter = ',', required = true)]
        p: Vec<f64>,
        #[arg(long, default_value_t = 0.2)]
        epsilon: f64,
        #[arg(long, default_value_t = 0.95)]
        confidence: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a comparison experiment from a key=value config; flags override it
    Experiment {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        graph: Option<PathBuf>,
        #[arg(long)]
        synthetic: Option<String>,
        #[arg(long)]
        p: Option<String>,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        k_grid: Option<String>,
        #[arg(long)]
        strategies: Option<String>,
        #[arg(long)]
        metric: Option<String>,
        #[arg(long)]
        recip: Option<String>,
        #[arg(long)]
        samples: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        pool: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum OrientationArg {
    Propagation,
    Follows,
}

#[derive(Args, Debug)]
struct GraphArgs {
    /// Edgelist or binary cache
    #[arg(long, conflicts_with = "synthetic", required_unless_present = "synthetic")]
    graph: Option<PathBuf>,
    /// exponent,n,minDeg,maxDeg
    #[arg(long)]
    synthetic: Option<String>,
    /// How to read `a b` lines
    #[arg(long, value_enum, default_value = "propagation")]
    orientation: OrientationArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl GraphArgs {
    fn load(&self) -> anyhow::Result<LoadedGraph> {
        let orientation = match self.orientation {
            OrientationArg::Propagation => Orientation::Propagation,
            OrientationArg::Follows => Orientation::Follows,
        };
        let source = match (&self.graph, &self.synthetic) {
            (Some(path), _) => GraphSource::File(path.clone()),
            (None, Some(spec)) => GraphSource::synthetic(spec, self.seed)?,
            (None, None) => bail!("no graph given"),
        };
        let loaded = source.load(orientation).with_context(|| format!("loading {source}"))?;
        log::info!("loaded {source}: {} nodes, {} arcs", loaded.graph.node_count(), loaded.graph.arc_count());
        Ok(loaded)
    }
}

#[derive(Args, Debug)]
struct SamplingArgs {
    #[arg(long)]
    p: f64,
    #[arg(long, default_value = "retweeters")]
    metric: Metric,
    /// certain | ratio | const=R
    #[arg(long, default_value = "certain")]
    recip: ReciprocationModel,
    /// Count or "auto"
    #[arg(long, default_value = "auto")]
    samples: SampleCount,
}

impl SamplingArgs {
    fn sample_count(&self, loaded: &LoadedGraph) -> anyhow::Result<usize> {
        Ok(match self.samples {
            SampleCount::Fixed(n) => n,
            SampleCount::Auto => {
                let stats = degree_stats(&loaded.graph)?;
                let p_ext = BranchingModel::new(&stats, self.p).map_or(1.0, |m| m.p_ext);
                let n = SampleSizePolicy::default().auto(p_ext)?;
                log::info!("p_ext = {p_ext:.4}; using {n} samples");
                n
            }
        })
    }
}

fn internal_ids(loaded: &LoadedGraph, ids: &[u64]) -> anyhow::Result<Vec<NodeId>> {
    ids.iter().map(|&x| loaded.internal_id(x).with_context(|| format!("node {x} is not in the graph"))).collect()
}

fn stats(graph: &GraphArgs) -> anyhow::Result<()> {
    let loaded = graph.load()?;
    let s = degree_stats(&loaded.graph)?;
    println!("N={}", s.node_count);
    println!("E={}", s.arc_count);
    println!("<k>={}", s.mean_out_degree);
    println!("<k^2>={}", s.second_moment_out_degree);
    println!("max_k={}", s.max_out_degree);
    println!("fingerprint={}", fingerprint(&loaded.graph));
    Ok(())
}

fn select(
    graph: &GraphArgs,
    sampling: &SamplingArgs,
    k: usize,
    strategy: Strategy,
    pool: Option<usize>,
    out: Option<&PathBuf>,
) -> anyhow::Result<()> {
    let loaded = graph.load()?;
    let g = &loaded.graph;
    let n = sampling.sample_count(&loaded)?;
    let bank = build_sample_bank(g, sampling.p, n, graph.seed)?;
    let objective = MonteCarloObjective::new(g, &bank, sampling.metric, &sampling.recip)?;
    let r = sampling.recip.probabilities(g)?;
    let mut options = GreedyOptions::lazy();
    if let Some(m) = pool {
        let mut order = effective_degree_order(g, &r);
        order.truncate(m);
        options = options.with_candidates(order);
    }
    let result: SelectionResult = match strategy {
        Strategy::Greedy => greedy_select(&objective, k, options)?,
        Strategy::HighDegree => {
            let mut s = high_degree_select(g, k, &sampling.recip)?;
            s.evaluate(&objective);
            s
        }
        Strategy::Random => {
            let mut s = random_select(g, k, graph.seed)?;
            s.evaluate(&objective);
            s
        }
        Strategy::DynamicGreedy => {
            let certain = MonteCarloObjective::new(g, &bank, sampling.metric, &ReciprocationModel::Certain)?;
            dynamic_greedy_simulate(&certain, k, &r, graph.seed, g.node_count().max(k), options)?
        }
        Strategy::Optimal => bail!("strategy optimal is only available on tiny graphs through the library"),
    };
    let picks: Vec<String> = result.picks.iter().map(|&v| loaded.external_id(v).to_string()).collect();
    println!("picks={}", picks.join(","));
    if let Some(attempts) = &result.attempts {
        println!("attempts={}", attempts.len());
    }
    if let Some(last) = result.objective_curve.last() {
        println!("mean={} stderr={} ci95=[{}, {}]", last.mean, last.stderr, last.ci95.0, last.ci95.1);
    }
    if let Some(path) = out {
        let file = BufWriter::new(File::create(path)?);
        result.write_csv(file, |v| loaded.external_id(v).to_string())?;
    }
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Stats { graph } => stats(&graph),
        Command::Generate { synthetic, seed, out, binary } => {
            let loaded = GraphSource::synthetic(&synthetic, seed)?.load(Orientation::Propagation)?;
            if binary {
                save_cache(&loaded.graph, &out)?;
            } else {
                save_edgelist(&loaded.graph, &out)?;
            }
            println!("N={} E={}", loaded.graph.node_count(), loaded.graph.arc_count());
            Ok(())
        }
        Command::PruneCache { graph, out, id_map, p, samples, bank } => {
            let loaded = graph.load()?;
            save_cache(&loaded.graph, &out)?;
            if let Some(path) = id_map {
                save_id_map(&loaded.id_map, &path)?;
            }
            match (p, bank) {
                (Some(p), Some(path)) => {
                    let b = build_sample_bank(&loaded.graph, p, samples, graph.seed)?;
                    std::fs::write(&path, b.to_bytes())?;
                    println!("samples={} fingerprint={}", b.len(), b.graph_fingerprint());
                }
                (None, None) => println!("fingerprint={}", fingerprint(&loaded.graph)),
                _ => bail!("--p and --bank go together"),
            }
            Ok(())
        }
        Command::Select { graph, sampling, k, strategy, pool, out } => {
            select(&graph, &sampling, k, strategy, pool, out.as_ref())
        }
        Command::Estimate { graph, sampling, nodes } => {
            let loaded = graph.load()?;
            let seeds = internal_ids(&loaded, &nodes)?;
            let n = sampling.sample_count(&loaded)?;
            let bank = build_sample_bank(&loaded.graph, sampling.p, n, graph.seed)?;
            let e = if sampling.recip.is_certain() {
                estimate_influence(&bank, &loaded.graph, &seeds, sampling.metric)?
            } else {
                let objective = MonteCarloObjective::new(&loaded.graph, &bank, sampling.metric, &sampling.recip)?;
                evaluate_set(&objective, &seeds).0
            };
            println!("metric={} samples={}", e.metric, e.n_samples);
            println!("mean={} stderr={} ci95=[{}, {}]", e.mean, e.stderr, e.ci95.0, e.ci95.1);
            Ok(())
        }
        Command::Analyze { graph, p, epsilon, confidence, out } => {
            let loaded = graph.load()?;
            let s = degree_stats(&loaded.graph)?;
            let policy = SampleSizePolicy { epsilon, confidence, ..Default::default() };
            let rows = analyze(&s, &p, &policy)?;
            println!(
                "N={} E={} <k>={} <k^2>={}",
                s.node_count, s.arc_count, s.mean_out_degree, s.second_moment_out_degree
            );
            println!("p_c={}", followcast::branching::critical_probability(&s)?);
            println!("{:>10} {:>10} {:>10} {:>10} {:>8} {:>6}", "p", "<k>p", "m", "p_ext", "n_rec", "n_auto");
            for r in &rows {
                println!(
                    "{:>10} {:>10.4} {:>10.4} {:>10.6} {:>8} {:>6}",
                    r.p, r.effective_density, r.mean_offspring, r.p_ext, r.recommended_samples, r.auto_samples
                );
            }
            if let Some(path) = out {
                write_analysis_csv(&rows, BufWriter::new(File::create(path)?))?;
            }
            Ok(())
        }
        Command::Experiment {
            config,
            graph,
            synthetic,
            p,
            k,
            k_grid,
            strategies,
            metric,
            recip,
            samples,
            seed,
            pool,
            out,
        } => {
            let mut c = match &config {
                Some(path) => ExperimentConfig::from_file(path)?,
                None => ExperimentConfig::default(),
            };
            if let Some(s) = seed {
                c.set("seed", &s.to_string())?;
            }
            let mut overrides: Vec<(&str, String)> = Vec::new();
            overrides.extend(graph.map(|g| ("graph", g.display().to_string())));
            overrides.extend(synthetic.map(|s| ("synthetic", s)));
            overrides.extend(p.map(|v| ("p", v)));
            overrides.extend(k.map(|v| ("k_max", v.to_string())));
            overrides.extend(k_grid.map(|v| ("k_grid", v)));
            overrides.extend(strategies.map(|v| ("strategies", v)));
            overrides.extend(metric.map(|v| ("metrics", v)));
            overrides.extend(recip.map(|v| ("recip", v)));
            overrides.extend(samples.map(|v| ("samples", v)));
            overrides.extend(pool.map(|v| ("candidate_pool", v.to_string())));
            overrides.extend(out.map(|v| ("out", v.display().to_string())));
            overrides.extend(cli.threads.map(|v| ("threads", v.to_string())));
            for (key, value) in overrides {
                c.set(key, &value)?;
            }
            let report = run_experiment(&c)?;
            println!("rows={}", report.manifest.rows);
            println!("csv={}", report.csv_path.display());
            println!("manifest={}", report.manifest_path.display());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let threads = cli.threads;
    let outcome = match par::with_threads(threads, || run(cli)) {
        Ok(r) => r,
        Err(e) => Err(e.into()),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let _ = writeln!(io::stderr(), "error: {e:#}");
            let usage = e
                .downcast_ref::<followcast::Error>()
                .is_some_and(|e| matches!(e, followcast::Error::Config(_) | followcast::Error::InvalidArgument(_)));
            ExitCode::from(if usage { 2 } else { 1 })
        }
    }
}
