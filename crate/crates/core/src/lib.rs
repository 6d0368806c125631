//! Cascade simulation and follow-set selection on follow-based social graphs.
//!
//! Arcs point in the direction tweets travel: `u -> v` means `v` follows `u`.
//! A user `u0` picks a set of accounts to follow; those that follow back seed
//! an independent cascade in which every other arc fires with a constant
//! probability `p`. The crate estimates the expected number of retweeters (or
//! readers) by sampling pruned graphs, condensing them to DAGs of strongly
//! connected components, and compares greedy, effective-degree and random
//! selection. A small branching-process analyzer sizes the Monte Carlo runs.

pub mod branching;
pub mod condense;
pub mod error;
pub mod estimate;
pub mod exact;
pub mod experiment;
pub mod generate;
pub mod graph;
pub mod io;
pub mod objective;
pub mod par;
pub mod prune;
pub mod reach;
pub mod reciprocation;
pub mod rng;
pub mod select;
pub mod transform;

pub use condense::{condense, CondensedDag};
pub use error::{Error, Result};
pub use estimate::{build_sample_bank, estimate_influence, InfluenceEstimate, Metric, SampleBank};
pub use exact::exact_influence;
pub use generate::{generate_configuration_graph, DegreeSpec};
pub use graph::{degree_stats, DegreeStats, NodeId, SocialGraph};
pub use prune::{prune, PrunedGraph};
pub use reach::reader_set;
pub use reciprocation::ReciprocationModel;
pub use select::{SelectionResult, Strategy};
