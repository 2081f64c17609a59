//! Seeded graph matching by percolation, with iterative repair.
//!
//! Two graphs sampled from a common source are aligned starting from a
//! small set of known pairs. [`ews::expand_when_stuck`] is the baseline
//! percolation matcher; [`irma::irma`] repeats it, scoring candidates with
//! the marks left over from the previous pass. [`parallel`] holds the
//! epoch-synchronous variants, [`synth`] the instance generators and
//! [`oracle`] the independent checks.

pub mod engine;
pub mod error;
pub mod experiment;
pub mod ews;
pub mod graph;
pub mod irma;
pub mod metrics;
pub mod oracle;
pub mod parallel;
pub mod synth;

pub use engine::{weight, MarkTable, Matching, Pair, RunStats, ScoreKey, Trace, TraceEvent};
pub use error::{Error, Result};
pub use ews::{expand_once, expand_when_stuck, EwsConfig, EwsResult};
pub use graph::{build_graph, Graph, VertexId};
pub use irma::{irma, repairing_iteration, IrmaConfig, IrmaRun, IterationKind, IterationSnapshot};
pub use metrics::{score_matching, GroundTruth, MetricsReport};
pub use parallel::{parallel_ews, parallel_irma, parallel_repairing_iteration, ParallelConfig};
pub use synth::{Instance, SamplingConfig};
