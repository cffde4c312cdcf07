//! Range retrieval over graph-based approximate nearest neighbor indices.
//!
//! A range query asks for every point within distance `r` of a query. The
//! crate builds a Vamana-style proximity graph and answers range queries on
//! it with three strategies:
//!
//! - [`Strategy::Baseline`]: a single beam search whose in-range beam members
//!   are reported.
//! - [`Strategy::Greedy`]: a beam search followed, when the beam saturates
//!   with in-range points, by an unbounded expansion that only admits
//!   in-range neighbors.
//! - [`Strategy::Doubling`]: repeated beam searches with the beam width
//!   doubling while the beam saturates.
//!
//! Any strategy can terminate its first beam search early for queries that
//! look like they have no results ([`EarlyStopConfig`]).
//!
//! The [`eval`] module holds exact ground truth, average precision and the
//! QPS benchmark harness; [`datatools`] characterizes datasets and generates
//! synthetic ones; [`io`] reads and writes the binary interchange formats.
//!
//! Data-parallel loops (batch search, ground truth, graph build batches) run
//! on rayon when the `parallel` feature is enabled (the default) and fall back
//! to plain iterators otherwise.

pub mod datatools;
mod error;
pub mod eval;
pub mod graph;
pub mod io;
pub mod par;
pub mod points;
pub mod quant;
pub mod range;
pub mod synth;

pub use error::{Error, Result};
pub use graph::{
    beam_search, build_index, robust_prune, BeamOutcome, BuildParams, NeverStop, ProximityGraph,
    Scorer, SearchStats, StopContext, StopPredicate,
};
pub use points::{distance, rerank, DistanceKind, ElemKind, Neighbor, PointSet, VectorRef};
pub use quant::QuantizedPointSet;
pub use range::{
    batch_range_search, batch_range_search_sequential, doubling_search, early_stop_example,
    greedy_search, range_query, BatchResult, EarlyStopConfig, QueryResult, QueryStats,
    RangeIndex, RangeParams, StopMetric, Strategy,
};
