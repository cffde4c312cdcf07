//! Range retrieval strategies on top of beam search.

mod early_stop;

pub use early_stop::{early_stop_example, EarlyStopConfig, StopMetric};

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::fmt;
use std::str::FromStr;

use rustc_hash::FxHashSet;

use crate::graph::{beam_search, ExactScorer, NeverStop, ProximityGraph, Scorer, StopPredicate};
use crate::points::{Neighbor, PointSet, VectorRef};
use crate::quant::{QuantizedPointSet, QuantizedQuery};
use crate::{par, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Strategy {
    /// One beam search; report its in-range members.
    Baseline,
    /// Beam search, then unbounded in-range expansion when the beam saturates.
    Greedy,
    /// Beam searches with the beam doubling while it saturates.
    Doubling,
}

impl Strategy {
    pub const ALL: [Strategy; 3] = [Strategy::Baseline, Strategy::Greedy, Strategy::Doubling];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::Baseline => "baseline",
            Strategy::Greedy => "greedy",
            Strategy::Doubling => "doubling",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Strategy::ALL
            .into_iter()
            .find(|st| st.name() == s)
            .ok_or_else(|| Error::InvalidParams(format!("unknown strategy '{s}'")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RangeParams {
    pub radius: f32,
    /// Initial beam width.
    pub beam: usize,
    /// Fraction of the beam that must be in range before a query escalates
    /// to its second phase.
    pub lambda: f64,
    pub strategy: Strategy,
    pub early_stop: EarlyStopConfig,
}

impl RangeParams {
    pub fn new(radius: f32, beam: usize, strategy: Strategy) -> Self {
        RangeParams {
            radius,
            beam,
            lambda: 1.0,
            strategy,
            early_stop: EarlyStopConfig::disabled(),
        }
    }

    pub fn with_early_stop(mut self, early_stop: EarlyStopConfig) -> Self {
        self.early_stop = early_stop;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.beam == 0 {
            return Err(Error::InvalidParams("beam width must be at least 1".into()));
        }
        if !(self.lambda > 0.0 && self.lambda <= 1.0) {
            return Err(Error::InvalidParams(format!(
                "lambda must lie in (0, 1], got {}",
                self.lambda
            )));
        }
        if self.radius.is_nan() {
            return Err(Error::InvalidParams("radius is NaN".into()));
        }
        self.early_stop.validate()
    }

    /// In-range count at which a beam of width `beam` counts as saturated.
    pub fn escalation_threshold(&self, beam: usize) -> usize {
        ((self.lambda * beam as f64).ceil() as usize).max(1)
    }
}

/// Per-query counters.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct QueryStats {
    /// Visits made by the first beam search.
    pub initial_visits: u64,
    /// Visits made by greedy expansion or later doubling rounds.
    pub second_phase_visits: u64,
    pub distance_computations: u64,
    pub early_stopped: bool,
    /// Beam searches run (1 unless doubling).
    pub rounds: u32,
    /// Beam width of the last beam search.
    pub final_beam: usize,
}

impl QueryStats {
    pub fn visits(&self) -> u64 {
        self.initial_visits + self.second_phase_visits
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct QueryResult {
    /// In-range points, sorted by `(distance, id)`, with exact distances.
    pub neighbors: Vec<Neighbor>,
    pub stats: QueryStats,
}

impl QueryResult {
    pub fn ids(&self) -> Vec<u32> {
        self.neighbors.iter().map(|n| n.id).collect()
    }
}

impl AsRef<[Neighbor]> for QueryResult {
    fn as_ref(&self) -> &[Neighbor] {
        &self.neighbors
    }
}

/// Counters summed over a batch.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct BatchTotals {
    pub queries: usize,
    pub results: u64,
    pub initial_visits: u64,
    pub second_phase_visits: u64,
    pub distance_computations: u64,
    pub early_stopped: u64,
    pub rounds: u64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct BatchResult {
    pub results: Vec<QueryResult>,
    pub totals: BatchTotals,
}

impl BatchResult {
    fn from_results(results: Vec<QueryResult>) -> Self {
        let mut totals = BatchTotals {
            queries: results.len(),
            ..BatchTotals::default()
        };
        for r in &results {
            totals.results += r.neighbors.len() as u64;
            totals.initial_visits += r.stats.initial_visits;
            totals.second_phase_visits += r.stats.second_phase_visits;
            totals.distance_computations += r.stats.distance_computations;
            totals.early_stopped += r.stats.early_stopped as u64;
            totals.rounds += r.stats.rounds as u64;
        }
        BatchResult { results, totals }
    }

    pub fn len(&self) -> usize {
        self.results.len()
    }

    pub fn is_empty(&self) -> bool {
        self.results.is_empty()
    }
}

/// Graph plus the vectors it indexes, optionally with 8-bit codes that the
/// beam searches run on.
#[derive(Clone, Copy, Debug)]
pub struct RangeIndex<'a> {
    graph: &'a ProximityGraph,
    points: &'a PointSet,
    quantized: Option<&'a QuantizedPointSet>,
}

impl<'a> RangeIndex<'a> {
    pub fn new(graph: &'a ProximityGraph, points: &'a PointSet) -> Result<Self> {
        if graph.len() != points.len() {
            return Err(Error::InvalidParams(format!(
                "graph has {} nodes but the point set has {}",
                graph.len(),
                points.len()
            )));
        }
        Ok(RangeIndex {
            graph,
            points,
            quantized: None,
        })
    }

    /// Searches with quantized distances; membership is still decided on
    /// exact distances.
    pub fn with_quantized(mut self, quantized: &'a QuantizedPointSet) -> Result<Self> {
        if !quantized.is_derived_from(self.points) {
            return Err(Error::InvalidParams(
                "quantized codes were not built from this point set".into(),
            ));
        }
        self.quantized = Some(quantized);
        Ok(self)
    }

    pub fn graph(&self) -> &'a ProximityGraph {
        self.graph
    }

    pub fn points(&self) -> &'a PointSet {
        self.points
    }

    pub fn quantized(&self) -> Option<&'a QuantizedPointSet> {
        self.quantized
    }
}

enum SearchScorer<'a> {
    Exact(ExactScorer<'a>),
    Quantized(QuantizedQuery<'a>),
}

impl Scorer for SearchScorer<'_> {
    fn num_points(&self) -> usize {
        match self {
            SearchScorer::Exact(s) => s.num_points(),
            SearchScorer::Quantized(s) => s.num_points(),
        }
    }

    #[inline]
    fn distance(&self, id: u32) -> f32 {
        match self {
            SearchScorer::Exact(s) => s.distance(id),
            SearchScorer::Quantized(s) => s.distance(id),
        }
    }
}

/// Everything one query needs: exact and search-time scorers.
struct QueryCtx<'a> {
    graph: &'a ProximityGraph,
    exact: ExactScorer<'a>,
    search: SearchScorer<'a>,
}

impl<'a> QueryCtx<'a> {
    fn new(index: &RangeIndex<'a>, query: VectorRef<'a>) -> Result<Self> {
        let exact = ExactScorer::new(index.points, query)?;
        let search = match (index.quantized, query) {
            (Some(qp), VectorRef::F32(q)) => {
                SearchScorer::Quantized(QuantizedQuery::new(qp, q, index.points.metric()))
            }
            _ => SearchScorer::Exact(exact),
        };
        Ok(QueryCtx {
            graph: index.graph,
            exact,
            search,
        })
    }

    /// Exact in-range members of a beam, sorted.
    fn in_range(&self, beam: &[Neighbor], radius: f32, stats: &mut QueryStats) -> Vec<Neighbor> {
        match self.search {
            SearchScorer::Exact(_) => beam.iter().copied().filter(|n| n.distance <= radius).collect(),
            SearchScorer::Quantized(_) => {
                stats.distance_computations += beam.len() as u64;
                let mut out: Vec<Neighbor> = beam
                    .iter()
                    .map(|n| Neighbor::new(n.id, self.exact.distance(n.id)))
                    .filter(|n| n.distance <= radius)
                    .collect();
                out.sort_unstable();
                out
            }
        }
    }

    fn initial_beam(&self, params: &RangeParams, stats: &mut QueryStats) -> Result<Vec<Neighbor>> {
        let stop: &dyn StopPredicate = if params.early_stop.enabled {
            &params.early_stop
        } else {
            &NeverStop
        };
        let out = beam_search(
            self.graph,
            &self.search,
            self.graph.start(),
            params.radius,
            params.beam,
            stop,
        )?;
        stats.initial_visits = out.stats.visits;
        stats.distance_computations += out.stats.distance_computations;
        stats.early_stopped = out.stats.early_stopped;
        stats.rounds = 1;
        stats.final_beam = params.beam;
        Ok(self.in_range(&out.beam, params.radius, stats))
    }

    fn greedy(&self, start: &[u32], radius: f32, stats: &mut QueryStats) -> Vec<Neighbor> {
        let mut seen: FxHashSet<u32> = FxHashSet::default();
        let mut frontier: BinaryHeap<Reverse<Neighbor>> = BinaryHeap::new();
        for &s in start {
            if seen.insert(s) {
                frontier.push(Reverse(Neighbor::new(s, self.exact.distance(s))));
                stats.distance_computations += 1;
            }
        }
        let mut visited = Vec::new();
        while let Some(Reverse(p)) = frontier.pop() {
            visited.push(p);
            for &nb in self.graph.neighbors(p.id) {
                // a rejected neighbor would be rejected again; skip it
                if !seen.insert(nb) {
                    continue;
                }
                let d = self.exact.distance(nb);
                stats.distance_computations += 1;
                if d <= radius {
                    frontier.push(Reverse(Neighbor::new(nb, d)));
                }
            }
        }
        stats.second_phase_visits += visited.len() as u64;
        visited
    }

    fn doubling(&self, start: &[u32], params: &RangeParams, stats: &mut QueryStats) -> Result<Vec<Neighbor>> {
        let n = self.graph.len();
        let mut starts: Vec<u32> = Vec::with_capacity(start.len());
        let mut in_starts: FxHashSet<u32> = FxHashSet::default();
        for &s in start {
            if in_starts.insert(s) {
                starts.push(s);
            }
        }
        let mut beam = params.beam;
        loop {
            let first = stats.rounds == 0;
            let stop: &dyn StopPredicate = if first && params.early_stop.enabled {
                &params.early_stop
            } else {
                &NeverStop
            };
            let out = beam_search(self.graph, &self.search, &starts, params.radius, beam, stop)?;
            stats.rounds += 1;
            stats.final_beam = beam;
            stats.distance_computations += out.stats.distance_computations;
            if first {
                stats.initial_visits = out.stats.visits;
                stats.early_stopped = out.stats.early_stopped;
            } else {
                stats.second_phase_visits += out.stats.visits;
            }
            for v in &out.visited {
                if in_starts.insert(v.id) {
                    starts.push(v.id);
                }
            }
            let found = self.in_range(&out.beam, params.radius, stats);
            if found.len() < params.escalation_threshold(beam) || beam >= n {
                return Ok(found);
            }
            beam = (beam * 2).min(n);
        }
    }
}

/// Unbounded best-first expansion from `start` that only admits neighbors
/// within `radius` (exact distances). Returns every visited point, in visit
/// order, with exact distances; all of `start` is visited.
pub fn greedy_search(
    index: &RangeIndex<'_>,
    query: VectorRef<'_>,
    start: &[u32],
    radius: f32,
) -> Result<QueryResult> {
    for &s in start {
        index.points.check_id(s)?;
    }
    let ctx = QueryCtx::new(index, query)?;
    let mut stats = QueryStats::default();
    let neighbors = ctx.greedy(start, radius, &mut stats);
    Ok(QueryResult { neighbors, stats })
}

/// Repeated beam search from `start`, doubling the beam while its in-range
/// members reach the escalation threshold. Each round starts from the
/// previous starts plus everything the previous round visited. The beam is
/// capped at `n`; a round at the cap is final.
pub fn doubling_search(
    index: &RangeIndex<'_>,
    query: VectorRef<'_>,
    start: &[u32],
    params: &RangeParams,
) -> Result<QueryResult> {
    params.validate()?;
    let ctx = QueryCtx::new(index, query)?;
    let mut stats = QueryStats::default();
    let neighbors = ctx.doubling(start, params, &mut stats)?;
    Ok(QueryResult { neighbors, stats })
}

/// Answers one range query with the configured strategy.
pub fn range_query(
    index: &RangeIndex<'_>,
    query: VectorRef<'_>,
    params: &RangeParams,
) -> Result<QueryResult> {
    params.validate()?;
    let ctx = QueryCtx::new(index, query)?;
    let mut stats = QueryStats::default();
    let neighbors = match params.strategy {
        Strategy::Baseline => ctx.initial_beam(params, &mut stats)?,
        Strategy::Greedy => {
            let found = ctx.initial_beam(params, &mut stats)?;
            if found.len() < params.escalation_threshold(params.beam) {
                found
            } else {
                let seeds: Vec<u32> = found.iter().map(|n| n.id).collect();
                let mut expanded = ctx.greedy(&seeds, params.radius, &mut stats);
                // seeds are in range, so every admitted point is too
                expanded.retain(|n| n.distance <= params.radius);
                expanded.sort_unstable();
                expanded
            }
        }
        Strategy::Doubling => ctx.doubling(index.graph.start(), params, &mut stats)?,
    };
    Ok(QueryResult { neighbors, stats })
}

/// Runs [`range_query`] for every query, in parallel when the `parallel`
/// feature is enabled. Per-query output does not depend on scheduling.
pub fn batch_range_search(
    index: &RangeIndex<'_>,
    queries: &PointSet,
    params: &RangeParams,
) -> Result<BatchResult> {
    check_batch(index, queries, params)?;
    let results = par::map_indexed(queries.len(), |i| range_query(index, queries.row(i), params));
    Ok(BatchResult::from_results(results.into_iter().collect::<Result<_>>()?))
}

/// Single-threaded [`batch_range_search`].
pub fn batch_range_search_sequential(
    index: &RangeIndex<'_>,
    queries: &PointSet,
    params: &RangeParams,
) -> Result<BatchResult> {
    check_batch(index, queries, params)?;
    let results =
        par::map_indexed_sequential(queries.len(), |i| range_query(index, queries.row(i), params));
    Ok(BatchResult::from_results(results.into_iter().collect::<Result<_>>()?))
}

fn check_batch(index: &RangeIndex<'_>, queries: &PointSet, params: &RangeParams) -> Result<()> {
    params.validate()?;
    if queries.dim() != index.points.dim() {
        return Err(Error::DimensionMismatch {
            expected: index.points.dim(),
            found: queries.dim(),
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::DistanceKind;

    fn line(xs: &[f32]) -> PointSet {
        PointSet::from_f32(1, xs.to_vec(), DistanceKind::SquaredL2).unwrap()
    }

    /// Path graph 0 - 1 - ... - (n-1), edges both ways.
    fn path(n: usize, start: u32) -> ProximityGraph {
        let adj = (0..n)
            .map(|i| {
                let mut v = Vec::new();
                if i > 0 {
                    v.push(i as u32 - 1);
                }
                if i + 1 < n {
                    v.push(i as u32 + 1);
                }
                v
            })
            .collect();
        ProximityGraph::from_parts(2, adj, vec![start]).unwrap()
    }

    #[test]
    fn greedy_with_no_start_is_empty() {
        let pts = line(&[0.0, 1.0]);
        let g = path(2, 0);
        let idx = RangeIndex::new(&g, &pts).unwrap();
        let out = greedy_search(&idx, VectorRef::F32(&[0.0]), &[], 1.0).unwrap();
        assert!(out.neighbors.is_empty());
    }

    #[test]
    fn greedy_stops_at_radius_boundary() {
        let pts = line(&[0.0, 1.0, 5.0, 6.0]);
        let g = path(4, 0);
        let idx = RangeIndex::new(&g, &pts).unwrap();
        let out = greedy_search(&idx, VectorRef::F32(&[0.0]), &[0], 0.5).unwrap();
        assert_eq!(out.ids(), vec![0]);
        // 0 and 1 connected and in range; 2 breaks the chain
        let out = greedy_search(&idx, VectorRef::F32(&[0.5]), &[0], 1.0).unwrap();
        assert_eq!(out.ids().len(), 2);
    }

    #[test]
    fn doubling_escalates_until_beam_unsaturated() {
        // 10 points in range on a path, 10 far away
        let mut xs: Vec<f32> = (0..10).map(|i| i as f32 * 0.1).collect();
        xs.extend((0..10).map(|i| 100.0 + i as f32));
        let pts = line(&xs);
        let g = path(20, 0);
        let idx = RangeIndex::new(&g, &pts).unwrap();
        let params = RangeParams::new(1.0, 2, Strategy::Doubling);
        let out = range_query(&idx, VectorRef::F32(&[0.0]), &params).unwrap();
        assert_eq!(out.neighbors.len(), 10);
        assert_eq!(out.stats.rounds, 4);
        assert_eq!(out.stats.final_beam, 16);
    }

    #[test]
    fn doubling_beam_at_or_above_n_is_one_round() {
        let pts = line(&[0.0, 0.1, 0.2]);
        let g = path(3, 0);
        let idx = RangeIndex::new(&g, &pts).unwrap();
        let params = RangeParams::new(1.0, 3, Strategy::Doubling);
        let out = range_query(&idx, VectorRef::F32(&[0.0]), &params).unwrap();
        assert_eq!(out.stats.rounds, 1);
        assert_eq!(out.neighbors.len(), 3);
    }

    #[test]
    fn params_validation() {
        let mut p = RangeParams::new(1.0, 0, Strategy::Greedy);
        assert!(p.validate().is_err());
        p.beam = 4;
        p.lambda = 0.0;
        assert!(p.validate().is_err());
        p.lambda = 0.5;
        assert!(p.validate().is_ok());
        assert_eq!(p.escalation_threshold(5), 3);
        p.lambda = 1.0;
        assert_eq!(p.escalation_threshold(5), 5);
    }

    #[test]
    fn batch_rejects_dimension_mismatch() {
        let pts = line(&[0.0, 1.0]);
        let g = path(2, 0);
        let idx = RangeIndex::new(&g, &pts).unwrap();
        let qs = PointSet::from_f32(2, vec![0.0, 0.0], DistanceKind::SquaredL2).unwrap();
        let p = RangeParams::new(1.0, 2, Strategy::Baseline);
        assert!(matches!(
            batch_range_search(&idx, &qs, &p),
            Err(Error::DimensionMismatch { .. })
        ));
        let empty = PointSet::from_f32(1, vec![], DistanceKind::SquaredL2).unwrap();
        assert!(batch_range_search(&idx, &empty, &p).unwrap().is_empty());
    }

    #[test]
    fn strategy_names_round_trip() {
        for s in Strategy::ALL {
            assert_eq!(s.name().parse::<Strategy>().unwrap(), s);
        }
    }
}
