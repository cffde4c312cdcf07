use rustc_hash::FxHashSet;

use super::ProximityGraph;
use crate::points::{Neighbor, PointSet, VectorRef};
use crate::quant::QuantizedQuery;
use crate::{Error, Result};

/// Distance from a fixed query to any point id.
pub trait Scorer {
    fn num_points(&self) -> usize;
    fn distance(&self, id: u32) -> f32;
}

/// Exact distances against the original vectors.
#[derive(Clone, Copy, Debug)]
pub struct ExactScorer<'a> {
    points: &'a PointSet,
    query: VectorRef<'a>,
}

impl<'a> ExactScorer<'a> {
    pub fn new(points: &'a PointSet, query: VectorRef<'a>) -> Result<Self> {
        points.check_query(query)?;
        Ok(ExactScorer { points, query })
    }
}

impl Scorer for ExactScorer<'_> {
    fn num_points(&self) -> usize {
        self.points.len()
    }

    #[inline]
    fn distance(&self, id: u32) -> f32 {
        self.points.distance_to(self.query, id)
    }
}

impl Scorer for QuantizedQuery<'_> {
    fn num_points(&self) -> usize {
        self.set_len()
    }

    #[inline]
    fn distance(&self, id: u32) -> f32 {
        QuantizedQuery::distance(self, id)
    }
}

/// Search state handed to a stop predicate just before the next visit.
#[derive(Clone, Copy, Debug)]
pub struct StopContext<'a> {
    /// Range radius of the query.
    pub radius: f32,
    /// Current beam, sorted by `(distance, id)`.
    pub beam: &'a [Neighbor],
    /// Points visited so far, in visit order.
    pub visited: &'a [Neighbor],
    /// The unvisited beam element about to be visited.
    pub candidate: Neighbor,
    /// Completed visits, i.e. `visited.len()`.
    pub visits: usize,
    /// Distance from the query to the first start point.
    pub start_distance: f32,
}

/// Decides whether a beam search should stop before its next visit.
pub trait StopPredicate {
    fn should_stop(&self, ctx: &StopContext<'_>) -> bool;
}

#[derive(Clone, Copy, Debug, Default)]
pub struct NeverStop;

impl StopPredicate for NeverStop {
    fn should_stop(&self, _: &StopContext<'_>) -> bool {
        false
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct AlwaysStop;

impl StopPredicate for AlwaysStop {
    fn should_stop(&self, _: &StopContext<'_>) -> bool {
        true
    }
}

impl<F> StopPredicate for F
where
    F: Fn(&StopContext<'_>) -> bool,
{
    fn should_stop(&self, ctx: &StopContext<'_>) -> bool {
        self(ctx)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SearchStats {
    pub distance_computations: u64,
    pub visits: u64,
    pub early_stopped: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BeamOutcome {
    /// Final beam, at most `beam_width` entries sorted by `(distance, id)`.
    pub beam: Vec<Neighbor>,
    /// Visited points in visit order.
    pub visited: Vec<Neighbor>,
    pub stats: SearchStats,
}

/// Best-first beam search.
///
/// The beam starts as the (deduplicated) start points. Each iteration picks
/// the closest unvisited beam element, asks `stop` whether to quit, and
/// otherwise visits it: its out-neighbors join the beam, which is then
/// trimmed to the `beam_width` closest. The search ends when every beam
/// element has been visited or the predicate fires.
///
/// Distances come from `scorer`, so a quantized scorer yields quantized
/// beam distances; callers re-check range membership separately.
pub fn beam_search<S, M>(
    graph: &ProximityGraph,
    scorer: &S,
    start: &[u32],
    radius: f32,
    beam_width: usize,
    stop: &M,
) -> Result<BeamOutcome>
where
    S: Scorer + ?Sized,
    M: StopPredicate + ?Sized,
{
    if beam_width == 0 {
        return Err(Error::InvalidParams("beam width must be at least 1".into()));
    }
    if start.is_empty() {
        return Err(Error::InvalidParams("beam search needs a start point".into()));
    }
    if scorer.num_points() != graph.len() {
        return Err(Error::InvalidParams(format!(
            "graph has {} nodes but the point set has {}",
            graph.len(),
            scorer.num_points()
        )));
    }
    let n = graph.len();
    if let Some(&bad) = start.iter().find(|&&s| s as usize >= n) {
        return Err(Error::IdOutOfRange { id: bad as u64, n });
    }

    let mut stats = SearchStats::default();
    let mut seen: FxHashSet<u32> = FxHashSet::default();
    let mut beam: Vec<Neighbor> = Vec::with_capacity(beam_width + 1);
    for &s in start {
        if seen.insert(s) {
            beam.push(Neighbor::new(s, scorer.distance(s)));
            stats.distance_computations += 1;
        }
    }
    let start_distance = beam[0].distance;
    beam.sort_unstable();
    beam.truncate(beam_width);
    let mut expanded = vec![false; beam.len()];
    let mut visited: Vec<Neighbor> = Vec::new();
    // every entry before `cursor` has been expanded
    let mut cursor = 0;

    loop {
        while cursor < beam.len() && expanded[cursor] {
            cursor += 1;
        }
        if cursor == beam.len() {
            break;
        }
        let candidate = beam[cursor];
        let ctx = StopContext {
            radius,
            beam: &beam,
            visited: &visited,
            candidate,
            visits: visited.len(),
            start_distance,
        };
        if stop.should_stop(&ctx) {
            stats.early_stopped = true;
            break;
        }
        expanded[cursor] = true;
        visited.push(candidate);
        stats.visits += 1;

        for &nb in graph.neighbors(candidate.id) {
            // anything seen before is either in the beam, visited, or was
            // trimmed and can never re-enter (the beam bound only tightens)
            if !seen.insert(nb) {
                continue;
            }
            let entry = Neighbor::new(nb, scorer.distance(nb));
            stats.distance_computations += 1;
            if beam.len() == beam_width && entry >= beam[beam_width - 1] {
                continue;
            }
            let pos = beam.partition_point(|e| *e < entry);
            beam.insert(pos, entry);
            expanded.insert(pos, false);
            if beam.len() > beam_width {
                beam.pop();
                expanded.pop();
            }
            if pos < cursor {
                cursor = pos;
            }
        }
    }

    Ok(BeamOutcome {
        beam,
        visited,
        stats,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::DistanceKind;

    fn line(xs: &[f32]) -> PointSet {
        PointSet::from_f32(1, xs.to_vec(), DistanceKind::SquaredL2).unwrap()
    }

    fn complete(n: usize) -> ProximityGraph {
        let adj = (0..n as u32)
            .map(|i| (0..n as u32).filter(|&j| j != i).collect())
            .collect();
        ProximityGraph::from_parts(n, adj, vec![0]).unwrap()
    }

    #[test]
    fn single_node_graph() {
        let pts = line(&[2.0]);
        let g = ProximityGraph::from_parts(1, vec![vec![]], vec![0]).unwrap();
        let q = [5.0f32];
        let scorer = ExactScorer::new(&pts, VectorRef::F32(&q)).unwrap();
        let out = beam_search(&g, &scorer, &[0], 1.0, 4, &NeverStop).unwrap();
        assert_eq!(out.beam, vec![Neighbor::new(0, 9.0)]);
        assert_eq!(out.visited, vec![Neighbor::new(0, 9.0)]);
        assert!(!out.stats.early_stopped);
    }

    #[test]
    fn always_stop_fires_before_first_visit() {
        let pts = line(&[0.0, 1.0, 2.0, 3.0, 4.0]);
        let g = complete(5);
        let q = [3.2f32];
        let scorer = ExactScorer::new(&pts, VectorRef::F32(&q)).unwrap();
        let out = beam_search(&g, &scorer, &[0, 4], 1.0, 3, &AlwaysStop).unwrap();
        assert!(out.visited.is_empty());
        assert!(out.stats.early_stopped);
        let ids: Vec<u32> = out.beam.iter().map(|n| n.id).collect();
        assert_eq!(ids, vec![4, 0]);
    }

    #[test]
    fn complete_graph_beam_is_brute_force_top_b() {
        let xs = [0.0, 1.0, 2.0, 3.0, 4.0];
        let pts = line(&xs);
        let g = complete(5);
        for q in [-1.0f32, 0.4, 1.7, 2.5, 3.9, 10.0] {
            let scorer = ExactScorer::new(&pts, VectorRef::F32(std::slice::from_ref(&q))).unwrap();
            let out = beam_search(&g, &scorer, &[0], 0.0, 3, &NeverStop).unwrap();
            // brute-force oracle: sort all ids by (distance, id)
            let mut all: Vec<(f32, u32)> = xs
                .iter()
                .enumerate()
                .map(|(i, &x)| ((x - q) * (x - q), i as u32))
                .collect();
            all.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            let expect: Vec<u32> = all[..3].iter().map(|p| p.1).collect();
            let got: Vec<u32> = out.beam.iter().map(|n| n.id).collect();
            assert_eq!(got, expect, "query {q}");
        }
    }

    #[test]
    fn stop_context_reports_visit_count_before_visit() {
        let pts = line(&[0.0, 1.0, 2.0, 3.0]);
        let g = complete(4);
        let q = [0.0f32];
        let scorer = ExactScorer::new(&pts, VectorRef::F32(&q)).unwrap();
        let stop_at_two = |ctx: &StopContext<'_>| {
            assert_eq!(ctx.visits, ctx.visited.len());
            ctx.visits >= 2
        };
        let out = beam_search(&g, &scorer, &[3], 0.0, 4, &stop_at_two).unwrap();
        assert_eq!(out.visited.len(), 2);
        assert_eq!(out.stats.visits, 2);
        assert!(out.stats.early_stopped);
    }

    #[test]
    fn rejects_bad_arguments() {
        let pts = line(&[0.0, 1.0]);
        let g = complete(2);
        let q = [0.0f32];
        let scorer = ExactScorer::new(&pts, VectorRef::F32(&q)).unwrap();
        assert!(beam_search(&g, &scorer, &[], 0.0, 2, &NeverStop).is_err());
        assert!(beam_search(&g, &scorer, &[0], 0.0, 0, &NeverStop).is_err());
        assert!(matches!(
            beam_search(&g, &scorer, &[2], 0.0, 2, &NeverStop),
            Err(Error::IdOutOfRange { .. })
        ));
        assert!(ExactScorer::new(&pts, VectorRef::F32(&[0.0, 0.0])).is_err());
    }
}
