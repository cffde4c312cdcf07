use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::search::{beam_search, ExactScorer, NeverStop};
use super::ProximityGraph;
use crate::points::{Neighbor, PointSet};
use crate::{par, Error, Result};

/// Number of points the medoid estimate is measured against.
const MEDOID_SAMPLE: usize = 1000;

/// Largest insertion batch of a parallel build, as a fraction of `n`.
const MAX_BATCH_FRACTION: f64 = 0.02;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BuildParams {
    /// Maximum out-degree `R`.
    pub max_degree: usize,
    /// Beam width `L` used while inserting points.
    pub build_beam: usize,
    /// Pruning slack of the second pass.
    pub alpha: f32,
    pub seed: u64,
    /// Insert points in prefix-doubling batches processed concurrently.
    /// When false, points are inserted one at a time.
    pub parallel: bool,
}

impl Default for BuildParams {
    fn default() -> Self {
        BuildParams {
            max_degree: 64,
            build_beam: 128,
            alpha: 1.15,
            seed: 0,
            parallel: true,
        }
    }
}

impl BuildParams {
    pub fn validate(&self) -> Result<()> {
        if self.max_degree < 2 {
            return Err(Error::InvalidParams("R must be at least 2".into()));
        }
        if self.build_beam < self.max_degree {
            return Err(Error::InvalidParams(format!(
                "L ({}) must be at least R ({})",
                self.build_beam, self.max_degree
            )));
        }
        if !(self.alpha >= 1.0) {
            return Err(Error::InvalidParams(format!(
                "alpha must be >= 1.0, got {}",
                self.alpha
            )));
        }
        Ok(())
    }
}

/// Alpha-occlusion pruning.
///
/// Walks the candidates closest-first and keeps `c` only if no already kept
/// `k` satisfies `alpha * d(k, c) <= d(p, c)`. Stops once `max_degree` ids
/// are kept. `p` itself and repeated ids are ignored.
pub fn robust_prune(
    p: u32,
    candidates: &[Neighbor],
    alpha: f32,
    max_degree: usize,
    points: &PointSet,
) -> Vec<u32> {
    let mut sorted: Vec<Neighbor> = candidates.iter().copied().filter(|c| c.id != p).collect();
    sorted.sort_unstable();
    sorted.dedup_by_key(|c| c.id);

    let mut kept: Vec<u32> = Vec::with_capacity(max_degree);
    for c in sorted {
        if kept.len() >= max_degree {
            break;
        }
        if kept.contains(&c.id) {
            continue;
        }
        let occluded = kept
            .iter()
            .any(|&k| alpha * points.distance_between(k, c.id) <= c.distance);
        if !occluded {
            kept.push(c.id);
        }
    }
    kept
}

/// Point minimizing the summed distance to a seeded sample of at most 1000
/// points (all points when `n <= 1000`). Ties go to the smaller id.
pub fn medoid(points: &PointSet, seed: u64) -> Result<u32> {
    let n = points.len();
    if n == 0 {
        return Err(Error::EmptyPointSet);
    }
    let sample: Vec<u32> = if n <= MEDOID_SAMPLE {
        (0..n as u32).collect()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x6d65_646f_6964);
        let mut ids: Vec<u32> = rand::seq::index::sample(&mut rng, n, MEDOID_SAMPLE)
            .into_iter()
            .map(|i| i as u32)
            .collect();
        ids.sort_unstable();
        ids
    };
    let totals = par::map_indexed(n, |i| {
        sample
            .iter()
            .map(|&s| points.distance_between(i as u32, s) as f64)
            .sum::<f64>()
    });
    let best = totals
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1).then(a.0.cmp(&b.0)))
        .map(|(i, _)| i as u32)
        .unwrap_or(0);
    Ok(best)
}

/// Builds a Vamana graph in two passes over a seeded random insertion
/// order: the first prunes with `alpha = 1`, the second with
/// `params.alpha`. The medoid is the single start point.
pub fn build_index(points: &PointSet, params: &BuildParams) -> Result<ProximityGraph> {
    params.validate()?;
    let n = points.len();
    if n == 0 {
        return Err(Error::EmptyPointSet);
    }
    if n > u32::MAX as usize {
        return Err(Error::InvalidParams("too many points for 32-bit ids".into()));
    }
    let start = medoid(points, params.seed)?;
    let mut graph = ProximityGraph::empty(n, params.max_degree);
    graph.set_start(vec![start]);
    if n == 1 {
        return Ok(graph);
    }

    let mut order: Vec<u32> = (0..n as u32).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(params.seed));

    for alpha in [1.0, params.alpha] {
        let mut done = 0;
        let mut batch = 1usize;
        let max_batch = ((n as f64 * MAX_BATCH_FRACTION).ceil() as usize).max(1);
        while done < n {
            let size = if params.parallel { batch.min(max_batch) } else { 1 };
            let end = (done + size).min(n);
            insert_batch(&mut graph, points, &order[done..end], start, alpha, params);
            done = end;
            batch = (batch * 2).min(max_batch);
        }
    }
    Ok(graph)
}

fn insert_batch(
    graph: &mut ProximityGraph,
    points: &PointSet,
    batch: &[u32],
    start: u32,
    alpha: f32,
    params: &BuildParams,
) {
    let r = params.max_degree;
    let new_out = {
        let graph = &*graph;
        let compute = |i: usize| {
            let p = batch[i];
            // the query is a stored point, so its dimension always matches
            let scorer = ExactScorer::new(points, points.row(p as usize))
                .expect("stored point has the set's dimension");
            let mut candidates = beam_search(
                graph,
                &scorer,
                &[start],
                f32::INFINITY,
                params.build_beam,
                &NeverStop,
            )
            .expect("start point is valid")
            .visited;
            candidates.extend(
                graph
                    .neighbors(p)
                    .iter()
                    .map(|&nb| Neighbor::new(nb, points.distance_between(p, nb))),
            );
            robust_prune(p, &candidates, alpha, r, points)
        };
        if params.parallel {
            par::map_indexed(batch.len(), compute)
        } else {
            par::map_indexed_sequential(batch.len(), compute)
        }
    };

    let mut reverse: Vec<(u32, u32)> = Vec::new();
    for (&p, out) in batch.iter().zip(&new_out) {
        reverse.extend(out.iter().map(|&j| (j, p)));
    }
    for (&p, out) in batch.iter().zip(new_out) {
        graph.adjacency_mut()[p as usize] = out;
    }
    reverse.sort_unstable();
    let mut groups: Vec<(u32, Vec<u32>)> = Vec::new();
    for (target, source) in reverse {
        match groups.last_mut() {
            Some((t, sources)) if *t == target => sources.push(source),
            _ => groups.push((target, vec![source])),
        }
    }

    let updated = {
        let graph = &*graph;
        let merge = |g: usize| {
            let (target, sources) = &groups[g];
            let mut list = graph.neighbors(*target).to_vec();
            for &s in sources {
                if s != *target && !list.contains(&s) {
                    list.push(s);
                }
            }
            if list.len() > r {
                let candidates: Vec<Neighbor> = list
                    .iter()
                    .map(|&c| Neighbor::new(c, points.distance_between(*target, c)))
                    .collect();
                list = robust_prune(*target, &candidates, alpha, r, points);
            }
            list
        };
        if params.parallel {
            par::map_indexed(groups.len(), merge)
        } else {
            par::map_indexed_sequential(groups.len(), merge)
        }
    };
    for ((target, _), list) in groups.iter().zip(updated) {
        graph.adjacency_mut()[*target as usize] = list;
    }
}
