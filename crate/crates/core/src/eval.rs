//! Exact ground truth, average precision and the QPS benchmark harness.

use std::io::{Read, Write};
use std::time::Instant;

use rustc_hash::FxHashSet;
use serde::{Deserialize, Serialize};

use crate::points::{Neighbor, PointSet};
use crate::range::{batch_range_search, BatchResult, RangeIndex, RangeParams, Strategy};
use crate::{par, Error, Result};

/// Exact range results for a query set at one radius.
#[derive(Clone, Debug, PartialEq)]
pub struct RangeGroundTruth {
    pub radius: f32,
    /// Per query, every point within `radius`, sorted by `(distance, id)`.
    pub results: Vec<Vec<Neighbor>>,
}

impl RangeGroundTruth {
    pub fn num_queries(&self) -> usize {
        self.results.len()
    }

    pub fn total(&self) -> usize {
        self.results.iter().map(Vec::len).sum()
    }

    pub fn counts(&self) -> Vec<usize> {
        self.results.iter().map(Vec::len).collect()
    }

    /// Checks sortedness, uniqueness and the radius bound of every list.
    pub fn validate(&self) -> Result<()> {
        for (q, list) in self.results.iter().enumerate() {
            if list.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::InvalidParams(format!(
                    "ground truth for query {q} is not strictly sorted"
                )));
            }
            if let Some(n) = list.iter().find(|n| !(n.distance <= self.radius)) {
                return Err(Error::InvalidParams(format!(
                    "ground truth for query {q} holds point {} at distance {} > {}",
                    n.id, n.distance, self.radius
                )));
            }
        }
        Ok(())
    }
}

fn scan(points: &PointSet, queries: &PointSet, radius: f32, q: usize) -> Vec<Neighbor> {
    let query = queries.row(q);
    let mut hits: Vec<Neighbor> = (0..points.len() as u32)
        .filter_map(|id| {
            let d = points.distance_to(query, id);
            (d <= radius).then_some(Neighbor::new(id, d))
        })
        .collect();
    hits.sort_unstable();
    hits
}

/// Exhaustive range search, parallel over queries.
pub fn brute_force_range(points: &PointSet, queries: &PointSet, radius: f32) -> Result<RangeGroundTruth> {
    check_dims(points, queries)?;
    let results = par::map_indexed(queries.len(), |q| scan(points, queries, radius, q));
    Ok(RangeGroundTruth { radius, results })
}

/// Single-threaded [`brute_force_range`].
pub fn brute_force_range_sequential(
    points: &PointSet,
    queries: &PointSet,
    radius: f32,
) -> Result<RangeGroundTruth> {
    check_dims(points, queries)?;
    let results = par::map_indexed_sequential(queries.len(), |q| scan(points, queries, radius, q));
    Ok(RangeGroundTruth { radius, results })
}

fn check_dims(points: &PointSet, queries: &PointSet) -> Result<()> {
    if points.dim() != queries.dim() {
        return Err(Error::DimensionMismatch {
            expected: points.dim(),
            found: queries.dim(),
        });
    }
    Ok(())
}

/// Fraction of all true range results that were reported, summed over
/// queries. Every reported id must be a true result; a query reporting
/// anything else is an error. With no true results at all the score is 1.
pub fn average_precision<R: AsRef<[Neighbor]>>(gt: &RangeGroundTruth, results: &[R]) -> Result<f64> {
    if gt.num_queries() != results.len() {
        return Err(Error::InvalidParams(format!(
            "ground truth has {} queries, results have {}",
            gt.num_queries(),
            results.len()
        )));
    }
    let mut found = 0usize;
    let mut total = 0usize;
    for (q, (truth, reported)) in gt.results.iter().zip(results).enumerate() {
        let truth_ids: FxHashSet<u32> = truth.iter().map(|n| n.id).collect();
        let mut hit: FxHashSet<u32> = FxHashSet::default();
        for n in reported.as_ref() {
            if !truth_ids.contains(&n.id) {
                return Err(Error::InvalidResult { query: q, id: n.id });
            }
            hit.insert(n.id);
        }
        found += hit.len();
        total += truth.len();
    }
    Ok(if total == 0 {
        1.0
    } else {
        found as f64 / total as f64
    })
}

/// One point of a beam-width sweep.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BenchmarkRecord {
    pub strategy: Strategy,
    pub beam: usize,
    pub early_stop: bool,
    pub threads: usize,
    pub queries: usize,
    /// Wall time of the timed pass; unknown for records read back from CSV.
    pub wall_secs: Option<f64>,
    pub qps: f64,
    pub ap: f64,
    pub distance_computations: u64,
}

#[derive(Serialize, Deserialize)]
struct BenchmarkRow {
    strategy: String,
    b: usize,
    early_stop: bool,
    threads: usize,
    qps: f64,
    ap: f64,
    dist_comps: u64,
}

/// Writes `strategy,b,early_stop,threads,qps,ap,dist_comps` rows with a
/// header line.
pub fn write_benchmark_csv<W: Write>(records: &[BenchmarkRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in records {
        w.serialize(BenchmarkRow {
            strategy: r.strategy.to_string(),
            b: r.beam,
            early_stop: r.early_stop,
            threads: r.threads,
            qps: r.qps,
            ap: r.ap,
            dist_comps: r.distance_computations,
        })?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_benchmark_csv<R: Read>(input: R) -> Result<Vec<BenchmarkRecord>> {
    let mut rd = csv::Reader::from_reader(input);
    rd.deserialize::<BenchmarkRow>()
        .map(|row| {
            let row = row?;
            Ok(BenchmarkRecord {
                strategy: row.strategy.parse()?,
                beam: row.b,
                early_stop: row.early_stop,
                threads: row.threads,
                queries: 0,
                wall_secs: None,
                qps: row.qps,
                ap: row.ap,
                distance_computations: row.dist_comps,
            })
        })
        .collect()
}

/// Runs every sweep configuration once untimed and once timed inside a
/// pool of `threads` workers, returning each record with the timed batch.
pub fn run_benchmark_detailed(
    index: &RangeIndex<'_>,
    queries: &PointSet,
    gt: &RangeGroundTruth,
    sweep: &[RangeParams],
    threads: usize,
) -> Result<Vec<(BenchmarkRecord, BatchResult)>> {
    if gt.num_queries() != queries.len() {
        return Err(Error::InvalidParams(format!(
            "ground truth has {} queries, query set has {}",
            gt.num_queries(),
            queries.len()
        )));
    }
    let mut out = Vec::with_capacity(sweep.len());
    for params in sweep {
        if params.radius != gt.radius {
            return Err(Error::InvalidParams(format!(
                "sweep radius {} differs from ground-truth radius {}",
                params.radius, gt.radius
            )));
        }
        let ((warm, timed), used) = par::with_threads(threads, || {
            let warm = batch_range_search(index, queries, params);
            let t0 = Instant::now();
            let batch = batch_range_search(index, queries, params);
            (warm, batch.map(|b| (b, t0.elapsed().as_secs_f64())))
        });
        warm?;
        let (batch, secs) = timed?;
        let ap = average_precision(gt, &batch.results)?;
        let record = BenchmarkRecord {
            strategy: params.strategy,
            beam: params.beam,
            early_stop: params.early_stop.enabled,
            threads: used,
            queries: queries.len(),
            wall_secs: Some(secs),
            qps: queries.len() as f64 / secs.max(f64::MIN_POSITIVE),
            ap,
            distance_computations: batch.totals.distance_computations,
        };
        out.push((record, batch));
    }
    Ok(out)
}

pub fn run_benchmark(
    index: &RangeIndex<'_>,
    queries: &PointSet,
    gt: &RangeGroundTruth,
    sweep: &[RangeParams],
    threads: usize,
) -> Result<Vec<BenchmarkRecord>> {
    Ok(run_benchmark_detailed(index, queries, gt, sweep, threads)?
        .into_iter()
        .map(|(r, _)| r)
        .collect())
}

/// Records not dominated on (AP, QPS), sorted by AP then QPS ascending.
pub fn pareto_frontier(records: &[BenchmarkRecord]) -> Vec<BenchmarkRecord> {
    let mut sorted: Vec<BenchmarkRecord> = records.to_vec();
    // by AP descending, QPS descending: a record is dominated iff some
    // earlier record has QPS at least as high (with one strict inequality)
    sorted.sort_by(|a, b| b.ap.total_cmp(&a.ap).then(b.qps.total_cmp(&a.qps)));
    let mut frontier: Vec<BenchmarkRecord> = Vec::new();
    let mut best_qps = f64::NEG_INFINITY;
    let mut best_ap = f64::NAN;
    for r in sorted {
        let dominated = r.qps < best_qps || (r.qps == best_qps && r.ap < best_ap);
        if !dominated {
            if r.qps > best_qps || best_ap.is_nan() {
                best_ap = r.ap;
            }
            best_qps = best_qps.max(r.qps);
            frontier.push(r);
        }
    }
    frontier.reverse();
    frontier
}
