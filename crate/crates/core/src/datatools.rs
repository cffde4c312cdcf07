//! Dataset characterization: how much of the data falls inside a radius,
//! and how range result sizes are distributed across queries.

use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::eval::RangeGroundTruth;
use crate::points::PointSet;
use crate::{par, Error, Result};

pub use crate::synth::{synth_clustered, QueryKind, SuggestedRadii, SynthDataset, SynthParams};

/// Mean fraction of the dataset inside the ball of each radius.
#[derive(Clone, Debug, PartialEq)]
pub struct CaptureCurve {
    pub radii: Vec<f32>,
    pub fraction: Vec<f64>,
}

impl CaptureCurve {
    /// Radii mapped linearly from `[min, max]` onto `[0, 1]`.
    pub fn normalized_radii(&self) -> Vec<f64> {
        let (Some(&lo), Some(&hi)) = (self.radii.first(), self.radii.last()) else {
            return Vec::new();
        };
        let span = (hi - lo) as f64;
        self.radii
            .iter()
            .map(|&r| if span > 0.0 { (r - lo) as f64 / span } else { 0.0 })
            .collect()
    }

    /// Writes `radius,fraction` rows.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        #[derive(Serialize)]
        struct Row {
            radius: f32,
            fraction: f64,
        }
        let mut w = csv::Writer::from_writer(out);
        for (&radius, &fraction) in self.radii.iter().zip(&self.fraction) {
            w.serialize(Row { radius, fraction })?;
        }
        w.flush()?;
        Ok(())
    }
}

/// For each radius, the mean over queries of `|ball(q, r)| / m`, where the
/// ball is counted over all `m = n` points (`sample == 0`) or over a seeded
/// sample of `m = sample` points.
pub fn percent_captured(
    points: &PointSet,
    queries: &PointSet,
    radii: &[f32],
    sample: usize,
    seed: u64,
) -> Result<CaptureCurve> {
    if radii.is_empty() {
        return Err(Error::InvalidParams("no radii given".into()));
    }
    if radii.windows(2).any(|w| !(w[0] <= w[1])) {
        return Err(Error::InvalidParams("radii must be ascending".into()));
    }
    if points.dim() != queries.dim() {
        return Err(Error::DimensionMismatch {
            expected: points.dim(),
            found: queries.dim(),
        });
    }
    if points.is_empty() || queries.is_empty() {
        return Err(Error::EmptyPointSet);
    }
    let ids: Vec<u32> = if sample == 0 || sample >= points.len() {
        (0..points.len() as u32).collect()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rand::seq::index::sample(&mut rng, points.len(), sample)
            .into_iter()
            .map(|i| i as u32)
            .collect()
    };
    let per_query: Vec<Vec<u64>> = par::map_indexed(queries.len(), |q| {
        let query = queries.row(q);
        let mut d: Vec<f32> = ids.iter().map(|&id| points.distance_to(query, id)).collect();
        d.sort_unstable_by(f32::total_cmp);
        radii
            .iter()
            .map(|&r| d.partition_point(|&x| x <= r) as u64)
            .collect()
    });
    let denom = (ids.len() * queries.len()) as f64;
    let fraction = (0..radii.len())
        .map(|k| per_query.iter().map(|c| c[k]).sum::<u64>() as f64 / denom)
        .collect();
    Ok(CaptureCurve {
        radii: radii.to_vec(),
        fraction,
    })
}

/// Upper edges of the result-size buckets: exactly zero, then
/// `(10^(k-1), 10^k]` for `k = 1..=5`.
pub const BUCKET_EDGES: [u64; 6] = [0, 10, 100, 1_000, 10_000, 100_000];

/// Number of queries per result-size bucket.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FrequencyTable {
    pub counts: [u64; 6],
    /// Queries with more than 10^5 results.
    pub overflow: u64,
}

impl FrequencyTable {
    pub fn has_overflow(&self) -> bool {
        self.overflow > 0
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum::<u64>() + self.overflow
    }

    pub fn labels() -> [&'static str; 6] {
        ["0", "<=10", "<=100", "<=1000", "<=10000", "<=100000"]
    }

    /// Writes `bucket,count` rows; the overflow row appears only when used.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        #[derive(Serialize)]
        struct Row<'a> {
            bucket: &'a str,
            count: u64,
        }
        let mut w = csv::Writer::from_writer(out);
        for (bucket, &count) in Self::labels().into_iter().zip(&self.counts) {
            w.serialize(Row { bucket, count })?;
        }
        if self.has_overflow() {
            w.serialize(Row {
                bucket: ">100000",
                count: self.overflow,
            })?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Buckets the per-query result counts of a ground truth.
pub fn frequency_distribution(gt: &RangeGroundTruth) -> FrequencyTable {
    frequency_of_counts(gt.results.iter().map(Vec::len))
}

pub fn frequency_of_counts(sizes: impl IntoIterator<Item = usize>) -> FrequencyTable {
    let mut table = FrequencyTable::default();
    for size in sizes {
        let size = size as u64;
        match BUCKET_EDGES.iter().position(|&edge| size <= edge) {
            Some(b) => table.counts[b] += 1,
            None => table.overflow += 1,
        }
    }
    table
}
