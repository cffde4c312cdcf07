//! Seeded Gaussian-mixture datasets whose range result sizes are skewed the
//! way real embedding datasets are: most queries match nothing, a few match
//! hundreds of points.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::points::{DistanceKind, PointSet};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SynthParams {
    pub n: usize,
    pub dim: usize,
    pub clusters: usize,
    /// Per-coordinate standard deviation around each center.
    pub spread: f32,
    pub seed: u64,
    /// Queries placed exactly at cluster centers (many results).
    pub center_queries: usize,
    /// Queries copied from random data points (few results).
    pub member_queries: usize,
    /// Queries at midpoints between far-apart centers (no results).
    pub far_queries: usize,
}

impl SynthParams {
    /// Default query mix: one center and one member query per cluster, and
    /// three far queries per cluster.
    pub fn new(n: usize, dim: usize, clusters: usize, spread: f32, seed: u64) -> Self {
        SynthParams {
            n,
            dim,
            clusters,
            spread,
            seed,
            center_queries: clusters,
            member_queries: clusters,
            far_queries: 3 * clusters,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.clusters == 0 || self.n < self.clusters {
            return Err(Error::InvalidParams(format!(
                "need n >= clusters >= 1, got n={} clusters={}",
                self.n, self.clusters
            )));
        }
        if self.dim == 0 {
            return Err(Error::InvalidParams("dimension must be at least 1".into()));
        }
        if !(self.spread >= 0.0) || !self.spread.is_finite() {
            return Err(Error::InvalidParams(format!("bad spread {}", self.spread)));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum QueryKind {
    Center,
    Member,
    Far,
}

/// Squared-L2 radii sized to a cluster's spread: at `dense` a center query
/// captures about half its cluster.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SuggestedRadii {
    pub sparse: f32,
    pub medium: f32,
    pub dense: f32,
}

impl SuggestedRadii {
    pub fn as_array(&self) -> [f32; 3] {
        [self.sparse, self.medium, self.dense]
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SynthDataset {
    pub points: PointSet,
    pub queries: PointSet,
    pub kinds: Vec<QueryKind>,
    pub centers: Vec<Vec<f32>>,
    pub radii: SuggestedRadii,
}

pub fn synth_clustered(params: &SynthParams) -> Result<SynthDataset> {
    params.validate()?;
    let SynthParams {
        n,
        dim,
        clusters,
        spread,
        ..
    } = *params;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);

    let centers: Vec<Vec<f32>> = (0..clusters)
        .map(|_| (0..dim).map(|_| rng.random_range(-1.0f32..1.0)).collect())
        .collect();

    let mut data = Vec::with_capacity(n * dim);
    for i in 0..n {
        let c = &centers[i % clusters];
        for &x in c {
            let z: f32 = StandardNormal.sample(&mut rng);
            data.push(x + spread * z);
        }
    }

    let mut queries = Vec::new();
    let mut kinds = Vec::new();
    for k in 0..params.center_queries {
        queries.extend_from_slice(&centers[k % clusters]);
        kinds.push(QueryKind::Center);
    }
    for _ in 0..params.member_queries {
        let i = rng.random_range(0..n);
        queries.extend_from_slice(&data[i * dim..(i + 1) * dim]);
        kinds.push(QueryKind::Member);
    }
    for _ in 0..params.far_queries {
        queries.extend(far_point(&centers, spread, &mut rng));
        kinds.push(QueryKind::Far);
    }

    let dense = spread * spread * dim as f32;
    let radii = SuggestedRadii {
        sparse: 0.45 * dense,
        medium: 0.7 * dense,
        dense,
    };
    Ok(SynthDataset {
        points: PointSet::from_f32(dim, data, DistanceKind::SquaredL2)?,
        queries: PointSet::from_f32(dim, queries, DistanceKind::SquaredL2)?,
        kinds,
        centers,
        radii,
    })
}

/// Midpoint between a random center and the farthest of a few random
/// others; with a single cluster, a corner offset well outside its spread.
fn far_point(centers: &[Vec<f32>], spread: f32, rng: &mut ChaCha8Rng) -> Vec<f32> {
    let a = &centers[rng.random_range(0..centers.len())];
    if centers.len() == 1 {
        let step = (10.0 * spread).max(1.0);
        return a
            .iter()
            .map(|&x| if rng.random_bool(0.5) { x + step } else { x - step })
            .collect();
    }
    let sq = |u: &[f32], v: &[f32]| u.iter().zip(v).map(|(x, y)| (x - y) * (x - y)).sum::<f32>();
    let b = (0..3)
        .map(|_| &centers[rng.random_range(0..centers.len())])
        .filter(|b| !std::ptr::eq(*b, a))
        .max_by(|x, y| sq(a, x).total_cmp(&sq(a, y)))
        .unwrap_or_else(|| {
            centers
                .iter()
                .max_by(|x, y| sq(a, x).total_cmp(&sq(a, y)))
                .expect("at least two centers")
        });
    a.iter().zip(b).map(|(x, y)| 0.5 * (x + y)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::brute_force_range;

    #[test]
    fn zero_spread_single_cluster_is_one_point() {
        let ds = synth_clustered(&SynthParams::new(50, 4, 1, 0.0, 3)).unwrap();
        let first = ds.points.row(0).to_f32_vec();
        for i in 0..50 {
            assert_eq!(ds.points.row(i).to_f32_vec(), first);
        }
        let center = PointSet::from_f32(4, first, DistanceKind::SquaredL2).unwrap();
        let gt = brute_force_range(&ds.points, &center, 0.0).unwrap();
        assert_eq!(gt.results[0].len(), 50);
    }

    #[test]
    fn fixed_seed_is_bit_identical() {
        let p = SynthParams::new(500, 8, 5, 0.1, 42);
        assert_eq!(synth_clustered(&p).unwrap(), synth_clustered(&p).unwrap());
        let other = synth_clustered(&SynthParams { seed: 43, ..p }).unwrap();
        assert_ne!(synth_clustered(&p).unwrap().points, other.points);
    }

    #[test]
    fn query_mix_and_labels() {
        let ds = synth_clustered(&SynthParams::new(400, 8, 4, 0.1, 1)).unwrap();
        assert_eq!(ds.queries.len(), 4 + 4 + 12);
        assert_eq!(ds.kinds.len(), ds.queries.len());
        assert_eq!(ds.kinds.iter().filter(|k| **k == QueryKind::Far).count(), 12);
        assert!(ds.radii.sparse < ds.radii.medium && ds.radii.medium < ds.radii.dense);
    }

    #[test]
    fn invalid_counts_rejected() {
        assert!(synth_clustered(&SynthParams::new(3, 4, 5, 0.1, 0)).is_err());
        assert!(synth_clustered(&SynthParams::new(3, 4, 0, 0.1, 0)).is_err());
        assert!(synth_clustered(&SynthParams::new(3, 0, 1, 0.1, 0)).is_err());
        assert!(synth_clustered(&SynthParams::new(3, 2, 1, -1.0, 0)).is_err());
    }
}
