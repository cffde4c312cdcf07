#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rangeann::{build_index, BuildParams, DistanceKind, PointSet, ProximityGraph};

pub fn uniform(n: usize, dim: usize, seed: u64) -> PointSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data = (0..n * dim).map(|_| rng.random_range(-1.0f32..1.0)).collect();
    PointSet::from_f32(dim, data, DistanceKind::SquaredL2).unwrap()
}

pub fn build(points: &PointSet, max_degree: usize, build_beam: usize, seed: u64) -> ProximityGraph {
    let params = BuildParams {
        max_degree,
        build_beam,
        alpha: 1.15,
        seed,
        parallel: false,
    };
    build_index(points, &params).unwrap()
}

/// Plain squared distance, kept separate from the library kernels.
pub fn sq(a: &[f32], b: &[f32]) -> f32 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

pub fn sorted_ids<'a>(it: impl IntoIterator<Item = &'a rangeann::Neighbor>) -> Vec<u32> {
    let mut ids: Vec<u32> = it.into_iter().map(|n| n.id).collect();
    ids.sort_unstable();
    ids
}
