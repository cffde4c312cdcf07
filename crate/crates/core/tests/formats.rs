use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rangeann::eval::RangeGroundTruth;
use rangeann::io;
use rangeann::{DistanceKind, Neighbor, PointSet, ProximityGraph};

fn random_points(rng: &mut ChaCha8Rng, case: usize) -> (PointSet, &'static str) {
    let n = rng.random_range(0..40);
    let d = rng.random_range(1..20);
    match case % 3 {
        0 => {
            let data = (0..n * d).map(|_| rng.random_range(-1e3f32..1e3)).collect();
            (PointSet::from_f32(d, data, DistanceKind::SquaredL2).unwrap(), "fbin")
        }
        1 => {
            let data = (0..n * d).map(|_| rng.random()).collect();
            (PointSet::from_u8(d, data, DistanceKind::SquaredL2).unwrap(), "u8bin")
        }
        _ => {
            let data = (0..n * d).map(|_| rng.random()).collect();
            (PointSet::from_i8(d, data, DistanceKind::SquaredL2).unwrap(), "i8bin")
        }
    }
}

#[test]
fn point_files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for case in 0..100 {
        let (points, ext) = random_points(&mut rng, case);
        let path = dir.path().join(format!("p{case}.{ext}"));
        io::write_points(&points, &path).unwrap();
        let first = std::fs::read(&path).unwrap();
        assert_eq!(first.len(), 8 + points.len() * points.dim() * points.elem().size());
        let back = io::read_points(&path, DistanceKind::SquaredL2).unwrap();
        assert_eq!(back, points, "case {case}");
        io::write_points(&back, &path).unwrap();
        assert_eq!(std::fs::read(&path).unwrap(), first, "case {case} not byte-stable");
    }
}

#[test]
fn header_example_is_byte_exact() {
    let pts = PointSet::from_f32(3, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0], DistanceKind::SquaredL2).unwrap();
    let bytes = io::encode_points(&pts).unwrap();
    assert_eq!(bytes.len(), 32);
    assert_eq!(&bytes[..8], &[2, 0, 0, 0, 3, 0, 0, 0]);
    assert_eq!(&bytes[8..12], &1.0f32.to_le_bytes());
    assert_eq!(&bytes[28..32], &6.0f32.to_le_bytes());
}

#[test]
fn extension_must_match_element_type() {
    let dir = tempfile::tempdir().unwrap();
    let pts = PointSet::from_u8(2, vec![1, 2], DistanceKind::SquaredL2).unwrap();
    assert!(io::write_points(&pts, dir.path().join("x.fbin")).is_err());
    assert!(io::write_points(&pts, dir.path().join("x.bin")).is_err());
    std::fs::write(dir.path().join("short.fbin"), [1, 0, 0, 0, 2, 0, 0, 0, 0]).unwrap();
    assert!(io::read_points(dir.path().join("short.fbin"), DistanceKind::SquaredL2).is_err());
}

fn random_gt(rng: &mut ChaCha8Rng) -> RangeGroundTruth {
    let nq = rng.random_range(0..30);
    let results = (0..nq)
        .map(|_| {
            let k = if rng.random_bool(0.4) { 0 } else { rng.random_range(1..50) };
            let mut ids: Vec<u32> = rand::seq::index::sample(rng, 1000, k)
                .into_iter()
                .map(|i| i as u32)
                .collect();
            ids.sort_unstable();
            let mut list: Vec<Neighbor> = ids
                .into_iter()
                .map(|id| Neighbor::new(id, rng.random_range(0.0f32..5.0)))
                .collect();
            list.sort_unstable();
            list
        })
        .collect();
    RangeGroundTruth { radius: 5.0, results }
}

#[test]
fn ground_truth_files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for case in 0..100 {
        let gt = random_gt(&mut rng);
        let path = dir.path().join(format!("gt{case}.bin"));
        io::write_gt(&gt, &path).unwrap();
        let first = std::fs::read(&path).unwrap();
        assert_eq!(first.len(), 8 + 4 * gt.num_queries() + 8 * gt.total());
        let back = io::read_gt(&path, gt.radius).unwrap();
        assert_eq!(back, gt, "case {case}");
        io::write_gt(&back, &path).unwrap();
        assert_eq!(std::fs::read(&path).unwrap(), first, "case {case} not byte-stable");
    }
}

#[test]
fn ground_truth_reader_sorts_lists() {
    let gt = RangeGroundTruth {
        radius: 1.0,
        results: vec![vec![Neighbor::new(4, 0.9), Neighbor::new(2, 0.1)]],
    };
    let mut bytes = Vec::new();
    io::write_gt_to(&gt, &mut bytes).unwrap();
    let back = io::read_gt_from(&bytes, 1.0).unwrap();
    assert_eq!(back.results[0], vec![Neighbor::new(2, 0.1), Neighbor::new(4, 0.9)]);
}

fn random_graph(rng: &mut ChaCha8Rng) -> ProximityGraph {
    let n: usize = rng.random_range(1..60);
    let r: usize = rng.random_range(1..12);
    let adjacency = (0..n)
        .map(|i| {
            let others: Vec<u32> = (0..n as u32).filter(|&j| j as usize != i).collect();
            let k = rng.random_range(0..=r.min(others.len()));
            rand::seq::index::sample(rng, others.len(), k)
                .into_iter()
                .map(|x| others[x])
                .collect()
        })
        .collect();
    let starts = rng.random_range(1..=n.min(3));
    let start = rand::seq::index::sample(rng, n, starts)
        .into_iter()
        .map(|x| x as u32)
        .collect();
    ProximityGraph::from_parts(r, adjacency, start).unwrap()
}

#[test]
fn graph_files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for case in 0..100 {
        let g = random_graph(&mut rng);
        let path = dir.path().join(format!("g{case}.rgg"));
        io::save_graph(&g, &path).unwrap();
        let first = std::fs::read(&path).unwrap();
        let back = io::load_graph(&path).unwrap();
        assert_eq!(back, g, "case {case}");
        io::save_graph(&back, &path).unwrap();
        assert_eq!(std::fs::read(&path).unwrap(), first, "case {case} not byte-stable");
    }
}

#[test]
fn corrupt_graph_files_are_rejected() {
    let g = ProximityGraph::from_parts(2, vec![vec![1], vec![0]], vec![0]).unwrap();
    let mut bytes = Vec::new();
    io::write_graph_to(&g, &mut bytes).unwrap();
    assert!(io::read_graph_from(&bytes[..]).is_ok());

    let mut trailing = bytes.clone();
    trailing.push(0);
    assert!(io::read_graph_from(&trailing[..]).is_err());
    assert!(io::read_graph_from(&bytes[..bytes.len() - 1]).is_err());
    let mut magic = bytes.clone();
    magic[0] = b'X';
    assert!(io::read_graph_from(&magic[..]).is_err());
    // point node 0 at itself
    let mut self_loop = bytes.clone();
    let at = bytes.len() - 12;
    self_loop[at..at + 4].copy_from_slice(&0u32.to_le_bytes());
    assert!(io::read_graph_from(&self_loop[..]).is_err());
}
