//! Dense vector storage and the two distance functions.
//!
//! Euclidean distances are always *squared*, matching the convention used
//! by the public range-search ground truth files. Inner-product distances
//! are negated so that smaller is closer under both metrics.

use std::cmp::Ordering;
use std::fmt;
use std::hash::Hasher;

use rustc_hash::{FxHashSet, FxHasher};

use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DistanceKind {
    SquaredL2,
    NegInnerProduct,
}

impl fmt::Display for DistanceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DistanceKind::SquaredL2 => "l2",
            DistanceKind::NegInnerProduct => "ip",
        })
    }
}

impl std::str::FromStr for DistanceKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "l2" | "sql2" | "euclidean" => Ok(DistanceKind::SquaredL2),
            "ip" | "mips" | "inner_product" => Ok(DistanceKind::NegInnerProduct),
            other => Err(Error::InvalidParams(format!("unknown metric '{other}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ElemKind {
    F32,
    U8,
    I8,
}

impl ElemKind {
    pub const fn size(self) -> usize {
        match self {
            ElemKind::F32 => 4,
            ElemKind::U8 | ElemKind::I8 => 1,
        }
    }
}

/// Row-major element buffer.
#[derive(Clone, Debug, PartialEq)]
pub enum Storage {
    F32(Vec<f32>),
    U8(Vec<u8>),
    I8(Vec<i8>),
}

impl Storage {
    pub fn len(&self) -> usize {
        match self {
            Storage::F32(v) => v.len(),
            Storage::U8(v) => v.len(),
            Storage::I8(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn elem(&self) -> ElemKind {
        match self {
            Storage::F32(_) => ElemKind::F32,
            Storage::U8(_) => ElemKind::U8,
            Storage::I8(_) => ElemKind::I8,
        }
    }
}

/// Borrowed single vector of any supported element type.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum VectorRef<'a> {
    F32(&'a [f32]),
    U8(&'a [u8]),
    I8(&'a [i8]),
}

impl<'a> VectorRef<'a> {
    pub fn len(&self) -> usize {
        match self {
            VectorRef::F32(v) => v.len(),
            VectorRef::U8(v) => v.len(),
            VectorRef::I8(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn elem(&self) -> ElemKind {
        match self {
            VectorRef::F32(_) => ElemKind::F32,
            VectorRef::U8(_) => ElemKind::U8,
            VectorRef::I8(_) => ElemKind::I8,
        }
    }

    pub fn to_f32_vec(&self) -> Vec<f32> {
        match self {
            VectorRef::F32(v) => v.to_vec(),
            VectorRef::U8(v) => v.iter().map(|&x| x as f32).collect(),
            VectorRef::I8(v) => v.iter().map(|&x| x as f32).collect(),
        }
    }
}

impl<'a> From<&'a [f32]> for VectorRef<'a> {
    fn from(v: &'a [f32]) -> Self {
        VectorRef::F32(v)
    }
}

impl<'a> From<&'a [u8]> for VectorRef<'a> {
    fn from(v: &'a [u8]) -> Self {
        VectorRef::U8(v)
    }
}

impl<'a> From<&'a [i8]> for VectorRef<'a> {
    fn from(v: &'a [i8]) -> Self {
        VectorRef::I8(v)
    }
}

impl<'a> From<&'a Vec<f32>> for VectorRef<'a> {
    fn from(v: &'a Vec<f32>) -> Self {
        VectorRef::F32(v)
    }
}

/// A point id paired with its distance to some query.
///
/// Ordering is by `(distance, id)`, using IEEE total order on the distance,
/// so sorting is deterministic even with ties.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Neighbor {
    pub id: u32,
    pub distance: f32,
}

impl Neighbor {
    pub const fn new(id: u32, distance: f32) -> Self {
        Neighbor { id, distance }
    }
}

impl Eq for Neighbor {}

impl Ord for Neighbor {
    fn cmp(&self, other: &Self) -> Ordering {
        self.distance
            .total_cmp(&other.distance)
            .then(self.id.cmp(&other.id))
    }
}

impl PartialOrd for Neighbor {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// `n` points of dimension `dim`, stored row-major, with the metric used to
/// compare them.
#[derive(Clone, Debug, PartialEq)]
pub struct PointSet {
    n: usize,
    dim: usize,
    storage: Storage,
    metric: DistanceKind,
}

impl PointSet {
    pub fn new(dim: usize, storage: Storage, metric: DistanceKind) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParams("dimension must be at least 1".into()));
        }
        if !storage.len().is_multiple_of(dim) {
            return Err(Error::InvalidParams(format!(
                "buffer of {} elements is not a multiple of dimension {dim}",
                storage.len()
            )));
        }
        Ok(PointSet {
            n: storage.len() / dim,
            dim,
            storage,
            metric,
        })
    }

    pub fn from_f32(dim: usize, data: Vec<f32>, metric: DistanceKind) -> Result<Self> {
        Self::new(dim, Storage::F32(data), metric)
    }

    pub fn from_u8(dim: usize, data: Vec<u8>, metric: DistanceKind) -> Result<Self> {
        Self::new(dim, Storage::U8(data), metric)
    }

    pub fn from_i8(dim: usize, data: Vec<i8>, metric: DistanceKind) -> Result<Self> {
        Self::new(dim, Storage::I8(data), metric)
    }

    /// Builds an f32 set from rows; every row must have the same length.
    pub fn from_rows(rows: &[Vec<f32>], metric: DistanceKind) -> Result<Self> {
        let dim = rows.first().map(Vec::len).unwrap_or(1);
        let mut data = Vec::with_capacity(rows.len() * dim);
        for row in rows {
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Self::from_f32(dim, data, metric)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn metric(&self) -> DistanceKind {
        self.metric
    }

    pub fn elem(&self) -> ElemKind {
        self.storage.elem()
    }

    pub fn storage(&self) -> &Storage {
        &self.storage
    }

    pub fn with_metric(mut self, metric: DistanceKind) -> Self {
        self.metric = metric;
        self
    }

    /// Row `i`. Panics if `i >= len()`.
    #[inline]
    pub fn row(&self, i: usize) -> VectorRef<'_> {
        let range = i * self.dim..(i + 1) * self.dim;
        match &self.storage {
            Storage::F32(v) => VectorRef::F32(&v[range]),
            Storage::U8(v) => VectorRef::U8(&v[range]),
            Storage::I8(v) => VectorRef::I8(&v[range]),
        }
    }

    pub fn get(&self, i: usize) -> Option<VectorRef<'_>> {
        (i < self.n).then(|| self.row(i))
    }

    pub fn check_id(&self, id: u32) -> Result<()> {
        if (id as usize) < self.n {
            Ok(())
        } else {
            Err(Error::IdOutOfRange {
                id: id as u64,
                n: self.n,
            })
        }
    }

    /// Distance between two stored points. Panics on out-of-range ids.
    #[inline]
    pub fn distance_between(&self, a: u32, b: u32) -> f32 {
        distance_unchecked(self.row(a as usize), self.row(b as usize), self.metric)
    }

    /// Distance from `query` to stored point `id`, with the query's
    /// dimension assumed checked.
    #[inline]
    pub(crate) fn distance_to(&self, query: VectorRef<'_>, id: u32) -> f32 {
        distance_unchecked(query, self.row(id as usize), self.metric)
    }

    pub fn check_query(&self, query: VectorRef<'_>) -> Result<()> {
        if query.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: query.len(),
            });
        }
        Ok(())
    }

    /// Stable content hash; used to tie derived structures (quantized
    /// codes, graphs) to the data they were built from.
    pub fn fingerprint(&self) -> u64 {
        let mut h = FxHasher::default();
        h.write_usize(self.n);
        h.write_usize(self.dim);
        match &self.storage {
            Storage::F32(v) => v.iter().for_each(|x| h.write_u32(x.to_bits())),
            Storage::U8(v) => h.write(v),
            Storage::I8(v) => v.iter().for_each(|&x| h.write_i8(x)),
        }
        h.finish()
    }
}

/// Distance between two vectors under `kind`.
///
/// Float inputs accumulate in f32; integer inputs accumulate exactly in
/// 64-bit integers and convert once at the end.
pub fn distance(a: VectorRef<'_>, b: VectorRef<'_>, kind: DistanceKind) -> Result<f32> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            found: b.len(),
        });
    }
    Ok(distance_unchecked(a, b, kind))
}

#[inline]
pub(crate) fn distance_unchecked(a: VectorRef<'_>, b: VectorRef<'_>, kind: DistanceKind) -> f32 {
    use VectorRef::*;
    match (a, b, kind) {
        (F32(a), F32(b), DistanceKind::SquaredL2) => sq_l2_f32(a, b),
        (F32(a), F32(b), DistanceKind::NegInnerProduct) => -dot_f32(a, b),
        (U8(a), U8(b), DistanceKind::SquaredL2) => sq_l2_u8(a, b) as f32,
        (U8(a), U8(b), DistanceKind::NegInnerProduct) => -(dot_u8(a, b) as f32),
        (I8(a), I8(b), DistanceKind::SquaredL2) => sq_l2_i8(a, b) as f32,
        (I8(a), I8(b), DistanceKind::NegInnerProduct) => -(dot_i8(a, b) as f32),
        // mixed element types: promote both sides
        (a, b, kind) => {
            let (a, b) = (a.to_f32_vec(), b.to_f32_vec());
            match kind {
                DistanceKind::SquaredL2 => sq_l2_f32(&a, &b),
                DistanceKind::NegInnerProduct => -dot_f32(&a, &b),
            }
        }
    }
}

const LANES: usize = 8;

#[inline]
pub(crate) fn sq_l2_f32(a: &[f32], b: &[f32]) -> f32 {
    let mut acc = [0f32; LANES];
    let (ca, cb) = (a.chunks_exact(LANES), b.chunks_exact(LANES));
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        for i in 0..LANES {
            let d = x[i] - y[i];
            acc[i] += d * d;
        }
    }
    let mut tail = 0f32;
    for (x, y) in ra.iter().zip(rb) {
        let d = x - y;
        tail += d * d;
    }
    acc.iter().sum::<f32>() + tail
}

#[inline]
pub(crate) fn dot_f32(a: &[f32], b: &[f32]) -> f32 {
    let mut acc = [0f32; LANES];
    let (ca, cb) = (a.chunks_exact(LANES), b.chunks_exact(LANES));
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        for i in 0..LANES {
            acc[i] += x[i] * y[i];
        }
    }
    let tail: f32 = ra.iter().zip(rb).map(|(x, y)| x * y).sum();
    acc.iter().sum::<f32>() + tail
}

#[inline]
fn sq_l2_u8(a: &[u8], b: &[u8]) -> u64 {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| {
            let d = x as i32 - y as i32;
            (d * d) as u64
        })
        .sum()
}

#[inline]
fn dot_u8(a: &[u8], b: &[u8]) -> u64 {
    a.iter().zip(b).map(|(&x, &y)| x as u64 * y as u64).sum()
}

#[inline]
fn sq_l2_i8(a: &[i8], b: &[i8]) -> u64 {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| {
            let d = x as i32 - y as i32;
            (d * d) as u64
        })
        .sum()
}

#[inline]
fn dot_i8(a: &[i8], b: &[i8]) -> i64 {
    a.iter().zip(b).map(|(&x, &y)| x as i64 * y as i64).sum()
}

/// Keeps the candidates whose exact distance to `query` is at most `radius`.
///
/// Duplicate ids collapse to one entry; the output is sorted by
/// `(distance, id)`.
pub fn rerank(
    query: VectorRef<'_>,
    candidates: &[u32],
    points: &PointSet,
    radius: f32,
) -> Result<Vec<Neighbor>> {
    points.check_query(query)?;
    let mut seen = FxHashSet::default();
    let mut out = Vec::new();
    for &id in candidates {
        points.check_id(id)?;
        if !seen.insert(id) {
            continue;
        }
        let d = points.distance_to(query, id);
        if d <= radius {
            out.push(Neighbor::new(id, d));
        }
    }
    out.sort_unstable();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn f(v: &[f32]) -> VectorRef<'_> {
        VectorRef::F32(v)
    }

    #[test]
    fn hand_computed_distances() {
        let l2 = DistanceKind::SquaredL2;
        let ip = DistanceKind::NegInnerProduct;
        assert_eq!(distance(f(&[0.0, 0.0]), f(&[3.0, 4.0]), l2).unwrap(), 25.0);
        assert_eq!(distance(f(&[1.0, 2.0]), f(&[3.0, 4.0]), ip).unwrap(), -11.0);
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let err = distance(f(&[1.0]), f(&[1.0, 2.0]), DistanceKind::SquaredL2).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { .. }));
    }

    #[test]
    fn integer_kernels_are_exact() {
        let a = [255u8; 200];
        let b = [0u8; 200];
        let d = distance(VectorRef::U8(&a), VectorRef::U8(&b), DistanceKind::SquaredL2).unwrap();
        assert_eq!(d, 200.0 * 65025.0);
        let a = [-128i8, 127];
        let b = [127i8, -128];
        let d = distance(VectorRef::I8(&a), VectorRef::I8(&b), DistanceKind::SquaredL2).unwrap();
        assert_eq!(d, 2.0 * 255.0 * 255.0);
        let ip = distance(VectorRef::I8(&a), VectorRef::I8(&b), DistanceKind::NegInnerProduct);
        assert_eq!(ip.unwrap(), 2.0 * 128.0 * 127.0);
    }

    #[test]
    fn rerank_examples() {
        let pts = PointSet::from_f32(1, vec![0.0, 1.0, 2.0, 3.0], DistanceKind::SquaredL2).unwrap();
        let q = [1.5f32];
        assert!(rerank(f(&q), &[], &pts, 0.25).unwrap().is_empty());
        let ids: Vec<u32> = rerank(f(&q), &[0, 1, 2, 3], &pts, 0.25)
            .unwrap()
            .iter()
            .map(|n| n.id)
            .collect();
        assert_eq!(ids, vec![1, 2]);
        // everything outside the radius
        assert!(rerank(f(&[10.0]), &[0, 1, 2, 3], &pts, 1.0).unwrap().is_empty());
        // duplicates collapse
        let out = rerank(f(&q), &[2, 1, 2, 1], &pts, 0.25).unwrap();
        assert_eq!(out.len(), 2);
        assert!(rerank(f(&q), &[7], &pts, 1.0).is_err());
    }

    #[test]
    fn point_set_shape_checks() {
        assert!(PointSet::from_f32(0, vec![], DistanceKind::SquaredL2).is_err());
        assert!(PointSet::from_f32(3, vec![0.0; 4], DistanceKind::SquaredL2).is_err());
        let empty = PointSet::from_f32(3, vec![], DistanceKind::SquaredL2).unwrap();
        assert!(empty.is_empty());
    }

    proptest! {
        #[test]
        fn squared_l2_is_symmetric_and_zero_on_identity(
            (a, b) in (1usize..40).prop_flat_map(|d| (
                proptest::collection::vec(-100f32..100.0, d),
                proptest::collection::vec(-100f32..100.0, d),
            ))
        ) {
            let l2 = DistanceKind::SquaredL2;
            prop_assert_eq!(distance(f(&a), f(&b), l2).unwrap(), distance(f(&b), f(&a), l2).unwrap());
            prop_assert_eq!(distance(f(&a), f(&a), l2).unwrap(), 0.0);
            prop_assert!(distance(f(&a), f(&b), l2).unwrap() >= 0.0);
        }

        #[test]
        fn neg_ip_on_identity_is_negative_squared_norm(a in proptest::collection::vec(-4i8..4, 1..50)) {
            let v = VectorRef::I8(&a);
            let norm: i64 = a.iter().map(|&x| x as i64 * x as i64).sum();
            prop_assert_eq!(distance(v, v, DistanceKind::NegInnerProduct).unwrap(), -(norm as f32));
        }

        #[test]
        fn rerank_output_is_valid_subset(
            data in proptest::collection::vec(-5f32..5.0, 2..80),
            q in -5f32..5.0,
            r in 0f32..4.0,
            cands in proptest::collection::vec(0u32..80, 0..40),
        ) {
            let pts = PointSet::from_f32(1, data, DistanceKind::SquaredL2).unwrap();
            let cands: Vec<u32> = cands.into_iter().filter(|&c| (c as usize) < pts.len()).collect();
            let out = rerank(f(&[q]), &cands, &pts, r).unwrap();
            for w in out.windows(2) {
                prop_assert!(w[0] < w[1]);
            }
            for n in &out {
                prop_assert!(cands.contains(&n.id));
                let d = (pts.row(n.id as usize).to_f32_vec()[0] - q).powi(2);
                prop_assert!(d <= r);
            }
            let expected = cands.iter().filter(|&&c| {
                let x = pts.row(c as usize).to_f32_vec()[0];
                (x - q) * (x - q) <= r
            }).collect::<FxHashSet<_>>().len();
            prop_assert_eq!(out.len(), expected);
        }
    }
}
