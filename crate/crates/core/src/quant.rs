//! Per-dimension 8-bit scalar quantization.
//!
//! Each dimension maps its dataset `[lo, hi]` range linearly onto codes
//! `0..=255`. Searches over quantized codes only approximate distances, so
//! anything reported as a range result must be re-checked against the
//! original vectors.

use crate::points::{PointSet, Storage};
use crate::{DistanceKind, Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct QuantizedPointSet {
    n: usize,
    dim: usize,
    codes: Vec<u8>,
    lo: Vec<f32>,
    hi: Vec<f32>,
    source: u64,
}

impl QuantizedPointSet {
    /// Quantizes an f32 point set.
    pub fn quantize(points: &PointSet) -> Result<Self> {
        let Storage::F32(data) = points.storage() else {
            return Err(Error::InvalidParams(
                "scalar quantization applies to float32 point sets only".into(),
            ));
        };
        if points.is_empty() {
            return Err(Error::EmptyPointSet);
        }
        let dim = points.dim();
        let mut lo = vec![f32::INFINITY; dim];
        let mut hi = vec![f32::NEG_INFINITY; dim];
        for row in data.chunks_exact(dim) {
            for (j, &x) in row.iter().enumerate() {
                lo[j] = lo[j].min(x);
                hi[j] = hi[j].max(x);
            }
        }
        let codes = data
            .chunks_exact(dim)
            .flat_map(|row| {
                row.iter()
                    .enumerate()
                    .map(|(j, &x)| encode(x, lo[j], hi[j]))
                    .collect::<Vec<_>>()
            })
            .collect();
        Ok(QuantizedPointSet {
            n: points.len(),
            dim,
            codes,
            lo,
            hi,
            source: points.fingerprint(),
        })
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

    pub fn lo(&self) -> &[f32] {
        &self.lo
    }

    pub fn hi(&self) -> &[f32] {
        &self.hi
    }

    pub fn codes(&self, id: u32) -> &[u8] {
        let i = id as usize;
        &self.codes[i * self.dim..(i + 1) * self.dim]
    }

    /// Quantization step of dimension `j`.
    pub fn step(&self, j: usize) -> f32 {
        (self.hi[j] - self.lo[j]) / 255.0
    }

    /// True when `points` is the set these codes were made from.
    pub fn is_derived_from(&self, points: &PointSet) -> bool {
        self.source == points.fingerprint()
    }

    pub fn dequantize(&self, id: u32) -> Result<Vec<f32>> {
        self.check_id(id)?;
        Ok(self
            .codes(id)
            .iter()
            .enumerate()
            .map(|(j, &c)| decode(c, self.lo[j], self.hi[j]))
            .collect())
    }

    /// Distance from `query` to the dequantized vector of `id`.
    pub fn quantized_distance(&self, query: &[f32], id: u32, kind: DistanceKind) -> Result<f32> {
        if query.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: query.len(),
            });
        }
        self.check_id(id)?;
        let decoded = self.dequantize(id)?;
        Ok(match kind {
            DistanceKind::SquaredL2 => crate::points::sq_l2_f32(query, &decoded),
            DistanceKind::NegInnerProduct => -crate::points::dot_f32(query, &decoded),
        })
    }

    fn check_id(&self, id: u32) -> Result<()> {
        if (id as usize) < self.n {
            Ok(())
        } else {
            Err(Error::IdOutOfRange {
                id: id as u64,
                n: self.n,
            })
        }
    }
}

#[inline]
fn encode(x: f32, lo: f32, hi: f32) -> u8 {
    if hi <= lo {
        return 0;
    }
    ((x - lo) / (hi - lo) * 255.0).round().clamp(0.0, 255.0) as u8
}

#[inline]
fn decode(code: u8, lo: f32, hi: f32) -> f32 {
    if hi <= lo {
        lo
    } else {
        lo + code as f32 * ((hi - lo) / 255.0)
    }
}

/// Distance evaluator for one query against quantized codes.
pub(crate) struct QuantizedQuery<'a> {
    set: &'a QuantizedPointSet,
    // the query expressed in code units: (q - lo) / step
    scaled: Vec<f32>,
    step: Vec<f32>,
    query: Vec<f32>,
    lo_dot: f32,
    kind: DistanceKind,
}

impl<'a> QuantizedQuery<'a> {
    pub(crate) fn new(set: &'a QuantizedPointSet, query: &[f32], kind: DistanceKind) -> Self {
        let step: Vec<f32> = (0..set.dim).map(|j| set.step(j)).collect();
        let scaled = query
            .iter()
            .zip(&set.lo)
            .zip(&step)
            .map(|((&q, &lo), &s)| if s > 0.0 { (q - lo) / s } else { 0.0 })
            .collect();
        let lo_dot = crate::points::dot_f32(query, &set.lo);
        QuantizedQuery {
            set,
            scaled,
            step,
            query: query.to_vec(),
            lo_dot,
            kind,
        }
    }

    pub(crate) fn set_len(&self) -> usize {
        self.set.n
    }

    #[inline]
    #[allow(clippy::needless_range_loop)]
    pub(crate) fn distance(&self, id: u32) -> f32 {
        let codes = self.set.codes(id);
        match self.kind {
            DistanceKind::SquaredL2 => {
                let mut acc = 0f32;
                for j in 0..codes.len() {
                    // constant dimensions contribute (q - lo)^2 directly
                    let d = if self.step[j] > 0.0 {
                        (self.scaled[j] - codes[j] as f32) * self.step[j]
                    } else {
                        self.query[j] - self.set.lo[j]
                    };
                    acc += d * d;
                }
                acc
            }
            DistanceKind::NegInnerProduct => {
                let mut acc = 0f32;
                for j in 0..codes.len() {
                    acc += self.query[j] * self.step[j] * codes[j] as f32;
                }
                -(self.lo_dot + acc)
            }
        }
    }
}
