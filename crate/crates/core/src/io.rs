//! Binary interchange formats, all little-endian.
//!
//! Point files (`.fbin`, `.u8bin`, `.i8bin`):
//!
//! ```text
//! n: u32 | d: u32 | n*d elements (f32 / u8 / i8)
//! ```
//!
//! Range ground truth:
//!
//! ```text
//! nq: i32 | total: i32 | counts: nq x i32 | ids: total x i32 | distances: total x f32
//! ```
//!
//! Graph (`RGG1`):
//!
//! ```text
//! "RGG1" | n: u32 | R: u32 | start count: u32 | start ids: u32...
//! then per node: degree: u32 | neighbor ids: u32...
//! ```

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use byteorder::{LittleEndian as LE, ReadBytesExt, WriteBytesExt};

use crate::eval::RangeGroundTruth;
use crate::graph::ProximityGraph;
use crate::points::{DistanceKind, ElemKind, Neighbor, PointSet, Storage};
use crate::{Error, Result};

const GRAPH_MAGIC: &[u8; 4] = b"RGG1";

pub fn elem_kind_for(path: &Path) -> Result<ElemKind> {
    match path.extension().and_then(|e| e.to_str()) {
        Some("fbin") => Ok(ElemKind::F32),
        Some("u8bin") => Ok(ElemKind::U8),
        Some("i8bin") => Ok(ElemKind::I8),
        _ => Err(Error::UnknownExtension(path.to_path_buf())),
    }
}

/// Reads a point file; the element type comes from the extension.
pub fn read_points(path: impl AsRef<Path>, metric: DistanceKind) -> Result<PointSet> {
    let path = path.as_ref();
    let elem = elem_kind_for(path)?;
    let bytes = std::fs::read(path)?;
    decode_points(&bytes, elem, metric).map_err(|reason| Error::format(path, reason))
}

pub fn decode_points(bytes: &[u8], elem: ElemKind, metric: DistanceKind) -> Result<PointSet, String> {
    if bytes.len() < 8 {
        return Err(format!("{} bytes is too short for a header", bytes.len()));
    }
    let n = u32::from_le_bytes(bytes[0..4].try_into().unwrap()) as u64;
    let d = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as u64;
    let expected = n
        .checked_mul(d)
        .and_then(|nd| nd.checked_mul(elem.size() as u64))
        .and_then(|b| b.checked_add(8))
        .ok_or_else(|| format!("header n={n} d={d} overflows"))?;
    if expected != bytes.len() as u64 {
        return Err(format!(
            "header n={n} d={d} implies {expected} bytes, file has {}",
            bytes.len()
        ));
    }
    if d == 0 {
        return Err("dimension 0".into());
    }
    let body = &bytes[8..];
    let storage = match elem {
        ElemKind::F32 => Storage::F32(
            body.chunks_exact(4)
                .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
                .collect(),
        ),
        ElemKind::U8 => Storage::U8(body.to_vec()),
        ElemKind::I8 => Storage::I8(body.iter().map(|&b| b as i8).collect()),
    };
    PointSet::new(d as usize, storage, metric).map_err(|e| e.to_string())
}

pub fn encode_points(points: &PointSet) -> Result<Vec<u8>> {
    let n = u32::try_from(points.len())
        .map_err(|_| Error::InvalidParams("too many points for a u32 header".into()))?;
    let d = u32::try_from(points.dim())
        .map_err(|_| Error::InvalidParams("dimension too large for a u32 header".into()))?;
    let mut out = Vec::with_capacity(8 + points.storage().len() * points.elem().size());
    out.extend_from_slice(&n.to_le_bytes());
    out.extend_from_slice(&d.to_le_bytes());
    match points.storage() {
        Storage::F32(v) => v.iter().for_each(|x| out.extend_from_slice(&x.to_le_bytes())),
        Storage::U8(v) => out.extend_from_slice(v),
        Storage::I8(v) => out.extend(v.iter().map(|&x| x as u8)),
    }
    Ok(out)
}

/// Writes a point file. The extension must match the element type.
pub fn write_points(points: &PointSet, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let elem = elem_kind_for(path)?;
    if elem != points.elem() {
        return Err(Error::InvalidParams(format!(
            "{} holds {:?} elements but the points are {:?}",
            path.display(),
            elem,
            points.elem()
        )));
    }
    std::fs::write(path, encode_points(points)?)?;
    Ok(())
}

pub fn write_gt_to<W: Write>(gt: &RangeGroundTruth, mut w: W) -> Result<()> {
    let to_i32 = |v: usize, what: &str| {
        i32::try_from(v).map_err(|_| Error::InvalidParams(format!("{what} {v} exceeds i32")))
    };
    w.write_i32::<LE>(to_i32(gt.num_queries(), "query count")?)?;
    w.write_i32::<LE>(to_i32(gt.total(), "result total")?)?;
    for list in &gt.results {
        w.write_i32::<LE>(list.len() as i32)?;
    }
    for n in gt.results.iter().flatten() {
        w.write_i32::<LE>(to_i32(n.id as usize, "point id")?)?;
    }
    for n in gt.results.iter().flatten() {
        w.write_f32::<LE>(n.distance)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_gt(gt: &RangeGroundTruth, path: impl AsRef<Path>) -> Result<()> {
    write_gt_to(gt, BufWriter::new(File::create(path)?))
}

/// Parses a range ground-truth file. The file does not carry the radius,
/// so the caller supplies it. Each list is sorted by `(distance, id)`.
pub fn read_gt_from(bytes: &[u8], radius: f32) -> Result<RangeGroundTruth, String> {
    let mut r = bytes;
    let header = |r: &mut &[u8]| r.read_i32::<LE>().map_err(|_| "truncated header".to_string());
    let nq = header(&mut r)?;
    let total = header(&mut r)?;
    if nq < 0 || total < 0 {
        return Err(format!("negative header values nq={nq} total={total}"));
    }
    let (nq, total) = (nq as usize, total as usize);
    let expected = 8 + 4 * nq as u64 + 8 * total as u64;
    if expected != bytes.len() as u64 {
        return Err(format!(
            "nq={nq} total={total} implies {expected} bytes, file has {}",
            bytes.len()
        ));
    }
    let mut counts = Vec::with_capacity(nq);
    for q in 0..nq {
        let c = r.read_i32::<LE>().map_err(|e| e.to_string())?;
        if c < 0 {
            return Err(format!("query {q} has negative count {c}"));
        }
        counts.push(c as usize);
    }
    let sum: usize = counts.iter().sum();
    if sum != total {
        return Err(format!("counts sum to {sum}, header says {total}"));
    }
    let mut ids = vec![0i32; total];
    r.read_i32_into::<LE>(&mut ids).map_err(|e| e.to_string())?;
    let mut dists = vec![0f32; total];
    r.read_f32_into::<LE>(&mut dists).map_err(|e| e.to_string())?;
    if let Some(bad) = ids.iter().find(|&&id| id < 0) {
        return Err(format!("negative point id {bad}"));
    }
    let mut offset = 0;
    let results = counts
        .iter()
        .map(|&c| {
            let mut list: Vec<Neighbor> = (offset..offset + c)
                .map(|k| Neighbor::new(ids[k] as u32, dists[k]))
                .collect();
            list.sort_unstable();
            offset += c;
            list
        })
        .collect();
    Ok(RangeGroundTruth { radius, results })
}

pub fn read_gt(path: impl AsRef<Path>, radius: f32) -> Result<RangeGroundTruth> {
    let path = path.as_ref();
    let bytes = std::fs::read(path)?;
    read_gt_from(&bytes, radius).map_err(|reason| Error::format(path, reason))
}

pub fn write_graph_to<W: Write>(graph: &ProximityGraph, mut w: W) -> Result<()> {
    w.write_all(GRAPH_MAGIC)?;
    w.write_u32::<LE>(graph.len() as u32)?;
    w.write_u32::<LE>(graph.max_degree() as u32)?;
    w.write_u32::<LE>(graph.start().len() as u32)?;
    for &s in graph.start() {
        w.write_u32::<LE>(s)?;
    }
    for list in graph.adjacency() {
        w.write_u32::<LE>(list.len() as u32)?;
        for &nb in list {
            w.write_u32::<LE>(nb)?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn save_graph(graph: &ProximityGraph, path: impl AsRef<Path>) -> Result<()> {
    write_graph_to(graph, BufWriter::new(File::create(path)?))
}

pub fn read_graph_from<R: Read>(mut r: R) -> Result<ProximityGraph, String> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic).map_err(|_| "missing magic".to_string())?;
    if &magic != GRAPH_MAGIC {
        return Err(format!("bad magic {magic:?}"));
    }
    let mut u32_field = |what: &str| {
        r.read_u32::<LE>()
            .map_err(|_| format!("truncated while reading {what}"))
    };
    let n = u32_field("node count")? as usize;
    let max_degree = u32_field("max degree")? as usize;
    let start_len = u32_field("start count")? as usize;
    if start_len > n {
        return Err(format!("{start_len} start points for {n} nodes"));
    }
    let start = (0..start_len)
        .map(|_| u32_field("start id"))
        .collect::<Result<Vec<_>, _>>()?;
    let mut adjacency = Vec::with_capacity(n.min(1 << 24));
    for node in 0..n {
        let degree = u32_field("degree")? as usize;
        if degree > max_degree {
            return Err(format!("node {node} has degree {degree} > {max_degree}"));
        }
        let list = (0..degree)
            .map(|_| u32_field("neighbor id"))
            .collect::<Result<Vec<_>, _>>()?;
        adjacency.push(list);
    }
    let mut rest = [0u8; 1];
    if r.read(&mut rest).map_err(|e| e.to_string())? != 0 {
        return Err("trailing bytes after last node".into());
    }
    ProximityGraph::from_parts(max_degree, adjacency, start).map_err(|e| e.to_string())
}

pub fn load_graph(path: impl AsRef<Path>) -> Result<ProximityGraph> {
    let path = path.as_ref();
    let file = BufReader::new(File::open(path)?);
    read_graph_from(file).map_err(|reason| Error::format(path, reason))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_header_layout() {
        let pts = PointSet::from_f32(3, vec![0.0; 6], DistanceKind::SquaredL2).unwrap();
        let bytes = encode_points(&pts).unwrap();
        assert_eq!(bytes.len(), 32);
        assert_eq!(&bytes[..8], &[2, 0, 0, 0, 3, 0, 0, 0]);
    }

    #[test]
    fn point_file_validation() {
        let l2 = DistanceKind::SquaredL2;
        assert!(decode_points(&[1, 0, 0], ElemKind::U8, l2).is_err());
        // header claims 2x2 u8 but the body has 3 bytes
        assert!(decode_points(&[2, 0, 0, 0, 2, 0, 0, 0, 1, 2, 3], ElemKind::U8, l2).is_err());
        // n*d overflowing the file length
        let huge = [255, 255, 255, 255, 255, 255, 255, 255];
        assert!(decode_points(&huge, ElemKind::F32, l2).is_err());
        assert!(elem_kind_for(Path::new("x.bin")).is_err());
        assert!(elem_kind_for(Path::new("x")).is_err());
    }

    #[test]
    fn empty_gt_file_is_twelve_bytes() {
        let gt = RangeGroundTruth {
            radius: 1.0,
            results: vec![vec![]],
        };
        let mut buf = Vec::new();
        write_gt_to(&gt, &mut buf).unwrap();
        assert_eq!(buf, vec![1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0]);
        assert_eq!(read_gt_from(&buf, 1.0).unwrap(), gt);
    }

    #[test]
    fn gt_validation() {
        // nq=1, total=1, count=2
        let mut bad = Vec::new();
        for v in [1i32, 1, 2] {
            bad.extend_from_slice(&v.to_le_bytes());
        }
        bad.extend_from_slice(&0i32.to_le_bytes());
        bad.extend_from_slice(&0f32.to_le_bytes());
        assert!(read_gt_from(&bad, 1.0).is_err());
        // negative count
        let mut neg = Vec::new();
        for v in [1i32, 0, -1] {
            neg.extend_from_slice(&v.to_le_bytes());
        }
        assert!(read_gt_from(&neg, 1.0).is_err());
        assert!(read_gt_from(&[0, 0], 1.0).is_err());
    }

    #[test]
    fn graph_validation() {
        let g = ProximityGraph::from_parts(2, vec![vec![1], vec![0]], vec![1]).unwrap();
        let mut buf = Vec::new();
        write_graph_to(&g, &mut buf).unwrap();
        assert_eq!(read_graph_from(&buf[..]).unwrap(), g);

        let mut corrupt = buf.clone();
        corrupt[0] = b'X';
        assert!(read_graph_from(&corrupt[..]).is_err());

        // lower R below the stored degree
        let mut over = buf.clone();
        over[8..12].copy_from_slice(&0u32.to_le_bytes());
        assert!(read_graph_from(&over[..]).is_err());

        assert!(read_graph_from(&buf[..buf.len() - 1]).is_err());
        let mut trailing = buf;
        trailing.push(0);
        assert!(read_graph_from(&trailing[..]).is_err());
    }
}
