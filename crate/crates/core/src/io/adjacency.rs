//! Binary adjacency-sequence files.
//!
//! Both formats start with the same little-endian header:
//!
//! | bytes | field                                  |
//! |-------|----------------------------------------|
//! | 8     | magic, `NETCPADJ` or `NETCPTRI`        |
//! | 4     | format version (`1`)                   |
//! | 8     | horizon `T`                            |
//! | 8     | node count `n`                         |
//! | 4     | flags, bit 0 = self-loops allowed      |
//!
//! In the bitset format (`NETCPADJ`) each snapshot follows as the upper
//! triangle in row-major order, one bit per pair, least significant bit
//! first, padded to a whole byte. The diagonal is omitted when self-loops are
//! not allowed.
//!
//! The triple format (`NETCPTRI`) follows the header with a `u64` edge count
//! and then one `(t, i, j)` record of three `u32` per edge, with `t` 1-based,
//! nodes 0-based and `i <= j`, sorted by `(t, i, j)`.

use std::path::Path;

use crate::error::{Error, Result};
use crate::net_model::{AdjacencyMatrix, NetworkSequence};

pub const BITSET_MAGIC: &[u8; 8] = b"NETCPADJ";
pub const TRIPLE_MAGIC: &[u8; 8] = b"NETCPTRI";
pub const FORMAT_VERSION: u32 = 1;
const HEADER_LEN: usize = 32;
const FLAG_SELF_LOOPS: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Header {
    pub horizon: usize,
    pub n: usize,
    pub self_loops: bool,
}

fn write_header(out: &mut Vec<u8>, magic: &[u8; 8], seq: &NetworkSequence) {
    out.extend_from_slice(magic);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&(seq.len() as u64).to_le_bytes());
    out.extend_from_slice(&(seq.n() as u64).to_le_bytes());
    let flags = if seq.self_loops() { FLAG_SELF_LOOPS } else { 0 };
    out.extend_from_slice(&flags.to_le_bytes());
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
    source: &'a str,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, len: usize, what: &str) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(len).filter(|&e| e <= self.bytes.len());
        match end {
            Some(end) => {
                let out = &self.bytes[self.pos..end];
                self.pos = end;
                Ok(out)
            }
            None => Err(Error::format(
                self.source,
                format!("truncated file while reading {what} at byte {}", self.pos),
            )),
        }
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().unwrap()))
    }

    fn u64(&mut self, what: &str) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8, what)?.try_into().unwrap()))
    }

    fn usize(&mut self, what: &str) -> Result<usize> {
        let v = self.u64(what)?;
        usize::try_from(v).map_err(|_| Error::format(self.source, format!("{what} {v} too large")))
    }
}

fn read_header(cur: &mut Cursor<'_>, magic: &[u8; 8]) -> Result<Header> {
    let found = cur.take(8, "magic")?;
    if found != magic {
        return Err(Error::format(
            cur.source,
            format!(
                "bad magic {:?}, expected {:?}",
                String::from_utf8_lossy(found),
                String::from_utf8_lossy(magic)
            ),
        ));
    }
    let version = cur.u32("version")?;
    if version != FORMAT_VERSION {
        return Err(Error::format(
            cur.source,
            format!("unsupported format version {version}"),
        ));
    }
    let horizon = cur.usize("horizon")?;
    let n = cur.usize("node count")?;
    let flags = cur.u32("flags")?;
    if flags & !FLAG_SELF_LOOPS != 0 {
        return Err(Error::format(
            cur.source,
            format!("unknown flag bits {flags:#x}"),
        ));
    }
    Ok(Header {
        horizon,
        n,
        self_loops: flags & FLAG_SELF_LOOPS != 0,
    })
}

fn stored_pairs(n: usize, self_loops: bool) -> impl Iterator<Item = (usize, usize)> {
    (0..n).flat_map(move |i| {
        let start = if self_loops { i } else { i + 1 };
        (start..n).map(move |j| (i, j))
    })
}

fn snapshot_bytes(n: usize, self_loops: bool) -> usize {
    let pairs = if self_loops {
        n * (n + 1) / 2
    } else {
        n * n.saturating_sub(1) / 2
    };
    pairs.div_ceil(8)
}

/// Encodes a sequence in the bitset format.
pub fn encode_bitset(seq: &NetworkSequence) -> Vec<u8> {
    let per = snapshot_bytes(seq.n(), seq.self_loops());
    let mut out = Vec::with_capacity(HEADER_LEN + per * seq.len());
    write_header(&mut out, BITSET_MAGIC, seq);
    for a in seq.snapshots() {
        let mut block = vec![0u8; per];
        for (k, (i, j)) in stored_pairs(seq.n(), seq.self_loops()).enumerate() {
            if a.get(i, j) {
                block[k / 8] |= 1 << (k % 8);
            }
        }
        out.extend_from_slice(&block);
    }
    out
}

pub fn decode_bitset(bytes: &[u8], source: &str) -> Result<NetworkSequence> {
    let mut cur = Cursor {
        bytes,
        pos: 0,
        source,
    };
    let h = read_header(&mut cur, BITSET_MAGIC)?;
    let per = snapshot_bytes(h.n, h.self_loops);
    let expected = per
        .checked_mul(h.horizon)
        .and_then(|b| b.checked_add(HEADER_LEN));
    if expected != Some(bytes.len()) {
        return Err(Error::format(
            source,
            format!(
                "file has {} bytes, header (T={}, n={}) implies {}",
                bytes.len(),
                h.horizon,
                h.n,
                expected.map_or("overflow".to_string(), |e| e.to_string())
            ),
        ));
    }
    let pairs: Vec<(usize, usize)> = stored_pairs(h.n, h.self_loops).collect();
    let mut snapshots = Vec::with_capacity(h.horizon);
    for t in 0..h.horizon {
        let block = cur.take(per, "snapshot")?;
        let mut a = AdjacencyMatrix::empty(h.n);
        for (k, &(i, j)) in pairs.iter().enumerate() {
            if (block[k / 8] >> (k % 8)) & 1 == 1 {
                a.set(i, j, true);
            }
        }
        let pad = pairs.len() % 8;
        if pad != 0 && block[per - 1] >> pad != 0 {
            return Err(Error::format(
                source,
                format!("snapshot {} has nonzero padding bits", t + 1),
            ));
        }
        snapshots.push(a);
    }
    NetworkSequence::new(h.n, h.self_loops, snapshots)
        .map_err(|e| Error::format(source, e.to_string()))
}

/// Encodes a sequence in the triple-list format.
pub fn encode_triples(seq: &NetworkSequence) -> Vec<u8> {
    let mut records = Vec::new();
    let mut count = 0u64;
    for (t, a) in seq.snapshots().iter().enumerate() {
        for (i, j) in stored_pairs(seq.n(), seq.self_loops()) {
            if a.get(i, j) {
                for v in [t + 1, i, j] {
                    records.extend_from_slice(&(v as u32).to_le_bytes());
                }
                count += 1;
            }
        }
    }
    let mut out = Vec::with_capacity(HEADER_LEN + 8 + records.len());
    write_header(&mut out, TRIPLE_MAGIC, seq);
    out.extend_from_slice(&count.to_le_bytes());
    out.extend_from_slice(&records);
    out
}

pub fn decode_triples(bytes: &[u8], source: &str) -> Result<NetworkSequence> {
    let mut cur = Cursor {
        bytes,
        pos: 0,
        source,
    };
    let h = read_header(&mut cur, TRIPLE_MAGIC)?;
    let count = cur.usize("edge count")?;
    if count.checked_mul(12) != Some(bytes.len() - cur.pos) {
        return Err(Error::format(
            source,
            format!("edge count {count} does not match the file length"),
        ));
    }
    let mut snapshots = vec![AdjacencyMatrix::empty(h.n); h.horizon];
    let mut last: Option<(u32, u32, u32)> = None;
    for k in 0..count {
        let rec = (cur.u32("t")?, cur.u32("i")?, cur.u32("j")?);
        let (t, i, j) = (rec.0 as usize, rec.1 as usize, rec.2 as usize);
        let bad = |why: &str| Error::format(source, format!("record {k} ({t}, {i}, {j}): {why}"));
        if t == 0 || t > h.horizon {
            return Err(bad("time outside 1..=T"));
        }
        if i > j || j >= h.n {
            return Err(bad("need i <= j < n"));
        }
        if i == j && !h.self_loops {
            return Err(bad("self-loop in a sequence without self-loops"));
        }
        if last.is_some_and(|l| l >= rec) {
            return Err(bad("records not strictly sorted"));
        }
        last = Some(rec);
        snapshots[t - 1].set(i, j, true);
    }
    NetworkSequence::new(h.n, h.self_loops, snapshots)
        .map_err(|e| Error::format(source, e.to_string()))
}

/// Reads either format, dispatching on the magic bytes.
pub fn decode_sequence(bytes: &[u8], source: &str) -> Result<NetworkSequence> {
    match bytes.get(..8) {
        Some(m) if m == BITSET_MAGIC => decode_bitset(bytes, source),
        Some(m) if m == TRIPLE_MAGIC => decode_triples(bytes, source),
        _ => Err(Error::format(source, "not a netcp adjacency file")),
    }
}

pub fn read_sequence(path: &Path) -> Result<NetworkSequence> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_sequence(&bytes, &path.display().to_string())
}

pub fn write_bitset(path: &Path, seq: &NetworkSequence) -> Result<()> {
    std::fs::write(path, encode_bitset(seq)).map_err(|e| Error::io(path, e))
}

pub fn write_triples(path: &Path, seq: &NetworkSequence) -> Result<()> {
    std::fs::write(path, encode_triples(seq)).map_err(|e| Error::io(path, e))
}
