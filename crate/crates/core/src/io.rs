//! Edgelist, binary adjacency cache and id-map formats.
//!
//! * Edgelist: one arc per line, two base-10 integers separated by
//!   whitespace; `#` starts a comment.
//! * Cache: `CBG1`, then little-endian `u64` node count, `u64` arc count,
//!   `node_count + 1` `u64` offsets and `arc_count` `u32` targets.
//! * Id map: CSV `external_id,internal_id`.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::graph::{BuildReport, NodeId, SocialGraph};

pub const CACHE_MAGIC: &[u8; 4] = b"CBG1";

/// How to read a `src dst` line.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Orientation {
    /// `src` is followed by `dst` (tweets flow `src -> dst`).
    #[default]
    Propagation,
    /// `src` follows `dst`; reversed on load.
    Follows,
}

#[derive(Clone, Debug)]
pub struct LoadedGraph {
    pub graph: SocialGraph,
    /// `id_map[internal] = external`
    pub id_map: Vec<u64>,
    pub report: BuildReport,
}

impl LoadedGraph {
    pub fn external_id(&self, v: NodeId) -> u64 {
        self.id_map[v as usize]
    }

    pub fn internal_id(&self, external: u64) -> Option<NodeId> {
        self.id_map.binary_search(&external).ok().map(|i| i as NodeId)
    }

    fn identity(graph: SocialGraph) -> Self {
        let id_map = (0..graph.node_count() as u64).collect();
        Self { graph, id_map, report: BuildReport::default() }
    }
}

fn parse_id(tok: &str, line: usize) -> Result<u64> {
    tok.parse::<u64>().map_err(|e| Error::Parse { line, msg: format!("bad node id {tok:?}: {e}") })
}

/// Parse an edgelist. External ids are compacted to `0..n` in ascending
/// order, so already-dense inputs keep their ids.
pub fn load_edgelist<R: BufRead>(reader: R, orientation: Orientation) -> Result<LoadedGraph> {
    let mut raw = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = i + 1;
        let body = line.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let mut toks = body.split_whitespace();
        let (a, b) = match (toks.next(), toks.next(), toks.next()) {
            (Some(a), Some(b), None) => (parse_id(a, lineno)?, parse_id(b, lineno)?),
            _ => return Err(Error::Parse { line: lineno, msg: format!("expected two ids, got {body:?}") }),
        };
        raw.push(match orientation {
            Orientation::Propagation => (a, b),
            Orientation::Follows => (b, a),
        });
    }
    if raw.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut id_map: Vec<u64> = raw.iter().flat_map(|&(a, b)| [a, b]).collect();
    id_map.sort_unstable();
    id_map.dedup();
    if id_map.len() > NodeId::MAX as usize {
        return Err(Error::TooLarge(format!("{} distinct node ids", id_map.len())));
    }
    let compact = |x: u64| id_map.binary_search(&x).expect("id collected above") as NodeId;
    let arcs: Vec<_> = raw.iter().map(|&(a, b)| (compact(a), compact(b))).collect();
    let (graph, report) = SocialGraph::from_arcs(id_map.len(), arcs)?;
    if report.self_loops > 0 {
        log::warn!("dropped {} self-loop(s)", report.self_loops);
    }
    if report.duplicates > 0 {
        log::info!("merged {} duplicate arc(s)", report.duplicates);
    }
    Ok(LoadedGraph { graph, id_map, report })
}

/// Write arcs with internal ids in propagation orientation.
pub fn write_edgelist<W: Write>(graph: &SocialGraph, mut w: W) -> std::io::Result<()> {
    for (u, v) in graph.arcs() {
        writeln!(w, "{u} {v}")?;
    }
    w.flush()
}

pub fn write_id_map<W: Write>(id_map: &[u64], mut w: W) -> std::io::Result<()> {
    writeln!(w, "external_id,internal_id")?;
    for (internal, external) in id_map.iter().enumerate() {
        writeln!(w, "{external},{internal}")?;
    }
    w.flush()
}

pub fn read_id_map<R: BufRead>(reader: R) -> Result<Vec<u64>> {
    let mut pairs = Vec::new();
    for (i, line) in reader.lines().enumerate().skip(1) {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let (ext, int) = line
            .split_once(',')
            .ok_or_else(|| Error::Parse { line: i + 1, msg: "expected external_id,internal_id".into() })?;
        pairs.push((parse_id(int.trim(), i + 1)? as usize, parse_id(ext.trim(), i + 1)?));
    }
    let mut map = vec![None; pairs.len()];
    for (int, ext) in pairs {
        match map.get_mut(int) {
            Some(slot @ None) => *slot = Some(ext),
            _ => return Err(Error::Parse { line: 0, msg: format!("internal id {int} out of range or repeated") }),
        }
    }
    Ok(map.into_iter().map(|x| x.expect("all slots filled")).collect())
}

pub fn cache_bytes(graph: &SocialGraph) -> Vec<u8> {
    let n = graph.node_count();
    let mut out = Vec::with_capacity(20 + 8 * (n + 1) + 4 * graph.arc_count());
    out.extend_from_slice(CACHE_MAGIC);
    out.extend_from_slice(&(n as u64).to_le_bytes());
    out.extend_from_slice(&(graph.arc_count() as u64).to_le_bytes());
    for &o in graph.offsets() {
        out.extend_from_slice(&(o as u64).to_le_bytes());
    }
    for &t in graph.targets() {
        out.extend_from_slice(&t.to_le_bytes());
    }
    out
}

pub fn write_cache<W: Write>(graph: &SocialGraph, mut w: W) -> std::io::Result<()> {
    w.write_all(&cache_bytes(graph))?;
    w.flush()
}

pub(crate) fn read_u64<R: Read>(r: &mut R) -> Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b).map_err(|e| Error::BadCache(format!("truncated: {e}")))?;
    Ok(u64::from_le_bytes(b))
}

pub(crate) fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b).map_err(|e| Error::BadCache(format!("truncated: {e}")))?;
    Ok(u32::from_le_bytes(b))
}

pub fn read_cache<R: Read>(mut r: R) -> Result<SocialGraph> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic).map_err(|e| Error::BadCache(format!("truncated: {e}")))?;
    if &magic != CACHE_MAGIC {
        return Err(Error::BadCache("wrong magic".into()));
    }
    let n = read_u64(&mut r)? as usize;
    let m = read_u64(&mut r)? as usize;
    if n >= NodeId::MAX as usize {
        return Err(Error::BadCache(format!("node count {n} too large")));
    }
    let mut offsets = Vec::with_capacity(n + 1);
    for _ in 0..=n {
        offsets.push(read_u64(&mut r)? as usize);
    }
    if offsets[0] != 0 || offsets[n] != m || offsets.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::BadCache("offsets are not a monotone 0..arc_count range".into()));
    }
    let mut targets = Vec::with_capacity(m);
    for _ in 0..m {
        targets.push(read_u32(&mut r)?);
    }
    for u in 0..n {
        let row = &targets[offsets[u]..offsets[u + 1]];
        if row.iter().any(|&v| v as usize >= n || v as usize == u) || row.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::BadCache(format!("row {u} is not sorted, in range and loop-free")));
        }
    }
    Ok(SocialGraph::from_sorted_csr(offsets, targets))
}

/// Content hash of a graph (hex prefix of SHA-256 over the cache encoding).
pub fn fingerprint(graph: &SocialGraph) -> String {
    let digest = Sha256::digest(cache_bytes(graph));
    digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
}

/// Load a graph file, sniffing the cache magic and otherwise reading an edgelist.
pub fn load_graph_file(path: &Path, orientation: Orientation) -> Result<LoadedGraph> {
    let mut file = BufReader::new(File::open(path)?);
    let head = file.fill_buf()?;
    if head.starts_with(CACHE_MAGIC) {
        return Ok(LoadedGraph::identity(read_cache(file)?));
    }
    load_edgelist(file, orientation)
}

pub fn save_edgelist(graph: &SocialGraph, path: &Path) -> Result<()> {
    write_edgelist(graph, BufWriter::new(File::create(path)?))?;
    Ok(())
}

pub fn save_cache(graph: &SocialGraph, path: &Path) -> Result<()> {
    write_cache(graph, BufWriter::new(File::create(path)?))?;
    Ok(())
}

pub fn save_id_map(id_map: &[u64], path: &Path) -> Result<()> {
    write_id_map(id_map, BufWriter::new(File::create(path)?))?;
    Ok(())
}
