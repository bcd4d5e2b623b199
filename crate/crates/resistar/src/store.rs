//! Boundary-point computation by successive dichotomies and the sparse
//! per-cube store that persists the whole approximation.

use crate::error::{Error, Result};
use crate::geometry::{CubeId, FaceCode, GridSpec, VertexId};
use crate::oracle::{Label, Oracle};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashSet};
use std::io::{Read, Write};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// Boundary points on cube edges.
    Cube,
    /// Boundary points on every edge of the Kuhn simplices (all
    /// dominance-comparable vertex pairs of each cube).
    Kuhn,
}

impl Variant {
    pub fn as_str(&self) -> &'static str {
        match self {
            Variant::Cube => "cube",
            Variant::Kuhn => "kuhn",
        }
    }
}

/// A bracketed oracle sign change on a grid or Kuhn edge. The point itself is
/// `v_minus + t * (v_plus - v_minus)`; the endpoint labels are -1 at
/// `v_minus` and +1 at `v_plus` by construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryPoint {
    pub v_minus: VertexId,
    pub v_plus: VertexId,
    pub t: f64,
}

impl BoundaryPoint {
    pub fn point(&self, g: &GridSpec) -> Vec<f64> {
        let a = g.vertex_coords(&self.v_minus);
        let b = g.vertex_coords(&self.v_plus);
        a.iter()
            .zip(&b)
            .map(|(&ai, &bi)| ai + self.t * (bi - ai))
            .collect()
    }

    /// Canonical (order-independent) key of the underlying geometric edge.
    pub fn edge_key(&self) -> (VertexId, VertexId) {
        if self.v_minus <= self.v_plus {
            (self.v_minus.clone(), self.v_plus.clone())
        } else {
            (self.v_plus.clone(), self.v_minus.clone())
        }
    }
}

/// Sparse map from cube to its boundary points; the entire persisted state of
/// the approximation. A geometric edge shared by several cubes carries the
/// identical `t` in each (single dichotomy, shared result).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundaryStore {
    pub grid: GridSpec,
    pub variant: Variant,
    pub q: u32,
    pub oracle_digest: String,
    #[serde(with = "cube_map_entries")]
    pub cubes: BTreeMap<CubeId, Vec<BoundaryPoint>>,
}

/// JSON renders the cube map as a list of entries (JSON object keys must be
/// strings, multi-indices are not).
mod cube_map_entries {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(
        map: &BTreeMap<CubeId, Vec<BoundaryPoint>>,
        s: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        let entries: Vec<(&CubeId, &Vec<BoundaryPoint>)> = map.iter().collect();
        serde::Serialize::serialize(&entries, s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> std::result::Result<BTreeMap<CubeId, Vec<BoundaryPoint>>, D::Error> {
        let entries: Vec<(CubeId, Vec<BoundaryPoint>)> = serde::Deserialize::deserialize(d)?;
        Ok(entries.into_iter().collect())
    }
}

impl BoundaryStore {
    pub fn is_empty(&self) -> bool {
        self.cubes.is_empty()
    }

    pub fn points(&self, c: &CubeId) -> Option<&[BoundaryPoint]> {
        self.cubes.get(c).map(|v| v.as_slice())
    }

    /// Sum of per-cube boundary point counts (shared points counted per cube).
    pub fn per_cube_point_total(&self) -> u64 {
        self.cubes.values().map(|v| v.len() as u64).sum()
    }

    /// Number of distinct geometric edges carrying a boundary point.
    pub fn unique_edge_count(&self) -> u64 {
        let mut seen = HashSet::new();
        for pts in self.cubes.values() {
            for p in pts {
                seen.insert(p.edge_key());
            }
        }
        seen.len() as u64
    }

    /// Stored points of cube `c` whose edge endpoints both lie in face `f`.
    pub fn boundary_points_of_face(&self, c: &CubeId, f: &FaceCode) -> Vec<BoundaryPoint> {
        match self.cubes.get(c) {
            None => Vec::new(),
            Some(pts) => pts
                .iter()
                .filter(|p| f.contains_vertex(c, &p.v_minus) && f.contains_vertex(c, &p.v_plus))
                .cloned()
                .collect(),
        }
    }

    fn validate(&self) -> Result<()> {
        for (c, pts) in &self.cubes {
            if pts.is_empty() {
                return Err(Error::Corrupt(format!("cube {c:?} has empty point list")));
            }
            for p in pts {
                if !(c.contains_vertex(&p.v_minus) && c.contains_vertex(&p.v_plus)) {
                    return Err(Error::Corrupt(format!(
                        "point endpoints {:?}-{:?} outside cube {c:?}",
                        p.v_minus, p.v_plus
                    )));
                }
                if !(p.t > 0.0 && p.t < 1.0) {
                    return Err(Error::Corrupt(format!("t = {} outside (0,1)", p.t)));
                }
            }
        }
        Ok(())
    }
}

/// Bisection offset along `[a, b]` without endpoint re-checks; the caller
/// guarantees sanitized labels -1 at `a` and +1 at `b`. A zero oracle value
/// at a midpoint counts as +1, consistent with vertex sanitization.
fn dichotomy_t(oracle: &Oracle, a: &[f64], b: &[f64], q: u32) -> f64 {
    let mut lo = 0.0f64;
    let mut hi = 1.0f64;
    let mut x = vec![0.0; a.len()];
    for _ in 0..q {
        let mid = 0.5 * (lo + hi);
        for (k, xk) in x.iter_mut().enumerate() {
            *xk = a[k] + mid * (b[k] - a[k]);
        }
        if oracle.sanitized_at(&x) == Label::Plus {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Boundary offset `t = (i + 0.5) / 2^q` on the segment from `v_minus` to
/// `v_plus`, located by `q` successive dichotomies. The returned point is
/// within `2^-(q+1) * |v_plus - v_minus|` of a true oracle sign change.
pub fn dichotomy_boundary(oracle: &Oracle, v_minus: &[f64], v_plus: &[f64], q: u32) -> Result<f64> {
    if q < 1 {
        return Err(Error::Domain("q must be >= 1".into()));
    }
    if oracle.sanitized_at(v_minus) != Label::Minus || oracle.sanitized_at(v_plus) != Label::Plus {
        return Err(Error::Contract(
            "dichotomy endpoints must have sanitized labels -1 and +1".into(),
        ));
    }
    Ok(dichotomy_t(oracle, v_minus, v_plus, q))
}

/// Options for [`build_store`]. `diagonal_q_boost` adds
/// `ceil(log2(sqrt(k)))` extra dichotomies on Kuhn edges spanning `k > 1`
/// axes, so the absolute precision on the longest diagonals matches the one
/// on axis edges.
#[derive(Debug, Clone, Copy)]
pub struct BuildOptions {
    pub q: u32,
    pub diagonal_q_boost: bool,
}

impl BuildOptions {
    pub fn new(q: u32) -> Self {
        BuildOptions {
            q,
            diagonal_q_boost: false,
        }
    }
}

fn flat_index(idx: &[u32], n_g: usize) -> usize {
    idx.iter().fold(0usize, |acc, &i| acc * n_g + i as usize)
}

/// Scan the grid once, label every vertex, and bracket one boundary point on
/// each edge whose sanitized endpoint labels differ. Edges are scanned by
/// class (base vertex + direction), so an edge shared by several cubes is
/// bisected exactly once and the shared `t` is bitwise identical in each cube.
pub fn build_store(
    oracle: &Oracle,
    g: &GridSpec,
    variant: Variant,
    opts: BuildOptions,
) -> Result<BoundaryStore> {
    if opts.q < 1 {
        return Err(Error::Domain("q must be >= 1".into()));
    }
    let d = g.d;
    let n_g = g.n_g;
    let n_vertices = (n_g as u64).pow(d as u32) as usize;

    // transient vertex label array, discarded after the scan
    let mut labels = vec![0i8; n_vertices];
    let mut idx = vec![0u32; d];
    loop {
        let flat = flat_index(&idx, n_g);
        labels[flat] = oracle
            .sanitized_vertex_label(g, &VertexId(idx.clone()))
            .as_i8();
        if !increment_mixed(&mut idx, n_g as u32) {
            break;
        }
    }

    let mut cubes: BTreeMap<CubeId, Vec<BoundaryPoint>> = BTreeMap::new();

    // directions: unit axis steps for the cube variant, every nonzero 0/1
    // pattern for the kuhn variant
    let directions: Vec<Vec<u32>> = match variant {
        Variant::Cube => (0..d)
            .map(|k| {
                let mut e = vec![0u32; d];
                e[k] = 1;
                e
            })
            .collect(),
        Variant::Kuhn => {
            let mut out = Vec::new();
            let mut delta = vec![0u32; d];
            loop {
                if !increment_mixed(&mut delta, 2) {
                    break;
                }
                out.push(delta.clone());
            }
            out
        }
    };

    let mut u = vec![0u32; d];
    loop {
        for delta in &directions {
            if u.iter()
                .zip(delta)
                .any(|(&ui, &di)| ui + di > (n_g - 1) as u32)
            {
                continue;
            }
            let w: Vec<u32> = u.iter().zip(delta).map(|(&ui, &di)| ui + di).collect();
            let lu = labels[flat_index(&u, n_g)];
            let lw = labels[flat_index(&w, n_g)];
            if lu == lw {
                continue;
            }
            let (vm, vp) = if lu < 0 {
                (VertexId(u.clone()), VertexId(w.clone()))
            } else {
                (VertexId(w.clone()), VertexId(u.clone()))
            };
            let support = delta.iter().filter(|&&di| di > 0).count();
            let q_edge = if opts.diagonal_q_boost && support > 1 {
                opts.q + ((support as f64).sqrt().log2().ceil() as u32)
            } else {
                opts.q
            };
            let t = dichotomy_t(
                oracle,
                &g.vertex_coords(&vm),
                &g.vertex_coords(&vp),
                q_edge,
            );
            let bp = BoundaryPoint {
                v_minus: vm,
                v_plus: vp,
                t,
            };
            // assign to every cube containing the edge: axes where the
            // endpoints agree may sit on either side of the shared value
            for c in containing_cubes(g, &u, &w) {
                cubes.entry(c).or_default().push(bp.clone());
            }
        }
        if !increment_mixed(&mut u, n_g as u32) {
            break;
        }
    }

    Ok(BoundaryStore {
        grid: *g,
        variant,
        q: opts.q,
        oracle_digest: oracle.spec().digest(),
        cubes,
    })
}

/// All cubes whose closed body contains the edge `[u, w]` (u <= w
/// componentwise): fixed axes range over both adjacent slabs, differing axes
/// are pinned at the lower index.
fn containing_cubes(g: &GridSpec, u: &[u32], w: &[u32]) -> Vec<CubeId> {
    let max_c = (g.n_g - 2) as u32;
    let mut choices: Vec<Vec<u32>> = Vec::with_capacity(u.len());
    for (&ui, &wi) in u.iter().zip(w) {
        if ui == wi {
            let mut v = Vec::with_capacity(2);
            if ui > 0 {
                v.push(ui - 1);
            }
            if ui <= max_c {
                v.push(ui);
            }
            choices.push(v);
        } else {
            choices.push(vec![ui.min(wi)]);
        }
    }
    let mut out = vec![Vec::new()];
    for ch in &choices {
        let mut next = Vec::with_capacity(out.len() * ch.len());
        for prefix in &out {
            for &v in ch {
                let mut p = prefix.clone();
                p.push(v);
                next.push(p);
            }
        }
        out = next;
    }
    out.into_iter().map(CubeId).collect()
}

/// Odometer increment with uniform base; returns false on wrap-around.
fn increment_mixed(idx: &mut [u32], base: u32) -> bool {
    for k in (0..idx.len()).rev() {
        if idx[k] + 1 < base {
            idx[k] += 1;
            return true;
        }
        idx[k] = 0;
    }
    false
}

// ---------------------------------------------------------------------------
// Persistence. Binary layout (little-endian):
//   magic "RSBS", u32 version, u8 variant, u32 d, u32 n_g, u32 q,
//   u16 digest_len + digest bytes, u64 cube_count,
//   per cube: d x u32 index, u32 point_count,
//   per point: d x u32 v_minus, d x u32 v_plus, u64 t bits.
// The JSON rendering is the serde form of `BoundaryStore`; both round-trip
// `t` bit-exactly.
// ---------------------------------------------------------------------------

const MAGIC: &[u8; 4] = b"RSBS";
const VERSION: u32 = 1;

impl BoundaryStore {
    pub fn write_binary<W: Write>(&self, w: &mut W) -> Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&VERSION.to_le_bytes())?;
        w.write_all(&[match self.variant {
            Variant::Cube => 0u8,
            Variant::Kuhn => 1u8,
        }])?;
        w.write_all(&(self.grid.d as u32).to_le_bytes())?;
        w.write_all(&(self.grid.n_g as u32).to_le_bytes())?;
        w.write_all(&self.q.to_le_bytes())?;
        let digest = self.oracle_digest.as_bytes();
        w.write_all(&(digest.len() as u16).to_le_bytes())?;
        w.write_all(digest)?;
        w.write_all(&(self.cubes.len() as u64).to_le_bytes())?;
        for (c, pts) in &self.cubes {
            for &i in &c.0 {
                w.write_all(&i.to_le_bytes())?;
            }
            w.write_all(&(pts.len() as u32).to_le_bytes())?;
            for p in pts {
                for &i in &p.v_minus.0 {
                    w.write_all(&i.to_le_bytes())?;
                }
                for &i in &p.v_plus.0 {
                    w.write_all(&i.to_le_bytes())?;
                }
                w.write_all(&p.t.to_bits().to_le_bytes())?;
            }
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(r: &mut R) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(Error::Format("bad magic; not a boundary store".into()));
        }
        let version = read_u32(r)?;
        if version != VERSION {
            return Err(Error::Format(format!("unsupported store version {version}")));
        }
        let mut vb = [0u8; 1];
        r.read_exact(&mut vb)?;
        let variant = match vb[0] {
            0 => Variant::Cube,
            1 => Variant::Kuhn,
            v => return Err(Error::Format(format!("unknown variant tag {v}"))),
        };
        let d = read_u32(r)? as usize;
        let n_g = read_u32(r)? as usize;
        let q = read_u32(r)?;
        let grid = GridSpec::new(d, n_g)?;
        let mut lb = [0u8; 2];
        r.read_exact(&mut lb)?;
        let dlen = u16::from_le_bytes(lb) as usize;
        let mut dbytes = vec![0u8; dlen];
        r.read_exact(&mut dbytes)?;
        let oracle_digest = String::from_utf8(dbytes)
            .map_err(|_| Error::Format("digest is not utf-8".into()))?;
        let mut cb = [0u8; 8];
        r.read_exact(&mut cb)?;
        let n_cubes = u64::from_le_bytes(cb);
        let mut cubes = BTreeMap::new();
        let read_multi = |r: &mut R| -> Result<Vec<u32>> {
            (0..d).map(|_| read_u32(r)).collect()
        };
        for _ in 0..n_cubes {
            let c = CubeId(read_multi(r)?);
            let count = read_u32(r)?;
            let mut pts = Vec::with_capacity(count as usize);
            for _ in 0..count {
                let v_minus = VertexId(read_multi(r)?);
                let v_plus = VertexId(read_multi(r)?);
                let mut tb = [0u8; 8];
                r.read_exact(&mut tb)?;
                pts.push(BoundaryPoint {
                    v_minus,
                    v_plus,
                    t: f64::from_bits(u64::from_le_bytes(tb)),
                });
            }
            cubes.insert(c, pts);
        }
        let store = BoundaryStore {
            grid,
            variant,
            q,
            oracle_digest,
            cubes,
        };
        store.validate()?;
        Ok(store)
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Format(e.to_string()))
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let store: BoundaryStore =
            serde_json::from_str(s).map_err(|e| Error::Format(e.to_string()))?;
        store.validate()?;
        Ok(store)
    }
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}
