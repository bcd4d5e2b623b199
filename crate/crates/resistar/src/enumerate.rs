//! Explicit enumeration of the resistar simplices: streaming per cube,
//! closed-form and streamed counts, and watertightness checks on the
//! resulting simplicial complex.

use crate::classify_cube::barycentre;
use crate::error::{Error, Result};
use crate::geometry::{subfaces, FaceCode, KuhnSimplexRef, VertexId};
use crate::store::{BoundaryPoint, BoundaryStore, Variant};
use std::collections::{BTreeMap, BTreeSet, HashSet};

/// Vertex key with coordinates rounded at 1e-12, so simplices built twice
/// through shared faces compare equal.
fn round_key(x: &[f64]) -> Vec<i64> {
    x.iter().map(|&v| (v * 1e12).round() as i64).collect()
}

fn simplex_key(verts: &[Vec<f64>]) -> Vec<Vec<i64>> {
    let mut keys: Vec<Vec<i64>> = verts.iter().map(|v| round_key(v)).collect();
    keys.sort();
    keys
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// 128-bit fingerprint of the canonical simplex key; keeps the kuhn dedup
/// set to 16 bytes per simplex, with a collision chance far below any count
/// reachable here.
fn simplex_fingerprint(verts: &[Vec<f64>]) -> u128 {
    let key = simplex_key(verts);
    let mut a = 0x243F_6A88_85A3_08D3u64;
    let mut b = 0x1319_8A2E_0370_7344u64;
    for v in &key {
        for &c in v {
            a = splitmix64(a ^ c as u64);
            b = splitmix64(b ^ (c as u64).rotate_left(17));
        }
    }
    ((a as u128) << 64) | b as u128
}

fn cube_simplices(
    s: &BoundaryStore,
    c: &crate::geometry::CubeId,
    f: &mut impl FnMut(&[Vec<f64>]),
) {
    let g = &s.grid;
    // suffix of barycentres from the current face up to the cube, innermost
    // face first once a boundary point closes the chain
    fn rec(
        s: &BoundaryStore,
        c: &crate::geometry::CubeId,
        face: &FaceCode,
        pts: &[BoundaryPoint],
        stack: &mut Vec<Vec<f64>>,
        f: &mut impl FnMut(&[Vec<f64>]),
    ) {
        let g = &s.grid;
        if face.dim() == 1 {
            for p in pts {
                stack.push(p.point(g));
                f(stack);
                stack.pop();
            }
            return;
        }
        stack.push(barycentre(g, pts));
        for sub in subfaces(face, face.dim() - 1).expect("facet dimension") {
            let inner: Vec<BoundaryPoint> = pts
                .iter()
                .filter(|p| {
                    sub.contains_vertex(c, &p.v_minus) && sub.contains_vertex(c, &p.v_plus)
                })
                .cloned()
                .collect();
            if !inner.is_empty() {
                rec(s, c, &sub, &inner, stack, f);
            }
        }
        stack.pop();
    }
    let pts = s.points(c).unwrap_or(&[]).to_vec();
    if pts.is_empty() {
        return;
    }
    let mut stack = Vec::with_capacity(g.d);
    rec(s, c, &FaceCode::full(g.d), &pts, &mut stack, f);
}

fn kuhn_simplices(
    s: &BoundaryStore,
    r: &KuhnSimplexRef,
    f: &mut impl FnMut(&[Vec<f64>]),
) -> Result<()> {
    let pts = crate::classify_kuhn::simplex_boundary_points(s, r)?;
    if pts.is_empty() {
        return Ok(());
    }
    fn rec(
        s: &BoundaryStore,
        verts: &[VertexId],
        pts: &[BoundaryPoint],
        stack: &mut Vec<Vec<f64>>,
        f: &mut impl FnMut(&[Vec<f64>]),
    ) {
        let g = &s.grid;
        if verts.len() == 2 {
            for p in pts {
                stack.push(p.point(g));
                f(stack);
                stack.pop();
            }
            return;
        }
        stack.push(barycentre(g, pts));
        for drop in 0..verts.len() {
            let sub: Vec<VertexId> = verts
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != drop)
                .map(|(_, v)| v.clone())
                .collect();
            let inner: Vec<BoundaryPoint> = pts
                .iter()
                .filter(|p| sub.contains(&p.v_minus) && sub.contains(&p.v_plus))
                .cloned()
                .collect();
            if !inner.is_empty() {
                rec(s, &sub, &inner, stack, f);
            }
        }
        stack.pop();
    }
    let mut stack = Vec::with_capacity(s.grid.d);
    rec(s, &r.vertices(), &pts, &mut stack, f);
    Ok(())
}

fn permutations(d: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..d).collect();
    fn heap(k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k <= 1 {
            out.push(cur.clone());
            return;
        }
        for i in 0..k {
            heap(k - 1, cur, out);
            if k % 2 == 0 {
                cur.swap(i, k - 1);
            } else {
                cur.swap(0, k - 1);
            }
        }
    }
    heap(d, &mut cur, &mut out);
    out
}

/// Stream every simplex of the store's resistar as a list of `d` vertex
/// coordinate vectors. Kuhn simplices built identically through a shared
/// face are reported once.
pub fn for_each_simplex(
    s: &BoundaryStore,
    mut f: impl FnMut(&[Vec<f64>]),
) -> Result<()> {
    match s.variant {
        Variant::Cube => {
            for c in s.cubes.keys() {
                cube_simplices(s, c, &mut f);
            }
        }
        Variant::Kuhn => {
            let perms = permutations(s.grid.d);
            let mut seen: HashSet<u128> = HashSet::new();
            for c in s.cubes.keys() {
                for perm in &perms {
                    let r = KuhnSimplexRef {
                        cube: c.clone(),
                        perm: perm.clone(),
                    };
                    kuhn_simplices(s, &r, &mut |verts| {
                        if seen.insert(simplex_fingerprint(verts)) {
                            f(verts);
                        }
                    })?;
                }
            }
        }
    }
    Ok(())
}

/// Total number of simplices. For the cube variant this is the closed form
/// `(d-1)! * (total boundary points counted per cube)`; the kuhn variant is
/// counted by streaming with deduplication.
pub fn count_simplices(s: &BoundaryStore) -> Result<u64> {
    match s.variant {
        Variant::Cube => {
            let fact: u64 = (1..s.grid.d as u64).product();
            Ok(fact * s.per_cube_point_total())
        }
        Variant::Kuhn => {
            let mut n = 0u64;
            for_each_simplex(s, |_| n += 1)?;
            Ok(n)
        }
    }
}

/// Incidence census of the (d-2)-facets of the enumerated complex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WatertightReport {
    pub simplices: u64,
    pub vertices: u64,
    /// facets shared by exactly two simplices
    pub interior_facets: u64,
    /// facets on exactly one simplex: nonzero means the complex has a border
    pub boundary_facets: u64,
    /// facets on three or more simplices (non-manifold gluing)
    pub overused_facets: u64,
    /// V - E + F, only for d = 3 triangle meshes
    pub euler_characteristic: Option<i64>,
}

impl WatertightReport {
    pub fn is_closed(&self) -> bool {
        self.boundary_facets == 0 && self.overused_facets == 0
    }
}

/// Check the complex for watertightness. Capped at d <= 4 where the facet
/// census stays tractable.
pub fn watertightness(s: &BoundaryStore) -> Result<WatertightReport> {
    let d = s.grid.d;
    if !(2..=4).contains(&d) {
        return Err(Error::Domain(format!(
            "watertightness check supports 2 <= d <= 4, got {d}"
        )));
    }
    let mut facet_counts: BTreeMap<Vec<Vec<i64>>, u32> = BTreeMap::new();
    let mut verts: BTreeSet<Vec<i64>> = BTreeSet::new();
    let mut edges: BTreeSet<Vec<Vec<i64>>> = BTreeSet::new();
    let mut simplices = 0u64;
    for_each_simplex(s, |sv| {
        simplices += 1;
        for v in sv {
            verts.insert(round_key(v));
        }
        for skip in 0..sv.len() {
            let facet: Vec<Vec<f64>> = sv
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != skip)
                .map(|(_, v)| v.clone())
                .collect();
            *facet_counts.entry(simplex_key(&facet)).or_insert(0) += 1;
        }
        if d == 3 {
            for i in 0..sv.len() {
                for j in i + 1..sv.len() {
                    edges.insert(simplex_key(&[sv[i].clone(), sv[j].clone()]));
                }
            }
        }
    })?;
    let mut interior = 0u64;
    let mut boundary = 0u64;
    let mut overused = 0u64;
    for &n in facet_counts.values() {
        match n {
            1 => boundary += 1,
            2 => interior += 1,
            _ => overused += 1,
        }
    }
    let euler = (d == 3)
        .then(|| verts.len() as i64 - edges.len() as i64 + simplices as i64);
    Ok(WatertightReport {
        simplices,
        vertices: verts.len() as u64,
        interior_facets: interior,
        boundary_facets: boundary,
        overused_facets: overused,
        euler_characteristic: euler,
    })
}
