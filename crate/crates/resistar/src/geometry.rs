//! Regular-grid indexing, the cube face lattice and Kuhn-simplex
//! combinatorics. Everything here is a pure value type.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// A regular grid of `n_g^d` points over `[0,1]^d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridSpec {
    pub d: usize,
    pub n_g: usize,
}

impl GridSpec {
    pub fn new(d: usize, n_g: usize) -> Result<Self> {
        if d < 1 {
            return Err(Error::Domain("dimension must be >= 1".into()));
        }
        if n_g < 2 {
            return Err(Error::Domain("n_g must be >= 2".into()));
        }
        Ok(GridSpec { d, n_g })
    }

    /// Edge length between adjacent grid points.
    pub fn epsilon(&self) -> f64 {
        1.0 / (self.n_g as f64 - 1.0)
    }

    /// Number of cubes per axis.
    pub fn cubes_per_axis(&self) -> usize {
        self.n_g - 1
    }

    pub fn vertex_coords(&self, v: &VertexId) -> Vec<f64> {
        let eps = self.epsilon();
        v.0.iter().map(|&i| i as f64 * eps).collect()
    }

    /// Closed bounds `[lo, hi]` of a cube per axis.
    pub fn cube_bounds(&self, c: &CubeId) -> (Vec<f64>, Vec<f64>) {
        let eps = self.epsilon();
        let lo: Vec<f64> = c.0.iter().map(|&i| i as f64 * eps).collect();
        let hi: Vec<f64> = c.0.iter().map(|&i| (i + 1) as f64 * eps).collect();
        (lo, hi)
    }

    /// Centre of a cube.
    pub fn cube_centre(&self, c: &CubeId) -> Vec<f64> {
        let eps = self.epsilon();
        c.0.iter().map(|&i| (i as f64 + 0.5) * eps).collect()
    }

    pub fn contains_point(&self, x: &[f64]) -> bool {
        x.len() == self.d && x.iter().all(|&v| (0.0..=1.0).contains(&v))
    }
}

/// Multi-index of a grid vertex, each component in `0..n_g`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct VertexId(pub Vec<u32>);

/// Multi-index of a grid cube (its minimal corner), each component in `0..n_g-1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CubeId(pub Vec<u32>);

impl CubeId {
    /// Minimal-corner vertex of the cube.
    pub fn min_vertex(&self) -> VertexId {
        VertexId(self.0.clone())
    }

    /// Vertex at the given 0/1 corner offsets.
    pub fn corner(&self, offsets: &[u8]) -> VertexId {
        VertexId(
            self.0
                .iter()
                .zip(offsets)
                .map(|(&c, &o)| c + o as u32)
                .collect(),
        )
    }

    /// Whether `v` is one of the cube's `2^d` corners.
    pub fn contains_vertex(&self, v: &VertexId) -> bool {
        self.0
            .iter()
            .zip(&v.0)
            .all(|(&c, &vi)| vi == c || vi == c + 1)
    }
}

/// A face of a cube stored intrinsically: the set of free axes and, for every
/// fixed axis, its 0/1 offset from the cube's minimal corner. Face-lattice
/// walks are O(d) in this encoding.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FaceCode {
    /// `free[k]` iff axis `k` varies within the face.
    pub free: Vec<bool>,
    /// Offset in {0,1} per axis; meaningful only where `!free[k]`.
    pub offset: Vec<u8>,
}

impl FaceCode {
    /// The full cube as a face of itself.
    pub fn full(d: usize) -> Self {
        FaceCode {
            free: vec![true; d],
            offset: vec![0; d],
        }
    }

    pub fn dim(&self) -> usize {
        self.free.iter().filter(|&&f| f).count()
    }

    /// Fix one free axis at the given offset.
    pub fn fix_axis(&self, axis: usize, offset: u8) -> FaceCode {
        debug_assert!(self.free[axis]);
        let mut f = self.clone();
        f.free[axis] = false;
        f.offset[axis] = offset;
        f
    }

    /// Whether a cube corner (given by its 0/1 offsets) lies in the face.
    pub fn contains_corner(&self, offsets: &[u8]) -> bool {
        self.free
            .iter()
            .zip(&self.offset)
            .zip(offsets)
            .all(|((&free, &fo), &o)| free || fo == o)
    }

    /// Whether a grid vertex lies in this face of cube `c`.
    pub fn contains_vertex(&self, c: &CubeId, v: &VertexId) -> bool {
        c.0.iter()
            .zip(&v.0)
            .zip(self.free.iter().zip(&self.offset))
            .all(|((&ci, &vi), (&free, &fo))| {
                if free {
                    vi == ci || vi == ci + 1
                } else {
                    vi == ci + fo as u32
                }
            })
    }

    /// Closed bounds of the face within cube `c`, in global coordinates.
    pub fn bounds(&self, g: &GridSpec, c: &CubeId) -> (Vec<f64>, Vec<f64>) {
        let eps = g.epsilon();
        let mut lo = Vec::with_capacity(g.d);
        let mut hi = Vec::with_capacity(g.d);
        for k in 0..g.d {
            let base = c.0[k] as f64 * eps;
            if self.free[k] {
                lo.push(base);
                hi.push(base + eps);
            } else {
                let v = base + self.offset[k] as f64 * eps;
                lo.push(v);
                hi.push(v);
            }
        }
        (lo, hi)
    }
}

/// One simplex of the Kuhn triangulation of a cube, identified by the
/// coordinate permutation that sorts local coordinates ascending.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct KuhnSimplexRef {
    pub cube: CubeId,
    /// Permutation of `0..d` (0-based axes): local coords satisfy
    /// `x[perm[0]] <= x[perm[1]] <= ... <= x[perm[d-1]]`.
    pub perm: Vec<usize>,
}

impl KuhnSimplexRef {
    /// The `d+1` vertices of the simplex as a componentwise dominance chain,
    /// from the cube's minimal corner up to its maximal corner.
    ///
    /// With local coordinates sorted ascending along `perm`, vertex `k` sets
    /// to 1 the `k` axes that come last in the permutation.
    pub fn vertices(&self) -> Vec<VertexId> {
        let d = self.perm.len();
        let mut out = Vec::with_capacity(d + 1);
        let mut idx = self.cube.0.clone();
        out.push(VertexId(idx.clone()));
        for k in 0..d {
            idx[self.perm[d - 1 - k]] += 1;
            out.push(VertexId(idx.clone()));
        }
        out
    }

    /// Membership test in the closed simplex via the sorted-coordinate
    /// characterisation, with tolerance `tol` on each inequality.
    pub fn contains(&self, g: &GridSpec, x: &[f64], tol: f64) -> bool {
        let (lo, hi) = g.cube_bounds(&self.cube);
        let eps = g.epsilon();
        let local: Vec<f64> = x.iter().zip(&lo).map(|(&xi, &l)| (xi - l) / eps).collect();
        if x.iter().zip(&lo).zip(&hi).any(|((&xi, &l), &h)| {
            xi < l - tol || xi > h + tol
        }) {
            return false;
        }
        self.perm
            .windows(2)
            .all(|w| local[w[0]] <= local[w[1]] + tol)
    }
}

/// A face of a Kuhn simplex: a subset of its vertices kept in chain order
/// (componentwise dominance ascending).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SimplexFace {
    pub vertices: Vec<VertexId>,
}

impl SimplexFace {
    pub fn dim(&self) -> usize {
        self.vertices.len() - 1
    }

    pub fn contains_vertex(&self, v: &VertexId) -> bool {
        self.vertices.iter().any(|u| u == v)
    }
}

/// Cube containing `x`: `min(floor(x_k / eps), n_g - 2)` per axis.
pub fn cube_of_point(g: &GridSpec, x: &[f64]) -> Result<CubeId> {
    if !g.contains_point(x) {
        return Err(Error::Domain(format!("point {x:?} outside [0,1]^{}", g.d)));
    }
    let eps = g.epsilon();
    let max = (g.n_g - 2) as u32;
    Ok(CubeId(
        x.iter()
            .map(|&xi| ((xi / eps).floor() as u32).min(max))
            .collect(),
    ))
}

/// Kuhn simplex of cube `c` containing `x`. The permutation sorts the local
/// coordinates ascending; ties break by ascending axis index.
pub fn kuhn_simplex_of_point(g: &GridSpec, c: &CubeId, x: &[f64]) -> Result<KuhnSimplexRef> {
    let (lo, hi) = g.cube_bounds(c);
    let tol = 1e-12;
    if x.len() != g.d
        || x.iter()
            .zip(&lo)
            .zip(&hi)
            .any(|((&xi, &l), &h)| xi < l - tol || xi > h + tol)
    {
        return Err(Error::Domain(format!("point {x:?} outside cube {c:?}")));
    }
    let eps = g.epsilon();
    let local: Vec<f64> = x.iter().zip(&lo).map(|(&xi, &l)| (xi - l) / eps).collect();
    let mut perm: Vec<usize> = (0..g.d).collect();
    perm.sort_by(|&a, &b| local[a].partial_cmp(&local[b]).unwrap().then(a.cmp(&b)));
    Ok(KuhnSimplexRef {
        cube: c.clone(),
        perm,
    })
}

/// The `d * 2^(d-1)` axis-aligned edges of a cube, each ordered with the
/// lower multi-index first.
pub fn cube_edges(g: &GridSpec, c: &CubeId) -> Vec<(VertexId, VertexId)> {
    let d = g.d;
    let mut out = Vec::with_capacity(d << (d - 1));
    let mut offsets = vec![0u8; d];
    for axis in 0..d {
        loop {
            // enumerate offsets of the other axes; the edge axis stays 0->1
            offsets[axis] = 0;
            let a = c.corner(&offsets);
            offsets[axis] = 1;
            let b = c.corner(&offsets);
            offsets[axis] = 0;
            out.push((a, b));
            // increment binary counter skipping `axis`
            let mut done = true;
            for k in (0..d).rev() {
                if k == axis {
                    continue;
                }
                if offsets[k] == 0 {
                    offsets[k] = 1;
                    done = false;
                    break;
                }
                offsets[k] = 0;
            }
            if done {
                break;
            }
        }
        offsets.iter_mut().for_each(|o| *o = 0);
    }
    out
}

/// All unordered pairs of distinct cube corners `(u, w)` with `u <= w`
/// componentwise. These are exactly the edges appearing in the `d!` Kuhn
/// simplices of the cube; there are `3^d - 2^d` of them.
pub fn kuhn_edges(g: &GridSpec, c: &CubeId) -> Vec<(VertexId, VertexId)> {
    let d = g.d;
    let mut out = Vec::new();
    // per axis choose (u_k, w_k) in {(0,0), (1,1), (0,1)}; skip u == w
    let mut choice = vec![0u8; d]; // 0 -> (0,0), 1 -> (1,1), 2 -> (0,1)
    loop {
        if choice.iter().any(|&ch| ch == 2) {
            let uo: Vec<u8> = choice.iter().map(|&ch| u8::from(ch == 1)).collect();
            let wo: Vec<u8> = choice.iter().map(|&ch| u8::from(ch != 0)).collect();
            out.push((c.corner(&uo), c.corner(&wo)));
        }
        let mut done = true;
        for k in (0..d).rev() {
            if choice[k] < 2 {
                choice[k] += 1;
                done = false;
                break;
            }
            choice[k] = 0;
        }
        if done {
            break;
        }
    }
    out
}

/// All `i`-dimensional faces of `f`: choose `i` free axes to keep and fix the
/// rest at either offset.
pub fn subfaces(f: &FaceCode, i: usize) -> Result<Vec<FaceCode>> {
    let dim = f.dim();
    if i >= dim {
        return Err(Error::Domain(format!(
            "subface dimension {i} must be < face dimension {dim}"
        )));
    }
    let free_axes: Vec<usize> = (0..f.free.len()).filter(|&k| f.free[k]).collect();
    let mut out = Vec::new();
    // choose which free axes to fix (dim - i of them), then their offsets
    let mut keep = vec![false; dim];
    fn rec(
        f: &FaceCode,
        free_axes: &[usize],
        keep: &mut Vec<bool>,
        pos: usize,
        remaining_keep: usize,
        out: &mut Vec<FaceCode>,
    ) {
        let left = free_axes.len() - pos;
        if remaining_keep > left {
            return;
        }
        if pos == free_axes.len() {
            // fix every non-kept free axis at each offset combination
            let fixed: Vec<usize> = (0..free_axes.len())
                .filter(|&j| !keep[j])
                .map(|j| free_axes[j])
                .collect();
            let mut offs = vec![0u8; fixed.len()];
            loop {
                let mut sub = f.clone();
                for (j, &axis) in fixed.iter().enumerate() {
                    sub.free[axis] = false;
                    sub.offset[axis] = offs[j];
                }
                out.push(sub);
                let mut done = true;
                for k in (0..offs.len()).rev() {
                    if offs[k] == 0 {
                        offs[k] = 1;
                        done = false;
                        break;
                    }
                    offs[k] = 0;
                }
                if done || offs.is_empty() {
                    break;
                }
            }
            return;
        }
        if remaining_keep > 0 {
            keep[pos] = true;
            rec(f, free_axes, keep, pos + 1, remaining_keep - 1, out);
            keep[pos] = false;
        }
        rec(f, free_axes, keep, pos + 1, remaining_keep, out);
    }
    rec(f, &free_axes, &mut keep, 0, i, &mut out);
    Ok(out)
}
