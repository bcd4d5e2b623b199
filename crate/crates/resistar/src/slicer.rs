//! Slicing a (d-1)-dimensional resistar down to a 3D polygon mesh with
//! d-3 hyperplanes, plus OBJ-like and JSON exports. Each simplex is cut
//! plane by plane: chord intersections of the current vertex set with the
//! plane are exactly the vertices of the cut polytope, and the final 2D
//! section is ordered by a convex hull in the residual plane.

use crate::enumerate::for_each_simplex;
use crate::error::{Error, Result};
use crate::store::BoundaryStore;
use serde::Serialize;
use std::collections::BTreeMap;

const ON_PLANE: f64 = 1e-12;
const MERGE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub enum Hyperplane {
    /// `x[axis] = value`.
    Axis { axis: usize, value: f64 },
    /// `normal . x = offset`.
    General { normal: Vec<f64>, offset: f64 },
}

impl Hyperplane {
    pub fn signed(&self, x: &[f64]) -> f64 {
        match self {
            Hyperplane::Axis { axis, value } => x[*axis] - value,
            Hyperplane::General { normal, offset } => {
                normal.iter().zip(x).map(|(&n, &xi)| n * xi).sum::<f64>() - offset
            }
        }
    }

    fn validate(&self, d: usize) -> Result<()> {
        match self {
            Hyperplane::Axis { axis, value } => {
                if *axis >= d {
                    return Err(Error::Domain(format!("plane axis {axis} out of range")));
                }
                if !(0.0..=1.0).contains(value) {
                    return Err(Error::Domain(format!("plane value {value} outside [0,1]")));
                }
            }
            Hyperplane::General { normal, .. } => {
                if normal.len() != d {
                    return Err(Error::Domain("plane normal has wrong dimension".into()));
                }
                if normal.iter().map(|&v| v * v).sum::<f64>() < 1e-24 {
                    return Err(Error::Domain("plane normal must be nonzero".into()));
                }
            }
        }
        Ok(())
    }

    fn normal_vec(&self, d: usize) -> Vec<f64> {
        match self {
            Hyperplane::Axis { axis, .. } => {
                let mut n = vec![0.0; d];
                n[*axis] = 1.0;
                n
            }
            Hyperplane::General { normal, .. } => normal.clone(),
        }
    }

    fn offset_val(&self) -> f64 {
        match self {
            Hyperplane::Axis { value, .. } => *value,
            Hyperplane::General { offset, .. } => *offset,
        }
    }
}

/// Polygon mesh in 3D after slicing: shared vertex list plus per-polygon
/// vertex index loops.
#[derive(Debug, Clone, Serialize)]
pub struct SlicedMesh {
    pub vertices: Vec<[f64; 3]>,
    pub polygons: Vec<Vec<usize>>,
}

fn cut_with_plane(points: &[Vec<f64>], plane: &Hyperplane) -> Vec<Vec<f64>> {
    let signed: Vec<f64> = points.iter().map(|p| plane.signed(p)).collect();
    let mut out: Vec<Vec<f64>> = Vec::new();
    let push = |p: Vec<f64>, out: &mut Vec<Vec<f64>>| {
        if !out
            .iter()
            .any(|q| q.iter().zip(&p).all(|(&a, &b)| (a - b).abs() < MERGE))
        {
            out.push(p);
        }
    };
    for (p, &s) in points.iter().zip(&signed) {
        if s.abs() < ON_PLANE {
            push(p.clone(), &mut out);
        }
    }
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            let (sa, sb) = (signed[i], signed[j]);
            if sa.abs() < ON_PLANE || sb.abs() < ON_PLANE || sa * sb > 0.0 {
                continue;
            }
            let t = sa / (sa - sb);
            let p: Vec<f64> = points[i]
                .iter()
                .zip(&points[j])
                .map(|(&a, &b)| a + t * (b - a))
                .collect();
            push(p, &mut out);
        }
    }
    out
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

fn normalize(v: &mut [f64]) -> f64 {
    let n = dot(v, v).sqrt();
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
    n
}

/// Orthonormal basis of the 3-flat cut out by the planes, plus a point on it.
/// Axis-aligned plane sets with distinct axes project by dropping the fixed
/// coordinates, so sections keep recognizable coordinates.
fn projection_basis(planes: &[Hyperplane], d: usize) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let axis_only: Option<Vec<(usize, f64)>> = planes
        .iter()
        .map(|p| match p {
            Hyperplane::Axis { axis, value } => Some((*axis, *value)),
            _ => None,
        })
        .collect();
    if let Some(axes) = axis_only {
        let mut distinct: Vec<usize> = axes.iter().map(|(a, _)| *a).collect();
        distinct.sort_unstable();
        distinct.dedup();
        if distinct.len() == planes.len() {
            let mut origin = vec![0.0; d];
            for &(a, v) in &axes {
                origin[a] = v;
            }
            let basis = (0..d)
                .filter(|k| !distinct.contains(k))
                .map(|k| {
                    let mut e = vec![0.0; d];
                    e[k] = 1.0;
                    e
                })
                .collect();
            return Ok((origin, basis));
        }
    }
    // orthonormalize the normals, then complete with coordinate directions
    let mut nb: Vec<Vec<f64>> = Vec::new();
    for p in planes {
        let mut n = p.normal_vec(d);
        for b in &nb {
            let c = dot(&n, b);
            n.iter_mut().zip(b).for_each(|(x, &bv)| *x -= c * bv);
        }
        if normalize(&mut n) < 1e-9 {
            return Err(Error::Domain("slicing planes are not independent".into()));
        }
        nb.push(n);
    }
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for k in 0..d {
        if basis.len() == 3 {
            break;
        }
        let mut e = vec![0.0; d];
        e[k] = 1.0;
        for b in nb.iter().chain(&basis) {
            let c = dot(&e, b);
            e.iter_mut().zip(b).for_each(|(x, &bv)| *x -= c * bv);
        }
        if normalize(&mut e) > 1e-9 {
            basis.push(e);
        }
    }
    if basis.len() != 3 {
        return Err(Error::Numeric("failed to build section basis".into()));
    }
    // a point on the flat: start from the origin projected onto each plane
    let mut origin = vec![0.0; d];
    for p in planes {
        // one Kaczmarz sweep per plane of the orthonormalized system
        let n = p.normal_vec(d);
        let nn = dot(&n, &n);
        let r = p.offset_val() - dot(&n, &origin);
        origin
            .iter_mut()
            .zip(&n)
            .for_each(|(x, &nv)| *x += r * nv / nn);
    }
    Ok((origin, basis))
}

/// 2D convex hull (monotone chain), returning hull points in counterclockwise
/// order. Collinear interior points are dropped.
fn hull2d(pts: &[(f64, f64)]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..pts.len()).collect();
    idx.sort_by(|&a, &b| pts[a].partial_cmp(&pts[b]).unwrap());
    idx.dedup_by(|&mut a, &mut b| {
        (pts[a].0 - pts[b].0).abs() < MERGE && (pts[a].1 - pts[b].1).abs() < MERGE
    });
    if idx.len() < 3 {
        return Vec::new();
    }
    let cross = |o: usize, a: usize, b: usize| {
        (pts[a].0 - pts[o].0) * (pts[b].1 - pts[o].1)
            - (pts[a].1 - pts[o].1) * (pts[b].0 - pts[o].0)
    };
    let mut lower: Vec<usize> = Vec::with_capacity(idx.len());
    for &i in &idx {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], i) <= 1e-18
        {
            lower.pop();
        }
        lower.push(i);
    }
    let mut upper: Vec<usize> = Vec::with_capacity(idx.len());
    for &i in idx.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], i) <= 1e-18
        {
            upper.pop();
        }
        upper.push(i);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    if lower.len() < 3 {
        Vec::new()
    } else {
        lower
    }
}

/// Slice the resistar with `d - 3` hyperplanes into a 3D polygon mesh. With
/// `d = 3` and no planes the simplices pass through unchanged as triangles.
pub fn slice(s: &BoundaryStore, planes: &[Hyperplane]) -> Result<SlicedMesh> {
    let d = s.grid.d;
    if d < 3 {
        return Err(Error::Contract(format!("slicing needs d >= 3, got {d}")));
    }
    if planes.len() != d - 3 {
        return Err(Error::Contract(format!(
            "need exactly {} slicing planes for d = {d}, got {}",
            d - 3,
            planes.len()
        )));
    }
    for p in planes {
        p.validate(d)?;
    }
    let (origin, basis) = if planes.is_empty() {
        (vec![0.0; 3], (0..3).map(|k| {
            let mut e = vec![0.0; 3];
            e[k] = 1.0;
            e
        }).collect())
    } else {
        projection_basis(planes, d)?
    };
    let to3 = |x: &[f64]| -> [f64; 3] {
        let rel: Vec<f64> = x.iter().zip(&origin).map(|(&a, &o)| a - o).collect();
        [dot(&rel, &basis[0]), dot(&rel, &basis[1]), dot(&rel, &basis[2])]
    };

    let mut vertices: Vec<[f64; 3]> = Vec::new();
    let mut lookup: BTreeMap<[i64; 3], usize> = BTreeMap::new();
    let mut polygons: Vec<Vec<usize>> = Vec::new();
    let mut intern = |v: [f64; 3], vertices: &mut Vec<[f64; 3]>| -> usize {
        let key = [
            (v[0] / MERGE).round() as i64,
            (v[1] / MERGE).round() as i64,
            (v[2] / MERGE).round() as i64,
        ];
        *lookup.entry(key).or_insert_with(|| {
            vertices.push(v);
            vertices.len() - 1
        })
    };

    for_each_simplex(s, |sv| {
        let mut pts: Vec<Vec<f64>> = sv.to_vec();
        for p in planes {
            if pts.len() < 2 {
                pts.clear();
                break;
            }
            pts = cut_with_plane(&pts, p);
        }
        if pts.len() < 3 {
            return;
        }
        let p3: Vec<[f64; 3]> = pts.iter().map(|x| to3(x)).collect();
        // in-plane frame for ordering: strongest edge from the centroid and
        // its orthogonal complement within the section plane
        let n = p3.len() as f64;
        let c = [
            p3.iter().map(|v| v[0]).sum::<f64>() / n,
            p3.iter().map(|v| v[1]).sum::<f64>() / n,
            p3.iter().map(|v| v[2]).sum::<f64>() / n,
        ];
        let rel: Vec<[f64; 3]> = p3
            .iter()
            .map(|v| [v[0] - c[0], v[1] - c[1], v[2] - c[2]])
            .collect();
        let mut e1 = *rel
            .iter()
            .max_by(|a, b| {
                dot(a.as_slice(), a.as_slice())
                    .partial_cmp(&dot(b.as_slice(), b.as_slice()))
                    .unwrap()
            })
            .unwrap();
        if normalize(&mut e1) < MERGE {
            return;
        }
        let mut e2 = [0.0; 3];
        let mut best = 0.0;
        for r in &rel {
            let c1 = dot(r, &e1);
            let orth = [r[0] - c1 * e1[0], r[1] - c1 * e1[1], r[2] - c1 * e1[2]];
            let len = dot(&orth, &orth);
            if len > best {
                best = len;
                e2 = orth;
            }
        }
        if normalize(&mut e2) < MERGE {
            return; // collinear section, no area
        }
        let uv: Vec<(f64, f64)> = rel.iter().map(|r| (dot(r, &e1), dot(r, &e2))).collect();
        let hull = hull2d(&uv);
        if hull.len() < 3 {
            return;
        }
        let poly: Vec<usize> = hull.iter().map(|&i| intern(p3[i], &mut vertices)).collect();
        polygons.push(poly);
    })?;
    Ok(SlicedMesh { vertices, polygons })
}

/// OBJ-like export: `v x y z` lines followed by 1-based `f` loops.
pub fn export_obj(mesh: &SlicedMesh) -> String {
    let mut out = String::new();
    for v in &mesh.vertices {
        out.push_str(&format!("v {} {} {}\n", v[0], v[1], v[2]));
    }
    for p in &mesh.polygons {
        out.push('f');
        for &i in p {
            out.push_str(&format!(" {}", i + 1));
        }
        out.push('\n');
    }
    out
}

/// JSON export: `{"vertices": [[x,y,z], ...], "polygons": [[i, ...], ...]}`
/// with 0-based indices.
pub fn export_json(mesh: &SlicedMesh) -> Result<String> {
    serde_json::to_string_pretty(mesh).map_err(|e| Error::Format(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::GridSpec;
    use crate::oracle::{Oracle, OracleSpec};
    use crate::store::{build_store, BuildOptions, Variant};

    fn sphere_store(d: usize, n_g: usize, r: f64, variant: Variant) -> BoundaryStore {
        let g = GridSpec::new(d, n_g).unwrap();
        let o = Oracle::new(OracleSpec::Sphere {
            center: vec![0.5; d],
            radius: r,
        })
        .unwrap();
        build_store(&o, &g, variant, BuildOptions::new(10)).unwrap()
    }

    #[test]
    fn d3_passthrough_is_triangle_soup() {
        let s = sphere_store(3, 6, 0.35, Variant::Kuhn);
        let mesh = slice(&s, &[]).unwrap();
        let n = crate::enumerate::count_simplices(&s).unwrap();
        assert_eq!(mesh.polygons.len() as u64, n);
        for p in &mesh.polygons {
            assert_eq!(p.len(), 3);
            assert!(p.iter().all(|&i| i < mesh.vertices.len()));
        }
    }

    #[test]
    fn plane_count_contract() {
        let s = sphere_store(3, 4, 0.35, Variant::Cube);
        let bad = [Hyperplane::Axis {
            axis: 0,
            value: 0.5,
        }];
        assert!(matches!(slice(&s, &bad), Err(Error::Contract(_))));
    }

    #[test]
    fn d4_axis_slice_yields_convex_polygons() {
        let s = sphere_store(4, 4, 0.35, Variant::Cube);
        let mesh = slice(
            &s,
            &[Hyperplane::Axis {
                axis: 3,
                value: 0.5,
            }],
        )
        .unwrap();
        assert!(!mesh.polygons.is_empty());
        for p in &mesh.polygons {
            assert!(p.len() >= 3);
            let mut uniq = p.clone();
            uniq.sort_unstable();
            uniq.dedup();
            assert_eq!(uniq.len(), p.len(), "repeated vertex in polygon");
        }
        // slicing through the equator of a 3-sphere leaves a surface around
        // the 2D centre: vertices stay near radius 0.35 from (0.5,0.5,0.5)
        for v in &mesh.vertices {
            let r = ((v[0] - 0.5).powi(2) + (v[1] - 0.5).powi(2) + (v[2] - 0.5).powi(2)).sqrt();
            assert!((r - 0.35).abs() < 0.25, "vertex {v:?} far from section sphere");
        }
    }

    #[test]
    fn general_plane_matches_axis_plane() {
        let s = sphere_store(4, 4, 0.35, Variant::Cube);
        let a = slice(
            &s,
            &[Hyperplane::Axis {
                axis: 3,
                value: 0.5,
            }],
        )
        .unwrap();
        let b = slice(
            &s,
            &[Hyperplane::General {
                normal: vec![0.0, 0.0, 0.0, 1.0],
                offset: 0.5,
            }],
        )
        .unwrap();
        assert_eq!(a.polygons.len(), b.polygons.len());
        // same section, possibly in a different 3D frame: compare the
        // multisets of in-plane edge lengths of the first polygons
        let perimeter = |m: &SlicedMesh| -> f64 {
            m.polygons
                .iter()
                .map(|p| {
                    (0..p.len())
                        .map(|i| {
                            let u = m.vertices[p[i]];
                            let w = m.vertices[p[(i + 1) % p.len()]];
                            ((u[0] - w[0]).powi(2) + (u[1] - w[1]).powi(2) + (u[2] - w[2]).powi(2))
                                .sqrt()
                        })
                        .sum::<f64>()
                })
                .sum()
        };
        assert!((perimeter(&a) - perimeter(&b)).abs() < 1e-6);
    }

    #[test]
    fn plane_order_commutes_d5() {
        let s = sphere_store(5, 3, 0.4, Variant::Cube);
        let p1 = Hyperplane::Axis {
            axis: 3,
            value: 0.5,
        };
        let p2 = Hyperplane::Axis {
            axis: 4,
            value: 0.5,
        };
        let a = slice(&s, &[p1.clone(), p2.clone()]).unwrap();
        let b = slice(&s, &[p2, p1]).unwrap();
        let keyset = |m: &SlicedMesh| -> Vec<[i64; 3]> {
            let mut k: Vec<[i64; 3]> = m
                .vertices
                .iter()
                .map(|v| {
                    [
                        (v[0] * 1e9).round() as i64,
                        (v[1] * 1e9).round() as i64,
                        (v[2] * 1e9).round() as i64,
                    ]
                })
                .collect();
            k.sort_unstable();
            k
        };
        assert_eq!(keyset(&a), keyset(&b));
        assert_eq!(a.polygons.len(), b.polygons.len());
    }

    #[test]
    fn exports_are_wellformed() {
        let s = sphere_store(3, 4, 0.35, Variant::Cube);
        let mesh = slice(&s, &[]).unwrap();
        let obj = export_obj(&mesh);
        let v_lines = obj.lines().filter(|l| l.starts_with("v ")).count();
        let f_lines = obj.lines().filter(|l| l.starts_with("f ")).count();
        assert_eq!(v_lines, mesh.vertices.len());
        assert_eq!(f_lines, mesh.polygons.len());
        let json: serde_json::Value = serde_json::from_str(&export_json(&mesh).unwrap()).unwrap();
        assert_eq!(
            json["vertices"].as_array().unwrap().len(),
            mesh.vertices.len()
        );
        assert_eq!(
            json["polygons"].as_array().unwrap().len(),
            mesh.polygons.len()
        );
    }
}
