//! Classification inside a single Kuhn simplex against its K-resistar. Same
//! projection walk as the cube variant, but faces are sub-simplices of the
//! vertex chain and exits are found in barycentric coordinates.

use crate::classify_cube::{barycentre, norm_dist};
use crate::error::{Error, Result};
use crate::geometry::{KuhnSimplexRef, SimplexFace, VertexId};
use crate::oracle::Label;
use crate::store::{BoundaryPoint, BoundaryStore, Variant};
use nalgebra::{DMatrix, DVector};

/// Boundary points of the store whose edge lies inside the simplex, i.e. both
/// endpoints are simplex vertices. Order follows the store.
pub fn simplex_boundary_points(
    s: &BoundaryStore,
    r: &KuhnSimplexRef,
) -> Result<Vec<BoundaryPoint>> {
    if s.variant != Variant::Kuhn {
        return Err(Error::Contract("store variant must be kuhn".into()));
    }
    let verts = r.vertices();
    let pts = s.points(&r.cube).map(|p| p.to_vec()).unwrap_or_default();
    Ok(pts
        .into_iter()
        .filter(|p| verts.contains(&p.v_minus) && verts.contains(&p.v_plus))
        .collect())
}

/// Labels of the simplex vertices in chain order, recovered from the boundary
/// points alone. Every vertex of a boundary simplex is an endpoint of some
/// boundary point because all vertex pairs of a Kuhn simplex are grid edges.
pub fn simplex_vertex_labels(s: &BoundaryStore, r: &KuhnSimplexRef) -> Result<Vec<Label>> {
    let pts = simplex_boundary_points(s, r)?;
    if pts.is_empty() {
        return Err(Error::Contract("simplex has no boundary points".into()));
    }
    let verts = r.vertices();
    let mut labels = Vec::with_capacity(verts.len());
    for v in &verts {
        let mut lab = None;
        for p in &pts {
            if p.v_minus == *v {
                lab = Some(Label::Minus);
                break;
            }
            if p.v_plus == *v {
                lab = Some(Label::Plus);
                break;
            }
        }
        labels.push(lab.ok_or_else(|| {
            Error::Corrupt(format!("vertex {v:?} not covered by any boundary point"))
        })?);
    }
    Ok(labels)
}

/// The face spanned by the simplex vertices of one sign; carries no boundary
/// points, so every point of it classifies as `sign`.
pub fn face_of_no_boundary(
    s: &BoundaryStore,
    r: &KuhnSimplexRef,
    sign: Label,
) -> Result<SimplexFace> {
    if sign == Label::Zero {
        return Err(Error::Contract("sign must be -1 or +1".into()));
    }
    let labels = simplex_vertex_labels(s, r)?;
    let vertices: Vec<VertexId> = r
        .vertices()
        .into_iter()
        .zip(&labels)
        .filter(|(_, &l)| l == sign)
        .map(|(v, _)| v)
        .collect();
    if vertices.is_empty() {
        return Err(Error::Corrupt(
            "boundary simplex has vertices of one sign only".into(),
        ));
    }
    Ok(SimplexFace { vertices })
}

/// Barycentric coordinates of `x` with respect to the affinely independent
/// points `coords`, by least squares on the homogeneous system.
fn barycentric(coords: &[Vec<f64>], x: &[f64]) -> Result<Vec<f64>> {
    let d = x.len();
    let k = coords.len();
    let a = DMatrix::from_fn(d + 1, k, |i, j| if i < d { coords[j][i] } else { 1.0 });
    let b = DVector::from_iterator(d + 1, x.iter().copied().chain(std::iter::once(1.0)));
    let svd = a.svd(true, true);
    let w = svd
        .solve(&b, 1e-13)
        .map_err(|e| Error::Numeric(e.to_string()))?;
    Ok(w.iter().copied().collect())
}

/// Classify `x` against the K-resistar of simplex `r`. Mirrors the cube walk:
/// project from the barycentre of the current face's boundary points through
/// `x` onto the face boundary, drop the vertex whose barycentric weight hits
/// zero first, and stop at a boundary-free face.
pub fn classify_in_simplex(
    s: &BoundaryStore,
    r: &KuhnSimplexRef,
    x: &[f64],
    delta: f64,
) -> Result<Label> {
    let g = &s.grid;
    let pts = simplex_boundary_points(s, r)?;
    if pts.is_empty() {
        return Err(Error::Contract("simplex has no boundary points".into()));
    }
    if x.len() != g.d || !r.contains(g, x, 1e-9) {
        return Err(Error::Domain(format!("point {x:?} outside simplex {r:?}")));
    }

    let mut face: Vec<VertexId> = r.vertices();
    let mut cur: Vec<f64> = x.to_vec();
    let mut pts = pts;
    loop {
        let bary = barycentre(g, &pts);
        if norm_dist(&cur, &bary) < delta {
            return Ok(Label::Zero);
        }
        let coords: Vec<Vec<f64>> = face.iter().map(|v| g.vertex_coords(v)).collect();
        let w_o = barycentric(&coords, &bary)?;
        let w_x = barycentric(&coords, &cur)?;
        // exit parameter: first barycentric weight to reach zero along the ray
        let mut best_t = f64::INFINITY;
        let mut drop = usize::MAX;
        for i in 0..face.len() {
            if w_x[i] < w_o[i] - 1e-15 {
                let t = w_o[i] / (w_o[i] - w_x[i]);
                if t < best_t {
                    best_t = t;
                    drop = i;
                }
            }
        }
        if drop == usize::MAX {
            return Ok(Label::Zero); // ray degenerate within numeric noise
        }
        let exit: Vec<f64> = bary
            .iter()
            .zip(&cur)
            .map(|(&o, &c)| o + best_t * (c - o))
            .collect();
        let sub: Vec<VertexId> = face
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
        if inner.is_empty() {
            for p in &pts {
                if sub.contains(&p.v_plus) {
                    return Ok(Label::Plus);
                }
                if sub.contains(&p.v_minus) {
                    return Ok(Label::Minus);
                }
            }
            return Err(Error::Corrupt(
                "no boundary endpoint in the boundary-free face".into(),
            ));
        }
        face = sub;
        cur = exit;
        pts = inner;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{cube_of_point, kuhn_simplex_of_point, CubeId, GridSpec};
    use crate::oracle::{Oracle, OracleSpec};
    use crate::store::{build_store, BuildOptions};

    fn hyperplane_store(variant: Variant) -> BoundaryStore {
        let g = GridSpec::new(2, 2).unwrap();
        let o = Oracle::new(OracleSpec::Hyperplane {
            normal: vec![1.0, 0.0],
            offset: 0.37,
        })
        .unwrap();
        build_store(&o, &g, variant, BuildOptions::new(10)).unwrap()
    }

    fn upper_simplex_2d() -> KuhnSimplexRef {
        // x0 <= x1: chain (0,0), (0,1), (1,1)
        KuhnSimplexRef {
            cube: CubeId(vec![0, 0]),
            perm: vec![0, 1],
        }
    }

    #[test]
    fn boundary_points_of_simplex() {
        let s = hyperplane_store(Variant::Kuhn);
        let r = upper_simplex_2d();
        let pts = simplex_boundary_points(&s, &r).unwrap();
        // edges (0,0)-(1,1) and (0,1)-(1,1) cross x0 = 0.37
        assert_eq!(pts.len(), 2);
        for p in &pts {
            assert_eq!(p.v_plus, crate::geometry::VertexId(vec![1, 1]));
        }
    }

    #[test]
    fn vertex_labels_and_sign_faces() {
        let s = hyperplane_store(Variant::Kuhn);
        let r = upper_simplex_2d();
        let labels = simplex_vertex_labels(&s, &r).unwrap();
        assert_eq!(labels, vec![Label::Minus, Label::Minus, Label::Plus]);
        let minus = face_of_no_boundary(&s, &r, Label::Minus).unwrap();
        assert_eq!(minus.vertices.len(), 2);
        let plus = face_of_no_boundary(&s, &r, Label::Plus).unwrap();
        assert_eq!(plus.vertices, vec![crate::geometry::VertexId(vec![1, 1])]);
    }

    #[test]
    fn classify_sides_of_hyperplane() {
        let s = hyperplane_store(Variant::Kuhn);
        let r = upper_simplex_2d();
        assert_eq!(
            classify_in_simplex(&s, &r, &[0.9, 0.95], 1e-5).unwrap(),
            Label::Plus
        );
        assert_eq!(
            classify_in_simplex(&s, &r, &[0.05, 0.5], 1e-5).unwrap(),
            Label::Minus
        );
    }

    #[test]
    fn classify_barycentre_is_zero() {
        let s = hyperplane_store(Variant::Kuhn);
        let r = upper_simplex_2d();
        let pts = simplex_boundary_points(&s, &r).unwrap();
        let bary = crate::classify_cube::barycentre(&s.grid, &pts);
        assert_eq!(classify_in_simplex(&s, &r, &bary, 1e-5).unwrap(), Label::Zero);
    }

    #[test]
    fn variant_contract() {
        let s = hyperplane_store(Variant::Cube);
        let r = upper_simplex_2d();
        assert!(matches!(
            classify_in_simplex(&s, &r, &[0.9, 0.95], 1e-5),
            Err(Error::Contract(_))
        ));
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

    #[test]
    fn simplex_vertex_consistency_sphere() {
        let g = GridSpec::new(3, 4).unwrap();
        let o = Oracle::new(OracleSpec::Sphere {
            center: vec![0.5; 3],
            radius: 0.35,
        })
        .unwrap();
        let s = build_store(&o, &g, Variant::Kuhn, BuildOptions::new(8)).unwrap();
        let mut simplices = 0;
        for c in s.cubes.keys() {
            for perm in permutations(3) {
                let r = KuhnSimplexRef {
                    cube: c.clone(),
                    perm,
                };
                let pts = simplex_boundary_points(&s, &r).unwrap();
                if pts.is_empty() {
                    continue;
                }
                simplices += 1;
                let verts = r.vertices();
                let labels = simplex_vertex_labels(&s, &r).unwrap();
                let centroid: Vec<f64> = {
                    let mut acc = vec![0.0; 3];
                    for v in &verts {
                        for (a, x) in acc.iter_mut().zip(g.vertex_coords(v)) {
                            *a += x;
                        }
                    }
                    acc.iter().map(|a| a / verts.len() as f64).collect()
                };
                for (v, want) in verts.iter().zip(labels) {
                    let x: Vec<f64> = g
                        .vertex_coords(v)
                        .iter()
                        .zip(&centroid)
                        .map(|(&xv, &cm)| xv + 1e-7 * (cm - xv))
                        .collect();
                    let got = classify_in_simplex(&s, &r, &x, 1e-9).unwrap();
                    assert_eq!(got, want, "vertex {v:?} of {r:?}");
                    assert_eq!(want, o.sanitized_vertex_label(&g, v));
                }
            }
        }
        assert!(simplices > 20);
    }

    #[test]
    fn classify_matches_oracle_away_from_surface() {
        let g = GridSpec::new(3, 6).unwrap();
        let o = Oracle::new(OracleSpec::Sphere {
            center: vec![0.5; 3],
            radius: 0.33,
        })
        .unwrap();
        let s = build_store(&o, &g, Variant::Kuhn, BuildOptions::new(10)).unwrap();
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(23);
        let eps = g.epsilon();
        let mut checked = 0;
        for _ in 0..100_000 {
            let x: Vec<f64> = (0..3).map(|_| rng.gen::<f64>()).collect();
            let rad = norm_dist(&x, &[0.5, 0.5, 0.5]);
            if (rad - 0.33).abs() < eps {
                continue;
            }
            let c = cube_of_point(&g, &x).unwrap();
            let r = kuhn_simplex_of_point(&g, &c, &x).unwrap();
            let pts = simplex_boundary_points(&s, &r).unwrap();
            if pts.is_empty() {
                continue;
            }
            let got = classify_in_simplex(&s, &r, &x, 1e-5).unwrap();
            assert_eq!(got, o.evaluate(&x), "x = {x:?}");
            checked += 1;
        }
        assert!(checked > 50, "only {checked} margin points sampled");
    }
}
