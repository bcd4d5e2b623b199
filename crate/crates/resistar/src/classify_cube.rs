//! Classification of a point inside a single cube against its resistar, by
//! recursive ray projection through barycentres of boundary points. Memory
//! stays proportional to the cube's boundary list; faces touched per query
//! never exceed `d`.

use crate::error::{Error, Result};
use crate::geometry::{CubeId, FaceCode, GridSpec};
use crate::oracle::Label;
use crate::store::{BoundaryPoint, BoundaryStore, Variant};

const DIR_TOL: f64 = 1e-15;

pub(crate) fn barycentre(g: &GridSpec, pts: &[BoundaryPoint]) -> Vec<f64> {
    let d = g.d;
    let mut acc = vec![0.0; d];
    for p in pts {
        for (a, v) in acc.iter_mut().zip(p.point(g)) {
            *a += v;
        }
    }
    let n = pts.len() as f64;
    acc.iter_mut().for_each(|a| *a /= n);
    acc
}

pub(crate) fn norm_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Exit of the ray from `origin` through `through` out of face `f` of cube
/// `c`: the exit point and the facet of `f` it lands in. A corner hit
/// descends through the smallest free-axis index.
pub fn ray_exit_face(
    g: &GridSpec,
    c: &CubeId,
    f: &FaceCode,
    origin: &[f64],
    through: &[f64],
) -> Result<(Vec<f64>, FaceCode)> {
    let (lo, hi) = f.bounds(g, c);
    let mut best_t = f64::INFINITY;
    let mut hit_axis = usize::MAX;
    let mut hit_side = 0u8;
    for k in 0..g.d {
        if !f.free[k] {
            continue;
        }
        let dir = through[k] - origin[k];
        if dir > DIR_TOL {
            let t = (hi[k] - origin[k]) / dir;
            if t < best_t {
                best_t = t;
                hit_axis = k;
                hit_side = 1;
            }
        } else if dir < -DIR_TOL {
            let t = (lo[k] - origin[k]) / dir;
            if t < best_t {
                best_t = t;
                hit_axis = k;
                hit_side = 0;
            }
        }
    }
    if hit_axis == usize::MAX {
        return Err(Error::Numeric("degenerate ray direction".into()));
    }
    let mut exit: Vec<f64> = origin
        .iter()
        .zip(through)
        .map(|(&o, &x)| o + best_t * (x - o))
        .collect();
    // pin the hit axis to its bound and clamp float noise on the others
    exit[hit_axis] = if hit_side == 1 { hi[hit_axis] } else { lo[hit_axis] };
    for k in 0..g.d {
        exit[k] = exit[k].clamp(lo[k], hi[k]);
    }
    Ok((exit, f.fix_axis(hit_axis, hit_side)))
}

/// Classify `x` against the c-resistar of cube `c`: 0 within `delta` of a
/// recursive barycentre, otherwise the sign of the connected vertex component
/// the projection walk ends in. The walk needs only the boundary points and
/// their endpoint labels, never the full grid labelling.
pub fn classify_in_cube(
    s: &BoundaryStore,
    c: &CubeId,
    x: &[f64],
    delta: f64,
) -> Result<Label> {
    if s.variant != Variant::Cube {
        return Err(Error::Contract("store variant must be cube".into()));
    }
    let g = &s.grid;
    let pts = s
        .points(c)
        .ok_or_else(|| Error::Contract(format!("cube {c:?} has no boundary points")))?;
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

    let mut face = FaceCode::full(g.d);
    let mut cur: Vec<f64> = x.to_vec();
    let mut pts: Vec<BoundaryPoint> = pts.to_vec();
    loop {
        let bary = barycentre(g, &pts);
        if norm_dist(&cur, &bary) < delta {
            return Ok(Label::Zero);
        }
        let (exit, facet) = match ray_exit_face(g, c, &face, &bary, &cur) {
            Ok(v) => v,
            Err(Error::Numeric(_)) => return Ok(Label::Zero),
            Err(e) => return Err(e),
        };
        let inner: Vec<BoundaryPoint> = pts
            .iter()
            .filter(|p| {
                facet.contains_vertex(c, &p.v_minus) && facet.contains_vertex(c, &p.v_plus)
            })
            .cloned()
            .collect();
        if inner.is_empty() {
            // the facet is part of a connected vertex component of one sign;
            // some boundary point of the previous face has an endpoint there
            for p in &pts {
                if facet.contains_vertex(c, &p.v_plus) {
                    return Ok(Label::Plus);
                }
                if facet.contains_vertex(c, &p.v_minus) {
                    return Ok(Label::Minus);
                }
            }
            return Err(Error::Corrupt(
                "no boundary endpoint in the boundary-free facet".into(),
            ));
        }
        face = facet;
        cur = exit;
        pts = inner;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{cube_of_point, GridSpec, VertexId};
    use crate::oracle::{Oracle, OracleSpec};
    use crate::store::{build_store, BuildOptions};

    fn grid(d: usize, n_g: usize) -> GridSpec {
        GridSpec::new(d, n_g).unwrap()
    }

    #[test]
    fn ray_exit_axis_aligned() {
        let g = grid(2, 2);
        let c = CubeId(vec![0, 0]);
        let f = FaceCode::full(2);
        let (exit, facet) = ray_exit_face(&g, &c, &f, &[0.5, 0.5], &[0.75, 0.5]).unwrap();
        assert_eq!(exit, vec![1.0, 0.5]);
        assert!(!facet.free[0] && facet.offset[0] == 1);
    }

    #[test]
    fn ray_exit_oblique() {
        let g = grid(2, 2);
        let c = CubeId(vec![0, 0]);
        let f = FaceCode::full(2);
        let (exit, facet) = ray_exit_face(&g, &c, &f, &[0.5, 0.5], &[0.6, 0.7]).unwrap();
        assert!((exit[0] - 0.75).abs() < 1e-12 && (exit[1] - 1.0).abs() < 1e-12);
        assert!(!facet.free[1] && facet.offset[1] == 1);
    }

    #[test]
    fn ray_exit_corner_tie_takes_smallest_axis() {
        let g = grid(2, 2);
        let c = CubeId(vec![0, 0]);
        let f = FaceCode::full(2);
        let (exit, facet) = ray_exit_face(&g, &c, &f, &[0.5, 0.5], &[0.75, 0.75]).unwrap();
        assert_eq!(exit, vec![1.0, 1.0]);
        assert!(!facet.free[0] && facet.free[1]);
    }

    #[test]
    fn ray_exit_degenerate_direction() {
        let g = grid(2, 2);
        let c = CubeId(vec![0, 0]);
        let f = FaceCode::full(2);
        assert!(matches!(
            ray_exit_face(&g, &c, &f, &[0.5, 0.5], &[0.5, 0.5]),
            Err(Error::Numeric(_))
        ));
    }

    fn hyperplane_store_2d() -> BoundaryStore {
        let g = grid(2, 2);
        let o = Oracle::new(OracleSpec::Hyperplane {
            normal: vec![1.0, 0.0],
            offset: 0.37,
        })
        .unwrap();
        build_store(&o, &g, Variant::Cube, BuildOptions::new(10)).unwrap()
    }

    #[test]
    fn classify_sides_of_hyperplane() {
        let s = hyperplane_store_2d();
        let c = CubeId(vec![0, 0]);
        assert_eq!(classify_in_cube(&s, &c, &[0.9, 0.5], 1e-5).unwrap(), Label::Plus);
        assert_eq!(classify_in_cube(&s, &c, &[0.1, 0.5], 1e-5).unwrap(), Label::Minus);
    }

    #[test]
    fn classify_barycentre_is_zero() {
        let s = hyperplane_store_2d();
        let c = CubeId(vec![0, 0]);
        let bary = barycentre(&s.grid, s.points(&c).unwrap());
        assert_eq!(classify_in_cube(&s, &c, &bary, 1e-5).unwrap(), Label::Zero);
    }

    #[test]
    fn classify_rejects_outside_point_and_empty_cube() {
        let s = hyperplane_store_2d();
        let c = CubeId(vec![0, 0]);
        assert!(classify_in_cube(&s, &c, &[1.5, 0.5], 1e-5).is_err());
        // a kuhn store violates the variant contract
        let g = grid(2, 2);
        let o = Oracle::new(OracleSpec::Hyperplane {
            normal: vec![1.0, 0.0],
            offset: 0.37,
        })
        .unwrap();
        let k = build_store(&o, &g, Variant::Kuhn, BuildOptions::new(4)).unwrap();
        assert!(matches!(
            classify_in_cube(&k, &c, &[0.5, 0.5], 1e-5),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn grid_vertex_consistency_sphere() {
        for (d, n_g) in [(2usize, 5usize), (3, 4)] {
            let g = grid(d, n_g);
            let o = Oracle::new(OracleSpec::Sphere {
                center: vec![0.5; d],
                radius: 0.35,
            })
            .unwrap();
            let s = build_store(&o, &g, Variant::Cube, BuildOptions::new(8)).unwrap();
            for c in s.cubes.keys() {
                let (lo, hi) = g.cube_bounds(c);
                let mut offsets = vec![0u8; d];
                loop {
                    let v = VertexId(
                        c.0.iter()
                            .zip(&offsets)
                            .map(|(&ci, &o)| ci + o as u32)
                            .collect(),
                    );
                    // nudge the vertex inward along the cube diagonal
                    let x: Vec<f64> = g
                        .vertex_coords(&v)
                        .iter()
                        .enumerate()
                        .map(|(k, &xv)| {
                            let centre = 0.5 * (lo[k] + hi[k]);
                            xv + 1e-9 * (centre - xv).signum()
                        })
                        .collect();
                    let want = o.sanitized_vertex_label(&g, &v);
                    let got = classify_in_cube(&s, c, &x, 1e-5).unwrap();
                    assert_eq!(got, want, "vertex {v:?} of cube {c:?}");
                    let mut done = true;
                    for k in (0..d).rev() {
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
            }
        }
    }

    #[test]
    fn classify_matches_oracle_away_from_surface() {
        // points at large oracle margin inside boundary cubes classify like
        // the oracle
        let g = grid(3, 6);
        let o = Oracle::new(OracleSpec::Sphere {
            center: vec![0.5; 3],
            radius: 0.33,
        })
        .unwrap();
        let s = build_store(&o, &g, Variant::Cube, BuildOptions::new(10)).unwrap();
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let eps = g.epsilon();
        let mut checked = 0;
        for _ in 0..100_000 {
            let x: Vec<f64> = (0..3).map(|_| rng.gen::<f64>()).collect();
            let r = norm_dist(&x, &[0.5, 0.5, 0.5]);
            if (r - 0.33).abs() < eps {
                continue; // too close to the surface for a sharp expectation
            }
            let c = cube_of_point(&g, &x).unwrap();
            if s.points(&c).is_none() {
                continue;
            }
            let got = classify_in_cube(&s, &c, &x, 1e-5).unwrap();
            assert_eq!(got, o.evaluate(&x), "x = {x:?}");
            checked += 1;
        }
        assert!(checked > 50, "only {checked} margin points sampled");
    }
}
