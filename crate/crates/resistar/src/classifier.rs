//! Whole-grid classification. Points in boundary cubes are classified in
//! place; points elsewhere are walked along the segment towards a fixed
//! reference boundary cube until the segment first enters one, and the entry
//! point is classified there. The segment crosses no boundary cube before
//! that, so no surface sheet separates the query point from the entry point.

use crate::classify_cube::classify_in_cube;
use crate::classify_kuhn::{classify_in_simplex, simplex_boundary_points};
use crate::error::{Error, Result};
use crate::geometry::{cube_of_point, kuhn_simplex_of_point, CubeId, GridSpec};
use crate::oracle::Label;
use crate::store::{BoundaryStore, Variant};

/// All cubes whose closed body contains `x`: more than one when `x` sits on a
/// grid plane. Ordered lexicographically by cube index.
pub fn cubes_containing_point(g: &GridSpec, x: &[f64]) -> Result<Vec<CubeId>> {
    if !g.contains_point(x) {
        return Err(Error::Domain(format!("point {x:?} outside [0,1]^d")));
    }
    let eps = g.epsilon();
    let max_idx = (g.cubes_per_axis() - 1) as i64;
    let mut per_axis: Vec<Vec<u32>> = Vec::with_capacity(g.d);
    for &xi in x {
        let s = xi / eps;
        let mut idxs = Vec::with_capacity(2);
        if (s - s.round()).abs() < 1e-12 {
            let r = s.round() as i64;
            for cand in [r - 1, r] {
                if (0..=max_idx).contains(&cand) {
                    idxs.push(cand as u32);
                }
            }
        } else {
            idxs.push((s.floor() as i64).clamp(0, max_idx) as u32);
        }
        per_axis.push(idxs);
    }
    let mut out = vec![Vec::new()];
    for axis in &per_axis {
        let mut next = Vec::with_capacity(out.len() * axis.len());
        for prefix in &out {
            for &i in axis {
                let mut c = prefix.clone();
                c.push(i);
                next.push(c);
            }
        }
        out = next;
    }
    Ok(out.into_iter().map(CubeId).collect())
}

/// Cubes touched by the closed segment from `a` to `b`, in order of first
/// contact, each with the parameter of that contact. Grazing contacts along
/// grid planes and through grid vertices include every touched cube.
pub fn segment_cubes(g: &GridSpec, a: &[f64], b: &[f64]) -> Result<Vec<(CubeId, f64)>> {
    let eps = g.epsilon();
    let mut ts = vec![0.0, 1.0];
    for k in 0..g.d {
        let dir = b[k] - a[k];
        if dir.abs() < 1e-15 {
            continue;
        }
        let planes = g.cubes_per_axis(); // interior planes 1..n_g-1, plus walls
        for p in 0..=planes {
            let t = (p as f64 * eps - a[k]) / dir;
            if t > 1e-15 && t < 1.0 - 1e-15 {
                ts.push(t);
            }
        }
    }
    ts.sort_by(|x, y| x.partial_cmp(y).unwrap());
    ts.dedup_by(|x, y| (*x - *y).abs() < 1e-13);

    let point_at = |t: f64| -> Vec<f64> {
        a.iter()
            .zip(b)
            .map(|(&pa, &pb)| (pa + t * (pb - pa)).clamp(0.0, 1.0))
            .collect()
    };
    let mut out: Vec<(CubeId, f64)> = Vec::new();
    let push = |cubes: Vec<CubeId>, t: f64, out: &mut Vec<(CubeId, f64)>| {
        for c in cubes {
            if !out.iter().any(|(seen, _)| *seen == c) {
                out.push((c, t));
            }
        }
    };
    for i in 0..ts.len() {
        push(cubes_containing_point(g, &point_at(ts[i]))?, ts[i], &mut out);
        if i + 1 < ts.len() {
            let mid = 0.5 * (ts[i] + ts[i + 1]);
            push(cubes_containing_point(g, &point_at(mid))?, ts[i], &mut out);
        }
    }
    Ok(out)
}

/// Classifier over a boundary store. `fallback` is the label reported for
/// every point when the store is empty (the oracle never changed sign on the
/// grid); an empty store without a fallback is rejected at query time.
pub struct Classifier {
    store: BoundaryStore,
    delta: f64,
    fallback: Option<Label>,
    /// centre of the lexicographically smallest boundary cube
    m: Option<Vec<f64>>,
}

impl Classifier {
    pub fn new(store: BoundaryStore, delta: f64, fallback: Option<Label>) -> Result<Self> {
        if !(delta > 0.0) {
            return Err(Error::Contract("delta must be positive".into()));
        }
        let m = store
            .cubes
            .keys()
            .next()
            .map(|c| store.grid.cube_centre(c));
        Ok(Classifier {
            store,
            delta,
            fallback,
            m,
        })
    }

    pub fn store(&self) -> &BoundaryStore {
        &self.store
    }

    pub fn classify(&self, x: &[f64]) -> Result<Label> {
        let g = &self.store.grid;
        if x.len() != g.d || !g.contains_point(x) {
            return Err(Error::Domain(format!("point {x:?} outside [0,1]^d")));
        }
        let Some(m) = &self.m else {
            return self.fallback.ok_or_else(|| {
                Error::Contract("store is empty and no fallback label was given".into())
            });
        };
        let c = cube_of_point(g, x)?;
        if self.store.points(&c).is_some() {
            return self.classify_in_boundary_cube(&c, x);
        }
        for (cube, t) in segment_cubes(g, x, m)? {
            if self.store.points(&cube).is_none() {
                continue;
            }
            // entry point of the segment into the first boundary cube
            let (lo, hi) = g.cube_bounds(&cube);
            let entry: Vec<f64> = x
                .iter()
                .zip(m)
                .zip(lo.iter().zip(&hi))
                .map(|((&xa, &xm), (&l, &h))| (xa + t * (xm - xa)).clamp(l, h))
                .collect();
            return self.classify_in_boundary_cube(&cube, &entry);
        }
        Err(Error::Corrupt(
            "segment to reference cube met no boundary cube".into(),
        ))
    }

    fn classify_in_boundary_cube(&self, c: &CubeId, x: &[f64]) -> Result<Label> {
        let g = &self.store.grid;
        match self.store.variant {
            Variant::Cube => classify_in_cube(&self.store, c, x, self.delta),
            Variant::Kuhn => {
                let r = kuhn_simplex_of_point(g, c, x)?;
                if simplex_boundary_points(&self.store, &r)?.is_empty() {
                    // single-signed simplex: its chain contains the cube's
                    // minimum corner, whose label some boundary point records
                    let mv = c.min_vertex();
                    for p in self.store.points(c).expect("boundary cube") {
                        if p.v_minus == mv {
                            return Ok(Label::Minus);
                        }
                        if p.v_plus == mv {
                            return Ok(Label::Plus);
                        }
                    }
                    Err(Error::Corrupt(
                        "minimum corner of a boundary cube has no boundary point".into(),
                    ))
                } else {
                    classify_in_simplex(&self.store, &r, x, self.delta)
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{Oracle, OracleSpec};
    use crate::store::{build_store, BuildOptions};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn grid(d: usize, n_g: usize) -> GridSpec {
        GridSpec::new(d, n_g).unwrap()
    }

    #[test]
    fn segment_along_bottom_row() {
        let g = grid(2, 3);
        let cubes: Vec<CubeId> = segment_cubes(&g, &[0.0, 0.0], &[1.0, 0.0])
            .unwrap()
            .into_iter()
            .map(|(c, _)| c)
            .collect();
        assert_eq!(cubes, vec![CubeId(vec![0, 0]), CubeId(vec![1, 0])]);
    }

    #[test]
    fn segment_degenerate_point() {
        let g = grid(2, 3);
        let cubes = segment_cubes(&g, &[0.25, 0.25], &[0.25, 0.25]).unwrap();
        assert_eq!(cubes, vec![(CubeId(vec![0, 0]), 0.0)]);
    }

    #[test]
    fn segment_through_grid_vertex_touches_corner_cubes() {
        let g = grid(2, 3);
        let cubes: Vec<CubeId> = segment_cubes(&g, &[0.0, 0.0], &[1.0, 1.0])
            .unwrap()
            .into_iter()
            .map(|(c, _)| c)
            .collect();
        assert_eq!(cubes[0], CubeId(vec![0, 0]));
        assert!(cubes.contains(&CubeId(vec![0, 1])));
        assert!(cubes.contains(&CubeId(vec![1, 0])));
        assert_eq!(cubes.last(), Some(&CubeId(vec![1, 1])));
        assert_eq!(cubes.len(), 4);
    }

    #[test]
    fn point_on_plane_yields_both_cubes() {
        let g = grid(2, 3);
        let cubes = cubes_containing_point(&g, &[0.5, 0.25]).unwrap();
        assert_eq!(cubes, vec![CubeId(vec![0, 0]), CubeId(vec![1, 0])]);
    }

    #[test]
    fn empty_store_uses_fallback() {
        let g = grid(2, 4);
        let o = Oracle::new(OracleSpec::Hyperplane {
            normal: vec![1.0, 0.0],
            offset: -1.0, // everything is +1
        })
        .unwrap();
        let s = build_store(&o, &g, Variant::Cube, BuildOptions::new(4)).unwrap();
        assert!(s.is_empty());
        let cl = Classifier::new(s, 1e-5, Some(Label::Plus)).unwrap();
        assert_eq!(cl.classify(&[0.3, 0.7]).unwrap(), Label::Plus);

        let o2 = Oracle::new(OracleSpec::Hyperplane {
            normal: vec![1.0, 0.0],
            offset: -1.0,
        })
        .unwrap();
        let s2 = build_store(&o2, &g, Variant::Cube, BuildOptions::new(4)).unwrap();
        let cl2 = Classifier::new(s2, 1e-5, None).unwrap();
        assert!(matches!(cl2.classify(&[0.3, 0.7]), Err(Error::Contract(_))));
    }

    #[test]
    fn full_grid_matches_oracle_both_variants() {
        for variant in [Variant::Cube, Variant::Kuhn] {
            for (d, n_g) in [(2usize, 5usize), (3, 4)] {
                let g = grid(d, n_g);
                let o = Oracle::new(OracleSpec::Sphere {
                    center: vec![0.5; d],
                    radius: 0.3,
                })
                .unwrap();
                let s = build_store(&o, &g, variant, BuildOptions::new(10)).unwrap();
                let cl = Classifier::new(s, 1e-5, None).unwrap();
                let mut rng = ChaCha8Rng::seed_from_u64(5);
                let eps = g.epsilon();
                let mut checked = 0;
                for _ in 0..10_000 {
                    let x: Vec<f64> = (0..d).map(|_| rng.gen::<f64>()).collect();
                    let r = crate::classify_cube::norm_dist(&x, &vec![0.5; d]);
                    if (r - 0.3).abs() < eps {
                        continue;
                    }
                    assert_eq!(
                        cl.classify(&x).unwrap(),
                        o.evaluate(&x),
                        "{variant:?} d={d} x={x:?}"
                    );
                    checked += 1;
                }
                assert!(checked > 500, "only {checked} margin points sampled");
            }
        }
    }

    #[test]
    fn classify_on_grid_planes_and_corners() {
        // exercise walks that start exactly on cube boundaries
        let g = grid(2, 5);
        let o = Oracle::new(OracleSpec::Sphere {
            center: vec![0.5, 0.5],
            radius: 0.3,
        })
        .unwrap();
        let s = build_store(&o, &g, Variant::Cube, BuildOptions::new(10)).unwrap();
        let cl = Classifier::new(s, 1e-5, None).unwrap();
        assert_eq!(cl.classify(&[0.0, 0.0]).unwrap(), Label::Plus);
        assert_eq!(cl.classify(&[1.0, 1.0]).unwrap(), Label::Plus);
        assert_eq!(cl.classify(&[0.5, 0.5]).unwrap(), Label::Minus);
        assert_eq!(cl.classify(&[0.25, 0.0]).unwrap(), Label::Plus);
    }
}
