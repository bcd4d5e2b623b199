//! Evaluation harness: seeded error measurement against the oracle, the
//! nearest-vertex baseline, log-log slope fits, and multi-configuration
//! scans with a deterministic CSV rendering.

use crate::classifier::Classifier;
use crate::enumerate::count_simplices;
use crate::error::{Error, Result};
use crate::geometry::{GridSpec, VertexId};
use crate::oracle::{random_radial, Label, Oracle, OracleSpec};
use crate::store::{build_store, BuildOptions, Variant};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::time::Instant;

/// Oracle selection for a scan. A fixed spec pins the dimension; the random
/// radial family generates sites per scanned dimension from the base seed.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OracleDef {
    Fixed { spec: OracleSpec },
    RandomRadial { n_sites: usize, sigma: f64 },
}

impl OracleDef {
    pub fn for_dim(&self, d: usize, seed: u64) -> Result<OracleSpec> {
        match self {
            OracleDef::Fixed { spec } => Ok(spec.clone()),
            OracleDef::RandomRadial { n_sites, sigma } => {
                random_radial(d, *n_sites, *sigma, seed)
            }
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvalConfig {
    pub oracle: OracleDef,
    pub dimensions: Vec<usize>,
    pub grid_sizes: Vec<usize>,
    pub variants: Vec<Variant>,
    /// fixed dichotomy depth; `None` uses `ceil(log2(n_G)) + 2`
    pub q: Option<u32>,
    pub samples_per_cube: u32,
    pub seed: u64,
    pub delta: f64,
    /// enumerate simplex counts per row (skippable: the kuhn count streams
    /// the whole complex)
    pub count: bool,
}

impl EvalConfig {
    pub fn validate(&self) -> Result<()> {
        if self.samples_per_cube < 1 {
            return Err(Error::Domain("samples_per_cube must be >= 1".into()));
        }
        if self.dimensions.is_empty() || self.grid_sizes.is_empty() || self.variants.is_empty() {
            return Err(Error::Domain("dimensions, grid sizes and variants must be nonempty".into()));
        }
        if self.grid_sizes.iter().any(|&n| n < 2) {
            return Err(Error::Domain("grid sizes must be >= 2".into()));
        }
        if !(self.delta > 0.0) {
            return Err(Error::Domain("delta must be positive".into()));
        }
        Ok(())
    }
}

pub fn auto_q(n_g: usize) -> u32 {
    (n_g as f64).log2().ceil() as u32 + 2
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorStats {
    pub samples: u64,
    pub zero_labels: u64,
    pub resistar_misclassified: u64,
    pub nearest_vertex_misclassified: u64,
    /// error among the sampled (boundary-cube) points
    pub resistar_error_pct: f64,
    pub nearest_vertex_error_pct: f64,
    /// total volume of the sampled cubes; points outside them always agree
    /// with the oracle, so sampling is confined there
    pub boundary_volume_fraction: f64,
    /// whole-domain error: the sampled rate scaled by the sampled volume
    pub resistar_domain_error_pct: f64,
    pub nearest_vertex_domain_error_pct: f64,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Generator for one sample, keyed by (seed, cube, sample index): the stream
/// does not depend on cube iteration order.
fn sample_rng(seed: u64, cube: &[u32], sample: u32) -> ChaCha8Rng {
    let mut k = splitmix64(seed);
    for &c in cube {
        k = splitmix64(k ^ c as u64);
    }
    k = splitmix64(k ^ sample as u64);
    ChaCha8Rng::seed_from_u64(k)
}

/// Label of the grid vertex nearest to `x`; ties go to the lexicographically
/// smallest vertex. `labels` supplies (and may memoize) vertex labels.
pub fn nearest_vertex_classify(
    g: &GridSpec,
    labels: &mut impl FnMut(&VertexId) -> Label,
    x: &[f64],
) -> Label {
    let eps = g.epsilon();
    let max = (g.n_g - 1) as i64;
    let v = VertexId(
        x.iter()
            .map(|&xi| {
                // round half down per axis = lexicographically smallest tie
                let idx = (xi / eps - 0.5).ceil() as i64;
                idx.clamp(0, max) as u32
            })
            .collect(),
    );
    labels(&v)
}

/// Sample every boundary cube of the classifier's store and score the
/// resistar and nearest-vertex labels against the oracle. Oracle zeros are
/// excluded from both denominators and reported.
pub fn measure_error(
    cl: &Classifier,
    oracle: &Oracle,
    samples_per_cube: u32,
    seed: u64,
) -> Result<ErrorStats> {
    let store = cl.store();
    let g = &store.grid;
    let mut memo: HashMap<VertexId, Label> = HashMap::new();
    let mut samples = 0u64;
    let mut zeros = 0u64;
    let mut bad_rs = 0u64;
    let mut bad_nv = 0u64;
    for c in store.cubes.keys() {
        let (lo, hi) = g.cube_bounds(c);
        for k in 0..samples_per_cube {
            let mut rng = sample_rng(seed, &c.0, k);
            let x: Vec<f64> = lo
                .iter()
                .zip(&hi)
                .map(|(&l, &h)| l + rng.gen::<f64>() * (h - l))
                .collect();
            samples += 1;
            let truth = oracle.evaluate(&x);
            if truth == Label::Zero {
                zeros += 1;
                continue;
            }
            if cl.classify(&x)? != truth {
                bad_rs += 1;
            }
            let nv = nearest_vertex_classify(
                g,
                &mut |v: &VertexId| {
                    *memo
                        .entry(v.clone())
                        .or_insert_with(|| oracle.sanitized_vertex_label(g, v))
                },
                &x,
            );
            if nv != truth {
                bad_nv += 1;
            }
        }
    }
    let denom = (samples - zeros) as f64;
    let pct = |n: u64| if denom > 0.0 { n as f64 / denom * 100.0 } else { 0.0 };
    let volume = store.cubes.len() as f64 * g.epsilon().powi(g.d as i32);
    Ok(ErrorStats {
        samples,
        zero_labels: zeros,
        resistar_misclassified: bad_rs,
        nearest_vertex_misclassified: bad_nv,
        resistar_error_pct: pct(bad_rs),
        nearest_vertex_error_pct: pct(bad_nv),
        boundary_volume_fraction: volume,
        resistar_domain_error_pct: pct(bad_rs) * volume,
        nearest_vertex_domain_error_pct: pct(bad_nv) * volume,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Ordinary least squares of `log10(value)` on `log10(n_G)`.
pub fn slope_fit(points: &[(f64, f64)]) -> Result<SlopeFit> {
    if points.len() < 3 {
        return Err(Error::Domain("slope fit needs at least 3 points".into()));
    }
    if points.iter().any(|&(x, y)| x <= 0.0 || y <= 0.0) {
        return Err(Error::Domain("slope fit needs positive values".into()));
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0.log10()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.log10()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx < 1e-30 {
        return Err(Error::Numeric("degenerate abscissae in slope fit".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| {
            let e = y - (intercept + slope * x);
            e * e
        })
        .sum();
    let ss_tot: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    let r_squared = if ss_tot < 1e-30 { 1.0 } else { 1.0 - ss_res / ss_tot };
    Ok(SlopeFit {
        slope,
        intercept,
        r_squared,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvalRow {
    pub d: usize,
    pub n_g: usize,
    pub variant: Variant,
    pub q: u32,
    pub boundary_cubes: u64,
    pub boundary_points: u64,
    pub simplices: Option<u64>,
    pub build_oracle_calls: u64,
    pub stats: ErrorStats,
    /// wall time of build + measurement; excluded from the CSV so identical
    /// configurations render identical bytes
    pub wall_seconds: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SeriesSlope {
    pub d: usize,
    pub variant: Variant,
    pub metric: String,
    pub fit: SlopeFit,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvalReport {
    pub rows: Vec<EvalRow>,
    pub slopes: Vec<SeriesSlope>,
}

impl EvalReport {
    /// Deterministic CSV: one row per measurement, then slope summaries as
    /// `#`-prefixed trailer lines.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "d,n_g,variant,q,boundary_cubes,boundary_points,simplices,build_oracle_calls,\
             samples,zero_labels,resistar_error_pct,nearest_vertex_error_pct,\
             resistar_domain_error_pct,nearest_vertex_domain_error_pct\n",
        );
        for r in &self.rows {
            let simplices = r.simplices.map(|n| n.to_string()).unwrap_or_default();
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{},{:.10e},{:.10e},{:.10e},{:.10e}\n",
                r.d,
                r.n_g,
                r.variant.as_str(),
                r.q,
                r.boundary_cubes,
                r.boundary_points,
                simplices,
                r.build_oracle_calls,
                r.stats.samples,
                r.stats.zero_labels,
                r.stats.resistar_error_pct,
                r.stats.nearest_vertex_error_pct,
                r.stats.resistar_domain_error_pct,
                r.stats.nearest_vertex_domain_error_pct,
            ));
        }
        for s in &self.slopes {
            out.push_str(&format!(
                "# slope,{},{},{},{:.10e},{:.10e}\n",
                s.d,
                s.variant.as_str(),
                s.metric,
                s.fit.slope,
                s.fit.r_squared,
            ));
        }
        out
    }

    pub fn slope(&self, d: usize, variant: Variant, metric: &str) -> Option<&SlopeFit> {
        self.slopes
            .iter()
            .find(|s| s.d == d && s.variant == variant && s.metric == metric)
            .map(|s| &s.fit)
    }
}

/// Run the full protocol: per (d, variant, n_G) build a store, measure
/// errors, optionally count simplices, then fit log-log slopes over the
/// grid-size series.
pub fn scan(cfg: &EvalConfig) -> Result<EvalReport> {
    cfg.validate()?;
    let mut rows = Vec::new();
    for &d in &cfg.dimensions {
        let spec = cfg.oracle.for_dim(d, cfg.seed)?;
        for &variant in &cfg.variants {
            for &n_g in &cfg.grid_sizes {
                let started = Instant::now();
                let g = GridSpec::new(d, n_g)?;
                let q = cfg.q.unwrap_or_else(|| auto_q(n_g));
                let oracle = Oracle::new(spec.clone())?;
                let store = build_store(&oracle, &g, variant, BuildOptions::new(q))?;
                let build_calls = oracle.call_count();
                let boundary_cubes = store.cubes.len() as u64;
                let boundary_points = store.per_cube_point_total();
                let simplices = if cfg.count {
                    Some(count_simplices(&store)?)
                } else {
                    None
                };
                let fallback = oracle.sanitized_at(&vec![0.5; d]);
                let cl = Classifier::new(store, cfg.delta, Some(fallback))?;
                let stats = measure_error(&cl, &oracle, cfg.samples_per_cube, cfg.seed)?;
                rows.push(EvalRow {
                    d,
                    n_g,
                    variant,
                    q,
                    boundary_cubes,
                    boundary_points,
                    simplices,
                    build_oracle_calls: build_calls,
                    stats,
                    wall_seconds: started.elapsed().as_secs_f64(),
                });
            }
        }
    }
    let mut slopes = Vec::new();
    for &d in &cfg.dimensions {
        for &variant in &cfg.variants {
            let series: Vec<&EvalRow> = rows
                .iter()
                .filter(|r| r.d == d && r.variant == variant)
                .collect();
            // the error slopes quoted in the literature are whole-domain
            // percentages, hence the domain-normalized metrics here
            let metrics: [(&str, Box<dyn Fn(&EvalRow) -> Option<f64>>); 3] = [
                (
                    "resistar_error",
                    Box::new(|r| Some(r.stats.resistar_domain_error_pct)),
                ),
                (
                    "nearest_vertex_error",
                    Box::new(|r| Some(r.stats.nearest_vertex_domain_error_pct)),
                ),
                ("simplices", Box::new(|r| r.simplices.map(|n| n as f64))),
            ];
            for (name, get) in metrics {
                let pts: Vec<(f64, f64)> = series
                    .iter()
                    .filter_map(|r| get(r).map(|v| (r.n_g as f64, v)))
                    .collect();
                if pts.len() >= 3 && pts.iter().all(|&(_, v)| v > 0.0) {
                    slopes.push(SeriesSlope {
                        d,
                        variant,
                        metric: name.to_string(),
                        fit: slope_fit(&pts)?,
                    });
                }
            }
        }
    }
    Ok(EvalReport { rows, slopes })
}
