//! The labelling oracle: a pluggable function from `[0,1]^d` to {-1, 0, +1},
//! plus the built-in test oracles and the grid-vertex sanitization rule.

use crate::error::{Error, Result};
use crate::geometry::{GridSpec, VertexId};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::sync::atomic::{AtomicU64, Ordering};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Label {
    Minus,
    Zero,
    Plus,
}

impl Label {
    pub fn from_sign(v: f64) -> Label {
        if v > 0.0 {
            Label::Plus
        } else if v < 0.0 {
            Label::Minus
        } else {
            Label::Zero
        }
    }

    pub fn as_i8(self) -> i8 {
        match self {
            Label::Minus => -1,
            Label::Zero => 0,
            Label::Plus => 1,
        }
    }

    pub fn from_i8(v: i8) -> Result<Label> {
        match v {
            -1 => Ok(Label::Minus),
            0 => Ok(Label::Zero),
            1 => Ok(Label::Plus),
            _ => Err(Error::Format(format!("invalid label value {v}"))),
        }
    }

    pub fn negate(self) -> Label {
        match self {
            Label::Minus => Label::Plus,
            Label::Zero => Label::Zero,
            Label::Plus => Label::Minus,
        }
    }
}

/// Declarative oracle description; serializable so runs are reproducible.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OracleSpec {
    /// `sign(normal . x - offset)`.
    Hyperplane { normal: Vec<f64>, offset: f64 },
    /// `sign(|x - center| - radius)`: inside the sphere is -1.
    Sphere { center: Vec<f64>, radius: f64 },
    /// Radial-basis classification: sign of the difference between summed
    /// kernels around positive and negative sites, with
    /// `phi(u) = 100 / (1 + u^2)` applied to `|site - x| / sigma`.
    Radial {
        positive_sites: Vec<Vec<f64>>,
        negative_sites: Vec<Vec<f64>>,
        sigma: f64,
    },
    /// Precomputed labels on the vertices of a grid; points evaluate to the
    /// label of the nearest grid vertex.
    GridLabels { d: usize, n_g: usize, labels: Vec<i8> },
}

impl OracleSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            OracleSpec::Hyperplane { normal, .. } => {
                if normal.iter().all(|&v| v == 0.0) {
                    return Err(Error::Domain("hyperplane normal must be nonzero".into()));
                }
            }
            OracleSpec::Sphere { radius, .. } => {
                if *radius <= 0.0 {
                    return Err(Error::Domain("sphere radius must be positive".into()));
                }
            }
            OracleSpec::Radial {
                positive_sites,
                negative_sites,
                sigma,
            } => {
                if positive_sites.is_empty() || negative_sites.is_empty() {
                    return Err(Error::Domain("radial site lists must be nonempty".into()));
                }
                if *sigma <= 0.0 {
                    return Err(Error::Domain("radial sigma must be positive".into()));
                }
            }
            OracleSpec::GridLabels { d, n_g, labels } => {
                let expect = (*n_g as u64).pow(*d as u32) as usize;
                if labels.len() != expect {
                    return Err(Error::Domain(format!(
                        "grid_labels expects {expect} labels, got {}",
                        labels.len()
                    )));
                }
            }
        }
        Ok(())
    }

    /// Stable identifier of the oracle, recorded in stores it produced.
    pub fn digest(&self) -> String {
        let json = serde_json::to_string(self).expect("oracle spec serializes");
        let hash = Sha256::digest(json.as_bytes());
        let mut out = String::with_capacity(16);
        for b in &hash[..8] {
            out.push_str(&format!("{b:02x}"));
        }
        out
    }
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

fn phi(u: f64) -> f64 {
    100.0 / (1.0 + u * u)
}

/// An oracle spec paired with an evaluation counter. The counter is the cost
/// metric reported by the harness; it is atomic so concurrent queries are fine.
#[derive(Debug)]
pub struct Oracle {
    spec: OracleSpec,
    calls: AtomicU64,
}

impl Oracle {
    pub fn new(spec: OracleSpec) -> Result<Self> {
        spec.validate()?;
        Ok(Oracle {
            spec,
            calls: AtomicU64::new(0),
        })
    }

    pub fn spec(&self) -> &OracleSpec {
        &self.spec
    }

    pub fn call_count(&self) -> u64 {
        self.calls.load(Ordering::Relaxed)
    }

    pub fn reset_calls(&self) {
        self.calls.store(0, Ordering::Relaxed);
    }

    /// Raw oracle value at `x`. Exact zero maps to `Label::Zero`.
    pub fn evaluate(&self, x: &[f64]) -> Label {
        self.calls.fetch_add(1, Ordering::Relaxed);
        match &self.spec {
            OracleSpec::Hyperplane { normal, offset } => {
                let v: f64 = normal.iter().zip(x).map(|(&n, &xi)| n * xi).sum();
                Label::from_sign(v - offset)
            }
            OracleSpec::Sphere { center, radius } => Label::from_sign(dist(x, center) - radius),
            OracleSpec::Radial {
                positive_sites,
                negative_sites,
                sigma,
            } => {
                let pos: f64 = positive_sites.iter().map(|p| phi(dist(p, x) / sigma)).sum();
                let neg: f64 = negative_sites.iter().map(|n| phi(dist(n, x) / sigma)).sum();
                Label::from_sign(pos - neg)
            }
            OracleSpec::GridLabels { d, n_g, labels } => {
                debug_assert_eq!(x.len(), *d);
                let eps = 1.0 / (*n_g as f64 - 1.0);
                let mut flat = 0usize;
                for &xi in x {
                    let idx = ((xi / eps).round() as usize).min(n_g - 1);
                    flat = flat * n_g + idx;
                }
                Label::from_i8(labels[flat]).expect("validated labels")
            }
        }
    }

    /// Label at a grid vertex, never zero: an exact-zero oracle value is
    /// deterministically perturbed to +1.
    pub fn sanitized_vertex_label(&self, g: &GridSpec, v: &VertexId) -> Label {
        let x = g.vertex_coords(v);
        match self.evaluate(&x) {
            Label::Zero => Label::Plus,
            l => l,
        }
    }

    /// Sanitized label at an arbitrary point (0 -> +1), used during bisection.
    pub fn sanitized_at(&self, x: &[f64]) -> Label {
        match self.evaluate(x) {
            Label::Zero => Label::Plus,
            l => l,
        }
    }
}

/// Radial oracle with `n_sites` positive and negative sites drawn uniformly
/// from `[0,1]^d` by a seeded generator.
pub fn random_radial(d: usize, n_sites: usize, sigma: f64, seed: u64) -> Result<OracleSpec> {
    if n_sites < 1 {
        return Err(Error::Domain("n_sites must be >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draw = |rng: &mut ChaCha8Rng| -> Vec<Vec<f64>> {
        (0..n_sites)
            .map(|_| (0..d).map(|_| rng.gen::<f64>()).collect())
            .collect()
    };
    let spec = OracleSpec::Radial {
        positive_sites: draw(&mut rng),
        negative_sites: draw(&mut rng),
        sigma,
    };
    spec.validate()?;
    Ok(spec)
}
