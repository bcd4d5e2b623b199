//! Simplex-star ("resistar") approximation of a `(d-1)`-dimensional manifold
//! separating `[0,1]^d` into two labelled parts, using only a point-labelling
//! oracle.
//!
//! The approximation is built from boundary points bracketed by dichotomy on
//! the edges of a regular grid, either on cube edges (`cube` variant) or on
//! the edges of the Kuhn simplices of each cube (`kuhn` variant). A point
//! anywhere in `[0,1]^d` is classified against the approximation in at most
//! `d` ray projections, without ever enumerating the simplices.
//!
//! Module map:
//! - [`geometry`]: grid indexing, cube face lattice, Kuhn simplex combinatorics
//! - [`oracle`]: labelling oracles and vertex-label sanitization
//! - [`store`]: boundary point computation and the persisted sparse store
//! - [`classify_cube`] / [`classify_kuhn`]: in-cube and in-simplex classification
//! - [`classifier`]: whole-domain classification by segment walking
//! - [`enumerate`]: explicit simplex enumeration, counting, watertightness
//! - [`slicer`]: intersection with `d-3` hyperplanes and mesh export
//! - [`eval`]: error measurement, baselines, slope fits, scan harness

pub mod classifier;
pub mod classify_cube;
pub mod classify_kuhn;
pub mod enumerate;
pub mod error;
pub mod eval;
pub mod geometry;
pub mod oracle;
pub mod slicer;
pub mod store;

pub use classifier::{segment_cubes, Classifier};
pub use classify_cube::classify_in_cube;
pub use classify_kuhn::classify_in_simplex;
pub use enumerate::{count_simplices, for_each_simplex, watertightness, WatertightReport};
pub use error::{Error, Result};
pub use eval::{auto_q, measure_error, scan, slope_fit, EvalConfig, EvalReport, OracleDef};
pub use geometry::{CubeId, FaceCode, GridSpec, KuhnSimplexRef, SimplexFace, VertexId};
pub use oracle::{random_radial, Label, Oracle, OracleSpec};
pub use slicer::{export_json, export_obj, slice, Hyperplane, SlicedMesh};
pub use store::{build_store, BoundaryPoint, BoundaryStore, BuildOptions, Variant};

/// Default guard distance below which classification returns 0 instead of
/// projecting through a near-degenerate ray.
pub const DEFAULT_DELTA: f64 = 1e-5;
