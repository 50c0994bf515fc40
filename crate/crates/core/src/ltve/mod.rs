//! LTV and LTVE fields over uniform meshes.
//!
//! Every mesh point is advected, its trajectory shifted to start at the
//! origin, and compared against the trajectories of its lattice neighbours.
//! The largest discrepancy `ltv` becomes the exponent `ln(ltv / delta) / |T|`.

mod cache;
mod compute;
mod field;
mod mesh;
mod scheme;
mod streaming;

pub use cache::{trajectory_cache, TrajectorySet};
pub use compute::{
    compute_field, compute_field_from_set, integrate_mesh, ltv_at, ltve_from_ltv, LtveConfig,
    LtveOutput, Storage, StreamStats, NO_ARGMAX,
};
pub use field::{FieldMeta, Quantity, ScalarField};
pub use mesh::MeshSpec;
pub use scheme::{NeighborhoodScheme, SchemeOrder};
pub use streaming::compute_field_streaming;
