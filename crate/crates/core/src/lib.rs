//! Local trajectory variation exponents (LTVE) over velocity fields.
//!
//! The crate advects particles seeded on a uniform mesh, compares each
//! particle's displacement trajectory against its lattice neighbours with a
//! trajectory metric, and turns the largest discrepancy into an exponent.
//! The classical finite-time Lyapunov exponent is provided as a baseline,
//! together with a report that checks the analytic LTVE/FTLE bound.
//!
//! All numerics are generic over [`Scalar`] (`f32` or `f64`); the aliases at
//! the crate root fix the common `f64` instantiation.

pub mod error;
pub mod fields;
pub mod ftle;
pub mod integrate;
pub mod ltve;
pub mod metrics;
pub mod scalar;

mod pool;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub use fields::{DomainBox, FieldDescriptor, TimeWindow, VelocityField};
pub use ftle::{BoundReport, DeformationTensor, FlowMapField};
pub use integrate::{
    BoundaryPolicy, DiscreteTrajectory, DisplacementTrajectory, IntegratorConfig, PointSequence,
    Points,
};
pub use ltve::{
    LtveConfig, LtveOutput, MeshSpec, NeighborhoodScheme, Quantity, ScalarField, SchemeOrder,
    Storage, TrajectorySet,
};
pub use metrics::{FrechetRule, Metric, MetricKind};

/// Double-precision domain box.
pub type DomainBox64 = DomainBox<f64>;
/// Double-precision time window.
pub type TimeWindow64 = TimeWindow<f64>;
/// Double-precision mesh.
pub type Mesh64 = MeshSpec<f64>;
/// Double-precision scalar field.
pub type ScalarField64 = ScalarField<f64>;
/// Single-precision scalar field.
pub type ScalarField32 = ScalarField<f32>;
/// Double-precision trajectory set.
pub type TrajectorySet64 = TrajectorySet<f64>;
/// Double-precision LTVE configuration.
pub type LtveConfig64 = LtveConfig<f64>;
/// Double-precision trajectory.
pub type Trajectory64 = DiscreteTrajectory<f64>;
/// Double-precision flow map.
pub type FlowMap64 = FlowMapField<f64>;
/// Double-precision bound report.
pub type BoundReport64 = BoundReport<f64>;
