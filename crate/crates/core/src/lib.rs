//! Blocked, worker-parallel density-peaks clustering.
//!
//! Density peaks clustering ranks points by local density (rho), links every
//! point to its nearest denser neighbor (mu, delta), and reads cluster
//! centers off the potential gamma = rho * delta; labels then follow the
//! leading-node links. The textbook formulation materializes the full n x n
//! distance matrix, which caps it at small datasets.
//!
//! This crate computes the same vectors from transient wide distance blocks
//! (batch rows x all points) and per-point nearest-neighbor tables instead:
//! memory stays linear in n, batches spread over a coordinator/worker
//! runtime, and every intermediate vector and final label is bit-identical
//! to the quadratic reference for any worker count. The reference lives in
//! [`oracle`] and backs the equivalence test suite, [`metrics`] provides
//! NMI/ARI agreement scores, and [`datagen`] generates the spiral and blob
//! benchmarks used to exercise both paths.

pub mod assign;
pub mod datagen;
pub mod density;
pub mod distance;
pub mod error;
pub mod leading;
pub mod memory;
pub mod metrics;
pub mod model;
pub mod oracle;
pub mod parallel;

pub use error::{Error, Result};
pub use model::{
    outranks, ClusterCount, ClusterResult, DataMatrix, DcMode, DensityVector, DistanceBlock,
    Kernel, KnnTable, LeadingStructure, RunConfig, DEFAULT_SEED, ROOT,
};

pub use distance::{DistanceSource, PrecomputedMatrix};
pub use parallel::{plan_shards, run_pipeline, PipelineOutput, RunReport};
