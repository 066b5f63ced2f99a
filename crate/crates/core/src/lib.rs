//! Multiresolution lattice Boltzmann schemes on one-dimensional meshes
//! containing a resolution jump.
//!
//! The crate is organised bottom-up:
//!
//! - [`scheme`]: moment-space collision algebra and the D1Q3 wave scheme,
//! - [`mesh`]: dyadic cell geometry, per-level leaf ranges and ghost bands,
//! - [`multiresolution`]: prediction, projection, transport weights,
//!   ghost filling and reconstruction on the finest grid,
//! - [`solver`]: the collide / ghost-update / stream time loop,
//! - [`exact`]: the Gaussian pulse and its d'Alembert solution,
//! - [`metrics`]: normalized L1 errors and convergence rates,
//! - [`experiment`]: sweeps over `(l_max, l_jump)`, CSV and profile output.

pub mod error;
pub mod exact;
pub mod experiment;
pub mod mesh;
pub mod metrics;
pub mod multiresolution;
pub mod scheme;
pub mod solver;

pub use error::{Error, Result};
pub use exact::WaveProblem;
pub use mesh::{MeshConfig, MultiLevelGrid};
pub use metrics::ErrorReport;
pub use multiresolution::TransportWeights;
pub use scheme::SchemeSpec;
pub use solver::FieldState;
