//! Galerkin models of the free Klein–Gordon field in `d = 1..=4`.
//!
//! * [`grid`]: symmetric momentum grids.
//! * [`basis`]: bump test functions supported in the unit ball.
//! * [`transform`]: their Fourier transforms and the disk cache.
//! * [`model`]: the subspaces `K_m`, the mass-change map and both assemblies
//!   of `Q†Q`.
//! * [`sweep`]: mass sweeps and refinement probes.
//! * [`kernel`]: quadrature of the continuum kernel bounds.

pub mod basis;
pub mod grid;
pub mod kernel;
pub mod model;
pub mod sweep;
pub mod transform;

pub use grid::{GridSpec, MomentumGrid};
pub use kernel::{kernel_bound, KernelBound, KernelBoundConfig};
pub use model::{
    build_kg_model, mass_change_map, model_from_transforms, projections_phi_pi, qdq_via_gram, qdq_via_projections,
    GalerkinModel, ModelSpec, SectorTransforms,
};
pub use sweep::{hs_sweep, one_dim_trace_probe, tomita_norm_probe, SweepCombo, SweepOutcome, SweepRecord};
pub use transform::TransformCache;
