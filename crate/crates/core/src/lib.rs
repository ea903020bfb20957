//! Finite-dimensional modular theory of standard subspaces.
//!
//! The crate is organised bottom-up:
//!
//! * [`hilbert`]: dense complex linear algebra on `ℂ^N` with the inner product
//!   conjugate-linear in the first slot, antilinear maps and their polar
//!   decomposition.
//! * [`subspace`]: standard subspaces, the Tomita operator and the derived
//!   modular data (`j`, `δ`, polariser `R`, `θ`, `γ`, spectral splits).
//! * [`graph`]: the graph scalar product of the Tomita operator, the real
//!   `†`-adjoint and Schatten norms in the graph structure.
//! * [`quasifree`]: symplectomorphisms between standard subspaces and the
//!   Hilbert–Schmidt criteria for quasi-free isomorphisms.
//! * [`kg`]: Galerkin models of the local one-particle subspaces of the free
//!   Klein–Gordon field and the mass-change experiments built on them.
//! * [`random`] and [`suite`]: seeded generators and the randomized invariant
//!   suite.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod graph;
pub mod hilbert;
pub mod kg;
pub mod quasifree;
pub mod random;
pub mod subspace;
pub mod suite;
pub mod tol;

pub use error::{Error, NotStandardReason, Result};
pub use hilbert::{AntilinearMap, ComplexSpace, LinearMap, C64};
pub use quasifree::{CriterionReport, Symplectomorphism};
pub use subspace::{ModularData, StandardSubspace};
