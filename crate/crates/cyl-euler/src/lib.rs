//! Vanishing-viscosity approximation of cylindrically symmetric isentropic
//! compressible Euler flow with swirl, on an annulus that shrinks onto the
//! origin as the viscosity vanishes, together with a verification suite for
//! the invariant-region bounds, entropy dissipation, weak-form consistency,
//! decay rates, and viscosity-limit Cauchy behavior of the computed solutions.
//!
//! The library is the primary interface; see the `examples/` directory for
//! one runnable program per capability and `src/main.rs` for the thin
//! `run` / `study` / `verify` command-line wrapper.

pub mod bump;
pub mod cli;
pub mod config;
pub mod diagnostics;
pub mod error;
pub mod field;
pub mod grid;
pub mod initial;
pub mod params;
pub mod report;
pub mod solver;
pub mod stencil;
pub mod study;

pub use error::{Error, Result};
pub use field::{Invariants3, PhysicalField, ScaledField};
pub use grid::Grid;
pub use initial::InitialProfile;
pub use params::{derive_params, Params};
pub use solver::{SolverConfig, Trajectory};
