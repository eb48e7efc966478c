//! High-order flux-reconstruction solver for the 2D compressible Navier-Stokes
//! equations on unstructured quadrilateral meshes, with support for rotating
//! subdomains coupled through dynamic transfinite mortar elements on circular
//! sliding interfaces.
//!
//! The crate is organized around the stages of a simulation:
//!
//! * [`basis`] - Legendre point sets, Lagrange bases, derivative and
//!   correction operators shared by everything else.
//! * [`geometry`] - iso-parametric and transfinite element mappings, metric
//!   terms and grid velocities for moving elements.
//! * [`mesh`] - subdomain mesh ingestion, built-in generators for the
//!   verification cases, assembly and sliding-interface preprocessing.
//! * [`mortar`] - dynamic mortar connectivity and the L2 projections that
//!   exchange data across a sliding interface.
//! * [`physics`] - fluid model, conservative/primitive conversions and flux
//!   functions, including the moving-grid Rusanov solver.
//! * [`solver`] - the spatial residual: flux transform, correction,
//!   gradients, boundary conditions, force and conservation diagnostics.
//! * [`time`] - strong-stability-preserving Runge-Kutta integrators.
//! * [`exact`], [`norms`] - analytic solutions and error norms.
//! * [`config`], [`driver`], [`snapshot`], [`studies`], [`acceptance`] -
//!   run configuration, orchestration and the verification harness.

pub mod acceptance;
pub mod basis;
pub mod config;
pub mod driver;
pub mod error;
pub mod exact;
pub mod geometry;
pub mod mesh;
pub mod mortar;
pub mod norms;
pub mod physics;
pub mod snapshot;
pub mod solver;
pub mod studies;
pub mod time;

pub use error::SolverError;
