//! Adaptive discontinuous Petrov-Galerkin solver for the stationary
//! convection-diffusion equation
//!
//! ```text
//!     div(a u - eps grad u) = f   in Ω,
//!     u = g                       on Γ_D,
//!     (a u - eps grad u)·n = 0    on Γ_N,
//! ```
//!
//! discretised in ultra-weak form on axis-aligned, 1-irregular quadrilateral
//! meshes. The unknowns are the field pair `(u, σ = grad u)` and the skeleton
//! traces `(û, σ̂ₙ)`. Optimal test functions are computed element by element
//! from a broken, polynomially enriched test space and one of several
//! localizable test inner products ([`forms::NormVariant`]). The element
//! residual representatives drive adaptive refinement.
//!
//! The crate is organised bottom-up:
//!
//! * [`mesh`] – hierarchical quadrilateral mesh, refinement closure, skeleton.
//! * [`quadrature`], [`fespace`] – reference bases, DOF maps, constraints.
//! * [`forms`] – element Gram, ultra-weak and load matrices.
//! * [`solver`] – element condensation, global SPD solve, error estimator.
//! * [`problems`] – benchmark problems with exact solutions.
//! * [`adapt`] – marking and the adaptive / uniform refinement loops.
//! * [`normprobe`] – discrete norm-equivalence constants.
//! * [`report`] – rates, CSV / VTK / SVG output, norm comparison, run config.

pub mod adapt;
pub mod error;
pub mod fespace;
pub mod forms;
pub mod mesh;
pub mod normprobe;
pub mod problems;
pub mod quadrature;
pub mod report;
pub mod solver;
pub mod sparse;

pub use error::{DpgError, Result};

/// A point in the physical plane.
pub type Point = [f64; 2];
