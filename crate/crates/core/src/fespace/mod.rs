//! Reference bases, degree-of-freedom maps and constraints for the trial
//! spaces `S^p × S^p × Q^{p+1} × R^{p+1}` and the broken enriched test space.
//!
//! All bases are nodal on Gauss-Lobatto points. Field and test spaces are
//! fully broken (per-cell DOFs). `û` is continuous on the skeleton: on a
//! coarse side with a hanging vertex the coarse polynomial is the master and
//! the fine sub-edge nodes are constrained to it. `σ̂ₙ` lives independently on
//! every edge of the finest skeleton partition.

mod basis;
mod constraints;
mod dofmap;

pub use basis::{Lagrange1d, Tabulation, TensorBasis};
pub use constraints::{apply_constraints, ConstraintMap, Expansion};
pub use dofmap::{Block, Constraint, DofMap, SpaceKind, TrialSpaces};
