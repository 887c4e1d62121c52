//! Convergence rates, file output, norm comparison and run configuration.

pub mod compare;
pub mod config;
pub mod csvio;
pub mod rates;
pub mod svg;
pub mod vtk;

pub use compare::{compare_norms, NormComparison};
pub use config::{FileConfig, RunConfig};
pub use csvio::{read_history, read_probe, write_history, write_probe};
pub use rates::{observed_rate, RateRow, RateTable};
pub use svg::mesh_svg;
pub use vtk::{write_mesh_vtk, write_solution_vtk};
