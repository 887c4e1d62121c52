//! Writes the final mesh as SVG and the final solution as legacy VTK for an
//! adaptive run on the outflow-layer problem.
//!
//! ```text
//! cargo run --release --example export_plots -- out_dir
//! ```

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::PathBuf;

use ultraweak::adapt::{adaptive_loop_with, AdaptConfig, CycleView};
use ultraweak::problems::example2;
use ultraweak::report::{mesh_svg, write_solution_vtk};

fn main() -> ultraweak::Result<()> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "plots".into()));
    fs::create_dir_all(&dir)?;
    let problem = example2(1e-2, 200)?;
    let mut mesh = problem.mesh()?;
    let config = AdaptConfig { max_cycles: 8, ..AdaptConfig::default() };
    let mut result = Ok(());
    adaptive_loop_with(&problem, &config, &mut mesh, &mut |view: &CycleView<'_>| {
        if !view.marked.is_empty() || result.is_err() {
            return;
        }
        // final cycle only
        result = (|| {
            fs::write(dir.join("mesh.svg"), mesh_svg(view.mesh, 800.0))?;
            let mut w = BufWriter::new(File::create(dir.join("solution.vtk"))?);
            write_solution_vtk(&mut w, view.mesh, view.solution, &view.estimate.indicators)
        })();
    })?;
    result?;
    println!("{} cells written to {}", mesh.num_active(), dir.display());
    Ok(())
}
