//! Example 3 has an interior layer of width `O(√ε)` along `x = 0`. An
//! observer reports, per cycle, the share of marked cells that meet the
//! strip `|x| ≤ √ε`.

use ultraweak::adapt::{adaptive_loop_with, AdaptConfig, CycleView};
use ultraweak::problems::example3;
use ultraweak::solver::Discretization;

fn main() -> ultraweak::Result<()> {
    let eps: f64 = 1e-2;
    let half = eps.sqrt();
    let problem = example3(eps)?;
    let mut mesh = problem.mesh()?;
    let config = AdaptConfig {
        max_cycles: 8,
        discretization: Discretization { degree: 3, ..Discretization::default() },
        ..AdaptConfig::default()
    };
    let mut observer = |view: &CycleView<'_>| {
        let inside = view
            .marked
            .iter()
            .filter(|&&c| {
                let r = view.mesh.cell_rect(c);
                r.x0 < half && r.x1 > -half
            })
            .count();
        println!(
            "cycle {:>2}: {:>5} cells, η = {:.3e}, {inside}/{} marked cells in the strip",
            view.record.cycle,
            view.record.ncells,
            view.record.eta,
            view.marked.len()
        );
    };
    adaptive_loop_with(&problem, &config, &mut mesh, &mut observer)?;
    Ok(())
}
