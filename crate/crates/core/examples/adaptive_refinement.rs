//! Estimator-driven refinement on one of the benchmark problems.
//!
//! ```text
//! cargo run --release --example adaptive_refinement -- ex1 1e-2 3 100000
//! ```
//!
//! Arguments: problem (`ex1`, `ex2`, `ex3`), ε, degree, DOF budget.

use ultraweak::adapt::{adaptive_loop, AdaptConfig};
use ultraweak::problems::ProblemSpec;
use ultraweak::solver::Discretization;

fn main() -> ultraweak::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let arg = |i: usize, default: &str| args.get(i).cloned().unwrap_or_else(|| default.to_string());
    let name = arg(0, "ex1");
    let eps: f64 = arg(1, "1e-2").parse().expect("ε must be a number");
    let degree: usize = arg(2, "2").parse().expect("degree must be an integer");
    let budget: usize = arg(3, "20000").parse().expect("budget must be an integer");

    let problem = ProblemSpec::by_name(&name, eps)?;
    let config = AdaptConfig {
        dof_budget: budget,
        discretization: Discretization { degree, ..Discretization::default() },
        ..AdaptConfig::default()
    };
    let history = adaptive_loop(&problem, &config)?;
    println!(
        "{:>5} {:>7} {:>8} {:>11} {:>11} {:>11} {:>8} {:>8} {:>8}",
        "cycle", "cells", "dofs", "|u-u_h|", "eps|s-s_h|", "eta", "u/sig", "eta/u", "ms"
    );
    for r in &history.records {
        println!(
            "{:>5} {:>7} {:>8} {:>11.3e} {:>11.3e} {:>11.3e} {:>8.3} {:>8.3} {:>8.0}",
            r.cycle, r.ncells, r.ndof, r.l2_u, r.eps_l2_sigma, r.eta, r.ratio_u_sigma, r.ratio_eta_u, r.wall_ms
        );
    }
    Ok(())
}
