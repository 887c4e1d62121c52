//! Uniform refinement on the smooth Example 1 problem and the observed
//! L² convergence rates of `u` for `p = 1, 2`.

use ultraweak::adapt::{uniform_loop, AdaptConfig};
use ultraweak::problems::example1;
use ultraweak::report::RateTable;
use ultraweak::solver::Discretization;

fn main() -> ultraweak::Result<()> {
    let problem = example1(1.0)?;
    for p in [1, 2] {
        let config = AdaptConfig {
            max_cycles: 5,
            discretization: Discretization { degree: p, ..Discretization::default() },
            ..AdaptConfig::default()
        };
        let history = uniform_loop(&problem, &config)?;
        println!("p = {p}");
        println!("{:>7} {:>8} {:>12} {:>6}", "cells", "dofs", "|u - u_h|", "rate");
        let rates = RateTable::by_cells(&history);
        for (i, r) in history.records.iter().enumerate() {
            let rate = i
                .checked_sub(1)
                .and_then(|k| rates.rows[k].rate)
                .map_or("-".to_string(), |x| format!("{x:.2}"));
            println!("{:>7} {:>8} {:>12.4e} {:>6}", r.ncells, r.ndof, r.l2_u, rate);
        }
    }
    Ok(())
}
