//! A user-defined problem: rotating convection and a smooth bump, with the
//! forcing generated from the exact solution and then checked against a
//! finite-difference residual before solving.

use std::f64::consts::PI;
use std::sync::Arc;

use ultraweak::adapt::{adaptive_loop, AdaptConfig};
use ultraweak::mesh::Rect;
use ultraweak::problems::{interior_samples, verify_forcing, Manufactured};
use ultraweak::solver::Discretization;

fn main() -> ultraweak::Result<()> {
    let eps = 0.05;
    let problem = Manufactured {
        domain: Rect::unit(),
        eps,
        convection: Arc::new(|[x, y]| [-(y - 0.5), x - 0.5]),
        convection_divergence: Arc::new(|_| 0.0),
        u: Arc::new(|[x, y]| (PI * x).sin() * (PI * y).sin()),
        gradient: Arc::new(|[x, y]| [PI * (PI * x).cos() * (PI * y).sin(), PI * (PI * x).sin() * (PI * y).cos()]),
        laplacian: Arc::new(|[x, y]| -2.0 * PI * PI * (PI * x).sin() * (PI * y).sin()),
    }
    .build("bump")?;

    let mismatch = verify_forcing(&problem, &interior_samples(&problem.domain, 6))?;
    println!("forcing vs finite differences: {mismatch:.2e}");

    let config = AdaptConfig {
        dof_budget: 20_000,
        discretization: Discretization { degree: 2, ..Discretization::default() },
        ..AdaptConfig::default()
    };
    for r in &adaptive_loop(&problem, &config)?.records {
        println!("{:>3} {:>6} dofs  |u-u_h| = {:.3e}  η = {:.3e}", r.cycle, r.ndof, r.l2_u, r.eta);
    }
    Ok(())
}
