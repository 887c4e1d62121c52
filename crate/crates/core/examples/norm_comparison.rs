//! Adaptive runs of Example 2 under the proposed and the mesh-dependent
//! test norms, each driven by its own estimator.

use ultraweak::adapt::AdaptConfig;
use ultraweak::forms::NormVariant;
use ultraweak::problems::example2;
use ultraweak::report::compare_norms;
use ultraweak::solver::Discretization;

fn main() -> ultraweak::Result<()> {
    let problem = example2(1e-2, ultraweak::problems::DEFAULT_TERMS)?;
    let config = AdaptConfig {
        dof_budget: 50_000,
        discretization: Discretization { degree: 2, ..Discretization::default() },
        ..AdaptConfig::default()
    };
    let cmp = compare_norms(&problem, &config, NormVariant::Proposed, NormVariant::MeshDependent)?;
    println!("{:>8} {:>12} {:>8} {:>12}", "dofs", "proposed", "dofs", "md");
    for (r, &k) in cmp.first.records.iter().zip(&cmp.aligned) {
        let s = &cmp.second.records[k];
        println!("{:>8} {:>12.4e} {:>8} {:>12.4e}", r.ndof, r.l2_u, s.ndof, s.l2_u);
    }
    println!("final error ratio proposed/md = {:.3}", cmp.final_error_ratio);
    Ok(())
}
