//! Discrete equivalence constants between the energy norm and the ε-scaled
//! field norm for every test norm, on a fixed 4×4 mesh with `a = (1, 1)`.

use ultraweak::forms::NormVariant;
use ultraweak::normprobe::{probe_sweep, ProbeSetup};

fn main() -> ultraweak::Result<()> {
    let eps = [1.0, 1e-1, 1e-2, 1e-3];
    let records = probe_sweep(&NormVariant::ALL, &eps, &ProbeSetup::default())?;
    println!("{:>15} {:>8} {:>12} {:>12} {:>12}", "norm", "eps", "lambda_min", "lambda_max", "ratio");
    for r in &records {
        println!("{:>15} {:>8.0e} {:>12.4e} {:>12.4e} {:>12.4e}", r.norm, r.eps, r.lambda_min, r.lambda_max, r.ratio);
    }
    Ok(())
}
