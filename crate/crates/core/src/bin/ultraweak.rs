//! Command-line front end: `run`, `compare`, `probe`, `verify`.

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use ultraweak::adapt::{adaptive_loop_with, uniform_loop_with, CycleView};
use ultraweak::forms::NormVariant;
use ultraweak::normprobe::{probe_sweep, ProbeSetup};
use ultraweak::problems::verify_all;
use ultraweak::report::{
    compare_norms, mesh_svg, write_history, write_mesh_vtk, write_probe, write_solution_vtk, FileConfig, RunConfig,
};
use ultraweak::solver::Discretization;
use ultraweak::Result;

#[derive(Parser)]
#[command(name = "ultraweak", version, about = "Adaptive ultra-weak DPG for 2D convection-diffusion")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// One adaptive (or uniform) run; writes history.csv and per-cycle meshes.
    Run(RunArgs),
    /// Adaptive runs under two test norms, aligned by DOF count.
    Compare {
        #[command(flatten)]
        run: RunArgs,
        /// Test norm of the second run.
        #[arg(long, default_value = "qo")]
        against: String,
    },
    /// Discrete equivalence constants of the energy and field norms.
    Probe(ProbeArgs),
    /// Checks exact solutions against their forcing terms.
    Verify {
        #[arg(long, value_delimiter = ',', default_values_t = [1.0, 1e-1, 1e-2, 1e-3, 1e-4])]
        eps_list: Vec<f64>,
    },
}

#[derive(Args)]
struct RunArgs {
    /// ex1, ex2 or ex3.
    #[arg(long)]
    problem: Option<String>,
    #[arg(long)]
    eps: Option<f64>,
    /// Trial degree of the field variables.
    #[arg(long)]
    p: Option<usize>,
    /// Test enrichment.
    #[arg(long)]
    dp: Option<usize>,
    /// proposed, plain, md or qo.
    #[arg(long)]
    norm: Option<String>,
    #[arg(long)]
    budget: Option<usize>,
    #[arg(long)]
    fraction: Option<f64>,
    #[arg(long)]
    max_cycles: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Refine every cell instead of the marked fraction.
    #[arg(long)]
    uniform: bool,
    /// TOML file with the same keys; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Skip VTK and SVG output.
    #[arg(long)]
    no_plots: bool,
}

impl RunArgs {
    fn resolve(&self) -> Result<RunConfig> {
        let cli = FileConfig {
            problem: self.problem.clone(),
            eps: self.eps,
            p: self.p,
            dp: self.dp,
            norm: self.norm.clone(),
            budget: self.budget,
            fraction: self.fraction,
            max_cycles: self.max_cycles,
            out: self.out.clone(),
            uniform: self.uniform.then_some(true),
        };
        let file = self.config.as_deref().map(FileConfig::load).transpose()?;
        RunConfig::resolve(cli, file)
    }
}

#[derive(Args)]
struct ProbeArgs {
    #[arg(long, value_delimiter = ',', default_values_t = [1.0, 1e-2, 1e-4, 1e-6])]
    eps_list: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "proposed,plain,md,qo")]
    norm_list: Vec<String>,
    /// Cells per side.
    #[arg(long, default_value_t = 4)]
    mesh: usize,
    #[arg(long, default_value_t = 1)]
    p: usize,
    #[arg(long, default_value_t = ultraweak::solver::DEFAULT_ENRICHMENT)]
    dp: usize,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

fn main() -> ExitCode {
    match dispatch(Cli::parse().command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(command: Command) -> Result<ExitCode> {
    match command {
        Command::Run(args) => run(&args),
        Command::Compare { run, against } => compare(&run, &against),
        Command::Probe(args) => probe(&args),
        Command::Verify { eps_list } => verify(&eps_list),
    }
}

fn header() {
    println!(
        "{:>5} {:>7} {:>9} {:>11} {:>11} {:>11} {:>8}",
        "cycle", "cells", "dofs", "|u-u_h|", "eps|s-s_h|", "eta", "eta/u"
    );
}

fn run(args: &RunArgs) -> Result<ExitCode> {
    let cfg = args.resolve()?;
    fs::create_dir_all(&cfg.out)?;
    let problem = cfg.problem_spec()?;
    let mut mesh = problem.mesh()?;
    let mut io_error = None;
    let mut observer = |v: &CycleView<'_>| {
        let r = v.record;
        println!(
            "{:>5} {:>7} {:>9} {:>11.4e} {:>11.4e} {:>11.4e} {:>8.3}",
            r.cycle, r.ncells, r.ndof, r.l2_u, r.eps_l2_sigma, r.eta, r.ratio_eta_u
        );
        if !args.no_plots && io_error.is_none() {
            if let Err(e) = write_cycle(&cfg.out, v) {
                io_error = Some(e);
            }
        }
    };
    header();
    let history = if cfg.uniform {
        uniform_loop_with(&problem, &cfg.adapt_config(), &mut mesh, &mut observer)?
    } else {
        adaptive_loop_with(&problem, &cfg.adapt_config(), &mut mesh, &mut observer)?
    };
    if let Some(e) = io_error {
        return Err(e);
    }
    write_history(&cfg.out.join("history.csv"), &history)?;
    println!("wrote {}", cfg.out.join("history.csv").display());
    Ok(ExitCode::SUCCESS)
}

fn write_cycle(dir: &Path, v: &CycleView<'_>) -> Result<()> {
    let c = v.record.cycle;
    fs::write(dir.join(format!("mesh_{c}.svg")), mesh_svg(v.mesh, 800.0))?;
    write_mesh_vtk(&mut BufWriter::new(File::create(dir.join(format!("mesh_{c}.vtk")))?), v.mesh)?;
    let mut w = BufWriter::new(File::create(dir.join(format!("solution_{c}.vtk")))?);
    write_solution_vtk(&mut w, v.mesh, v.solution, &v.estimate.indicators)
}

fn compare(args: &RunArgs, against: &str) -> Result<ExitCode> {
    let cfg = args.resolve()?;
    let second: NormVariant = against.parse()?;
    let problem = cfg.problem_spec()?;
    let cmp = compare_norms(&problem, &cfg.adapt_config(), cfg.norm, second)?;
    println!("{:>9} {:>12} {:>9} {:>12}", format!("{} dofs", cfg.norm), "|u-u_h|", format!("{second} dofs"), "|u-u_h|");
    for (r, &k) in cmp.first.records.iter().zip(&cmp.aligned) {
        let s = &cmp.second.records[k];
        println!("{:>9} {:>12.4e} {:>9} {:>12.4e}", r.ndof, r.l2_u, s.ndof, s.l2_u);
    }
    println!("final error ratio {} / {}: {:.4}", cfg.norm, second, cmp.final_error_ratio);
    fs::create_dir_all(&cfg.out)?;
    write_history(&cfg.out.join(format!("history_{}.csv", cfg.norm)), &cmp.first)?;
    write_history(&cfg.out.join(format!("history_{second}.csv")), &cmp.second)?;
    Ok(ExitCode::SUCCESS)
}

fn probe(args: &ProbeArgs) -> Result<ExitCode> {
    let variants = args.norm_list.iter().map(|s| s.parse()).collect::<Result<Vec<NormVariant>>>()?;
    let setup = ProbeSetup { mesh: args.mesh, discretization: Discretization::new(args.p, args.dp), ..ProbeSetup::default() };
    let records = probe_sweep(&variants, &args.eps_list, &setup)?;
    println!("{:>15} {:>8} {:>12} {:>12} {:>12}", "norm", "eps", "lambda_min", "lambda_max", "ratio");
    for r in &records {
        println!("{:>15} {:>8.0e} {:>12.4e} {:>12.4e} {:>12.4e}", r.norm, r.eps, r.lambda_min, r.lambda_max, r.ratio);
    }
    fs::create_dir_all(&args.out)?;
    write_probe(&args.out.join("probe.csv"), &records)?;
    Ok(ExitCode::SUCCESS)
}

fn verify(eps_list: &[f64]) -> Result<ExitCode> {
    let records = verify_all(eps_list)?;
    let mut ok = true;
    for r in &records {
        let pass = r.passed();
        ok &= pass;
        println!(
            "{} {:<4} eps={:<7.0e} forcing {:.2e} (tol {:.0e}) gradient {:.2e}",
            if pass { "PASS" } else { "FAIL" },
            r.problem,
            r.eps,
            r.forcing_mismatch,
            r.tolerance,
            r.gradient_mismatch
        );
    }
    Ok(if ok { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}
