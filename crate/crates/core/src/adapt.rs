//! Solve, estimate, mark, refine.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{DpgError, Result};
use crate::forms::{NormVariant, TestNorm};
use crate::mesh::QuadMesh;
use crate::problems::ProblemSpec;
use crate::solver::{estimate, field_errors, solve, BlockedSolution, Discretization, Estimate};

/// Parameters of a refinement run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptConfig {
    /// Share of cells refined per cycle, in `(0, 1]`.
    pub fraction: f64,
    /// The loop stops once the free DOF count reaches this.
    pub dof_budget: usize,
    pub max_cycles: usize,
    pub discretization: Discretization,
    pub norm: NormVariant,
}

impl Default for AdaptConfig {
    fn default() -> Self {
        AdaptConfig {
            fraction: 0.10,
            dof_budget: 200_000,
            max_cycles: 30,
            discretization: Discretization::default(),
            norm: NormVariant::Proposed,
        }
    }
}

impl AdaptConfig {
    fn validate(&self) -> Result<()> {
        if !(self.fraction > 0.0 && self.fraction <= 1.0) {
            return Err(DpgError::invalid(format!("marking fraction {} outside (0, 1]", self.fraction)));
        }
        if self.max_cycles == 0 {
            return Err(DpgError::invalid("at least one cycle is required"));
        }
        Ok(())
    }
}

/// One row of a run history.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CycleRecord {
    pub cycle: usize,
    pub ncells: usize,
    pub ndof: usize,
    pub l2_u: f64,
    pub eps_l2_sigma: f64,
    pub eta: f64,
    /// `‖u - u_h‖ / (ε‖σ - σ_h‖)`.
    pub ratio_u_sigma: f64,
    /// `η / ‖u - u_h‖`.
    pub ratio_eta_u: f64,
    pub wall_ms: f64,
}

impl CycleRecord {
    pub fn is_finite(&self) -> bool {
        [self.l2_u, self.eps_l2_sigma, self.eta].iter().all(|v| v.is_finite())
    }
}

/// Records of a run plus the settings that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct RunHistory {
    pub problem: String,
    pub eps: f64,
    pub norm: NormVariant,
    pub degree: usize,
    pub records: Vec<CycleRecord>,
}

impl RunHistory {
    pub fn last(&self) -> Option<&CycleRecord> {
        self.records.last()
    }
}

/// What an observer sees at the end of each cycle.
pub struct CycleView<'a> {
    pub mesh: &'a QuadMesh,
    pub solution: &'a BlockedSolution,
    pub estimate: &'a Estimate,
    pub record: &'a CycleRecord,
    /// Cells about to be refined; empty on the final cycle.
    pub marked: &'a [usize],
}

/// The `⌈fraction·n⌉` cells with the largest indicator, ties to the smaller
/// id. Input pairs are `(cell id, η_K)`; output ids are ascending.
pub fn mark_top_fraction(indicators: &[(usize, f64)], fraction: f64) -> Result<Vec<usize>> {
    if indicators.is_empty() {
        return Err(DpgError::invalid("cannot mark on an empty mesh"));
    }
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(DpgError::invalid(format!("marking fraction {fraction} outside (0, 1]")));
    }
    if let Some(&(id, _)) = indicators.iter().find(|(_, e)| !e.is_finite()) {
        return Err(DpgError::invalid(format!("non-finite indicator on cell {id}")));
    }
    let n = indicators.len();
    let count = ((fraction * n as f64).ceil() as usize).clamp(1, n);
    let mut sorted = indicators.to_vec();
    sorted.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    let mut out: Vec<usize> = sorted[..count].iter().map(|&(id, _)| id).collect();
    out.sort_unstable();
    Ok(out)
}

enum Marking {
    Fraction(f64),
    All,
}

/// Estimator-driven refinement starting from the problem's initial mesh.
pub fn adaptive_loop(problem: &ProblemSpec, config: &AdaptConfig) -> Result<RunHistory> {
    let mut mesh = problem.mesh()?;
    run_loop(problem, config, &mut mesh, Marking::Fraction(config.fraction), &mut |_| {})
}

/// As [`adaptive_loop`] on a caller-supplied mesh, calling `observer` after
/// every cycle.
pub fn adaptive_loop_with(
    problem: &ProblemSpec,
    config: &AdaptConfig,
    mesh: &mut QuadMesh,
    observer: &mut dyn FnMut(&CycleView<'_>),
) -> Result<RunHistory> {
    run_loop(problem, config, mesh, Marking::Fraction(config.fraction), observer)
}

/// Uniform refinement starting from the problem's initial mesh.
pub fn uniform_loop(problem: &ProblemSpec, config: &AdaptConfig) -> Result<RunHistory> {
    let mut mesh = problem.mesh()?;
    run_loop(problem, config, &mut mesh, Marking::All, &mut |_| {})
}

/// As [`uniform_loop`] on a caller-supplied mesh.
pub fn uniform_loop_with(
    problem: &ProblemSpec,
    config: &AdaptConfig,
    mesh: &mut QuadMesh,
    observer: &mut dyn FnMut(&CycleView<'_>),
) -> Result<RunHistory> {
    run_loop(problem, config, mesh, Marking::All, observer)
}

fn run_loop(
    problem: &ProblemSpec,
    config: &AdaptConfig,
    mesh: &mut QuadMesh,
    marking: Marking,
    observer: &mut dyn FnMut(&CycleView<'_>),
) -> Result<RunHistory> {
    config.validate()?;
    let norm = TestNorm::new(config.norm, problem.eps)?;
    let mut history = RunHistory {
        problem: problem.name.clone(),
        eps: problem.eps,
        norm: config.norm,
        degree: config.discretization.degree,
        records: Vec::new(),
    };
    for cycle in 0..config.max_cycles {
        let start = Instant::now();
        let wrap = |e: DpgError| DpgError::Cycle { cycle, source: Box::new(e) };
        let solution = solve(mesh, problem, &norm, config.discretization).map_err(wrap)?;
        let est = estimate(mesh, &solution).map_err(wrap)?;
        let (l2_u, l2_s) = match field_errors(mesh, problem, &solution) {
            Ok(e) => (e.l2_u, e.l2_sigma),
            Err(DpgError::InvalidInput(_)) => (f64::NAN, f64::NAN),
            Err(e) => return Err(wrap(e)),
        };
        let eps_l2_sigma = problem.eps * l2_s;
        let mut record = CycleRecord {
            cycle,
            ncells: mesh.num_active(),
            ndof: solution.n_free(),
            l2_u,
            eps_l2_sigma,
            eta: est.total,
            ratio_u_sigma: l2_u / eps_l2_sigma,
            ratio_eta_u: est.total / l2_u,
            wall_ms: 0.0,
        };
        let last = record.ndof >= config.dof_budget || cycle + 1 == config.max_cycles;
        let marked = if last {
            Vec::new()
        } else {
            match marking {
                Marking::All => mesh.active_cells().to_vec(),
                Marking::Fraction(f) => {
                    let pairs: Vec<(usize, f64)> =
                        mesh.active_cells().iter().copied().zip(est.indicators.iter().copied()).collect();
                    mark_top_fraction(&pairs, f).map_err(wrap)?
                }
            }
        };
        record.wall_ms = start.elapsed().as_secs_f64() * 1e3;
        observer(&CycleView { mesh, solution: &solution, estimate: &est, record: &record, marked: &marked });
        history.records.push(record);
        if last {
            break;
        }
        mesh.refine(&marked).map_err(wrap)?;
    }
    Ok(history)
}
