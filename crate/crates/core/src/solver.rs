//! Element condensation `S_K = BᵀG⁻¹B`, global assembly and solve, and the
//! residual-representative estimator `η_K² = rᵀG⁻¹r`.
//!
//! With `G = LLᵀ` every element keeps the whitened pair `W = L⁻¹B`,
//! `z = L⁻¹l`. Then `S_K = WᵀW`, `f_K = Wᵀz` and `η_K = ‖z - W x_K‖`, so the
//! estimator needs no second factorization and no subtraction of large
//! quadratic forms.

use std::sync::Arc;

use faer::linalg::triangular_solve::solve_lower_triangular_in_place;
use faer::{Mat, Par, Side};
use rayon::prelude::*;

use crate::error::{DpgError, Result};
use crate::fespace::{apply_constraints, Block, ConstraintMap, TensorBasis, TrialSpaces};
use crate::forms::{element_system, ElementKernel, ElementSystem, TestNorm};
use crate::mesh::QuadMesh;
use crate::problems::ProblemSpec;
use crate::quadrature::TensorGauss;
use crate::sparse::{relative_residual, CsrMatrix};

/// Default test enrichment. With traces of degree `p + 1` the enriched test
/// degree must be at least `p + 3`: at `p + 2` the boundary traces of the
/// test space cannot see one flux mode per cell and the normal equations
/// acquire a checkerboard kernel in `σ̂ₙ`.
pub const DEFAULT_ENRICHMENT: usize = 3;

/// Polynomial degrees of a discretization.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Discretization {
    /// Field degree `p`.
    pub degree: usize,
    /// Test enrichment `Δp`.
    pub enrichment: usize,
}

impl Discretization {
    pub fn new(degree: usize, enrichment: usize) -> Self {
        Discretization { degree, enrichment }
    }
}

impl Default for Discretization {
    fn default() -> Self {
        Discretization { degree: 1, enrichment: DEFAULT_ENRICHMENT }
    }
}

/// Whitened element data.
#[derive(Debug, Clone)]
pub struct CondensedElement {
    pub cell: usize,
    /// `S_K = BᵀG⁻¹B`.
    pub stiffness: Mat<f64>,
    /// `f_K = BᵀG⁻¹l`.
    pub rhs: Vec<f64>,
    /// `W = L⁻¹B`.
    pub whitened_b: Mat<f64>,
    /// `z = L⁻¹l`.
    pub whitened_load: Vec<f64>,
    pub trial_dofs: Vec<usize>,
}

/// Condenses one element through a Cholesky factorization of its Gram
/// matrix.
pub fn condense_element(es: &ElementSystem) -> Result<CondensedElement> {
    let llt = es
        .gram
        .llt(Side::Lower)
        .map_err(|_| DpgError::NormNotPositiveDefinite { cell: es.cell })?;
    let l = llt.L();
    let mut w = es.b.clone();
    solve_lower_triangular_in_place(l, w.as_mut(), Par::Seq);
    let mut z = Mat::<f64>::from_fn(es.load.len(), 1, |i, _| es.load[i]);
    solve_lower_triangular_in_place(l, z.as_mut(), Par::Seq);
    let mut s = w.transpose() * &w;
    let n = s.nrows();
    for i in 0..n {
        for j in 0..i {
            let v = 0.5 * (s[(i, j)] + s[(j, i)]);
            s[(i, j)] = v;
            s[(j, i)] = v;
        }
    }
    let f = w.transpose() * &z;
    let whitened_load: Vec<f64> = (0..z.nrows()).map(|i| z[(i, 0)]).collect();
    if s.col_iter().any(|c| c.iter().any(|v| !v.is_finite())) {
        return Err(DpgError::Assembly { cell: es.cell, reason: "non-finite condensed matrix".into() });
    }
    Ok(CondensedElement {
        cell: es.cell,
        stiffness: s,
        rhs: (0..f.nrows()).map(|i| f[(i, 0)]).collect(),
        whitened_b: w,
        whitened_load,
        trial_dofs: es.trial_dofs.clone(),
    })
}

/// Element systems of every active cell, in ascending cell order.
pub fn element_systems(
    mesh: &QuadMesh,
    spaces: &TrialSpaces,
    kernel: &ElementKernel,
    problem: &ProblemSpec,
    norm: &TestNorm,
) -> Result<Vec<ElementSystem>> {
    (0..mesh.num_active())
        .into_par_iter()
        .map(|pos| {
            element_system(
                kernel,
                mesh,
                spaces,
                pos,
                norm,
                problem.convection.as_ref(),
                problem.forcing.as_ref(),
            )
        })
        .collect()
}

/// Assembled normal equations before and after constraint elimination.
#[derive(Debug, Clone)]
pub struct GlobalSystem {
    /// `Σ_K scatter(S_K)` over all trial DOFs.
    pub full: CsrMatrix,
    pub full_rhs: Vec<f64>,
    pub constraints: ConstraintMap,
    /// Matrix on the free DOFs.
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
}

/// Scatters condensed elements in ascending cell order and eliminates
/// constraints.
pub fn assemble_global(spaces: &TrialSpaces, elements: &[CondensedElement], problem: &ProblemSpec) -> GlobalSystem {
    let n = spaces.n_dofs();
    let mut full = CsrMatrix::from_element_dofs(n, elements.iter().map(|e| e.trial_dofs.as_slice()));
    let mut full_rhs = vec![0.0; n];
    for e in elements {
        full.scatter(&e.trial_dofs, |a, b| e.stiffness[(a, b)]);
        for (a, &g) in e.trial_dofs.iter().enumerate() {
            full_rhs[g] += e.rhs[a];
        }
    }
    let constraints = ConstraintMap::new(spaces, problem.dirichlet.as_ref());
    let (matrix, rhs) = apply_constraints(&constraints, &full, &full_rhs);
    GlobalSystem { full, full_rhs, constraints, matrix, rhs }
}

/// Coefficients of `(u, σ, û, σ̂ₙ)` over their DOF maps, with the element
/// cache needed by the estimator.
#[derive(Debug, Clone)]
pub struct BlockedSolution {
    /// Mesh generation this solution belongs to.
    pub generation: u64,
    pub spaces: Arc<TrialSpaces>,
    pub discretization: Discretization,
    pub norm: TestNorm,
    /// Full coefficient vector in the global trial numbering.
    pub coefficients: Vec<f64>,
    /// Free unknowns.
    pub free: Vec<f64>,
    /// `‖A x - b‖ / ‖b‖` of the free system.
    pub relative_residual: f64,
    cache: Arc<Vec<CondensedElement>>,
}

impl BlockedSolution {
    pub fn block(&self, block: Block) -> &[f64] {
        &self.coefficients[self.spaces.block_range(block)]
    }

    pub fn n_free(&self) -> usize {
        self.free.len()
    }

    pub fn elements(&self) -> &[CondensedElement] {
        &self.cache
    }

    /// Per-cell `η_K` for an arbitrary full coefficient vector.
    pub fn indicators_for(&self, coefficients: &[f64]) -> Vec<f64> {
        self.cache
            .par_iter()
            .map(|e| {
                let w = &e.whitened_b;
                let mut r2 = 0.0;
                for i in 0..w.nrows() {
                    let mut r = e.whitened_load[i];
                    for (j, &g) in e.trial_dofs.iter().enumerate() {
                        r -= w[(i, j)] * coefficients[g];
                    }
                    r2 += r * r;
                }
                r2.sqrt()
            })
            .collect()
    }
}

/// Everything produced by one solve.
#[derive(Debug, Clone)]
pub struct SolveOutput {
    pub solution: BlockedSolution,
    pub system: GlobalSystem,
}

/// Solves the DPG normal equations on the current mesh.
pub fn solve(
    mesh: &QuadMesh,
    problem: &ProblemSpec,
    norm: &TestNorm,
    disc: Discretization,
) -> Result<BlockedSolution> {
    solve_full(mesh, problem, norm, disc).map(|o| o.solution)
}

/// As [`solve`], also returning the assembled system.
pub fn solve_full(
    mesh: &QuadMesh,
    problem: &ProblemSpec,
    norm: &TestNorm,
    disc: Discretization,
) -> Result<SolveOutput> {
    if norm.eps != problem.eps {
        return Err(DpgError::invalid(format!(
            "test norm diffusion {} differs from problem diffusion {}",
            norm.eps, problem.eps
        )));
    }
    let spaces = Arc::new(TrialSpaces::new(mesh, disc.degree)?);
    let kernel = ElementKernel::new(disc.degree, disc.enrichment);
    let systems = element_systems(mesh, &spaces, &kernel, problem, norm)?;
    let elements: Vec<CondensedElement> = systems.par_iter().map(condense_element).collect::<Result<_>>()?;
    let system = assemble_global(&spaces, &elements, problem);
    let (free, rel) = if system.matrix.n() == 0 {
        (Vec::new(), 0.0)
    } else {
        system.matrix.solve_spd(&system.rhs)?
    };
    if rel > 1e-10 {
        return Err(DpgError::SingularSystem(format!("relative residual {rel:.3e} after solve")));
    }
    let coefficients = system.constraints.expand(&free);
    let relative_residual =
        if system.rhs.iter().all(|&v| v == 0.0) { 0.0 } else { relative_residual(&system.matrix, &free, &system.rhs) };
    Ok(SolveOutput {
        solution: BlockedSolution {
            generation: mesh.generation(),
            spaces,
            discretization: disc,
            norm: *norm,
            coefficients,
            free,
            relative_residual,
            cache: Arc::new(elements),
        },
        system,
    })
}

/// Per-cell indicators `η_K` (in active-cell order) and `η = √(Σ η_K²)`.
#[derive(Debug, Clone)]
pub struct Estimate {
    pub indicators: Vec<f64>,
    pub total: f64,
}

/// Residual-representative estimator for a solution on `mesh`.
pub fn estimate(mesh: &QuadMesh, solution: &BlockedSolution) -> Result<Estimate> {
    if mesh.generation() != solution.generation || mesh.num_active() != solution.elements().len() {
        return Err(DpgError::Usage(format!(
            "solution belongs to mesh generation {}, mesh is at generation {}",
            solution.generation,
            mesh.generation()
        )));
    }
    let indicators = solution.indicators_for(&solution.coefficients);
    let total = indicators.iter().map(|e| e * e).sum::<f64>().sqrt();
    Ok(Estimate { indicators, total })
}

/// `(‖u - u_h‖, ‖σ - σ_h‖)` in `L²(Ω)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldErrors {
    pub l2_u: f64,
    pub l2_sigma: f64,
}

/// L² errors of the field variables against the exact solution, with
/// `p + Δp + 3` Gauss points per axis.
pub fn field_errors(mesh: &QuadMesh, problem: &ProblemSpec, solution: &BlockedSolution) -> Result<FieldErrors> {
    let (Some(u), Some(grad)) = (problem.exact.as_ref(), problem.exact_gradient.as_ref()) else {
        return Err(DpgError::invalid(format!("problem '{}' has no exact solution", problem.name)));
    };
    if mesh.generation() != solution.generation {
        return Err(DpgError::Usage("solution does not belong to this mesh".into()));
    }
    let disc = solution.discretization;
    let quad = TensorGauss::new(disc.degree + disc.enrichment + 3);
    let basis = TensorBasis::new(disc.degree);
    let tab = basis.tabulate(&quad.points);
    let spaces = &solution.spaces;
    let u_block = solution.block(Block::U);
    let s_block = solution.block(Block::Sigma);
    let nf = basis.len();
    let parts: Vec<(f64, f64)> = mesh
        .active_cells()
        .par_iter()
        .enumerate()
        .map(|(pos, &cell)| {
            let rect = mesh.cell_rect(cell);
            let area = rect.area();
            let ud = spaces.u.cell_dofs(pos);
            let sd = spaces.sigma.cell_dofs(pos);
            let (mut eu, mut es) = (0.0, 0.0);
            for (q, &(xi, eta)) in quad.points.iter().enumerate() {
                let x = rect.map(xi, eta);
                let row = tab.row(q);
                let (mut uh, mut sx, mut sy) = (0.0, 0.0, 0.0);
                for i in 0..nf {
                    uh += row[i] * u_block[ud[i]];
                    sx += row[i] * s_block[sd[i]];
                    sy += row[i] * s_block[sd[nf + i]];
                }
                let g = grad(x);
                let w = quad.weights[q] * area;
                eu += w * (u(x) - uh).powi(2);
                es += w * ((g[0] - sx).powi(2) + (g[1] - sy).powi(2));
            }
            (eu, es)
        })
        .collect();
    let (eu, es) = parts.iter().fold((0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
    Ok(FieldErrors { l2_u: eu.sqrt(), l2_sigma: es.sqrt() })
}

/// Value of `u_h` at a point of active cell `pos`.
pub fn evaluate_u(mesh: &QuadMesh, solution: &BlockedSolution, pos: usize, xi: f64, eta: f64) -> f64 {
    let basis = TensorBasis::new(solution.discretization.degree);
    let vals = basis.values_at(xi, eta);
    let dofs = solution.spaces.u.cell_dofs(pos);
    let u = solution.block(Block::U);
    debug_assert!(pos < mesh.num_active());
    vals.iter().zip(dofs).map(|(v, &d)| v * u[d]).sum()
}

/// Value of `σ_h` at a point of active cell `pos`.
pub fn evaluate_sigma(solution: &BlockedSolution, pos: usize, xi: f64, eta: f64) -> [f64; 2] {
    let basis = TensorBasis::new(solution.discretization.degree);
    let vals = basis.values_at(xi, eta);
    let nf = vals.len();
    let dofs = solution.spaces.sigma.cell_dofs(pos);
    let s = solution.block(Block::Sigma);
    let mut out = [0.0; 2];
    for i in 0..nf {
        out[0] += vals[i] * s[dofs[i]];
        out[1] += vals[i] * s[dofs[nf + i]];
    }
    out
}
