//! Discrete equivalence constants between the DPG energy norm and the
//! ε-scaled field norm `ε⁻¹‖u‖² + ε‖σ‖²`.
//!
//! With all traces fixed at zero the field unknowns of different cells do
//! not couple, so `S_ff` and `M_ff` are block diagonal with one block per
//! cell and the generalized eigenproblem splits into per-cell problems.

use faer::linalg::triangular_solve::solve_lower_triangular_in_place;
use faer::{Mat, Par, Side};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{DpgError, Result};
use crate::fespace::{TensorBasis, TrialSpaces};
use crate::forms::{element_system, ElementKernel, NormVariant, TestNorm};
use crate::mesh::{all_dirichlet, QuadMesh, Rect};
use crate::quadrature::TensorGauss;
use crate::solver::{condense_element, Discretization};
use crate::Point;

/// Per-cell blocks of `M_ff = blockdiag(ε⁻¹ M_u, ε M_σx, ε M_σy)`, in
/// active-cell order.
pub fn field_norm_gram(mesh: &QuadMesh, degree: usize, eps: f64) -> Vec<Mat<f64>> {
    let basis = TensorBasis::new(degree);
    let quad = TensorGauss::new(degree + 2);
    let tab = basis.tabulate(&quad.points);
    let nf = basis.len();
    mesh.active_cells()
        .iter()
        .map(|&cell| {
            let area = mesh.cell_rect(cell).area();
            let mut m = Mat::<f64>::zeros(3 * nf, 3 * nf);
            for (q, &w) in quad.weights.iter().enumerate() {
                let row = tab.row(q);
                for i in 0..nf {
                    for j in 0..nf {
                        let v = w * area * row[i] * row[j];
                        m[(i, j)] += v / eps;
                        m[(nf + i, nf + j)] += v * eps;
                        m[(2 * nf + i, 2 * nf + j)] += v * eps;
                    }
                }
            }
            m
        })
        .collect()
}

/// Per-cell field blocks of `S = Σ_K BᵀG⁻¹B`, in active-cell order.
pub fn field_energy_blocks(
    mesh: &QuadMesh,
    disc: Discretization,
    norm: &TestNorm,
    convection: &(dyn Fn(Point) -> [f64; 2] + Sync),
) -> Result<Vec<Mat<f64>>> {
    let spaces = TrialSpaces::with_boundary(mesh, disc.degree, false)?;
    let kernel = ElementKernel::new(disc.degree, disc.enrichment);
    let nfield = 3 * kernel.n_field();
    (0..mesh.num_active())
        .into_par_iter()
        .map(|pos| {
            let es = element_system(&kernel, mesh, &spaces, pos, norm, convection, &|_| 0.0)?;
            let c = condense_element(&es)?;
            Ok(c.stiffness.as_ref().submatrix(0, 0, nfield, nfield).to_owned())
        })
        .collect()
}

/// Extremal eigenvalues of `S x = λ M x` for SPD `M`.
pub fn generalized_extremes(s: &Mat<f64>, m: &Mat<f64>) -> Result<(f64, f64)> {
    let llt = m.llt(Side::Lower).map_err(|_| DpgError::Probe("field mass matrix is not SPD".into()))?;
    let l = llt.L();
    // C = L⁻¹ S L⁻ᵀ
    let mut c = s.clone();
    solve_lower_triangular_in_place(l, c.as_mut(), Par::Seq);
    let mut ct = c.transpose().to_owned();
    solve_lower_triangular_in_place(l, ct.as_mut(), Par::Seq);
    let n = ct.nrows();
    let sym = Mat::<f64>::from_fn(n, n, |i, j| 0.5 * (ct[(i, j)] + ct[(j, i)]));
    let ev = sym
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| DpgError::Probe(format!("eigenvalue iteration failed: {e:?}")))?;
    let lo = ev.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = ev.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(lo.is_finite() && hi.is_finite()) {
        return Err(DpgError::Probe("non-finite eigenvalue".into()));
    }
    Ok((lo, hi))
}

/// `(λ_min, λ_max)` of `S_ff x = λ M_ff x` on `mesh`.
pub fn equivalence_constants(
    mesh: &QuadMesh,
    disc: Discretization,
    norm: &TestNorm,
    convection: &(dyn Fn(Point) -> [f64; 2] + Sync),
) -> Result<(f64, f64)> {
    let s = field_energy_blocks(mesh, disc, norm, convection)?;
    let m = field_norm_gram(mesh, disc.degree, norm.eps);
    let parts: Vec<(f64, f64)> =
        s.par_iter().zip(m.par_iter()).map(|(s, m)| generalized_extremes(s, m)).collect::<Result<_>>()?;
    let lo = parts.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let hi = parts.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    if lo <= 0.0 {
        return Err(DpgError::Probe(format!("field energy matrix is not positive definite (λ_min = {lo:e})")));
    }
    Ok((lo, hi))
}

/// One probe measurement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeRecord {
    pub norm: String,
    pub eps: f64,
    pub p: usize,
    /// Cells per side of the uniform mesh.
    pub mesh: usize,
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub ratio: f64,
}

/// Probe settings shared by all records of a sweep.
#[derive(Debug, Clone, Copy)]
pub struct ProbeSetup {
    pub mesh: usize,
    pub discretization: Discretization,
    pub convection: [f64; 2],
}

impl Default for ProbeSetup {
    fn default() -> Self {
        ProbeSetup { mesh: 4, discretization: Discretization::new(1, crate::solver::DEFAULT_ENRICHMENT), convection: [1.0, 1.0] }
    }
}

/// Equivalence constants for every `(variant, ε)` pair on a uniform unit
/// square mesh with constant convection.
pub fn probe_sweep(variants: &[NormVariant], eps_list: &[f64], setup: &ProbeSetup) -> Result<Vec<ProbeRecord>> {
    let mesh = QuadMesh::rectangle(Rect::unit(), setup.mesh, setup.mesh, all_dirichlet())?;
    let a = setup.convection;
    let mut out = Vec::new();
    for &variant in variants {
        for &eps in eps_list {
            let norm = TestNorm::new(variant, eps)?;
            let (lo, hi) = equivalence_constants(&mesh, setup.discretization, &norm, &move |_| a).map_err(|e| {
                DpgError::Labeled { label: format!("{variant} at eps={eps}"), source: Box::new(e) }
            })?;
            out.push(ProbeRecord {
                norm: variant.name().into(),
                eps,
                p: setup.discretization.degree,
                mesh: setup.mesh,
                lambda_min: lo,
                lambda_max: hi,
                ratio: hi / lo,
            });
        }
    }
    Ok(out)
}
