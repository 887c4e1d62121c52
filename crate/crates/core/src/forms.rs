//! Element matrices of the ultra-weak formulation.
//!
//! For an element `K` with broken test pair `(v, τ)` the bilinear form reads
//!
//! ```text
//! B_K = ∫_K u (div τ - a·∇v) + σ·(τ + ε∇v) dx - ∫_∂K û τ·n_K ds + ∫_∂K sgn(n_K) σ̂ₙ v ds
//! ```
//!
//! and the load is `∫_K f v dx`. The Gram matrix of a test inner product is
//! built as `FᵀF`, where each row of `F` is one weighted term of the norm
//! evaluated at one quadrature point. Every term is a linear combination of
//! the six primitive quantities `[v, ∂x v, ∂y v, τx, τy, div τ]`.

use std::fmt;
use std::str::FromStr;

use faer::Mat;

use crate::error::{DpgError, Result};
use crate::fespace::{Lagrange1d, Tabulation, TensorBasis, TrialSpaces};
use crate::mesh::{QuadMesh, Rect, Side};
use crate::quadrature::{GaussLegendre, TensorGauss};
use crate::Point;

/// Coefficients on `[v, ∂x v, ∂y v, τx, τy, div τ]`.
pub type Term = [f64; 6];

/// Selectable test inner products.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NormVariant {
    /// `ε‖div τ - a·∇v‖² + ‖C_τ(τ + ε∇v)‖² + ε‖v‖² + ε‖∇v‖²`,
    /// `C_τ = min(ε^{-1/2}, |K|^{-1/2})`.
    Proposed,
    /// As `Proposed` with `C_τ² = ε⁻¹`.
    ProposedPlain,
    /// `‖C_v v‖² + ε‖∇v‖² + ‖a·∇v‖² + ‖C_τ τ‖² + ‖div τ‖²`,
    /// `C_v = min(√(ε/|K|), 1)`.
    MeshDependent,
    /// `‖div τ - a·∇v‖² + ‖ε⁻¹τ + ∇v‖² + ‖v‖²`.
    QuasiOptimal,
}

impl NormVariant {
    pub const ALL: [NormVariant; 4] = [
        NormVariant::Proposed,
        NormVariant::ProposedPlain,
        NormVariant::MeshDependent,
        NormVariant::QuasiOptimal,
    ];

    pub fn name(self) -> &'static str {
        match self {
            NormVariant::Proposed => "proposed",
            NormVariant::ProposedPlain => "proposed-plain",
            NormVariant::MeshDependent => "md",
            NormVariant::QuasiOptimal => "qo",
        }
    }
}

impl fmt::Display for NormVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for NormVariant {
    type Err = DpgError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "proposed" => Ok(NormVariant::Proposed),
            "proposed-plain" | "plain" => Ok(NormVariant::ProposedPlain),
            "md" | "mesh-dependent" => Ok(NormVariant::MeshDependent),
            "qo" | "quasi-optimal" => Ok(NormVariant::QuasiOptimal),
            other => Err(DpgError::invalid(format!("unknown test norm '{other}'"))),
        }
    }
}

/// A test inner product: variant plus diffusion parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestNorm {
    pub variant: NormVariant,
    pub eps: f64,
}

impl TestNorm {
    pub fn new(variant: NormVariant, eps: f64) -> Result<Self> {
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(DpgError::invalid(format!("diffusion must be positive, got {eps}")));
        }
        Ok(TestNorm { variant, eps })
    }

    /// `C_τ|_K = min(ε^{-1/2}, |K|^{-1/2})`.
    pub fn c_tau(&self, area: f64) -> f64 {
        (1.0 / self.eps.sqrt()).min(1.0 / area.sqrt())
    }

    /// `C_v|_K = min(√(ε/|K|), 1)`.
    pub fn c_v(&self, area: f64) -> f64 {
        (self.eps / area).sqrt().min(1.0)
    }

    /// The norm's squared terms at a point with convection `a` in a cell of
    /// area `area`.
    pub fn terms(&self, a: [f64; 2], area: f64) -> Vec<Term> {
        let eps = self.eps;
        let se = eps.sqrt();
        match self.variant {
            NormVariant::Proposed | NormVariant::ProposedPlain => {
                let ct = match self.variant {
                    NormVariant::Proposed => self.c_tau(area),
                    _ => 1.0 / se,
                };
                vec![
                    [0.0, -se * a[0], -se * a[1], 0.0, 0.0, se],
                    [0.0, ct * eps, 0.0, ct, 0.0, 0.0],
                    [0.0, 0.0, ct * eps, 0.0, ct, 0.0],
                    [se, 0.0, 0.0, 0.0, 0.0, 0.0],
                    [0.0, se, 0.0, 0.0, 0.0, 0.0],
                    [0.0, 0.0, se, 0.0, 0.0, 0.0],
                ]
            }
            NormVariant::MeshDependent => {
                let (cv, ct) = (self.c_v(area), self.c_tau(area));
                vec![
                    [cv, 0.0, 0.0, 0.0, 0.0, 0.0],
                    [0.0, se, 0.0, 0.0, 0.0, 0.0],
                    [0.0, 0.0, se, 0.0, 0.0, 0.0],
                    [0.0, a[0], a[1], 0.0, 0.0, 0.0],
                    [0.0, 0.0, 0.0, ct, 0.0, 0.0],
                    [0.0, 0.0, 0.0, 0.0, ct, 0.0],
                    [0.0, 0.0, 0.0, 0.0, 0.0, 1.0],
                ]
            }
            NormVariant::QuasiOptimal => vec![
                [0.0, -a[0], -a[1], 0.0, 0.0, 1.0],
                [0.0, 1.0, 0.0, 1.0 / eps, 0.0, 0.0],
                [0.0, 0.0, 1.0, 0.0, 1.0 / eps, 0.0],
                [1.0, 0.0, 0.0, 0.0, 0.0, 0.0],
            ],
        }
    }
}

/// Precomputed reference data shared by all cells for fixed degrees.
#[derive(Debug, Clone)]
pub struct ElementKernel {
    /// Field degree `p`.
    pub degree: usize,
    /// Test degree `p + Δp`.
    pub test_degree: usize,
    pub quad: TensorGauss,
    pub edge_quad: GaussLegendre,
    pub test: TensorBasis,
    pub trial: TensorBasis,
    /// Edge basis of degree `p + 1` for both traces.
    pub trace: Lagrange1d,
    test_tab: Tabulation,
    trial_tab: Tabulation,
    sides: Vec<SideTable>,
}

/// Test-basis values and trace-basis values on one side sub-interval.
#[derive(Debug, Clone)]
struct SideTable {
    side: Side,
    span: [f64; 2],
    /// Weights relative to the side length.
    weights: Vec<f64>,
    test: Tabulation,
    /// Trace basis on the whole side at the points, row-major (point, node).
    trace_side: Vec<f64>,
    /// Trace basis on the sub-interval at its local parameter.
    trace_sub: Vec<f64>,
}

impl ElementKernel {
    /// Kernel with the default rule of `p + Δp + 2` Gauss points per axis.
    pub fn new(degree: usize, enrichment: usize) -> Self {
        Self::with_quadrature(degree, enrichment, degree + enrichment + 2)
    }

    pub fn with_quadrature(degree: usize, enrichment: usize, points: usize) -> Self {
        let test_degree = degree + enrichment;
        let quad = TensorGauss::new(points);
        let edge_quad = GaussLegendre::new(points);
        let test = TensorBasis::new(test_degree);
        let trial = TensorBasis::new(degree);
        let trace = Lagrange1d::new(degree + 1);
        let test_tab = test.tabulate(&quad.points);
        let trial_tab = trial.tabulate(&quad.points);
        let mut kernel = ElementKernel {
            degree,
            test_degree,
            quad,
            edge_quad,
            test,
            trial,
            trace,
            test_tab,
            trial_tab,
            sides: Vec::new(),
        };
        for side in Side::ALL {
            for span in [[0.0, 1.0], [0.0, 0.5], [0.5, 1.0]] {
                let table = kernel.side_table(side, span);
                kernel.sides.push(table);
            }
        }
        kernel
    }

    fn side_table(&self, side: Side, span: [f64; 2]) -> SideTable {
        let (t, weights) = self.edge_quad.mapped(span[0], span[1]);
        let pts: Vec<(f64, f64)> = t.iter().map(|&s| side.reference_point(s)).collect();
        let test = self.test.tabulate(&pts);
        let trace_side = t.iter().flat_map(|&s| self.trace.values(s)).collect();
        let trace_sub = self.edge_quad.points.iter().flat_map(|&s| self.trace.values(s)).collect();
        SideTable { side, span, weights, test, trace_side, trace_sub }
    }

    fn side_data(&self, side: Side, span: [f64; 2]) -> std::borrow::Cow<'_, SideTable> {
        match self.sides.iter().find(|s| s.side == side && s.span == span) {
            Some(s) => std::borrow::Cow::Borrowed(s),
            None => std::borrow::Cow::Owned(self.side_table(side, span)),
        }
    }

    /// Scalar test functions per cell, `(p+Δp+1)²`.
    pub fn n_test_scalar(&self) -> usize {
        self.test.len()
    }

    /// Local test dimension: `v`, `τx`, `τy`.
    pub fn n_test(&self) -> usize {
        3 * self.test.len()
    }

    /// Field basis functions per scalar component, `(p+1)²`.
    pub fn n_field(&self) -> usize {
        self.trial.len()
    }

    /// Local `û` functions: four corners plus side interiors, `4(p+1)`.
    pub fn n_uhat(&self) -> usize {
        4 * (self.degree + 1)
    }

    /// Local column of `û` node `k` (0..=p+1) on `side`.
    pub fn uhat_local(&self, side: Side, k: usize) -> usize {
        let q = self.degree + 1;
        let [c0, c1] = side.corners();
        if k == 0 {
            c0
        } else if k == q {
            c1
        } else {
            4 + side.index() * (q - 1) + (k - 1)
        }
    }

    pub fn quadrature_points(&self, rect: &Rect) -> Vec<Point> {
        self.quad.points.iter().map(|&(xi, eta)| rect.map(xi, eta)).collect()
    }
}

/// The per-element DPG data: Gram matrix, ultra-weak matrix and load.
#[derive(Debug, Clone)]
pub struct ElementSystem {
    pub cell: usize,
    pub gram: Mat<f64>,
    pub b: Mat<f64>,
    pub load: Vec<f64>,
    /// Global trial DOFs of the columns of `b`.
    pub trial_dofs: Vec<usize>,
}

/// Value of the primitive quantities of test function `i` at quadrature point
/// `q`, with physical derivatives. Returns `(block, [φ, ∂xφ, ∂yφ])`.
#[inline]
fn primitive(tab: &Tabulation, q: usize, i: usize, inv_h: [f64; 2]) -> [f64; 3] {
    let g = tab.grad(q, i);
    [tab.value(q, i), g[0] * inv_h[0], g[1] * inv_h[1]]
}

/// Fills row `r` of `f` with `scale · term(test_j)` for every test function.
fn fill_row(f: &mut Mat<f64>, r: usize, tab: &Tabulation, q: usize, inv_h: [f64; 2], term: &Term, scale: f64) {
    let nv = tab.nbasis;
    for i in 0..nv {
        let [phi, dx, dy] = primitive(tab, q, i, inv_h);
        f[(r, i)] = scale * (term[0] * phi + term[1] * dx + term[2] * dy);
        f[(r, nv + i)] = scale * (term[3] * phi + term[5] * dx);
        f[(r, 2 * nv + i)] = scale * (term[4] * phi + term[5] * dy);
    }
}

fn sample_convection(
    convection: &dyn Fn(Point) -> [f64; 2],
    x: Point,
    cell: usize,
) -> Result<[f64; 2]> {
    let a = convection(x);
    if a.iter().all(|v| v.is_finite()) {
        Ok(a)
    } else {
        Err(DpgError::Assembly { cell, reason: format!("non-finite convection at {x:?}") })
    }
}

/// Gram matrix of the test inner product on one cell.
pub fn assemble_gram(
    kernel: &ElementKernel,
    cell: usize,
    rect: &Rect,
    norm: &TestNorm,
    convection: &dyn Fn(Point) -> [f64; 2],
) -> Result<Mat<f64>> {
    if !(norm.eps > 0.0) {
        return Err(DpgError::invalid("diffusion must be positive"));
    }
    let nq = kernel.quad.len();
    let area = rect.area();
    let inv_h = [1.0 / rect.width(), 1.0 / rect.height()];
    let tab = &kernel.test_tab;
    let mut rows: Vec<(usize, Term, f64)> = Vec::new();
    for q in 0..nq {
        let (xi, eta) = kernel.quad.points[q];
        let a = sample_convection(convection, rect.map(xi, eta), cell)?;
        let scale = (kernel.quad.weights[q] * area).sqrt();
        for term in norm.terms(a, area) {
            rows.push((q, term, scale));
        }
    }
    let mut f = Mat::<f64>::zeros(rows.len(), kernel.n_test());
    for (r, (q, term, scale)) in rows.iter().enumerate() {
        fill_row(&mut f, r, tab, *q, inv_h, term, *scale);
    }
    let g = f.transpose() * &f;
    Ok(g)
}

/// Ultra-weak matrix of one active cell: rows are local test functions,
/// columns local trial functions in the order `[u, σx, σy, û, σ̂ₙ]`.
pub fn assemble_b(
    kernel: &ElementKernel,
    mesh: &QuadMesh,
    cell: usize,
    n_flux: usize,
    eps: f64,
    convection: &dyn Fn(Point) -> [f64; 2],
) -> Result<Mat<f64>> {
    let rect = mesh.cell_rect(cell);
    let nq = kernel.quad.len();
    let nv = kernel.n_test_scalar();
    let nt = kernel.n_test();
    let nf = kernel.n_field();
    let nu = kernel.n_uhat();
    let q = kernel.degree + 1;
    let area = rect.area();
    let inv_h = [1.0 / rect.width(), 1.0 / rect.height()];
    let tab = &kernel.test_tab;
    let trial = &kernel.trial_tab;
    let ncols = 3 * nf + nu + n_flux;

    // Volume terms: T_k (nq × nt) holds the test functional paired with each
    // trial component, Φ (nq × nf) the weighted trial values.
    let mut t_u = Mat::<f64>::zeros(nq, nt);
    let mut t_sx = Mat::<f64>::zeros(nq, nt);
    let mut t_sy = Mat::<f64>::zeros(nq, nt);
    let mut phi = Mat::<f64>::zeros(nq, nf);
    for qp in 0..nq {
        let (xi, eta) = kernel.quad.points[qp];
        let a = sample_convection(convection, rect.map(xi, eta), cell)?;
        let w = kernel.quad.weights[qp] * area;
        fill_row(&mut t_u, qp, tab, qp, inv_h, &[0.0, -a[0], -a[1], 0.0, 0.0, 1.0], w);
        fill_row(&mut t_sx, qp, tab, qp, inv_h, &[0.0, eps, 0.0, 1.0, 0.0, 0.0], w);
        fill_row(&mut t_sy, qp, tab, qp, inv_h, &[0.0, 0.0, eps, 0.0, 1.0, 0.0], w);
        for j in 0..nf {
            phi[(qp, j)] = trial.value(qp, j);
        }
    }
    let mut b = Mat::<f64>::zeros(nt, ncols);
    b.as_mut().submatrix_mut(0, 0, nt, nf).copy_from(t_u.transpose() * &phi);
    b.as_mut().submatrix_mut(0, nf, nt, nf).copy_from(t_sx.transpose() * &phi);
    b.as_mut().submatrix_mut(0, 2 * nf, nt, nf).copy_from(t_sy.transpose() * &phi);

    // Skeleton terms.
    let mut flux_col = 3 * nf + nu;
    for side in Side::ALL {
        let len = if side.is_horizontal() { rect.width() } else { rect.height() };
        let n = side.normal();
        // -∫ û τ·n_K over the whole side
        let st = kernel.side_data(side, [0.0, 1.0]);
        for (g, &w) in st.weights.iter().enumerate() {
            let ds = w * len;
            let tr = &st.trace_side[g * (q + 1)..(g + 1) * (q + 1)];
            for (k, &ell) in tr.iter().enumerate() {
                if ell == 0.0 {
                    continue;
                }
                let col = 3 * nf + kernel.uhat_local(side, k);
                for i in 0..nv {
                    let psi = st.test.value(g, i);
                    b[(nv + i, col)] -= ds * ell * psi * n[0];
                    b[(2 * nv + i, col)] -= ds * ell * psi * n[1];
                }
            }
        }
        // +∫ sgn(n_K) σ̂ₙ v over each skeleton edge of the side
        for &e in mesh.side_edges(cell, side) {
            let edge = &mesh.skeleton()[e];
            let es = edge.side_of(cell).ok_or_else(|| DpgError::Assembly {
                cell,
                reason: format!("edge {e} has no orientation record for this cell"),
            })?;
            let sign = edge.sign_for(cell);
            let st = kernel.side_data(side, es.span);
            for (g, &w) in st.weights.iter().enumerate() {
                let ds = w * len;
                let tr = &st.trace_sub[g * (q + 1)..(g + 1) * (q + 1)];
                for (k, &ell) in tr.iter().enumerate() {
                    if ell == 0.0 {
                        continue;
                    }
                    for i in 0..nv {
                        b[(i, flux_col + k)] += sign * ds * ell * st.test.value(g, i);
                    }
                }
            }
            flux_col += q + 1;
        }
    }
    debug_assert_eq!(flux_col, ncols);
    Ok(b)
}

/// Load vector `∫_K f v_i`; zero in the `τ` rows.
pub fn assemble_load(
    kernel: &ElementKernel,
    cell: usize,
    rect: &Rect,
    forcing: &dyn Fn(Point) -> f64,
) -> Result<Vec<f64>> {
    let nv = kernel.n_test_scalar();
    let mut load = vec![0.0; kernel.n_test()];
    let area = rect.area();
    for (qp, &(xi, eta)) in kernel.quad.points.iter().enumerate() {
        let x = rect.map(xi, eta);
        let f = forcing(x);
        if !f.is_finite() {
            return Err(DpgError::Assembly { cell, reason: format!("non-finite forcing at {x:?}") });
        }
        if f == 0.0 {
            continue;
        }
        let w = kernel.quad.weights[qp] * area * f;
        for (i, l) in load[..nv].iter_mut().enumerate() {
            *l += w * kernel.test_tab.value(qp, i);
        }
    }
    Ok(load)
}

/// Gram, ultra-weak matrix and load of the active cell at position `pos`.
pub fn element_system(
    kernel: &ElementKernel,
    mesh: &QuadMesh,
    spaces: &TrialSpaces,
    pos: usize,
    norm: &TestNorm,
    convection: &dyn Fn(Point) -> [f64; 2],
    forcing: &dyn Fn(Point) -> f64,
) -> Result<ElementSystem> {
    let cell = mesh.active_cells()[pos];
    let rect = mesh.cell_rect(cell);
    let n_flux = spaces.flux.cell_dofs(pos).len();
    let gram = assemble_gram(kernel, cell, &rect, norm, convection)?;
    let b = assemble_b(kernel, mesh, cell, n_flux, norm.eps, convection)?;
    let load = assemble_load(kernel, cell, &rect, forcing)?;
    Ok(ElementSystem { cell, gram, b, load, trial_dofs: spaces.cell_dofs(pos) })
}
