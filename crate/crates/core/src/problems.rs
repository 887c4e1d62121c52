//! Benchmark problems with closed-form solutions and forcings, plus the
//! finite-difference checks that guard every forcing expression.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::error::{DpgError, Result};
use crate::mesh::{all_dirichlet, BoundaryKind, BoundaryRule, QuadMesh, Rect};
use crate::Point;

pub type ScalarFn = Arc<dyn Fn(Point) -> f64 + Send + Sync>;
pub type VectorFn = Arc<dyn Fn(Point) -> [f64; 2] + Send + Sync>;

/// Data of `div(a u - ε grad u) = f` on a rectangle.
#[derive(Clone)]
pub struct ProblemSpec {
    pub name: String,
    pub domain: Rect,
    pub eps: f64,
    pub convection: VectorFn,
    pub forcing: ScalarFn,
    pub boundary: BoundaryRule,
    /// Value of `û` on Dirichlet edges.
    pub dirichlet: ScalarFn,
    pub exact: Option<ScalarFn>,
    /// `σ = grad u`.
    pub exact_gradient: Option<VectorFn>,
    /// Coarse grid the adaptive loop starts from.
    pub initial_mesh: (usize, usize),
    /// Width of the sharpest layer, used to scale difference steps.
    pub layer_scale: f64,
}

impl fmt::Debug for ProblemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemSpec")
            .field("name", &self.name)
            .field("domain", &self.domain)
            .field("eps", &self.eps)
            .field("initial_mesh", &self.initial_mesh)
            .finish_non_exhaustive()
    }
}

impl ProblemSpec {
    /// The starting mesh of the refinement loops.
    pub fn mesh(&self) -> Result<QuadMesh> {
        let (nx, ny) = self.initial_mesh;
        self.mesh_with(nx, ny)
    }

    pub fn mesh_with(&self, nx: usize, ny: usize) -> Result<QuadMesh> {
        QuadMesh::rectangle(self.domain, nx, ny, self.boundary.clone())
    }

    /// `ex1`, `ex2` or `ex3` at diffusion `eps`.
    pub fn by_name(name: &str, eps: f64) -> Result<Self> {
        match name {
            "ex1" => example1(eps),
            "ex2" => example2(eps, DEFAULT_TERMS),
            "ex3" => example3(eps),
            other => Err(DpgError::invalid(format!("unknown problem '{other}'"))),
        }
    }

    /// A copy with the convection field replaced.
    pub fn with_convection(mut self, a: VectorFn) -> Self {
        self.convection = a;
        self
    }
}

fn check_eps(eps: f64) -> Result<()> {
    if eps > 0.0 && eps.is_finite() {
        Ok(())
    } else {
        Err(DpgError::invalid(format!("diffusion must be positive, got {eps}")))
    }
}

/// One-dimensional layer profile `X(s) = (e^{(s-1)/ε} - 1)/(e^{-1/ε} - 1) + s - 1`
/// with its first two derivatives.
#[derive(Debug, Clone, Copy)]
pub struct LayerProfile {
    eps: f64,
    /// `e^{-1/ε} - 1`, which tends to `-1` as the exponential underflows.
    denom: f64,
}

impl LayerProfile {
    pub fn new(eps: f64) -> Self {
        LayerProfile { eps, denom: (-1.0 / eps).exp_m1() }
    }

    pub fn value(&self, s: f64) -> f64 {
        ((s - 1.0) / self.eps).exp_m1() / self.denom + s - 1.0
    }

    pub fn derivative(&self, s: f64) -> f64 {
        ((s - 1.0) / self.eps).exp() / (self.eps * self.denom) + 1.0
    }

    pub fn second_derivative(&self, s: f64) -> f64 {
        ((s - 1.0) / self.eps).exp() / (self.eps * self.eps * self.denom)
    }
}

/// `u = X(x) X(y)` on the unit square with `a = (1, 1)` and `u = 0` on the
/// boundary. Since `X' - εX'' = 1`, the forcing is `f = X(x) + X(y)`.
pub fn example1(eps: f64) -> Result<ProblemSpec> {
    check_eps(eps)?;
    let x = LayerProfile::new(eps);
    Ok(ProblemSpec {
        name: "ex1".into(),
        domain: Rect::unit(),
        eps,
        convection: Arc::new(|_| [1.0, 1.0]),
        forcing: Arc::new(move |p| x.value(p[0]) + x.value(p[1])),
        boundary: all_dirichlet(),
        dirichlet: Arc::new(|_| 0.0),
        exact: Some(Arc::new(move |p| x.value(p[0]) * x.value(p[1]))),
        exact_gradient: Some(Arc::new(move |p| {
            [x.derivative(p[0]) * x.value(p[1]), x.value(p[0]) * x.derivative(p[1])]
        })),
        initial_mesh: (4, 4),
        layer_scale: eps,
    })
}

/// Default series length for the Eriksson-Johnson problem.
pub const DEFAULT_TERMS: usize = 200;

/// Eriksson-Johnson series `u = Σ C_n m_n(x) cos(nπy)`.
#[derive(Debug, Clone)]
pub struct EjSeries {
    eps: f64,
    modes: Vec<EjMode>,
}

#[derive(Debug, Clone, Copy)]
struct EjMode {
    n: usize,
    coeff: f64,
    r1: f64,
    r2: f64,
    denom: f64,
}

impl EjMode {
    /// `(e^{r₂x} - e^{r₁(x-1)+r₂}) / (1 - e^{r₂-r₁})` and two derivatives.
    fn profile(&self, x: f64) -> [f64; 3] {
        let a = (self.r2 * x).exp();
        let b = (self.r1 * (x - 1.0) + self.r2).exp();
        [
            (a - b) / self.denom,
            (self.r2 * a - self.r1 * b) / self.denom,
            (self.r2 * self.r2 * a - self.r1 * self.r1 * b) / self.denom,
        ]
    }

    /// Bound on the mode and its gradient at `x`.
    fn amplitude(&self, x: f64) -> f64 {
        let k = self.n as f64 * PI;
        self.coeff.abs() * (self.r2 * x).exp() * (1.0 + k + self.r2.abs())
    }
}

/// `C_n = 2∫₀¹ y(1-y) cos(nπy) dy` for `n ≥ 1`, `C₀ = ∫₀¹ y(1-y) dy`.
pub fn ej_coefficient(n: usize) -> f64 {
    if n == 0 {
        return 1.0 / 6.0;
    }
    let k = n as f64 * PI;
    let sign = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
    -2.0 * (1.0 + sign) / (k * k)
}

/// Characteristic roots `(r₁, r₂)` of `εr² - r - εn²π² = 0`, with `r₂ ≤ 0`
/// computed without cancellation.
pub fn ej_roots(eps: f64, n: usize) -> (f64, f64) {
    let lambda = (n as f64 * PI).powi(2) * eps;
    let s = (1.0 + 4.0 * eps * lambda).sqrt();
    ((1.0 + s) / (2.0 * eps), -2.0 * lambda / (1.0 + s))
}

impl EjSeries {
    pub fn new(eps: f64, terms: usize) -> Result<Self> {
        check_eps(eps)?;
        if terms < 1 {
            return Err(DpgError::invalid("series truncation must be at least 1"));
        }
        let modes = (0..terms)
            .map(|n| (n, ej_coefficient(n)))
            .filter(|&(_, c)| c != 0.0)
            .map(|(n, coeff)| {
                let (r1, r2) = ej_roots(eps, n);
                EjMode { n, coeff, r1, r2, denom: -(r2 - r1).exp_m1() }
            })
            .collect();
        Ok(EjSeries { eps, modes })
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    fn sum(&self, p: Point, mut f: impl FnMut(&EjMode, [f64; 3], f64, f64)) {
        for m in &self.modes {
            if m.n > 0 && m.amplitude(p[0]) < 1e-17 {
                break;
            }
            let k = m.n as f64 * PI;
            f(m, m.profile(p[0]), (k * p[1]).cos(), (k * p[1]).sin());
        }
    }

    pub fn value(&self, p: Point) -> f64 {
        let mut u = 0.0;
        self.sum(p, |m, x, c, _| u += m.coeff * x[0] * c);
        u
    }

    pub fn gradient(&self, p: Point) -> [f64; 2] {
        let mut g = [0.0; 2];
        self.sum(p, |m, x, c, s| {
            g[0] += m.coeff * x[1] * c;
            g[1] -= m.coeff * x[0] * m.n as f64 * PI * s;
        });
        g
    }
}

/// Eriksson-Johnson problem on the unit square: `a = (1, 0)`, `f = 0`,
/// `u = y(1-y)` at `x = 0`, `u = 0` at `x = 1`, zero total flux on `y = 0, 1`.
pub fn example2(eps: f64, terms: usize) -> Result<ProblemSpec> {
    let series = Arc::new(EjSeries::new(eps, terms)?);
    let rule: BoundaryRule = Arc::new(|p: Point| {
        if p[0] <= 1e-12 || p[0] >= 1.0 - 1e-12 {
            BoundaryKind::Dirichlet
        } else {
            BoundaryKind::Neumann
        }
    });
    let (s1, s2) = (series.clone(), series);
    Ok(ProblemSpec {
        name: "ex2".into(),
        domain: Rect::unit(),
        eps,
        convection: Arc::new(|_| [1.0, 0.0]),
        forcing: Arc::new(|_| 0.0),
        boundary: rule,
        dirichlet: Arc::new(|p| if p[0] <= 1e-12 { p[1] * (1.0 - p[1]) } else { 0.0 }),
        exact: Some(Arc::new(move |p| s1.value(p))),
        exact_gradient: Some(Arc::new(move |p| s2.gradient(p))),
        initial_mesh: (4, 4),
        layer_scale: eps,
    })
}

/// `u = erf(x/√(2ε))(1 - y²)` on `(-1, 1)²` with `a = (x, y)` and the exact
/// trace as Dirichlet datum on the whole boundary.
pub fn example3(eps: f64) -> Result<ProblemSpec> {
    check_eps(eps)?;
    let scale = 1.0 / (2.0 * eps).sqrt();
    let amp = (2.0 / (PI * eps)).sqrt();
    let e = move |x: f64| libm::erf(x * scale);
    let de = move |x: f64| amp * (-x * x / (2.0 * eps)).exp();
    let u = move |p: Point| e(p[0]) * (1.0 - p[1] * p[1]);
    Ok(ProblemSpec {
        name: "ex3".into(),
        domain: Rect::new(-1.0, -1.0, 1.0, 1.0),
        eps,
        convection: Arc::new(|p| p),
        forcing: Arc::new(move |p| {
            let (x, y) = (p[0], p[1]);
            2.0 * e(x) * (1.0 - 2.0 * y * y + eps) + 2.0 * x * de(x) * (1.0 - y * y)
        }),
        boundary: all_dirichlet(),
        dirichlet: Arc::new(u),
        exact: Some(Arc::new(u)),
        exact_gradient: Some(Arc::new(move |p| [de(p[0]) * (1.0 - p[1] * p[1]), -2.0 * p[1] * e(p[0])])),
        initial_mesh: (8, 8),
        layer_scale: eps.sqrt(),
    })
}

/// Ingredients of a manufactured problem with full Dirichlet boundary.
#[derive(Clone)]
pub struct Manufactured {
    pub domain: Rect,
    pub eps: f64,
    pub convection: VectorFn,
    /// `div a`.
    pub convection_divergence: ScalarFn,
    pub u: ScalarFn,
    pub gradient: VectorFn,
    pub laplacian: ScalarFn,
}

impl Manufactured {
    /// Problem whose forcing is `a·∇u + (div a) u - εΔu`.
    pub fn build(self, name: &str) -> Result<ProblemSpec> {
        check_eps(self.eps)?;
        let Manufactured { domain, eps, convection, convection_divergence, u, gradient, laplacian } = self;
        let (a, g, uu) = (convection.clone(), gradient.clone(), u.clone());
        let forcing: ScalarFn = Arc::new(move |p| {
            let av = a(p);
            let gv = g(p);
            av[0] * gv[0] + av[1] * gv[1] + convection_divergence(p) * uu(p) - eps * laplacian(p)
        });
        Ok(ProblemSpec {
            name: name.into(),
            domain,
            eps,
            convection,
            forcing,
            boundary: all_dirichlet(),
            dirichlet: u.clone(),
            exact: Some(u),
            exact_gradient: Some(gradient),
            initial_mesh: (2, 2),
            layer_scale: 1.0,
        })
    }
}

/// Step for difference checks: `10⁻³ · min(1, layer)`, floored at `10⁻⁶`.
pub fn fd_step(spec: &ProblemSpec) -> f64 {
    (1e-3 * spec.layer_scale.min(1.0)).max(1e-6)
}

/// Fourth-order central first derivative of `g` at `t`.
fn d1(g: impl Fn(f64) -> f64, t: f64, h: f64) -> f64 {
    (-g(t + 2.0 * h) + 8.0 * g(t + h) - 8.0 * g(t - h) + g(t - 2.0 * h)) / (12.0 * h)
}

/// Fourth-order central second derivative of `g` at `t`.
fn d2(g: impl Fn(f64) -> f64, t: f64, h: f64) -> f64 {
    (-g(t + 2.0 * h) + 16.0 * g(t + h) - 30.0 * g(t) + 16.0 * g(t - h) - g(t - 2.0 * h)) / (12.0 * h * h)
}

/// Difference approximation of `div(a u - ε grad u)` at `p`.
pub fn fd_operator(
    u: &dyn Fn(Point) -> f64,
    a: &dyn Fn(Point) -> [f64; 2],
    eps: f64,
    p: Point,
    h: f64,
) -> f64 {
    let [x, y] = p;
    let fx = |t: f64| a([t, y])[0] * u([t, y]);
    let fy = |t: f64| a([x, t])[1] * u([x, t]);
    let uxx = d2(|t| u([t, y]), x, h);
    let uyy = d2(|t| u([x, t]), y, h);
    d1(fx, x, h) + d1(fy, y, h) - eps * (uxx + uyy)
}

/// Difference approximation of `grad u` at `p`.
pub fn fd_gradient(u: &dyn Fn(Point) -> f64, p: Point, h: f64) -> [f64; 2] {
    [d1(|t| u([t, p[1]]), p[0], h), d1(|t| u([p[0], t]), p[1], h)]
}

fn check_samples(spec: &ProblemSpec, samples: &[Point], h: f64) -> Result<()> {
    let d = spec.domain;
    for p in samples {
        let inside = p[0] - 2.0 * h >= d.x0 && p[0] + 2.0 * h <= d.x1 && p[1] - 2.0 * h >= d.y0 && p[1] + 2.0 * h <= d.y1;
        if !inside {
            return Err(DpgError::invalid(format!("sample {p:?} is not interior to the domain")));
        }
    }
    Ok(())
}

/// `max |f - FD(div(a u - ε grad u))| / (1 + |f|)` over the samples.
pub fn verify_forcing(spec: &ProblemSpec, samples: &[Point]) -> Result<f64> {
    let u = spec.exact.as_ref().ok_or_else(|| DpgError::invalid("problem has no exact solution"))?;
    let h = fd_step(spec);
    check_samples(spec, samples, h)?;
    Ok(samples
        .iter()
        .map(|&p| {
            let f = (spec.forcing)(p);
            (f - fd_operator(u.as_ref(), spec.convection.as_ref(), spec.eps, p, h)).abs() / (1.0 + f.abs())
        })
        .fold(0.0, f64::max))
}

/// `max |σ - FD(grad u)| / (1 + |σ|)` over the samples.
pub fn verify_gradient(spec: &ProblemSpec, samples: &[Point]) -> Result<f64> {
    let u = spec.exact.as_ref().ok_or_else(|| DpgError::invalid("problem has no exact solution"))?;
    let g = spec.exact_gradient.as_ref().ok_or_else(|| DpgError::invalid("problem has no exact gradient"))?;
    let h = fd_step(spec);
    check_samples(spec, samples, h)?;
    Ok(samples
        .iter()
        .map(|&p| {
            let s = g(p);
            let fd = fd_gradient(u.as_ref(), p, h);
            let err = ((s[0] - fd[0]).powi(2) + (s[1] - fd[1]).powi(2)).sqrt();
            err / (1.0 + s[0].hypot(s[1]))
        })
        .fold(0.0, f64::max))
}

/// A `k × k` grid of interior points, offset from cell centres so no sample
/// sits on a symmetry line.
pub fn interior_samples(domain: &Rect, k: usize) -> Vec<Point> {
    let mut out = Vec::with_capacity(k * k);
    for j in 0..k {
        for i in 0..k {
            let s = (i as f64 + 0.45) / k as f64;
            let t = (j as f64 + 0.55) / k as f64;
            out.push(domain.map(s, t));
        }
    }
    out
}

/// Tolerance of the forcing check for a problem.
pub fn forcing_tolerance(spec: &ProblemSpec) -> f64 {
    if spec.name == "ex2" {
        1e-5
    } else {
        1e-6
    }
}

/// One line of the `verify` report.
#[derive(Debug, Clone)]
pub struct VerifyRecord {
    pub problem: String,
    pub eps: f64,
    pub forcing_mismatch: f64,
    pub gradient_mismatch: f64,
    pub tolerance: f64,
}

impl VerifyRecord {
    pub fn passed(&self) -> bool {
        self.forcing_mismatch <= self.tolerance && self.gradient_mismatch <= 1e-6
    }
}

/// Forcing and gradient checks for all benchmarks at the given diffusions.
pub fn verify_all(eps_list: &[f64]) -> Result<Vec<VerifyRecord>> {
    let mut out = Vec::new();
    for name in ["ex1", "ex2", "ex3"] {
        for &eps in eps_list {
            let spec = ProblemSpec::by_name(name, eps)?;
            let samples = interior_samples(&spec.domain, 5);
            out.push(VerifyRecord {
                problem: name.into(),
                eps,
                forcing_mismatch: verify_forcing(&spec, &samples)?,
                gradient_mismatch: verify_gradient(&spec, &samples)?,
                tolerance: forcing_tolerance(&spec),
            });
        }
    }
    Ok(out)
}
