//! Dense brute-force reference implementations, kept independent of the
//! production quadrature, bases and element condensation.

use faer::{Mat, Side};
use ultraweak::fespace::{Block, Constraint, TrialSpaces};
use ultraweak::forms::NormVariant;
use ultraweak::mesh::QuadMesh;
use ultraweak::Point;

/// Gauss rule on `[0, 1]` from the Jacobi matrix of the Legendre weight.
pub fn golub_welsch(n: usize) -> (Vec<f64>, Vec<f64>) {
    let beta = |k: usize| {
        let k = k as f64;
        (k * k / (4.0 * k * k - 1.0)).sqrt()
    };
    jacobi_rule(n, beta, 2.0)
}

/// Nodes and weights of a symmetric Jacobi matrix with off-diagonal `beta`
/// and total mass `mu0`, mapped to `[0, 1]`.
fn jacobi_rule(n: usize, beta: impl Fn(usize) -> f64, mu0: f64) -> (Vec<f64>, Vec<f64>) {
    let j = Mat::<f64>::from_fn(n, n, |r, c| if r + 1 == c { beta(c) } else if c + 1 == r { beta(r) } else { 0.0 });
    let eig = j.self_adjoint_eigen(Side::Lower).expect("eigen");
    let (s, u) = (eig.S(), eig.U());
    let mut pairs: Vec<(f64, f64)> =
        (0..n).map(|k| (0.5 * (s[k] + 1.0), 0.5 * mu0 * u[(0, k)] * u[(0, k)])).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs.into_iter().unzip()
}

/// Gauss-Lobatto nodes of degree `q` on `[0, 1]`: the endpoints plus the
/// zeros of the Jacobi(1,1) polynomial of degree `q - 1`.
pub fn lobatto(q: usize) -> Vec<f64> {
    if q == 0 {
        return vec![0.5];
    }
    let mut nodes = vec![0.0];
    if q >= 2 {
        let beta = |k: usize| {
            let k = k as f64;
            (k * (k + 2.0) / ((2.0 * k + 1.0) * (2.0 * k + 3.0))).sqrt()
        };
        nodes.extend(jacobi_rule(q - 1, beta, 4.0 / 3.0).0);
    }
    nodes.push(1.0);
    nodes
}

/// Lagrange basis through arbitrary nodes, built by inverting the
/// Vandermonde matrix in the variable `2t - 1`.
#[derive(Debug, Clone)]
pub struct NodalBasis {
    /// `coeffs[k][m]`: coefficient of `s^m` in basis function `k`.
    coeffs: Vec<Vec<f64>>,
}

impl NodalBasis {
    pub fn new(nodes: &[f64]) -> Self {
        let n = nodes.len();
        let v: Vec<Vec<f64>> =
            nodes.iter().map(|&t| (0..n).map(|m| (2.0 * t - 1.0).powi(m as i32)).collect()).collect();
        let inv = invert(&v);
        // V c_k = e_k, so c_k is column k of V⁻¹
        let coeffs = (0..n).map(|k| (0..n).map(|m| inv[m][k]).collect()).collect();
        NodalBasis { coeffs }
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    /// Values and `t`-derivatives.
    pub fn eval(&self, t: f64) -> (Vec<f64>, Vec<f64>) {
        let s = 2.0 * t - 1.0;
        let mut vals = Vec::with_capacity(self.len());
        let mut ders = Vec::with_capacity(self.len());
        for c in &self.coeffs {
            let (mut v, mut d) = (0.0, 0.0);
            for (m, &cm) in c.iter().enumerate() {
                v += cm * s.powi(m as i32);
                if m > 0 {
                    d += cm * m as f64 * s.powi(m as i32 - 1) * 2.0;
                }
            }
            vals.push(v);
            ders.push(d);
        }
        (vals, ders)
    }
}

/// Gauss-Jordan inverse with partial pivoting.
pub fn invert(a: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    let mut m: Vec<Vec<f64>> = a
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut row = r.clone();
            row.extend((0..n).map(|j| if i == j { 1.0 } else { 0.0 }));
            row
        })
        .collect();
    for col in 0..n {
        let piv = (col..n).max_by(|&x, &y| m[x][col].abs().total_cmp(&m[y][col].abs())).unwrap();
        m.swap(col, piv);
        let d = m[col][col];
        assert!(d != 0.0, "singular matrix in oracle inverse");
        for v in m[col].iter_mut() {
            *v /= d;
        }
        let pivot_row = m[col].clone();
        for (r, row) in m.iter_mut().enumerate() {
            if r != col && row[col] != 0.0 {
                let f = row[col];
                for (x, p) in row.iter_mut().zip(&pivot_row) {
                    *x -= f * p;
                }
            }
        }
    }
    m.into_iter().map(|r| r[n..].to_vec()).collect()
}

/// Dense solve through the explicit inverse.
pub fn dense_solve(a: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    let inv = invert(a);
    inv.iter().map(|r| r.iter().zip(b).map(|(x, y)| x * y).sum()).collect()
}

/// Test quantities `[v, v_x, v_y, τx, τy, div τ]`.
pub type Prim = [f64; 6];

/// The test inner product written directly as a bilinear form.
pub fn norm_bilinear(variant: NormVariant, eps: f64, a: [f64; 2], area: f64, x: &Prim, y: &Prim) -> f64 {
    let c_tau2 = (1.0 / eps).min(1.0 / area);
    let c_v2 = (eps / area).min(1.0);
    let adv = |p: &Prim| a[0] * p[1] + a[1] * p[2];
    match variant {
        NormVariant::Proposed | NormVariant::ProposedPlain => {
            let ct2 = if variant == NormVariant::Proposed { c_tau2 } else { 1.0 / eps };
            eps * (x[5] - adv(x)) * (y[5] - adv(y))
                + ct2 * ((x[3] + eps * x[1]) * (y[3] + eps * y[1]) + (x[4] + eps * x[2]) * (y[4] + eps * y[2]))
                + eps * x[0] * y[0]
                + eps * (x[1] * y[1] + x[2] * y[2])
        }
        NormVariant::MeshDependent => {
            c_v2 * x[0] * y[0]
                + eps * (x[1] * y[1] + x[2] * y[2])
                + adv(x) * adv(y)
                + c_tau2 * (x[3] * y[3] + x[4] * y[4])
                + x[5] * y[5]
        }
        NormVariant::QuasiOptimal => {
            (x[5] - adv(x)) * (y[5] - adv(y))
                + (x[3] / eps + x[1]) * (y[3] / eps + y[1])
                + (x[4] / eps + x[2]) * (y[4] / eps + y[2])
                + x[0] * y[0]
        }
    }
}

/// Monomial test space `s^i t^j`, `s, t ∈ [-1, 1]`, for each of `v`, `τx`,
/// `τy`. Returns the primitive quantities of every test function at a
/// physical point of the cell with lower-left corner `x0` and size `h`.
fn test_primitives(r: usize, x0: Point, h: [f64; 2], p: Point) -> Vec<Prim> {
    let s = 2.0 * (p[0] - x0[0]) / h[0] - 1.0;
    let t = 2.0 * (p[1] - x0[1]) / h[1] - 1.0;
    let mono = |z: f64, k: usize| if k == 0 { 1.0 } else { z.powi(k as i32) };
    let dmono = |z: f64, k: usize| if k == 0 { 0.0 } else { k as f64 * z.powi(k as i32 - 1) };
    let m = r + 1;
    let mut scalar = Vec::with_capacity(m * m);
    for j in 0..m {
        for i in 0..m {
            scalar.push([
                mono(s, i) * mono(t, j),
                dmono(s, i) * mono(t, j) * 2.0 / h[0],
                mono(s, i) * dmono(t, j) * 2.0 / h[1],
            ]);
        }
    }
    let mut out = Vec::with_capacity(3 * m * m);
    out.extend(scalar.iter().map(|f| [f[0], f[1], f[2], 0.0, 0.0, 0.0]));
    out.extend(scalar.iter().map(|f| [0.0, 0.0, 0.0, f[0], 0.0, f[1]]));
    out.extend(scalar.iter().map(|f| [0.0, 0.0, 0.0, 0.0, f[0], f[2]]));
    out
}

/// Dense normal equations `A = BᵀG⁻¹B`, `b = BᵀG⁻¹l` over the full trial
/// numbering of `spaces`.
pub struct OracleSystem {
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
}

pub struct OracleInput<'a> {
    pub mesh: &'a QuadMesh,
    pub spaces: &'a TrialSpaces,
    pub variant: NormVariant,
    pub eps: f64,
    pub enrichment: usize,
    pub convection: &'a dyn Fn(Point) -> [f64; 2],
    pub forcing: &'a dyn Fn(Point) -> f64,
}

fn on_segment(p: Point, a: Point, b: Point) -> Option<f64> {
    let len = ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt();
    let t = ((p[0] - a[0]) * (b[0] - a[0]) + (p[1] - a[1]) * (b[1] - a[1])) / (len * len);
    let q = [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])];
    let off = ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt();
    (off < 1e-12 * len.max(1.0) && (-1e-12..=1.0 + 1e-12).contains(&t)).then_some(t)
}

/// Assembles the oracle system. Panics on anything but a small conforming
/// mesh.
pub fn oracle_assemble(inp: &OracleInput<'_>) -> OracleSystem {
    let mesh = inp.mesh;
    let spaces = inp.spaces;
    let p = spaces.degree;
    assert!(mesh.num_active() <= 16 && p <= 2, "oracle is limited to tiny problems");
    assert!(mesh.hanging_vertices().is_empty(), "oracle needs a conforming mesh");
    let q = p + 1;
    let r = p + inp.enrichment;
    let n = spaces.n_dofs();
    let (gx, gw) = golub_welsch(p + inp.enrichment + 6);
    let field = NodalBasis::new(&lobatto(p));
    let nf = (p + 1) * (p + 1);
    let off_u = spaces.block_range(Block::U).start;
    let off_s = spaces.block_range(Block::Sigma).start;
    let off_h = spaces.block_range(Block::UHat).start;
    let off_f = spaces.block_range(Block::Flux).start;
    let cells = mesh.active_cells();
    let pos_of = |cell: usize| cells.iter().position(|&c| c == cell).unwrap();

    let nt = 3 * (r + 1) * (r + 1);
    let mut b_cells: Vec<Vec<Vec<f64>>> = vec![vec![vec![0.0; n]; nt]; cells.len()];
    let mut l_cells: Vec<Vec<f64>> = vec![vec![0.0; nt]; cells.len()];
    let mut g_cells: Vec<Vec<Vec<f64>>> = vec![vec![vec![0.0; nt]; nt]; cells.len()];

    for (pos, &cell) in cells.iter().enumerate() {
        let rect = mesh.cell_rect(cell);
        let (x0, h) = ([rect.x0, rect.y0], [rect.width(), rect.height()]);
        let area = rect.area();
        let ud = spaces.u.cell_dofs(pos);
        let sd = spaces.sigma.cell_dofs(pos);
        for (i, &xi) in gx.iter().enumerate() {
            for (j, &eta) in gx.iter().enumerate() {
                let pt = [rect.x0 + xi * h[0], rect.y0 + eta * h[1]];
                let w = gw[i] * gw[j] * area;
                let a = (inp.convection)(pt);
                let f = (inp.forcing)(pt);
                let tp = test_primitives(r, x0, h, pt);
                let (fx, _) = field.eval(xi);
                let (fy, _) = field.eval(eta);
                for (ta, pa) in tp.iter().enumerate() {
                    for (tb, pb) in tp.iter().enumerate() {
                        g_cells[pos][ta][tb] += w * norm_bilinear(inp.variant, inp.eps, a, area, pa, pb);
                    }
                    l_cells[pos][ta] += w * f * pa[0];
                    let u_fun = pa[5] - a[0] * pa[1] - a[1] * pa[2];
                    let sx_fun = pa[3] + inp.eps * pa[1];
                    let sy_fun = pa[4] + inp.eps * pa[2];
                    for k in 0..nf {
                        let phi = fx[k % (p + 1)] * fy[k / (p + 1)];
                        b_cells[pos][ta][off_u + ud[k]] += w * phi * u_fun;
                        b_cells[pos][ta][off_s + sd[k]] += w * phi * sx_fun;
                        b_cells[pos][ta][off_s + sd[nf + k]] += w * phi * sy_fun;
                    }
                }
            }
        }
    }

    // skeleton terms through the jumps
    let uhat_pts = spaces.uhat.points();
    let flux_pts = spaces.flux.points();
    for (e_id, e) in mesh.skeleton().iter().enumerate() {
        let (a, b) = (mesh.vertices()[e.vertices[0]], mesh.vertices()[e.vertices[1]]);
        let len = ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt();
        let mut uh: Vec<(f64, usize)> = uhat_pts
            .iter()
            .enumerate()
            .filter_map(|(d, &pt)| on_segment(pt, a, b).map(|t| (t, d)))
            .collect();
        uh.sort_by(|x, y| x.0.total_cmp(&y.0));
        assert_eq!(uh.len(), q + 1, "edge {e_id} trace nodes");
        let uh_basis = NodalBasis::new(&uh.iter().map(|x| x.0).collect::<Vec<_>>());
        let mut fl: Vec<(f64, usize)> = (e_id * (q + 1)..(e_id + 1) * (q + 1))
            .map(|d| (on_segment(flux_pts[d], a, b).expect("flux node on edge"), d))
            .collect();
        fl.sort_by(|x, y| x.0.total_cmp(&y.0));
        let fl_basis = NodalBasis::new(&fl.iter().map(|x| x.0).collect::<Vec<_>>());
        let normal = e.orientation.normal;
        for (g, &t) in gx.iter().enumerate() {
            let pt = [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])];
            let ds = gw[g] * len;
            let (uv, _) = uh_basis.eval(t);
            let (fv, _) = fl_basis.eval(t);
            for side in e.cells.iter().flatten() {
                let sgn = if side.cell == e.orientation.master { 1.0 } else { -1.0 };
                let pos = pos_of(side.cell);
                let rect = mesh.cell_rect(side.cell);
                let tp = test_primitives(r, [rect.x0, rect.y0], [rect.width(), rect.height()], pt);
                for (ta, pa) in tp.iter().enumerate() {
                    // jump of τ·n and of v
                    let tn = sgn * (pa[3] * normal[0] + pa[4] * normal[1]);
                    let vj = sgn * pa[0];
                    for (k, &(_, d)) in uh.iter().enumerate() {
                        b_cells[pos][ta][off_h + d] -= ds * uv[k] * tn;
                    }
                    for (k, &(_, d)) in fl.iter().enumerate() {
                        b_cells[pos][ta][off_f + d] += ds * fv[k] * vj;
                    }
                }
            }
        }
    }

    let mut a_glob = vec![vec![0.0; n]; n];
    let mut b_glob = vec![0.0; n];
    for pos in 0..cells.len() {
        let g = &g_cells[pos];
        let ginv = invert(g);
        let bk = &b_cells[pos];
        // y = G⁻¹ B, z = G⁻¹ l, each with one step of iterative refinement
        let refine = |rhs: &dyn Fn(usize) -> f64| -> Vec<f64> {
            let apply = |x: &[f64], i: usize| (0..nt).map(|k| ginv[i][k] * x[k]).sum::<f64>();
            let rv: Vec<f64> = (0..nt).map(rhs).collect();
            let mut x: Vec<f64> = (0..nt).map(|i| apply(&rv, i)).collect();
            let res: Vec<f64> = (0..nt).map(|i| rv[i] - (0..nt).map(|k| g[i][k] * x[k]).sum::<f64>()).collect();
            for (i, xi) in x.iter_mut().enumerate() {
                *xi += apply(&res, i);
            }
            x
        };
        let cols: Vec<Vec<f64>> = (0..n).map(|c| refine(&|i| bk[i][c])).collect();
        let y: Vec<Vec<f64>> = (0..nt).map(|i| (0..n).map(|c| cols[c][i]).collect()).collect();
        let z = refine(&|i| l_cells[pos][i]);
        let active: Vec<usize> = (0..n).filter(|&c| (0..nt).any(|i| bk[i][c] != 0.0)).collect();
        for &c1 in &active {
            for &c2 in &active {
                a_glob[c1][c2] += (0..nt).map(|i| bk[i][c1] * y[i][c2]).sum::<f64>();
            }
            b_glob[c1] += (0..nt).map(|i| bk[i][c1] * z[i]).sum::<f64>();
        }
    }
    OracleSystem { a: a_glob, b: b_glob }
}

/// Solves the oracle system with boundary values imposed by elimination.
/// Only Dirichlet and zero constraints are supported.
pub fn oracle_solve(sys: &OracleSystem, spaces: &TrialSpaces, datum: &dyn Fn(Point) -> f64) -> Vec<f64> {
    let n = spaces.n_dofs();
    let mut fixed: Vec<Option<f64>> = vec![None; n];
    for block in [Block::UHat, Block::Flux] {
        let off = spaces.block_range(block).start;
        for (&d, c) in spaces.map(block).constraints() {
            fixed[off + d] = Some(match c {
                Constraint::Dirichlet => datum(spaces.map(block).points()[d]),
                Constraint::Zero => 0.0,
                Constraint::Hanging(_) => panic!("oracle does not handle hanging nodes"),
            });
        }
    }
    let free: Vec<usize> = (0..n).filter(|&i| fixed[i].is_none()).collect();
    let af: Vec<Vec<f64>> = free.iter().map(|&i| free.iter().map(|&j| sys.a[i][j]).collect()).collect();
    let bf: Vec<f64> = free
        .iter()
        .map(|&i| sys.b[i] - (0..n).filter_map(|j| fixed[j].map(|g| sys.a[i][j] * g)).sum::<f64>())
        .collect();
    let xf = dense_solve(&af, &bf);
    let mut x: Vec<f64> = fixed.iter().map(|v| v.unwrap_or(0.0)).collect();
    for (k, &i) in free.iter().enumerate() {
        x[i] = xf[k];
    }
    x
}

/// Second-order central-difference `div(a u - ε grad u)` at `p`. Rejects
/// points closer than `2h` to the boundary of `bounds = [x0, y0, x1, y1]`.
pub fn fd_operator(
    u: &dyn Fn(Point) -> f64,
    a: &dyn Fn(Point) -> [f64; 2],
    eps: f64,
    p: Point,
    h: f64,
    bounds: [f64; 4],
) -> Result<f64, String> {
    let m = 2.0 * h;
    if p[0] - m < bounds[0] || p[0] + m > bounds[2] || p[1] - m < bounds[1] || p[1] + m > bounds[3] {
        return Err(format!("point {p:?} is within 2h of the boundary"));
    }
    let flux = |q: Point, k: usize| a(q)[k] * u(q);
    let (xp, xm) = ([p[0] + h, p[1]], [p[0] - h, p[1]]);
    let (yp, ym) = ([p[0], p[1] + h], [p[0], p[1] - h]);
    let div = (flux(xp, 0) - flux(xm, 0) + flux(yp, 1) - flux(ym, 1)) / (2.0 * h);
    let lap = (u(xp) + u(xm) + u(yp) + u(ym) - 4.0 * u(p)) / (h * h);
    Ok(div - eps * lap)
}

/// Largest `|x_ij - y_ij|` over the largest `|y_ij|`.
pub fn max_relative_difference(x: &[Vec<f64>], y: &[Vec<f64>]) -> f64 {
    let scale = y.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    let diff = x.iter().flatten().zip(y.iter().flatten()).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    diff / scale.max(f64::MIN_POSITIVE)
}
