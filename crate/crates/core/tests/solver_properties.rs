use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ultraweak::fespace::{Block, TensorBasis};
use ultraweak::forms::{NormVariant, TestNorm};
use ultraweak::mesh::{QuadMesh, Rect};
use ultraweak::problems::{example1, example3, Manufactured, ProblemSpec};
use ultraweak::solver::{estimate, solve, solve_full, Discretization, SolveOutput};

fn refined(problem: &ProblemSpec) -> QuadMesh {
    let mut mesh = problem.mesh().unwrap();
    mesh.refine(&[mesh.active_cells()[5]]).unwrap();
    mesh
}

fn run(problem: &ProblemSpec, mesh: &QuadMesh, variant: NormVariant, p: usize) -> SolveOutput {
    let norm = TestNorm::new(variant, problem.eps).unwrap();
    solve_full(mesh, problem, &norm, Discretization::new(p, 3)).unwrap()
}

#[test]
fn global_matrix_is_symmetric_and_positive_definite() {
    for eps in [1.0, 1e-2, 1e-4] {
        let problem = example1(eps).unwrap();
        let mesh = refined(&problem);
        for variant in NormVariant::ALL {
            let out = run(&problem, &mesh, variant, 1);
            let scale = out.system.full.diagonal().iter().fold(0.0f64, |m, v| m.max(v.abs()));
            assert!(out.system.full.symmetry_defect() <= 1e-13 * scale, "{variant} eps={eps}");
            // solve_full succeeds only through a successful Cholesky factorization
            assert!(out.solution.relative_residual <= 1e-10, "{variant} eps={eps}");
        }
    }
}

#[test]
fn normal_equations_are_satisfied() {
    let problem = example3(1e-2).unwrap();
    let mesh = problem.mesh_with(4, 4).unwrap();
    let out = run(&problem, &mesh, NormVariant::Proposed, 2);
    let ax = out.system.matrix.matvec(&out.solution.free);
    let bmax = out.system.rhs.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let rmax = ax.iter().zip(&out.system.rhs).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    assert!(rmax <= 1e-10 * bmax, "{rmax:e} vs {bmax:e}");
}

#[test]
fn solution_minimizes_the_residual() {
    let problem = example1(1e-2).unwrap();
    let mesh = refined(&problem);
    let out = run(&problem, &mesh, NormVariant::Proposed, 1);
    let sol = &out.solution;
    let eta = |c: &[f64]| sol.indicators_for(c).iter().map(|e| e * e).sum::<f64>().sqrt();
    let base = eta(&sol.coefficients);
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..10 {
        let w: Vec<f64> = (0..sol.n_free()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let dir = out.system.constraints.expand_homogeneous(&w);
        for t in [1e-3, -1e-3] {
            let moved: Vec<f64> = sol.coefficients.iter().zip(&dir).map(|(c, d)| c + t * d).collect();
            assert!(eta(&moved) >= base - 1e-10);
        }
    }
}

#[test]
fn estimator_is_additive_in_any_cell_order() {
    let problem = example1(1e-2).unwrap();
    let mesh = refined(&problem);
    let norm = TestNorm::new(NormVariant::Proposed, 1e-2).unwrap();
    let sol = solve(&mesh, &problem, &norm, Discretization::new(1, 3)).unwrap();
    let est = estimate(&mesh, &sol).unwrap();
    let mut order: Vec<usize> = (0..est.indicators.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for _ in 0..5 {
        order.shuffle(&mut rng);
        let total = order.iter().map(|&k| est.indicators[k].powi(2)).sum::<f64>().sqrt();
        assert!((total - est.total).abs() <= 1e-13 * est.total);
    }
}

#[test]
fn linear_solution_is_reproduced_exactly() {
    let problem = Manufactured {
        domain: Rect::new(-0.5, 0.0, 1.5, 1.0),
        eps: 1.0,
        convection: Arc::new(|_| [1.0, -0.5]),
        convection_divergence: Arc::new(|_| 0.0),
        u: Arc::new(|x| 0.3 + 2.0 * x[0] - x[1]),
        gradient: Arc::new(|_| [2.0, -1.0]),
        laplacian: Arc::new(|_| 0.0),
    }
    .build("linear")
    .unwrap();
    let mut mesh = problem.mesh_with(3, 2).unwrap();
    mesh.refine(&[mesh.active_cells()[0]]).unwrap();
    for p in [1, 2] {
        let out = run(&problem, &mesh, NormVariant::Proposed, p);
        let sol = &out.solution;
        let basis = TensorBasis::new(p);
        let (u, s) = (sol.block(Block::U), sol.block(Block::Sigma));
        let nf = basis.len();
        for (pos, &cell) in mesh.active_cells().iter().enumerate() {
            let rect = mesh.cell_rect(cell);
            let ud = sol.spaces.u.cell_dofs(pos);
            let sd = sol.spaces.sigma.cell_dofs(pos);
            for (k, &(a, b)) in basis.nodes().iter().enumerate() {
                let x = rect.map(a, b);
                assert!((u[ud[k]] - (problem.exact.as_ref().unwrap())(x)).abs() <= 1e-10);
                assert!((s[sd[k]] - 2.0).abs() <= 1e-10);
                assert!((s[sd[nf + k]] + 1.0).abs() <= 1e-10);
            }
        }
        assert!(estimate(&mesh, sol).unwrap().total <= 1e-9);
    }
}

#[test]
fn results_do_not_depend_on_thread_count() {
    let problem = example1(1e-2).unwrap();
    let mesh = refined(&problem);
    let norm = TestNorm::new(NormVariant::Proposed, 1e-2).unwrap();
    let disc = Discretization::new(2, 3);
    let many = solve(&mesh, &problem, &norm, disc).unwrap();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let one = pool.install(|| solve(&mesh, &problem, &norm, disc).unwrap());
    let scale = many.coefficients.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let diff = many.coefficients.iter().zip(&one.coefficients).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    assert!(diff <= 1e-13 * scale, "{diff:e}");
}
