use proptest::prelude::*;

use ultraweak::adapt::{CycleRecord, RunHistory};
use ultraweak::forms::{NormVariant, TestNorm};
use ultraweak::mesh::{all_dirichlet, QuadMesh, Rect};
use ultraweak::normprobe::{generalized_extremes, probe_sweep, ProbeRecord, ProbeSetup};
use ultraweak::problems::example1;
use ultraweak::report::{
    mesh_svg, observed_rate, read_history, read_probe, write_history, write_mesh_vtk, write_probe,
    write_solution_vtk, FileConfig, RunConfig,
};
use ultraweak::solver::{solve, Discretization};

fn finite() -> impl Strategy<Value = f64> {
    prop_oneof![any::<f64>().prop_filter("finite", |v| v.is_finite()), 1e-300f64..1e300]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn history_csv_round_trips_bit_for_bit(vals in prop::collection::vec((finite(), finite(), finite()), 1..12)) {
        let records: Vec<CycleRecord> = vals
            .iter()
            .enumerate()
            .map(|(i, &(a, b, c))| CycleRecord {
                cycle: i,
                ncells: 4 << i,
                ndof: 100 * i + 7,
                l2_u: a,
                eps_l2_sigma: b,
                eta: c,
                ratio_u_sigma: a / b,
                ratio_eta_u: c / a,
                wall_ms: 0.25,
            })
            .collect();
        let history = RunHistory {
            problem: "ex1".into(),
            eps: 1e-2,
            norm: NormVariant::Proposed,
            degree: 2,
            records: records.clone(),
        };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("history.csv");
        write_history(&path, &history).unwrap();
        let back = read_history(&path).unwrap();
        prop_assert_eq!(back.len(), records.len());
        for (x, y) in back.iter().zip(&records) {
            prop_assert_eq!(x.l2_u.to_bits(), y.l2_u.to_bits());
            prop_assert_eq!(x.eps_l2_sigma.to_bits(), y.eps_l2_sigma.to_bits());
            prop_assert_eq!(x.eta.to_bits(), y.eta.to_bits());
            prop_assert_eq!((x.cycle, x.ncells, x.ndof), (y.cycle, y.ncells, y.ndof));
        }
    }

    #[test]
    fn svg_has_one_rect_per_active_cell(picks in prop::collection::vec(0usize..1000, 0..6)) {
        let mut mesh = QuadMesh::rectangle(Rect::new(-1.0, 0.0, 1.0, 1.0), 2, 1, all_dirichlet()).unwrap();
        for k in picks {
            let cells = mesh.active_cells().to_vec();
            mesh.refine(&[cells[k % cells.len()]]).unwrap();
        }
        let svg = mesh_svg(&mesh, 400.0);
        prop_assert_eq!(svg.matches("<rect").count(), mesh.num_active());
        prop_assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
    }
}

#[test]
fn probe_csv_round_trips() {
    let records = vec![
        ProbeRecord {
            norm: "proposed".into(),
            eps: 1e-4,
            p: 1,
            mesh: 4,
            lambda_min: 0.123_456_789_012_345_67,
            lambda_max: 1.0,
            ratio: 1.0 / 0.123_456_789_012_345_67,
        },
        ProbeRecord { norm: "md".into(), eps: 1.0, p: 2, mesh: 8, lambda_min: 3e-17, lambda_max: 2.5, ratio: 2.5 / 3e-17 },
    ];
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("probe.csv");
    write_probe(&path, &records).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("norm,eps,p,mesh,lambda_min,lambda_max,ratio"));
    assert_eq!(read_probe(&path).unwrap(), records);
}

#[test]
fn vtk_counts_match_the_mesh() {
    let problem = example1(1.0).unwrap();
    let mut mesh = problem.mesh().unwrap();
    mesh.refine(&[mesh.active_cells()[5]]).unwrap();
    let norm = TestNorm::new(NormVariant::Proposed, 1.0).unwrap();
    let sol = solve(&mesh, &problem, &norm, Discretization::new(1, 3)).unwrap();
    let eta = sol.indicators_for(&sol.coefficients);
    let n = mesh.num_active();

    let mut buf = Vec::new();
    write_solution_vtk(&mut buf, &mesh, &sol, &eta).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(text.contains(&format!("POINTS {} double", 4 * n)));
    assert!(text.contains(&format!("CELLS {} {}", n, 5 * n)));
    assert!(text.contains(&format!("CELL_DATA {n}")));

    let mut buf = Vec::new();
    write_mesh_vtk(&mut buf, &mesh).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(text.contains(&format!("CELL_TYPES {n}")));
}

#[test]
fn observed_rate_examples() {
    assert!((observed_rate(1.0, 0.25, 1.0, 0.5).unwrap() - 2.0).abs() < 1e-14);
    assert!((observed_rate(8.0, 1.0, 0.1, 0.05).unwrap() - 3.0).abs() < 1e-12);
    assert!(observed_rate(1.0, 0.0, 1.0, 0.5).is_none());
    assert!(observed_rate(1.0, 0.5, 1.0, 1.0).is_none());
}

#[test]
fn config_precedence_and_validation() {
    let file = FileConfig::from_toml("problem = \"ex2\"\neps = 0.001\nbudget = 5000\nuniform = true\n").unwrap();
    let cli = FileConfig { eps: Some(0.5), norm: Some("qo".into()), ..FileConfig::default() };
    let cfg = RunConfig::resolve(cli, Some(file)).unwrap();
    assert_eq!(cfg.problem, "ex2");
    assert_eq!(cfg.eps, 0.5);
    assert_eq!(cfg.budget, 5000);
    assert_eq!(cfg.norm, NormVariant::QuasiOptimal);
    assert!(cfg.uniform);
    assert_eq!(cfg.dp, 3);

    assert!(FileConfig::from_toml("colour = 3\n").is_err());
    let bad = FileConfig { fraction: Some(0.0), ..FileConfig::default() };
    assert!(RunConfig::resolve(bad, None).is_err());
    let bad = FileConfig { eps: Some(-1.0), ..FileConfig::default() };
    assert!(RunConfig::resolve(bad, None).is_err());
}

#[test]
fn generalized_extremes_ignore_simultaneous_permutation() {
    let n = 5;
    let s = faer::Mat::<f64>::from_fn(n, n, |i, j| if i == j { 2.0 + i as f64 } else { 0.3 / (1 + i + j) as f64 });
    let m = faer::Mat::<f64>::from_fn(n, n, |i, j| if i == j { 1.0 + 0.5 * j as f64 } else { 0.05 });
    let perm = [3, 0, 4, 1, 2];
    let sp = faer::Mat::<f64>::from_fn(n, n, |i, j| s[(perm[i], perm[j])]);
    let mp = faer::Mat::<f64>::from_fn(n, n, |i, j| m[(perm[i], perm[j])]);
    let (a, b) = generalized_extremes(&s, &m).unwrap();
    let (c, d) = generalized_extremes(&sp, &mp).unwrap();
    assert!((a - c).abs() < 1e-12 * b && (b - d).abs() < 1e-12 * b);
    assert!(0.0 < a && a <= b);
}

#[test]
fn probe_sweep_orders_records_and_keeps_ratios_above_one() {
    let setup = ProbeSetup { mesh: 2, ..ProbeSetup::default() };
    let variants = [NormVariant::Proposed, NormVariant::MeshDependent];
    let eps = [1.0, 1e-2];
    let r = probe_sweep(&variants, &eps, &setup).unwrap();
    assert_eq!(r.len(), 4);
    for (k, rec) in r.iter().enumerate() {
        assert_eq!(rec.norm, variants[k / 2].name());
        assert_eq!(rec.eps, eps[k % 2]);
        assert!(rec.lambda_min > 0.0 && rec.ratio >= 1.0);
        assert!((rec.ratio - rec.lambda_max / rec.lambda_min).abs() <= 1e-12 * rec.ratio);
    }
}
