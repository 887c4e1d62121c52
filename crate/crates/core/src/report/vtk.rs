use std::io::Write;

use crate::error::Result;
use crate::mesh::QuadMesh;
use crate::solver::{evaluate_sigma, evaluate_u, BlockedSolution};

/// Active cells as a legacy-format unstructured grid of VTK quads.
pub fn write_mesh_vtk(w: &mut impl Write, mesh: &QuadMesh) -> Result<()> {
    let verts = mesh.vertices();
    writeln!(w, "# vtk DataFile Version 3.0\nquadrilateral mesh\nASCII\nDATASET UNSTRUCTURED_GRID")?;
    writeln!(w, "POINTS {} double", verts.len())?;
    for v in verts {
        writeln!(w, "{:e} {:e} 0", v[0], v[1])?;
    }
    let cells = mesh.active_cells();
    writeln!(w, "CELLS {} {}", cells.len(), 5 * cells.len())?;
    for &c in cells {
        let v = mesh.cell(c).vertices;
        writeln!(w, "4 {} {} {} {}", v[0], v[1], v[2], v[3])?;
    }
    writeln!(w, "CELL_TYPES {}", cells.len())?;
    for _ in cells {
        writeln!(w, "9")?;
    }
    Ok(())
}

/// Discontinuous solution export: every cell gets its own four corners with
/// `u_h` as point data, and `u_h`, `|σ_h|` at the centre plus `η_K` as cell
/// data.
pub fn write_solution_vtk(
    w: &mut impl Write,
    mesh: &QuadMesh,
    solution: &BlockedSolution,
    indicators: &[f64],
) -> Result<()> {
    let cells = mesh.active_cells();
    let n = cells.len();
    let corners = [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)];
    writeln!(w, "# vtk DataFile Version 3.0\nultra-weak DPG solution\nASCII\nDATASET UNSTRUCTURED_GRID")?;
    writeln!(w, "POINTS {} double", 4 * n)?;
    for &c in cells {
        let r = mesh.cell_rect(c);
        for &(xi, eta) in &corners {
            let p = r.map(xi, eta);
            writeln!(w, "{:e} {:e} 0", p[0], p[1])?;
        }
    }
    writeln!(w, "CELLS {} {}", n, 5 * n)?;
    for k in 0..n {
        writeln!(w, "4 {} {} {} {}", 4 * k, 4 * k + 1, 4 * k + 2, 4 * k + 3)?;
    }
    writeln!(w, "CELL_TYPES {n}")?;
    for _ in 0..n {
        writeln!(w, "9")?;
    }
    writeln!(w, "POINT_DATA {}\nSCALARS u double 1\nLOOKUP_TABLE default", 4 * n)?;
    for pos in 0..n {
        for &(xi, eta) in &corners {
            writeln!(w, "{:e}", evaluate_u(mesh, solution, pos, xi, eta))?;
        }
    }
    writeln!(w, "CELL_DATA {n}\nSCALARS u_center double 1\nLOOKUP_TABLE default")?;
    for pos in 0..n {
        writeln!(w, "{:e}", evaluate_u(mesh, solution, pos, 0.5, 0.5))?;
    }
    writeln!(w, "SCALARS sigma_magnitude double 1\nLOOKUP_TABLE default")?;
    for pos in 0..n {
        let s = evaluate_sigma(solution, pos, 0.5, 0.5);
        writeln!(w, "{:e}", s[0].hypot(s[1]))?;
    }
    writeln!(w, "SCALARS eta double 1\nLOOKUP_TABLE default")?;
    for pos in 0..n {
        writeln!(w, "{:e}", indicators.get(pos).copied().unwrap_or(f64::NAN))?;
    }
    Ok(())
}
