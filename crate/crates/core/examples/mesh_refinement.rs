//! Local refinement with 1-irregular closure. Refining toward the domain
//! centre three times forces coarse neighbours to split so no edge carries
//! more than one hanging vertex.

use ultraweak::mesh::{all_dirichlet, QuadMesh, Rect};

fn main() -> ultraweak::Result<()> {
    let mut mesh = QuadMesh::rectangle(Rect::unit(), 2, 2, all_dirichlet())?;
    for step in 1..=3 {
        // the active cell below and left of the centre
        let target = *mesh
            .active_cells()
            .iter()
            .find(|&&c| {
                let r = mesh.cell_rect(c);
                r.x1 == 0.5 && r.y1 == 0.5
            })
            .expect("a cell touches the centre");
        mesh.refine(&[target])?;
        println!(
            "step {step}: {:>3} cells, {:>3} skeleton edges, {:>2} hanging vertices, 1-irregular: {}",
            mesh.num_active(),
            mesh.skeleton().len(),
            mesh.hanging_vertices().len(),
            mesh.is_one_irregular()
        );
    }
    Ok(())
}
