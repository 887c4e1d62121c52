use std::fmt::Write;

use crate::mesh::QuadMesh;

/// Outline of the active cells, one `<rect>` per cell, `size` pixels across
/// the longer domain side.
pub fn mesh_svg(mesh: &QuadMesh, size: f64) -> String {
    let b = mesh.bounds();
    let scale = size / b.width().max(b.height());
    let (w, h) = (b.width() * scale, b.height() * scale);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.1}" height="{h:.1}" viewBox="0 0 {w:.3} {h:.3}">"#
    );
    for &c in mesh.active_cells() {
        let r = mesh.cell_rect(c);
        // y axis points down in SVG
        let _ = writeln!(
            s,
            r#"<rect x="{:.6}" y="{:.6}" width="{:.6}" height="{:.6}" fill="none" stroke="black" stroke-width="0.5"/>"#,
            (r.x0 - b.x0) * scale,
            (b.y1 - r.y1) * scale,
            r.width() * scale,
            r.height() * scale
        );
    }
    s.push_str("</svg>\n");
    s
}
