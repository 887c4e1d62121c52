//! Hierarchical quadrilateral meshes over an axis-aligned rectangle.
//!
//! Cells are stored in a refinement tree: refining a cell deactivates it and
//! appends four children. Positions are tracked on an integer lattice with
//! [`MAX_LEVEL`] bits of resolution per coarse cell, so vertex and edge
//! matching never depends on floating-point comparisons.
//!
//! After every refinement the mesh is closed to be 1-irregular (neighbouring
//! active cells differ by at most one level) and the active skeleton is
//! rebuilt as the finest partition of all active cell sides.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use crate::error::{DpgError, Result};
use crate::Point;

/// Deepest refinement level the integer lattice can represent.
pub const MAX_LEVEL: u32 = 30;

/// Axis-aligned rectangle `[x0, x1] × [y0, y1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl Rect {
    pub fn new(x0: f64, y0: f64, x1: f64, y1: f64) -> Self {
        Rect { x0, y0, x1, y1 }
    }

    pub fn unit() -> Self {
        Rect::new(0.0, 0.0, 1.0, 1.0)
    }

    pub fn width(&self) -> f64 {
        self.x1 - self.x0
    }

    pub fn height(&self) -> f64 {
        self.y1 - self.y0
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn center(&self) -> Point {
        [0.5 * (self.x0 + self.x1), 0.5 * (self.y0 + self.y1)]
    }

    /// Maps reference coordinates in `[0,1]²` to the rectangle.
    pub fn map(&self, xi: f64, eta: f64) -> Point {
        [self.x0 + xi * self.width(), self.y0 + eta * self.height()]
    }

    pub fn contains(&self, p: Point) -> bool {
        p[0] >= self.x0 && p[0] <= self.x1 && p[1] >= self.y0 && p[1] <= self.y1
    }

    fn is_valid(&self) -> bool {
        [self.x0, self.y0, self.x1, self.y1].iter().all(|v| v.is_finite())
            && self.x1 > self.x0
            && self.y1 > self.y0
    }
}

/// Boundary condition carried by a boundary edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundaryKind {
    Dirichlet,
    Neumann,
}

/// Classifies a boundary edge from its midpoint.
pub type BoundaryRule = Arc<dyn Fn(Point) -> BoundaryKind + Send + Sync>;

/// Every boundary edge is Dirichlet.
pub fn all_dirichlet() -> BoundaryRule {
    Arc::new(|_| BoundaryKind::Dirichlet)
}

/// Local side numbering of a cell, counterclockwise from the bottom.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    Bottom = 0,
    Right = 1,
    Top = 2,
    Left = 3,
}

impl Side {
    pub const ALL: [Side; 4] = [Side::Bottom, Side::Right, Side::Top, Side::Left];

    pub fn index(self) -> usize {
        self as usize
    }

    /// Outward unit normal of the side.
    pub fn normal(self) -> [f64; 2] {
        match self {
            Side::Bottom => [0.0, -1.0],
            Side::Right => [1.0, 0.0],
            Side::Top => [0.0, 1.0],
            Side::Left => [-1.0, 0.0],
        }
    }

    pub fn is_horizontal(self) -> bool {
        matches!(self, Side::Bottom | Side::Top)
    }

    /// Reference point on the side at parameter `t ∈ [0,1]`, measured in the
    /// direction of increasing global coordinate.
    pub fn reference_point(self, t: f64) -> (f64, f64) {
        match self {
            Side::Bottom => (t, 0.0),
            Side::Right => (1.0, t),
            Side::Top => (t, 1.0),
            Side::Left => (0.0, t),
        }
    }

    /// Local corner numbers (BL=0, BR=1, TR=2, TL=3) at the start and end of
    /// the side, in increasing-coordinate order.
    pub fn corners(self) -> [usize; 2] {
        match self {
            Side::Bottom => [0, 1],
            Side::Right => [1, 2],
            Side::Top => [3, 2],
            Side::Left => [0, 3],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Axis {
    /// Line `y = const`.
    Horizontal,
    /// Line `x = const`.
    Vertical,
}

/// A straight segment on the integer lattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LatticeSegment {
    pub axis: Axis,
    pub line: u64,
    pub start: u64,
    pub end: u64,
}

impl LatticeSegment {
    pub fn contains(&self, other: &LatticeSegment) -> bool {
        self.axis == other.axis
            && self.line == other.line
            && self.start <= other.start
            && other.end <= self.end
    }
}

#[derive(Debug, Clone)]
pub struct Cell {
    pub level: u32,
    /// Column and row of the cell in the uniform grid of its level.
    pub index: [u64; 2],
    /// Corner vertices: bottom-left, bottom-right, top-right, top-left.
    pub vertices: [usize; 4],
    pub parent: Option<usize>,
    /// Children in the same corner order as `vertices`.
    pub children: Option<[usize; 4]>,
    pub active: bool,
}

/// Orientation of a skeleton edge: its master cell and the unit normal that
/// points out of the master.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeOrientation {
    pub master: usize,
    pub normal: [f64; 2],
}

/// One active cell seen from a skeleton edge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeSide {
    pub cell: usize,
    pub side: Side,
    /// Sub-interval of the cell side covered by the edge, in side parameter.
    pub span: [f64; 2],
}

#[derive(Debug, Clone)]
pub struct SkeletonEdge {
    /// End vertices in increasing-coordinate order.
    pub vertices: [usize; 2],
    pub segment: LatticeSegment,
    /// Master first; the second entry is `None` on the boundary.
    pub cells: [Option<EdgeSide>; 2],
    pub boundary: Option<BoundaryKind>,
    pub orientation: EdgeOrientation,
}

impl SkeletonEdge {
    pub fn is_boundary(&self) -> bool {
        self.cells[1].is_none()
    }

    /// `+1` for the master cell, `-1` for the neighbour.
    pub fn sign_for(&self, cell: usize) -> f64 {
        if self.orientation.master == cell {
            1.0
        } else {
            -1.0
        }
    }

    pub fn side_of(&self, cell: usize) -> Option<EdgeSide> {
        self.cells.iter().flatten().copied().find(|s| s.cell == cell)
    }
}

/// Hierarchical 1-irregular quadrilateral mesh.
#[derive(Clone)]
pub struct QuadMesh {
    bounds: Rect,
    nx: usize,
    ny: usize,
    cells: Vec<Cell>,
    lookup: HashMap<(u32, u64, u64), usize>,
    vertices: Vec<Point>,
    vertex_keys: HashMap<[u64; 2], usize>,
    vertex_lattice: Vec<[u64; 2]>,
    active: Vec<usize>,
    edges: Vec<SkeletonEdge>,
    side_edges: Vec<[Vec<usize>; 4]>,
    rule: BoundaryRule,
    generation: u64,
}

impl fmt::Debug for QuadMesh {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("QuadMesh")
            .field("bounds", &self.bounds)
            .field("coarse", &(self.nx, self.ny))
            .field("active_cells", &self.active.len())
            .field("vertices", &self.vertices.len())
            .field("edges", &self.edges.len())
            .field("generation", &self.generation)
            .finish()
    }
}

impl QuadMesh {
    /// Uniform `nx × ny` grid on `bounds`; boundary edges are classified by
    /// `rule` applied to their midpoints.
    pub fn rectangle(bounds: Rect, nx: usize, ny: usize, rule: BoundaryRule) -> Result<Self> {
        if !bounds.is_valid() {
            return Err(DpgError::invalid(format!("degenerate rectangle {bounds:?}")));
        }
        if nx == 0 || ny == 0 {
            return Err(DpgError::invalid("mesh needs nx >= 1 and ny >= 1"));
        }
        if nx > (1 << 20) || ny > (1 << 20) {
            return Err(DpgError::invalid("coarse grid too large"));
        }
        let mut mesh = QuadMesh {
            bounds,
            nx,
            ny,
            cells: Vec::with_capacity(nx * ny),
            lookup: HashMap::new(),
            vertices: Vec::new(),
            vertex_keys: HashMap::new(),
            vertex_lattice: Vec::new(),
            active: Vec::new(),
            edges: Vec::new(),
            side_edges: Vec::new(),
            rule,
            generation: 0,
        };
        for j in 0..ny as u64 {
            for i in 0..nx as u64 {
                mesh.push_cell(0, [i, j], None);
            }
        }
        mesh.rebuild();
        Ok(mesh)
    }

    pub fn bounds(&self) -> Rect {
        self.bounds
    }

    pub fn coarse_dims(&self) -> (usize, usize) {
        (self.nx, self.ny)
    }

    /// Incremented by every refinement; solutions remember the value they
    /// were computed on.
    pub fn generation(&self) -> u64 {
        self.generation
    }

    pub fn boundary_rule(&self) -> &BoundaryRule {
        &self.rule
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn cell(&self, id: usize) -> &Cell {
        &self.cells[id]
    }

    /// Active cell ids in ascending order.
    pub fn active_cells(&self) -> &[usize] {
        &self.active
    }

    pub fn num_active(&self) -> usize {
        self.active.len()
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn vertex_lattice(&self, v: usize) -> [u64; 2] {
        self.vertex_lattice[v]
    }

    pub fn skeleton(&self) -> &[SkeletonEdge] {
        &self.edges
    }

    /// Skeleton edges along one side of an active cell, ordered by increasing
    /// coordinate. One edge unless the neighbour across the side is finer.
    pub fn side_edges(&self, cell: usize, side: Side) -> &[usize] {
        &self.side_edges[cell][side.index()]
    }

    fn lattice_step(level: u32) -> u64 {
        1u64 << (MAX_LEVEL - level)
    }

    /// Lattice segment covered by a side of a cell.
    pub fn side_segment(&self, cell: usize, side: Side) -> LatticeSegment {
        let c = &self.cells[cell];
        let s = Self::lattice_step(c.level);
        let (x0, y0) = (c.index[0] * s, c.index[1] * s);
        let (x1, y1) = (x0 + s, y0 + s);
        match side {
            Side::Bottom => LatticeSegment { axis: Axis::Horizontal, line: y0, start: x0, end: x1 },
            Side::Top => LatticeSegment { axis: Axis::Horizontal, line: y1, start: x0, end: x1 },
            Side::Left => LatticeSegment { axis: Axis::Vertical, line: x0, start: y0, end: y1 },
            Side::Right => LatticeSegment { axis: Axis::Vertical, line: x1, start: y0, end: y1 },
        }
    }

    pub fn cell_rect(&self, id: usize) -> Rect {
        let c = &self.cells[id];
        let scale = (1u64 << c.level) as f64;
        let w = self.bounds.width() / (self.nx as f64 * scale);
        let h = self.bounds.height() / (self.ny as f64 * scale);
        let x0 = self.bounds.x0 + c.index[0] as f64 * w;
        let y0 = self.bounds.y0 + c.index[1] as f64 * h;
        // Snap the far edges to the domain bounds so rectangles tile exactly.
        let x1 = if (c.index[0] + 1) as f64 == self.nx as f64 * scale {
            self.bounds.x1
        } else {
            self.bounds.x0 + (c.index[0] + 1) as f64 * w
        };
        let y1 = if (c.index[1] + 1) as f64 == self.ny as f64 * scale {
            self.bounds.y1
        } else {
            self.bounds.y0 + (c.index[1] + 1) as f64 * h
        };
        Rect::new(x0, y0, x1, y1)
    }

    fn lattice_to_point(&self, key: [u64; 2]) -> Point {
        let fx = self.nx as f64 * (1u64 << MAX_LEVEL) as f64;
        let fy = self.ny as f64 * (1u64 << MAX_LEVEL) as f64;
        let x = if key[0] as f64 == fx {
            self.bounds.x1
        } else {
            self.bounds.x0 + self.bounds.width() * (key[0] as f64 / fx)
        };
        let y = if key[1] as f64 == fy {
            self.bounds.y1
        } else {
            self.bounds.y0 + self.bounds.height() * (key[1] as f64 / fy)
        };
        [x, y]
    }

    fn vertex_at(&mut self, key: [u64; 2]) -> usize {
        if let Some(&v) = self.vertex_keys.get(&key) {
            return v;
        }
        let id = self.vertices.len();
        let p = self.lattice_to_point(key);
        self.vertices.push(p);
        self.vertex_lattice.push(key);
        self.vertex_keys.insert(key, id);
        id
    }

    fn push_cell(&mut self, level: u32, index: [u64; 2], parent: Option<usize>) -> usize {
        let s = Self::lattice_step(level);
        let (x0, y0) = (index[0] * s, index[1] * s);
        let vertices = [
            self.vertex_at([x0, y0]),
            self.vertex_at([x0 + s, y0]),
            self.vertex_at([x0 + s, y0 + s]),
            self.vertex_at([x0, y0 + s]),
        ];
        let id = self.cells.len();
        self.cells.push(Cell { level, index, vertices, parent, children: None, active: true });
        self.lookup.insert((level, index[0], index[1]), id);
        id
    }

    fn split(&mut self, id: usize) -> Result<()> {
        let (level, [i, j]) = {
            let c = &self.cells[id];
            (c.level, c.index)
        };
        if !self.cells[id].active {
            return Ok(());
        }
        if level >= MAX_LEVEL {
            return Err(DpgError::invalid(format!("cell {id} is at the maximum refinement level")));
        }
        let l = level + 1;
        let kids = [
            self.push_cell(l, [2 * i, 2 * j], Some(id)),
            self.push_cell(l, [2 * i + 1, 2 * j], Some(id)),
            self.push_cell(l, [2 * i + 1, 2 * j + 1], Some(id)),
            self.push_cell(l, [2 * i, 2 * j + 1], Some(id)),
        ];
        let c = &mut self.cells[id];
        c.children = Some(kids);
        c.active = false;
        Ok(())
    }

    /// Same-level neighbour slot across `side`, if it lies inside the domain.
    fn neighbor_index(&self, id: usize, side: Side) -> Option<(u32, u64, u64)> {
        let c = &self.cells[id];
        let nx = self.nx as u64 * (1u64 << c.level);
        let ny = self.ny as u64 * (1u64 << c.level);
        let [i, j] = c.index;
        match side {
            Side::Bottom if j > 0 => Some((c.level, i, j - 1)),
            Side::Top if j + 1 < ny => Some((c.level, i, j + 1)),
            Side::Left if i > 0 => Some((c.level, i - 1, j)),
            Side::Right if i + 1 < nx => Some((c.level, i + 1, j)),
            _ => None,
        }
    }

    /// Children of a cell that touch the given side of it.
    fn children_on(children: [usize; 4], side: Side) -> [usize; 2] {
        let [bl, br, tr, tl] = children;
        match side {
            Side::Bottom => [bl, br],
            Side::Right => [br, tr],
            Side::Top => [tl, tr],
            Side::Left => [bl, tl],
        }
    }

    fn opposite(side: Side) -> Side {
        match side {
            Side::Bottom => Side::Top,
            Side::Top => Side::Bottom,
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        }
    }

    /// True when an active neighbour across some side is two or more levels
    /// finer than the active cell `id`.
    fn violates_irregularity(&self, id: usize) -> bool {
        Side::ALL.iter().any(|&side| {
            let Some(key) = self.neighbor_index(id, side) else { return false };
            let Some(&nb) = self.lookup.get(&key) else { return false };
            let Some(kids) = self.cells[nb].children else { return false };
            Self::children_on(kids, Self::opposite(side))
                .iter()
                .any(|&k| self.cells[k].children.is_some())
        })
    }

    /// Refines every marked active cell isotropically, then refines further
    /// cells until the mesh is 1-irregular again.
    pub fn refine(&mut self, marked: &[usize]) -> Result<()> {
        for &id in marked {
            if id >= self.cells.len() || !self.cells[id].active {
                return Err(DpgError::invalid(format!("cell {id} is not an active cell")));
            }
        }
        if marked.is_empty() {
            return Ok(());
        }
        let mut sorted = marked.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        for id in sorted {
            self.split(id)?;
        }
        loop {
            let offenders: Vec<usize> = (0..self.cells.len())
                .filter(|&id| self.cells[id].active && self.violates_irregularity(id))
                .collect();
            if offenders.is_empty() {
                break;
            }
            for id in offenders {
                self.split(id)?;
            }
        }
        self.rebuild();
        self.generation += 1;
        Ok(())
    }

    /// Refines every active cell once.
    pub fn refine_uniform(&mut self) -> Result<()> {
        let all = self.active.clone();
        self.refine(&all)
    }

    fn rebuild(&mut self) {
        self.active = (0..self.cells.len()).filter(|&i| self.cells[i].active).collect();
        self.build_skeleton();
    }

    fn build_skeleton(&mut self) {
        struct Piece {
            start: u64,
            end: u64,
            cell: usize,
            side: Side,
        }
        // Per lattice line: pieces from cells below/left and above/right.
        let mut lines: BTreeMap<(Axis, u64), [Vec<Piece>; 2]> = BTreeMap::new();
        for &id in &self.active {
            for side in Side::ALL {
                let seg = self.side_segment(id, side);
                let slot = match side {
                    Side::Top | Side::Right => 0,
                    Side::Bottom | Side::Left => 1,
                };
                lines.entry((seg.axis, seg.line)).or_default()[slot].push(Piece {
                    start: seg.start,
                    end: seg.end,
                    cell: id,
                    side,
                });
            }
        }

        let mut side_edges: Vec<[Vec<usize>; 4]> = vec![Default::default(); self.cells.len()];
        let mut edges = Vec::new();
        let mut pending = Vec::new();
        for ((axis, line), mut groups) in lines {
            for g in groups.iter_mut() {
                g.sort_by_key(|p| p.start);
            }
            let mut breaks: Vec<u64> =
                groups.iter().flatten().flat_map(|p| [p.start, p.end]).collect();
            breaks.sort_unstable();
            breaks.dedup();
            let mut cursor = [0usize, 0usize];
            for w in breaks.windows(2) {
                let (a, b) = (w[0], w[1]);
                let mut found: [Option<&Piece>; 2] = [None, None];
                for slot in 0..2 {
                    let group = &groups[slot];
                    while cursor[slot] < group.len() && group[cursor[slot]].end <= a {
                        cursor[slot] += 1;
                    }
                    if let Some(p) = group.get(cursor[slot]) {
                        if p.start <= a && b <= p.end {
                            found[slot] = Some(p);
                        }
                    }
                }
                let mut sides: Vec<EdgeSide> = found
                    .iter()
                    .flatten()
                    .map(|p| {
                        let len = (p.end - p.start) as f64;
                        EdgeSide {
                            cell: p.cell,
                            side: p.side,
                            span: [(a - p.start) as f64 / len, (b - p.start) as f64 / len],
                        }
                    })
                    .collect();
                if sides.is_empty() {
                    continue;
                }
                sides.sort_by_key(|s| s.cell);
                let master = sides[0];
                let segment = LatticeSegment { axis, line, start: a, end: b };
                let keys = match axis {
                    Axis::Horizontal => [[a, line], [b, line]],
                    Axis::Vertical => [[line, a], [line, b]],
                };
                pending.push((segment, keys, sides.get(1).copied(), master));
            }
        }
        for (segment, keys, other, master) in pending {
            let vertices = [self.vertex_keys[&keys[0]], self.vertex_keys[&keys[1]]];
            let boundary = if other.is_none() {
                let (p, q) = (self.vertices[vertices[0]], self.vertices[vertices[1]]);
                Some((self.rule)([0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])]))
            } else {
                None
            };
            let id = edges.len();
            for s in std::iter::once(master).chain(other) {
                side_edges[s.cell][s.side.index()].push(id);
            }
            edges.push(SkeletonEdge {
                vertices,
                segment,
                cells: [Some(master), other],
                boundary,
                orientation: EdgeOrientation { master: master.cell, normal: master.side.normal() },
            });
        }
        for sides in side_edges.iter_mut() {
            for list in sides.iter_mut() {
                list.sort_by_key(|&e| edges[e].segment.start);
            }
        }
        self.edges = edges;
        self.side_edges = side_edges;
    }

    /// True when every pair of active cells sharing part of an edge differs by
    /// at most one level.
    pub fn is_one_irregular(&self) -> bool {
        self.edges.iter().all(|e| match e.cells {
            [Some(a), Some(b)] => self.cells[a.cell].level.abs_diff(self.cells[b.cell].level) <= 1,
            _ => true,
        })
    }

    /// Vertices lying strictly inside a side of some active cell.
    pub fn hanging_vertices(&self) -> Vec<usize> {
        let mut out = Vec::new();
        for e in &self.edges {
            if let [Some(a), Some(b)] = e.cells {
                let coarse = match self.cells[a.cell].level.cmp(&self.cells[b.cell].level) {
                    std::cmp::Ordering::Less => a,
                    std::cmp::Ordering::Greater => b,
                    std::cmp::Ordering::Equal => continue,
                };
                // The interior end of the fine edge sits at the coarse midpoint.
                let v = if coarse.span[0] == 0.0 { e.vertices[1] } else { e.vertices[0] };
                out.push(v);
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Total area of active cells.
    pub fn active_area(&self) -> f64 {
        self.active.iter().map(|&c| self.cell_rect(c).area()).sum()
    }

    /// Smallest width (x-extent) among active cells touching `x = x_line`.
    pub fn min_width_touching_x(&self, x_line: f64, tol: f64) -> Option<f64> {
        self.active
            .iter()
            .map(|&c| self.cell_rect(c))
            .filter(|r| (r.x0 - x_line).abs() <= tol || (r.x1 - x_line).abs() <= tol)
            .map(|r| r.width())
            .reduce(f64::min)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit(n: usize) -> QuadMesh {
        QuadMesh::rectangle(Rect::unit(), n, n, all_dirichlet()).unwrap()
    }

    #[test]
    fn grid_counts() {
        let m = unit(2);
        assert_eq!(m.num_active(), 4);
        assert_eq!(m.vertices().len(), 9);
        assert_eq!(m.skeleton().len(), 12);
        assert_eq!(m.skeleton().iter().filter(|e| !e.is_boundary()).count(), 4);

        let m = unit(1);
        assert_eq!((m.num_active(), m.vertices().len(), m.skeleton().len()), (1, 4, 4));
        assert!(m.skeleton().iter().all(|e| e.is_boundary()));

        let m = QuadMesh::rectangle(Rect::new(-1.0, -1.0, 1.0, 1.0), 4, 4, all_dirichlet()).unwrap();
        assert_eq!(m.num_active(), 16);
        for &c in m.active_cells() {
            assert!((m.cell_rect(c).area() - 0.25).abs() < 1e-15);
        }
    }

    #[test]
    fn degenerate_rectangle_is_rejected() {
        assert!(QuadMesh::rectangle(Rect::new(0.0, 0.0, 0.0, 1.0), 1, 1, all_dirichlet()).is_err());
        assert!(QuadMesh::rectangle(Rect::unit(), 0, 1, all_dirichlet()).is_err());
    }

    #[test]
    fn refine_all_and_single() {
        let mut m = unit(2);
        let all = m.active_cells().to_vec();
        m.refine(&all).unwrap();
        assert_eq!(m.num_active(), 16);

        let mut m = unit(2);
        let first = m.active_cells()[0];
        m.refine(&[first]).unwrap();
        assert_eq!(m.num_active(), 7);
        assert_eq!(m.hanging_vertices().len(), 2);
        // The refined cell's two interior sides are split into two sub-edges.
        let split: usize = m
            .skeleton()
            .iter()
            .filter(|e| {
                if let [Some(a), Some(b)] = e.cells {
                    m.cell(a.cell).level != m.cell(b.cell).level
                } else {
                    false
                }
            })
            .count();
        assert_eq!(split, 4);
    }

    #[test]
    fn empty_marking_is_identity() {
        let mut m = unit(1);
        let g = m.generation();
        m.refine(&[]).unwrap();
        assert_eq!(m.num_active(), 1);
        assert_eq!(m.generation(), g);
    }

    #[test]
    fn inactive_cell_cannot_be_marked() {
        let mut m = unit(1);
        m.refine(&[0]).unwrap();
        assert!(m.refine(&[0]).is_err());
    }

    #[test]
    fn closure_restores_irregularity() {
        let mut m = unit(2);
        // Repeatedly refine the cell touching the origin.
        for _ in 0..4 {
            let target = *m
                .active_cells()
                .iter()
                .find(|&&c| {
                    let r = m.cell_rect(c);
                    r.x0 == 0.0 && r.y0 == 0.0
                })
                .unwrap();
            m.refine(&[target]).unwrap();
            assert!(m.is_one_irregular());
        }
        assert!((m.active_area() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn normals_point_out_of_master() {
        let mut m = unit(3);
        m.refine(&[4]).unwrap();
        for e in m.skeleton() {
            let master = e.cells[0].unwrap();
            assert_eq!(master.cell, e.orientation.master);
            let r = m.cell_rect(master.cell);
            let c = r.center();
            let (p, q) = (m.vertices()[e.vertices[0]], m.vertices()[e.vertices[1]]);
            let mid = [0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])];
            let out = [mid[0] - c[0], mid[1] - c[1]];
            let n = e.orientation.normal;
            assert!(out[0] * n[0] + out[1] * n[1] > 0.0);
            if let Some(other) = e.cells[1] {
                assert!(master.cell < other.cell);
            }
        }
    }

    #[test]
    fn boundary_markers_follow_rule() {
        let rule: BoundaryRule = Arc::new(|p: Point| {
            if p[0] == 0.0 || p[0] == 1.0 {
                BoundaryKind::Dirichlet
            } else {
                BoundaryKind::Neumann
            }
        });
        let mut m = QuadMesh::rectangle(Rect::unit(), 2, 2, rule).unwrap();
        m.refine(&[0]).unwrap();
        for e in m.skeleton().iter().filter(|e| e.is_boundary()) {
            let horizontal = e.segment.axis == Axis::Horizontal;
            let expect = if horizontal { BoundaryKind::Neumann } else { BoundaryKind::Dirichlet };
            assert_eq!(e.boundary, Some(expect));
        }
    }

    #[test]
    fn skeleton_covers_each_side_once() {
        let mut m = unit(2);
        m.refine(&[0]).unwrap();
        let kid = m.cell(0).children.unwrap()[2];
        m.refine(&[kid]).unwrap();
        for &c in m.active_cells() {
            for side in Side::ALL {
                let seg = m.side_segment(c, side);
                let covered: u64 = m
                    .side_edges(c, side)
                    .iter()
                    .map(|&e| m.skeleton()[e].segment.end - m.skeleton()[e].segment.start)
                    .sum();
                assert_eq!(covered, seg.end - seg.start);
            }
        }
    }
}
