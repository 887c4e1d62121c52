use std::collections::{BTreeMap, HashMap};
use std::ops::Range;

use super::basis::Lagrange1d;
use crate::error::{DpgError, Result};
use crate::mesh::{BoundaryKind, LatticeSegment, QuadMesh, Side};
use crate::Point;

/// The discrete spaces of the method.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SpaceKind {
    /// Broken scalar polynomials of degree `p` per variable (for `u`).
    FieldScalar,
    /// Broken vector polynomials, each component of degree `p` (for `σ`).
    FieldVector,
    /// Continuous piecewise polynomials on the skeleton (for `û`).
    TraceContinuous,
    /// Independent polynomials on each skeleton edge (for `σ̂ₙ`).
    TraceEdgewise,
    /// Broken enriched test pairs `(v, τ)`.
    BrokenTest,
}

/// How a constrained degree of freedom obtains its value.
#[derive(Debug, Clone, PartialEq)]
pub enum Constraint {
    /// Affine combination of other DOFs of the same map (hanging nodes).
    Hanging(Vec<(usize, f64)>),
    /// Interpolates the Dirichlet datum at the DOF's node.
    Dirichlet,
    /// Fixed to zero.
    Zero,
}

/// Global numbering of one discrete space over the active cells.
#[derive(Debug, Clone)]
pub struct DofMap {
    kind: SpaceKind,
    degree: usize,
    n_dofs: usize,
    cell_dofs: Vec<Vec<usize>>,
    constraints: BTreeMap<usize, Constraint>,
    points: Vec<Point>,
}

impl DofMap {
    /// Numbers `kind` of the given polynomial degree over the active cells of
    /// `mesh`. With `with_boundary` the constraint table also fixes `û` on
    /// Dirichlet edges and `σ̂ₙ` on Neumann edges.
    pub fn build(mesh: &QuadMesh, kind: SpaceKind, degree: usize, with_boundary: bool) -> Result<Self> {
        match kind {
            SpaceKind::FieldScalar => Ok(Self::broken(mesh, kind, degree, 1)),
            SpaceKind::FieldVector => Ok(Self::broken(mesh, kind, degree, 2)),
            SpaceKind::BrokenTest => Ok(Self::broken(mesh, kind, degree, 3)),
            SpaceKind::TraceContinuous => {
                if degree < 1 {
                    return Err(DpgError::invalid("continuous trace space needs degree >= 1"));
                }
                Ok(Self::continuous_trace(mesh, degree, with_boundary))
            }
            SpaceKind::TraceEdgewise => {
                if degree < 1 {
                    return Err(DpgError::invalid("edgewise trace space needs degree >= 1"));
                }
                Ok(Self::edgewise_trace(mesh, degree, with_boundary))
            }
        }
    }

    fn broken(mesh: &QuadMesh, kind: SpaceKind, degree: usize, components: usize) -> Self {
        let local = components * (degree + 1) * (degree + 1);
        let n = mesh.num_active();
        let cell_dofs = (0..n).map(|k| (k * local..(k + 1) * local).collect()).collect();
        DofMap {
            kind,
            degree,
            n_dofs: n * local,
            cell_dofs,
            constraints: BTreeMap::new(),
            points: Vec::new(),
        }
    }

    fn continuous_trace(mesh: &QuadMesh, q: usize, with_boundary: bool) -> Self {
        let line = Lagrange1d::new(q);
        let interior = q - 1;
        let mut vertex_dof: HashMap<usize, usize> = HashMap::new();
        let mut segment_dof: HashMap<LatticeSegment, usize> = HashMap::new();
        let mut points: Vec<Point> = Vec::new();
        let mut cell_dofs = Vec::with_capacity(mesh.num_active());

        for &c in mesh.active_cells() {
            let cell = mesh.cell(c);
            let rect = mesh.cell_rect(c);
            let mut local = Vec::with_capacity(4 * q);
            for &v in &cell.vertices {
                let id = *vertex_dof.entry(v).or_insert_with(|| {
                    points.push(mesh.vertices()[v]);
                    points.len() - 1
                });
                local.push(id);
            }
            for side in Side::ALL {
                let seg = mesh.side_segment(c, side);
                let first = *segment_dof.entry(seg).or_insert_with(|| {
                    let first = points.len();
                    for &t in &line.nodes()[1..q] {
                        let (xi, eta) = side.reference_point(t);
                        points.push(rect.map(xi, eta));
                    }
                    first
                });
                local.extend(first..first + interior);
            }
            cell_dofs.push(local);
        }

        let mut constraints = BTreeMap::new();
        // Hanging nodes: the fine side's nodes follow the coarse side's polynomial.
        for e in mesh.skeleton() {
            let [Some(a), Some(b)] = e.cells else { continue };
            let (la, lb) = (mesh.cell(a.cell).level, mesh.cell(b.cell).level);
            if la == lb {
                continue;
            }
            let (coarse, fine) = if la < lb { (a, b) } else { (b, a) };
            let cseg = mesh.side_segment(coarse.cell, coarse.side);
            let cfirst = segment_dof[&cseg];
            let cverts = coarse.side.corners().map(|k| vertex_dof[&mesh.cell(coarse.cell).vertices[k]]);
            let mut masters = Vec::with_capacity(q + 1);
            masters.push(cverts[0]);
            masters.extend(cfirst..cfirst + interior);
            masters.push(cverts[1]);

            let fseg = mesh.side_segment(fine.cell, fine.side);
            let ffirst = segment_dof[&fseg];
            let fverts = fine.side.corners().map(|k| vertex_dof[&mesh.cell(fine.cell).vertices[k]]);
            let [s0, s1] = coarse.span;
            let mut slaves: Vec<(usize, f64)> = line.nodes()[1..q]
                .iter()
                .enumerate()
                .map(|(k, &t)| (ffirst + k, s0 + t * (s1 - s0)))
                .collect();
            // the fine edge end that lies inside the coarse side
            if s0 > 0.0 {
                slaves.push((fverts[0], s0));
            } else {
                slaves.push((fverts[1], s1));
            }
            for (dof, t) in slaves {
                let weights = line.values(t);
                let row: Vec<(usize, f64)> = masters
                    .iter()
                    .zip(weights)
                    .filter(|&(_, w)| w != 0.0)
                    .map(|(&m, w)| (m, w))
                    .collect();
                constraints.insert(dof, Constraint::Hanging(row));
            }
        }

        if with_boundary {
            for e in mesh.skeleton() {
                if e.boundary != Some(BoundaryKind::Dirichlet) {
                    continue;
                }
                let side = e.cells[0].expect("boundary edge has a cell");
                let seg = mesh.side_segment(side.cell, side.side);
                let first = segment_dof[&seg];
                for dof in first..first + interior {
                    constraints.insert(dof, Constraint::Dirichlet);
                }
                for v in e.vertices {
                    constraints.insert(vertex_dof[&v], Constraint::Dirichlet);
                }
            }
        }

        DofMap {
            kind: SpaceKind::TraceContinuous,
            degree: q,
            n_dofs: points.len(),
            cell_dofs,
            constraints,
            points,
        }
    }

    fn edgewise_trace(mesh: &QuadMesh, q: usize, with_boundary: bool) -> Self {
        let line = Lagrange1d::new(q);
        let per_edge = q + 1;
        let mut points = Vec::with_capacity(mesh.skeleton().len() * per_edge);
        for e in mesh.skeleton() {
            let (p0, p1) = (mesh.vertices()[e.vertices[0]], mesh.vertices()[e.vertices[1]]);
            for &t in line.nodes() {
                points.push([p0[0] + t * (p1[0] - p0[0]), p0[1] + t * (p1[1] - p0[1])]);
            }
        }
        let cell_dofs = mesh
            .active_cells()
            .iter()
            .map(|&c| {
                Side::ALL
                    .iter()
                    .flat_map(|&s| mesh.side_edges(c, s).iter())
                    .flat_map(|&e| e * per_edge..(e + 1) * per_edge)
                    .collect()
            })
            .collect();
        let mut constraints = BTreeMap::new();
        if with_boundary {
            for (id, e) in mesh.skeleton().iter().enumerate() {
                if e.boundary == Some(BoundaryKind::Neumann) {
                    for dof in id * per_edge..(id + 1) * per_edge {
                        constraints.insert(dof, Constraint::Zero);
                    }
                }
            }
        }
        DofMap {
            kind: SpaceKind::TraceEdgewise,
            degree: q,
            n_dofs: points.len(),
            cell_dofs,
            constraints,
            points,
        }
    }

    pub fn kind(&self) -> SpaceKind {
        self.kind
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn n_dofs(&self) -> usize {
        self.n_dofs
    }

    /// Global DOFs of the active cell at position `pos` in
    /// [`QuadMesh::active_cells`], in local basis order.
    pub fn cell_dofs(&self, pos: usize) -> &[usize] {
        &self.cell_dofs[pos]
    }

    pub fn constraints(&self) -> &BTreeMap<usize, Constraint> {
        &self.constraints
    }

    /// Node location of each DOF (trace spaces only).
    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn n_unconstrained(&self) -> usize {
        self.n_dofs - self.constraints.len()
    }
}

/// Which block of the group variable a DOF belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Block {
    U,
    Sigma,
    UHat,
    Flux,
}

/// The trial space `S^p × S^p × Q^{p+1} × R^{p+1}` with a single global
/// numbering `[u | σ | û | σ̂ₙ]`.
#[derive(Debug, Clone)]
pub struct TrialSpaces {
    pub degree: usize,
    pub u: DofMap,
    pub sigma: DofMap,
    pub uhat: DofMap,
    pub flux: DofMap,
    offsets: [usize; 5],
}

impl TrialSpaces {
    /// Builds all four spaces for field degree `p` with boundary constraints.
    pub fn new(mesh: &QuadMesh, p: usize) -> Result<Self> {
        Self::with_boundary(mesh, p, true)
    }

    pub fn with_boundary(mesh: &QuadMesh, p: usize, with_boundary: bool) -> Result<Self> {
        let u = DofMap::build(mesh, SpaceKind::FieldScalar, p, with_boundary)?;
        let sigma = DofMap::build(mesh, SpaceKind::FieldVector, p, with_boundary)?;
        let uhat = DofMap::build(mesh, SpaceKind::TraceContinuous, p + 1, with_boundary)?;
        let flux = DofMap::build(mesh, SpaceKind::TraceEdgewise, p + 1, with_boundary)?;
        let mut offsets = [0; 5];
        for (k, n) in [u.n_dofs, sigma.n_dofs, uhat.n_dofs, flux.n_dofs].iter().enumerate() {
            offsets[k + 1] = offsets[k] + n;
        }
        Ok(TrialSpaces { degree: p, u, sigma, uhat, flux, offsets })
    }

    pub fn n_dofs(&self) -> usize {
        self.offsets[4]
    }

    pub fn block_range(&self, block: Block) -> Range<usize> {
        let k = block as usize;
        self.offsets[k]..self.offsets[k + 1]
    }

    pub fn map(&self, block: Block) -> &DofMap {
        match block {
            Block::U => &self.u,
            Block::Sigma => &self.sigma,
            Block::UHat => &self.uhat,
            Block::Flux => &self.flux,
        }
    }

    /// Global DOFs of one active cell in local trial order
    /// `[u, σx, σy, û, σ̂ₙ]`.
    pub fn cell_dofs(&self, pos: usize) -> Vec<usize> {
        let mut out = Vec::new();
        for (k, map) in [&self.u, &self.sigma, &self.uhat, &self.flux].iter().enumerate() {
            out.extend(map.cell_dofs(pos).iter().map(|d| d + self.offsets[k]));
        }
        out
    }

    /// Local trial block sizes for one cell: `(u, σ, û, σ̂ₙ)`.
    pub fn local_sizes(&self, pos: usize) -> [usize; 4] {
        [
            self.u.cell_dofs(pos).len(),
            self.sigma.cell_dofs(pos).len(),
            self.uhat.cell_dofs(pos).len(),
            self.flux.cell_dofs(pos).len(),
        ]
    }

    /// Number of DOFs left free after all constraints.
    pub fn n_free(&self) -> usize {
        [&self.u, &self.sigma, &self.uhat, &self.flux].iter().map(|m| m.n_unconstrained()).sum()
    }
}
