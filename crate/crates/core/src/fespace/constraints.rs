use super::dofmap::{Block, Constraint, TrialSpaces};
use crate::sparse::CsrMatrix;
use crate::Point;

/// A constrained DOF written in terms of free DOFs: `x_i = Σ c_k x_free[k] + offset`.
#[derive(Debug, Clone, PartialEq)]
pub struct Expansion {
    pub terms: Vec<(usize, f64)>,
    pub offset: f64,
}

/// Resolution of every global trial DOF into free unknowns.
#[derive(Debug, Clone)]
pub struct ConstraintMap {
    expansions: Vec<Expansion>,
    free_to_full: Vec<usize>,
}

enum Mark {
    Todo,
    Busy,
    Done,
}

impl ConstraintMap {
    /// Resolves hanging-node chains and boundary values. `dirichlet` is the
    /// datum interpolated at `û` nodes on Dirichlet edges.
    ///
    /// # Panics
    /// On a cyclic hanging-node constraint, which means the DOF map is broken.
    pub fn new(spaces: &TrialSpaces, dirichlet: &dyn Fn(Point) -> f64) -> Self {
        let n = spaces.n_dofs();
        let mut constrained: Vec<Option<(Block, &Constraint)>> = vec![None; n];
        for block in [Block::U, Block::Sigma, Block::UHat, Block::Flux] {
            let off = spaces.block_range(block).start;
            for (&k, c) in spaces.map(block).constraints() {
                constrained[off + k] = Some((block, c));
            }
        }
        let mut free_to_full = Vec::new();
        let mut expansions = vec![Expansion { terms: Vec::new(), offset: 0.0 }; n];
        for i in 0..n {
            if constrained[i].is_none() {
                expansions[i].terms.push((free_to_full.len(), 1.0));
                free_to_full.push(i);
            }
        }
        let mut marks: Vec<Mark> =
            constrained.iter().map(|c| if c.is_some() { Mark::Todo } else { Mark::Done }).collect();

        fn resolve(
            i: usize,
            spaces: &TrialSpaces,
            constrained: &[Option<(Block, &Constraint)>],
            marks: &mut [Mark],
            expansions: &mut [Expansion],
            dirichlet: &dyn Fn(Point) -> f64,
        ) {
            match marks[i] {
                Mark::Done => return,
                Mark::Busy => panic!("cyclic constraint through global DOF {i}"),
                Mark::Todo => {}
            }
            marks[i] = Mark::Busy;
            let (block, c) = constrained[i].expect("only constrained DOFs are pending");
            let off = spaces.block_range(block).start;
            let exp = match c {
                Constraint::Zero => Expansion { terms: Vec::new(), offset: 0.0 },
                Constraint::Dirichlet => {
                    let p = spaces.map(block).points()[i - off];
                    Expansion { terms: Vec::new(), offset: dirichlet(p) }
                }
                Constraint::Hanging(row) => {
                    let mut terms: Vec<(usize, f64)> = Vec::new();
                    let mut offset = 0.0;
                    for &(m, w) in row {
                        let g = off + m;
                        resolve(g, spaces, constrained, marks, expansions, dirichlet);
                        offset += w * expansions[g].offset;
                        for &(f, c) in &expansions[g].terms {
                            match terms.iter_mut().find(|t| t.0 == f) {
                                Some(t) => t.1 += w * c,
                                None => terms.push((f, w * c)),
                            }
                        }
                    }
                    terms.sort_by_key(|t| t.0);
                    Expansion { terms, offset }
                }
            };
            expansions[i] = exp;
            marks[i] = Mark::Done;
        }

        for i in 0..n {
            resolve(i, spaces, &constrained, &mut marks, &mut expansions, dirichlet);
        }
        ConstraintMap { expansions, free_to_full }
    }

    pub fn n_full(&self) -> usize {
        self.expansions.len()
    }

    pub fn n_free(&self) -> usize {
        self.free_to_full.len()
    }

    pub fn expansion(&self, full: usize) -> &Expansion {
        &self.expansions[full]
    }

    pub fn free_to_full(&self) -> &[usize] {
        &self.free_to_full
    }

    /// Full coefficient vector from free unknowns.
    pub fn expand(&self, free: &[f64]) -> Vec<f64> {
        self.expansions
            .iter()
            .map(|e| e.offset + e.terms.iter().map(|&(k, c)| c * free[k]).sum::<f64>())
            .collect()
    }

    /// Full vector in the homogeneous constrained space (boundary values zero).
    pub fn expand_homogeneous(&self, free: &[f64]) -> Vec<f64> {
        self.expansions.iter().map(|e| e.terms.iter().map(|&(k, c)| c * free[k]).sum()).collect()
    }
}

/// Eliminates constrained DOFs from a full symmetric system:
/// `A_f = Cᵀ A C`, `b_f = Cᵀ (b - A g)` with `x = C x_f + g`.
pub fn apply_constraints(map: &ConstraintMap, full: &CsrMatrix, rhs: &[f64]) -> (CsrMatrix, Vec<f64>) {
    let nf = map.n_free();
    let mut rows: Vec<Vec<usize>> = vec![Vec::new(); nf];
    for (i, j, _) in full.entries() {
        let (ei, ej) = (map.expansion(i), map.expansion(j));
        for &(a, _) in &ei.terms {
            rows[a].extend(ej.terms.iter().map(|t| t.0));
        }
    }
    let mut reduced = CsrMatrix::from_pattern(rows);
    let mut b = vec![0.0; nf];
    for (i, &bi) in rhs.iter().enumerate() {
        for &(a, c) in &map.expansion(i).terms {
            b[a] += c * bi;
        }
    }
    for (i, j, v) in full.entries() {
        let (ei, ej) = (map.expansion(i), map.expansion(j));
        for &(a, ca) in &ei.terms {
            for &(bb, cb) in &ej.terms {
                reduced.add(a, bb, ca * cb * v);
            }
            if ej.offset != 0.0 {
                b[a] -= ca * v * ej.offset;
            }
        }
    }
    (reduced, b)
}
