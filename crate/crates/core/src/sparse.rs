//! Compressed sparse row storage for the assembled normal equations, with a
//! sparse Cholesky solve and a Jacobi-preconditioned CG fallback.

use faer::linalg::solvers::Solve;
use faer::sparse::{SparseColMat, SymbolicSparseColMat};
use faer::{Mat, Side};

use crate::error::{DpgError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Square matrix with the given per-row column sets and zero values.
    /// Rows are sorted and deduplicated.
    pub fn from_pattern(mut rows: Vec<Vec<usize>>) -> Self {
        let n = rows.len();
        let mut row_ptr = Vec::with_capacity(n + 1);
        row_ptr.push(0);
        let mut col_idx = Vec::new();
        for row in rows.iter_mut() {
            row.sort_unstable();
            row.dedup();
            col_idx.extend_from_slice(row);
            row_ptr.push(col_idx.len());
        }
        let values = vec![0.0; col_idx.len()];
        CsrMatrix { n, row_ptr, col_idx, values }
    }

    /// Pattern of `Σ_e scatter(dofs_e × dofs_e)`.
    pub fn from_element_dofs<'a>(n: usize, elements: impl IntoIterator<Item = &'a [usize]>) -> Self {
        let mut rows: Vec<Vec<usize>> = vec![Vec::new(); n];
        for dofs in elements {
            for &i in dofs {
                rows[i].extend_from_slice(dofs);
            }
        }
        Self::from_pattern(rows)
    }

    pub fn from_dense(a: &[Vec<f64>]) -> Self {
        let rows = a.iter().map(|r| (0..r.len()).filter(|&j| r[j] != 0.0).collect()).collect();
        let mut m = Self::from_pattern(rows);
        for (i, r) in a.iter().enumerate() {
            for (j, &v) in r.iter().enumerate() {
                if v != 0.0 {
                    m.add(i, j, v);
                }
            }
        }
        m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.col_idx.len()
    }

    fn position(&self, i: usize, j: usize) -> Option<usize> {
        let row = &self.col_idx[self.row_ptr[i]..self.row_ptr[i + 1]];
        row.binary_search(&j).ok().map(|k| self.row_ptr[i] + k)
    }

    /// Adds `v` at `(i, j)`, which must be in the pattern.
    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let k = self.position(i, j).unwrap_or_else(|| panic!("({i}, {j}) is outside the pattern"));
        self.values[k] += v;
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.position(i, j).map_or(0.0, |k| self.values[k])
    }

    /// Adds a dense local matrix at the given global indices.
    pub fn scatter(&mut self, dofs: &[usize], local: impl Fn(usize, usize) -> f64) {
        for (a, &i) in dofs.iter().enumerate() {
            let start = self.row_ptr[i];
            let row = &self.col_idx[start..self.row_ptr[i + 1]];
            for (b, &j) in dofs.iter().enumerate() {
                let k = start + row.binary_search(&j).expect("entry outside the pattern");
                self.values[k] += local(a, b);
            }
        }
    }

    /// Iterates `(row, col, value)` over stored entries.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n).flat_map(move |i| {
            (self.row_ptr[i]..self.row_ptr[i + 1]).map(move |k| (i, self.col_idx[k], self.values[k]))
        })
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| {
                (self.row_ptr[i]..self.row_ptr[i + 1]).map(|k| self.values[k] * x[self.col_idx[k]]).sum()
            })
            .collect()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.n]; self.n];
        for (i, j, v) in self.entries() {
            d[i][j] += v;
        }
        d
    }

    /// Largest `|a_ij - a_ji|` relative to the largest entry.
    pub fn symmetry_defect(&self) -> f64 {
        let scale = self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if scale == 0.0 {
            return 0.0;
        }
        self.entries().map(|(i, j, v)| (v - self.get(j, i)).abs()).fold(0.0, f64::max) / scale
    }

    /// Restriction to the given rows and columns (both in the given order).
    pub fn submatrix(&self, idx: &[usize]) -> Vec<Vec<f64>> {
        let mut pos = vec![usize::MAX; self.n];
        for (k, &i) in idx.iter().enumerate() {
            pos[i] = k;
        }
        let mut out = vec![vec![0.0; idx.len()]; idx.len()];
        for (a, &i) in idx.iter().enumerate() {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                let b = pos[self.col_idx[k]];
                if b != usize::MAX {
                    out[a][b] = self.values[k];
                }
            }
        }
        out
    }

    /// Solves `A x = b` for symmetric positive definite `A`, by sparse
    /// Cholesky with a fill-reducing ordering, falling back to conjugate
    /// gradients. Returns the solution and the relative residual.
    pub fn solve_spd(&self, b: &[f64]) -> Result<(Vec<f64>, f64)> {
        let bnorm = norm2(b);
        if self.n == 0 {
            return Ok((Vec::new(), 0.0));
        }
        if bnorm == 0.0 {
            return Ok((vec![0.0; self.n], 0.0));
        }
        let x = match self.cholesky(b) {
            Some(x) => x,
            None => self.conjugate_gradient(b, 1e-12, 20 * self.n + 1000)?,
        };
        let mut x = x;
        let mut rel = relative_residual(self, &x, b);
        // iterative refinement for badly scaled systems
        for _ in 0..3 {
            if rel <= 1e-12 {
                break;
            }
            let r: Vec<f64> = self.matvec(&x).iter().zip(b).map(|(ax, bi)| bi - ax).collect();
            let Some(dx) = self.cholesky(&r) else { break };
            let trial: Vec<f64> = x.iter().zip(&dx).map(|(a, d)| a + d).collect();
            let trial_rel = relative_residual(self, &trial, b);
            if trial_rel >= rel {
                break;
            }
            x = trial;
            rel = trial_rel;
        }
        if !rel.is_finite() {
            return Err(DpgError::SingularSystem("non-finite solution".into()));
        }
        Ok((x, rel))
    }

    fn to_faer(&self) -> SparseColMat<usize, f64> {
        // Symmetric: the CSR arrays double as CSC arrays of the same matrix.
        let symbolic = SymbolicSparseColMat::new_checked(
            self.n,
            self.n,
            self.row_ptr.clone(),
            None,
            self.col_idx.clone(),
        );
        SparseColMat::new(symbolic, self.values.clone())
    }

    fn cholesky(&self, b: &[f64]) -> Option<Vec<f64>> {
        let a = self.to_faer();
        let llt = a.sp_cholesky(Side::Lower).ok()?;
        let rhs = Mat::<f64>::from_fn(self.n, 1, |i, _| b[i]);
        let x = llt.solve(&rhs);
        let out: Vec<f64> = (0..self.n).map(|i| x[(i, 0)]).collect();
        out.iter().all(|v| v.is_finite()).then_some(out)
    }

    /// Jacobi-preconditioned conjugate gradients to relative residual `tol`.
    pub fn conjugate_gradient(&self, b: &[f64], tol: f64, max_iter: usize) -> Result<Vec<f64>> {
        let diag = self.diagonal();
        if diag.iter().any(|&d| d <= 0.0) {
            return Err(DpgError::SingularSystem("non-positive diagonal entry".into()));
        }
        let bnorm = norm2(b);
        let mut x = vec![0.0; self.n];
        let mut r = b.to_vec();
        let mut z: Vec<f64> = r.iter().zip(&diag).map(|(r, d)| r / d).collect();
        let mut p = z.clone();
        let mut rz = dot(&r, &z);
        for _ in 0..max_iter {
            let ap = self.matvec(&p);
            let pap = dot(&p, &ap);
            if pap <= 0.0 {
                return Err(DpgError::SingularSystem("matrix is not positive definite".into()));
            }
            let alpha = rz / pap;
            for i in 0..self.n {
                x[i] += alpha * p[i];
                r[i] -= alpha * ap[i];
            }
            if norm2(&r) <= tol * bnorm {
                return Ok(x);
            }
            for i in 0..self.n {
                z[i] = r[i] / diag[i];
            }
            let rz_new = dot(&r, &z);
            let beta = rz_new / rz;
            rz = rz_new;
            for i in 0..self.n {
                p[i] = z[i] + beta * p[i];
            }
        }
        Err(DpgError::SingularSystem("conjugate gradients did not converge".into()))
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn relative_residual(a: &CsrMatrix, x: &[f64], b: &[f64]) -> f64 {
    let bn = norm2(b);
    let r: Vec<f64> = a.matvec(x).iter().zip(b).map(|(ax, bi)| ax - bi).collect();
    if bn == 0.0 {
        norm2(&r)
    } else {
        norm2(&r) / bn
    }
}
