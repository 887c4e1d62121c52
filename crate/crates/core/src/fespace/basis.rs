use crate::quadrature::lobatto_nodes;

/// Nodal Lagrange basis of degree `n` on `[0,1]` with Gauss-Lobatto nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct Lagrange1d {
    nodes: Vec<f64>,
    denom: Vec<f64>,
}

impl Lagrange1d {
    pub fn new(degree: usize) -> Self {
        let nodes = lobatto_nodes(degree);
        let denom = (0..nodes.len())
            .map(|k| {
                nodes
                    .iter()
                    .enumerate()
                    .filter(|&(m, _)| m != k)
                    .map(|(_, &xm)| nodes[k] - xm)
                    .product()
            })
            .collect();
        Lagrange1d { nodes, denom }
    }

    pub fn degree(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Values of all basis functions at `t`.
    pub fn values(&self, t: f64) -> Vec<f64> {
        let n = self.nodes.len();
        (0..n)
            .map(|k| {
                let num: f64 = (0..n).filter(|&m| m != k).map(|m| t - self.nodes[m]).product();
                num / self.denom[k]
            })
            .collect()
    }

    /// Values and first derivatives of all basis functions at `t`.
    pub fn values_and_derivatives(&self, t: f64) -> (Vec<f64>, Vec<f64>) {
        let n = self.nodes.len();
        let mut vals = Vec::with_capacity(n);
        let mut ders = Vec::with_capacity(n);
        for k in 0..n {
            let mut v = 1.0;
            let mut d = 0.0;
            for m in (0..n).filter(|&m| m != k) {
                // product rule, accumulated left to right
                d = d * (t - self.nodes[m]) + v;
                v *= t - self.nodes[m];
            }
            vals.push(v / self.denom[k]);
            ders.push(d / self.denom[k]);
        }
        (vals, ders)
    }
}

/// Tensor-product nodal basis of degree `n` per variable on `[0,1]²`.
///
/// Function `a + (n+1)·b` is `ℓ_a(ξ)·ℓ_b(η)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorBasis {
    line: Lagrange1d,
}

/// Values and reference gradients of a basis at a set of points, one row per
/// point.
#[derive(Debug, Clone)]
pub struct Tabulation {
    pub npoints: usize,
    pub nbasis: usize,
    pub values: Vec<f64>,
    pub d_xi: Vec<f64>,
    pub d_eta: Vec<f64>,
}

impl Tabulation {
    #[inline]
    pub fn value(&self, q: usize, i: usize) -> f64 {
        self.values[q * self.nbasis + i]
    }

    #[inline]
    pub fn grad(&self, q: usize, i: usize) -> [f64; 2] {
        [self.d_xi[q * self.nbasis + i], self.d_eta[q * self.nbasis + i]]
    }

    pub fn row(&self, q: usize) -> &[f64] {
        &self.values[q * self.nbasis..(q + 1) * self.nbasis]
    }
}

impl TensorBasis {
    pub fn new(degree: usize) -> Self {
        TensorBasis { line: Lagrange1d::new(degree) }
    }

    pub fn degree(&self) -> usize {
        self.line.degree()
    }

    pub fn len(&self) -> usize {
        self.line.len() * self.line.len()
    }

    pub fn is_empty(&self) -> bool {
        self.line.is_empty()
    }

    pub fn line(&self) -> &Lagrange1d {
        &self.line
    }

    /// Reference coordinates of the nodes, in basis order.
    pub fn nodes(&self) -> Vec<(f64, f64)> {
        let n = self.line.nodes();
        let mut out = Vec::with_capacity(self.len());
        for &y in n {
            for &x in n {
                out.push((x, y));
            }
        }
        out
    }

    /// Tabulates values and reference derivatives at `points` in `[0,1]²`.
    /// Chain-rule scaling to a physical cell is left to the caller.
    pub fn tabulate(&self, points: &[(f64, f64)]) -> Tabulation {
        let m = self.line.len();
        let nb = m * m;
        let mut tab = Tabulation {
            npoints: points.len(),
            nbasis: nb,
            values: Vec::with_capacity(points.len() * nb),
            d_xi: Vec::with_capacity(points.len() * nb),
            d_eta: Vec::with_capacity(points.len() * nb),
        };
        for &(xi, eta) in points {
            let (vx, dx) = self.line.values_and_derivatives(xi);
            let (vy, dy) = self.line.values_and_derivatives(eta);
            for b in 0..m {
                for a in 0..m {
                    tab.values.push(vx[a] * vy[b]);
                    tab.d_xi.push(dx[a] * vy[b]);
                    tab.d_eta.push(vx[a] * dy[b]);
                }
            }
        }
        tab
    }

    /// Values at a single point.
    pub fn values_at(&self, xi: f64, eta: f64) -> Vec<f64> {
        let vx = self.line.values(xi);
        let vy = self.line.values(eta);
        vy.iter().flat_map(|&b| vx.iter().map(move |&a| a * b)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_basis() {
        let b = TensorBasis::new(0);
        let t = b.tabulate(&[(0.2, 0.9)]);
        assert_eq!(t.nbasis, 1);
        assert_eq!(t.value(0, 0), 1.0);
        assert_eq!(t.grad(0, 0), [0.0, 0.0]);
    }

    #[test]
    fn nodal_property() {
        let b = TensorBasis::new(1);
        let nodes = b.nodes();
        for (k, &(x, y)) in nodes.iter().enumerate() {
            let v = b.values_at(x, y);
            for (i, vi) in v.iter().enumerate() {
                let expect = if i == k { 1.0 } else { 0.0 };
                assert!((vi - expect).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn partition_of_unity() {
        for p in 0..6 {
            let b = TensorBasis::new(p);
            let t = b.tabulate(&[(0.3, 0.7)]);
            let s: f64 = t.row(0).iter().sum();
            assert!((s - 1.0).abs() < 1e-14);
            let gx: f64 = t.d_xi.iter().sum();
            let gy: f64 = t.d_eta.iter().sum();
            assert!(gx.abs() < 1e-12 && gy.abs() < 1e-12);
        }
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let l = Lagrange1d::new(4);
        let t = 0.37;
        let h = 1e-6;
        let (_, d) = l.values_and_derivatives(t);
        let vp = l.values(t + h);
        let vm = l.values(t - h);
        for k in 0..l.len() {
            let fd = (vp[k] - vm[k]) / (2.0 * h);
            assert!((fd - d[k]).abs() < 1e-7);
        }
    }

    #[test]
    fn dimension() {
        for p in 0..5 {
            assert_eq!(TensorBasis::new(p).len(), (p + 1) * (p + 1));
            assert_eq!(Lagrange1d::new(p).len(), p + 1);
        }
    }
}
