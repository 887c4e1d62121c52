//! Gauss rules on the unit interval and the unit square.

use std::f64::consts::PI;

/// Legendre polynomial `P_n(x)` and its derivative on `[-1, 1]`.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    let dp = if (1.0 - x * x).abs() < 1e-300 {
        // endpoint value of P_n'
        0.5 * nf * (nf + 1.0) * x.powi(n as i32 + 1)
    } else {
        nf * (p0 - x * p1) / (1.0 - x * x)
    };
    (p1, dp)
}

/// Gauss-Legendre rule with `n` points, exact for degree `2n - 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussLegendre {
    /// Points in `[0, 1]`, ascending.
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "quadrature needs at least one point");
        let mut points = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n {
            // Chebyshev-like initial guess, then Newton on P_n.
            let mut x = -(PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            for _ in 0..100 {
                let (p, dp) = legendre(n, x);
                let dx = p / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, dp) = legendre(n, x);
            points[i] = 0.5 * (x + 1.0);
            weights[i] = 1.0 / ((1.0 - x * x) * dp * dp);
        }
        GaussLegendre { points, weights }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Rule mapped onto `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
        let h = b - a;
        (
            self.points.iter().map(|t| a + h * t).collect(),
            self.weights.iter().map(|w| w * h).collect(),
        )
    }
}

/// Tensor-product Gauss rule on `[0,1]²`; point `k = i + n·j` sits at
/// `(points[i], points[j])`.
#[derive(Debug, Clone)]
pub struct TensorGauss {
    pub line: GaussLegendre,
    pub points: Vec<(f64, f64)>,
    pub weights: Vec<f64>,
}

impl TensorGauss {
    pub fn new(n: usize) -> Self {
        let line = GaussLegendre::new(n);
        let mut points = Vec::with_capacity(n * n);
        let mut weights = Vec::with_capacity(n * n);
        for j in 0..n {
            for i in 0..n {
                points.push((line.points[i], line.points[j]));
                weights.push(line.weights[i] * line.weights[j]);
            }
        }
        TensorGauss { line, points, weights }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Gauss-Lobatto-Legendre nodes of a degree-`n` nodal basis on `[0,1]`.
///
/// Degree 0 has the single node `1/2`.
pub fn lobatto_nodes(n: usize) -> Vec<f64> {
    match n {
        0 => return vec![0.5],
        1 => return vec![0.0, 1.0],
        _ => {}
    }
    let mut nodes = vec![0.0; n + 1];
    nodes[n] = 1.0;
    for i in 1..n {
        // interior nodes are roots of P_n'; start from Chebyshev-Lobatto points
        let mut x = -(PI * i as f64 / n as f64).cos();
        for _ in 0..100 {
            let (p, dp) = legendre(n, x);
            // P_n'' from the Legendre ODE: (1-x²)P'' = 2xP' - n(n+1)P
            let nf = n as f64;
            let d2p = (2.0 * x * dp - nf * (nf + 1.0) * p) / (1.0 - x * x);
            let dx = dp / d2p;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = 0.5 * (x + 1.0);
    }
    nodes
}
