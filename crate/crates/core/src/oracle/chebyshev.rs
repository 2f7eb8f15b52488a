//! Chebyshev-Gauss-Lobatto collocation on an interval `[0, len]`.

use nalgebra::{DMatrix, DVector};

pub(crate) struct ChebyshevGrid {
    /// Increasing nodes, `nodes[0] = 0` and `nodes[n-1] = len`.
    pub nodes: DVector<f64>,
    pub d1: DMatrix<f64>,
    pub d2: DMatrix<f64>,
}

impl ChebyshevGrid {
    pub fn new(n: usize, len: f64) -> Self {
        assert!(n >= 3, "need at least three collocation points");
        let m = n - 1;
        let theta: Vec<f64> = (0..n).map(|j| std::f64::consts::PI * j as f64 / m as f64).collect();
        let weight = |j: usize| {
            let c = if j == 0 || j == m { 2.0 } else { 1.0 };
            if j % 2 == 0 { c } else { -c }
        };
        // Derivative with respect to z = cos(theta); differences via the
        // product-of-sines identity to avoid cancellation near the ends.
        let mut dz = DMatrix::<f64>::zeros(n, n);
        for i in 0..n {
            let mut row_sum = 0.0;
            for j in 0..n {
                if i == j {
                    continue;
                }
                let diff = -2.0 * ((theta[i] + theta[j]) / 2.0).sin() * ((theta[i] - theta[j]) / 2.0).sin();
                let v = weight(i) / weight(j) / diff;
                dz[(i, j)] = v;
                row_sum += v;
            }
            dz[(i, i)] = -row_sum;
        }
        // y = len (1 - z) / 2 maps z = 1 to y = 0
        let d1 = dz * (-2.0 / len);
        let d2 = &d1 * &d1;
        let nodes = DVector::from_iterator(n, theta.iter().map(|t| len * (1.0 - t.cos()) / 2.0));
        Self { nodes, d1, d2 }
    }
}
