//! Harmonic extension of surface data into the fluid, computed on the
//! flattened strip `yhat = d y / eta(x)`.
//!
//! Unknowns live on a cosine collocation grid in `x` over half a period
//! times a Chebyshev grid in `yhat`. The variable-coefficient operator is
//! inverted by defect correction preconditioned with the flat-strip operator,
//! which decouples into one small banded-free dense solve per cosine mode.

use nalgebra::{DMatrix, DVector, LU};
use nalgebra::Dyn;

use super::chebyshev::ChebyshevGrid;
use crate::error::{Result, WaveError};

const MAX_SWEEPS: usize = 200;
const SWEEP_TOL: f64 = 1e-14;
const STALL_TOL: f64 = 1e-11;

pub(crate) struct StripSolver {
    pub nx: usize,
    pub ny: usize,
    /// `cos(k tau x_i)`, rows are points and columns are modes.
    pub cos: DMatrix<f64>,
    cos_inv: DMatrix<f64>,
    pub dx: DMatrix<f64>,
    dxx: DMatrix<f64>,
    pub cheb: ChebyshevGrid,
    // per-x metric coefficients
    e: DVector<f64>,
    p: DVector<f64>,
    q: DVector<f64>,
    lus: Vec<LU<f64, Dyn, Dyn>>,
}

/// Surface shape on the collocation grid.
pub(crate) struct SurfaceShape<'a> {
    pub eta: &'a [f64],
    pub slope: &'a [f64],
    pub curvature: &'a [f64],
}

impl StripSolver {
    pub fn new(xs: &[f64], tau: f64, lambda: f64, depth: f64, ny: usize, shape: SurfaceShape<'_>) -> Result<Self> {
        let nx = xs.len();
        let wave = |k: usize| k as f64 * tau;
        let cos = DMatrix::from_fn(nx, nx, |i, k| (wave(k) * xs[i]).cos());
        let cos_inv = cos
            .clone()
            .try_inverse()
            .ok_or_else(|| WaveError::Resolution("cosine collocation matrix is singular".into()))?;
        let dx = DMatrix::from_fn(nx, nx, |i, k| -wave(k) * (wave(k) * xs[i]).sin()) * &cos_inv;
        let dxx = DMatrix::from_fn(nx, nx, |i, k| -wave(k) * wave(k) * (wave(k) * xs[i]).cos()) * &cos_inv;
        let cheb = ChebyshevGrid::new(ny, depth);

        let lam2 = lambda * lambda;
        let e = DVector::from_fn(nx, |i, _| lam2 * (shape.eta[i] / depth).powi(2));
        let p = DVector::from_fn(nx, |i, _| shape.slope[i] / shape.eta[i]);
        let q = DVector::from_fn(nx, |i, _| {
            let (h, h1, h2) = (shape.eta[i], shape.slope[i], shape.curvature[i]);
            2.0 * h1 * h1 / (h * h) - h2 / h
        });

        let inner = ny - 2;
        let block = cheb.d2.view((1, 1), (inner, inner)).into_owned();
        let mut lus = Vec::with_capacity(nx);
        for k in 0..nx {
            let shift = lam2 * wave(k) * wave(k);
            let mut m = block.clone();
            for j in 0..inner {
                m[(j, j)] -= shift;
            }
            let lu = m.lu();
            if !lu.is_invertible() {
                return Err(WaveError::Resolution(format!("flat-strip operator singular for mode {k}")));
            }
            lus.push(lu);
        }
        Ok(Self { nx, ny, cos, cos_inv, dx, dxx, cheb, e, p, q, lus })
    }

    // The flattened Laplacian, scaled so its flat-strip part is d_yy - lambda^2 d_xx.
    fn apply(&self, w: &DMatrix<f64>) -> DMatrix<f64> {
        let wy = w * self.cheb.d1.transpose();
        let wyy = w * self.cheb.d2.transpose();
        let wxx = &self.dxx * w;
        let wxy = &self.dx * &wy;
        let y = &self.cheb.nodes;
        DMatrix::from_fn(self.nx, self.ny, |i, j| {
            let (e, p, q) = (self.e[i], self.p[i], self.q[i]);
            let yh = y[j];
            wyy[(i, j)] * (1.0 + e * p * p * yh * yh) + e * wxx[(i, j)] - 2.0 * e * p * yh * wxy[(i, j)]
                + e * q * yh * wy[(i, j)]
        })
    }

    // Flat-strip inverse on interior rows; boundary rows of the result are zero.
    fn precondition(&self, r: &DMatrix<f64>) -> DMatrix<f64> {
        let modes = &self.cos_inv * r;
        let inner = self.ny - 2;
        let mut out = DMatrix::<f64>::zeros(self.nx, self.ny);
        for k in 0..self.nx {
            let rhs = DVector::from_fn(inner, |j, _| modes[(k, j + 1)]);
            let sol = self.lus[k].solve(&rhs).expect("factorisation checked invertible");
            for j in 0..inner {
                out[(k, j + 1)] = sol[j];
            }
        }
        &self.cos * out
    }

    /// Extends `top` (values at the surface) harmonically, zero at the bottom.
    /// Returns the field and the number of correction sweeps.
    pub fn extend(&self, top: &DVector<f64>) -> Result<(DMatrix<f64>, usize)> {
        let mut w = DMatrix::<f64>::zeros(self.nx, self.ny);
        w.set_column(self.ny - 1, top);
        let scale = top.amax().max(1e-300);
        let mut previous = f64::INFINITY;
        for sweep in 0..MAX_SWEEPS {
            let dw = self.precondition(&(-self.apply(&w)));
            w += &dw;
            let change = dw.amax() / scale;
            if !change.is_finite() || change > 1e3 {
                break;
            }
            // below STALL_TOL the update is round-off once it stops shrinking
            if change < SWEEP_TOL || (change < STALL_TOL && change > 0.5 * previous) {
                return Ok((w, sweep + 1));
            }
            previous = change;
        }
        Err(WaveError::Resolution(
            "defect correction for the harmonic extension did not converge; amplitude too large for the strip preconditioner".into(),
        ))
    }

    /// `d/dyhat` of `w` at the surface row.
    pub fn surface_normal_derivative(&self, w: &DMatrix<f64>) -> DVector<f64> {
        let last = self.cheb.d1.row(self.ny - 1).transpose();
        w * last
    }
}
