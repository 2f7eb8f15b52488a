//! Independent spectral check of the stability formulas.
//!
//! The linearised problem along the truncated branch is a Steklov-type
//! eigenproblem on the surface: for surface data `h`, extend `h`
//! harmonically (for `lambda^2 d_xx + d_yy`) into the fluid, and apply
//!
//! ```text
//! A h = lambda^2 psi_x w_x + psi_y w_y - (rho / psi_y) h,
//! rho = 1 + lambda^2 psi_x psi_xy + psi_y psi_yy
//! ```
//!
//! on `y = eta(x)`. Projecting onto even cosines with weight `1/psi_y`
//! gives a small symmetric pencil whose eigenvalues are `mu_1(t) <= mu_2(t) <= ...`.
//! At `t = 0` these are `sigma(k tau)`.

mod chebyshev;
mod strip;

use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};
use rayon::prelude::*;
use serde::Serialize;

use crate::dispersion::{check_surface_flow, sigma};
use crate::error::{Result, WaveError};
use crate::expansion::{expansion_coefficients, BranchState, StreamDerivatives};
use crate::laminar::FlowParams;
use crate::scalar::Scalar;
use crate::stability::mu2 as mu2_formula;
use strip::{StripSolver, SurfaceShape};

/// Grid sizes of the discretisation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Resolution {
    /// Number of cosine basis functions `cos(k tau x)`, `k = 0 .. n_modes - 1`.
    pub n_modes: usize,
    /// Chebyshev points across the depth.
    pub n_y: usize,
}

impl Default for Resolution {
    fn default() -> Self {
        Self { n_modes: 8, n_y: 200 }
    }
}

impl Resolution {
    fn validate(&self) -> Result<()> {
        if self.n_modes < 2 {
            return Err(WaveError::Request(format!("n_modes must be at least 2, got {}", self.n_modes)));
        }
        if self.n_y < 8 {
            return Err(WaveError::Request(format!("n_y must be at least 8, got {}", self.n_y)));
        }
        Ok(())
    }

    // Collocation points in x; four per basis function resolves the products
    // of basis functions with the third-harmonic geometry.
    fn n_x(&self) -> usize {
        4 * self.n_modes
    }
}

/// `[sigma(0), sigma(lambda tau), sigma(2 lambda tau), ...]` up to `k_max`.
pub fn laminar_spectrum<T: Scalar>(p: &FlowParams<T>, lambda: T, k_max: usize) -> Result<Vec<T>> {
    check_surface_flow(p)?;
    let tau = crate::dispersion::solve_dispersion(p, T::default_tolerance())?.tau_star;
    Ok((0..=k_max).map(|k| sigma(p, lambda * T::lit(k as f64) * tau)).collect())
}

/// Assembled surface operator on the cosine basis.
#[derive(Debug, Clone)]
pub struct SteklovDiscretization {
    pub n_modes: usize,
    pub n_y: usize,
    pub state: BranchState<f64>,
    /// Symmetrised stiffness `<A h_n, h_m>` with weight `1/psi_y`.
    pub matrix: DMatrix<f64>,
    /// Mass `<h_n, h_m>` with weight `1/psi_y^2`.
    pub mass: DMatrix<f64>,
    /// `L^-1 matrix L^-T` with `mass = L L^T`; its eigenvalues are the spectrum.
    pub weighted: DMatrix<f64>,
    /// `max |K - K^T| / max |K|` before symmetrisation.
    pub symmetry_defect: f64,
    /// Largest number of correction sweeps over the basis functions.
    pub sweeps: usize,
}

struct Surface {
    eta: Vec<f64>,
    slope: Vec<f64>,
    curvature: Vec<f64>,
    stream: Vec<StreamDerivatives<f64>>,
}

// The streamline psi = 1 near the truncated surface. Using the exact level
// set of the truncated stream function keeps the discrete operator symmetric.
fn level_set_surface(state: &BranchState<f64>, xs: &[f64]) -> Result<Surface> {
    let mut out = Surface {
        eta: Vec::with_capacity(xs.len()),
        slope: Vec::with_capacity(xs.len()),
        curvature: Vec::with_capacity(xs.len()),
        stream: Vec::with_capacity(xs.len()),
    };
    for &x in xs {
        let mut eta = state.elevation(x).value;
        let mut converged = false;
        for _ in 0..50 {
            let s = state.stream(x, eta);
            if !(s.dy > 0.0) {
                return Err(WaveError::OutsideDomain { x, y: eta });
            }
            let step = (s.value - 1.0) / s.dy;
            eta -= step;
            if step.abs() <= 1e-15 * eta.abs().max(1.0) {
                converged = true;
                break;
            }
        }
        if !converged || !(eta > 0.0) {
            return Err(WaveError::NoConvergence { what: "surface streamline", iterations: 50 });
        }
        let s = state.stream(x, eta);
        if !(s.dy > 0.0) {
            return Err(WaveError::OutsideDomain { x, y: eta });
        }
        let e1 = -s.dx / s.dy;
        let e2 = -(s.dxx + 2.0 * s.dxy * e1 + s.dyy * e1 * e1) / s.dy;
        out.eta.push(eta);
        out.slope.push(e1);
        out.curvature.push(e2);
        out.stream.push(s);
    }
    Ok(out)
}

pub fn assemble(state: &BranchState<f64>, n_modes: usize, n_y: usize) -> Result<SteklovDiscretization> {
    let res = Resolution { n_modes, n_y };
    res.validate()?;
    if state.order != 3 {
        return Err(WaveError::Request("the oracle needs the third-order branch".into()));
    }
    if !(state.coeffs.kappa > 0.0) {
        return Err(WaveError::OutsideDomain { x: 0.0, y: state.params.d() });
    }
    let nx = res.n_x();
    let tau = state.coeffs.tau_star;
    let lambda = state.lambda();
    let d = state.params.d();
    let half_period = std::f64::consts::PI / tau;
    let xs: Vec<f64> = (0..nx).map(|i| half_period * i as f64 / (nx - 1) as f64).collect();
    let surface = level_set_surface(state, &xs)?;
    let solver = StripSolver::new(
        &xs,
        tau,
        lambda,
        d,
        n_y,
        SurfaceShape { eta: &surface.eta, slope: &surface.slope, curvature: &surface.curvature },
    )?;
    let lam2 = lambda * lambda;

    let columns: Vec<Result<(DVector<f64>, usize)>> = (0..n_modes)
        .into_par_iter()
        .map(|m| {
            let h = solver.cos.column(m).into_owned();
            let (w, sweeps) = solver.extend(&h)?;
            let wy = solver.surface_normal_derivative(&w);
            let hx = &solver.dx * &h;
            let ah = DVector::from_fn(nx, |i, _| {
                let s = &surface.stream[i];
                let eta = surface.eta[i];
                let p = surface.slope[i] / eta;
                let w_x = hx[i] - d * p * wy[i];
                let w_y = d / eta * wy[i];
                let rho = 1.0 + lam2 * s.dx * s.dxy + s.dy * s.dyy;
                lam2 * s.dx * w_x + s.dy * w_y - rho / s.dy * h[i]
            });
            Ok((ah, sweeps))
        })
        .collect();

    // trapezoid weights over the half period, doubled for the full period
    let step = half_period / (nx - 1) as f64;
    let quad: Vec<f64> = (0..nx).map(|i| if i == 0 || i == nx - 1 { step } else { 2.0 * step }).collect();
    let mut stiffness = DMatrix::<f64>::zeros(n_modes, n_modes);
    let mut sweeps = 0;
    for (n, col) in columns.into_iter().enumerate() {
        let (ah, s) = col?;
        sweeps = sweeps.max(s);
        for m in 0..n_modes {
            stiffness[(m, n)] = (0..nx)
                .map(|i| quad[i] * solver.cos[(i, m)] * ah[i] / surface.stream[i].dy)
                .sum();
        }
    }
    let mass = DMatrix::from_fn(n_modes, n_modes, |m, n| {
        (0..nx)
            .map(|i| {
                let py = surface.stream[i].dy;
                quad[i] * solver.cos[(i, m)] * solver.cos[(i, n)] / (py * py)
            })
            .sum()
    });
    let symmetry_defect = (&stiffness - stiffness.transpose()).amax() / stiffness.amax().max(1e-300);
    let matrix = (&stiffness + stiffness.transpose()) * 0.5;
    let chol = Cholesky::new(mass.clone())
        .ok_or_else(|| WaveError::Resolution("surface mass matrix is not positive definite".into()))?;
    let l = chol.l();
    let linv = l
        .clone()
        .try_inverse()
        .ok_or_else(|| WaveError::Resolution("mass factor is singular".into()))?;
    let weighted = &linv * &matrix * linv.transpose();
    let weighted = (&weighted + weighted.transpose()) * 0.5;
    Ok(SteklovDiscretization { n_modes, n_y, state: *state, matrix, mass, weighted, symmetry_defect, sweeps })
}

/// Smallest eigenvalues of one discretisation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigenEstimate {
    /// Ascending.
    pub mu_values: Vec<f64>,
    pub grid_tag: (usize, usize),
    pub t: f64,
}

pub fn eigenvalues(disc: &SteklovDiscretization, k: usize) -> Result<EigenEstimate> {
    if k > disc.n_modes {
        return Err(WaveError::Request(format!(
            "asked for {k} eigenvalues from a {}-mode discretisation",
            disc.n_modes
        )));
    }
    let mut values: Vec<f64> = SymmetricEigen::new(disc.weighted.clone()).eigenvalues.iter().copied().collect();
    values.sort_by(|a, b| a.total_cmp(b));
    values.truncate(k);
    Ok(EigenEstimate { mu_values: values, grid_tag: (disc.n_modes, disc.n_y), t: disc.state.t })
}

/// Eigenvalues at `n_y` and `2 n_y` and the largest change between them.
pub fn refined_eigenvalues(state: &BranchState<f64>, res: Resolution, k: usize) -> Result<(EigenEstimate, f64)> {
    let coarse = eigenvalues(&assemble(state, res.n_modes, res.n_y)?, k)?;
    let fine = eigenvalues(&assemble(state, res.n_modes, 2 * res.n_y)?, k)?;
    let change = coarse
        .mu_values
        .iter()
        .zip(&fine.mu_values)
        .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
    Ok((fine, change))
}

/// One amplitude of the oracle sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OracleSample {
    pub t: f64,
    pub mu1: f64,
    pub mu: f64,
    /// `(mu(t) - mu(0)) / t^2`.
    pub ratio: f64,
    pub sweeps: usize,
    pub symmetry_defect: f64,
}

/// Oracle estimate of the second-eigenvalue curvature against the formula.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Mu2Check {
    pub a: f64,
    pub d: f64,
    pub formula: f64,
    pub estimate: f64,
    pub relative_error: f64,
    /// Second eigenvalue of the `t = 0` discretisation.
    pub mu_at_zero: f64,
    pub samples: Vec<OracleSample>,
    /// Richardson tableau, one row per level.
    pub richardson: Vec<Vec<f64>>,
    pub first_eigenvalue_negative: bool,
}

/// Fits `mu(t) = mu(0) + mu2 t^2 + O(t^4)` on the oracle's second eigenvalue.
///
/// `t_list` must be strictly decreasing and positive. With three or more
/// amplitudes the estimate is a two-level Richardson extrapolation in `t^2`.
pub fn verify_mu2(p: &FlowParams<f64>, t_list: &[f64], res: Resolution) -> Result<Mu2Check> {
    res.validate()?;
    if t_list.len() < 2 {
        return Err(WaveError::Request("need at least two amplitudes".into()));
    }
    if t_list.iter().any(|t| !(*t > 0.0)) || t_list.windows(2).any(|w| !(w[0] > w[1])) {
        return Err(WaveError::Request("amplitudes must be positive and strictly decreasing".into()));
    }
    let coeffs = expansion_coefficients(p, 0.0)?;
    let formula = mu2_formula(p)?.mu2;
    let base = BranchState::with_coefficients(*p, coeffs, 0.0, 3)?;
    let mu_at_zero = eigenvalues(&assemble(&base, res.n_modes, res.n_y)?, 2)?.mu_values[1];

    let mut samples = Vec::with_capacity(t_list.len());
    for &t in t_list {
        let state = BranchState::with_coefficients(*p, coeffs, t, 3)?;
        let disc = assemble(&state, res.n_modes, res.n_y)?;
        let ev = eigenvalues(&disc, 2)?;
        samples.push(OracleSample {
            t,
            mu1: ev.mu_values[0],
            mu: ev.mu_values[1],
            ratio: (ev.mu_values[1] - mu_at_zero) / (t * t),
            sweeps: disc.sweeps,
            symmetry_defect: disc.symmetry_defect,
        });
    }

    // Level j removes the t^(2j) error term.
    let mut richardson = vec![samples.iter().map(|s| s.ratio).collect::<Vec<f64>>()];
    let t2: Vec<f64> = t_list.iter().map(|t| t * t).collect();
    for level in 1..t_list.len().min(3) {
        let prev = &richardson[level - 1];
        let row: Vec<f64> = (0..prev.len() - 1)
            .map(|i| {
                let big: f64 = t2[i..=i + level - 1].iter().product();
                let small: f64 = t2[i + 1..=i + level].iter().product();
                (prev[i + 1] * big - prev[i] * small) / (big - small)
            })
            .collect();
        richardson.push(row);
    }
    let last = richardson.last().expect("at least one level");
    let estimate = *last.last().expect("nonempty level");
    let spread = if richardson.len() >= 2 {
        let r1 = &richardson[1];
        (r1[r1.len() - 1] - r1[0]).abs()
    } else {
        0.0
    };
    if !estimate.is_finite() || spread > 0.5 * estimate.abs() + 1e-8 {
        return Err(WaveError::Inconclusive(format!(
            "Richardson levels disagree at (a, d) = ({}, {}): {:?}",
            p.a(),
            p.d(),
            richardson
        )));
    }
    Ok(Mu2Check {
        a: p.a(),
        d: p.d(),
        formula,
        estimate,
        relative_error: ((estimate - formula) / formula).abs(),
        mu_at_zero,
        first_eigenvalue_negative: samples.iter().all(|s| s.mu1 < 0.0),
        samples,
        richardson,
    })
}
