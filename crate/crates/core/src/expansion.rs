//! Small-amplitude expansion of the Stokes branch.
//!
//! Along the branch, with amplitude parameter `t`,
//!
//! ```text
//! eta = d + t cos(tau x) + t^2 (mean_lift + harmonic_lift cos 2tau x)
//!         + t^3 (fundamental_lift cos tau x + third_lift cos 3tau x)
//! psi = U + t psi0 + t^2 psi1 + t^3 psi2
//! lambda = 1 + period_curvature t^2
//! ```
//!
//! where `tau` is the dispersion root and `psi0 .. psi2` are built from
//! `gamma(y; s) = sinh(s y) / sinh(s d)`.

use rayon::prelude::*;
use serde::Serialize;

use crate::dispersion::{check_surface_flow, sigma, solve_dispersion};
use crate::error::{Result, WaveError};
use crate::hyperbolic::{zcoth, SinhProfile};
use crate::laminar::{bernoulli, FlowParams};
use crate::scalar::{negligible, Scalar};

/// Leading-order surface and stream perturbation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FirstOrder<T> {
    pub tau_star: T,
    pub kappa: T,
    depth: T,
}

impl<T: Scalar> FirstOrder<T> {
    /// `cos(tau x)`.
    pub fn elevation(&self, x: T) -> T {
        (self.tau_star * x).cos()
    }

    /// `-kappa cos(tau x) gamma(y; tau)`.
    pub fn stream(&self, x: T, y: T) -> T {
        -self.kappa * (self.tau_star * x).cos() * SinhProfile::new(y, self.tau_star, self.depth).value
    }
}

/// Checks that `tau_star` is a dispersion root and returns the first-order fields.
pub fn first_order<T: Scalar>(p: &FlowParams<T>, tau_star: T) -> Result<FirstOrder<T>> {
    let kappa = p.kappa();
    let residual = sigma(p, tau_star);
    let scale = T::one() + (p.a() * kappa - T::one()).abs();
    if !(tau_star > T::zero()) || !(residual.abs() <= T::epsilon().sqrt() * scale) {
        return Err(WaveError::NotADispersionRoot {
            tau: tau_star.as_f64(),
            residual: residual.as_f64(),
        });
    }
    Ok(FirstOrder { tau_star, kappa, depth: p.d() })
}

/// Order `t^2`: forcing constants and the solution of the two 2x2 systems.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SecondOrder<T> {
    /// Kinematic forcing, multiplies `1 + cos(2 tau x)`.
    pub kinematic_forcing: T,
    /// Dynamic forcing, multiplies `1 + cos(2 tau x)`.
    pub dynamic_forcing: T,
    /// Extra constant in the dynamic condition.
    pub dynamic_offset: T,
    /// Mean surface lift.
    pub mean_lift: T,
    /// Amplitude of `cos(2 tau x)` in the surface.
    pub harmonic_lift: T,
    /// Slope of the uniform shear added to the stream function.
    pub mean_shear: T,
    /// Amplitude of `cos(2 tau x) gamma(y; 2 tau)` in the stream function.
    pub harmonic_stream: T,
}

/// Order `t^3`: forcing constants and solution; one stream amplitude is free.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThirdOrder<T> {
    /// `-a - kappa gamma'(d; tau)`.
    pub surface_strain: T,
    /// Kinematic forcing at the fundamental.
    pub fundamental_kinematic: T,
    /// Kinematic forcing at the third harmonic.
    pub third_kinematic: T,
    /// Dynamic forcing at the fundamental.
    pub fundamental_dynamic: T,
    /// Dynamic forcing at the third harmonic.
    pub third_dynamic: T,
    /// Amplitude of `cos(tau x)` in the surface; affine in `fundamental_stream`.
    pub fundamental_lift: T,
    /// Amplitude of `cos(3 tau x)` in the surface.
    pub third_lift: T,
    /// Free amplitude of `cos(tau x) gamma(y; tau)`; fixes the meaning of `t`.
    pub fundamental_stream: T,
    /// Amplitude of `cos(3 tau x) gamma(y; 3 tau)`.
    pub third_stream: T,
    /// Curvature of the period parameter: `lambda = 1 + period_curvature t^2`.
    pub period_curvature: T,
}

/// Everything needed to evaluate the truncated branch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExpansionCoefficients<T> {
    pub tau_star: T,
    pub kappa: T,
    /// `gamma'(d; k tau)` for `k = 1, 2, 3`.
    pub surface_slopes: [T; 3],
    pub second: SecondOrder<T>,
    pub third: ThirdOrder<T>,
}

impl<T: Scalar> ExpansionCoefficients<T> {
    pub fn period_curvature(&self) -> T {
        self.third.period_curvature
    }
}

fn surface_slopes<T: Scalar>(d: T, tau: T) -> [T; 3] {
    [1.0, 2.0, 3.0].map(|k| zcoth(T::lit(k) * tau * d) / d)
}

pub fn order2_coefficients<T: Scalar>(p: &FlowParams<T>, tau_star: T) -> Result<SecondOrder<T>> {
    first_order(p, tau_star)?;
    let (a, d) = (p.a(), p.d());
    let k = p.kappa();
    let tau2 = tau_star * tau_star;
    let [g1, g2, _] = surface_slopes(d, tau_star);
    let rho = T::one() - a * k;
    let s0 = sigma(p, T::zero());
    let s2 = sigma(p, T::lit(2.0) * tau_star);
    let scale = T::one() + rho.abs();
    if negligible(s0, scale) {
        return Err(WaveError::Criticality);
    }
    if negligible(s2, scale) {
        return Err(WaveError::Resonance { harmonic: 2 });
    }
    let quarter = T::lit(0.25);
    let half = T::lit(0.5);
    let k2 = k * k;

    let kin = -a * quarter - k * g1 * half;
    let offset = tau2 * k2 * half;
    let dynamic = -T::lit(0.75) * tau2 * k2 + a * a * quarter + a * k * g1 * half + k2 * g1 * g1 * quarter;

    // Cramer's rule on
    //   k m + d c + kin = 0,   rho m + k c + dynamic + offset = 0
    //   k b + h + kin = 0,     rho b + k g2 h + dynamic = 0
    let mean_det = d * s0;
    let mean_lift = (d * (dynamic + offset) - k * kin) / mean_det;
    let mean_shear = (kin * rho - k * (dynamic + offset)) / mean_det;
    let harmonic_lift = (dynamic - k * kin * g2) / s2;
    let harmonic_stream = (kin * rho - k * dynamic) / s2;

    Ok(SecondOrder {
        kinematic_forcing: kin,
        dynamic_forcing: dynamic,
        dynamic_offset: offset,
        mean_lift,
        harmonic_lift,
        mean_shear,
        harmonic_stream,
    })
}

pub fn order3_coefficients<T: Scalar>(
    p: &FlowParams<T>,
    tau_star: T,
    second: &SecondOrder<T>,
    fundamental_stream: T,
) -> Result<ThirdOrder<T>> {
    let (a, d) = (p.a(), p.d());
    let k = p.kappa();
    let k2 = k * k;
    let tau2 = tau_star * tau_star;
    let [g1, g2, g3] = surface_slopes(d, tau_star);
    let rho = T::one() - a * k;
    let s3 = sigma(p, T::lit(3.0) * tau_star);
    let scale = T::one() + rho.abs();
    if negligible(s3, scale) {
        return Err(WaveError::Resonance { harmonic: 3 });
    }
    let half = T::lit(0.5);
    let eighth = T::lit(0.125);
    let SecondOrder { mean_lift, harmonic_lift, mean_shear, harmonic_stream, .. } = *second;

    let strain = -a - k * g1;
    let lift_mix = mean_lift + half * harmonic_lift;
    let a_strain = a * strain + k2 * tau2;
    let fk = lift_mix * strain + mean_shear + half * g2 * harmonic_stream - T::lit(0.375) * k * tau2;
    let tk = half * harmonic_lift * strain + half * g2 * harmonic_stream - eighth * k * tau2;
    let fd = -lift_mix * a_strain
        + mean_shear * strain
        + harmonic_stream * (k * tau2 + half * strain * g2)
        + T::lit(0.75) * a * k * tau2
        + T::lit(0.625) * k2 * tau2 * g1;
    let td = -half * harmonic_lift * a_strain
        + harmonic_stream * (T::lit(3.0) * k * tau2 + half * strain * g2)
        + T::lit(0.25) * a * k * tau2
        - eighth * tau2 * k2 * g1;

    // k A - d k g1 L + c + fk = 0,   rho A - k^2 (d tau^2 + g1) L + k g1 c + fd = 0
    let bulk = d * tau2 + g1;
    let lift_den = k2 * bulk - d * rho * g1;
    let curvature_den = k * lift_den;
    if negligible(curvature_den, k2 * k * bulk + (d * k * rho * g1).abs()) {
        return Err(WaveError::DegenerateBranch);
    }
    let period_curvature = (k * fd - rho * fk) / curvature_den;
    let fundamental_lift = -fundamental_stream / k + (-fk * k * bulk + fd * d * g1) / lift_den;

    Ok(ThirdOrder {
        surface_strain: strain,
        fundamental_kinematic: fk,
        third_kinematic: tk,
        fundamental_dynamic: fd,
        third_dynamic: td,
        fundamental_lift,
        third_lift: (td - tk * k * g3) / s3,
        fundamental_stream,
        third_stream: (tk * rho - k * td) / s3,
        period_curvature,
    })
}

/// Solves the dispersion relation and computes all coefficients.
pub fn expansion_coefficients<T: Scalar>(
    p: &FlowParams<T>,
    fundamental_stream: T,
) -> Result<ExpansionCoefficients<T>> {
    let tau = solve_dispersion(p, T::default_tolerance())?.tau_star;
    coefficients_at(p, tau, fundamental_stream)
}

/// Coefficients at a known dispersion root.
pub fn coefficients_at<T: Scalar>(
    p: &FlowParams<T>,
    tau_star: T,
    fundamental_stream: T,
) -> Result<ExpansionCoefficients<T>> {
    check_surface_flow(p)?;
    let second = order2_coefficients(p, tau_star)?;
    let third = order3_coefficients(p, tau_star, &second, fundamental_stream)?;
    Ok(ExpansionCoefficients {
        tau_star,
        kappa: p.kappa(),
        surface_slopes: surface_slopes(p.d(), tau_star),
        second,
        third,
    })
}

/// Value and first two derivatives of the surface.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Elevation<T> {
    pub value: T,
    pub slope: T,
    pub curvature: T,
}

/// Stream function and its derivatives up to second order.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct StreamDerivatives<T> {
    pub value: T,
    pub dx: T,
    pub dy: T,
    pub dxx: T,
    pub dxy: T,
    pub dyy: T,
}

impl<T: Scalar> StreamDerivatives<T> {
    // Adds amp cos(w x) g(y), given g, g', g''.
    fn add_mode(&mut self, amp: T, w: T, x: T, g: [T; 3]) {
        let (s, c) = (w * x).sin_cos();
        self.value = self.value + amp * c * g[0];
        self.dx = self.dx - amp * w * s * g[0];
        self.dy = self.dy + amp * c * g[1];
        self.dxx = self.dxx - amp * w * w * c * g[0];
        self.dxy = self.dxy - amp * w * s * g[1];
        self.dyy = self.dyy + amp * c * g[2];
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BranchPoint<T> {
    pub eta: T,
    pub psi: T,
    pub lambda: T,
}

/// A point on the truncated branch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BranchState<T> {
    pub params: FlowParams<T>,
    pub t: T,
    pub coeffs: ExpansionCoefficients<T>,
    /// 1, 2 or 3; order 2 already carries the period correction.
    pub order: u8,
}

impl<T: Scalar> BranchState<T> {
    pub fn new(params: FlowParams<T>, t: T, order: u8, fundamental_stream: T) -> Result<Self> {
        let coeffs = expansion_coefficients(&params, fundamental_stream)?;
        Self::with_coefficients(params, coeffs, t, order)
    }

    pub fn with_coefficients(
        params: FlowParams<T>,
        coeffs: ExpansionCoefficients<T>,
        t: T,
        order: u8,
    ) -> Result<Self> {
        if !(1..=3).contains(&order) {
            return Err(WaveError::Request(format!("truncation order must be 1, 2 or 3, got {order}")));
        }
        if !t.is_finite() {
            return Err(WaveError::AmplitudeTooLarge { t: t.as_f64(), reason: "not finite".into() });
        }
        let state = Self { params, t, coeffs, order };
        if state.min_elevation() <= T::zero() {
            return Err(WaveError::AmplitudeTooLarge {
                t: t.as_f64(),
                reason: "the surface touches the bottom".into(),
            });
        }
        Ok(state)
    }

    pub fn period(&self) -> T {
        T::lit(2.0) * T::PI() / self.coeffs.tau_star
    }

    pub fn lambda(&self) -> T {
        if self.order >= 2 {
            T::one() + self.coeffs.third.period_curvature * self.t * self.t
        } else {
            T::one()
        }
    }

    pub fn elevation(&self, x: T) -> Elevation<T> {
        let c = &self.coeffs;
        let t = self.t;
        let tau = c.tau_star;
        let mut terms: Vec<(T, T)> = vec![(t, T::one())];
        let mut value = self.params.d();
        if self.order >= 2 {
            value = value + t * t * c.second.mean_lift;
            terms.push((t * t * c.second.harmonic_lift, T::lit(2.0)));
        }
        if self.order >= 3 {
            let t3 = t * t * t;
            terms.push((t3 * c.third.fundamental_lift, T::one()));
            terms.push((t3 * c.third.third_lift, T::lit(3.0)));
        }
        let (mut slope, mut curvature) = (T::zero(), T::zero());
        for (amp, n) in terms {
            let w = n * tau;
            let (s, co) = (w * x).sin_cos();
            value = value + amp * co;
            slope = slope - amp * w * s;
            curvature = curvature - amp * w * w * co;
        }
        Elevation { value, slope, curvature }
    }

    /// Lower bound of the surface height over a period.
    pub fn min_elevation(&self) -> T {
        let n = 256;
        let period = self.period();
        (0..=n)
            .map(|i| self.elevation(period * T::lit(i as f64 / (2 * n) as f64)).value)
            .fold(T::infinity(), T::min)
    }

    pub fn stream(&self, x: T, y: T) -> StreamDerivatives<T> {
        let p = &self.params;
        let (a, d) = (p.a(), p.d());
        let c = &self.coeffs;
        let t = self.t;
        let tau = c.tau_star;
        let k = c.kappa;
        let mut out = StreamDerivatives {
            value: -(a / T::lit(2.0)) * y * (y - d) + y / d,
            dy: -a * y + a * d / T::lit(2.0) + T::one() / d,
            dyy: -a,
            ..Default::default()
        };
        let g1 = SinhProfile::new(y, tau, d);
        let gvals = |g: &SinhProfile<T>| [g.value, g.slope, g.curvature];
        out.add_mode(-k * t, tau, x, gvals(&g1));
        if self.order >= 2 {
            let t2 = t * t;
            out.value = out.value + t2 * c.second.mean_shear * y;
            out.dy = out.dy + t2 * c.second.mean_shear;
            let g2 = SinhProfile::new(y, T::lit(2.0) * tau, d);
            out.add_mode(t2 * c.second.harmonic_stream, T::lit(2.0) * tau, x, gvals(&g2));
        }
        if self.order >= 3 {
            let t3 = t * t * t;
            // y gamma'(y; tau) and its derivatives
            let yg = [
                y * g1.slope,
                g1.slope + y * g1.curvature,
                T::lit(2.0) * g1.curvature + y * g1.third,
            ];
            out.add_mode(-t3 * k * c.third.period_curvature, tau, x, yg);
            out.add_mode(t3 * c.third.fundamental_stream, tau, x, gvals(&g1));
            let g3 = SinhProfile::new(y, T::lit(3.0) * tau, d);
            out.add_mode(t3 * c.third.third_stream, T::lit(3.0) * tau, x, gvals(&g3));
        }
        out
    }

    /// `(eta(x), psi(x, y), lambda)`; `y` must lie in `[0, eta(x)]`.
    pub fn evaluate(&self, x: T, y: T) -> Result<BranchPoint<T>> {
        let eta = self.elevation(x).value;
        if !(y >= T::zero() && y <= eta) {
            return Err(WaveError::OutsideDomain { x: x.as_f64(), y: y.as_f64() });
        }
        Ok(BranchPoint { eta, psi: self.stream(x, y).value, lambda: self.lambda() })
    }
}

/// Free-function form of [`BranchState::evaluate`].
pub fn evaluate_branch<T: Scalar>(s: &BranchState<T>, x: T, y: T) -> Result<BranchPoint<T>> {
    s.evaluate(x, y)
}

/// Largest amplitude the truncation is used at.
///
/// Picks the larger of `0.1 |kappa|` and `0.05` that keeps the surface above
/// `d/2`; halves further if neither does.
pub fn t_max<T: Scalar>(p: &FlowParams<T>, coeffs: &ExpansionCoefficients<T>) -> T {
    let d = p.d();
    let a = T::lit(0.1) * coeffs.kappa.abs();
    let b = T::lit(0.05);
    let mut candidates = [a.max(b), a.min(b)];
    let keeps_depth = |t: T| {
        BranchState::with_coefficients(*p, *coeffs, t, 3)
            .map(|s| s.min_elevation() > d / T::lit(2.0))
            .unwrap_or(false)
    };
    for &t in &candidates {
        if t > T::zero() && keeps_depth(t) {
            return t;
        }
    }
    candidates[1] = candidates[1].max(T::lit(1e-6));
    let mut t = candidates[1];
    while t > T::lit(1e-12) && !keeps_depth(t) {
        t = t / T::lit(2.0);
    }
    t
}

/// Grid for [`branch_residuals`]: `nx` points per period times `ny` per column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ResidualGrid {
    pub nx: usize,
    pub ny: usize,
}

impl Default for ResidualGrid {
    fn default() -> Self {
        Self { nx: 64, ny: 64 }
    }
}

/// Maximum defects of the truncated branch in the free-boundary problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BranchResiduals<T> {
    /// `|(lambda^2 d_xx + d_yy) psi + a|` in the fluid.
    pub field: T,
    /// `|psi(x, eta(x)) - 1|`.
    pub kinematic: T,
    /// `|(psi_y^2 + lambda^2 psi_x^2)/2 + eta - R|` on the surface.
    pub bernoulli: T,
}

pub fn branch_residuals<T: Scalar>(s: &BranchState<T>, grid: ResidualGrid) -> Result<BranchResiduals<T>> {
    if s.order != 3 {
        return Err(WaveError::Request("residuals need the full third-order truncation".into()));
    }
    if grid.nx == 0 || grid.ny < 2 {
        return Err(WaveError::Request("residual grid needs nx >= 1 and ny >= 2".into()));
    }
    let a = s.params.a();
    let r = bernoulli(&s.params).value;
    let lambda = s.lambda();
    let lam2 = lambda * lambda;
    let half = T::lit(0.5);
    let period = s.period();
    let columns: Vec<BranchResiduals<T>> = (0..grid.nx)
        .into_par_iter()
        .map(|i| {
            let x = period * T::lit(i as f64 / grid.nx as f64);
            let eta = s.elevation(x).value;
            let mut field = T::zero();
            for j in 0..grid.ny {
                let y = eta * T::lit(j as f64 / (grid.ny - 1) as f64);
                let psi = s.stream(x, y);
                field = field.max((lam2 * psi.dxx + psi.dyy + a).abs());
            }
            let top = s.stream(x, eta);
            BranchResiduals {
                field,
                kinematic: (top.value - T::one()).abs(),
                bernoulli: (half * (top.dy * top.dy + lam2 * top.dx * top.dx) + eta - r).abs(),
            }
        })
        .collect();
    Ok(columns.into_iter().fold(
        BranchResiduals { field: T::zero(), kinematic: T::zero(), bernoulli: T::zero() },
        |acc, c| BranchResiduals {
            field: acc.field.max(c.field),
            kinematic: acc.kinematic.max(c.kinematic),
            bernoulli: acc.bernoulli.max(c.bernoulli),
        },
    ))
}

/// Least-squares slope of `log r` against `log t`.
pub fn loglog_slope(ts: &[f64], rs: &[f64]) -> f64 {
    let n = ts.len() as f64;
    let xs: Vec<f64> = ts.iter().map(|t| t.ln()).collect();
    let ys: Vec<f64> = rs.iter().map(|r| r.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let num: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    num / den
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::laminar::critical_depth;
    use proptest::prelude::*;

    fn flow(a: f64, d: f64) -> FlowParams<f64> {
        FlowParams::new(a, d).unwrap()
    }

    fn tau(p: &FlowParams<f64>) -> f64 {
        solve_dispersion(p, 1e-15).unwrap().tau_star
    }

    // Gaussian elimination with partial pivoting on a 2x2 system m z = rhs.
    fn solve2(m: [[f64; 2]; 2], rhs: [f64; 2]) -> [f64; 2] {
        let (m, rhs) = if m[0][0].abs() >= m[1][0].abs() { (m, rhs) } else { ([m[1], m[0]], [rhs[1], rhs[0]]) };
        let f = m[1][0] / m[0][0];
        let z1 = (rhs[1] - f * rhs[0]) / (m[1][1] - f * m[0][1]);
        [(rhs[0] - m[0][1] * z1) / m[0][0], z1]
    }

    struct Systems {
        mean: [f64; 2],
        harmonic: [f64; 2],
        third: [f64; 2],
        fundamental: [f64; 2],
        scale: f64,
    }

    fn system_residuals(p: &FlowParams<f64>, c2: f64) -> Systems {
        let (a, d) = (p.a(), p.d());
        let c = coefficients_at(p, tau(p), c2).unwrap();
        let k = c.kappa;
        let rho = 1.0 - a * k;
        let [g1, g2, g3] = c.surface_slopes;
        let s = c.second;
        let th = c.third;
        let t2 = c.tau_star * c.tau_star;
        Systems {
            mean: [
                k * s.mean_lift + d * s.mean_shear + s.kinematic_forcing,
                rho * s.mean_lift + k * s.mean_shear + s.dynamic_forcing + s.dynamic_offset,
            ],
            harmonic: [
                k * s.harmonic_lift + s.harmonic_stream + s.kinematic_forcing,
                rho * s.harmonic_lift + k * g2 * s.harmonic_stream + s.dynamic_forcing,
            ],
            third: [
                k * th.third_lift + th.third_stream + th.third_kinematic,
                rho * th.third_lift + k * g3 * th.third_stream + th.third_dynamic,
            ],
            fundamental: [
                k * th.fundamental_lift - d * k * g1 * th.period_curvature + c2 + th.fundamental_kinematic,
                rho * th.fundamental_lift - k * k * (d * t2 + g1) * th.period_curvature
                    + k * g1 * c2
                    + th.fundamental_dynamic,
            ],
            scale: 1.0
                + [s.dynamic_forcing, s.dynamic_offset, th.fundamental_dynamic, th.third_dynamic, k * k * t2]
                    .iter()
                    .fold(0.0_f64, |m, v| m.max(v.abs())),
        }
    }

    #[test]
    fn first_order_fields() {
        let p = flow(0.3, 1.7);
        let f = first_order(&p, tau(&p)).unwrap();
        let period = 2.0 * std::f64::consts::PI / f.tau_star;
        assert_eq!(f.elevation(0.0), 1.0);
        assert!((f.elevation(period / 2.0) + 1.0).abs() < 1e-15);
        assert_eq!(f.stream(0.4, 0.0), 0.0);
        assert!((f.stream(0.0, 1.7) + p.kappa()).abs() < 1e-15);
        assert!(matches!(first_order(&p, 1.0), Err(WaveError::NotADispersionRoot { .. })));
    }

    #[test]
    fn linear_systems_at_example_points() {
        for &(a, d) in &[(0.0, 2.0), (-3.0, 1.0), (1.0, 1.1), (-10.0, 3.0), (0.5, 1.0)] {
            let r = system_residuals(&flow(a, d), 0.0);
            for v in r.mean.iter().chain(&r.harmonic).chain(&r.third).chain(&r.fundamental) {
                assert!(v.abs() <= 1e-12 * r.scale, "({a}, {d}): {v}");
            }
        }
    }

    #[test]
    fn closed_forms_match_direct_solve() {
        let p = flow(0.0, 2.0);
        let (a, d) = (p.a(), p.d());
        let c = coefficients_at(&p, tau(&p), 0.0).unwrap();
        let s = c.second;
        let k = c.kappa;
        let rho = 1.0 - a * k;
        let [_, g2, _] = c.surface_slopes;
        let [m, sh] = solve2([[k, d], [rho, k]], [-s.kinematic_forcing, -(s.dynamic_forcing + s.dynamic_offset)]);
        assert!((m - s.mean_lift).abs() < 1e-12 && (sh - s.mean_shear).abs() < 1e-12);
        let [b, h] = solve2([[k, 1.0], [rho, k * g2]], [-s.kinematic_forcing, -s.dynamic_forcing]);
        assert!((b - s.harmonic_lift).abs() < 1e-12 && (h - s.harmonic_stream).abs() < 1e-12);
    }

    #[test]
    fn free_stream_amplitude() {
        let p = flow(-1.2, 1.4);
        let c0 = expansion_coefficients(&p, 0.0).unwrap();
        let c1 = expansion_coefficients(&p, 1.0).unwrap();
        assert_eq!(c0.third.period_curvature, c1.third.period_curvature);
        let slope = c1.third.fundamental_lift - c0.third.fundamental_lift;
        assert!((slope + 1.0 / c0.kappa).abs() < 1e-12);
    }

    #[test]
    fn second_harmonic_is_not_resonant() {
        let p = flow(0.7, 1.2);
        assert!(sigma(&p, 2.0 * tau(&p)) > 0.0);
    }

    #[test]
    fn branch_laminar_limit() {
        let p = flow(-2.0, 1.3);
        let s = BranchState::new(p, 0.0, 3, 0.0).unwrap();
        let b = s.evaluate(0.7, 0.9).unwrap();
        assert_eq!(b.eta, 1.3);
        assert_eq!(b.lambda, 1.0);
        let u = crate::laminar::stream_profile(&p, 0.9).unwrap();
        assert!((b.psi - u).abs() < 1e-15);
        assert!(s.evaluate(0.0, 1.31).is_err());
        let r = branch_residuals(&s, ResidualGrid::default()).unwrap();
        assert!(r.field < 1e-13 && r.kinematic < 1e-15 && r.bernoulli < 1e-14, "{r:?}");
    }

    #[test]
    fn branch_rejects_bad_requests() {
        let p = flow(0.0, 1.5);
        assert!(BranchState::new(p, 0.1, 4, 0.0).is_err());
        assert!(matches!(BranchState::new(p, 5.0, 3, 0.0), Err(WaveError::AmplitudeTooLarge { .. })));
        let s = BranchState::new(p, 0.01, 2, 0.0).unwrap();
        assert!(branch_residuals(&s, ResidualGrid::default()).is_err());
    }

    #[test]
    fn stream_derivatives_match_differences() {
        let p = flow(-1.5, 1.2);
        let s = BranchState::new(p, 0.08, 3, 0.3).unwrap();
        let h = 1e-4;
        for &(x, y) in &[(0.1, 0.3), (0.9, 1.0), (2.0, 0.05), (1.3, 0.7), (0.0, 1.1)] {
            let c = s.stream(x, y);
            let f = |x: f64, y: f64| s.stream(x, y).value;
            let dx = (f(x + h, y) - f(x - h, y)) / (2.0 * h);
            let dy = (f(x, y + h) - f(x, y - h)) / (2.0 * h);
            let dxx = (f(x + h, y) - 2.0 * f(x, y) + f(x - h, y)) / (h * h);
            let dyy = (f(x, y + h) - 2.0 * f(x, y) + f(x, y - h)) / (h * h);
            let dxy = (f(x + h, y + h) - f(x + h, y - h) - f(x - h, y + h) + f(x - h, y - h)) / (4.0 * h * h);
            assert!((c.dx - dx).abs() < 1e-6 && (c.dy - dy).abs() < 1e-6);
            assert!((c.dxx - dxx).abs() < 1e-6 && (c.dyy - dyy).abs() < 1e-6 && (c.dxy - dxy).abs() < 1e-6);
        }
    }

    #[test]
    fn residuals_scale_as_fourth_power() {
        for &(a, d) in &[(0.0, 2.0), (0.0, 1.5), (-3.0, 1.0), (1.0, 1.1)] {
            let p = flow(a, d);
            let c = expansion_coefficients(&p, 0.0).unwrap();
            let ts = [1e-1, 1e-2, 1e-3];
            let rs: Vec<BranchResiduals<f64>> = ts
                .iter()
                .map(|&t| {
                    let s = BranchState::with_coefficients(p, c, t, 3).unwrap();
                    branch_residuals(&s, ResidualGrid::default()).unwrap()
                })
                .collect();
            let picks: [fn(&BranchResiduals<f64>) -> f64; 3] = [|r| r.field, |r| r.kinematic, |r| r.bernoulli];
            for pick in picks {
                let v: Vec<f64> = rs.iter().map(pick).collect();
                let slope = loglog_slope(&ts, &v);
                assert!(slope >= 3.7, "({a}, {d}): slope {slope}, {v:?}");
            }
        }
    }

    #[test]
    fn t_max_keeps_surface_high() {
        let p = flow(0.0, 1.05);
        let c = expansion_coefficients(&p, 0.0).unwrap();
        let t = t_max(&p, &c);
        let s = BranchState::with_coefficients(p, c, t, 3).unwrap();
        assert!(t > 0.0 && s.min_elevation() > p.d() / 2.0);
    }

    #[test]
    fn even_surface_in_f32() {
        let p = FlowParams::new(-1.0_f32, 1.5).unwrap();
        let s = BranchState::new(p, 0.05, 3, 0.0).unwrap();
        for &x in &[0.1_f32, 0.7, 2.0] {
            assert!((s.elevation(x).value - s.elevation(-x).value).abs() < 1e-6);
        }
        let c = s.coeffs;
        let k = c.kappa;
        let r = k * c.second.mean_lift + 1.5 * c.second.mean_shear + c.second.kinematic_forcing;
        assert!(r.abs() < 1e-4);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn linear_systems_hold(a in -10.0_f64..10.0, frac in 0.02_f64..2.0, c2 in -2.0_f64..2.0) {
            let d = critical_depth(a) * (1.0 + frac);
            let p = flow(a, d);
            prop_assume!(p.kappa().abs() > 0.05);
            let r = system_residuals(&p, c2);
            for v in r.mean.iter().chain(&r.harmonic).chain(&r.third).chain(&r.fundamental) {
                prop_assert!(v.abs() <= 1e-10 * r.scale, "{v} vs scale {}", r.scale);
            }
        }

        #[test]
        fn branch_is_even_and_grounded(a in -5.0_f64..3.0, frac in 0.05_f64..1.0, x in 0.0_f64..20.0, t in 0.0_f64..0.05) {
            let d = critical_depth(a) * (1.0 + frac);
            let p = flow(a, d);
            prop_assume!(p.kappa().abs() > 0.05);
            let s = BranchState::new(p, t, 3, 0.0);
            prop_assume!(s.is_ok());
            let s = s.unwrap();
            prop_assert!((s.elevation(x).value - s.elevation(-x).value).abs() < 1e-12);
            prop_assert!(s.stream(x, 0.0).value.abs() < 1e-15);
        }
    }
}
