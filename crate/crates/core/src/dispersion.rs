//! The dispersion function and its unique positive root.

use serde::Serialize;

use crate::error::{Result, WaveError};
use crate::hyperbolic::{zcoth, zcoth_slope};
use crate::laminar::{critical_depth, stagnation_depth_unchecked, FlowParams, RegionTag};
use crate::roots::newton_bracketed;
use crate::scalar::Scalar;

/// Half-width of the refused band around the surface stagnation depth,
/// relative to that depth.
pub const STAGNATION_GUARD: f64 = 1e-6;

/// `sigma(tau) = kappa^2 tau coth(tau d) + a kappa - 1`.
///
/// At `tau = 0` this is `-R'(d)`.
pub fn sigma<T: Scalar>(p: &FlowParams<T>, tau: T) -> T {
    let (a, d) = (p.a(), p.d());
    let k = p.kappa();
    k * k * zcoth(tau * d) / d + a * k - T::one()
}

/// `d sigma / d tau`, positive for `tau > 0` unless `kappa = 0`.
pub fn sigma_prime<T: Scalar>(p: &FlowParams<T>, tau: T) -> Result<T> {
    let k = p.kappa();
    if k == T::zero() {
        return Err(surface_stagnation(p));
    }
    Ok(k * k * zcoth_slope(tau * p.d()))
}

fn surface_stagnation<T: Scalar>(p: &FlowParams<T>) -> WaveError {
    WaveError::SurfaceStagnation { a: p.a().as_f64(), d: p.d().as_f64() }
}

/// Refuses flows whose surface is at, or within the guard band of, stagnation.
pub(crate) fn check_surface_flow<T: Scalar>(p: &FlowParams<T>) -> Result<()> {
    if p.kappa() == T::zero() || (p.a() > T::zero() && p.region() == RegionTag::Boundary) {
        return Err(surface_stagnation(p));
    }
    if p.a() > T::zero() {
        let ds = stagnation_depth_unchecked(p.a());
        let band = T::lit(STAGNATION_GUARD) * ds;
        if (p.d() - ds).abs() < band {
            return Err(WaveError::StagnationGuardBand {
                a: p.a().as_f64(),
                d: p.d().as_f64(),
                stagnation: ds.as_f64(),
                band: band.as_f64(),
            });
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DispersionSolution<T> {
    pub tau_star: T,
    /// Period `2 pi / tau_star`.
    pub lambda_star: T,
    pub iterations: usize,
    /// `|sigma(tau_star)|`.
    pub residual: T,
    pub bracket: (T, T),
}

/// Solves `sigma(tau) = 0` for the unique positive root.
///
/// Converged when `|sigma| < tol (1 + |a kappa - 1|)`.
pub fn solve_dispersion<T: Scalar>(p: &FlowParams<T>, tol: T) -> Result<DispersionSolution<T>> {
    p.require_subcritical()?;
    check_surface_flow(p)?;
    let k = p.kappa();
    let ftol = tol.max(T::lit(4.0) * T::epsilon()) * (T::one() + (p.a() * k - T::one()).abs());

    let mut lo = T::zero();
    let mut hi = T::one() / p.d();
    let mut doublings = 0;
    while sigma(p, hi) <= T::zero() {
        lo = hi;
        hi = hi + hi;
        doublings += 1;
        if !hi.is_finite() || doublings > 2000 {
            return Err(WaveError::NoConvergence { what: "dispersion bracket", iterations: doublings });
        }
    }
    let d = p.d();
    let root = newton_bracketed(
        |tau| (sigma(p, tau), k * k * zcoth_slope(tau * d)),
        lo,
        hi,
        ftol,
    )?;
    Ok(DispersionSolution {
        tau_star: root.x,
        lambda_star: T::lit(2.0) * T::PI() / root.x,
        iterations: root.iterations + doublings,
        residual: root.value.abs(),
        bracket: root.bracket,
    })
}

/// Limits in which the root has a closed-form approximation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum AsymptoticRegime {
    /// `d -> infinity`, `a != 0`.
    LargeDepth,
    /// `d -> d_c(a)` from above.
    NearCritical,
    /// `d -> d_s(a)` with `a > 0`.
    NearStagnation,
    /// Along the curve `a = -4/d^2`, `d -> 0`.
    CounterCurrentCurve,
}

impl AsymptoticRegime {
    pub const ALL: [AsymptoticRegime; 4] = [
        AsymptoticRegime::LargeDepth,
        AsymptoticRegime::NearCritical,
        AsymptoticRegime::NearStagnation,
        AsymptoticRegime::CounterCurrentCurve,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AsymptoticRegime::LargeDepth => "large-depth",
            AsymptoticRegime::NearCritical => "near-critical",
            AsymptoticRegime::NearStagnation => "near-stagnation",
            AsymptoticRegime::CounterCurrentCurve => "counter-current-curve",
        }
    }

    /// Number of nonzero terms kept in the root approximation.
    pub fn order(self) -> usize {
        match self {
            AsymptoticRegime::NearStagnation => 3,
            _ => 2,
        }
    }

    /// Checks that the regime's formulas are defined at `p`.
    pub fn check<T: Scalar>(self, p: &FlowParams<T>) -> Result<()> {
        let mismatch = |reason: &str| {
            Err(WaveError::RegimeMismatch { regime: self.name(), reason: reason.to_string() })
        };
        let (a, d) = (p.a(), p.d());
        match self {
            AsymptoticRegime::LargeDepth => {
                if a == T::zero() {
                    return mismatch("requires a != 0");
                }
            }
            AsymptoticRegime::NearCritical => {
                if p.require_subcritical().is_err() {
                    return mismatch("requires d > d_c(a)");
                }
            }
            AsymptoticRegime::NearStagnation => {
                if !(a > T::zero()) {
                    return mismatch("requires a > 0");
                }
                if d == stagnation_depth_unchecked(a) {
                    return mismatch("requires d != d_s(a)");
                }
            }
            AsymptoticRegime::CounterCurrentCurve => {
                let off = (a * d * d + T::lit(4.0)).abs();
                if off > T::lit(4e3) * T::epsilon() {
                    return mismatch("requires a = -4/d^2");
                }
            }
        }
        Ok(())
    }
}

/// Positive root of `q = 2 tanh q`.
pub fn large_depth_root<T: Scalar>() -> T {
    tanh_fixed_point(T::lit(2.0), T::lit(2.0))
}

/// Positive root of `n = (4/3) tanh n`.
pub fn counter_current_root<T: Scalar>() -> T {
    tanh_fixed_point(T::lit(4.0 / 3.0), T::one())
}

// Newton on q - c tanh q from a start to the right of the inflection.
fn tanh_fixed_point<T: Scalar>(c: T, start: T) -> T {
    let mut q = start;
    for _ in 0..60 {
        let th = q.tanh();
        let step = (q - c * th) / (T::one() - c * (T::one() - th * th));
        q = q - step;
        if step.abs() <= T::epsilon() * q {
            break;
        }
    }
    q
}

/// Leading terms of the root in the given regime.
pub fn tau_asymptotic<T: Scalar>(p: &FlowParams<T>, regime: AsymptoticRegime) -> Result<T> {
    regime.check(p)?;
    let (a, d) = (p.a(), p.d());
    let two = T::lit(2.0);
    let three = T::lit(3.0);
    Ok(match regime {
        AsymptoticRegime::LargeDepth => {
            let q1: T = large_depth_root();
            let q2 = T::lit(4.0) * q1 / (a * a * (q1 * q1 - two));
            q1 / d + q2 / (d * d)
        }
        AsymptoticRegime::NearCritical => {
            let dc = critical_depth(a);
            let eps = d - dc;
            let dc2 = dc * dc;
            let dc3 = dc2 * dc;
            let dc5 = dc3 * dc2;
            let gap = two - a * dc2;
            let s1 = three.sqrt() * (a * a * dc2 * dc2 + T::lit(12.0)).sqrt() / (dc.sqrt() * dc * gap);
            // The overall sign is opposite to the commonly quoted expression;
            // only this sign makes the remainder O(eps^{5/2}).
            let s3 = -T::lit(4.0)
                * three.sqrt()
                * (T::lit(14.0) * dc3 * dc3 + T::lit(5.0) * a * dc5 - T::lit(92.0) * dc3
                    - T::lit(50.0) * a * dc2
                    + T::lit(84.0))
                / (T::lit(5.0) * dc2 * dc.sqrt() * gap * gap * gap * (T::lit(4.0) - dc3).sqrt());
            s1 * eps.sqrt() + s3 * eps * eps.sqrt()
        }
        AsymptoticRegime::NearStagnation => {
            let eps = d - stagnation_depth_unchecked(a);
            let a32 = a * a.sqrt();
            let r2 = two.sqrt();
            T::one() / (a * a * eps * eps) + (T::one() + r2 * a32) / (r2 * a32 * eps)
                + (two * r2 * a32 - T::one()) / (T::lit(8.0) * a)
        }
        AsymptoticRegime::CounterCurrentCurve => {
            let n: T = counter_current_root();
            let n2 = n / (T::lit(9.0) * n * n - T::lit(4.0));
            n / d + n2 * d * d
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::laminar::bernoulli;
    use proptest::prelude::*;

    fn flow(a: f64, d: f64) -> FlowParams<f64> {
        FlowParams::new(a, d).unwrap()
    }

    fn tau(a: f64, d: f64) -> f64 {
        solve_dispersion(&flow(a, d), 1e-14).unwrap().tau_star
    }

    // Independent root: plain bisection on the tanh form.
    fn bisection_tau(a: f64, d: f64) -> f64 {
        let k = 1.0 / d - a * d / 2.0;
        let f = |t: f64| k * k * t / (t * d).tanh() + a * k - 1.0;
        let mut hi = 1.0 / d;
        while f(hi) < 0.0 {
            hi *= 2.0;
        }
        crate::roots::bisect(f, 1e-300, hi, 1e-15).unwrap().x
    }

    #[test]
    fn sigma_examples() {
        assert!((sigma(&flow(0.0, 2.0), 0.0) + 0.875).abs() < 1e-15);
        let p = flow(2.0, 1.0);
        for &t in &[0.0, 0.5, 3.0, 1e4] {
            assert_eq!(sigma(&p, t), -1.0);
        }
        // kappa^2 (4 coth 8) - 1 = coth 8 - 1 = 2 / (e^16 - 1)
        let s = sigma(&flow(0.0, 2.0), 4.0);
        assert!((s - 2.0 / 16f64.exp_m1()).abs() < 1e-15, "{s}");
    }

    #[test]
    fn sigma_prime_matches_differences() {
        let p = flow(0.0, 1.0);
        let h = 1e-6;
        let fd = (sigma(&p, 1.0 + h) - sigma(&p, 1.0 - h)) / (2.0 * h);
        assert!((sigma_prime(&p, 1.0).unwrap() - fd).abs() < 1e-8);
        let q = flow(-1.5, 0.8);
        let h = 1e-7;
        let fd = (sigma(&q, 1e-4 + h) - sigma(&q, 1e-4 - h)) / (2.0 * h);
        let exact = sigma_prime(&q, 1e-4).unwrap();
        assert!(exact > 0.0 && ((exact - fd) / exact).abs() < 1e-5);
        assert!(sigma_prime(&flow(2.0, 1.0), 1.0).is_err());
    }

    #[test]
    fn solve_examples() {
        let s = solve_dispersion(&flow(0.0, 2.0), 1e-14).unwrap();
        assert!((s.tau_star - bisection_tau(0.0, 2.0)).abs() < 1e-12);
        assert!((s.tau_star - 3.9999991).abs() < 1e-6);
        assert!((s.lambda_star * s.tau_star - 2.0 * std::f64::consts::PI).abs() < 1e-14);

        let q1: f64 = large_depth_root();
        let q2 = 4.0 * q1 / (q1 * q1 - 2.0);
        let approx = q1 / 50.0 + q2 / 2500.0;
        assert!(((tau(1.0, 50.0) - approx) / approx).abs() < 0.02);

        let near = tau(2.0, 1.01);
        let approx = tau_asymptotic(&flow(2.0, 1.01), AsymptoticRegime::NearStagnation).unwrap();
        assert!(((near - approx) / near).abs() < 0.05);
    }

    #[test]
    fn solve_refusals() {
        assert!(matches!(
            solve_dispersion(&flow(0.0, 0.9), 1e-12),
            Err(WaveError::NotSubcritical { .. })
        ));
        assert!(matches!(
            solve_dispersion(&flow(2.0, 1.0), 1e-12),
            Err(WaveError::SurfaceStagnation { .. })
        ));
        assert!(matches!(
            solve_dispersion(&flow(2.0, 1.0 + 1e-7), 1e-12),
            Err(WaveError::StagnationGuardBand { .. })
        ));
        // counter-current a < 0 has no surface stagnation, only bottom stagnation
        assert!(solve_dispersion(&flow(-2.0, 1.0), 1e-12).is_ok());
    }

    #[test]
    fn solve_handles_huge_wavenumbers() {
        let s = solve_dispersion(&flow(2.0, 1.001), 1e-14).unwrap();
        assert!(s.tau_star > 1e5);
        assert!(s.residual < 1e-12);
    }

    #[test]
    fn constants() {
        let q1: f64 = large_depth_root();
        assert!((q1 - 1.915008).abs() < 1e-6);
        assert!((q1 - 2.0 * q1.tanh()).abs() < 1e-15);
        let n: f64 = counter_current_root();
        assert!((n - 1.034021).abs() < 1e-6);
        assert!((n - 4.0 / 3.0 * n.tanh()).abs() < 1e-15);
        let q1f: f32 = large_depth_root();
        assert!((q1f - 1.915008).abs() < 1e-5);
    }

    #[test]
    fn near_critical_converges_quadratically() {
        let dc = critical_depth(0.0);
        let errs: Vec<f64> = [1e-2, 1e-3, 1e-4]
            .iter()
            .map(|&eps| {
                let p = flow(0.0, dc + eps);
                let exact = tau(0.0, dc + eps);
                ((tau_asymptotic(&p, AsymptoticRegime::NearCritical).unwrap() - exact) / exact).abs()
            })
            .collect();
        assert!(errs[1] < errs[0] / 10.0 && errs[2] < errs[1] / 10.0, "{errs:?}");
    }

    #[test]
    fn regime_preconditions() {
        assert!(tau_asymptotic(&flow(0.0, 20.0), AsymptoticRegime::LargeDepth).is_err());
        assert!(tau_asymptotic(&flow(-1.0, 2.0), AsymptoticRegime::NearStagnation).is_err());
        assert!(tau_asymptotic(&flow(-1.0, 1.5), AsymptoticRegime::CounterCurrentCurve).is_err());
        assert!(tau_asymptotic(&flow(-1.0, 2.0), AsymptoticRegime::CounterCurrentCurve).is_ok());
        assert!(tau_asymptotic(&flow(-16.0, 0.5), AsymptoticRegime::CounterCurrentCurve).is_ok());
        assert!(tau_asymptotic(&flow(0.0, 0.5), AsymptoticRegime::NearCritical).is_err());
    }

    #[test]
    fn f32_root() {
        let p = FlowParams::new(0.0_f32, 2.0).unwrap();
        let s = solve_dispersion(&p, 1e-6).unwrap();
        assert!((s.tau_star - 4.0).abs() < 1e-3);
    }

    proptest! {
        #[test]
        fn sigma_at_zero_is_minus_bernoulli_slope(a in -10.0_f64..10.0, d in 0.1_f64..5.0) {
            let p = flow(a, d);
            let lhs = sigma(&p, 0.0);
            let rhs = -bernoulli(&p).slope;
            prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + rhs.abs()));
        }

        #[test]
        fn sigma_is_increasing(a in -10.0_f64..10.0, d in 0.1_f64..5.0, t1 in 0.0_f64..20.0, dt in 1e-3_f64..10.0) {
            let p = flow(a, d);
            prop_assume!(p.kappa().abs() > 1e-3);
            prop_assert!(sigma(&p, t1) < sigma(&p, t1 + dt));
        }

        #[test]
        fn stable_coth_matches_naive(z in 1e-3_f64..30.0) {
            let naive = z.cosh() / z.sinh();
            prop_assert!((crate::hyperbolic::coth(z) - naive).abs() <= 1e-13 * naive);
        }

        #[test]
        fn solver_residual_and_continuity(a in -10.0_f64..10.0, frac in 0.05_f64..3.0) {
            let dc = critical_depth(a);
            let d = dc * (1.0 + frac);
            let p = flow(a, d);
            prop_assume!(check_surface_flow(&p).is_ok() && p.kappa().abs() > 1e-3);
            let s = solve_dispersion(&p, 1e-13).unwrap();
            let k = p.kappa();
            prop_assert!(s.residual <= 1e-13 * (1.0 + (a * k - 1.0).abs()));
            prop_assert!(s.tau_star > 0.0);
            prop_assert!((s.tau_star - bisection_tau(a, d)).abs() <= 1e-9 * s.tau_star);
            // no bracket jumps: the shift follows the implicit-function slope
            let h = 1e-6;
            let nudged = solve_dispersion(&flow(a, d + h), 1e-13).unwrap();
            let dsigma_dd = (sigma(&flow(a, d + 1e-7), s.tau_star) - sigma(&flow(a, d - 1e-7), s.tau_star)) / 2e-7;
            let predicted = -h * dsigma_dd / sigma_prime(&p, s.tau_star).unwrap();
            let shift = nudged.tau_star - s.tau_star;
            prop_assert!((shift - predicted).abs() <= 0.1 * predicted.abs() + 1e-9 * s.tau_star);
        }
    }
}
