//! The uniform stream and the geometry of the `(a, d)` plane.

use serde::Serialize;

use crate::error::{Result, WaveError};
use crate::scalar::Scalar;

/// Where a laminar depth sits relative to the critical depth.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum FlowClass {
    /// `d > d_c(a)`: Stokes waves bifurcate.
    Subcritical,
    Critical,
    Supercritical,
}

/// Laminar region of a subcritical flow.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RegionTag {
    /// No stagnation point in the fluid: `d_c < d < d_s`.
    Theta,
    /// Counter-current with `a < 0`, stagnation below mid-depth.
    UpsilonMinus,
    /// Counter-current with `a > 0`, stagnation above mid-depth.
    UpsilonPlus,
    /// Within `1e-12` of the stagnation depth.
    Boundary,
}

/// Vorticity `a` and laminar depth `d`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FlowParams<T> {
    a: T,
    d: T,
}

impl<T: Scalar> FlowParams<T> {
    pub fn new(a: T, d: T) -> Result<Self> {
        if !(d > T::zero()) || !d.is_finite() {
            return Err(WaveError::InvalidDepth { d: d.as_f64() });
        }
        if !a.is_finite() {
            return Err(WaveError::OutOfRange {
                name: "a",
                value: a.as_f64(),
                lo: f64::MIN,
                hi: f64::MAX,
            });
        }
        Ok(Self { a, d })
    }

    #[inline]
    pub fn a(&self) -> T {
        self.a
    }

    #[inline]
    pub fn d(&self) -> T {
        self.d
    }

    /// Surface shear `U'(d) = 1/d - a d / 2`.
    #[inline]
    pub fn kappa(&self) -> T {
        T::one() / self.d - self.a * self.d / T::lit(2.0)
    }

    /// `a d^2`, the parameter the stagnation height depends on.
    #[inline]
    pub fn varsigma(&self) -> T {
        self.a * self.d * self.d
    }

    pub fn class(&self) -> FlowClass {
        let dc = critical_depth(self.a);
        let band = T::lit(16.0) * T::epsilon() * dc;
        if (self.d - dc).abs() <= band {
            FlowClass::Critical
        } else if self.d > dc {
            FlowClass::Subcritical
        } else {
            FlowClass::Supercritical
        }
    }

    /// Errors unless `d > d_c(a)`.
    pub fn require_subcritical(&self) -> Result<()> {
        match self.class() {
            FlowClass::Subcritical => Ok(()),
            _ => Err(WaveError::NotSubcritical {
                a: self.a.as_f64(),
                d: self.d.as_f64(),
                critical: critical_depth(self.a).as_f64(),
            }),
        }
    }

    /// Region tag; only meaningful for subcritical flows.
    pub fn region(&self) -> RegionTag {
        if self.a == T::zero() {
            return RegionTag::Theta;
        }
        let ds = stagnation_depth_unchecked(self.a);
        let band = T::lit(1e-12).max(T::lit(8.0) * T::epsilon() * ds);
        if (self.d - ds).abs() < band {
            RegionTag::Boundary
        } else if self.d < ds {
            RegionTag::Theta
        } else if self.a < T::zero() {
            RegionTag::UpsilonMinus
        } else {
            RegionTag::UpsilonPlus
        }
    }
}

/// Laminar stream function `U(y) = -(a/2) y (y - d) + y/d`.
pub fn stream_profile<T: Scalar>(p: &FlowParams<T>, y: T) -> Result<T> {
    let (a, d) = (p.a, p.d);
    if y < T::zero() || y > d || y.is_nan() {
        return Err(WaveError::OutsideDomain { x: f64::NAN, y: y.as_f64() });
    }
    if y == d {
        return Ok(T::one());
    }
    Ok(-(a / T::lit(2.0)) * y * (y - d) + y / d)
}

/// The Bernoulli function along laminar flows and its first two depth derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Bernoulli<T> {
    pub value: T,
    pub slope: T,
    pub curvature: T,
}

pub fn bernoulli<T: Scalar>(p: &FlowParams<T>) -> Bernoulli<T> {
    bernoulli_at(p.a, p.d)
}

fn bernoulli_at<T: Scalar>(a: T, d: T) -> Bernoulli<T> {
    let quarter = T::lit(0.25);
    let inv = T::one() / d;
    let a2 = a * a;
    Bernoulli {
        value: T::lit(0.5) * (inv * inv - a + a2 * d * d * quarter) + d,
        slope: -inv * inv * inv + a2 * d * quarter + T::one(),
        curvature: T::lit(3.0) * inv * inv * inv * inv + a2 * quarter,
    }
}

/// Critical depth: the minimiser of the Bernoulli function.
///
/// Closed form from the resolvent cubic of the quartic `s^4 - s - a^2/4 = 0`
/// in `s = 1/d`, followed by Newton polishing to recover the digits lost in
/// the nested radicals at large `|a|`.
pub fn critical_depth<T: Scalar>(a: T) -> T {
    if a == T::zero() {
        return T::one();
    }
    let two = T::lit(2.0);
    let p = a * a / T::lit(4.0);
    let r = (((T::lit(27.0) + T::lit(256.0) * p * p * p).sqrt()) / (T::lit(16.0) * T::lit(27.0).sqrt())
        + T::lit(1.0 / 16.0))
    .cbrt();
    let q = r - p / (T::lit(3.0) * r);
    let delta = (two * q).sqrt();
    let s = delta / two + (two / delta - delta * delta).max(T::zero()).sqrt() / two;
    let mut d = T::one() / s;
    for _ in 0..8 {
        let b = bernoulli_at(a, d);
        let step = b.slope / b.curvature;
        d = d - step;
        if step.abs() <= T::epsilon() * d {
            break;
        }
    }
    d
}

/// Stagnation depth `sqrt(2/|a|)`.
pub fn stagnation_depth<T: Scalar>(a: T) -> Result<T> {
    if a == T::zero() {
        return Err(WaveError::NoStagnationDepth);
    }
    Ok(stagnation_depth_unchecked(a))
}

#[inline]
pub(crate) fn stagnation_depth_unchecked<T: Scalar>(a: T) -> T {
    (T::lit(2.0) / a.abs()).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SurfaceShear<T> {
    pub kappa: T,
    /// `1 - a kappa`.
    pub rho_hat0: T,
}

pub fn surface_shear<T: Scalar>(p: &FlowParams<T>) -> SurfaceShear<T> {
    let kappa = p.kappa();
    SurfaceShear { kappa, rho_hat0: T::one() - p.a * kappa }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StagnationHeight<T> {
    /// Height of the zero of `U'`; infinite for `a = 0`.
    pub y_star: T,
    /// `y_star / d = (ς + 2) / (2ς)` with `ς = a d^2`.
    pub relative: T,
    pub region: RegionTag,
}

pub fn stagnation_height<T: Scalar>(p: &FlowParams<T>) -> Result<StagnationHeight<T>> {
    p.require_subcritical()?;
    let region = p.region();
    if p.a == T::zero() {
        return Ok(StagnationHeight { y_star: T::infinity(), relative: T::infinity(), region });
    }
    let vs = p.varsigma();
    let relative = (vs + T::lit(2.0)) / (T::lit(2.0) * vs);
    Ok(StagnationHeight { y_star: relative * p.d, relative, region })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn flow(a: f64, d: f64) -> FlowParams<f64> {
        FlowParams::new(a, d).unwrap()
    }

    fn bisect_critical(a: f64) -> f64 {
        crate::roots::bisect(|d| bernoulli_at(a, d).slope, 1e-3, 1.0 + 1e-9, 1e-15)
            .unwrap()
            .x
    }

    #[test]
    fn rejects_bad_depth() {
        assert!(FlowParams::new(1.0, 0.0).is_err());
        assert!(FlowParams::new(1.0, -2.0).is_err());
        assert!(FlowParams::new(1.0, f64::NAN).is_err());
    }

    #[test]
    fn stream_profile_values() {
        let p = flow(-4.0, 1.0);
        assert_eq!(stream_profile(&p, 0.0).unwrap(), 0.0);
        assert_eq!(stream_profile(&p, 1.0).unwrap(), 1.0);
        // 2 (0.5)(-0.5) + 0.5
        assert!(stream_profile(&p, 0.5).unwrap().abs() < 1e-15);
        assert!((stream_profile(&p, 0.25).unwrap() - (2.0 * 0.25 * -0.75 + 0.25)).abs() < 1e-15);
        assert!(stream_profile(&p, 1.5).is_err());
        assert!(stream_profile(&p, -0.1).is_err());
    }

    #[test]
    fn bernoulli_values() {
        assert_eq!(bernoulli(&flow(0.0, 1.0)).slope, 0.0);
        assert!((bernoulli(&flow(0.0, 2.0)).slope - 0.875).abs() < 1e-15);
        let dc = critical_depth(2.0);
        assert!(bernoulli(&flow(2.0, dc)).slope.abs() < 1e-12);
    }

    #[test]
    fn critical_depth_examples() {
        assert_eq!(critical_depth(0.0_f64), 1.0);
        assert!((critical_depth(2.0_f64) - bisect_critical(2.0)).abs() < 1e-12);
        assert!((critical_depth(2.0_f64) - 0.81919).abs() < 1e-4);
        let a: f64 = 100.0;
        let series = 2f64.sqrt() / 10.0 - 1e-4 + 3.0 / (2f64.powf(1.5) * 1e7) - 1e-10;
        assert!(((critical_depth(a) - series) / series).abs() < 1e-6);
    }

    #[test]
    fn stagnation_depth_examples() {
        assert_eq!(stagnation_depth(2.0_f64).unwrap(), 1.0);
        assert_eq!(stagnation_depth(-2.0_f64).unwrap(), 1.0);
        assert_eq!(stagnation_depth(-0.5_f64).unwrap(), 2.0);
        assert_eq!(stagnation_depth(0.0_f64), Err(WaveError::NoStagnationDepth));
    }

    #[test]
    fn surface_shear_examples() {
        assert_eq!(surface_shear(&flow(2.0, 1.0)).kappa, 0.0);
        let s = surface_shear(&flow(0.0, 2.0));
        assert_eq!((s.kappa, s.rho_hat0), (0.5, 1.0));
        let s = surface_shear(&flow(-4.0, 1.0));
        assert_eq!((s.kappa, s.rho_hat0), (3.0, 13.0));
    }

    #[test]
    fn stagnation_height_examples() {
        let at_surface = stagnation_height(&flow(2.0, 1.0)).unwrap();
        assert_eq!(at_surface.relative, 1.0);
        assert_eq!(at_surface.region, RegionTag::Boundary);
        let at_bottom = stagnation_height(&flow(-2.0, 1.0)).unwrap();
        assert_eq!(at_bottom.relative, 0.0);
        let deep = stagnation_height(&flow(-4.0, 2f64.sqrt())).unwrap();
        assert!((deep.relative - 0.375).abs() < 1e-15);
        assert_eq!(deep.region, RegionTag::UpsilonMinus);
        assert!(stagnation_height(&flow(2.0, 0.5)).is_err());
    }

    #[test]
    fn regions_are_consistent() {
        assert_eq!(flow(1.0, 1.2).region(), RegionTag::Theta);
        assert_eq!(flow(1.0, 1.6).region(), RegionTag::UpsilonPlus);
        assert_eq!(flow(-1.0, 1.6).region(), RegionTag::UpsilonMinus);
        assert_eq!(flow(0.0, 100.0).region(), RegionTag::Theta);
        let up = stagnation_height(&flow(1.0, 1.6)).unwrap();
        assert!(up.relative > 0.5 && up.relative < 1.0);
        let down = stagnation_height(&flow(-1.0, 1.6)).unwrap();
        assert!(down.relative > 0.0 && down.relative < 0.5);
    }

    #[test]
    fn classification_in_f32() {
        let dc = critical_depth(2.0_f32);
        assert!((dc - 0.81919).abs() < 1e-4);
        assert_eq!(FlowParams::new(2.0_f32, 0.9).unwrap().class(), FlowClass::Subcritical);
        assert_eq!(FlowParams::new(2.0_f32, 0.7).unwrap().class(), FlowClass::Supercritical);
    }

    #[test]
    fn stagnation_height_limits() {
        let y = |vs: f64| (vs + 2.0) / (2.0 * vs);
        let mut prev = y(2.0);
        for k in 1..60 {
            let vs = 2.0 + 0.5 * k as f64;
            assert!(y(vs) < prev && y(vs) > 0.5);
            prev = y(vs);
        }
        let mut prev = y(-2.0);
        for k in 1..60 {
            let vs = -2.0 - 0.5 * k as f64;
            assert!(y(vs) > prev && y(vs) < 0.5);
            prev = y(vs);
        }
    }

    proptest! {
        #[test]
        fn critical_depth_is_a_convex_minimum(a in -20.0_f64..20.0) {
            let dc = critical_depth(a);
            let b = bernoulli_at(a, dc);
            prop_assert!(b.slope.abs() < 1e-10);
            prop_assert!(b.curvature > 0.0);
            prop_assert!(dc <= 1.0);
            prop_assert!(a == 0.0 || dc < 1.0);
        }

        #[test]
        fn critical_depth_matches_bisection(a in -50.0_f64..50.0) {
            prop_assert!((critical_depth(a) - bisect_critical(a)).abs() < 1e-10);
        }

        #[test]
        fn stagnation_lies_beyond_critical(a in -50.0_f64..50.0) {
            prop_assume!(a.abs() > 1e-9);
            prop_assert!(stagnation_depth(a).unwrap() > critical_depth(a));
        }

        #[test]
        fn class_agrees_with_sign(a in -10.0_f64..10.0, d in 0.05_f64..5.0) {
            let p = flow(a, d);
            let dc = critical_depth(a);
            let expected = if d > dc { FlowClass::Subcritical } else { FlowClass::Supercritical };
            prop_assume!((d - dc).abs() > 1e-12);
            prop_assert_eq!(p.class(), expected);
        }
    }
}
