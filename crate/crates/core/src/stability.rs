//! Exchange-of-stability quantities: the curvature of the second eigenvalue
//! along the branch and the formal-stability coefficient.

use serde::Serialize;

use crate::dispersion::{counter_current_root, large_depth_root, sigma, AsymptoticRegime};
use crate::error::{Result, WaveError};
use crate::expansion::{expansion_coefficients, ExpansionCoefficients};
use crate::hyperbolic::{coth, zcoth_slope};
use crate::laminar::{critical_depth, stagnation_depth_unchecked, FlowParams, RegionTag};
use crate::scalar::{negligible, Scalar};

/// `H(z) = z + (1 - z coth z) coth z`, the derivative of `z coth z`.
///
/// Odd in `z`, zero at the origin and increasing.
pub fn h_function<T: Scalar>(z: T) -> T {
    zcoth_slope(z)
}

/// The second eigenvalue curvature and its factorisation `mu2 = -A lambda2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SecondEigenvalue<T> {
    pub mu2: T,
    pub lambda2: T,
    /// `2 kappa^2 tau H(tau d)`, positive.
    pub a_factor: T,
    pub h_value: T,
    pub tau_star: T,
    pub kappa: T,
}

pub fn mu2<T: Scalar>(p: &FlowParams<T>) -> Result<SecondEigenvalue<T>> {
    let c = expansion_coefficients(p, T::zero())?;
    Ok(mu2_from(p, &c))
}

pub(crate) fn mu2_from<T: Scalar>(p: &FlowParams<T>, c: &ExpansionCoefficients<T>) -> SecondEigenvalue<T> {
    let tau = c.tau_star;
    let k = c.kappa;
    let h_value = h_function(tau * p.d());
    let a_factor = T::lit(2.0) * k * k * tau * h_value;
    let lambda2 = c.third.period_curvature;
    SecondEigenvalue { mu2: -a_factor * lambda2, lambda2, a_factor, h_value, tau_star: tau, kappa: k }
}

/// The unreduced expression `-2 k^2 tau lambda2 (tau d + (1 - (1 - a k) d / k^2) coth(tau d))`.
///
/// Equal to [`mu2`] on the dispersion root; kept as an independent check.
pub fn mu2_unreduced<T: Scalar>(p: &FlowParams<T>) -> Result<T> {
    let c = expansion_coefficients(p, T::zero())?;
    let (a, d) = (p.a(), p.d());
    let k = c.kappa;
    let tau = c.tau_star;
    let z = tau * d;
    let bracket = z + (T::one() - (T::one() - a * k) * d / (k * k)) * coth(z);
    Ok(-T::lit(2.0) * k * k * tau * c.third.period_curvature * bracket)
}

/// `m = (q^6 - 11 q^4 + 28 q^2 - 16) / (8 q^2)` with `q = 2 tanh q`.
pub fn large_depth_coefficient<T: Scalar>() -> T {
    let q: T = large_depth_root();
    let q2 = q * q;
    (((q2 - T::lit(11.0)) * q2 + T::lit(28.0)) * q2 - T::lit(16.0)) / (T::lit(8.0) * q2)
}

/// `M = (729 n^6 - 3078 n^4 + 3168 n^2 - 512) / (54 n^2)` with `n = (4/3) tanh n`.
pub fn counter_current_coefficient<T: Scalar>() -> T {
    let n: T = counter_current_root();
    let n2 = n * n;
    (((T::lit(729.0) * n2 - T::lit(3078.0)) * n2 + T::lit(3168.0)) * n2 - T::lit(512.0)) / (T::lit(54.0) * n2)
}

/// Leading behaviour of `mu2` in a limiting regime.
pub fn mu2_asymptotic<T: Scalar>(p: &FlowParams<T>, regime: AsymptoticRegime) -> Result<T> {
    regime.check(p)?;
    let (a, d) = (p.a(), p.d());
    Ok(match regime {
        AsymptoticRegime::LargeDepth => large_depth_coefficient::<T>() * a * a / d,
        AsymptoticRegime::NearCritical => {
            let dc = critical_depth(a);
            let dc2 = dc * dc;
            let dc3 = dc2 * dc;
            let dc5 = dc3 * dc2;
            let singular = T::lit(5.0) * (T::lit(4.0) - dc3) / (T::lit(12.0) * dc2 * dc2);
            let regular = (T::lit(47.0) * dc3 * dc3 + T::lit(15.0) * a * dc5 - T::lit(361.0) * dc3
                - T::lit(195.0) * a * dc2
                + T::lit(422.0))
                / (T::lit(30.0) * dc5 * (dc3 + a * dc2 - T::lit(2.0)));
            singular / (d - dc) + regular
        }
        AsymptoticRegime::NearStagnation => {
            let eps = d - stagnation_depth_unchecked(a);
            let a2 = a * a;
            -T::lit(2.0) / (a2 * a2 * eps * eps * eps * eps)
        }
        AsymptoticRegime::CounterCurrentCurve => counter_current_coefficient::<T>() / d.powi(5),
    })
}

/// First-eigenvalue data and the formal-stability coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FormalStability<T> {
    /// First laminar eigenvalue `sigma(0)`, negative for subcritical flow.
    pub mu0: T,
    /// Correction of the first eigenfunction.
    pub p0: T,
    /// `p0 + gamma'(d; tau)`.
    pub c: T,
    /// `(c^2 / 2) mu0 + mu2`.
    pub b: T,
    pub mu2: T,
}

pub fn p0_and_b<T: Scalar>(p: &FlowParams<T>) -> Result<FormalStability<T>> {
    let c = expansion_coefficients(p, T::zero())?;
    formal_stability_from(p, &c)
}

pub(crate) fn formal_stability_from<T: Scalar>(
    p: &FlowParams<T>,
    c: &ExpansionCoefficients<T>,
) -> Result<FormalStability<T>> {
    let (a, d) = (p.a(), p.d());
    let k = c.kappa;
    let mu0 = sigma(p, T::zero());
    if negligible(mu0, T::one()) {
        return Err(WaveError::Criticality);
    }
    let tau = c.tau_star;
    let k3 = k * k * k;
    let d2 = d * d;
    let p0 = (d2 * k3 * tau * tau - a * d2 - k3 - T::lit(2.0) * d * k) / (d2 * k * mu0);
    let cc = p0 + c.surface_slopes[0];
    let mu2 = mu2_from(p, c).mu2;
    Ok(FormalStability { mu0, p0, c: cc, b: cc * cc / T::lit(2.0) * mu0 + mu2, mu2 })
}

/// Coefficients of `B = B_sing / (d - d_c) + B_reg + O(d - d_c)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NearCriticalB<T> {
    pub singular: T,
    pub regular: T,
}

pub fn b_asymptotic_near_critical<T: Scalar>(a: T) -> NearCriticalB<T> {
    let dc = critical_depth(a);
    let dc2 = dc * dc;
    let dc3 = dc2 * dc;
    let dc5 = dc3 * dc2;
    NearCriticalB {
        singular: (dc3 - T::lit(4.0)) / (T::lit(12.0) * dc2 * dc2),
        regular: (T::lit(13.0) * dc3 * dc3 + T::lit(15.0) * a * dc5 - T::lit(209.0) * dc3
            - T::lit(195.0) * a * dc2
            + T::lit(358.0))
            / (T::lit(30.0) * dc5 * (T::lit(2.0) - dc3 - a * dc2)),
    }
}

/// Everything the stability analysis reports at one `(a, d)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StabilityReport<T> {
    pub a: T,
    pub d: T,
    pub tau_star: T,
    pub kappa: T,
    pub region: RegionTag,
    pub mu2: T,
    pub lambda2: T,
    pub a_factor: T,
    pub h_value: T,
    pub mu0: T,
    pub p0: T,
    pub c: T,
    pub b: T,
}

pub fn stability_report<T: Scalar>(p: &FlowParams<T>) -> Result<StabilityReport<T>> {
    let c = expansion_coefficients(p, T::zero())?;
    let second = mu2_from(p, &c);
    let formal = formal_stability_from(p, &c)?;
    Ok(StabilityReport {
        a: p.a(),
        d: p.d(),
        tau_star: c.tau_star,
        kappa: c.kappa,
        region: p.region(),
        mu2: second.mu2,
        lambda2: second.lambda2,
        a_factor: second.a_factor,
        h_value: second.h_value,
        mu0: formal.mu0,
        p0: formal.p0,
        c: formal.c,
        b: formal.b,
    })
}
