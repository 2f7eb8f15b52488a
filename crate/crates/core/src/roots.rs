//! Bracketed scalar root finding.

use crate::error::{Result, WaveError};
use crate::scalar::Scalar;

/// Outcome of a bracketed solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root<T> {
    pub x: T,
    pub value: T,
    pub iterations: usize,
    /// Final bracket, `lo <= x <= hi`.
    pub bracket: (T, T),
}

const MAX_ITER: usize = 400;

/// Safeguarded Newton on `[lo, hi]` where `f(lo)` and `f(hi)` differ in sign.
///
/// `f` returns the value and derivative. A Newton step is taken only when it
/// lands strictly inside the current bracket; otherwise the bracket is bisected.
/// Stops once `|f| <= ftol` or the bracket is narrower than a few ulps.
pub fn newton_bracketed<T, F>(mut f: F, lo: T, hi: T, ftol: T) -> Result<Root<T>>
where
    T: Scalar,
    F: FnMut(T) -> (T, T),
{
    let (mut lo, mut hi) = (lo, hi);
    let (mut f_lo, _) = f(lo);
    let (f_hi, _) = f(hi);
    if f_lo == T::zero() {
        return Ok(Root { x: lo, value: f_lo, iterations: 0, bracket: (lo, lo) });
    }
    if f_hi == T::zero() {
        return Ok(Root { x: hi, value: f_hi, iterations: 0, bracket: (hi, hi) });
    }
    if (f_lo < T::zero()) == (f_hi < T::zero()) {
        return Err(WaveError::NoSignChange {
            what: "bracketed Newton",
            lo: lo.as_f64(),
            hi: hi.as_f64(),
        });
    }
    let half = T::lit(0.5);
    let mut x = half * (lo + hi);
    for iter in 1..=MAX_ITER {
        let (fx, dfx) = f(x);
        if fx.abs() <= ftol || fx == T::zero() {
            return Ok(Root { x, value: fx, iterations: iter, bracket: (lo, hi) });
        }
        if (fx < T::zero()) == (f_lo < T::zero()) {
            lo = x;
            f_lo = fx;
        } else {
            hi = x;
        }
        if hi - lo <= T::lit(4.0) * T::epsilon() * x.abs().max(T::min_positive_value()) {
            return Ok(Root { x, value: fx, iterations: iter, bracket: (lo, hi) });
        }
        let newton = x - fx / dfx;
        x = if dfx != T::zero() && newton > lo && newton < hi {
            newton
        } else {
            half * (lo + hi)
        };
    }
    Err(WaveError::NoConvergence { what: "bracketed Newton", iterations: MAX_ITER })
}

/// Plain bisection on `[lo, hi]` down to an absolute width `xtol`.
pub fn bisect<T, F>(mut f: F, lo: T, hi: T, xtol: T) -> Result<Root<T>>
where
    T: Scalar,
    F: FnMut(T) -> T,
{
    let (mut lo, mut hi) = (lo, hi);
    let mut f_lo = f(lo);
    let f_hi = f(hi);
    if (f_lo < T::zero()) == (f_hi < T::zero()) && f_lo != T::zero() && f_hi != T::zero() {
        return Err(WaveError::NoSignChange { what: "bisection", lo: lo.as_f64(), hi: hi.as_f64() });
    }
    let half = T::lit(0.5);
    let mut iterations = 0;
    while hi - lo > xtol && iterations < MAX_ITER {
        iterations += 1;
        let mid = half * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == T::zero() {
            return Ok(Root { x: mid, value: fm, iterations, bracket: (mid, mid) });
        }
        if (fm < T::zero()) == (f_lo < T::zero()) {
            lo = mid;
            f_lo = fm;
        } else {
            hi = mid;
        }
    }
    let x = half * (lo + hi);
    Ok(Root { x, value: f(x), iterations, bracket: (lo, hi) })
}
