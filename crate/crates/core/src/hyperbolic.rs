//! Overflow-free hyperbolic helpers.
//!
//! Everything is written in terms of `exp_m1` of non-positive arguments so
//! that `tau * d` can reach `1e5` without producing `inf / inf`.

use crate::scalar::Scalar;

/// `coth(z)`, evaluated as `1 + 2 / (exp(2z) - 1)`. Returns `+inf` at zero.
pub fn coth<T: Scalar>(z: T) -> T {
    if z < T::zero() {
        return -coth(-z);
    }
    if z == T::zero() {
        return T::infinity();
    }
    T::one() + T::lit(2.0) / (T::lit(2.0) * z).exp_m1()
}

/// `z coth(z)`, even in `z`, equal to 1 at the origin.
pub fn zcoth<T: Scalar>(z: T) -> T {
    let z = z.abs();
    if z == T::zero() {
        return T::one();
    }
    let two_z = T::lit(2.0) * z;
    z + two_z / two_z.exp_m1()
}

/// Derivative of `z coth(z)`: `coth(z) - z / sinh(z)^2`.
///
/// Equals `2z/3 + O(z^3)` at the origin, where the two terms cancel; a
/// Taylor polynomial is used below the crossover where that cancellation
/// would cost more than the truncation.
pub fn zcoth_slope<T: Scalar>(z: T) -> T {
    if z < T::zero() {
        return -zcoth_slope(-z);
    }
    let crossover = (T::epsilon() / T::lit(3e-4)).powf(T::lit(0.1));
    if z < crossover {
        let z2 = z * z;
        // d/dz of 1 + z^2/3 - z^4/45 + 2 z^6/945 - z^8/4725
        return z
            * (T::lit(2.0 / 3.0)
                + z2 * (T::lit(-4.0 / 45.0)
                    + z2 * (T::lit(12.0 / 945.0) + z2 * T::lit(-8.0 / 4725.0))));
    }
    let sinh = z.sinh();
    coth(z) - z / (sinh * sinh)
}

/// The profile `sinh(s y) / sinh(s d)` and its first three `y`-derivatives.
///
/// At `s = 0` this degenerates to `y / d`. Valid for `y >= 0`, including
/// `y` slightly above `d`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SinhProfile<T> {
    pub value: T,
    pub slope: T,
    pub curvature: T,
    pub third: T,
}

impl<T: Scalar> SinhProfile<T> {
    pub fn new(y: T, s: T, d: T) -> Self {
        if s == T::zero() {
            return Self {
                value: y / d,
                slope: T::one() / d,
                curvature: T::zero(),
                third: T::zero(),
            };
        }
        let two = T::lit(2.0);
        let scale = (s * (y - d)).exp() / -(-two * s * d).exp_m1();
        let sh = scale * -(-two * s * y).exp_m1();
        let ch = scale * (T::one() + (-two * s * y).exp());
        Self {
            value: sh,
            slope: s * ch,
            curvature: s * s * sh,
            third: s * s * s * ch,
        }
    }
}
