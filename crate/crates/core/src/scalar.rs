//! Scalar abstraction for the numerical kernels.
//!
//! Everything downstream is generic over [`Real`], which is any IEEE-style
//! float with the `num-traits` surface we need. `f64` is the production
//! scalar; `f32` works for smoke-level accuracy.

use std::fmt::{Debug, Display};

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};

/// Floating-point scalar used throughout the crate.
pub trait Real:
    Float + FloatConst + FromPrimitive + NumAssign + Debug + Display + Send + Sync + 'static
{
    /// Convert an `f64` literal. Panics only if the literal is not
    /// representable, which cannot happen for the constants in this crate.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal not representable in scalar type")
    }

    /// Machine epsilon of the concrete scalar.
    #[inline]
    fn eps() -> Self {
        Self::epsilon()
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Complex number over the crate scalar.
pub type C<T> = Complex<T>;

/// `0 + 0i`.
#[inline]
pub fn czero<T: Real>() -> C<T> {
    Complex::new(T::zero(), T::zero())
}

/// `1 + 0i`.
#[inline]
pub fn cone<T: Real>() -> C<T> {
    Complex::new(T::one(), T::zero())
}

/// Purely imaginary unit.
#[inline]
pub fn ci<T: Real>() -> C<T> {
    Complex::new(T::zero(), T::one())
}

/// Real constant as a complex number.
#[inline]
pub fn creal<T: Real>(x: T) -> C<T> {
    Complex::new(x, T::zero())
}

/// Relative difference `|a - b| / max(|a|, |b|, floor)`.
///
/// The floor guards the all-zero case; callers comparing quantities of
/// order one can leave it at `1`.
pub fn rel_diff<T: Real>(a: T, b: T, floor: T) -> T {
    let scale = a.abs().max(b.abs()).max(floor);
    (a - b).abs() / scale
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn literals_convert_exactly() {
        assert_eq!(f64::lit(0.5), 0.5);
        assert_eq!(f32::lit(0.25), 0.25f32);
    }

    #[test]
    fn rel_diff_uses_floor() {
        assert_eq!(rel_diff(0.0f64, 0.0, 1.0), 0.0);
        assert!((rel_diff(1.0f64, 1.0 + 1e-9, 1.0) - 1e-9).abs() < 1e-12);
    }
}
