//! Real scalar abstraction underlying all complex linear algebra.
//!
//! Every numeric routine in this crate is generic over the real field behind
//! the complex entries, so the same code runs in `f32` and `f64`. The
//! concrete aliases at the crate root pin `f64` as the default precision.

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};
use std::fmt::{Debug, Display};
use std::iter::Sum;

/// Real scalar type (f32 or f64) usable as the base field of the toolkit.
pub trait Scalar:
    Float
    + FloatConst
    + NumAssign
    + FromPrimitive
    + ToPrimitive
    + Sum
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
}

impl<T> Scalar for T where
    T: Float
        + FloatConst
        + NumAssign
        + FromPrimitive
        + ToPrimitive
        + Sum
        + Debug
        + Display
        + Send
        + Sync
        + 'static
{
}

/// Complex number over a [`Scalar`].
pub type C<T> = Complex<T>;

/// Shorthand for converting an `f64` constant into the working scalar type.
#[inline]
pub fn r<T: Scalar>(x: f64) -> T {
    T::from_f64(x).expect("f64 constant not representable in scalar type")
}

/// Default tolerances scaled to the working precision.
///
/// The values are the `f64` defaults; for lower-precision scalars they are
/// floored at a multiple of the machine epsilon so the checks remain
/// meaningful.
#[derive(Debug, Clone, Copy)]
pub struct Tolerances<T> {
    /// Unitarity check on group elements (Frobenius).
    pub unit: T,
    /// Group element matching / closure check (Frobenius).
    pub group: T,
    /// Block-structure and invariance checks (Frobenius).
    pub structure: T,
    /// Relative singular value cutoff for rank decisions.
    pub rank: T,
}

impl<T: Scalar> Default for Tolerances<T> {
    fn default() -> Self {
        let floor = |v: f64, mult: f64| {
            let base = r::<T>(v);
            let eps_floor = T::epsilon() * r::<T>(mult);
            if base > eps_floor {
                base
            } else {
                eps_floor
            }
        };
        Tolerances {
            unit: floor(1e-10, 1e3),
            group: floor(1e-8, 1e5),
            structure: floor(1e-8, 1e5),
            rank: floor(1e-9, 1e4),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f64_defaults_match_contract() {
        let t = Tolerances::<f64>::default();
        assert_eq!(t.unit, 1e-10);
        assert_eq!(t.group, 1e-8);
        assert_eq!(t.structure, 1e-8);
        assert_eq!(t.rank, 1e-9);
    }

    #[test]
    fn f32_defaults_are_above_epsilon() {
        let t = Tolerances::<f32>::default();
        assert!(t.unit > f32::EPSILON);
        assert!(t.group > f32::EPSILON);
    }
}
