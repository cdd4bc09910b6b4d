//! Floating point abstraction shared by the deterministic numerics.
//!
//! Everything that does not draw random numbers is written against
//! [`Scalar`], so the path and test statistics can be evaluated in `f32`
//! as well as `f64`. Tolerances are carried per type: the `f64` values are
//! the contract values, the `f32` ones are scaled to its precision.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};

pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Debug + Display + Sum + Send + Sync + Default + 'static
{
    /// Relative tolerance on the smallest pivot of a QR factorisation.
    const RANK_TOL: f64;
    /// Stopping tolerance on the KKT residual of coordinate descent.
    const KKT_TOL: f64;
    /// Tolerance for the unit-norm column contract.
    const UNIT_NORM_TOL: f64;
    /// Two knot candidates closer than this are treated as a tie.
    const TIE_TOL: f64;
    /// Orthogonalized candidates with a smaller norm are dropped.
    const COLLINEAR_TOL: f64;

    /// Converts an `f64` literal. Panics only for values the type cannot hold.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f64 {
    const RANK_TOL: f64 = 1e-10;
    const KKT_TOL: f64 = 1e-10;
    const UNIT_NORM_TOL: f64 = 1e-8;
    const TIE_TOL: f64 = 1e-10;
    const COLLINEAR_TOL: f64 = 1e-10;
}

impl Scalar for f32 {
    const RANK_TOL: f64 = 1e-5;
    const KKT_TOL: f64 = 2e-5;
    const UNIT_NORM_TOL: f64 = 1e-5;
    const TIE_TOL: f64 = 1e-5;
    const COLLINEAR_TOL: f64 = 1e-4;
}

pub(crate) fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

pub(crate) fn norm2<T: Scalar>(a: &[T]) -> T {
    dot(a, a).sqrt()
}

pub(crate) fn norm1<T: Scalar>(a: &[T]) -> T {
    a.iter().fold(T::zero(), |acc, &x| acc + x.abs())
}

pub(crate) fn axpy<T: Scalar>(alpha: T, x: &[T], y: &mut [T]) {
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi = *yi + alpha * xi;
    }
}
