//! Floating-point abstraction shared by the model, likelihood and solver.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign};

/// Real scalar the model is computed in: `f32` or `f64`.
pub trait Scalar:
    Float + FromPrimitive + NumAssign + Sum + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts an `f64` constant into this scalar (rounding as `as` would).
    #[inline]
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("finite f64 constant")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Smallest probability allowed inside a logarithm.
    ///
    /// `1e-12` for `f64`; for `f32` it is raised to machine epsilon so that
    /// `1 - floor` stays below one.
    #[inline]
    fn prob_floor() -> Self {
        Self::of(1e-12).max(Self::epsilon())
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

#[inline]
pub(crate) fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

#[inline]
pub(crate) fn sigmoid<T: Scalar>(z: T) -> T {
    if z >= T::zero() {
        T::one() / (T::one() + (-z).exp())
    } else {
        let e = z.exp();
        e / (T::one() + e)
    }
}

/// `ln(1 - exp(-d))`, accurate for small `d`.
#[inline]
pub(crate) fn log_one_minus_exp_neg<T: Scalar>(d: T) -> T {
    (-(-d).exp_m1()).ln()
}
