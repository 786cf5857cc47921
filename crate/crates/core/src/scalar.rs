//! Scalar traits the solver is generic over.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, Num, ToPrimitive};

/// Anything the Wick algebra can convolve: a commutative ring element.
///
/// Implemented for the float types and for exact types such as
/// `num_rational::Rational64`, which makes the algebra laws checkable
/// without rounding.
pub trait Coeff: Num + Copy + Send + Sync + Debug + 'static {}

impl<T: Num + Copy + Send + Sync + Debug + 'static> Coeff for T {}

/// Real floating-point scalar used by the analytic functions, the
/// time-steppers and the diagnostics: f32 or f64.
pub trait Real:
    Coeff + Float + FloatConst + FromPrimitive + ToPrimitive + Sum + Display + LowerExp
{
    /// Lossy conversion from an `f64` literal.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}
