//! Floating-point abstraction shared by every numeric kernel.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Real scalar the numeric kernels are generic over (`f32` or `f64`).
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Sum + Debug + Display + Default + Send + Sync + 'static
{
    /// Lossy conversion from an `f64` literal.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    /// Conversion from a count.
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar type")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Probability floor applied before any logarithm of a probability.
pub fn prob_floor<T: Scalar>() -> T {
    T::lit(1e-12)
}

/// `ln(max(p, floor))`.
pub fn floored_ln<T: Scalar>(p: T) -> T {
    p.max(prob_floor()).ln()
}

/// Numerically stable `ln((1/n) Σ exp(x_i))`.
///
/// Returns the common value exactly when every input is identical.
pub fn log_mean_exp<T: Scalar>(xs: &[T]) -> T {
    assert!(!xs.is_empty(), "log_mean_exp of empty slice");
    let max = xs.iter().copied().fold(T::neg_infinity(), T::max);
    if max == T::neg_infinity() {
        return max;
    }
    let sum: T = xs.iter().map(|&x| (x - max).exp()).sum();
    max + (sum / T::from_count(xs.len())).ln()
}

/// Arithmetic mean; `None` for an empty slice.
pub fn mean<T: Scalar>(xs: &[T]) -> Option<T> {
    if xs.is_empty() {
        None
    } else {
        Some(xs.iter().copied().sum::<T>() / T::from_count(xs.len()))
    }
}
