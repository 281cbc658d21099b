//! Floating-point scalar abstraction shared by the metric and transform code.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Real scalar the metrics and transforms are generic over: `f32` or `f64`.
pub trait Scalar: Float + FromPrimitive + ToPrimitive + Sum + Debug + Display + Send + Sync + 'static {
    /// Converts an `f64` literal into this scalar type.
    #[inline]
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("f64 literal representable in scalar type")
    }

    #[inline]
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar type")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Arithmetic mean; zero for an empty slice.
pub fn mean<T: Scalar>(values: &[T]) -> T {
    if values.is_empty() {
        return T::zero();
    }
    values.iter().copied().sum::<T>() / T::from_count(values.len())
}

/// Population standard deviation (divides by N), computed in two passes.
///
/// Constant input yields exactly zero, independent of summation rounding.
pub fn population_std<T: Scalar>(values: &[T]) -> T {
    match values.first() {
        None => return T::zero(),
        Some(&first) if values.iter().all(|&v| v == first) => return T::zero(),
        _ => {}
    }
    let mu = mean(values);
    let var = values
        .iter()
        .map(|&v| {
            let d = v - mu;
            d * d
        })
        .sum::<T>()
        / T::from_count(values.len());
    var.sqrt()
}
