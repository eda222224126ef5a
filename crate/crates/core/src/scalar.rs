use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating point type the metrics are computed in: `f32` or `f64`.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Sum + Debug + Display + Default + Send + Sync + 'static
{
    fn from_f64_lossy(v: f64) -> Self {
        <Self as FromPrimitive>::from_f64(v).expect("finite f64 converts to any float")
    }

    fn half() -> Self {
        Self::from_f64_lossy(0.5)
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Arithmetic mean; `None` for an empty input.
pub fn mean<T: Scalar>(values: impl IntoIterator<Item = T>) -> Option<T> {
    let mut n = 0usize;
    let mut sum = T::zero();
    for v in values {
        sum = sum + v;
        n += 1;
    }
    (n > 0).then(|| sum / T::from_usize(n).unwrap())
}
