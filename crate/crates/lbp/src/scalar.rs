use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating point type the analysis runs over: `f32` or `f64`.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Debug + Display + Default + Sum + Send + Sync + 'static
{
    /// Converts an `f64` literal. Every finite `f64` is representable (possibly rounded) in both
    /// supported types, so this never fails for finite input.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("finite literal")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar converts to f64")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// `ln((d·e^z + 1) / (d + e^z))` for `d ≥ 1`, `z ≥ 0`, evaluated without overflowing for large `z`.
///
/// This is the log of the one-message contraction `(dE+1)/(d+E)`; it lies in `[0, ln d]`.
pub fn log_contraction<F: Scalar>(d: F, z: F) -> F {
    if z.is_infinite() {
        return d.ln();
    }
    let t = (-z).exp();
    let v = (d + t).ln() - (F::one() + d * t).ln();
    v.max(F::zero())
}
