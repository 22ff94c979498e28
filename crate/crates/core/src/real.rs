use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive};

/// Scalar type the solver is generic over: `f32` or `f64`.
pub trait Real: Float + FloatConst + FromPrimitive + Sum + Debug + Display + LowerExp + Default + Send + Sync + 'static {
    /// Converts an `f64` literal, saturating to zero or infinity when the
    /// value is not representable.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).unwrap_or_else(Self::nan)
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).unwrap_or_else(Self::infinity)
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Smallest pivot magnitude the band solvers accept.
    fn pivot_floor() -> Self;
}

impl Real for f32 {
    fn pivot_floor() -> Self {
        f32::MIN_POSITIVE
    }
}

impl Real for f64 {
    fn pivot_floor() -> Self {
        1e-300
    }
}
