use std::fmt::{Debug, Display, LowerExp};

use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};

/// Real scalar the matrix kernel is generic over.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + NumAssign + Default + Debug + Display + LowerExp + Send + Sync + 'static
{
    /// Converts an `f64` literal into the scalar type.
    #[inline]
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Smallest relative tolerance that is meaningful for this type.
    #[inline]
    fn floor_tol(requested: f64) -> Self {
        let eps = Self::epsilon() * Self::of(16.0);
        Self::of(requested).max(eps)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
