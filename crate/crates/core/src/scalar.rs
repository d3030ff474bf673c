//! Scalar abstraction shared by every geometric and energetic computation.

use nalgebra as na;
use num_traits as nt;

/// Floating point types the library can be instantiated with (`f32`, `f64`).
pub trait Real:
    na::RealField + Copy + nt::FloatConst + nt::FromPrimitive + nt::ToPrimitive + Send + Sync + 'static
{
    const INFINITY: Self;
    const ZERO: Self;
    const ONE: Self;
    const HALF: Self;

    /// Converts an `f64` literal; exact for `f64`, rounded for `f32`.
    fn lit(x: f64) -> Self;

    fn as_f64(self) -> f64;

    fn is_finite_value(self) -> bool {
        self.as_f64().is_finite()
    }
}

macro_rules! impl_real {
    ($f:ty) => {
        impl Real for $f {
            const INFINITY: Self = <$f>::INFINITY;
            const ZERO: Self = 0.0;
            const ONE: Self = 1.0;
            const HALF: Self = 0.5;

            #[inline]
            fn lit(x: f64) -> Self {
                x as $f
            }

            #[inline]
            fn as_f64(self) -> f64 {
                self as f64
            }
        }
    };
}

impl_real!(f32);
impl_real!(f64);

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn infinity_is_not_finite() {
        assert!(!<f64 as Real>::INFINITY.is_finite_value());
        assert!(!<f32 as Real>::INFINITY.is_finite_value());
        assert!(f32::lit(0.5).is_finite_value());
    }
}
