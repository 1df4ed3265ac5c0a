use core::fmt::{Debug, Display};
use core::iter::Sum;
use core::ops::{AddAssign, DivAssign, MulAssign, SubAssign};

use num_traits::Float;

/// Floating-point element type of tensors.
///
/// Models train in `f32`; the same code instantiated at `f64` is used when
/// finite differences need more headroom than single precision offers.
pub trait Real:
    Float
    + Default
    + Debug
    + Display
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Sum
    + Send
    + Sync
    + 'static
{
    /// Additive mask value for invalid attention slots.
    const MASK: Self;

    fn of(x: f64) -> Self;
    fn as_f64(self) -> f64;
}

impl Real for f32 {
    const MASK: Self = -1e9;

    #[inline]
    fn of(x: f64) -> Self {
        x as f32
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self as f64
    }
}

impl Real for f64 {
    const MASK: Self = -1e9;

    #[inline]
    fn of(x: f64) -> Self {
        x
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self
    }
}

/// Anything at or below this is treated as a masked slot.
#[inline]
pub(crate) fn is_masked<T: Real>(m: T) -> bool {
    m <= T::MASK * T::of(0.5)
}
