//! Scalar abstraction shared by the double-precision reference paths and the
//! single-precision particle caches.

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::{AddAssign, MulAssign, SubAssign};

/// Floating point scalar: `f32` or `f64`.
pub trait Real:
    num_traits::Float
    + num_traits::FromPrimitive
    + num_traits::ToPrimitive
    + AddAssign
    + SubAssign
    + MulAssign
    + Sum
    + Default
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Lossy conversion between scalar types, used when narrowing to the cache
    /// precision and when flushing lane sums back into particles.
    #[inline(always)]
    fn cast<U: Real>(self) -> U {
        U::from_f64_nearest(self.to_f64_exact())
    }

    #[inline(always)]
    fn lit(v: f64) -> Self {
        Self::from_f64_nearest(v)
    }

    fn to_f64_exact(self) -> f64;

    /// Round to the nearest representable value.
    fn from_f64_nearest(v: f64) -> Self;
}

impl Real for f32 {
    #[inline(always)]
    fn to_f64_exact(self) -> f64 {
        self as f64
    }

    #[inline(always)]
    fn from_f64_nearest(v: f64) -> Self {
        v as f32
    }
}

impl Real for f64 {
    #[inline(always)]
    fn to_f64_exact(self) -> f64 {
        self
    }

    #[inline(always)]
    fn from_f64_nearest(v: f64) -> Self {
        v
    }
}

/// A 3-vector of scalars.
pub type Vec3<T> = [T; 3];

#[inline]
pub fn dot<T: Real>(a: Vec3<T>, b: Vec3<T>) -> T {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub fn sub<T: Real>(a: Vec3<T>, b: Vec3<T>) -> Vec3<T> {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

#[inline]
pub fn norm2<T: Real>(a: Vec3<T>) -> T {
    dot(a, a)
}

/// Squared Euclidean distance between two points.
#[inline]
pub fn dist2<T: Real>(a: Vec3<T>, b: Vec3<T>) -> T {
    norm2(sub(a, b))
}
