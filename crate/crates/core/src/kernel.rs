//! Density weight functions and the per-pair accumulation rule.

use crate::geometry::Particle;
use crate::num::{dist2, Real};

/// A compactly supported weight `w(q)`, `q = r / h`, with `w(q) = 0` for
/// `q >= 1` and non-increasing on `[0, 1]`.
pub trait Kernel: Copy + Send + Sync {
    fn weight<T: Real>(&self, q: T) -> T;

    /// `weight(q)` for `0 <= q < 1`; any finite value outside. Lane loops
    /// mask the result, so kernels can skip their support test here.
    #[inline(always)]
    fn weight_in_support<T: Real>(&self, q: T) -> T {
        self.weight(q)
    }
}

/// `w(q) = (1 - q)^3` on `[0, 1)`, zero outside.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct CubicFalloff;

impl Kernel for CubicFalloff {
    #[inline(always)]
    fn weight<T: Real>(&self, q: T) -> T {
        if q < T::one() {
            self.weight_in_support(q)
        } else {
            T::zero()
        }
    }

    #[inline(always)]
    fn weight_in_support<T: Real>(&self, q: T) -> T {
        let u = T::one() - q;
        u * u * u
    }
}

/// Accumulate the contribution of `source` onto `target`.
///
/// Callers check the range predicate; an out-of-range pair adds zero.
#[inline]
pub fn interact<T: Real, K: Kernel>(kernel: &K, target: &mut Particle<T>, source: &Particle<T>) {
    let r2 = dist2(target.pos, source.pos);
    accumulate(kernel, target, source.mass, r2);
}

/// Accumulate a source of mass `mass` at squared distance `r2` onto `target`.
#[inline(always)]
pub fn accumulate<T: Real, K: Kernel>(kernel: &K, target: &mut Particle<T>, mass: T, r2: T) {
    let w = kernel.weight(r2.sqrt() / target.h);
    target.rho += mass * w;
    target.wcount += w;
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weight_support() {
        let k = CubicFalloff;
        assert_eq!(k.weight(0.0f64), 1.0);
        assert_eq!(k.weight(1.0f64), 0.0);
        assert_eq!(k.weight(3.5f32), 0.0);
        let mut prev = 1.0;
        for s in 1..=100 {
            let w = k.weight(s as f64 / 100.0);
            assert!(w <= prev);
            prev = w;
        }
    }

    #[test]
    fn coincident_source() {
        let mut a = Particle::new(0, [0.5; 3], 0.2, 1.0);
        let b = Particle::new(1, [0.5; 3], 0.2, 2.0);
        interact(&CubicFalloff, &mut a, &b);
        assert_eq!(a.rho, 2.0);
        assert_eq!(a.wcount, 1.0);
    }

    #[test]
    fn half_cutoff() {
        let mut a = Particle::<f64>::new(0, [0.0; 3], 0.4, 1.0);
        let b = Particle::new(1, [0.0, 0.2, 0.0], 0.4, 1.0);
        interact(&CubicFalloff, &mut a, &b);
        assert!((a.rho - 0.125).abs() < 1e-15);
    }

    #[test]
    fn out_of_support() {
        let mut a = Particle::<f64>::new(0, [0.0; 3], 0.4, 1.0);
        let b = Particle::new(1, [0.0, 0.0, 0.4], 0.4, 1.0);
        interact(&CubicFalloff, &mut a, &b);
        assert_eq!((a.rho, a.wcount), (0.0, 0.0));
    }
}
