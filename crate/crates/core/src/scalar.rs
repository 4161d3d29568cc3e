//! Scalar abstraction shared by the dense solvers and the lasso path.
//!
//! Arbitrary-precision values carry their precision with them, so new
//! constants are always made "like" an existing value instead of through
//! `Zero::zero()`.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use rug::{Float, Rational};

pub trait Scalar:
    Clone
    + Debug
    + PartialOrd
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn zero_like(&self) -> Self;
    fn one_like(&self) -> Self;
    fn from_f64_like(&self, v: f64) -> Self;
    fn abs_val(&self) -> Self;
    fn to_f64_lossy(&self) -> f64;
    fn is_zero_val(&self) -> bool;

    /// `self -= a * b`
    fn sub_mul_assign(&mut self, a: &Self, b: &Self) {
        *self = self.clone() - a.clone() * b.clone();
    }

    /// `self += a * b`
    fn add_mul_assign(&mut self, a: &Self, b: &Self) {
        *self = self.clone() + a.clone() * b.clone();
    }
}

/// Scalars with a square root, needed by anything that takes a 2-norm.
pub trait RealScalar: Scalar {
    fn sqrt_val(&self) -> Self;
}

macro_rules! impl_primitive_float {
    ($($t:ty),*) => {$(
        impl Scalar for $t {
            fn zero_like(&self) -> Self { 0.0 }
            fn one_like(&self) -> Self { 1.0 }
            fn from_f64_like(&self, v: f64) -> Self {
                <$t as num_traits::NumCast>::from(v).unwrap_or(<$t as num_traits::Float>::nan())
            }
            fn abs_val(&self) -> Self { num_traits::Float::abs(*self) }
            fn to_f64_lossy(&self) -> f64 { num_traits::ToPrimitive::to_f64(self).unwrap_or(f64::NAN) }
            fn is_zero_val(&self) -> bool { num_traits::Zero::is_zero(self) }
            fn sub_mul_assign(&mut self, a: &Self, b: &Self) { *self -= a * b; }
            fn add_mul_assign(&mut self, a: &Self, b: &Self) { *self += a * b; }
        }

        impl RealScalar for $t {
            fn sqrt_val(&self) -> Self { num_traits::Float::sqrt(*self) }
        }
    )*};
}

impl_primitive_float!(f32, f64);

impl Scalar for Float {
    fn zero_like(&self) -> Self {
        Float::new(self.prec())
    }
    fn one_like(&self) -> Self {
        Float::with_val(self.prec(), 1)
    }
    fn from_f64_like(&self, v: f64) -> Self {
        Float::with_val(self.prec(), v)
    }
    fn abs_val(&self) -> Self {
        self.clone().abs()
    }
    fn to_f64_lossy(&self) -> f64 {
        self.to_f64()
    }
    fn is_zero_val(&self) -> bool {
        self.is_zero()
    }
    fn sub_mul_assign(&mut self, a: &Self, b: &Self) {
        *self -= a * b;
    }
    fn add_mul_assign(&mut self, a: &Self, b: &Self) {
        *self += a * b;
    }
}

impl RealScalar for Float {
    fn sqrt_val(&self) -> Self {
        self.clone().sqrt()
    }
}

impl Scalar for Rational {
    fn zero_like(&self) -> Self {
        Rational::new()
    }
    fn one_like(&self) -> Self {
        Rational::from(1)
    }
    fn from_f64_like(&self, v: f64) -> Self {
        Rational::from_f64(v).unwrap_or_default()
    }
    fn abs_val(&self) -> Self {
        self.clone().abs()
    }
    fn to_f64_lossy(&self) -> f64 {
        self.to_f64()
    }
    fn is_zero_val(&self) -> bool {
        *self.numer() == 0
    }
    fn sub_mul_assign(&mut self, a: &Self, b: &Self) {
        *self -= Rational::from(a * b);
    }
    fn add_mul_assign(&mut self, a: &Self, b: &Self) {
        *self += Rational::from(a * b);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn axpy<T: Scalar>(a: &T, x: &T, y: &T) -> T {
        let mut out = y.clone();
        out.add_mul_assign(a, x);
        out
    }

    #[test]
    fn fused_ops_agree_across_backends() {
        assert_eq!(axpy(&2.0f64, &3.0, &1.0), 7.0);
        assert_eq!(axpy(&2.0f32, &3.0, &1.0), 7.0);
        let f = Float::with_val(128, 2);
        assert_eq!(axpy(&f, &f.from_f64_like(3.0), &f.one_like()), 7);
        let r = Rational::from((1, 3));
        assert_eq!(axpy(&r, &Rational::from(3), &Rational::from(1)), 2);
    }

    #[test]
    fn like_constructors_keep_precision() {
        let f = Float::with_val(300, 5);
        assert_eq!(f.zero_like().prec(), 300);
        assert!(f.zero_like().is_zero_val());
        assert_eq!(f.from_f64_like(-1.5).abs_val(), 1.5);
        assert_eq!(Float::with_val(64, 16).sqrt_val(), 4);
    }
}
