//! Scalar abstraction so the operator algebra and optimizers work over f32 or f64.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssignOps};

/// Floating-point scalar used throughout the numeric kernels.
///
/// Implemented for `f32` and `f64`. Experiment harnesses (flows, problems,
/// sparsification, CLI) pin `f64`; the algebraic core stays generic.
pub trait Scalar:
    Float + FromPrimitive + NumAssignOps + Sum + Send + Sync + Debug + Display + 'static
{
    /// Cast an `f64` constant into this scalar type.
    #[inline]
    fn c(x: f64) -> Self {
        Self::from_f64(x).expect("constant not representable")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// `sign` with the convention `sign(0) = 0`, applied everywhere a sign is taken.
#[inline]
pub fn sign<T: Scalar>(x: T) -> T {
    if x > T::zero() {
        T::one()
    } else if x < T::zero() {
        -T::one()
    } else {
        T::zero()
    }
}

/// L1 norm of a slice.
pub fn norm_l1<T: Scalar>(v: &[T]) -> T {
    v.iter().map(|x| x.abs()).sum()
}

/// L2 norm of a slice.
pub fn norm_l2<T: Scalar>(v: &[T]) -> T {
    v.iter().map(|x| *x * *x).sum::<T>().sqrt()
}

/// L-infinity norm of a slice.
pub fn norm_linf<T: Scalar>(v: &[T]) -> T {
    v.iter().fold(T::zero(), |acc, x| acc.max(x.abs()))
}

/// General Lq norm, q >= 1 finite.
pub fn norm_lq<T: Scalar>(v: &[T], q: T) -> T {
    v.iter()
        .map(|x| x.abs().powf(q))
        .sum::<T>()
        .powf(T::one() / q)
}
