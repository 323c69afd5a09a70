use num_traits::{Float, FloatConst};
use std::fmt::{Debug, Display};
use std::iter::Sum;

/// Floating-point scalar the numerical core is generic over.
pub trait Real: Float + FloatConst + Sum + Debug + Display + Send + Sync + 'static {}

impl<T> Real for T where T: Float + FloatConst + Sum + Debug + Display + Send + Sync + 'static {}

/// Converts an `f64` literal into `T`.
#[inline]
pub fn lit<T: Real>(x: f64) -> T {
    T::from(x).expect("literal representable in scalar type")
}

/// A tolerance no tighter than what the scalar type can resolve.
#[inline]
pub fn tol<T: Real>(x: f64) -> T {
    let floor = T::epsilon() * lit(64.0);
    let t = lit::<T>(x);
    if t < floor {
        floor
    } else {
        t
    }
}

/// `ln Σ exp(v)`, returning `-inf` for an empty or all `-inf` input.
pub fn log_sum_exp<T: Real>(values: impl IntoIterator<Item = T>) -> T {
    let v: Vec<T> = values.into_iter().collect();
    let m = v.iter().copied().fold(T::neg_infinity(), T::max);
    if m == T::neg_infinity() {
        return m;
    }
    if m == T::infinity() {
        return m;
    }
    m + v.iter().map(|&x| (x - m).exp()).sum::<T>().ln()
}

/// `[x]_+`.
#[inline]
pub fn pos<T: Real>(x: T) -> T {
    if x > T::zero() {
        x
    } else {
        T::zero()
    }
}
