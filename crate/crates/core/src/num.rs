//! Scalar abstractions shared by the numeric and exact parts of the crate.
//!
//! Symbolic coefficients are always exact rationals. Everything that touches
//! floating point (evaluation, quadrature, Gaussian moments) is generic over
//! [`Real`], and the exact linear algebra used for cohomology is generic over
//! [`Field`].

use std::fmt::Debug;
use std::ops::Neg;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Float, FloatConst, FromPrimitive, Num, One, Signed, ToPrimitive, Zero};

/// floating point: f32 or f64
pub trait Real: Float + FloatConst + FromPrimitive + Debug + Send + Sync + 'static {
    fn from_rational(q: &BigRational) -> Self {
        Self::from_f64(rational_to_f64(q)).unwrap_or_else(Self::nan)
    }

    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable")
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// An exact field: the entries of matrices whose rank must be an integer
/// we can trust.
pub trait Field: Clone + PartialEq + Num + Neg<Output = Self> + Debug + Send + Sync {}

impl<T> Field for T where T: Clone + PartialEq + Num + Neg<Output = T> + Debug + Send + Sync {}

pub fn rational_to_f64(q: &BigRational) -> f64 {
    if let Some(v) = q.to_f64() {
        return v;
    }
    // numerator/denominator overflow f64 individually; scale both down.
    let shift = q.numer().bits().max(q.denom().bits()).saturating_sub(1000) as usize;
    let n = (q.numer() >> shift).to_f64().unwrap_or(f64::NAN);
    let d = (q.denom() >> shift).to_f64().unwrap_or(f64::NAN);
    n / d
}

pub fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// `n!` as an exact rational.
pub fn factorial(n: u32) -> BigRational {
    let mut acc = BigInt::one();
    for i in 2..=n {
        acc *= i;
    }
    BigRational::from_integer(acc)
}

pub fn is_integer(q: &BigRational) -> bool {
    q.denom().is_one()
}

pub(crate) fn rational_pow(q: &BigRational, e: i32) -> BigRational {
    if e >= 0 {
        num_traits::pow(q.clone(), e as usize)
    } else {
        num_traits::pow(q.recip(), e.unsigned_abs() as usize)
    }
}

/// Exact square root of a non-negative rational, if it has one.
pub(crate) fn rational_sqrt(q: &BigRational) -> Option<BigRational> {
    if q.is_negative() {
        return None;
    }
    if q.is_zero() {
        return Some(BigRational::zero());
    }
    let n = q.numer().sqrt();
    let d = q.denom().sqrt();
    (&n * &n == *q.numer() && &d * &d == *q.denom()).then(|| BigRational::new(n, d))
}
