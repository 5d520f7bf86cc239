//! Small numeric helpers shared across modules.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Neumaier compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct Compensated {
    sum: f64,
    carry: f64,
}

impl Compensated {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

pub fn compensated_sum<I: IntoIterator<Item = f64>>(xs: I) -> f64 {
    let mut acc = Compensated::new();
    for x in xs {
        acc.add(x);
    }
    acc.value()
}

pub fn ratio(a: i64, b: i64) -> BigRational {
    BigRational::new(BigInt::from(a), BigInt::from(b))
}

pub fn int(a: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(a))
}

/// Floor of a rational as a big integer.
pub fn floor_rat(x: &BigRational) -> BigInt {
    x.numer().div_floor(x.denom())
}

pub fn ceil_rat(x: &BigRational) -> BigInt {
    -((-x.numer()).div_floor(x.denom()))
}

/// Rational approximation to f64 that is accurate even when numerator and
/// denominator individually overflow.
pub fn rat_to_f64(x: &BigRational) -> f64 {
    if let (Some(n), Some(d)) = (x.numer().to_f64(), x.denom().to_f64()) {
        if n.is_finite() && d.is_finite() && d != 0.0 {
            return n / d;
        }
    }
    let nb = x.numer().bits() as i64;
    let db = x.denom().bits() as i64;
    let shift = 60 - (nb - db);
    let scaled = if shift >= 0 {
        (x.numer() << shift as usize) / x.denom()
    } else {
        x.numer() / (x.denom() << (-shift) as usize)
    };
    scaled.to_f64().unwrap_or(f64::NAN) * 2f64.powi(-shift as i32)
}

/// Exact dyadic rational equal to a finite f64.
pub fn f64_to_rat(x: f64) -> Option<BigRational> {
    BigRational::from_float(x)
}

/// Multiply a rational by 2^k.
pub fn scale_pow2(x: &BigRational, k: i64) -> BigRational {
    if k >= 0 {
        BigRational::new(x.numer() << k as usize, x.denom().clone())
    } else {
        BigRational::new(x.numer().clone(), x.denom() << (-k) as usize)
    }
}

/// Render a rational as `a/b`, or `a` when integral.
pub fn rat_string(x: &BigRational) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Height max(|a|, b) of a rational in lowest terms.
pub fn height(x: &BigRational) -> BigInt {
    let a = x.numer().abs();
    if &a > x.denom() {
        a
    } else {
        x.denom().clone()
    }
}

pub fn is_zero(x: &BigRational) -> bool {
    x.is_zero()
}

/// log log N, the centering used throughout.
pub fn loglog(n: f64) -> f64 {
    n.ln().ln()
}
