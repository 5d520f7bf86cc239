//! Exact arithmetic in ℚ(√d).

use crate::util::floor_rat;
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::cmp::Ordering;

/// The value `a + b·√d` with rational `a`, `b`.
///
/// `d` is stored without square factors below 10⁶ and is never a perfect
/// square; rational values use `b = 0`, `d = 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuadraticValue {
    a: BigRational,
    b: BigRational,
    d: BigInt,
}

impl QuadraticValue {
    pub fn rational(a: BigRational) -> Self {
        Self {
            a,
            b: BigRational::zero(),
            d: BigInt::one(),
        }
    }

    /// `a + b·√d` for `d >= 0`, normalising square factors out of `d`.
    pub fn new(a: BigRational, b: BigRational, d: BigInt) -> Option<Self> {
        if d.is_negative() {
            return None;
        }
        if b.is_zero() || d.is_zero() {
            return Some(Self::rational(a));
        }
        let (s, core) = split_square(&d);
        let b = b * BigRational::from_integer(s);
        if core.is_one() {
            Some(Self::rational(a + b))
        } else {
            Some(Self { a, b, d: core })
        }
    }

    pub fn rational_part(&self) -> &BigRational {
        &self.a
    }

    pub fn irrational_part(&self) -> &BigRational {
        &self.b
    }

    pub fn radicand(&self) -> &BigInt {
        &self.d
    }

    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    pub fn as_rational(&self) -> Option<&BigRational> {
        self.is_rational().then_some(&self.a)
    }

    fn common_d(&self, other: &Self) -> Option<BigInt> {
        match (self.is_rational(), other.is_rational()) {
            (true, true) => Some(BigInt::one()),
            (true, false) => Some(other.d.clone()),
            (false, true) => Some(self.d.clone()),
            (false, false) => (self.d == other.d).then(|| self.d.clone()),
        }
    }

    fn build(a: BigRational, b: BigRational, d: BigInt) -> Self {
        if b.is_zero() {
            Self::rational(a)
        } else {
            Self { a, b, d }
        }
    }

    pub fn add(&self, other: &Self) -> Option<Self> {
        let d = self.common_d(other)?;
        Some(Self::build(&self.a + &other.a, &self.b + &other.b, d))
    }

    pub fn sub(&self, other: &Self) -> Option<Self> {
        let d = self.common_d(other)?;
        Some(Self::build(&self.a - &other.a, &self.b - &other.b, d))
    }

    pub fn mul(&self, other: &Self) -> Option<Self> {
        let d = self.common_d(other)?;
        let dr = BigRational::from_integer(d.clone());
        let a = &self.a * &other.a + &self.b * &other.b * dr;
        let b = &self.a * &other.b + &self.b * &other.a;
        Some(Self::build(a, b, d))
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        Self::build(&self.a * c, &self.b * c, self.d.clone())
    }

    pub fn add_rational(&self, c: &BigRational) -> Self {
        Self::build(&self.a + c, self.b.clone(), self.d.clone())
    }

    /// Exact sign.
    pub fn signum(&self) -> Ordering {
        let sa = self.a.cmp(&BigRational::zero());
        let sb = self.b.cmp(&BigRational::zero());
        if sb == Ordering::Equal {
            return sa;
        }
        if sa == Ordering::Equal || sa == sb {
            return sb;
        }
        // opposite signs: compare a² with b²d
        let a2 = &self.a * &self.a;
        let b2d = &self.b * &self.b * BigRational::from_integer(self.d.clone());
        match a2.cmp(&b2d) {
            Ordering::Greater => sa,
            Ordering::Less => sb,
            Ordering::Equal => unreachable!("√d is irrational"),
        }
    }

    pub fn cmp_rational(&self, c: &BigRational) -> Ordering {
        self.add_rational(&-c).signum()
    }

    /// Exact floor.
    pub fn floor(&self) -> BigInt {
        if self.is_rational() {
            return floor_rat(&self.a);
        }
        // (P + Q√d)/R with R > 0, then Q√d = ±√M
        let r = self.a.denom().lcm(self.b.denom());
        let p = self.a.numer() * (&r / self.a.denom());
        let q = self.b.numer() * (&r / self.b.denom());
        let m = &q * &q * &self.d;
        let s = m.sqrt();
        if q.is_positive() {
            (p + s).div_floor(&r)
        } else {
            (p - s - BigInt::one()).div_floor(&r)
        }
    }

    /// Enclosure of width at most 2⁻ᵏ.
    pub fn enclose(&self, k: u32) -> (BigRational, BigRational) {
        if self.is_rational() {
            return (self.a.clone(), self.a.clone());
        }
        let qb = self.b.numer().bits() as i64;
        let rb = self.b.denom().bits() as i64;
        let big_k = (k as i64 + qb - rb + 2).max(0) as usize;
        let s = (&self.d << (2 * big_k)).sqrt();
        let scale = BigInt::one() << big_k;
        let lo_root = BigRational::new(s.clone(), scale.clone());
        let hi_root = BigRational::new(s + 1, scale);
        let (x, y) = (&self.b * &lo_root, &self.b * &hi_root);
        let (lo, hi) = if self.b.is_positive() { (x, y) } else { (y, x) };
        (&self.a + lo, &self.a + hi)
    }

    pub fn to_f64(&self) -> f64 {
        let (lo, hi) = self.enclose(60);
        crate::util::rat_to_f64(&((lo + hi) / BigRational::from_integer(2.into())))
    }
}

impl std::fmt::Display for QuadraticValue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.is_rational() {
            return write!(f, "{}", crate::util::rat_string(&self.a));
        }
        write!(
            f,
            "{} + {}*sqrt({})",
            crate::util::rat_string(&self.a),
            crate::util::rat_string(&self.b),
            self.d
        )
    }
}

/// Write `d = s²·core`, stripping square factors of primes below 10⁶ and a
/// perfect-square cofactor.
fn split_square(d: &BigInt) -> (BigInt, BigInt) {
    let mut core = d.clone();
    let mut s = BigInt::one();
    if let Some(small) = d.to_u64() {
        let mut c = small;
        let mut sq = 1u64;
        let mut p = 2u64;
        while p * p <= c && p < 1_000_000 {
            while c % (p * p) == 0 {
                c /= p * p;
                sq *= p;
            }
            p += if p == 2 { 1 } else { 2 };
        }
        core = BigInt::from(c);
        s = BigInt::from(sq);
    }
    let r = core.sqrt();
    if &r * &r == core {
        s *= r;
        core = BigInt::one();
    }
    (s, core)
}
