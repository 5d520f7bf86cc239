//! Beatty sequences ⌊αn + β⌋ with certified floors.

use super::{CertifiedReal, Linear};
use crate::error::{Error, Result};
use crate::util::{ceil_rat, floor_rat, scale_pow2};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::cmp::Ordering;

/// Parameters of the sequence n ↦ ⌊αn + β⌋, with α > 0.
#[derive(Debug, Clone, PartialEq)]
pub struct BeattySpec {
    pub alpha: CertifiedReal,
    pub beta: CertifiedReal,
}

impl BeattySpec {
    pub fn new(alpha: CertifiedReal, beta: CertifiedReal) -> Result<Self> {
        let (iv, _) = alpha.refine_capped(10);
        if !iv.lo.is_positive() {
            return Err(Error::validation(format!(
                "alpha = {alpha} is not certifiably positive at 10 bits"
            )));
        }
        Ok(Self { alpha, beta })
    }

    pub fn parse(alpha: &str, beta: &str) -> Result<Self> {
        Self::new(super::parse(alpha)?, super::parse(beta)?)
    }

    /// The linear form αn + β.
    pub fn at(&self, n: u64) -> Linear<'_> {
        Linear::new(BigRational::zero())
            .term(&self.alpha, BigRational::from_integer(n.into()))
            .term(&self.beta, BigRational::one())
    }
}

impl std::fmt::Display for BeattySpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "alpha={} beta={}", self.alpha, self.beta)
    }
}

/// Exact ⌊αn + β⌋.
pub fn beatty_floor(spec: &BeattySpec, n: u64) -> Result<BigInt> {
    if n == 0 {
        return Err(Error::validation("beatty_floor needs n >= 1"));
    }
    spec.at(n).floor()
}

/// A rational threshold prepared for repeated comparisons.
#[derive(Debug, Clone)]
pub struct Threshold {
    exact: BigRational,
    lo: i128,
    hi: i128,
}

#[derive(Debug, Clone)]
enum Mode {
    /// α = num/den, β = off/den exactly: ⌊(num·n + off)/den⌋.
    Rational { num: i128, off: i128, den: i128 },
    /// α, β enclosed in [lo, hi]/2ᵏ.
    Fixed {
        k: u32,
        a_lo: i128,
        a_hi: i128,
        b_lo: i128,
        b_hi: i128,
    },
    Slow,
}

/// Fast floor evaluation for all n ≤ `n_max`.
///
/// Uses 128-bit fixed-point enclosures of α and β; whenever the enclosure of
/// αn + β straddles an integer it falls back to exact evaluation.
#[derive(Debug, Clone)]
pub struct BeattyEvaluator<'a> {
    spec: &'a BeattySpec,
    n_max: u64,
    mode: Mode,
}

fn bits_of_ceil_abs(x: &BigRational) -> u32 {
    (ceil_rat(&x.abs()) + 1u32).bits() as u32
}

impl<'a> BeattyEvaluator<'a> {
    pub fn new(spec: &'a BeattySpec, n_max: u64) -> Self {
        let mode = Self::rational_mode(spec, n_max)
            .or_else(|| Self::fixed_mode(spec, n_max))
            .unwrap_or(Mode::Slow);
        Self { spec, n_max, mode }
    }

    fn rational_mode(spec: &BeattySpec, n_max: u64) -> Option<Mode> {
        let a = spec.alpha.as_rational()?;
        let b = spec.beta.as_rational()?;
        let den_big = num_integer::Integer::lcm(a.denom(), b.denom());
        let num_big = a.numer() * (&den_big / a.denom());
        let off_big = b.numer() * (&den_big / b.denom());
        let bn = 64 - n_max.max(1).leading_zeros() as u64;
        if num_big.bits() + bn > 124 || off_big.bits() > 124 || den_big.bits() > 124 {
            return None;
        }
        Some(Mode::Rational {
            num: num_big.to_i128()?,
            off: off_big.to_i128()?,
            den: den_big.to_i128()?,
        })
    }

    fn fixed_mode(spec: &BeattySpec, n_max: u64) -> Option<Mode> {
        let (ai, _) = spec.alpha.refine_capped(8);
        let (bi, _) = spec.beta.refine_capped(8);
        let ba = bits_of_ceil_abs(&ai.lo).max(bits_of_ceil_abs(&ai.hi));
        let bb = bits_of_ceil_abs(&bi.lo).max(bits_of_ceil_abs(&bi.hi));
        let bn = 64 - n_max.max(1).leading_zeros();
        let used = (ba + bn).max(bb);
        if used + 24 > 124 {
            return None;
        }
        let k = (124 - used).min(100);
        let (ai, _) = spec.alpha.refine_capped(k + 2);
        let (bi, _) = spec.beta.refine_capped(k + 2);
        let fp = |x: &BigRational, up: bool| {
            let s = scale_pow2(x, k as i64);
            if up { ceil_rat(&s) } else { floor_rat(&s) }.to_i128()
        };
        Some(Mode::Fixed {
            k,
            a_lo: fp(&ai.lo, false)?,
            a_hi: fp(&ai.hi, true)?,
            b_lo: fp(&bi.lo, false)?,
            b_hi: fp(&bi.hi, true)?,
        })
    }

    pub fn spec(&self) -> &BeattySpec {
        self.spec
    }

    pub fn n_max(&self) -> u64 {
        self.n_max
    }

    /// ⌊αn + β⌋ for 1 ≤ n ≤ n_max.
    pub fn floor(&self, n: u64) -> Result<i64> {
        debug_assert!(n <= self.n_max);
        match self.mode {
            Mode::Rational { num, off, den } => {
                let v = (num * n as i128 + off).div_euclid(den);
                i64::try_from(v).map_err(|_| Error::Capacity(format!("floor {v} exceeds 64 bits")))
            }
            Mode::Fixed { k, a_lo, a_hi, b_lo, b_hi } => {
                let lo = (a_lo * n as i128 + b_lo) >> k;
                let hi = (a_hi * n as i128 + b_hi) >> k;
                if lo == hi {
                    return i64::try_from(lo)
                        .map_err(|_| Error::Capacity(format!("floor {lo} exceeds 64 bits")));
                }
                self.slow_floor(n)
            }
            Mode::Slow => self.slow_floor(n),
        }
    }

    fn slow_floor(&self, n: u64) -> Result<i64> {
        let f = beatty_floor(self.spec, n)?;
        f.to_i64()
            .ok_or_else(|| Error::Capacity(format!("floor {f} exceeds 64 bits")))
    }

    pub fn threshold(&self, t: &BigRational) -> Threshold {
        let (lo, hi) = match self.mode {
            Mode::Fixed { k, .. } => {
                let s = scale_pow2(t, k as i64);
                (
                    floor_rat(&s).to_i128().unwrap_or(i128::MIN),
                    ceil_rat(&s).to_i128().unwrap_or(i128::MAX),
                )
            }
            _ => (i128::MIN, i128::MAX),
        };
        Threshold {
            exact: t.clone(),
            lo,
            hi,
        }
    }

    /// Compare αn + β with `base + t`.
    pub fn cmp_shifted(&self, n: u64, base: i64, t: &Threshold) -> Result<Ordering> {
        match self.mode {
            Mode::Rational { num, off, den } => {
                // (num·n + off)/den vs base + t, exactly
                let lhs = BigRational::new(BigInt::from(num * n as i128 + off), BigInt::from(den));
                let rhs = BigRational::from_integer(base.into()) + &t.exact;
                Ok(lhs.cmp(&rhs))
            }
            Mode::Fixed { k, a_lo, a_hi, b_lo, b_hi } => {
                let lo = a_lo * n as i128 + b_lo;
                let hi = a_hi * n as i128 + b_hi;
                let shift = (base as i128) << k;
                if t.lo != i128::MIN && hi < shift.saturating_add(t.lo) {
                    return Ok(Ordering::Less);
                }
                if t.hi != i128::MAX && lo > shift.saturating_add(t.hi) {
                    return Ok(Ordering::Greater);
                }
                self.slow_cmp(n, base, t)
            }
            Mode::Slow => self.slow_cmp(n, base, t),
        }
    }

    fn slow_cmp(&self, n: u64, base: i64, t: &Threshold) -> Result<Ordering> {
        let c = BigRational::from_integer(base.into()) + &t.exact;
        self.spec.at(n).cmp_rational(&c)
    }
}

/// ⌊αn + β⌋ for every n in `[lo, hi]`, in order.
pub fn beatty_floors(spec: &BeattySpec, lo: u64, hi: u64) -> Result<Vec<i64>> {
    use rayon::prelude::*;
    if lo == 0 || hi < lo {
        return Err(Error::Range(format!("need 1 <= lo <= hi, got [{lo}, {hi}]")));
    }
    let ev = BeattyEvaluator::new(spec, hi);
    const CHUNK: u64 = 1 << 15;
    let starts: Vec<u64> = (lo..=hi).step_by(CHUNK as usize).collect();
    let parts: Vec<Result<Vec<i64>>> = starts
        .par_iter()
        .map(|&s| (s..=(s + CHUNK - 1).min(hi)).map(|n| ev.floor(n)).collect())
        .collect();
    let mut out = Vec::with_capacity((hi - lo + 1) as usize);
    for p in parts {
        out.extend(p?);
    }
    Ok(out)
}
