//! Certified real parameters, exact Beatty floors and rational approximation.
//!
//! A [`CertifiedReal`] can be enclosed in a rational interval of any width
//! (decimals only down to their supplied digits). Rational and quadratic
//! values additionally support exact symbolic comparison, which settles the
//! cases interval refinement can never decide.

mod approx;
mod beatty;
mod quadratic;

pub use approx::{best_rational_of_height, classify_arc, continued_fraction_convergents, ArcClassification};
pub use beatty::{beatty_floor, beatty_floors, BeattyEvaluator, BeattySpec, Threshold};
pub use quadratic::QuadraticValue;

use crate::error::{Error, Result};
use crate::util::{floor_rat, rat_to_f64, scale_pow2};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::cmp::Ordering;
use std::sync::Mutex;

/// Precision ladder, in bits, tried before giving up on a decision.
pub const PRECISION_LADDER: [u32; 4] = [64, 128, 256, 512];

/// Closed rational interval `[lo, hi]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Interval {
    pub lo: BigRational,
    pub hi: BigRational,
}

impl Interval {
    pub fn point(x: BigRational) -> Self {
        Self { lo: x.clone(), hi: x }
    }

    pub fn width(&self) -> BigRational {
        &self.hi - &self.lo
    }

    pub fn contains(&self, x: &BigRational) -> bool {
        &self.lo <= x && x <= &self.hi
    }

    pub fn midpoint(&self) -> BigRational {
        (&self.lo + &self.hi) / BigRational::from_integer(2.into())
    }

    /// `c·self`, reordering endpoints for negative `c`.
    pub fn scale(&self, c: &BigRational) -> Self {
        let (a, b) = (&self.lo * c, &self.hi * c);
        if c.is_negative() {
            Self { lo: b, hi: a }
        } else {
            Self { lo: a, hi: b }
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            lo: &self.lo + &other.lo,
            hi: &self.hi + &other.hi,
        }
    }

    /// Where `c` sits relative to the interval, if decided.
    pub fn cmp_point(&self, c: &BigRational) -> Option<Ordering> {
        if &self.hi < c {
            Some(Ordering::Less)
        } else if &self.lo > c {
            Some(Ordering::Greater)
        } else if self.lo == self.hi {
            Some(Ordering::Equal)
        } else {
            None
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RealKind {
    Rational(BigRational),
    Quadratic(QuadraticValue),
    /// A decimal string: the true value lies within 10⁻ᵈ of `value`.
    Decimal { value: BigRational, digits: u32 },
}

/// A real number that can be enclosed to any requested precision.
#[derive(Debug)]
pub struct CertifiedReal {
    kind: RealKind,
    text: String,
    cache: Mutex<Option<(u32, Interval)>>,
}

impl Clone for CertifiedReal {
    fn clone(&self) -> Self {
        Self {
            kind: self.kind.clone(),
            text: self.text.clone(),
            cache: Mutex::new(self.cache.lock().unwrap().clone()),
        }
    }
}

impl PartialEq for CertifiedReal {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
    }
}

impl std::fmt::Display for CertifiedReal {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.text)
    }
}

impl std::str::FromStr for CertifiedReal {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse(s)
    }
}

impl CertifiedReal {
    fn with_kind(kind: RealKind, text: String) -> Self {
        Self {
            kind,
            text,
            cache: Mutex::new(None),
        }
    }

    pub fn rational(x: BigRational) -> Self {
        let text = format!("rational:{}", crate::util::rat_string(&x));
        Self::with_kind(RealKind::Rational(x), text)
    }

    pub fn integer(n: i64) -> Self {
        Self::rational(BigRational::from_integer(n.into()))
    }

    /// `(p + q·√d)/r`; collapses to a rational when `d` is a square.
    pub fn quadratic(p: BigInt, q: BigInt, d: BigInt, r: BigInt) -> Result<Self> {
        if r.is_zero() {
            return Err(Error::validation("quadratic with zero denominator"));
        }
        let text = format!("quadratic:({p}+{q}*sqrt:{d})/{r}");
        let a = BigRational::new(p, r.clone());
        let b = BigRational::new(q, r);
        let v = QuadraticValue::new(a, b, d.clone())
            .ok_or_else(|| Error::validation(format!("negative radicand {d}")))?;
        Ok(Self::from_quadratic_value(v, text))
    }

    pub fn sqrt(d: u64) -> Self {
        Self::quadratic(0.into(), 1.into(), d.into(), 1.into())
            .expect("nonnegative radicand")
            .retext(format!("sqrt:{d}"))
    }

    fn retext(mut self, text: String) -> Self {
        self.text = text;
        self
    }

    pub(crate) fn from_quadratic_value(v: QuadraticValue, text: String) -> Self {
        match v.as_rational() {
            Some(x) => Self::with_kind(RealKind::Rational(x.clone()), text),
            None => Self::with_kind(RealKind::Quadratic(v), text),
        }
    }

    /// A decimal literal such as `3.14159`; its last digit is taken as
    /// uncertain by one unit either way.
    pub fn decimal(s: &str) -> Result<Self> {
        let (value, digits) = parse_decimal(s)?;
        Ok(Self::with_kind(
            RealKind::Decimal { value, digits },
            format!("decimal:{s}"),
        ))
    }

    pub fn kind(&self) -> &RealKind {
        &self.kind
    }

    pub fn is_exact(&self) -> bool {
        !matches!(self.kind, RealKind::Decimal { .. })
    }

    pub fn as_rational(&self) -> Option<&BigRational> {
        match &self.kind {
            RealKind::Rational(x) => Some(x),
            _ => None,
        }
    }

    /// Symbolic value for the exact kinds.
    pub fn exact(&self) -> Option<QuadraticValue> {
        match &self.kind {
            RealKind::Rational(x) => Some(QuadraticValue::rational(x.clone())),
            RealKind::Quadratic(v) => Some(v.clone()),
            RealKind::Decimal { .. } => None,
        }
    }

    /// Largest `k` that [`refine`](Self::refine) can honour.
    pub fn max_precision(&self) -> Option<u32> {
        match &self.kind {
            RealKind::Decimal { digits, .. } => Some(decimal_bits(*digits).max(0) as u32),
            _ => None,
        }
    }

    /// Interval of width at most 2⁻ᵏ containing the value. Intervals are
    /// nested across calls with increasing `k`.
    pub fn refine(&self, k: u32) -> Result<Interval> {
        let (iv, exhausted) = self.refine_capped(k);
        if exhausted {
            let available = self.max_precision().unwrap_or(0);
            return Err(Error::PrecisionExhausted {
                requested: k,
                available,
                required_digits: digits_for_bits(k),
            });
        }
        Ok(iv)
    }

    /// Like [`refine`](Self::refine) but returns the best available
    /// interval, flagging whether it is coarser than requested.
    pub fn refine_capped(&self, k: u32) -> (Interval, bool) {
        match &self.kind {
            RealKind::Rational(x) => (Interval::point(x.clone()), false),
            RealKind::Decimal { value, digits } => {
                let eps = BigRational::new(BigInt::one(), BigInt::from(10).pow(*digits));
                let iv = Interval {
                    lo: value - &eps,
                    hi: value + &eps,
                };
                (iv, k as i64 > decimal_bits(*digits))
            }
            RealKind::Quadratic(v) => {
                let mut cache = self.cache.lock().unwrap();
                if let Some((ck, iv)) = cache.as_ref() {
                    if *ck >= k {
                        return (iv.clone(), false);
                    }
                }
                let (lo, hi) = v.enclose(k);
                let iv = Interval { lo, hi };
                *cache = Some((k, iv.clone()));
                (iv, false)
            }
        }
    }

    /// Double-precision approximation.
    pub fn to_f64(&self) -> f64 {
        let (iv, _) = self.refine_capped(60);
        rat_to_f64(&iv.midpoint())
    }

    /// Certified comparison with a rational.
    pub fn cmp_rational(&self, c: &BigRational) -> Result<Ordering> {
        Linear::new(BigRational::zero()).term(self, BigRational::one()).cmp_rational(c)
    }

    /// Certified floor.
    pub fn floor(&self) -> Result<BigInt> {
        Linear::new(BigRational::zero()).term(self, BigRational::one()).floor()
    }
}

/// Bits of precision a `digits`-place decimal supports: the largest `k` with
/// 2·10⁻ᵈ ≤ 2⁻ᵏ (negative when not even k = 0 is available).
fn decimal_bits(digits: u32) -> i64 {
    BigInt::from(10).pow(digits).bits() as i64 - 2
}

fn digits_for_bits(k: u32) -> u32 {
    let mut d = 0;
    while decimal_bits(d) < k as i64 {
        d += 1;
    }
    d
}

fn parse_decimal(s: &str) -> Result<(BigRational, u32)> {
    let err = || Error::parse(s, "expected a decimal literal like 3.14159");
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    let ok = |t: &str| t.chars().all(|c| c.is_ascii_digit());
    if (int_part.is_empty() && frac_part.is_empty()) || !ok(int_part) || !ok(frac_part) {
        return Err(err());
    }
    let digits = frac_part.len() as u32;
    let joined = format!("{int_part}{frac_part}");
    let mut num: BigInt = if joined.is_empty() {
        BigInt::zero()
    } else {
        joined.parse().map_err(|_| err())?
    };
    if neg {
        num = -num;
    }
    Ok((BigRational::new(num, BigInt::from(10).pow(digits)), digits))
}

fn parse_int(tok: &str) -> Result<BigInt> {
    let t = tok.trim();
    if t.is_empty() {
        return Err(Error::parse(tok, "expected an integer"));
    }
    t.parse::<BigInt>().map_err(|_| Error::parse(t, "expected an integer"))
}

fn parse_rational(tok: &str) -> Result<BigRational> {
    let t = tok.trim();
    match t.split_once('/') {
        Some((a, b)) => {
            let a = parse_int(a)?;
            let b = parse_int(b)?;
            if b.is_zero() {
                return Err(Error::parse(t, "zero denominator"));
            }
            Ok(BigRational::new(a, b))
        }
        None => Ok(BigRational::from_integer(parse_int(t)?)),
    }
}

fn parse_radicand(tok: &str) -> Result<BigInt> {
    let d = parse_int(tok)?;
    if d.is_negative() {
        return Err(Error::parse(tok.trim(), "radicand must be nonnegative"));
    }
    Ok(d)
}

/// Parse the textual parameter syntax: `rational:22/7`, `sqrt:2`,
/// `quadratic:(1+2*sqrt:3)/5`, `decimal:3.14159`. A bare integer or fraction
/// is read as a rational.
pub fn parse(text: &str) -> Result<CertifiedReal> {
    let s = text.trim();
    let (tag, body) = match s.split_once(':') {
        Some((tag, body)) => (tag, body),
        None => ("rational", s),
    };
    let real = match tag {
        "rational" => CertifiedReal::rational(parse_rational(body)?),
        "sqrt" => {
            let d = parse_radicand(body)?;
            CertifiedReal::quadratic(0.into(), 1.into(), d, 1.into())?
        }
        "quadratic" => parse_quadratic(body)?,
        "decimal" => {
            let (value, digits) = parse_decimal(body.trim())?;
            CertifiedReal::with_kind(RealKind::Decimal { value, digits }, String::new())
        }
        _ => return Err(Error::parse(tag, "unknown kind; expected rational, sqrt, quadratic or decimal")),
    };
    Ok(real.retext(s.to_string()))
}

/// `(P ± Q*sqrt:D)/R`, with `P`, `Q*` and `/R` optional.
fn parse_quadratic(body: &str) -> Result<CertifiedReal> {
    let body = body.trim();
    let (inner, r) = if let Some(rest) = body.strip_prefix('(') {
        let close = rest
            .rfind(')')
            .ok_or_else(|| Error::parse(body, "unbalanced parenthesis"))?;
        let tail = rest[close + 1..].trim();
        let r = match tail.strip_prefix('/') {
            Some(r) => parse_int(r)?,
            None if tail.is_empty() => BigInt::one(),
            None => return Err(Error::parse(tail, "expected /denominator")),
        };
        (&rest[..close], r)
    } else {
        (body, BigInt::one())
    };
    if r.is_zero() {
        return Err(Error::parse("0", "zero denominator"));
    }
    let pos = inner
        .find("sqrt:")
        .ok_or_else(|| Error::parse(inner, "missing sqrt:D term"))?;
    let d = parse_radicand(&inner[pos + 5..])?;
    let prefix = inner[..pos].trim();
    let prefix = prefix.strip_suffix('*').map(str::trim).unwrap_or(prefix);
    // split "P+Q" / "P-Q" at the last sign that is not leading
    let split = prefix
        .char_indices()
        .filter(|&(i, c)| i > 0 && (c == '+' || c == '-'))
        .map(|(i, _)| i)
        .last();
    let (p, q) = match split {
        Some(i) => {
            let p = parse_int(&prefix[..i])?;
            let qs = prefix[i + 1..].trim();
            let q = if qs.is_empty() { BigInt::one() } else { parse_int(qs)? };
            (p, if &prefix[i..=i] == "-" { -q } else { q })
        }
        None => {
            let q = match prefix {
                "" | "+" => BigInt::one(),
                "-" => -BigInt::one(),
                t => parse_int(t)?,
            };
            (BigInt::zero(), q)
        }
    };
    CertifiedReal::quadratic(p, q, d, r)
}

/// A rational-coefficient linear form `constant + Σ cᵢ·xᵢ` in certified reals.
pub struct Linear<'a> {
    terms: Vec<(&'a CertifiedReal, BigRational)>,
    constant: BigRational,
}

impl<'a> Linear<'a> {
    pub fn new(constant: BigRational) -> Self {
        Self {
            terms: Vec::new(),
            constant,
        }
    }

    pub fn term(mut self, x: &'a CertifiedReal, c: BigRational) -> Self {
        if !c.is_zero() {
            self.terms.push((x, c));
        }
        self
    }

    /// Symbolic value when every term is exact and the radicands agree.
    pub fn exact(&self) -> Option<QuadraticValue> {
        let mut acc = QuadraticValue::rational(self.constant.clone());
        for (x, c) in &self.terms {
            acc = acc.add(&x.exact()?.scale(c))?;
        }
        Some(acc)
    }

    /// Enclosure of width about 2⁻ᵏ; the flag reports that some decimal term
    /// could not supply the precision asked of it.
    pub fn enclose(&self, k: u32) -> (Interval, bool) {
        let extra = 1 + (self.terms.len() as u32 + 1).next_power_of_two().trailing_zeros();
        let mut iv = Interval::point(self.constant.clone());
        let mut exhausted = false;
        for (x, c) in &self.terms {
            let cb = (c.numer().bits() as i64 - c.denom().bits() as i64 + 1).max(0) as u32;
            let (t, ex) = x.refine_capped(k + cb + extra);
            exhausted |= ex;
            iv = iv.add(&t.scale(c));
        }
        (iv, exhausted)
    }

    /// Certified comparison with the rational `c`.
    pub fn cmp_rational(&self, c: &BigRational) -> Result<Ordering> {
        if let Some(v) = self.exact() {
            return Ok(v.cmp_rational(c));
        }
        for &k in &PRECISION_LADDER {
            let (iv, exhausted) = self.enclose(k);
            match iv.cmp_point(c) {
                Some(Ordering::Equal) | None => {}
                Some(o) => return Ok(o),
            }
            if exhausted {
                break;
            }
        }
        Err(Error::Precision(format!(
            "cannot separate the value from {} at {} bits",
            crate::util::rat_string(c),
            PRECISION_LADDER[PRECISION_LADDER.len() - 1]
        )))
    }

    /// Certified floor.
    pub fn floor(&self) -> Result<BigInt> {
        if let Some(v) = self.exact() {
            return Ok(v.floor());
        }
        let mut candidate = None;
        for &k in &PRECISION_LADDER {
            let (iv, exhausted) = self.enclose(k);
            let f = floor_rat(&iv.lo);
            let next = BigRational::from_integer(&f + BigInt::one());
            if iv.hi < next {
                return Ok(f);
            }
            candidate = Some(f + BigInt::one());
            if exhausted {
                break;
            }
        }
        Err(Error::AmbiguousFloor {
            candidate: candidate.map(|c: BigInt| c.to_string()).unwrap_or_default(),
        })
    }
}

/// 2⁻ᵏ as a rational.
pub fn pow2_neg(k: u32) -> BigRational {
    scale_pow2(&BigRational::one(), -(k as i64))
}
