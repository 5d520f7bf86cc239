//! Rational approximation: continued fractions, best approximations of
//! bounded height, and major/minor arc classification.

use super::{CertifiedReal, Interval, PRECISION_LADDER};
use crate::error::{Error, Result};
use crate::util::floor_rat;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::cmp::Ordering;

/// Partial quotients certified by an enclosure, plus whether the expansion
/// terminated (the value is the rational they represent).
fn certified_quotients(iv: &Interval, exact_rational: bool, want: usize) -> (Vec<BigInt>, bool) {
    let (mut lo, mut hi) = (iv.lo.clone(), iv.hi.clone());
    let mut out = Vec::new();
    while out.len() < want {
        let a = floor_rat(&lo);
        if floor_rat(&hi) != a {
            return (out, false);
        }
        let ar = BigRational::from_integer(a.clone());
        out.push(a);
        if lo == ar {
            // lo integral: only a rational value terminates here
            return (out, exact_rational && lo == hi);
        }
        let (nl, nh) = ((&hi - &ar).recip(), (&lo - &ar).recip());
        lo = nl;
        hi = nh;
    }
    (out, false)
}

/// The first `count` continued-fraction convergents of `x`. Rationals may
/// yield fewer when their expansion terminates.
pub fn continued_fraction_convergents(x: &CertifiedReal, count: usize) -> Result<Vec<BigRational>> {
    if count == 0 {
        return Err(Error::validation("count must be at least 1"));
    }
    let quotients = if let Some(r) = x.as_rational() {
        certified_quotients(&Interval::point(r.clone()), true, count).0
    } else {
        let mut best = Vec::new();
        let mut k = PRECISION_LADDER[0];
        loop {
            let (iv, exhausted) = x.refine_capped(k);
            let (q, _) = certified_quotients(&iv, false, count);
            if q.len() >= count {
                best = q;
                break;
            }
            if exhausted || k >= 1 << 16 {
                if q.len() > best.len() {
                    best = q;
                }
                break;
            }
            best = q;
            k *= 2;
        }
        if best.len() < count {
            return Err(Error::Precision(format!(
                "only {} partial quotients of {x} can be certified",
                best.len()
            )));
        }
        best
    };
    let (mut p0, mut q0) = (BigInt::one(), BigInt::zero());
    let (mut p1, mut q1) = (BigInt::zero(), BigInt::one());
    let mut out = Vec::with_capacity(quotients.len());
    for a in quotients {
        let p = &a * &p0 + &p1;
        let q = &a * &q0 + &q1;
        out.push(BigRational::new(p.clone(), q.clone()));
        p1 = std::mem::replace(&mut p0, p);
        q1 = std::mem::replace(&mut q0, q);
    }
    Ok(out)
}

/// Is `c1` strictly closer to `x` than `c2`? `Equal` means a genuine tie.
fn closer(x: &CertifiedReal, c1: &BigRational, c2: &BigRational) -> Result<Ordering> {
    if c1 == c2 {
        return Ok(Ordering::Equal);
    }
    // |x - c1| < |x - c2|  iff  x lies on c1's side of the midpoint
    let mid = (c1 + c2) / BigRational::from_integer(2.into());
    let side = x.cmp_rational(&mid)?;
    Ok(match side {
        Ordering::Equal => Ordering::Equal,
        s if (s == Ordering::Less) == (c1 < c2) => Ordering::Less,
        _ => Ordering::Greater,
    })
}

/// The rational of height at most `h` nearest to `x`; ties go to the smaller
/// denominator, then the smaller |numerator|.
pub fn best_rational_of_height(x: &CertifiedReal, h: u64) -> Result<BigRational> {
    if h == 0 {
        return Err(Error::validation("height bound must be at least 1"));
    }
    let hb = BigInt::from(h);
    let (iv, _) = x.refine_capped(128);
    let clamp = |a: BigInt| a.clamp(-hb.clone(), hb.clone());
    let mut cands: Vec<BigRational> = Vec::new();
    for b in 1..=h {
        let bb = BigRational::from_integer(b.into());
        let lo = floor_rat(&(&iv.lo * &bb));
        let hi = floor_rat(&(&iv.hi * &bb)) + 1;
        let mut a = lo;
        while a <= hi {
            let r = BigRational::new(clamp(a.clone()), b.into());
            if r.denom() == &BigInt::from(b) {
                cands.push(r);
            }
            a += 1;
        }
    }
    cands.sort();
    cands.dedup();
    // prune with the enclosure before the certified tournament
    let dist_hi = |c: &BigRational| (&iv.lo - c).abs().max((&iv.hi - c).abs());
    let dist_lo = |c: &BigRational| {
        if iv.contains(c) {
            BigRational::zero()
        } else {
            (&iv.lo - c).abs().min((&iv.hi - c).abs())
        }
    };
    let cutoff = cands.iter().map(dist_hi).min().expect("candidates nonempty");
    let mut best: Option<BigRational> = None;
    for c in cands.into_iter().filter(|c| dist_lo(c) <= cutoff) {
        let Some(b) = &best else {
            best = Some(c);
            continue;
        };
        match closer(x, &c, b)? {
            Ordering::Less => best = Some(c),
            Ordering::Equal => {
                let key = |r: &BigRational| (r.denom().clone(), r.numer().abs());
                if key(&c) < key(b) {
                    best = Some(c);
                }
            }
            Ordering::Greater => {}
        }
    }
    Ok(best.expect("candidates nonempty"))
}

/// Major arc around `a/b` or the minor arcs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ArcClassification {
    Major { a: BigInt, b: u64 },
    Minor,
}

/// Is |x − c| ≤ N^{−1/3}, i.e. N·(x − c)³ ∈ [−1, 1]?
fn within_arc(x: &CertifiedReal, c: &BigRational, n: u64) -> Result<bool> {
    let nr = BigRational::from_integer(n.into());
    let one = BigRational::one();
    if let Some(v) = x.exact() {
        let d = v.add_rational(&-c);
        let cube = d.mul(&d).and_then(|d2| d2.mul(&d)).expect("same field").scale(&nr);
        return Ok(cube.cmp_rational(&one) != Ordering::Greater
            && cube.cmp_rational(&-one) != Ordering::Less);
    }
    for &k in &PRECISION_LADDER {
        let (iv, exhausted) = x.refine_capped(k);
        let lo = (&iv.lo - c).pow(3) * &nr;
        let hi = (&iv.hi - c).pow(3) * &nr;
        if lo >= -one.clone() && hi <= one {
            return Ok(true);
        }
        if hi < -one.clone() || lo > one {
            return Ok(false);
        }
        if exhausted {
            break;
        }
    }
    Err(Error::Precision(format!(
        "cannot decide whether {x} lies within N^(-1/3) of {}",
        crate::util::rat_string(c)
    )))
}

/// Classify `x` against the major arcs of level `t` at scale `n`.
pub fn classify_arc(x: &CertifiedReal, t: u64, n: u64) -> Result<ArcClassification> {
    if t == 0 {
        return Err(Error::validation("T must be at least 1"));
    }
    if n < 8 {
        return Err(Error::validation("N must be at least 8"));
    }
    let (iv, _) = x.refine_capped(64);
    let mut hits: Vec<BigRational> = Vec::new();
    for b in 1..=t {
        let bb = BigRational::from_integer(b.into());
        let lo = floor_rat(&(&iv.lo * &bb));
        let hi = floor_rat(&(&iv.hi * &bb)) + 1;
        let mut a = lo;
        while a <= hi {
            let c = BigRational::new(a.clone(), b.into());
            if c.denom().to_u64() == Some(b) && within_arc(x, &c, n)? {
                hits.push(c);
            }
            a += 1;
        }
    }
    hits.sort();
    hits.dedup();
    match hits.len() {
        0 => Ok(ArcClassification::Minor),
        1 => {
            let c = &hits[0];
            Ok(ArcClassification::Major {
                a: c.numer().clone(),
                b: c.denom().to_u64().expect("denominator <= T"),
            })
        }
        _ => Err(Error::Precision(format!(
            "{} major-arc centres within N^(-1/3) of {x}; N too small",
            hits.len()
        ))),
    }
}
