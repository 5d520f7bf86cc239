//! The √N interval partition and i±-goodness of intervals.

use crate::arith::isqrt_u64;
use crate::error::{Error, Result};
use crate::reals::{BeattyEvaluator, BeattySpec};
use num_rational::BigRational;
use num_traits::One;
use rayon::prelude::*;
use serde::Serialize;
use std::cmp::Ordering;

/// Width ⌊√N⌋ and number of intervals ⌊N / width⌋; the last interval absorbs
/// the remainder.
pub fn partition(n: u64) -> (u64, u64) {
    let w = isqrt_u64(n).max(1);
    (w, n / w)
}

/// Inclusive bounds of S_u.
pub fn interval_bounds(n: u64, u: u64) -> Result<(u64, u64)> {
    let (w, count) = partition(n);
    if n == 0 || u == 0 || u > count {
        return Err(Error::Range(format!("interval index {u} outside 1..={count}")));
    }
    let lo = (u - 1) * w + 1;
    let hi = if u == count { n } else { u * w };
    Ok((lo, hi))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    PlusGood,
    MinusGood,
    Bad,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoordinateGoodness {
    /// Count of n with {αn + β} ∈ [0, ε).
    pub plus_hits: u64,
    /// Count of n with {αn + β} ∈ (1 − ε, 1).
    pub minus_hits: u64,
    pub size: u64,
    pub plus_fraction: f64,
    pub minus_fraction: f64,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GoodnessReport {
    pub u: u64,
    pub lo: u64,
    pub hi: u64,
    pub eps: f64,
    pub threshold: f64,
    pub coords: Vec<CoordinateGoodness>,
}

/// Hit fractions near 0 mod 1 on S_u, per coordinate, against ε^{1/4}.
pub fn interval_goodness(specs: &[BeattySpec], u: u64, n: u64, eps: f64) -> Result<GoodnessReport> {
    if !(eps > 0.0 && eps <= 0.5) {
        return Err(Error::validation(format!("epsilon = {eps} must lie in (0, 1/2]")));
    }
    let (lo, hi) = interval_bounds(n, u)?;
    let eps_r = BigRational::from_float(eps).expect("finite epsilon");
    let threshold = eps.powf(0.25);
    let size = hi - lo + 1;
    let mut coords = Vec::with_capacity(specs.len());
    for spec in specs {
        let ev = BeattyEvaluator::new(spec, hi);
        let below = ev.threshold(&eps_r);
        let above = ev.threshold(&(BigRational::one() - &eps_r));
        let (mut plus, mut minus) = (0u64, 0u64);
        for m in lo..=hi {
            let f = ev.floor(m)?;
            if ev.cmp_shifted(m, f, &below)? == Ordering::Less {
                plus += 1;
            } else if ev.cmp_shifted(m, f, &above)? == Ordering::Greater {
                minus += 1;
            }
        }
        let pf = plus as f64 / size as f64;
        let mf = minus as f64 / size as f64;
        let verdict = if pf <= threshold {
            Verdict::PlusGood
        } else if mf <= threshold {
            Verdict::MinusGood
        } else {
            Verdict::Bad
        };
        coords.push(CoordinateGoodness {
            plus_hits: plus,
            minus_hits: minus,
            size,
            plus_fraction: pf,
            minus_fraction: mf,
            verdict,
        });
    }
    Ok(GoodnessReport {
        u,
        lo,
        hi,
        eps,
        threshold,
        coords,
    })
}

/// Reports for every interval of the partition, in order.
pub fn goodness_all(specs: &[BeattySpec], n: u64, eps: f64) -> Result<Vec<GoodnessReport>> {
    let (_, count) = partition(n);
    (1..=count)
        .into_par_iter()
        .map(|u| interval_goodness(specs, u, n, eps))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(a: &str, b: &str) -> BeattySpec {
        BeattySpec::parse(a, b).unwrap()
    }

    #[test]
    fn partition_shapes() {
        assert_eq!(partition(10_000), (100, 100));
        assert_eq!(interval_bounds(10_000, 100).unwrap(), (9901, 10_000));
        assert_eq!(partition(10), (3, 3));
        assert_eq!(interval_bounds(10, 3).unwrap(), (7, 10));
        assert!(interval_bounds(10, 4).is_err());
    }

    #[test]
    fn half_is_minus_good() {
        let r = interval_goodness(&[spec("1/2", "0")], 3, 10_000, 0.04).unwrap();
        let c = &r.coords[0];
        assert_eq!(c.minus_hits, 0);
        assert_eq!(c.plus_hits, 50);
        assert_eq!(c.verdict, Verdict::MinusGood);
    }

    #[test]
    fn sqrt_two_is_plus_good() {
        let r = interval_goodness(&[spec("sqrt:2", "0")], 1, 10_000, 0.01).unwrap();
        let c = &r.coords[0];
        assert!(c.plus_fraction <= 0.05);
        assert_eq!(c.verdict, Verdict::PlusGood);
    }

    #[test]
    fn constructed_bad_interval() {
        // n/2500 − 101/5000 sweeps (−ε, ε) across S_1 = [1, 100]
        let r = interval_goodness(&[spec("1/2500", "-101/5000")], 1, 10_000, 0.04).unwrap();
        let c = &r.coords[0];
        assert_eq!((c.plus_hits, c.minus_hits), (50, 50));
        assert_eq!(c.verdict, Verdict::Bad);
    }
}
