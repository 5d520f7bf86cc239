//! Prime generation and segmented ω/Ω tables.

mod cache;
mod factor;

pub use cache::{cache_path, load_table, save_table, CACHE_MAGIC};
pub use factor::{is_prime_u64, omega_u64, prime_factors_u64, trial_omega};

use crate::error::{Error, Result};
use crate::util::Compensated;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use rayon::prelude::*;

/// Per-integer counts of distinct prime divisors (ω) and prime divisors with
/// multiplicity (Ω) over `[lo, hi)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FactorTable {
    lo: u64,
    hi: u64,
    omega: Vec<u8>,
    big_omega: Vec<u8>,
}

impl FactorTable {
    pub(crate) fn from_parts(lo: u64, hi: u64, omega: Vec<u8>, big_omega: Vec<u8>) -> Self {
        debug_assert_eq!(omega.len() as u64, hi - lo);
        debug_assert_eq!(big_omega.len() as u64, hi - lo);
        Self {
            lo,
            hi,
            omega,
            big_omega,
        }
    }

    pub fn lo(&self) -> u64 {
        self.lo
    }

    pub fn hi(&self) -> u64 {
        self.hi
    }

    pub fn len(&self) -> usize {
        self.omega.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omega.is_empty()
    }

    pub fn contains(&self, n: u64) -> bool {
        n >= self.lo && n < self.hi
    }

    /// ω(n). Panics when `n` lies outside the table.
    pub fn omega(&self, n: u64) -> u8 {
        self.omega[(n - self.lo) as usize]
    }

    /// Ω(n). Panics when `n` lies outside the table.
    pub fn big_omega(&self, n: u64) -> u8 {
        self.big_omega[(n - self.lo) as usize]
    }

    pub fn omega_slice(&self) -> &[u8] {
        &self.omega
    }

    pub fn big_omega_slice(&self) -> &[u8] {
        &self.big_omega
    }

    /// Restrict to `[lo, hi)`, which must lie inside the table.
    pub fn slice(&self, lo: u64, hi: u64) -> Result<FactorTable> {
        if lo >= hi || lo < self.lo || hi > self.hi {
            return Err(Error::Range(format!(
                "[{lo}, {hi}) is not a nonempty subrange of [{}, {})",
                self.lo, self.hi
            )));
        }
        let a = (lo - self.lo) as usize;
        let b = (hi - self.lo) as usize;
        Ok(FactorTable::from_parts(
            lo,
            hi,
            self.omega[a..b].to_vec(),
            self.big_omega[a..b].to_vec(),
        ))
    }
}

/// Tuning knobs for [`omega_range_with`].
#[derive(Debug, Clone, Copy)]
pub struct SieveConfig {
    /// Integers per segment.
    pub segment_size: usize,
    /// Largest table length accepted before a capacity error.
    pub max_len: u64,
}

impl Default for SieveConfig {
    fn default() -> Self {
        Self {
            segment_size: 1 << 20,
            max_len: 1 << 31,
        }
    }
}

/// Largest supported argument.
pub const MAX_N: u64 = 1 << 63;

/// All primes `<= limit` in ascending order.
pub fn sieve_primes(limit: u64) -> Result<Vec<u64>> {
    if limit < 2 {
        return Err(Error::EmptyDomain(format!("no primes up to {limit}")));
    }
    if limit > (1u64 << 40) {
        return Err(Error::Capacity(format!("prime sieve limit {limit} too large")));
    }
    Ok(primes_up_to(limit))
}

/// Odd-only sieve of Eratosthenes; returns an empty vector below 2.
pub(crate) fn primes_up_to(limit: u64) -> Vec<u64> {
    if limit < 2 {
        return Vec::new();
    }
    let half = ((limit - 1) / 2) as usize;
    // index i stands for 2i + 1
    let mut composite = vec![false; half + 1];
    let mut i = 1usize;
    while (2 * i + 1) * (2 * i + 1) <= limit as usize {
        if !composite[i] {
            let p = 2 * i + 1;
            let mut j = (p * p) / 2;
            while j <= half {
                composite[j] = true;
                j += p;
            }
        }
        i += 1;
    }
    let mut out = Vec::with_capacity(estimate_pi(limit));
    out.push(2);
    out.extend((1..=half).filter(|&i| !composite[i]).map(|i| 2 * i as u64 + 1));
    out
}

fn estimate_pi(x: u64) -> usize {
    let xf = x as f64;
    if xf < 17.0 {
        8
    } else {
        (1.26 * xf / xf.ln()) as usize
    }
}

/// ω and Ω for every integer in `[lo, hi)` with the default configuration.
pub fn omega_range(lo: u64, hi: u64) -> Result<FactorTable> {
    omega_range_with(lo, hi, &SieveConfig::default())
}

/// Segmented sieve. Segments are processed in parallel on the current rayon
/// pool and concatenated in range order, so the output does not depend on the
/// thread count.
pub fn omega_range_with(lo: u64, hi: u64, config: &SieveConfig) -> Result<FactorTable> {
    if lo < 1 || hi <= lo {
        return Err(Error::Range(format!("need 1 <= lo < hi, got [{lo}, {hi})")));
    }
    if hi > MAX_N {
        return Err(Error::Capacity(format!("hi = {hi} exceeds 2^63")));
    }
    let len = hi - lo;
    if len > config.max_len {
        return Err(Error::Capacity(format!(
            "range length {len} exceeds table budget {}",
            config.max_len
        )));
    }
    let seg = config.segment_size.max(1) as u64;
    let base = primes_up_to(isqrt_u64(hi - 1));
    let starts: Vec<u64> = (0..len.div_ceil(seg)).map(|i| lo + i * seg).collect();
    let parts: Vec<(Vec<u8>, Vec<u8>)> = starts
        .par_iter()
        .map(|&s| sieve_segment(s, (s + seg).min(hi), &base))
        .collect();
    let mut omega = Vec::with_capacity(len as usize);
    let mut big_omega = Vec::with_capacity(len as usize);
    for (o, b) in parts {
        omega.extend_from_slice(&o);
        big_omega.extend_from_slice(&b);
    }
    Ok(FactorTable::from_parts(lo, hi, omega, big_omega))
}

fn sieve_segment(s: u64, e: u64, base: &[u64]) -> (Vec<u8>, Vec<u8>) {
    let len = (e - s) as usize;
    let mut rem: Vec<u64> = (s..e).collect();
    let mut om = vec![0u8; len];
    let mut bo = vec![0u8; len];
    for &p in base {
        if p * p > e - 1 {
            break;
        }
        let mut j = (first_multiple(s, p) - s) as usize;
        while j < len {
            om[j] += 1;
            bo[j] += 1;
            rem[j] /= p;
            j += p as usize;
        }
        // higher prime powers, one extra unit of Ω per level
        let mut q = p;
        while let Some(pk) = q.checked_mul(p) {
            if pk > e - 1 {
                break;
            }
            let mut j = (first_multiple(s, pk) - s) as usize;
            while j < len {
                bo[j] += 1;
                rem[j] /= p;
                j += pk as usize;
            }
            q = pk;
        }
    }
    for j in 0..len {
        if rem[j] > 1 {
            om[j] += 1;
            bo[j] += 1;
        }
    }
    (om, bo)
}

fn first_multiple(s: u64, p: u64) -> u64 {
    s.div_ceil(p) * p
}

pub fn isqrt_u64(n: u64) -> u64 {
    if n < 2 {
        return n;
    }
    let mut r = (n as f64).sqrt() as u64;
    while r.checked_mul(r).map_or(true, |v| v > n) {
        r -= 1;
    }
    while (r + 1).checked_mul(r + 1).map_or(false, |v| v <= n) {
        r += 1;
    }
    r
}

/// [`omega_range`] backed by an exact-match cache file in `dir`.
pub fn omega_range_cached(lo: u64, hi: u64, dir: Option<&std::path::Path>) -> Result<FactorTable> {
    let Some(dir) = dir else {
        return omega_range(lo, hi);
    };
    let path = cache_path(dir, lo, hi);
    if path.exists() {
        if let Ok(t) = load_table(&path) {
            if t.lo() == lo && t.hi() == hi {
                return Ok(t);
            }
        }
    }
    let t = omega_range(lo, hi)?;
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    save_table(&path, &t)?;
    Ok(t)
}

/// ω of arbitrary positive values: one sieve over [1, max] when the values
/// are dense enough, single-value factoring otherwise.
pub fn omega_of_values(values: &[u64], cache: Option<&std::path::Path>) -> Result<Vec<u8>> {
    if values.is_empty() {
        return Ok(Vec::new());
    }
    if values.contains(&0) {
        return Err(Error::validation("omega of 0 is undefined"));
    }
    let max = *values.iter().max().expect("nonempty");
    if max <= 8 * values.len() as u64 + (1 << 20) {
        let t = omega_range_cached(1, max + 1, cache)?;
        Ok(values.iter().map(|&v| t.omega(v)).collect())
    } else {
        Ok(values.par_iter().map(|&v| omega_u64(v).0).collect())
    }
}

/// Σ 1/p in ascending prime order with compensated summation.
pub fn prime_reciprocal_sum(primes: &[u64]) -> Result<f64> {
    let mut sorted = primes.to_vec();
    sorted.sort_unstable();
    if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
        return Err(Error::validation(format!("duplicate prime {}", w[0])));
    }
    let mut acc = Compensated::new();
    for p in sorted {
        acc.add(1.0 / p as f64);
    }
    Ok(acc.value())
}

/// The truncation prime set 𝒫 (`good`) and the excluded set ℬ (`bad`).
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct PrimeSets {
    pub r: u64,
    pub good: Vec<u64>,
    pub bad: Vec<u64>,
}

/// Build ℬ from the prime factors of every numerator and denominator of
/// `gammas` together with the primes `<= ln N`, and 𝒫 = {p <= R} \ ℬ.
///
/// Each γ is given as a (numerator, denominator) pair.
pub fn build_prime_sets(n: f64, r: u64, gammas: &[(BigInt, BigInt)]) -> Result<PrimeSets> {
    if r < 2 {
        return Err(Error::validation(format!("R = {r} must be at least 2")));
    }
    if !(n >= 1.0) {
        return Err(Error::validation(format!("N = {n} must be at least 1")));
    }
    let mut bad = std::collections::BTreeSet::new();
    for (num, den) in gammas {
        if den.is_zero() {
            return Err(Error::validation("zero denominator in gamma"));
        }
        for part in [num, den] {
            let v = part.abs();
            if v.is_zero() {
                continue;
            }
            let v = v.to_u64().ok_or_else(|| {
                Error::Capacity(format!("cannot factor {v}: exceeds 64 bits"))
            })?;
            bad.extend(prime_factors_u64(v));
        }
    }
    let log_n = n.ln();
    if log_n >= 2.0 {
        bad.extend(primes_up_to(log_n.floor() as u64));
    }
    let good = primes_up_to(r)
        .into_iter()
        .filter(|p| !bad.contains(p))
        .collect();
    Ok(PrimeSets {
        r,
        good,
        bad: bad.into_iter().collect(),
    })
}

/// [`build_prime_sets`] for already-reduced rationals.
pub fn build_prime_sets_rational(n: f64, r: u64, gammas: &[BigRational]) -> Result<PrimeSets> {
    let pairs: Vec<(BigInt, BigInt)> = gammas
        .iter()
        .map(|g| (g.numer().clone(), g.denom().clone()))
        .collect();
    build_prime_sets(n, r, &pairs)
}
