//! Prime tuples (p_ij), their A/B/C/D taxonomy and the estimators built on
//! them.

use super::{window_fourier_abs, Window};
use crate::arith::is_prime_u64;
use crate::error::{Error, Result};
use crate::reals::{BeattyEvaluator, BeattySpec};
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use std::collections::BTreeMap;
use std::f64::consts::PI;

/// Indexed primes p_ij with i < k, j < ℓᵢ.
#[derive(Debug, Clone, PartialEq, Eq, Hash, serde::Serialize)]
pub struct PrimeTuple {
    entries: Vec<Vec<u64>>,
}

impl PrimeTuple {
    pub fn new(entries: Vec<Vec<u64>>) -> Result<Self> {
        if let Some(p) = entries.iter().flatten().find(|&&p| !is_prime_u64(p)) {
            return Err(Error::validation(format!("tuple entry {p} is not prime")));
        }
        Ok(Self { entries })
    }

    pub fn shape(&self) -> Vec<usize> {
        self.entries.iter().map(Vec::len).collect()
    }

    pub fn k(&self) -> usize {
        self.entries.len()
    }

    /// ℓ = Σ ℓᵢ.
    pub fn len(&self) -> usize {
        self.entries.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn entries(&self) -> &[Vec<u64>] {
        &self.entries
    }

    /// (i, p) pairs in row-major order.
    pub fn flat(&self) -> Vec<(usize, u64)> {
        self.entries
            .iter()
            .enumerate()
            .flat_map(|(i, row)| row.iter().map(move |&p| (i, p)))
            .collect()
    }

    /// Every tuple of the given shape with entries drawn from `primes`.
    pub fn enumerate(shape: &[usize], primes: &[u64]) -> Vec<PrimeTuple> {
        let l: usize = shape.iter().sum();
        let total = primes.len().pow(l as u32);
        (0..total)
            .map(|mut code| {
                let mut flat = Vec::with_capacity(l);
                for _ in 0..l {
                    flat.push(primes[code % primes.len()]);
                    code /= primes.len();
                }
                flat.reverse();
                let mut it = flat.into_iter();
                let entries = shape.iter().map(|&li| it.by_ref().take(li).collect()).collect();
                PrimeTuple { entries }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
pub enum TupleType {
    /// Every prime occurs exactly twice, both times in the same coordinate.
    A,
    /// Every prime occurs exactly twice, some pair spans two coordinates.
    B,
    /// Some prime occurs exactly once.
    C,
    /// Everything else.
    D,
}

pub fn classify_tuple(t: &PrimeTuple) -> TupleType {
    let mut occurrences: BTreeMap<u64, Vec<usize>> = BTreeMap::new();
    for (i, p) in t.flat() {
        occurrences.entry(p).or_default().push(i);
    }
    if occurrences.values().any(|v| v.len() == 1) {
        return TupleType::C;
    }
    if occurrences.values().all(|v| v.len() == 2) {
        if occurrences.values().all(|v| v[0] == v[1]) {
            TupleType::A
        } else {
            TupleType::B
        }
    } else {
        TupleType::D
    }
}

/// Π over distinct primes of (1/p − 1/p²), the type-A main term.
pub fn type_a_prediction(t: &PrimeTuple) -> Result<BigRational> {
    let ty = classify_tuple(t);
    if ty != TupleType::A {
        return Err(Error::TypeMismatch(format!("tuple is type {ty:?}, not A")));
    }
    let mut distinct: Vec<u64> = t.flat().into_iter().map(|(_, p)| p).collect();
    distinct.sort_unstable();
    distinct.dedup();
    Ok(distinct.into_iter().fold(BigRational::one(), |acc, p| {
        acc * BigRational::new(BigInt::from(p - 1), BigInt::from(p * p))
    }))
}

/// Averaging range for [`e_direct`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SumRange {
    Full,
    /// The u-th interval of the √N partition.
    Sub(u64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct DirectEstimate {
    pub exact: BigRational,
    pub value: f64,
    pub count: u64,
}

/// Average over n of Π_ij (1_{p_ij | ⌊αᵢn + βᵢ⌋} − 1/p_ij), exactly.
///
/// Each n contributes through the bit pattern of which entries divide; the
/// patterns are counted and the rational weights summed once at the end.
pub fn e_direct(t: &PrimeTuple, specs: &[BeattySpec], n: u64, range: SumRange) -> Result<DirectEstimate> {
    if t.k() != specs.len() {
        return Err(Error::validation(format!(
            "tuple has {} coordinates but {} specs were given",
            t.k(),
            specs.len()
        )));
    }
    let flat = t.flat();
    if flat.len() > 24 {
        return Err(Error::Capacity(format!("tuple length {} exceeds 24", flat.len())));
    }
    let (lo, hi) = match range {
        SumRange::Full => (1, n),
        SumRange::Sub(u) => super::interval_bounds(n, u)?,
    };
    if n == 0 || lo > hi {
        return Err(Error::EmptyDomain("empty averaging range".into()));
    }
    let evals: Vec<BeattyEvaluator> = specs.iter().map(|s| BeattyEvaluator::new(s, hi)).collect();
    let patterns = pattern_counts(&flat, &evals, lo, hi)?;
    let count = hi - lo + 1;
    let mut total = BigRational::zero();
    for (mask, c) in patterns {
        let mut w = BigRational::from_integer(c.into());
        for (bit, &(_, p)) in flat.iter().enumerate() {
            let inv = BigRational::new(BigInt::one(), BigInt::from(p));
            w *= if mask >> bit & 1 == 1 { BigRational::one() - inv } else { -inv };
        }
        total += w;
    }
    let exact = total / BigRational::from_integer(count.into());
    Ok(DirectEstimate {
        value: crate::util::rat_to_f64(&exact),
        exact,
        count,
    })
}

fn pattern_counts(
    flat: &[(usize, u64)],
    evals: &[BeattyEvaluator],
    lo: u64,
    hi: u64,
) -> Result<BTreeMap<u32, u64>> {
    const CHUNK: u64 = 1 << 16;
    let starts: Vec<u64> = (lo..=hi).step_by(CHUNK as usize).collect();
    let parts: Vec<Result<BTreeMap<u32, u64>>> = starts
        .par_iter()
        .map(|&s| {
            let mut local = BTreeMap::new();
            let mut floors = vec![0i64; evals.len()];
            for n in s..=(s + CHUNK - 1).min(hi) {
                for (f, ev) in floors.iter_mut().zip(evals) {
                    *f = ev.floor(n)?;
                }
                let mut mask = 0u32;
                for (bit, &(i, p)) in flat.iter().enumerate() {
                    if floors[i].rem_euclid(p as i64) == 0 {
                        mask |= 1 << bit;
                    }
                }
                *local.entry(mask).or_insert(0) += 1;
            }
            Ok(local)
        })
        .collect();
    let mut out = BTreeMap::new();
    for part in parts {
        for (m, c) in part? {
            *out.entry(m).or_insert(0) += c;
        }
    }
    Ok(out)
}

/// Frequencies m_ij ∈ p_ij⁻¹ℤ attached to a tuple.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrequencyTuple {
    entries: Vec<Vec<BigRational>>,
}

impl FrequencyTuple {
    pub fn new(t: &PrimeTuple, entries: Vec<Vec<BigRational>>) -> Result<Self> {
        if entries.iter().map(Vec::len).ne(t.entries().iter().map(Vec::len)) {
            return Err(Error::validation("frequency tuple shape mismatch"));
        }
        for (row, prow) in entries.iter().zip(t.entries()) {
            for (m, &p) in row.iter().zip(prow) {
                if !(m * BigRational::from_integer(p.into())).is_integer() {
                    return Err(Error::validation(format!(
                        "{} is not in {p}^-1 Z",
                        crate::util::rat_string(m)
                    )));
                }
            }
        }
        Ok(Self { entries })
    }

    pub fn entries(&self) -> &[Vec<BigRational>] {
        &self.entries
    }

    /// Σ_ij m_ij γᵢ ∈ ℤ?
    pub fn satisfies(&self, gamma: &[BigRational]) -> bool {
        let s = self
            .entries
            .iter()
            .zip(gamma)
            .flat_map(|(row, g)| row.iter().map(move |m| m * g))
            .fold(BigRational::zero(), |a, b| a + b);
        s.is_integer()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub enum RestrictedVariant {
    /// All m_ij ∈ p⁻¹ℤ weighted by the tent transform φ(m)/p.
    Prime,
    /// m_ij ∈ p⁻¹ℤ \ ℤ weighted by |φ±(m)|/p.
    Triple { eps: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct RestrictedSum {
    pub value: f64,
    /// Bound on the contribution of tuples with some |m_ij| > J.
    pub tail_bound: f64,
    /// Size of the residue space the constraint was tracked in.
    pub modulus: u64,
}

/// Largest residue modulus accepted by [`e_restricted_sum`].
pub const RESIDUE_BUDGET: u64 = 1 << 22;

/// Σ over (m_ij) with |m_ij| ≤ J and Σ m_ij γᵢ ∈ ℤ of Π_ij w(m_ij).
///
/// The constraint is tracked exactly as a residue of Σ m_ij γᵢ modulo 1 with
/// common denominator D = lcm(p_ij · den γᵢ); the sum is a convolution over
/// ℤ/D. Residue 0 only ever receives mass from admissible tuples, so an
/// empty admissible set yields exactly 0.
pub fn e_restricted_sum(
    t: &PrimeTuple,
    gamma: &[BigRational],
    j: u64,
    variant: RestrictedVariant,
) -> Result<RestrictedSum> {
    if gamma.len() != t.k() {
        return Err(Error::validation(format!(
            "gamma has {} entries but the tuple has {} coordinates",
            gamma.len(),
            t.k()
        )));
    }
    if j == 0 {
        return Err(Error::validation("J must be at least 1"));
    }
    let eps = match variant {
        RestrictedVariant::Prime => 0.0,
        RestrictedVariant::Triple { eps } if eps > 0.0 && eps <= 0.5 => eps,
        RestrictedVariant::Triple { eps } => {
            return Err(Error::validation(format!("epsilon = {eps} must lie in (0, 1/2]")))
        }
    };
    let flat = t.flat();
    let mut modulus = BigInt::one();
    for &(i, p) in &flat {
        modulus = modulus.lcm(&(gamma[i].denom() * BigInt::from(p)));
    }
    let d = modulus
        .to_u64()
        .filter(|&d| d <= RESIDUE_BUDGET)
        .ok_or_else(|| Error::budget("e_restricted_sum residues", &modulus, RESIDUE_BUDGET))?;
    let cands_per_entry = 2 * j as u128 * flat.iter().map(|&(_, p)| p as u128).max().unwrap_or(1) + 1;
    if cands_per_entry * d as u128 > 1 << 34 {
        return Err(Error::budget("e_restricted_sum enumeration", cands_per_entry * d as u128, 1u64 << 34));
    }

    let mut state = vec![0.0f64; d as usize];
    state[0] = 1.0;
    let mut mass_max: f64 = 0.0;
    for &(i, p) in &flat {
        // weights aggregated by residue of m·γᵢ, m = c/p
        let g = &gamma[i];
        let step = (g.numer() * (&modulus / (g.denom() * BigInt::from(p))))
            .mod_floor(&modulus)
            .to_u64()
            .expect("residue below modulus");
        let mut by_residue: BTreeMap<u64, f64> = BTreeMap::new();
        let lim = j as i64 * p as i64;
        let mut mass = 0.0;
        for c in -lim..=lim {
            let w = match variant {
                RestrictedVariant::Prime => window_fourier_abs(Window::Tent, c as f64 / p as f64, 0.0),
                RestrictedVariant::Triple { .. } => {
                    if c % p as i64 == 0 {
                        continue;
                    }
                    window_fourier_abs(Window::Plus, c as f64 / p as f64, eps)
                }
            } / p as f64;
            if w == 0.0 {
                continue;
            }
            mass += w;
            let r = ((c as i128 * step as i128).rem_euclid(d as i128)) as u64;
            *by_residue.entry(r).or_insert(0.0) += w;
        }
        mass_max = mass_max.max(mass);
        let mut next = vec![0.0f64; d as usize];
        for (s, &v) in state.iter().enumerate() {
            if v == 0.0 {
                continue;
            }
            for (&r, &w) in &by_residue {
                next[((s as u64 + r) % d) as usize] += v * w;
            }
        }
        state = next;
    }
    let l = flat.len() as f64;
    let tail_bound = if flat.is_empty() {
        0.0
    } else {
        match variant {
            RestrictedVariant::Prime => {
                let tau = 2.0 / (PI * PI * j as f64);
                l * tau * 2f64.powf(l - 1.0)
            }
            RestrictedVariant::Triple { eps } => {
                let tau = 2.0 / (PI * PI * eps * j as f64);
                l * tau * (mass_max + tau).powf(l - 1.0)
            }
        }
    };
    Ok(RestrictedSum {
        value: state[0],
        tail_bound,
        modulus: d,
    })
}
