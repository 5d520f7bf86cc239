//! The independent-prime model ω‴ = Σ X_p with X_p ~ Bernoulli(1/p),
//! its characteristic function, Esseen smoothing bounds, binomial moments,
//! divisibility densities and Gaussian recentring.

use crate::error::{Error, Result};
use crate::harmonic::e;
use crate::reals::{beatty_floors, BeattySpec};
use crate::stats::gaussian_cdf;
use crate::util::{rat_to_f64, Compensated};
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::RngCore;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KubiliusModel {
    primes: Vec<u64>,
    /// Σ 1/p over the model primes.
    pub s: f64,
    pub seed: u64,
}

impl KubiliusModel {
    pub fn new(primes: Vec<u64>, seed: u64) -> Result<Self> {
        if primes.is_empty() {
            return Err(Error::EmptyDomain("model needs at least one prime".into()));
        }
        if primes[0] < 2 {
            return Err(Error::validation(format!("{} is not a prime", primes[0])));
        }
        if primes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::validation("primes must be strictly increasing"));
        }
        let mut acc = Compensated::new();
        for &p in primes.iter().rev() {
            acc.add(1.0 / p as f64);
        }
        Ok(Self {
            primes,
            s: acc.value(),
            seed,
        })
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }
}

/// Draw `count` independent copies of ω‴.
///
/// Draw i reads ChaCha8 stream i under the model seed; prime j consumes the
/// j-th 64-bit word, so every value depends only on (seed, i, j).
pub fn sample_model(model: &KubiliusModel, count: usize) -> Result<Vec<u32>> {
    if count == 0 {
        return Err(Error::EmptyDomain("count must be at least 1".into()));
    }
    let thresholds: Vec<u64> = model
        .primes
        .iter()
        .map(|&p| {
            // ceil(2^64 / p); p = 2 gives exactly half the range
            let q = (1u128 << 64).div_ceil(p as u128);
            q.min(u64::MAX as u128) as u64
        })
        .collect();
    Ok((0..count as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(model.seed);
            rng.set_stream(i);
            thresholds.iter().filter(|&&t| rng.next_u64() < t).count() as u32
        })
        .collect())
}

/// E e(t ω‴) = Π (1 + (e(t) − 1)/p).
pub fn char_exact(model: &KubiliusModel, t: f64) -> Complex64 {
    let z = e(t) - 1.0;
    model
        .primes
        .iter()
        .fold(Complex64::new(1.0, 0.0), |acc, &p| acc * (1.0 + z / p as f64))
}

/// E e(t (ω‴ − s)/√s).
pub fn char_standardized(model: &KubiliusModel, t: f64) -> Complex64 {
    let rs = model.s.sqrt();
    e(-t * rs) * char_exact(model, t / rs)
}

/// |E e(t ω‴)| computed factorwise as Π √(1 − 4(1 − 1/p)(1/p) sin²(πt)).
pub fn char_modulus(model: &KubiliusModel, t: f64) -> f64 {
    let s2 = (PI * t).sin().powi(2);
    model
        .primes
        .iter()
        .map(|&p| {
            let q = 1.0 / p as f64;
            (1.0 - 4.0 * (1.0 - q) * q * s2).max(0.0).sqrt()
        })
        .product()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CharRow {
    pub t: f64,
    pub exact_re: f64,
    pub exact_im: f64,
    pub empirical_re: f64,
    pub empirical_im: f64,
    pub diff: f64,
}

/// Empirical average of e(t·v) over a sample of small nonnegative integers.
pub fn char_empirical(values: &[u32], t: f64) -> Complex64 {
    let hist = histogram(values);
    empirical_from_hist(&hist, values.len(), t)
}

fn histogram(values: &[u32]) -> Vec<u64> {
    let top = values.iter().copied().max().unwrap_or(0) as usize;
    let mut hist = vec![0u64; top + 1];
    for &v in values {
        hist[v as usize] += 1;
    }
    hist
}

fn empirical_from_hist(hist: &[u64], n: usize, t: f64) -> Complex64 {
    let (mut re, mut im) = (Compensated::new(), Compensated::new());
    for (v, &c) in hist.iter().enumerate() {
        if c > 0 {
            let z = e(t * v as f64);
            re.add(c as f64 * z.re);
            im.add(c as f64 * z.im);
        }
    }
    Complex64::new(re.value(), im.value()) / n as f64
}

/// Exact model characteristic function against a sample, row per t.
pub fn char_compare(model: &KubiliusModel, empirical: &[u32], t_grid: &[f64]) -> Result<Vec<CharRow>> {
    if t_grid.is_empty() {
        return Err(Error::EmptyDomain("empty t grid".into()));
    }
    if empirical.is_empty() {
        return Err(Error::EmptyDomain("empty sample".into()));
    }
    let hist = histogram(empirical);
    Ok(t_grid
        .iter()
        .map(|&t| {
            let ex = char_exact(model, t);
            let em = empirical_from_hist(&hist, empirical.len(), t);
            CharRow {
                t,
                exact_re: ex.re,
                exact_im: ex.im,
                empirical_re: em.re,
                empirical_im: em.im,
                diff: (ex - em).norm(),
            }
        })
        .collect())
}

/// Constants in sup|F − Φ| ≤ prefactor·∫|(φ − g)/t| dt + c1_factor·m/A.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, serde::Deserialize)]
pub struct EsseenConstants {
    pub integral_prefactor: f64,
    pub c1_factor: f64,
}

impl Default for EsseenConstants {
    fn default() -> Self {
        Self {
            integral_prefactor: 1.0 / PI,
            c1_factor: 24.0 / PI,
        }
    }
}

/// Density bound of the standard Gaussian, the usual choice of `density_sup`.
pub const GAUSSIAN_DENSITY_SUP: f64 = 0.398_942_280_401_432_7;

/// Smoothing-inequality bound on d_K(X, N(0,1)) from samples of φ_X on
/// [−A, A] (t in cycles, φ_X(t) = E e(tX)).
pub fn esseen_bound(char_values: &[(f64, Complex64)], a: f64, density_sup: f64) -> Result<f64> {
    esseen_bound_with(char_values, a, density_sup, EsseenConstants::default())
}

pub fn esseen_bound_with(
    char_values: &[(f64, Complex64)],
    a: f64,
    density_sup: f64,
    constants: EsseenConstants,
) -> Result<f64> {
    if !(a > 0.0) {
        return Err(Error::validation(format!("A = {a} must be positive")));
    }
    if !(density_sup >= 0.0) {
        return Err(Error::validation("density_sup must be nonnegative"));
    }
    if char_values.len() < 2 {
        return Err(Error::Resolution("need at least two grid points".into()));
    }
    let max_step = a / 512.0;
    let slack = 1e-9 * a;
    if char_values.windows(2).any(|w| !(w[1].0 > w[0].0)) {
        return Err(Error::validation("grid must be strictly increasing"));
    }
    let (first, last) = (char_values[0].0, char_values[char_values.len() - 1].0);
    if first > -a + slack || last < a - slack {
        return Err(Error::Resolution(format!("grid [{first}, {last}] does not cover [-{a}, {a}]")));
    }
    if let Some(w) = char_values.windows(2).find(|w| w[1].0 - w[0].0 > max_step + slack) {
        return Err(Error::Resolution(format!(
            "spacing {} exceeds A/512 = {max_step}",
            w[1].0 - w[0].0
        )));
    }
    let f = |t: f64, phi: Complex64| (phi - (-2.0 * PI * PI * t * t).exp()).norm() / t.abs();
    let pts: Vec<(f64, f64)> = char_values
        .iter()
        .filter(|(t, _)| t.abs() <= a + slack)
        .map(|&(t, phi)| (t, if t == 0.0 { f64::NAN } else { f(t, phi) }))
        .collect();
    // t = 0 is a removable point; use the mean of its neighbours
    let vals: Vec<f64> = (0..pts.len())
        .map(|i| {
            if !pts[i].1.is_nan() {
                return pts[i].1;
            }
            let nb: Vec<f64> = [i.checked_sub(1), Some(i + 1)]
                .into_iter()
                .flatten()
                .filter_map(|j| pts.get(j).map(|p| p.1))
                .filter(|v| !v.is_nan())
                .collect();
            if nb.is_empty() {
                0.0
            } else {
                nb.iter().sum::<f64>() / nb.len() as f64
            }
        })
        .collect();
    let mut integral = Compensated::new();
    for i in 1..pts.len() {
        integral.add(0.5 * (pts[i].0 - pts[i - 1].0) * (vals[i] + vals[i - 1]));
    }
    Ok(constants.integral_prefactor * integral.value() + constants.c1_factor * density_sup / a)
}

/// Uniform grid of `points` values on [−A, A], including 0 when `points` is odd.
pub fn symmetric_grid(a: f64, points: usize) -> Vec<f64> {
    let m = points.max(2) - 1;
    (0..=m).map(|i| -a + 2.0 * a * i as f64 / m as f64).collect()
}

/// Standardized model characteristic function sampled on `grid`.
pub fn standardized_char_values(model: &KubiliusModel, grid: &[f64]) -> Vec<(f64, Complex64)> {
    grid.iter().map(|&t| (t, char_standardized(model, t))).collect()
}

/// Largest number of primes accepted by subset enumeration.
pub const BRUTE_PRIME_LIMIT: usize = 20;

#[derive(Debug, Clone, Copy)]
pub enum BinomialMode<'a> {
    ModelExact,
    Brute,
    Sample(&'a [u32]),
}

#[derive(Debug, Clone, PartialEq)]
pub enum BinomialMoment {
    Exact(BigRational),
    Real(f64),
}

impl BinomialMoment {
    pub fn to_f64(&self) -> f64 {
        match self {
            BinomialMoment::Exact(q) => rat_to_f64(q),
            BinomialMoment::Real(x) => *x,
        }
    }
}

/// E C(ω‴, ℓ) = e_ℓ(1/p₁, …, 1/p_m), or the sample average of C(v, ℓ).
pub fn binomial_moments(model: &KubiliusModel, l: usize, mode: BinomialMode<'_>) -> Result<BinomialMoment> {
    match mode {
        BinomialMode::ModelExact => Ok(BinomialMoment::Exact(elementary_symmetric(&model.primes, l).swap_remove(l))),
        BinomialMode::Brute => binomial_brute(&model.primes, l).map(BinomialMoment::Exact),
        BinomialMode::Sample(values) => binomial_sample(values, l).map(BinomialMoment::Real),
    }
}

/// e_0, …, e_ℓ of the reciprocals by the one-pass recurrence.
pub fn elementary_symmetric(primes: &[u64], l: usize) -> Vec<BigRational> {
    let mut e = vec![BigRational::zero(); l + 1];
    e[0] = BigRational::one();
    for &p in primes {
        let r = BigRational::new(BigInt::one(), BigInt::from(p));
        for j in (1..=l).rev() {
            let add = &e[j - 1] * &r;
            e[j] += add;
        }
    }
    e
}

/// Σ over ℓ-subsets of 1/(p₁⋯p_ℓ) by explicit enumeration.
pub fn binomial_brute(primes: &[u64], l: usize) -> Result<BigRational> {
    if primes.len() > BRUTE_PRIME_LIMIT {
        return Err(Error::budget("brute subset enumeration", primes.len(), BRUTE_PRIME_LIMIT));
    }
    let mut acc = BigRational::zero();
    for mask in 0u32..(1u32 << primes.len()) {
        if mask.count_ones() as usize != l {
            continue;
        }
        let prod: BigInt = primes
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .map(|(_, &p)| BigInt::from(p))
            .product();
        acc += BigRational::new(BigInt::one(), prod);
    }
    Ok(acc)
}

pub fn binomial_sample(values: &[u32], l: usize) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::EmptyDomain("empty sample".into()));
    }
    let hist = histogram(values);
    let mut acc = Compensated::new();
    for (v, &c) in hist.iter().enumerate() {
        if c > 0 {
            acc.add(c as f64 * binom_f64(v as u64, l as u64));
        }
    }
    Ok(acc.value() / values.len() as f64)
}

fn binom_f64(n: u64, k: u64) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Σ_{ℓ ≤ L} (e(t) − 1)^ℓ e_ℓ, which converges to char_exact(t).
pub fn binomial_char_partial(model: &KubiliusModel, t: f64, l_max: usize) -> Complex64 {
    let es = elementary_symmetric(&model.primes, l_max);
    let z = e(t) - 1.0;
    let mut pow = Complex64::new(1.0, 0.0);
    let mut acc = Complex64::new(0.0, 0.0);
    for q in &es {
        acc += pow * rat_to_f64(q);
        pow *= z;
    }
    acc
}

/// Largest observed K with |φ_std(t) − g(t)| ≤ K·g(t)·t²(|t| + 1)/√s on the
/// grid points with |t| ≤ s^{1/6}, where g(t) = e^{−2π²t²}.
pub fn gaussian_proximity_ratio(model: &KubiliusModel, points: usize) -> f64 {
    let top = model.s.powf(1.0 / 6.0);
    let rs = model.s.sqrt();
    symmetric_grid(top, points)
        .into_iter()
        .filter(|t| *t != 0.0)
        .map(|t| {
            let g = (-2.0 * PI * PI * t * t).exp();
            let scale = g * t * t * (t.abs() + 1.0) / rs;
            (char_standardized(model, t) - g).norm() / scale
        })
        .fold(0.0, f64::max)
}

/// Grid points with |t| ≤ √s/2 at which |φ_std(t)| > e^{−4t²}.
pub fn tail_violations(model: &KubiliusModel, points: usize) -> Vec<f64> {
    let rs = model.s.sqrt();
    symmetric_grid(rs / 2.0, points)
        .into_iter()
        .filter(|&t| char_modulus(model, t / rs) > (-4.0 * t * t).exp())
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DivisibilityDensity {
    pub d: u64,
    pub count: u64,
    pub empirical: f64,
    pub deviation: f64,
}

/// Fraction of n ≤ N with d | ⌊αn + β⌋, and its distance to 1/d.
pub fn divisibility_density(d: u64, spec: &BeattySpec, n: u64) -> Result<DivisibilityDensity> {
    if d == 0 {
        return Err(Error::validation("d must be at least 1"));
    }
    let floors = beatty_floors(spec, 1, n)?;
    Ok(density_of_floors(d, &floors))
}

/// Same statistic over precomputed floors.
pub fn density_of_floors(d: u64, floors: &[i64]) -> DivisibilityDensity {
    let count = floors.iter().filter(|&&f| f.rem_euclid(d as i64) == 0).count() as u64;
    let empirical = count as f64 / floors.len() as f64;
    DivisibilityDensity {
        d,
        count,
        empirical,
        deviation: (empirical - 1.0 / d as f64).abs(),
    }
}

/// sup_x |Φ(x) − Φ((x − μ)/σ)|.
pub fn recentring_distance(mu: f64, sigma: f64) -> Result<f64> {
    if !(sigma > 0.0) || !mu.is_finite() || !sigma.is_finite() {
        return Err(Error::validation(format!("need finite mu and sigma > 0, got ({mu}, {sigma})")));
    }
    let h = |x: f64| (gaussian_cdf(x) - gaussian_cdf((x - mu) / sigma)).abs();
    // critical points: x²(1 − σ⁻²) + 2μx/σ² − μ²/σ² − 2 ln σ = 0
    let a = 1.0 - 1.0 / (sigma * sigma);
    let b = 2.0 * mu / (sigma * sigma);
    let c = -mu * mu / (sigma * sigma) - 2.0 * sigma.ln();
    let mut roots = Vec::new();
    if a.abs() < 1e-14 {
        if b != 0.0 {
            roots.push(-c / b);
        }
    } else {
        let disc = b * b - 4.0 * a * c;
        if disc >= 0.0 {
            let r = disc.sqrt();
            roots.push((-b + r) / (2.0 * a));
            roots.push((-b - r) / (2.0 * a));
        }
    }
    let mut best: f64 = 0.0;
    for r in roots {
        best = best.max(h(r)).max(golden_max(h, r - 1.0, r + 1.0, 1e-10));
    }
    Ok(best)
}

fn golden_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while hi - lo > tol {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = f(x1);
        }
    }
    f1.max(f2)
}
