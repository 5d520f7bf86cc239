//! Standardized samples, Kolmogorov distances, Gaussian references and
//! mixed moments.

use crate::arith::omega_of_values;
use crate::error::{Error, Result};
use crate::reals::{beatty_floors, BeattySpec, CertifiedReal};
use crate::util::{loglog, Compensated};
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;
use std::path::Path;

/// Standardized values (X − center)/scale for one or several coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct StandardizedSample {
    k: usize,
    /// Row-major: row r holds coordinates r·k .. r·k + k.
    values: Vec<f64>,
    pub n: u64,
    pub center: f64,
    pub scale: f64,
}

/// Center log log N and scale √(log log N).
pub fn standardization(n: u64) -> Result<(f64, f64)> {
    if n < 16 {
        return Err(Error::validation(format!("N = {n} must be at least 16")));
    }
    let ll = loglog(n as f64);
    Ok((ll, ll.sqrt()))
}

impl StandardizedSample {
    pub fn new(k: usize, values: Vec<f64>, n: u64, center: f64, scale: f64) -> Result<Self> {
        if k == 0 || values.len() % k != 0 {
            return Err(Error::validation("values do not split into k-vectors"));
        }
        if !(scale > 0.0) {
            return Err(Error::validation(format!("scale {scale} must be positive")));
        }
        Ok(Self {
            k,
            values,
            n,
            center,
            scale,
        })
    }

    /// Raw values already standardized by the caller.
    pub fn from_values(k: usize, values: Vec<f64>) -> Result<Self> {
        let n = (values.len() / k.max(1)) as u64;
        Self::new(k, values, n, 0.0, 1.0)
    }

    /// Standardize integer counts, one column per coordinate.
    pub fn from_counts(columns: &[Vec<u32>], n: u64, center: f64, scale: f64) -> Result<Self> {
        let k = columns.len();
        if k == 0 {
            return Err(Error::validation("no coordinates"));
        }
        let len = columns[0].len();
        if columns.iter().any(|c| c.len() != len) {
            return Err(Error::validation("coordinate columns differ in length"));
        }
        let mut values = Vec::with_capacity(len * k);
        for r in 0..len {
            for c in columns {
                values.push((c[r] as f64 - center) / scale);
            }
        }
        Self::new(k, values, n, center, scale)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.values.len() / self.k
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.values[r * self.k..(r + 1) * self.k]
    }

    pub fn coordinate(&self, j: usize) -> Vec<f64> {
        self.values.iter().skip(j).step_by(self.k).copied().collect()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// ω(⌊αᵢm + βᵢ⌋) for m = 1..=N, one column per spec.
pub fn omega_columns(specs: &[BeattySpec], n: u64, cache: Option<&Path>) -> Result<Vec<Vec<u32>>> {
    specs
        .iter()
        .map(|s| {
            let floors = positive_floors(s, n)?;
            Ok(omega_of_values(&floors, cache)?.into_iter().map(u32::from).collect())
        })
        .collect()
}

fn positive_floors(spec: &BeattySpec, n: u64) -> Result<Vec<u64>> {
    let floors = beatty_floors(spec, 1, n)?;
    if let Some(pos) = floors.iter().position(|&f| f < 1) {
        return Err(Error::validation(format!(
            "floor of {spec} at n = {} is {} < 1; shift beta",
            pos + 1,
            floors[pos]
        )));
    }
    Ok(floors.into_iter().map(|f| f as u64).collect())
}

/// #{p ∈ primes : p | ⌊αᵢm + βᵢ⌋} for m = 1..=N.
pub fn truncated_omega_columns(specs: &[BeattySpec], n: u64, primes: &[u64]) -> Result<Vec<Vec<u32>>> {
    use rayon::prelude::*;
    specs
        .iter()
        .map(|s| {
            let floors = positive_floors(s, n)?;
            Ok(floors
                .par_iter()
                .map(|&f| primes.iter().filter(|&&p| f % p == 0).count() as u32)
                .collect())
        })
        .collect()
}

/// Exhaustive standardized ω sample over n ≤ N.
pub fn omega_sample(specs: &[BeattySpec], n: u64, cache: Option<&Path>) -> Result<StandardizedSample> {
    let (c, s) = standardization(n)?;
    StandardizedSample::from_counts(&omega_columns(specs, n, cache)?, n, c, s)
}

pub fn gaussian_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// sup_x |F_emp(x) − Φ(x)| for a one-dimensional sample.
pub fn empirical_dk(sample: &StandardizedSample) -> Result<f64> {
    if sample.k != 1 {
        return Err(Error::validation("empirical_dK needs k = 1"));
    }
    dk_of_values(sample.values.clone())
}

/// Kolmogorov distance of raw values to Φ.
pub fn dk_of_values(mut xs: Vec<f64>) -> Result<f64> {
    if xs.is_empty() {
        return Err(Error::EmptyDomain("empty sample".into()));
    }
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let mut d: f64 = 0.0;
    let mut i = 0;
    // ties: the jump at a repeated value spans all its copies
    while i < xs.len() {
        let mut j = i;
        while j + 1 < xs.len() && xs[j + 1] == xs[i] {
            j += 1;
        }
        let phi = gaussian_cdf(xs[i]);
        d = d.max((i as f64 / n - phi).abs()).max(((j + 1) as f64 / n - phi).abs());
        i = j + 1;
    }
    Ok(d)
}

/// (x₍ᵢ₎, i/n, Φ(x₍ᵢ₎)) over the sorted sample, one row per point.
pub fn cdf_curve(sample: &StandardizedSample) -> Result<Vec<(f64, f64, f64)>> {
    if sample.k != 1 {
        return Err(Error::validation("cdf curve needs k = 1"));
    }
    let mut xs = sample.values.clone();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    Ok(xs
        .iter()
        .enumerate()
        .map(|(i, &x)| (x, (i + 1) as f64 / n, gaussian_cdf(x)))
        .collect())
}

/// Grid statistic for the lower-left-orthant distance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KolmogorovBounds {
    /// Maximum over lattice corners; a lower bound on the true sup.
    pub lower: f64,
    /// Monotone bracketing over lattice cells; an upper bound.
    pub upper: f64,
}

pub const GRID_RANGE: f64 = 4.0;

/// max over a grid^k lattice on [−4, 4]^k (plus ±∞) of
/// |F_emp(x) − Π Φ(xᵢ)| with F_emp over lower-left orthants.
pub fn multivariate_dk(sample: &StandardizedSample, grid: usize) -> Result<KolmogorovBounds> {
    if sample.is_empty() {
        return Err(Error::EmptyDomain("empty sample".into()));
    }
    if grid < 8 {
        return Err(Error::validation("grid must be at least 8"));
    }
    let k = sample.k;
    let side = grid + 2;
    let cells = (side as u128).pow(k as u32);
    if cells > 50_000_000 {
        return Err(Error::Capacity(format!("{cells} lattice cells")));
    }
    let cells = cells as usize;
    // axis[0] = −∞, axis[1..=grid] the lattice, axis[grid+1] = +∞
    let mut axis = vec![f64::NEG_INFINITY];
    axis.extend((0..grid).map(|i| -GRID_RANGE + 2.0 * GRID_RANGE * i as f64 / (grid - 1) as f64));
    axis.push(f64::INFINITY);
    let phi: Vec<f64> = axis.iter().map(|&x| gaussian_cdf(x)).collect();

    let mut counts = vec![0u64; cells];
    for r in 0..sample.len() {
        let mut idx = 0usize;
        for &v in sample.row(r) {
            // smallest axis index with axis[i] >= v
            let i = axis.partition_point(|&a| a < v).max(1);
            idx = idx * side + i;
        }
        counts[idx] += 1;
    }
    // k-dimensional prefix sums give orthant counts at every corner
    let mut stride = 1;
    for _ in 0..k {
        for c in 0..cells {
            if (c / stride) % side != 0 {
                counts[c] += counts[c - stride];
            }
        }
        stride *= side;
    }
    let total = sample.len() as f64;
    let coords = |c: usize| {
        let mut v = vec![0usize; k];
        let mut rest = c;
        for slot in v.iter_mut().rev() {
            *slot = rest % side;
            rest /= side;
        }
        v
    };
    let g = |ix: &[usize]| ix.iter().map(|&i| phi[i]).product::<f64>();
    let mut lower: f64 = 0.0;
    let mut upper: f64 = 0.0;
    let mut lower_corner = vec![0usize; k];
    for c in 0..cells {
        let ix = coords(c);
        let f = counts[c] as f64 / total;
        lower = lower.max((f - g(&ix)).abs());
        if ix.iter().all(|&i| i > 0) {
            for (lc, &i) in lower_corner.iter_mut().zip(&ix) {
                *lc = i - 1;
            }
            let lc_index = lower_corner.iter().fold(0, |acc, &i| acc * side + i);
            let f_lo = counts[lc_index] as f64 / total;
            let (g_lo, g_hi) = (g(&lower_corner), g(&ix));
            upper = upper.max(f - g_lo).max(g_hi - f_lo);
        }
    }
    Ok(KolmogorovBounds {
        lower,
        upper: upper.max(lower),
    })
}

/// Multi-index (ℓ₁, …, ℓ_k) with a cap on Σℓᵢ.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct MomentIndex(Vec<u32>);

pub const DEFAULT_MOMENT_CAP: u32 = 12;

impl MomentIndex {
    pub fn new(ells: Vec<u32>) -> Result<Self> {
        Self::with_cap(ells, DEFAULT_MOMENT_CAP)
    }

    pub fn with_cap(ells: Vec<u32>, cap: u32) -> Result<Self> {
        let total: u32 = ells.iter().sum();
        if total > cap {
            return Err(Error::validation(format!("moment order {total} exceeds cap {cap}")));
        }
        Ok(Self(ells))
    }

    pub fn ells(&self) -> &[u32] {
        &self.0
    }

    pub fn order(&self) -> u32 {
        self.0.iter().sum()
    }

    /// Every index of length `k` with order ≤ `cap`, lexicographic.
    pub fn all(k: usize, cap: u32) -> Vec<MomentIndex> {
        let mut out = Vec::new();
        let mut cur = vec![0u32; k];
        fn rec(pos: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<MomentIndex>) {
            if pos == cur.len() {
                out.push(MomentIndex(cur.clone()));
                return;
            }
            for v in 0..=left {
                cur[pos] = v;
                rec(pos + 1, left - v, cur, out);
            }
            cur[pos] = 0;
        }
        rec(0, cap, &mut cur, &mut out);
        out
    }
}

impl std::fmt::Display for MomentIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.0.iter().map(u32::to_string).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// Π ℓᵢ!/(2^{ℓᵢ/2}(ℓᵢ/2)!), or 0 if some ℓᵢ is odd.
pub fn gaussian_mixed_moment(idx: &MomentIndex) -> BigRational {
    let mut acc = BigInt::one();
    for &l in idx.ells() {
        if l % 2 == 1 {
            return BigRational::zero();
        }
        // (ℓ − 1)!! = ℓ!/(2^{ℓ/2}(ℓ/2)!)
        let mut m = l as i64 - 1;
        while m > 1 {
            acc *= m;
            m -= 2;
        }
    }
    BigRational::from_integer(acc)
}

/// Largest magnitude accepted in a moment computation.
pub const MOMENT_MAGNITUDE_CAP: f64 = 1e3;

/// Average of Π vᵢ^{ℓᵢ} over the sample.
pub fn mixed_moment_empirical(sample: &StandardizedSample, idx: &MomentIndex) -> Result<f64> {
    if idx.ells().len() != sample.k {
        return Err(Error::validation(format!(
            "index has {} entries for a {}-dimensional sample",
            idx.ells().len(),
            sample.k
        )));
    }
    if sample.is_empty() {
        return Err(Error::EmptyDomain("empty sample".into()));
    }
    if let Some(v) = sample.values.iter().find(|v| !(v.abs() <= MOMENT_MAGNITUDE_CAP)) {
        return Err(Error::validation(format!("sample value {v} exceeds magnitude cap")));
    }
    let mut acc = Compensated::new();
    for r in 0..sample.len() {
        let mut prod = 1.0;
        for (&v, &l) in sample.row(r).iter().zip(idx.ells()) {
            prod *= v.powi(l as i32);
        }
        acc.add(prod);
    }
    Ok(acc.value() / sample.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoprimalityRate {
    pub rate: f64,
    pub coprime: u64,
    pub counted: u64,
    /// n with ⌊αn⌋ = 0, left out of the rate.
    pub excluded_zero: u64,
}

/// Fraction of n ≤ N with gcd(n, ⌊αn⌋) = 1.
pub fn coprimality_rate(alpha: &CertifiedReal, n: u64) -> Result<CoprimalityRate> {
    if n == 0 {
        return Err(Error::EmptyDomain("N = 0".into()));
    }
    let spec = BeattySpec::new(alpha.clone(), CertifiedReal::integer(0))?;
    let floors = beatty_floors(&spec, 1, n)?;
    let (mut coprime, mut zero) = (0u64, 0u64);
    for (i, &f) in floors.iter().enumerate() {
        if f == 0 {
            zero += 1;
        } else if (i as i64 + 1).gcd(&f) == 1 {
            coprime += 1;
        }
    }
    let counted = n - zero;
    Ok(CoprimalityRate {
        rate: if counted == 0 { 0.0 } else { coprime as f64 / counted as f64 },
        coprime,
        counted,
        excluded_zero: zero,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reals::parse;

    fn one_d(v: Vec<f64>) -> StandardizedSample {
        StandardizedSample::from_values(1, v).unwrap()
    }

    #[test]
    fn cdf_values() {
        assert_eq!(gaussian_cdf(0.0), 0.5);
        assert!((gaussian_cdf(40.0) - 1.0).abs() <= 1e-12);
        assert!((gaussian_cdf(1.96) - 0.9750021048517795).abs() < 1e-13);
        for x in [-3.0, -0.7, 0.2, 1.5, 6.0] {
            assert!((gaussian_cdf(x) + gaussian_cdf(-x) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn dk_examples() {
        assert_eq!(empirical_dk(&one_d(vec![0.0; 10])).unwrap(), 0.5);
        assert!(empirical_dk(&one_d(vec![10.0])).unwrap() >= 0.999);
        assert!(matches!(empirical_dk(&one_d(vec![])), Err(Error::EmptyDomain(_))));
    }

    #[test]
    fn moments_examples() {
        let m = |v: &[u32]| gaussian_mixed_moment(&MomentIndex::new(v.to_vec()).unwrap());
        assert_eq!(m(&[2]), BigRational::one());
        assert_eq!(m(&[4]), BigRational::from_integer(3.into()));
        assert_eq!(m(&[1, 1]), BigRational::zero());
        assert_eq!(m(&[2, 2]), BigRational::one());
        assert!(MomentIndex::new(vec![7, 6]).is_err());
        assert_eq!(MomentIndex::all(2, 2).len(), 6);
    }

    #[test]
    fn empirical_moment_identities() {
        let s = StandardizedSample::from_values(2, vec![1.0, 1.0, -2.0, -2.0, 0.5, 0.5]).unwrap();
        let a = mixed_moment_empirical(&s, &MomentIndex::new(vec![1, 1]).unwrap()).unwrap();
        let b = mixed_moment_empirical(&s, &MomentIndex::new(vec![2, 0]).unwrap()).unwrap();
        assert_eq!(a, b);
        assert_eq!(mixed_moment_empirical(&s, &MomentIndex::new(vec![0, 0]).unwrap()).unwrap(), 1.0);
        let z = one_d(vec![0.0; 5]);
        assert_eq!(mixed_moment_empirical(&z, &MomentIndex::new(vec![4]).unwrap()).unwrap(), 0.0);
        let big = one_d(vec![2000.0]);
        assert!(mixed_moment_empirical(&big, &MomentIndex::new(vec![1]).unwrap()).is_err());
    }

    #[test]
    fn coprimality_trivial() {
        let r = coprimality_rate(&parse("1").unwrap(), 1000).unwrap();
        assert_eq!(r.coprime, 1);
        let r = coprimality_rate(&parse("2").unwrap(), 1000).unwrap();
        assert_eq!(r.coprime, 1);
        let r = coprimality_rate(&parse("1/3").unwrap(), 30).unwrap();
        assert_eq!(r.excluded_zero, 2);
    }

    #[test]
    fn comonotone_pair_is_far_from_product() {
        let mut v = Vec::new();
        for i in 0..2000 {
            let x = -3.0 + 6.0 * i as f64 / 1999.0;
            v.extend([x, x]);
        }
        let s = StandardizedSample::from_values(2, v).unwrap();
        let b = multivariate_dk(&s, 64).unwrap();
        assert!(b.lower >= 0.1);
        assert!(b.upper >= b.lower);
    }
}
