mod common;

use common::{floor_sqrt_beatty, gaussian_cdf_oracle, naive_primes};
use eklab::arith::sieve_primes;
use eklab::harmonic::e;
use eklab::kubilius::{
    binomial_brute, binomial_char_partial, binomial_moments, binomial_sample, char_compare, char_exact,
    char_modulus, divisibility_density, elementary_symmetric, esseen_bound, recentring_distance, sample_model,
    standardized_char_values, symmetric_grid, tail_violations, BinomialMode, BinomialMoment, KubiliusModel,
    GAUSSIAN_DENSITY_SUP,
};
use eklab::reals::BeattySpec;
use eklab::stats::{dk_of_values, gaussian_cdf};
use eklab::Error;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use proptest::prelude::*;

fn model(limit: u64, seed: u64) -> KubiliusModel {
    KubiliusModel::new(sieve_primes(limit).unwrap(), seed).unwrap()
}

/// Exact law of Σ Bernoulli(1/p) by convolution.
fn law(primes: &[u64]) -> Vec<f64> {
    let mut dist = vec![1.0];
    for &p in primes {
        let q = 1.0 / p as f64;
        let mut next = vec![0.0; dist.len() + 1];
        for (k, &m) in dist.iter().enumerate() {
            next[k] += m * (1.0 - q);
            next[k + 1] += m * q;
        }
        dist = next;
    }
    dist
}

/// sup |F − Φ| for the standardized exact law, both sides of every atom.
fn exact_dk(primes: &[u64], s: f64) -> f64 {
    let mut cum = 0.0;
    let mut d: f64 = 0.0;
    for (k, &m) in law(primes).iter().enumerate() {
        let phi = gaussian_cdf_oracle((k as f64 - s) / s.sqrt());
        d = d.max((cum - phi).abs());
        cum += m;
        d = d.max((cum - phi).abs());
    }
    d
}

fn subsets_oracle(primes: &[u64], l: usize) -> BigRational {
    let mut acc = BigRational::zero();
    for mask in 0u32..(1 << primes.len()) {
        if mask.count_ones() as usize == l {
            let mut term = BigRational::from_integer(1.into());
            for (i, &p) in primes.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    term /= BigRational::from_integer(p.into());
                }
            }
            acc += term;
        }
    }
    acc
}

#[test]
fn model_construction() {
    let m = model(1000, 0);
    assert!((m.s - 2.198_080_127_175_088).abs() < 1e-12);
    assert_eq!(m.primes(), &naive_primes(1000)[..]);
    assert!(matches!(KubiliusModel::new(vec![], 0), Err(Error::EmptyDomain(_))));
    assert!(KubiliusModel::new(vec![3, 2], 0).is_err());
    assert!(KubiliusModel::new(vec![1, 2], 0).is_err());
}

#[test]
fn sampling_is_keyed_and_prefix_stable() {
    let m = model(1000, 42);
    let a = sample_model(&m, 5000).unwrap();
    assert_eq!(a, sample_model(&m, 5000).unwrap());
    assert_eq!(&a[..1000], &sample_model(&m, 1000).unwrap()[..]);
    assert_ne!(a, sample_model(&model(1000, 43), 5000).unwrap());
    assert!(sample_model(&m, 0).is_err());
}

#[test]
fn sample_mean_and_law() {
    let m = model(1000, 7);
    let n = 100_000;
    let v = sample_model(&m, n).unwrap();
    let mean = v.iter().map(|&x| x as f64).sum::<f64>() / n as f64;
    assert!((mean - m.s).abs() < 0.05, "{mean} vs {}", m.s);
    let p = law(m.primes());
    for k in 0..6 {
        let freq = v.iter().filter(|&&x| x as usize == k).count() as f64 / n as f64;
        let sd = (p[k] * (1.0 - p[k]) / n as f64).sqrt();
        assert!((freq - p[k]).abs() < 5.0 * sd + 1e-9, "P({k}) = {}, observed {freq}", p[k]);
    }
}

#[test]
fn characteristic_function_matches_law() {
    let m = model(200, 0);
    let p = law(m.primes());
    for t in [0.0, 0.05, 0.25, 0.5, 0.9, -0.33] {
        let want: Complex64 = p.iter().enumerate().map(|(k, &q)| e(t * k as f64) * q).sum();
        assert!((char_exact(&m, t) - want).norm() < 1e-12, "t = {t}");
        assert!((char_modulus(&m, t) - want.norm()).abs() < 1e-12);
    }
}

#[test]
fn compare_at_zero_is_exact() {
    let m = model(1000, 1);
    let v = sample_model(&m, 10_000).unwrap();
    let rows = char_compare(&m, &v, &[0.0, 0.1, 0.5]).unwrap();
    assert_eq!(rows[0].diff, 0.0);
    assert_eq!((rows[0].exact_re, rows[0].empirical_re), (1.0, 1.0));
    assert!(rows.iter().all(|r| r.diff < 0.03));
    assert!(char_compare(&m, &v, &[]).is_err());
}

#[test]
fn binomial_moments_exact_equals_brute() {
    let primes = sieve_primes(61).unwrap();
    assert_eq!(primes.len(), 18);
    let m = KubiliusModel::new(primes.clone(), 0).unwrap();
    for l in 0..=6 {
        let exact = binomial_moments(&m, l, BinomialMode::ModelExact).unwrap();
        let brute = binomial_moments(&m, l, BinomialMode::Brute).unwrap();
        let want = subsets_oracle(&primes, l);
        assert_eq!(exact, BinomialMoment::Exact(want.clone()), "l = {l}");
        assert_eq!(brute, BinomialMoment::Exact(want.clone()));
        assert_eq!(binomial_brute(&primes, l).unwrap(), want);
    }
    let es = elementary_symmetric(&primes, 3);
    assert_eq!(es.len(), 4);
    assert_eq!(es[1], subsets_oracle(&primes, 1));
    let too_many = KubiliusModel::new(sieve_primes(100).unwrap(), 0).unwrap();
    assert!(binomial_moments(&too_many, 2, BinomialMode::Brute).is_err());
}

#[test]
fn binomial_sample_average() {
    let v = vec![0u32, 1, 2, 3, 4, 5, 5];
    for l in 0..=4 {
        let want = v
            .iter()
            .map(|&x| {
                let (x, mut c) = (x as u64, 1u64);
                for i in 0..l as u64 {
                    c = if x < l as u64 { 0 } else { c * (x - i) / (i + 1) };
                }
                c as f64
            })
            .sum::<f64>()
            / v.len() as f64;
        assert!((binomial_sample(&v, l).unwrap() - want).abs() < 1e-12, "l = {l}");
    }
    let m = model(1000, 3);
    let s = sample_model(&m, 100_000).unwrap();
    let emp = binomial_moments(&m, 2, BinomialMode::Sample(&s)).unwrap().to_f64();
    let exact = binomial_moments(&m, 2, BinomialMode::ModelExact).unwrap().to_f64();
    assert!((emp - exact).abs() < 0.05, "{emp} vs {exact}");
}

#[test]
fn binomial_expansion_converges_to_char() {
    let m = model(100, 0);
    for i in -10..=10 {
        let t = i as f64 / 100.0;
        let d = (binomial_char_partial(&m, t, 30) - char_exact(&m, t)).norm();
        assert!(d < 1e-12, "t = {t}: {d}");
    }
}

#[test]
fn tail_inequality_holds() {
    for limit in [100u64, 1000, 10_000] {
        let m = model(limit, 0);
        assert!(tail_violations(&m, 2001).is_empty(), "primes <= {limit}");
    }
}

#[test]
fn esseen_bound_dominates_exact_distance() {
    for seed in 0..5u64 {
        let m = model(10_000, seed);
        let a = m.s.sqrt() / 3.0;
        let grid = symmetric_grid(a, 1025);
        let bound = esseen_bound(&standardized_char_values(&m, &grid), a, GAUSSIAN_DENSITY_SUP).unwrap();
        let d = exact_dk(m.primes(), m.s);
        assert!(d <= bound, "seed {seed}: {d} > {bound}");
        let sample = sample_model(&m, 20_000).unwrap();
        let rs = m.s.sqrt();
        let emp = dk_of_values(sample.iter().map(|&v| (v as f64 - m.s) / rs).collect()).unwrap();
        assert!((emp - d).abs() < 0.02, "seed {seed}: {emp} vs {d}");
    }
}

#[test]
fn esseen_grid_checks() {
    let m = model(1000, 0);
    let coarse = standardized_char_values(&m, &symmetric_grid(1.0, 100));
    assert!(matches!(esseen_bound(&coarse, 1.0, 0.4), Err(Error::Resolution(_))));
    let short = standardized_char_values(&m, &symmetric_grid(0.5, 1025));
    assert!(matches!(esseen_bound(&short, 1.0, 0.4), Err(Error::Resolution(_))));
    assert!(esseen_bound(&short, 0.0, 0.4).is_err());
    // X ≡ 0: only the integral over |1 − g|/|t| and the density term remain
    let zero: Vec<(f64, Complex64)> = symmetric_grid(1.0, 1025).into_iter().map(|t| (t, Complex64::new(1.0, 0.0))).collect();
    let b = esseen_bound(&zero, 1.0, 0.0).unwrap();
    let h = 1e-5;
    let integral: f64 = (1..=100_000)
        .map(|i| {
            let t = (i as f64 - 0.5) * h;
            2.0 * (1.0 - (-2.0 * std::f64::consts::PI.powi(2) * t * t).exp()) / t * h
        })
        .sum();
    assert!((b - integral / std::f64::consts::PI).abs() < 1e-4, "{b}");
    assert!((b - 1.1331).abs() < 1e-4);
}

#[test]
fn divisibility_by_seven() {
    let spec = BeattySpec::parse("sqrt:2", "0").unwrap();
    let r = divisibility_density(7, &spec, 1_000_000).unwrap();
    assert!(r.deviation <= 0.01);
    let direct = (1..=1_000_000u64).filter(|&n| floor_sqrt_beatty(2, n, 0, 1) % 7 == 0).count() as u64;
    assert_eq!(r.count, direct);
    assert!(divisibility_density(0, &spec, 10).is_err());
}

fn recentring_oracle(mu: f64, sigma: f64) -> f64 {
    (0..=200_000)
        .map(|i| {
            let x = -10.0 + i as f64 * 1e-4;
            (gaussian_cdf(x) - gaussian_cdf((x - mu) / sigma)).abs()
        })
        .fold(0.0, f64::max)
}

#[test]
fn recentring_values() {
    assert!((recentring_distance(0.0, 2.0).unwrap() - 0.161_337).abs() < 1e-6);
    assert!((recentring_distance(0.1, 1.0).unwrap() - 0.039_877_6).abs() < 1e-6);
    assert_eq!(recentring_distance(0.0, 1.0).unwrap(), 0.0);
    for (mu, sigma) in [(0.3, 0.7), (-1.0, 1.5), (0.05, 1.1)] {
        let got = recentring_distance(mu, sigma).unwrap();
        assert!((got - recentring_oracle(mu, sigma)).abs() < 1e-6, "({mu}, {sigma})");
    }
    assert!(recentring_distance(0.0, 0.0).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn modulus_is_at_most_one(t in -5.0f64..5.0, limit in 2u64..3000) {
        let m = model(limit, 0);
        let v = char_modulus(&m, t);
        prop_assert!((0.0..=1.0 + 1e-15).contains(&v));
        prop_assert!((v - char_exact(&m, t).norm()).abs() < 1e-12);
    }

    #[test]
    fn elementary_symmetric_matches_subsets(k in 1usize..10, l in 0usize..5) {
        let primes: Vec<u64> = naive_primes(40).into_iter().take(k).collect();
        let es = elementary_symmetric(&primes, l);
        prop_assert_eq!(&es[l], &subsets_oracle(&primes, l));
        prop_assert!(es[l].to_f64().unwrap() >= 0.0);
    }
}
