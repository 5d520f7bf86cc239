//! Independent reference implementations shared by the integration tests.
#![allow(dead_code)]

/// (ω, Ω) by plain trial division.
pub fn trial(n: u64) -> (u8, u8) {
    let (mut n, mut w, mut big) = (n, 0u8, 0u8);
    let mut p = 2u64;
    while p * p <= n {
        if n % p == 0 {
            w += 1;
            while n % p == 0 {
                n /= p;
                big += 1;
            }
        }
        p += 1;
    }
    if n > 1 {
        w += 1;
        big += 1;
    }
    (w, big)
}

pub fn naive_primes(limit: u64) -> Vec<u64> {
    (2..=limit).filter(|&n| (2..n).take_while(|d| d * d <= n).all(|d| n % d != 0)).collect()
}

pub fn isqrt_u128(n: u128) -> u128 {
    if n == 0 {
        return 0;
    }
    let mut x = (n as f64).sqrt() as u128;
    while x * x > n {
        x -= 1;
    }
    while (x + 1) * (x + 1) <= n {
        x += 1;
    }
    x
}

/// ⌊n√d + a/b⌋ for b > 0, via ⌊(⌊bn√d⌋ + a)/b⌋.
pub fn floor_sqrt_beatty(d: u64, n: u64, a: i64, b: i64) -> i128 {
    let bn = b as u128 * n as u128;
    let s = isqrt_u128(d as u128 * bn * bn) as i128;
    (s + a as i128).div_euclid(b as i128)
}

pub const PI50: &str = "3.14159265358979323846264338327950288419716939937510";

pub fn gaussian_cdf_oracle(x: f64) -> f64 {
    // Simpson on [−12, x]
    let lo = -12.0f64;
    if x <= lo {
        return 0.0;
    }
    let m = 20_000;
    let h = (x - lo) / m as f64;
    let f = |t: f64| (-t * t / 2.0).exp() / (2.0 * std::f64::consts::PI).sqrt();
    let mut s = f(lo) + f(x);
    for i in 1..m {
        s += f(lo + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}
