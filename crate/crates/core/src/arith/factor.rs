//! Single-value factor counting for integers beyond a sieve table.

use super::{isqrt_u64, primes_up_to};
use num_integer::Integer;
use std::sync::OnceLock;

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut a: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    a %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod(r, a, m);
        }
        a = mul_mod(a, a, m);
        e >>= 1;
    }
    r
}

/// Deterministic Miller–Rabin for all 64-bit inputs.
pub fn is_prime_u64(n: u64) -> bool {
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for &p in &BASES {
        if n % p == 0 {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'outer: for &a in &BASES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'outer;
            }
        }
        return false;
    }
    true
}

/// Primes up to 2^22, enough to strip every factor below the cube root of a
/// 64-bit integer.
fn small_primes() -> &'static [u64] {
    static CELL: OnceLock<Vec<u64>> = OnceLock::new();
    CELL.get_or_init(|| primes_up_to(1 << 22))
}

/// (ω(n), Ω(n)) for a single `n >= 1`.
///
/// Trial division runs while p³ <= cofactor; what remains has at most two
/// prime factors and is classified with Miller–Rabin and a square test.
pub fn omega_u64(n: u64) -> (u8, u8) {
    assert!(n >= 1, "omega of zero");
    let mut c = n;
    let (mut w, mut big) = (0u8, 0u8);
    for &p in small_primes() {
        if p.saturating_mul(p).saturating_mul(p) > c {
            break;
        }
        if c % p == 0 {
            w += 1;
            while c % p == 0 {
                c /= p;
                big += 1;
            }
        }
    }
    if c == 1 {
        return (w, big);
    }
    if is_prime_u64(c) {
        return (w + 1, big + 1);
    }
    let r = isqrt_u64(c);
    if r * r == c {
        (w + 1, big + 2)
    } else {
        (w + 2, big + 2)
    }
}

/// A nontrivial factor of the odd composite `n` by Brent's variant of
/// Pollard rho.
fn pollard_brent(n: u64) -> u64 {
    let mut c = 1u64;
    loop {
        let f = |x: u64| (mul_mod(x, x, n) + c) % n;
        let (mut y, mut r, mut q, mut g) = (2u64, 1u64, 1u64, 1u64);
        let (mut x, mut ys) = (y, y);
        while g == 1 {
            x = y;
            for _ in 0..r {
                y = f(y);
            }
            let mut k = 0;
            while k < r && g == 1 {
                ys = y;
                for _ in 0..128.min(r - k) {
                    y = f(y);
                    q = mul_mod(q, x.abs_diff(y), n);
                }
                g = q.gcd(&n);
                k += 128;
            }
            r *= 2;
        }
        if g == n {
            // the batch overshot; step back one term at a time
            loop {
                ys = f(ys);
                g = x.abs_diff(ys).gcd(&n);
                if g > 1 {
                    break;
                }
            }
        }
        if g != n {
            return g;
        }
        c += 1;
    }
}

fn split_into(n: u64, out: &mut Vec<u64>) {
    if n == 1 {
        return;
    }
    if is_prime_u64(n) {
        out.push(n);
        return;
    }
    let r = isqrt_u64(n);
    if r * r == n {
        split_into(r, out);
        split_into(r, out);
        return;
    }
    let d = pollard_brent(n);
    split_into(d, out);
    split_into(n / d, out);
}

/// Distinct prime factors of `n`, ascending: trial division by small primes,
/// then Pollard rho on the cofactor.
pub fn prime_factors_u64(n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut c = n;
    if c < 2 {
        return out;
    }
    for &p in small_primes().iter().take(1000) {
        if p * p > c {
            break;
        }
        if c % p == 0 {
            out.push(p);
            while c % p == 0 {
                c /= p;
            }
        }
    }
    let mut rest = Vec::new();
    split_into(c, &mut rest);
    out.extend(rest);
    out.sort_unstable();
    out.dedup();
    out
}

/// Reference (ω, Ω) by plain trial division; the slow oracle for tests.
pub fn trial_omega(n: u64) -> (u8, u8) {
    let mut c = n;
    let (mut w, mut big) = (0u8, 0u8);
    let mut d = 2u64;
    while d * d <= c {
        if c % d == 0 {
            w += 1;
            while c % d == 0 {
                c /= d;
                big += 1;
            }
        }
        d += 1;
    }
    if c > 1 {
        w += 1;
        big += 1;
    }
    (w, big)
}
