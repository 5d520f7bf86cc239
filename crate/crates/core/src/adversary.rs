//! Liouville-type α = Σ 1/a_i and the collapse ⌊α g(b_m n)⌋ = α_m g(b_m n)
//! for g(n) = (n − 1)n^{d−1}, which pushes mass far into the upper tail.

use crate::arith::{omega_of_values, omega_range, omega_u64};
use crate::error::{Error, Result};
use crate::stats::{dk_of_values, gaussian_cdf};
use crate::util::{floor_rat, loglog};
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use rayon::prelude::*;
use serde::{Deserialize, Serialize, Serializer};

/// The decay rate η_N the construction must beat.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Eta {
    InvLog,
    InvLogLog,
}

impl Eta {
    pub fn eval(self, n: f64) -> f64 {
        match self {
            Eta::InvLog => 1.0 / n.ln(),
            Eta::InvLogLog => 1.0 / loglog(n),
        }
    }
}

/// Desk-scale constants for the four growth conditions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Relaxation {
    pub a1_min: u64,
    /// log N_{m+1} ≥ growth · b_m.
    pub growth: f64,
    pub eta: Eta,
    /// Conditions on ω: P(ω ≤ λ log log N_{m+1}) ≤ θ.
    pub lambda: f64,
    pub theta: f64,
    /// Largest N_{m+1} the search may reach.
    pub max_n: u64,
}

impl Default for Relaxation {
    fn default() -> Self {
        Self {
            a1_min: 3,
            growth: 4.0,
            eta: Eta::InvLog,
            lambda: 0.5,
            theta: 0.5,
            max_n: 100_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Level {
    #[serde(serialize_with = "as_string")]
    pub a: BigInt,
    #[serde(serialize_with = "as_string")]
    pub b: BigInt,
    #[serde(rename = "N")]
    pub n: u64,
    #[serde(serialize_with = "as_string")]
    pub alpha: BigRational,
    /// Observed P(ω(n) ≤ λ LL) and P(ω(b_{m−1}n − 1) ≤ λ LL) on [1, N/b_{m−1}].
    pub condition_fractions: Option<(f64, f64)>,
}

fn as_string<T: std::fmt::Display, S: Serializer>(v: &T, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdversarySchedule {
    pub d: u32,
    pub levels: Vec<Level>,
    pub relaxation: Relaxation,
}

/// ⌊a^{1/d}/2⌋.
fn n_of(a: &BigInt, d: u32) -> BigInt {
    a.nth_root(d) / 2
}

/// Build `levels` levels greedily, each a_{m+1} the least admissible value.
pub fn construct_sequence(d: u32, levels: usize, relax: Relaxation) -> Result<AdversarySchedule> {
    if d < 2 {
        return Err(Error::validation(format!("degree d = {d} must be at least 2")));
    }
    if levels == 0 {
        return Err(Error::validation("need at least one level"));
    }
    if relax.a1_min < 2 || !(relax.growth > 0.0) || !(relax.lambda > 0.0) || !(0.0..=1.0).contains(&relax.theta) {
        return Err(Error::validation("relaxation constants out of range"));
    }
    let a1 = BigInt::from(relax.a1_min);
    let n1 = n_of(&a1, d).to_u64().unwrap_or(u64::MAX);
    let mut out = vec![Level {
        alpha: BigRational::new(BigInt::one(), a1.clone()),
        b: a1.clone(),
        a: a1,
        n: n1,
        condition_fractions: None,
    }];
    while out.len() < levels {
        let m = out.len();
        let prev = &out[m - 1];
        let b = prev.b.clone();
        let bf = b.to_f64().unwrap_or(f64::INFINITY);
        let log_needed = relax.growth * bf;
        // η condition: 1/η(N) ≥ m·b_m
        let mut n_min = if log_needed > (relax.max_n as f64).ln() {
            return Err(Error::budget(
                format!("growth condition log N_{} >= {} * b_{m} with b_{m} = {b}", m + 1, relax.growth),
                format!("e^{log_needed:.3e}"),
                relax.max_n,
            ));
        } else {
            log_needed.exp().ceil() as u64
        };
        while relax.eta.eval(n_min as f64).recip() < m as f64 * bf {
            n_min = n_min.checked_mul(2).filter(|&x| x <= relax.max_n).ok_or_else(|| {
                Error::budget(format!("eta condition at level {}", m + 1), n_min, relax.max_n)
            })?;
        }
        let b_u = b.to_u64().ok_or_else(|| Error::Capacity(format!("b_{m} = {b} exceeds u64")))?;
        let mut candidate = n_min;
        loop {
            if candidate > relax.max_n {
                return Err(Error::budget(
                    format!("omega conditions at level {}", m + 1),
                    candidate,
                    relax.max_n,
                ));
            }
            let floor_a = BigInt::from(2 * candidate).pow(d);
            let a = floor_a.max(&prev.a * 2).max(&prev.a + 1);
            let n = n_of(&a, d).to_u64().ok_or_else(|| Error::Capacity("N exceeds u64".into()))?;
            if n > relax.max_n {
                return Err(Error::budget(format!("N_{} search", m + 1), n, relax.max_n));
            }
            if let Some(fracs) = omega_conditions(n, b_u, relax)? {
                let alpha = &prev.alpha + BigRational::new(BigInt::one(), a.clone());
                out.push(Level {
                    b: &b * &a,
                    a,
                    n,
                    alpha,
                    condition_fractions: Some(fracs),
                });
                break;
            }
            candidate = n + 1.max(n / 16);
        }
    }
    Ok(AdversarySchedule {
        d,
        levels: out,
        relaxation: relax,
    })
}

/// Fractions for the two ω conditions, or None if either fails.
fn omega_conditions(n: u64, b: u64, relax: Relaxation) -> Result<Option<(f64, f64)>> {
    let top = n / b;
    if top == 0 {
        return Ok(None);
    }
    let cut = relax.lambda * loglog(n as f64);
    let table = omega_range(1, top + 1)?;
    let low_n = table.omega_slice().iter().filter(|&&w| (w as f64) <= cut).count();
    let shifted: Vec<u64> = (1..=top).map(|k| b * k - 1).collect();
    let shifted_omega = omega_of_values(&shifted, None)?;
    let low_s = shifted_omega.iter().filter(|&&w| (w as f64) <= cut).count();
    let (f1, f2) = (low_n as f64 / top as f64, low_s as f64 / top as f64);
    Ok((f1 <= relax.theta && f2 <= relax.theta).then_some((f1, f2)))
}

/// α = Σ 1/a_i lies in [α_m, α_m + tail_upper(m)].
pub fn tail_upper(schedule: &AdversarySchedule, m: usize) -> Result<BigRational> {
    let levels = &schedule.levels;
    if m == 0 || m > levels.len() {
        return Err(Error::Range(format!("level {m} outside 1..={}", levels.len())));
    }
    if m < levels.len() {
        // a_{i+1} ≥ 2a_i makes the tail at most twice its first term
        return Ok(BigRational::new(BigInt::from(2), levels[m].a.clone()));
    }
    Ok(BigRational::new(BigInt::from(2), next_a_lower_bound(schedule)))
}

/// Lower bound on a_{L+1} for the level after the last one, implied by the
/// growth condition: a ≥ (2N)^d with N ≥ e^{growth·b_L} ≥ 1 + x + x²/2 + x³/6.
pub fn next_a_lower_bound(schedule: &AdversarySchedule) -> BigInt {
    let last = schedule.levels.last().expect("schedules are nonempty");
    // growth rounded down to a rational keeps the bound valid
    let g = BigRational::new(BigInt::from((schedule.relaxation.growth * 1024.0).floor() as i64), BigInt::from(1024));
    let x = g * BigRational::from_integer(last.b.clone());
    let six = BigRational::from_integer(6.into());
    let two = BigRational::from_integer(2.into());
    let poly = BigRational::one() + &x + &x * &x / &two + &x * &x * &x / six;
    let n_min = floor_rat(&poly);
    let by_growth = (n_min * BigInt::from(2)).pow(schedule.d);
    by_growth.max(&last.a * 2)
}

/// g(n) = (n − 1) n^{d−1}.
pub fn g_poly(n: &BigInt, d: u32) -> BigInt {
    (n - 1) * n.pow(d - 1)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CollapseReport {
    pub m: usize,
    pub checked: u64,
    pub floor_identity: bool,
    pub divisibility: bool,
    pub superadditive: bool,
    pub coprime: bool,
    /// n ≤ N_{m+1}/b_m with ω(⌊f(b_m n)⌋) ≥ 1.8 log log N_{m+1}.
    pub above_threshold: u64,
}

/// Verify for every n ≤ N_{m+1}/b_m that ⌊α g(b_m n)⌋ = α_m g(b_m n), that
/// n(b_m n − 1) divides it, that gcd(n, b_m n − 1) = 1 and that ω is
/// superadditive on the two factors. Fails on the smallest violating n.
pub fn collapse_check(schedule: &AdversarySchedule, m: usize) -> Result<CollapseReport> {
    let levels = &schedule.levels;
    if m == 0 || m >= levels.len() {
        return Err(Error::Range(format!("collapse level {m} needs 1 <= m < {}", levels.len())));
    }
    let d = schedule.d;
    let lvl = &levels[m - 1];
    let next_n = levels[m].n;
    let b = lvl.b.to_u64().ok_or_else(|| Error::Capacity(format!("b_{m} exceeds u64")))?;
    let top = next_n / b;
    let tail = tail_upper(schedule, m)?;
    let cut = 1.8 * loglog(next_n as f64);
    let alpha_b = (&lvl.alpha * BigRational::from_integer(lvl.b.clone())).to_integer();
    debug_assert_eq!(
        BigRational::from_integer(alpha_b.clone()),
        &lvl.alpha * BigRational::from_integer(lvl.b.clone())
    );

    let outcome: Vec<std::result::Result<bool, (u64, String)>> = (1..=top)
        .into_par_iter()
        .map(|n| {
            let bn = BigInt::from(b) * n;
            let g = g_poly(&bn, d);
            if (&tail * BigRational::from_integer(g.clone())) >= BigRational::one() {
                return Err((n, "tail times g reaches 1; floor identity not certified".into()));
            }
            // α_m g(bn) = (α_m b)·n·(bn − 1)(bn)^{d−2}
            let value = &alpha_b * n * (&bn - 1) * bn.pow(d - 2);
            let exact = &lvl.alpha * BigRational::from_integer(g);
            if !exact.is_integer() || exact.to_integer() != value {
                return Err((n, "alpha_m g(b_m n) is not the expected integer".into()));
            }
            let shifted = b * n - 1;
            let factor = BigInt::from(n) * shifted;
            if !value.is_multiple_of(&factor) {
                return Err((n, "n(b_m n - 1) does not divide the floor".into()));
            }
            if n.gcd(&shifted) != 1 {
                return Err((n, "gcd(n, b_m n - 1) != 1".into()));
            }
            let v = value
                .to_u64()
                .ok_or_else(|| (n, format!("floor {value} exceeds u64")))?;
            let w = omega_u64(v).0;
            if w < omega_u64(n).0 + omega_u64(shifted).0 {
                return Err((n, "omega is not superadditive".into()));
            }
            Ok(w as f64 >= cut)
        })
        .collect();
    let mut above = 0;
    for r in outcome {
        match r {
            Ok(hit) => above += hit as u64,
            Err((n, check)) => {
                return Err(if check.contains("exceeds u64") {
                    Error::Capacity(check)
                } else {
                    Error::Counterexample { n, check }
                })
            }
        }
    }
    Ok(CollapseReport {
        m,
        checked: top,
        floor_identity: true,
        divisibility: true,
        superadditive: true,
        coprime: true,
        above_threshold: above,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdversaryReport {
    pub m: usize,
    #[serde(rename = "N")]
    pub n: u64,
    pub loglog: f64,
    /// P((ω − LL)/√LL ≥ 0.8√LL) for n ≤ N_{m+1}.
    pub mass_shift: f64,
    pub gaussian_tail: f64,
    /// mass_shift − gaussian_tail, a lower bound on d_K.
    pub bound: f64,
    pub empirical_dk: f64,
    pub above_threshold: u64,
    /// Multiples of b_m among the above-threshold n.
    pub above_threshold_multiples: u64,
    /// Count of above-threshold n ≤ N_{m+1}/b_m from the collapse check.
    pub collapse_above_threshold: u64,
    pub multiples: u64,
    pub b: u64,
}

/// Full-sample statistics of ω(⌊α g(n)⌋) for n ≤ N_{m+1}.
pub fn adversary_experiment(schedule: &AdversarySchedule, m: usize) -> Result<AdversaryReport> {
    let collapse = collapse_check(schedule, m)?;
    let levels = &schedule.levels;
    let d = schedule.d;
    let n_top = levels[m].n;
    if n_top < 16 {
        return Err(Error::validation(format!("N_{} = {n_top} is too small", m + 1)));
    }
    // ⌊α g(n)⌋ = ⌊α_{m+1} g(n)⌋ once frac(α_{m+1} g) + tail·g < 1
    let alpha = &levels[m].alpha;
    let tail = tail_upper(schedule, m + 1)?;
    let floors: Vec<std::result::Result<u64, Error>> = (1..=n_top)
        .into_par_iter()
        .map(|n| {
            let g = BigRational::from_integer(g_poly(&BigInt::from(n), d));
            let x = alpha * &g;
            let fl = floor_rat(&x);
            let frac = &x - BigRational::from_integer(fl.clone());
            if frac + &tail * &g >= BigRational::one() {
                return Err(Error::AmbiguousFloor {
                    candidate: format!("floor(f({n})) near {}", fl + 1),
                });
            }
            fl.to_u64().ok_or_else(|| Error::Capacity(format!("floor at n = {n} exceeds u64")))
        })
        .collect();
    let floors: Vec<u64> = floors.into_iter().collect::<Result<_>>()?;
    // f(1) = 0; ω(0) is undefined, count it as 0
    let nonzero: Vec<u64> = floors.iter().map(|&f| f.max(1)).collect();
    let omegas = omega_of_values(&nonzero, None)?;
    let ll = loglog(n_top as f64);
    let rs = ll.sqrt();
    let cut = 1.8 * ll;
    let b = levels[m - 1].b.to_u64().ok_or_else(|| Error::Capacity("b exceeds u64".into()))?;
    let mut above = 0u64;
    let mut above_mult = 0u64;
    for (i, &w) in omegas.iter().enumerate() {
        if floors[i] > 0 && w as f64 >= cut {
            above += 1;
            if (i as u64 + 1) % b == 0 {
                above_mult += 1;
            }
        }
    }
    let std: Vec<f64> = omegas
        .iter()
        .zip(&floors)
        .map(|(&w, &f)| ((if f == 0 { 0 } else { w }) as f64 - ll) / rs)
        .collect();
    let mass_shift = above as f64 / n_top as f64;
    let gaussian_tail = 1.0 - gaussian_cdf(0.8 * rs);
    Ok(AdversaryReport {
        m,
        n: n_top,
        loglog: ll,
        mass_shift,
        gaussian_tail,
        bound: mass_shift - gaussian_tail,
        empirical_dk: dk_of_values(std)?,
        above_threshold: above,
        above_threshold_multiples: above_mult,
        collapse_above_threshold: collapse.above_threshold,
        multiples: n_top / b,
        b,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::{Signed, Zero};

    #[test]
    fn level_one_is_a1() {
        let s = construct_sequence(2, 1, Relaxation::default()).unwrap();
        assert_eq!(s.levels[0].a, BigInt::from(3));
        assert_eq!(s.levels[0].alpha, BigRational::new(1.into(), 3.into()));
    }

    #[test]
    fn bad_inputs() {
        assert!(construct_sequence(1, 2, Relaxation::default()).is_err());
        assert!(construct_sequence(2, 0, Relaxation::default()).is_err());
    }

    #[test]
    fn third_level_is_over_budget() {
        let err = construct_sequence(2, 3, Relaxation::default()).unwrap_err();
        assert!(matches!(err, Error::Budget { .. }), "{err}");
        assert!(err.to_string().contains("growth condition"));
    }

    #[test]
    fn small_growth_schedule_collapses() {
        let relax = Relaxation {
            growth: 2.0,
            ..Relaxation::default()
        };
        let s = construct_sequence(2, 2, relax).unwrap();
        let l2 = &s.levels[1];
        assert!(l2.a > s.levels[0].a);
        assert!((&l2.alpha * BigRational::from_integer(l2.b.clone())).is_integer());
        let rep = collapse_check(&s, 1).unwrap();
        assert_eq!(rep.checked, l2.n / 3);
        assert!(collapse_check(&s, 2).is_err());
    }

    #[test]
    fn g_poly_small() {
        assert_eq!(g_poly(&BigInt::from(5), 2), BigInt::from(20));
        assert_eq!(g_poly(&BigInt::from(5), 3), BigInt::from(100));
        assert!(g_poly(&BigInt::from(1), 4).is_zero());
        assert!(!g_poly(&BigInt::from(2), 2).is_negative());
    }
}
