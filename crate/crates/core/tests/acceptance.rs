//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails.

mod common;

use common::{trial, PI50};
use eklab::adversary::{collapse_check, construct_sequence, Relaxation};
use eklab::arith::{omega_range, sieve_primes};
use eklab::harmonic::{
    classify_tuple, e_direct, e_restricted_sum, PrimeTuple, RestrictedVariant, SumRange, TupleType,
};
use eklab::kubilius::{
    binomial_moments, char_compare, divisibility_density, esseen_bound, sample_model, standardized_char_values, symmetric_grid,
    tail_violations, BinomialMode, BinomialMoment, KubiliusModel, GAUSSIAN_DENSITY_SUP,
};
use eklab::qlinalg::{
    dot, dual_basis, find_near_relations, gamma_vector, kernel_basis, RationalMatrix, DEFAULT_RELATION_BUDGET,
};
use eklab::reals::{beatty_floor, parse, BeattySpec, CertifiedReal};
use eklab::stats::{
    coprimality_rate, dk_of_values, empirical_dk, gaussian_mixed_moment, mixed_moment_empirical, omega_sample,
    truncated_omega_columns, MomentIndex, StandardizedSample,
};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeSet;
use std::process::Command;
use std::time::{Duration, Instant};

type Outcome = Result<String, String>;

fn check(cond: bool, detail: String) -> Outcome {
    if cond {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn within(elapsed: Duration, limit_s: u64, detail: String) -> Outcome {
    if elapsed > Duration::from_secs(limit_s) {
        return Err(format!("{detail}; took {:.1} s, limit {limit_s} s", elapsed.as_secs_f64()));
    }
    Ok(detail)
}

fn q(a: i64, b: i64) -> BigRational {
    BigRational::new(a.into(), b.into())
}

fn spec(alpha: &str, beta: &str) -> BeattySpec {
    BeattySpec::parse(alpha, beta).unwrap()
}

fn sqrt2_pi() -> BeattySpec {
    BeattySpec::new(parse("sqrt:2").unwrap(), parse(&format!("decimal:{PI50}")).unwrap()).unwrap()
}

fn sieve_oracle() -> Outcome {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let start = Instant::now();
    let table = pool.install(|| omega_range(2, 100_001)).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    if let Some(n) = (2..=100_000u64).find(|&n| (table.omega(n), table.big_omega(n)) != trial(n)) {
        return Err(format!("mismatch at n = {n}"));
    }
    within(elapsed, 10, format!("[2, 1e5] exact, sieve {:.3} s on one thread", elapsed.as_secs_f64()))
}

fn coprimality() -> Outcome {
    let start = Instant::now();
    let r = coprimality_rate(&parse("sqrt:2").unwrap(), 1_000_000).map_err(|e| e.to_string())?;
    let detail = format!("rate {:.6}", r.rate);
    let ok = check((r.rate - 0.607927).abs() <= 0.005, detail)?;
    within(start.elapsed(), 60, ok)
}

fn pairings(counts: &mut [u32]) -> u64 {
    let Some(i) = counts.iter().position(|&c| c > 0) else {
        return 1;
    };
    if counts[i] == 1 {
        return 0;
    }
    let choices = (counts[i] - 1) as u64;
    counts[i] -= 2;
    let r = choices * pairings(counts);
    counts[i] += 2;
    r
}

fn gaussian_pairings() -> Outcome {
    let mut checked = 0;
    for k in 1..=4 {
        for idx in MomentIndex::all(k, 8) {
            let want = BigRational::from_integer(pairings(&mut idx.ells().to_vec()).into());
            if gaussian_mixed_moment(&idx) != want {
                return Err(format!("{idx}: {} vs {want}", gaussian_mixed_moment(&idx)));
            }
            checked += 1;
        }
    }
    Ok(format!("{checked} indices, k <= 4"))
}

fn moment_decomposition() -> Outcome {
    let primes = [7u64, 11, 13];
    let n = 10_000u64;
    let ll = (n as f64).ln().ln();
    let mean: f64 = primes.iter().map(|&p| 1.0 / p as f64).sum();
    let all = [spec("sqrt:2", "0"), spec("quadratic:(1+sqrt:5)/2", "1/3")];
    let mut worst: f64 = 0.0;
    for k in 1..=2 {
        let specs = &all[..k];
        let cols = truncated_omega_columns(specs, n, &primes).map_err(|e| e.to_string())?;
        let sample = StandardizedSample::from_counts(&cols, n, mean, ll.sqrt()).map_err(|e| e.to_string())?;
        for idx in MomentIndex::all(k, 4) {
            let lhs = mixed_moment_empirical(&sample, &idx).map_err(|e| e.to_string())?;
            let shape: Vec<usize> = idx.ells().iter().map(|&l| l as usize).collect();
            let mut sum = 0.0;
            for t in PrimeTuple::enumerate(&shape, &primes) {
                sum += e_direct(&t, specs, n, SumRange::Full).map_err(|e| e.to_string())?.value;
            }
            worst = worst.max((lhs - sum / ll.powf(idx.order() as f64 / 2.0)).abs());
        }
    }
    check(worst <= 1e-9, format!("max deviation {worst:.2e}"))
}

fn type_a() -> Outcome {
    let t = PrimeTuple::new(vec![vec![5, 5, 7, 7]]).map_err(|e| e.to_string())?;
    let got = e_direct(&t, &[spec("1", "0")], 35 * 35, SumRange::Full).map_err(|e| e.to_string())?;
    check(got.exact == q(24, 1225), format!("E_direct = {}", got.exact))
}

fn type_c() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let pool = [3u64, 5, 7, 11, 13];
    // numerators and denominators avoid the tuple primes
    let gam = [q(1, 1), q(1, 2), q(17, 4), q(-19, 8), q(2, 17), q(23, 16)];
    let mut done = 0;
    while done < 20 {
        let k = rng.gen_range(1..=2);
        let entries: Vec<Vec<u64>> = (0..k)
            .map(|_| (0..rng.gen_range(1..=3)).map(|_| pool[rng.gen_range(0..pool.len())]).collect())
            .collect();
        let t = PrimeTuple::new(entries).map_err(|e| e.to_string())?;
        if classify_tuple(&t) != TupleType::C {
            continue;
        }
        let g: Vec<BigRational> = (0..k).map(|_| gam[rng.gen_range(0..gam.len())].clone()).collect();
        let s = e_restricted_sum(&t, &g, 3, RestrictedVariant::Triple { eps: 0.125 }).map_err(|e| e.to_string())?;
        if s.value != 0.0 {
            return Err(format!("{t:?} with {g:?} gives {}", s.value));
        }
        done += 1;
    }
    Ok("20 tuples, all exactly 0".into())
}

fn ek_trend() -> Outcome {
    let start = Instant::now();
    let s = sqrt2_pi();
    let dk = |n| -> Result<f64, String> {
        empirical_dk(&omega_sample(&[s.clone()], n, None).map_err(|e| e.to_string())?).map_err(|e| e.to_string())
    };
    let (lo, hi) = (dk(10_000)?, dk(1_000_000)?);
    let detail = format!("d_K(1e4) = {lo:.5}, d_K(1e6) = {hi:.5}");
    let ok = check(hi < lo && hi <= 0.2, detail)?;
    within(start.elapsed(), 180, ok)
}

fn joint_independence() -> Outcome {
    let m = |a: &str, b: &str| -> Result<[f64; 3], String> {
        let s = omega_sample(&[spec(a, "0"), spec(b, "0")], 1_000_000, None).map_err(|e| e.to_string())?;
        let get = |x, y| mixed_moment_empirical(&s, &MomentIndex::new(vec![x, y]).unwrap()).unwrap();
        Ok([get(1, 1), get(2, 0), get(0, 2)])
    };
    let [m11, m20, m02] = m("1", "sqrt:2")?;
    let [c11, _, _] = m("1", "1")?;
    let band = |x: f64| (0.75..=1.25).contains(&x);
    check(
        m11.abs() <= 0.15 && band(m20) && band(m02) && (0.75..=1.3).contains(&c11),
        format!("m(1,1) = {m11:.4}, m(2,0) = {m20:.4}, m(0,2) = {m02:.4}; control m(1,1) = {c11:.4}"),
    )
}

fn kubilius_char() -> Outcome {
    let model = KubiliusModel::new(sieve_primes(1000).unwrap(), 17).map_err(|e| e.to_string())?;
    let draws = sample_model(&model, 100_000).map_err(|e| e.to_string())?;
    let rows = char_compare(&model, &draws, &symmetric_grid(0.5, 201)).map_err(|e| e.to_string())?;
    let sup = rows.iter().map(|r| r.diff).fold(0.0, f64::max);
    let viol = tail_violations(&model, 2001);
    check(sup <= 0.02 && viol.is_empty(), format!("sup diff {sup:.4}, tail violations {}", viol.len()))
}

fn esseen_validity() -> Outcome {
    let primes = sieve_primes(10_000).unwrap();
    let mut worst = f64::INFINITY;
    for seed in 0..5 {
        let model = KubiliusModel::new(primes.clone(), seed).map_err(|e| e.to_string())?;
        let a = model.s.sqrt() / 3.0;
        let bound = esseen_bound(&standardized_char_values(&model, &symmetric_grid(a, 1025)), a, GAUSSIAN_DENSITY_SUP)
            .map_err(|e| e.to_string())?;
        let rs = model.s.sqrt();
        let draws = sample_model(&model, 100_000).map_err(|e| e.to_string())?;
        let dk = dk_of_values(draws.iter().map(|&v| (v as f64 - model.s) / rs).collect()).map_err(|e| e.to_string())?;
        if dk > bound {
            return Err(format!("seed {seed}: d_K {dk:.4} > bound {bound:.4}"));
        }
        worst = worst.min(bound - dk);
    }
    Ok(format!("5 seeds, smallest margin {worst:.3}"))
}

fn binomial() -> Outcome {
    let primes = sieve_primes(61).unwrap();
    let model = KubiliusModel::new(primes, 0).map_err(|e| e.to_string())?;
    for l in 0..=6 {
        let exact = binomial_moments(&model, l, BinomialMode::ModelExact).map_err(|e| e.to_string())?;
        let brute = binomial_moments(&model, l, BinomialMode::Brute).map_err(|e| e.to_string())?;
        if exact != brute || !matches!(exact, BinomialMoment::Exact(_)) {
            return Err(format!("l = {l}: {exact:?} vs {brute:?}"));
        }
    }
    Ok(format!("{} primes, l <= 6", model.primes().len()))
}

fn naive_relations(alphas: &[BigRational], j: i64, tol: &BigRational) -> BTreeSet<(Vec<BigInt>, BigInt)> {
    let span: i64 = alphas.iter().map(|a| a.abs().ceil().to_integer().to_i64().unwrap()).sum::<i64>() * j + 2;
    let mut out = BTreeSet::new();
    let k = alphas.len();
    let mut ms = vec![-j; k];
    loop {
        let s = ms.iter().zip(alphas).fold(q(0, 1), |acc, (&m, a)| acc + a * BigInt::from(m));
        for m in -span..=span {
            if (&s + BigInt::from(m)).abs() <= *tol {
                out.insert((ms.iter().map(|&x| BigInt::from(x)).collect(), BigInt::from(m)));
            }
        }
        let mut i = 0;
        while i < k {
            ms[i] += 1;
            if ms[i] <= j {
                break;
            }
            ms[i] = -j;
            i += 1;
        }
        if i == k {
            return out;
        }
    }
}

fn qlinalg_exactness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for case in 0..200 {
        let (r, c) = (rng.gen_range(1..=5), rng.gen_range(1..=6));
        let sparse = case % 2 == 1;
        let rows: Vec<Vec<BigRational>> = (0..r)
            .map(|_| {
                (0..c)
                    .map(|_| {
                        if sparse && rng.gen_bool(0.6) {
                            q(0, 1)
                        } else {
                            q(rng.gen_range(-50..=50), rng.gen_range(1..=50))
                        }
                    })
                    .collect()
            })
            .collect();
        let m = RationalMatrix::from_rows(&rows).map_err(|e| e.to_string())?;
        let ker = kernel_basis(&m);
        if m.rank() + ker.len() != c {
            return Err(format!("case {case}: rank-nullity fails"));
        }
        if ker.iter().any(|v| !m.mul_vec(v).iter().all(Zero::is_zero)) {
            return Err(format!("case {case}: M v != 0"));
        }
        if !ker.is_empty() {
            let dual = dual_basis(&ker).map_err(|e| e.to_string())?;
            for (i, d) in dual.iter().enumerate() {
                for (j, v) in ker.iter().enumerate() {
                    if dot(d, v) != if i == j { BigRational::one() } else { BigRational::zero() } {
                        return Err(format!("case {case}: dual pairing ({i}, {j})"));
                    }
                }
            }
        }
    }
    for case in 0..40 {
        let k = rng.gen_range(1..=2);
        let j = rng.gen_range(1..=20);
        let alphas: Vec<BigRational> = (0..k).map(|_| q(rng.gen_range(-30..30), rng.gen_range(1..12))).collect();
        let reals: Vec<CertifiedReal> = alphas.iter().cloned().map(CertifiedReal::rational).collect();
        let tol = q(1, rng.gen_range(1..40));
        let got = find_near_relations(&reals, j as u64, &tol, &[1], DEFAULT_RELATION_BUDGET).map_err(|e| e.to_string())?;
        let got: BTreeSet<_> = got
            .tuples
            .iter()
            .map(|r| (r.coeffs.iter().map(|c| c.to_integer()).collect::<Vec<_>>(), r.constant.clone()))
            .collect();
        if got != naive_relations(&alphas, j, &tol) {
            return Err(format!("relations case {case} differs from the naive search"));
        }
    }
    let alphas = [parse("sqrt:2").unwrap(), parse("quadratic:(1+2*sqrt:2)/3").unwrap()];
    let set = find_near_relations(&alphas, 6, &q(1, 10_000), &[1], DEFAULT_RELATION_BUDGET).map_err(|e| e.to_string())?;
    let g = gamma_vector(&set, &alphas, 1000).map_err(|e| e.to_string())?;
    for rel in &set.tuples {
        let v = dot(&rel.coeffs, &g.gammas) + BigRational::from_integer(rel.constant.clone());
        if !v.is_integer() {
            return Err(format!("gamma leaves {v} on a relation"));
        }
    }
    Ok(format!("200 matrices, 40 relation searches, {} relations re-substituted", set.tuples.len()))
}

fn adversary() -> Outcome {
    let start = Instant::now();
    let s = construct_sequence(2, 2, Relaxation::default()).map_err(|e| e.to_string())?;
    let r = collapse_check(&s, 1).map_err(|e| e.to_string())?;
    let ok = check(
        r.floor_identity && r.divisibility && r.superadditive && r.coprime,
        format!("n <= {} checked, N_2 = {}", r.checked, s.levels[1].n),
    )?;
    within(start.elapsed(), 120, ok)
}

fn divisibility() -> Outcome {
    let s = spec("sqrt:2", "0");
    let mut worst: (f64, u64) = (0.0, 0);
    for d in 2..=50 {
        let r = divisibility_density(d, &s, 1_000_000).map_err(|e| e.to_string())?;
        if r.deviation > worst.0 {
            worst = (r.deviation, d);
        }
    }
    check(worst.0 <= 0.01, format!("max |density - 1/d| = {:.2e} at d = {}", worst.0, worst.1))
}

fn certified_floors() -> Outcome {
    let s = sqrt2_pi();
    let two256 = BigInt::one() << 256;
    let ten50 = BigInt::from(10).pow(50);
    let pi_digits: BigInt = PI50.replace('.', "").parse().unwrap();
    let denom = &two256 * &ten50;
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    for _ in 0..10_000 {
        let n = rng.gen_range(1..=1_000_000_000u64);
        // √2·n ∈ [r, r + 1)/2^256 and π ∈ [P, P + 1]/10^50
        let scaled: BigInt = BigInt::from(2) * BigInt::from(n) * BigInt::from(n) * &two256 * &two256;
        let r = scaled.sqrt();
        let lo = (&r * &ten50 + &pi_digits * &two256) / &denom;
        let hi = ((&r + 1) * &ten50 + (&pi_digits + 1) * &two256) / &denom;
        if lo != hi {
            return Err(format!("oracle enclosure too wide at n = {n}"));
        }
        let got = beatty_floor(&s, n).map_err(|e| e.to_string())?;
        if got != lo {
            return Err(format!("n = {n}: {got} vs oracle {lo}"));
        }
    }
    Ok("10^4 random n <= 1e9 agree".into())
}

fn run_cli(args: &[&str], threads: &str) -> Result<Vec<(String, Vec<u8>)>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_eklab"))
        .args(args)
        .env("EKLAB_THREADS", threads)
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!("{args:?}: {}", String::from_utf8_lossy(&out.stderr)));
    }
    String::from_utf8_lossy(&out.stdout)
        .lines()
        .map(|p| std::fs::read(p).map(|b| (p.to_string(), b)).map_err(|e| e.to_string()))
        .collect()
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let pi = format!("decimal:{PI50}");
    let cases: [(&str, Vec<&str>); 8] = [
        ("ek_single", vec!["--alpha", "sqrt:2", "--beta", &pi]),
        ("ek_joint", vec!["--alpha", "1", "--alpha", "sqrt:2"]),
        ("moments", vec!["--alpha", "sqrt:2", "--alpha", "sqrt:3"]),
        ("quantitative", vec!["--alpha", "sqrt:2"]),
        ("kubilius", vec!["--alpha", "sqrt:2", "--draws", "20000"]),
        ("adversary", vec![]),
        ("relations", vec!["--alpha", "sqrt:2"]),
        ("coprimality", vec!["--alpha", "sqrt:2"]),
    ];
    let mut files = 0;
    for (exp, extra) in &cases {
        for format in ["csv", "json"] {
            let out = dir.path().join(format!("{exp}.{format}"));
            let out = out.to_str().unwrap();
            let mut args = vec![*exp, "--n", "100000", "--seed", "5", "--format", format, "--out", out];
            args.extend(extra.iter().copied());
            let one = run_cli(&args, "1")?;
            let eight = run_cli(&args, "8")?;
            if one != eight {
                return Err(format!("{exp} ({format}) differs between 1 and 8 threads"));
            }
            files += one.len();
        }
    }
    Ok(format!("8 experiments, {files} files byte-identical"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 16] = [
        ("sieve matches trial division", sieve_oracle),
        ("coprimality rate near 6/pi^2", coprimality),
        ("gaussian pairing coefficients", gaussian_pairings),
        ("moment decomposition identity", moment_decomposition),
        ("type A exactness", type_a),
        ("type C vanishing", type_c),
        ("Erdos-Kac trend", ek_trend),
        ("joint independence", joint_independence),
        ("Kubilius characteristic functions", kubilius_char),
        ("Esseen bound validity", esseen_validity),
        ("binomial moments", binomial),
        ("exact linear algebra", qlinalg_exactness),
        ("adversary collapse", adversary),
        ("divisibility densities", divisibility),
        ("certified floors", certified_floors),
        ("determinism across thread counts", determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(d) => println!("PASS {:>2} {name} ({secs:.2} s): {d}", i + 1),
            Err(d) => {
                failed += 1;
                println!("FAIL {:>2} {name} ({secs:.2} s): {d}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
