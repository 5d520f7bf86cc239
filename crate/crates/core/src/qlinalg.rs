//! Exact linear algebra over ℚ: kernels, dual bases, near-relation search
//! and the rational surrogate vector γ.

use crate::arith::{prime_factors_u64, primes_up_to};
use crate::error::{Error, Result};
use crate::reals::{CertifiedReal, Interval, Linear};
use crate::util::{ceil_rat, floor_rat, height, rat_string};
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::ser::{Serialize, SerializeStruct, Serializer};
use std::cmp::Ordering;

pub type Vector = Vec<BigRational>;

/// Dense rational matrix, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<BigRational>,
}

impl RationalMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            entries: vec![BigRational::zero(); rows * cols],
        }
    }

    pub fn from_rows(rows: &[Vector]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::validation("ragged matrix rows"));
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            entries: rows.concat(),
        })
    }

    pub fn from_i64(rows: &[&[i64]]) -> Result<Self> {
        let rows: Vec<Vector> = rows
            .iter()
            .map(|r| r.iter().map(|&x| BigRational::from_integer(x.into())).collect())
            .collect();
        Self::from_rows(&rows)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &BigRational {
        &self.entries[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: BigRational) {
        self.entries[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[BigRational] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    pub fn mul_vec(&self, v: &[BigRational]) -> Vector {
        assert_eq!(v.len(), self.cols);
        (0..self.rows).map(|i| dot(self.row(i), v)).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j).clone());
            }
        }
        t
    }

    /// Reduced row echelon form and its pivot columns.
    pub fn rref(&self) -> (Self, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..m.cols {
            if r == m.rows {
                break;
            }
            let Some(p) = (r..m.rows).find(|&i| !m.get(i, c).is_zero()) else {
                continue;
            };
            m.swap_rows(r, p);
            let inv = m.get(r, c).recip();
            for j in c..m.cols {
                let v = m.get(r, j) * &inv;
                m.set(r, j, v);
            }
            for i in 0..m.rows {
                if i == r || m.get(i, c).is_zero() {
                    continue;
                }
                let f = m.get(i, c).clone();
                for j in c..m.cols {
                    let v = m.get(i, j) - &f * m.get(r, j);
                    m.set(i, j, v);
                }
            }
            pivots.push(c);
            r += 1;
        }
        (m, pivots)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for j in 0..self.cols {
                self.entries.swap(a * self.cols + j, b * self.cols + j);
            }
        }
    }
}

pub fn dot(a: &[BigRational], b: &[BigRational]) -> BigRational {
    a.iter().zip(b).fold(BigRational::zero(), |acc, (x, y)| acc + x * y)
}

/// Scale to integer entries with gcd 1 and a positive first nonzero entry.
pub fn primitive(v: &[BigRational]) -> Vector {
    let l = v.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let ints: Vec<BigInt> = v.iter().map(|x| x.numer() * (&l / x.denom())).collect();
    let g = ints.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    if g.is_zero() {
        return v.to_vec();
    }
    let sign = match ints.iter().find(|x| !x.is_zero()) {
        Some(x) if x.is_negative() => -BigInt::one(),
        _ => BigInt::one(),
    };
    ints.into_iter()
        .map(|x| BigRational::from_integer(x / &g * &sign))
        .collect()
}

/// Basis of the nullspace, each vector primitive integral.
pub fn kernel_basis(m: &RationalMatrix) -> Vec<Vector> {
    let (r, pivots) = m.rref();
    let free: Vec<usize> = (0..m.cols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![BigRational::zero(); m.cols];
            v[f] = BigRational::one();
            for (i, &p) in pivots.iter().enumerate() {
                v[p] = -r.get(i, f);
            }
            primitive(&v)
        })
        .collect()
}

/// Solve `a·x = b` for square invertible `a`.
pub fn solve(a: &RationalMatrix, b: &[BigRational]) -> Result<Vector> {
    let n = a.rows;
    if a.cols != n || b.len() != n {
        return Err(Error::validation("solve needs a square system"));
    }
    let mut aug = RationalMatrix::zeros(n, n + 1);
    for i in 0..n {
        for j in 0..n {
            aug.set(i, j, a.get(i, j).clone());
        }
        aug.set(i, n, b[i].clone());
    }
    let (r, pivots) = aug.rref();
    if pivots.len() < n || pivots[..n] != (0..n).collect::<Vec<_>>()[..] {
        return Err(Error::RankDeficient(format!("system of size {n} is singular")));
    }
    Ok((0..n).map(|i| r.get(i, n).clone()).collect())
}

/// Vectors v′ᵢ in the span of `vectors` with ⟨v′ᵢ, vⱼ⟩ = δᵢⱼ.
pub fn dual_basis(vectors: &[Vector]) -> Result<Vec<Vector>> {
    if vectors.is_empty() {
        return Ok(Vec::new());
    }
    let v = RationalMatrix::from_rows(vectors)?;
    let r = vectors.len();
    let mut gram = RationalMatrix::zeros(r, r);
    for i in 0..r {
        for j in 0..r {
            gram.set(i, j, dot(&vectors[i], &vectors[j]));
        }
    }
    if gram.rank() < r {
        return Err(Error::RankDeficient(format!(
            "{r} input vectors are linearly dependent"
        )));
    }
    // v′ = G⁻¹ V, column by column of G⁻¹
    let mut out = vec![vec![BigRational::zero(); v.cols]; r];
    for j in 0..r {
        let mut e = vec![BigRational::zero(); r];
        e[j] = BigRational::one();
        let col = solve(&gram, &e)?;
        for i in 0..r {
            for c in 0..v.cols {
                out[i][c] += &col[i] * v.get(j, c);
            }
        }
    }
    Ok(out)
}

/// A near relation Σ mᵢαᵢ + m ≈ 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Relation {
    pub coeffs: Vector,
    pub constant: BigInt,
}

impl Relation {
    /// The relation as a vector (m₁, …, m_k, m).
    pub fn as_vector(&self) -> Vector {
        let mut v = self.coeffs.clone();
        v.push(BigRational::from_integer(self.constant.clone()));
        v
    }
}

impl Serialize for Relation {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("Relation", 2)?;
        let coeffs: Vec<String> = self.coeffs.iter().map(rat_string).collect();
        st.serialize_field("coeffs", &coeffs)?;
        st.serialize_field("constant", &self.constant.to_string())?;
        st.end()
    }
}

/// All tuples found by [`find_near_relations`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelationSet {
    pub k: usize,
    pub tuples: Vec<Relation>,
    pub height_bound: u64,
    pub tolerance: BigRational,
}

impl Serialize for RelationSet {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("RelationSet", 4)?;
        st.serialize_field("k", &self.k)?;
        st.serialize_field("tuples", &self.tuples)?;
        st.serialize_field("height_bound", &self.height_bound)?;
        st.serialize_field("tolerance", &rat_string(&self.tolerance))?;
        st.end()
    }
}

pub const DEFAULT_RELATION_BUDGET: u64 = 100_000_000;

/// Coefficients admissible in one coordinate: c/q for q in the support,
/// height at most `j`.
fn coordinate_candidates(j: u64, support: &[u64]) -> Vec<BigRational> {
    let jb = BigInt::from(j);
    let mut out = Vec::new();
    for &q in support {
        let lim = j as i64 * q as i64;
        for c in -lim..=lim {
            let r = BigRational::new(c.into(), q.into());
            if height(&r) <= jb {
                out.push(r);
            }
        }
    }
    out.sort();
    out.dedup();
    out
}

/// Exhaustive search for tuples (m₁..m_k, m) with mᵢ of height ≤ `j` in
/// ∪_{q ∈ support} q⁻¹ℤ and certified |Σ αᵢmᵢ + m| ≤ `tolerance`.
/// A support entry of 1 stands for the integers; an empty support means {1}.
pub fn find_near_relations(
    alphas: &[CertifiedReal],
    j: u64,
    tolerance: &BigRational,
    support: &[u64],
    budget: u64,
) -> Result<RelationSet> {
    if alphas.is_empty() {
        return Err(Error::validation("need at least one alpha"));
    }
    if j == 0 {
        return Err(Error::validation("height bound J must be at least 1"));
    }
    if tolerance.is_negative() {
        return Err(Error::validation("tolerance must be nonnegative"));
    }
    if support.contains(&0) {
        return Err(Error::validation("support entries must be positive"));
    }
    let support = if support.is_empty() { &[1][..] } else { support };
    let cands = coordinate_candidates(j, support);
    let k = alphas.len();
    let total = (cands.len() as u128).checked_pow(k as u32).unwrap_or(u128::MAX);
    if total > budget as u128 {
        return Err(Error::budget("find_near_relations", total, budget));
    }
    let ivs: Vec<Interval> = alphas.iter().map(|a| a.refine_capped(128).0).collect();
    let mut idx = vec![0usize; k];
    let mut tuples = Vec::new();
    loop {
        let coeffs: Vector = idx.iter().map(|&i| cands[i].clone()).collect();
        let mut s = Interval::point(BigRational::zero());
        for (iv, c) in ivs.iter().zip(&coeffs) {
            s = s.add(&iv.scale(c));
        }
        let lo_m = ceil_rat(&(-&s.hi - tolerance));
        let hi_m = floor_rat(&(-&s.lo + tolerance));
        let mut m = lo_m;
        while m <= hi_m {
            if certify(alphas, &coeffs, &m, tolerance, &s)? {
                tuples.push(Relation {
                    coeffs: coeffs.clone(),
                    constant: m.clone(),
                });
            }
            m += 1;
        }
        // odometer
        let mut pos = k;
        loop {
            if pos == 0 {
                return Ok(RelationSet {
                    k,
                    tuples,
                    height_bound: j,
                    tolerance: tolerance.clone(),
                });
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < cands.len() {
                break;
            }
            idx[pos] = 0;
        }
    }
}

/// Decide |Σ αᵢcᵢ + m| ≤ tol, trying the cached enclosure first.
fn certify(
    alphas: &[CertifiedReal],
    coeffs: &[BigRational],
    m: &BigInt,
    tol: &BigRational,
    s: &Interval,
) -> Result<bool> {
    let mr = BigRational::from_integer(m.clone());
    let (lo, hi) = (&s.lo + &mr, &s.hi + &mr);
    let neg = -tol.clone();
    if lo >= neg && &hi <= tol {
        return Ok(true);
    }
    if &lo > tol || hi < neg {
        return Ok(false);
    }
    let form = alphas
        .iter()
        .zip(coeffs)
        .fold(Linear::new(mr), |f, (a, c)| f.term(a, c.clone()));
    Ok(form.cmp_rational(tol)? != Ordering::Greater && form.cmp_rational(&neg)? != Ordering::Less)
}

/// The rational surrogate (γ₁..γ_k) and the relations it satisfies exactly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GammaVector {
    pub gammas: Vector,
    pub provenance: RelationSet,
}

impl Serialize for GammaVector {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("GammaVector", 2)?;
        let g: Vec<String> = self.gammas.iter().map(rat_string).collect();
        st.serialize_field("gammas", &g)?;
        st.serialize_field("provenance", &self.provenance)?;
        st.end()
    }
}

/// Build γ with (γ, 1) in the kernel of the relation matrix and γ close to α.
///
/// The kernel is written as w₀ + span(w₁..w_q) with last coordinates 1 and 0;
/// the free coefficients are least-squares fitted to α and rounded to the
/// grid (1/`grid_height`)ℤ.
pub fn gamma_vector(relations: &RelationSet, alphas: &[CertifiedReal], grid_height: u64) -> Result<GammaVector> {
    let k = alphas.len();
    if relations.k != k {
        return Err(Error::validation(format!(
            "relation set has k = {} but {} alphas were given",
            relations.k, k
        )));
    }
    if grid_height == 0 {
        return Err(Error::validation("grid_height must be at least 1"));
    }
    // greedy independent subset in input order
    let mut basis: Vec<Vector> = Vec::new();
    for rel in &relations.tuples {
        let mut trial = basis.clone();
        trial.push(rel.as_vector());
        if RationalMatrix::from_rows(&trial)?.rank() == trial.len() {
            basis = trial;
        }
    }
    let kernel = if basis.is_empty() {
        (0..=k)
            .map(|i| {
                let mut e = vec![BigRational::zero(); k + 1];
                e[i] = BigRational::one();
                e
            })
            .collect()
    } else {
        kernel_basis(&RationalMatrix::from_rows(&basis)?)
    };
    let Some(pivot) = kernel.iter().position(|v| !v[k].is_zero()) else {
        return Err(Error::DegenerateRelations(
            "every kernel vector has last coordinate 0".into(),
        ));
    };
    let w0: Vector = kernel[pivot].iter().map(|x| x / &kernel[pivot][k]).collect();
    let free: Vec<Vector> = kernel
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != pivot)
        .map(|(_, v)| v.iter().zip(&w0).map(|(x, w)| x - &v[k] * w).collect())
        .collect();
    let target: Vector = alphas
        .iter()
        .zip(&w0)
        .map(|(a, w)| a.refine_capped(128).0.midpoint() - w)
        .collect();
    let mut u = w0.clone();
    if !free.is_empty() {
        let q = free.len();
        let mut g = RationalMatrix::zeros(q, q);
        for a in 0..q {
            for b in 0..q {
                g.set(a, b, dot(&free[a][..k], &free[b][..k]));
            }
        }
        let rhs: Vector = free.iter().map(|w| dot(&w[..k], &target)).collect();
        let c = solve(&g, &rhs)?;
        let h = BigRational::from_integer(grid_height.into());
        let half = BigRational::new(1.into(), 2.into());
        for (ci, w) in c.iter().zip(&free) {
            let rounded = BigRational::new(floor_rat(&(ci * &h + &half)), grid_height.into());
            for (ux, wx) in u.iter_mut().zip(w) {
                *ux += &rounded * wx;
            }
        }
    }
    let gammas: Vector = u[..k].to_vec();
    for rel in &relations.tuples {
        let v = dot(&rel.coeffs, &gammas) + BigRational::from_integer(rel.constant.clone());
        if !v.is_zero() {
            return Err(Error::DegenerateRelations(format!(
                "re-substitution left {} on a relation",
                rat_string(&v)
            )));
        }
    }
    Ok(GammaVector {
        gammas,
        provenance: relations.clone(),
    })
}

/// Prime factors of every numerator and denominator of γ, together with the
/// primes ≤ ln N.
pub fn bad_prime_set(gamma: &GammaVector, n: f64) -> Result<Vec<u64>> {
    let mut set = std::collections::BTreeSet::new();
    for g in &gamma.gammas {
        if g.is_zero() {
            return Err(Error::validation("gamma entries must be nonzero"));
        }
        for part in [g.numer().abs(), g.denom().clone()] {
            let v = part
                .to_u64()
                .ok_or_else(|| Error::Capacity(format!("cannot factor {part}: exceeds 64 bits")))?;
            set.extend(prime_factors_u64(v));
        }
    }
    let ln = n.ln();
    if ln >= 2.0 {
        set.extend(primes_up_to(ln.floor() as u64));
    }
    Ok(set.into_iter().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reals::parse;
    use crate::util::{int, ratio};

    fn ints(v: &[i64]) -> Vector {
        v.iter().map(|&x| int(x)).collect()
    }

    #[test]
    fn kernel_examples() {
        let m = RationalMatrix::from_i64(&[&[1, 1]]).unwrap();
        assert_eq!(kernel_basis(&m), vec![ints(&[1, -1])]);
        let m = RationalMatrix::from_i64(&[&[1, 2], &[2, 4]]).unwrap();
        assert_eq!(kernel_basis(&m), vec![ints(&[2, -1])]);
        let m = RationalMatrix::from_i64(&[&[1, 0], &[0, 1]]).unwrap();
        assert!(kernel_basis(&m).is_empty());
        let z = RationalMatrix::zeros(2, 3);
        assert_eq!(kernel_basis(&z), vec![ints(&[1, 0, 0]), ints(&[0, 1, 0]), ints(&[0, 0, 1])]);
    }

    #[test]
    fn dual_examples() {
        let e = vec![ints(&[1, 0]), ints(&[0, 1])];
        assert_eq!(dual_basis(&e).unwrap(), e);
        assert_eq!(dual_basis(&[ints(&[2, 0])]).unwrap(), vec![vec![ratio(1, 2), int(0)]]);
        assert_eq!(
            dual_basis(&[ints(&[1, 1]), ints(&[1, -1])]).unwrap(),
            vec![vec![ratio(1, 2), ratio(1, 2)], vec![ratio(1, 2), ratio(-1, 2)]]
        );
        assert!(matches!(
            dual_basis(&[ints(&[1, 2]), ints(&[2, 4])]),
            Err(Error::RankDeficient(_))
        ));
    }

    #[test]
    fn relation_examples() {
        let alphas = [parse("1").unwrap(), parse("2").unwrap()];
        let set = find_near_relations(&alphas, 3, &int(0), &[1], DEFAULT_RELATION_BUDGET).unwrap();
        assert!(set.tuples.contains(&Relation { coeffs: ints(&[2, -1]), constant: 0.into() }));

        let r2 = [parse("sqrt:2").unwrap()];
        let set = find_near_relations(&r2, 5, &ratio(1, 1_000_000), &[1], DEFAULT_RELATION_BUDGET).unwrap();
        assert_eq!(set.tuples, vec![Relation { coeffs: ints(&[0]), constant: 0.into() }]);

        let one = [parse("1").unwrap()];
        let set = find_near_relations(&one, 2, &int(0), &[1], DEFAULT_RELATION_BUDGET).unwrap();
        let want: Vec<Relation> = (-2..=2)
            .map(|t| Relation { coeffs: ints(&[t]), constant: (-t).into() })
            .collect();
        assert_eq!(set.tuples, want);
    }

    #[test]
    fn relation_budget() {
        let alphas = [parse("sqrt:2").unwrap(), parse("sqrt:3").unwrap()];
        match find_near_relations(&alphas, 100, &int(0), &[1], 1000) {
            Err(Error::Budget { count, .. }) => assert_eq!(count, (201u64 * 201).to_string()),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn gamma_examples() {
        let alphas = [parse("1/2").unwrap(), parse("1/3").unwrap()];
        let rels = RelationSet {
            k: 2,
            tuples: vec![
                Relation { coeffs: ints(&[2, 0]), constant: (-1).into() },
                Relation { coeffs: ints(&[0, 3]), constant: (-1).into() },
            ],
            height_bound: 3,
            tolerance: int(0),
        };
        assert_eq!(gamma_vector(&rels, &alphas, 10).unwrap().gammas, vec![ratio(1, 2), ratio(1, 3)]);

        let r2 = [parse("sqrt:2").unwrap()];
        let empty = RelationSet { k: 1, tuples: vec![], height_bound: 1, tolerance: int(0) };
        let g = gamma_vector(&empty, &r2, 100).unwrap();
        assert_eq!(g.gammas, vec![ratio(141, 100)]);

        let a = [parse("rational:1000000001/1000000000").unwrap()];
        let rels = RelationSet {
            k: 1,
            tuples: vec![Relation { coeffs: ints(&[1]), constant: (-1).into() }],
            height_bound: 1,
            tolerance: ratio(1, 1000),
        };
        assert_eq!(gamma_vector(&rels, &a, 100).unwrap().gammas, vec![int(1)]);
    }

    #[test]
    fn gamma_degenerate() {
        // m = 1 forces the last coordinate of every kernel vector to vanish
        let a = [parse("sqrt:2").unwrap()];
        let rels = RelationSet {
            k: 1,
            tuples: vec![Relation { coeffs: ints(&[0]), constant: 1.into() }],
            height_bound: 1,
            tolerance: int(1),
        };
        assert!(matches!(gamma_vector(&rels, &a, 10), Err(Error::DegenerateRelations(_))));
    }

    #[test]
    fn bad_primes() {
        let g = |v: Vector| GammaVector {
            gammas: v,
            provenance: RelationSet { k: 1, tuples: vec![], height_bound: 1, tolerance: int(0) },
        };
        assert_eq!(bad_prime_set(&g(vec![ratio(3, 7)]), 5.0).unwrap(), vec![3, 7]);
        assert_eq!(bad_prime_set(&g(vec![ratio(22, 7)]), 1e6).unwrap(), vec![2, 3, 5, 7, 11, 13]);
        assert_eq!(bad_prime_set(&g(vec![int(1)]), 9f64.exp()).unwrap(), vec![2, 3, 5, 7]);
        assert!(bad_prime_set(&g(vec![int(0)]), 10.0).is_err());
    }
}
