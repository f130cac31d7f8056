//! Exact scalars of the generic ring C[v,v⁻¹][g_k]: Laurent polynomials in v
//! with formal Gauss-sum parameters g_k subject to
//!
//!   g_k = g_l when n | (k−l),    g_0 = −1,    g_k·g_{−k} = v⁻¹ when n ∤ k.
//!
//! Every scalar is kept in a normal form: indices are reduced mod n, g_0 is
//! folded into the coefficient as −1, and for each pair {k, n−k} at most one
//! index carries a nonzero exponent (g_{n/2}² = v⁻¹ caps that exponent at 1
//! when n is even). Coefficients are exact rationals.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

/// Monomial key: v-exponent and the sparse g-monomial `[(index, exponent)]`
/// with indices in 1..n, sorted, in normal form.
type Key = (i64, Vec<(i64, u32)>);

/// An element of the generic ring, tied to a cover degree n.
///
/// `n = 0` marks a g-free scalar (pure Laurent polynomial in v) that is
/// compatible with any cover degree; ring operations unify the degrees and
/// panic on a genuine mismatch.
#[derive(Clone, Debug)]
pub struct GaussScalar {
    n: i64,
    terms: BTreeMap<Key, BigRational>,
}

/// Equality is of ring elements: the cover-degree tag is compatibility
/// metadata, not part of the value (a g-free scalar equals itself whatever
/// degree it was created under).
impl PartialEq for GaussScalar {
    fn eq(&self, other: &Self) -> bool {
        self.terms == other.terms
    }
}

impl Eq for GaussScalar {}

impl GaussScalar {
    pub fn zero_scalar() -> Self {
        GaussScalar { n: 0, terms: BTreeMap::new() }
    }

    pub fn one_scalar() -> Self {
        GaussScalar::v_pow(0)
    }

    /// v^a.
    pub fn v_pow(a: i64) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert((a, Vec::new()), BigRational::one());
        GaussScalar { n: 0, terms }
    }

    /// An integer constant.
    pub fn integer(c: i64) -> Self {
        GaussScalar::rational(BigRational::from_integer(BigInt::from(c)))
    }

    pub fn rational(c: BigRational) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert((0, Vec::new()), c);
        }
        GaussScalar { n: 0, terms }
    }

    /// The parameter g_k in the ring of cover degree n.
    pub fn g(k: i64, n: i64) -> Self {
        assert!(n >= 1);
        let mut s = GaussScalar { n, terms: BTreeMap::new() };
        s.insert_term(0, vec![(k, 1)], BigRational::one());
        s
    }

    /// c · v^a · ∏ g_k^{e_k}.
    pub fn monomial(c: BigRational, v_exp: i64, gs: Vec<(i64, u32)>, n: i64) -> Self {
        assert!(n >= 1);
        let mut s = GaussScalar { n, terms: BTreeMap::new() };
        s.insert_term(v_exp, gs, c);
        s
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn cover_degree(&self) -> i64 {
        self.n
    }

    fn unify_n(&self, other: &Self) -> i64 {
        match (self.n, other.n) {
            (0, m) => m,
            (m, 0) => m,
            (a, b) if a == b => a,
            (a, b) => panic!("mismatched cover degrees: {a} vs {b}"),
        }
    }

    /// Insert a raw term, applying the g-relations. `self.n` must already be
    /// set if `gs` is nonempty.
    fn insert_term(&mut self, v_exp: i64, gs: Vec<(i64, u32)>, coeff: BigRational) {
        if coeff.is_zero() {
            return;
        }
        let n = self.n;
        let mut c = coeff;
        let mut v = v_exp;
        let mut exps: BTreeMap<i64, u32> = BTreeMap::new();
        for (k, e) in gs {
            if e == 0 {
                continue;
            }
            assert!(n >= 1, "g-parameters require a cover degree");
            let kr = k.rem_euclid(n);
            if kr == 0 {
                // g_0 = −1.
                if e % 2 == 1 {
                    c = -c;
                }
            } else {
                *exps.entry(kr).or_insert(0) += e;
            }
        }
        if n >= 1 {
            // Pair reduction g_k g_{n−k} = v⁻¹.
            let keys: Vec<i64> = exps.keys().copied().collect();
            for k in keys {
                if 2 * k < n {
                    let l = n - k;
                    let ek = exps.get(&k).copied().unwrap_or(0);
                    let el = exps.get(&l).copied().unwrap_or(0);
                    let t = ek.min(el);
                    if t > 0 {
                        v -= t as i64;
                        exps.insert(k, ek - t);
                        exps.insert(l, el - t);
                    }
                } else if 2 * k == n {
                    let ek = exps.get(&k).copied().unwrap_or(0);
                    let t = ek / 2;
                    if t > 0 {
                        v -= t as i64;
                        exps.insert(k, ek % 2);
                    }
                }
            }
        }
        let mono: Vec<(i64, u32)> = exps.into_iter().filter(|&(_, e)| e > 0).collect();
        let key = (v, mono);
        let entry = self.terms.entry(key.clone()).or_insert_with(BigRational::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&key);
        }
    }

    pub fn add_ref(&self, other: &Self) -> Self {
        let n = self.unify_n(other);
        let mut out = GaussScalar { n, terms: self.terms.clone() };
        for ((v, gs), c) in &other.terms {
            out.insert_term(*v, gs.clone(), c.clone());
        }
        out
    }

    pub fn sub_ref(&self, other: &Self) -> Self {
        let n = self.unify_n(other);
        let mut out = GaussScalar { n, terms: self.terms.clone() };
        for ((v, gs), c) in &other.terms {
            out.insert_term(*v, gs.clone(), -c.clone());
        }
        out
    }

    pub fn mul_ref(&self, other: &Self) -> Self {
        let n = self.unify_n(other);
        let mut out = GaussScalar { n, terms: BTreeMap::new() };
        for ((v1, g1), c1) in &self.terms {
            for ((v2, g2), c2) in &other.terms {
                let mut gs = g1.clone();
                gs.extend(g2.iter().copied());
                out.insert_term(v1 + v2, gs, c1 * c2);
            }
        }
        out
    }

    pub fn neg_ref(&self) -> Self {
        GaussScalar {
            n: self.n,
            terms: self.terms.iter().map(|(k, c)| (k.clone(), -c.clone())).collect(),
        }
    }

    /// Multiply by v^a.
    pub fn v_shift(&self, a: i64) -> Self {
        GaussScalar {
            n: self.n,
            terms: self
                .terms
                .iter()
                .map(|((v, gs), c)| ((v + a, gs.clone()), c.clone()))
                .collect(),
        }
    }

    /// Evaluate with v ↦ v_value and g_k ↦ table[k mod n]. The table must
    /// have one entry per residue class, i.e. length n.
    pub fn eval(&self, v_value: f64, table: &[Complex64]) -> Result<Complex64, EvalError> {
        let mut acc = Complex64::new(0.0, 0.0);
        for ((v, gs), c) in &self.terms {
            let cf = c.to_f64().ok_or(EvalError::CoefficientOverflow)?;
            let mut term = Complex64::new(cf * v_value.powi(*v as i32), 0.0);
            for &(k, e) in gs {
                let idx = k.rem_euclid(self.n.max(1)) as usize;
                let g = table.get(idx).ok_or(EvalError::MissingGaussValue(k))?;
                term *= g.powi(e as i32);
            }
            acc += term;
        }
        Ok(acc)
    }

    /// Iterate normal-form terms as (v_exp, g-monomial, coefficient).
    pub fn terms(&self) -> impl Iterator<Item = (i64, &[(i64, u32)], &BigRational)> {
        self.terms.iter().map(|((v, gs), c)| (*v, gs.as_slice(), c))
    }

    /// The constant 1−v, a frequent factor in the averaging formulas.
    pub fn one_minus_v() -> Self {
        GaussScalar::one_scalar().sub_ref(&GaussScalar::v_pow(1))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EvalError {
    MissingGaussValue(i64),
    CoefficientOverflow,
}

impl fmt::Display for EvalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EvalError::MissingGaussValue(k) => write!(f, "no Gauss value for index {k}"),
            EvalError::CoefficientOverflow => write!(f, "coefficient does not fit in f64"),
        }
    }
}

impl std::error::Error for EvalError {}

impl Add for GaussScalar {
    type Output = GaussScalar;
    fn add(self, rhs: Self) -> Self {
        self.add_ref(&rhs)
    }
}

impl Sub for GaussScalar {
    type Output = GaussScalar;
    fn sub(self, rhs: Self) -> Self {
        self.sub_ref(&rhs)
    }
}

impl Mul for GaussScalar {
    type Output = GaussScalar;
    fn mul(self, rhs: Self) -> Self {
        self.mul_ref(&rhs)
    }
}

impl Neg for GaussScalar {
    type Output = GaussScalar;
    fn neg(self) -> Self {
        self.neg_ref()
    }
}

impl Zero for GaussScalar {
    fn zero() -> Self {
        GaussScalar::zero_scalar()
    }
    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

impl One for GaussScalar {
    fn one() -> Self {
        GaussScalar::one_scalar()
    }
}

impl fmt::Display for GaussScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for ((v, gs), c) in &self.terms {
            let mut parts: Vec<String> = Vec::new();
            let one = BigRational::one();
            let minus_one = -BigRational::one();
            let coeff_is_unit = *c == one || *c == minus_one;
            if !coeff_is_unit || (*v == 0 && gs.is_empty()) {
                parts.push(format!("{}", c.abs()));
            }
            if *v != 0 {
                parts.push(if *v == 1 { "v".to_string() } else { format!("v^{v}") });
            }
            for (k, e) in gs {
                parts.push(if *e == 1 {
                    format!("g{k}")
                } else {
                    format!("g{k}^{e}")
                });
            }
            let body = parts.join("*");
            let negative = c.is_negative();
            if first {
                if negative {
                    write!(f, "-{body}")?;
                } else {
                    write!(f, "{body}")?;
                }
                first = false;
            } else if negative {
                write!(f, " - {body}")?;
            } else {
                write!(f, " + {body}")?;
            }
        }
        Ok(())
    }
}
