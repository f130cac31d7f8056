//! The group algebra of the coweight lattice over a generic coefficient
//! scalar, and its localization at binomials 1 − v^a·e^{μ∨}.
//!
//! `GroupAlgebra<S>` is scalar-generic: the symbolic engine works over
//! [`GaussScalar`](crate::gauss::GaussScalar) and specialization lands in
//! `Complex64`. Fractions and exact division are tied to the symbolic side,
//! where the v-grading lives inside the coefficients.

use crate::gauss::GaussScalar;
use num_complex::Complex64;
use num_traits::{One, Zero};
use std::collections::BTreeMap;
use std::fmt;
use std::ops::Neg;

/// Coefficient scalar for the group algebra.
pub trait Coeff: Clone + PartialEq + Zero + One + Neg<Output = Self> {}

impl<T> Coeff for T where T: Clone + PartialEq + Zero + One + Neg<Output = T> {}

/// Finitely supported sum Σ c_μ e^{μ∨} with μ∨ in simple-coroot coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct GroupAlgebra<S> {
    rank: usize,
    terms: BTreeMap<Vec<i64>, S>,
}

impl<S: Coeff> GroupAlgebra<S> {
    pub fn zero(rank: usize) -> Self {
        GroupAlgebra { rank, terms: BTreeMap::new() }
    }

    pub fn one(rank: usize) -> Self {
        Self::monomial(vec![0; rank], S::one())
    }

    pub fn monomial(exp: Vec<i64>, c: S) -> Self {
        let rank = exp.len();
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(exp, c);
        }
        GroupAlgebra { rank, terms }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<i64>, &S)> {
        self.terms.iter()
    }

    pub fn into_terms(self) -> impl Iterator<Item = (Vec<i64>, S)> {
        self.terms.into_iter()
    }

    pub fn coefficient(&self, exp: &[i64]) -> S {
        self.terms.get(exp).cloned().unwrap_or_else(S::zero)
    }

    pub fn support(&self) -> impl Iterator<Item = &Vec<i64>> {
        self.terms.keys()
    }

    pub fn add_term(&mut self, exp: Vec<i64>, c: S) {
        debug_assert_eq!(exp.len(), self.rank);
        if c.is_zero() {
            return;
        }
        match self.terms.entry(exp) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let sum = e.get().clone() + c;
                if sum.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
    }

    pub fn add_ref(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (exp, c) in &other.terms {
            out.add_term(exp.clone(), c.clone());
        }
        out
    }

    pub fn sub_ref(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (exp, c) in &other.terms {
            out.add_term(exp.clone(), c.clone().neg());
        }
        out
    }

    pub fn neg_ref(&self) -> Self {
        GroupAlgebra {
            rank: self.rank,
            terms: self
                .terms
                .iter()
                .map(|(e, c)| (e.clone(), c.clone().neg()))
                .collect(),
        }
    }

    pub fn mul_ref(&self, other: &Self) -> Self {
        debug_assert_eq!(self.rank, other.rank);
        let mut out = GroupAlgebra::zero(self.rank);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &other.terms {
                let exp: Vec<i64> = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                out.add_term(exp, c1.clone() * c2.clone());
            }
        }
        out
    }

    pub fn scale(&self, c: &S) -> Self {
        let mut out = GroupAlgebra::zero(self.rank);
        for (e, t) in &self.terms {
            out.add_term(e.clone(), t.clone() * c.clone());
        }
        out
    }

    /// Multiply by c·e^{shift}.
    pub fn monomial_mul(&self, shift: &[i64], c: &S) -> Self {
        let mut out = GroupAlgebra::zero(self.rank);
        for (e, t) in &self.terms {
            let exp: Vec<i64> = e.iter().zip(shift).map(|(a, b)| a + b).collect();
            out.add_term(exp, t.clone() * c.clone());
        }
        out
    }

    /// Apply a lattice map to every exponent (e.g. a Weyl substitution
    /// e^{μ∨} ↦ e^{wμ∨}).
    pub fn substitute<F: Fn(&[i64]) -> Vec<i64>>(&self, f: F) -> Self {
        let mut out = GroupAlgebra::zero(self.rank);
        for (e, c) in &self.terms {
            out.add_term(f(e), c.clone());
        }
        out
    }

    /// Map coefficients into another scalar type, dropping zeros.
    pub fn map_coeffs<T: Coeff, F: Fn(&S) -> T>(&self, f: F) -> GroupAlgebra<T> {
        let mut out = GroupAlgebra::zero(self.rank);
        for (e, c) in &self.terms {
            out.add_term(e.clone(), f(c));
        }
        out
    }

    /// Keep exactly the terms whose exponent lies in the coset
    /// `class + Λ₀∨`, for the membership predicate supplied.
    pub fn coset_restrict<F: Fn(&[i64]) -> bool>(&self, class: &[i64], in_lambda0: F) -> Self {
        let mut out = GroupAlgebra::zero(self.rank);
        for (e, c) in &self.terms {
            let diff: Vec<i64> = e.iter().zip(class).map(|(a, b)| a - b).collect();
            if in_lambda0(&diff) {
                out.add_term(e.clone(), c.clone());
            }
        }
        out
    }
}

/// Symbolic elements: coefficients in the generic ring.
pub type GenericElement = GroupAlgebra<GaussScalar>;
/// Specialized elements: complex Laurent coefficients.
pub type NumericElement = GroupAlgebra<Complex64>;

impl GenericElement {
    /// Evaluate all coefficients with v ↦ v_value, g_k ↦ table[k].
    pub fn specialize(
        &self,
        v_value: f64,
        table: &[Complex64],
    ) -> Result<NumericElement, crate::gauss::EvalError> {
        let mut out = GroupAlgebra::zero(self.rank);
        for (e, c) in &self.terms {
            out.add_term(e.clone(), c.eval(v_value, table)?);
        }
        Ok(out)
    }
}

/// Renders a coefficient for polynomial display, parenthesized when needed.
pub trait FmtCoeff {
    fn fmt_coeff(&self) -> String;
}

impl FmtCoeff for GaussScalar {
    fn fmt_coeff(&self) -> String {
        let s = format!("{self}");
        if s.contains(" + ") || s.contains(" - ") || s.starts_with('-') {
            format!("({s})")
        } else {
            s
        }
    }
}

impl FmtCoeff for Complex64 {
    fn fmt_coeff(&self) -> String {
        if self.im == 0.0 {
            if self.re < 0.0 {
                format!("({})", self.re)
            } else {
                format!("{}", self.re)
            }
        } else {
            format!("({}{:+}i)", self.re, self.im)
        }
    }
}

impl<S: Coeff + FmtCoeff> fmt::Display for GroupAlgebra<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        // Order by height of −μ∨ then lexicographically: the constant term
        // prints first, deeper terms later.
        let mut keys: Vec<&Vec<i64>> = self.terms.keys().collect();
        keys.sort_by_key(|e| {
            let neg: Vec<i64> = e.iter().map(|&c| -c).collect();
            (neg.iter().sum::<i64>(), neg)
        });
        let mut first = true;
        for e in keys {
            let c = &self.terms[e];
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            if e.iter().all(|&x| x == 0) {
                write!(f, "{}", c.fmt_coeff())?;
            } else {
                let exps: Vec<String> = e.iter().map(|x| x.to_string()).collect();
                let cs = c.fmt_coeff();
                if cs == "1" {
                    write!(f, "e[{}]", exps.join(","))?;
                } else {
                    write!(f, "{}*e[{}]", cs, exps.join(","))?;
                }
            }
        }
        Ok(())
    }
}

/// One denominator factor 1 − v^{v_exp}·e^{mu}, stored with `mu`
/// lexicographically negative (first nonzero coordinate < 0).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Factor {
    pub v_exp: i64,
    pub mu: Vec<i64>,
}

impl Factor {
    /// The factor 1 − v^{v_exp}·e^{−minus_mu} for a positive vector, e.g.
    /// the J-set generators with minus_mu = ñα.
    pub fn new(v_exp: i64, minus_mu: &[i64]) -> Factor {
        let mu: Vec<i64> = minus_mu.iter().map(|&c| -c).collect();
        debug_assert!(lex_sign(&mu) < 0);
        Factor { v_exp, mu }
    }

    /// Expand to the two-term polynomial 1 − v^a e^{mu}.
    pub fn to_poly(&self, rank: usize) -> GenericElement {
        debug_assert_eq!(self.mu.len(), rank);
        let mut p = GroupAlgebra::one(rank);
        p.add_term(self.mu.clone(), GaussScalar::v_pow(self.v_exp).neg_ref());
        p
    }
}

fn lex_sign(v: &[i64]) -> i64 {
    for &c in v {
        if c != 0 {
            return c.signum();
        }
    }
    0
}

/// A fraction numerator / ∏ factors over the generic ring.
#[derive(Clone, Debug)]
pub struct Localized {
    pub num: GenericElement,
    /// Sorted multiset of denominator factors.
    pub den: Vec<Factor>,
}

impl Localized {
    pub fn from_poly(num: GenericElement) -> Self {
        Localized { num, den: Vec::new() }
    }

    pub fn zero(rank: usize) -> Self {
        Localized { num: GroupAlgebra::zero(rank), den: Vec::new() }
    }

    pub fn rank(&self) -> usize {
        self.num.rank()
    }

    /// Build from a numerator and raw binomials 1 − v^a·e^{m}; factors with
    /// lexicographically positive `m` are flipped into canonical form and
    /// the resulting unit −v^a·e^{m} is absorbed into the numerator.
    pub fn new(num: GenericElement, raw: Vec<(i64, Vec<i64>)>) -> Self {
        let mut n = num;
        let mut den = Vec::with_capacity(raw.len());
        for (a, m) in raw {
            let s = lex_sign(&m);
            assert!(s != 0, "denominator factor must have a nonzero exponent");
            if s < 0 {
                den.push(Factor { v_exp: a, mu: m });
            } else {
                // 1 − v^a e^m = (−v^a e^m)·(1 − v^{−a} e^{−m}); dividing by
                // it multiplies the numerator by −v^{−a} e^{−m}.
                let neg_m: Vec<i64> = m.iter().map(|&c| -c).collect();
                n = n.monomial_mul(&neg_m, &GaussScalar::v_pow(-a).neg_ref());
                den.push(Factor { v_exp: -a, mu: neg_m });
            }
        }
        den.sort();
        Localized { num: n, den }
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    fn den_poly(den: &[Factor], rank: usize) -> GenericElement {
        let mut p = GroupAlgebra::one(rank);
        for f in den {
            p = p.mul_ref(&f.to_poly(rank));
        }
        p
    }

    /// Cancel denominator factors that divide the numerator exactly.
    pub fn reduce(&mut self) {
        if self.num.is_zero() {
            self.den.clear();
            return;
        }
        let mut remaining = Vec::with_capacity(self.den.len());
        for f in std::mem::take(&mut self.den) {
            match exact_divide(&self.num, &f) {
                Ok(q) => self.num = q,
                Err(_) => remaining.push(f),
            }
        }
        self.den = remaining;
    }

    pub fn add_ref(&self, other: &Self) -> Self {
        let rank = self.rank();
        let lcm = multiset_union(&self.den, &other.den);
        let extra_self = multiset_difference(&lcm, &self.den);
        let extra_other = multiset_difference(&lcm, &other.den);
        let num = self
            .num
            .mul_ref(&Self::den_poly(&extra_self, rank))
            .add_ref(&other.num.mul_ref(&Self::den_poly(&extra_other, rank)));
        let mut out = Localized { num, den: lcm };
        out.reduce();
        out
    }

    pub fn sub_ref(&self, other: &Self) -> Self {
        self.add_ref(&Localized {
            num: other.num.neg_ref(),
            den: other.den.clone(),
        })
    }

    pub fn mul_ref(&self, other: &Self) -> Self {
        let mut den = self.den.clone();
        den.extend(other.den.iter().cloned());
        den.sort();
        let mut out = Localized { num: self.num.mul_ref(&other.num), den };
        out.reduce();
        out
    }

    pub fn mul_poly(&self, p: &GenericElement) -> Self {
        let mut out = Localized { num: self.num.mul_ref(p), den: self.den.clone() };
        out.reduce();
        out
    }

    /// Multiply by the binomial factor; cancels against an equal denominator
    /// factor when present instead of expanding.
    pub fn mul_factor(&self, f: &Factor) -> Self {
        if let Some(pos) = self.den.iter().position(|g| g == f) {
            let mut den = self.den.clone();
            den.remove(pos);
            Localized { num: self.num.clone(), den }
        } else {
            Localized {
                num: self.num.mul_ref(&f.to_poly(self.rank())),
                den: self.den.clone(),
            }
        }
    }

    /// Exact equality as ring elements, by cross multiplication. Shared
    /// denominator factors are cancelled first.
    pub fn eq_exact(&self, other: &Self) -> bool {
        let rank = self.rank();
        let common = multiset_intersection(&self.den, &other.den);
        let d1 = multiset_difference(&self.den, &common);
        let d2 = multiset_difference(&other.den, &common);
        let lhs = self.num.mul_ref(&Self::den_poly(&d2, rank));
        let rhs = other.num.mul_ref(&Self::den_poly(&d1, rank));
        lhs == rhs
    }

    /// Divide out every denominator factor; errors if the element is not a
    /// polynomial.
    pub fn clear_denominators(&self) -> Result<GenericElement, DivisionError> {
        let mut num = self.num.clone();
        for f in &self.den {
            num = exact_divide(&num, f)?;
        }
        Ok(num)
    }
}

fn multiset_union(a: &[Factor], b: &[Factor]) -> Vec<Factor> {
    let mut counts: BTreeMap<Factor, usize> = BTreeMap::new();
    for f in a {
        *counts.entry(f.clone()).or_insert(0) += 1;
    }
    let mut b_counts: BTreeMap<Factor, usize> = BTreeMap::new();
    for f in b {
        *b_counts.entry(f.clone()).or_insert(0) += 1;
    }
    for (f, c) in b_counts {
        let e = counts.entry(f).or_insert(0);
        *e = (*e).max(c);
    }
    let mut out = Vec::new();
    for (f, c) in counts {
        out.extend(std::iter::repeat(f).take(c));
    }
    out
}

fn multiset_intersection(a: &[Factor], b: &[Factor]) -> Vec<Factor> {
    let mut out = Vec::new();
    let mut b_pool: Vec<&Factor> = b.iter().collect();
    for f in a {
        if let Some(pos) = b_pool.iter().position(|g| *g == f) {
            b_pool.remove(pos);
            out.push(f.clone());
        }
    }
    out.sort();
    out
}

fn multiset_difference(a: &[Factor], b: &[Factor]) -> Vec<Factor> {
    let mut out = Vec::new();
    let mut b_pool: Vec<&Factor> = b.iter().collect();
    for f in a {
        if let Some(pos) = b_pool.iter().position(|g| *g == f) {
            b_pool.remove(pos);
        } else {
            out.push(f.clone());
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq)]
pub enum DivisionError {
    /// The divisor does not divide the element; carries one witness term of
    /// the nonzero remainder.
    NotDivisible { exponent: Vec<i64>, coefficient: GaussScalar },
}

impl fmt::Display for DivisionError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DivisionError::NotDivisible { exponent, coefficient } => write!(
                f,
                "not divisible: remainder has term {} at e[{:?}]",
                coefficient, exponent
            ),
        }
    }
}

impl std::error::Error for DivisionError {}

/// Exact division of `p` by 1 − t with t = v^a·e^{m}: writes p = q·(1 − t)
/// or reports the remainder. Terms are grouped into lines ν₀ + Z·m; on each
/// line the recurrence q_k = p_k + v^a·q_{k−1} solves the division, and the
/// element is divisible exactly when the final carry vanishes on every line.
pub fn exact_divide(p: &GenericElement, f: &Factor) -> Result<GenericElement, DivisionError> {
    if p.is_zero() {
        return Ok(GroupAlgebra::zero(p.rank()));
    }
    let m = &f.mu;
    let a = f.v_exp;
    let pivot = m
        .iter()
        .position(|&c| c != 0)
        .expect("denominator factor has a nonzero exponent");
    // Group p's terms by the line ν mod Z·m; the representative has pivot
    // coordinate reduced into [0, |m_pivot|).
    let mut lines: BTreeMap<Vec<i64>, Vec<(i64, GaussScalar)>> = BTreeMap::new();
    for (e, c) in p.terms() {
        let k = e[pivot].div_euclid(m[pivot]);
        let rep: Vec<i64> = e.iter().zip(m).map(|(x, y)| x - k * y).collect();
        lines.entry(rep).or_default().push((k, c.clone()));
    }
    let mut q = GroupAlgebra::zero(p.rank());
    for (rep, mut terms) in lines {
        terms.sort_by_key(|(k, _)| *k);
        let mut carry = GaussScalar::zero_scalar();
        let mut pos = 0usize;
        let k_min = terms[0].0;
        let k_max = terms[terms.len() - 1].0;
        for k in k_min..=k_max {
            let mut coeff = carry.v_shift(a);
            if pos < terms.len() && terms[pos].0 == k {
                coeff = coeff.add_ref(&terms[pos].1);
                pos += 1;
            }
            if k == k_max {
                if !coeff.is_zero() {
                    let exp: Vec<i64> = rep.iter().zip(m).map(|(x, y)| x + k * y).collect();
                    return Err(DivisionError::NotDivisible {
                        exponent: exp,
                        coefficient: coeff,
                    });
                }
            } else if !coeff.is_zero() {
                let exp: Vec<i64> = rep.iter().zip(m).map(|(x, y)| x + k * y).collect();
                q.add_term(exp, coeff.clone());
            }
            carry = coeff;
        }
    }
    Ok(q)
}
