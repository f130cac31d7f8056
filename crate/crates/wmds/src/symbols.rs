//! Places of F_q(t), the fixed embedding μ_n(F_q) ↪ C*, power-residue and
//! tame Hilbert symbols, and local Gauss sums.
//!
//! S = {∞}: the S-integers are F_q[t], finite places are monic irreducibles
//! (their own canonical uniformizers), and the infinite place has
//! uniformizer 1/t. The tame symbol at a place of residue field κ(ν) is
//!
//!   (x, y)_ν = χ_ν((−1)^{ab} x^b y^{−a} mod ν),  a = ord_ν x, b = ord_ν y,
//!
//! with χ_ν(u) = u^{(q_ν−1)/n}, which lands in μ_n(F_q) because 2n | q−1.

use crate::fq::{irreducibles, FieldError, Fq, FqPoly};
use num_complex::Complex64;
use std::f64::consts::PI;
use std::fmt;

/// A place of F_q(t): a monic irreducible, or the degree valuation.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Place {
    Finite(FqPoly),
    Infinite,
}

impl Place {
    pub fn finite(pi: FqPoly) -> Place {
        assert!(pi.is_monic() && pi.degree() >= 1);
        Place::Finite(pi)
    }

    pub fn residue_degree(&self) -> usize {
        match self {
            Place::Finite(pi) => pi.degree(),
            Place::Infinite => 1,
        }
    }

    /// Cardinality of the residue field.
    pub fn q_nu(&self, q: u64) -> u64 {
        q.pow(self.residue_degree() as u32)
    }
}

impl fmt::Display for Place {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Place::Finite(pi) => write!(f, "({pi})"),
            Place::Infinite => write!(f, "(∞)"),
        }
    }
}

/// An element of μ_n(F_q), stored as its exponent with respect to the fixed
/// generator ζ; the group law is addition of indices mod n.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MuElem(pub u64);

impl MuElem {
    pub const ONE: MuElem = MuElem(0);
}

/// A power-residue symbol value: a root of unity, or the zero marker used
/// when the arguments fail to be coprime.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SymbolValue {
    Mu(MuElem),
    Zero,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SymbolError {
    NotCoprime,
    ZeroArgument,
    NotARootOfUnity,
}

impl fmt::Display for SymbolError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SymbolError::NotCoprime => write!(f, "arguments are not coprime"),
            SymbolError::ZeroArgument => write!(f, "symbol of zero"),
            SymbolError::NotARootOfUnity => write!(f, "value is not an n-th root of unity"),
        }
    }
}

impl std::error::Error for SymbolError {}

/// The arithmetic context: the field, the cover degree, the chosen
/// generator of F_q^× and the induced embedding ε: μ_n(F_q) ↪ C*
/// sending ζ = g^{(q−1)/n} to e^{2πi/n}.
#[derive(Clone, Debug)]
pub struct MuEmbedding {
    fq: Fq,
    n: u64,
    generator: u64,
    zeta: u64,
    /// dlog table for μ_n(F_q): dlog[x] = j with ζ^j = x, indexed by field
    /// element.
    dlog: Vec<Option<u64>>,
}

impl MuEmbedding {
    /// Requires μ_n(F_q) to be full, i.e. n | q−1. The stronger hypothesis
    /// 2n | q−1 (which forces (π,π)_ν = 1 and 𝐠_k𝐠_{−k} = q_ν) is reported
    /// by [`MuEmbedding::has_strict_parity`] rather than enforced, so the
    /// gluing layer stays usable at parameters like n = 2, q = 7.
    pub fn new(q: u64, n: u64, generator: Option<u64>) -> Result<MuEmbedding, FieldError> {
        let fq = Fq::new(q)?;
        if n == 0 || (q - 1) % n != 0 {
            return Err(FieldError::BadCoverDegree { q, n });
        }
        let g = match generator {
            Some(g) => {
                if !fq.is_generator(g) {
                    return Err(FieldError::NotAGenerator(g));
                }
                g
            }
            None => fq.primitive_root(),
        };
        let zeta = fq.pow(g, (q - 1) / n);
        let mut dlog = vec![None; q as usize];
        let mut x = 1u64;
        for j in 0..n {
            dlog[x as usize] = Some(j);
            x = fq.mul(x, zeta);
        }
        Ok(MuEmbedding { fq, n, generator: g, zeta, dlog })
    }

    pub fn q(&self) -> u64 {
        self.fq.q
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn generator(&self) -> u64 {
        self.generator
    }

    pub fn zeta(&self) -> u64 {
        self.zeta
    }

    /// Whether 2n | q−1 holds.
    pub fn has_strict_parity(&self) -> bool {
        (self.fq.q - 1) % (2 * self.n) == 0
    }

    /// Interpret a field element as an element of μ_n(F_q).
    pub fn to_mu(&self, x: u64) -> Result<MuElem, SymbolError> {
        self.dlog[(x % self.fq.q) as usize]
            .map(MuElem)
            .ok_or(SymbolError::NotARootOfUnity)
    }

    /// ε: μ_n(F_q) → C*.
    pub fn eval(&self, m: MuElem) -> Complex64 {
        let angle = 2.0 * PI * (m.0 % self.n) as f64 / self.n as f64;
        Complex64::new(angle.cos(), angle.sin())
    }

    pub fn mu_mul(&self, a: MuElem, b: MuElem) -> MuElem {
        MuElem((a.0 + b.0) % self.n)
    }

    pub fn mu_pow(&self, a: MuElem, e: i64) -> MuElem {
        let n = self.n as i64;
        MuElem(((a.0 as i64 * e).rem_euclid(n)) as u64)
    }

    pub fn mu_inv(&self, a: MuElem) -> MuElem {
        MuElem((self.n - a.0 % self.n) % self.n)
    }
}

/// Everything below lives in a context (field, n, embedding).
pub struct SymbolContext {
    pub emb: MuEmbedding,
}

impl SymbolContext {
    pub fn new(q: u64, n: u64, generator: Option<u64>) -> Result<SymbolContext, FieldError> {
        Ok(SymbolContext { emb: MuEmbedding::new(q, n, generator)? })
    }

    pub fn q(&self) -> u64 {
        self.emb.q()
    }

    pub fn n(&self) -> u64 {
        self.emb.n()
    }

    fn fq(&self) -> Fq {
        Fq { q: self.q() }
    }

    /// χ_ν applied to a unit of the residue field at a finite place:
    /// u^{(q_ν−1)/n} reduced mod π, which is a constant in μ_n(F_q).
    fn chi_finite(&self, u: &FqPoly, pi: &FqPoly) -> Result<MuElem, SymbolError> {
        let q_nu = self.q().pow(pi.degree() as u32);
        let value = u.pow_mod((q_nu - 1) / self.n(), pi);
        if value.is_zero() || value.degree() > 0 {
            return Err(SymbolError::NotARootOfUnity);
        }
        self.emb.to_mu(value.leading())
    }

    /// χ_∞ on F_q^×.
    fn chi_infinite(&self, u: u64) -> Result<MuElem, SymbolError> {
        let value = self.fq().pow(u, (self.q() - 1) / self.n());
        self.emb.to_mu(value)
    }

    /// The n-th power-residue symbol (x / P) at a finite place, defined for
    /// x coprime to π_P: x^{(q_P−1)/n} mod π_P ∈ μ_n(F_q).
    pub fn power_residue(&self, x: &FqPoly, pi: &FqPoly) -> Result<MuElem, SymbolError> {
        if x.is_zero() {
            return Err(SymbolError::ZeroArgument);
        }
        if !x.gcd(pi).is_one() {
            return Err(SymbolError::NotCoprime);
        }
        self.chi_finite(x, pi)
    }

    /// The S-power-residue symbol (x / a)_S = ∏_{ν | a} (x, a)_ν, with the
    /// zero marker when gcd(x, a) ≠ 1.
    pub fn residue_symbol_s(&self, x: &FqPoly, a: &FqPoly) -> Result<SymbolValue, SymbolError> {
        if x.is_zero() || a.is_zero() {
            return Err(SymbolError::ZeroArgument);
        }
        if !x.gcd(a).is_one() {
            return Ok(SymbolValue::Zero);
        }
        let (_, factors) = crate::fq::factorize(a);
        let mut acc = MuElem::ONE;
        for (pi, _) in factors {
            let local = self.hilbert(x, a, &Place::Finite(pi))?;
            acc = self.emb.mu_mul(acc, local);
        }
        Ok(SymbolValue::Mu(acc))
    }

    /// The tame Hilbert symbol (x, y)_ν for nonzero polynomials.
    pub fn hilbert(&self, x: &FqPoly, y: &FqPoly, place: &Place) -> Result<MuElem, SymbolError> {
        if x.is_zero() || y.is_zero() {
            return Err(SymbolError::ZeroArgument);
        }
        match place {
            Place::Finite(pi) => {
                let a = x.ord_at(pi) as i64;
                let b = y.ord_at(pi) as i64;
                let mut u = x.clone();
                let mut w = y.clone();
                for _ in 0..a {
                    u = u.divrem(pi).0;
                }
                for _ in 0..b {
                    w = w.divrem(pi).0;
                }
                // (−1)^{ab}·u^b·w^{−a} in κ(ν).
                let q_nu = self.q().pow(pi.degree() as u32);
                let exp_b = (b as i128).rem_euclid((q_nu - 1) as i128) as u64;
                let exp_a = ((-a) as i128).rem_euclid((q_nu - 1) as i128) as u64;
                let mut val = u.pow_mod(exp_b, pi).mul(&w.pow_mod(exp_a, pi)).rem(pi);
                if (a * b) % 2 != 0 {
                    val = val.scale(self.fq().neg(1));
                }
                self.chi_finite(&val, pi)
            }
            Place::Infinite => {
                // ord_∞ f = −deg f; the residue of the unit part of f is its
                // leading coefficient.
                let a = -(x.degree() as i64);
                let b = -(y.degree() as i64);
                let f = self.fq();
                let qm1 = (self.q() - 1) as i128;
                let ub = f.pow(x.leading(), (b as i128).rem_euclid(qm1) as u64);
                let wa = f.pow(y.leading(), ((-a) as i128).rem_euclid(qm1) as u64);
                let mut val = f.mul(ub, wa);
                if (a * b) % 2 != 0 {
                    val = f.mul(val, f.neg(1));
                }
                self.chi_infinite(val)
            }
        }
    }

    /// (x, y)_S = (x, y)_∞ for S = {∞}.
    pub fn hilbert_s(&self, x: &FqPoly, y: &FqPoly) -> Result<MuElem, SymbolError> {
        self.hilbert(x, y, &Place::Infinite)
    }

    /// The local Gauss sum 𝐠_k at a place: the unit-group character sum
    ///
    ///   𝐠_k = Σ_{u ∈ κ(ν)^×} ε((u, π_ν)_ν)^k · ψ_ν(π_ν^{−1} u^{−1}),
    ///
    /// with ψ_ν the unramified character x ↦ e^{2πi·Tr(x)/q}.
    pub fn gauss_sum(&self, k: i64, place: &Place) -> Complex64 {
        let pi = match place {
            Place::Finite(pi) => pi,
            Place::Infinite => panic!("Gauss sums are attached to finite places"),
        };
        let d = pi.degree();
        let q = self.q();
        let q_nu = q.pow(d as u32);
        debug_assert!((q_nu - 1) % self.n() == 0);
        let mut acc = Complex64::new(0.0, 0.0);
        for u in residue_units(q, d) {
            // (u, π)_ν = χ_ν(u) since ord u = 0, ord π = 1.
            let chi = self.chi_finite(&u, pi).expect("unit has a symbol");
            let inv = u.inv_mod(pi);
            let tr = self.trace(&inv, pi);
            let psi = Complex64::from_polar(1.0, 2.0 * PI * tr as f64 / q as f64);
            acc += self.emb.eval(self.emb.mu_pow(chi, k)) * psi;
        }
        acc
    }

    /// The table k ↦ 𝐠_k for k = 0, …, n−1.
    pub fn gauss_table(&self, place: &Place) -> Vec<Complex64> {
        (0..self.n() as i64).map(|k| self.gauss_sum(k, place)).collect()
    }

    /// The unnormalized character sum G(k, b) for b ≥ 0: the ψ-factor is
    /// trivial on integral arguments, leaving Σ_u ε((u,π))^k, which is
    /// q_ν − 1 when n | k and 0 otherwise.
    pub fn gauss_g_nonnegative(&self, k: i64, b: i64, place: &Place) -> Complex64 {
        assert!(b >= 0, "the ψ-factor is only trivial for b ≥ 0");
        let pi = match place {
            Place::Finite(pi) => pi,
            Place::Infinite => panic!("Gauss sums are attached to finite places"),
        };
        let mut acc = Complex64::new(0.0, 0.0);
        for u in residue_units(self.q(), pi.degree()) {
            let chi = self.chi_finite(&u, pi).expect("unit has a symbol");
            acc += self.emb.eval(self.emb.mu_pow(chi, k));
        }
        acc
    }

    /// Tr_{κ(ν)/F_q}(x) = Σ_{i<d} x^{q^i} mod π, as an element of F_q.
    fn trace(&self, x: &FqPoly, pi: &FqPoly) -> u64 {
        let d = pi.degree();
        let q = self.q();
        let mut acc = FqPoly::zero(q);
        let mut frob = x.rem(pi);
        for _ in 0..d {
            acc = acc.add(&frob).rem(pi);
            frob = frob.pow_mod(q, pi);
        }
        assert!(acc.is_zero() || acc.degree() == 0, "trace must be a constant");
        acc.leading()
    }

    /// Deterministic list of places of residue degree ≤ max_degree.
    pub fn finite_places(&self, max_degree: usize) -> Vec<Place> {
        let mut out = Vec::new();
        for d in 1..=max_degree {
            for pi in irreducibles(self.q(), d) {
                out.push(Place::Finite(pi));
            }
        }
        out
    }
}

/// All nonzero residues mod a degree-d place: polynomials of degree < d.
fn residue_units(q: u64, d: usize) -> Vec<FqPoly> {
    let mut out = Vec::with_capacity(q.pow(d as u32) as usize - 1);
    let mut coeffs = vec![0u64; d];
    loop {
        if coeffs.iter().any(|&c| c != 0) {
            out.push(FqPoly::new(q, coeffs.clone()));
        }
        let mut i = 0usize;
        loop {
            if i == d {
                return out;
            }
            coeffs[i] += 1;
            if coeffs[i] < q {
                break;
            }
            coeffs[i] = 0;
            i += 1;
        }
    }
}
