//! Arithmetic of F_q[t] for prime q: polynomial ring operations, residue
//! fields F_q[t]/(π), irreducible enumeration and factorization. Everything
//! is exact modular arithmetic on u64 coefficients.

use std::fmt;

/// The prime field F_q.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Fq {
    pub q: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FieldError {
    NotPrime(u64),
    BadCoverDegree { q: u64, n: u64 },
    NotAGenerator(u64),
}

impl fmt::Display for FieldError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldError::NotPrime(q) => write!(f, "q = {q} is not prime"),
            FieldError::BadCoverDegree { q, n } => {
                write!(f, "2n must divide q−1: got q = {q}, n = {n}")
            }
            FieldError::NotAGenerator(g) => write!(f, "{g} does not generate F_q^×"),
        }
    }
}

impl std::error::Error for FieldError {}

fn is_prime(q: u64) -> bool {
    if q < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= q {
        if q % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

impl Fq {
    pub fn new(q: u64) -> Result<Fq, FieldError> {
        if is_prime(q) {
            Ok(Fq { q })
        } else {
            Err(FieldError::NotPrime(q))
        }
    }

    pub fn add(&self, a: u64, b: u64) -> u64 {
        (a + b) % self.q
    }

    pub fn sub(&self, a: u64, b: u64) -> u64 {
        (a + self.q - b % self.q) % self.q
    }

    pub fn mul(&self, a: u64, b: u64) -> u64 {
        a * b % self.q
    }

    pub fn neg(&self, a: u64) -> u64 {
        (self.q - a % self.q) % self.q
    }

    pub fn pow(&self, mut a: u64, mut e: u64) -> u64 {
        let mut r = 1u64;
        a %= self.q;
        while e > 0 {
            if e & 1 == 1 {
                r = self.mul(r, a);
            }
            a = self.mul(a, a);
            e >>= 1;
        }
        r
    }

    pub fn inv(&self, a: u64) -> u64 {
        assert!(a % self.q != 0, "division by zero in F_q");
        self.pow(a, self.q - 2)
    }

    /// The least primitive root of F_q^×.
    pub fn primitive_root(&self) -> u64 {
        if self.q == 2 {
            return 1;
        }
        let order = self.q - 1;
        let mut factors = Vec::new();
        let mut m = order;
        let mut d = 2;
        while d * d <= m {
            if m % d == 0 {
                factors.push(d);
                while m % d == 0 {
                    m /= d;
                }
            }
            d += 1;
        }
        if m > 1 {
            factors.push(m);
        }
        'outer: for g in 2..self.q {
            for &p in &factors {
                if self.pow(g, order / p) == 1 {
                    continue 'outer;
                }
            }
            return g;
        }
        unreachable!("every prime field has a primitive root")
    }

    pub fn is_generator(&self, g: u64) -> bool {
        if g % self.q == 0 {
            return false;
        }
        let order = self.q - 1;
        let mut seen = 1u64;
        let mut x = g % self.q;
        while x != 1 {
            x = self.mul(x, g);
            seen += 1;
            if seen > order {
                return false;
            }
        }
        seen == order
    }
}

/// A polynomial over F_q, little-endian coefficients, no trailing zeros.
/// The zero polynomial has an empty coefficient vector.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FqPoly {
    pub q: u64,
    pub coeffs: Vec<u64>,
}

impl FqPoly {
    pub fn new(q: u64, mut coeffs: Vec<u64>) -> FqPoly {
        for c in coeffs.iter_mut() {
            *c %= q;
        }
        while coeffs.last() == Some(&0) {
            coeffs.pop();
        }
        FqPoly { q, coeffs }
    }

    pub fn zero(q: u64) -> FqPoly {
        FqPoly { q, coeffs: Vec::new() }
    }

    pub fn one(q: u64) -> FqPoly {
        FqPoly::constant(q, 1)
    }

    pub fn constant(q: u64, c: u64) -> FqPoly {
        FqPoly::new(q, vec![c])
    }

    /// The variable t.
    pub fn t(q: u64) -> FqPoly {
        FqPoly::new(q, vec![0, 1])
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.coeffs == [1]
    }

    /// Degree; 0 for constants including the zero polynomial (callers check
    /// `is_zero` where the distinction matters).
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn leading(&self) -> u64 {
        *self.coeffs.last().unwrap_or(&0)
    }

    pub fn is_monic(&self) -> bool {
        self.leading() == 1
    }

    pub fn is_unit(&self) -> bool {
        !self.is_zero() && self.degree() == 0
    }

    fn field(&self) -> Fq {
        Fq { q: self.q }
    }

    pub fn add(&self, other: &FqPoly) -> FqPoly {
        let f = self.field();
        let len = self.coeffs.len().max(other.coeffs.len());
        let mut out = vec![0u64; len];
        for (i, o) in out.iter_mut().enumerate() {
            let a = self.coeffs.get(i).copied().unwrap_or(0);
            let b = other.coeffs.get(i).copied().unwrap_or(0);
            *o = f.add(a, b);
        }
        FqPoly::new(self.q, out)
    }

    pub fn sub(&self, other: &FqPoly) -> FqPoly {
        let f = self.field();
        let len = self.coeffs.len().max(other.coeffs.len());
        let mut out = vec![0u64; len];
        for (i, o) in out.iter_mut().enumerate() {
            let a = self.coeffs.get(i).copied().unwrap_or(0);
            let b = other.coeffs.get(i).copied().unwrap_or(0);
            *o = f.sub(a, b);
        }
        FqPoly::new(self.q, out)
    }

    pub fn mul(&self, other: &FqPoly) -> FqPoly {
        if self.is_zero() || other.is_zero() {
            return FqPoly::zero(self.q);
        }
        let f = self.field();
        let mut out = vec![0u64; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] = f.add(out[i + j], f.mul(a, b));
            }
        }
        FqPoly::new(self.q, out)
    }

    pub fn scale(&self, c: u64) -> FqPoly {
        let f = self.field();
        FqPoly::new(self.q, self.coeffs.iter().map(|&a| f.mul(a, c)).collect())
    }

    /// Quotient and remainder by a nonzero divisor.
    pub fn divrem(&self, d: &FqPoly) -> (FqPoly, FqPoly) {
        assert!(!d.is_zero(), "division by the zero polynomial");
        if self.is_zero() || self.coeffs.len() < d.coeffs.len() {
            return (FqPoly::zero(self.q), self.clone());
        }
        let f = self.field();
        let mut rem = self.coeffs.clone();
        let dd = d.coeffs.len() - 1;
        let inv_lead = f.inv(d.leading());
        let mut quot = vec![0u64; rem.len() - dd];
        while rem.len() > dd {
            let k = rem.len() - 1 - dd;
            let c = f.mul(*rem.last().unwrap(), inv_lead);
            if c != 0 {
                quot[k] = c;
                for (i, &dc) in d.coeffs.iter().enumerate() {
                    rem[k + i] = f.sub(rem[k + i], f.mul(c, dc));
                }
            }
            rem.pop();
            while rem.last() == Some(&0) {
                rem.pop();
            }
        }
        (FqPoly::new(self.q, quot), FqPoly::new(self.q, rem))
    }

    pub fn rem(&self, d: &FqPoly) -> FqPoly {
        self.divrem(d).1
    }

    pub fn gcd(&self, other: &FqPoly) -> FqPoly {
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let r = a.rem(&b);
            a = b;
            b = r;
        }
        if a.is_zero() {
            a
        } else {
            a.monic()
        }
    }

    pub fn monic(&self) -> FqPoly {
        if self.is_zero() {
            return self.clone();
        }
        self.scale(self.field().inv(self.leading()))
    }

    pub fn eval(&self, x: u64) -> u64 {
        let f = self.field();
        let mut acc = 0u64;
        for &c in self.coeffs.iter().rev() {
            acc = f.add(f.mul(acc, x), c);
        }
        acc
    }

    /// self^e mod m.
    pub fn pow_mod(&self, mut e: u64, m: &FqPoly) -> FqPoly {
        let mut base = self.rem(m);
        let mut acc = FqPoly::one(self.q);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base).rem(m);
            }
            base = base.mul(&base).rem(m);
            e >>= 1;
        }
        acc
    }

    /// Inverse mod m, for self coprime to m.
    pub fn inv_mod(&self, m: &FqPoly) -> FqPoly {
        let f = self.field();
        let (mut r0, mut r1) = (m.clone(), self.rem(m));
        let (mut s0, mut s1) = (FqPoly::zero(self.q), FqPoly::one(self.q));
        while !r1.is_zero() {
            let (qt, r2) = r0.divrem(&r1);
            let s2 = s0.sub(&qt.mul(&s1));
            r0 = r1;
            r1 = r2;
            s0 = s1;
            s1 = s2;
        }
        assert!(r0.is_unit(), "not invertible modulo m");
        s0.scale(f.inv(r0.leading())).rem(m)
    }

    /// Order of π in self: the largest k with π^k | self.
    pub fn ord_at(&self, pi: &FqPoly) -> u32 {
        assert!(!self.is_zero());
        let mut k = 0u32;
        let mut cur = self.clone();
        loop {
            let (qt, r) = cur.divrem(pi);
            if r.is_zero() {
                k += 1;
                cur = qt;
            } else {
                return k;
            }
        }
    }

    /// Parse expressions like "t^2+3*t+5", "t+1", "2", "t^3-1".
    pub fn parse(s: &str, q: u64) -> Result<FqPoly, PolyParseError> {
        let cleaned: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if cleaned.is_empty() {
            return Err(PolyParseError(s.to_string()));
        }
        let mut acc = FqPoly::zero(q);
        let mut term = String::new();
        let mut sign = 1i64;
        let mut started = false;
        for c in cleaned.chars() {
            match c {
                '+' | '-' if started => {
                    let t = parse_term(&term, q).ok_or_else(|| PolyParseError(s.to_string()))?;
                    acc = if sign >= 0 { acc.add(&t) } else { acc.sub(&t) };
                    term.clear();
                    sign = if c == '-' { -1 } else { 1 };
                }
                '-' => {
                    sign = -1;
                    started = true;
                }
                _ => {
                    term.push(c);
                    started = true;
                }
            }
        }
        let t = parse_term(&term, q).ok_or_else(|| PolyParseError(s.to_string()))?;
        Ok(if sign >= 0 { acc.add(&t) } else { acc.sub(&t) })
    }
}

fn parse_term(term: &str, q: u64) -> Option<FqPoly> {
    // [coeff][*][t[^exp]]
    if term.is_empty() {
        return None;
    }
    let (coeff_str, var_part) = match term.find('t') {
        Some(pos) => (&term[..pos], &term[pos..]),
        None => (term, ""),
    };
    let coeff_str = coeff_str.trim_end_matches('*');
    let coeff: u64 = if coeff_str.is_empty() {
        1
    } else {
        coeff_str.parse().ok()?
    };
    let exp: usize = if var_part.is_empty() {
        0
    } else if var_part == "t" {
        1
    } else {
        var_part.strip_prefix("t^")?.parse().ok()?
    };
    let mut coeffs = vec![0u64; exp + 1];
    coeffs[exp] = coeff % q;
    Some(FqPoly::new(q, coeffs))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolyParseError(pub String);

impl fmt::Display for PolyParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "cannot parse polynomial: {}", self.0)
    }
}

impl std::error::Error for PolyParseError {}

impl fmt::Display for FqPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, &c) in self.coeffs.iter().enumerate().rev() {
            if c == 0 {
                continue;
            }
            if !first {
                write!(f, "+")?;
            }
            first = false;
            match (i, c) {
                (0, _) => write!(f, "{c}")?,
                (1, 1) => write!(f, "t")?,
                (1, _) => write!(f, "{c}*t")?,
                (_, 1) => write!(f, "t^{i}")?,
                (_, _) => write!(f, "{c}*t^{i}")?,
            }
        }
        Ok(())
    }
}

/// All monic polynomials of exact degree d, lexicographic in
/// (c_{d−1},…,c_1,c_0) with c_0 varying fastest.
pub fn monic_polys(q: u64, d: usize) -> Vec<FqPoly> {
    let mut out = Vec::with_capacity((q as usize).pow(d as u32));
    let mut low = vec![0u64; d];
    loop {
        let mut coeffs = low.clone();
        coeffs.push(1);
        out.push(FqPoly::new(q, coeffs));
        let mut i = 0usize;
        loop {
            if i == d {
                return out;
            }
            low[i] += 1;
            if low[i] < q {
                break;
            }
            low[i] = 0;
            i += 1;
        }
    }
}

/// Monic irreducibles of exact degree d, deterministic order.
pub fn irreducibles(q: u64, d: usize) -> Vec<FqPoly> {
    assert!(d >= 1);
    let mut known: Vec<FqPoly> = Vec::new();
    for deg in 1..=d {
        let mut this_degree = Vec::new();
        for p in monic_polys(q, deg) {
            let irreducible = known
                .iter()
                .filter(|f| f.degree() <= deg / 2)
                .all(|f| !p.rem(f).is_zero());
            if irreducible {
                this_degree.push(p);
            }
        }
        known.extend(this_degree);
    }
    known.into_iter().filter(|p| p.degree() == d).collect()
}

/// Factor a nonzero polynomial into monic irreducibles with multiplicity,
/// plus the leading unit. Trial division in degree order.
pub fn factorize(p: &FqPoly) -> (u64, Vec<(FqPoly, u32)>) {
    assert!(!p.is_zero());
    let unit = p.leading();
    let mut rest = p.monic();
    let mut factors = Vec::new();
    let mut d = 1usize;
    while !rest.is_unit() {
        if d > rest.degree() / 2 {
            factors.push((rest.clone(), 1));
            break;
        }
        for pi in irreducibles(p.q, d) {
            let mut mult = 0u32;
            loop {
                let (qt, r) = rest.divrem(&pi);
                if r.is_zero() {
                    mult += 1;
                    rest = qt;
                } else {
                    break;
                }
            }
            if mult > 0 {
                factors.push((pi, mult));
            }
        }
        d += 1;
    }
    (unit, factors)
}
