//! Gluing local coefficient tables into global series coefficients over
//! F_q(t): the torus cocycle and its root-of-unity corrections D(C;ν), the
//! twisted-multiplicative glued coefficients, fiber bookkeeping for the
//! class map p_Z, truncated series assembly, and the local-global sub-sum
//! identity check.

use crate::cg::{casselman_shalika, h_coefficients, HTable};
use crate::fq::{factorize, FieldError, FqPoly};
use crate::metaplectic::Metaplectic;
use crate::symbols::{MuElem, Place, SymbolContext, SymbolError};
use num_complex::Complex64;
use std::collections::BTreeMap;
use std::fmt;

/// An r-tuple of monic polynomials with its factorization data cached.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TupleC {
    comps: Vec<FqPoly>,
    /// Per prime π: the exponent vector (ord_π C_1, …, ord_π C_r).
    fact: BTreeMap<FqPoly, Vec<u32>>,
}

impl TupleC {
    pub fn new(comps: Vec<FqPoly>) -> TupleC {
        assert!(!comps.is_empty());
        let mut fact: BTreeMap<FqPoly, Vec<u32>> = BTreeMap::new();
        let r = comps.len();
        for (i, c) in comps.iter().enumerate() {
            assert!(c.is_monic(), "tuple entries must be monic, got {c}");
            let (_, factors) = factorize(c);
            for (pi, m) in factors {
                fact.entry(pi).or_insert_with(|| vec![0; r])[i] = m;
            }
        }
        TupleC { comps, fact }
    }

    pub fn components(&self) -> &[FqPoly] {
        &self.comps
    }

    pub fn rank(&self) -> usize {
        self.comps.len()
    }

    /// The primes dividing some component.
    pub fn support(&self) -> impl Iterator<Item = &FqPoly> {
        self.fact.keys()
    }

    /// log_ν C = Σ_i ord_ν(C_i)·α_i∨ as a coweight vector.
    pub fn log_at(&self, pi: &FqPoly) -> Vec<i64> {
        match self.fact.get(pi) {
            Some(k) => k.iter().map(|&x| x as i64).collect(),
            None => vec![0; self.rank()],
        }
    }

    /// All (ν, exponent vector) pairs of the support.
    pub fn log_all(&self) -> impl Iterator<Item = (&FqPoly, &Vec<u32>)> {
        self.fact.iter()
    }

    /// Componentwise product (tuples need not be coprime).
    pub fn mul(&self, other: &TupleC) -> TupleC {
        TupleC::new(
            self.comps
                .iter()
                .zip(&other.comps)
                .map(|(a, b)| a.mul(b))
                .collect(),
        )
    }

    /// gcd(∏ C_i, ∏ C'_j) = 1.
    pub fn coprime_to(&self, other: &TupleC) -> bool {
        self.fact.keys().all(|pi| !other.fact.contains_key(pi))
    }

    /// The prime-power part C_ν = (π^{ord C_1}, …) at a place.
    pub fn local_part(&self, pi: &FqPoly) -> Vec<FqPoly> {
        let q = pi.q;
        self.log_at(pi)
            .iter()
            .map(|&k| {
                let mut p = FqPoly::one(q);
                for _ in 0..k {
                    p = p.mul(pi);
                }
                p
            })
            .collect()
    }

    /// The coprime-to-ν part C^ν = (C_i / π^{ord C_i}).
    pub fn coprime_part(&self, pi: &FqPoly) -> Vec<FqPoly> {
        self.comps
            .iter()
            .map(|c| {
                let mut p = c.clone();
                loop {
                    let (q, r) = p.divrem(pi);
                    if r.is_zero() {
                        p = q;
                    } else {
                        return p;
                    }
                }
            })
            .collect()
    }
}

impl fmt::Display for TupleC {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.comps.iter().map(|c| c.to_string()).collect();
        write!(f, "({})", parts.join(", "))
    }
}

/// A finitely supported vector of cosets Λ∨/Λ₀∨, one per finite place;
/// entries are canonical representatives and zero cosets are dropped.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct LambdaClassVector {
    entries: BTreeMap<FqPoly, Vec<i64>>,
}

impl LambdaClassVector {
    pub fn zero() -> LambdaClassVector {
        LambdaClassVector { entries: BTreeMap::new() }
    }

    pub fn from_entries(meta: &Metaplectic, entries: Vec<(FqPoly, Vec<i64>)>) -> LambdaClassVector {
        let mut out = BTreeMap::new();
        for (pi, v) in entries {
            let canon = meta.coset_canonical(&v);
            if canon.iter().any(|&c| c != 0) {
                out.insert(pi, canon);
            }
        }
        LambdaClassVector { entries: out }
    }

    pub fn class_at(&self, pi: &FqPoly, rank: usize) -> Vec<i64> {
        self.entries.get(pi).cloned().unwrap_or_else(|| vec![0; rank])
    }

    pub fn places(&self) -> impl Iterator<Item = &FqPoly> {
        self.entries.keys()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }
}

impl fmt::Display for LambdaClassVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.entries.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .entries
            .iter()
            .map(|(pi, v)| format!("{pi}: {v:?}"))
            .collect();
        write!(f, "{}", parts.join("; "))
    }
}

/// A glued global coefficient with its provenance.
#[derive(Clone, Debug)]
pub struct GluedCoefficient {
    pub value: Complex64,
    /// The root-of-unity correction D(C) as a ζ-exponent.
    pub d: MuElem,
    /// The contributing per-place tuples and their local table values.
    pub locals: Vec<(FqPoly, Vec<u32>, Complex64)>,
}

/// A specialized local coefficient table at residue degree d: the generic
/// table with v ↦ q^{−d} and g_k ↦ 𝐠_k over the degree-d residue field.
#[derive(Clone, Debug)]
pub struct LocalHTable {
    pub degree: usize,
    entries: BTreeMap<Vec<u32>, Complex64>,
}

impl LocalHTable {
    pub fn get(&self, k: &[u32]) -> Complex64 {
        self.entries.get(k).copied().unwrap_or(Complex64::new(0.0, 0.0))
    }

    pub fn entries(&self) -> impl Iterator<Item = (&Vec<u32>, &Complex64)> {
        self.entries.iter()
    }
}

/// Sparse polynomial in x_1, …, x_r (x_i = q^{−s_i}) with complex
/// coefficients; exponents are the per-coordinate degrees of tuples.
#[derive(Clone, Debug, PartialEq)]
pub struct XPoly {
    rank: usize,
    terms: BTreeMap<Vec<u32>, Complex64>,
}

impl XPoly {
    pub fn zero(rank: usize) -> XPoly {
        XPoly { rank, terms: BTreeMap::new() }
    }

    pub fn one(rank: usize) -> XPoly {
        let mut p = XPoly::zero(rank);
        p.add_term(vec![0; rank], Complex64::new(1.0, 0.0));
        p
    }

    pub fn add_term(&mut self, exp: Vec<u32>, c: Complex64) {
        if c.norm() == 0.0 {
            return;
        }
        *self.terms.entry(exp).or_insert(Complex64::new(0.0, 0.0)) += c;
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &Complex64)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, exp: &[u32]) -> Complex64 {
        self.terms.get(exp).copied().unwrap_or(Complex64::new(0.0, 0.0))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Product truncated to per-coordinate degree ≤ cap.
    pub fn mul_truncated(&self, other: &XPoly, cap: u32) -> XPoly {
        let mut out = XPoly::zero(self.rank);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &other.terms {
                let exp: Vec<u32> = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                if exp.iter().all(|&x| x <= cap) {
                    out.add_term(exp, c1 * c2);
                }
            }
        }
        out
    }

    pub fn scale(&self, c: Complex64) -> XPoly {
        XPoly {
            rank: self.rank,
            terms: self.terms.iter().map(|(e, v)| (e.clone(), v * c)).collect(),
        }
    }
}

#[derive(Clone, Debug)]
pub enum GlueError {
    Field(FieldError),
    Symbol(SymbolError),
    /// A degree beyond the precomputed table range was requested.
    DegreeOutOfRange { requested: usize, available: usize },
    Cs(String),
}

impl fmt::Display for GlueError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GlueError::Field(e) => write!(f, "{e}"),
            GlueError::Symbol(e) => write!(f, "{e}"),
            GlueError::DegreeOutOfRange { requested, available } => write!(
                f,
                "no local table for residue degree {requested} (built up to {available})"
            ),
            GlueError::Cs(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for GlueError {}

impl From<FieldError> for GlueError {
    fn from(e: FieldError) -> Self {
        GlueError::Field(e)
    }
}

impl From<SymbolError> for GlueError {
    fn from(e: SymbolError) -> Self {
        GlueError::Symbol(e)
    }
}

/// The assembled context for one series: root and metaplectic data, the
/// symbol machinery over F_q, the generic coefficient table, and the
/// specialized local tables per residue degree.
pub struct SeriesContext {
    meta: Metaplectic,
    sym: SymbolContext,
    htable: HTable,
    local: Vec<LocalHTable>,
}

impl SeriesContext {
    /// Build everything needed for places of residue degree ≤ max_degree.
    pub fn new(
        meta: Metaplectic,
        q: u64,
        generator: Option<u64>,
        max_degree: usize,
    ) -> Result<SeriesContext, GlueError> {
        let sym = SymbolContext::new(q, meta.n() as u64, generator)?;
        let cs0 = casselman_shalika(&meta, &vec![0; meta.rank()])
            .map_err(|e| GlueError::Cs(e.to_string()))?;
        let htable = h_coefficients(&cs0);
        let mut local = Vec::new();
        for d in 1..=max_degree.max(1) {
            // Tables depend on ν only through the residue degree; use the
            // first place of each degree.
            let pi = crate::fq::irreducibles(q, d)
                .into_iter()
                .next()
                .expect("irreducibles exist in every degree");
            let table = sym.gauss_table(&Place::Finite(pi));
            let v = (q as f64).powi(-(d as i32));
            let mut entries = BTreeMap::new();
            for (k, h) in htable.entries() {
                let value = h.eval(v, &table).expect("table covers all residues");
                entries.insert(k.clone(), value);
            }
            local.push(LocalHTable { degree: d, entries });
        }
        Ok(SeriesContext { meta, sym, htable, local })
    }

    pub fn from_parameters(
        ct: crate::cartan::CartanType,
        n: i64,
        q: u64,
        generator: Option<u64>,
        max_degree: usize,
    ) -> Result<SeriesContext, GlueError> {
        SeriesContext::new(Metaplectic::new(ct, n), q, generator, max_degree)
    }

    pub fn meta(&self) -> &Metaplectic {
        &self.meta
    }

    pub fn symbols(&self) -> &SymbolContext {
        &self.sym
    }

    pub fn htable(&self) -> &HTable {
        &self.htable
    }

    pub fn q(&self) -> u64 {
        self.sym.q()
    }

    pub fn rank(&self) -> usize {
        self.meta.rank()
    }

    pub fn local_table(&self, degree: usize) -> Result<&LocalHTable, GlueError> {
        self.local
            .get(degree - 1)
            .ok_or(GlueError::DegreeOutOfRange { requested: degree, available: self.local.len() })
    }

    /// The torus cocycle d(F, F′) = ∏_i (F_i, F_i′)^{−Q_i} ·
    /// ∏_{i<j} (F_i′, F_j)^{B_ij} at a place.
    pub fn cocycle_d(
        &self,
        f: &[FqPoly],
        fp: &[FqPoly],
        place: &Place,
    ) -> Result<MuElem, GlueError> {
        let r = self.rank();
        assert_eq!(f.len(), r);
        assert_eq!(fp.len(), r);
        let mut acc = MuElem::ONE;
        for i in 0..r {
            let s = self.sym.hilbert(&f[i], &fp[i], place)?;
            acc = self.sym.emb.mu_mul(acc, self.sym.emb.mu_pow(s, -self.meta.q_simple(i)));
        }
        for i in 0..r {
            for j in i + 1..r {
                let s = self.sym.hilbert(&fp[i], &f[j], place)?;
                acc = self
                    .sym
                    .emb
                    .mu_mul(acc, self.sym.emb.mu_pow(s, self.meta.b_simple(i, j)));
            }
        }
        Ok(acc)
    }

    /// D(C;ν) = d(C_ν, C^ν) at ν.
    pub fn d_local(&self, c: &TupleC, pi: &FqPoly) -> Result<MuElem, GlueError> {
        let place = Place::Finite(pi.clone());
        self.cocycle_d(&c.local_part(pi), &c.coprime_part(pi), &place)
    }

    /// D(C;ν) computed from the prime factorization instead: the double
    /// product ∏_i ∏_{ω≠ν} (C_{i,ν}, C_{i,ω})_ν^{−Q_i} ·
    /// ∏_{i<j} ∏_{ω≠ν} (C_{i,ω}, C_{j,ν})_ν^{B_ij}.
    pub fn d_local_expanded(&self, c: &TupleC, pi: &FqPoly) -> Result<MuElem, GlueError> {
        let r = self.rank();
        let place = Place::Finite(pi.clone());
        let c_nu = c.local_part(pi);
        let mut acc = MuElem::ONE;
        for omega in c.support() {
            if omega == pi {
                continue;
            }
            let c_omega = c.local_part(omega);
            for i in 0..r {
                let s = self.sym.hilbert(&c_nu[i], &c_omega[i], &place)?;
                acc = self
                    .sym
                    .emb
                    .mu_mul(acc, self.sym.emb.mu_pow(s, -self.meta.q_simple(i)));
            }
            for i in 0..r {
                for j in i + 1..r {
                    let s = self.sym.hilbert(&c_omega[i], &c_nu[j], &place)?;
                    acc = self
                        .sym
                        .emb
                        .mu_mul(acc, self.sym.emb.mu_pow(s, self.meta.b_simple(i, j)));
                }
            }
        }
        Ok(acc)
    }

    /// D(C) = ∏_ν D(C;ν).
    pub fn d_global(&self, c: &TupleC) -> Result<MuElem, GlueError> {
        let mut acc = MuElem::ONE;
        let support: Vec<FqPoly> = c.support().cloned().collect();
        for pi in &support {
            acc = self.sym.emb.mu_mul(acc, self.d_local(c, pi)?);
        }
        Ok(acc)
    }

    /// D(C) directly as the double product over ordered pairs of places.
    pub fn d_global_direct(&self, c: &TupleC) -> Result<MuElem, GlueError> {
        let r = self.rank();
        let support: Vec<FqPoly> = c.support().cloned().collect();
        let mut acc = MuElem::ONE;
        for nu in &support {
            let place = Place::Finite(nu.clone());
            let c_nu = c.local_part(nu);
            for omega in &support {
                if omega == nu {
                    continue;
                }
                let c_omega = c.local_part(omega);
                for i in 0..r {
                    let s = self.sym.hilbert(&c_nu[i], &c_omega[i], &place)?;
                    acc = self
                        .sym
                        .emb
                        .mu_mul(acc, self.sym.emb.mu_pow(s, -self.meta.q_simple(i)));
                }
                for i in 0..r {
                    for j in i + 1..r {
                        let s = self.sym.hilbert(&c_omega[i], &c_nu[j], &place)?;
                        acc = self
                            .sym
                            .emb
                            .mu_mul(acc, self.sym.emb.mu_pow(s, self.meta.b_simple(i, j)));
                    }
                }
            }
        }
        Ok(acc)
    }

    /// The glued coefficient H(C) = ε(D(C)) · ∏_ν Ĥ_ν(ord_ν C_1, …); zero
    /// as soon as a local exponent tuple leaves the support of CS(0).
    pub fn glue_h(&self, c: &TupleC) -> Result<GluedCoefficient, GlueError> {
        let mut locals = Vec::new();
        let mut product = Complex64::new(1.0, 0.0);
        let mut vanished = false;
        for (pi, k) in c.log_all() {
            let table = self.local_table(pi.degree())?;
            let value = table.get(k);
            if !self.htable.contains(k) {
                vanished = true;
            }
            locals.push((pi.clone(), k.clone(), value));
            product *= value;
        }
        let d = if vanished { MuElem::ONE } else { self.d_global(c)? };
        let value = if vanished {
            Complex64::new(0.0, 0.0)
        } else {
            self.sym.emb.eval(d) * product
        };
        Ok(GluedCoefficient { value, d, locals })
    }

    /// The p_Z image of a tuple: the per-place classes −log_ν C mod Λ₀∨.
    pub fn class_of(&self, c: &TupleC) -> LambdaClassVector {
        let entries: Vec<(FqPoly, Vec<i64>)> = c
            .log_all()
            .map(|(pi, k)| {
                let neg: Vec<i64> = k.iter().map(|&x| -(x as i64)).collect();
                (pi.clone(), neg)
            })
            .collect();
        LambdaClassVector::from_entries(&self.meta, entries)
    }

    /// Exponent tuples in the support of CS(0) that lie in the coset
    /// −class_ν + Λ₀∨ and fit the per-coordinate degree budget.
    fn class_section(&self, class_at: &[i64], degree: usize, deg_max: usize) -> Vec<Vec<u32>> {
        self.htable
            .support()
            .filter(|k| {
                let shifted: Vec<i64> =
                    k.iter().zip(class_at).map(|(&ki, &c)| ki as i64 + c).collect();
                self.meta.in_lambda0(&shifted)
                    && k.iter().all(|&ki| (ki as usize) * degree <= deg_max)
            })
            .cloned()
            .collect()
    }

    /// All tuples C in supp(Z) with p_Z(C) = class and deg C_i ≤ deg_max.
    pub fn fiber_enumerate(
        &self,
        class: &LambdaClassVector,
        deg_max: usize,
    ) -> Result<Vec<TupleC>, GlueError> {
        let r = self.rank();
        for pi in class.places() {
            if pi.degree() > deg_max {
                return Ok(Vec::new());
            }
        }
        let places: Vec<FqPoly> = self
            .sym
            .finite_places(deg_max)
            .into_iter()
            .map(|p| match p {
                Place::Finite(pi) => pi,
                Place::Infinite => unreachable!(),
            })
            .collect();
        // Per-place options: the class section at that place.
        let mut options: Vec<(FqPoly, Vec<Vec<u32>>)> = Vec::new();
        for pi in &places {
            let cls = class.class_at(pi, r);
            let section = self.class_section(&cls, pi.degree(), deg_max);
            if section.is_empty() {
                return Ok(Vec::new()); // the class has no representative here
            }
            // Skip places where only the zero tuple is possible and the
            // class is zero: they never contribute.
            let only_zero = section.len() == 1 && section[0].iter().all(|&k| k == 0);
            if !only_zero || cls.iter().any(|&c| c != 0) {
                options.push((pi.clone(), section));
            }
        }
        let mut out = Vec::new();
        let mut chosen: Vec<(FqPoly, Vec<u32>)> = Vec::new();
        let budget = vec![deg_max; r];
        self.enumerate_rec(&options, 0, &budget, &mut chosen, &mut out);
        Ok(out)
    }

    fn enumerate_rec(
        &self,
        options: &[(FqPoly, Vec<Vec<u32>>)],
        idx: usize,
        budget: &[usize],
        chosen: &mut Vec<(FqPoly, Vec<u32>)>,
        out: &mut Vec<TupleC>,
    ) {
        if idx == options.len() {
            out.push(self.assemble(chosen));
            return;
        }
        let (pi, section) = &options[idx];
        let d = pi.degree();
        for k in section {
            let fits = k
                .iter()
                .zip(budget)
                .all(|(&ki, &b)| (ki as usize) * d <= b);
            if !fits {
                continue;
            }
            let new_budget: Vec<usize> = budget
                .iter()
                .zip(k)
                .map(|(&b, &ki)| b - (ki as usize) * d)
                .collect();
            chosen.push((pi.clone(), k.clone()));
            self.enumerate_rec(options, idx + 1, &new_budget, chosen, out);
            chosen.pop();
        }
    }

    fn assemble(&self, chosen: &[(FqPoly, Vec<u32>)]) -> TupleC {
        let r = self.rank();
        let q = self.q();
        let mut comps = vec![FqPoly::one(q); r];
        for (pi, k) in chosen {
            for (i, &ki) in k.iter().enumerate() {
                for _ in 0..ki {
                    comps[i] = comps[i].mul(pi);
                }
            }
        }
        TupleC::new(comps)
    }

    /// The truncated series: Σ over all tuples with deg C_i ≤ deg_max of
    /// H(C)·∏ x_i^{deg C_i}, by direct enumeration of monic tuples.
    pub fn z_truncated(&self, deg_max: usize) -> Result<XPoly, GlueError> {
        let r = self.rank();
        let q = self.q();
        let mut polys: Vec<FqPoly> = Vec::new();
        for d in 0..=deg_max {
            polys.extend(crate::fq::monic_polys(q, d));
        }
        let mut acc = XPoly::zero(r);
        let mut indices = vec![0usize; r];
        loop {
            let comps: Vec<FqPoly> = indices.iter().map(|&i| polys[i].clone()).collect();
            let tuple = TupleC::new(comps);
            let glued = self.glue_h(&tuple)?;
            if glued.value.norm() > 0.0 {
                let exp: Vec<u32> = tuple.components().iter().map(|c| c.degree() as u32).collect();
                acc.add_term(exp, glued.value);
            }
            // Odometer.
            let mut i = 0;
            loop {
                if i == r {
                    return Ok(acc);
                }
                indices[i] += 1;
                if indices[i] < polys.len() {
                    break;
                }
                indices[i] = 0;
                i += 1;
            }
        }
    }

    /// The sub-sum Σ_{C ∈ fiber(class)} H(C)·∏ x_i^{deg C_i}, the glued
    /// side of the local-global identity.
    pub fn subsum_glued(
        &self,
        class: &LambdaClassVector,
        deg_max: usize,
    ) -> Result<XPoly, GlueError> {
        let mut acc = XPoly::zero(self.rank());
        for tuple in self.fiber_enumerate(class, deg_max)? {
            let glued = self.glue_h(&tuple)?;
            let exp: Vec<u32> = tuple.components().iter().map(|c| c.degree() as u32).collect();
            acc.add_term(exp, glued.value);
        }
        Ok(acc)
    }

    /// The Whittaker-side sub-sum: ε(D(class)) · ∏_ν Σ_{k ∈ section(ν)}
    /// Ĥ_ν(k) ∏_i x_i^{k_i·deg ν}, truncated per coordinate.
    pub fn subsum_whittaker(
        &self,
        class: &LambdaClassVector,
        deg_max: usize,
    ) -> Result<XPoly, GlueError> {
        let r = self.rank();
        for pi in class.places() {
            if pi.degree() > deg_max {
                return Ok(XPoly::zero(r));
            }
        }
        let places: Vec<FqPoly> = self
            .sym
            .finite_places(deg_max)
            .into_iter()
            .map(|p| match p {
                Place::Finite(pi) => pi,
                Place::Infinite => unreachable!(),
            })
            .collect();
        let mut acc = XPoly::one(r);
        let mut representative: Vec<(FqPoly, Vec<u32>)> = Vec::new();
        for pi in &places {
            let cls = class.class_at(pi, r);
            let section = self.class_section(&cls, pi.degree(), deg_max);
            if section.is_empty() {
                return Ok(XPoly::zero(r));
            }
            if cls.iter().any(|&c| c != 0) {
                // Deterministic fiber representative at a class place: the
                // lexicographically least section element.
                representative.push((pi.clone(), section[0].clone()));
            }
            let table = self.local_table(pi.degree())?;
            let mut p_nu = XPoly::zero(r);
            for k in &section {
                let exp: Vec<u32> = k.iter().map(|&ki| ki * pi.degree() as u32).collect();
                p_nu.add_term(exp, table.get(k));
            }
            acc = acc.mul_truncated(&p_nu, deg_max as u32);
        }
        let d_class = self.d_global(&self.assemble(&representative))?;
        Ok(acc.scale(self.sym.emb.eval(d_class)))
    }

    /// Coefficientwise comparison of the glued and Whittaker sub-sums.
    pub fn verify_subsum_identity(
        &self,
        class: &LambdaClassVector,
        deg_max: usize,
        rel_tol: f64,
    ) -> Result<SubsumReport, GlueError> {
        let lhs = self.subsum_whittaker(class, deg_max)?;
        let rhs = self.subsum_glued(class, deg_max)?;
        let mut exps: Vec<Vec<u32>> = lhs.terms().map(|(e, _)| e.clone()).collect();
        exps.extend(rhs.terms().map(|(e, _)| e.clone()));
        exps.sort();
        exps.dedup();
        let mut compared = 0usize;
        for e in exps {
            let a = lhs.coefficient(&e);
            let b = rhs.coefficient(&e);
            let denom = a.norm().max(1.0);
            if (a - b).norm() / denom > rel_tol {
                return Ok(SubsumReport {
                    ok: false,
                    compared,
                    adjoint_warning: !self.meta.adjoint_dual(),
                    failure: Some((e, a, b)),
                });
            }
            compared += 1;
        }
        Ok(SubsumReport {
            ok: true,
            compared,
            adjoint_warning: !self.meta.adjoint_dual(),
            failure: None,
        })
    }

    /// A twisted-multiplicative coefficient function built from arbitrary
    /// local data: H_f(C) = ε(∏_ν D(C;ν)) · ∏_ν f(ν, log_ν C). The local
    /// function must satisfy f(ν, 0) = 1.
    pub fn h_from_factorizable<F>(&self, f: F, c: &TupleC) -> Result<Complex64, GlueError>
    where
        F: Fn(&FqPoly, &[i64]) -> Complex64,
    {
        let mut product = Complex64::new(1.0, 0.0);
        for (pi, k) in c.log_all() {
            let log: Vec<i64> = k.iter().map(|&x| x as i64).collect();
            product *= f(pi, &log);
        }
        let d = self.d_global(c)?;
        Ok(self.sym.emb.eval(d) * product)
    }

    /// The twisted-multiplicativity correction for coprime tuples:
    /// ∏_i ε(C_i/C_i′)^{Q_i} ε(C_i′/C_i)^{Q_i} ·
    /// ∏_{i<j} ε(C_i/C_j′)^{B_ij} ε(C_i′/C_j)^{B_ij}.
    pub fn twist_factor(&self, c: &TupleC, cp: &TupleC) -> Result<Complex64, GlueError> {
        let r = self.rank();
        let mut acc = MuElem::ONE;
        let mut symbol = |x: &FqPoly, a: &FqPoly, e: i64| -> Result<(), GlueError> {
            match self.sym.residue_symbol_s(x, a)? {
                crate::symbols::SymbolValue::Mu(m) => {
                    acc = self.sym.emb.mu_mul(acc, self.sym.emb.mu_pow(m, e));
                    Ok(())
                }
                crate::symbols::SymbolValue::Zero => Err(GlueError::Symbol(SymbolError::NotCoprime)),
            }
        };
        for i in 0..r {
            let qi = self.meta.q_simple(i);
            symbol(&c.components()[i], &cp.components()[i], qi)?;
            symbol(&cp.components()[i], &c.components()[i], qi)?;
        }
        for i in 0..r {
            for j in i + 1..r {
                let b = self.meta.b_simple(i, j);
                symbol(&c.components()[i], &cp.components()[j], b)?;
                symbol(&cp.components()[i], &c.components()[j], b)?;
            }
        }
        Ok(self.sym.emb.eval(acc))
    }
}

/// Outcome of the sub-sum identity check.
#[derive(Clone, Debug)]
pub struct SubsumReport {
    pub ok: bool,
    pub compared: usize,
    /// Set when the metaplectic dual datum is not of adjoint type, the
    /// hypothesis under which the identity is asserted.
    pub adjoint_warning: bool,
    pub failure: Option<(Vec<u32>, Complex64, Complex64)>,
}

impl fmt::Display for SubsumReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.failure {
            None => write!(f, "ok ({} coefficients compared)", self.compared),
            Some((e, a, b)) => write!(
                f,
                "mismatch at x^{e:?}: whittaker {a}, glued {b} (after {} matches)",
                self.compared
            ),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cartan::CartanType;
    use rand::Rng;
    use rand::SeedableRng;

    fn series(ty: &str, n: i64, q: u64, max_degree: usize) -> SeriesContext {
        SeriesContext::from_parameters(ty.parse::<CartanType>().unwrap(), n, q, None, max_degree)
            .unwrap()
    }

    fn poly(s: &str, q: u64) -> FqPoly {
        FqPoly::parse(s, q).unwrap()
    }

    #[test]
    fn log_maps() {
        let q = 7;
        // A2-shaped tuple (t², t): log_t = 2α₁∨ + α₂∨; unit entries add 0.
        let c = TupleC::new(vec![poly("t^2", q), poly("t", q)]);
        assert_eq!(c.log_at(&poly("t", q)), vec![2, 1]);
        assert_eq!(c.log_at(&poly("t+1", q)), vec![0, 0]);
        let ones = TupleC::new(vec![FqPoly::one(q), FqPoly::one(q)]);
        assert!(ones.log_all().next().is_none());
    }

    #[test]
    fn single_prime_tuples_have_trivial_d() {
        let s = series("A2", 2, 7, 2);
        for c in [
            TupleC::new(vec![poly("t", 7), FqPoly::one(7)]),
            TupleC::new(vec![poly("t^2", 7), poly("t", 7)]),
            TupleC::new(vec![FqPoly::one(7), poly("t+3", 7)]),
        ] {
            assert_eq!(s.d_global(&c).unwrap(), MuElem::ONE);
            for pi in c.support() {
                assert_eq!(s.d_local(&c, pi).unwrap(), MuElem::ONE);
            }
        }
    }

    #[test]
    fn cocycle_trivial_on_units_and_lambda0_powers() {
        let s = series("A2", 2, 7, 1);
        let place = Place::Finite(poly("t", 7));
        // All units at the place: d = 1.
        let f = vec![poly("t+1", 7), poly("t+2", 7)];
        let fp = vec![poly("t+3", 7), poly("2", 7)];
        assert_eq!(s.cocycle_d(&f, &fp, &place).unwrap(), MuElem::ONE);
        // F′ of Λ₀∨ type: exponents divisible by n_i.
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(71);
        for _ in 0..10 {
            let a = poly("t+4", 7);
            let base: Vec<FqPoly> = (0..2)
                .map(|_| {
                    let d = rng.gen_range(0..2);
                    let mut p = poly("t+1", 7);
                    for _ in 0..d {
                        p = p.mul(&poly("t", 7));
                    }
                    p
                })
                .collect();
            let n1 = s.meta().n_simple(0) as usize;
            let n2 = s.meta().n_simple(1) as usize;
            let mut p1 = FqPoly::one(7);
            for _ in 0..n1 {
                p1 = p1.mul(&a);
            }
            let mut p2 = FqPoly::one(7);
            for _ in 0..(2 * n2) {
                p2 = p2.mul(&a);
            }
            let fp = vec![p1, p2];
            assert_eq!(s.cocycle_d(&base, &fp, &place).unwrap(), MuElem::ONE);
        }
    }

    #[test]
    fn cocycle_antisymmetry_rearranges() {
        // d(F,F′)·d(F′,F) only involves the B-form part, by the symbol
        // antisymmetry (a,b)(b,a) = 1 on the Q-part.
        let s = series("A2", 2, 7, 1);
        let place = Place::Finite(poly("t", 7));
        let f = vec![poly("t+1", 7), poly("t", 7)];
        let fp = vec![poly("t", 7), poly("t+5", 7)];
        let d1 = s.cocycle_d(&f, &fp, &place).unwrap();
        let d2 = s.cocycle_d(&fp, &f, &place).unwrap();
        // Oracle: expand both products directly.
        let emb = &s.symbols().emb;
        let mut oracle = MuElem::ONE;
        for i in 0..2 {
            for (x, y) in [(&f[i], &fp[i]), (&fp[i], &f[i])] {
                let sym = s.symbols().hilbert(x, y, &place).unwrap();
                oracle = emb.mu_mul(oracle, emb.mu_pow(sym, -s.meta().q_simple(i)));
            }
        }
        let b01 = s.meta().b_simple(0, 1);
        for (x, y) in [(&fp[0], &f[1]), (&f[0], &fp[1])] {
            let sym = s.symbols().hilbert(x, y, &place).unwrap();
            oracle = emb.mu_mul(oracle, emb.mu_pow(sym, b01));
        }
        assert_eq!(emb.mu_mul(d1, d2), oracle);
    }

    #[test]
    fn glue_examples() {
        // A1, n=3, q=7: H(1) = 1, H(t) = 𝐠₁ at the place (t).
        let s = series("A1", 3, 7, 1);
        let one = TupleC::new(vec![FqPoly::one(7)]);
        let h1 = s.glue_h(&one).unwrap();
        assert!((h1.value - Complex64::new(1.0, 0.0)).norm() < 1e-12);

        let t = TupleC::new(vec![poly("t", 7)]);
        let ht = s.glue_h(&t).unwrap();
        let g1 = s.symbols().gauss_table(&Place::Finite(poly("t", 7)))[1];
        assert!((ht.value - g1).norm() < 1e-12);
        // |H(C)| equals the product of the local magnitudes: |ε(D)| = 1.
        let product: f64 = ht.locals.iter().map(|(_, _, v)| v.norm()).product();
        assert!((ht.value.norm() - product).abs() < 1e-12);

        // Outside the support: H(t²) = 0 since supp CS(0) = {0, α∨}.
        let t2 = TupleC::new(vec![poly("t^2", 7)]);
        assert_eq!(s.glue_h(&t2).unwrap().value, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn specialized_cs_has_gauss_magnitudes() {
        // specialize(1 + v g₁ e^{−α∨}) at q = 7 gives 1 + 7⁻¹·𝐠₁·e^{−α∨}
        // with |𝐠₁| = √7.
        let s = series("A1", 3, 7, 1);
        let cs = casselman_shalika(s.meta(), &[0]).unwrap();
        let table = s.symbols().gauss_table(&Place::Finite(poly("t", 7)));
        let num = cs.specialize(1.0 / 7.0, &table).unwrap();
        assert!((num.coefficient(&[0]) - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        let c = num.coefficient(&[-1]);
        assert!((c - table[1] / 7.0).norm() < 1e-12);
        assert!((c.norm() - 7.0f64.sqrt() / 7.0).abs() < 1e-9);
    }

    #[test]
    fn twisted_multiplicativity_rank_one_instance() {
        // H(PQ)/[H(P)H(Q)] = ε(P/Q)ε(Q/P) for A1, P = t, Q = t+1.
        let s = series("A1", 3, 7, 1);
        let p = TupleC::new(vec![poly("t", 7)]);
        let qq = TupleC::new(vec![poly("t+1", 7)]);
        let pq = p.mul(&qq);
        let lhs = s.glue_h(&pq).unwrap().value;
        let rhs = s.glue_h(&p).unwrap().value * s.glue_h(&qq).unwrap().value
            * s.twist_factor(&p, &qq).unwrap();
        assert!((lhs - rhs).norm() / lhs.norm().max(1.0) < 1e-9);
    }

    #[test]
    fn twisted_multiplicativity_random_pairs() {
        let s = series("A2", 2, 7, 2);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(73);
        let mut checked = 0;
        while checked < 50 {
            let mk = |rng: &mut rand_chacha::ChaCha8Rng| {
                let d = rng.gen_range(0..=1usize);
                let mut coeffs: Vec<u64> = (0..d).map(|_| rng.gen_range(0..7)).collect();
                coeffs.push(1);
                FqPoly::new(7, coeffs)
            };
            let c = TupleC::new(vec![mk(&mut rng), mk(&mut rng)]);
            let cp = TupleC::new(vec![mk(&mut rng), mk(&mut rng)]);
            if !c.coprime_to(&cp) {
                continue;
            }
            checked += 1;
            let lhs = s.glue_h(&c.mul(&cp)).unwrap().value;
            let rhs = s.glue_h(&c).unwrap().value * s.glue_h(&cp).unwrap().value
                * s.twist_factor(&c, &cp).unwrap();
            assert!(
                (lhs - rhs).norm() / lhs.norm().max(1.0) < 1e-6,
                "twisted multiplicativity for {c} × {cp}"
            );
        }
    }

    #[test]
    fn d_routes_agree_exhaustively_degree_two() {
        let s = series("A2", 2, 7, 2);
        let mut polys: Vec<FqPoly> = Vec::new();
        for d in 0..=2 {
            polys.extend(crate::fq::monic_polys(7, d));
        }
        for a in &polys {
            for b in &polys {
                let c = TupleC::new(vec![a.clone(), b.clone()]);
                let global = s.d_global(&c).unwrap();
                let direct = s.d_global_direct(&c).unwrap();
                assert_eq!(global, direct, "D(C) routes at C = {c}");
                for pi in c.support() {
                    assert_eq!(
                        s.d_local(&c, pi).unwrap(),
                        s.d_local_expanded(&c, pi).unwrap(),
                        "D(C;ν) routes at C = {c}, ν = ({pi})"
                    );
                }
            }
        }
    }

    #[test]
    fn fiber_constancy_of_d() {
        // D(C;ν) and D(C) agree across all members of each fiber, deg ≤ 2.
        let s = series("A2", 2, 7, 2);
        let mut by_class: BTreeMap<String, Vec<TupleC>> = BTreeMap::new();
        let mut polys: Vec<FqPoly> = Vec::new();
        for d in 0..=2 {
            polys.extend(crate::fq::monic_polys(7, d));
        }
        for a in &polys {
            for b in &polys {
                let c = TupleC::new(vec![a.clone(), b.clone()]);
                // Only tuples inside supp(Z) index sub-sums.
                if c.log_all().any(|(_, k)| !s.htable().contains(k)) {
                    continue;
                }
                by_class.entry(s.class_of(&c).to_string()).or_default().push(c);
            }
        }
        for (_, tuples) in by_class {
            let d0 = s.d_global(&tuples[0]).unwrap();
            for c in &tuples {
                assert_eq!(s.d_global(c).unwrap(), d0);
            }
        }
    }

    #[test]
    fn fiber_enumeration_cases() {
        // Class 0, deg_max = 0 would be just (1,…,1); with deg_max = 1 the
        // A1 n=3 fiber at class −α∨ at (t) is exactly {(t)}.
        let s = series("A1", 3, 7, 1);
        let class = LambdaClassVector::from_entries(s.meta(), vec![(poly("t", 7), vec![-1])]);
        let fiber = s.fiber_enumerate(&class, 1).unwrap();
        assert_eq!(fiber.len(), 1);
        assert_eq!(fiber[0].components()[0], poly("t", 7));

        let zero_fiber = s.fiber_enumerate(&LambdaClassVector::zero(), 0).unwrap();
        assert_eq!(zero_fiber.len(), 1);
        assert!(zero_fiber[0].components()[0].is_one());

        // A class with no representative in the support: empty fiber.
        let bad = LambdaClassVector::from_entries(s.meta(), vec![(poly("t", 7), vec![-2])]);
        assert!(s.fiber_enumerate(&bad, 1).unwrap().is_empty());
    }

    #[test]
    fn z_truncated_small_cases() {
        // deg_max = 0: only the unit tuple, Z = 1.
        let s = series("A1", 3, 7, 1);
        let z0 = s.z_truncated(0).unwrap();
        assert_eq!(z0.terms().count(), 1);
        assert!((z0.coefficient(&[0]) - Complex64::new(1.0, 0.0)).norm() < 1e-12);

        // deg_max = 1: 1 + (Σ over the 7 degree-1 places of 𝐠₁)·x.
        let z1 = s.z_truncated(1).unwrap();
        let g1 = s.symbols().gauss_table(&Place::Finite(poly("t", 7)))[1];
        let expected = g1 * 7.0;
        assert!((z1.coefficient(&[1]) - expected).norm() / expected.norm() < 1e-9);
        // No coefficient outside the union of supports: x² term would need
        // H(π²) or two distinct primes (both zero here at deg 1).
        assert_eq!(z1.terms().count(), 2);
    }

    #[test]
    fn regrouping_matches_direct_series() {
        // Z equals the sum of the glued sub-sums over all classes.
        let s = series("A2", 2, 7, 2);
        let z = s.z_truncated(2).unwrap();
        let mut polys: Vec<FqPoly> = Vec::new();
        for d in 0..=2 {
            polys.extend(crate::fq::monic_polys(7, d));
        }
        let mut classes: Vec<LambdaClassVector> = Vec::new();
        for a in &polys {
            for b in &polys {
                let c = TupleC::new(vec![a.clone(), b.clone()]);
                if c.log_all().any(|(_, k)| !s.htable().contains(k)) {
                    continue;
                }
                let cls = s.class_of(&c);
                if !classes.contains(&cls) {
                    classes.push(cls);
                }
            }
        }
        let mut total = XPoly::zero(2);
        for cls in &classes {
            let sub = s.subsum_glued(cls, 2).unwrap();
            for (e, c) in sub.terms() {
                total.add_term(e.clone(), *c);
            }
        }
        let mut exps: Vec<Vec<u32>> = z.terms().map(|(e, _)| e.clone()).collect();
        exps.extend(total.terms().map(|(e, _)| e.clone()));
        exps.sort();
        exps.dedup();
        for e in exps {
            let a = z.coefficient(&e);
            let b = total.coefficient(&e);
            assert!(
                (a - b).norm() / a.norm().max(1.0) < 1e-9,
                "regrouped sum differs at {e:?}"
            );
        }
    }

    #[test]
    fn subsum_identity_a1() {
        let s = series("A1", 3, 7, 2);
        let zero = LambdaClassVector::zero();
        let report = s.verify_subsum_identity(&zero, 2, 1e-6).unwrap();
        assert!(report.ok, "{report}");
        assert!(!report.adjoint_warning);

        let class = LambdaClassVector::from_entries(s.meta(), vec![(poly("t", 7), vec![-1])]);
        let report = s.verify_subsum_identity(&class, 2, 1e-6).unwrap();
        assert!(report.ok, "{report}");
    }

    #[test]
    fn subsum_identity_a2_and_negative_control() {
        let s = series("A2", 2, 7, 2);
        let zero = LambdaClassVector::zero();
        let report = s.verify_subsum_identity(&zero, 2, 1e-6).unwrap();
        assert!(report.ok, "{report}");

        // A nonzero class supported at two places.
        let class = LambdaClassVector::from_entries(
            s.meta(),
            vec![(poly("t", 7), vec![-1, 0]), (poly("t+1", 7), vec![0, -1])],
        );
        let report = s.verify_subsum_identity(&class, 2, 1e-6).unwrap();
        assert!(report.ok, "{report}");

        // Dropping the D factor (corrupting its sign) breaks the identity.
        let lhs = s.subsum_whittaker(&class, 2).unwrap();
        let rhs = s.subsum_glued(&class, 2).unwrap();
        let rep = s.fiber_enumerate(&class, 2).unwrap()[0].clone();
        let d = s.d_global(&rep).unwrap();
        assert_ne!(d, MuElem::ONE, "the control class must have D ≠ 1");
        let corrupted = lhs.scale(s.symbols().emb.eval(s.symbols().emb.mu_inv(d)));
        let mut any_mismatch = false;
        for (e, c) in corrupted.terms() {
            if (c - rhs.coefficient(e)).norm() / c.norm().max(1.0) > 1e-6 {
                any_mismatch = true;
            }
        }
        assert!(any_mismatch, "flipping D must break the identity");
    }

    #[test]
    fn factorizable_functions() {
        let s = series("A2", 2, 7, 2);
        // The coset-0 indicator: H_f(C) = ε(D(C)) iff every log_ν C ∈ Λ₀∨.
        let indicator = |_: &FqPoly, log: &[i64]| -> Complex64 {
            if s.meta().in_lambda0(log) {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        };
        let c = TupleC::new(vec![poly("t^2", 7), poly("t^2", 7)]);
        let hf = s.h_from_factorizable(indicator, &c).unwrap();
        let d = s.d_global(&c).unwrap();
        assert!((hf - s.symbols().emb.eval(d)).norm() < 1e-12);
        let c2 = TupleC::new(vec![poly("t", 7), FqPoly::one(7)]);
        assert_eq!(s.h_from_factorizable(indicator, &c2).unwrap(), Complex64::new(0.0, 0.0));

        // Local H-tables recover glue_h.
        let from_tables = |pi: &FqPoly, log: &[i64]| -> Complex64 {
            let k: Vec<u32> = log.iter().map(|&x| x as u32).collect();
            s.local_table(pi.degree()).unwrap().get(&k)
        };
        let mut polys: Vec<FqPoly> = Vec::new();
        for d in 0..=2 {
            polys.extend(crate::fq::monic_polys(7, d));
        }
        for a in polys.iter().step_by(7) {
            for b in polys.iter().step_by(5) {
                let c = TupleC::new(vec![a.clone(), b.clone()]);
                let hf = s.h_from_factorizable(from_tables, &c).unwrap();
                let glued = s.glue_h(&c).unwrap().value;
                assert!((hf - glued).norm() / glued.norm().max(1.0) < 1e-9);
            }
        }
    }

    #[test]
    fn factorizable_is_twisted_multiplicative() {
        // An arbitrary local function with f(ν, 0) = 1 produces a twisted
        // multiplicative H_f.
        let s = series("A2", 2, 7, 2);
        let f = |pi: &FqPoly, log: &[i64]| -> Complex64 {
            if log.iter().all(|&x| x == 0) {
                Complex64::new(1.0, 0.0)
            } else {
                // Any deterministic nonzero value.
                let h = (pi.coeffs.iter().sum::<u64>() as f64 + 1.0)
                    * (log.iter().map(|&x| x.abs()).sum::<i64>() as f64 + 0.5);
                Complex64::new(h.cos(), h.sin())
            }
        };
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(79);
        let mut checked = 0;
        while checked < 30 {
            let mk = |rng: &mut rand_chacha::ChaCha8Rng| {
                let d = rng.gen_range(0..=1usize);
                let mut coeffs: Vec<u64> = (0..d).map(|_| rng.gen_range(0..7)).collect();
                coeffs.push(1);
                FqPoly::new(7, coeffs)
            };
            let c = TupleC::new(vec![mk(&mut rng), mk(&mut rng)]);
            let cp = TupleC::new(vec![mk(&mut rng), mk(&mut rng)]);
            if !c.coprime_to(&cp) {
                continue;
            }
            checked += 1;
            let lhs = s.h_from_factorizable(f, &c.mul(&cp)).unwrap();
            let rhs = s.h_from_factorizable(f, &c).unwrap()
                * s.h_from_factorizable(f, &cp).unwrap()
                * s.twist_factor(&c, &cp).unwrap();
            assert!((lhs - rhs).norm() / lhs.norm().max(1.0) < 1e-9);
        }
    }
}
