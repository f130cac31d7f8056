//! Metaplectic structure on a root datum: the normalized W-invariant
//! quadratic form Q, its polarization B, the cover degree n, the integers
//! n(α∨), the sublattice Λ₀∨, and the metaplectic dual datum.

use crate::cartan::{CartanType, RootDatum};

/// A root datum together with the degree-n metaplectic data derived from it.
#[derive(Clone, Debug)]
pub struct Metaplectic {
    datum: RootDatum,
    n: i64,
    /// Gram matrix of B on the simple coroots: gram[i][j] = B(α_i∨, α_j∨).
    gram: Vec<Vec<i64>>,
    /// n_i = n(α_i∨) for the simple coroots.
    n_simple: Vec<i64>,
    /// n(β∨) for each positive coroot, aligned with `datum.positive_coroots()`.
    n_positive: Vec<i64>,
    /// Lower-triangular (column-style Hermite) basis of Λ₀∨; also used to
    /// reduce coweights to canonical coset representatives.
    lambda0_hnf: Vec<Vec<i64>>,
    /// Index [Λ∨ : Λ₀∨].
    lambda0_index: i64,
    /// Whether {n_i α_i∨} spans Λ₀∨ (the dual datum is of adjoint type).
    adjoint_dual: bool,
}

impl Metaplectic {
    pub fn new(ct: CartanType, n: i64) -> Self {
        assert!(n >= 1, "cover degree must be positive");
        let datum = RootDatum::new(ct);
        let r = datum.rank();
        // B(α_i∨, α_j∨) = ⟨α_i, α_j∨⟩ Q(α_j∨); symmetry is a table sanity check.
        let mut gram = vec![vec![0i64; r]; r];
        for i in 0..r {
            for j in 0..r {
                gram[i][j] = datum.cartan(i, j) * datum.q_simple(j);
            }
        }
        for i in 0..r {
            for j in 0..r {
                assert_eq!(gram[i][j], gram[j][i], "B must be symmetric");
            }
        }
        let q_of = |v: &[i64]| -> i64 {
            let mut s = 0i64;
            for i in 0..r {
                for j in 0..r {
                    s += v[i] * gram[i][j] * v[j];
                }
            }
            debug_assert!(s % 2 == 0);
            s / 2
        };
        let n_simple: Vec<i64> = (0..r).map(|i| n / gcd(n, datum.q_simple(i))).collect();
        let n_positive: Vec<i64> = datum
            .positive_coroots()
            .iter()
            .map(|b| n / gcd(n, q_of(b)))
            .collect();

        let (raw_basis, lambda0_index) = congruence_kernel_lattice(&gram, n);
        let lambda0_hnf = hermite_lower_triangular(&raw_basis);
        let span_index: i64 = n_simple.iter().product();
        let adjoint_dual = span_index == lambda0_index;

        Metaplectic {
            datum,
            n,
            gram,
            n_simple,
            n_positive,
            lambda0_hnf,
            lambda0_index,
            adjoint_dual,
        }
    }

    pub fn datum(&self) -> &RootDatum {
        &self.datum
    }

    pub fn rank(&self) -> usize {
        self.datum.rank()
    }

    pub fn n(&self) -> i64 {
        self.n
    }

    /// Q(α_i∨).
    pub fn q_simple(&self, i: usize) -> i64 {
        self.datum.q_simple(i)
    }

    /// B(α_i∨, α_j∨).
    pub fn b_simple(&self, i: usize, j: usize) -> i64 {
        self.gram[i][j]
    }

    /// B(λ∨, μ∨) for coweights in coroot coordinates.
    pub fn b_form(&self, v: &[i64], w: &[i64]) -> i64 {
        let r = self.rank();
        let mut s = 0;
        for i in 0..r {
            for j in 0..r {
                s += v[i] * self.gram[i][j] * w[j];
            }
        }
        s
    }

    /// Q(λ∨) = B(λ∨, λ∨)/2.
    pub fn q_form(&self, v: &[i64]) -> i64 {
        self.b_form(v, v) / 2
    }

    /// n(α_i∨) = n / gcd(n, Q(α_i∨)).
    pub fn n_simple(&self, i: usize) -> i64 {
        self.n_simple[i]
    }

    /// ñα_i = n_i α_i∨ as a coweight vector.
    pub fn tilde_simple(&self, i: usize) -> Vec<i64> {
        let mut v = vec![0i64; self.rank()];
        v[i] = self.n_simple[i];
        v
    }

    /// The pairs (β∨, n(β∨)) over the positive coroots.
    pub fn positive_with_n(&self) -> impl Iterator<Item = (&Vec<i64>, i64)> {
        self.datum
            .positive_coroots()
            .iter()
            .zip(self.n_positive.iter().copied())
    }

    /// ñβ = n(β∨)·β∨ for each positive coroot.
    pub fn tilde_positive(&self) -> Vec<Vec<i64>> {
        self.positive_with_n()
            .map(|(b, nb)| b.iter().map(|&c| c * nb).collect())
            .collect()
    }

    /// Membership test for Λ₀∨: B(λ∨, α_i∨) ≡ 0 (mod n) for every i.
    pub fn in_lambda0(&self, v: &[i64]) -> bool {
        let r = self.rank();
        (0..r).all(|i| {
            let s: i64 = (0..r).map(|j| self.gram[i][j] * v[j]).sum();
            s.rem_euclid(self.n) == 0
        })
    }

    /// A basis of Λ₀∨ in simple-coroot coordinates (triangular form).
    pub fn lambda0_basis(&self) -> &[Vec<i64>] {
        &self.lambda0_hnf
    }

    /// The canonical representative of the coset v + Λ₀∨, reduced into the
    /// fundamental box of the triangular basis.
    pub fn coset_canonical(&self, v: &[i64]) -> Vec<i64> {
        let r = self.rank();
        let mut out = v.to_vec();
        for i in 0..r {
            let col = &self.lambda0_hnf[i];
            debug_assert!(col[i] > 0);
            let k = out[i].div_euclid(col[i]);
            if k != 0 {
                for (o, c) in out.iter_mut().zip(col) {
                    *o -= k * c;
                }
            }
        }
        debug_assert!(self.in_lambda0(
            &out.iter().zip(v).map(|(a, b)| a - b).collect::<Vec<_>>()
        ));
        out
    }

    /// Index [Λ∨ : Λ₀∨].
    pub fn lambda0_index(&self) -> i64 {
        self.lambda0_index
    }

    /// Whether the metaplectic dual datum is of adjoint type, i.e. whether
    /// {n_i α_i∨} spans Λ₀∨.
    pub fn adjoint_dual(&self) -> bool {
        self.adjoint_dual
    }

    /// Cartan matrix of the dual datum: ⟨n_i⁻¹α_i, n_j α_j∨⟩ = (n_j/n_i)·⟨α_i, α_j∨⟩.
    /// Entries are integers for every finite type.
    pub fn dual_cartan(&self) -> Vec<Vec<i64>> {
        let r = self.rank();
        let mut m = vec![vec![0i64; r]; r];
        for i in 0..r {
            for j in 0..r {
                let num = self.n_simple[j] * self.datum.cartan(j, i);
                assert!(num % self.n_simple[i] == 0, "dual Cartan entry not integral");
                m[i][j] = num / self.n_simple[i];
            }
        }
        m
    }
}

fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Basis and index of the lattice {m ∈ Z^r : G·m ≡ 0 (mod n)}, computed via
/// the Smith normal form of G. If G = U S V⁻¹ with S = diag(s_i), then the
/// lattice is spanned by d_i·(column i of V) with d_i = n/gcd(n, s_i).
fn congruence_kernel_lattice(gram: &[Vec<i64>], n: i64) -> (Vec<Vec<i64>>, i64) {
    let r = gram.len();
    let (s, v) = smith_normal_form(gram);
    let mut basis = Vec::with_capacity(r);
    let mut index = 1i64;
    for i in 0..r {
        let d = n / gcd(n, s[i]);
        index *= d;
        let col: Vec<i64> = (0..r).map(|row| v[row][i] * d).collect();
        basis.push(col);
    }
    (basis, index)
}

/// Column-style Hermite reduction of a full-rank list of basis columns into
/// lower-triangular form with positive diagonal. Column operations only, so
/// the column span (the lattice) is unchanged.
fn hermite_lower_triangular(basis: &[Vec<i64>]) -> Vec<Vec<i64>> {
    let r = basis.len();
    let mut cols: Vec<Vec<i64>> = basis.to_vec();
    for row in 0..r {
        // Euclid across columns row..r−1 on entry `row`.
        loop {
            let mut piv: Option<usize> = None;
            for j in row..r {
                if cols[j][row] != 0
                    && piv.map_or(true, |p| cols[j][row].abs() < cols[p][row].abs())
                {
                    piv = Some(j);
                }
            }
            let p = piv.expect("basis has full rank");
            cols.swap(row, p);
            let mut done = true;
            for j in row + 1..r {
                let q = cols[j][row].div_euclid(cols[row][row]);
                if q != 0 {
                    for i in 0..r {
                        cols[j][i] -= q * cols[row][i];
                    }
                }
                if cols[j][row] != 0 {
                    done = false;
                }
            }
            if done {
                break;
            }
        }
        if cols[row][row] < 0 {
            for i in 0..r {
                cols[row][i] = -cols[row][i];
            }
        }
        // Clear entries above the diagonal in this row: reduce earlier
        // columns so the representative box is unambiguous.
        for j in 0..row {
            let q = cols[j][row].div_euclid(cols[row][row]);
            if q != 0 {
                for i in 0..r {
                    cols[j][i] -= q * cols[row][i];
                }
            }
        }
    }
    cols
}

/// Smith normal form over Z for a small square integer matrix. Returns the
/// diagonal entries and the right transform V with A·V ≡ U⁻¹·S, i.e. column
/// operations applied to A are mirrored on an identity matrix. Row
/// operations need not be tracked for the congruence-lattice computation.
fn smith_normal_form(a: &[Vec<i64>]) -> (Vec<i64>, Vec<Vec<i64>>) {
    let r = a.len();
    let mut m: Vec<Vec<i64>> = a.to_vec();
    let mut v = vec![vec![0i64; r]; r];
    for i in 0..r {
        v[i][i] = 1;
    }
    for t in 0..r {
        loop {
            // Find a pivot: the entry of smallest nonzero absolute value in
            // the remaining block.
            let mut pivot: Option<(usize, usize)> = None;
            for i in t..r {
                for j in t..r {
                    if m[i][j] != 0
                        && pivot.map_or(true, |(pi, pj)| m[i][j].abs() < m[pi][pj].abs())
                    {
                        pivot = Some((i, j));
                    }
                }
            }
            let (pi, pj) = match pivot {
                Some(p) => p,
                None => break, // remaining block is zero
            };
            m.swap(t, pi);
            if pj != t {
                for row in m.iter_mut() {
                    row.swap(t, pj);
                }
                for row in v.iter_mut() {
                    row.swap(t, pj);
                }
            }
            let mut dirty = false;
            for i in t + 1..r {
                let q = m[i][t].div_euclid(m[t][t]);
                if q != 0 {
                    for j in t..r {
                        m[i][j] -= q * m[t][j];
                    }
                }
                if m[i][t] != 0 {
                    dirty = true;
                }
            }
            for j in t + 1..r {
                let q = m[t][j].div_euclid(m[t][t]);
                if q != 0 {
                    for i in t..r {
                        m[i][j] -= q * m[i][t];
                    }
                    for i in 0..r {
                        v[i][j] -= q * v[i][t];
                    }
                }
                if m[t][j] != 0 {
                    dirty = true;
                }
            }
            if !dirty {
                break;
            }
        }
    }
    // Divisibility chain is not needed downstream; gcd-with-n only sees the
    // diagonal values. Make them nonnegative.
    let mut s = Vec::with_capacity(r);
    for (i, row) in m.iter().enumerate() {
        s.push(row[i].abs());
    }
    (s, v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;

    fn meta(ty: &str, n: i64) -> Metaplectic {
        Metaplectic::new(ty.parse().unwrap(), n)
    }

    #[test]
    fn a1_n3() {
        let m = meta("A1", 3);
        assert_eq!(m.q_simple(0), 1);
        assert_eq!(m.n_simple(0), 3);
        assert!(m.in_lambda0(&[3]));
        assert!(!m.in_lambda0(&[1]));
        assert!(!m.in_lambda0(&[2]));
        assert_eq!(m.lambda0_index(), 3);
        assert!(m.adjoint_dual());
    }

    #[test]
    fn a2_n2_by_enumeration() {
        // Independent oracle: solve 2a−b ≡ 0, −a+2b ≡ 0 (mod 2) over all of
        // (Z/2)² and compare with the membership test and the basis.
        let m = meta("A2", 2);
        assert_eq!(m.q_simple(0), 1);
        assert_eq!(m.b_simple(0, 1), -1);
        assert_eq!(m.n_simple(0), 2);
        assert_eq!(m.n_simple(1), 2);
        let mut residues = Vec::new();
        for a in 0..2i64 {
            for b in 0..2i64 {
                if (2 * a - b).rem_euclid(2) == 0 && (-a + 2 * b).rem_euclid(2) == 0 {
                    residues.push((a, b));
                }
            }
        }
        assert_eq!(residues, vec![(0, 0)], "Λ₀∨ = 2Λ∨ for A2, n=2");
        assert_eq!(m.lambda0_index(), 4);
        assert!(m.adjoint_dual());
        for v in m.lambda0_basis() {
            assert!(m.in_lambda0(v));
        }
    }

    #[test]
    fn a2_n4() {
        let m = meta("A2", 4);
        assert_eq!(m.n_simple(0), 4);
        assert_eq!(m.n_simple(1), 4);
        assert!(m.adjoint_dual());
        assert_eq!(m.lambda0_index(), 16);
    }

    #[test]
    fn c2_n2_not_adjoint() {
        // Q = (2,1) makes B ≡ 0 mod 2 identically, so Λ₀∨ = Λ∨ while the
        // dual simple coroots span an index-2 sublattice.
        let m = meta("C2", 2);
        assert_eq!(m.lambda0_index(), 1);
        assert_eq!(m.n_simple(0), 1);
        assert_eq!(m.n_simple(1), 2);
        assert!(!m.adjoint_dual());
    }

    #[test]
    fn q_invariance_under_weyl() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for ty in ["A2", "B2", "G2", "C3"] {
            let m = meta(ty, 3);
            let r = m.rank();
            for _ in 0..100 {
                let v: Vec<i64> = (0..r).map(|_| rng.gen_range(-6..=6)).collect();
                let q = m.q_form(&v);
                for i in 0..r {
                    let w = m.datum().reflect_coweight(i, &v);
                    assert_eq!(m.q_form(&w), q, "Q(s_{i}·v) = Q(v) in {ty}");
                }
            }
        }
    }

    #[test]
    fn q_is_one_on_short_coroots() {
        for ty in ["A2", "B2", "C2", "G2", "B3"] {
            let m = meta(ty, 2);
            let min_q = m
                .datum()
                .positive_coroots()
                .iter()
                .map(|b| m.q_form(b))
                .min()
                .unwrap();
            assert_eq!(min_q, 1, "short coroots have Q = 1 in {ty}");
            // All Weyl images of coroots keep their Q value.
            for b in m.datum().positive_coroots() {
                let q = m.q_form(b);
                for w in m.datum().weyl_elements().iter().take(8) {
                    assert_eq!(m.q_form(&m.datum().apply(w, b)), q);
                }
            }
        }
    }

    #[test]
    fn b_polarization_identity() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(13);
        let m = meta("G2", 3);
        for _ in 0..100 {
            let v: Vec<i64> = (0..2).map(|_| rng.gen_range(-5..=5)).collect();
            let w: Vec<i64> = (0..2).map(|_| rng.gen_range(-5..=5)).collect();
            let sum: Vec<i64> = v.iter().zip(&w).map(|(a, b)| a + b).collect();
            assert_eq!(m.b_form(&v, &w), m.q_form(&sum) - m.q_form(&v) - m.q_form(&w));
            assert_eq!(
                m.b_form(&v, &[1, 0]),
                m.datum().pairing_with_simple_root(0, &v) * m.q_simple(0)
            );
        }
    }

    #[test]
    fn lambda0_contains_tilde_coroots_and_is_w_stable() {
        for (ty, n) in [("A2", 2i64), ("B2", 3), ("G2", 2), ("A2", 4)] {
            let m = meta(ty, n);
            for (beta, nb) in m.positive_with_n() {
                let tilde: Vec<i64> = beta.iter().map(|&c| c * nb).collect();
                assert!(m.in_lambda0(&tilde), "ñβ ∈ Λ₀∨ for {ty}, n={n}");
            }
            // Closure under addition and under W on basis vectors.
            let basis = m.lambda0_basis().to_vec();
            for a in &basis {
                for b in &basis {
                    let s: Vec<i64> = a.iter().zip(b).map(|(x, y)| x + y).collect();
                    assert!(m.in_lambda0(&s));
                }
                for i in 0..m.rank() {
                    assert!(m.in_lambda0(&m.datum().reflect_coweight(i, a)));
                }
            }
        }
    }

    #[test]
    fn dual_cartan_is_valid() {
        for (ty, n) in [("A2", 2i64), ("B2", 2), ("G2", 2), ("C2", 3), ("A1", 3)] {
            let m = meta(ty, n);
            let dc = m.dual_cartan();
            let r = m.rank();
            for i in 0..r {
                assert_eq!(dc[i][i], 2);
                for j in 0..r {
                    if i != j {
                        assert!(dc[i][j] <= 0);
                        assert_eq!(dc[i][j] == 0, dc[j][i] == 0);
                        assert!(dc[i][j] * dc[j][i] <= 3);
                    }
                }
            }
        }
    }

    #[test]
    fn snf_of_known_matrix() {
        // G(A2) = [[2,-1],[-1,2]] has invariant factors (1, 3).
        let (s, _v) = smith_normal_form(&[vec![2, -1], vec![-1, 2]]);
        let mut s = s;
        s.sort();
        assert_eq!(s, vec![1, 3]);
    }
}
