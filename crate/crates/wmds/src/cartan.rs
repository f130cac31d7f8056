//! Based root data of finite type and their Weyl groups.
//!
//! Coordinates: the coweight lattice Λ∨ is written in the basis of simple
//! coroots (valid because every datum here is semisimple simply-connected),
//! and the weight lattice Λ in the dual fundamental-weight basis. With these
//! choices the pairing ⟨·,·⟩: Λ × Λ∨ → Z is the plain dot product, the j-th
//! simple root is the j-th column of the Cartan matrix, and ρ = (1,…,1).

use std::collections::BTreeMap;
use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

/// Lie family label A–G.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Family {
    A,
    B,
    C,
    D,
    E,
    F,
    G,
}

/// A finite Cartan type such as `A2` or `G2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CartanType {
    pub family: Family,
    pub rank: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CartanError(pub String);

impl fmt::Display for CartanError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid Cartan type: {}", self.0)
    }
}

impl std::error::Error for CartanError {}

impl CartanType {
    pub fn new(family: Family, rank: usize) -> Result<Self, CartanError> {
        let ok = match family {
            Family::A => rank >= 1,
            Family::B | Family::C => rank >= 2,
            Family::D => rank >= 3,
            Family::E => (6..=8).contains(&rank),
            Family::F => rank == 4,
            Family::G => rank == 2,
        };
        if ok {
            Ok(CartanType { family, rank })
        } else {
            Err(CartanError(format!("{:?}{} is not a finite type", family, rank)))
        }
    }
}

impl FromStr for CartanType {
    type Err = CartanError;

    fn from_str(s: &str) -> Result<Self, CartanError> {
        let s = s.trim();
        let mut chars = s.chars();
        let fam = match chars.next() {
            Some('A') | Some('a') => Family::A,
            Some('B') | Some('b') => Family::B,
            Some('C') | Some('c') => Family::C,
            Some('D') | Some('d') => Family::D,
            Some('E') | Some('e') => Family::E,
            Some('F') | Some('f') => Family::F,
            Some('G') | Some('g') => Family::G,
            _ => return Err(CartanError(s.to_string())),
        };
        let rank: usize = chars
            .as_str()
            .parse()
            .map_err(|_| CartanError(s.to_string()))?;
        CartanType::new(fam, rank)
    }
}

impl fmt::Display for CartanType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}{}", self.family, self.rank)
    }
}

/// Cartan matrix `a[i][j] = ⟨α_j, α_i∨⟩` and the values of the normalized
/// W-invariant quadratic form on the simple coroots (1 on short coroots).
/// Conventions follow the Bourbaki numbering of the simple roots.
fn cartan_table(ct: CartanType) -> (Vec<Vec<i64>>, Vec<i64>) {
    let r = ct.rank;
    let mut a = vec![vec![0i64; r]; r];
    for i in 0..r {
        a[i][i] = 2;
    }
    let mut chain = |edges: &[(usize, usize)]| {
        for &(i, j) in edges {
            a[i][j] = -1;
            a[j][i] = -1;
        }
    };
    let q: Vec<i64> = match ct.family {
        Family::A => {
            chain(&(0..r - 1).map(|i| (i, i + 1)).collect::<Vec<_>>());
            vec![1; r]
        }
        Family::B => {
            // α_r short: its coroot is long.
            chain(&(0..r - 1).map(|i| (i, i + 1)).collect::<Vec<_>>());
            a[r - 1][r - 2] = -2;
            let mut q = vec![1; r];
            q[r - 1] = 2;
            q
        }
        Family::C => {
            // α_1,…,α_{r-1} short.
            chain(&(0..r - 1).map(|i| (i, i + 1)).collect::<Vec<_>>());
            a[r - 2][r - 1] = -2;
            let mut q = vec![2; r];
            q[r - 1] = 1;
            q
        }
        Family::D => {
            chain(&(0..r - 2).map(|i| (i, i + 1)).collect::<Vec<_>>());
            chain(&[(r - 3, r - 1)]);
            vec![1; r]
        }
        Family::E => {
            // Bourbaki: chain 1-3-4-5-…-r with node 2 attached to node 4.
            chain(&[(0, 2), (1, 3)]);
            chain(&(2..r - 1).map(|i| (i, i + 1)).collect::<Vec<_>>());
            vec![1; r]
        }
        Family::F => {
            chain(&[(0, 1), (1, 2), (2, 3)]);
            a[2][1] = -2;
            vec![1, 1, 2, 2]
        }
        Family::G => {
            // α_1 short, α_2 long.
            a[0][1] = -3;
            a[1][0] = -1;
            vec![3, 1]
        }
    };
    (a, q)
}

/// Euclidean residue map: the representative of `k` mod `m` in `{0,…,m−1}`.
pub fn res(m: i64, k: i64) -> i64 {
    debug_assert!(m >= 1);
    k.rem_euclid(m)
}

/// A semisimple simply-connected based root datum of finite type.
///
/// Coweights are `Vec<i64>` in simple-coroot coordinates, weights in
/// fundamental-weight coordinates.
#[derive(Clone, Debug)]
pub struct RootDatum {
    cartan_type: CartanType,
    /// `cartan[i][j] = ⟨α_j, α_i∨⟩`.
    cartan: Vec<Vec<i64>>,
    /// Q(α_i∨) for the normalized W-invariant quadratic form.
    q_simple: Vec<i64>,
    /// All positive coroots in simple-coroot coordinates, sorted.
    positive_coroots: Vec<Vec<i64>>,
    /// Every Weyl group element with its canonical (BFS) reduced word.
    elements: Vec<WeylElement>,
}

/// A Weyl group element carried with a canonical reduced word.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeylElement {
    /// Simple-reflection indices; the element is the left-to-right product.
    pub word: Vec<usize>,
}

impl WeylElement {
    pub fn identity() -> Self {
        WeylElement { word: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.word.len()
    }

    pub fn is_empty(&self) -> bool {
        self.word.is_empty()
    }
}

impl RootDatum {
    pub fn new(ct: CartanType) -> Self {
        let (cartan, q_simple) = cartan_table(ct);
        let mut datum = RootDatum {
            cartan_type: ct,
            cartan,
            q_simple,
            positive_coroots: Vec::new(),
            elements: Vec::new(),
        };
        datum.positive_coroots = datum.enumerate_positive_coroots();
        datum.elements = datum.enumerate_weyl();
        datum
    }

    pub fn cartan_type(&self) -> CartanType {
        self.cartan_type
    }

    pub fn rank(&self) -> usize {
        self.cartan_type.rank
    }

    /// Cartan matrix entry ⟨α_j, α_i∨⟩.
    pub fn cartan(&self, i: usize, j: usize) -> i64 {
        self.cartan[i][j]
    }

    /// Q(α_i∨), the quadratic form on the i-th simple coroot.
    pub fn q_simple(&self, i: usize) -> i64 {
        self.q_simple[i]
    }

    /// ⟨λ, μ∨⟩ for λ in weight coordinates and μ∨ in coroot coordinates.
    pub fn pairing(&self, weight: &[i64], coweight: &[i64]) -> i64 {
        weight.iter().zip(coweight).map(|(a, b)| a * b).sum()
    }

    /// ⟨ρ, μ∨⟩ = height of μ∨.
    pub fn rho_pairing(&self, coweight: &[i64]) -> i64 {
        coweight.iter().sum()
    }

    /// ⟨α_i, μ∨⟩ for a simple root α_i against a coweight.
    pub fn pairing_with_simple_root(&self, i: usize, coweight: &[i64]) -> i64 {
        (0..self.rank()).map(|j| self.cartan[j][i] * coweight[j]).sum()
    }

    /// Simple reflection s_i acting on the coweight lattice.
    pub fn reflect_coweight(&self, i: usize, coweight: &[i64]) -> Vec<i64> {
        let c = self.pairing_with_simple_root(i, coweight);
        let mut out = coweight.to_vec();
        out[i] -= c;
        out
    }

    /// Apply a word of simple reflections, left-to-right product convention:
    /// `apply_word([i1,…,ik], v) = s_{i1}(s_{i2}(…s_{ik}(v)…))`.
    pub fn apply_word(&self, word: &[usize], coweight: &[i64]) -> Vec<i64> {
        let mut v = coweight.to_vec();
        for &i in word.iter().rev() {
            v = self.reflect_coweight(i, &v);
        }
        v
    }

    pub fn apply(&self, w: &WeylElement, coweight: &[i64]) -> Vec<i64> {
        self.apply_word(&w.word, coweight)
    }

    pub fn apply_inverse(&self, w: &WeylElement, coweight: &[i64]) -> Vec<i64> {
        let mut v = coweight.to_vec();
        for &i in w.word.iter() {
            v = self.reflect_coweight(i, &v);
        }
        v
    }

    /// The positive coroots, sorted lexicographically.
    pub fn positive_coroots(&self) -> &[Vec<i64>] {
        &self.positive_coroots
    }

    fn enumerate_positive_coroots(&self) -> Vec<Vec<i64>> {
        let r = self.rank();
        let mut seen: std::collections::BTreeSet<Vec<i64>> = std::collections::BTreeSet::new();
        let mut queue: VecDeque<Vec<i64>> = VecDeque::new();
        for i in 0..r {
            let mut e = vec![0i64; r];
            e[i] = 1;
            seen.insert(e.clone());
            queue.push_back(e);
        }
        while let Some(v) = queue.pop_front() {
            for i in 0..r {
                let w = self.reflect_coweight(i, &v);
                if w.iter().all(|&c| c >= 0) && seen.insert(w.clone()) {
                    queue.push_back(w);
                }
            }
        }
        seen.into_iter().collect()
    }

    /// All Weyl group elements with canonical reduced words, enumerated by
    /// breadth-first search over the Cayley graph (identity first).
    pub fn weyl_elements(&self) -> &[WeylElement] {
        &self.elements
    }

    pub fn weyl_order(&self) -> usize {
        self.elements.len()
    }

    fn enumerate_weyl(&self) -> Vec<WeylElement> {
        let r = self.rank();
        // An element is identified by its matrix on the coroot basis.
        let basis: Vec<Vec<i64>> = (0..r)
            .map(|i| {
                let mut e = vec![0i64; r];
                e[i] = 1;
                e
            })
            .collect();
        let key_of = |word: &[usize]| -> Vec<i64> {
            let mut key = Vec::with_capacity(r * r);
            for b in &basis {
                key.extend(self.apply_word(word, b));
            }
            key
        };
        let mut seen: BTreeMap<Vec<i64>, Vec<usize>> = BTreeMap::new();
        let mut order: Vec<Vec<usize>> = Vec::new();
        let mut queue: VecDeque<Vec<usize>> = VecDeque::new();
        let e: Vec<usize> = Vec::new();
        seen.insert(key_of(&e), e.clone());
        order.push(e.clone());
        queue.push_back(e);
        while let Some(word) = queue.pop_front() {
            for i in 0..r {
                // Extend on the right: w·s_i.
                let mut next = word.clone();
                next.push(i);
                if let std::collections::btree_map::Entry::Vacant(e) = seen.entry(key_of(&next)) {
                    e.insert(next.clone());
                    order.push(next.clone());
                    queue.push_back(next);
                }
            }
        }
        order.into_iter().map(|word| WeylElement { word }).collect()
    }

    /// The longest element of W.
    pub fn longest_element(&self) -> &WeylElement {
        self.elements.last().expect("Weyl group is nonempty")
    }

    /// Inversion set R∨(w⁻¹) = {β∨ ∈ Φ∨₊ : w⁻¹β∨ < 0}; its size is ℓ(w).
    pub fn inversion_coroots(&self, w: &WeylElement) -> Vec<Vec<i64>> {
        self.positive_coroots
            .iter()
            .filter(|beta| {
                let img = self.apply_inverse(w, beta);
                img.iter().any(|&c| c < 0)
            })
            .cloned()
            .collect()
    }

    /// Whether a coweight is dominant: ⟨α_i, λ∨⟩ ≥ 0 for all simple roots.
    pub fn is_dominant_coweight(&self, coweight: &[i64]) -> bool {
        (0..self.rank()).all(|i| self.pairing_with_simple_root(i, coweight) >= 0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;

    #[test]
    fn parse_types() {
        assert_eq!(
            "A2".parse::<CartanType>().unwrap(),
            CartanType { family: Family::A, rank: 2 }
        );
        assert_eq!(
            "g2".parse::<CartanType>().unwrap(),
            CartanType { family: Family::G, rank: 2 }
        );
        assert!("Z9".parse::<CartanType>().is_err());
        assert!("B1".parse::<CartanType>().is_err());
        assert!("E9".parse::<CartanType>().is_err());
    }

    #[test]
    fn positive_coroot_counts() {
        // Frozen from the reflection-closure enumeration itself on A1, and
        // from |Φ₊| = r(r+1)/2 for A_r and 6 for G2.
        let a1 = RootDatum::new("A1".parse().unwrap());
        assert_eq!(a1.positive_coroots(), &[vec![1]]);

        let a2 = RootDatum::new("A2".parse().unwrap());
        assert_eq!(
            a2.positive_coroots(),
            &[vec![0, 1], vec![1, 0], vec![1, 1]]
        );

        let g2 = RootDatum::new("G2".parse().unwrap());
        assert_eq!(g2.positive_coroots().len(), 6);

        let c2 = RootDatum::new("C2".parse().unwrap());
        assert_eq!(c2.positive_coroots().len(), 4);

        let d4 = RootDatum::new("D4".parse().unwrap());
        assert_eq!(d4.positive_coroots().len(), 12);
    }

    #[test]
    fn weyl_group_orders() {
        for (ty, order) in [
            ("A1", 2usize),
            ("A2", 6),
            ("A3", 24),
            ("B2", 8),
            ("C3", 48),
            ("G2", 12),
        ] {
            let d = RootDatum::new(ty.parse().unwrap());
            assert_eq!(d.weyl_order(), order, "order of W({ty})");
        }
    }

    #[test]
    fn word_length_equals_inversion_count() {
        for ty in ["A2", "B2", "G2"] {
            let d = RootDatum::new(ty.parse().unwrap());
            for w in d.weyl_elements() {
                assert_eq!(d.inversion_coroots(w).len(), w.len());
            }
        }
    }

    #[test]
    fn inversion_sets_small_cases() {
        let a1 = RootDatum::new("A1".parse().unwrap());
        assert!(a1.inversion_coroots(&WeylElement::identity()).is_empty());
        assert_eq!(
            a1.inversion_coroots(&WeylElement { word: vec![0] }),
            vec![vec![1]]
        );

        // A2, w = s1 s2: R∨(w⁻¹) = {α1∨, α1∨+α2∨}, frozen by applying w⁻¹
        // to each positive coroot by hand.
        let a2 = RootDatum::new("A2".parse().unwrap());
        let w = WeylElement { word: vec![0, 1] };
        let mut inv = a2.inversion_coroots(&w);
        inv.sort();
        assert_eq!(inv, vec![vec![1, 0], vec![1, 1]]);
    }

    #[test]
    fn braid_relations_on_random_vectors() {
        // Rank-2 braid words act identically on random coweights.
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for (ty, m) in [("A2", 3usize), ("B2", 4), ("G2", 6)] {
            let d = RootDatum::new(ty.parse().unwrap());
            let w1: Vec<usize> = (0..m).map(|k| k % 2).collect();
            let w2: Vec<usize> = (0..m).map(|k| (k + 1) % 2).collect();
            for _ in 0..100 {
                let v: Vec<i64> = (0..2).map(|_| rng.gen_range(-10..=10)).collect();
                assert_eq!(d.apply_word(&w1, &v), d.apply_word(&w2, &v));
            }
        }
    }

    #[test]
    fn residue_map() {
        assert_eq!(res(3, -1), 2);
        assert_eq!(res(3, 0), 0);
        assert_eq!(res(4, 7), 3);
    }

    #[test]
    fn canonical_words_are_reduced() {
        let d = RootDatum::new("B2".parse().unwrap());
        let lengths: Vec<usize> = d.weyl_elements().iter().map(|w| w.len()).collect();
        let mut sorted = lengths.clone();
        sorted.sort();
        assert_eq!(lengths, sorted, "BFS yields words ordered by length");
        assert_eq!(d.longest_element().len(), 4);
    }
}
