//! Rank-one scattering identity: the closed form for the total Whittaker
//! functional of an intertwined vector against the prediction of the
//! Chinta-Gunnells action. Both sides live in the localized generic ring
//! and the comparison is exact.

use crate::algebra::{GroupAlgebra, Localized};
use crate::cartan::res;
use crate::cg::cg_simple;
use crate::gauss::GaussScalar;
use crate::metaplectic::Metaplectic;
use std::fmt;

/// The closed form
///
///   (1−v)/(1−e^{ñα_i}) · e^{s_iξ∨ + res_{n_i}(⟨ξ∨,α_i⟩)α_i∨}
///   + v·g_{(1+⟨ξ∨,α_i⟩)Q_i} · e^{s_i•ξ∨},
///
/// with s_i•ξ∨ = ξ∨ − (⟨ξ∨,α_i⟩+1)α_i∨.
pub fn closed_form(m: &Metaplectic, i: usize, xi: &[i64]) -> Localized {
    let datum = m.datum();
    let n_i = m.n_simple(i);
    let pair = datum.pairing_with_simple_root(i, xi);

    let mut e1 = datum.reflect_coweight(i, xi);
    e1[i] += res(n_i, pair);
    let first = Localized::new(
        GroupAlgebra::monomial(e1, GaussScalar::one_minus_v()),
        vec![(0, m.tilde_simple(i))],
    );

    let mut e2 = xi.to_vec();
    e2[i] -= pair + 1;
    let vg = GaussScalar::v_pow(1).mul_ref(&GaussScalar::g((1 + pair) * m.q_simple(i), m.n()));
    let second = Localized::from_poly(GroupAlgebra::monomial(e2, vg));

    first.add_ref(&second)
}

/// The Chinta-Gunnells prediction
/// (1 − v e^{−ñα_i})/(1 − e^{ñα_i}) · s_i ⋆ e^{ξ∨}.
pub fn cg_prediction(m: &Metaplectic, i: usize, xi: &[i64]) -> Localized {
    let x = Localized::from_poly(GroupAlgebra::monomial(
        xi.to_vec(),
        GaussScalar::one_scalar(),
    ));
    let acted = cg_simple(m, i, &x);
    let tilde = m.tilde_simple(i);
    let minus_tilde: Vec<i64> = tilde.iter().map(|&c| -c).collect();
    let mut ratio_num = GroupAlgebra::one(m.rank());
    ratio_num.add_term(minus_tilde, GaussScalar::v_pow(1).neg_ref());
    let ratio = Localized::new(ratio_num, vec![(0, tilde)]);
    acted.mul_ref(&ratio)
}

/// A failed sample: the simple index and the coweight it failed at.
#[derive(Clone, Debug)]
pub struct ScatteringFailure {
    pub index: usize,
    pub xi: Vec<i64>,
    pub residual_terms: usize,
}

impl fmt::Display for ScatteringFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "scattering identity fails at s_{} on ξ∨ = {:?} ({} residual terms)",
            self.index, self.xi, self.residual_terms
        )
    }
}

/// Check the cross-multiplied equality of the two closed forms on each
/// sample (i, ξ∨); exact in the generic ring.
pub fn verify_scattering(
    m: &Metaplectic,
    samples: &[(usize, Vec<i64>)],
) -> Result<(), ScatteringFailure> {
    for (i, xi) in samples {
        let lhs = closed_form(m, *i, xi);
        let rhs = cg_prediction(m, *i, xi);
        let diff = lhs.sub_ref(&rhs);
        if !diff.is_zero() {
            return Err(ScatteringFailure {
                index: *i,
                xi: xi.clone(),
                residual_terms: diff.num.num_terms(),
            });
        }
    }
    Ok(())
}
