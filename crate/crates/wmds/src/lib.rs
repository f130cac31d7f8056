//! Weyl group multiple Dirichlet series over the rational function field
//! F_q(t).
//!
//! The crate computes the prime-power coefficient tables (p-parts) of these
//! series symbolically, by averaging over the Weyl group with the twisted
//! Chinta-Gunnells action in an exact generic ring, glues them into global
//! coefficients through power-residue and tame Hilbert symbols, and checks
//! the algebraic identities the construction rests on: well-definedness of
//! the action, invariance of the averaged element, the rank-one scattering
//! identity, twisted multiplicativity, and the local-to-global sub-sum
//! identity relating coset-restricted p-parts to glued coefficients.
//!
//! Layout mirrors the pipeline:
//! - [`cartan`]: based root data, Weyl groups, reduced words.
//! - [`metaplectic`]: the quadratic form Q, its polarization, Λ₀∨, n(α∨).
//! - [`gauss`]: exact scalars of the generic ring C[v,v⁻¹][g_k].
//! - [`algebra`]: the group algebra over Λ∨, localization, exact division.
//! - [`cg`]: the Chinta-Gunnells action and the averaged element CS(λ∨).
//! - [`scattering`]: the rank-one intertwiner identity.
//! - [`fq`]: arithmetic of F_q[t] and its residue fields.
//! - [`symbols`]: power-residue and Hilbert symbols, Gauss sums.
//! - [`glue`]: twisted-multiplicative gluing, truncated series, verifiers.

pub mod algebra;
pub mod cartan;
pub mod cg;
pub mod fq;
pub mod gauss;
pub mod glue;
pub mod metaplectic;
pub mod scattering;
pub mod symbols;

pub use algebra::{exact_divide, Factor, GenericElement, GroupAlgebra, Localized, NumericElement};
pub use cartan::{res, CartanType, Family, RootDatum, WeylElement};
pub use cg::{casselman_shalika, cg_act, cg_simple, h_coefficients, verify_cs_invariance, HTable};
pub use fq::{factorize, irreducibles, monic_polys, Fq, FqPoly};
pub use gauss::GaussScalar;
pub use glue::{GluedCoefficient, LambdaClassVector, SeriesContext, TupleC, XPoly};
pub use metaplectic::Metaplectic;
pub use scattering::verify_scattering;
pub use symbols::{MuElem, MuEmbedding, Place, SymbolContext, SymbolValue};

/// Complex scalar used after specialization.
pub type Scalar = num_complex::Complex64;
