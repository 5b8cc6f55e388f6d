//! Independent numerical routes used to cross-check the closed forms:
//! adaptive quadrature, Fourier inversion, finite differences and the
//! integral identities behind the density formula.

pub mod diff;
pub mod fourier;
pub mod lemmas;
pub mod quadrature;

pub use diff::{central_diff, pde_residual_order3, theorem2_residual};
pub use fourier::{invert_charfn, invert_interval_mass, InversionConfig, InversionResult};
pub use lemmas::{lemma_a1, lemma_a2_transform, lemma_a3_check, lemma_a4_antiderivative};
pub use quadrature::{
    arc_integral, arc_integral_scaled, integrate, try_integrate, QuadratureResult,
};
