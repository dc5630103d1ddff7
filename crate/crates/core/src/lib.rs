//! Input-output equations and permutation indistinguishability of linear
//! compartmental models.
//!
//! The input-output equation of a single-input single-output model is read
//! off its graph: each coefficient is a sum over incoming forests of an
//! augmented graph ([`forest`], [`ioeq`]). Two models are permutation
//! indistinguishable when a renaming of parameters carries one equation onto
//! the other ([`indist`]); [`numeric`] confirms such verdicts by simulation.
//!
//! ```
//! use compartmental::{ioeq::ioeq_forests, model::Model};
//!
//! let model = Model::path_with_leak(4, 3).unwrap();
//! let eq = ioeq_forests(&model).unwrap();
//! assert_eq!(eq.d[0].to_string(), "a_{21}*a_{32}*a_{43}");
//! assert!(eq.c[0].is_zero());
//! ```

pub mod cli;
pub mod forest;
pub mod indist;
pub mod ioeq;
pub mod model;
pub mod numeric;
pub mod symbolic;
pub mod verify;

pub use indist::ParamBijection;
pub use ioeq::IOEquation;
pub use model::{Model, ParamLabel};
pub use symbolic::{Monomial, Polynomial};

// Compiles and runs the code blocks of the guide under book/.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/models.md")]
    mod models {}
    #[doc = include_str!("../../../book/src/polynomials.md")]
    mod polynomials {}
    #[doc = include_str!("../../../book/src/forests.md")]
    mod forests {}
    #[doc = include_str!("../../../book/src/equations.md")]
    mod equations {}
    #[doc = include_str!("../../../book/src/indistinguishability.md")]
    mod indistinguishability {}
    #[doc = include_str!("../../../book/src/simulation.md")]
    mod simulation {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
