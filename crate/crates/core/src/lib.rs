//! p-Bergman minimizers, kernels, the p-Skwarczyński distance and the
//! p-Bergman metric on model domains, with numerical checks of the
//! inequalities that relate them.
//!
//! See the guide in `book/` for a walkthrough.

pub mod error;
pub mod function_space;
pub mod geometry;
pub mod minimizer;
pub mod distance;
pub mod verify;
pub mod cli;

pub use error::{Error, Result};

// the guide's code blocks run as doctests
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/discretization.md")]
    mod discretization {}
    #[doc = include_str!("../../../book/src/minimizers.md")]
    mod minimizers {}
    #[doc = include_str!("../../../book/src/distance.md")]
    mod distance {}
    #[doc = include_str!("../../../book/src/verification.md")]
    mod verification {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
