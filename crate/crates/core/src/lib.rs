//! Sparse linear regression by sequential truncated-ℓ1 relaxation.
//!
//! The guide in `book/` walks through the modules; its code blocks run as
//! doctests of this crate.

pub mod analysis;
pub mod baselines;
pub mod data;
pub mod error;
pub mod iscra;
pub mod linalg;
pub mod model;
pub mod prox;
pub mod ssnal;
pub mod verify;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/prox.md")]
    mod prox {}
    #[doc = include_str!("../../../book/src/ssnal.md")]
    mod ssnal {}
    #[doc = include_str!("../../../book/src/iscra.md")]
    mod iscra {}
    #[doc = include_str!("../../../book/src/baselines.md")]
    mod baselines {}
    #[doc = include_str!("../../../book/src/diagnostics.md")]
    mod diagnostics {}
    #[doc = include_str!("../../../book/src/data.md")]
    mod data {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
