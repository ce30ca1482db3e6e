//! Spinor construction of flat timelike surfaces in Minkowski space and
//! three-dimensional de Sitter space.

// `!(x <= tol)` is used on purpose so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod budgets;
pub mod cquat;
pub mod desitter;
pub mod error;
pub mod fd;
pub mod geomverify;
pub mod holoexpr;
pub mod seeddomain;
pub mod synth;

pub use error::{Error, Result};
