// `!(x > 0.0)` style checks deliberately reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod atomic;
pub mod config;
pub mod data;
pub mod error;
pub mod eval;
pub mod hfa;
pub mod linalg;
pub mod svm;

pub use atomic::write_atomic;
pub use error::{HfaError, Result};
