// Range checks are written `!(x > 0.0)` so that NaN fails them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cavity;
pub mod dqs;
pub mod dynamics;
pub mod error;
pub mod linalg;
pub mod pipeline;
pub mod qec;
pub mod spin;
pub mod transitions;

pub use error::{Error, Result};
