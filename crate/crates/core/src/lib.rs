//! Probabilities of non-transitive outcomes for constitutions satisfying
//! independence of irrelevant alternatives, computed exactly where possible.

// `!(x <= limit)` rejects NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod boolfn;
pub mod constitution;
pub mod distribution;
pub mod enumerate;
pub mod error;
pub mod family;
pub mod gaussian;
pub mod hyper;
pub mod io;
pub mod montecarlo;
pub mod pivotal;
pub mod quantity;
pub mod ranking;
pub mod suite;

pub use error::{Error, Result};
pub use quantity::Quantity;
