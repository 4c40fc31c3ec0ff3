//! Dual capacity upper bounds and simulated achievable rates for
//! runlength-constrained binary-input channels (BEC, BSC, BIAWGN).

pub mod achievable;
pub mod awgn;
pub mod channel;
pub mod cli;
pub mod constraint;
pub mod error;
pub mod family;
pub mod metric;
pub mod numeric;
pub mod oracle;
pub mod solvers;
pub mod validate;

pub use error::{Error, Result};
