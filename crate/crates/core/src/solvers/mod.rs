//! Capacity upper bounds: closed-form solutions for the covered families
//! and a generic KKT-constrained minimizer.

mod closed_form;
mod generic;

pub use closed_form::{
    thm2_part1, thm2_part2, thm3_part1, thm3_part2, thm4_dinfty, thm5_bsc, ClosedFormSetup,
};
pub use generic::{generic_kkt_bound, GenericOptions};

use std::fmt;

use crate::family::ParamMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverKind {
    ClosedForm,
    Generic,
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SolverKind::ClosedForm => "closed-form",
            SolverKind::Generic => "generic",
        })
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Diagnostics {
    pub iterations: usize,
    /// Starts tried by a multi-start search.
    pub starts: usize,
    /// Starts that reached the residual tolerance.
    pub accepted_starts: usize,
    /// Spread (max − min) of the bounds found by accepted starts.
    pub dispersion: f64,
    /// Number of admissible roots of the defining equations.
    pub root_count: usize,
    pub notes: Vec<String>,
}

/// A capacity upper bound with the parameters that certify it.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundResult {
    /// Bits per channel use.
    pub bound: f64,
    pub params: ParamMap,
    /// max |t_c − t_{c₀}| over the cycles of the family's diagram.
    pub kkt_residual_max: f64,
    pub solver: SolverKind,
    pub diagnostics: Diagnostics,
}
