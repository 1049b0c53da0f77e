//! The reparametrization order between solutions, minimality and the operations that build new
//! solutions from old ones.

mod algebra;
mod compare;
mod minimal;

pub use algebra::{concatenate, extend_constant, restrict, translate, truncate};
pub use compare::{
    first_passage, match_reparam, match_reparam_detailed, precedes, psi_compare, stationarity_check, MatchFailure, PsiComparison,
    StationarityViolation, WITNESS_TIME_TOL,
};
pub use minimal::{
    critical_time_measure, extract_minimal, extract_unchecked, is_minimal, singular_dilate, Extraction,
    MinimalityReport, Verdict,
};
