use thiserror::Error;

use crate::dissipation::EdiReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A query fell outside the domain of a sampled map.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid curve: {0}")]
    InvalidCurve(String),

    #[error("invalid reparametrization: {0}")]
    InvalidReparam(String),

    #[error("configuration error: {0}")]
    Config(String),

    /// φ evaluated to +∞ on a node of the curve.
    #[error("initial datum outside D(phi): phi(u({time})) = +inf")]
    OutsideDomain { time: f64 },

    #[error("coercivity bound violated at {point:?}: phi = {phi}, lower bound = {bound}")]
    Coercivity { point: Vec<f64>, phi: f64, bound: f64 },

    #[error("concatenation gap: d(v(0), u(t_bar)) = {gap} exceeds eps_d = {eps_d}")]
    ConcatenationGap { gap: f64, eps_d: f64 },

    /// The input curve does not satisfy the energy dissipation inequality.
    #[error("curve is not a solution: max EDI residual {} exceeds tolerance {}", .0.max_residual, .0.tolerance)]
    NotASolution(Box<EdiReport>),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Errors that describe a mathematical precondition (as opposed to bad input or usage).
    pub fn is_mathematical(&self) -> bool {
        matches!(
            self,
            Error::OutsideDomain { .. }
                | Error::Coercivity { .. }
                | Error::ConcatenationGap { .. }
                | Error::NotASolution(_)
                | Error::Precondition(_)
        )
    }
}
