use thiserror::Error;

use crate::model::Violation;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("parameter `{name}` is not finite ({value})")]
    NonFinite { name: &'static str, value: f64 },

    #[error("inadmissible parameters: {}", format_violations(.0))]
    Inadmissible(Vec<Violation>),

    #[error("state is off the simplex: {0}")]
    OffSimplex(String),

    #[error("simplex drift {drift:e} exceeds tolerance after step")]
    Drift { drift: f64 },

    #[error("alpha = {0} is outside [0, 1]")]
    AlphaOutOfRange(f64),

    #[error("critical threshold is undefined: {0}")]
    UndefinedThreshold(&'static str),

    #[error("degenerate v-window: {0}")]
    DegenerateWindow(&'static str),

    #[error("trajectory too short: need at least {needed} states, have {have}")]
    TooShort { needed: usize, have: usize },
}

fn format_violations(v: &[Violation]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CalibrationError {
    #[error("empty search box: {0}")]
    EmptyBox(String),

    #[error("grid too large: {points} points exceeds the cap of {cap}")]
    GridTooLarge { points: u128, cap: u128 },

    #[error("search box leaves the admissible region at {0}")]
    InadmissibleBox(String),

    #[error("invalid target: {0}")]
    InvalidTarget(String),

    #[error(transparent)]
    Model(#[from] ModelError),
}
