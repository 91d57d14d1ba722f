//! Discrete-time SEIR epidemic dynamics on the 3-simplex.
//!
//! The one-day map
//!
//! ```text
//! s' = s − βs(i + qe)
//! e' = e − ae + βs(i + qe)
//! i' = i − bi + ae
//! r' = r + bi
//! ```
//!
//! is a quadratic stochastic operator whenever `a, b, β ∈ [0, 1]` and
//! `βq ≤ 1`. This crate simulates it, builds and checks its coefficient
//! tensor, classifies its fixed points `(α, 0, 0, 1 − α)`, tracks the
//! post-peak invariant set, and fits rates to observed peak and completion
//! days.

pub mod calibration;
pub mod cli;
pub mod error;
pub mod model;
pub mod output;
pub mod qso;
pub mod spectral;
pub mod trajectory;

pub use error::{CalibrationError, ModelError};
pub use model::{
    step, validate_params, Admissibility, Params, SimplexState, Violation, SIMPLEX_TOL,
};
pub use qso::{apply, build_tensor, verify_tensor, QsoTensor, TensorReport};
pub use spectral::{classify, critical_alpha, eigenvalues_at, jacobian_at, Regime, SpectralReport};
pub use trajectory::{
    completion_day, entry_time_into_m, find_limit, in_m, peak, reconstruct_from_v,
    recurrence_residual, simulate, ConvergenceOptions, EntryTime, LimitReport, Trajectory,
};
