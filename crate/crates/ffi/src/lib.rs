//! C interface to `seir_qso`.
//!
//! Every function returns a [`SeirStatus`]; results go through out-pointers.
//! Trajectories and tensors are opaque handles owned by the caller and
//! released with their `_free` function. Panics never cross the boundary;
//! they are reported as [`SeirStatus::Internal`].

use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use seir_qso::qso::{QsoTensor, DIM};
use seir_qso::spectral::Regime;
use seir_qso::trajectory::{self, Trajectory};
use seir_qso::{ModelError, Params, SimplexState, Violation};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeirStatus {
    Ok = 0,
    NullPointer = 1,
    NonFinite = 2,
    Inadmissible = 3,
    OffSimplex = 4,
    Drift = 5,
    AlphaOutOfRange = 6,
    UndefinedThreshold = 7,
    DegenerateWindow = 8,
    TooShort = 9,
    IndexOutOfRange = 10,
    Internal = 255,
}

impl From<ModelError> for SeirStatus {
    fn from(e: ModelError) -> Self {
        match e {
            ModelError::NonFinite { .. } => SeirStatus::NonFinite,
            ModelError::Inadmissible(_) => SeirStatus::Inadmissible,
            ModelError::OffSimplex(_) => SeirStatus::OffSimplex,
            ModelError::Drift { .. } => SeirStatus::Drift,
            ModelError::AlphaOutOfRange(_) => SeirStatus::AlphaOutOfRange,
            ModelError::UndefinedThreshold(_) => SeirStatus::UndefinedThreshold,
            ModelError::DegenerateWindow(_) => SeirStatus::DegenerateWindow,
            ModelError::TooShort { .. } => SeirStatus::TooShort,
        }
    }
}

/// Violation bits set by [`seir_validate_params`].
pub const SEIR_VIOLATION_A: u32 = 1;
pub const SEIR_VIOLATION_B: u32 = 1 << 1;
pub const SEIR_VIOLATION_BETA: u32 = 1 << 2;
pub const SEIR_VIOLATION_Q: u32 = 1 << 3;
pub const SEIR_VIOLATION_BETA_Q: u32 = 1 << 4;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeirParams {
    pub beta: f64,
    pub q: f64,
    pub a: f64,
    pub b: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeirState {
    pub s: f64,
    pub e: f64,
    pub i: f64,
    pub r: f64,
}

/// `regime`: -1 undefined (β = 0), 0 below, 1 at, 2 above the threshold.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeirSpectralReport {
    pub alpha: f64,
    pub mu1: f64,
    pub mu2: f64,
    pub mu3: f64,
    pub discriminant: f64,
    /// NaN when undefined.
    pub critical_alpha: f64,
    pub regime: i32,
    pub stable_dim: u32,
    pub center_dim: u32,
    pub unstable_dim: u32,
}

/// `bound_ok`: -1 not applicable, 0 violated, 1 satisfied.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeirLimitReport {
    pub limit_state: SeirState,
    pub iterations: u64,
    pub converged: bool,
    pub bound_ok: i32,
    /// NaN when undefined.
    pub critical_alpha: f64,
}

/// Per-family axiom results; `*_at` are 1-based `(i, j, k)` of the worst entry.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeirTensorReport {
    pub passed: bool,
    pub symmetry_passed: bool,
    pub symmetry_worst: f64,
    pub symmetry_at: [u32; 3],
    pub non_negativity_passed: bool,
    pub non_negativity_worst: f64,
    pub non_negativity_at: [u32; 3],
    pub stochasticity_passed: bool,
    pub stochasticity_worst: f64,
    pub stochasticity_at: [u32; 3],
}

/// Opaque simulated trajectory.
pub struct SeirTrajectory(Trajectory);

/// Opaque 4×4×4 coefficient tensor.
pub struct SeirTensor(QsoTensor);

impl From<SeirParams> for Params {
    fn from(p: SeirParams) -> Self {
        Params::new(p.beta, p.q, p.a, p.b)
    }
}

impl From<SimplexState> for SeirState {
    fn from(x: SimplexState) -> Self {
        SeirState {
            s: x.s,
            e: x.e,
            i: x.i,
            r: x.r,
        }
    }
}

fn state(x: &SeirState) -> Result<SimplexState, ModelError> {
    SimplexState::new(x.s, x.e, x.i, x.r)
}

fn guard(f: impl FnOnce() -> Result<(), SeirStatus>) -> SeirStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SeirStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => SeirStatus::Internal,
    }
}

unsafe fn read<'a, T>(p: *const T) -> Result<&'a T, SeirStatus> {
    p.as_ref().ok_or(SeirStatus::NullPointer)
}

unsafe fn write<T>(p: *mut T, value: T) -> Result<(), SeirStatus> {
    if p.is_null() {
        return Err(SeirStatus::NullPointer);
    }
    p.write(value);
    Ok(())
}

fn opt(v: Option<f64>) -> f64 {
    v.unwrap_or(f64::NAN)
}

/// Static, NUL-terminated description of a status code.
#[no_mangle]
pub extern "C" fn seir_status_message(status: SeirStatus) -> *const c_char {
    let msg: &CStr = match status {
        SeirStatus::Ok => c"ok",
        SeirStatus::NullPointer => c"null pointer argument",
        SeirStatus::NonFinite => c"non-finite parameter",
        SeirStatus::Inadmissible => c"inadmissible parameters",
        SeirStatus::OffSimplex => c"state is off the simplex",
        SeirStatus::Drift => c"simplex drift exceeds tolerance",
        SeirStatus::AlphaOutOfRange => c"alpha outside [0, 1]",
        SeirStatus::UndefinedThreshold => c"critical threshold undefined",
        SeirStatus::DegenerateWindow => c"degenerate window",
        SeirStatus::TooShort => c"trajectory too short",
        SeirStatus::IndexOutOfRange => c"index out of range",
        SeirStatus::Internal => c"internal error",
    };
    msg.as_ptr()
}

/// Writes a bitmask of `SEIR_VIOLATION_*` flags; 0 means admissible.
///
/// # Safety
/// `p` must point to a valid `SeirParams` and `violations` to writable memory.
#[no_mangle]
pub unsafe extern "C" fn seir_validate_params(
    p: *const SeirParams,
    violations: *mut u32,
) -> SeirStatus {
    guard(|| {
        let report = seir_qso::validate_params(&(*read(p)?).into())?;
        let mask = report.violations.iter().fold(0, |m, v| {
            m | match v {
                Violation::A(_) => SEIR_VIOLATION_A,
                Violation::B(_) => SEIR_VIOLATION_B,
                Violation::Beta(_) => SEIR_VIOLATION_BETA,
                Violation::Q(_) => SEIR_VIOLATION_Q,
                Violation::BetaQ(_) => SEIR_VIOLATION_BETA_Q,
            }
        });
        write(violations, mask)
    })
}

/// One day of the map.
///
/// # Safety
/// Pointers must be valid; `out` may alias `x`.
#[no_mangle]
pub unsafe extern "C" fn seir_step(
    p: *const SeirParams,
    x: *const SeirState,
    out: *mut SeirState,
) -> SeirStatus {
    guard(|| {
        let next = seir_qso::step(&state(read(x)?)?, &(*read(p)?).into())?;
        write(out, next.into())
    })
}

/// Simulates `steps` days; the handle holds `steps + 1` states.
///
/// # Safety
/// Pointers must be valid. On success `*out` owns a handle to release with
/// [`seir_trajectory_free`]; on failure it is set to null.
#[no_mangle]
pub unsafe extern "C" fn seir_simulate(
    p: *const SeirParams,
    x0: *const SeirState,
    steps: usize,
    out: *mut *mut SeirTrajectory,
) -> SeirStatus {
    if out.is_null() {
        return SeirStatus::NullPointer;
    }
    out.write(ptr::null_mut());
    guard(|| {
        let t = seir_qso::simulate(&state(read(x0)?)?, &(*read(p)?).into(), steps)?;
        write(out, Box::into_raw(Box::new(SeirTrajectory(t))))
    })
}

/// # Safety
/// `t` must be null or a handle from [`seir_simulate`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn seir_trajectory_free(t: *mut SeirTrajectory) {
    if !t.is_null() {
        drop(Box::from_raw(t));
    }
}

/// Number of stored states (days 0 through `steps`).
///
/// # Safety
/// `t` must be a live handle and `len` writable.
#[no_mangle]
pub unsafe extern "C" fn seir_trajectory_len(
    t: *const SeirTrajectory,
    len: *mut usize,
) -> SeirStatus {
    guard(|| write(len, read(t)?.0.len()))
}

/// # Safety
/// `t` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn seir_trajectory_state(
    t: *const SeirTrajectory,
    day: usize,
    out: *mut SeirState,
) -> SeirStatus {
    guard(|| {
        let x = read(t)?
            .0
            .states()
            .get(day)
            .ok_or(SeirStatus::IndexOutOfRange)?;
        write(out, (*x).into())
    })
}

/// Day and value of the largest infectious fraction (earliest on ties).
///
/// # Safety
/// `t` must be a live handle; `day` and `value` writable.
#[no_mangle]
pub unsafe extern "C" fn seir_trajectory_peak(
    t: *const SeirTrajectory,
    day: *mut usize,
    value: *mut f64,
) -> SeirStatus {
    guard(|| {
        let (d, v) = trajectory::peak(&read(t)?.0).ok_or(SeirStatus::TooShort)?;
        write(day, d)?;
        write(value, v)
    })
}

/// First day at or after the peak with `i < threshold`; `*found` is false
/// when the horizon ends first.
///
/// # Safety
/// `t` must be a live handle; `day` and `found` writable.
#[no_mangle]
pub unsafe extern "C" fn seir_trajectory_completion_day(
    t: *const SeirTrajectory,
    threshold: f64,
    day: *mut usize,
    found: *mut bool,
) -> SeirStatus {
    guard(|| {
        let d = trajectory::completion_day(&read(t)?.0, threshold);
        write(found, d.is_some())?;
        write(day, d.unwrap_or(0))
    })
}

/// Largest four-day recurrence defect of the recovered fraction.
///
/// # Safety
/// `t` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn seir_trajectory_recurrence_residual(
    t: *const SeirTrajectory,
    out: *mut f64,
) -> SeirStatus {
    guard(|| write(out, trajectory::recurrence_residual(&read(t)?.0)?))
}

/// Iterates until `e + i < tol` and `|Δs| < tol`, or `max_iter` days.
/// Pass `tol <= 0` or `max_iter == 0` for the library defaults.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn seir_find_limit(
    p: *const SeirParams,
    x0: *const SeirState,
    tol: f64,
    max_iter: usize,
    out: *mut SeirLimitReport,
) -> SeirStatus {
    guard(|| {
        let mut opts = trajectory::ConvergenceOptions::default();
        if tol > 0.0 {
            opts.tol = tol;
        }
        if max_iter > 0 {
            opts.max_iter = max_iter;
        }
        let r = trajectory::find_limit(&state(read(x0)?)?, &(*read(p)?).into(), opts)?;
        write(
            out,
            SeirLimitReport {
                limit_state: r.limit_state.into(),
                iterations: r.iterations as u64,
                converged: r.converged,
                bound_ok: r.bound_ok.map_or(-1, i32::from),
                critical_alpha: opt(r.critical_alpha),
            },
        )
    })
}

/// `ab / (β(a + bq))`.
///
/// # Safety
/// `p` must be valid and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn seir_critical_alpha(p: *const SeirParams, out: *mut f64) -> SeirStatus {
    guard(|| write(out, seir_qso::critical_alpha(&(*read(p)?).into())?))
}

/// Spectrum and eigenspace dimensions at the fixed point `(α, 0, 0, 1 − α)`.
///
/// # Safety
/// `p` must be valid and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn seir_classify(
    alpha: f64,
    p: *const SeirParams,
    out: *mut SeirSpectralReport,
) -> SeirStatus {
    guard(|| {
        let r = seir_qso::classify(alpha, &(*read(p)?).into())?;
        write(
            out,
            SeirSpectralReport {
                alpha: r.alpha,
                mu1: r.mu1,
                mu2: r.mu2,
                mu3: r.mu3,
                discriminant: r.discriminant,
                critical_alpha: opt(r.critical_alpha),
                regime: match r.regime {
                    None => -1,
                    Some(Regime::Below) => 0,
                    Some(Regime::At) => 1,
                    Some(Regime::Above) => 2,
                },
                stable_dim: r.dims.stable as u32,
                center_dim: r.dims.center as u32,
                unstable_dim: r.dims.unstable as u32,
            },
        )
    })
}

/// Builds the coefficient tensor. Any finite rates are accepted; use
/// [`seir_tensor_verify`] to check the axioms.
///
/// # Safety
/// `p` must be valid. On success `*out` owns a handle to release with
/// [`seir_tensor_free`]; on failure it is set to null.
#[no_mangle]
pub unsafe extern "C" fn seir_tensor_build(
    p: *const SeirParams,
    out: *mut *mut SeirTensor,
) -> SeirStatus {
    if out.is_null() {
        return SeirStatus::NullPointer;
    }
    out.write(ptr::null_mut());
    guard(|| {
        let t = seir_qso::build_tensor(&(*read(p)?).into())?;
        write(out, Box::into_raw(Box::new(SeirTensor(t))))
    })
}

/// # Safety
/// `t` must be null or a handle from [`seir_tensor_build`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn seir_tensor_free(t: *mut SeirTensor) {
    if !t.is_null() {
        drop(Box::from_raw(t));
    }
}

/// Coefficient `P_{ij,k}` with 0-based indices below 4.
///
/// # Safety
/// `t` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn seir_tensor_get(
    t: *const SeirTensor,
    i: usize,
    j: usize,
    k: usize,
    out: *mut f64,
) -> SeirStatus {
    guard(|| {
        if i >= DIM || j >= DIM || k >= DIM {
            return Err(SeirStatus::IndexOutOfRange);
        }
        write(out, read(t)?.0.get(i, j, k))
    })
}

/// Checks symmetry and stochasticity within `tol`, non-negativity exactly.
///
/// # Safety
/// `t` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn seir_tensor_verify(
    t: *const SeirTensor,
    tol: f64,
    out: *mut SeirTensorReport,
) -> SeirStatus {
    guard(|| {
        let r = seir_qso::verify_tensor(&read(t)?.0, tol);
        let at = |(i, j, k): (usize, usize, usize)| [i as u32, j as u32, k as u32];
        write(
            out,
            SeirTensorReport {
                passed: r.passed(),
                symmetry_passed: r.symmetry.passed,
                symmetry_worst: r.symmetry.worst,
                symmetry_at: at(r.symmetry.at),
                non_negativity_passed: r.non_negativity.passed,
                non_negativity_worst: r.non_negativity.worst,
                non_negativity_at: at(r.non_negativity.at),
                stochasticity_passed: r.stochasticity.passed,
                stochasticity_worst: r.stochasticity.worst,
                stochasticity_at: at(r.stochasticity.at),
            },
        )
    })
}

/// `x'_k = Σ_{i,j} P_{ij,k} x_i x_j`.
///
/// # Safety
/// Pointers must be valid; `out` may alias `x`.
#[no_mangle]
pub unsafe extern "C" fn seir_tensor_apply(
    t: *const SeirTensor,
    x: *const SeirState,
    out: *mut SeirState,
) -> SeirStatus {
    guard(|| {
        let y = seir_qso::apply(&read(t)?.0, &state(read(x)?)?)?;
        write(out, y.into())
    })
}
