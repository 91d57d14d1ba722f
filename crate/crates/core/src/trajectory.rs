//! Iteration of the map and everything measured along a trajectory.

use serde::Serialize;

use crate::error::ModelError;
use crate::model::{advance, check_drift, incidence, Params, SimplexState};
use crate::spectral::critical_alpha;

/// Default stopping tolerance on `e + i` and on `|Δs|`.
pub const CONVERGENCE_TOL: f64 = 1e-10;
/// Default iteration cap for [`find_limit`].
pub const MAX_ITER: usize = 1_000_000;

/// Sign data for the post-peak set `M = {A > 0, B > 0}` with
/// `A = ae − βs(i + qe)` and `B = bi − ae`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StepDiagnostics {
    /// `A`: net outflow from the exposed compartment.
    pub outflow_exposed: f64,
    /// `B`: net outflow from the infectious compartment.
    pub outflow_infectious: f64,
    pub in_m: bool,
}

impl StepDiagnostics {
    pub fn of(x: &SimplexState, p: &Params) -> Self {
        let (outflow_exposed, outflow_infectious) = m_terms(x, p);
        StepDiagnostics {
            outflow_exposed,
            outflow_infectious,
            in_m: outflow_exposed > 0.0 && outflow_infectious > 0.0,
        }
    }
}

/// `(A, B)` at `x`.
pub fn m_terms(x: &SimplexState, p: &Params) -> (f64, f64) {
    (p.a * x.e - incidence(x, p), p.b * x.i - p.a * x.e)
}

/// Membership in `M`. Both inequalities are strict and carry no tolerance.
pub fn in_m(x: &SimplexState, p: &Params) -> bool {
    let (a, b) = m_terms(x, p);
    a > 0.0 && b > 0.0
}

/// States indexed by day, starting from the initial state.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    params: Params,
    states: Vec<SimplexState>,
    diagnostics: Vec<StepDiagnostics>,
}

impl Trajectory {
    pub fn params(&self) -> &Params {
        &self.params
    }

    pub fn states(&self) -> &[SimplexState] {
        &self.states
    }

    pub fn diagnostics(&self) -> &[StepDiagnostics] {
        &self.diagnostics
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn recovered(&self) -> Vec<f64> {
        self.states.iter().map(|x| x.r).collect()
    }

    /// Wraps externally produced states, e.g. a re-read CSV or a deliberately
    /// corrupted copy. Consistency with the map is not checked.
    pub fn from_states(params: Params, states: Vec<SimplexState>) -> Self {
        let diagnostics = states
            .iter()
            .map(|x| StepDiagnostics::of(x, &params))
            .collect();
        Trajectory {
            params,
            states,
            diagnostics,
        }
    }
}

/// Runs `steps` days from `x0`, returning `steps + 1` states.
pub fn simulate(x0: &SimplexState, p: &Params, steps: usize) -> Result<Trajectory, ModelError> {
    p.ensure_admissible()?;
    x0.check()?;
    let mut states = Vec::with_capacity(steps + 1);
    let mut diagnostics = Vec::with_capacity(steps + 1);
    let mut x = *x0;
    states.push(x);
    diagnostics.push(StepDiagnostics::of(&x, p));
    for _ in 0..steps {
        x = advance(&x, p);
        check_drift(&x)?;
        states.push(x);
        diagnostics.push(StepDiagnostics::of(&x, p));
    }
    Ok(Trajectory {
        params: *p,
        states,
        diagnostics,
    })
}

/// Result of iterating to the limiting fixed point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LimitReport {
    /// `(s̄, 0, 0, 1 − s̄)`; the last iterate when not converged.
    pub limit_state: SimplexState,
    pub iterations: usize,
    pub converged: bool,
    /// Whether `s̄ < ab/(β(a + bq))`. `None` when the check does not apply:
    /// fixed-point input, β = 0, undefined threshold or no convergence.
    pub bound_ok: Option<bool>,
    pub critical_alpha: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for ConvergenceOptions {
    fn default() -> Self {
        ConvergenceOptions {
            tol: CONVERGENCE_TOL,
            max_iter: MAX_ITER,
        }
    }
}

/// Iterates until `e + i < tol` and `|Δs| < tol`. Exhausting `max_iter`
/// yields a report with `converged = false`, not an error.
pub fn find_limit(
    x0: &SimplexState,
    p: &Params,
    opts: ConvergenceOptions,
) -> Result<LimitReport, ModelError> {
    p.ensure_admissible()?;
    x0.check()?;
    let critical = critical_alpha(p).ok();
    let mut x = *x0;
    let mut converged = false;
    let mut iterations = 0;
    while iterations < opts.max_iter {
        let next = advance(&x, p);
        check_drift(&next)?;
        iterations += 1;
        let ds = (next.s - x.s).abs();
        x = next;
        if x.e + x.i < opts.tol && ds < opts.tol {
            converged = true;
            break;
        }
    }
    if !converged {
        return Ok(LimitReport {
            limit_state: x,
            iterations,
            converged,
            bound_ok: None,
            critical_alpha: critical,
        });
    }
    let limit_state = SimplexState::new_unchecked(x.s, 0.0, 0.0, 1.0 - x.s);
    let bound_ok = match critical {
        Some(c) if p.beta > 0.0 && !x0.is_fixed_point() => Some(limit_state.s < c),
        _ => None,
    };
    Ok(LimitReport {
        limit_state,
        iterations,
        converged,
        bound_ok,
        critical_alpha: critical,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "status", content = "day", rename_all = "snake_case")]
pub enum EntryTime {
    At(usize),
    NotFound,
    /// Fixed-point input: `A = B = 0` forever.
    NotApplicable,
}

/// First day on which the trajectory from `x0` lies in `M`.
pub fn entry_time_into_m(
    x0: &SimplexState,
    p: &Params,
    max_iter: usize,
) -> Result<EntryTime, ModelError> {
    p.ensure_admissible()?;
    x0.check()?;
    if x0.is_fixed_point() {
        return Ok(EntryTime::NotApplicable);
    }
    let mut x = *x0;
    for day in 0..=max_iter {
        if in_m(&x, p) {
            return Ok(EntryTime::At(day));
        }
        x = advance(&x, p);
        check_drift(&x)?;
    }
    Ok(EntryTime::NotFound)
}

/// Day and value of the largest infectious fraction; earliest day on ties.
pub fn peak(t: &Trajectory) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for (day, x) in t.states.iter().enumerate() {
        match best {
            Some((_, v)) if x.i <= v => {}
            _ => best = Some((day, x.i)),
        }
    }
    best
}

/// First day at or after the peak with `i < threshold`.
pub fn completion_day(t: &Trajectory, threshold: f64) -> Option<usize> {
    let (peak_day, _) = peak(t)?;
    t.states[peak_day..]
        .iter()
        .position(|x| x.i < threshold)
        .map(|k| peak_day + k)
}

/// `(s, e, i)` recovered from four consecutive recovered fractions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Reconstruction {
    pub s: f64,
    pub e: f64,
    pub i: f64,
}

/// Inverts the map from `v⁽ⁿ⁾ … v⁽ⁿ⁺³⁾`:
///
/// ```text
/// i = Δ₀ / b
/// e = (Δ₁ − (1 − b)Δ₀) / (ab)
/// s = (Δ₂ + (a + b − 2)Δ₁ + (1 − a)(1 − b)Δ₀) / (β(qΔ₁ + (a + bq − q)Δ₀))
/// ```
///
/// with `Δₖ = v⁽ⁿ⁺ᵏ⁺¹⁾ − v⁽ⁿ⁺ᵏ⁾`. These are the direct quotients in
/// v regrouped into first differences; the coefficients of each quotient
/// sum to zero, and differencing first avoids cancelling large `v` terms.
pub fn reconstruct_from_v(window: [f64; 4], p: &Params) -> Result<Reconstruction, ModelError> {
    p.ensure_admissible()?;
    let Params { beta, q, a, b } = *p;
    if a <= 0.0 || b <= 0.0 || beta <= 0.0 {
        return Err(ModelError::DegenerateWindow(
            "reconstruction needs a, b, β > 0",
        ));
    }
    let [v0, v1, v2, v3] = window;
    let (d0, d1, d2) = (v1 - v0, v2 - v1, v3 - v2);
    let i = d0 / b;
    let e = (d1 - (1.0 - b) * d0) / (a * b);
    let numer = d2 + (a + b - 2.0) * d1 + (1.0 - a) * (1.0 - b) * d0;
    let denom = q * d1 + (a + b * q - q) * d0;
    // Below this the sign of the denominator is not resolved by the window.
    let scale = window.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let noise = 8.0 * f64::EPSILON * scale * (1.0 + q);
    if denom.abs() <= noise {
        return Err(ModelError::DegenerateWindow(
            "s-quotient denominator vanishes",
        ));
    }
    Ok(Reconstruction {
        s: numer / (beta * denom),
        e,
        i,
    })
}

/// `ab·v⁽ⁿ⁺³⁾ − R(v⁽ⁿ⁾, v⁽ⁿ⁺¹⁾, v⁽ⁿ⁺²⁾)` where `R` is the quadratic
/// right-hand side of the four-term recurrence for the recovered fraction.
///
/// Evaluated after substituting `v⁽ⁿ⁺ᵏ⁺¹⁾ = v⁽ⁿ⁺ᵏ⁾ + Δₖ`; every monomial
/// then carries at least one difference, so constant windows give exactly 0.
pub fn recurrence_defect(window: [f64; 4], p: &Params) -> f64 {
    let Params { beta, q, a, b } = *p;
    let [v0, v1, v2, v3] = window;
    let (d0, d1, d2) = (v1 - v0, v2 - v1, v3 - v2);
    let ab = a * b;
    let k = a + b * q - q;

    let quadratic = beta
        * (q * d1 * d1
            + (a * q + a + 2.0 * b * q - 2.0 * q) * d0 * d1
            + (a + b - 1.0) * k * d0 * d0);
    let linear = ab
        * (d2
            + (a + b - beta * q - 2.0) * d1
            + (1.0 + ab - a - b + beta * q - a * beta - b * beta * q) * d0
            + beta * v0 * (q * d1 + k * d0));
    quadratic + linear
}

/// Absolute recurrence defect for every window of four consecutive days.
pub fn recurrence_residuals(t: &Trajectory) -> Vec<f64> {
    t.states
        .windows(4)
        .map(|w| recurrence_defect([w[0].r, w[1].r, w[2].r, w[3].r], &t.params).abs())
        .collect()
}

/// Largest absolute recurrence defect along `t`.
pub fn recurrence_residual(t: &Trajectory) -> Result<f64, ModelError> {
    if t.len() < 4 {
        return Err(ModelError::TooShort {
            needed: 4,
            have: t.len(),
        });
    }
    Ok(recurrence_residuals(t).into_iter().fold(0.0, f64::max))
}
