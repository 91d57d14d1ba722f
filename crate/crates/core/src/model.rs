//! Model parameters, states on the 3-simplex and the one-day evolution map.
//!
//! Coordinates are ordered `(s, e, i, r)`: susceptible, exposed, infectious
//! and recovered fractions of a closed population.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::ModelError;

/// Accepted deviation of `s + e + i + r` from 1, and of each coordinate below 0.
pub const SIMPLEX_TOL: f64 = 1e-12;

/// The four rates of the discrete SEIR map.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Params {
    /// Contact-transmission rate per day.
    pub beta: f64,
    /// Relative infectiousness of exposed contacts.
    pub q: f64,
    /// Exposed-to-infectious rate (reciprocal incubation period).
    pub a: f64,
    /// Recovery rate (reciprocal infectious period).
    pub b: f64,
}

/// A single failed admissibility inequality.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "condition", content = "value")]
pub enum Violation {
    /// `a ∈ [0, 1]` fails.
    A(f64),
    /// `b ∈ [0, 1]` fails.
    B(f64),
    /// `β ∈ [0, 1]` fails.
    Beta(f64),
    /// `q ≥ 0` fails.
    Q(f64),
    /// `βq ≤ 1` fails; carries the product.
    BetaQ(f64),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Violation::A(v) => write!(f, "a ∈ [0,1] (a = {v})"),
            Violation::B(v) => write!(f, "b ∈ [0,1] (b = {v})"),
            Violation::Beta(v) => write!(f, "β ∈ [0,1] (β = {v})"),
            Violation::Q(v) => write!(f, "q ≥ 0 (q = {v})"),
            Violation::BetaQ(v) => write!(f, "βq ≤ 1 (βq = {v})"),
        }
    }
}

/// Outcome of [`validate_params`]. Admissible exactly when `violations` is empty.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Admissibility {
    pub violations: Vec<Violation>,
}

impl Admissibility {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl Params {
    pub const fn new(beta: f64, q: f64, a: f64, b: f64) -> Self {
        Params { beta, q, a, b }
    }

    /// Rates used for the Uzbekistan scenario: 10-day incubation, 15-day
    /// infectious period, β = 0.12, q = 1.
    pub const fn uzbekistan() -> Self {
        Params::new(0.12, 1.0, 0.1, 0.066)
    }

    fn check_finite(&self) -> Result<(), ModelError> {
        for (name, value) in [
            ("beta", self.beta),
            ("q", self.q),
            ("a", self.a),
            ("b", self.b),
        ] {
            if !value.is_finite() {
                return Err(ModelError::NonFinite { name, value });
            }
        }
        Ok(())
    }

    /// Errors unless the parameters keep the simplex invariant.
    pub fn ensure_admissible(&self) -> Result<(), ModelError> {
        let verdict = validate_params(self)?;
        if verdict.is_ok() {
            Ok(())
        } else {
            Err(ModelError::Inadmissible(verdict.violations))
        }
    }
}

/// Checks `a, b, β ∈ [0,1]`, `q ≥ 0` and `βq ≤ 1`.
///
/// These are exactly the conditions under which the map sends the simplex
/// into itself (and under which its quadratic coefficients are probabilities).
pub fn validate_params(p: &Params) -> Result<Admissibility, ModelError> {
    p.check_finite()?;
    let unit = |v: f64| (0.0..=1.0).contains(&v);
    let mut violations = Vec::new();
    if !unit(p.a) {
        violations.push(Violation::A(p.a));
    }
    if !unit(p.b) {
        violations.push(Violation::B(p.b));
    }
    if !unit(p.beta) {
        violations.push(Violation::Beta(p.beta));
    }
    if p.q < 0.0 {
        violations.push(Violation::Q(p.q));
    }
    let product = p.beta * p.q;
    if product > 1.0 {
        violations.push(Violation::BetaQ(product));
    }
    Ok(Admissibility { violations })
}

/// A point `(s, e, i, r)` of the 3-simplex.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimplexState {
    pub s: f64,
    pub e: f64,
    pub i: f64,
    pub r: f64,
}

impl SimplexState {
    /// Builds a state, rejecting points off the simplex.
    pub fn new(s: f64, e: f64, i: f64, r: f64) -> Result<Self, ModelError> {
        let x = SimplexState { s, e, i, r };
        x.check()?;
        Ok(x)
    }

    /// Builds a state without any checks.
    pub const fn new_unchecked(s: f64, e: f64, i: f64, r: f64) -> Self {
        SimplexState { s, e, i, r }
    }

    /// The fixed point `(α, 0, 0, 1 − α)`.
    pub fn fixed_point(alpha: f64) -> Result<Self, ModelError> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(ModelError::AlphaOutOfRange(alpha));
        }
        Ok(SimplexState {
            s: alpha,
            e: 0.0,
            i: 0.0,
            r: 1.0 - alpha,
        })
    }

    /// Converts absolute compartment counts to fractions of `population`.
    pub fn from_counts(counts: [f64; 4], population: f64) -> Result<Self, ModelError> {
        if !(population.is_finite() && population > 0.0) {
            return Err(ModelError::OffSimplex(format!(
                "population must be positive, got {population}"
            )));
        }
        let total: f64 = counts.iter().sum();
        if (total - population).abs() > SIMPLEX_TOL * population.max(1.0) {
            return Err(ModelError::OffSimplex(format!(
                "counts sum to {total}, expected population {population}"
            )));
        }
        let [s, e, i, r] = counts.map(|c| c / population);
        SimplexState::new(s, e, i, r)
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.s, self.e, self.i, self.r]
    }

    pub fn from_array([s, e, i, r]: [f64; 4]) -> Self {
        SimplexState { s, e, i, r }
    }

    pub fn sum(&self) -> f64 {
        self.s + self.e + self.i + self.r
    }

    /// True when `e = i = 0`, i.e. the state is one of the fixed points.
    pub fn is_fixed_point(&self) -> bool {
        self.e == 0.0 && self.i == 0.0
    }

    /// Verifies coordinates in `[0, 1]` and unit sum, both up to [`SIMPLEX_TOL`].
    pub fn check(&self) -> Result<(), ModelError> {
        for (name, v) in [("s", self.s), ("e", self.e), ("i", self.i), ("r", self.r)] {
            if !v.is_finite() {
                return Err(ModelError::OffSimplex(format!(
                    "{name} = {v} is not finite"
                )));
            }
            if !(-SIMPLEX_TOL..=1.0 + SIMPLEX_TOL).contains(&v) {
                return Err(ModelError::OffSimplex(format!(
                    "{name} = {v} outside [0, 1]"
                )));
            }
        }
        let drift = (self.sum() - 1.0).abs();
        if drift > SIMPLEX_TOL {
            return Err(ModelError::OffSimplex(format!(
                "coordinates sum to 1 {} {drift:e}",
                if self.sum() > 1.0 { "+" } else { "-" }
            )));
        }
        Ok(())
    }
}

impl fmt::Display for SimplexState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {}, {})", self.s, self.e, self.i, self.r)
    }
}

/// New infections during one day: `β s (i + q e)`.
#[inline]
pub fn incidence(x: &SimplexState, p: &Params) -> f64 {
    p.beta * x.s * (x.i + p.q * x.e)
}

/// The raw map with no validation. Callers guarantee admissibility.
#[inline]
pub(crate) fn advance(x: &SimplexState, p: &Params) -> SimplexState {
    let infections = incidence(x, p);
    let onsets = p.a * x.e;
    let recoveries = p.b * x.i;
    SimplexState {
        s: x.s - infections,
        e: x.e - onsets + infections,
        i: x.i - recoveries + onsets,
        r: x.r + recoveries,
    }
}

/// Drift check applied to map outputs. Outputs are never renormalized.
pub(crate) fn check_drift(x: &SimplexState) -> Result<(), ModelError> {
    let drift = (x.sum() - 1.0).abs();
    if drift > SIMPLEX_TOL || !drift.is_finite() {
        return Err(ModelError::Drift { drift });
    }
    Ok(())
}

/// One day of the SEIR evolution.
pub fn step(x: &SimplexState, p: &Params) -> Result<SimplexState, ModelError> {
    p.ensure_admissible()?;
    x.check()?;
    let next = advance(x, p);
    check_drift(&next)?;
    Ok(next)
}
