//! Exhaustive grid search for parameters matching an epidemic's peak day
//! and, optionally, its completion day.
//!
//! Day indices are piecewise constant in the parameters, so the loss has no
//! useful gradient; every grid point is evaluated.

use std::cmp::Ordering;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{CalibrationError, ModelError};
use crate::model::{advance, check_drift, validate_params, Params, SimplexState};

/// Longest simulated horizon, in days.
pub const HORIZON_CAP: usize = 20_000;
/// Added to the completion term when the horizon ends before completion.
pub const CAP_PENALTY: f64 = 1_000.0;
/// Largest grid [`grid_search`] will evaluate.
pub const MAX_GRID_POINTS: u128 = 1_000_000;
/// Grid resolution of [`SearchBox::default`] per free axis.
pub const DEFAULT_RESOLUTION: usize = 20;
/// Number of runner-up candidates kept in a [`CalibrationResult`].
pub const RUNNERS_UP: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationTarget {
    pub peak_day: usize,
    pub completion_day: Option<usize>,
    /// Population size `N`; the default completion threshold is `1/N`.
    pub population: f64,
    pub initial_state: SimplexState,
    /// Overrides the `1/N` completion threshold.
    #[serde(default)]
    pub completion_threshold: Option<f64>,
}

impl CalibrationTarget {
    pub fn threshold(&self) -> f64 {
        self.completion_threshold.unwrap_or(1.0 / self.population)
    }

    pub fn validate(&self) -> Result<(), CalibrationError> {
        let bad = |m: String| Err(CalibrationError::InvalidTarget(m));
        if !(self.population.is_finite() && self.population > 0.0) {
            return bad(format!(
                "population must be positive, got {}",
                self.population
            ));
        }
        if self.peak_day == 0 {
            return bad("target peak day must be positive".into());
        }
        if let Some(c) = self.completion_day {
            if c <= self.peak_day {
                return bad(format!(
                    "completion day {c} must come after peak day {}",
                    self.peak_day
                ));
            }
        }
        let thr = self.threshold();
        if !(thr.is_finite() && thr > 0.0) {
            return bad(format!("completion threshold must be positive, got {thr}"));
        }
        self.initial_state.check()?;
        Ok(())
    }
}

/// Closed interval sampled at `points` evenly spaced values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
}

impl Axis {
    pub const fn new(lo: f64, hi: f64, points: usize) -> Self {
        Axis { lo, hi, points }
    }

    pub const fn fixed(value: f64) -> Self {
        Axis {
            lo: value,
            hi: value,
            points: 1,
        }
    }

    pub fn value(&self, k: usize) -> f64 {
        if self.points <= 1 {
            self.lo
        } else if k + 1 == self.points {
            self.hi
        } else {
            self.lo + (self.hi - self.lo) * k as f64 / (self.points - 1) as f64
        }
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.points).map(|k| self.value(k)).collect()
    }

    /// Same interval with the spacing halved.
    pub fn refined(&self) -> Axis {
        if self.points <= 1 {
            *self
        } else {
            Axis {
                points: 2 * self.points - 1,
                ..*self
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchBox {
    pub a: Axis,
    pub b: Axis,
    pub beta: Axis,
    pub q: Axis,
}

impl Default for SearchBox {
    /// Literature ranges: a ∈ [0.07, 0.5], b ∈ [0.05, 0.1], β ∈ [0.1, 0.3],
    /// with q held at 1.
    fn default() -> Self {
        SearchBox {
            a: Axis::new(0.07, 0.5, DEFAULT_RESOLUTION),
            b: Axis::new(0.05, 0.1, DEFAULT_RESOLUTION),
            beta: Axis::new(0.1, 0.3, DEFAULT_RESOLUTION),
            q: Axis::fixed(1.0),
        }
    }
}

impl SearchBox {
    /// Single-point box.
    pub fn point(p: &Params) -> Self {
        SearchBox {
            a: Axis::fixed(p.a),
            b: Axis::fixed(p.b),
            beta: Axis::fixed(p.beta),
            q: Axis::fixed(p.q),
        }
    }

    pub fn refined(&self) -> Self {
        SearchBox {
            a: self.a.refined(),
            b: self.b.refined(),
            beta: self.beta.refined(),
            q: self.q.refined(),
        }
    }

    fn axes(&self) -> [(&'static str, &Axis); 4] {
        [
            ("a", &self.a),
            ("b", &self.b),
            ("beta", &self.beta),
            ("q", &self.q),
        ]
    }

    pub fn size(&self) -> u128 {
        self.axes()
            .iter()
            .map(|(_, ax)| ax.points as u128)
            .product()
    }

    /// Grid point with flat index `idx`, ordered lexicographically by
    /// `(a, b, β, q)`.
    pub fn params_at(&self, idx: usize) -> Params {
        let nq = self.q.points;
        let nbeta = self.beta.points;
        let nb = self.b.points;
        let iq = idx % nq;
        let ibeta = (idx / nq) % nbeta;
        let ib = (idx / (nq * nbeta)) % nb;
        let ia = idx / (nq * nbeta * nb);
        Params::new(
            self.beta.value(ibeta),
            self.q.value(iq),
            self.a.value(ia),
            self.b.value(ib),
        )
    }

    /// Checks shape, the evaluation cap and that every grid point is admissible.
    pub fn validate(&self, cap: u128) -> Result<(), CalibrationError> {
        for (name, ax) in self.axes() {
            if ax.points == 0 {
                return Err(CalibrationError::EmptyBox(format!(
                    "axis `{name}` has no points"
                )));
            }
            if !(ax.lo.is_finite() && ax.hi.is_finite()) || ax.lo > ax.hi {
                return Err(CalibrationError::EmptyBox(format!(
                    "axis `{name}` has invalid range [{}, {}]",
                    ax.lo, ax.hi
                )));
            }
        }
        let points = self.size();
        if points > cap {
            return Err(CalibrationError::GridTooLarge { points, cap });
        }
        for idx in 0..points as usize {
            let p = self.params_at(idx);
            if !validate_params(&p)?.is_ok() {
                return Err(CalibrationError::InadmissibleBox(format!("{p:?}")));
            }
        }
        Ok(())
    }
}

/// Peak and completion days of one run, from a horizon extended until
/// completion or [`HORIZON_CAP`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct EpidemicDays {
    pub peak_day: usize,
    pub completion_day: Option<usize>,
}

/// Simulates just far enough to know the peak and completion days.
pub fn epidemic_days(
    x0: &SimplexState,
    p: &Params,
    threshold: f64,
) -> Result<EpidemicDays, ModelError> {
    p.ensure_admissible()?;
    x0.check()?;
    let mut x = *x0;
    let (mut peak_day, mut peak_value) = (0, x.i);
    let mut completion = None;
    let mut below_since_peak = x.i < threshold;
    if below_since_peak {
        completion = Some(0);
    }
    for day in 1..=HORIZON_CAP {
        x = advance(&x, p);
        check_drift(&x)?;
        if x.i > peak_value {
            peak_day = day;
            peak_value = x.i;
            below_since_peak = x.i < threshold;
            completion = below_since_peak.then_some(day);
        } else if !below_since_peak && x.i < threshold {
            below_since_peak = true;
            completion = Some(day);
        }
        // Once e and i are both falling (the post-peak set), i cannot rise again.
        if completion.is_some() && crate::trajectory::in_m(&x, p) {
            break;
        }
    }
    Ok(EpidemicDays {
        peak_day,
        completion_day: completion,
    })
}

/// `|peak − target| + |completion − target|`, the second term only when a
/// completion target is set.
pub fn objective(p: &Params, target: &CalibrationTarget) -> Result<f64, ModelError> {
    let days = epidemic_days(&target.initial_state, p, target.threshold())?;
    Ok(loss_of(&days, target))
}

fn loss_of(days: &EpidemicDays, target: &CalibrationTarget) -> f64 {
    let gap = |x: usize, y: usize| (x as f64 - y as f64).abs();
    let mut loss = gap(days.peak_day, target.peak_day);
    if let Some(want) = target.completion_day {
        loss += match days.completion_day {
            Some(got) => gap(got, want),
            None => gap(HORIZON_CAP, want) + CAP_PENALTY,
        };
    }
    loss
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Candidate {
    pub params: Params,
    pub loss: f64,
    pub peak_day: usize,
    pub completion_day: Option<usize>,
    /// Flat grid index.
    pub index: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CalibrationResult {
    pub best: Candidate,
    pub runners_up: Vec<Candidate>,
    pub evaluated: usize,
}

fn rank(x: &Candidate, y: &Candidate) -> Ordering {
    x.loss
        .total_cmp(&y.loss)
        .then(x.params.a.total_cmp(&y.params.a))
        .then(x.params.b.total_cmp(&y.params.b))
        .then(x.params.beta.total_cmp(&y.params.beta))
        .then(x.params.q.total_cmp(&y.params.q))
        .then(x.index.cmp(&y.index))
}

/// Evaluates every grid point of `search` and ranks by loss, breaking ties
/// lexicographically on `(a, b, β, q)`.
pub fn grid_search(
    search: &SearchBox,
    target: &CalibrationTarget,
) -> Result<CalibrationResult, CalibrationError> {
    grid_search_capped(search, target, MAX_GRID_POINTS)
}

pub fn grid_search_capped(
    search: &SearchBox,
    target: &CalibrationTarget,
    cap: u128,
) -> Result<CalibrationResult, CalibrationError> {
    target.validate()?;
    search.validate(cap)?;
    let n = search.size() as usize;
    let threshold = target.threshold();
    // Results are collected by grid index, so arrival order does not matter.
    let mut candidates = (0..n)
        .into_par_iter()
        .map(|index| {
            let params = search.params_at(index);
            let days = epidemic_days(&target.initial_state, &params, threshold)?;
            Ok(Candidate {
                params,
                loss: loss_of(&days, target),
                peak_day: days.peak_day,
                completion_day: days.completion_day,
                index,
            })
        })
        .collect::<Result<Vec<_>, ModelError>>()?;
    candidates.sort_by(rank);
    let best = candidates[0];
    let runners_up = candidates
        .iter()
        .skip(1)
        .take(RUNNERS_UP)
        .copied()
        .collect();
    Ok(CalibrationResult {
        best,
        runners_up,
        evaluated: n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uz_target(peak_day: usize, completion_day: Option<usize>) -> CalibrationTarget {
        CalibrationTarget {
            peak_day,
            completion_day,
            population: 34e6,
            initial_state: SimplexState::new(0.99999, 0.0, 0.00001, 0.0).unwrap(),
            completion_threshold: None,
        }
    }

    #[test]
    fn planted_truth_has_zero_loss() {
        let p = Params::uzbekistan();
        let t0 = uz_target(1, None);
        let days = epidemic_days(&t0.initial_state, &p, t0.threshold()).unwrap();
        let tgt = uz_target(days.peak_day, days.completion_day);
        assert_eq!(objective(&p, &tgt).unwrap(), 0.0);
        let worse = Params { beta: 0.2, ..p };
        assert!(objective(&worse, &tgt).unwrap() > 0.0);
    }

    #[test]
    fn observed_peak_within_ten_days() {
        assert!(objective(&Params::uzbekistan(), &uz_target(140, None)).unwrap() <= 10.0);
    }

    #[test]
    fn epidemic_days_match_full_simulation() {
        let x0 = SimplexState::new(0.99999, 0.0, 0.00001, 0.0).unwrap();
        let p = Params::uzbekistan();
        let days = epidemic_days(&x0, &p, 1.0 / 34e6).unwrap();
        let t = crate::trajectory::simulate(&x0, &p, 1000).unwrap();
        assert_eq!(
            Some(days.peak_day),
            crate::trajectory::peak(&t).map(|x| x.0)
        );
        assert_eq!(
            days.completion_day,
            crate::trajectory::completion_day(&t, 1.0 / 34e6)
        );
    }

    #[test]
    fn missing_completion_is_penalized() {
        // Recovery so slow that i stays above 1/N for the whole horizon.
        let slow = Params::new(0.12, 1.0, 0.1, 0.0005);
        let tgt = uz_target(145, Some(300));
        let days = epidemic_days(&tgt.initial_state, &slow, tgt.threshold()).unwrap();
        assert_eq!(days.completion_day, None);
        let loss = objective(&slow, &tgt).unwrap();
        let peak_gap = (days.peak_day as f64 - 145.0).abs();
        assert_eq!(loss, peak_gap + (HORIZON_CAP - 300) as f64 + CAP_PENALTY);
    }

    #[test]
    fn degenerate_box_returns_its_point() {
        let p = Params::uzbekistan();
        let tgt = uz_target(145, None);
        let res = grid_search(&SearchBox::point(&p), &tgt).unwrap();
        assert_eq!(res.best.params, p);
        assert_eq!(res.best.loss, 0.0);
        assert!(res.runners_up.is_empty());
    }

    #[test]
    fn axis_values_hit_endpoints() {
        let ax = Axis::new(0.1, 0.3, 5);
        let want = [0.1, 0.15, 0.2, 0.25, 0.3];
        for (got, want) in ax.values().iter().zip(want) {
            assert!((got - want).abs() < 1e-15);
        }
        assert_eq!(ax.value(4), 0.3);
        assert_eq!(ax.refined().points, 9);
        assert_eq!(ax.refined().value(2), ax.value(1));
    }

    #[test]
    fn box_errors() {
        let tgt = uz_target(140, None);
        let mut empty = SearchBox::default();
        empty.a.points = 0;
        assert!(matches!(
            grid_search(&empty, &tgt),
            Err(CalibrationError::EmptyBox(_))
        ));
        let huge = SearchBox {
            q: Axis::new(0.5, 1.0, 200),
            ..SearchBox::default()
        };
        let err = grid_search(&huge, &tgt).unwrap_err();
        assert!(err.to_string().contains("grid too large"));
        let bad = SearchBox {
            beta: Axis::new(0.5, 0.9, 3),
            q: Axis::fixed(2.0),
            ..SearchBox::default()
        };
        assert!(matches!(
            grid_search(&bad, &tgt),
            Err(CalibrationError::InadmissibleBox(_))
        ));
    }

    #[test]
    fn target_errors() {
        let tgt = uz_target(140, Some(100));
        assert!(matches!(
            grid_search(&SearchBox::default(), &tgt),
            Err(CalibrationError::InvalidTarget(_))
        ));
    }
}
