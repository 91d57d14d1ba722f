//! The SEIR map written as a quadratic stochastic operator
//! `x'_k = Σ_{i,j} P_{ij,k} x_i x_j` on the 3-simplex.
//!
//! Indices here are 0-based (`0..4` ↔ `s, e, i, r`); the text dump uses
//! 1-based indices.

use std::fmt::Write as _;

use serde::Serialize;

use crate::error::ModelError;
use crate::model::{Params, SimplexState};

pub const DIM: usize = 4;

/// Dense `4 × 4 × 4` coefficient array, indexed `[i][j][k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct QsoTensor {
    entries: [[[f64; DIM]; DIM]; DIM],
}

impl QsoTensor {
    pub fn from_entries(entries: [[[f64; DIM]; DIM]; DIM]) -> Self {
        QsoTensor { entries }
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.entries[i][j][k]
    }

    /// Sets a single entry. Symmetry is not restored.
    pub fn set(&mut self, i: usize, j: usize, k: usize, value: f64) {
        self.entries[i][j][k] = value;
    }

    pub fn entries(&self) -> &[[[f64; DIM]; DIM]; DIM] {
        &self.entries
    }

    /// Text dump: one `i j k value` line per nonzero entry with `i ≤ j`,
    /// 1-based indices, 17 significant digits, sorted by `(i, j, k)`.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for i in 0..DIM {
            for j in i..DIM {
                for k in 0..DIM {
                    let v = self.entries[i][j][k];
                    if v != 0.0 {
                        let _ = writeln!(out, "{} {} {} {}", i + 1, j + 1, k + 1, fmt_sig17(v));
                    }
                }
            }
        }
        out
    }
}

/// Formats with 17 significant digits, enough for a lossless f64 round trip.
pub fn fmt_sig17(v: f64) -> String {
    format!("{v:.16e}")
}

/// Builds the coefficient tensor of the SEIR map.
///
/// Admissibility is not required: inadmissible parameters produce tensors
/// with negative entries, which [`verify_tensor`] reports.
pub fn build_tensor(p: &Params) -> Result<QsoTensor, ModelError> {
    crate::model::validate_params(p)?;
    let Params { beta, q, a, b } = *p;
    let mut t = [[[0.0; DIM]; DIM]; DIM];

    // Diagonal entries P_{ii,k}.
    let diagonal: [(usize, usize, f64); 6] = [
        (0, 0, 1.0),
        (1, 1, 1.0 - a),
        (1, 2, a),
        (2, 2, 1.0 - b),
        (2, 3, b),
        (3, 3, 1.0),
    ];
    for (i, k, v) in diagonal {
        t[i][i][k] = v;
    }

    // Off-diagonal entries as 2P_{ij,k}, i < j.
    let twice: [(usize, usize, usize, f64); 17] = [
        (0, 1, 0, 1.0 - beta * q),
        (0, 1, 1, 1.0 - a + beta * q),
        (0, 1, 2, a),
        (0, 2, 0, 1.0 - beta),
        (0, 2, 1, beta),
        (0, 2, 2, 1.0 - b),
        (0, 2, 3, b),
        (0, 3, 0, 1.0),
        (0, 3, 3, 1.0),
        (1, 2, 1, 1.0 - a),
        (1, 2, 2, 1.0 + a - b),
        (1, 2, 3, b),
        (1, 3, 1, 1.0 - a),
        (1, 3, 2, a),
        (1, 3, 3, 1.0),
        (2, 3, 2, 1.0 - b),
        (2, 3, 3, 1.0 + b),
    ];
    for (i, j, k, v) in twice {
        t[i][j][k] = v / 2.0;
        t[j][i][k] = v / 2.0;
    }

    Ok(QsoTensor { entries: t })
}

/// Evaluates `x'_k = Σ_i Σ_j P_{ij,k} x_i x_j`.
pub fn apply(t: &QsoTensor, x: &SimplexState) -> Result<SimplexState, ModelError> {
    x.check()?;
    let xs = x.to_array();
    let mut out = [0.0; DIM];
    for (k, slot) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for i in 0..DIM {
            for j in 0..DIM {
                acc += t.entries[i][j][k] * xs[i] * xs[j];
            }
        }
        *slot = acc;
    }
    Ok(SimplexState::from_array(out))
}

/// One axiom family's worst offender.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AxiomCheck {
    pub passed: bool,
    /// Largest violation magnitude (0 when nothing is violated).
    pub worst: f64,
    /// 1-based `(i, j, k)` of the worst entry; `k` is 0 for pair-level checks.
    pub at: (usize, usize, usize),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TensorReport {
    pub tolerance: f64,
    pub symmetry: AxiomCheck,
    pub non_negativity: AxiomCheck,
    pub stochasticity: AxiomCheck,
}

impl TensorReport {
    pub fn passed(&self) -> bool {
        self.symmetry.passed && self.non_negativity.passed && self.stochasticity.passed
    }
}

/// Default tolerance for [`verify_tensor`].
pub const AXIOM_TOL: f64 = 1e-15;

/// Checks symmetry and row-stochasticity within `tol`. Non-negativity is
/// exact: any entry below zero fails, so a tensor passes exactly when
/// [`validate_params`](crate::model::validate_params) accepts its rates.
pub fn verify_tensor(t: &QsoTensor, tol: f64) -> TensorReport {
    let mut sym = (0.0_f64, (1, 1, 1));
    let mut neg = (0.0_f64, (1, 1, 1));
    let mut sto = (0.0_f64, (1, 1, 0));
    for i in 0..DIM {
        for j in 0..DIM {
            let mut row = 0.0;
            for k in 0..DIM {
                let v = t.entries[i][j][k];
                row += v;
                let asym = (v - t.entries[j][i][k]).abs();
                if asym > sym.0 || asym.is_nan() {
                    sym = (asym, (i + 1, j + 1, k + 1));
                }
                if -v > neg.0 || v.is_nan() {
                    neg = (-v, (i + 1, j + 1, k + 1));
                }
            }
            let residual = (row - 1.0).abs();
            if residual > sto.0 || residual.is_nan() {
                sto = (residual, (i + 1, j + 1, 0));
            }
        }
    }
    let check = |(worst, at): (f64, (usize, usize, usize)), tol: f64| AxiomCheck {
        passed: worst <= tol,
        worst,
        at,
    };
    TensorReport {
        tolerance: tol,
        symmetry: check(sym, tol),
        non_negativity: check(neg, 0.0),
        stochasticity: check(sto, tol),
    }
}

/// Per-coordinate agreement between [`apply`] and the raw map on the simplex.
pub const EQUIVALENCE_TOL: f64 = 1e-14;
