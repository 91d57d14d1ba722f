//! Linearization at the fixed points `Λ(α) = (α, 0, 0, 1 − α)`.
//!
//! The map is reduced to `(s, e, i)` by dropping the recovered coordinate.
//! Its Jacobian at `Λ(α)` has a unit eigenvalue and a 2×2 block whose
//! eigenvalues have closed forms; the position of `α` relative to
//! `ab / (β(a + bq))` decides whether the middle eigenvalue leaves the
//! unit disk.

use serde::Serialize;

use crate::error::ModelError;
use crate::model::Params;

pub type Matrix3 = [[f64; 3]; 3];

/// Relative half-width of the band treated as "at" the critical threshold.
pub const TIE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Below,
    At,
    Above,
}

/// Dimensions of the stable, center and unstable eigenspaces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct EigenspaceDims {
    pub stable: usize,
    pub center: usize,
    pub unstable: usize,
}

impl EigenspaceDims {
    pub const fn new(stable: usize, center: usize, unstable: usize) -> Self {
        EigenspaceDims {
            stable,
            center,
            unstable,
        }
    }

    pub fn total(&self) -> usize {
        self.stable + self.center + self.unstable
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Eigenvalues {
    pub mu1: f64,
    pub mu2: f64,
    pub mu3: f64,
    /// Discriminant `(b − a + qαβ)² + 4aαβ` of the 2×2 block.
    pub discriminant: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectralReport {
    pub alpha: f64,
    pub mu1: f64,
    pub mu2: f64,
    pub mu3: f64,
    #[serde(rename = "D")]
    pub discriminant: f64,
    /// `None` when β = 0 and the threshold is undefined.
    pub critical_alpha: Option<f64>,
    /// `None` when β = 0.
    pub regime: Option<Regime>,
    pub dims: EigenspaceDims,
    /// Always true: μ₁ = 1 lies on the unit circle.
    pub nonhyperbolic: bool,
}

fn check_inputs(alpha: f64, p: &Params) -> Result<(), ModelError> {
    p.ensure_admissible()?;
    if !(0.0..=1.0).contains(&alpha) {
        return Err(ModelError::AlphaOutOfRange(alpha));
    }
    Ok(())
}

/// Jacobian of the reduced map at `Λ(α)`.
pub fn jacobian_at(alpha: f64, p: &Params) -> Result<Matrix3, ModelError> {
    check_inputs(alpha, p)?;
    let ba = p.beta * alpha;
    Ok([
        [1.0, -p.q * ba, -ba],
        [0.0, 1.0 - p.a + p.q * ba, ba],
        [0.0, p.a, 1.0 - p.b],
    ])
}

/// Closed-form eigenvalues at `Λ(α)`; μ₂ carries `−√D`, μ₃ carries `+√D`.
pub fn eigenvalues_at(alpha: f64, p: &Params) -> Result<Eigenvalues, ModelError> {
    check_inputs(alpha, p)?;
    let ab = alpha * p.beta;
    let shift = p.b - p.a + p.q * ab;
    let discriminant = shift * shift + 4.0 * p.a * ab;
    let root = discriminant.sqrt();
    let trace_gap = p.a + p.b - p.q * ab;
    Ok(Eigenvalues {
        mu1: 1.0,
        mu2: 1.0 - (trace_gap - root) / 2.0,
        mu3: 1.0 - (trace_gap + root) / 2.0,
        discriminant,
    })
}

/// Characteristic polynomial `(1 − μ)[(1 − a + qαβ − μ)(1 − b − μ) − aαβ]`.
pub fn characteristic_polynomial(mu: f64, alpha: f64, p: &Params) -> f64 {
    let ab = alpha * p.beta;
    (1.0 - mu) * ((1.0 - p.a + p.q * ab - mu) * (1.0 - p.b - mu) - p.a * ab)
}

/// The threshold `ab / (β(a + bq))`.
pub fn critical_alpha(p: &Params) -> Result<f64, ModelError> {
    if p.beta == 0.0 {
        return Err(ModelError::UndefinedThreshold("β = 0"));
    }
    let denom = p.a + p.b * p.q;
    if denom == 0.0 {
        return Err(ModelError::UndefinedThreshold("a + bq = 0"));
    }
    Ok(p.a * p.b / (p.beta * denom))
}

/// Places `alpha` relative to `critical` with the [`TIE_TOL`] band.
pub fn regime_of(alpha: f64, critical: f64) -> Regime {
    let band = TIE_TOL * critical.abs().max(1.0);
    if (alpha - critical).abs() <= band {
        Regime::At
    } else if alpha < critical {
        Regime::Below
    } else {
        Regime::Above
    }
}

impl Regime {
    pub fn dims(self) -> EigenspaceDims {
        match self {
            Regime::Below => EigenspaceDims::new(2, 1, 0),
            Regime::At => EigenspaceDims::new(1, 2, 0),
            Regime::Above => EigenspaceDims::new(1, 1, 1),
        }
    }
}

/// Full spectral classification of `Λ(α)`.
///
/// For β = 0 there is no threshold; the spectrum is `{1, 1 − a, 1 − b}` and
/// the dimensions are counted directly from the moduli.
pub fn classify(alpha: f64, p: &Params) -> Result<SpectralReport, ModelError> {
    let ev = eigenvalues_at(alpha, p)?;
    let (critical_alpha, regime, dims) = if p.beta == 0.0 {
        (None, None, count_dims(&[ev.mu1, ev.mu2, ev.mu3]))
    } else {
        match critical_alpha(p) {
            Ok(c) => {
                let regime = regime_of(alpha, c);
                (Some(c), Some(regime), regime.dims())
            }
            // a = 0 and bq = 0: the 2×2 block is triangular.
            Err(_) => (None, None, count_dims(&[ev.mu1, ev.mu2, ev.mu3])),
        }
    };
    Ok(SpectralReport {
        alpha,
        mu1: ev.mu1,
        mu2: ev.mu2,
        mu3: ev.mu3,
        discriminant: ev.discriminant,
        critical_alpha,
        regime,
        dims,
        nonhyperbolic: true,
    })
}

fn count_dims(mus: &[f64]) -> EigenspaceDims {
    let mut dims = EigenspaceDims::new(0, 0, 0);
    for &mu in mus {
        let gap = mu.abs() - 1.0;
        if gap.abs() <= TIE_TOL {
            dims.center += 1;
        } else if gap < 0.0 {
            dims.stable += 1;
        } else {
            dims.unstable += 1;
        }
    }
    dims
}

#[cfg(test)]
mod tests {
    use super::*;

    const UZ: Params = Params::uzbekistan();

    #[test]
    fn jacobian_at_zero_alpha() {
        let j = jacobian_at(0.0, &UZ).unwrap();
        assert_eq!(
            j,
            [[1.0, 0.0, 0.0], [0.0, 0.9, 0.0], [0.0, 0.1, 1.0 - 0.066]]
        );
    }

    #[test]
    fn jacobian_entry_and_first_column() {
        let j = jacobian_at(0.5, &UZ).unwrap();
        assert!((j[1][1] - 0.96).abs() < 1e-15);
        for alpha in [0.0, 0.3, 1.0] {
            let j = jacobian_at(alpha, &Params::new(0.7, 1.3, 0.2, 0.9)).unwrap();
            assert_eq!([j[0][0], j[1][0], j[2][0]], [1.0, 0.0, 0.0]);
        }
    }

    #[test]
    fn jacobian_rejects_alpha_out_of_range() {
        assert!(matches!(
            jacobian_at(-0.1, &UZ),
            Err(ModelError::AlphaOutOfRange(_))
        ));
        assert!(eigenvalues_at(1.5, &UZ).is_err());
    }

    #[test]
    fn triangular_spectrum_at_zero() {
        let ev = eigenvalues_at(0.0, &UZ).unwrap();
        assert_eq!(ev.mu1, 1.0);
        assert!((ev.mu2 - 0.934).abs() < 1e-15);
        assert!((ev.mu3 - 0.9).abs() < 1e-15);
    }

    #[test]
    fn critical_alpha_values() {
        let c = critical_alpha(&UZ).unwrap();
        assert!((c - 0.0066 / 0.01992).abs() < 1e-15);
        assert!((c - 0.331_325_301_204_819_3).abs() < 1e-12);
        let p = Params::new(0.4, 0.0, 0.2, 0.1);
        assert!((critical_alpha(&p).unwrap() - 0.25).abs() < 1e-15);
        // a = b = 0.2, q = 1, β = 0.5: 0.04 / (0.5 · 0.4) = 0.2
        let p = Params::new(0.5, 1.0, 0.2, 0.2);
        assert!((critical_alpha(&p).unwrap() - 0.2).abs() < 1e-15);
        assert!(critical_alpha(&Params::new(0.0, 1.0, 0.1, 0.1)).is_err());
    }

    #[test]
    fn middle_eigenvalue_touches_unit_circle_at_threshold() {
        let c = critical_alpha(&UZ).unwrap();
        let ev = eigenvalues_at(c, &UZ).unwrap();
        assert!((ev.mu2.abs() - 1.0).abs() < 1e-12);
        assert!(ev.mu3.abs() < 1.0);
    }

    #[test]
    fn classification_table() {
        let below = classify(0.0, &UZ).unwrap();
        assert_eq!(below.regime, Some(Regime::Below));
        assert_eq!(below.dims, EigenspaceDims::new(2, 1, 0));
        let at = classify(critical_alpha(&UZ).unwrap(), &UZ).unwrap();
        assert_eq!(at.regime, Some(Regime::At));
        assert_eq!(at.dims, EigenspaceDims::new(1, 2, 0));
        let above = classify(1.0, &UZ).unwrap();
        assert_eq!(above.regime, Some(Regime::Above));
        assert_eq!(above.dims, EigenspaceDims::new(1, 1, 1));
        assert!(above.nonhyperbolic);
    }

    #[test]
    fn zero_beta_has_no_regime() {
        let r = classify(0.4, &Params::new(0.0, 1.0, 0.1, 0.066)).unwrap();
        assert_eq!(r.regime, None);
        assert_eq!(r.critical_alpha, None);
        assert!((r.mu2 - 0.934).abs() < 1e-15);
        assert!((r.mu3 - 0.9).abs() < 1e-15);
        assert_eq!(r.dims, EigenspaceDims::new(2, 1, 0));
    }

    #[test]
    fn report_serializes_with_d_key() {
        let json = serde_json::to_value(classify(0.5, &UZ).unwrap()).unwrap();
        assert!(json.get("D").is_some());
        assert_eq!(json["regime"], "above");
        assert_eq!(json["dims"]["unstable"], 1);
    }
}
