#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use seir_qso::{Params, SimplexState};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform point on the 3-simplex (flat Dirichlet), renormalized so the
/// coordinate sum is 1 to rounding.
pub fn simplex_point<R: Rng>(rng: &mut R) -> SimplexState {
    let w: [f64; 4] = std::array::from_fn(|_| -(1.0 - rng.random::<f64>()).ln());
    let total: f64 = w.iter().sum();
    let [s, e, i, r] = w.map(|x| x / total);
    SimplexState::new(s, e, i, r).expect("normalized weights lie on the simplex")
}

/// Point on the simplex with `e + i > 0`.
pub fn non_fixed_point<R: Rng>(rng: &mut R) -> SimplexState {
    loop {
        let x = simplex_point(rng);
        if !x.is_fixed_point() {
            return x;
        }
    }
}

/// Admissible rates with a, b ≥ 0.01 and β > 0.
pub fn admissible_params<R: Rng>(rng: &mut R) -> Params {
    let beta: f64 = rng.random_range(0.01..=1.0);
    let q = rng.random_range(0.0..=(1.0 / beta).min(5.0));
    Params::new(
        beta,
        q,
        rng.random_range(0.01..=1.0),
        rng.random_range(0.01..=1.0),
    )
}

pub fn uzbekistan_start() -> SimplexState {
    SimplexState::new(0.99999, 0.0, 0.00001, 0.0).unwrap()
}

pub fn max_abs_diff(x: &SimplexState, y: &SimplexState) -> f64 {
    x.to_array()
        .iter()
        .zip(y.to_array())
        .map(|(u, v)| (u - v).abs())
        .fold(0.0, f64::max)
}

/// Literal form of the recurrence `ab·v⁽ⁿ⁺³⁾ = R(v⁽ⁿ⁾, v⁽ⁿ⁺¹⁾, v⁽ⁿ⁺²⁾)`,
/// returning `ab·v⁽ⁿ⁺³⁾ − R`. Independent of the library's difference form.
pub fn literal_recurrence_defect(w: [f64; 4], p: &Params) -> f64 {
    let Params { beta, q, a, b } = *p;
    let [v, v1, v2, v3] = w;
    let rhs = -beta * q * v2 * v2
        - beta * (2.0 * b * q - 4.0 * q + a + a * q) * v2 * v1
        - beta * (q * (1.0 - a) * (1.0 - b) + (q - a - b * q)) * v2 * v
        - beta * (a + b * q - 2.0 * q) * (a + b - 2.0) * v1 * v1
        - beta
            * ((1.0 - a) * (1.0 - b) * (a + b * q - 2.0 * q) + (a + b - 2.0) * (q - a - b * q))
            * v1
            * v
        - beta * (1.0 - a) * (1.0 - b) * (q - a - b * q) * v * v
        - a * b * (a + b - beta * q - 3.0) * v2
        - a * b * (3.0 + a * b - 2.0 * a - 2.0 * b - beta * (a + b * q - 2.0 * q)) * v1
        - a * b * (a + b - a * b - 1.0 - beta * (q - a - b * q)) * v;
    a * b * v3 - rhs
}
