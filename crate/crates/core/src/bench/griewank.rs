//! The modified Griewank function on `[-1, 1]^d`.

use std::f64::consts::PI;

use crate::objective::{BoxBounds, Objective};

/// `prod_l cos(2 pi x_l / sqrt(l)) - sum_l 4 pi^2 x_l^2 / 100`, maximal (1)
/// at the origin.
pub fn griewank_mod(x: &[f64]) -> f64 {
    let mut prod = 1.0;
    let mut sum = 0.0;
    for (i, &v) in x.iter().enumerate() {
        let l = (i + 1) as f64;
        prod *= (2.0 * PI * v / l.sqrt()).cos();
        sum += 4.0 * PI * PI * v * v / 100.0;
    }
    prod - sum
}

/// Lower bound of [`griewank_mod`] on the box, negated: adding it keeps
/// every value non-negative.
pub fn griewank_shift(d: usize) -> f64 {
    1.0 + 4.0 * PI * PI * d as f64 / 100.0
}

pub fn griewank_objective(d: usize) -> Objective {
    Objective::new(|x: &[f64]| griewank_mod(x), BoxBounds::cube(d, -1.0, 1.0))
        .with_known_max(1.0)
        .with_shift(griewank_shift(d))
}
