use std::f64::consts::PI;

use crate::error::{Error, Result};

const SERIES_THRESHOLD: f64 = 1e-6;

/// Zeroth-order Boys function F₀(x) = ∫₀¹ exp(−x t²) dt.
pub fn boys_f0(x: f64) -> Result<f64> {
    if x < 0.0 || x.is_nan() {
        return Err(Error::Domain(format!("Boys function argument {x} is negative")));
    }
    Ok(boys_f0_unchecked(x))
}

#[inline]
pub(crate) fn boys_f0_unchecked(x: f64) -> f64 {
    if x < SERIES_THRESHOLD {
        1.0 - x / 3.0 + x * x / 10.0 - x * x * x / 42.0
    } else {
        let t = x.sqrt();
        0.5 * (PI / x).sqrt() * libm::erf(t)
    }
}
