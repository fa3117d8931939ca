use libm::erfc;
use libm::{lgamma, tgamma};

use crate::error::{Error, Result};

/// Standard normal tail probability `P(N(0,1) > a)`.
pub fn q_function(a: f64) -> f64 {
    if a.is_nan() {
        return f64::NAN;
    }
    0.5 * erfc(a / std::f64::consts::SQRT_2)
}

/// Upper incomplete gamma function `Γ(a, b) = ∫_b^∞ t^(a−1) e^(−t) dt`
/// (not regularized).
///
/// Uses the power series of the lower function for `b < a + 1` and a
/// modified Lentz continued fraction otherwise.
pub fn upper_incomplete_gamma(a: f64, b: f64) -> Result<f64> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(Error::domain(format!("shape must be positive, got {a}")));
    }
    if !(b >= 0.0) {
        return Err(Error::domain(format!(
            "lower limit must be nonnegative, got {b}"
        )));
    }
    if b == 0.0 {
        return Ok(tgamma(a));
    }
    if b.is_infinite() {
        return Ok(0.0);
    }
    if b < a + 1.0 {
        Ok(tgamma(a) - lower_series(a, b))
    } else {
        Ok(upper_continued_fraction(a, b))
    }
}

/// `γ(a, b)` by its power series; accurate for `b < a + 1`.
fn lower_series(a: f64, b: f64) -> f64 {
    let mut term = 1.0 / a;
    let mut sum = term;
    let mut denom = a;
    for _ in 0..1000 {
        denom += 1.0;
        term *= b / denom;
        sum += term;
        if term.abs() < sum.abs() * f64::EPSILON {
            break;
        }
    }
    (a * b.ln() - b).exp() * sum
}

/// `Γ(a, b)` by Lentz's continued fraction; accurate for `b ≥ a + 1`.
fn upper_continued_fraction(a: f64, b: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut bb = b + 1.0 - a;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / bb;
    let mut h = d;
    for i in 1..1000 {
        let an = -(i as f64) * (i as f64 - a);
        bb += 2.0;
        d = an * d + bb;
        if d.abs() < TINY {
            d = TINY;
        }
        c = bb + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < f64::EPSILON {
            break;
        }
    }
    (a * b.ln() - b).exp() * h
}

/// `ln Γ(x)` for `x > 0`.
pub fn log_gamma(x: f64) -> f64 {
    lgamma(x)
}
