//! Window radii for the spatial simulation.

use std::f64::consts::PI;

use crate::capacity::CapacityFunction;
use crate::channel::NetworkModel;
use crate::error::{Error, Result};
use crate::intensity::IntensityFunction;
use crate::numerics::{integrate_semi_infinite_scaled, log_gamma, Tolerance};

/// Largest expected number of BSs in the window.
pub const MAX_EXPECTED_BS: f64 = 2e5;
/// Largest expected number of users in the window.
pub const MAX_EXPECTED_USERS: f64 = 2e6;

const LOOSE: Tolerance = Tolerance {
    rel: 1e-6,
    abs: 1e-300,
    max_evaluations: 1_000_000,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Windows {
    /// BSs are simulated in the disk of this radius.
    pub bs_radius: f64,
    /// Users are simulated in the disk of this radius.
    pub user_radius: f64,
    /// Path-loss-fading values above this level are censored.
    pub beta_max: f64,
}

/// Smallest `x` with `P(Poisson(x) ≤ m) ≤ eps`.
fn poisson_quantile_mean(m: usize, eps: f64) -> f64 {
    let cdf = |x: f64| -> f64 {
        (0..=m)
            .map(|i| {
                let fi = i as f64;
                (fi * x.ln() - x - log_gamma(fi + 1.0)).exp()
            })
            .sum()
    };
    let (mut lo, mut hi) = (0.0, 1.0);
    while cdf(hi) > eps {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if cdf(mid) > eps {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

/// Level above which statistics are not needed: the largest threshold or
/// finite knot, and the level `ξ_{orders−1}` exceeds with probability `eps`.
pub fn beta_max(
    network: &NetworkModel,
    intensity: &IntensityFunction,
    thresholds: &[f64],
    functions: &[CapacityFunction],
    orders: usize,
    eps: f64,
) -> Result<f64> {
    let mut level = thresholds.iter().copied().fold(network.threshold, f64::max);
    for f in functions {
        if let Some(&k) = f.piecewise().knots().last() {
            level = level.max(k);
        }
    }
    if orders > 0 {
        let x = poisson_quantile_mean(orders - 1, eps);
        level = level.max(intensity.inverse(x / network.lambda_b)?);
    }
    Ok(level)
}

/// Smallest `r` (to 0.1%) with `tail(r) < eps`, for decreasing `tail`.
fn smallest_radius<F: Fn(f64) -> Result<f64>>(tail: F, start: f64, eps: f64) -> Result<f64> {
    let (mut lo, mut hi);
    if tail(start)? < eps {
        hi = start;
        lo = start / 2.0;
        while tail(lo)? < eps {
            hi = lo;
            lo /= 2.0;
            if lo < 1e-9 * start {
                return Ok(hi);
            }
        }
    } else {
        lo = start;
        hi = 2.0 * start;
        let mut doublings = 0;
        while tail(hi)? >= eps {
            lo = hi;
            hi *= 2.0;
            doublings += 1;
            if doublings > 60 {
                return Err(Error::WindowTooSmall(format!(
                    "tail mass still ≥ {eps} at radius {hi}"
                )));
            }
        }
    }
    while hi - lo > 1e-3 * hi {
        let mid = 0.5 * (lo + hi);
        if tail(mid)? < eps {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// `log B` on a log-spaced grid, for cheap repeated evaluation.
struct LogTable {
    log_beta0: f64,
    step: f64,
    log_b: Vec<f64>,
}

impl LogTable {
    fn new(intensity: &IntensityFunction, center: f64) -> Result<Self> {
        let step = 0.1 * std::f64::consts::LN_10;
        let log_beta0 = center.ln() - 160.0 * step;
        let log_b = (0..=200)
            .map(|i| {
                let b = intensity.value((log_beta0 + i as f64 * step).exp())?;
                Ok(b.max(f64::MIN_POSITIVE).ln())
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            log_beta0,
            step,
            log_b,
        })
    }

    fn value(&self, beta: f64) -> f64 {
        let x = (beta.ln() - self.log_beta0) / self.step;
        let n = self.log_b.len() - 1;
        let i = (x.floor().max(0.0) as usize).min(n - 1);
        let frac = x - i as f64;
        (self.log_b[i] + frac * (self.log_b[i + 1] - self.log_b[i])).exp()
    }
}

/// Smallest radius beyond which the mean number of BSs with a value below
/// `beta_max`, seen from the origin, is under `eps`.
pub fn truncation_radius(
    network: &NetworkModel,
    intensity: &IntensityFunction,
    beta_max: f64,
    eps: f64,
) -> Result<f64> {
    smallest_radius(
        |r| Ok(network.lambda_b * intensity.outside_radius(beta_max, r)?),
        1.0 / network.lambda_b.sqrt(),
        eps,
    )
}

/// Mean number of users beyond `radius` that would attach to a BS at the
/// origin: `λ_M ∫_{|x|>radius} E_h[e^{−λ_B B(1/(h L(x)))}] dx`.
pub struct AttachTail {
    network: NetworkModel,
    table: LogTable,
}

impl AttachTail {
    pub fn new(network: &NetworkModel, intensity: &IntensityFunction) -> Result<Self> {
        Ok(Self {
            network: *network,
            table: LogTable::new(intensity, intensity.inverse(1.0 / network.lambda_b)?)?,
        })
    }

    /// Probability that a user at distance `r` attaches to the origin BS.
    pub fn attach_probability(&self, r: f64) -> f64 {
        let g = self.network.path_loss.gain(r);
        let lambda_b = self.network.lambda_b;
        self.network
            .fading
            .expectation(|h| (-lambda_b * self.table.value(1.0 / (h * g))).exp(), &LOOSE)
            .unwrap_or(f64::NAN)
    }

    pub fn beyond(&self, radius: f64) -> Result<f64> {
        let q = integrate_semi_infinite_scaled(
            |s| 2.0 * PI * s * self.attach_probability(s),
            radius,
            1.0 / self.network.lambda_b.sqrt(),
            &LOOSE,
        )?;
        Ok(self.network.lambda_m * q.value)
    }

    /// Smallest radius with `beyond(radius) < eps`.
    pub fn radius(&self, eps: f64) -> Result<f64> {
        smallest_radius(|r| self.beyond(r), 1.0 / self.network.lambda_b.sqrt(), eps)
    }
}

/// Auto-sized windows: the BS radius is the larger of the truncation radius
/// and twice the user radius, and the user window is half the BS window.
pub fn auto_windows(
    network: &NetworkModel,
    intensity: &IntensityFunction,
    beta_max: f64,
    eps: f64,
) -> Result<Windows> {
    let r_trunc = truncation_radius(network, intensity, beta_max, eps)?;
    let r_user = AttachTail::new(network, intensity)?.radius(eps)?;
    let bs_radius = r_trunc.max(2.0 * r_user);
    let windows = Windows {
        bs_radius,
        user_radius: bs_radius / 2.0,
        beta_max,
    };
    check_budget(network, &windows)?;
    Ok(windows)
}

pub fn check_budget(network: &NetworkModel, windows: &Windows) -> Result<()> {
    let bs = network.lambda_b * PI * windows.bs_radius.powi(2);
    let users = network.lambda_m * PI * windows.user_radius.powi(2);
    if bs > MAX_EXPECTED_BS || users > MAX_EXPECTED_USERS {
        return Err(Error::WindowTooSmall(format!(
            "window needs {bs:.0} BSs and {users:.0} users on average"
        )));
    }
    Ok(())
}
