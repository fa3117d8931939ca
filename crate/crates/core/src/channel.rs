//! Fading laws, radial path-loss gains and the network scenario bundle.
//!
//! Gains and thresholds are dimensionless: the transmit power is absorbed into
//! the coverage threshold, and `k` is the gain at unit distance on the same
//! normalized scale. Distances are in meters.

use std::f64::consts::{LN_10, PI};

use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::numerics::{
    integrate_semi_infinite_scaled, q_function, upper_incomplete_gamma, RandomStream, Tolerance,
};

const FADING_TOL: Tolerance = Tolerance {
    rel: 1e-11,
    abs: 1e-300,
    max_evaluations: 1_000_000,
};

/// Distribution of the i.i.d. fading mark `H`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FadingModel {
    /// `H = 10^(G/10)`, `G ~ N(0, sigma_db²)`.
    LogNormal { sigma_db: f64 },
    /// `H ~ Exp(mu)`.
    Rayleigh { mu: f64 },
    /// No fading: `H ≡ h`.
    Constant { h: f64 },
    /// Product of independent Rayleigh and log-normal factors.
    RayleighLogNormal { mu: f64, sigma_db: f64 },
}

fn positive(name: &str, v: f64) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Error::domain(format!("{name} must be positive and finite, got {v}")))
    }
}

/// Natural-log standard deviation of a log-normal factor given in dB.
pub fn sigma_db_to_nepers(sigma_db: f64) -> f64 {
    LN_10 * sigma_db / 10.0
}

fn std_normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * PI).sqrt()
}

/// `∫_ℝ φ(z) g(z) dz` against the standard normal density.
fn normal_expectation<G: Fn(f64) -> f64>(g: G, tol: &Tolerance) -> Result<f64> {
    let weighted = |z: f64, sign: f64| {
        let w = std_normal_pdf(z);
        if w == 0.0 {
            0.0
        } else {
            w * g(sign * z)
        }
    };
    let upper = integrate_semi_infinite_scaled(|z| weighted(z, 1.0), 0.0, 1.0, tol)?;
    let lower = integrate_semi_infinite_scaled(|z| weighted(z, -1.0), 0.0, 1.0, tol)?;
    Ok(upper.value + lower.value)
}

impl FadingModel {
    pub fn log_normal(sigma_db: f64) -> Result<Self> {
        Ok(Self::LogNormal {
            sigma_db: positive("sigma_db", sigma_db)?,
        })
    }

    pub fn rayleigh(mu: f64) -> Result<Self> {
        Ok(Self::Rayleigh {
            mu: positive("mu", mu)?,
        })
    }

    pub fn constant(h: f64) -> Result<Self> {
        Ok(Self::Constant {
            h: positive("h", h)?,
        })
    }

    pub fn rayleigh_log_normal(mu: f64, sigma_db: f64) -> Result<Self> {
        Ok(Self::RayleighLogNormal {
            mu: positive("mu", mu)?,
            sigma_db: positive("sigma_db", sigma_db)?,
        })
    }

    pub fn has_density(&self) -> bool {
        !matches!(self, Self::Constant { .. })
    }

    /// Density `p_H(t)`.
    pub fn pdf(&self, t: f64) -> Result<f64> {
        if !(t > 0.0) {
            return Err(Error::domain(format!("fading density needs t > 0, got {t}")));
        }
        match *self {
            Self::Constant { .. } => Err(Error::NoDensity),
            Self::Rayleigh { mu } => Ok(mu * (-mu * t).exp()),
            Self::LogNormal { sigma_db } => {
                let s = sigma_db_to_nepers(sigma_db);
                let l = t.ln();
                Ok((-(l * l) / (2.0 * s * s)).exp() / ((2.0 * PI).sqrt() * s * t))
            }
            Self::RayleighLogNormal { mu, sigma_db } => {
                // p_H(t) = E_S[(mu/S) exp(-mu t / S)], S = exp(s1 Z)
                let s = sigma_db_to_nepers(sigma_db);
                normal_expectation(
                    |z| {
                        let inv = (-s * z).exp();
                        mu * inv * (-mu * t * inv).exp()
                    },
                    &FADING_TOL,
                )
            }
        }
    }

    /// Tail `F_H(t) = P(H ≥ t)`.
    pub fn ccdf(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 1.0;
        }
        match *self {
            Self::Constant { h } => {
                if t <= h {
                    1.0
                } else {
                    0.0
                }
            }
            Self::Rayleigh { mu } => (-mu * t).exp(),
            Self::LogNormal { sigma_db } => q_function(t.ln() / sigma_db_to_nepers(sigma_db)),
            Self::RayleighLogNormal { mu, sigma_db } => {
                let s = sigma_db_to_nepers(sigma_db);
                // The integrand is bounded by φ(z), so the tolerance is always met.
                normal_expectation(|z| (-mu * t * (-s * z).exp()).exp(), &FADING_TOL)
                    .unwrap_or(f64::NAN)
            }
        }
    }

    /// `E(H^order)`.
    pub fn fractional_moment(&self, order: f64) -> Result<f64> {
        if !(order > 0.0) || !order.is_finite() {
            return Err(Error::domain(format!("moment order must be positive, got {order}")));
        }
        Ok(match *self {
            Self::Constant { h } => h.powf(order),
            Self::Rayleigh { mu } => rayleigh_moment(mu, order)?,
            Self::LogNormal { sigma_db } => log_normal_moment(sigma_db, order),
            Self::RayleighLogNormal { mu, sigma_db } => {
                rayleigh_moment(mu, order)? * log_normal_moment(sigma_db, order)
            }
        })
    }

    /// One draw of `H`.
    pub fn sample(&self, stream: &mut RandomStream) -> f64 {
        match *self {
            Self::Constant { h } => h,
            Self::Rayleigh { mu } => -stream.open01().ln() / mu,
            Self::LogNormal { sigma_db } => {
                let g: f64 = StandardNormal.sample(stream);
                10f64.powf(sigma_db * g / 10.0)
            }
            Self::RayleighLogNormal { mu, sigma_db } => {
                let r = -stream.open01().ln() / mu;
                let g: f64 = StandardNormal.sample(stream);
                r * 10f64.powf(sigma_db * g / 10.0)
            }
        }
    }

    /// `E φ(H)` by quadrature against the fading law.
    pub fn expectation<F: Fn(f64) -> f64>(&self, phi: F, tol: &Tolerance) -> Result<f64> {
        match *self {
            Self::Constant { h } => Ok(phi(h)),
            Self::Rayleigh { mu } => Ok(integrate_semi_infinite_scaled(
                |h| match mu * (-mu * h).exp() {
                    0.0 => 0.0,
                    w => w * phi(h),
                },
                0.0,
                1.0 / mu,
                tol,
            )?
            .value),
            Self::LogNormal { sigma_db } => {
                let s = sigma_db_to_nepers(sigma_db);
                normal_expectation(|z| phi((s * z).exp()), tol)
            }
            Self::RayleighLogNormal { mu, sigma_db } => {
                let s = sigma_db_to_nepers(sigma_db);
                let inner = |z: f64| {
                    let scale = (s * z).exp();
                    integrate_semi_infinite_scaled(
                        |r| match mu * (-mu * r).exp() {
                            0.0 => 0.0,
                            w => w * phi(r * scale),
                        },
                        0.0,
                        1.0 / mu,
                        tol,
                    )
                    .map(|q| q.value)
                    .unwrap_or(f64::NAN)
                };
                normal_expectation(inner, tol)
            }
        }
    }
}

fn rayleigh_moment(mu: f64, order: f64) -> Result<f64> {
    Ok(upper_incomplete_gamma(order + 1.0, 0.0)? * mu.powf(-order))
}

fn log_normal_moment(sigma_db: f64, order: f64) -> f64 {
    let s = sigma_db_to_nepers(sigma_db);
    (0.5 * order * order * s * s).exp()
}

/// Deterministic radial gain `L(z)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PathLossModel {
    /// `L(z) = k |z|^(-gamma)`.
    Exponent { k: f64, gamma: f64 },
    /// `L(z) = k min(r0^(-gamma), |z|^(-gamma))`.
    ModifiedExponent { k: f64, gamma: f64, r0: f64 },
}

fn check_gamma(gamma: f64) -> Result<f64> {
    if gamma >= 2.0 && gamma.is_finite() {
        Ok(gamma)
    } else {
        Err(Error::domain(format!("path-loss exponent must be at least 2, got {gamma}")))
    }
}

impl PathLossModel {
    pub fn exponent(k: f64, gamma: f64) -> Result<Self> {
        Ok(Self::Exponent {
            k: positive("k", k)?,
            gamma: check_gamma(gamma)?,
        })
    }

    pub fn modified_exponent(k: f64, gamma: f64, r0: f64) -> Result<Self> {
        Ok(Self::ModifiedExponent {
            k: positive("k", k)?,
            gamma: check_gamma(gamma)?,
            r0: positive("r0", r0)?,
        })
    }

    pub fn k(&self) -> f64 {
        match *self {
            Self::Exponent { k, .. } | Self::ModifiedExponent { k, .. } => k,
        }
    }

    pub fn gamma(&self) -> f64 {
        match *self {
            Self::Exponent { gamma, .. } | Self::ModifiedExponent { gamma, .. } => gamma,
        }
    }

    /// Reference distance below which the gain is clamped, if any.
    pub fn r0(&self) -> Option<f64> {
        match *self {
            Self::Exponent { .. } => None,
            Self::ModifiedExponent { r0, .. } => Some(r0),
        }
    }

    /// Gain at `distance`; `+∞` at the origin for the unclamped model.
    pub fn gain(&self, distance: f64) -> f64 {
        match *self {
            Self::Exponent { k, gamma } => {
                if distance == 0.0 {
                    f64::INFINITY
                } else {
                    k * distance.powf(-gamma)
                }
            }
            Self::ModifiedExponent { k, gamma, r0 } => k * distance.max(r0).powf(-gamma),
        }
    }
}

/// Scenario unit: BS and user intensities, channel, coverage threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NetworkModel {
    pub lambda_b: f64,
    pub lambda_m: f64,
    pub fading: FadingModel,
    pub path_loss: PathLossModel,
    pub threshold: f64,
}

impl NetworkModel {
    pub fn new(
        lambda_b: f64,
        lambda_m: f64,
        fading: FadingModel,
        path_loss: PathLossModel,
        threshold: f64,
    ) -> Result<Self> {
        Ok(Self {
            lambda_b: positive("lambda_b", lambda_b)?,
            lambda_m: positive("lambda_m", lambda_m)?,
            fading,
            path_loss,
            threshold: positive("threshold", threshold)?,
        })
    }

    pub fn with_lambda_b(self, lambda_b: f64) -> Result<Self> {
        Self::new(lambda_b, self.lambda_m, self.fading, self.path_loss, self.threshold)
    }

    pub fn with_lambda_m(self, lambda_m: f64) -> Result<Self> {
        Self::new(self.lambda_b, lambda_m, self.fading, self.path_loss, self.threshold)
    }

    pub fn with_threshold(self, threshold: f64) -> Result<Self> {
        Self::new(self.lambda_b, self.lambda_m, self.fading, self.path_loss, threshold)
    }

    /// Mean number of users per BS.
    pub fn load(&self) -> f64 {
        self.lambda_m / self.lambda_b
    }
}
