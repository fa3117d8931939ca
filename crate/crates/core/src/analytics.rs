//! Closed-form results for the path-loss-fading process and cell capacities.
//!
//! With `G(β) = 1 − e^{−λ_B B(β)}` the law of the serving value `ξ₀`,
//!
//! * `E f(ξ₀) = ∫ f dG`, which with a density is `λ_B ∫ B′ e^{−λ_B B} f`;
//! * `m(f) = (λ_M/λ_B) E f(ξ₀)` is the mean cell capacity of the typical BS;
//! * `n(f) = λ_M ∫ f dB`;
//! * `m(fg) ≤ cov(S(f), S(g)) ≤ m(fg) + m(f)n(g) − m(f)m(g)`.
//!
//! Integrals are evaluated piece by piece over the knots of `f`. Constant
//! pieces integrate exactly against `G` or `B`; the remaining pieces use
//! quadrature against the density or, without a density, integration by
//! parts.

use crate::capacity::CapacityFunction;
use crate::channel::{NetworkModel, PathLossModel};
use crate::error::{Error, Result};
use crate::intensity::IntensityFunction;
use crate::numerics::{
    integrate_finite, integrate_semi_infinite_scaled, log_gamma, Tolerance,
};

const TOL: Tolerance = Tolerance {
    rel: 1e-11,
    abs: 1e-300,
    max_evaluations: 1_000_000,
};

/// Relative agreement required between the general and Laplace routes.
pub const ROUTE_AGREEMENT: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VarianceBounds {
    pub lower: f64,
    /// `+∞` when `n(g)` diverges.
    pub upper: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellStats {
    /// `m(f)`.
    pub mean: f64,
    /// `n(f)`, possibly `+∞`.
    pub n_value: f64,
    pub bounds: VarianceBounds,
}

/// Which measure a Stieltjes sum integrates against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Measure {
    /// `G = 1 − e^{−λ_B B}`.
    Serving,
    /// `B` itself.
    Intensity,
}

#[derive(Debug, Clone)]
pub struct Analytics {
    network: NetworkModel,
    intensity: IntensityFunction,
}

impl Analytics {
    pub fn new(network: &NetworkModel) -> Result<Self> {
        Ok(Self {
            network: *network,
            intensity: IntensityFunction::new(network)?,
        })
    }

    /// Uses a caller-supplied intensity function, e.g. a distorted one.
    pub fn with_intensity(network: &NetworkModel, intensity: IntensityFunction) -> Self {
        Self {
            network: *network,
            intensity,
        }
    }

    pub fn network(&self) -> &NetworkModel {
        &self.network
    }

    pub fn intensity(&self) -> &IntensityFunction {
        &self.intensity
    }

    fn lambda_b(&self) -> f64 {
        self.network.lambda_b
    }

    fn check_level(t: f64) -> Result<()> {
        if t > 0.0 && t.is_finite() {
            Ok(())
        } else {
            Err(Error::domain(format!("level must be positive and finite, got {t}")))
        }
    }

    /// `P(ξ₀ > T) = e^{−λ_B B(T)}`.
    pub fn outage_probability(&self, threshold: f64) -> Result<f64> {
        Self::check_level(threshold)?;
        Ok((-self.lambda_b() * self.intensity.value(threshold)?).exp())
    }

    /// Mean number of BSs able to cover a point, `λ_B B(T)`.
    pub fn coverage_count_mean(&self, threshold: f64) -> Result<f64> {
        Self::check_level(threshold)?;
        Ok(self.lambda_b() * self.intensity.value(threshold)?)
    }

    /// `P(N = k)` for the Poisson number of covering BSs.
    pub fn coverage_count_pmf(&self, threshold: f64, k: u64) -> Result<f64> {
        let mean = self.coverage_count_mean(threshold)?;
        Ok(poisson_pmf(mean, k))
    }

    /// `P(ξ_m > t) = e^{−λ_B B(t)} Σ_{i≤m} (λ_B B(t))^i / i!`.
    pub fn xi_m_ccdf(&self, m: u32, t: f64) -> Result<f64> {
        Self::check_level(t)?;
        let x = self.lambda_b() * self.intensity.value(t)?;
        Ok((0..=m as u64).map(|i| poisson_pmf(x, i)).sum::<f64>().min(1.0))
    }

    /// `p_{ξ_m}(t) = λ_B^{m+1} B′(t) B(t)^m / m! · e^{−λ_B B(t)}`.
    pub fn xi_m_pdf(&self, m: u32, t: f64) -> Result<f64> {
        Self::check_level(t)?;
        let d = self.intensity.derivative(t)?;
        let x = self.lambda_b() * self.intensity.value(t)?;
        Ok(self.lambda_b() * d * poisson_pmf(x, m as u64))
    }

    /// A level around which `ξ₀` concentrates: `B^{-1}(1/λ_B)`.
    pub fn reference_level(&self) -> Result<f64> {
        self.intensity.inverse(1.0 / self.lambda_b())
    }

    fn measure(&self, which: Measure, beta: f64, left: bool) -> Result<f64> {
        let b = if left {
            self.intensity.value_left(beta)?
        } else {
            self.intensity.value(beta)?
        };
        Ok(match which {
            Measure::Serving => -(-self.lambda_b() * b).exp_m1(),
            Measure::Intensity => b,
        })
    }

    /// `∫_{[0,∞)} f dM` for `M ∈ {G, B}`.
    fn stieltjes(&self, f: &CapacityFunction, which: Measure) -> Result<f64> {
        let pw = f.piecewise();
        let knots = pw.knots();
        let at_infinity = match which {
            Measure::Serving => 1.0,
            Measure::Intensity => f64::INFINITY,
        };
        let tail_mass = |from: Option<f64>| -> Result<f64> {
            if pw.tail() == 0.0 {
                return Ok(0.0);
            }
            let start = match from {
                Some(k) => self.measure(which, k, false)?,
                None => 0.0,
            };
            Ok(pw.tail() * (at_infinity - start))
        };
        if knots.is_empty() {
            return tail_mass(None);
        }

        let mut total = 0.0;
        if pw.head() != 0.0 {
            total += pw.head() * self.measure(which, knots[0], true)?;
        }
        if self.intensity.has_atoms() {
            for (i, &k) in knots.iter().enumerate() {
                let v = pw.value_at_knot(i);
                if v != 0.0 {
                    total += v * (self.measure(which, k, false)? - self.measure(which, k, true)?);
                }
            }
        }
        for (i, w) in knots.windows(2).enumerate() {
            let (a, b) = (w[0], w[1]);
            let piece = pw.piece(i);
            match piece.as_constant() {
                Some(0.0) => {}
                Some(c) => {
                    total += c * (self.measure(which, b, true)? - self.measure(which, a, false)?);
                }
                None => {
                    // ∫_{(a,b)} p dM = p(b)M(b⁻) − p(a)M(a) − ∫_a^b M p′.
                    // M is bounded where B′ may be singular.
                    let integrand = |t: f64| match self.measure(which, t, false) {
                        Ok(m) => m * piece.derivative(t),
                        Err(_) => f64::NAN,
                    };
                    let by_parts = integrate_finite(integrand, a, b, &TOL)?.value;
                    total += piece.evaluate(b) * self.measure(which, b, true)?
                        - piece.evaluate(a) * self.measure(which, a, false)?
                        - by_parts;
                }
            }
        }
        total += tail_mass(knots.last().copied())?;
        Ok(total)
    }

    /// `E f(ξ₀)` by the general integral against the law of `ξ₀`.
    pub fn user_capacity_mean_general(&self, f: &CapacityFunction) -> Result<f64> {
        self.stieltjes(f, Measure::Serving)
    }

    /// `E f(ξ₀) = λ_B c ∫_0^∞ e^{−λ_B c u} f(u^{γ/2}) du`, exponent path loss only.
    pub fn user_capacity_mean_laplace(&self, f: &CapacityFunction) -> Result<f64> {
        let c = match (self.intensity.path_loss(), self.intensity.c()) {
            (PathLossModel::Exponent { .. }, Some(c)) => c,
            _ => {
                return Err(Error::domain(
                    "the Laplace route needs exponent path loss",
                ))
            }
        };
        let gamma = self.intensity.path_loss().gamma();
        let rate = self.lambda_b() * c;
        let integrand = |u: f64| rate * (-rate * u).exp() * f.evaluate(u.powf(gamma / 2.0));
        let cuts: Vec<f64> = f
            .piecewise()
            .knots()
            .iter()
            .map(|k| k.powf(2.0 / gamma))
            .collect();
        let mut total = 0.0;
        let mut lo = 0.0;
        for cut in cuts {
            if cut > lo {
                total += integrate_finite(integrand, lo, cut, &TOL)?.value;
            }
            lo = cut;
        }
        total += integrate_semi_infinite_scaled(integrand, lo, 1.0 / rate, &TOL)?.value;
        Ok(total)
    }

    /// `E f(ξ₀)`, the mean capacity of a user.
    ///
    /// For exponent path loss the Laplace route is evaluated as well; a
    /// disagreement beyond [`ROUTE_AGREEMENT`] is reported as
    /// [`Error::RouteMismatch`].
    pub fn user_capacity_mean(&self, f: &CapacityFunction) -> Result<f64> {
        let general = self.user_capacity_mean_general(f)?;
        if let PathLossModel::Exponent { .. } = self.intensity.path_loss() {
            let laplace = self.user_capacity_mean_laplace(f)?;
            let scale = general.abs().max(laplace.abs());
            if (general - laplace).abs() > ROUTE_AGREEMENT * scale + 1e-14 {
                return Err(Error::RouteMismatch {
                    first: general,
                    second: laplace,
                });
            }
        }
        Ok(general)
    }

    /// `m(f) = (λ_M/λ_B) E f(ξ₀)`.
    pub fn cell_capacity_mean(&self, f: &CapacityFunction) -> Result<f64> {
        Ok(self.network.load() * self.user_capacity_mean(f)?)
    }

    /// `n(f) = λ_M ∫ f dB`, `+∞` when it diverges.
    ///
    /// Capacity functions are constant beyond their last knot and `B(∞) = ∞`,
    /// so the integral diverges exactly when that constant is positive.
    pub fn n_functional(&self, f: &CapacityFunction) -> Result<f64> {
        Ok(self.network.lambda_m * self.stieltjes(f, Measure::Intensity)?)
    }

    pub fn covariance_bounds(
        &self,
        f: &CapacityFunction,
        g: &CapacityFunction,
    ) -> Result<VarianceBounds> {
        let m_fg = self.cell_capacity_mean(&f.product(g))?;
        let m_f = self.cell_capacity_mean(f)?;
        let upper = if m_f == 0.0 {
            m_fg
        } else {
            let n_g = self.n_functional(g)?;
            if n_g.is_infinite() {
                f64::INFINITY
            } else {
                m_fg + m_f * n_g - m_f * self.cell_capacity_mean(g)?
            }
        };
        Ok(VarianceBounds {
            lower: m_fg,
            upper,
        })
    }

    pub fn variance_bounds(&self, f: &CapacityFunction) -> Result<VarianceBounds> {
        self.covariance_bounds(f, f)
    }

    pub fn cell_stats(&self, f: &CapacityFunction) -> Result<CellStats> {
        Ok(CellStats {
            mean: self.cell_capacity_mean(f)?,
            n_value: self.n_functional(f)?,
            bounds: self.variance_bounds(f)?,
        })
    }

    /// Cantelli bound `P(S(f) > m(f) + t) ≤ U/(U + t²)` with `U` the variance
    /// upper bound.
    pub fn chebyshev_tail_bound(&self, f: &CapacityFunction, t: f64) -> Result<f64> {
        if !(t > 0.0) {
            return Err(Error::domain(format!("deviation must be positive, got {t}")));
        }
        let u = self.variance_bounds(f)?.upper;
        if u.is_infinite() {
            return Err(Error::UnboundedVariance);
        }
        Ok(u / (u + t * t))
    }
}

fn poisson_pmf(mean: f64, k: u64) -> f64 {
    if mean == 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    let kf = k as f64;
    (kf * mean.ln() - mean - log_gamma(kf + 1.0)).exp()
}
