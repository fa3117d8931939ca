//! The intensity function `B(β) = ∫_{ℝ²} F_H((L(z)β)^{-1}) dz`.
//!
//! `λ_B·B(β)` is the mean number of base stations whose path-loss-fading
//! value seen from a fixed point is at most `β`. Every analytic quantity in
//! the crate is a functional of `B` and its derivative.
//!
//! Closed forms are used where they exist:
//!
//! * exponent path loss with any fading: `B = c·β^(2/γ)`, with
//!   `c = π K^(2/γ) E(H^(2/γ))`;
//! * modified path loss with log-normal fading:
//!   `B = c₁ β^(2/γ) e^(2σ₁²/γ²) Q(ln(R₀^γ/(Kβ))/σ₁ − 2σ₁/γ)`;
//! * modified path loss with Rayleigh fading:
//!   `B = c₁ (β/μ)^(2/γ) Γ(1 + 2/γ, μR₀^γ/(Kβ))`;
//!
//! with `c₁ = π K^(2/γ)`. Anything else falls back to radial quadrature.

use std::f64::consts::PI;

use crate::channel::{sigma_db_to_nepers, FadingModel, NetworkModel, PathLossModel};
use crate::error::{Error, Result};
use crate::numerics::{
    integrate_finite, integrate_semi_infinite_scaled, q_function, upper_incomplete_gamma,
    Tolerance,
};

const RADIAL_TOL: Tolerance = Tolerance {
    rel: 1e-11,
    abs: 1e-300,
    max_evaluations: 1_000_000,
};

const MAX_BRACKET_DOUBLINGS: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    ClosedForm,
    Quadrature,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntensityFunction {
    fading: FadingModel,
    path_loss: PathLossModel,
    mode: Mode,
    c: Option<f64>,
    c1: f64,
    distortion: f64,
}

fn closed_form_available(fading: &FadingModel, path_loss: &PathLossModel) -> bool {
    match path_loss {
        PathLossModel::Exponent { .. } => true,
        PathLossModel::ModifiedExponent { .. } => matches!(
            fading,
            FadingModel::LogNormal { .. } | FadingModel::Rayleigh { .. }
        ),
    }
}

impl IntensityFunction {
    pub fn new(network: &NetworkModel) -> Result<Self> {
        Self::from_channel(network.fading, network.path_loss)
    }

    pub fn from_channel(fading: FadingModel, path_loss: PathLossModel) -> Result<Self> {
        let gamma = path_loss.gamma();
        let c1 = PI * path_loss.k().powf(2.0 / gamma);
        let c = match path_loss {
            PathLossModel::Exponent { .. } => Some(c1 * fading.fractional_moment(2.0 / gamma)?),
            PathLossModel::ModifiedExponent { .. } => None,
        };
        let mode = if closed_form_available(&fading, &path_loss) {
            Mode::ClosedForm
        } else {
            Mode::Quadrature
        };
        Ok(Self {
            fading,
            path_loss,
            mode,
            c,
            c1,
            distortion: 1.0,
        })
    }

    /// Forces an evaluation mode; `ClosedForm` is rejected where none exists.
    pub fn with_mode(mut self, mode: Mode) -> Result<Self> {
        if mode == Mode::ClosedForm && !closed_form_available(&self.fading, &self.path_loss) {
            return Err(Error::domain(format!(
                "no closed form for {:?} with {:?}",
                self.path_loss, self.fading
            )));
        }
        self.mode = mode;
        Ok(self)
    }

    /// Test hook: multiplies `B` (and hence `B'`) by `factor`.
    ///
    /// Used to check that the analytic-versus-simulation harness notices a
    /// corrupted intensity function.
    pub fn with_distortion(mut self, factor: f64) -> Self {
        self.distortion = factor;
        self
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn fading(&self) -> &FadingModel {
        &self.fading
    }

    pub fn path_loss(&self) -> &PathLossModel {
        &self.path_loss
    }

    /// `c = π K^(2/γ) E(H^(2/γ))` (exponent path loss only), including any
    /// distortion.
    pub fn c(&self) -> Option<f64> {
        self.c.map(|c| c * self.distortion)
    }

    /// `c₁ = π K^(2/γ)`.
    pub fn c1(&self) -> f64 {
        self.c1
    }

    fn gamma(&self) -> f64 {
        self.path_loss.gamma()
    }

    /// `B(β)`.
    pub fn value(&self, beta: f64) -> Result<f64> {
        if !(beta >= 0.0) {
            return Err(Error::domain(format!("beta must be nonnegative, got {beta}")));
        }
        if beta == 0.0 {
            return Ok(0.0);
        }
        if beta.is_infinite() {
            return Ok(f64::INFINITY);
        }
        let raw = match self.mode {
            Mode::ClosedForm => self.closed_value(beta)?,
            Mode::Quadrature => self.quadrature_value(beta)?,
        };
        Ok(raw * self.distortion)
    }

    /// Left limit `B(β⁻)`.
    ///
    /// Differs from `B(β)` only for modified path loss without fading, where
    /// `B` jumps from 0 to `πR₀²` at `β = R₀^γ/(hK)`.
    pub fn value_left(&self, beta: f64) -> Result<f64> {
        if let (PathLossModel::ModifiedExponent { k, gamma, r0 }, FadingModel::Constant { h }) =
            (self.path_loss, self.fading)
        {
            if beta <= r0.powf(gamma) / (h * k) {
                return Ok(0.0);
            }
        }
        self.value(beta)
    }

    /// Whether `B` can jump (the law of the path-loss-fading values has atoms).
    pub fn has_atoms(&self) -> bool {
        matches!(
            (self.path_loss, self.fading),
            (PathLossModel::ModifiedExponent { .. }, FadingModel::Constant { .. })
        )
    }

    /// `B'(β)`.
    pub fn derivative(&self, beta: f64) -> Result<f64> {
        if !(beta > 0.0) || !beta.is_finite() {
            return Err(Error::domain(format!("beta must be positive, got {beta}")));
        }
        if !self.fading.has_density() {
            return Err(Error::NoDensity);
        }
        let raw = match self.mode {
            Mode::ClosedForm => self.closed_derivative(beta)?,
            Mode::Quadrature => self.quadrature_derivative(beta)?,
        };
        Ok(raw * self.distortion)
    }

    /// `B` by radial quadrature regardless of mode.
    pub fn value_by_quadrature(&self, beta: f64) -> Result<f64> {
        if !(beta >= 0.0) {
            return Err(Error::domain(format!("beta must be nonnegative, got {beta}")));
        }
        if beta == 0.0 {
            return Ok(0.0);
        }
        Ok(self.quadrature_value(beta)? * self.distortion)
    }

    /// `B'` by radial quadrature regardless of mode.
    pub fn derivative_by_quadrature(&self, beta: f64) -> Result<f64> {
        if !(beta > 0.0) {
            return Err(Error::domain(format!("beta must be positive, got {beta}")));
        }
        if !self.fading.has_density() {
            return Err(Error::NoDensity);
        }
        Ok(self.quadrature_derivative(beta)? * self.distortion)
    }

    fn closed_value(&self, beta: f64) -> Result<f64> {
        let gamma = self.gamma();
        let e = 2.0 / gamma;
        match (self.path_loss, self.fading) {
            (PathLossModel::Exponent { .. }, _) => {
                Ok(self.c.expect("exponent model caches c") * beta.powf(e))
            }
            (PathLossModel::ModifiedExponent { k, r0, .. }, FadingModel::LogNormal { sigma_db }) => {
                let s = sigma_db_to_nepers(sigma_db);
                let ln_x0 = gamma * r0.ln() - k.ln() - beta.ln();
                Ok(self.c1
                    * beta.powf(e)
                    * (2.0 * s * s / (gamma * gamma)).exp()
                    * q_function(ln_x0 / s - 2.0 * s / gamma))
            }
            (PathLossModel::ModifiedExponent { k, r0, .. }, FadingModel::Rayleigh { mu }) => {
                let x0 = r0.powf(gamma) / (k * beta);
                Ok(self.c1 * (beta / mu).powf(e) * upper_incomplete_gamma(1.0 + e, mu * x0)?)
            }
            _ => unreachable!("closed form selected for unsupported pair"),
        }
    }

    fn closed_derivative(&self, beta: f64) -> Result<f64> {
        let gamma = self.gamma();
        match self.path_loss {
            PathLossModel::Exponent { .. } => {
                let c = self.c.expect("exponent model caches c");
                Ok(2.0 / gamma * c * beta.powf(2.0 / gamma - 1.0))
            }
            PathLossModel::ModifiedExponent { k, r0, .. } => {
                // d/dβ of πR₀²F_H(x₀) + 2π∫_{R₀}^∞ r F_H(r^γ/(Kβ)) dr with
                // x₀ = R₀^γ/(Kβ); the boundary term carries dx₀/dβ = −x₀/β.
                let x0 = r0.powf(gamma) / (k * beta);
                let b = self.closed_value(beta)?;
                Ok(2.0 / gamma * b / beta + PI * r0 * r0 * (x0 / beta) * self.fading.pdf(x0)?)
            }
        }
    }

    /// Radius scale at which the radial integrand changes for level `beta`.
    fn radial_scale(&self, beta: f64) -> f64 {
        let r = (self.path_loss.k() * beta).powf(1.0 / self.gamma());
        if r.is_finite() && r > 0.0 {
            r
        } else {
            1.0
        }
    }

    fn quadrature_value(&self, beta: f64) -> Result<f64> {
        self.radial_tail(beta, 0.0)
    }

    /// `2π ∫_R^∞ r F_H((L(r)β)^{-1}) dr`: the part of `B(β)` contributed by
    /// base stations farther than `radius`.
    pub fn outside_radius(&self, beta: f64, radius: f64) -> Result<f64> {
        if !(beta > 0.0) || !(radius >= 0.0) {
            return Err(Error::domain("beta must be positive and radius nonnegative"));
        }
        Ok(self.radial_tail(beta, radius)? * self.distortion)
    }

    fn radial_tail(&self, beta: f64, from: f64) -> Result<f64> {
        let fading = self.fading;
        let path_loss = self.path_loss;
        let integrand = move |r: f64| {
            let g = path_loss.gain(r);
            2.0 * PI * r * fading.ccdf(1.0 / (g * beta))
        };
        let scale = self.radial_scale(beta);
        // Split points: the clamp radius and, for a point-mass fading law, the
        // radius where the indicator F_H switches off.
        let mut cuts: Vec<f64> = Vec::new();
        if let Some(r0) = path_loss.r0() {
            cuts.push(r0);
        }
        if let FadingModel::Constant { h } = fading {
            let edge = (h * path_loss.k() * beta).powf(1.0 / self.gamma());
            cuts.push(edge);
        }
        cuts.retain(|&c| c > from);
        cuts.sort_by(f64::total_cmp);
        let mut total = 0.0;
        let mut lo = from;
        for c in cuts {
            total += integrate_finite(integrand, lo, c, &RADIAL_TOL)?.value;
            lo = c;
        }
        if let FadingModel::Constant { h } = fading {
            if lo > 0.0 && path_loss.gain(lo) * h * beta < 1.0 {
                // F_H vanishes identically beyond the indicator edge.
                return Ok(total);
            }
        }
        total += integrate_semi_infinite_scaled(integrand, lo, scale.max(lo), &RADIAL_TOL)?.value;
        Ok(total)
    }

    fn quadrature_derivative(&self, beta: f64) -> Result<f64> {
        let fading = self.fading;
        let path_loss = self.path_loss;
        let integrand = move |r: f64| {
            let g = path_loss.gain(r);
            if !g.is_finite() {
                return 0.0;
            }
            let arg = 1.0 / (g * beta);
            match fading.pdf(arg) {
                Ok(p) if p > 0.0 => 2.0 * PI * r * p / g,
                _ => 0.0,
            }
        };
        let scale = self.radial_scale(beta);
        let mut total = 0.0;
        let mut lo = 0.0;
        if let Some(r0) = path_loss.r0() {
            total += integrate_finite(integrand, 0.0, r0, &RADIAL_TOL)?.value;
            lo = r0;
        }
        total += integrate_semi_infinite_scaled(integrand, lo, scale.max(lo), &RADIAL_TOL)?.value;
        Ok(total / (beta * beta))
    }

    /// Smallest `β` with `B(β) ≥ target`, to `|B(β) − target| ≤ 1e-9·max(1, target)`.
    ///
    /// Where `B` jumps over `target` (modified path loss without fading), the
    /// jump location is returned.
    pub fn inverse(&self, target: f64) -> Result<f64> {
        if !(target >= 0.0) || !target.is_finite() {
            return Err(Error::domain(format!("target must be finite and nonnegative, got {target}")));
        }
        if target == 0.0 {
            return Ok(0.0);
        }
        if let (Mode::ClosedForm, Some(c)) = (self.mode, self.c()) {
            return Ok((target / c).powf(self.gamma() / 2.0));
        }
        let tol = 1e-9 * target.max(1.0);
        let f = |beta: f64| -> Result<f64> { Ok(self.value(beta)? - target) };

        let mut lo = 1.0;
        let mut hi = 1.0;
        let mut f_hi = f(hi)?;
        let mut f_lo = f_hi;
        let mut doublings = 0;
        if f_hi < 0.0 {
            while f_hi < 0.0 {
                lo = hi;
                f_lo = f_hi;
                hi *= 2.0;
                f_hi = f(hi)?;
                doublings += 1;
                if doublings > MAX_BRACKET_DOUBLINGS {
                    return Err(Error::NonConvergence {
                        evaluations: doublings,
                        error_estimate: f_hi.abs(),
                    });
                }
            }
        } else {
            while f_lo >= 0.0 {
                hi = lo;
                f_hi = f_lo;
                lo *= 0.5;
                f_lo = f(lo)?;
                doublings += 1;
                if doublings > MAX_BRACKET_DOUBLINGS {
                    return Err(Error::NonConvergence {
                        evaluations: doublings,
                        error_estimate: f_lo.abs(),
                    });
                }
            }
        }
        if f_hi.abs() <= tol {
            return Ok(hi);
        }

        // Illinois false position on log β, with a bisection fallback.
        let (mut a, mut b) = (lo.ln(), hi.ln());
        let (mut fa, mut fb) = (f_lo, f_hi);
        let mut side = 0i8;
        for _ in 0..400 {
            let mut x = (a * fb - b * fa) / (fb - fa);
            if !x.is_finite() || x <= a || x >= b {
                x = 0.5 * (a + b);
            }
            let fx = f(x.exp())?;
            if fx.abs() <= tol {
                return Ok(x.exp());
            }
            if fx < 0.0 {
                a = x;
                fa = fx;
                if side == -1 {
                    fb *= 0.5;
                }
                side = -1;
            } else {
                b = x;
                fb = fx;
                if side == 1 {
                    fa *= 0.5;
                }
                side = 1;
            }
            if b - a <= 4.0 * f64::EPSILON * b.abs().max(1.0) {
                return Ok(b.exp());
            }
        }
        Err(Error::NonConvergence {
            evaluations: 400,
            error_estimate: (b - a).exp(),
        })
    }
}

impl NetworkModel {
    pub fn intensity(&self) -> Result<IntensityFunction> {
        IntensityFunction::new(self)
    }
}
