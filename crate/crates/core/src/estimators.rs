//! Estimators of the exponential rate from right-censored data.
//!
//! The dual φ-divergence estimator (DφDE) maximises the Kaplan-Meier
//! integral of the dual integrand `h(θ, α, ·)` over `α` for a fixed escort
//! `θ`. MLE, AMLE and the minimum density power divergence estimator (MDPDE)
//! are provided for comparison.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::divergence::{DualIntegrandContext, PowerDivergence};
use crate::error::{Error, Result};
use crate::km::{CensoredSample, KaplanMeierFit};
use crate::model::{
    admissibility_margin, integral_term, integral_term_alpha_derivative,
    integral_term_alpha_second_derivative, ExponentialModel, LifetimeModel,
};
use crate::optimize::{maximize, Maximum, ScalarObjective, SearchOptions};

/// Smallest density-power-divergence index accepted by [`fit_mdpde`].
pub const MIN_BETA: f64 = 1.5e-8;

// Relative distance kept from the boundary of the admissible set when
// clipping a search interval.
const BOUNDARY_MARGIN: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "estimator", rename_all = "lowercase")]
pub enum EstimatorKind {
    Mle,
    Amle,
    Dphide { gamma: f64 },
    Mdpde { beta: f64 },
}

impl EstimatorKind {
    /// Divergence or density-power index, if the estimator has one.
    pub fn tuning(&self) -> Option<f64> {
        match *self {
            EstimatorKind::Dphide { gamma } => Some(gamma),
            EstimatorKind::Mdpde { beta } => Some(beta),
            _ => None,
        }
    }

    pub fn family(&self) -> &'static str {
        match self {
            EstimatorKind::Mle => "mle",
            EstimatorKind::Amle => "amle",
            EstimatorKind::Dphide { .. } => "dphide",
            EstimatorKind::Mdpde { .. } => "mdpde",
        }
    }
}

impl fmt::Display for EstimatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EstimatorKind::Mle => write!(f, "MLE"),
            EstimatorKind::Amle => write!(f, "AMLE"),
            EstimatorKind::Dphide { gamma } => write!(f, "gamma={gamma}"),
            EstimatorKind::Mdpde { beta } => write!(f, "beta={beta}"),
        }
    }
}

/// Escort parameter `θ` of the dual criterion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Escort {
    /// Use the AMLE of the sample.
    Adaptive,
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DphideConfig {
    pub divergence: PowerDivergence,
    pub escort: Escort,
    /// Search interval for `α`; defaults to `(AMLE/10, 10·AMLE)`.
    pub interval: Option<(f64, f64)>,
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl DphideConfig {
    pub fn new(divergence: PowerDivergence) -> Self {
        Self {
            divergence,
            escort: Escort::Adaptive,
            interval: None,
            tolerance: 1e-8,
            max_iterations: 100,
        }
    }

    pub fn with_escort(mut self, escort: Escort) -> Self {
        self.escort = escort;
        self
    }

    pub fn with_interval(mut self, lo: f64, hi: f64) -> Self {
        self.interval = Some((lo, hi));
        self
    }

    pub fn validate(&self) -> Result<()> {
        if let Some((lo, hi)) = self.interval {
            if !(lo > 0.0 && lo < hi && hi.is_finite()) {
                return Err(Error::Config(format!(
                    "search interval must satisfy 0 < lo < hi < ∞, got ({lo}, {hi})"
                )));
            }
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::Config(format!(
                "tolerance must be > 0, got {}",
                self.tolerance
            )));
        }
        if self.max_iterations == 0 {
            return Err(Error::Config("max_iterations must be at least 1".into()));
        }
        if let Escort::Fixed(theta) = self.escort {
            ExponentialModel::new(theta).map_err(|_| {
                Error::Config(format!("escort must be a positive rate, got {theta}"))
            })?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    #[serde(flatten)]
    pub estimator: EstimatorKind,
    pub estimate: f64,
    /// Criterion at the estimate: dual criterion for DφDE, log-likelihood
    /// (KM-weighted for AMLE) for MLE/AMLE, density power objective for MDPDE.
    pub criterion: f64,
    pub iterations: usize,
    pub converged: bool,
    /// `|∂ criterion/∂α|` at the estimate.
    pub gradient_norm: f64,
    /// Escort used by a DφDE fit.
    pub escort: Option<f64>,
    /// Best point of the coarse search grid, for iterative fits.
    pub grid_winner: Option<f64>,
}

/// Kaplan-Meier dual criterion of the exponential model at fixed `(γ, θ)`,
/// as a function of `α`.
///
/// `C(α) = ∫φ'(p_θ/p_α)dP_θ − Σ W_in [r_i φ'(r_i) − φ(r_i)]` with
/// `r_i = (θ/α) e^{−(θ−α) Z_(i)}`. For `γ ∉ {0, 1}` the bracket equals
/// `(r_i^γ − 1)/γ`; the criterion vanishes at `α = θ`.
#[derive(Debug, Clone)]
pub struct DualCriterion {
    atoms: Vec<(f64, f64)>,
    gamma: f64,
    theta: f64,
}

impl DualCriterion {
    pub fn new(fit: &KaplanMeierFit, gamma: f64, theta: f64) -> Result<Self> {
        ExponentialModel::new(theta)?;
        let atoms: Vec<(f64, f64)> = fit.atoms().collect();
        if atoms.is_empty() {
            return Err(Error::Degenerate(
                "all Kaplan-Meier weights are zero (no uncensored observation)".into(),
            ));
        }
        Ok(Self {
            atoms,
            gamma,
            theta,
        })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn is_admissible(&self, alpha: f64) -> bool {
        alpha > 0.0
            && alpha.is_finite()
            && admissibility_margin(self.theta, alpha, self.gamma) > 0.0
    }

    /// Admissible part of `(lo, hi)`, kept a relative margin away from the boundary.
    pub fn admissible_interval(&self, lo: f64, hi: f64) -> Result<(f64, f64)> {
        let (g, t) = (self.gamma, self.theta);
        let (mut lo, mut hi) = (lo, hi);
        if g < 0.0 {
            let bound = -g * t / (1.0 - g);
            lo = lo.max(bound * (1.0 + BOUNDARY_MARGIN));
        } else if g > 1.0 {
            let bound = g * t / (g - 1.0);
            hi = hi.min(bound * (1.0 - BOUNDARY_MARGIN));
        }
        if lo < hi {
            Ok((lo, hi))
        } else {
            Err(Error::Domain(format!(
                "admissible set for gamma = {g}, theta = {t} does not meet the search interval"
            )))
        }
    }

    fn log_ratio(&self, alpha: f64, z: f64) -> f64 {
        (self.theta / alpha).ln() - (self.theta - alpha) * z
    }

    /// Model-side term `∫ φ'(p_θ/p_α) dP_θ`.
    fn model_term(&self, alpha: f64) -> f64 {
        let g = self.gamma;
        let t = integral_term(self.theta, alpha, g).unwrap_or(f64::NAN);
        if g == 0.0 || g == 1.0 {
            t
        } else {
            t - 1.0 / (g - 1.0)
        }
    }

    fn bracket(&self, lr: f64) -> f64 {
        match self.gamma {
            0.0 => lr,
            g => (g * lr).exp_m1() / g,
        }
    }

    pub fn try_value(&self, alpha: f64) -> Result<f64> {
        if !self.is_admissible(alpha) {
            integral_term(self.theta, alpha, self.gamma)?;
        }
        Ok(self.value(alpha))
    }

    fn sum_weighted<F: Fn(f64, f64) -> f64>(&self, f: F) -> f64 {
        self.atoms.iter().map(|&(z, w)| w * f(z, w)).sum()
    }
}

impl ScalarObjective for DualCriterion {
    fn value(&self, alpha: f64) -> f64 {
        if !self.is_admissible(alpha) {
            return f64::NAN;
        }
        self.model_term(alpha) - self.sum_weighted(|z, _| self.bracket(self.log_ratio(alpha, z)))
    }

    fn slope(&self, alpha: f64) -> f64 {
        if !self.is_admissible(alpha) {
            return f64::NAN;
        }
        let g = self.gamma;
        let dm = integral_term_alpha_derivative(self.theta, alpha, g).unwrap_or(f64::NAN);
        dm - self.sum_weighted(|z, _| (g * self.log_ratio(alpha, z)).exp() * (z - 1.0 / alpha))
    }

    fn curvature(&self, alpha: f64) -> f64 {
        if !self.is_admissible(alpha) {
            return f64::NAN;
        }
        let g = self.gamma;
        let d2m = integral_term_alpha_second_derivative(self.theta, alpha, g).unwrap_or(f64::NAN);
        d2m - self.sum_weighted(|z, _| {
            let rg = (g * self.log_ratio(alpha, z)).exp();
            let u = z - 1.0 / alpha;
            rg * (g * u * u + 1.0 / (alpha * alpha))
        })
    }
}

/// Closed-form Kaplan-Meier dual criterion `∫ h(θ, α) dP̂_n` for the exponential model.
pub fn dual_criterion(sample: &CensoredSample, gamma: f64, theta: f64, alpha: f64) -> Result<f64> {
    DualCriterion::new(&sample.fit_km(), gamma, theta)?.try_value(alpha)
}

/// Model-agnostic `Σ W_in h(θ, α, Z_(i))` with `h` evaluated through
/// [`DualIntegrandContext`]. Equals [`dual_criterion`] when the weights sum to
/// one; under a mass deficit the model term here is scaled by `Σ W_in`.
pub fn km_dual_criterion<M: LifetimeModel>(
    fit: &KaplanMeierFit,
    ctx: &DualIntegrandContext<M>,
) -> Result<f64> {
    let m = ctx.model_term()?;
    let mut acc = 0.0;
    let mut any = false;
    for (z, w) in fit.atoms() {
        acc += w * ctx.evaluate_with(m, z)?;
        any = true;
    }
    if !any {
        return Err(Error::Degenerate(
            "all Kaplan-Meier weights are zero".into(),
        ));
    }
    Ok(acc)
}

fn require_event(sample: &CensoredSample) -> Result<()> {
    if sample.event_count() == 0 {
        Err(Error::Degenerate(
            "sample has no uncensored observation".into(),
        ))
    } else {
        Ok(())
    }
}

/// `θ̂ = Σ δ_i / Σ Z_i`.
pub fn fit_mle_exponential(sample: &CensoredSample) -> Result<FitResult> {
    require_event(sample)?;
    let events = sample.event_count() as f64;
    let total = sample.total_time();
    if !(total > 0.0) {
        return Err(Error::Degenerate(format!(
            "total observed time must be > 0, got {total}"
        )));
    }
    let estimate = events / total;
    Ok(FitResult {
        estimator: EstimatorKind::Mle,
        estimate,
        criterion: events * estimate.ln() - estimate * total,
        iterations: 0,
        converged: true,
        gradient_norm: (events / estimate - total).abs(),
        escort: None,
        grid_winner: None,
    })
}

/// Approximate MLE: root of the Kaplan-Meier-weighted score equation
/// `Σ W_in (1/θ − Z_(i)) = 0`, i.e. `θ̂ = Σ W_in / Σ W_in Z_(i)`.
pub fn fit_amle(sample: &CensoredSample) -> Result<FitResult> {
    amle_from_fit(&sample.fit_km())
}

pub fn amle_from_fit(fit: &KaplanMeierFit) -> Result<FitResult> {
    let (mass, moment) = fit
        .atoms()
        .fold((0.0, 0.0), |(m, s), (z, w)| (m + w, s + w * z));
    if mass == 0.0 {
        return Err(Error::Degenerate("all observations are censored".into()));
    }
    if !(moment > 0.0) {
        return Err(Error::Degenerate(format!(
            "Kaplan-Meier mean must be > 0, got {moment}"
        )));
    }
    let estimate = mass / moment;
    Ok(FitResult {
        estimator: EstimatorKind::Amle,
        estimate,
        criterion: mass * estimate.ln() - estimate * moment,
        iterations: 0,
        converged: true,
        gradient_norm: (mass / estimate - moment).abs(),
        escort: None,
        grid_winner: None,
    })
}

/// Dual φ-divergence estimator for censored data.
pub fn fit_dphide(sample: &CensoredSample, config: &DphideConfig) -> Result<FitResult> {
    config.validate()?;
    require_event(sample)?;
    let fit = sample.fit_km();
    let amle = amle_from_fit(&fit)?.estimate;
    dphide_from_fit(&fit, config, amle)
}

/// DφDE on a precomputed Kaplan-Meier fit, with the AMLE supplied by the caller.
pub fn dphide_from_fit(
    fit: &KaplanMeierFit,
    config: &DphideConfig,
    amle: f64,
) -> Result<FitResult> {
    let theta = match config.escort {
        Escort::Adaptive => amle,
        Escort::Fixed(t) => t,
    };
    let gamma = config.divergence.gamma();
    let criterion = DualCriterion::new(fit, gamma, theta)?;
    let (lo, hi) = config.interval.unwrap_or((amle / 10.0, amle * 10.0));
    let (lo, hi) = criterion.admissible_interval(lo, hi)?;
    let opts = SearchOptions {
        tolerance: config.tolerance,
        max_iterations: config.max_iterations,
        ..SearchOptions::default()
    };
    let m = maximize(&criterion, lo, hi, &opts);
    Ok(result_from(EstimatorKind::Dphide { gamma }, m, Some(theta)))
}

fn result_from(estimator: EstimatorKind, m: Maximum, escort: Option<f64>) -> FitResult {
    FitResult {
        estimator,
        estimate: m.argmax,
        criterion: m.value,
        iterations: m.iterations,
        converged: m.converged,
        gradient_norm: m.slope.abs(),
        escort,
        grid_winner: Some(m.grid_winner),
    }
}

/// Kaplan-Meier version of the density power divergence objective, without
/// the term that does not depend on `α`:
/// `α^β/(1+β) − (1 + 1/β) Σ W_in α^β e^{−βαZ_(i)}`.
///
/// Implemented as an objective to maximise (the negated divergence).
#[derive(Debug, Clone)]
pub struct MdpdeCriterion {
    atoms: Vec<(f64, f64)>,
    beta: f64,
}

impl MdpdeCriterion {
    pub fn new(fit: &KaplanMeierFit, beta: f64) -> Result<Self> {
        if !(beta.is_finite() && beta >= MIN_BETA) {
            return Err(Error::Domain(format!(
                "density power index must satisfy beta >= {MIN_BETA:e}, got {beta}"
            )));
        }
        let atoms: Vec<(f64, f64)> = fit.atoms().collect();
        if atoms.is_empty() {
            return Err(Error::Degenerate(
                "all Kaplan-Meier weights are zero".into(),
            ));
        }
        Ok(Self { atoms, beta })
    }

    /// The divergence objective itself (to be minimised).
    pub fn divergence(&self, alpha: f64) -> f64 {
        -self.value(alpha)
    }
}

impl ScalarObjective for MdpdeCriterion {
    fn value(&self, alpha: f64) -> f64 {
        if !(alpha > 0.0) {
            return f64::NAN;
        }
        let b = self.beta;
        let ab = alpha.powf(b);
        let s: f64 = self
            .atoms
            .iter()
            .map(|&(z, w)| w * (-b * alpha * z).exp())
            .sum();
        -(ab / (1.0 + b) - (1.0 + 1.0 / b) * ab * s)
    }

    fn slope(&self, alpha: f64) -> f64 {
        if !(alpha > 0.0) {
            return f64::NAN;
        }
        let b = self.beta;
        let s: f64 = self
            .atoms
            .iter()
            .map(|&(z, w)| w * (-b * alpha * z).exp() * (1.0 - alpha * z))
            .sum();
        -(alpha.powf(b - 1.0) * (b / (1.0 + b) - (1.0 + b) * s))
    }

    fn curvature(&self, alpha: f64) -> f64 {
        if !(alpha > 0.0) {
            return f64::NAN;
        }
        let b = self.beta;
        let (s, ds) = self.atoms.iter().fold((0.0, 0.0), |(s, ds), &(z, w)| {
            let e = (-b * alpha * z).exp();
            (
                s + w * e * (1.0 - alpha * z),
                ds - w * z * e * (b * (1.0 - alpha * z) + 1.0),
            )
        });
        let bracket = b / (1.0 + b) - (1.0 + b) * s;
        -((b - 1.0) * alpha.powf(b - 2.0) * bracket - alpha.powf(b - 1.0) * (1.0 + b) * ds)
    }
}

/// Minimum density power divergence estimator with Kaplan-Meier weighting.
pub fn fit_mdpde(sample: &CensoredSample, beta: f64) -> Result<FitResult> {
    require_event(sample)?;
    let fit = sample.fit_km();
    let amle = amle_from_fit(&fit)?.estimate;
    mdpde_from_fit(&fit, beta, amle, &SearchOptions::default())
}

pub fn mdpde_from_fit(
    fit: &KaplanMeierFit,
    beta: f64,
    amle: f64,
    opts: &SearchOptions,
) -> Result<FitResult> {
    let criterion = MdpdeCriterion::new(fit, beta)?;
    let m = maximize(&criterion, amle / 10.0, amle * 10.0, opts);
    let mut r = result_from(EstimatorKind::Mdpde { beta }, m, None);
    r.criterion = -m.value;
    Ok(r)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensityRatioPoint {
    pub x: f64,
    pub ratio: f64,
}

/// `p_θ̂(x) / p_θ₀(x)` for the exponential model over `grid`.
pub fn density_ratio_diagnostic(
    theta_hat: f64,
    theta0: f64,
    grid: &[f64],
) -> Result<Vec<DensityRatioPoint>> {
    let fitted = ExponentialModel::new(theta_hat)?;
    let truth = ExponentialModel::new(theta0)?;
    Ok(grid
        .iter()
        .map(|&x| DensityRatioPoint {
            x,
            ratio: ((fitted.rate() / truth.rate()).ln() - (fitted.rate() - truth.rate()) * x).exp(),
        })
        .collect())
}
