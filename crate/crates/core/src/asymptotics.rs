//! Asymptotic variance of the dual estimator under exponential lifetimes and
//! exponential censoring, computed by quadrature against the true scheme.
//!
//! With `G` the censoring law and `P = P_θ₀` the lifetime law, the observed
//! law `F` of `Z` satisfies `1 − F = (1 − P)(1 − G)` and splits into the
//! subdistributions `F₀` (censored) and `F₁` (uncensored). For one parameter
//! the estimator is asymptotically normal with variance `V / S²`.

use std::cell::RefCell;

use serde::{Deserialize, Serialize};

use crate::divergence::{DualIntegrandContext, PowerDivergence};
use crate::error::{Error, Result};
use crate::model::{integral_term_alpha_derivative, ExponentialModel, LifetimeModel, TAIL_MASS};
use crate::quadrature::{integrate, integrate_to_infinity, QuadOptions};

/// Absolute tolerance of outer integrals.
pub const OUTER_TOL: f64 = 1e-8;
/// Absolute tolerance of integrals nested inside another integrand.
pub const INNER_TOL: f64 = 1e-10;
// Relative floor for nested integrals, which grow like `e^{cx}` in the tail.
const INNER_REL_TOL: f64 = 1e-12;

fn outer() -> QuadOptions {
    QuadOptions::default().with_abs_tol(OUTER_TOL)
}

fn inner() -> QuadOptions {
    QuadOptions::default()
        .with_abs_tol(INNER_TOL)
        .with_rel_tol(INNER_REL_TOL)
}

/// Exponential lifetimes `exp(θ₀)` censored by independent `exp(c)` times.
/// `c = 0` means no censoring.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CensoringScheme {
    pub theta0: f64,
    pub c: f64,
}

impl CensoringScheme {
    pub fn new(theta0: f64, c: f64) -> Result<Self> {
        ExponentialModel::new(theta0)?;
        if !(c >= 0.0 && c.is_finite()) {
            return Err(Error::Domain(format!(
                "censoring rate must be finite and >= 0, got {c}"
            )));
        }
        Ok(Self { theta0, c })
    }

    pub fn uncensored(theta0: f64) -> Result<Self> {
        Self::new(theta0, 0.0)
    }

    pub fn lifetime(&self) -> ExponentialModel {
        ExponentialModel::new(self.theta0).expect("validated on construction")
    }

    /// `P(δ = 0) = c / (θ₀ + c)`.
    pub fn censoring_probability(&self) -> f64 {
        self.c / (self.theta0 + self.c)
    }

    pub fn censoring_survival(&self, x: f64) -> f64 {
        if x <= 0.0 {
            1.0
        } else {
            (-self.c * x).exp()
        }
    }

    pub fn censoring_density(&self, x: f64) -> f64 {
        if x < 0.0 {
            0.0
        } else {
            self.c * (-self.c * x).exp()
        }
    }

    /// `1 − F(x)`.
    pub fn survival(&self, x: f64) -> f64 {
        self.lifetime().survival(x) * self.censoring_survival(x)
    }

    /// `F(x)`.
    pub fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            0.0
        } else {
            -(-(self.theta0 + self.c) * x).exp_m1()
        }
    }

    /// Density of the censored subdistribution, `(1 − P) g`.
    pub fn f0_density(&self, y: f64) -> f64 {
        self.lifetime().survival(y) * self.censoring_density(y)
    }

    /// Density of the uncensored subdistribution, `(1 − G) p`.
    pub fn f1_density(&self, y: f64) -> f64 {
        self.censoring_survival(y) * self.lifetime().density(y)
    }

    /// `F₀(x) = P(Z ≤ x, δ = 0)` by quadrature.
    pub fn f0(&self, x: f64) -> Result<f64> {
        Ok(integrate(|y| self.f0_density(y), 0.0, x.max(0.0), &inner())?.value)
    }

    /// `F₁(x) = P(Z ≤ x, δ = 1)` by quadrature.
    pub fn f1(&self, x: f64) -> Result<f64> {
        Ok(integrate(|y| self.f1_density(y), 0.0, x.max(0.0), &inner())?.value)
    }

    /// Point beyond which `1 − F` is below the tail mass used for truncation.
    pub fn tail_cutoff(&self) -> f64 {
        -TAIL_MASS.ln() / (self.theta0 + self.c)
    }

    // Closed forms used inside nested integrands; `compute_c` and
    // `compute_xi0` evaluate the defining integrals instead.
    fn c_closed(&self, x: f64) -> f64 {
        if self.c == 0.0 || x <= 0.0 {
            return 0.0;
        }
        let k = self.theta0 + self.c;
        self.c / k * (k * x).exp_m1()
    }

    fn xi0_closed(&self, x: f64) -> f64 {
        1.0 / self.censoring_survival(x)
    }
}

/// `C(x) = ∫_{[0, x)} dG(y) / ((1 − P(y)) (1 − G(y))²)`.
pub fn compute_c(scheme: &CensoringScheme, x: f64) -> Result<f64> {
    if !(x >= 0.0) {
        return Err(Error::Domain(format!("C(x) requires x >= 0, got {x}")));
    }
    if scheme.c == 0.0 {
        return Ok(0.0);
    }
    let p = scheme.lifetime();
    let integrand = |y: f64| {
        let gs = scheme.censoring_survival(y);
        scheme.censoring_density(y) / (p.survival(y) * gs * gs)
    };
    let r = integrate(integrand, 0.0, x, &inner())?;
    finite(r.value, "C(x)")
}

/// `ξ₀(x) = exp{ ∫_{[0, x)} dF₀(y) / (1 − F(y)) }`.
pub fn compute_xi0(scheme: &CensoringScheme, x: f64) -> Result<f64> {
    if !(x >= 0.0) {
        return Err(Error::Domain(format!("xi0(x) requires x >= 0, got {x}")));
    }
    if scheme.c == 0.0 {
        return Ok(1.0);
    }
    let r = integrate(
        |y| scheme.f0_density(y) / scheme.survival(y),
        0.0,
        x,
        &inner(),
    )?;
    finite(r.value.exp(), "xi0(x)")
}

/// `∂h(θ, α, y)/∂α` at `α = θ₀` for the exponential model, together with the
/// scheme it is integrated against.
#[derive(Debug, Clone, Copy)]
pub struct InfluenceKernel {
    scheme: CensoringScheme,
    gamma: f64,
    theta: f64,
    model_slope: f64,
}

impl InfluenceKernel {
    pub fn new(scheme: &CensoringScheme, gamma: f64, theta: f64) -> Result<Self> {
        PowerDivergence::new(gamma)?;
        let model_slope = integral_term_alpha_derivative(theta, scheme.theta0, gamma)?;
        Ok(Self {
            scheme: *scheme,
            gamma,
            theta,
            model_slope,
        })
    }

    /// `ψ(y) = ∂/∂α [∫φ'(p_θ/p_α) dP_θ] + (p_θ(y)/p_α(y))^γ (1/α − y)` at `α = θ₀`.
    pub fn psi(&self, y: f64) -> f64 {
        let a = self.scheme.theta0;
        let log_ratio = (self.theta / a).ln() - (self.theta - a) * y;
        self.model_slope + (self.gamma * log_ratio).exp() * (1.0 / a - y)
    }

    // ψ ξ₀ dF₁ density.
    fn weighted(&self, y: f64) -> f64 {
        self.psi(y) * self.scheme.xi0_closed(y) * self.scheme.f1_density(y)
    }

    /// `ξ₁(x) = (1 − F(x))⁻¹ ∫_{(x, ∞)} ψ ξ₀ dF₁`.
    pub fn xi1(&self, x: f64) -> Result<f64> {
        let scale = 1.0 / self.scheme.survival(x);
        self.tail(x, scale)
    }

    /// `ξ₂(x) = ∫ ψ(z) ξ₀(z) C(x ∧ z) dF₁(z)`.
    pub fn xi2(&self, x: f64) -> Result<f64> {
        if self.scheme.c == 0.0 || x <= 0.0 {
            return Ok(0.0);
        }
        let s = &self.scheme;
        let head = integrate(|z| self.weighted(z) * s.c_closed(z), 0.0, x, &inner())?.value;
        let tail = self.tail(x, s.c_closed(x))?;
        finite(head + tail, "xi2(x)")
    }

    // scale · ∫_{(x, ∞)} ψ ξ₀ dF₁, with the scale applied inside the integrand
    // so that the absolute tolerance is relative to the returned quantity.
    fn tail(&self, x: f64, scale: f64) -> Result<f64> {
        let width = self.scheme.tail_cutoff().max(1.0);
        let r = integrate_to_infinity(|y| scale * self.weighted(y), x, width, &inner())?;
        finite(r.value, "tail integral of psi")
    }
}

/// `(ξ₁(x), ξ₂(x))` for escort `θ` and divergence index `γ`.
pub fn compute_xi1_xi2(
    scheme: &CensoringScheme,
    gamma: f64,
    theta: f64,
    x: f64,
) -> Result<(f64, f64)> {
    if !(x >= 0.0) {
        return Err(Error::Domain(format!("xi1/xi2 require x >= 0, got {x}")));
    }
    let k = InfluenceKernel::new(scheme, gamma, theta)?;
    Ok((k.xi1(x)?, k.xi2(x)?))
}

/// `S = ∫ φ''(p_θ/p_θ₀) p_θ² / p_θ₀³ ṗ_θ₀² dλ`.
///
/// For the power family the integrand is `r^γ p_θ₀ (1/θ₀ − y)²` with
/// `r = p_θ/p_θ₀`, which decays at rate `γθ + (1 − γ)θ₀`.
pub fn compute_s(scheme: &CensoringScheme, gamma: f64, theta: f64) -> Result<f64> {
    let div = PowerDivergence::new(gamma)?;
    let truth = scheme.lifetime();
    let escort = ExponentialModel::new(theta)?;
    escort.check_admissible(&truth, &div).map_err(|_| {
        Error::NonFinite(format!(
            "S diverges: gamma*theta + (1-gamma)*theta0 <= 0 for gamma = {gamma}, theta = {theta}"
        ))
    })?;
    let integrand = |y: f64| {
        let log_ratio = escort.log_density(y) - truth.log_density(y);
        let score = truth.score(y);
        (gamma * log_ratio + truth.log_density(y)).exp() * score * score
    };
    let width = escort
        .tail_cutoff(TAIL_MASS)
        .min(truth.tail_cutoff(TAIL_MASS));
    let s = integrate_to_infinity(integrand, 0.0, width, &outer())?.value;
    let s = finite(s, "S")?;
    if s > 0.0 {
        Ok(s)
    } else {
        Err(Error::Singular(format!("S = {s} is not positive")))
    }
}

/// `V = E[U²]`, split on `δ`:
/// `∫ (ψ ξ₀ − ξ₂)² dF₁ + ∫ (ξ₁ − ξ₂)² dF₀`.
pub fn compute_v(scheme: &CensoringScheme, gamma: f64, theta: f64) -> Result<f64> {
    let k = InfluenceKernel::new(scheme, gamma, theta)?;
    // (ψ ξ₀)² dF₁ behaves like e^{−ρy} with ρ below; every other term of U²
    // decays at least as fast.
    let growth = (-2.0 * gamma * (theta - scheme.theta0)).max(0.0);
    let rho = scheme.theta0 - scheme.c - growth;
    if rho <= 0.0 {
        return Err(Error::NonFinite(format!(
            "V diverges: second moment of U decays at rate {rho} <= 0 (theta0 = {}, c = {}, gamma = {gamma}, theta = {theta})",
            scheme.theta0, scheme.c
        )));
    }
    let width = scheme.tail_cutoff();
    let failure: RefCell<Option<Error>> = RefCell::new(None);
    let guard = |r: Result<f64>| match r {
        Ok(v) => v,
        Err(e) => {
            failure.borrow_mut().get_or_insert(e);
            f64::NAN
        }
    };

    let uncensored = |y: f64| {
        let xi2 = guard(k.xi2(y));
        let u = k.psi(y) * scheme.xi0_closed(y) - xi2;
        u * u * scheme.f1_density(y)
    };
    let v1 = integrate_to_infinity(uncensored, 0.0, width, &outer());
    let v0 = if scheme.c == 0.0 {
        Ok(crate::quadrature::QuadResult {
            value: 0.0,
            error: 0.0,
            intervals: 0,
        })
    } else {
        let censored = |y: f64| {
            let u = guard(k.xi1(y)) - guard(k.xi2(y));
            u * u * scheme.f0_density(y)
        };
        integrate_to_infinity(censored, 0.0, width, &outer())
    };
    if let Some(e) = failure.into_inner() {
        return Err(Error::NonFinite(format!("V: nested integral failed: {e}")));
    }
    let v = v1?.value + v0?.value;
    finite(v, "V")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SandwichVariance {
    pub s: f64,
    pub v: f64,
    /// `S⁻¹ V S⁻¹`.
    pub sandwich: f64,
    /// `φ''(1)⁻² I⁻¹ V I⁻¹`, reported when the escort equals `θ₀`.
    pub escort_at_truth: Option<f64>,
}

pub fn sandwich_variance(
    scheme: &CensoringScheme,
    gamma: f64,
    theta: f64,
) -> Result<SandwichVariance> {
    let s = compute_s(scheme, gamma, theta)?;
    let v = compute_v(scheme, gamma, theta)?;
    let escort_at_truth = (theta == scheme.theta0).then(|| {
        let info = scheme.lifetime().fisher_information();
        let phi2 = PowerDivergence::new(gamma)
            .and_then(|d| d.phi_second(1.0))
            .unwrap_or(1.0);
        v / (phi2 * phi2 * info * info)
    });
    Ok(SandwichVariance {
        s,
        v,
        sandwich: v / (s * s),
        escort_at_truth,
    })
}

/// One row of a variance table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VarianceRow {
    pub gamma: f64,
    pub theta: f64,
    pub c: f64,
    #[serde(rename = "S")]
    pub s: f64,
    #[serde(rename = "V")]
    pub v: f64,
    pub sandwich: f64,
}

/// Sandwich variances over a `(γ, θ)` grid for a fixed `θ₀`, one row per
/// censoring rate. Points where a moment diverges are returned as errors in
/// place, so the caller decides whether to skip or abort.
pub fn variance_table(
    theta0: f64,
    rates: &[f64],
    gammas: &[f64],
    thetas: &[f64],
) -> Result<Vec<Result<VarianceRow>>> {
    let mut rows = Vec::with_capacity(rates.len() * gammas.len() * thetas.len());
    for &c in rates {
        let scheme = CensoringScheme::new(theta0, c)?;
        for &gamma in gammas {
            for &theta in thetas {
                rows.push(
                    sandwich_variance(&scheme, gamma, theta).map(|sv| VarianceRow {
                        gamma,
                        theta,
                        c,
                        s: sv.s,
                        v: sv.v,
                        sandwich: sv.sandwich,
                    }),
                );
            }
        }
    }
    Ok(rows)
}

/// Population dual criterion `α ↦ ∫ h(θ, α) dP_θ₀`, by quadrature.
///
/// The conjugate term is weighted by `p_θ₀` in log space, since `r^γ` alone
/// overflows in the tail whenever the weighted product still decays.
pub fn population_criterion(gamma: f64, theta: f64, theta0: f64, alpha: f64) -> Result<f64> {
    let ctx = DualIntegrandContext::new(
        ExponentialModel::new(theta)?,
        ExponentialModel::new(alpha)?,
        PowerDivergence::new(gamma)?,
    )?;
    let truth = ExponentialModel::new(theta0)?;
    let m = ctx.model_term()?;
    let integrand = |y: f64| {
        let lr = ctx.theta().log_density(y) - ctx.alpha().log_density(y);
        let lp = truth.log_density(y);
        let p = lp.exp();
        let weighted_bracket = if gamma == 0.0 {
            lr * p
        } else {
            ((gamma * lr + lp).exp() - p) / gamma
        };
        m * p - weighted_bracket
    };
    let r = integrate_to_infinity(integrand, 0.0, truth.tail_cutoff(TAIL_MASS), &inner())?;
    finite(r.value, "population criterion")
}

/// `D_φ(P_θ, P_θ₀) = ∫ φ(p_θ/p_θ₀) dP_θ₀`, by quadrature.
pub fn divergence_value(gamma: f64, theta: f64, theta0: f64) -> Result<f64> {
    let div = PowerDivergence::new(gamma)?;
    let (escort, truth) = (
        ExponentialModel::new(theta)?,
        ExponentialModel::new(theta0)?,
    );
    let integrand = |y: f64| {
        let r = (escort.log_density(y) - truth.log_density(y)).exp();
        div.phi(r).map_or(f64::NAN, |v| v * truth.density(y))
    };
    let r = integrate_to_infinity(integrand, 0.0, truth.tail_cutoff(TAIL_MASS), &inner())?;
    finite(r.value, "divergence")
}

fn finite(v: f64, what: &str) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFinite(format!("{what} evaluated to {v}")))
    }
}
