//! Parametric lifetime models.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::divergence::PowerDivergence;
use crate::error::{Error, Result};
use crate::quadrature::{integrate_to_infinity, QuadOptions};

/// Survival mass left beyond the first quadrature cutoff.
pub const TAIL_MASS: f64 = 1e-12;

/// A parametric family of lifetime distributions, evaluated at one parameter value.
///
/// The parameter is an associated type so that multi-parameter families can
/// implement the same contract; the estimators in this crate only use
/// one-dimensional families.
pub trait LifetimeModel: Clone + fmt::Debug + Send + Sync {
    type Param: Copy + fmt::Debug;

    fn from_param(param: Self::Param) -> Result<Self>;

    fn param(&self) -> Self::Param;

    fn density(&self, x: f64) -> f64;

    fn log_density(&self, x: f64) -> f64 {
        self.density(x).ln()
    }

    fn cdf(&self, x: f64) -> f64;

    fn survival(&self, x: f64) -> f64 {
        1.0 - self.cdf(x)
    }

    /// Gradient of the log-density with respect to the parameter.
    fn score(&self, x: f64) -> Self::Param;

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R, n: usize) -> Vec<f64>;

    /// Smallest `x` with `survival(x) <= mass`.
    fn tail_cutoff(&self, mass: f64) -> f64;

    /// Checks that `D_φ(P_self, P_alpha)` is finite.
    fn check_admissible(&self, _alpha: &Self, _divergence: &PowerDivergence) -> Result<()> {
        Ok(())
    }

    /// `∫ φ'(p_self / p_alpha) dP_self`. Falls back to quadrature.
    fn phi_prime_expectation(&self, alpha: &Self, divergence: &PowerDivergence) -> Result<f64> {
        phi_prime_expectation_by_quadrature(self, alpha, divergence)
    }
}

/// Quadrature evaluation of `∫ φ'(p_θ/p_α) dP_θ` over `[0, ∞)`.
///
/// The integrand is assembled in log space so that the density ratio never
/// overflows in the tail.
pub fn phi_prime_expectation_by_quadrature<M: LifetimeModel>(
    theta: &M,
    alpha: &M,
    divergence: &PowerDivergence,
) -> Result<f64> {
    theta.check_admissible(alpha, divergence)?;
    let g = divergence.gamma();
    let integrand = |x: f64| -> f64 {
        let lt = theta.log_density(x);
        if lt == f64::NEG_INFINITY {
            return 0.0;
        }
        let la = alpha.log_density(x);
        let log_ratio = lt - la;
        if g == 0.0 {
            lt.exp() - la.exp()
        } else if g == 1.0 {
            log_ratio * lt.exp()
        } else {
            (((g - 1.0) * log_ratio + lt).exp() - lt.exp()) / (g - 1.0)
        }
    };
    let opts = QuadOptions::default().with_abs_tol(1e-12);
    let upper = theta.tail_cutoff(TAIL_MASS);
    Ok(integrate_to_infinity(integrand, 0.0, upper, &opts)?.value)
}

/// Exponential lifetime law with density `θ e^{−θx}` on `x ≥ 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentialModel {
    theta: f64,
}

impl ExponentialModel {
    pub fn new(theta: f64) -> Result<Self> {
        if theta > 0.0 && theta.is_finite() {
            Ok(Self { theta })
        } else {
            Err(Error::Domain(format!(
                "exponential rate must be finite and > 0, got {theta}"
            )))
        }
    }

    pub fn rate(&self) -> f64 {
        self.theta
    }

    pub fn mean(&self) -> f64 {
        1.0 / self.theta
    }

    pub fn fisher_information(&self) -> f64 {
        1.0 / (self.theta * self.theta)
    }
}

impl LifetimeModel for ExponentialModel {
    type Param = f64;

    fn from_param(param: f64) -> Result<Self> {
        Self::new(param)
    }

    fn param(&self) -> f64 {
        self.theta
    }

    fn density(&self, x: f64) -> f64 {
        if x < 0.0 {
            0.0
        } else {
            self.theta * (-self.theta * x).exp()
        }
    }

    fn log_density(&self, x: f64) -> f64 {
        if x < 0.0 {
            f64::NEG_INFINITY
        } else {
            self.theta.ln() - self.theta * x
        }
    }

    fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            0.0
        } else {
            -(-self.theta * x).exp_m1()
        }
    }

    fn survival(&self, x: f64) -> f64 {
        if x <= 0.0 {
            1.0
        } else {
            (-self.theta * x).exp()
        }
    }

    fn score(&self, x: f64) -> f64 {
        1.0 / self.theta - x
    }

    /// Inverse-CDF draws `−ln(U)/θ` with `U` uniform on `(0, 1]`.
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R, n: usize) -> Vec<f64> {
        (0..n).map(|_| self.draw(rng)).collect()
    }

    fn tail_cutoff(&self, mass: f64) -> f64 {
        -mass.ln() / self.theta
    }

    fn check_admissible(&self, alpha: &Self, divergence: &PowerDivergence) -> Result<()> {
        admissible(self.theta, alpha.theta, divergence.gamma())
    }

    fn phi_prime_expectation(&self, alpha: &Self, divergence: &PowerDivergence) -> Result<f64> {
        let g = divergence.gamma();
        let term = integral_term(self.theta, alpha.theta, g)?;
        if g == 0.0 || g == 1.0 {
            Ok(term)
        } else {
            Ok(term - 1.0 / (g - 1.0))
        }
    }
}

impl ExponentialModel {
    pub(crate) fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.random();
        -(-u).ln_1p() / self.theta
    }
}

/// `γθ + (1−γ)α`, the decay rate of `(p_θ/p_α)^(γ−1) p_θ`.
pub fn admissibility_margin(theta: f64, alpha: f64, gamma: f64) -> f64 {
    gamma * theta + (1.0 - gamma) * alpha
}

fn admissible(theta: f64, alpha: f64, gamma: f64) -> Result<()> {
    if !(theta > 0.0 && theta.is_finite()) {
        return Err(Error::Domain(format!("theta must be > 0, got {theta}")));
    }
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::Domain(format!("alpha must be > 0, got {alpha}")));
    }
    let margin = admissibility_margin(theta, alpha, gamma);
    if margin > 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "(theta, alpha) = ({theta}, {alpha}) outside the admissible set for gamma = {gamma}: \
             gamma*theta + (1-gamma)*alpha = {margin} is not > 0"
        )))
    }
}

/// Closed-form model term of the exponential dual criterion.
///
/// * `γ ∉ {0, 1}`: `(1/(γ−1)) ∫ (p_θ/p_α)^(γ−1) dP_θ = θ^γ α^(1−γ) / ((γ−1)(γθ + (1−γ)α))`
/// * `γ = 0`: `∫ φ'_0(p_θ/p_α) dP_θ = 0`
/// * `γ = 1`: `∫ φ'_1(p_θ/p_α) dP_θ = log(θ/α) − (θ−α)/θ`
///
/// For `γ ∉ {0, 1}` this differs from `∫ φ'_γ(p_θ/p_α) dP_θ` by the constant `1/(γ−1)`.
pub fn integral_term(theta: f64, alpha: f64, gamma: f64) -> Result<f64> {
    admissible(theta, alpha, gamma)?;
    if gamma == 0.0 {
        Ok(0.0)
    } else if gamma == 1.0 {
        Ok((theta / alpha).ln() - (theta - alpha) / theta)
    } else {
        let margin = admissibility_margin(theta, alpha, gamma);
        // θ^γ α^(1−γ) = α (θ/α)^γ
        Ok(alpha * (gamma * (theta / alpha).ln()).exp() / ((gamma - 1.0) * margin))
    }
}

/// Derivative of [`integral_term`] with respect to `alpha`:
/// `−γ θ^γ α^(−γ) (θ−α) / (γθ + (1−γ)α)²`, valid on every branch.
pub fn integral_term_alpha_derivative(theta: f64, alpha: f64, gamma: f64) -> Result<f64> {
    admissible(theta, alpha, gamma)?;
    let margin = admissibility_margin(theta, alpha, gamma);
    let ratio_pow = (gamma * (theta / alpha).ln()).exp();
    Ok(-gamma * ratio_pow * (theta - alpha) / (margin * margin))
}

/// Second derivative of [`integral_term`] with respect to `alpha`.
pub fn integral_term_alpha_second_derivative(theta: f64, alpha: f64, gamma: f64) -> Result<f64> {
    admissible(theta, alpha, gamma)?;
    let d = admissibility_margin(theta, alpha, gamma);
    let ratio_pow = (gamma * (theta / alpha).ln()).exp();
    // d/dα [ (θ/α)^γ (θ−α) D^{-2} ]
    let g = gamma;
    let inner = -g / alpha * (theta - alpha) / (d * d)
        - 1.0 / (d * d)
        - 2.0 * (1.0 - g) * (theta - alpha) / (d * d * d);
    Ok(-g * ratio_pow * inner)
}
