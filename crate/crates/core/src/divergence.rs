//! The Cressie-Read power-divergence family and the dual integrand built on it.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::LifetimeModel;

/// Convex generator `φ_γ` of the power-divergence family.
///
/// `γ = 0` and `γ = 1` select the modified Kullback-Leibler and
/// Kullback-Leibler generators exactly (compared with `==` on the supplied
/// value); every other `γ` uses the general expression.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerDivergence {
    gamma: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Branch {
    ModifiedKl,
    Kl,
    General,
}

impl PowerDivergence {
    pub fn new(gamma: f64) -> Result<Self> {
        if !gamma.is_finite() {
            return Err(Error::Domain(format!(
                "divergence index must be finite, got {gamma}"
            )));
        }
        Ok(Self { gamma })
    }

    pub fn kullback_leibler() -> Self {
        Self { gamma: 1.0 }
    }

    pub fn modified_kullback_leibler() -> Self {
        Self { gamma: 0.0 }
    }

    pub fn hellinger() -> Self {
        Self { gamma: 0.5 }
    }

    pub fn chi_square() -> Self {
        Self { gamma: 2.0 }
    }

    pub fn modified_chi_square() -> Self {
        Self { gamma: -1.0 }
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Conventional name of the divergence, when it has one.
    pub fn name(&self) -> Option<&'static str> {
        match self.gamma {
            1.0 => Some("KL"),
            0.0 => Some("KL_m"),
            0.5 => Some("Hellinger"),
            2.0 => Some("chi2"),
            -1.0 => Some("chi2_m"),
            _ => None,
        }
    }

    fn branch(&self) -> Branch {
        if self.gamma == 0.0 {
            Branch::ModifiedKl
        } else if self.gamma == 1.0 {
            Branch::Kl
        } else {
            Branch::General
        }
    }

    /// `φ_γ(x)`. At `x = 0` the right limit is returned, which is `+∞` for `γ ≤ 0`.
    pub fn phi(&self, x: f64) -> Result<f64> {
        if x.is_nan() || x < 0.0 {
            return Err(Error::Domain(format!(
                "phi is defined on [0, ∞), got x = {x}"
            )));
        }
        let g = self.gamma;
        Ok(match self.branch() {
            Branch::ModifiedKl => {
                if x == 0.0 {
                    f64::INFINITY
                } else {
                    -x.ln() + x - 1.0
                }
            }
            Branch::Kl => {
                if x == 0.0 {
                    1.0
                } else {
                    x * x.ln() - x + 1.0
                }
            }
            Branch::General => {
                if x == 0.0 {
                    if g < 0.0 {
                        f64::INFINITY
                    } else {
                        1.0 / g
                    }
                } else {
                    // x^γ - 1 via expm1 keeps precision for γ near 0 or x near 1.
                    ((g * x.ln()).exp_m1() - g * (x - 1.0)) / (g * (g - 1.0))
                }
            }
        })
    }

    /// `φ'_γ(x)` for `x > 0`.
    pub fn phi_prime(&self, x: f64) -> Result<f64> {
        self.check_positive(x, "phi_prime")?;
        let g = self.gamma;
        Ok(match self.branch() {
            Branch::ModifiedKl => 1.0 - 1.0 / x,
            Branch::Kl => x.ln(),
            Branch::General => ((g - 1.0) * x.ln()).exp_m1() / (g - 1.0),
        })
    }

    /// `φ''_γ(x) = x^(γ-2)` for `x > 0`.
    pub fn phi_second(&self, x: f64) -> Result<f64> {
        self.check_positive(x, "phi_second")?;
        Ok(x.powf(self.gamma - 2.0))
    }

    /// `x φ'(x) - φ(x)`, the convex conjugate evaluated at `φ'(x)`.
    ///
    /// For the power family this is `(x^γ - 1)/γ`, with the limit `log x` at `γ = 0`.
    pub fn conjugate_at_derivative(&self, x: f64) -> Result<f64> {
        self.check_positive(x, "conjugate_at_derivative")?;
        let g = self.gamma;
        Ok(match self.branch() {
            Branch::ModifiedKl => x.ln(),
            Branch::Kl => x - 1.0,
            Branch::General => (g * x.ln()).exp_m1() / g,
        })
    }

    fn check_positive(&self, x: f64, what: &str) -> Result<()> {
        if x > 0.0 && x.is_finite() {
            Ok(())
        } else {
            Err(Error::Domain(format!(
                "{what} requires a finite x > 0, got {x}"
            )))
        }
    }
}

/// Escort `θ` and optimisation variable `α` for a given divergence,
/// checked against the model's admissible set on construction.
#[derive(Debug, Clone)]
pub struct DualIntegrandContext<M: LifetimeModel> {
    theta: M,
    alpha: M,
    divergence: PowerDivergence,
}

impl<M: LifetimeModel> DualIntegrandContext<M> {
    pub fn new(theta: M, alpha: M, divergence: PowerDivergence) -> Result<Self> {
        theta.check_admissible(&alpha, &divergence)?;
        Ok(Self {
            theta,
            alpha,
            divergence,
        })
    }

    pub fn theta(&self) -> &M {
        &self.theta
    }

    pub fn alpha(&self) -> &M {
        &self.alpha
    }

    pub fn divergence(&self) -> PowerDivergence {
        self.divergence
    }

    /// Model-side term `∫ φ'(p_θ/p_α) dP_θ`.
    pub fn model_term(&self) -> Result<f64> {
        self.theta
            .phi_prime_expectation(&self.alpha, &self.divergence)
    }

    /// `h(θ, α, x)` given a precomputed [`model_term`](Self::model_term).
    pub fn evaluate_with(&self, model_term: f64, x: f64) -> Result<f64> {
        let ratio = (self.theta.log_density(x) - self.alpha.log_density(x)).exp();
        if !(ratio.is_finite() && ratio > 0.0) {
            return Err(Error::Evaluation {
                x,
                reason: format!("density ratio p_theta/p_alpha = {ratio} is outside (0, ∞)"),
            });
        }
        let bracket = self
            .divergence
            .conjugate_at_derivative(ratio)
            .map_err(|e| Error::Evaluation {
                x,
                reason: format!("ratio {ratio}: {e}"),
            })?;
        Ok(model_term - bracket)
    }
}

/// `h(θ, α, x) = ∫ φ'(p_θ/p_α) dP_θ − [ r φ'(r) − φ(r) ]` with `r = p_θ(x)/p_α(x)`.
pub fn dual_integrand<M: LifetimeModel>(ctx: &DualIntegrandContext<M>, x: f64) -> Result<f64> {
    let m = ctx.model_term()?;
    ctx.evaluate_with(m, x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ExponentialModel;

    const GAMMAS: [f64; 5] = [-1.0, 0.0, 0.5, 1.0, 2.0];

    fn div(g: f64) -> PowerDivergence {
        PowerDivergence::new(g).unwrap()
    }

    #[test]
    fn phi_examples() {
        assert_eq!(div(0.5).phi(1.0).unwrap(), 0.0);
        assert!((div(2.0).phi(3.0).unwrap() - 2.0).abs() < 1e-14);
        // Hellinger: 2(√x − 1)² at x = 4.
        let h = div(0.5).phi(4.0).unwrap();
        assert!((h - 2.0).abs() < 1e-14);
        assert!((h - 2.0 * (4f64.sqrt() - 1.0).powi(2)).abs() < 1e-14);
    }

    #[test]
    fn named_generators_match_closed_forms() {
        for x in [0.1, 0.7, 1.0, 2.5, 9.0] {
            let chi2 = 0.5 * (x - 1.0) * (x - 1.0);
            let chi2m = 0.5 * (x - 1.0) * (x - 1.0) / x;
            assert!((PowerDivergence::chi_square().phi(x).unwrap() - chi2).abs() < 1e-12);
            assert!((PowerDivergence::modified_chi_square().phi(x).unwrap() - chi2m).abs() < 1e-12);
            let kl = x * x.ln() - x + 1.0;
            assert!((PowerDivergence::kullback_leibler().phi(x).unwrap() - kl).abs() < 1e-15);
        }
        assert_eq!(PowerDivergence::hellinger().name(), Some("Hellinger"));
        assert_eq!(div(0.3).name(), None);
    }

    #[test]
    fn phi_at_zero_follows_limit_convention() {
        assert_eq!(div(0.0).phi(0.0).unwrap(), f64::INFINITY);
        assert_eq!(div(-1.0).phi(0.0).unwrap(), f64::INFINITY);
        assert_eq!(div(1.0).phi(0.0).unwrap(), 1.0);
        assert_eq!(div(2.0).phi(0.0).unwrap(), 0.5);
        assert!(matches!(div(2.0).phi(-0.1), Err(Error::Domain(_))));
    }

    #[test]
    fn phi_prime_examples() {
        assert_eq!(div(2.0).phi_prime(1.0).unwrap(), 0.0);
        assert!((div(1.0).phi_prime(std::f64::consts::E).unwrap() - 1.0).abs() < 1e-15);
        let d = div(0.5).phi_prime(4.0).unwrap();
        assert!((d - 1.0).abs() < 1e-14);
        let h = 1e-5;
        let fd = (div(0.5).phi(4.0 + h).unwrap() - div(0.5).phi(4.0 - h).unwrap()) / (2.0 * h);
        assert!((fd - d).abs() < 1e-8);
        assert!(matches!(div(0.5).phi_prime(0.0), Err(Error::Domain(_))));
    }

    #[test]
    fn phi_second_examples() {
        for g in GAMMAS {
            assert_eq!(div(g).phi_second(1.0).unwrap(), 1.0);
        }
        assert!((div(0.0).phi_second(2.0).unwrap() - 0.25).abs() < 1e-15);
        assert!((div(3.0).phi_second(2.0).unwrap() - 2.0).abs() < 1e-15);
        let h = 1e-5;
        for (g, expected) in [(0.0, 0.25), (3.0, 2.0)] {
            let fd = (div(g).phi_prime(2.0 + h).unwrap() - div(g).phi_prime(2.0 - h).unwrap())
                / (2.0 * h);
            assert!((fd - expected).abs() < 1e-8, "gamma {g}: {fd}");
        }
        assert!(matches!(div(1.0).phi_second(-1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn conjugate_matches_definition() {
        for g in [-1.0, 0.0, 0.5, 1.0, 2.0, 3.5] {
            let d = div(g);
            for x in [0.2, 0.9, 1.0, 1.7, 6.0] {
                let direct = x * d.phi_prime(x).unwrap() - d.phi(x).unwrap();
                assert!((d.conjugate_at_derivative(x).unwrap() - direct).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn dual_integrand_vanishes_when_alpha_equals_theta() {
        for g in GAMMAS {
            let m = ExponentialModel::new(1.3).unwrap();
            let ctx = DualIntegrandContext::new(m, m, div(g)).unwrap();
            for x in [0.0, 0.4, 2.0, 7.0] {
                assert!(dual_integrand(&ctx, x).unwrap().abs() < 1e-14);
            }
        }
    }

    #[test]
    fn context_rejects_inadmissible_pair() {
        let t = ExponentialModel::new(1.0).unwrap();
        let a = ExponentialModel::new(2.0).unwrap();
        assert!(matches!(
            DualIntegrandContext::new(t, a, div(2.0)),
            Err(Error::Domain(_))
        ));
    }
}
