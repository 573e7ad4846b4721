//! Right-censored samples and their Kaplan-Meier fits.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

/// One observed pair `(Z, δ)` with `Z = min(X, Y)` and `δ = 1{X ≤ Y}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub z: f64,
    pub delta: bool,
}

impl Observation {
    pub fn event(z: f64) -> Self {
        Self { z, delta: true }
    }

    pub fn censored(z: f64) -> Self {
        Self { z, delta: false }
    }
}

/// Non-empty collection of censored observations with finite `z`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CensoredSample {
    observations: Vec<Observation>,
}

impl CensoredSample {
    pub fn new(observations: Vec<Observation>) -> Result<Self> {
        if observations.is_empty() {
            return Err(Error::Degenerate(
                "a censored sample needs at least one observation".into(),
            ));
        }
        if let Some((i, o)) = observations
            .iter()
            .enumerate()
            .find(|(_, o)| !o.z.is_finite())
        {
            return Err(Error::Domain(format!(
                "observation {i} has non-finite z = {}",
                o.z
            )));
        }
        Ok(Self { observations })
    }

    /// Builds a sample from `(z, δ)` pairs with `δ ∈ {0, 1}`.
    pub fn from_pairs(pairs: &[(f64, u8)]) -> Result<Self> {
        let obs = pairs
            .iter()
            .map(|&(z, d)| match d {
                0 => Ok(Observation::censored(z)),
                1 => Ok(Observation::event(z)),
                other => Err(Error::Domain(format!("delta must be 0 or 1, got {other}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(obs)
    }

    /// Sample with every observation uncensored.
    pub fn uncensored(z: &[f64]) -> Result<Self> {
        Self::new(z.iter().map(|&z| Observation::event(z)).collect())
    }

    pub fn observations(&self) -> &[Observation] {
        &self.observations
    }

    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }

    pub fn event_count(&self) -> usize {
        self.observations.iter().filter(|o| o.delta).count()
    }

    pub fn censored_fraction(&self) -> f64 {
        1.0 - self.event_count() as f64 / self.len() as f64
    }

    pub fn total_time(&self) -> f64 {
        self.observations.iter().map(|o| o.z).sum()
    }

    pub fn fit_km(&self) -> KaplanMeierFit {
        KaplanMeierFit::fit(self)
    }
}

/// Kaplan-Meier fit of a censored sample.
///
/// Observations are ordered by `z`; ties put events before censorings, and
/// equal `(z, δ)` keep their input order. Stute weights `W_in` are the atom
/// masses of the Kaplan-Meier distribution; when the largest observation is
/// censored they sum to less than one and the deficit is left in place.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KaplanMeierFit {
    ordered: Vec<Observation>,
    weights: Vec<f64>,
    // Ŝ just after the i-th ordered observation.
    survival_after: Vec<f64>,
    // Running Greenwood sum Σ δ_j / (n_j (n_j − δ_j)) with n_j = n − j + 1.
    greenwood_after: Vec<f64>,
}

impl KaplanMeierFit {
    pub fn fit(sample: &CensoredSample) -> Self {
        let mut ordered = sample.observations().to_vec();
        // Stable sort keeps input order within equal (z, δ).
        ordered.sort_by(|a, b| a.z.total_cmp(&b.z).then(b.delta.cmp(&a.delta)));
        let n = ordered.len();

        let mut weights = Vec::with_capacity(n);
        let mut product = 1.0;
        for (idx, o) in ordered.iter().enumerate() {
            let i = idx + 1;
            let at_risk = (n - i + 1) as f64;
            weights.push(if o.delta { product / at_risk } else { 0.0 });
            if o.delta {
                product *= (n - i) as f64 / at_risk;
            }
        }

        let mut survival_after = Vec::with_capacity(n);
        let mut greenwood_after = Vec::with_capacity(n);
        let mut s = 1.0;
        let mut gw = 0.0;
        for (idx, o) in ordered.iter().enumerate() {
            let at_risk = (n - idx) as f64;
            if o.delta {
                s *= 1.0 - 1.0 / at_risk;
                gw += 1.0 / (at_risk * (at_risk - 1.0));
            }
            survival_after.push(s);
            greenwood_after.push(gw);
        }

        Self {
            ordered,
            weights,
            survival_after,
            greenwood_after,
        }
    }

    pub fn len(&self) -> usize {
        self.ordered.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ordered.is_empty()
    }

    pub fn ordered(&self) -> &[Observation] {
        &self.ordered
    }

    /// Stute weights aligned with [`ordered`](Self::ordered).
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// `(Z_(i), W_in)` for atoms with positive weight.
    pub fn atoms(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.ordered
            .iter()
            .zip(&self.weights)
            .filter(|(_, &w)| w > 0.0)
            .map(|(o, &w)| (o.z, w))
    }

    fn count_at_or_below(&self, x: f64) -> usize {
        self.ordered.partition_point(|o| o.z <= x)
    }

    /// Right-continuous survival estimate `Ŝ(x)`.
    pub fn survival(&self, x: f64) -> f64 {
        match self.count_at_or_below(x) {
            0 => 1.0,
            k => self.survival_after[k - 1],
        }
    }

    /// Kaplan-Meier distribution function `1 − Ŝ(x)`.
    pub fn cdf(&self, x: f64) -> f64 {
        1.0 - self.survival(x)
    }

    /// Greenwood variance estimate of `Ŝ(x)`.
    pub fn greenwood_variance(&self, x: f64) -> f64 {
        let s = self.survival(x);
        if s == 0.0 {
            return 0.0;
        }
        s * s * self.log_variance(x)
    }

    fn log_variance(&self, x: f64) -> f64 {
        match self.count_at_or_below(x) {
            0 => 0.0,
            k => self.greenwood_after[k - 1],
        }
    }

    /// `Σ W_in f(Z_(i))`. Atoms with zero weight are skipped.
    pub fn integral<F: FnMut(f64) -> f64>(&self, mut f: F) -> Result<f64> {
        let mut acc = 0.0;
        for (z, w) in self.atoms() {
            let v = f(z);
            if !v.is_finite() {
                return Err(Error::Evaluation {
                    x: z,
                    reason: format!("integrand is {v} at an atom with weight {w}"),
                });
            }
            acc += w * v;
        }
        Ok(acc)
    }

    /// Pointwise interval for `Ŝ(x)` from the Greenwood variance on the log
    /// scale: `Ŝ exp(±z σ)` with `σ² = Σ δ_j/(n_j(n_j−δ_j))`, clipped to `[0, 1]`.
    pub fn survival_with_ci(&self, x: f64, level: f64) -> Result<SurvivalPoint> {
        let q = normal_quantile(level)?;
        let s = self.survival(x);
        if s == 0.0 {
            return Ok(SurvivalPoint {
                x,
                estimate: 0.0,
                lower: 0.0,
                upper: 0.0,
            });
        }
        let sd = self.log_variance(x).sqrt();
        Ok(SurvivalPoint {
            x,
            estimate: s,
            lower: (s * (-q * sd).exp()).clamp(0.0, 1.0),
            upper: (s * (q * sd).exp()).clamp(0.0, 1.0),
        })
    }

    /// Step-curve rows at `x = 0` (when all observations are positive) and at
    /// every distinct observed time.
    pub fn curve(&self, level: f64) -> Result<Vec<SurvivalPoint>> {
        let mut xs: Vec<f64> = Vec::with_capacity(self.len() + 1);
        if self.ordered.first().is_some_and(|o| o.z > 0.0) {
            xs.push(0.0);
        }
        for o in &self.ordered {
            if xs.last() != Some(&o.z) {
                xs.push(o.z);
            }
        }
        xs.into_iter()
            .map(|x| self.survival_with_ci(x, level))
            .collect()
    }
}

/// Two-sided standard-normal quantile for a confidence level in `(0, 1)`.
fn normal_quantile(level: f64) -> Result<f64> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::Config(format!(
            "confidence level must lie in (0, 1), got {level}"
        )));
    }
    let normal = Normal::standard();
    Ok(normal.inverse_cdf(0.5 * (1.0 + level)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurvivalPoint {
    pub x: f64,
    pub estimate: f64,
    pub lower: f64,
    pub upper: f64,
}
