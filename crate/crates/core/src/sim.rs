//! Seeded Monte Carlo study of estimator MSE under censoring and contamination.
//!
//! Every replication draws from its own ChaCha8 stream, selected by the
//! sample size and replication index, so a table does not depend on thread
//! count or scheduling. Results are reduced in replication order.

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::divergence::PowerDivergence;
use crate::error::{Error, Result};
use crate::estimators::{
    amle_from_fit, dphide_from_fit, fit_mle_exponential, mdpde_from_fit, DphideConfig,
    EstimatorKind,
};
use crate::km::{CensoredSample, Observation};
use crate::model::ExponentialModel;
use crate::optimize::SearchOptions;

/// Environment variable read by [`worker_pool`] for the number of threads.
pub const THREADS_ENV: &str = "DUALDIV_THREADS";

pub const PRESETS: [&str; 5] = ["table1", "table2", "table3", "table4", "longtail"];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Contamination {
    /// Fraction of lifetimes replaced; the count is `round(fraction · n)`.
    pub fraction: f64,
    /// Rate of the exponential law the replacements are drawn from.
    pub rate: f64,
}

impl Contamination {
    pub fn none() -> Self {
        Self {
            fraction: 0.0,
            rate: 1.0,
        }
    }

    pub fn count(&self, n: usize) -> usize {
        (self.fraction * n as f64).round() as usize
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationScenario {
    pub name: String,
    pub sizes: Vec<usize>,
    pub theta0: f64,
    /// Rate of the exponential censoring law; 0 disables censoring.
    pub censoring_rate: f64,
    pub contamination: Contamination,
    pub replications: usize,
    pub estimators: Vec<EstimatorKind>,
    pub seed: u64,
}

/// MLE, the dual estimator for `γ ∈ {−1, 0, 0.5, 1, 2}` and the MDPDE for
/// `β ∈ {0.1, 0.5, 1}`, in table order.
pub fn default_roster() -> Vec<EstimatorKind> {
    let mut r = vec![EstimatorKind::Mle];
    r.extend([-1.0, 0.0, 0.5, 1.0, 2.0].map(|gamma| EstimatorKind::Dphide { gamma }));
    r.extend([0.1, 0.5, 1.0].map(|beta| EstimatorKind::Mdpde { beta }));
    r
}

/// Scenario behind one of the published tables.
pub fn preset(name: &str) -> Result<SimulationScenario> {
    let (c, contamination) = match name {
        "table1" => (1.0 / 9.0, Contamination::none()),
        "table2" => (0.25, Contamination::none()),
        "table3" => (
            1.0 / 9.0,
            Contamination {
                fraction: 0.2,
                rate: 5.0,
            },
        ),
        "table4" => (
            0.25,
            Contamination {
                fraction: 0.2,
                rate: 5.0,
            },
        ),
        "longtail" => (
            1.0 / 9.0,
            Contamination {
                fraction: 0.2,
                rate: 0.1,
            },
        ),
        other => return Err(Error::UnknownPreset(other.to_string())),
    };
    Ok(SimulationScenario {
        name: name.to_string(),
        sizes: vec![25, 50, 75, 100, 150, 200],
        theta0: 1.0,
        censoring_rate: c,
        contamination,
        replications: 1000,
        estimators: default_roster(),
        seed: 0,
    })
}

impl SimulationScenario {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_replications(mut self, replications: usize) -> Self {
        self.replications = replications;
        self
    }

    pub fn with_sizes(mut self, sizes: Vec<usize>) -> Self {
        self.sizes = sizes;
        self
    }

    pub fn with_contamination_fraction(mut self, fraction: f64) -> Self {
        self.contamination.fraction = fraction;
        self
    }

    pub fn validate(&self) -> Result<()> {
        ExponentialModel::new(self.theta0).map_err(|e| Error::Config(format!("theta0: {e}")))?;
        if !(self.censoring_rate >= 0.0 && self.censoring_rate.is_finite()) {
            return Err(Error::Config(format!(
                "censoring rate must be >= 0, got {}",
                self.censoring_rate
            )));
        }
        let eps = self.contamination.fraction;
        if !(0.0..1.0).contains(&eps) {
            return Err(Error::Config(format!(
                "contamination fraction must lie in [0, 1), got {eps}"
            )));
        }
        if eps > 0.0 {
            ExponentialModel::new(self.contamination.rate)
                .map_err(|e| Error::Config(format!("contamination rate: {e}")))?;
        }
        if self.sizes.is_empty() || self.sizes.contains(&0) {
            return Err(Error::Config(
                "sample sizes must be a non-empty list of positive counts".into(),
            ));
        }
        if let Some(&n) = self
            .sizes
            .iter()
            .find(|&&n| self.contamination.count(n) >= n)
        {
            return Err(Error::Config(format!(
                "contamination would replace every observation at n = {n}"
            )));
        }
        if self.sizes.iter().any(|&n| n as u64 > u32::MAX as u64) {
            return Err(Error::Config("sample sizes must fit in 32 bits".into()));
        }
        if self.replications == 0 || self.replications as u64 > u32::MAX as u64 {
            return Err(Error::Config(format!(
                "replications must be in 1..=2^32-1, got {}",
                self.replications
            )));
        }
        if self.estimators.is_empty() {
            return Err(Error::Config("estimator roster is empty".into()));
        }
        for e in &self.estimators {
            match *e {
                EstimatorKind::Dphide { gamma } => {
                    PowerDivergence::new(gamma).map_err(|err| Error::Config(err.to_string()))?;
                }
                EstimatorKind::Mdpde { beta } if !(beta > 0.0 && beta.is_finite()) => {
                    return Err(Error::Config(format!("beta must be > 0, got {beta}")));
                }
                _ => {}
            }
        }
        Ok(())
    }

    /// Generator for replication `rep` at sample size `n`.
    pub fn rng(&self, n: usize, rep: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(((n as u64) << 32) | rep as u64);
        rng
    }

    /// Lifetimes from `exp(θ₀)`, a random subset of `round(εn)` of them
    /// replaced by contamination draws, then censored by independent
    /// `exp(c)` times.
    pub fn generate_sample(&self, n: usize, rep: usize) -> Result<CensoredSample> {
        let mut rng = self.rng(n, rep);
        let lifetime = ExponentialModel::new(self.theta0)?;
        let mut x: Vec<f64> = (0..n).map(|_| lifetime.draw(&mut rng)).collect();
        let k = self.contamination.count(n);
        if k > 0 {
            let outlier = ExponentialModel::new(self.contamination.rate)?;
            for i in index::sample(&mut rng, n, k).iter() {
                x[i] = outlier.draw(&mut rng);
            }
        }
        let observations = if self.censoring_rate > 0.0 {
            let censor = ExponentialModel::new(self.censoring_rate)?;
            x.iter()
                .map(|&xi| {
                    let yi = censor.draw(&mut rng);
                    Observation {
                        z: xi.min(yi),
                        delta: xi <= yi,
                    }
                })
                .collect()
        } else {
            x.into_iter().map(Observation::event).collect()
        };
        CensoredSample::new(observations)
    }
}

/// Estimates from one replication, `None` where a fit failed or did not
/// converge. The outer `None` marks a replication whose escort failed.
pub type Replication = Option<Vec<Option<f64>>>;

/// Fits every roster estimator on one sample, with the AMLE as escort.
pub fn fit_roster(sample: &CensoredSample, roster: &[EstimatorKind]) -> Replication {
    let fit = sample.fit_km();
    let amle = amle_from_fit(&fit).ok()?.estimate;
    let opts = SearchOptions::default();
    let estimates = roster
        .iter()
        .map(|kind| {
            let r = match *kind {
                EstimatorKind::Mle => fit_mle_exponential(sample),
                EstimatorKind::Amle => amle_from_fit(&fit),
                EstimatorKind::Dphide { gamma } => {
                    let config = DphideConfig::new(PowerDivergence::new(gamma).ok()?);
                    dphide_from_fit(&fit, &config, amle)
                }
                EstimatorKind::Mdpde { beta } => mdpde_from_fit(&fit, beta, amle, &opts),
            };
            r.ok()
                .filter(|r| r.converged && r.estimate.is_finite())
                .map(|r| r.estimate)
        })
        .collect();
    Some(estimates)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MseCell {
    pub n: usize,
    /// Mean of `(estimate − θ₀)²` over the replications that succeeded.
    pub mse: f64,
    pub replications: usize,
    pub failures: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MseRow {
    pub label: String,
    #[serde(flatten)]
    pub estimator: EstimatorKind,
    pub cells: Vec<MseCell>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MseTable {
    pub scenario: SimulationScenario,
    pub rows: Vec<MseRow>,
    /// Replications lost to an escort failure, per sample size.
    pub escort_failures: Vec<usize>,
}

impl MseTable {
    pub fn row(&self, estimator: EstimatorKind) -> Option<&MseRow> {
        self.rows.iter().find(|r| r.estimator == estimator)
    }

    pub fn cell(&self, estimator: EstimatorKind, n: usize) -> Option<&MseCell> {
        self.row(estimator)?.cells.iter().find(|c| c.n == n)
    }

    /// Rows are estimators, columns are sample sizes; values use the
    /// shortest representation that round-trips.
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["estimator".to_string()];
        header.extend(self.scenario.sizes.iter().map(|n| n.to_string()));
        w.write_record(&header)?;
        for row in &self.rows {
            let mut record = vec![row.label.clone()];
            record.extend(row.cells.iter().map(|c| crate::io::format_f64(c.mse)));
            w.write_record(&record)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_json<W: std::io::Write>(&self, out: W) -> Result<()> {
        serde_json::to_writer_pretty(out, self)?;
        Ok(())
    }
}

/// Runs every replication of `scenario` on the current rayon pool.
pub fn run_scenario(scenario: &SimulationScenario) -> Result<MseTable> {
    scenario.validate()?;
    let roster = &scenario.estimators;
    let mut sums = vec![vec![(0.0f64, 0usize); scenario.sizes.len()]; roster.len()];
    let mut escort_failures = Vec::with_capacity(scenario.sizes.len());

    for (col, &n) in scenario.sizes.iter().enumerate() {
        let outcomes: Vec<Replication> = (0..scenario.replications)
            .into_par_iter()
            .map(|rep| {
                scenario
                    .generate_sample(n, rep)
                    .ok()
                    .and_then(|s| fit_roster(&s, roster))
            })
            .collect();
        let mut lost = 0;
        for outcome in &outcomes {
            match outcome {
                None => lost += 1,
                Some(estimates) => {
                    for (row, est) in estimates.iter().enumerate() {
                        if let Some(e) = est {
                            let d = e - scenario.theta0;
                            sums[row][col].0 += d * d;
                            sums[row][col].1 += 1;
                        }
                    }
                }
            }
        }
        escort_failures.push(lost);
    }

    let rows = roster
        .iter()
        .zip(sums)
        .map(|(&estimator, cols)| MseRow {
            label: estimator.to_string(),
            estimator,
            cells: scenario
                .sizes
                .iter()
                .zip(cols)
                .map(|(&n, (sum, used))| MseCell {
                    n,
                    mse: if used > 0 {
                        sum / used as f64
                    } else {
                        f64::NAN
                    },
                    replications: used,
                    failures: scenario.replications - used,
                })
                .collect(),
        })
        .collect();

    Ok(MseTable {
        scenario: scenario.clone(),
        rows,
        escort_failures,
    })
}

/// Thread pool sized by [`THREADS_ENV`] when set, otherwise rayon's default.
pub fn worker_pool() -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let threads: usize = v.trim().parse().map_err(|_| {
            Error::Config(format!(
                "{THREADS_ENV} must be a positive integer, got `{v}`"
            ))
        })?;
        builder = builder.num_threads(threads);
    }
    builder
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))
}
