//! Reference computations shared by the integration tests. Nothing here calls
//! into the library's numerics, so agreement is a genuine cross-check.
#![allow(dead_code)]

use dualdiv::{CensoredSample, Observation};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Adaptive Simpson on `[a, b]` with Richardson correction.
pub fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    #[allow(clippy::too_many_arguments)]
    fn step<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
                + step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
        }
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    step(f, a, b, fa, fm, fb, whole, tol, 50)
}

/// `∫_0^∞ f` for integrands decaying at least like `e^{−rate·x}`: Simpson on
/// unit panels out to where `e^{−rate·x}` drops below 1e-17.
pub fn simpson_half_line<F: Fn(f64) -> f64>(f: &F, rate: f64, tol: f64) -> f64 {
    let upper = 40.0 / rate;
    let panels = upper.ceil() as usize;
    let width = upper / panels as f64;
    (0..panels)
        .map(|k| {
            simpson(
                f,
                k as f64 * width,
                (k + 1) as f64 * width,
                tol / panels as f64,
            )
        })
        .sum()
}

pub fn central_difference<F: Fn(f64) -> f64>(f: F, x: f64, h: f64) -> f64 {
    (f(x + h) - f(x - h)) / (2.0 * h)
}

/// Index of the largest finite value.
pub fn argmax(values: &[f64]) -> usize {
    values
        .iter()
        .enumerate()
        .filter(|(_, v)| v.is_finite())
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .expect("at least one finite value")
}

pub fn linspace(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    (0..points)
        .map(|k| lo + (hi - lo) * k as f64 / (points - 1) as f64)
        .collect()
}

/// Exponential lifetimes with rate `theta`, censored by exponential times
/// with rate `c` (no censoring when `c == 0`).
pub fn exp_sample(seed: u64, n: usize, theta: f64, c: f64) -> CensoredSample {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = |rate: f64| -> f64 { -(1.0 - rng.random::<f64>()).ln() / rate };
    let obs = (0..n)
        .map(|_| {
            let x = draw(theta);
            if c > 0.0 {
                let y = draw(c);
                Observation {
                    z: x.min(y),
                    delta: x <= y,
                }
            } else {
                Observation::event(x)
            }
        })
        .collect();
    CensoredSample::new(obs).unwrap()
}

/// Random censored sample with at least one event.
pub fn random_censored_sample(seed: u64) -> CensoredSample {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let n = rng.random_range(5..120);
    let theta = rng.random_range(0.3..3.0);
    let c = rng.random_range(0.05..1.0) * theta;
    let mut s = exp_sample(seed, n, theta, c);
    while s.event_count() == 0 {
        s = exp_sample(seed.wrapping_add(1), n, theta, c);
    }
    s
}

/// Model-side term `∫ φ'(p_θ/p_α) dP_θ` of the exponential model, written out
/// independently of the library.
pub fn model_term_exponential(gamma: f64, theta: f64, alpha: f64) -> f64 {
    let d = gamma * theta + (1.0 - gamma) * alpha;
    if gamma == 0.0 {
        0.0
    } else if gamma == 1.0 {
        (theta / alpha).ln() - (theta - alpha) / theta
    } else {
        theta.powf(gamma) * alpha.powf(1.0 - gamma) / ((gamma - 1.0) * d) - 1.0 / (gamma - 1.0)
    }
}

/// Conjugate term `r φ'(r) − φ(r)` at `r = p_θ(x)/p_α(x)`.
pub fn conjugate_exponential(gamma: f64, theta: f64, alpha: f64, x: f64) -> f64 {
    let lr = (theta / alpha).ln() - (theta - alpha) * x;
    if gamma == 0.0 {
        lr
    } else {
        ((gamma * lr).exp() - 1.0) / gamma
    }
}

/// Closed-form dual integrand of the exponential model.
pub fn h_exponential(gamma: f64, theta: f64, alpha: f64, x: f64) -> f64 {
    model_term_exponential(gamma, theta, alpha) - conjugate_exponential(gamma, theta, alpha, x)
}

/// Kaplan-Meier dual criterion: the model term is not weighted, so a mass
/// deficit in the weights leaves it intact.
pub fn km_criterion_oracle(atoms: &[(f64, f64)], gamma: f64, theta: f64, alpha: f64) -> f64 {
    model_term_exponential(gamma, theta, alpha)
        - atoms
            .iter()
            .map(|&(z, w)| w * conjugate_exponential(gamma, theta, alpha, z))
            .sum::<f64>()
}
