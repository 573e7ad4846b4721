//! Acceptance suite. Prints one PASS/FAIL line per criterion, then asserts
//! every criterion outside [`EXPECTED_RED`].

mod common;

use std::io::Write;
use std::process::Command;

use common::{
    exp_sample, km_criterion_oracle, linspace, random_censored_sample, simpson_half_line,
};
use dualdiv::asymptotics::{
    compute_c, compute_xi0, population_criterion, sandwich_variance, CensoringScheme,
};
use dualdiv::estimators::{km_dual_criterion, DualCriterion};
use dualdiv::optimize::ScalarObjective;
use dualdiv::sim::{preset, run_scenario, MseTable};
use dualdiv::{
    fit_amle, fit_dphide, fit_mle_exponential, integral_term, CensoredSample, DphideConfig,
    DualIntegrandContext, Escort, EstimatorKind, ExponentialModel, PowerDivergence,
};
use rayon::prelude::*;

/// Criteria whose failure is reported but does not fail the build.
const EXPECTED_RED: [usize; 1] = [2];

const SEED: u64 = 20240601;
const TABLE_TOL: f64 = 0.20;
const IDENTITY_TOL: f64 = 1e-10;
const ORACLE_TOL: f64 = 1e-8;
const SANDWICH_MC_TOL: f64 = 0.10;
const GRADIENT_TOL: f64 = 1e-6;

type Criterion = (usize, &'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn within(value: f64, target: f64, rel: f64) -> bool {
    (value - target).abs() <= rel * target
}

fn table(name: &str) -> MseTable {
    run_scenario(&preset(name).unwrap().with_seed(SEED)).unwrap()
}

fn mse(t: &MseTable, kind: EstimatorKind, n: usize) -> f64 {
    t.cell(kind, n).unwrap().mse
}

fn criterion_1() -> Outcome {
    let t = table("table1");
    let cells = [(100, 0.0122), (200, 0.0058)];
    let mut pass = true;
    let mut detail = Vec::new();
    for (n, target) in cells {
        let m = mse(&t, EstimatorKind::Mle, n);
        pass &= within(m, target, TABLE_TOL);
        detail.push(format!("MLE n={n}: {m:.4} vs {target}"));
    }
    outcome(pass, detail.join("; "))
}

fn criterion_2() -> Outcome {
    let t = table("table3");
    let (chi, log) = (
        EstimatorKind::Dphide { gamma: -1.0 },
        EstimatorKind::Dphide { gamma: 0.0 },
    );
    let mut pass = true;
    let mut detail = Vec::new();
    for (n, target) in [(100, 0.0626), (200, 0.0627)] {
        let (a, b, c) = (
            mse(&t, chi, n),
            mse(&t, log, n),
            mse(&t, EstimatorKind::Mle, n),
        );
        let ordered = a < b && b < c;
        let close = within(a, target, TABLE_TOL);
        pass &= ordered && close;
        detail.push(format!(
            "n={n}: gamma=-1 {a:.4} (target {target}), gamma=0 {b:.4}, MLE {c:.4}, ordered {ordered}"
        ));
    }
    outcome(pass, detail.join("; "))
}

fn criterion_3() -> Outcome {
    let mut worst = 0.0f64;
    for seed in 0..100 {
        let s = random_censored_sample(seed);
        let amle = fit_amle(&s).unwrap().estimate;
        let config =
            DphideConfig::new(PowerDivergence::new(0.0).unwrap()).with_escort(Escort::Adaptive);
        let dual = fit_dphide(&s, &config).unwrap().estimate;
        worst = worst.max((dual - amle).abs() / amle);
    }
    let mut km_gap = 0.0f64;
    let mut mle_gap = 0.0f64;
    for seed in 0..50 {
        let s = exp_sample(seed, 5 + seed as usize, 1.3, 0.0);
        let (amle, mle) = (
            fit_amle(&s).unwrap().estimate,
            fit_mle_exponential(&s).unwrap().estimate,
        );
        mle_gap = mle_gap.max((amle - mle).abs() / mle);
        let fit = s.fit_km();
        let z: Vec<f64> = s.observations().iter().map(|o| o.z).collect();
        for &x in &z {
            let ecdf = z.iter().filter(|&&v| v <= x).count() as f64 / z.len() as f64;
            km_gap = km_gap.max((fit.survival(x) - (1.0 - ecdf)).abs());
        }
    }
    let mut jump_gap = 0.0f64;
    for seed in 100..150 {
        let fit = random_censored_sample(seed).fit_km();
        let mut previous = 1.0;
        let mut times: Vec<f64> = fit.ordered().iter().map(|o| o.z).collect();
        times.dedup();
        for t in times {
            let mass: f64 = fit
                .ordered()
                .iter()
                .zip(fit.weights())
                .filter(|(o, _)| o.z == t)
                .map(|(_, w)| w)
                .sum();
            let now = fit.survival(t);
            jump_gap = jump_gap.max((previous - now - mass).abs());
            previous = now;
        }
    }
    let pass = [worst, mle_gap, km_gap, jump_gap]
        .iter()
        .all(|&g| g <= IDENTITY_TOL);
    outcome(
        pass,
        format!("max gaps: DphiDE(0)-AMLE {worst:.1e}, AMLE-MLE {mle_gap:.1e}, KM-ECDF {km_gap:.1e}, weight-jump {jump_gap:.1e}"),
    )
}

fn criterion_4() -> Outcome {
    let values = [0.5_f64, 1.0, 2.0, 4.0];
    let mut it_gap = 0.0f64;
    for &t in &values {
        for &a in &values {
            for g in [-1.0, 0.5, 2.0] {
                let d = g * t + (1.0 - g) * a;
                if d <= 0.0 {
                    continue;
                }
                let f = |x: f64| {
                    let lr = (t / a).ln() - (t - a) * x;
                    ((g - 1.0) * lr).exp() * t * (-t * x).exp() / (g - 1.0)
                };
                it_gap = it_gap
                    .max((integral_term(t, a, g).unwrap() - simpson_half_line(&f, d, 1e-12)).abs());
            }
        }
    }
    let s = exp_sample(50, 50, 1.0, 0.0);
    let km = s.fit_km();
    let atoms: Vec<(f64, f64)> = km.atoms().collect();
    let mut crit_gap = 0.0f64;
    for (g, a) in [(2.0, 0.8), (-1.0, 1.3), (0.5, 1.7), (0.0, 0.6), (1.0, 2.2)] {
        let ctx = DualIntegrandContext::new(
            ExponentialModel::new(1.0).unwrap(),
            ExponentialModel::new(a).unwrap(),
            PowerDivergence::new(g).unwrap(),
        )
        .unwrap();
        let closed = DualCriterion::new(&km, g, 1.0)
            .unwrap()
            .try_value(a)
            .unwrap();
        crit_gap = crit_gap.max((closed - km_dual_criterion(&km, &ctx).unwrap()).abs());
        crit_gap = crit_gap.max((closed - km_criterion_oracle(&atoms, g, 1.0, a)).abs());
    }
    let mut xi_gap = 0.0f64;
    for c in [0.0, 1.0 / 9.0, 0.25] {
        let scheme = CensoringScheme::new(1.0, c).unwrap();
        for x in linspace(0.0, 3.0, 31) {
            let cc = if c == 0.0 {
                0.0
            } else {
                c / (1.0 + c) * (((1.0 + c) * x).exp() - 1.0)
            };
            xi_gap = xi_gap.max((compute_xi0(&scheme, x).unwrap() - (c * x).exp()).abs());
            xi_gap = xi_gap.max((compute_c(&scheme, x).unwrap() - cc).abs());
        }
    }
    let pass = [it_gap, crit_gap, xi_gap].iter().all(|&g| g <= ORACLE_TOL);
    outcome(
        pass,
        format!(
            "max gaps: integral term {it_gap:.1e}, criterion {crit_gap:.1e}, xi0/C {xi_gap:.1e}"
        ),
    )
}

fn criterion_5() -> Outcome {
    let grid = linspace(0.5, 2.0, 200);
    let step = grid[1] - grid[0];
    let mut pass = true;
    let mut worst = 0.0f64;
    for theta in [1.0, 2.0] {
        for gamma in [-1.0, 0.5, 2.0] {
            let mut best = (f64::NEG_INFINITY, f64::NAN);
            for &a in &grid {
                if let Ok(v) = population_criterion(gamma, theta, 1.0, a) {
                    if v > best.0 {
                        best = (v, a);
                    }
                }
            }
            let off = (best.1 - 1.0).abs();
            worst = worst.max(off);
            pass &= off <= step;
        }
    }
    outcome(
        pass,
        format!("largest |argmax - theta0| {worst:.2e}, grid step {step:.2e}"),
    )
}

fn criterion_6() -> Outcome {
    let exact = sandwich_variance(&CensoringScheme::uncensored(1.0).unwrap(), 0.5, 1.0)
        .unwrap()
        .sandwich;
    let exact_ok = (exact - 1.0).abs() <= 1e-8;
    let target = sandwich_variance(&CensoringScheme::new(1.0, 1.0 / 9.0).unwrap(), 0.0, 1.0)
        .unwrap()
        .sandwich;
    let scenario = preset("table1")
        .unwrap()
        .with_seed(SEED)
        .with_sizes(vec![2000]);
    let (n, reps) = (2000, 2000);
    let config = DphideConfig::new(PowerDivergence::new(0.0).unwrap());
    let scaled: Vec<f64> = (0..reps)
        .into_par_iter()
        .map(|rep| {
            let s = scenario.generate_sample(n, rep).unwrap();
            (n as f64).sqrt() * (fit_dphide(&s, &config).unwrap().estimate - 1.0)
        })
        .collect();
    let mean = scaled.iter().sum::<f64>() / reps as f64;
    let var = scaled.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (reps - 1) as f64;
    let pass = exact_ok && within(var, target, SANDWICH_MC_TOL);
    outcome(
        pass,
        format!("uncensored sandwich {exact:.10}; empirical {var:.4} vs S^-1 V S^-1 {target:.4}"),
    )
}

fn richardson(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    let d = |h: f64| (f(x + h) - f(x - h)) / (2.0 * h);
    (4.0 * d(h / 2.0) - d(h)) / 3.0
}

fn criterion_7() -> Outcome {
    let mut worst = 0.0f64;
    for seed in 0..20 {
        let s: CensoredSample = random_censored_sample(1000 + seed);
        let km = s.fit_km();
        let theta = fit_amle(&s).unwrap().estimate;
        for gamma in [-1.0, 0.5, 1.0, 2.0] {
            let c = DualCriterion::new(&km, gamma, theta).unwrap();
            for a in [0.7 * theta, 1.3 * theta, 1.6 * theta] {
                if !c.is_admissible(a * 1.001) || !c.is_admissible(a * 0.999) {
                    continue;
                }
                let fd = richardson(|x| c.value(x), a, 1e-3 * a);
                worst = worst.max((fd - c.slope(a)).abs() / c.slope(a).abs());
            }
        }
    }
    outcome(
        worst < GRADIENT_TOL,
        format!("max relative error {worst:.1e}"),
    )
}

fn criterion_8() -> Outcome {
    let run = |threads: &str| {
        let out = Command::new(env!("CARGO_BIN_EXE_dualdiv"))
            .args([
                "simulate",
                "--preset",
                "table3",
                "--seed",
                "123",
                "--replications",
                "200",
            ])
            .env("DUALDIV_THREADS", threads)
            .output()
            .unwrap();
        assert!(out.status.success());
        out.stdout
    };
    let (a, b) = (run("1"), run("4"));
    outcome(
        a == b && !a.is_empty(),
        format!(
            "{} bytes, identical across 1 and 4 threads: {}",
            a.len(),
            a == b
        ),
    )
}

#[test]
fn acceptance_criteria() {
    let criteria: [Criterion; 8] = [
        (1, "clean table reproduction", criterion_1),
        (2, "contaminated table ordering", criterion_2),
        (3, "exact identities", criterion_3),
        (4, "closed forms vs oracles", criterion_4),
        (5, "dual supremum location", criterion_5),
        (6, "sandwich validation", criterion_6),
        (7, "gradient checks", criterion_7),
        (8, "reproducibility", criterion_8),
    ];
    let mut unexpected = Vec::new();
    let mut out = std::io::stdout().lock();
    writeln!(out).unwrap();
    for (id, name, check) in criteria {
        let o = check();
        let status = if o.pass { "PASS" } else { "FAIL" };
        let note = if !o.pass && EXPECTED_RED.contains(&id) {
            " (expected)"
        } else {
            ""
        };
        writeln!(out, "acceptance {id} {status}{note}: {name}: {}", o.detail).unwrap();
        if !o.pass && !EXPECTED_RED.contains(&id) {
            unexpected.push(id);
        }
    }
    assert!(unexpected.is_empty(), "failed criteria: {unexpected:?}");
}
