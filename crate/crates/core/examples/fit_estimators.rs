//! Every estimator on one contaminated, censored sample.

use dualdiv::sim::preset;
use dualdiv::{
    fit_amle, fit_dphide, fit_mdpde, fit_mle_exponential, DphideConfig, Escort, PowerDivergence,
};

fn main() -> dualdiv::Result<()> {
    let sample = preset("table3")?.with_seed(11).generate_sample(200, 0)?;
    println!("n = {}, events = {}", sample.len(), sample.event_count());

    let mut fits = vec![fit_mle_exponential(&sample)?, fit_amle(&sample)?];
    for gamma in [-1.0, 0.0, 0.5, 1.0, 2.0] {
        fits.push(fit_dphide(
            &sample,
            &DphideConfig::new(PowerDivergence::new(gamma)?),
        )?);
    }
    for beta in [0.1, 0.5, 1.0] {
        fits.push(fit_mdpde(&sample, beta)?);
    }
    // A fixed escort away from the AMLE moves the dual estimate off it.
    let fixed = DphideConfig::new(PowerDivergence::new(0.5)?).with_escort(Escort::Fixed(1.5));
    fits.push(fit_dphide(&sample, &fixed)?);

    println!(
        "{:>10} {:>10} {:>10} {:>6} {:>10}",
        "estimator", "estimate", "escort", "iters", "converged"
    );
    for f in fits {
        let escort = f.escort.map_or("-".to_string(), |e| format!("{e:.4}"));
        println!(
            "{:>10} {:>10.5} {:>10} {:>6} {:>10}",
            f.estimator.to_string(),
            f.estimate,
            escort,
            f.iterations,
            f.converged
        );
    }
    Ok(())
}
