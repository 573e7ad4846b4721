//! Kaplan-Meier curve of a lightly censored exponential sample (n = 100,
//! censoring rate 1/9) next to the true survival function.

use dualdiv::sim::preset;
use dualdiv::{ExponentialModel, LifetimeModel};

fn main() -> dualdiv::Result<()> {
    let scenario = preset("table1")?.with_seed(2);
    let sample = scenario.generate_sample(100, 0)?;
    println!("censored fraction: {:.2}", sample.censored_fraction());
    let fit = sample.fit_km();
    let truth = ExponentialModel::new(1.0)?;
    println!(
        "{:>8} {:>10} {:>10} {:>10} {:>10}",
        "x", "KM", "lower", "upper", "exp(-x)"
    );
    for p in fit.curve(0.95)?.iter().step_by(5) {
        println!(
            "{:>8.4} {:>10.4} {:>10.4} {:>10.4} {:>10.4}",
            p.x,
            p.estimate,
            p.lower,
            p.upper,
            truth.survival(p.x)
        );
    }
    println!("total Kaplan-Meier mass: {:.4}", fit.total_weight());
    Ok(())
}
