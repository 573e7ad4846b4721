//! Ratio of fitted to true density under contamination, for the likelihood
//! fit and two dual fits.

use dualdiv::estimators::density_ratio_diagnostic;
use dualdiv::sim::preset;
use dualdiv::{fit_dphide, fit_mle_exponential, DphideConfig, Escort, PowerDivergence};

fn main() -> dualdiv::Result<()> {
    let sample = preset("table3")?.with_seed(4).generate_sample(200, 0)?;
    let grid: Vec<f64> = (0..=10).map(|k| 0.5 * k as f64).collect();
    let mut fits = vec![("MLE", fit_mle_exponential(&sample)?.estimate)];
    for (label, gamma) in [("gamma=-1", -1.0), ("gamma=0.5", 0.5)] {
        let config =
            DphideConfig::new(PowerDivergence::new(gamma)?).with_escort(Escort::Fixed(1.0));
        fits.push((label, fit_dphide(&sample, &config)?.estimate));
    }
    print!("{:>6}", "x");
    for (label, est) in &fits {
        print!(" {:>18}", format!("{label} ({est:.3})"));
    }
    println!();
    let columns: Vec<_> = fits
        .iter()
        .map(|&(_, est)| density_ratio_diagnostic(est, 1.0, &grid))
        .collect::<dualdiv::Result<_>>()?;
    for (i, x) in grid.iter().enumerate() {
        print!("{x:>6.1}");
        for col in &columns {
            print!(" {:>18.4}", col[i].ratio);
        }
        println!();
    }
    Ok(())
}
