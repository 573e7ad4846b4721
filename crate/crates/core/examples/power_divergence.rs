//! Values and derivatives of the power divergence family at a few ratios.

use dualdiv::PowerDivergence;

fn main() -> dualdiv::Result<()> {
    let ratios = [0.25, 0.5, 1.0, 2.0, 4.0];
    println!(
        "{:>16} {:>6} {:>12} {:>12} {:>12}",
        "divergence", "x", "phi", "phi'", "phi''"
    );
    for gamma in [-1.0, 0.0, 0.5, 1.0, 2.0] {
        let d = PowerDivergence::new(gamma)?;
        for x in ratios {
            println!(
                "{:>16} {:>6} {:>12.6} {:>12.6} {:>12.6}",
                d.name().map_or(format!("gamma={gamma}"), str::to_string),
                x,
                d.phi(x)?,
                d.phi_prime(x)?,
                d.phi_second(x)?
            );
        }
    }
    Ok(())
}
