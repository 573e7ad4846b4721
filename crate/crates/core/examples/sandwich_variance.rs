//! Asymptotic variance `S⁻¹VS⁻¹` across censoring rates, divergence indices
//! and escorts.

use dualdiv::asymptotics::variance_table;

fn main() -> dualdiv::Result<()> {
    let rates = [0.0, 1.0 / 9.0, 0.25];
    let gammas = [-1.0, 0.0, 0.5, 1.0, 2.0];
    let thetas = [1.0, 1.2];
    println!(
        "{:>6} {:>6} {:>8} {:>10} {:>10} {:>10}",
        "gamma", "theta", "c", "S", "V", "sandwich"
    );
    for row in variance_table(1.0, &rates, &gammas, &thetas)? {
        match row {
            Ok(r) => println!(
                "{:>6} {:>6} {:>8.4} {:>10.5} {:>10.5} {:>10.5}",
                r.gamma, r.theta, r.c, r.s, r.v, r.sandwich
            ),
            Err(e) => println!("skipped: {e}"),
        }
    }
    Ok(())
}
