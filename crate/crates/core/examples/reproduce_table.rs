//! Monte Carlo MSE table for a preset. Usage:
//! `cargo run --release --example reproduce_table -- [preset] [replications]`.

use std::io;

use dualdiv::sim::{preset, run_scenario, worker_pool};

fn main() -> dualdiv::Result<()> {
    let mut args = std::env::args().skip(1);
    let name = args.next().unwrap_or_else(|| "table1".to_string());
    let reps = args
        .next()
        .map_or(Ok(1000), |r| r.parse())
        .map_err(|e| dualdiv::Error::Config(format!("replications: {e}")))?;
    let scenario = preset(&name)?.with_seed(20240601).with_replications(reps);
    let table = worker_pool()?.install(|| run_scenario(&scenario))?;
    table.write_csv(io::stdout().lock())?;
    let failures: usize = table
        .rows
        .iter()
        .flat_map(|r| &r.cells)
        .map(|c| c.failures)
        .sum();
    eprintln!("{name}: {reps} replications, {failures} failed fits excluded");
    Ok(())
}
