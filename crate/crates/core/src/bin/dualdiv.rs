use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use dualdiv::asymptotics::variance_table;
use dualdiv::estimators::{
    fit_amle, fit_dphide, fit_mdpde, fit_mle_exponential, DphideConfig, Escort, FitResult,
};
use dualdiv::sim::{preset, run_scenario, worker_pool};
use dualdiv::{io as dio, Error, PowerDivergence};

/// Dual phi-divergence estimation for right-censored exponential data.
#[derive(Debug, Parser)]
#[command(name = "dualdiv", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Kaplan-Meier survival curve with pointwise Greenwood intervals.
    Km(KmArgs),
    /// Fit estimators to a `z,delta` CSV sample.
    Fit(FitArgs),
    /// Sandwich variance table under exponential censoring.
    Variance(VarianceArgs),
    /// Monte Carlo MSE table for a preset scenario.
    Simulate(SimulateArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
struct KmArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value_t = 0.95)]
    level: f64,
    /// Output file; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct FitArgs {
    #[arg(long)]
    input: PathBuf,
    /// Divergence indices of dual estimators (repeatable or comma separated).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    gamma: Vec<f64>,
    /// `adaptive` (AMLE) or a positive rate.
    #[arg(long, default_value = "adaptive", value_parser = parse_escort)]
    escort: Escort,
    /// Density power indices of MDPDE fits.
    #[arg(long, value_delimiter = ',')]
    beta: Vec<f64>,
    #[arg(long)]
    mle: bool,
    #[arg(long)]
    amle: bool,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct VarianceArgs {
    #[arg(long, default_value = "1", value_parser = parse_number)]
    theta0: f64,
    /// Censoring rates; fractions such as `1/9` are accepted.
    #[arg(long = "c", value_delimiter = ',', value_parser = parse_number, default_values = ["0", "1/9", "1/4"])]
    rates: Vec<f64>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_values_t = [-1.0, 0.0, 0.5, 1.0, 2.0])]
    gamma: Vec<f64>,
    /// Escort values; defaults to `theta0`.
    #[arg(long, value_delimiter = ',', value_parser = parse_number)]
    theta: Vec<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// One of table1, table2, table3, table4, longtail.
    #[arg(long)]
    preset: String,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    replications: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    sizes: Option<Vec<usize>>,
    /// Contamination fraction overriding the preset.
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write the sample of one replication, given as `N:REP`, to --dump-out.
    #[arg(long, requires = "dump_out", value_parser = parse_dump)]
    dump_sample: Option<(usize, usize)>,
    #[arg(long, requires = "dump_sample")]
    dump_out: Option<PathBuf>,
}

fn parse_number(s: &str) -> Result<f64, String> {
    let parse = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("`{t}`: {e}"));
    match s.split_once('/') {
        Some((p, q)) => Ok(parse(p)? / parse(q)?),
        None => parse(s),
    }
}

fn parse_escort(s: &str) -> Result<Escort, String> {
    if s == "adaptive" {
        Ok(Escort::Adaptive)
    } else {
        parse_number(s)
            .map(Escort::Fixed)
            .map_err(|e| format!("expected `adaptive` or a number, {e}"))
    }
}

fn parse_dump(s: &str) -> Result<(usize, usize), String> {
    let (n, rep) = s
        .split_once(':')
        .ok_or_else(|| format!("expected N:REP, got `{s}`"))?;
    Ok((
        n.parse().map_err(|e| format!("N: {e}"))?,
        rep.parse().map_err(|e| format!("REP: {e}"))?,
    ))
}

/// Failure classes, each with its own exit status.
enum Failure {
    Io(Error),
    Usage(String),
    Numeric(Error),
    NotConverged,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Io(_) | Error::Csv(_) | Error::Json(_) | Error::Parse { .. } => Failure::Io(e),
            Error::Config(_) | Error::UnknownPreset(_) => Failure::Usage(e.to_string()),
            other => Failure::Numeric(other),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(Error::Io(e))
    }
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>, Failure> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| {
            Failure::Io(Error::Io(io::Error::new(
                e.kind(),
                format!("{}: {e}", p.display()),
            )))
        })?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn km(args: KmArgs) -> Result<(), Failure> {
    let sample = dio::read_sample(&args.input)?;
    let curve = sample.fit_km().curve(args.level)?;
    let mut out = output(args.out.as_deref())?;
    dio::write_curve(&curve, &mut out)?;
    out.flush()?;
    Ok(())
}

fn fit(args: FitArgs) -> Result<(), Failure> {
    if args.gamma.is_empty() && args.beta.is_empty() && !args.mle && !args.amle {
        return Err(Failure::Usage(
            "choose at least one of --gamma, --beta, --mle, --amle".into(),
        ));
    }
    let sample = dio::read_sample(&args.input)?;
    let mut fits: Vec<FitResult> = Vec::new();
    if args.mle {
        fits.push(fit_mle_exponential(&sample)?);
    }
    if args.amle {
        fits.push(fit_amle(&sample)?);
    }
    for &g in &args.gamma {
        let config = DphideConfig::new(PowerDivergence::new(g)?).with_escort(args.escort);
        fits.push(fit_dphide(&sample, &config)?);
    }
    for &b in &args.beta {
        fits.push(fit_mdpde(&sample, b)?);
    }
    let mut out = output(args.out.as_deref())?;
    match args.format {
        Format::Csv => dio::write_fits_csv(&fits, &mut out)?,
        Format::Json => {
            dio::write_fits_json(&fits, &mut out)?;
            writeln!(out)?;
        }
    }
    out.flush()?;
    if fits.iter().all(|f| f.converged) {
        Ok(())
    } else {
        Err(Failure::NotConverged)
    }
}

fn variance(args: VarianceArgs) -> Result<(), Failure> {
    let thetas = if args.theta.is_empty() {
        vec![args.theta0]
    } else {
        args.theta
    };
    let mut rows = Vec::new();
    let mut points = Vec::new();
    for &c in &args.rates {
        for &g in &args.gamma {
            for &t in &thetas {
                points.push((c, g, t));
            }
        }
    }
    for (point, row) in points.iter().zip(variance_table(
        args.theta0,
        &args.rates,
        &args.gamma,
        &thetas,
    )?) {
        match row {
            Ok(r) => rows.push(r),
            Err(e) => eprintln!(
                "skipping c = {}, gamma = {}, theta = {}: {e}",
                point.0, point.1, point.2
            ),
        }
    }
    let mut out = output(args.out.as_deref())?;
    dio::write_variance(&rows, &mut out)?;
    out.flush()?;
    Ok(())
}

fn simulate(args: SimulateArgs) -> Result<(), Failure> {
    let mut scenario = preset(&args.preset)?.with_seed(args.seed);
    if let Some(r) = args.replications {
        scenario = scenario.with_replications(r);
    }
    if let Some(sizes) = args.sizes {
        scenario = scenario.with_sizes(sizes);
    }
    if let Some(eps) = args.epsilon {
        scenario = scenario.with_contamination_fraction(eps);
    }
    scenario.validate()?;

    if let (Some((n, rep)), Some(path)) = (args.dump_sample, args.dump_out.as_deref()) {
        let sample = scenario.generate_sample(n, rep)?;
        let mut out = output(Some(path))?;
        dio::write_sample(&sample, &mut out)?;
        out.flush()?;
    }

    let table = worker_pool()?.install(|| run_scenario(&scenario))?;
    let mut out = output(args.out.as_deref())?;
    match args.format {
        Format::Csv => table.write_csv(&mut out)?,
        Format::Json => {
            table.write_json(&mut out)?;
            writeln!(out)?;
        }
    }
    out.flush()?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Km(a) => km(a),
        Command::Fit(a) => fit(a),
        Command::Variance(a) => variance(a),
        Command::Simulate(a) => simulate(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Io(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::NotConverged) => {
            eprintln!("warning: at least one fit did not converge; results written with converged = false");
            ExitCode::from(3)
        }
        Err(Failure::Numeric(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(4)
        }
    }
}
