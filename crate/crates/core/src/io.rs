//! CSV and JSON interchange.
//!
//! Samples use a `z,delta` header with one observation per line. Floats are
//! written with the shortest representation that parses back to the same
//! value, so a written sample re-reads bit-exactly.

use std::fs::File;
use std::io::{self, Read, Write};
use std::path::Path;

use crate::asymptotics::VarianceRow;
use crate::error::{Error, Result};
use crate::estimators::FitResult;
use crate::km::{CensoredSample, Observation, SurvivalPoint};

/// Reads a `z,delta` CSV file.
pub fn read_sample(path: &Path) -> Result<CensoredSample> {
    let file = File::open(path)
        .map_err(|e| io::Error::new(e.kind(), format!("{}: {e}", path.display())))?;
    read_sample_from(file, path)
}

/// Reads a `z,delta` CSV stream; `path` only labels error messages.
pub fn read_sample_from<R: Read>(mut reader: R, path: &Path) -> Result<CensoredSample> {
    let mut text = String::new();
    reader.read_to_string(&mut text)?;
    // Physical line of a record. csv's own counter skips blank lines, and a
    // record's byte offset can point at blank lines preceding it.
    let bytes = text.as_bytes();
    let line_of = |pos: Option<&csv::Position>| {
        pos.map_or(0, |p| {
            let mut start = p.byte() as usize;
            while start < bytes.len() && matches!(bytes[start], b'\n' | b'\r') {
                start += 1;
            }
            1 + bytes[..start].iter().filter(|&&b| b == b'\n').count() as u64
        })
    };
    let parse_err = |line: u64, reason: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        reason,
    };
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(bytes);
    let headers = rdr.headers()?.clone();
    let (iz, id) = match (
        headers.iter().position(|h| h == "z"),
        headers.iter().position(|h| h == "delta"),
    ) {
        (Some(iz), Some(id)) => (iz, id),
        _ => {
            return Err(parse_err(
                1,
                format!(
                    "expected header `z,delta`, found `{}`",
                    headers.iter().collect::<Vec<_>>().join(",")
                ),
            ))
        }
    };

    let mut observations = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| {
            let line = line_of(e.position());
            parse_err(line, e.to_string())
        })?;
        let line = line_of(record.position());
        let z: f64 = record
            .get(iz)
            .ok_or_else(|| parse_err(line, "missing z".into()))?
            .parse()
            .map_err(|_| parse_err(line, format!("z is not a number: `{}`", &record[iz])))?;
        if !z.is_finite() {
            return Err(parse_err(line, format!("z must be finite, got {z}")));
        }
        let delta = match record.get(id) {
            Some("1") => true,
            Some("0") => false,
            Some(other) => {
                return Err(parse_err(
                    line,
                    format!("delta must be 0 or 1, got `{other}`"),
                ))
            }
            None => return Err(parse_err(line, "missing delta".into())),
        };
        observations.push(Observation { z, delta });
    }
    if observations.is_empty() {
        return Err(parse_err(1, "no observations".into()));
    }
    CensoredSample::new(observations)
}

/// Shortest decimal form that parses back to the same `f64`, with an
/// exponent for very large or small magnitudes.
pub fn format_f64(v: f64) -> String {
    format!("{v:?}")
}

pub fn write_sample<W: Write>(sample: &CensoredSample, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["z", "delta"])?;
    for o in sample.observations() {
        w.write_record([format_f64(o.z), u8::from(o.delta).to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// Survival curve rows `x,estimate,lower,upper`.
pub fn write_curve<W: Write>(points: &[SurvivalPoint], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for p in points {
        w.serialize(p)?;
    }
    w.flush()?;
    Ok(())
}

const FIT_HEADER: [&str; 10] = [
    "estimator",
    "family",
    "tuning",
    "estimate",
    "criterion",
    "iterations",
    "converged",
    "gradient_norm",
    "escort",
    "grid_winner",
];

pub fn write_fits_csv<W: Write>(fits: &[FitResult], out: W) -> Result<()> {
    let opt = |v: Option<f64>| v.map_or(String::new(), format_f64);
    let mut w = csv::Writer::from_writer(out);
    w.write_record(FIT_HEADER)?;
    for f in fits {
        w.write_record([
            f.estimator.to_string(),
            f.estimator.family().to_string(),
            opt(f.estimator.tuning()),
            format_f64(f.estimate),
            format_f64(f.criterion),
            f.iterations.to_string(),
            f.converged.to_string(),
            format_f64(f.gradient_norm),
            opt(f.escort),
            opt(f.grid_winner),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_fits_json<W: Write>(fits: &[FitResult], out: W) -> Result<()> {
    serde_json::to_writer_pretty(out, fits)?;
    Ok(())
}

/// Variance rows `gamma,theta,c,S,V,sandwich`.
pub fn write_variance<W: Write>(rows: &[VarianceRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}
