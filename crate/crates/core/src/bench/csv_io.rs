use std::io::{Read, Write};

use super::{SweepOutcome, SweepRow};
use crate::error::{Error, Result};

pub const CSV_COLUMNS: [&str; 10] = [
    "e",
    "u",
    "R",
    "f",
    "frames",
    "success_rate",
    "mean_iterations",
    "throughput_mbps",
    "mean_time_ms",
    "residual_error_rate",
];

const PREAMBLE: &[&str] = &[
    "# throughput counts successfully reconciled bits only",
    "# f is the single-matrix efficiency m/(n h(e))",
    "# mean_time_ms is decoder wall-clock per iteration",
    "# residual_error_rate is the bit error rate of the decoder output over all frames",
];

/// Writes the documented preamble, the header, one row per point and a
/// comment line per skipped point.
pub fn write_csv<W: Write>(outcome: &SweepOutcome, mut sink: W) -> Result<()> {
    for line in PREAMBLE {
        writeln!(sink, "{line}")?;
    }
    {
        let mut w = csv::Writer::from_writer(&mut sink);
        w.write_record(CSV_COLUMNS)?;
        for r in &outcome.rows {
            w.write_record([
                r.e.to_string(),
                r.u.to_string(),
                r.rate.to_string(),
                r.f.to_string(),
                r.frames.to_string(),
                r.success_rate.to_string(),
                r.mean_iterations.to_string(),
                r.throughput_mbps.to_string(),
                r.mean_time_ms.to_string(),
                r.residual_error_rate.to_string(),
            ])?;
        }
        w.flush()?;
    }
    for s in &outcome.skipped {
        writeln!(sink, "# skipped e={} R={}: f={:.6} <= 1", s.e, s.rate, s.f)?;
    }
    sink.flush()?;
    Ok(())
}

/// Parses sweep CSV, ignoring comment lines.
pub fn read_csv<R: Read>(source: R) -> Result<Vec<SweepRow>> {
    let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(source);
    let headers = reader.headers()?.clone();
    if headers.iter().ne(CSV_COLUMNS.iter().copied()) {
        return Err(Error::Config(format!("unexpected CSV header {:?}", headers.iter().collect::<Vec<_>>())));
    }
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        let field = |j: usize| -> Result<&str> {
            record
                .get(j)
                .ok_or_else(|| Error::Config(format!("row {} lacks column {}", i + 1, CSV_COLUMNS[j])))
        };
        let float = |j: usize| -> Result<f64> {
            field(j)?
                .parse()
                .map_err(|e| Error::Config(format!("row {}, {}: {e}", i + 1, CSV_COLUMNS[j])))
        };
        let count = |j: usize| -> Result<usize> {
            field(j)?
                .parse()
                .map_err(|e| Error::Config(format!("row {}, {}: {e}", i + 1, CSV_COLUMNS[j])))
        };
        rows.push(SweepRow {
            e: float(0)?,
            u: count(1)?,
            rate: float(2)?,
            f: float(3)?,
            frames: count(4)?,
            success_rate: float(5)?,
            mean_iterations: float(6)?,
            throughput_mbps: float(7)?,
            mean_time_ms: float(8)?,
            residual_error_rate: float(9)?,
        });
    }
    Ok(rows)
}
