//! CSV ingestion of measured samples and CSV emission of result tables.

use std::io::{Read, Write};

use rbc_core::MeasuredSample;

use crate::error::CliError;

pub const SAMPLE_HEADER: [&str; 2] = ["ps_W", "pbt_W"];

/// Shortest representation that parses back to the same `f64`.
pub fn num(x: f64) -> String {
    x.to_string()
}

/// Reads `ps_W,pbt_W` rows. Errors name the offending line.
pub fn read_samples<R: Read>(input: R) -> Result<Vec<MeasuredSample>, CliError> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let header = reader
        .headers()
        .map_err(|e| CliError::Input(format!("line 1: unreadable header: {e}")))?;
    let fields: Vec<&str> = header.iter().map(str::trim).collect();
    if fields != SAMPLE_HEADER {
        return Err(CliError::Input(format!(
            "line 1: expected header '{}', got '{}'",
            SAMPLE_HEADER.join(","),
            fields.join(",")
        )));
    }

    let mut samples = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            CliError::Input(format!("line {line}: {e}"))
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let row = record.iter().collect::<Vec<_>>().join(",");
        let parse = |s: &str| -> Result<f64, CliError> {
            s.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Input(format!("line {line}: malformed row '{row}'")))
        };
        let ps = parse(&record[0])?;
        let pbt = parse(&record[1])?;
        let sample = MeasuredSample::new(ps, pbt)
            .map_err(|e| CliError::Input(format!("line {line}: {e} in row '{row}'")))?;
        samples.push(sample);
    }
    if samples.is_empty() {
        return Err(CliError::Input("no data rows".into()));
    }
    Ok(samples)
}

/// Writes a header and rows with LF line endings.
pub fn write_table<W: Write>(out: W, header: &[&str], rows: &[Vec<String>]) -> Result<(), CliError> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    let io = |e: csv::Error| match e.into_kind() {
        csv::ErrorKind::Io(e) => CliError::from(e),
        kind => CliError::Input(format!("CSV write failed: {kind:?}")),
    };
    w.write_record(header).map_err(io)?;
    for row in rows {
        w.write_record(row).map_err(io)?;
    }
    w.flush()?;
    Ok(())
}
