use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use domino_core::{Error, Result};

use crate::Format;

/// Writes either the CSV rendering or the JSON value to `out` (stdout when absent).
pub fn emit<F>(out: Option<&Path>, format: Format, csv: F, json: impl FnOnce() -> serde_json::Value) -> Result<()>
where
    F: FnOnce(&mut dyn Write) -> Result<()>,
{
    let mut sink: Box<dyn Write> = match out {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(io::stdout().lock()),
    };
    match format {
        Format::Csv => csv(&mut sink)?,
        Format::Json => {
            serde_json::to_writer_pretty(&mut sink, &json()).map_err(|e| Error::Io(io::Error::other(e)))?;
            writeln!(sink)?;
        }
    }
    sink.flush()?;
    Ok(())
}

/// Writes a header and rows of preformatted cells as CSV.
pub fn write_rows(w: &mut dyn Write, header: &[String], rows: &[Vec<String>]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let io = |e: csv::Error| Error::Io(io::Error::other(e));
    out.write_record(header).map_err(io)?;
    for r in rows {
        out.write_record(r).map_err(io)?;
    }
    out.flush()?;
    Ok(())
}
