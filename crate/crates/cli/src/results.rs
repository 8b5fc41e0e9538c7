//! Result CSV files.

use std::io::Write;
use std::path::Path;

use serde::Deserialize;
use sfc_core::sim::SimRow;

use crate::error::CliError;

pub const COLUMNS: [&str; 7] = [
    "snr_db",
    "trials",
    "symbol_errors",
    "ser",
    "decoder",
    "code_id",
    "seed",
];

/// Writes rows with the fixed column set.
pub fn write_rows<W: Write>(out: W, rows: &[SimRow]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn rows_to_string(rows: &[SimRow]) -> String {
    let mut buf = Vec::new();
    write_rows(&mut buf, rows).expect("writing to memory");
    String::from_utf8(buf).expect("CSV output is UTF-8")
}

#[derive(Deserialize)]
struct RawRow {
    snr_db: f64,
    trials: usize,
    symbol_errors: u64,
    ser: Option<f64>,
    decoder: String,
    code_id: String,
    seed: u64,
}

/// Parsed rows plus one warning per skipped row.
#[derive(Debug, Default)]
pub struct ReadRows {
    pub rows: Vec<SimRow>,
    pub warnings: Vec<String>,
}

/// Reads a result CSV. The header must match [`COLUMNS`] exactly; rows with
/// an empty `ser` are skipped with a warning.
pub fn read_rows(path: &Path) -> Result<ReadRows, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_rows(path, &text)
}

pub fn parse_rows(path: &Path, text: &str) -> Result<ReadRows, CliError> {
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let header = rdr
        .headers()
        .map_err(|e| CliError::csv(path, e.to_string()))?
        .clone();
    if header.iter().ne(COLUMNS) {
        return Err(CliError::csv(
            path,
            format!(
                "header {:?} does not match {:?}",
                header.iter().collect::<Vec<_>>(),
                COLUMNS
            ),
        ));
    }
    let mut out = ReadRows::default();
    for (i, rec) in rdr.deserialize::<RawRow>().enumerate() {
        // header is line 1
        let line = i + 2;
        let raw = rec.map_err(|e| CliError::csv(path, format!("line {line}: {e}")))?;
        let Some(ser) = raw.ser else {
            out.warnings.push(format!(
                "{}: line {line}: empty ser, row skipped",
                path.display()
            ));
            continue;
        };
        out.rows.push(SimRow {
            snr_db: raw.snr_db,
            trials: raw.trials,
            symbol_errors: raw.symbol_errors,
            ser,
            decoder: raw.decoder,
            code_id: raw.code_id,
            seed: raw.seed,
            wall_time: 0.0,
        });
    }
    Ok(out)
}
