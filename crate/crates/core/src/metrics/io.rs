//! CSV readers for evaluation inputs.

use std::io::{Read, Write};

use super::{EvalRecord, MetricError, MiaResponse};

fn csv_error(e: csv::Error) -> MetricError {
    let line = e.position().map_or(0, |p| p.line());
    let message = match e.kind() {
        csv::ErrorKind::Deserialize { err, .. } => err.to_string(),
        _ => e.to_string(),
    };
    MetricError::Csv { line, message }
}

fn read_all<T: serde::de::DeserializeOwned, R: Read>(reader: R) -> Result<Vec<T>, MetricError> {
    csv::ReaderBuilder::new()
        .trim(csv::Trim::Headers)
        .from_reader(reader)
        .deserialize()
        .collect::<Result<_, _>>()
        .map_err(csv_error)
}

/// Header `participant_id,day,message_id,interpretation,reference`.
pub fn read_eval_records<R: Read>(reader: R) -> Result<Vec<EvalRecord>, MetricError> {
    read_all(reader)
}

/// Header `item_id,association,certainty,suitability`.
pub fn read_mia_responses<R: Read>(reader: R) -> Result<Vec<MiaResponse>, MetricError> {
    read_all(reader)
}

pub fn write_mia_responses<W: Write>(writer: W, responses: &[MiaResponse]) -> Result<(), MetricError> {
    let mut w = csv::Writer::from_writer(writer);
    for r in responses {
        w.serialize(r).map_err(csv_error)?;
    }
    w.flush().map_err(|e| MetricError::Csv {
        line: 0,
        message: e.to_string(),
    })
}

/// Numeric values of the named column.
pub fn read_column<R: Read>(reader: R, column: &str) -> Result<Vec<f64>, MetricError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers().map_err(csv_error)?.clone();
    let idx = headers
        .iter()
        .position(|h| h == column)
        .ok_or_else(|| MetricError::Csv {
            line: 1,
            message: format!("no column `{column}`"),
        })?;
    let mut out = Vec::new();
    for row in rdr.records() {
        let row = row.map_err(csv_error)?;
        let line = row.position().map_or(0, |p| p.line());
        let cell = row.get(idx).unwrap_or("");
        out.push(cell.parse().map_err(|_| MetricError::Csv {
            line,
            message: format!("`{cell}` in column `{column}` is not a number"),
        })?);
    }
    Ok(out)
}
