use std::io::Write;

use clap::ValueEnum;
use num_bigint::BigUint;
use num_traits::ToPrimitive;
use serde_json::Value;

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// Largest integer every JSON reader represents exactly.
const JSON_SAFE_INT: u64 = (1 << 53) - 1;

/// Integers up to 2^53 - 1 become JSON numbers; larger ones decimal strings.
pub fn int_json(x: &BigUint) -> Value {
    match x.to_u64() {
        Some(v) if v <= JSON_SAFE_INT => Value::from(v),
        _ => Value::from(x.to_string()),
    }
}

pub fn write_json(out: &mut dyn Write, v: &Value) -> std::io::Result<()> {
    writeln!(out, "{v}")
}

/// Writes `header` and `rows` as RFC 4180 CSV.
pub fn write_csv<R, S>(out: &mut dyn Write, header: &[&str], rows: R) -> std::io::Result<()>
where
    R: IntoIterator<Item = Vec<S>>,
    S: AsRef<str>,
{
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header)?;
    for row in rows {
        w.write_record(row.iter().map(AsRef::as_ref))?;
    }
    w.flush()
}

/// Element rendering for CSV cells: an integer code or `1;2;3` coordinates.
pub fn cell(v: &Value) -> String {
    match v {
        Value::Array(xs) => xs.iter().map(cell).collect::<Vec<_>>().join(";"),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// Shortest round-trip formatting, empty for `None`.
pub fn float_cell(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}
