//! File loading and diff-stable JSON output.

use std::fs;
use std::io::{self, Write};
use std::path::Path;

use anyhow::{anyhow, Context, Result};
use bns_swap_core::market::{self, PriceRow, ReturnSeries};
use chrono::NaiveDate;
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::Failure;

/// Pretty-printing formatter that writes every float with 17 significant digits.
struct Digits17<'a>(PrettyFormatter<'a>);

macro_rules! forward {
    ($($name:ident($($arg:ident: $ty:ty),*)),* $(,)?) => {
        $(fn $name<W: ?Sized + Write>(&mut self, w: &mut W $(, $arg: $ty)*) -> io::Result<()> {
            self.0.$name(w $(, $arg)*)
        })*
    };
}

impl Formatter for Digits17<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write!(w, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, f64::from(value))
    }

    forward!(
        begin_array(),
        end_array(),
        begin_array_value(first: bool),
        end_array_value(),
        begin_object(),
        end_object(),
        begin_object_key(first: bool),
        begin_object_value(),
        end_object_value(),
    );
}

/// JSON text with 17-digit floats and a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(
        &mut buf,
        Digits17(PrettyFormatter::with_indent(b"  ")),
    );
    value.serialize(&mut ser)?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf)?)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    fs::write(path, to_json(value)?).with_context(|| format!("cannot write {}", path.display()))
}

fn read_text(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path)
        .map_err(|e| Failure::Input(anyhow!("cannot read {}: {e}", path.display())))
}

/// Reads and parses a JSON file; any failure is an input error.
pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = read_text(path)?;
    serde_json::from_str(&text).map_err(|e| Failure::Input(anyhow!("{}: {e}", path.display())))
}

fn parse_price(cell: &str, line: usize, column: &str) -> Result<Option<f64>, String> {
    let cell = cell.trim();
    if cell.is_empty() || cell.eq_ignore_ascii_case("na") {
        return Ok(None);
    }
    cell.parse::<f64>()
        .map(Some)
        .map_err(|_| format!("line {line}: {column} value {cell:?} is not a number"))
}

/// Loads `date,asset1,asset2,asset3` closing prices. Rows with a missing
/// price are dropped; the remaining rows are sorted by date.
pub fn load_prices(path: &Path) -> Result<[ReturnSeries; 3], Failure> {
    let text = read_text(path)?;
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let bad = |e: String| Failure::Input(anyhow!("{}: {e}", path.display()));
    let header = reader.headers().map_err(|e| bad(e.to_string()))?.clone();
    if header.len() != 4 || !header[0].eq_ignore_ascii_case("date") {
        return Err(bad(format!(
            "expected header date,asset1,asset2,asset3, got {:?}",
            header.iter().collect::<Vec<_>>()
        )));
    }
    let names = [
        header[1].to_string(),
        header[2].to_string(),
        header[3].to_string(),
    ];
    let mut rows: Vec<PriceRow> = Vec::new();
    for (k, record) in reader.records().enumerate() {
        let line = k + 2;
        let record = record.map_err(|e| bad(e.to_string()))?;
        if record.len() != 4 {
            return Err(bad(format!(
                "line {line}: expected 4 fields, got {}",
                record.len()
            )));
        }
        let date = NaiveDate::parse_from_str(&record[0], "%Y-%m-%d")
            .map_err(|e| bad(format!("line {line}: date {:?}: {e}", &record[0])))?;
        let mut prices = [None; 3];
        for a in 0..3 {
            prices[a] = parse_price(&record[a + 1], line, &names[a]).map_err(bad)?;
        }
        rows.push((date.format("%Y-%m-%d").to_string(), prices));
    }
    market::series_from_rows([&names[0], &names[1], &names[2]], rows)
        .map_err(|e| Failure::Input(anyhow!("{}: {e}", path.display())))
}
