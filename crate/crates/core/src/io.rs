//! CSV input for data matrices: one row per line, comma-separated decimals,
//! lines starting with `#` ignored.

use std::io::Read;

use num_rational::BigRational;

use crate::distance::{DataMatrix, DistanceMatrix};
use crate::error::{Error, Result};
use crate::exact::{parse_decimal, RationalMatrix};

fn records<R: Read>(reader: R) -> Result<Vec<(u64, Vec<String>)>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            Error::Parse {
                line,
                col: 0,
                msg: e.to_string(),
            }
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.iter().all(str::is_empty) {
            continue;
        }
        out.push((line, rec.iter().map(str::to_owned).collect()));
    }
    Ok(out)
}

fn parse_grid<R: Read, T>(reader: R, parse: impl Fn(&str) -> Option<T>) -> Result<(usize, usize, Vec<T>)> {
    let recs = records(reader)?;
    let Some((_, first)) = recs.first() else {
        return Err(Error::Parse {
            line: 1,
            col: 0,
            msg: "no data rows".into(),
        });
    };
    let k = first.len();
    let mut data = Vec::with_capacity(recs.len() * k);
    for (line, fields) in &recs {
        if fields.len() != k {
            return Err(Error::Parse {
                line: *line,
                col: fields.len().min(k) + 1,
                msg: format!("expected {k} values, found {}", fields.len()),
            });
        }
        for (c, f) in fields.iter().enumerate() {
            let v = parse(f).ok_or_else(|| Error::Parse {
                line: *line,
                col: c + 1,
                msg: format!("not a finite decimal number: {f:?}"),
            })?;
            data.push(v);
        }
    }
    Ok((recs.len(), k, data))
}

pub fn read_data_matrix<R: Read>(reader: R) -> Result<DataMatrix> {
    let (n, k, data) = parse_grid(reader, |s| s.parse::<f64>().ok().filter(|v| v.is_finite()))?;
    DataMatrix::new(n, k, data)
}

/// Reads the same format with every value kept as an exact rational.
pub fn read_rational_matrix<R: Read>(reader: R) -> Result<RationalMatrix> {
    let (n, k, data) = parse_grid(reader, parse_decimal)?;
    RationalMatrix::new(n, k, data)
}

pub fn parse_data_matrix(text: &str) -> Result<DataMatrix> {
    read_data_matrix(text.as_bytes())
}

pub fn parse_rational_matrix(text: &str) -> Result<RationalMatrix> {
    read_rational_matrix(text.as_bytes())
}

/// `n` lines of `n` comma-separated values, full precision.
pub fn distance_matrix_csv(d: &DistanceMatrix) -> String {
    let mut out = String::new();
    for i in 0..d.order() {
        let row: Vec<String> = d.row(i).iter().map(|v| format!("{v:?}")).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// Converts a rational to the nearest `f64`.
pub fn rational_to_f64(r: &BigRational) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().unwrap_or(f64::NAN)
}
