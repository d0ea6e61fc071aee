//! Flat-file input and output: single-column data files, distance sample
//! dumps and JSON reports.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::engine::RbReport;
use crate::error::{Error, Result};

/// Parses one number per line. A non-numeric first line is taken as a
/// header; blank lines are skipped; CRLF and LF both work.
pub fn parse_data(text: &str) -> Result<Vec<f64>> {
    let mut values = Vec::new();
    let mut seen_content = false;
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim().trim_start_matches('\u{feff}');
        if line.is_empty() {
            continue;
        }
        let first = !seen_content;
        seen_content = true;
        match line.parse::<f64>() {
            Ok(v) if v.is_finite() => values.push(v),
            _ if first => continue,
            _ => {
                return Err(Error::Parse {
                    line: idx + 1,
                    text: line.to_string(),
                })
            }
        }
    }
    if values.is_empty() {
        return Err(Error::NoData);
    }
    Ok(values)
}

pub fn read_data(path: impl AsRef<Path>) -> Result<Vec<f64>> {
    parse_data(&fs::read_to_string(path)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Which {
    Prior,
    Posterior,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleRow {
    pub which: Which,
    pub distance: f64,
}

/// Writes `which,distance` rows, prior draws first.
pub fn write_samples<W: Write>(writer: W, prior: &[f64], posterior: &[f64]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let rows = prior
        .iter()
        .map(|&d| (Which::Prior, d))
        .chain(posterior.iter().map(|&d| (Which::Posterior, d)));
    for (which, distance) in rows {
        w.serialize(SampleRow { which, distance })?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a samples file back into `(prior, posterior)`.
pub fn read_samples<R: Read>(reader: R) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut prior = Vec::new();
    let mut posterior = Vec::new();
    for row in csv::Reader::from_reader(reader).deserialize::<SampleRow>() {
        let row = row?;
        match row.which {
            Which::Prior => prior.push(row.distance),
            Which::Posterior => posterior.push(row.distance),
        }
    }
    Ok((prior, posterior))
}

pub fn report_to_json(report: &RbReport) -> Result<String> {
    Ok(serde_json::to_string_pretty(report)?)
}

pub fn report_from_json(text: &str) -> Result<RbReport> {
    Ok(serde_json::from_str(text)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_and_line_endings() {
        assert_eq!(
            parse_data("x\r\n1.5\r\n-2\r\n\r\n\r\n").unwrap(),
            vec![1.5, -2.0]
        );
        assert_eq!(parse_data("3\n4\n").unwrap(), vec![3.0, 4.0]);
        assert_eq!(parse_data("\n\nvalue\n1e3\n").unwrap(), vec![1000.0]);
    }

    #[test]
    fn bad_rows_report_line_numbers() {
        match parse_data("value\n1\ntwo\n") {
            Err(Error::Parse { line, text }) => {
                assert_eq!(line, 3);
                assert_eq!(text, "two");
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            parse_data("1\nNaN\n"),
            Err(Error::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn empty_input_is_no_data() {
        assert!(matches!(parse_data(""), Err(Error::NoData)));
        assert!(matches!(parse_data("header\n\n"), Err(Error::NoData)));
    }

    #[test]
    fn samples_round_trip() {
        let prior = vec![0.1, 0.25, 1e-7];
        let posterior = vec![0.002, 0.3];
        let mut buf = Vec::new();
        write_samples(&mut buf, &prior, &posterior).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("which,distance\nprior,0.1\n"));
        let (p, q) = read_samples(buf.as_slice()).unwrap();
        assert_eq!(p, prior);
        assert_eq!(q, posterior);
    }
}
