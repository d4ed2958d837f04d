use std::io::Read;
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::model::TimeSeries;

/// Reads a CSV time series: one time point per line, `d` numeric fields, an
/// optional header line (recognised by a non-numeric first field). Samples
/// are assumed to be one time unit apart.
pub fn load_trajectory_csv(path: impl AsRef<Path>) -> Result<TimeSeries> {
    let file = std::fs::File::open(path)?;
    parse_trajectory_csv(file)
}

pub fn parse_trajectory_csv(reader: impl Read) -> Result<TimeSeries> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut width = None;
    for (idx, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| match e.kind() {
            csv::ErrorKind::Io(_) => Error::Io(std::io::Error::other(e.to_string())),
            _ => Error::Parse { line: e.position().map_or(idx as u64 + 1, |p| p.line()), message: e.to_string() },
        })?;
        let line = record.position().map_or(idx as u64 + 1, |p| p.line());
        if record.iter().all(|f| f.is_empty()) {
            continue;
        }
        if idx == 0 && record.get(0).is_some_and(|f| f.parse::<f64>().is_err()) {
            continue;
        }
        let values = record
            .iter()
            .map(|f| {
                f.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| Error::Parse { line, message: format!("'{f}' is not a finite number") })
            })
            .collect::<Result<Vec<f64>>>()?;
        match width {
            None => width = Some(values.len()),
            Some(w) if w != values.len() => {
                return Err(Error::Parse { line, message: format!("expected {w} fields, found {}", values.len()) });
            }
            Some(_) => {}
        }
        rows.push(values);
    }
    let d = width.ok_or_else(|| Error::Parse { line: 1, message: "no data rows".into() })?;
    let data = DMatrix::from_fn(d, rows.len(), |r, t| rows[t][r]);
    TimeSeries::new(data, 1.0)
}

/// Keeps every `stride`-th time point (starting with the first) and scales τ.
pub fn subsample(series: &TimeSeries, stride: usize) -> Result<TimeSeries> {
    if stride == 0 {
        return Err(Error::invalid("stride must be at least 1"));
    }
    let keep: Vec<usize> = (0..series.len()).step_by(stride).collect();
    let data = DMatrix::from_fn(series.dim(), keep.len(), |r, k| series.data()[(r, keep[k])]);
    TimeSeries::new(data, series.tau() * stride as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_line_file() {
        let s = parse_trajectory_csv("0,0\n1,2\n2,4\n".as_bytes()).unwrap();
        assert_eq!((s.dim(), s.len()), (2, 3));
        assert_eq!(s.data()[(1, 2)], 4.0);
    }

    #[test]
    fn header_and_scientific_notation() {
        let s = parse_trajectory_csv("x, y\n1e-3, -2.5E2\n0.5, 7\n".as_bytes()).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s.data()[(1, 0)], -250.0);
    }

    #[test]
    fn errors_carry_line_numbers() {
        match parse_trajectory_csv("1,2\n3,4\n5\n".as_bytes()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        match parse_trajectory_csv("a,b\n1,2\n3,oops\n".as_bytes()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        assert!(parse_trajectory_csv("".as_bytes()).is_err());
    }

    #[test]
    fn subsample_strides() {
        let s = TimeSeries::new(DMatrix::from_fn(2, 6000, |r, t| (r * t) as f64), 0.1).unwrap();
        assert_eq!(subsample(&s, 1).unwrap(), s);
        let sub = subsample(&s, 10).unwrap();
        assert_eq!(sub.len(), 600);
        assert_eq!(sub.data()[(1, 1)], 10.0);
        assert!((sub.tau() - 1.0).abs() < 1e-15);
        assert!(subsample(&s, 0).is_err());
    }
}
