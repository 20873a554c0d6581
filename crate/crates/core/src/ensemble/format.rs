//! Plain-text formats.
//!
//! Matrix: a header line `n p gamma convention seed`, then one `row col value`
//! line per stored entry in row-major order. Reals are written with 17
//! significant digits, which round-trips every `f64`.
//!
//! Vector: one value per line.

use std::io::{BufRead, Write};

use super::matrix::{Convention, Provenance, SparseMeasurementMatrix};
use crate::error::{Error, Result};
use crate::rng::NORMAL_METHOD;

/// Format a real with 17 significant digits.
pub fn format_f64_17(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_matrix<W: Write>(m: &SparseMeasurementMatrix, mut out: W) -> std::io::Result<()> {
    writeln!(
        out,
        "{} {} {} {} {}",
        m.n(),
        m.p(),
        format_f64_17(m.gamma()),
        m.convention(),
        m.provenance().seed
    )?;
    for (i, (cols, vals)) in m.rows().enumerate() {
        for (&c, &v) in cols.iter().zip(vals) {
            writeln!(out, "{} {} {}", i, c, format_f64_17(v))?;
        }
    }
    Ok(())
}

pub fn matrix_to_string(m: &SparseMeasurementMatrix) -> String {
    let mut buf = Vec::new();
    write_matrix(m, &mut buf).expect("writing to memory cannot fail");
    String::from_utf8(buf).expect("matrix text is ASCII")
}

pub fn read_matrix<R: BufRead>(input: R) -> Result<SparseMeasurementMatrix> {
    let mut lines = input.lines().enumerate();
    let header = loop {
        match lines.next() {
            Some((_, line)) => {
                let line = line.map_err(|e| Error::Parse(e.to_string()))?;
                if !line.trim().is_empty() {
                    break line;
                }
            }
            None => return Err(Error::Parse("empty matrix file".into())),
        }
    };
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 5 {
        return Err(Error::Parse(format!(
            "matrix header must be `n p gamma convention seed`, got `{header}`"
        )));
    }
    let n: usize = parse_field(fields[0], "n", 1)?;
    let p: usize = parse_field(fields[1], "p", 1)?;
    let gamma: f64 = parse_field(fields[2], "gamma", 1)?;
    let convention: Convention = fields[3]
        .parse()
        .map_err(|e: Error| Error::Parse(format!("line 1: {e}")))?;
    let seed: u64 = parse_field(fields[4], "seed", 1)?;

    let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    let mut last: Option<(usize, usize)> = None;
    for (idx, line) in lines {
        let line = line.map_err(|e| Error::Parse(e.to_string()))?;
        let lineno = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let parts: Vec<&str> = trimmed.split_whitespace().collect();
        if parts.len() != 3 {
            return Err(Error::Parse(format!(
                "line {lineno}: expected `row col value`, got `{trimmed}`"
            )));
        }
        let r: usize = parse_field(parts[0], "row", lineno)?;
        let c: usize = parse_field(parts[1], "col", lineno)?;
        let v: f64 = parse_field(parts[2], "value", lineno)?;
        if r >= n {
            return Err(Error::Parse(format!(
                "line {lineno}: row {r} out of range for n = {n}"
            )));
        }
        if last.is_some_and(|prev| (r, c) <= prev) {
            return Err(Error::Parse(format!(
                "line {lineno}: entries must be in strictly increasing (row, col) order"
            )));
        }
        last = Some((r, c));
        rows[r].push((c, v));
    }
    SparseMeasurementMatrix::from_rows(
        p,
        gamma,
        convention,
        &rows,
        Provenance {
            seed,
            pattern_seed: seed,
            value_seed: seed,
            normal_method: NORMAL_METHOD.to_string(),
        },
    )
}

pub fn write_vector<W: Write>(v: &[f64], mut out: W) -> std::io::Result<()> {
    for x in v {
        writeln!(out, "{}", format_f64_17(*x))?;
    }
    Ok(())
}

pub fn read_vector<R: BufRead>(input: R) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for (idx, line) in input.lines().enumerate() {
        let line = line.map_err(|e| Error::Parse(e.to_string()))?;
        let t = line.trim();
        if t.is_empty() {
            continue;
        }
        out.push(parse_field(t, "value", idx + 1)?);
    }
    Ok(out)
}

fn parse_field<T: std::str::FromStr>(s: &str, what: &str, line: usize) -> Result<T> {
    s.parse()
        .map_err(|_| Error::Parse(format!("line {line}: cannot parse {what} from `{s}`")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::{sample_matrix, EnsembleSpec};

    #[test]
    fn header_and_entries() {
        let m = SparseMeasurementMatrix::from_dense(
            &[vec![0.5, 0.0], vec![0.0, -2.0]],
            1.0,
            Convention::Standard,
        )
        .unwrap();
        let text = matrix_to_string(&m);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "2 2 1.0000000000000000e0 standard 0");
        assert_eq!(lines[1], "0 0 5.0000000000000000e-1");
        assert_eq!(lines[2], "1 1 -2.0000000000000000e0");
    }

    #[test]
    fn round_trip_is_exact() {
        let spec = EnsembleSpec::new(25, 13, 0.3, Convention::Rescaled).unwrap();
        let m = sample_matrix(&spec, 31).unwrap();
        let back = read_matrix(matrix_to_string(&m).as_bytes()).unwrap();
        assert_eq!(back.values(), m.values());
        assert_eq!(back.to_dense(), m.to_dense());
        assert_eq!(back.gamma(), m.gamma());
        assert_eq!(back.convention(), m.convention());
        assert_eq!(back.provenance().seed, 31);
    }

    #[test]
    fn rejects_malformed() {
        assert!(read_matrix("".as_bytes()).is_err());
        assert!(read_matrix("2 2 0.5 standard".as_bytes()).is_err());
        assert!(read_matrix("2 2 0.5 dense 1".as_bytes()).is_err());
        assert!(read_matrix("2 2 0.5 standard 1\n3 0 1.0".as_bytes()).is_err());
        assert!(read_matrix("2 2 0.5 standard 1\n0 1 1.0\n0 0 1.0".as_bytes()).is_err());
        assert!(read_matrix("2 2 0.5 standard 1\n0 1 x".as_bytes()).is_err());
    }

    #[test]
    fn vector_round_trip() {
        let v = vec![1.0, -0.1, 1e-300, std::f64::consts::PI];
        let mut buf = Vec::new();
        write_vector(&v, &mut buf).unwrap();
        assert_eq!(read_vector(buf.as_slice()).unwrap(), v);
    }
}
