//! Text formats for matrices and operators.
//!
//! Matrix CSV: one line per row, comma-separated, no header.
//!
//! Operator file:
//!
//! ```text
//! # ptsense operator
//! M=3
//! n1=2
//! n2=2
//! kind=piecewise_toeplitz
//! c0=4
//! seed=7
//! <generator of block 0, comma-separated>
//! <generator of block 1>
//! ```
//!
//! Dense operators list their `M` rows (`vec(A_j)ᵀ`) instead of generators.
//! `c0` and `seed` may be `none`. Floats use Rust's shortest round-trip
//! formatting, so write/read is bit-exact.

use std::fs;
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::operators::{DenseOperator, Operator, OperatorKind, PiecewiseToeplitzOperator};

const OPERATOR_MAGIC: &str = "# ptsense operator";

pub fn format_f64(v: f64) -> String {
    format!("{v}")
}

fn parse_f64(s: &str, line: usize) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|e| Error::parse(line, format!("bad number '{s}': {e}")))
}

fn parse_row(s: &str, line: usize) -> Result<Vec<f64>> {
    s.split(',').map(|t| parse_f64(t, line)).collect()
}

fn join_row<'a>(it: impl Iterator<Item = &'a f64>) -> String {
    it.map(|v| format_f64(*v)).collect::<Vec<_>>().join(",")
}

pub fn matrix_to_csv(x: &DMatrix<f64>) -> String {
    let mut out = String::new();
    for row in x.row_iter() {
        out.push_str(&join_row(row.iter()));
        out.push('\n');
    }
    out
}

pub fn matrix_from_csv(text: &str) -> Result<DMatrix<f64>> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let row = parse_row(line, i + 1)?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(Error::parse(i + 1, "ragged matrix row"));
            }
        }
        rows.push(row);
    }
    let ncols = rows.first().map_or(0, Vec::len);
    let flat: Vec<f64> = rows.iter().flatten().copied().collect();
    Ok(DMatrix::from_row_slice(rows.len(), ncols, &flat))
}

pub fn write_matrix_csv(x: &DMatrix<f64>, path: &Path) -> Result<()> {
    fs::write(path, matrix_to_csv(x)).map_err(|e| Error::io(path, e))
}

pub fn read_matrix_csv(path: &Path) -> Result<DMatrix<f64>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    matrix_from_csv(&text)
}

fn opt_to_string<T: ToString>(v: Option<T>) -> String {
    v.map_or_else(|| "none".to_string(), |v| v.to_string())
}

pub fn operator_to_string(op: &Operator) -> String {
    use crate::operators::SensingOperator;
    let (c0, seed) = match op {
        Operator::Toeplitz(t) => (t.c0(), t.seed()),
        Operator::Dense(d) => (d.c0(), d.seed()),
    };
    let mut out = format!(
        "{OPERATOR_MAGIC}\nM={}\nn1={}\nn2={}\nkind={}\nc0={}\nseed={}\n",
        op.measurements(),
        op.n1(),
        op.n2(),
        op.kind(),
        opt_to_string(c0.map(format_f64)),
        opt_to_string(seed),
    );
    match op {
        Operator::Toeplitz(t) => {
            for b in t.blocks() {
                out.push_str(&join_row(b.generator().iter()));
                out.push('\n');
            }
        }
        Operator::Dense(d) => out.push_str(&matrix_to_csv(d.rows())),
    }
    out
}

pub fn operator_from_str(text: &str) -> Result<Operator> {
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty());
    match lines.next() {
        Some((_, l)) if l.trim() == OPERATOR_MAGIC => {}
        _ => return Err(Error::parse(1, "missing operator header line")),
    }
    let mut header = |key: &str| -> Result<(usize, String)> {
        let (i, l) = lines
            .next()
            .ok_or_else(|| Error::parse(0, format!("missing '{key}' header")))?;
        let (k, v) = l
            .split_once('=')
            .ok_or_else(|| Error::parse(i + 1, "expected key=value"))?;
        if k.trim() != key {
            return Err(Error::parse(
                i + 1,
                format!("expected '{key}', found '{}'", k.trim()),
            ));
        }
        Ok((i + 1, v.trim().to_string()))
    };
    let parse_usize = |(i, v): (usize, String)| -> Result<usize> {
        v.parse()
            .map_err(|_| Error::parse(i, format!("bad integer '{v}'")))
    };
    let m = parse_usize(header("M")?)?;
    let n1 = parse_usize(header("n1")?)?;
    let n2 = parse_usize(header("n2")?)?;
    let (ki, kind) = header("kind")?;
    let kind: OperatorKind = kind
        .parse()
        .map_err(|e: Error| Error::parse(ki, e.to_string()))?;
    let (ci, c0) = header("c0")?;
    let c0 = if c0 == "none" {
        None
    } else {
        Some(parse_f64(&c0, ci)?)
    };
    let (si, seed) = header("seed")?;
    let seed = if seed == "none" {
        None
    } else {
        Some(
            seed.parse::<u64>()
                .map_err(|_| Error::parse(si, "bad seed"))?,
        )
    };
    let body: Vec<Vec<f64>> = lines
        .map(|(i, l)| parse_row(l, i + 1))
        .collect::<Result<_>>()?;

    match kind {
        OperatorKind::PiecewiseToeplitz => {
            if body.len() != n2 {
                return Err(Error::parse(
                    0,
                    format!("expected {n2} generators, found {}", body.len()),
                ));
            }
            let op = PiecewiseToeplitzOperator::from_generators(m, n1, body)?;
            Ok(Operator::Toeplitz(op.with_meta(c0, seed)))
        }
        _ => {
            if body.len() != m {
                return Err(Error::parse(
                    0,
                    format!("expected {m} rows, found {}", body.len()),
                ));
            }
            let flat: Vec<f64> = body.iter().flatten().copied().collect();
            if flat.len() != m * n1 * n2 {
                return Err(Error::parse(0, "dense rows have the wrong length"));
            }
            let rows = DMatrix::from_row_slice(m, n1 * n2, &flat);
            let op = DenseOperator::from_rows(n1, n2, rows)?;
            Ok(Operator::Dense(op.with_meta(kind, c0, seed)))
        }
    }
}

pub fn write_operator(op: &Operator, path: &Path) -> Result<()> {
    fs::write(path, operator_to_string(op)).map_err(|e| Error::io(path, e))
}

pub fn read_operator(path: &Path) -> Result<Operator> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    operator_from_str(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn toeplitz_header_layout() {
        let op: Operator = PiecewiseToeplitzOperator::generate(3, 2, 2, 4.0, 7)
            .unwrap()
            .into();
        let s = operator_to_string(&op);
        let lines: Vec<&str> = s.lines().collect();
        assert_eq!(
            &lines[..7],
            &[
                OPERATOR_MAGIC,
                "M=3",
                "n1=2",
                "n2=2",
                "kind=piecewise_toeplitz",
                "c0=4",
                "seed=7"
            ]
        );
        assert_eq!(lines.len(), 9);
        assert_eq!(operator_from_str(&s).unwrap(), op);
    }

    #[test]
    fn dense_round_trip_keeps_kind() {
        for kind in [
            OperatorKind::Gaussian,
            OperatorKind::Bernoulli,
            OperatorKind::ThreeValued,
        ] {
            let op: Operator = DenseOperator::generate(4, 2, 3, kind, 1).unwrap().into();
            assert_eq!(operator_from_str(&operator_to_string(&op)).unwrap(), op);
        }
        let mat: Operator = PiecewiseToeplitzOperator::generate(4, 2, 3, 2.5, 1)
            .unwrap()
            .materialize()
            .into();
        assert_eq!(operator_from_str(&operator_to_string(&mat)).unwrap(), mat);
    }

    #[test]
    fn rejects_truncated_file() {
        let op: Operator = PiecewiseToeplitzOperator::generate(3, 2, 2, 4.0, 7)
            .unwrap()
            .into();
        let s = operator_to_string(&op);
        let cut: String = s.lines().take(8).collect::<Vec<_>>().join("\n");
        assert!(matches!(operator_from_str(&cut), Err(Error::Parse { .. })));
    }

    proptest! {
        #[test]
        fn matrix_csv_is_bit_exact(vals in proptest::collection::vec(any::<f64>().prop_filter("finite", |v| v.is_finite()), 1..40), ncols in 1usize..5) {
            let nrows = vals.len() / ncols;
            prop_assume!(nrows > 0);
            let x = DMatrix::from_row_slice(nrows, ncols, &vals[..nrows * ncols]);
            let back = matrix_from_csv(&matrix_to_csv(&x)).unwrap();
            prop_assert_eq!(back.shape(), x.shape());
            for (a, b) in back.iter().zip(x.iter()) {
                prop_assert_eq!(a.to_bits(), b.to_bits());
            }
        }

        #[test]
        fn operator_file_is_bit_exact(m in 1usize..6, n1 in 1usize..4, n2 in 1usize..4, seed in any::<u64>()) {
            let op: Operator = PiecewiseToeplitzOperator::generate(m, n1, n2, 4.0, seed).unwrap().into();
            prop_assert_eq!(operator_from_str(&operator_to_string(&op)).unwrap(), op);
        }
    }
}
