//! Plain-text tensor format.
//!
//! ```text
//! tns3 <n1> <n2> <m>
//! <values in storage order, whitespace separated>
//! ```
//!
//! The writer emits one trajectory per line using Rust's shortest
//! round-trip float formatting, so `read(write(t)) == t` bit for bit.

use std::fmt::Write as _;
use std::io::{BufRead, BufReader, Read};

use crate::error::{Error, Result};
use crate::tensor::Tensor3;

const MAGIC: &str = "tns3";

pub fn to_string(t: &Tensor3) -> String {
    let (n1, n2, m) = t.shape();
    let mut out = String::with_capacity(16 * n1 * n2 * m + 32);
    writeln!(out, "{MAGIC} {n1} {n2} {m}").unwrap();
    for line in t.as_slice().chunks_exact(m) {
        for (i, x) in line.iter().enumerate() {
            if i > 0 {
                out.push(' ');
            }
            // `{:?}` keeps a trailing `.0` and round-trips exactly
            write!(out, "{x:?}").unwrap();
        }
        out.push('\n');
    }
    out
}

pub fn read<R: Read>(reader: R) -> Result<Tensor3> {
    let mut lines = BufReader::new(reader).lines();
    let header = match lines.next() {
        Some(line) => line?,
        None => return Err(Error::Parse { line: 1, msg: "empty file".into() }),
    };
    let (n1, n2, m) = parse_header(&header)?;
    let expected = n1
        .checked_mul(n2)
        .and_then(|x| x.checked_mul(m))
        .ok_or_else(|| Error::Parse { line: 1, msg: "tensor dimensions overflow".into() })?;

    let mut data = Vec::with_capacity(expected);
    let mut last_line = 1;
    for (i, line) in lines.enumerate() {
        let line_no = i + 2;
        let line = line?;
        for token in line.split_whitespace() {
            let value: f64 = token.parse().map_err(|_| Error::Parse {
                line: line_no,
                msg: format!("invalid number {token:?}"),
            })?;
            if !value.is_finite() {
                return Err(Error::Parse {
                    line: line_no,
                    msg: format!("non-finite value {token:?}"),
                });
            }
            if data.len() == expected {
                return Err(Error::Parse {
                    line: line_no,
                    msg: format!("more than the {expected} values declared in the header"),
                });
            }
            data.push(value);
        }
        last_line = line_no;
    }
    if data.len() != expected {
        return Err(Error::Parse {
            line: last_line,
            msg: format!("expected {expected} values, found {}", data.len()),
        });
    }
    Tensor3::new(n1, n2, m, data).map_err(|e| Error::Parse { line: 1, msg: e.to_string() })
}

pub fn from_str(text: &str) -> Result<Tensor3> {
    read(text.as_bytes())
}

fn parse_header(header: &str) -> Result<(usize, usize, usize)> {
    let bad = |msg: &str| Error::Parse { line: 1, msg: msg.to_string() };
    let mut parts = header.split_whitespace();
    if parts.next() != Some(MAGIC) {
        return Err(bad("header must start with `tns3`"));
    }
    let mut dim = || -> Result<usize> {
        let tok = parts.next().ok_or_else(|| bad("header needs three dimensions"))?;
        let v: usize = tok.parse().map_err(|_| bad(&format!("invalid dimension {tok:?}")))?;
        if v == 0 {
            return Err(bad("dimensions must be positive"));
        }
        Ok(v)
    };
    let dims = (dim()?, dim()?, dim()?);
    if parts.next().is_some() {
        return Err(bad("trailing tokens after dimensions"));
    }
    Ok(dims)
}
