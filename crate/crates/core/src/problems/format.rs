//! Plain-text line files: one line per input line holding two whitespace
//! separated rationals `a b` (each `p/q` or `p`). `#` starts a comment and
//! blank lines are skipped.

use std::fmt::Write;

use super::Line;
use crate::error::Error;
use crate::scalar::Scalar;

pub fn parse_lines(text: &str) -> Result<Vec<Line>, Error> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let fields: Vec<&str> = body.split_whitespace().collect();
        if fields.len() != 2 {
            return Err(Error::Format {
                line: line_no,
                msg: format!("expected 2 fields, found {}", fields.len()),
            });
        }
        let parse = |f: &str| {
            f.parse::<Scalar>().map_err(|e| Error::Format {
                line: line_no,
                msg: e.to_string(),
            })
        };
        out.push(Line::new(parse(fields[0])?, parse(fields[1])?));
    }
    Ok(out)
}

pub fn write_lines(lines: &[Line]) -> String {
    let mut out = String::new();
    for l in lines {
        let _ = writeln!(out, "{} {}", l.a, l.b);
    }
    out
}
