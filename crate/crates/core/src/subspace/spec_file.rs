//! Plain-text generator files.
//!
//! ```text
//! # comments and blank lines are ignored
//! 2
//! 0.5, 1
//! -0.5i, i
//! ```
//!
//! The first significant line is `N`; each following line is one generator
//! with `N` comma-separated complex literals of the form `a`, `bi` or `a±bi`.

use crate::error::{Error, Result};
use crate::hilbert::{CVec, C64};

/// Parses one complex literal such as `1.5-2e-3i`, `-i` or `4`.
pub fn parse_complex(token: &str) -> Option<C64> {
    let t: String = token.chars().filter(|c| !c.is_whitespace()).collect();
    if t.is_empty() {
        return None;
    }
    let Some(body) = t.strip_suffix('i') else {
        return t.parse::<f64>().ok().map(|re| C64::new(re, 0.0));
    };
    // split at the last sign that is neither leading nor part of an exponent
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(k) => (body[..k].parse::<f64>().ok()?, &body[k..]),
        None => (0.0, body),
    };
    let im = match im {
        "" | "+" => 1.0,
        "-" => -1.0,
        s => s.parse::<f64>().ok()?,
    };
    Some(C64::new(re, im))
}

/// Parses a generator file into `(N, generators)`.
pub fn parse_spec(text: &str) -> Result<(usize, Vec<CVec>)> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());

    let (line_no, first) = lines.next().ok_or(Error::Parse { line: 1, message: "missing dimension line".into() })?;
    let n: usize = first.parse().map_err(|_| Error::Parse {
        line: line_no,
        message: format!("expected a positive integer dimension, found `{first}`"),
    })?;
    if n == 0 {
        return Err(Error::Parse { line: line_no, message: "dimension must be positive".into() });
    }

    let mut gens = Vec::new();
    for (line_no, line) in lines {
        let entries: Vec<&str> = line.split(',').collect();
        if entries.len() != n {
            return Err(Error::Parse {
                line: line_no,
                message: format!("expected {n} entries, found {}", entries.len()),
            });
        }
        let mut v = CVec::zeros(n);
        for (k, e) in entries.iter().enumerate() {
            v[k] = parse_complex(e).ok_or_else(|| Error::Parse {
                line: line_no,
                message: format!("cannot parse complex number `{}`", e.trim()),
            })?;
        }
        gens.push(v);
    }
    Ok((n, gens))
}

/// Writes generators in the format read by [`parse_spec`]. Floats use the
/// shortest round-trip representation.
pub fn format_spec(vectors: &[CVec]) -> String {
    let n = vectors.first().map_or(0, |v| v.len());
    let mut out = format!("{n}\n");
    for v in vectors {
        let row: Vec<String> = v.iter().map(|z| format!("{:?}{:+?}i", z.re, z.im)).collect();
        out.push_str(&row.join(", "));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn literals() {
        let cases = [
            ("1", C64::new(1.0, 0.0)),
            ("-2.5", C64::new(-2.5, 0.0)),
            ("i", C64::new(0.0, 1.0)),
            ("-i", C64::new(0.0, -1.0)),
            ("+i", C64::new(0.0, 1.0)),
            ("0.5i", C64::new(0.0, 0.5)),
            ("1-i", C64::new(1.0, -1.0)),
            ("1 + 2i", C64::new(1.0, 2.0)),
            ("-1e-3+2E+1i", C64::new(-1e-3, 20.0)),
            ("3e2-4e-2i", C64::new(300.0, -0.04)),
        ];
        for (s, z) in cases {
            assert_eq!(parse_complex(s), Some(z), "{s}");
        }
        for bad in ["", "x", "1+", "ii", "1+2j"] {
            assert_eq!(parse_complex(bad), None, "{bad}");
        }
    }

    #[test]
    fn file_round_trip() {
        let text = "# fixture\n2\n\n0.5, 1  # u1\n-0.5i, i\n";
        let (n, gens) = parse_spec(text).unwrap();
        assert_eq!(n, 2);
        assert_eq!(gens[1][0], C64::new(0.0, -0.5));
        let again = parse_spec(&format_spec(&gens)).unwrap();
        assert_eq!(again.1, gens);
    }

    #[test]
    fn errors_carry_lines() {
        match parse_spec("2\n1, 2, 3\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
        match parse_spec("two\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 1),
            other => panic!("{other:?}"),
        }
        match parse_spec("1\nfoo\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
    }
}
