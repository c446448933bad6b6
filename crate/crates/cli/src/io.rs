//! Text formats for observation matrices and spectra.
//!
//! Matrix file: a header line `N M`, then `N` lines of `M` whitespace
//! separated complex entries written as `re+imj` (`1.5-0.25j`, `-2e-3+1j`;
//! a bare real number is accepted on input).
//!
//! Spectrum file: the number of sources `L`, then `L` lines
//! `re, im, fx, fy`. Lines starting with `#` are comments and carry
//! diagnostics in estimate output.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use danm::linalg::C64;
use danm::{ComplexMatrix, FrequencyPair, Source, SourceSpectrum};

use crate::error::{CliError, CliResult};

/// Formats `z` as `re+imj` with round-trip precision.
pub fn format_complex(z: C64) -> String {
    let sign = if z.im.is_sign_negative() { '-' } else { '+' };
    format!("{}{}{}j", z.re, sign, z.im.abs())
}

/// Parses `re+imj`, `re-imj`, `imj` or `re`.
pub fn parse_complex(token: &str) -> Result<C64, String> {
    let bad = || format!("cannot parse complex number '{token}'");
    let Some(body) = token.strip_suffix('j').or_else(|| token.strip_suffix('i')) else {
        return token.parse::<f64>().map(|re| C64::new(re, 0.0)).map_err(|_| bad());
    };
    // the sign separating the parts is the last one not following an exponent marker
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    match split {
        Some(k) => {
            let re = body[..k].parse::<f64>().map_err(|_| bad())?;
            let im_text = &body[k..];
            let im = if im_text == "+" || im_text == "-" { format!("{im_text}1") } else { im_text.to_string() };
            Ok(C64::new(re, im.parse::<f64>().map_err(|_| bad())?))
        }
        None => {
            let im = if body.is_empty() || body == "+" || body == "-" { format!("{body}1") } else { body.to_string() };
            Ok(C64::new(0.0, im.parse::<f64>().map_err(|_| bad())?))
        }
    }
}

fn parse_error(path: &Path, line: usize, column: usize, message: impl Into<String>) -> CliError {
    CliError::Parse { path: path.to_path_buf(), line, column, message: message.into() }
}

/// Meaningful lines with their 1-based numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(k, l)| (k + 1, l.trim_end()))
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
}

/// Tokens of a line with their 1-based columns.
fn tokens(line: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (k, ch) in line.char_indices() {
        match (ch.is_whitespace(), start) {
            (false, None) => start = Some(k),
            (true, Some(s)) => {
                out.push((s + 1, &line[s..k]));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push((s + 1, &line[s..]));
    }
    out
}

/// Parses a matrix file's contents; `path` is used in diagnostics.
pub fn parse_matrix(text: &str, path: &Path) -> CliResult<ComplexMatrix> {
    let mut lines = content_lines(text);
    let Some((hl, header)) = lines.next() else {
        return Err(parse_error(path, 1, 1, "empty file, expected header 'N M'"));
    };
    let head = tokens(header);
    if head.len() != 2 {
        return Err(parse_error(path, hl, 1, "header must be 'N M'"));
    }
    let dim = |(col, t): (usize, &str)| {
        t.parse::<usize>()
            .ok()
            .filter(|&v| v > 0)
            .ok_or_else(|| parse_error(path, hl, col, format!("'{t}' is not a positive integer")))
    };
    let (n, m) = (dim(head[0])?, dim(head[1])?);
    let mut rows = Vec::with_capacity(n);
    for (ln, line) in lines {
        if rows.len() == n {
            return Err(parse_error(path, ln, 1, format!("more than {n} rows")));
        }
        let toks = tokens(line);
        if toks.len() != m {
            return Err(parse_error(path, ln, 1, format!("expected {m} entries, found {}", toks.len())));
        }
        let row = toks
            .into_iter()
            .map(|(col, t)| parse_complex(t).map_err(|msg| parse_error(path, ln, col, msg)))
            .collect::<CliResult<Vec<C64>>>()?;
        rows.push(row);
    }
    if rows.len() != n {
        return Err(parse_error(path, text.lines().count().max(1), 1, format!("expected {n} rows, found {}", rows.len())));
    }
    Ok(ComplexMatrix::from_rows(&rows)?)
}

pub fn read_matrix(path: &Path) -> CliResult<ComplexMatrix> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_matrix(&text, path)
}

pub fn format_matrix(x: &ComplexMatrix) -> String {
    let mut out = format!("{} {}\n", x.rows(), x.cols());
    for i in 0..x.rows() {
        let row: Vec<String> = (0..x.cols()).map(|j| format_complex(x[(i, j)])).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

pub fn write_matrix(path: &Path, x: &ComplexMatrix) -> CliResult<()> {
    fs::write(path, format_matrix(x)).map_err(|e| CliError::io(path, e))
}

/// Spectrum text with optional `# key: value` comment lines on top.
pub fn format_spectrum(spec: &SourceSpectrum, comments: &[(String, String)]) -> String {
    let mut out = String::new();
    for (k, v) in comments {
        let _ = writeln!(out, "# {k}: {v}");
    }
    let _ = writeln!(out, "{}", spec.len());
    for s in &spec.sources {
        let _ = writeln!(out, "{}, {}, {}, {}", s.amplitude.re, s.amplitude.im, s.freq.fx, s.freq.fy);
    }
    out
}

pub fn parse_spectrum(text: &str, path: &Path) -> CliResult<SourceSpectrum> {
    let mut lines = content_lines(text);
    let Some((hl, header)) = lines.next() else {
        return Err(parse_error(path, 1, 1, "empty file, expected the number of sources"));
    };
    let l: usize = header.trim().parse().map_err(|_| parse_error(path, hl, 1, "expected the number of sources"))?;
    let mut sources = Vec::with_capacity(l);
    for (ln, line) in lines {
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 4 {
            return Err(parse_error(path, ln, 1, "expected 're, im, fx, fy'"));
        }
        let mut v = [0.0; 4];
        let mut col = 1;
        for (k, f) in fields.iter().enumerate() {
            v[k] = f.parse().map_err(|_| parse_error(path, ln, col, format!("'{f}' is not a number")))?;
            col += f.len() + 2;
        }
        let freq = FrequencyPair::new(v[2], v[3]).map_err(|e| parse_error(path, ln, 1, e.to_string()))?;
        sources.push(Source { amplitude: C64::new(v[0], v[1]), freq });
    }
    if sources.len() != l {
        return Err(parse_error(path, hl, 1, format!("header announces {l} sources, found {}", sources.len())));
    }
    Ok(SourceSpectrum::new(sources))
}

pub fn read_spectrum(path: &Path) -> CliResult<SourceSpectrum> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_spectrum(&text, path)
}
