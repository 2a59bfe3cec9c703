//! Plain-text matrix files: a line holding the dimension `d`, then `d` lines
//! of `d` whitespace-separated decimals. Blank lines and lines starting with
//! `#` are skipped.

use std::path::Path;

use covlab::matcore::{Matrix, SymMatrix};

use crate::error::{CliError, CliResult};

fn parse_error(path: &Path, line: usize, column: usize, message: impl Into<String>) -> CliError {
    CliError::Parse {
        path: path.to_path_buf(),
        line,
        column,
        message: message.into(),
    }
}

/// Whitespace-separated tokens with their 1-based starting columns.
fn tokens(line: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (idx, ch) in line.char_indices() {
        match (ch.is_whitespace(), start) {
            (false, None) => start = Some(idx),
            (true, Some(s)) => {
                out.push((s, &line[s..idx]));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push((s, &line[s..]));
    }
    out.into_iter()
        .map(|(byte, tok)| (line[..byte].chars().count() + 1, tok))
        .collect()
}

pub fn parse_matrix(path: &Path, text: &str) -> CliResult<SymMatrix> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l))
        .filter(|(_, l)| {
            let t = l.trim();
            !t.is_empty() && !t.starts_with('#')
        });

    let (dim_line, header) = lines
        .next()
        .ok_or_else(|| parse_error(path, 1, 1, "empty file, expected the dimension"))?;
    let header_tokens = tokens(header);
    let (col, tok) = header_tokens[0];
    let d: usize = tok.parse().map_err(|_| {
        parse_error(
            path,
            dim_line,
            col,
            format!("expected a dimension, found '{tok}'"),
        )
    })?;
    if d == 0 {
        return Err(parse_error(
            path,
            dim_line,
            col,
            "dimension must be positive",
        ));
    }
    if let Some(&(col, tok)) = header_tokens.get(1) {
        return Err(parse_error(
            path,
            dim_line,
            col,
            format!("unexpected token '{tok}' after dimension"),
        ));
    }

    let mut data = Vec::with_capacity(d * d);
    let mut last_line = dim_line;
    for row in 0..d {
        let (line_no, line) = lines.next().ok_or_else(|| {
            parse_error(
                path,
                last_line + 1,
                1,
                format!("expected {d} rows, found {row}"),
            )
        })?;
        last_line = line_no;
        let toks = tokens(line);
        for (k, &(col, tok)) in toks.iter().enumerate() {
            if k >= d {
                return Err(parse_error(
                    path,
                    line_no,
                    col,
                    format!("row has more than {d} entries"),
                ));
            }
            let v: f64 = tok
                .parse()
                .map_err(|_| parse_error(path, line_no, col, format!("not a number: '{tok}'")))?;
            if !v.is_finite() {
                return Err(parse_error(
                    path,
                    line_no,
                    col,
                    format!("non-finite entry '{tok}'"),
                ));
            }
            data.push(v);
        }
        if toks.len() < d {
            let col = line.chars().count() + 1;
            return Err(parse_error(
                path,
                line_no,
                col,
                format!("row has {} entries, expected {d}", toks.len()),
            ));
        }
    }
    if let Some((line_no, _)) = lines.next() {
        return Err(parse_error(
            path,
            line_no,
            1,
            format!("trailing content after {d} rows"),
        ));
    }
    let m = Matrix::from_row_slice(d, d, &data).map_err(CliError::Core)?;
    Ok(SymMatrix::try_from_matrix(m)?)
}

pub fn read_matrix(path: &Path) -> CliResult<SymMatrix> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_matrix(path, &text)
}
