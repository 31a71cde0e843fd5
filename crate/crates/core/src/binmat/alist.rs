//! The alist interchange format for sparse parity-check matrices.
//!
//! Layout, one item per line:
//!
//! ```text
//! n_cols n_rows
//! max_col_degree max_row_degree
//! <n_cols column degrees>
//! <n_rows row degrees>
//! <n_cols lines: 1-based row indices of each column, zero padded>
//! <n_rows lines: 1-based column indices of each row, zero padded>
//! ```

use std::fmt::Write as _;

use super::BinMatrix;
use crate::error::{Error, Result};

fn err(line: usize, message: impl Into<String>) -> Error {
    Error::Alist { line, message: message.into() }
}

/// Non-empty lines with their 1-based line numbers, tokenized.
fn numbered_lines(text: &str) -> Result<Vec<(usize, Vec<usize>)>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        let tokens = line
            .split_whitespace()
            .map(|t| t.parse::<usize>().map_err(|_| err(line_no, format!("not a nonnegative integer: {t:?}"))))
            .collect::<Result<Vec<_>>>()?;
        if !tokens.is_empty() {
            out.push((line_no, tokens));
        }
    }
    Ok(out)
}

pub fn parse_alist(text: &str) -> Result<BinMatrix> {
    let lines = numbered_lines(text)?;
    let mut cursor = lines.iter();
    let last_line = lines.last().map_or(0, |l| l.0);

    let mut next_line = |what: &str| cursor.next().ok_or_else(|| err(last_line + 1, format!("unexpected end of input, expected {what}")));

    let (l, dims) = next_line("dimensions")?;
    let [n_cols, n_rows] = dims[..] else {
        return Err(err(*l, "expected `n_cols n_rows`"));
    };
    let (l, maxes) = next_line("maximum degrees")?;
    let [max_col, max_row] = maxes[..] else {
        return Err(err(*l, "expected `max_col_degree max_row_degree`"));
    };

    // Degree lists may wrap across lines; read them as a token stream.
    let mut read_degrees = |count: usize, what: &str| -> Result<(usize, Vec<usize>)> {
        let mut out = Vec::with_capacity(count);
        let mut line = 0;
        while out.len() < count {
            let (l, toks) = next_line(what)?;
            line = *l;
            out.extend_from_slice(toks);
        }
        if out.len() != count {
            return Err(err(line, format!("expected {count} {what}, found {}", out.len())));
        }
        Ok((line, out))
    };
    let (l_cd, col_deg) = read_degrees(n_cols, "column degrees")?;
    let (l_rd, row_deg) = read_degrees(n_rows, "row degrees")?;
    if col_deg.iter().copied().max().unwrap_or(0) != max_col {
        return Err(err(l_cd, "column degrees disagree with declared maximum"));
    }
    if row_deg.iter().copied().max().unwrap_or(0) != max_row {
        return Err(err(l_rd, "row degrees disagree with declared maximum"));
    }

    let mut cols: Vec<Vec<usize>> = Vec::with_capacity(n_cols);
    for (j, &deg) in col_deg.iter().enumerate() {
        let (l, toks) = next_line("column index list")?;
        let entries: Vec<usize> = toks.iter().copied().filter(|&t| t != 0).collect();
        if entries.len() != deg {
            return Err(err(*l, format!("column {} lists {} rows, degree says {deg}", j + 1, entries.len())));
        }
        if let Some(&bad) = entries.iter().find(|&&r| r > n_rows) {
            return Err(err(*l, format!("row index {bad} exceeds n_rows = {n_rows}")));
        }
        cols.push(entries.into_iter().map(|r| r - 1).collect());
    }

    let mut rows: Vec<Vec<usize>> = Vec::with_capacity(n_rows);
    for (i, &deg) in row_deg.iter().enumerate() {
        let (l, toks) = next_line("row index list")?;
        let entries: Vec<usize> = toks.iter().copied().filter(|&t| t != 0).collect();
        if entries.len() != deg {
            return Err(err(*l, format!("row {} lists {} columns, degree says {deg}", i + 1, entries.len())));
        }
        if let Some(&bad) = entries.iter().find(|&&c| c > n_cols) {
            return Err(err(*l, format!("column index {bad} exceeds n_cols = {n_cols}")));
        }
        let mut row: Vec<usize> = entries.into_iter().map(|c| c - 1).collect();
        row.sort_unstable();
        if row.windows(2).any(|w| w[0] == w[1]) {
            return Err(err(*l, format!("row {} repeats a column", i + 1)));
        }
        rows.push(row);
    }
    if let Some((l, _)) = cursor.next() {
        return Err(err(*l, "trailing data after row lists"));
    }

    let h = BinMatrix::new(n_cols, rows)?;
    let mut derived = h.columns();
    for (j, (listed, derived)) in cols.iter_mut().zip(derived.iter_mut()).enumerate() {
        listed.sort_unstable();
        if listed != derived {
            return Err(err(l_rd + 1 + j, format!("column {} disagrees with the row lists", j + 1)));
        }
    }
    Ok(h)
}

fn write_padded(out: &mut String, items: &[usize], width: usize) {
    let mut first = true;
    for k in 0..width.max(1) {
        let v = items.get(k).map_or(0, |&x| x + 1);
        if !first {
            out.push(' ');
        }
        first = false;
        write!(out, "{v}").unwrap();
    }
    out.push('\n');
}

fn write_list(out: &mut String, items: &[usize]) {
    let line = items.iter().map(usize::to_string).collect::<Vec<_>>().join(" ");
    out.push_str(&line);
    out.push('\n');
}

/// Canonical alist text for `h`.
pub fn emit_alist(h: &BinMatrix) -> String {
    let cols = h.columns();
    let col_deg: Vec<usize> = cols.iter().map(Vec::len).collect();
    let row_deg = h.row_weights();
    let max_col = col_deg.iter().copied().max().unwrap_or(0);
    let max_row = row_deg.iter().copied().max().unwrap_or(0);

    let mut out = String::new();
    writeln!(out, "{} {}", h.n_cols(), h.n_rows()).unwrap();
    writeln!(out, "{max_col} {max_row}").unwrap();
    write_list(&mut out, &col_deg);
    write_list(&mut out, &row_deg);
    for col in &cols {
        write_padded(&mut out, col, max_col);
    }
    for row in h.rows() {
        write_padded(&mut out, row, max_row);
    }
    out
}
