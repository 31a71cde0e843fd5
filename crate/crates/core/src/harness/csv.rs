//! Result rows: one line per SNR point, floats in shortest round-trip form.

use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use super::{BerPoint, Experiment};
use crate::error::{Error, Result};

pub const CSV_HEADER: &str = "scheme,construction,L,R1,R2,h1,h2,snr_db,blocks,errs1,errs2,ber1,ber2,ber_avg,avg_outer_iters,seed";

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub scheme: String,
    pub construction: String,
    pub l: usize,
    pub r1: f64,
    pub r2: f64,
    pub h1: f64,
    pub h2: f64,
    pub snr_db: f64,
    pub blocks: usize,
    pub errs1: usize,
    pub errs2: usize,
    pub ber1: f64,
    pub ber2: f64,
    pub ber_avg: f64,
    pub avg_outer_iters: f64,
    pub seed: u64,
}

fn format_row(exp: &Experiment, p: &BerPoint) -> String {
    let r2 = if exp.info_bits().1 == 0 { 0.0 } else { exp.pair.r2() };
    format!(
        "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
        exp.scheme.tag(),
        exp.construction,
        exp.pair.len(),
        exp.pair.r1(),
        r2,
        exp.h1,
        exp.h2,
        p.snr_db,
        p.blocks,
        p.errs1,
        p.errs2,
        p.ber1,
        p.ber2,
        p.ber_avg,
        p.avg_outer_iters,
        exp.master_seed
    )
}

/// Append-mode writer that adds the header only to a new or empty file.
#[derive(Debug)]
pub struct CsvSink {
    file: File,
    path: PathBuf,
}

impl CsvSink {
    pub fn open(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref().to_path_buf();
        let mut file = OpenOptions::new().create(true).append(true).open(&path).map_err(|e| Error::io(&path, e))?;
        let empty = file.metadata().map_err(|e| Error::io(&path, e))?.len() == 0;
        if empty {
            writeln!(file, "{CSV_HEADER}").and_then(|_| file.flush()).map_err(|e| Error::io(&path, e))?;
        }
        Ok(CsvSink { file, path })
    }

    pub fn append(&mut self, exp: &Experiment, point: &BerPoint) -> Result<()> {
        writeln!(self.file, "{}", format_row(exp, point)).and_then(|_| self.file.flush()).map_err(|e| Error::io(&self.path, e))
    }
}

/// Writes a fresh file with the header and one row per point.
pub fn write_results(exp: &Experiment, points: &[BerPoint], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    if path.exists() {
        std::fs::remove_file(path).map_err(|e| Error::io(path, e))?;
    }
    let mut sink = CsvSink::open(path)?;
    for p in points {
        sink.append(exp, p)?;
    }
    Ok(())
}

fn field<T: std::str::FromStr>(parts: &[&str], i: usize, line: usize) -> Result<T> {
    parts[i].parse().map_err(|_| Error::Config { line, message: format!("column {} has unparsable value {:?}", i + 1, parts[i]) })
}

/// Parses a results file; the header must match [`CSV_HEADER`].
pub fn parse_results(text: &str) -> Result<Vec<ResultRow>> {
    let mut rows = Vec::new();
    let reader = BufReader::new(text.as_bytes());
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::Config { line: i + 1, message: e.to_string() })?;
        if i == 0 {
            if line != CSV_HEADER {
                return Err(Error::Config { line: 1, message: format!("unexpected header {line:?}") });
            }
            continue;
        }
        if line.is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split(',').collect();
        if parts.len() != 16 {
            return Err(Error::Config { line: i + 1, message: format!("expected 16 columns, found {}", parts.len()) });
        }
        let n = i + 1;
        rows.push(ResultRow {
            scheme: parts[0].to_string(),
            construction: parts[1].to_string(),
            l: field(&parts, 2, n)?,
            r1: field(&parts, 3, n)?,
            r2: field(&parts, 4, n)?,
            h1: field(&parts, 5, n)?,
            h2: field(&parts, 6, n)?,
            snr_db: field(&parts, 7, n)?,
            blocks: field(&parts, 8, n)?,
            errs1: field(&parts, 9, n)?,
            errs2: field(&parts, 10, n)?,
            ber1: field(&parts, 11, n)?,
            ber2: field(&parts, 12, n)?,
            ber_avg: field(&parts, 13, n)?,
            avg_outer_iters: field(&parts, 14, n)?,
            seed: field(&parts, 15, n)?,
        });
    }
    Ok(rows)
}
