//! File formats used by the command-line pipeline.
//!
//! - Points: CSV with header `row,col`, one point per line, shortest
//!   round-trip decimal encoding, LF line endings.
//! - Maps: plain-ASCII PGM (`P2`) with maxval 65535; a stored value `v`
//!   decodes to `v / 65535`.
//! - Traces: CSV with header `iter,total,term1,term2,reg,mass`.
//! - Sweeps: CSV with header `r,fscore`; undefined scores print as `nan`.
//! - Counts: CSV with header `c_true,c_est`, one image per line.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::geometry::{GridSpec, Point, PointSet};
use crate::loss::ProbMap;
use crate::metrics::{CountSeries, SweepEntry};
use crate::optim::OptimizationTrace;

const PGM_MAXVAL: u32 = 65535;

/// File-format failures, kept separate from domain errors so callers can
/// distinguish bad inputs from invalid computations.
#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub type FormatResult<T> = std::result::Result<T, FormatError>;

fn parse_error<T>(line: usize, message: impl Into<String>) -> FormatResult<T> {
    Err(FormatError::Parse {
        line,
        message: message.into(),
    })
}

/// Writes a point set as CSV. The shortest round-trip float encoding makes
/// `read_points(write_points(ps)) == ps` exact.
pub fn write_points<W: Write>(mut writer: W, points: &PointSet) -> std::io::Result<()> {
    writer.write_all(b"row,col\n")?;
    for p in points.iter() {
        writeln!(writer, "{},{}", p.row(), p.col())?;
    }
    Ok(())
}

/// Reads a point-set CSV written by [`write_points`].
pub fn read_points<R: BufRead>(reader: R) -> FormatResult<PointSet> {
    let mut points = Vec::new();
    let mut lines = reader.lines().enumerate();
    match lines.next() {
        Some((_, Ok(header))) if header.trim_end_matches('\r') == "row,col" => {}
        Some((_, Ok(header))) => {
            return parse_error(1, format!("expected header 'row,col', got '{header}'"))
        }
        Some((_, Err(e))) => return Err(e.into()),
        None => return parse_error(1, "empty file"),
    }
    for (index, line) in lines {
        let line = line?;
        let line = line.trim_end_matches('\r');
        if line.is_empty() {
            continue;
        }
        let lineno = index + 1;
        let (row, col) = line
            .split_once(',')
            .ok_or(FormatError::Parse {
                line: lineno,
                message: format!("expected 'row,col', got '{line}'"),
            })?;
        let row: f64 = row
            .trim()
            .parse()
            .map_err(|e| FormatError::Parse {
                line: lineno,
                message: format!("bad row value '{row}': {e}"),
            })?;
        let col: f64 = col
            .trim()
            .parse()
            .map_err(|e| FormatError::Parse {
                line: lineno,
                message: format!("bad col value '{col}': {e}"),
            })?;
        let point = Point::new(row, col).map_err(|e| FormatError::Parse {
            line: lineno,
            message: e.to_string(),
        })?;
        points.push(point);
    }
    Ok(PointSet::new(points))
}

/// Writes a probability map as plain-ASCII PGM, one image row per line.
/// Quantization to 16 bits keeps the per-pixel round-trip error at or
/// below `1/(2·65535)`.
pub fn write_map<W: Write>(mut writer: W, map: &ProbMap) -> std::io::Result<()> {
    let grid = map.grid();
    writeln!(writer, "P2")?;
    writeln!(writer, "{} {}", grid.width(), grid.height())?;
    writeln!(writer, "{PGM_MAXVAL}")?;
    for r in 0..grid.height() {
        let mut line = String::with_capacity(grid.width() * 6);
        for c in 0..grid.width() {
            if c > 0 {
                line.push(' ');
            }
            let stored = (map.get(r, c) * PGM_MAXVAL as f64).round() as u32;
            line.push_str(&stored.to_string());
        }
        writeln!(writer, "{line}")?;
    }
    Ok(())
}

/// Reads a plain-ASCII PGM written by [`write_map`]. `#` comments and
/// arbitrary whitespace are tolerated; the maxval must be 65535.
pub fn read_map<R: Read>(mut reader: R) -> FormatResult<ProbMap> {
    let mut text = String::new();
    reader.read_to_string(&mut text)?;
    let mut tokens = text
        .lines()
        .map(|l| l.split('#').next().unwrap_or(""))
        .flat_map(|l| l.split_whitespace());

    let magic = tokens.next().unwrap_or("");
    if magic != "P2" {
        return parse_error(1, format!("expected magic 'P2', got '{magic}'"));
    }
    let mut next_number = |name: &str| -> FormatResult<u64> {
        tokens
            .next()
            .ok_or(FormatError::Parse {
                line: 0,
                message: format!("missing {name}"),
            })?
            .parse()
            .map_err(|e| FormatError::Parse {
                line: 0,
                message: format!("bad {name}: {e}"),
            })
    };
    let width = next_number("width")? as usize;
    let height = next_number("height")? as usize;
    let maxval = next_number("maxval")?;
    if maxval != PGM_MAXVAL as u64 {
        return parse_error(0, format!("unsupported maxval {maxval}, expected {PGM_MAXVAL}"));
    }
    let grid = GridSpec::new(height, width).map_err(|e| FormatError::Parse {
        line: 0,
        message: e.to_string(),
    })?;
    let mut values = Vec::with_capacity(grid.num_pixels());
    for _ in 0..grid.num_pixels() {
        let v = next_number("pixel value")?;
        if v > PGM_MAXVAL as u64 {
            return parse_error(0, format!("pixel value {v} exceeds maxval"));
        }
        values.push(v as f64 / PGM_MAXVAL as f64);
    }
    if tokens.next().is_some() {
        return parse_error(0, "trailing data after pixel values");
    }
    ProbMap::new(grid, values).map_err(|e| FormatError::Parse {
        line: 0,
        message: e.to_string(),
    })
}

/// Writes an optimization trace as CSV.
pub fn write_trace_csv<W: Write>(mut writer: W, trace: &OptimizationTrace) -> std::io::Result<()> {
    writer.write_all(b"iter,total,term1,term2,reg,mass\n")?;
    for r in trace.records() {
        writeln!(
            writer,
            "{},{},{},{},{},{}",
            r.iteration, r.total, r.term1, r.term2, r.regression, r.mass
        )?;
    }
    Ok(())
}

/// Writes an F-vs-r sweep as CSV; undefined F-scores print as `nan`.
pub fn write_sweep_csv<W: Write>(mut writer: W, sweep: &[SweepEntry]) -> std::io::Result<()> {
    writer.write_all(b"r,fscore\n")?;
    for entry in sweep {
        match entry.fscore {
            Some(f) => writeln!(writer, "{},{}", entry.radius, f)?,
            None => writeln!(writer, "{},nan", entry.radius)?,
        }
    }
    Ok(())
}

/// Reads a per-image counts CSV with header `c_true,c_est`.
pub fn read_counts<R: BufRead>(reader: R) -> FormatResult<CountSeries> {
    let mut pairs = Vec::new();
    let mut lines = reader.lines().enumerate();
    match lines.next() {
        Some((_, Ok(header))) if header.trim_end_matches('\r') == "c_true,c_est" => {}
        Some((_, Ok(header))) => {
            return parse_error(1, format!("expected header 'c_true,c_est', got '{header}'"))
        }
        Some((_, Err(e))) => return Err(e.into()),
        None => return parse_error(1, "empty file"),
    }
    for (index, line) in lines {
        let line = line?;
        let line = line.trim_end_matches('\r');
        if line.is_empty() {
            continue;
        }
        let lineno = index + 1;
        let (c_true, c_est) = line.split_once(',').ok_or(FormatError::Parse {
            line: lineno,
            message: format!("expected 'c_true,c_est', got '{line}'"),
        })?;
        let parse = |s: &str, name: &str| -> FormatResult<u64> {
            s.trim().parse().map_err(|e| FormatError::Parse {
                line: lineno,
                message: format!("bad {name} '{s}': {e}"),
            })
        };
        pairs.push((parse(c_true, "c_true")?, parse(c_est, "c_est")?));
    }
    CountSeries::new(pairs).map_err(|e| FormatError::Parse {
        line: 0,
        message: e.to_string(),
    })
}

pub fn write_points_file(path: &Path, points: &PointSet) -> std::io::Result<()> {
    let mut writer = BufWriter::new(File::create(path)?);
    write_points(&mut writer, points)?;
    writer.flush()
}

pub fn read_points_file(path: &Path) -> FormatResult<PointSet> {
    read_points(BufReader::new(File::open(path)?))
}

pub fn write_map_file(path: &Path, map: &ProbMap) -> std::io::Result<()> {
    let mut writer = BufWriter::new(File::create(path)?);
    write_map(&mut writer, map)?;
    writer.flush()
}

pub fn read_map_file(path: &Path) -> FormatResult<ProbMap> {
    read_map(BufReader::new(File::open(path)?))
}

pub fn write_trace_file(path: &Path, trace: &OptimizationTrace) -> std::io::Result<()> {
    let mut writer = BufWriter::new(File::create(path)?);
    write_trace_csv(&mut writer, trace)?;
    writer.flush()
}

pub fn read_counts_file(path: &Path) -> FormatResult<CountSeries> {
    read_counts(BufReader::new(File::open(path)?))
}
