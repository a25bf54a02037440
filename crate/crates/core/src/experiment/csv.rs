use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::solve::{SolverTrace, TraceRecord};

pub const CSV_HEADER: &str = "iter,denoiser_evals,elapsed_s,objective,psnr";

/// Writes the header and one row per record. Reals use 13 significant digits;
/// an absent PSNR leaves its field empty.
pub fn emit_csv(trace: &SolverTrace, mut out: impl Write) -> io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in &trace.records {
        write!(out, "{},{},{:.12e},{:.12e},", r.iteration, r.denoiser_evals, r.elapsed_seconds, r.objective)?;
        if let Some(p) = r.psnr {
            write!(out, "{p:.12e}")?;
        }
        writeln!(out)?;
    }
    out.flush()
}

pub fn write_csv(trace: &SolverTrace, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    emit_csv(trace, BufWriter::new(file)).map_err(|e| Error::io(path, e))
}

/// Reads back what [`emit_csv`] wrote.
pub fn parse_csv(text: &str) -> Result<Vec<TraceRecord>> {
    let mut lines = text.lines();
    if lines.next().map(str::trim) != Some(CSV_HEADER) {
        return Err(Error::Config("trace CSV header mismatch".into()));
    }
    lines
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, line)| {
            let bad = || Error::Config(format!("trace CSV row {}: `{line}`", i + 1));
            let fields: Vec<&str> = line.split(',').collect();
            let [iter, evals, elapsed, objective, psnr] = fields[..] else {
                return Err(bad());
            };
            Ok(TraceRecord {
                iteration: iter.parse().map_err(|_| bad())?,
                denoiser_evals: evals.parse().map_err(|_| bad())?,
                elapsed_seconds: elapsed.parse().map_err(|_| bad())?,
                objective: objective.parse().map_err(|_| bad())?,
                psnr: if psnr.is_empty() { None } else { Some(psnr.parse().map_err(|_| bad())?) },
            })
        })
        .collect()
}
