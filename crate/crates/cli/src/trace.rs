//! CSV trace files: `#`-prefixed header lines, then one row per record.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use ffmin_core::optimizers::OptimizerTrace;

pub const COLUMNS: &str =
    "iteration,wall_seconds,f,best_f,grad_norm,step,oracle_value_calls,oracle_grad_calls,beta";

pub fn write_trace<W: Write>(out: &mut W, trace: &OptimizerTrace) -> io::Result<()> {
    writeln!(out, "# method: {}", trace.method)?;
    writeln!(out, "# config: {}", trace.config)?;
    match trace.seed {
        Some(seed) => writeln!(out, "# seed: {seed}")?,
        None => writeln!(out, "# seed: none")?,
    }
    writeln!(out, "# precision: {}", trace.precision)?;
    writeln!(out, "# status: {}", trace.status)?;
    if let Some(msg) = &trace.message {
        writeln!(out, "# message: {msg}")?;
    }
    writeln!(out, "{COLUMNS}")?;
    for r in &trace.records {
        let beta = r.beta.map_or(String::new(), |b| b.to_string());
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.iteration,
            r.wall_seconds,
            r.f,
            r.best_f,
            r.grad_norm,
            r.step,
            r.value_calls,
            r.grad_calls,
            beta
        )?;
    }
    Ok(())
}

pub fn save_trace(path: impl AsRef<Path>, trace: &OptimizerTrace) -> io::Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    write_trace(&mut out, trace)?;
    out.flush()
}

/// Rows with the wall-time column blanked, for comparing runs.
pub fn timeless_body(csv: &str) -> Vec<String> {
    csv.lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| {
            let mut cols: Vec<&str> = l.split(',').collect();
            if cols.len() > 1 {
                cols[1] = "";
            }
            cols.join(",")
        })
        .collect()
}
