//! Minimize-then-rank-by-energy over a directory of candidate structures.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use ffmin_core::model::{load_system, MolecularSystem};
use ffmin_core::optimizers::Status;

use super::minimize::{minimize_system, MinimizeOptions};
use crate::exit::CliError;
use crate::rmsd::{rmsd, rmsd_superposed};

/// Default near-native radius, Å.
pub const NEAR_NATIVE_RMSD: f64 = 10.0;
/// A ranking succeeds when the first near-native candidate has index below this.
pub const SUCCESS_TOP: usize = 30;

#[derive(Debug, Clone, PartialEq)]
pub struct CandidateResult {
    pub id: String,
    /// Final total energy, kJ/mol; NaN for failed candidates.
    pub energy: f64,
    /// To the reference, Å; NaN when unavailable.
    pub rmsd: f64,
    pub status: Option<Status>,
    /// Set when the candidate could not be minimized; such candidates rank last.
    pub error: Option<String>,
}

impl CandidateResult {
    fn failed(&self) -> bool {
        self.error.is_some() || !self.energy.is_finite()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankingReport {
    /// Sorted by (failed, energy, id).
    pub entries: Vec<CandidateResult>,
    pub rmsd_threshold: f64,
    pub top: usize,
    /// Index of the first entry with RMSD strictly below the threshold.
    pub near_native_index: Option<usize>,
    pub success: bool,
}

impl RankingReport {
    pub fn from_candidates(
        mut entries: Vec<CandidateResult>,
        rmsd_threshold: f64,
        top: usize,
    ) -> Self {
        entries.sort_by(|a, b| {
            a.failed()
                .cmp(&b.failed())
                .then(a.energy.total_cmp(&b.energy))
                .then_with(|| a.id.cmp(&b.id))
        });
        let near_native_index = entries
            .iter()
            .position(|c| !c.failed() && c.rmsd < rmsd_threshold);
        let success = near_native_index.is_some_and(|i| i < top);
        Self {
            entries,
            rmsd_threshold,
            top,
            near_native_index,
            success,
        }
    }
}

impl fmt::Display for RankingReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{:>4}  {:<24} {:>16} {:>10}  status",
            "rank", "candidate", "energy kJ/mol", "rmsd A"
        )?;
        for (i, c) in self.entries.iter().enumerate() {
            let status = match (&c.error, c.status) {
                (Some(e), _) => format!("failed: {e}"),
                (None, Some(s)) => s.to_string(),
                (None, None) => String::new(),
            };
            writeln!(
                f,
                "{:>4}  {:<24} {:>16.6} {:>10.4}  {status}",
                i, c.id, c.energy, c.rmsd
            )?;
        }
        match self.near_native_index {
            Some(i) => writeln!(
                f,
                "near-native (rmsd < {} A) first at index {i}",
                self.rmsd_threshold
            )?,
            None => writeln!(
                f,
                "no near-native candidate (rmsd < {} A)",
                self.rmsd_threshold
            )?,
        }
        write!(f, "success (index < {}): {}", self.top, self.success)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankOptions {
    pub minimize: MinimizeOptions,
    pub superpose: bool,
    pub rmsd_threshold: f64,
    pub top: usize,
}

impl RankOptions {
    pub fn new(minimize: MinimizeOptions) -> Self {
        Self {
            minimize,
            superpose: false,
            rmsd_threshold: NEAR_NATIVE_RMSD,
            top: SUCCESS_TOP,
        }
    }
}

/// Candidate files: every `*.toml` in `dir` except the reference itself,
/// sorted by file name.
pub fn candidate_files(dir: &Path, reference: &Path) -> Result<Vec<PathBuf>, CliError> {
    let reference = fs::canonicalize(reference).ok();
    let mut files = Vec::new();
    let listing = fs::read_dir(dir)
        .with_context(|| format!("cannot list {}", dir.display()))
        .map_err(CliError::Input)?;
    for entry in listing {
        let path = entry.map_err(|e| CliError::Input(e.into()))?.path();
        if path.extension().is_some_and(|e| e == "toml")
            && fs::canonicalize(&path).ok() != reference
        {
            files.push(path);
        }
    }
    files.sort();
    if files.is_empty() {
        return Err(CliError::input(format!(
            "no candidate files in {}",
            dir.display()
        )));
    }
    Ok(files)
}

pub fn batch_rank(
    dir: &Path,
    reference: &Path,
    options: &RankOptions,
) -> Result<RankingReport, CliError> {
    let reference_system = load_system(reference)
        .with_context(|| format!("reference {}", reference.display()))
        .map_err(CliError::Input)?;
    let files = candidate_files(dir, reference)?;
    let evaluate = |path: &PathBuf| evaluate_candidate(path, &reference_system, options);
    #[cfg(feature = "parallel")]
    let results: Vec<CandidateResult> = {
        use rayon::prelude::*;
        files.par_iter().map(evaluate).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let results: Vec<CandidateResult> = files.iter().map(evaluate).collect();
    Ok(RankingReport::from_candidates(
        results,
        options.rmsd_threshold,
        options.top,
    ))
}

fn evaluate_candidate(
    path: &Path,
    reference: &MolecularSystem,
    options: &RankOptions,
) -> CandidateResult {
    let id = path.file_stem().map_or_else(
        || path.display().to_string(),
        |s| s.to_string_lossy().into_owned(),
    );
    let mut result = CandidateResult {
        id,
        energy: f64::NAN,
        rmsd: f64::NAN,
        status: None,
        error: None,
    };
    let outcome = load_system(path)
        .map_err(|e| anyhow!(e))
        .and_then(|system| {
            if system.n_atoms() != reference.n_atoms() {
                return Err(anyhow!(
                    "{} atoms, reference has {}",
                    system.n_atoms(),
                    reference.n_atoms()
                ));
            }
            minimize_system(&system, &options.minimize).map_err(|e| anyhow!(e))
        });
    match outcome {
        Ok(out) => {
            let distance = if options.superpose {
                rmsd_superposed
            } else {
                rmsd
            };
            result.rmsd = distance(&out.system.coords, &reference.coords).unwrap_or(f64::NAN);
            result.status = Some(out.status());
            if matches!(out.status(), Status::Diverged | Status::EvaluationError) {
                result.error = Some(out.status().to_string());
            } else {
                result.energy = out.final_energy.total();
            }
        }
        Err(e) => result.error = Some(format!("{e:#}")),
    }
    result
}

#[cfg(test)]
mod tests {
    use super::*;

    fn candidate(id: &str, energy: f64, rmsd: f64) -> CandidateResult {
        CandidateResult {
            id: id.into(),
            energy,
            rmsd,
            status: Some(Status::Converged),
            error: None,
        }
    }

    #[test]
    fn sorted_by_energy_then_id() {
        let report = RankingReport::from_candidates(
            vec![
                candidate("b", 1.0, 20.0),
                candidate("a", 1.0, 20.0),
                candidate("c", -3.0, 2.0),
            ],
            10.0,
            30,
        );
        let ids: Vec<&str> = report.entries.iter().map(|c| c.id.as_str()).collect();
        assert_eq!(ids, ["c", "a", "b"]);
        assert_eq!(report.near_native_index, Some(0));
        assert!(report.success);
    }

    #[test]
    fn failures_rank_last() {
        let mut bad = candidate("a", f64::NAN, 1.0);
        bad.error = Some("diverged".into());
        let report =
            RankingReport::from_candidates(vec![bad, candidate("z", 100.0, 50.0)], 10.0, 30);
        assert_eq!(report.entries[1].id, "a");
        assert_eq!(report.near_native_index, None);
        assert!(!report.success);
    }

    #[test]
    fn threshold_is_strict() {
        let report = RankingReport::from_candidates(vec![candidate("a", 0.0, 10.0)], 10.0, 30);
        assert_eq!(report.near_native_index, None);
    }
}
