pub mod bench;
pub mod energy;
pub mod minimize;
pub mod rank;

use std::fmt;
use std::str::FromStr;

pub use bench::{
    bench_quadratic, worstcase, BenchMethod, BenchOptions, BoundReport, SpectrumKind,
    WorstCaseReport,
};
pub use energy::{energy, energy_of, EnergyReport};
pub use minimize::{minimize_system, Method, MinimizeOptions, MinimizeOutcome};
pub use rank::{batch_rank, CandidateResult, RankOptions, RankingReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Precision {
    F32,
    #[default]
    F64,
}

impl fmt::Display for Precision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Precision::F32 => "f32",
            Precision::F64 => "f64",
        })
    }
}

impl FromStr for Precision {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "f32" => Ok(Precision::F32),
            "f64" => Ok(Precision::F64),
            _ => Err(format!("unknown precision '{s}' (expected f32|f64)")),
        }
    }
}
