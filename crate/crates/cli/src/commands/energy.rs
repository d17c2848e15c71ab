use std::fmt;
use std::path::Path;

use anyhow::Context;
use ffmin_core::energy::{EnergyBreakdown, ForceField};
use ffmin_core::model::{load_system, MolecularSystem};
use ffmin_core::real::Real;

use super::Precision;
use crate::exit::CliError;

#[derive(Debug, Clone, PartialEq)]
pub struct EnergyReport {
    pub n_atoms: usize,
    pub precision: Precision,
    pub breakdown: EnergyBreakdown<f64>,
    /// Largest absolute gradient component, kJ/(mol·Å).
    pub grad_max: f64,
}

impl fmt::Display for EnergyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let b = &self.breakdown;
        writeln!(f, "atoms      {}", self.n_atoms)?;
        writeln!(f, "precision  {}", self.precision)?;
        writeln!(f, "stretch    {:.6} kJ/mol", b.stretch)?;
        writeln!(f, "bend       {:.6} kJ/mol", b.bend)?;
        writeln!(f, "torsion    {:.6} kJ/mol", b.torsion)?;
        writeln!(f, "coulomb    {:.6} kJ/mol", b.coulomb)?;
        writeln!(f, "vdw        {:.6} kJ/mol", b.vdw)?;
        writeln!(f, "total      {:.6} kJ/mol", b.total())?;
        write!(f, "grad max   {:.6e} kJ/(mol*A)", self.grad_max)
    }
}

pub fn energy_of(system: &MolecularSystem, precision: Precision) -> Result<EnergyReport, CliError> {
    let (breakdown, grad_max) = match precision {
        Precision::F32 => evaluate::<f32>(system)?,
        Precision::F64 => evaluate::<f64>(system)?,
    };
    Ok(EnergyReport {
        n_atoms: system.n_atoms(),
        precision,
        breakdown,
        grad_max,
    })
}

pub fn energy(path: &Path, precision: Precision) -> Result<EnergyReport, CliError> {
    let system = load_system(path).map_err(|e| CliError::Input(e.into()))?;
    energy_of(&system, precision)
}

fn evaluate<T: Real>(system: &MolecularSystem) -> Result<(EnergyBreakdown<f64>, f64), CliError> {
    let ff = ForceField::<T>::new(system);
    let x: Vec<T> = system.flat_coords().into_iter().map(T::c).collect();
    let (b, g) = ff
        .energy_and_gradient(&x)
        .context("energy evaluation failed")
        .map_err(CliError::Input)?;
    let grad_max = g.iter().fold(0.0f64, |m, v| m.max(v.to_f64_lossy().abs()));
    Ok((b.to_f64(), grad_max))
}
