//! Derivative-free random-atom wiggle.
//!
//! Each iteration picks one atom, probes the energy at `±h` along each axis,
//! fits a parabola per axis and moves the atom to the best of the six probes
//! and the combined parabola point, or leaves it in place.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Driver, OptimizerError, OptimizerTrace, StopCriteria};
use crate::energy::{
    delta_energy_atom_move, exact_atom_move_delta, linearize_farfield_coulomb, EnergyError,
    ForceField,
};
use crate::linesearch::parabola_min;
use crate::oracle::{MolecularObjective, Oracle};
use crate::real::Real;

#[derive(Debug, Clone, PartialEq)]
pub struct WiggleConfig {
    /// Probe displacement, Å.
    pub step: f64,
    pub seed: u64,
    /// Iterations between trace rows.
    pub iterations_per_epoch: usize,
    /// Evaluate probes with the linearized far-field Coulomb sum.
    pub use_incremental_coulomb: bool,
    /// Near/far split radius, Å.
    pub cutoff: f64,
    /// Full recompute every this many iterations.
    pub audit_every: Option<usize>,
    pub record_moves: bool,
}

impl Default for WiggleConfig {
    fn default() -> Self {
        Self {
            step: 0.05,
            seed: 0,
            iterations_per_epoch: 100,
            use_incremental_coulomb: true,
            cutoff: 7.0,
            audit_every: None,
            record_moves: false,
        }
    }
}

impl WiggleConfig {
    pub fn validate(&self) -> Result<(), OptimizerError> {
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(OptimizerError::Config(format!(
                "wiggle step must be positive, got {}",
                self.step
            )));
        }
        if self.iterations_per_epoch == 0 {
            return Err(OptimizerError::Config(
                "iterations per epoch must be at least 1".into(),
            ));
        }
        if !(self.cutoff > 0.0) {
            return Err(OptimizerError::Config(format!(
                "cutoff must be positive, got {}",
                self.cutoff
            )));
        }
        if self.audit_every == Some(0) {
            return Err(OptimizerError::Config(
                "audit period must be at least 1".into(),
            ));
        }
        Ok(())
    }

    fn describe(&self) -> String {
        let audit = self
            .audit_every
            .map_or("none".to_string(), |a| a.to_string());
        format!(
            "h={} seed={} epoch={} incremental={} cutoff={} audit={audit}",
            self.step,
            self.seed,
            self.iterations_per_epoch,
            self.use_incremental_coulomb,
            self.cutoff
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WiggleMove<T> {
    pub iteration: usize,
    pub atom: usize,
    pub displacement: [T; 3],
    /// Exact energy change of the move.
    pub delta: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WiggleOutcome<T> {
    pub x: Vec<T>,
    /// Running energy of `x`, resynchronized at every audit.
    pub energy: T,
    pub trace: OptimizerTrace,
    pub accepted: usize,
    /// Moves the probe model proposed but the exact delta rejected.
    pub rejected_by_check: usize,
    pub probe_evaluations: u64,
    pub audits: usize,
    /// Audits where the recomputed energy had not strictly decreased
    /// although moves were accepted, or had increased.
    pub audit_failures: usize,
    /// Largest `|running - recomputed|` seen at an audit.
    pub max_audit_drift: f64,
    pub moves: Vec<WiggleMove<T>>,
}

pub fn atom_wiggle<T: Real>(
    ff: &ForceField<T>,
    x0: &[T],
    config: &WiggleConfig,
    stop: &StopCriteria,
) -> Result<WiggleOutcome<T>, OptimizerError> {
    config.validate()?;
    if x0.len() != ff.dimension() || ff.n_atoms() == 0 {
        return Err(OptimizerError::Config(format!(
            "coordinate length {} does not match {} atoms",
            x0.len(),
            ff.n_atoms()
        )));
    }
    let objective = MolecularObjective::new(ff.clone());
    let oracle = Oracle::new(&objective);
    let mut energy = oracle.value(x0).map_err(OptimizerError::StartPoint)?;
    let mut driver = Driver::new(
        &oracle,
        stop,
        "wiggle",
        config.describe(),
        x0,
        energy,
        T::nan(),
    );
    driver.set_seed(config.seed);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let h = T::c(config.step);
    let mut x = x0.to_vec();
    let mut out = Counters::default();
    let mut moves = Vec::new();
    let mut audited_energy = energy;
    let mut accepted_since_audit = false;
    let mut k = 0;
    let mut last_step = T::zero();
    loop {
        if let Some(status) = driver.budget_exhausted(k) {
            if k % config.iterations_per_epoch != 0 {
                driver.record(k, energy, T::nan(), last_step, None);
            }
            let trace = driver.finish(status, None).trace;
            return Ok(out.finish(x, energy, trace, moves));
        }
        let atom = rng.gen_range(0..ff.n_atoms());
        k += 1;
        match wiggle_atom(ff, &x, atom, h, config, &mut out) {
            Ok(Some((displacement, delta))) => {
                for (c, d) in x[3 * atom..3 * atom + 3].iter_mut().zip(displacement) {
                    *c = *c + d;
                }
                energy = energy + delta;
                out.accepted += 1;
                accepted_since_audit = true;
                last_step = displacement
                    .iter()
                    .fold(T::zero(), |a, &d| a + d * d)
                    .sqrt();
                driver.offer(&x, energy);
                if config.record_moves {
                    moves.push(WiggleMove {
                        iteration: k,
                        atom,
                        displacement,
                        delta,
                    });
                }
            }
            Ok(None) => {}
            Err(e) => {
                let trace = driver
                    .finish(super::Status::EvaluationError, Some(e.to_string()))
                    .trace;
                return Ok(out.finish(x, energy, trace, moves));
            }
        }
        if config.audit_every.is_some_and(|a| k % a == 0) {
            let full = match oracle.value(&x) {
                Ok(v) => v,
                Err(e) => {
                    let trace = driver.fail(e).trace;
                    return Ok(out.finish(x, energy, trace, moves));
                }
            };
            out.audits += 1;
            out.max_audit_drift = out
                .max_audit_drift
                .max((full - energy).abs().to_f64_lossy());
            let ok = if accepted_since_audit {
                full < audited_energy
            } else {
                full <= audited_energy
            };
            if !ok {
                out.audit_failures += 1;
            }
            audited_energy = full;
            accepted_since_audit = false;
            energy = full;
        }
        if k % config.iterations_per_epoch == 0 {
            driver.record(k, energy, T::nan(), last_step, None);
        }
    }
}

#[derive(Default)]
struct Counters {
    accepted: usize,
    rejected_by_check: usize,
    probe_evaluations: u64,
    audits: usize,
    audit_failures: usize,
    max_audit_drift: f64,
}

impl Counters {
    fn finish<T: Real>(
        self,
        x: Vec<T>,
        energy: T,
        trace: OptimizerTrace,
        moves: Vec<WiggleMove<T>>,
    ) -> WiggleOutcome<T> {
        WiggleOutcome {
            x,
            energy,
            trace,
            accepted: self.accepted,
            rejected_by_check: self.rejected_by_check,
            probe_evaluations: self.probe_evaluations,
            audits: self.audits,
            audit_failures: self.audit_failures,
            max_audit_drift: self.max_audit_drift,
            moves,
        }
    }
}

/// Probes one atom. Returns the accepted displacement and its exact energy
/// change, or `None` when no candidate lowers the energy.
fn wiggle_atom<T: Real>(
    ff: &ForceField<T>,
    x: &[T],
    atom: usize,
    h: T,
    config: &WiggleConfig,
    counters: &mut Counters,
) -> Result<Option<([T; 3], T)>, EnergyError> {
    let lin = if config.use_incremental_coulomb {
        Some(linearize_farfield_coulomb(ff, x, atom, config.cutoff)?)
    } else {
        None
    };
    let mut probe = |delta: [T; 3]| -> Option<T> {
        counters.probe_evaluations += 1;
        let d = match &lin {
            Some(lin) => delta_energy_atom_move(ff, x, lin, delta),
            None => exact_atom_move_delta(ff, x, atom, delta),
        };
        d.ok().filter(|v| v.is_finite())
    };
    let mut candidates: Vec<([T; 3], T)> = Vec::with_capacity(7);
    let mut combined = [T::zero(); 3];
    let trust = T::c(10.0) * h;
    for axis in 0..3 {
        let mut samples = [(-h, None), (T::zero(), Some(T::zero())), (h, None)];
        for i in [0, 2] {
            let mut delta = [T::zero(); 3];
            delta[axis] = samples[i].0;
            samples[i].1 = probe(delta);
            if let Some(v) = samples[i].1 {
                candidates.push((delta, v));
            }
        }
        let vertex = match (samples[0].1, samples[2].1) {
            (Some(m), Some(p)) => parabola_min([(-h, m), (T::zero(), T::zero()), (h, p)])
                .ok()
                .and_then(|fit| fit.vertex)
                .map(|v| v.max(-trust).min(trust)),
            _ => None,
        };
        combined[axis] = vertex.unwrap_or_else(|| {
            samples
                .iter()
                .filter_map(|&(s, v)| v.map(|v| (s, v)))
                .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal))
                .map_or(T::zero(), |(s, _)| s)
        });
    }
    if combined.iter().any(|&c| c != T::zero()) {
        if let Some(v) = probe(combined) {
            candidates.push((combined, v));
        }
    }
    let Some(&(best, predicted)) = candidates
        .iter()
        .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal))
    else {
        return Ok(None);
    };
    if !(predicted < T::zero()) {
        return Ok(None);
    }
    if lin.is_none() {
        return Ok(Some((best, predicted)));
    }
    let exact = match exact_atom_move_delta(ff, x, atom, best) {
        Ok(v) if v.is_finite() => v,
        _ => {
            counters.rejected_by_check += 1;
            return Ok(None);
        }
    };
    if exact < T::zero() {
        Ok(Some((best, exact)))
    } else {
        counters.rejected_by_check += 1;
        Ok(None)
    }
}
