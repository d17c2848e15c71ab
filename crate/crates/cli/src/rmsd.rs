//! Root-mean-square deviation between two conformations.

use ffmin_core::model::Vec3;
use nalgebra::{Matrix3, Vector3};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RmsdError {
    #[error("atom counts differ: {0} vs {1}")]
    CountMismatch(usize, usize),
    #[error("conformations are empty")]
    Empty,
}

fn check(v: &[Vec3], w: &[Vec3]) -> Result<(), RmsdError> {
    if v.len() != w.len() {
        return Err(RmsdError::CountMismatch(v.len(), w.len()));
    }
    if v.is_empty() {
        return Err(RmsdError::Empty);
    }
    Ok(())
}

/// `sqrt(sum_a |v_a - w_a|^2 / (3 n))`, matched atom order, no alignment.
pub fn rmsd(v: &[Vec3], w: &[Vec3]) -> Result<f64, RmsdError> {
    check(v, w)?;
    let sum: f64 = v.iter().zip(w).map(|(a, b)| (*a - *b).dot(*a - *b)).sum();
    Ok((sum / (3 * v.len()) as f64).sqrt())
}

/// Same normalization after optimal rigid superposition of `v` onto `w`.
pub fn rmsd_superposed(v: &[Vec3], w: &[Vec3]) -> Result<f64, RmsdError> {
    check(v, w)?;
    let to = |p: &Vec3| Vector3::new(p.x, p.y, p.z);
    let n = v.len() as f64;
    let cv = v.iter().map(to).sum::<Vector3<f64>>() / n;
    let cw = w.iter().map(to).sum::<Vector3<f64>>() / n;
    let mut h = Matrix3::zeros();
    for (a, b) in v.iter().zip(w) {
        h += (to(a) - cv) * (to(b) - cw).transpose();
    }
    let svd = h.svd(true, true);
    let (u, vt) = (svd.u.expect("u requested"), svd.v_t.expect("v_t requested"));
    let d = (vt.transpose() * u.transpose()).determinant().signum();
    let rot = vt.transpose() * Matrix3::from_diagonal(&Vector3::new(1.0, 1.0, d)) * u.transpose();
    let moved: Vec<Vec3> = v
        .iter()
        .map(|a| {
            let p = rot * (to(a) - cv) + cw;
            Vec3::new(p.x, p.y, p.z)
        })
        .collect();
    rmsd(&moved, w)
}
