use super::{add_to, atom_pos, cross3, dot3, scale3, sub3, Angle, Bond, Dihedral, EnergyError};
use crate::real::Real;

/// `K (r - r0)^2` and its gradient on atom `i` (atom `j` gets the negative).
/// At `r = 0` the direction is undefined and the gradient is taken as zero.
#[inline]
pub(crate) fn bond_term<T: Real>(b: &Bond<T>, x: &[T]) -> (T, [T; 3]) {
    let d = sub3(atom_pos(x, b.atoms[0]), atom_pos(x, b.atoms[1]));
    let r = dot3(d, d).sqrt();
    let dr = r - b.r0;
    let e = b.k * dr * dr;
    if r == T::zero() {
        return (e, [T::zero(); 3]);
    }
    let s = T::c(2.0) * b.k * dr / r;
    (e, scale3(d, s))
}

pub(crate) fn stretch<T: Real>(bonds: &[Bond<T>], x: &[T], mut grad: Option<&mut [T]>) -> T {
    let mut total = T::zero();
    for b in bonds {
        let (e, gi) = bond_term(b, x);
        total = total + e;
        if let Some(g) = grad.as_deref_mut() {
            add_to(g, b.atoms[0], gi);
            add_to(g, b.atoms[1], scale3(gi, -T::one()));
        }
    }
    total
}

/// `Ktheta (theta - theta0)^2` with theta from the clamped arccos, plus the
/// gradients on the three atoms.
#[inline]
pub(crate) fn angle_term<T: Real>(
    a: &Angle<T>,
    x: &[T],
    term: usize,
) -> Result<(T, [[T; 3]; 3]), EnergyError> {
    let [i, j, k] = a.atoms;
    let pj = atom_pos(x, j);
    let u = sub3(atom_pos(x, i), pj);
    let v = sub3(atom_pos(x, k), pj);
    let ru = dot3(u, u).sqrt();
    let rv = dot3(v, v).sqrt();
    if ru == T::zero() || rv == T::zero() {
        return Err(EnergyError::DegenerateAngle { term });
    }
    let cos = (dot3(u, v) / (ru * rv)).max(-T::one()).min(T::one());
    let theta = cos.acos();
    let dtheta = theta - a.theta0;
    let e = a.k * dtheta * dtheta;

    let sin = (T::one() - cos * cos).max(T::zero()).sqrt();
    // collinear arms: theta is at a kink of the arccos, no unique direction
    if sin <= T::epsilon() {
        return Ok((e, [[T::zero(); 3]; 3]));
    }
    let de = T::c(2.0) * a.k * dtheta;
    // d theta / d u = -(v/(|u||v|) - cos u/|u|^2) / sin
    let f = -de / sin;
    let gi = scale3(
        sub3(scale3(v, T::one() / (ru * rv)), scale3(u, cos / (ru * ru))),
        f,
    );
    let gk = scale3(
        sub3(scale3(u, T::one() / (ru * rv)), scale3(v, cos / (rv * rv))),
        f,
    );
    let gj = [-(gi[0] + gk[0]), -(gi[1] + gk[1]), -(gi[2] + gk[2])];
    Ok((e, [gi, gj, gk]))
}

pub(crate) fn bend<T: Real>(
    angles: &[Angle<T>],
    x: &[T],
    mut grad: Option<&mut [T]>,
) -> Result<T, EnergyError> {
    let mut total = T::zero();
    for (t, a) in angles.iter().enumerate() {
        let (e, g) = angle_term(a, x, t)?;
        total = total + e;
        if let Some(grad) = grad.as_deref_mut() {
            for (atom, ga) in a.atoms.iter().zip(g) {
                add_to(grad, *atom, ga);
            }
        }
    }
    Ok(total)
}

/// Signed dihedral of `i-j-k-l` (0 = cis, ±pi = trans) via atan2 of cross
/// products, with the gradients of the angle on the four atoms.
#[inline]
pub(crate) fn dihedral_angle<T: Real>(
    atoms: [usize; 4],
    x: &[T],
    term: usize,
) -> Result<(T, [[T; 3]; 4]), EnergyError> {
    let [i, j, k, l] = atoms.map(|a| atom_pos(x, a));
    let b1 = sub3(j, i);
    let b2 = sub3(k, j);
    let b3 = sub3(l, k);
    let m = cross3(b1, b2);
    let n = cross3(b2, b3);
    let m2 = dot3(m, m);
    let n2 = dot3(n, n);
    let b2sq = dot3(b2, b2);
    let tol = T::epsilon() * T::epsilon();
    if b2sq == T::zero() || m2 <= tol * dot3(b1, b1) * b2sq || n2 <= tol * dot3(b3, b3) * b2sq {
        return Err(EnergyError::DegenerateDihedral { term });
    }
    let b2len = b2sq.sqrt();
    let phi = (b2len * dot3(b1, n)).atan2(dot3(m, n));

    let gi = scale3(m, -b2len / m2);
    let gl = scale3(n, b2len / n2);
    let p = dot3(b1, b2) / b2sq;
    let q = dot3(b3, b2) / b2sq;
    let gj = sub3(scale3(gl, q), scale3(gi, p + T::one()));
    let gk = sub3(scale3(gi, p), scale3(gl, q + T::one()));
    Ok((phi, [gi, gj, gk, gl]))
}

/// `1/2 (V1 (1 + cos phi) + V2 (1 - cos 2phi) + V3 (1 + cos 3phi) + V4 (1 - cos 4phi))`
/// and its derivative in phi.
#[inline]
pub(crate) fn opls_torsion<T: Real>(v: &[T; 4], phi: T) -> (T, T) {
    let one = T::one();
    let two = T::c(2.0);
    let three = T::c(3.0);
    let four = T::c(4.0);
    let half = T::c(0.5);
    let e = half
        * (v[0] * (one + phi.cos())
            + v[1] * (one - (two * phi).cos())
            + v[2] * (one + (three * phi).cos())
            + v[3] * (one - (four * phi).cos()));
    let de = half
        * (-v[0] * phi.sin() + two * v[1] * (two * phi).sin() - three * v[2] * (three * phi).sin()
            + four * v[3] * (four * phi).sin());
    (e, de)
}

#[inline]
pub(crate) fn dihedral_term<T: Real>(
    d: &Dihedral<T>,
    x: &[T],
    term: usize,
) -> Result<(T, [[T; 3]; 4]), EnergyError> {
    let (phi, dphi) = dihedral_angle(d.atoms, x, term)?;
    let (e, de) = opls_torsion(&d.v, phi);
    Ok((e, dphi.map(|g| scale3(g, de))))
}

pub(crate) fn torsion<T: Real>(
    dihedrals: &[Dihedral<T>],
    x: &[T],
    mut grad: Option<&mut [T]>,
) -> Result<T, EnergyError> {
    let mut total = T::zero();
    for (t, d) in dihedrals.iter().enumerate() {
        let (e, g) = dihedral_term(d, x, t)?;
        total = total + e;
        if let Some(grad) = grad.as_deref_mut() {
            for (atom, ga) in d.atoms.iter().zip(g) {
                add_to(grad, *atom, ga);
            }
        }
    }
    Ok(total)
}
