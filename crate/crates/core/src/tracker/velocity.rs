//! First-order eigenvalue (vortex) velocities under `M(t) = M₀ + t·S`.

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, C64};

/// Relative separation below which two eigenvalues count as repeated.
const DEGENERATE_REL: f64 = 1e-12;

/// Velocities `(λ̇₊, λ̇₋)` of `λ± = (a + d ± r)/2`, `r = √((a − d)² + 4bc)`, under `S = diag(s, −s)`.
///
/// Differentiating the characteristic polynomial gives `λ̇ = (a − d)s/(2λ − a − d)`,
/// so `λ̇± = ±(a − d)s/r`.
pub fn velocity_closed_form_n2(m0: &ComplexMatrix, s: C64) -> Result<(C64, C64)> {
    if m0.n() != 2 {
        return Err(Error::InvalidArgument("closed-form N=2 velocity needs a 2x2 matrix".into()));
    }
    let (a, b, c, d) = (m0[(0, 0)], m0[(0, 1)], m0[(1, 0)], m0[(1, 1)]);
    let disc = (a - d) * (a - d) + 4.0 * b * c;
    let scale = m0.max_abs().max(f64::MIN_POSITIVE);
    if disc.norm() <= (DEGENERATE_REL * scale).powi(2) {
        return Err(Error::DegenerateEigenvalue(format!("discriminant {disc} vanishes")));
    }
    let r = disc.sqrt();
    let v = (a - d) * s / r;
    Ok((v, -v))
}

/// Velocity of the eigenvalue `lambda0` of a 3×3 `M₀` under `S = diag(s, 0, −s)`:
/// `[ae + fh − ek − bd + (k − a)λ]s / (bd − ae + cg + fh − ak − ek + 2λ(a + e + k) − 3λ²)`.
pub fn velocity_closed_form_n3(m0: &ComplexMatrix, s: C64, lambda0: C64) -> Result<C64> {
    if m0.n() != 3 {
        return Err(Error::InvalidArgument("closed-form N=3 velocity needs a 3x3 matrix".into()));
    }
    let e = |i, j| m0[(i, j)];
    let (a, b, c) = (e(0, 0), e(0, 1), e(0, 2));
    let (d, ee, f) = (e(1, 0), e(1, 1), e(1, 2));
    let (g, h, k) = (e(2, 0), e(2, 1), e(2, 2));
    let l = lambda0;
    let num = (a * ee + f * h - ee * k - b * d + (k - a) * l) * s;
    let den = b * d - a * ee + c * g + f * h - a * k - ee * k + 2.0 * l * (a + ee + k) - 3.0 * l * l;
    let scale = m0.max_abs().max(l.norm()).max(f64::MIN_POSITIVE);
    if den.norm() <= DEGENERATE_REL * scale * scale {
        return Err(Error::DegenerateEigenvalue(format!("denominator vanishes at lambda = {l}")));
    }
    Ok(num / den)
}

/// `tr(Ṁ·adj(M − λI)) / Π_{k≠j}(λ_k − λ)` at `λ = λ_j`, the eigenvalues taken from a Schur decomposition.
/// `lambda_j` selects the nearest eigenvalue of `m`.
pub fn velocity_general(m: &ComplexMatrix, mdot: &ComplexMatrix, lambda_j: C64) -> Result<C64> {
    let n = m.n();
    if mdot.n() != n {
        return Err(Error::InvalidArgument("m and mdot differ in size".into()));
    }
    let ev = m.eigenvalues();
    let scale = m.max_abs().max(lambda_j.norm()).max(f64::MIN_POSITIVE);
    let (j, _) = ev
        .iter()
        .enumerate()
        .min_by(|(_, a), (_, b)| (**a - lambda_j).norm().total_cmp(&(**b - lambda_j).norm()))
        .ok_or_else(|| Error::InvalidArgument("empty matrix".into()))?;
    let mut envelope = C64::new(1.0, 0.0);
    for (k, lk) in ev.iter().enumerate() {
        if k == j {
            continue;
        }
        let gap = lk - lambda_j;
        if gap.norm() <= DEGENERATE_REL * 1e3 * scale {
            return Err(Error::DegenerateEigenvalue(format!("eigenvalue {lambda_j} is repeated")));
        }
        envelope *= gap;
    }
    let shifted = m - &ComplexMatrix::identity(n).scale(lambda_j);
    let adj = shifted.adjugate();
    let chi_dot = (mdot * &adj).trace();
    Ok(chi_dot / envelope)
}
