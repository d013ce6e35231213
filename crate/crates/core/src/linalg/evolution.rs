use serde::{Deserialize, Serialize};

use super::{ComplexMatrix, C64};
use crate::error::{Error, Result};

/// Default 1-norm condition cap for [`reconstruct_matrix`].
pub const DEFAULT_COND_CAP: f64 = 1e8;

/// Default bound on `max|ΔM| / δt` accepted by [`evolve_2x2_cycle`].
pub const DEFAULT_MAX_RATE: f64 = 1e3;

/// Linear deformation `M(t) = M₀ + t·S(s)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvolutionLaw {
    pub m0: ComplexMatrix,
    #[serde(with = "complex_pair")]
    pub s: C64,
}

impl EvolutionLaw {
    pub fn new(m0: ComplexMatrix, s: C64) -> Self {
        EvolutionLaw { m0, s }
    }

    pub fn n(&self) -> usize {
        self.m0.n()
    }

    pub fn at(&self, t: f64) -> ComplexMatrix {
        evolve(self, t)
    }

    /// `dM/dt = S`.
    pub fn velocity(&self) -> ComplexMatrix {
        deformation_matrix(self.n(), self.s)
    }

    /// Diagonal of `S`, avoiding a dense matrix when only the diagonal is needed.
    pub fn deformation_diag(&self) -> Vec<C64> {
        deformation_diag(self.n(), self.s)
    }
}

pub(crate) mod complex_pair {
    use super::C64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(z: &C64, s: S) -> Result<S::Ok, S::Error> {
        [z.re, z.im].serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<C64, D::Error> {
        let [re, im] = <[f64; 2]>::deserialize(d)?;
        Ok(C64::new(re, im))
    }
}

fn deformation_diag(n: usize, s: C64) -> Vec<C64> {
    let zero = C64::new(0.0, 0.0);
    let mut d = vec![zero; n];
    if n % 2 == 0 {
        for (i, v) in d.iter_mut().enumerate() {
            *v = if i < n / 2 { s } else { -s };
        }
    } else if n > 1 {
        d[0] = s;
        d[n - 1] = -s;
    }
    d
}

/// `diag(s, …, s, −s, …, −s)` for even `n`; `diag(s, 0, …, 0, −s)` for odd `n`
/// (the zero matrix for `n = 1`).
pub fn deformation_matrix(n: usize, s: C64) -> ComplexMatrix {
    ComplexMatrix::from_diag(&deformation_diag(n, s))
}

/// `M₀ + t·S`.
pub fn evolve(law: &EvolutionLaw, t: f64) -> ComplexMatrix {
    let mut m = law.m0.clone();
    for (i, d) in deformation_diag(law.n(), law.s).into_iter().enumerate() {
        m[(i, i)] += d * t;
    }
    m
}

/// `Q·diag(λ)·Q⁻¹` with the default condition cap.
pub fn reconstruct_matrix(zeros: &[C64], conj: &ComplexMatrix) -> Result<ComplexMatrix> {
    reconstruct_matrix_with_cap(zeros, conj, DEFAULT_COND_CAP)
}

/// `Q·diag(λ)·Q⁻¹`, rejecting `Q` whose 1-norm condition number exceeds `cap`.
pub fn reconstruct_matrix_with_cap(zeros: &[C64], conj: &ComplexMatrix, cap: f64) -> Result<ComplexMatrix> {
    if zeros.len() != conj.n() {
        return Err(Error::InvalidArgument(format!(
            "{} zeros for a {}x{} conjugating matrix",
            zeros.len(),
            conj.n(),
            conj.n()
        )));
    }
    let inv = conj.inverse().ok_or(Error::IllConditioned {
        cond: f64::INFINITY,
        cap,
    })?;
    let cond = conj.norm1() * inv.norm1();
    if !(cond <= cap) {
        return Err(Error::IllConditioned { cond, cap });
    }
    let d = ComplexMatrix::from_diag(zeros);
    Ok(&(conj * &d) * &inv)
}

/// Moves a 2×2 matrix to the prescribed trace `k1` and determinant `k2` with the
/// smallest change, using [`DEFAULT_MAX_RATE`].
pub fn evolve_2x2_cycle(m0: &ComplexMatrix, k1: C64, k2: C64, delta_t: f64) -> Result<ComplexMatrix> {
    evolve_2x2_cycle_with(m0, k1, k2, delta_t, DEFAULT_MAX_RATE)
}

/// Finds `M₁ = M₀ + Δ` with `tr M₁ = k1`, `det M₁ = k2` and `|Δ|` minimal.
///
/// The two conditions are holomorphic in the entries, so each step solves the
/// linearized system `J·Δ = J·Δ_k − F(Δ_k)` for its minimum-norm solution
/// `Δ = Jᴴ(JJᴴ)⁻¹(…)`; the fixed point is a stationary point of `|Δ|` on the
/// solution set. Fails when no solution stays within `max_rate·|δt|` of `M₀`
/// in every entry.
pub fn evolve_2x2_cycle_with(
    m0: &ComplexMatrix,
    k1: C64,
    k2: C64,
    delta_t: f64,
    max_rate: f64,
) -> Result<ComplexMatrix> {
    if m0.n() != 2 {
        return Err(Error::InvalidArgument("evolve_2x2_cycle needs a 2x2 matrix".into()));
    }
    if !delta_t.is_finite() || !k1.re.is_finite() || !k1.im.is_finite() || !k2.re.is_finite() || !k2.im.is_finite() {
        return Err(Error::InvalidArgument("non-finite input".into()));
    }
    let base = [m0[(0, 0)], m0[(0, 1)], m0[(1, 0)], m0[(1, 1)]];
    let residual = |d: &[C64; 4]| -> [C64; 2] {
        let (a, b, c, dd) = (base[0] + d[0], base[1] + d[1], base[2] + d[2], base[3] + d[3]);
        [a + dd - k1, a * dd - b * c - k2]
    };
    let scale = 1.0 + k1.norm() + k2.norm() + m0.max_abs().powi(2);
    let zero = C64::new(0.0, 0.0);
    let mut delta = [zero; 4];
    let mut converged = false;
    for _ in 0..100 {
        let f = residual(&delta);
        let (a, b, c, d) = (base[0] + delta[0], base[1] + delta[1], base[2] + delta[2], base[3] + delta[3]);
        let j = [[C64::new(1.0, 0.0), zero, zero, C64::new(1.0, 0.0)], [d, -c, -b, a]];
        let jd = |row: &[C64; 4]| -> C64 { row.iter().zip(&delta).map(|(x, y)| x * y).sum() };
        let r = [jd(&j[0]) - f[0], jd(&j[1]) - f[1]];
        // G = J·Jᴴ
        let mut g = [[zero; 2]; 2];
        for p in 0..2 {
            for q in 0..2 {
                g[p][q] = (0..4).map(|k| j[p][k] * j[q][k].conj()).sum();
            }
        }
        let tr = g[0][0].re + g[1][1].re;
        let mut det = g[0][0] * g[1][1] - g[0][1] * g[1][0];
        if det.norm() < 1e-14 * tr * tr {
            let mu = 1e-10 * tr;
            g[0][0] += mu;
            g[1][1] += mu;
            det = g[0][0] * g[1][1] - g[0][1] * g[1][0];
        }
        let y0 = (g[1][1] * r[0] - g[0][1] * r[1]) / det;
        let y1 = (g[0][0] * r[1] - g[1][0] * r[0]) / det;
        let mut next = [zero; 4];
        for (k, v) in next.iter_mut().enumerate() {
            *v = j[0][k].conj() * y0 + j[1][k].conj() * y1;
        }
        let change: f64 = next.iter().zip(&delta).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
        delta = next;
        if !delta.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            break;
        }
        let f = residual(&delta);
        if f[0].norm().max(f[1].norm()) <= 1e-14 * scale && change <= 1e-15 * (1.0 + m0.max_abs()) {
            converged = true;
            break;
        }
    }
    let f = residual(&delta);
    if !converged && f[0].norm().max(f[1].norm()) > 1e-12 * scale {
        return Err(Error::StepTooLarge(format!(
            "coefficient equations not solvable near M0 (residual {:.3e})",
            f[0].norm().max(f[1].norm())
        )));
    }
    let size = delta.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if size > max_rate * delta_t.abs() {
        return Err(Error::StepTooLarge(format!(
            "required change {size:.3e} exceeds {max_rate:.3e} x |dt| = {:.3e}",
            max_rate * delta_t.abs()
        )));
    }
    Ok(ComplexMatrix::from_2x2(
        base[0] + delta[0],
        base[1] + delta[1],
        base[2] + delta[2],
        base[3] + delta[3],
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::sample_ginibre;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn deformation_examples() {
        let s = deformation_matrix(2, c(1.0, 0.0));
        assert_eq!(s, ComplexMatrix::from_diag(&[c(1.0, 0.0), c(-1.0, 0.0)]));
        let s = deformation_matrix(3, c(1.0, 0.0));
        assert_eq!(s, ComplexMatrix::from_diag(&[c(1.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)]));
        let s = deformation_matrix(4, c(0.0, 1.0));
        assert_eq!(
            s,
            ComplexMatrix::from_diag(&[c(0.0, 1.0), c(0.0, 1.0), c(0.0, -1.0), c(0.0, -1.0)])
        );
        assert_eq!(deformation_matrix(1, c(2.0, 0.0)), ComplexMatrix::zeros(1));
    }

    #[test]
    fn evolve_from_zero_and_at_origin() {
        let law = EvolutionLaw::new(ComplexMatrix::zeros(2), c(1.0, 0.0));
        assert_eq!(law.at(2.0), ComplexMatrix::from_diag(&[c(2.0, 0.0), c(-2.0, 0.0)]));
        let law = EvolutionLaw::new(sample_ginibre(5, 1.0, 3).unwrap(), c(0.4, -0.2));
        assert_eq!(law.at(0.0), law.m0);
    }

    #[test]
    fn evolve_is_affine() {
        let law = EvolutionLaw::new(sample_ginibre(6, 0.5, 8).unwrap(), c(0.7, 0.3));
        let (t1, t2) = (0.37, -1.9);
        let lhs = &(&law.at(t1) + &law.at(t2)) - &law.m0;
        assert!((&lhs - &law.at(t1 + t2)).max_abs() < 1e-13);
    }

    #[test]
    fn separated_clusters_at_large_t() {
        let law = EvolutionLaw::new(crate::linalg::ginibre_standard(10, 4).unwrap(), c(1.0, 0.0));
        let ev = law.at(3.0).eigenvalues();
        let near_plus = ev.iter().filter(|z| (*z - c(3.0, 0.0)).norm() < 1.0).count();
        let near_minus = ev.iter().filter(|z| (*z - c(-3.0, 0.0)).norm() < 1.0).count();
        assert_eq!(near_plus, 5);
        assert_eq!(near_minus, 5);
    }

    #[test]
    fn reconstruct_examples() {
        let id = ComplexMatrix::identity(2);
        let m = reconstruct_matrix(&[c(1.0, 0.0), c(2.0, 0.0)], &id).unwrap();
        assert_eq!(m, ComplexMatrix::from_diag(&[c(1.0, 0.0), c(2.0, 0.0)]));
        let m = reconstruct_matrix(&[c(0.0, 0.0), c(0.0, 0.0)], &id).unwrap();
        assert_eq!(m, ComplexMatrix::zeros(2));
    }

    #[test]
    fn reconstruct_gives_expected_characteristic_polynomial() {
        let q = sample_ginibre(2, 1.0, 21).unwrap();
        let (l1, l2) = (c(1.0, 1.0), c(3.0, 0.0));
        let m = reconstruct_matrix(&[l1, l2], &q).unwrap();
        // (λ − l1)(λ − l2) = λ² − (l1 + l2)λ + l1·l2
        assert!((m.trace() - (l1 + l2)).norm() < 1e-10);
        assert!((m.det() - l1 * l2).norm() < 1e-10);
    }

    #[test]
    fn reconstruct_rejects_bad_conjugator() {
        let singular = ComplexMatrix::from_2x2(c(1.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(1.0, 0.0));
        assert!(matches!(
            reconstruct_matrix(&[c(1.0, 0.0), c(2.0, 0.0)], &singular),
            Err(Error::IllConditioned { .. })
        ));
        let nearly = ComplexMatrix::from_2x2(c(1.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(1.0 + 1e-10, 0.0));
        assert!(matches!(
            reconstruct_matrix(&[c(1.0, 0.0), c(2.0, 0.0)], &nearly),
            Err(Error::IllConditioned { .. })
        ));
        assert!(reconstruct_matrix_with_cap(&[c(1.0, 0.0), c(2.0, 0.0)], &nearly, 1e12).is_ok());
        assert!(reconstruct_matrix(&[c(1.0, 0.0)], &ComplexMatrix::identity(2)).is_err());
    }

    #[test]
    fn cycle_fixed_point() {
        let m0 = sample_ginibre(2, 1.0, 5).unwrap();
        let m1 = evolve_2x2_cycle(&m0, m0.trace(), m0.det(), 1e-3).unwrap();
        assert!((&m1 - &m0).max_abs() < 1e-14);
    }

    #[test]
    fn cycle_hits_targets_exactly() {
        let m0 = ComplexMatrix::from_diag(&[c(1.0, 0.0), c(2.0, 0.0)]);
        let eps = 1e-3;
        let m1 = evolve_2x2_cycle(&m0, c(3.0 + eps, 0.0), c(2.0, 0.0), eps).unwrap();
        assert!((m1.trace() - c(3.0 + eps, 0.0)).norm() < 1e-12);
        assert!((m1.det() - c(2.0, 0.0)).norm() < 1e-12);
        assert!((&m1 - &m0).max_abs() < 10.0 * eps);
    }

    #[test]
    fn cycle_reproduces_first_order_translation_example() {
        // Ψ → (1 − i·δt·(∂x + ∂y))Ψ shifts the characteristic polynomial to
        // λ² − [a + d − 2δt(1 − i)]λ + (ad − bc) − δt(1 − i)(a + d),
        // which is generated to first order by M − (1 − i)·δt·I.
        let m0 = sample_ginibre(2, 1.0, 77).unwrap();
        let w = c(1.0, -1.0);
        for dt in [1e-2, 1e-3, 1e-4] {
            let k1 = m0.trace() - w * 2.0 * dt;
            let k2 = m0.det() - w * dt * m0.trace();
            let m1 = evolve_2x2_cycle(&m0, k1, k2, dt).unwrap();
            assert!((m1.trace() - k1).norm() < 1e-12);
            assert!((m1.det() - k2).norm() < 1e-12);
            let gauge = &m0 - &ComplexMatrix::identity(2).scale(w * dt);
            let gap = (&m1 - &gauge).max_abs();
            assert!(gap < 50.0 * dt * dt, "dt={dt} gap={gap}");
        }
    }

    #[test]
    fn cycle_rejects_large_jumps() {
        let m0 = sample_ginibre(2, 1.0, 5).unwrap();
        let err = evolve_2x2_cycle(&m0, m0.trace() + c(5.0, 0.0), m0.det(), 1e-6);
        assert!(matches!(err, Err(Error::StepTooLarge(_))));
        let id = ComplexMatrix::identity(2);
        // Splitting a double eigenvalue by δ needs entries of order √δ.
        let err = evolve_2x2_cycle(&id, c(2.0, 0.0), c(1.0 - 1e-8, 0.0), 1e-8);
        assert!(matches!(err, Err(Error::StepTooLarge(_))));
        assert!(evolve_2x2_cycle(&ComplexMatrix::identity(3), c(0.0, 0.0), c(0.0, 0.0), 1.0).is_err());
    }
}
