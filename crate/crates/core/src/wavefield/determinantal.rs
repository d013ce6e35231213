use serde::{Deserialize, Serialize};

use super::{Jet, PhaseField};
use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, EvolutionLaw, C64};

/// Below this pivot ratio the derivatives switch from `Ψ·A⁻¹` to principal minors.
const PIVOT_RATIO_MIN: f64 = 1e-8;

/// `Ψ_{N,2ξ−N}(x, y; t) = det(M(t) − Λ_ξ)` with `Λ_ξ = diag(λ ×ξ, λ* ×(N−ξ))`, `λ = x + iy`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WaveField {
    pub law: EvolutionLaw,
    pub xi: usize,
}

impl WaveField {
    pub fn new(law: EvolutionLaw, xi: usize) -> Result<Self> {
        if xi > law.n() {
            return Err(Error::InvalidArgument(format!("xi = {xi} exceeds n = {}", law.n())));
        }
        Ok(WaveField { law, xi })
    }

    pub fn n(&self) -> usize {
        self.law.n()
    }

    /// Net winding label `w = 2ξ − N`.
    pub fn winding_label(&self) -> i64 {
        2 * self.xi as i64 - self.n() as i64
    }

    /// `+1` for `λ` slots, `−1` for `λ*` slots.
    fn slot_sign(&self, j: usize) -> f64 {
        if j < self.xi {
            1.0
        } else {
            -1.0
        }
    }

    /// `A = M(t) − Λ_ξ(x, y)`.
    pub fn shifted_matrix(&self, x: f64, y: f64, t: f64) -> ComplexMatrix {
        let mut a = self.law.at(t);
        for j in 0..self.n() {
            a[(j, j)] -= C64::new(x, self.slot_sign(j) * y);
        }
        a
    }

    /// Derivatives by Jacobi's formula. With `∂A/∂x = −I`, `∂A/∂y = −i·diag(ε)`
    /// and `B = A⁻¹`: `Ψ_a = Ψ·tr(B·A_a)` and
    /// `Ψ_ab = Ψ·[tr(B·A_a)·tr(B·A_b) − tr(B·A_a·B·A_b)]` (`A` is affine in x, y).
    /// Near singular `A` the same quantities come from principal minors:
    /// `Ψ_a = Σ_j (A_a)_jj·m_j`, `Ψ_ab = Σ_{j≠k} (A_a)_jj·(A_b)_kk·m_jk`.
    fn jet_order(&self, x: f64, y: f64, t: f64, second: bool) -> Jet {
        let n = self.n();
        let a = self.shifted_matrix(x, y, t);
        let lu = a.lu();
        let psi = lu.det();
        let zero = C64::new(0.0, 0.0);
        let i = C64::new(0.0, 1.0);
        let eps: Vec<f64> = (0..n).map(|j| self.slot_sign(j)).collect();
        let mut jet = Jet {
            psi,
            dx: zero,
            dy: zero,
            dxx: zero,
            dxy: zero,
            dyy: zero,
        };
        if lu.pivot_ratio() > PIVOT_RATIO_MIN {
            let b = lu.inverse().expect("nonsingular by pivot check");
            let tx: C64 = -(0..n).map(|j| b[(j, j)]).sum::<C64>();
            let ty: C64 = -i * (0..n).map(|j| b[(j, j)] * eps[j]).sum::<C64>();
            jet.dx = psi * tx;
            jet.dy = psi * ty;
            if second {
                let (mut sxx, mut sxy, mut syy) = (zero, zero, zero);
                for j in 0..n {
                    for k in 0..n {
                        let p = b[(j, k)] * b[(k, j)];
                        sxx += p;
                        sxy += p * eps[k];
                        syy += p * (eps[j] * eps[k]);
                    }
                }
                jet.dxx = psi * (tx * tx - sxx);
                jet.dxy = psi * (tx * ty - i * sxy);
                jet.dyy = psi * (ty * ty + syy);
            }
        } else {
            for j in 0..n {
                let m = a.principal_submatrix(&[j]).det();
                jet.dx -= m;
                jet.dy -= i * m * eps[j];
            }
            if second {
                for j in 0..n {
                    for k in (j + 1)..n {
                        let m = a.principal_submatrix(&[j, k]).det();
                        // symmetric pair (j, k) and (k, j)
                        jet.dxx += m * 2.0;
                        jet.dxy += i * m * (eps[j] + eps[k]);
                        jet.dyy -= m * (2.0 * eps[j] * eps[k]);
                    }
                }
            }
        }
        jet
    }

    /// Closed-form line–circle intersection for `n = 2`, `ξ = 1`.
    fn zeros_2x2(&self, t: f64) -> Result<Vec<[f64; 2]>> {
        let m = self.law.at(t);
        let (a, b, c, d) = (m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]);
        let delta = a - d.conj();
        let q = a * d - b * c;
        let center = [(a.re + d.re) / 2.0, (a.im - d.im) / 2.0];
        let r2 = center[0] * center[0] + center[1] * center[1] - q.re;
        // Imaginary part: −Im(δ)·x + Re(δ)·y + Im(q) = 0.
        let nrm = delta.norm();
        let scale = 1.0 + a.norm() + d.norm() + q.norm();
        if nrm <= 1e-14 * scale {
            if q.im.abs() <= 1e-14 * scale && r2 >= 0.0 {
                return Err(Error::DegenerateZeroSet(
                    "imaginary part vanishes identically; zero set is a curve".into(),
                ));
            }
            return Ok(Vec::new());
        }
        let nx = -delta.im / nrm;
        let ny = delta.re / nrm;
        let dist = (nx * center[0] + ny * center[1]) + q.im / nrm;
        let h2 = r2 - dist * dist;
        if h2 < 0.0 {
            return Ok(Vec::new());
        }
        let foot = [center[0] - nx * dist, center[1] - ny * dist];
        let h = h2.sqrt();
        let (tx, ty) = (ny, -nx);
        Ok(vec![[foot[0] + h * tx, foot[1] + h * ty], [foot[0] - h * tx, foot[1] - h * ty]])
    }
}

impl PhaseField for WaveField {
    fn psi(&self, x: f64, y: f64, t: f64) -> C64 {
        self.shifted_matrix(x, y, t).det()
    }

    fn jet(&self, x: f64, y: f64, t: f64) -> Jet {
        self.jet_order(x, y, t, true)
    }

    fn jet1(&self, x: f64, y: f64, t: f64) -> Jet {
        self.jet_order(x, y, t, false)
    }

    fn closed_form_zeros(&self, t: f64) -> Option<Result<Vec<[f64; 2]>>> {
        if self.n() == 2 && self.xi == 1 {
            Some(self.zeros_2x2(t))
        } else {
            None
        }
    }

    fn max_zeros(&self) -> Option<usize> {
        if self.xi == 0 || self.xi == self.n() {
            Some(self.n())
        } else {
            None
        }
    }
}

/// `Ψ(x, y; t)` by LU with partial pivoting.
pub fn eval(field: &WaveField, x: f64, y: f64, t: f64) -> C64 {
    field.psi(x, y, t)
}

/// `Im(Ψ*·∂Ψ/∂x, Ψ*·∂Ψ/∂y)` with analytic partials.
pub fn eval_grad_num(field: &WaveField, x: f64, y: f64, t: f64) -> [f64; 2] {
    field.jet1(x, y, t).grad_num()
}

/// Real coefficients of the 2×2, ξ = 1 field `Ψ = |λ|² − a·λ* − d·λ + ad − bc`.
///
/// `quadratic` holds `Re Ψ` as `[x², xy, y², x, y, 1]`; `linear` holds `Im Ψ` as `[y, x, 1]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Coeffs2x2 {
    pub quadratic: [f64; 6],
    pub linear: [f64; 3],
}

impl Coeffs2x2 {
    pub fn eval(&self, x: f64, y: f64) -> C64 {
        let q = &self.quadratic;
        let l = &self.linear;
        C64::new(
            q[0] * x * x + q[1] * x * y + q[2] * y * y + q[3] * x + q[4] * y + q[5],
            l[0] * y + l[1] * x + l[2],
        )
    }
}

pub fn coeffs_2x2(field: &WaveField, t: f64) -> Result<Coeffs2x2> {
    if field.n() != 2 || field.xi != 1 {
        return Err(Error::InvalidArgument(format!(
            "coeffs_2x2 needs n = 2, xi = 1 (got n = {}, xi = {})",
            field.n(),
            field.xi
        )));
    }
    let m = field.law.at(t);
    let (a, b, c, d) = (m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]);
    let q = a * d - b * c;
    Ok(Coeffs2x2 {
        quadratic: [1.0, 0.0, 1.0, -(a.re + d.re), d.im - a.im, q.re],
        linear: [a.re - d.re, -(a.im + d.im), q.im],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{sample_ginibre, ComplexMatrix};
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn field(n: usize, xi: usize, seed: u64) -> WaveField {
        let law = EvolutionLaw::new(sample_ginibre(n, 0.7, seed).unwrap(), c(0.8, 0.3));
        WaveField::new(law, xi).unwrap()
    }

    #[test]
    fn rejects_xi_above_n() {
        let law = EvolutionLaw::new(ComplexMatrix::zeros(2), c(1.0, 0.0));
        assert!(WaveField::new(law, 3).is_err());
    }

    #[test]
    fn zero_base_matrix_vanishes_at_shifted_eigenvalue() {
        let law = EvolutionLaw::new(ComplexMatrix::zeros(2), c(1.0, 0.0));
        let f = WaveField::new(law, 2).unwrap();
        assert_eq!(eval(&f, 1.0, 0.0, 1.0), c(0.0, 0.0));
    }

    #[test]
    fn two_by_two_mixed_field_matches_closed_expression() {
        let f = field(2, 1, 3);
        let m = f.law.m0.clone();
        let (a, b, cc, d) = (m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]);
        for &(x, y) in &[(0.3, -0.2), (1.5, 2.0), (-0.7, 0.1)] {
            let l = c(x, y);
            let expect = l.norm_sqr() - a * l.conj() - d * l + a * d - b * cc;
            assert!((eval(&f, x, y, 0.0) - expect).norm() < 1e-13);
        }
    }

    #[test]
    fn zero_base_even_n_is_product_of_shifted_powers() {
        // M₀ = 0, ξ = N: Ψ = (λ − st)^{N/2}(λ + st)^{N/2}
        let s = c(0.6, -0.4);
        let law = EvolutionLaw::new(ComplexMatrix::zeros(4), s);
        let f = WaveField::new(law, 4).unwrap();
        let t = 0.9;
        for &(x, y) in &[(0.1, 0.2), (-1.0, 0.5), (2.0, -1.0)] {
            let l = c(x, y);
            let expect = (l - s * t).powi(2) * (l + s * t).powi(2);
            assert!((eval(&f, x, y, t) - expect).norm() < 1e-12 * expect.norm().max(1.0));
        }
    }

    #[test]
    fn half_filled_determinant_is_invariant_under_slot_swap() {
        // Swapping the first and last rows and columns exchanges one λ slot
        // with one λ* slot; the determinant is unchanged.
        let f = field(4, 2, 17);
        let mut swapped = f.law.m0.clone();
        let n = 4;
        let perm = [3, 1, 2, 0];
        for i in 0..n {
            for j in 0..n {
                swapped[(i, j)] = f.law.m0[(perm[i], perm[j])];
            }
        }
        let (x, y) = (0.4, -0.3);
        let mut a = swapped.clone();
        let slots = [C64::new(x, -y), C64::new(x, y), C64::new(x, -y), C64::new(x, y)];
        for j in 0..n {
            a[(j, j)] -= slots[j];
        }
        assert!((a.det() - eval(&f, x, y, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn grad_num_vanishes_at_zero() {
        let law = EvolutionLaw::new(ComplexMatrix::from_diag(&[c(1.0, 0.5), c(-1.0, 0.0)]), c(0.0, 0.0));
        let f = WaveField::new(law, 2).unwrap();
        assert_eq!(eval_grad_num(&f, 1.0, 0.5, 0.0), [0.0, 0.0]);
    }

    #[test]
    fn jet_matches_finite_differences() {
        for (n, xi, seed) in [(2, 1, 1), (3, 0, 2), (4, 2, 3), (5, 3, 4), (6, 6, 5), (8, 5, 6)] {
            let f = field(n, xi, seed);
            let (x, y, t) = (0.23, -0.41, 0.3);
            let j = f.jet(x, y, t);
            let h = 1e-5;
            let fd = |g: &dyn Fn(f64, f64) -> C64| {
                (
                    (g(x + h, y) - g(x - h, y)) / (2.0 * h),
                    (g(x, y + h) - g(x, y - h)) / (2.0 * h),
                )
            };
            let (px, py) = fd(&|a, b| f.psi(a, b, t));
            let (dxx, dxy) = fd(&|a, b| f.jet1(a, b, t).dx);
            let (_, dyy) = fd(&|a, b| f.jet1(a, b, t).dy);
            let tol = |v: C64| 1e-6 * v.norm().max(1.0);
            assert!((j.dx - px).norm() < tol(px), "n={n} dx");
            assert!((j.dy - py).norm() < tol(py), "n={n} dy");
            assert!((j.dxx - dxx).norm() < tol(dxx), "n={n} dxx");
            assert!((j.dxy - dxy).norm() < tol(dxy), "n={n} dxy");
            assert!((j.dyy - dyy).norm() < tol(dyy), "n={n} dyy");
        }
    }

    #[test]
    fn minor_path_agrees_with_inverse_path() {
        // Evaluate exactly at an eigenvalue of a ξ=N field so A is singular.
        let law = EvolutionLaw::new(
            ComplexMatrix::from_rows(&[
                vec![c(1.0, 0.0), c(2.0, 1.0), c(0.0, 0.0)],
                vec![c(0.0, 0.0), c(-1.0, 0.5), c(3.0, 0.0)],
                vec![c(0.0, 0.0), c(0.0, 0.0), c(0.5, -2.0)],
            ])
            .unwrap(),
            c(0.0, 0.0),
        );
        let f = WaveField::new(law, 3).unwrap();
        let singular = f.jet(1.0, 0.0, 0.0);
        assert_eq!(singular.psi, c(0.0, 0.0));
        let h = 1e-7;
        let near = f.jet(1.0 + h, 0.0, 0.0);
        assert!((singular.dx - near.dx).norm() < 1e-5);
        assert!((singular.dy - near.dy).norm() < 1e-5);
        assert!((singular.dxx - near.dxx).norm() < 1e-5);
        assert!((singular.dxy - near.dxy).norm() < 1e-5);
        assert!((singular.dyy - near.dyy).norm() < 1e-5);
        // Holomorphic field: Ψ_y = i·Ψ_x.
        assert!((singular.dy - singular.dx * c(0.0, 1.0)).norm() < 1e-12);
    }

    #[test]
    fn coeffs_golden_matrix() {
        let m0 = ComplexMatrix::from_2x2(c(1.0, 0.0), c(-2.0, 0.0), c(1.0, 0.0), c(2.0, 0.0));
        let f = WaveField::new(EvolutionLaw::new(m0, c(1.0, 0.0)), 1).unwrap();
        let k = coeffs_2x2(&f, 0.0).unwrap();
        assert_eq!(k.quadratic, [1.0, 0.0, 1.0, -3.0, 0.0, 4.0]);
        assert_eq!(k.linear, [-1.0, 0.0, 0.0]);
        // y = 0 forces x² − 3x + 4 = 0, whose roots (3 ± i√7)/2 are complex.
        assert_eq!(f.closed_form_zeros(0.0).unwrap().unwrap(), Vec::<[f64; 2]>::new());
    }

    #[test]
    fn coeffs_diagonal_matrix_gives_real_axis_zeros() {
        let m0 = ComplexMatrix::from_diag(&[c(1.0, 0.0), c(2.0, 0.0)]);
        let f = WaveField::new(EvolutionLaw::new(m0, c(1.0, 0.0)), 1).unwrap();
        let k = coeffs_2x2(&f, 0.0).unwrap();
        assert_eq!(k.linear, [-1.0, 0.0, 0.0]);
        assert_eq!(k.quadratic, [1.0, 0.0, 1.0, -3.0, 0.0, 2.0]);
        let mut z = f.closed_form_zeros(0.0).unwrap().unwrap();
        z.sort_by(|a, b| a[0].partial_cmp(&b[0]).unwrap());
        assert!((z[0][0] - 1.0).abs() < 1e-15 && z[0][1].abs() < 1e-15);
        assert!((z[1][0] - 2.0).abs() < 1e-15 && z[1][1].abs() < 1e-15);
    }

    #[test]
    fn coeffs_reject_wrong_shape() {
        assert!(coeffs_2x2(&field(3, 1, 1), 0.0).is_err());
        assert!(coeffs_2x2(&field(2, 2, 1), 0.0).is_err());
    }

    #[test]
    fn degenerate_two_by_two_zero_set_is_reported() {
        // a = conj(d) and Im(ad − bc) = 0: Im Ψ ≡ 0, zero set is a circle.
        let m0 = ComplexMatrix::from_2x2(c(0.0, 1.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, -1.0));
        let f = WaveField::new(EvolutionLaw::new(m0, c(0.0, 0.0)), 1).unwrap();
        assert!(matches!(f.closed_form_zeros(0.0), Some(Err(Error::DegenerateZeroSet(_)))));
    }

    proptest! {
        #[test]
        fn coeffs_expansion_matches_eval(seed in 0u64..10_000, x in -3.0f64..3.0, y in -3.0f64..3.0, t in -2.0f64..2.0) {
            let f = field(2, 1, seed);
            let k = coeffs_2x2(&f, t).unwrap();
            let v = eval(&f, x, y, t);
            prop_assert!((k.eval(x, y) - v).norm() < 1e-12 * (1.0 + v.norm()));
        }

        #[test]
        fn closed_form_zeros_vanish(seed in 0u64..10_000, t in -2.0f64..2.0) {
            let f = field(2, 1, seed);
            for z in f.closed_form_zeros(t).unwrap().unwrap() {
                prop_assert!(f.psi(z[0], z[1], t).norm() < 1e-10);
            }
        }

        #[test]
        fn continuity_against_gradient(seed in 0u64..10_000, x in -2.0f64..2.0, y in -2.0f64..2.0) {
            let f = field(4, 3, seed);
            let h = 1e-8;
            let j = f.jet1(x, y, 0.2);
            let moved = f.psi(x + h, y - h, 0.2);
            let predicted = j.psi + (j.dx - j.dy) * h;
            prop_assert!((moved - predicted).norm() < 1e-10 * (1.0 + j.psi.norm()));
        }
    }
}
