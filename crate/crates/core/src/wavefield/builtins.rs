//! Analytic example fields.

use serde::{Deserialize, Serialize};

use super::{Jet, PhaseField};
use crate::linalg::C64;

/// Vacuum-bubble field `Ψ = (x + iy − X₀)(x − iy + X₀)(1 − i(x + y))`, `X₀ = √(T² − t²)`.
///
/// For `|t| < T` it has a vortex at `(X₀, 0)`, an anti-vortex at `(−X₀, 0)` and
/// two phase saddles; all four are created together at the origin at `t = −T`
/// and annihilate there at `t = T`. Expanded, the nodal factor is
/// `x² + y² + 2iy·X₀ − X₀²`; for `|t| > T` it is continued as
/// `x² + y² + (t² − T²)`, which has no zeros, leaving the flat tilted phase of
/// the last factor.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bubble {
    #[serde(rename = "T")]
    pub t_half: f64,
}

/// Bubble field with nucleation at `t = −T` and annihilation at `t = T`.
pub fn builtin_bubble(t_half: f64) -> Bubble {
    Bubble { t_half }
}

impl Bubble {
    fn x0(&self, t: f64) -> f64 {
        (self.t_half * self.t_half - t * t).max(0.0).sqrt()
    }
}

impl PhaseField for Bubble {
    fn psi(&self, x: f64, y: f64, t: f64) -> C64 {
        self.jet(x, y, t).psi
    }

    fn jet(&self, x: f64, y: f64, t: f64) -> Jet {
        let x0 = self.x0(t);
        let i = C64::new(0.0, 1.0);
        let p = C64::new(x * x + y * y - (self.t_half * self.t_half - t * t), 2.0 * y * x0);
        let px = C64::new(2.0 * x, 0.0);
        let py = C64::new(2.0 * y, 2.0 * x0);
        let pxx = C64::new(2.0, 0.0);
        let pyy = C64::new(2.0, 0.0);
        let l = C64::new(1.0, -(x + y));
        let ld = -i;
        Jet {
            psi: p * l,
            dx: px * l + p * ld,
            dy: py * l + p * ld,
            dxx: pxx * l + px * ld * 2.0,
            dxy: px * ld + py * ld,
            dyy: pyy * l + py * ld * 2.0,
        }
    }

    fn closed_form_zeros(&self, t: f64) -> Option<crate::Result<Vec<[f64; 2]>>> {
        let x0 = self.x0(t);
        Some(Ok(if t.abs() > self.t_half {
            Vec::new()
        } else if x0 == 0.0 {
            vec![[0.0, 0.0]]
        } else {
            vec![[x0, 0.0], [-x0, 0.0]]
        }))
    }

    fn max_zeros(&self) -> Option<usize> {
        Some(2)
    }
}

/// Pure phase surface `Ψ = exp(i(εx − y² − x³))` with `ε = eps + eps_rate·t`.
///
/// For `ε > 0` the phase has a maximum at `(√(ε/3), 0)` and a saddle at
/// `(−√(ε/3), 0)`; they merge and vanish at `ε = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseSurface {
    pub eps: f64,
    pub eps_rate: f64,
}

impl PhaseSurface {
    pub fn fixed(eps: f64) -> Self {
        PhaseSurface { eps, eps_rate: 0.0 }
    }

    /// `ε = t`.
    pub fn swept() -> Self {
        PhaseSurface { eps: 0.0, eps_rate: 1.0 }
    }

    pub fn eps_at(&self, t: f64) -> f64 {
        self.eps + self.eps_rate * t
    }
}

impl PhaseField for PhaseSurface {
    fn psi(&self, x: f64, y: f64, t: f64) -> C64 {
        let theta = self.eps_at(t) * x - y * y - x * x * x;
        C64::new(theta.cos(), theta.sin())
    }

    fn jet(&self, x: f64, y: f64, t: f64) -> Jet {
        let e = self.eps_at(t);
        let psi = self.psi(x, y, t);
        let i = C64::new(0.0, 1.0);
        let tx = e - 3.0 * x * x;
        let ty = -2.0 * y;
        Jet {
            psi,
            dx: i * tx * psi,
            dy: i * ty * psi,
            dxx: (i * (-6.0 * x) - tx * tx) * psi,
            dxy: -(tx * ty) * psi,
            dyy: (i * -2.0 - ty * ty) * psi,
        }
    }

    fn closed_form_zeros(&self, _t: f64) -> Option<crate::Result<Vec<[f64; 2]>>> {
        Some(Ok(Vec::new()))
    }

    fn max_zeros(&self) -> Option<usize> {
        Some(0)
    }
}

/// Line–ellipse field `Ψ = (y − ε) + i(x² + (y − 1)² − 1)` with `ε = eps + eps_rate·t`.
///
/// For `0 < ε < 2` the line meets the circle at `(±√(2ε − ε²), ε)`, a
/// vortex–anti-vortex pair. For `ε < 0` there are no zeros and the phase has a
/// minimum at `(0, ε + √(ε² − 2ε))` and a maximum at `(0, ε − √(ε² − 2ε))`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LineEllipse {
    pub eps: f64,
    pub eps_rate: f64,
}

impl LineEllipse {
    pub fn fixed(eps: f64) -> Self {
        LineEllipse { eps, eps_rate: 0.0 }
    }

    /// `ε = t`.
    pub fn swept() -> Self {
        LineEllipse { eps: 0.0, eps_rate: 1.0 }
    }

    pub fn eps_at(&self, t: f64) -> f64 {
        self.eps + self.eps_rate * t
    }
}

impl PhaseField for LineEllipse {
    fn psi(&self, x: f64, y: f64, t: f64) -> C64 {
        C64::new(y - self.eps_at(t), x * x + (y - 1.0) * (y - 1.0) - 1.0)
    }

    fn jet(&self, x: f64, y: f64, t: f64) -> Jet {
        Jet {
            psi: self.psi(x, y, t),
            dx: C64::new(0.0, 2.0 * x),
            dy: C64::new(1.0, 2.0 * (y - 1.0)),
            dxx: C64::new(0.0, 2.0),
            dxy: C64::new(0.0, 0.0),
            dyy: C64::new(0.0, 2.0),
        }
    }

    fn closed_form_zeros(&self, t: f64) -> Option<crate::Result<Vec<[f64; 2]>>> {
        let e = self.eps_at(t);
        let r2 = 2.0 * e - e * e;
        Some(Ok(if r2 < 0.0 {
            Vec::new()
        } else if r2 == 0.0 {
            vec![[0.0, e]]
        } else {
            vec![[r2.sqrt(), e], [-r2.sqrt(), e]]
        }))
    }

    fn max_zeros(&self) -> Option<usize> {
        Some(2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check_jet_fd<F: PhaseField>(f: &F, x: f64, y: f64, t: f64) {
        let j = f.jet(x, y, t);
        let h = 1e-6;
        let d = |g: &dyn Fn(f64, f64) -> C64, ax: f64, ay: f64| {
            (g(x + h * ax, y + h * ay) - g(x - h * ax, y - h * ay)) / (2.0 * h)
        };
        let psi = |a, b| f.psi(a, b, t);
        let dx = |a, b| f.jet(a, b, t).dx;
        let dy = |a, b| f.jet(a, b, t).dy;
        let tol = 1e-6;
        assert!((j.dx - d(&psi, 1.0, 0.0)).norm() < tol);
        assert!((j.dy - d(&psi, 0.0, 1.0)).norm() < tol);
        assert!((j.dxx - d(&dx, 1.0, 0.0)).norm() < tol);
        assert!((j.dxy - d(&dx, 0.0, 1.0)).norm() < tol);
        assert!((j.dyy - d(&dy, 0.0, 1.0)).norm() < tol);
    }

    #[test]
    fn jets_match_finite_differences() {
        for t in [-1.3, -0.4, 0.0, 0.8, 1.2] {
            check_jet_fd(&builtin_bubble(1.0), 0.3, -0.7, t);
            check_jet_fd(&PhaseSurface::swept(), 0.4, 0.2, t);
            check_jet_fd(&LineEllipse::swept(), -0.5, 0.9, t);
        }
    }

    #[test]
    fn bubble_zeros() {
        let b = builtin_bubble(1.0);
        assert_eq!(b.psi(1.0, 0.0, 0.0), C64::new(0.0, 0.0));
        assert_eq!(b.psi(-1.0, 0.0, 0.0), C64::new(0.0, 0.0));
        assert_eq!(b.psi(0.0, 0.0, 1.0), C64::new(0.0, 0.0));
        assert_eq!(b.psi(0.0, 0.0, -1.0), C64::new(0.0, 0.0));
        // Double zero at the creation instant: Ψ and ∇Ψ vanish together.
        let j = b.jet(0.0, 0.0, -1.0);
        assert_eq!(j.dx, C64::new(0.0, 0.0));
        assert_eq!(j.dy, C64::new(0.0, 0.0));
    }

    #[test]
    fn bubble_has_no_zeros_outside_lifetime() {
        let b = builtin_bubble(1.0);
        let mut min = f64::INFINITY;
        for i in 0..=200 {
            for k in 0..=200 {
                let x = -2.0 + 4.0 * i as f64 / 200.0;
                let y = -2.0 + 4.0 * k as f64 / 200.0;
                min = min.min(b.psi(x, y, 1.1).norm());
            }
        }
        // |Ψ| ≥ (t² − T²)·|1 − i(x+y)| ≥ 0.21 everywhere for t = 1.1
        assert!(min >= 0.2, "{min}");
    }

    #[test]
    fn line_ellipse_zeros_solve_field() {
        for e in [0.1, 0.5, 1.0, 1.7] {
            let f = LineEllipse::fixed(e);
            for z in f.closed_form_zeros(0.0).unwrap().unwrap() {
                assert!(f.psi(z[0], z[1], 0.0).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn phase_surface_has_unit_modulus() {
        let f = PhaseSurface::fixed(0.3);
        assert!((f.psi(0.7, -1.1, 0.0).norm() - 1.0).abs() < 1e-15);
    }
}
