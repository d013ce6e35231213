//! Roots of the 2×2 determinant with `λ` promoted to a quaternion.
//!
//! With `λ_q = x + iy + jz + kw` and `λ̂_q = x − iy + jz − kw`, the field
//! `(a − λ_q)(d − λ̂_q) − bc` has four real components. For `z = w = 0` they
//! reduce to `(Re Ψ, Im Ψ, 0, 0)`, so plane zeros are the `z = w = 0` roots.
//! When the plane zeros disappear, a pair of roots with `(z, w)` and
//! `(−z, −w)` takes their place.

use serde::{Deserialize, Serialize};

use super::newton::{self, Outcome};
use super::RootOptions;
use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, Quaternion, C64};

/// Box `[lo, hi]` in `(x, y, z, w)` with `density` seeds per axis.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Window4 {
    pub lo: [f64; 4],
    pub hi: [f64; 4],
    pub density: usize,
}

impl Window4 {
    pub fn cube(half: f64, density: usize) -> Self {
        Window4 {
            lo: [-half; 4],
            hi: [half; 4],
            density,
        }
    }

    /// `[−L, L]⁴` with `L = 3σ√N + |s·t| + 1` and 12 seeds per axis.
    pub fn default_for(sigma: f64, n: usize, s: C64, t: f64) -> Self {
        Self::cube(3.0 * sigma * (n as f64).sqrt() + (s * t).norm() + 1.0, 12)
    }

    pub fn validate(&self) -> Result<()> {
        for k in 0..4 {
            if !self.lo[k].is_finite() || !self.hi[k].is_finite() || !(self.lo[k] < self.hi[k]) {
                return Err(Error::InvalidArgument(format!("degenerate 4D window {self:?}")));
            }
        }
        if self.density < 2 {
            return Err(Error::InvalidArgument("4D seed density must be at least 2".into()));
        }
        Ok(())
    }

    pub fn contains(&self, p: &[f64; 4]) -> bool {
        (0..4).all(|k| p[k] >= self.lo[k] && p[k] <= self.hi[k])
    }

    pub fn seeds(&self) -> Vec<[f64; 4]> {
        let d = self.density;
        let h: [f64; 4] = std::array::from_fn(|k| (self.hi[k] - self.lo[k]) / d as f64);
        let mut out = Vec::with_capacity(d.pow(4));
        for a in 0..d {
            for b in 0..d {
                for c in 0..d {
                    for e in 0..d {
                        let idx = [a, b, c, e];
                        out.push(std::array::from_fn(|k| self.lo[k] + (idx[k] as f64 + 0.5) * h[k]));
                    }
                }
            }
        }
        out
    }
}

/// A root `(x, y, z, w)`; `z = w = 0` exactly for plane zeros.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuaternionRoot {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub w: f64,
    /// Max of the four component residuals.
    pub residual: f64,
}

impl QuaternionRoot {
    pub fn is_planar(&self) -> bool {
        self.z == 0.0 && self.w == 0.0
    }

    /// The `(x, y, −z, −w)` partner.
    pub fn partner(&self) -> QuaternionRoot {
        QuaternionRoot {
            z: -self.z,
            w: -self.w,
            ..*self
        }
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.x, self.y, self.z, self.w]
    }
}

fn entries(m: &ComplexMatrix) -> (C64, C64, C64, C64) {
    (m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)])
}

/// The real, i, j and k components of `(a − λ_q)(d − λ̂_q) − bc`, expanded.
pub fn quaternion_components(m: &ComplexMatrix, p: [f64; 4]) -> [f64; 4] {
    let (a, b, c, d) = entries(m);
    let q = a * d - b * c;
    let [x, y, z, w] = p;
    [
        q.re + x * x + y * y - z * z + w * w - a.re * x - a.im * y - d.re * x + d.im * y,
        q.im - 2.0 * w * z - a.im * x + a.re * y - d.im * x - d.re * y,
        2.0 * x * z - a.re * z - a.im * w - d.re * z - d.im * w,
        2.0 * y * z - a.im * z + a.re * w + d.im * z - d.re * w,
    ]
}

/// Partial derivatives of [`quaternion_components`]; row = component, column = `(x, y, z, w)`.
pub fn quaternion_jacobian(m: &ComplexMatrix, p: [f64; 4]) -> [[f64; 4]; 4] {
    let (a, _, _, d) = entries(m);
    let [x, y, z, w] = p;
    let sr = a.re + d.re;
    let si = a.im + d.im;
    let dr = a.re - d.re;
    let di = a.im - d.im;
    [
        [2.0 * x - sr, 2.0 * y - di, -2.0 * z, 2.0 * w],
        [-si, dr, -2.0 * w, -2.0 * z],
        [2.0 * z, 0.0, 2.0 * x - sr, -si],
        [0.0, 2.0 * z, 2.0 * y - di, dr],
    ]
}

/// `(a − λ_q)(d − λ̂_q) − bc` evaluated with quaternion arithmetic.
pub fn quaternion_det(m: &ComplexMatrix, p: [f64; 4]) -> Quaternion {
    let (a, b, c, d) = entries(m);
    let l = Quaternion::lambda(p[0], p[1], p[2], p[3]);
    let aq = Quaternion::from_complex(a);
    let dq = Quaternion::from_complex(d);
    (aq - l) * (dq - l.hat()) - Quaternion::from_complex(b) * Quaternion::from_complex(c)
}

/// Quaternionic roots with default tolerances.
pub fn find_quaternion_roots(m: &ComplexMatrix, window4: &Window4) -> Result<Vec<QuaternionRoot>> {
    find_quaternion_roots_with(m, window4, &RootOptions::default())
}

/// Newton in ℝ⁴ from the seed grid; roots with `|z|, |w| < zero_tol` are snapped to the plane.
pub fn find_quaternion_roots_with(m: &ComplexMatrix, window4: &Window4, opts: &RootOptions) -> Result<Vec<QuaternionRoot>> {
    if m.n() != 2 {
        return Err(Error::InvalidArgument("quaternionic roots need a 2x2 matrix".into()));
    }
    window4.validate()?;
    let margin: [f64; 4] = std::array::from_fn(|k| 0.5 * (window4.hi[k] - window4.lo[k]));
    let inside = |p: &[f64; 4]| (0..4).all(|k| p[k] >= window4.lo[k] - margin[k] && p[k] <= window4.hi[k] + margin[k]);
    let params = newton::NewtonParams {
        tol: opts.zero_tol,
        max_iter: opts.max_iter,
        cond_max: opts.cond_max,
    };
    let seeds = window4.seeds();
    let outcomes = opts.execution.map(&seeds, |s| {
        newton::run(*s, params, |p| Some((quaternion_components(m, *p), quaternion_jacobian(m, *p))), inside)
    });
    let mut roots: Vec<QuaternionRoot> = outcomes
        .into_iter()
        .filter_map(|o| match o {
            Outcome::Converged { mut p, .. } if window4.contains(&p) => {
                if p[2].abs() < opts.zero_tol && p[3].abs() < opts.zero_tol {
                    p[2] = 0.0;
                    p[3] = 0.0;
                }
                let residual = quaternion_components(m, p).iter().fold(0.0f64, |a, v| a.max(v.abs()));
                Some(QuaternionRoot {
                    x: p[0],
                    y: p[1],
                    z: p[2],
                    w: p[3],
                    residual,
                })
            }
            _ => None,
        })
        .collect();
    roots.sort_by(|a, b| {
        let (pa, pb) = (a.as_array(), b.as_array());
        (0..4).fold(std::cmp::Ordering::Equal, |acc, k| acc.then(pa[k].total_cmp(&pb[k])))
    });
    let mut out: Vec<QuaternionRoot> = Vec::new();
    for r in roots {
        let dup = out.iter_mut().find(|q| {
            let (pa, pb) = (r.as_array(), q.as_array());
            (0..4).all(|k| (pa[k] - pb[k]).abs() <= opts.dedup_tol)
        });
        match dup {
            Some(q) => {
                if r.residual < q.residual {
                    *q = r;
                }
            }
            None => out.push(r),
        }
    }
    Ok(out)
}
