//! Complex scalar fields `Ψ(x, y; t)` over the plane and their phase `Φ = arg Ψ`.
//!
//! [`WaveField`] is the determinantal field `det(M(t) − Λ_ξ)`. The built-in
//! analytic fields live in [`builtins`]. Everything downstream (root finding,
//! classification, tracking) only needs the [`PhaseField`] trait.

pub mod builtins;
mod determinantal;

pub use builtins::{builtin_bubble, Bubble, LineEllipse, PhaseSurface};
pub use determinantal::{coeffs_2x2, eval, eval_grad_num, Coeffs2x2, WaveField};

use serde::{Deserialize, Serialize};

use crate::linalg::C64;

/// Value and partial derivatives of `Ψ` up to second order at one point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet {
    pub psi: C64,
    pub dx: C64,
    pub dy: C64,
    pub dxx: C64,
    pub dxy: C64,
    pub dyy: C64,
}

impl Jet {
    /// `Im(Ψ*·∇Ψ) = |Ψ|²∇Φ`.
    pub fn grad_num(&self) -> [f64; 2] {
        let pc = self.psi.conj();
        [(pc * self.dx).im, (pc * self.dy).im]
    }

    /// `∇Φ = Im(∇Ψ/Ψ)`; infinite at zeros of `Ψ`.
    pub fn phase_gradient(&self) -> [f64; 2] {
        [(self.dx / self.psi).im, (self.dy / self.psi).im]
    }

    /// Hessian of `Φ`: `Im(Ψ_ab/Ψ − Ψ_a·Ψ_b/Ψ²)`.
    pub fn phase_hessian(&self) -> [[f64; 2]; 2] {
        let gx = self.dx / self.psi;
        let gy = self.dy / self.psi;
        let hxx = (self.dxx / self.psi - gx * gx).im;
        let hxy = (self.dxy / self.psi - gx * gy).im;
        let hyy = (self.dyy / self.psi - gy * gy).im;
        [[hxx, hxy], [hxy, hyy]]
    }

    /// Jacobian `∂(Re Ψ, Im Ψ)/∂(x, y)` of the nodal map; positive at vortices.
    pub fn nodal_jacobian(&self) -> f64 {
        self.dx.re * self.dy.im - self.dx.im * self.dy.re
    }

    pub fn sample(&self) -> FieldSample {
        FieldSample {
            psi: self.psi,
            phase: phase_of(self.psi),
            grad_num: self.grad_num(),
        }
    }
}

/// `Ψ` together with its phase and the phase-gradient numerator.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FieldSample {
    pub psi: C64,
    /// `atan2(Im Ψ, Re Ψ)` in `(−π, π]`.
    pub phase: f64,
    pub grad_num: [f64; 2],
}

/// `atan2` phase mapped into `(−π, π]`.
pub fn phase_of(z: C64) -> f64 {
    let p = z.im.atan2(z.re);
    if p == -std::f64::consts::PI {
        std::f64::consts::PI
    } else {
        p
    }
}

/// A smooth complex field over the plane with a time parameter.
pub trait PhaseField: Send + Sync {
    fn psi(&self, x: f64, y: f64, t: f64) -> C64;

    /// Value with first and second partial derivatives.
    fn jet(&self, x: f64, y: f64, t: f64) -> Jet;

    /// Value with first derivatives; the second-order slots may be left zero.
    fn jet1(&self, x: f64, y: f64, t: f64) -> Jet {
        self.jet(x, y, t)
    }

    /// Plane zeros in closed form, for fields that have one.
    fn closed_form_zeros(&self, _t: f64) -> Option<crate::Result<Vec<[f64; 2]>>> {
        None
    }

    /// Upper bound on the number of isolated plane zeros, when known.
    fn max_zeros(&self) -> Option<usize> {
        None
    }

    fn sample(&self, x: f64, y: f64, t: f64) -> FieldSample {
        self.jet1(x, y, t).sample()
    }
}

/// Serializable description of any supported field.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum FieldSpec {
    Determinantal(WaveField),
    Bubble(Bubble),
    AppendixC(PhaseSurface),
    AppendixD(LineEllipse),
}

impl FieldSpec {
    pub fn as_field(&self) -> &dyn PhaseField {
        match self {
            FieldSpec::Determinantal(f) => f,
            FieldSpec::Bubble(f) => f,
            FieldSpec::AppendixC(f) => f,
            FieldSpec::AppendixD(f) => f,
        }
    }
}

impl<F: PhaseField + ?Sized> PhaseField for &F {
    fn psi(&self, x: f64, y: f64, t: f64) -> C64 {
        (**self).psi(x, y, t)
    }
    fn jet(&self, x: f64, y: f64, t: f64) -> Jet {
        (**self).jet(x, y, t)
    }
    fn jet1(&self, x: f64, y: f64, t: f64) -> Jet {
        (**self).jet1(x, y, t)
    }
    fn closed_form_zeros(&self, t: f64) -> Option<crate::Result<Vec<[f64; 2]>>> {
        (**self).closed_form_zeros(t)
    }
    fn max_zeros(&self) -> Option<usize> {
        (**self).max_zeros()
    }
}
