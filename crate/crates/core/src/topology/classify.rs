//! Species of a located point from local derivatives, cross-checked on a contour.

use serde::{Deserialize, Serialize};

use super::contour::{index_number, winding_number, ContourParams};
use super::{Defect, Species};
use crate::error::{Error, Result};
use crate::rootfind::PlaneZero;
use crate::wavefield::{phase_of, Jet, PhaseField};

/// Below this `|J|` a point is treated as degenerate.
pub const JACOBIAN_MIN: f64 = 1e-12;

/// Whether a point is a zero of `Ψ` or a critical point of `Φ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PointKind {
    Nodal,
    Critical,
}

fn unstable(x: f64, y: f64, reason: impl Into<String>) -> Error {
    Error::UnstableDefect {
        x,
        y,
        reason: reason.into(),
    }
}

/// Species from the analytic derivatives alone: the sign of the nodal Jacobian
/// for zeros, the sign of the phase Hessian determinant and its trace for
/// critical points.
pub fn classify_jet(jet: &Jet, kind: PointKind, x: f64, y: f64) -> Result<Species> {
    match kind {
        PointKind::Nodal => {
            let j = jet.nodal_jacobian();
            if !(j.abs() >= JACOBIAN_MIN) {
                return Err(unstable(x, y, format!("nodal Jacobian {j:.3e} is degenerate")));
            }
            Ok(if j > 0.0 { Species::Vortex } else { Species::AntiVortex })
        }
        PointKind::Critical => {
            let h = jet.phase_hessian();
            let det = h[0][0] * h[1][1] - h[0][1] * h[1][0];
            if !(det.abs() >= JACOBIAN_MIN) {
                return Err(unstable(x, y, format!("phase Hessian determinant {det:.3e} is degenerate")));
            }
            Ok(if det < 0.0 {
                Species::Saddle
            } else if h[0][0] + h[1][1] < 0.0 {
                Species::Maximum
            } else {
                Species::Minimum
            })
        }
    }
}

/// Contour radius for a point: half the distance to the nearest other defect, capped at 0.1.
pub fn contour_radius(p: [f64; 2], others: &[[f64; 2]]) -> f64 {
    others
        .iter()
        .map(|o| (o[0] - p[0]).hypot(o[1] - p[1]))
        .filter(|d| *d > 0.0)
        .fold(0.2f64, f64::min)
        * 0.5
}

/// Five-point Laplacian of the unwrapped phase.
fn phase_laplacian<F: PhaseField + ?Sized>(field: &F, x: f64, y: f64, t: f64, h: f64) -> f64 {
    let p0 = phase_of(field.psi(x, y, t));
    let d = |dx: f64, dy: f64| {
        let v = phase_of(field.psi(x + dx, y + dy, t)) - p0;
        v - std::f64::consts::TAU * (v / std::f64::consts::TAU).round()
    };
    (d(h, 0.0) + d(-h, 0.0) + d(0.0, h) + d(0.0, -h)) / (h * h)
}

/// Classification with the default contour: radius 0.1, 256 samples.
pub fn classify<F: PhaseField + ?Sized>(field: &F, point: &PlaneZero, kind: PointKind, t: f64) -> Result<Defect> {
    classify_with(field, point, kind, t, 0.1, &ContourParams::default())
}

/// Classifies `point` and confirms it on a circle of `radius`: the winding of `Φ`
/// must match the Jacobian sign for zeros, the index of `∇Φ` must match the
/// Hessian sign for critical points. Extrema are split by the sign of a
/// finite-difference phase Laplacian with step `radius/8`. When the circle meets
/// another defect the radius is halved, up to three times.
pub fn classify_with<F: PhaseField + ?Sized>(
    field: &F,
    point: &PlaneZero,
    kind: PointKind,
    t: f64,
    radius: f64,
    params: &ContourParams,
) -> Result<Defect> {
    let (x, y) = (point.x, point.y);
    let jet = field.jet(x, y, t);
    let fast = classify_jet(&jet, kind, x, y)?;
    let mut r = radius;
    let mut attempt = 0;
    let count = loop {
        let res = match kind {
            PointKind::Nodal => winding_number(field, [x, y], r, t, params),
            PointKind::Critical => index_number(field, [x, y], r, t, params),
        };
        match res {
            Err(Error::ContourUnsafe(_)) if attempt < 3 => {
                attempt += 1;
                r *= 0.5;
            }
            other => break other?,
        }
    };
    let species = match kind {
        PointKind::Nodal => {
            if count != fast.m() {
                return Err(unstable(x, y, format!("winding {count} disagrees with the Jacobian sign")));
            }
            fast
        }
        PointKind::Critical => {
            if count != fast.n_index() {
                return Err(unstable(x, y, format!("index {count} disagrees with the Hessian sign")));
            }
            if fast == Species::Saddle {
                fast
            } else {
                let lap = phase_laplacian(field, x, y, t, r / 8.0);
                if lap < 0.0 {
                    Species::Maximum
                } else if lap > 0.0 {
                    Species::Minimum
                } else {
                    return Err(unstable(x, y, "phase Laplacian vanishes at an extremum"));
                }
            }
        }
    };
    Ok(Defect::new(x, y, t, species))
}
