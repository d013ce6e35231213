//! Winding of `Φ` and of `∇Φ` around small circles.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rootfind::SearchWindow;
use crate::wavefield::{phase_of, Jet, PhaseField};

/// Sampling and safety settings for contour integrals.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContourParams {
    /// Initial number of points on the circle; at least 64.
    pub samples: usize,
    /// Relative half-width `δ` of the band `[r(1−δ), r(1+δ)]` that must be free of zeros.
    pub band: f64,
    /// Sampling is doubled up to this many points while any phase step exceeds `π/2`.
    pub max_samples: usize,
}

impl Default for ContourParams {
    fn default() -> Self {
        ContourParams {
            samples: 256,
            band: 0.05,
            max_samples: 1 << 14,
        }
    }
}

fn wrap(d: f64) -> f64 {
    let r = d.rem_euclid(TAU);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

/// First-order distance from the sample to the nearest zero of `Ψ`.
fn nodal_distance(j: &Jet) -> f64 {
    let g = j.dx.norm().max(j.dy.norm());
    if g == 0.0 {
        f64::INFINITY
    } else {
        j.psi.norm() / g
    }
}

/// First-order distance from the sample to the nearest zero of `∇Φ`.
fn critical_distance(j: &Jet) -> f64 {
    let g = j.phase_gradient();
    let h = j.phase_hessian();
    let hn = h.iter().flatten().map(|v| v * v).sum::<f64>().sqrt();
    let gn = g[0].hypot(g[1]);
    if hn == 0.0 {
        f64::INFINITY
    } else {
        gn / hn
    }
}

enum Kind {
    Phase,
    Gradient,
}

fn wind_path<F: PhaseField + ?Sized, P: Fn(f64) -> [f64; 2]>(
    field: &F,
    path: P,
    t: f64,
    min_dist: f64,
    params: &ContourParams,
    kind: Kind,
) -> Result<i64> {
    if params.samples < 64 {
        return Err(Error::InvalidArgument(format!("contour needs at least 64 samples, got {}", params.samples)));
    }
    let mut samples = params.samples;
    loop {
        let mut angles = Vec::with_capacity(samples);
        for k in 0..samples {
            let [x, y] = path(k as f64 / samples as f64);
            let j = field.jet(x, y, t);
            if nodal_distance(&j) < min_dist {
                return Err(Error::ContourUnsafe(format!(
                    "zero of the field within {min_dist:.3e} of the contour at ({x}, {y})"
                )));
            }
            let angle = match kind {
                Kind::Phase => phase_of(j.psi),
                Kind::Gradient => {
                    if critical_distance(&j) < min_dist {
                        return Err(Error::ContourUnsafe(format!(
                            "critical point within {min_dist:.3e} of the contour at ({x}, {y})"
                        )));
                    }
                    let g = j.grad_num();
                    g[1].atan2(g[0])
                }
            };
            if !angle.is_finite() {
                return Err(Error::ContourUnsafe(format!("non-finite angle at ({x}, {y})")));
            }
            angles.push(angle);
        }
        let mut total = 0.0;
        let mut max_jump = 0.0f64;
        for k in 0..samples {
            let d = wrap(angles[(k + 1) % samples] - angles[k]);
            max_jump = max_jump.max(d.abs());
            total += d;
        }
        if max_jump <= PI / 2.0 {
            return Ok((total / TAU).round() as i64);
        }
        if samples * 2 > params.max_samples {
            return Err(Error::ContourUnsafe(format!(
                "phase step {max_jump:.3} exceeds pi/2 with {samples} samples"
            )));
        }
        samples *= 2;
    }
}

fn wind<F: PhaseField + ?Sized>(
    field: &F,
    center: [f64; 2],
    radius: f64,
    t: f64,
    params: &ContourParams,
    kind: Kind,
) -> Result<i64> {
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(Error::InvalidArgument(format!("contour radius must be positive, got {radius}")));
    }
    let path = |s: f64| {
        let a = TAU * s;
        [center[0] + radius * a.cos(), center[1] + radius * a.sin()]
    };
    wind_path(field, path, t, params.band * radius, params, kind)
}

/// Counter-clockwise walk around the window edge, `s ∈ [0, 1)`.
fn rectangle(w: &SearchWindow) -> impl Fn(f64) -> [f64; 2] + '_ {
    let (a, b) = (w.width(), w.height());
    let per = 2.0 * (a + b);
    move |s: f64| {
        let d = s * per;
        if d < a {
            [w.x_min + d, w.y_min]
        } else if d < a + b {
            [w.x_max, w.y_min + (d - a)]
        } else if d < 2.0 * a + b {
            [w.x_max - (d - a - b), w.y_max]
        } else {
            [w.x_min, w.y_max - (d - 2.0 * a - b)]
        }
    }
}

/// Total winding `w` of `Φ` along the window edge.
pub fn boundary_winding<F: PhaseField + ?Sized>(field: &F, window: &SearchWindow, t: f64, params: &ContourParams) -> Result<i64> {
    let min_dist = params.band * window.width().min(window.height()) / params.samples as f64;
    wind_path(field, rectangle(window), t, min_dist, params, Kind::Phase)
}

/// Total index `χ` of `∇Φ` along the window edge.
pub fn boundary_index<F: PhaseField + ?Sized>(field: &F, window: &SearchWindow, t: f64, params: &ContourParams) -> Result<i64> {
    let min_dist = params.band * window.width().min(window.height()) / params.samples as f64;
    wind_path(field, rectangle(window), t, min_dist, params, Kind::Gradient)
}

/// Winding `m` of `Φ` around the circle, `(1/2π)·Σ wrapped ΔΦ`.
pub fn winding_number<F: PhaseField + ?Sized>(
    field: &F,
    center: [f64; 2],
    radius: f64,
    t: f64,
    params: &ContourParams,
) -> Result<i64> {
    wind(field, center, radius, t, params, Kind::Phase)
}

/// Index `n`: winding of the direction of `Im(Ψ*∇Ψ)` around the circle.
pub fn index_number<F: PhaseField + ?Sized>(
    field: &F,
    center: [f64; 2],
    radius: f64,
    t: f64,
    params: &ContourParams,
) -> Result<i64> {
    wind(field, center, radius, t, params, Kind::Gradient)
}
