//! Lifetimes of the off-plane quaternionic state of 2×2 fields.
//!
//! Between a vortex–anti-vortex annihilation and the next creation the 2×2
//! field has no plane zeros; its roots move off the plane as a `(z, w)`,
//! `(−z, −w)` pair. The lifetime is the length of that interval.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, EvolutionLaw, C64};
use crate::rootfind::{find_quaternion_roots_with, QuaternionRoot, RootOptions, Window4};
use crate::wavefield::{PhaseField, WaveField};

/// One transient interval.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LifetimeRecord {
    pub t_birth: f64,
    pub t_death: f64,
    pub t_max: f64,
    /// Ginibre scale of the matrix, when known.
    pub sigma: Option<f64>,
    /// The transient was still alive at an end of the scanned range.
    pub clipped: bool,
    /// The quaternionic roots at the midpoint form a `(z, w)`, `(−z, −w)` pair.
    pub paired: bool,
}

/// Settings for [`measure_lifetime_with`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LifetimeOptions {
    /// Endpoint bisection stops at this interval length; 0 bisects to machine precision.
    pub t_tol: f64,
    /// Seeds per axis for the quaternionic check at the midpoint; 0 skips the check.
    pub quaternion_density: usize,
    /// Tolerance on `z₁ + z₂` and `w₁ + w₂` for the pairing check.
    pub pair_tol: f64,
}

impl Default for LifetimeOptions {
    fn default() -> Self {
        LifetimeOptions {
            t_tol: 0.0,
            quaternion_density: 6,
            pair_tol: 1e-9,
        }
    }
}

/// Transients of `M₀ + t·diag(s, −s)` with default options.
pub fn measure_lifetime(m0: &ComplexMatrix, s: C64, t_range: (f64, f64), dt: f64) -> Result<Vec<LifetimeRecord>> {
    measure_lifetime_with(m0, s, t_range, dt, &LifetimeOptions::default())
}

fn has_plane_zeros(field: &WaveField, t: f64, dt: f64) -> Result<bool> {
    // An exactly degenerate zero set is a measure-zero coincidence; look just beside it.
    for k in 0..4 {
        let tk = t + k as f64 * 1e-9 * dt;
        match field.closed_form_zeros(tk) {
            Some(Ok(z)) => return Ok(!z.is_empty()),
            Some(Err(Error::DegenerateZeroSet(_))) => continue,
            Some(Err(e)) => return Err(e),
            None => unreachable!("2x2 field has a closed form"),
        }
    }
    Err(Error::DegenerateZeroSet(format!("zero set degenerate around t = {t}")))
}

/// Bisects between `lo` (state `lo_state`) and `hi` until shorter than `tol`.
fn bisect(field: &WaveField, mut lo: f64, mut hi: f64, lo_state: bool, tol: f64, dt: f64) -> Result<f64> {
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if has_plane_zeros(field, mid, dt)? == lo_state {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// True when the roots at `m` are exactly one off-plane `±` pair.
pub fn is_quaternion_pair(roots: &[QuaternionRoot], tol: f64) -> bool {
    roots.len() == 2
        && roots.iter().all(|r| !r.is_planar())
        && (roots[0].z + roots[1].z).abs() <= tol
        && (roots[0].w + roots[1].w).abs() <= tol
        && (roots[0].x - roots[1].x).abs() <= tol
        && (roots[0].y - roots[1].y).abs() <= tol
}

/// Scans `t_range` with step `dt` for intervals without plane zeros. Endpoints
/// are refined by bisection to `t_tol`, and the quaternionic roots at each
/// midpoint are checked for the `±` pairing.
pub fn measure_lifetime_with(
    m0: &ComplexMatrix,
    s: C64,
    t_range: (f64, f64),
    dt: f64,
    opts: &LifetimeOptions,
) -> Result<Vec<LifetimeRecord>> {
    let (t0, t1) = t_range;
    if m0.n() != 2 {
        return Err(Error::InvalidArgument("lifetimes are defined for 2x2 matrices".into()));
    }
    if !(t0 < t1) || !t0.is_finite() || !t1.is_finite() {
        return Err(Error::InvalidArgument(format!("invalid time range ({t0}, {t1})")));
    }
    if !(dt > 0.0) {
        return Err(Error::InvalidArgument(format!("dt must be positive, got {dt}")));
    }
    let law = EvolutionLaw::new(m0.clone(), s);
    let field = WaveField::new(law.clone(), 1)?;
    let steps = ((t1 - t0) / dt).ceil() as usize;
    let time = |k: usize| if k >= steps { t1 } else { t0 + k as f64 * dt };

    let mut out = Vec::new();
    let mut prev = has_plane_zeros(&field, t0, dt)?;
    let mut start: Option<(f64, bool)> = if prev { None } else { Some((t0, true)) };
    for k in 1..=steps {
        let (ta, tb) = (time(k - 1), time(k));
        let cur = has_plane_zeros(&field, tb, dt)?;
        if cur != prev {
            let edge = bisect(&field, ta, tb, prev, opts.t_tol, dt)?;
            if prev {
                start = Some((edge, false));
            } else if let Some((tb0, clipped)) = start.take() {
                out.push((tb0, edge, clipped));
            }
        }
        prev = cur;
    }
    if let Some((tb0, _)) = start {
        out.push((tb0, t1, true));
    }

    out.into_iter()
        .map(|(t_birth, t_death, clipped)| {
            let paired = if opts.quaternion_density >= 2 {
                let m = law.at(0.5 * (t_birth + t_death));
                let half = 2.0 * m.max_abs() + 1.0;
                let roots = find_quaternion_roots_with(&m, &Window4::cube(half, opts.quaternion_density), &RootOptions::default())?;
                is_quaternion_pair(&roots, opts.pair_tol)
            } else {
                false
            };
            Ok(LifetimeRecord {
                t_birth,
                t_death,
                t_max: t_death - t_birth,
                sigma: None,
                clipped,
                paired,
            })
        })
        .collect()
}
