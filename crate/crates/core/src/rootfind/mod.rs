//! Plane zeros of `Ψ`, critical points of `Φ`, and quaternionic roots of 2×2 fields.
//!
//! Plane searches run damped Newton from a uniform seed grid (plus optional
//! caller-supplied seeds), keep converged points inside the window, sort them
//! and merge duplicates, so the output does not depend on the execution order.

pub(crate) mod newton;
mod quaternion;

pub use quaternion::{
    find_quaternion_roots, find_quaternion_roots_with, quaternion_components, quaternion_det, quaternion_jacobian,
    QuaternionRoot, Window4,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::wavefield::PhaseField;
use newton::{NewtonParams, Outcome};

/// Rectangular search region with its seed density.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchWindow {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    /// Seeds per axis.
    pub grid_density: usize,
}

impl SearchWindow {
    pub fn new(x_min: f64, x_max: f64, y_min: f64, y_max: f64, grid_density: usize) -> Result<Self> {
        let w = SearchWindow {
            x_min,
            x_max,
            y_min,
            y_max,
            grid_density,
        };
        w.validate()?;
        Ok(w)
    }

    /// Square window `[cx − h, cx + h] × [cy − h, cy + h]`.
    pub fn square(cx: f64, cy: f64, h: f64, grid_density: usize) -> Result<Self> {
        Self::new(cx - h, cx + h, cy - h, cy + h, grid_density)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.x_min, self.x_max, self.y_min, self.y_max].iter().all(|v| v.is_finite());
        if !finite || !(self.x_min < self.x_max) || !(self.y_min < self.y_max) {
            return Err(Error::InvalidArgument(format!("degenerate window {self:?}")));
        }
        if self.grid_density < 8 {
            return Err(Error::InvalidArgument(format!(
                "grid_density must be at least 8, got {}",
                self.grid_density
            )));
        }
        Ok(())
    }

    pub fn width(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn height(&self) -> f64 {
        self.y_max - self.y_min
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        x >= self.x_min && x <= self.x_max && y >= self.y_min && y <= self.y_max
    }

    /// Distance from an interior point to the nearest edge (negative outside).
    pub fn edge_distance(&self, x: f64, y: f64) -> f64 {
        (x - self.x_min).min(self.x_max - x).min(y - self.y_min).min(self.y_max - y)
    }

    pub fn with_density(&self, grid_density: usize) -> Self {
        SearchWindow { grid_density, ..*self }
    }

    /// Cell-centred seed grid, row by row in `y`.
    pub fn seeds(&self) -> Vec<[f64; 2]> {
        let d = self.grid_density;
        let hx = self.width() / d as f64;
        let hy = self.height() / d as f64;
        let mut out = Vec::with_capacity(d * d);
        for j in 0..d {
            for i in 0..d {
                out.push([self.x_min + (i as f64 + 0.5) * hx, self.y_min + (j as f64 + 0.5) * hy]);
            }
        }
        out
    }
}

/// A located point in the plane; `residual` is `|Ψ|` for zeros and `|∇Φ|_∞` for critical points.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlaneZero {
    pub x: f64,
    pub y: f64,
    pub residual: f64,
}

/// Tolerances and execution strategy for the plane solvers.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RootOptions {
    /// Max-norm distance below which two roots are the same root.
    pub dedup_tol: f64,
    /// Residual tolerance (relative to the Jacobian scale when that exceeds 1).
    pub zero_tol: f64,
    pub max_iter: usize,
    /// Jacobian condition number above which Newton switches to damped steps.
    pub cond_max: f64,
    pub execution: Execution,
}

impl Default for RootOptions {
    fn default() -> Self {
        RootOptions {
            dedup_tol: 1e-6,
            zero_tol: 1e-9,
            max_iter: 60,
            cond_max: 1e10,
            execution: Execution::default(),
        }
    }
}

impl RootOptions {
    fn newton(&self) -> NewtonParams {
        NewtonParams {
            tol: self.zero_tol,
            max_iter: self.max_iter,
            cond_max: self.cond_max,
        }
    }
}

/// Converged roots plus points where Newton stalled near a root without converging.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RootReport {
    pub roots: Vec<PlaneZero>,
    pub suspect: Vec<PlaneZero>,
}

/// Sorts by `(x, y)` and merges points closer than `tol` in the max-norm,
/// keeping the smaller residual.
pub(crate) fn dedup(mut pts: Vec<PlaneZero>, tol: f64) -> Vec<PlaneZero> {
    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    let mut out: Vec<PlaneZero> = Vec::with_capacity(pts.len());
    for p in pts {
        let dup = out
            .iter_mut()
            .rev()
            .take_while(|q| p.x - q.x <= tol)
            .find(|q| (p.y - q.y).abs() <= tol);
        match dup {
            Some(q) => {
                if p.residual < q.residual {
                    *q = p;
                }
            }
            None => out.push(p),
        }
    }
    out
}

fn collect(
    outcomes: Vec<Outcome<2>>,
    window: &SearchWindow,
    opts: &RootOptions,
    accept: impl Fn(&PlaneZero) -> bool,
) -> RootReport {
    let mut roots = Vec::new();
    let mut suspect = Vec::new();
    for o in outcomes {
        match o {
            Outcome::Converged { p, residual } if window.contains(p[0], p[1]) => {
                let z = PlaneZero {
                    x: p[0],
                    y: p[1],
                    residual,
                };
                if accept(&z) {
                    roots.push(z);
                }
            }
            Outcome::Stalled { p, residual } if window.contains(p[0], p[1]) => suspect.push(PlaneZero {
                x: p[0],
                y: p[1],
                residual,
            }),
            _ => {}
        }
    }
    let roots = dedup(roots, opts.dedup_tol);
    let suspect: Vec<PlaneZero> = dedup(suspect, opts.dedup_tol)
        .into_iter()
        .filter(|s| {
            !roots
                .iter()
                .any(|r| (r.x - s.x).abs().max((r.y - s.y).abs()) <= 1e3 * opts.dedup_tol)
        })
        .collect();
    RootReport { roots, suspect }
}

/// Explored region: the window enlarged by half its size on every side.
fn explore_bounds(window: &SearchWindow) -> impl Fn(&[f64; 2]) -> bool {
    let (mx, my) = (0.5 * window.width(), 0.5 * window.height());
    let (x0, x1, y0, y1) = (window.x_min - mx, window.x_max + mx, window.y_min - my, window.y_max + my);
    move |p: &[f64; 2]| p[0] >= x0 && p[0] <= x1 && p[1] >= y0 && p[1] <= y1
}

/// Zeros of `Ψ` in the window with default options.
pub fn find_plane_zeros<F: PhaseField + ?Sized>(field: &F, t: f64, window: &SearchWindow) -> Result<Vec<PlaneZero>> {
    Ok(find_plane_zeros_with(field, t, window, &RootOptions::default(), &[])?.roots)
}

/// Zeros of `Ψ`: closed form when the field provides one, otherwise Newton on
/// `(Re Ψ, Im Ψ)` from the window grid and `extra_seeds`.
pub fn find_plane_zeros_with<F: PhaseField + ?Sized>(
    field: &F,
    t: f64,
    window: &SearchWindow,
    opts: &RootOptions,
    extra_seeds: &[[f64; 2]],
) -> Result<RootReport> {
    window.validate()?;
    if let Some(closed) = field.closed_form_zeros(t) {
        let roots = closed?
            .into_iter()
            .filter(|p| window.contains(p[0], p[1]))
            .map(|p| PlaneZero {
                x: p[0],
                y: p[1],
                residual: field.psi(p[0], p[1], t).norm(),
            })
            .collect();
        return Ok(RootReport {
            roots: dedup(roots, opts.dedup_tol),
            suspect: Vec::new(),
        });
    }
    let mut seeds = window.seeds();
    seeds.extend_from_slice(extra_seeds);
    let inside = explore_bounds(window);
    let params = opts.newton();
    let outcomes = opts.execution.map(&seeds, |s| {
        newton::run(
            *s,
            params,
            |p| {
                let j = field.jet1(p[0], p[1], t);
                Some(([j.psi.re, j.psi.im], [[j.dx.re, j.dy.re], [j.dx.im, j.dy.im]]))
            },
            &inside,
        )
    });
    let mut report = collect(outcomes, window, opts, |_| true);
    for z in &mut report.roots {
        z.residual = field.psi(z.x, z.y, t).norm();
    }
    Ok(report)
}

/// Critical points of `Φ` in the window with default options.
pub fn find_phase_critical_points<F: PhaseField + ?Sized>(
    field: &F,
    t: f64,
    window: &SearchWindow,
) -> Result<Vec<PlaneZero>> {
    Ok(find_phase_critical_points_with(field, t, window, &RootOptions::default(), &[])?.roots)
}

/// Critical points of `Φ`: Newton on `∇Φ = Im(∇Ψ/Ψ)`, which has the same zeros
/// as `Im(Ψ*∇Ψ)` away from nodal points and repels iterates from them.
/// Points with `|Ψ| < zero_tol` are nodal and excluded.
pub fn find_phase_critical_points_with<F: PhaseField + ?Sized>(
    field: &F,
    t: f64,
    window: &SearchWindow,
    opts: &RootOptions,
    extra_seeds: &[[f64; 2]],
) -> Result<RootReport> {
    window.validate()?;
    let mut seeds = window.seeds();
    seeds.extend_from_slice(extra_seeds);
    let inside = explore_bounds(window);
    let params = opts.newton();
    let zero_tol = opts.zero_tol;
    let outcomes = opts.execution.map(&seeds, |s| {
        newton::run(
            *s,
            params,
            |p| {
                let j = field.jet(p[0], p[1], t);
                if j.psi.norm() < zero_tol {
                    return None;
                }
                let g = j.phase_gradient();
                let h = j.phase_hessian();
                Some((g, h))
            },
            &inside,
        )
    });
    Ok(collect(outcomes, window, opts, |z| field.psi(z.x, z.y, t).norm() >= zero_tol))
}

/// Newton from one seed at time `t`, for continuing a known defect.
/// `critical` selects `∇Φ = 0` instead of `Ψ = 0`. Returns the converged point,
/// which may lie outside the window but inside the explored margin.
pub(crate) fn continue_point<F: PhaseField + ?Sized>(
    field: &F,
    critical: bool,
    t: f64,
    seed: [f64; 2],
    window: &SearchWindow,
    opts: &RootOptions,
) -> Option<[f64; 2]> {
    let inside = explore_bounds(window);
    let zero_tol = opts.zero_tol;
    let out = if critical {
        newton::run(
            seed,
            opts.newton(),
            |p| {
                let j = field.jet(p[0], p[1], t);
                if j.psi.norm() < zero_tol {
                    return None;
                }
                Some((j.phase_gradient(), j.phase_hessian()))
            },
            &inside,
        )
    } else {
        newton::run(
            seed,
            opts.newton(),
            |p| {
                let j = field.jet1(p[0], p[1], t);
                Some(([j.psi.re, j.psi.im], [[j.dx.re, j.dy.re], [j.dx.im, j.dy.im]]))
            },
            &inside,
        )
    };
    match out {
        Outcome::Converged { p, .. } => Some(p),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{sample_ginibre, ComplexMatrix, EvolutionLaw, C64};
    use crate::wavefield::{LineEllipse, PhaseSurface, WaveField};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn window(h: f64) -> SearchWindow {
        SearchWindow::square(0.0, 0.0, h, 32).unwrap()
    }

    #[test]
    fn window_validation() {
        assert!(SearchWindow::new(1.0, 1.0, 0.0, 1.0, 32).is_err());
        assert!(SearchWindow::new(0.0, 1.0, 2.0, 1.0, 32).is_err());
        assert!(SearchWindow::new(0.0, 1.0, 0.0, 1.0, 4).is_err());
        assert!(SearchWindow::new(0.0, f64::NAN, 0.0, 1.0, 8).is_err());
        assert_eq!(window(1.0).seeds().len(), 32 * 32);
    }

    #[test]
    fn dedup_merges_close_points() {
        let pts = vec![
            PlaneZero { x: 1.0, y: 1.0, residual: 1e-10 },
            PlaneZero { x: 1.0 + 1e-8, y: 1.0 - 1e-8, residual: 1e-12 },
            PlaneZero { x: 0.0, y: 0.0, residual: 0.0 },
        ];
        let out = dedup(pts, 1e-6);
        assert_eq!(out.len(), 2);
        assert_eq!(out[1].residual, 1e-12);
    }

    #[test]
    fn characteristic_zeros_are_eigenvalues() {
        let law = EvolutionLaw::new(sample_ginibre(4, 0.35, 12).unwrap(), c(1.0, 0.0));
        let f = WaveField::new(law.clone(), 4).unwrap();
        let zeros = find_plane_zeros(&f, 0.0, &window(3.0)).unwrap();
        let ev = law.m0.eigenvalues();
        assert_eq!(zeros.len(), 4);
        for e in ev {
            let d = zeros.iter().map(|z| (c(z.x, z.y) - e).norm()).fold(f64::INFINITY, f64::min);
            assert!(d < 1e-8, "{d}");
        }
    }

    #[test]
    fn golden_two_by_two_has_no_plane_zeros() {
        let m0 = ComplexMatrix::from_2x2(c(1.0, 0.0), c(-2.0, 0.0), c(1.0, 0.0), c(2.0, 0.0));
        let f = WaveField::new(EvolutionLaw::new(m0, c(1.0, 0.0)), 1).unwrap();
        assert!(find_plane_zeros(&f, 0.0, &window(5.0)).unwrap().is_empty());
    }

    #[test]
    fn line_ellipse_zeros_by_newton_path() {
        // Wrap the field to hide its closed form and exercise the Newton path.
        struct Plain(LineEllipse);
        impl PhaseField for Plain {
            fn psi(&self, x: f64, y: f64, t: f64) -> C64 {
                self.0.psi(x, y, t)
            }
            fn jet(&self, x: f64, y: f64, t: f64) -> crate::wavefield::Jet {
                self.0.jet(x, y, t)
            }
        }
        let f = Plain(LineEllipse::fixed(0.5));
        let zeros = find_plane_zeros(&f, 0.0, &window(3.0)).unwrap();
        assert_eq!(zeros.len(), 2);
        let r = 0.75f64.sqrt();
        assert!((zeros[0].x + r).abs() < 1e-12 && (zeros[0].y - 0.5).abs() < 1e-12);
        assert!((zeros[1].x - r).abs() < 1e-12 && (zeros[1].y - 0.5).abs() < 1e-12);
    }

    #[test]
    fn line_ellipse_critical_points_for_negative_eps() {
        let e: f64 = -0.1;
        let f = LineEllipse::fixed(e);
        let cps = find_phase_critical_points(&f, 0.0, &window(3.0)).unwrap();
        assert_eq!(cps.len(), 2, "{cps:?}");
        let root = (e * e - 2.0 * e).sqrt();
        let mut ys: Vec<f64> = cps.iter().map(|p| p.y).collect();
        ys.sort_by(f64::total_cmp);
        assert!((ys[0] - (e - root)).abs() < 1e-10);
        assert!((ys[1] - (e + root)).abs() < 1e-10);
        assert!(cps.iter().all(|p| p.x.abs() < 1e-10));
    }

    #[test]
    fn phase_surface_stationary_points() {
        let eps = 0.3;
        let f = PhaseSurface::fixed(eps);
        let cps = find_phase_critical_points(&f, 0.0, &window(2.0)).unwrap();
        assert_eq!(cps.len(), 2);
        let r = (eps / 3.0f64).sqrt();
        assert!((cps[0].x + r).abs() < 1e-12 && cps[0].y.abs() < 1e-12);
        assert!((cps[1].x - r).abs() < 1e-12 && cps[1].y.abs() < 1e-12);
    }

    #[test]
    fn pure_vortex_field_has_only_phase_saddles() {
        // Φ of a holomorphic polynomial is stationary exactly where Ψ' = 0.
        let law = EvolutionLaw::new(sample_ginibre(4, 0.35, 3).unwrap(), c(1.0, 0.0));
        let f = WaveField::new(law, 4).unwrap();
        let cps = find_phase_critical_points(&f, 0.0, &window(3.0)).unwrap();
        assert_eq!(cps.len(), 3);
        for p in &cps {
            let j = crate::wavefield::PhaseField::jet(&f, p.x, p.y, 0.0);
            assert!(j.dx.norm() < 1e-9 * j.psi.norm().max(1.0));
            let h = j.phase_hessian();
            assert!(h[0][0] * h[1][1] - h[0][1] * h[1][0] < 0.0);
        }
    }

    #[test]
    fn zeros_outside_window_are_dropped() {
        let law = EvolutionLaw::new(ComplexMatrix::from_diag(&[c(0.5, 0.0), c(5.0, 0.0)]), c(0.0, 0.0));
        let f = WaveField::new(law, 2).unwrap();
        let zeros = find_plane_zeros(&f, 0.0, &window(2.0)).unwrap();
        assert_eq!(zeros.len(), 1);
        assert!((zeros[0].x - 0.5).abs() < 1e-12);
    }

    #[test]
    fn sequential_and_parallel_agree() {
        let law = EvolutionLaw::new(sample_ginibre(5, 0.3, 99).unwrap(), c(1.0, 0.0));
        let f = WaveField::new(law, 3).unwrap();
        let mut o = RootOptions::default();
        o.execution = Execution::Sequential;
        let a = find_plane_zeros_with(&f, 0.4, &window(3.0), &o, &[]).unwrap();
        o.execution = Execution::Parallel;
        let b = find_plane_zeros_with(&f, 0.4, &window(3.0), &o, &[]).unwrap();
        assert_eq!(a, b);
    }
}
