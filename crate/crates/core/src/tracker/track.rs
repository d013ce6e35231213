//! Defect lines through time and the events where they meet.
//!
//! Each sample locates zeros and critical points from a coarse grid plus seeds
//! predicted from the neighbouring samples, and classifies them. Two samples
//! are linked by continuing every defect with Newton to the other time, from
//! its position advanced by the implicit-function velocity. A pair is matched
//! when the forward and backward continuations agree. Any disagreement
//! bisects the interval, down to `dt_min`. What is still unmatched there
//! becomes a line end. Ends that are close in space and time form an event,
//! and an event is legal when it conserves `(w, χ)`.
//!
//! At every step the winding and index along the window edge are compared with
//! the totals of the defects found inside. A mismatch triggers a dense search,
//! and if it persists it is counted as a violation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rootfind::{
    continue_point, find_phase_critical_points_with, find_plane_zeros_with, newton, RootOptions, SearchWindow,
};
use crate::topology::{
    boundary_index, boundary_winding, classify_jet, species_totals, totals, vertex_legal, ContourParams, Defect,
    PointKind, Species,
};
use crate::wavefield::PhaseField;

/// Settings for [`track_with`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrackOptions {
    pub roots: RootOptions,
    /// Seeds per axis searched at every sample; the window's own density is
    /// used at the first sample and whenever the edge census disagrees.
    pub coarse_density: usize,
    /// `dt_min = dt / refine`.
    pub refine: usize,
    /// Track only zeros of `Ψ`; legality then checks `w` alone.
    pub nodal_only: bool,
    /// Compare edge winding/index with the enclosed totals at every step.
    pub census: bool,
    /// Lower bound of `match_radius = max(5·dt·v_est, min_match_radius)`.
    pub min_match_radius: f64,
}

impl Default for TrackOptions {
    fn default() -> Self {
        TrackOptions {
            roots: RootOptions::default(),
            coarse_density: 8,
            refine: 1024,
            nodal_only: false,
            census: true,
            min_match_radius: 0.05,
        }
    }
}

/// How a line starts or stops.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LineEnd {
    /// At `t_start` or `t_end`.
    TimeBoundary,
    /// Entered or left the window.
    Window,
    /// At the event with this id.
    Event(usize),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DefectLine {
    pub id: usize,
    pub samples: Vec<Defect>,
    pub birth: LineEnd,
    pub death: LineEnd,
}

impl DefectLine {
    pub fn birth_event(&self) -> Option<usize> {
        match self.birth {
            LineEnd::Event(e) => Some(e),
            _ => None,
        }
    }

    pub fn death_event(&self) -> Option<usize> {
        match self.death {
            LineEnd::Event(e) => Some(e),
            _ => None,
        }
    }

    pub fn species(&self) -> Species {
        self.samples[0].species
    }
}

/// Lines meeting at one space-time point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TopologicalEvent {
    pub id: usize,
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub incoming: Vec<Species>,
    pub outgoing: Vec<Species>,
    pub legal: bool,
    /// Unbalanced but touching the window edge or the ends of the time range,
    /// where the partner lines lie outside what was tracked.
    pub boundary: bool,
}

impl TopologicalEvent {
    /// A genuine conservation failure.
    pub fn is_violation(&self) -> bool {
        !self.legal && !self.boundary
    }
}

/// Totals at one time step together with the edge census.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepTotals {
    pub t: f64,
    pub w: i64,
    pub chi: i64,
    pub count: usize,
    pub edge_w: Option<i64>,
    pub edge_chi: Option<i64>,
}

impl StepTotals {
    /// False when a census was taken and disagrees with the enclosed totals.
    pub fn consistent(&self) -> bool {
        self.edge_w.is_none_or(|w| w == self.w) && self.edge_chi.is_none_or(|c| c == self.chi)
    }
}

/// Output of [`track`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Track {
    pub lines: Vec<DefectLine>,
    pub events: Vec<TopologicalEvent>,
    pub steps: Vec<StepTotals>,
    /// Illegal events away from the edge, persistent census mismatches more
    /// than one step from any event, and totals that changed across a step
    /// with no event nearby or edge crossing.
    pub violations: usize,
    pub census_mismatches: usize,
    pub unexplained_changes: usize,
    /// Newton runs that stalled close to an unconverged root.
    pub suspect: usize,
    pub dt_min: f64,
    pub warnings: Vec<String>,
}

impl Track {
    pub fn legal_events(&self) -> impl Iterator<Item = &TopologicalEvent> {
        self.events.iter().filter(|e| e.legal)
    }
}

/// Tracks with default options.
pub fn track<F: PhaseField + ?Sized>(
    field: &F,
    t_start: f64,
    t_end: f64,
    dt: f64,
    window: &SearchWindow,
) -> Result<Track> {
    track_with(field, t_start, t_end, dt, window, &TrackOptions::default())
}

#[derive(Clone, Copy, Debug)]
struct Pt {
    d: Defect,
    v: [f64; 2],
    line: usize,
}

impl Pt {
    fn critical(&self) -> bool {
        !self.d.species.is_nodal()
    }

    fn at(&self, dt: f64) -> [f64; 2] {
        [self.d.x + self.v[0] * dt, self.d.y + self.v[1] * dt]
    }
}

#[derive(Clone, Debug)]
struct Sample {
    t: f64,
    pts: Vec<Pt>,
}

#[derive(Clone, Copy, Debug)]
struct End {
    t: f64,
    x: f64,
    y: f64,
    species: Species,
    line: usize,
    birth: bool,
    radius: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Cont {
    To(usize),
    Out,
    Lost,
}

const UNASSIGNED: usize = usize::MAX;

/// Below this `|det J|/‖J‖²` a defect is too close to a merger to classify.
const DEGENERATE_REL: f64 = 1e-6;

/// Densest grid tried where the edge census disagrees.
const MAX_DENSITY: usize = 128;

/// Largest remaining Newton step accepted at a classified root.
const NEWTON_STEP_MAX: f64 = 1e-7;

struct Tracker<'a, F: ?Sized> {
    field: &'a F,
    window: SearchWindow,
    opts: TrackOptions,
    dt: f64,
    dt_min: f64,
    t_end: f64,
    match_radius: f64,
    lines: Vec<Vec<Defect>>,
    births: Vec<LineEnd>,
    deaths: Vec<LineEnd>,
    ends: Vec<End>,
    crossings: Vec<f64>,
    suspect: usize,
    warnings: Vec<String>,
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

impl<'a, F: PhaseField + ?Sized> Tracker<'a, F> {
    fn tol(&self) -> f64 {
        (10.0 * self.opts.roots.dedup_tol).max(1e-7)
    }

    /// Velocity from the implicit function theorem, `v = −J⁻¹·∂ₜF`.
    fn velocity(&self, p: [f64; 2], t: f64, critical: bool) -> [f64; 2] {
        let h = 1e-6 * (1.0 + t.abs());
        let f = self.field;
        let (j, ft) = if critical {
            let jet = f.jet(p[0], p[1], t);
            let gp = f.jet(p[0], p[1], t + h).phase_gradient();
            let gm = f.jet(p[0], p[1], t - h).phase_gradient();
            (jet.phase_hessian(), [(gp[0] - gm[0]) / (2.0 * h), (gp[1] - gm[1]) / (2.0 * h)])
        } else {
            let jet = f.jet1(p[0], p[1], t);
            let d = (f.psi(p[0], p[1], t + h) - f.psi(p[0], p[1], t - h)) / (2.0 * h);
            ([[jet.dx.re, jet.dy.re], [jet.dx.im, jet.dy.im]], [d.re, d.im])
        };
        match newton::solve(j, [-ft[0], -ft[1]]) {
            Some(v) if v[0].is_finite() && v[1].is_finite() => v,
            _ => [0.0, 0.0],
        }
    }

    fn make_pt(&self, p: [f64; 2], t: f64, critical: bool) -> Result<Pt> {
        let kind = if critical { PointKind::Critical } else { PointKind::Nodal };
        let jet = self.field.jet(p[0], p[1], t);
        // Scale-free conditioning: |det J| against the squared Frobenius norm.
        let (j, f) = if critical {
            (jet.phase_hessian(), jet.phase_gradient())
        } else {
            ([[jet.dx.re, jet.dy.re], [jet.dx.im, jet.dy.im]], [jet.psi.re, jet.psi.im])
        };
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        let fro2 = j.iter().flatten().map(|v| v * v).sum::<f64>();
        // A residual within tolerance next to a near-double root still leaves a
        // sizeable Newton step; such points are not resolved roots.
        let step = newton::solve(j, f).map_or(f64::INFINITY, |d| d[0].hypot(d[1]));
        if !(det.abs() > DEGENERATE_REL * fro2) || !(step <= NEWTON_STEP_MAX * (1.0 + p[0].hypot(p[1]))) {
            return Err(Error::UnstableDefect {
                x: p[0],
                y: p[1],
                reason: format!("near-degenerate root, det {det:.3e}, step {step:.3e}"),
            });
        }
        let species = classify_jet(&jet, kind, p[0], p[1])?;
        Ok(Pt {
            d: Defect::new(p[0], p[1], t, species),
            v: self.velocity(p, t, critical),
            line: UNASSIGNED,
        })
    }

    fn sample_once(&mut self, t: f64, seeds: &[Pt], dts: &[f64], density: usize) -> Result<Sample> {
        let win = self.window.with_density(density.max(8));
        let mut nodal_seeds = Vec::new();
        let mut crit_seeds = Vec::new();
        // Each known defect seeds its own species at the predicted position and
        // both searches on a small ring around it, where partners appear.
        let r = 0.25 * self.match_radius;
        for (p, dt) in seeds.iter().zip(dts) {
            let c = p.at(*dt);
            if p.critical() {
                crit_seeds.push(c);
            } else {
                nodal_seeds.push(c);
            }
            for k in 0..4 {
                let a = std::f64::consts::FRAC_PI_2 * k as f64 + 0.3;
                let q = [c[0] + r * a.cos(), c[1] + r * a.sin()];
                crit_seeds.push(q);
                nodal_seeds.push(q);
            }
        }
        let zr = find_plane_zeros_with(self.field, t, &win, &self.opts.roots, &nodal_seeds)?;
        self.suspect += zr.suspect.len();
        let mut pts = Vec::with_capacity(zr.roots.len());
        for z in &zr.roots {
            pts.push(self.make_pt([z.x, z.y], t, false)?);
        }
        if !self.opts.nodal_only {
            let cr = find_phase_critical_points_with(self.field, t, &win, &self.opts.roots, &crit_seeds)?;
            self.suspect += cr.suspect.len();
            for z in &cr.roots {
                pts.push(self.make_pt([z.x, z.y], t, true)?);
            }
        }
        Ok(Sample { t, pts })
    }

    /// Samples at `t`, or just beside it when a defect there is exactly degenerate.
    fn sample(&mut self, t: f64, seeds: &[Pt], dts: &[f64], density: usize) -> Result<Sample> {
        let mut last = None;
        for k in 0..6 {
            let off = 0.173 * k as f64 * self.dt_min;
            let tk = if t + off <= self.t_end { t + off } else { t - off };
            let shifted: Vec<f64> = dts.iter().map(|d| d + (tk - t)).collect();
            match self.sample_once(tk, seeds, &shifted, density) {
                Ok(s) => {
                    if k > 0 {
                        self.warnings.push(format!("degenerate defect at t = {t}; sampled at {tk}"));
                    }
                    return Ok(s);
                }
                Err(e @ (Error::UnstableDefect { .. } | Error::DegenerateZeroSet(_))) => last = Some(e),
                Err(e) => return Err(e),
            }
        }
        Err(last.expect("at least one attempt"))
    }

    /// Edge winding and index, or `None` where a defect sits on the edge.
    fn census(&self, t: f64) -> (Option<i64>, Option<i64>) {
        if !self.opts.census {
            return (None, None);
        }
        let params = ContourParams {
            samples: 512,
            ..ContourParams::default()
        };
        let w = boundary_winding(self.field, &self.window, t, &params).ok();
        let c = if self.opts.nodal_only {
            None
        } else {
            boundary_index(self.field, &self.window, t, &params).ok()
        };
        (w, c)
    }

    /// Adds to `to` every defect that a continuation from `from` lands on but
    /// `to` lacks. Returns the number added.
    fn complete(&self, from: &Sample, to: &mut Sample) -> usize {
        let mut added = 0;
        for (i, q) in self.continue_all(from, to.t).into_iter().enumerate() {
            let Some(q) = q else { continue };
            let crit = from.pts[i].critical();
            if self.window.contains(q[0], q[1]) && self.find_in(to, q, crit).is_none() {
                if let Ok(p) = self.make_pt(q, to.t, crit) {
                    to.pts.push(p);
                    added += 1;
                }
            }
        }
        added
    }

    /// Carries defects added at step `k` onwards in both directions until nothing new turns up.
    fn spread(&self, samples: &mut [Sample], k: usize) {
        let mut j = k;
        while j + 1 < samples.len() {
            let (lo, hi) = samples.split_at_mut(j + 1);
            if self.complete(&lo[j], &mut hi[0]) == 0 {
                break;
            }
            j += 1;
        }
        let mut j = k;
        while j > 0 {
            let (lo, hi) = samples.split_at_mut(j);
            if self.complete(&hi[0], &mut lo[j - 1]) == 0 {
                break;
            }
            j -= 1;
        }
    }

    /// Searches step `k` again on denser grids, seeded by its neighbours, until
    /// the edge census agrees or the density cap is reached.
    fn densify(&mut self, samples: &mut [Sample], k: usize, mut edge: (Option<i64>, Option<i64>)) -> Result<(Option<i64>, Option<i64>)> {
        let mut density = self.window.grid_density.max(2 * self.opts.coarse_density);
        while !self.consistent(&samples[k], edge) && density <= MAX_DENSITY {
            let t = samples[k].t;
            let lo = k.saturating_sub(1);
            let hi = (k + 1).min(samples.len() - 1);
            let mut seeds = Vec::new();
            let mut dts = Vec::new();
            for s in &samples[lo..=hi] {
                seeds.extend_from_slice(&s.pts);
                dts.extend(s.pts.iter().map(|_| t - s.t));
            }
            let mut found = self.sample(t, &seeds, &dts, density)?;
            if found.t == t {
                for p in found.pts {
                    if self.find_in(&samples[k], p.d.pos(), p.critical()).is_none() {
                        samples[k].pts.push(p);
                    }
                }
            } else {
                self.complete(&samples[k], &mut found);
                samples[k] = found;
            }
            self.spread(samples, k);
            edge = self.census(samples[k].t);
            density *= 2;
        }
        Ok(edge)
    }

    fn step_totals(&self, s: &Sample, edge: (Option<i64>, Option<i64>)) -> StepTotals {
        let defects: Vec<Defect> = s.pts.iter().map(|p| p.d).collect();
        let (w, chi) = totals(&defects);
        StepTotals {
            t: s.t,
            w,
            chi,
            count: defects.len(),
            edge_w: edge.0,
            edge_chi: edge.1,
        }
    }

    fn consistent(&self, s: &Sample, edge: (Option<i64>, Option<i64>)) -> bool {
        self.step_totals(s, edge).consistent()
    }

    fn new_line(&mut self, p: &mut Pt, birth: LineEnd) {
        p.line = self.lines.len();
        self.lines.push(vec![p.d]);
        self.births.push(birth);
        self.deaths.push(LineEnd::TimeBoundary);
    }

    fn extend_line(&mut self, p: &mut Pt, line: usize) {
        p.line = line;
        self.lines[line].push(p.d);
    }

    fn find_in(&self, s: &Sample, q: [f64; 2], critical: bool) -> Option<usize> {
        let tol = self.tol();
        s.pts
            .iter()
            .enumerate()
            .filter(|(_, p)| p.critical() == critical && dist(p.d.pos(), q) <= tol)
            .min_by(|(_, a), (_, b)| dist(a.d.pos(), q).total_cmp(&dist(b.d.pos(), q)))
            .map(|(k, _)| k)
    }

    fn continue_all(&self, from: &Sample, to_t: f64) -> Vec<Option<[f64; 2]>> {
        let dt = to_t - from.t;
        self.opts.roots.execution.map(&from.pts, |p| {
            continue_point(self.field, p.critical(), to_t, p.at(dt), &self.window, &self.opts.roots)
        })
    }

    /// Links `a` (lines assigned) to `b` and returns `b` with lines assigned.
    fn process(&mut self, a: Sample, mut b: Sample) -> Result<Sample> {
        let dtab = b.t - a.t;
        let fwd_pts = self.continue_all(&a, b.t);
        let mut fwd = Vec::with_capacity(a.pts.len());
        for (i, q) in fwd_pts.into_iter().enumerate() {
            let crit = a.pts[i].critical();
            fwd.push(match q {
                None => Cont::Lost,
                Some(q) if !self.window.contains(q[0], q[1]) => Cont::Out,
                Some(q) => match self.find_in(&b, q, crit) {
                    Some(j) => Cont::To(j),
                    None => match self.make_pt(q, b.t, crit) {
                        Ok(p) => {
                            b.pts.push(p);
                            Cont::To(b.pts.len() - 1)
                        }
                        Err(_) => Cont::Lost,
                    },
                },
            });
        }
        let bwd: Vec<Cont> = self
            .continue_all(&b, a.t)
            .into_iter()
            .enumerate()
            .map(|(j, q)| match q {
                None => Cont::Lost,
                Some(q) if !self.window.contains(q[0], q[1]) => Cont::Out,
                Some(q) => match self.find_in(&a, q, b.pts[j].critical()) {
                    Some(i) => Cont::To(i),
                    None => Cont::Lost,
                },
            })
            .collect();

        let mut a_match = vec![None; a.pts.len()];
        let mut b_match = vec![None; b.pts.len()];
        for (i, f) in fwd.iter().enumerate() {
            if let Cont::To(j) = *f {
                if bwd[j] == Cont::To(i) && a.pts[i].d.species == b.pts[j].d.species {
                    a_match[i] = Some(j);
                    b_match[j] = Some(i);
                }
            }
        }
        let claimed_a = |i: usize| bwd.iter().any(|c| *c == Cont::To(i));
        let claimed_b = |j: usize| fwd.iter().any(|c| *c == Cont::To(j));
        let a_ok = (0..a.pts.len()).all(|i| a_match[i].is_some() || (fwd[i] == Cont::Out && !claimed_a(i)));
        let b_ok = (0..b.pts.len()).all(|j| b_match[j].is_some() || (bwd[j] == Cont::Out && !claimed_b(j)));

        if !(a_ok && b_ok) && dtab > 1.5 * self.dt_min {
            let tm = 0.5 * (a.t + b.t);
            let seeds: Vec<Pt> = a.pts.iter().chain(&b.pts).copied().collect();
            let dts: Vec<f64> = a.pts.iter().map(|_| tm - a.t).chain(b.pts.iter().map(|_| tm - b.t)).collect();
            let mid = self.sample(tm, &seeds, &dts, self.opts.coarse_density)?;
            let mid = self.process(a, mid)?;
            return self.process(mid, b);
        }

        // Finest level: greedy nearest same-species pairing of what is left.
        let mut cand = Vec::new();
        for i in (0..a.pts.len()).filter(|&i| a_match[i].is_none()) {
            for j in (0..b.pts.len()).filter(|&j| b_match[j].is_none()) {
                let (pa, pb) = (&a.pts[i], &b.pts[j]);
                if pa.d.species == pb.d.species {
                    let d = dist(pa.at(dtab), pb.d.pos());
                    if d <= self.match_radius {
                        cand.push((d, i, j));
                    }
                }
            }
        }
        cand.sort_by(|x, y| x.0.total_cmp(&y.0));
        for (_, i, j) in cand {
            if a_match[i].is_none() && b_match[j].is_none() {
                a_match[i] = Some(j);
                b_match[j] = Some(i);
            }
        }

        let tm = 0.5 * (a.t + b.t);
        let cap = 0.25 * self.window.width().min(self.window.height());
        // Merging pairs close in at a speed that diverges at the event, so a
        // fast end may still sit well away from it one interval earlier.
        let base = 2.0 * self.match_radius;
        let radius = |p: &Pt| base.max((4.0 * p.v[0].hypot(p.v[1]) * dtab).min(cap));
        for (i, pa) in a.pts.iter().enumerate() {
            if a_match[i].is_none() {
                if fwd[i] == Cont::Out && !claimed_a(i) {
                    self.deaths[pa.line] = LineEnd::Window;
                    self.crossings.push(tm);
                } else {
                    self.ends.push(End {
                        t: tm,
                        x: pa.d.x,
                        y: pa.d.y,
                        species: pa.d.species,
                        line: pa.line,
                        birth: false,
                        radius: radius(pa),
                    });
                }
            }
        }
        for j in 0..b.pts.len() {
            let mut p = b.pts[j];
            match b_match[j] {
                Some(i) => self.extend_line(&mut p, a.pts[i].line),
                None if bwd[j] == Cont::Out && !claimed_b(j) => {
                    self.new_line(&mut p, LineEnd::Window);
                    self.crossings.push(tm);
                }
                None => {
                    self.new_line(&mut p, LineEnd::TimeBoundary);
                    self.ends.push(End {
                        t: tm,
                        x: p.d.x,
                        y: p.d.y,
                        species: p.d.species,
                        line: p.line,
                        birth: true,
                        radius: radius(&p),
                    });
                }
            }
            b.pts[j] = p;
        }
        Ok(b)
    }

    fn update_match_radius(&mut self, s: &Sample) {
        let mut speeds: Vec<f64> = s.pts.iter().map(|p| p.v[0].hypot(p.v[1])).collect();
        speeds.sort_by(f64::total_cmp);
        let v_est = speeds.get(speeds.len() / 2).copied().unwrap_or(0.0);
        let cap = 0.25 * self.window.width().min(self.window.height());
        self.match_radius = (5.0 * self.dt * v_est).max(self.opts.min_match_radius).min(cap);
    }
}

fn legal(incoming: &[Species], outgoing: &[Species], nodal_only: bool) -> bool {
    if nodal_only {
        species_totals(incoming).0 == species_totals(outgoing).0
    } else {
        let g = |s: &[Species]| s.iter().map(|x| x.generator()).collect::<Vec<_>>();
        vertex_legal(&g(incoming), &g(outgoing))
    }
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// Defect lines and events of `field` over `[t_start, t_end]`.
pub fn track_with<F: PhaseField + ?Sized>(
    field: &F,
    t_start: f64,
    t_end: f64,
    dt: f64,
    window: &SearchWindow,
    opts: &TrackOptions,
) -> Result<Track> {
    window.validate()?;
    if !(t_start < t_end) || !t_start.is_finite() || !t_end.is_finite() {
        return Err(Error::InvalidArgument(format!("invalid time range ({t_start}, {t_end})")));
    }
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::InvalidArgument(format!("dt must be positive, got {dt}")));
    }
    if opts.refine == 0 || opts.coarse_density < 8 {
        return Err(Error::InvalidArgument("refine must be positive and coarse_density at least 8".into()));
    }
    let mut tr = Tracker {
        field,
        window: *window,
        opts: *opts,
        dt,
        dt_min: dt / opts.refine as f64,
        t_end,
        match_radius: opts.min_match_radius,
        lines: Vec::new(),
        births: Vec::new(),
        deaths: Vec::new(),
        ends: Vec::new(),
        crossings: Vec::new(),
        suspect: 0,
        warnings: Vec::new(),
    };
    let steps = ((t_end - t_start) / dt - 1e-9).ceil().max(1.0) as usize;
    let time = |k: usize| if k >= steps { t_end } else { t_start + k as f64 * dt };

    // Sample every step, then complete each sample from its neighbours.
    let mut samples = Vec::with_capacity(steps + 1);
    samples.push(tr.sample(t_start, &[], &[], window.grid_density)?);
    tr.update_match_radius(&samples[0]);
    for k in 1..=steps {
        let prev = samples[k - 1].pts.clone();
        let dts: Vec<f64> = prev.iter().map(|_| time(k) - samples[k - 1].t).collect();
        let s = tr.sample(time(k), &prev, &dts, opts.coarse_density)?;
        tr.update_match_radius(&s);
        samples.push(s);
    }
    for k in 0..steps {
        let (lo, hi) = samples.split_at_mut(k + 1);
        tr.complete(&lo[k], &mut hi[0]);
    }
    for k in (1..=steps).rev() {
        let (lo, hi) = samples.split_at_mut(k);
        tr.complete(&hi[0], &mut lo[k - 1]);
    }
    let mut edges = Vec::with_capacity(steps + 1);
    for k in 0..=steps {
        let edge = tr.census(samples[k].t);
        edges.push(tr.densify(&mut samples, k, edge)?);
    }

    let mut mismatch_times = Vec::new();
    let mut step_totals = Vec::with_capacity(steps + 1);
    let mut prev: Option<Sample> = None;
    for (s, edge) in samples.into_iter().zip(edges) {
        let s = match prev.take() {
            None => {
                let mut s = s;
                for p in s.pts.iter_mut() {
                    tr.new_line(p, LineEnd::TimeBoundary);
                }
                s
            }
            Some(a) => {
                tr.update_match_radius(&a);
                tr.process(a, s)?
            }
        };
        // Continuations may have added points; recount.
        let st = tr.step_totals(&s, edge);
        if !st.consistent() {
            mismatch_times.push(st.t);
            tr.warnings.push(format!("edge census disagrees at t = {}: {:?}", st.t, st));
        }
        step_totals.push(st);
        prev = Some(s);
    }

    // Cluster line ends into events.
    let ends = std::mem::take(&mut tr.ends);
    let t_link = 2.5 * tr.dt_min;
    let mut parent: Vec<usize> = (0..ends.len()).collect();
    for i in 0..ends.len() {
        for j in i + 1..ends.len() {
            let (e, f) = (&ends[i], &ends[j]);
            if (e.t - f.t).abs() <= t_link && dist([e.x, e.y], [f.x, f.y]) <= e.radius.max(f.radius) {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                parent[ri.max(rj)] = ri.min(rj);
            }
        }
    }
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    let mut root_of = std::collections::BTreeMap::new();
    for i in 0..ends.len() {
        let r = find(&mut parent, i);
        let k = *root_of.entry(r).or_insert_with(|| {
            clusters.push(Vec::new());
            clusters.len() - 1
        });
        clusters[k].push(i);
    }

    // Same-species death/birth pairs inside a cluster are one line that the matching lost.
    let mut line_parent: Vec<usize> = (0..tr.lines.len()).collect();
    let mut used = vec![false; ends.len()];
    for c in &clusters {
        let mut pairs = Vec::new();
        for &i in c.iter().filter(|&&i| !ends[i].birth) {
            for &j in c.iter().filter(|&&j| ends[j].birth) {
                let (d, b) = (&ends[i], &ends[j]);
                if d.species == b.species && d.t <= b.t {
                    pairs.push((dist([d.x, d.y], [b.x, b.y]), i, j));
                }
            }
        }
        pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
        for (_, i, j) in pairs {
            if !used[i] && !used[j] {
                used[i] = true;
                used[j] = true;
                line_parent[ends[j].line] = ends[i].line;
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = clusters
        .iter()
        .map(|c| c.iter().copied().filter(|&i| !used[i]).collect::<Vec<_>>())
        .filter(|c: &Vec<usize>| !c.is_empty())
        .collect();

    let species_of = |g: &[usize], birth: bool| -> Vec<Species> {
        let mut v: Vec<Species> = g.iter().filter(|&&i| ends[i].birth == birth).map(|&i| ends[i].species).collect();
        v.sort();
        v
    };
    let is_legal = |g: &[usize]| legal(&species_of(g, false), &species_of(g, true), opts.nodal_only);
    // Merge unbalanced neighbours whose union balances: whole connected
    // components first, then pairs.
    let near = |g: &[usize], h: &[usize]| {
        g.iter().any(|&a| {
            h.iter().any(|&b| {
                let (e, f) = (&ends[a], &ends[b]);
                (e.t - f.t).abs() <= dt && dist([e.x, e.y], [f.x, f.y]) <= 2.0 * e.radius.max(f.radius)
            })
        })
    };
    let bad: Vec<usize> = (0..groups.len()).filter(|&i| !is_legal(&groups[i])).collect();
    let mut comp: Vec<usize> = (0..bad.len()).collect();
    for i in 0..bad.len() {
        for j in i + 1..bad.len() {
            if near(&groups[bad[i]], &groups[bad[j]]) {
                let (ri, rj) = (find(&mut comp, i), find(&mut comp, j));
                comp[ri.max(rj)] = ri.min(rj);
            }
        }
    }
    let mut absorbed = vec![false; groups.len()];
    for i in 0..bad.len() {
        let r = find(&mut comp, i);
        if r != i {
            continue;
        }
        let members: Vec<usize> = (0..bad.len()).filter(|&j| find(&mut comp, j) == r).map(|j| bad[j]).collect();
        let union: Vec<usize> = members.iter().flat_map(|&g| groups[g].iter().copied()).collect();
        if members.len() > 1 && is_legal(&union) {
            groups[members[0]] = union;
            for &g in &members[1..] {
                absorbed[g] = true;
            }
        }
    }
    let mut groups: Vec<Vec<usize>> =
        groups.into_iter().zip(absorbed).filter(|(_, a)| !a).map(|(g, _)| g).collect();
    loop {
        let mut merged = false;
        'outer: for i in 0..groups.len() {
            if is_legal(&groups[i]) {
                continue;
            }
            for j in i + 1..groups.len() {
                if is_legal(&groups[j]) || !near(&groups[i], &groups[j]) {
                    continue;
                }
                let mut union = groups[i].clone();
                union.extend(&groups[j]);
                if is_legal(&union) {
                    groups[i] = union;
                    groups.remove(j);
                    merged = true;
                    break 'outer;
                }
            }
        }
        if !merged {
            break;
        }
    }
    groups.sort_by(|a, b| {
        let ta = a.iter().map(|&i| ends[i].t).fold(f64::INFINITY, f64::min);
        let tb = b.iter().map(|&i| ends[i].t).fold(f64::INFINITY, f64::min);
        ta.total_cmp(&tb)
    });

    let mut events = Vec::with_capacity(groups.len());
    for (id, g) in groups.iter().enumerate() {
        let n = g.len() as f64;
        let (mut t, mut x, mut y) = (0.0, 0.0, 0.0);
        for &i in g {
            t += ends[i].t / n;
            x += ends[i].x / n;
            y += ends[i].y / n;
        }
        let incoming = species_of(g, false);
        let outgoing = species_of(g, true);
        let legal = legal(&incoming, &outgoing, opts.nodal_only);
        // Partners beyond the window edge or outside the time range.
        let boundary = !legal
            && (g.iter().any(|&i| window.edge_distance(ends[i].x, ends[i].y) <= ends[i].radius)
                || t - t_start <= t_link
                || t_end - t <= t_link);
        for &i in g {
            if ends[i].birth {
                tr.births[ends[i].line] = LineEnd::Event(id);
            } else {
                tr.deaths[ends[i].line] = LineEnd::Event(id);
            }
        }
        events.push(TopologicalEvent {
            id,
            t,
            x,
            y,
            incoming,
            outgoing,
            legal,
            boundary,
        });
    }

    // Splice relinked lines.
    let nl = tr.lines.len();
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); nl];
    for l in 0..nl {
        let r = find(&mut line_parent, l);
        members[r].push(l);
    }
    let mut lines = Vec::new();
    for (r, mem) in members.into_iter().enumerate() {
        if mem.is_empty() {
            continue;
        }
        let mut mem = mem;
        mem.sort_by(|a, b| tr.lines[*a][0].t.total_cmp(&tr.lines[*b][0].t));
        let samples: Vec<Defect> = mem.iter().flat_map(|&l| tr.lines[l].iter().copied()).collect();
        let _ = r;
        lines.push(DefectLine {
            id: 0,
            samples,
            birth: tr.births[mem[0]],
            death: tr.deaths[*mem.last().expect("nonempty")],
        });
    }
    lines.sort_by(|a, b| {
        a.samples[0]
            .t
            .total_cmp(&b.samples[0].t)
            .then(a.samples[0].x.total_cmp(&b.samples[0].x))
            .then(a.samples[0].y.total_cmp(&b.samples[0].y))
    });
    for (k, l) in lines.iter_mut().enumerate() {
        l.id = k;
    }

    // Totals may only change across a step that holds an event or an edge crossing.
    let mut unexplained = 0;
    for w in step_totals.windows(2) {
        let (s0, s1) = (&w[0], &w[1]);
        if (s0.w, s0.chi) != (s1.w, s1.chi) {
            // A sample taken on top of an event may miscount the merging pair.
            let inside = |t: f64| t > s0.t - dt && t <= s1.t + dt;
            let explained = events.iter().any(|e| inside(e.t)) || tr.crossings.iter().any(|&t| t > s0.t && t <= s1.t);
            if !explained {
                unexplained += 1;
            }
        }
    }
    // Right at an event the merging defects are closer than any sampling can
    // separate; the event itself is checked for legality instead.
    let census_mismatches = mismatch_times
        .iter()
        .filter(|&&t| !events.iter().any(|e| (e.t - t).abs() <= dt))
        .count();
    let illegal = events.iter().filter(|e| e.is_violation()).count();
    Ok(Track {
        lines,
        events,
        steps: step_totals,
        violations: illegal + census_mismatches + unexplained,
        census_mismatches,
        unexplained_changes: unexplained,
        suspect: tr.suspect,
        dt_min: tr.dt_min,
        warnings: tr.warnings,
    })
}
