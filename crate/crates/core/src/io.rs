//! Run configuration and CSV/JSON export.
//!
//! Every file written here parses back into the structure that produced it.
//! CSV files are UTF-8 with a header row. JSON keys follow struct field order.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::ensemble::{uncertainty_check, Fit, SigmaStat, SweepConfig, SweepResult};
use crate::error::{Error, Result};
use crate::linalg::{sample_ginibre, ComplexMatrix, EvolutionLaw, C64};
use crate::rootfind::SearchWindow;
use crate::topology::{Defect, Species};
use crate::tracker::{DefectLine, StepTotals};
use crate::wavefield::{builtin_bubble, phase_of, FieldSpec, LineEllipse, PhaseField, PhaseSurface, WaveField};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Simulate,
    Track,
    Lifetimes,
    Algebra,
}

/// Built-in analytic fields.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Builtin {
    Bubble,
    AppendixC,
    AppendixD,
}

impl std::str::FromStr for Builtin {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bubble" => Ok(Builtin::Bubble),
            "appendix-c" => Ok(Builtin::AppendixC),
            "appendix-d" => Ok(Builtin::AppendixD),
            _ => Err(Error::Parse(format!("unknown builtin '{s}' (bubble, appendix-c, appendix-d)"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FieldConfig {
    pub n: usize,
    /// Slots holding `λ`; defaults to `n`.
    pub xi: Option<usize>,
    /// Ginibre scale; defaults to `1/√(2N)`.
    pub sigma: Option<f64>,
    /// Explicit `M₀`, used instead of a sampled matrix.
    pub matrix: Option<ComplexMatrix>,
    /// Deformation amplitude `s` as `[re, im]`.
    pub s: [f64; 2],
    pub builtin: Option<Builtin>,
    /// Half-life `T` of the bubble.
    #[serde(rename = "T")]
    pub t_half: f64,
    /// `ε` of the phase-surface and line-ellipse fields at `t = 0`.
    pub eps: f64,
    /// `dε/dt` of the phase-surface and line-ellipse fields.
    pub eps_rate: f64,
}

impl Default for FieldConfig {
    fn default() -> Self {
        FieldConfig {
            n: 4,
            xi: None,
            sigma: None,
            matrix: None,
            s: [1.0, 0.0],
            builtin: None,
            t_half: 1.0,
            eps: 0.0,
            eps_rate: 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WindowConfig {
    /// Explicit `[x_min, x_max, y_min, y_max]`.
    pub bounds: Option<[f64; 4]>,
    /// Half-width of a square window about `center`; chosen from the field when absent.
    pub half_width: Option<f64>,
    pub center: [f64; 2],
    pub density: usize,
}

impl Default for WindowConfig {
    fn default() -> Self {
        WindowConfig {
            bounds: None,
            half_width: None,
            center: [0.0, 0.0],
            density: 32,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TimeConfig {
    pub t0: f64,
    pub t1: f64,
    pub dt: f64,
    /// Snapshot times for `simulate`; `[t0]` when empty.
    pub snapshots: Vec<f64>,
}

impl Default for TimeConfig {
    fn default() -> Self {
        TimeConfig {
            t0: 0.0,
            t1: 1.0,
            dt: 0.01,
            snapshots: Vec::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LifetimesConfig {
    pub sigmas: Vec<f64>,
    /// Trials per `σ`; defaults to 1000, or 5000 with `paper_scale`.
    pub trials: Option<usize>,
    pub paper_scale: bool,
    pub dt: f64,
    pub quaternion_density: usize,
}

impl Default for LifetimesConfig {
    fn default() -> Self {
        let d = SweepConfig::default();
        LifetimesConfig {
            sigmas: d.sigmas,
            trials: None,
            paper_scale: false,
            dt: d.dt,
            quaternion_density: d.quaternion_density,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AlgebraConfig {
    /// Print the multiplets for `P = 1..=multiplet`.
    pub multiplet: Option<usize>,
    /// Reactions such as `"v + v* -> e + e"` to check.
    pub check: Vec<String>,
}

/// Everything one CLI invocation needs; CLI flags override the fields.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub mode: Mode,
    pub field: FieldConfig,
    pub window: WindowConfig,
    pub time: TimeConfig,
    pub seed: u64,
    /// Output directory.
    pub out: PathBuf,
    /// Phase-grid points per axis for `simulate`.
    pub grid: usize,
    /// Track only zeros of `Ψ`.
    pub nodal_only: bool,
    /// Unconverged suspect roots also fail the run.
    pub strict: bool,
    pub lifetimes: LifetimesConfig,
    pub algebra: AlgebraConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            mode: Mode::default(),
            field: FieldConfig::default(),
            window: WindowConfig::default(),
            time: TimeConfig::default(),
            seed: 0,
            out: PathBuf::from("out"),
            grid: 200,
            nodal_only: false,
            strict: false,
            lifetimes: LifetimesConfig::default(),
            algebra: AlgebraConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let mut text = String::new();
        File::open(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?
            .read_to_string(&mut text)?;
        Self::from_json(&text)
    }

    pub fn s(&self) -> C64 {
        C64::new(self.field.s[0], self.field.s[1])
    }

    pub fn sigma(&self) -> f64 {
        self.field
            .sigma
            .unwrap_or_else(|| 1.0 / (2.0 * self.field.n.max(1) as f64).sqrt())
    }

    /// The configured field: a built-in, or `det(M₀ + tS − Λ_ξ)` with `M₀`
    /// explicit or sampled from `seed`.
    pub fn build_field(&self) -> Result<FieldSpec> {
        let f = &self.field;
        Ok(match f.builtin {
            Some(Builtin::Bubble) => {
                if !(f.t_half > 0.0) {
                    return Err(Error::InvalidArgument(format!("bubble T must be positive, got {}", f.t_half)));
                }
                FieldSpec::Bubble(builtin_bubble(f.t_half))
            }
            Some(Builtin::AppendixC) => FieldSpec::AppendixC(PhaseSurface {
                eps: f.eps,
                eps_rate: f.eps_rate,
            }),
            Some(Builtin::AppendixD) => FieldSpec::AppendixD(LineEllipse {
                eps: f.eps,
                eps_rate: f.eps_rate,
            }),
            None => {
                let m0 = match &f.matrix {
                    Some(m) => m.clone(),
                    None => sample_ginibre(f.n, self.sigma(), self.seed)?,
                };
                let xi = f.xi.unwrap_or(m0.n());
                FieldSpec::Determinantal(WaveField::new(EvolutionLaw::new(m0, self.s()), xi)?)
            }
        })
    }

    /// The configured window, or one sized to the field: the eigenvalue
    /// support plus the drift over the time range for matrix fields.
    pub fn search_window(&self) -> Result<SearchWindow> {
        let w = &self.window;
        if let Some([x0, x1, y0, y1]) = w.bounds {
            return SearchWindow::new(x0, x1, y0, y1, w.density);
        }
        let half = match (w.half_width, self.field.builtin) {
            (Some(h), _) => h,
            (None, Some(Builtin::Bubble)) => 3.0 * self.field.t_half,
            (None, Some(Builtin::AppendixC)) => 1.5,
            (None, Some(Builtin::AppendixD)) => 3.0,
            (None, None) => {
                let n = self.field.matrix.as_ref().map_or(self.field.n, |m| m.n()) as f64;
                let spread = match &self.field.matrix {
                    Some(m) => m.max_abs() * n,
                    None => 3.0 * self.sigma() * n.sqrt(),
                };
                let t = self.time.t0.abs().max(self.time.t1.abs()).max(self.time.snapshots.iter().fold(0.0, |a, s| a.max(s.abs())));
                spread + self.s().norm() * t + 1.0
            }
        };
        SearchWindow::square(w.center[0], w.center[1], half, w.density)
    }

    pub fn sweep_config(&self) -> SweepConfig {
        let l = &self.lifetimes;
        let trials = l.trials.unwrap_or(if l.paper_scale { 5000 } else { 1000 });
        SweepConfig {
            sigmas: l.sigmas.clone(),
            trials_per_sigma: trials,
            s: self.s(),
            t_range: None,
            dt: l.dt,
            base_seed: self.seed,
            quaternion_density: l.quaternion_density,
            ..SweepConfig::default()
        }
    }
}

/// One row of a trajectory file.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRow {
    pub line_id: usize,
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub species: Species,
    pub m: i64,
    pub n: i64,
}

/// One row of a phase-grid file.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseRow {
    pub x: f64,
    pub y: f64,
    pub phase: f64,
}

/// Fit summary written next to the sweep CSV.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitSummary {
    pub intercept: f64,
    pub slope: f64,
    pub r2: f64,
    pub uncertainty_check: f64,
    pub trials_per_sigma: usize,
    pub sigmas: Vec<f64>,
}

impl FitSummary {
    pub fn from_result(r: &SweepResult) -> Self {
        let Fit { intercept, slope, r2 } = r.fit;
        FitSummary {
            intercept,
            slope,
            r2,
            uncertainty_check: uncertainty_check(r),
            trials_per_sigma: r.trials_per_sigma,
            sigmas: r.per_sigma.iter().map(|p| p.sigma).collect(),
        }
    }
}

pub fn trajectory_rows(lines: &[DefectLine]) -> Vec<TrajectoryRow> {
    lines
        .iter()
        .flat_map(|l| {
            l.samples.iter().map(move |d| TrajectoryRow {
                line_id: l.id,
                t: d.t,
                x: d.x,
                y: d.y,
                species: d.species,
                m: d.m,
                n: d.n_index,
            })
        })
        .collect()
}

/// Phase on an `nx × ny` grid spanning the window, rows ordered by `y` then `x`.
pub fn phase_grid<F: PhaseField + ?Sized>(field: &F, window: &SearchWindow, t: f64, nx: usize, ny: usize) -> Vec<PhaseRow> {
    let at = |lo: f64, hi: f64, k: usize, n: usize| if n < 2 { 0.5 * (lo + hi) } else { lo + (hi - lo) * k as f64 / (n - 1) as f64 };
    let mut rows = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        let y = at(window.y_min, window.y_max, j, ny);
        for i in 0..nx {
            let x = at(window.x_min, window.x_max, i, nx);
            rows.push(PhaseRow {
                x,
                y,
                phase: phase_of(field.psi(x, y, t)),
            });
        }
    }
    rows
}

/// Serializes `rows` as CSV with a header.
pub fn write_csv<T: Serialize, W: Write>(w: W, rows: &[T]) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    for r in rows {
        wr.serialize(r)?;
    }
    wr.flush()?;
    Ok(())
}

pub fn read_csv<T: DeserializeOwned, R: Read>(r: R) -> Result<Vec<T>> {
    csv::Reader::from_reader(r)
        .deserialize()
        .map(|row| row.map_err(|e| Error::Parse(e.to_string())))
        .collect()
}

pub fn write_json<T: Serialize, W: Write>(mut w: W, value: &T) -> Result<()> {
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    Ok(())
}

pub fn read_json<T: DeserializeOwned, R: Read>(r: R) -> Result<T> {
    Ok(serde_json::from_reader(r)?)
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
        }
    }
    Ok(BufWriter::new(File::create(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?))
}

fn open(path: &Path) -> Result<BufReader<File>> {
    Ok(BufReader::new(File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?))
}

pub fn save_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    write_csv(create(path)?, rows)
}

pub fn load_csv<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    read_csv(open(path)?)
}

pub fn save_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = create(path)?;
    write_json(&mut w, value)?;
    w.flush()?;
    Ok(())
}

pub fn load_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    read_json(open(path)?)
}

/// Defect list columns: `t, x, y, m, n, species`.
pub fn save_defects(path: &Path, defects: &[Defect]) -> Result<()> {
    save_csv(path, defects)
}

/// Step totals columns: `t, w, chi, count, edge_w, edge_chi`.
pub fn save_steps(path: &Path, steps: &[StepTotals]) -> Result<()> {
    save_csv(path, steps)
}

/// Sweep columns: `sigma, mean_t_max, n_transients, stderr, n_clipped, n_unpaired`.
pub fn save_sweep(path: &Path, per_sigma: &[SigmaStat]) -> Result<()> {
    save_csv(path, per_sigma)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tracker::{LineEnd, TopologicalEvent};

    fn round_trip<T: Serialize + DeserializeOwned + PartialEq + std::fmt::Debug>(rows: &[T]) {
        let mut buf = Vec::new();
        write_csv(&mut buf, rows).unwrap();
        let back: Vec<T> = read_csv(buf.as_slice()).unwrap();
        assert_eq!(back, rows);
    }

    #[test]
    fn defect_csv_round_trip_and_header() {
        let d = vec![
            Defect::new(0.25, -1.5, 0.1, Species::Vortex),
            Defect::new(1e-17, 3.0, 0.1, Species::AntiVortex),
            Defect::new(0.0, 0.0, 0.2, Species::Saddle),
        ];
        let mut buf = Vec::new();
        write_csv(&mut buf, &d).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("t,x,y,m,n,species\n"));
        assert!(text.contains("anti-vortex"));
        round_trip(&d);
    }

    #[test]
    fn other_csv_round_trips() {
        let line = DefectLine {
            id: 3,
            samples: vec![Defect::new(0.1, 0.2, 0.0, Species::Maximum), Defect::new(0.11, 0.2, 0.01, Species::Maximum)],
            birth: LineEnd::TimeBoundary,
            death: LineEnd::Event(0),
        };
        round_trip(&trajectory_rows(&[line]));
        round_trip(&[PhaseRow {
            x: 0.5,
            y: -0.5,
            phase: 3.0,
        }]);
        round_trip(&[StepTotals {
            t: 0.5,
            w: 2,
            chi: 0,
            count: 6,
            edge_w: Some(2),
            edge_chi: None,
        }]);
        round_trip(&[SigmaStat {
            sigma: 2.0,
            mean_t_max: 3.3,
            n_transients: 600,
            stderr: 0.07,
            n_clipped: 1,
            n_unpaired: 0,
        }]);
    }

    #[test]
    fn events_json_round_trip_keeps_key_order() {
        let e = vec![TopologicalEvent {
            id: 0,
            t: -1.0,
            x: 0.0,
            y: 0.0,
            incoming: vec![],
            outgoing: vec![Species::Vortex, Species::AntiVortex, Species::Saddle, Species::Saddle],
            legal: true,
            boundary: false,
        }];
        let mut buf = Vec::new();
        write_json(&mut buf, &e).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        let pos: Vec<usize> = ["\"t\"", "\"x\"", "\"y\"", "\"incoming\"", "\"outgoing\"", "\"legal\""]
            .iter()
            .map(|k| text.find(k).unwrap())
            .collect();
        assert!(pos.windows(2).all(|w| w[0] < w[1]));
        let back: Vec<TopologicalEvent> = read_json(buf.as_slice()).unwrap();
        assert_eq!(back, e);
    }

    #[test]
    fn run_config_round_trip() {
        let mut c = RunConfig {
            mode: Mode::Track,
            seed: 17,
            strict: true,
            ..RunConfig::default()
        };
        c.field.builtin = Some(Builtin::Bubble);
        c.field.matrix = Some(ComplexMatrix::from_2x2(
            C64::new(1.0, 0.5),
            C64::new(-2.0, 0.0),
            C64::new(1.0, 0.0),
            C64::new(2.0, -1.0),
        ));
        c.time.snapshots = vec![0.0, 0.5];
        c.algebra.check = vec!["v -> e".into()];
        let text = c.to_json().unwrap();
        assert_eq!(RunConfig::from_json(&text).unwrap(), c);
        assert_eq!(RunConfig::from_json("{}").unwrap(), RunConfig::default());
        assert!(RunConfig::from_json(r#"{"modes": "track"}"#).is_err());
    }

    #[test]
    fn partial_config_fills_defaults() {
        let c = RunConfig::from_json(r#"{"mode": "lifetimes", "lifetimes": {"paper_scale": true}}"#).unwrap();
        assert_eq!(c.mode, Mode::Lifetimes);
        assert_eq!(c.sweep_config().trials_per_sigma, 5000);
        assert_eq!(c.sweep_config().sigmas.len(), 10);
    }

    #[test]
    fn builds_fields_and_windows() {
        let mut c = RunConfig::default();
        c.field.n = 3;
        c.field.xi = Some(2);
        match c.build_field().unwrap() {
            FieldSpec::Determinantal(f) => assert_eq!((f.n(), f.xi), (3, 2)),
            other => panic!("{other:?}"),
        }
        c.field.builtin = Some(Builtin::AppendixD);
        assert!(matches!(c.build_field().unwrap(), FieldSpec::AppendixD(_)));
        let w = c.search_window().unwrap();
        assert_eq!((w.x_min, w.x_max), (-3.0, 3.0));
        c.window.bounds = Some([0.0, 1.0, -1.0, 2.0]);
        assert_eq!(c.search_window().unwrap().y_max, 2.0);
        c.field.builtin = Some(Builtin::Bubble);
        c.field.t_half = 0.0;
        assert!(c.build_field().is_err());
    }

    #[test]
    fn phase_grid_covers_window() {
        let w = SearchWindow::square(0.0, 0.0, 1.0, 8).unwrap();
        let g = phase_grid(&builtin_bubble(1.0), &w, 0.0, 5, 3);
        assert_eq!(g.len(), 15);
        assert_eq!((g[0].x, g[0].y), (-1.0, -1.0));
        assert_eq!((g[14].x, g[14].y), (1.0, 1.0));
        assert!(g.iter().all(|r| r.phase > -std::f64::consts::PI && r.phase <= std::f64::consts::PI));
    }

    #[test]
    fn files_round_trip() {
        let dir = std::env::temp_dir().join(format!("defectline-io-{}", std::process::id()));
        let p = dir.join("nested/defects.csv");
        let d = vec![Defect::new(1.0, 2.0, 0.0, Species::Minimum)];
        save_defects(&p, &d).unwrap();
        assert_eq!(load_csv::<Defect>(&p).unwrap(), d);
        let j = dir.join("fit.json");
        let f = FitSummary {
            intercept: 0.01,
            slope: 1.63,
            r2: 0.99,
            uncertainty_check: 1.02,
            trials_per_sigma: 10,
            sigmas: vec![2.0, 4.0],
        };
        save_json(&j, &f).unwrap();
        assert_eq!(load_json::<FitSummary>(&j).unwrap(), f);
        assert!(load_csv::<Defect>(&dir.join("missing.csv")).is_err());
        std::fs::remove_dir_all(dir).unwrap();
    }
}
