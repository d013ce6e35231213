//! Command-line front end: flag parsing, config merging and the four commands.
//!
//! Each command writes its files under the output directory, prints a short
//! summary, and returns the process exit code: 0 when the run is clean, 1 when
//! it found conservation violations (or, with `--strict`, unconverged roots).

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use defectline::ensemble::{run_sweep, scaling_check, uncertainty_check};
use defectline::io::{
    phase_grid, save_csv, save_defects, save_json, save_steps, save_sweep, trajectory_rows, Builtin, FitSummary, Mode,
    RunConfig,
};
use defectline::rootfind::{find_phase_critical_points_with, find_plane_zeros_with, RootOptions};
use defectline::topology::{
    classify_with, contour_radius, enumerate_multiplet, format_multiset, group_reduce, parse_reaction, totals,
    vertex_legal, ContourParams, Defect, PointKind, Species,
};
use defectline::tracker::{track_with, TrackOptions};
use defectline::{Error, Result};

#[derive(Parser, Debug)]
#[command(name = "defectline", version, about = "Phase defects of evolving determinantal wave functions")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub flags: Flags,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    /// Defects and phase grid at snapshot times.
    Simulate,
    /// Defect lines and events over a time range.
    Track,
    /// Transient lifetimes swept over sigma, with the linear fit.
    Lifetimes,
    /// Defect-group multiplets and reaction checks.
    Algebra,
}

impl From<Command> for Mode {
    fn from(c: Command) -> Mode {
        match c {
            Command::Simulate => Mode::Simulate,
            Command::Track => Mode::Track,
            Command::Lifetimes => Mode::Lifetimes,
            Command::Algebra => Mode::Algebra,
        }
    }
}

/// Flags shared by all commands; each overrides the matching config field.
#[derive(Args, Debug, Default, Clone)]
pub struct Flags {
    /// JSON run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Matrix size N.
    #[arg(long, global = true)]
    pub n: Option<usize>,
    /// Slots holding lambda (xi = N gives only vortices).
    #[arg(long, global = true)]
    pub xi: Option<usize>,
    /// Ginibre scale sigma.
    #[arg(long, global = true)]
    pub sigma: Option<f64>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Real part of the deformation amplitude s.
    #[arg(long = "s-re", global = true, allow_negative_numbers = true)]
    pub s_re: Option<f64>,
    /// Imaginary part of the deformation amplitude s.
    #[arg(long = "s-im", global = true, allow_negative_numbers = true)]
    pub s_im: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub t0: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub t1: Option<f64>,
    #[arg(long, global = true)]
    pub dt: Option<f64>,
    /// Snapshot times for simulate, comma separated.
    #[arg(long = "t", global = true, value_delimiter = ',', allow_negative_numbers = true)]
    pub t: Vec<f64>,
    /// Half-width H of a square window, or x_min,x_max,y_min,y_max.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub window: Option<String>,
    /// Seeds per axis of the root search.
    #[arg(long, global = true)]
    pub density: Option<usize>,
    /// bubble, appendix-c or appendix-d.
    #[arg(long, global = true)]
    pub builtin: Option<String>,
    /// Bubble half-life T.
    #[arg(long = "T", global = true)]
    pub t_half: Option<f64>,
    /// Epsilon of the phase-surface and line-ellipse fields at t = 0.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub eps: Option<f64>,
    /// d(epsilon)/dt of the phase-surface and line-ellipse fields.
    #[arg(long = "eps-rate", global = true, allow_negative_numbers = true)]
    pub eps_rate: Option<f64>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Phase-grid points per axis for simulate.
    #[arg(long, global = true)]
    pub grid: Option<usize>,
    /// Track only zeros of the field.
    #[arg(long = "nodal-only", global = true)]
    pub nodal_only: bool,
    /// Sigmas for lifetimes, comma separated.
    #[arg(long, global = true, value_delimiter = ',')]
    pub sigmas: Vec<f64>,
    /// Trials per sigma for lifetimes.
    #[arg(long, global = true)]
    pub trials: Option<usize>,
    /// 5000 trials per sigma.
    #[arg(long = "paper-scale", global = true)]
    pub paper_scale: bool,
    /// Also run the paired rescaling check M0 -> c*M0 with this factor c.
    #[arg(long, global = true)]
    pub scaling: Option<f64>,
    /// Print the multiplets for P = 1..=P.
    #[arg(long, global = true)]
    pub multiplet: Option<usize>,
    /// Reaction to check, e.g. "v + v* -> e + e"; repeatable.
    #[arg(long, global = true)]
    pub check: Vec<String>,
    /// Unconverged suspect roots also fail the run.
    #[arg(long, global = true)]
    pub strict: bool,
}

fn parse_window(s: &str, cfg: &mut RunConfig) -> Result<()> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|_| Error::Parse(format!("bad window '{s}'"))))
        .collect::<Result<_>>()?;
    match parts[..] {
        [h] => {
            cfg.window.half_width = Some(h);
            cfg.window.bounds = None;
        }
        [a, b, c, d] => cfg.window.bounds = Some([a, b, c, d]),
        _ => return Err(Error::Parse(format!("window '{s}' needs 1 or 4 numbers"))),
    }
    Ok(())
}

/// The config file (if any) with the flags applied on top.
pub fn resolve(cli: &Cli) -> Result<RunConfig> {
    let f = &cli.flags;
    let mut c = match &f.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    c.mode = cli.command.into();
    if let Some(v) = f.n {
        c.field.n = v;
    }
    if f.xi.is_some() {
        c.field.xi = f.xi;
    }
    if f.sigma.is_some() {
        c.field.sigma = f.sigma;
    }
    if let Some(v) = f.seed {
        c.seed = v;
    }
    if let Some(v) = f.s_re {
        c.field.s[0] = v;
    }
    if let Some(v) = f.s_im {
        c.field.s[1] = v;
    }
    if let Some(v) = f.t0 {
        c.time.t0 = v;
    }
    if let Some(v) = f.t1 {
        c.time.t1 = v;
    }
    if let Some(v) = f.dt {
        c.time.dt = v;
        c.lifetimes.dt = v;
    }
    if !f.t.is_empty() {
        c.time.snapshots = f.t.clone();
    }
    if let Some(w) = &f.window {
        parse_window(w, &mut c)?;
    }
    if let Some(v) = f.density {
        c.window.density = v;
    }
    if let Some(b) = &f.builtin {
        c.field.builtin = Some(b.parse::<Builtin>()?);
    }
    if let Some(v) = f.t_half {
        c.field.t_half = v;
    }
    if let Some(v) = f.eps {
        c.field.eps = v;
    }
    if let Some(v) = f.eps_rate {
        c.field.eps_rate = v;
    }
    if let Some(v) = &f.out {
        c.out = v.clone();
    }
    if let Some(v) = f.grid {
        c.grid = v;
    }
    c.nodal_only |= f.nodal_only;
    if !f.sigmas.is_empty() {
        c.lifetimes.sigmas = f.sigmas.clone();
    }
    if f.trials.is_some() {
        c.lifetimes.trials = f.trials;
    }
    c.lifetimes.paper_scale |= f.paper_scale;
    if let Some(p) = f.multiplet {
        c.algebra.multiplet = Some(p);
    }
    c.algebra.check.extend(f.check.iter().cloned());
    c.strict |= f.strict;
    Ok(c)
}

fn io_err(e: std::io::Error) -> Error {
    Error::Io(e.to_string())
}

fn species_summary(defects: &[Defect]) -> String {
    Species::ALL
        .iter()
        .filter_map(|s| {
            let k = defects.iter().filter(|d| d.species == *s).count();
            (k > 0).then(|| format!("{k} {s}"))
        })
        .collect::<Vec<_>>()
        .join(", ")
}

fn exit_code(violations: usize, suspect: usize, strict: bool) -> i32 {
    i32::from(violations > 0 || (strict && suspect > 0))
}

/// Classified zeros and critical points at `t`, the suspect count, and the
/// points that could not be classified.
fn defects_at(cfg: &RunConfig, t: f64) -> Result<(Vec<Defect>, usize, usize)> {
    let spec = cfg.build_field()?;
    let field = spec.as_field();
    let window = cfg.search_window()?;
    let opts = RootOptions::default();
    let zeros = find_plane_zeros_with(field, t, &window, &opts, &[])?;
    let crit = find_phase_critical_points_with(field, t, &window, &opts, &[])?;
    let all: Vec<[f64; 2]> = zeros.roots.iter().chain(&crit.roots).map(|p| [p.x, p.y]).collect();
    let mut out = Vec::new();
    let mut unclassified = 0;
    let params = ContourParams::default();
    for (pts, kind) in [(&zeros.roots, PointKind::Nodal), (&crit.roots, PointKind::Critical)] {
        for p in pts.iter() {
            let others: Vec<[f64; 2]> = all.iter().copied().filter(|q| *q != [p.x, p.y]).collect();
            let r = contour_radius([p.x, p.y], &others);
            match classify_with(field, p, kind, t, r, &params) {
                Ok(d) => out.push(d),
                Err(_) => unclassified += 1,
            }
        }
    }
    Ok((out, zeros.suspect.len() + crit.suspect.len(), unclassified))
}

pub fn cmd_simulate(cfg: &RunConfig, log: &mut dyn Write) -> Result<i32> {
    let spec = cfg.build_field()?;
    let window = cfg.search_window()?;
    let times = if cfg.time.snapshots.is_empty() { vec![cfg.time.t0] } else { cfg.time.snapshots.clone() };
    let mut all = Vec::new();
    let (mut suspect, mut unclassified) = (0, 0);
    for (k, &t) in times.iter().enumerate() {
        let (defects, s, u) = defects_at(cfg, t)?;
        suspect += s;
        unclassified += u;
        let (w, chi) = totals(&defects);
        writeln!(
            log,
            "t = {t}: {} defects ({}); w = {w}, chi = {chi}",
            defects.len(),
            species_summary(&defects)
        )
        .map_err(io_err)?;
        for d in &defects {
            writeln!(log, "  {:>11} ({:+.6}, {:+.6})", d.species.name(), d.x, d.y).map_err(io_err)?;
        }
        save_csv(&cfg.out.join(format!("phase_{k}.csv")), &phase_grid(spec.as_field(), &window, t, cfg.grid, cfg.grid))?;
        all.extend(defects);
    }
    save_defects(&cfg.out.join("defects.csv"), &all)?;
    save_json(&cfg.out.join("config.json"), cfg)?;
    writeln!(log, "suspect roots: {suspect}; unclassified: {unclassified}").map_err(io_err)?;
    Ok(exit_code(0, suspect + unclassified, cfg.strict))
}

pub fn cmd_track(cfg: &RunConfig, log: &mut dyn Write) -> Result<i32> {
    let spec = cfg.build_field()?;
    let window = cfg.search_window()?;
    let opts = TrackOptions {
        nodal_only: cfg.nodal_only,
        ..TrackOptions::default()
    };
    let tr = track_with(spec.as_field(), cfg.time.t0, cfg.time.t1, cfg.time.dt, &window, &opts)?;
    save_csv(&cfg.out.join("trajectories.csv"), &trajectory_rows(&tr.lines))?;
    save_json(&cfg.out.join("events.json"), &tr.events)?;
    save_steps(&cfg.out.join("steps.csv"), &tr.steps)?;
    save_json(&cfg.out.join("config.json"), cfg)?;

    // Totals per stretch of constant (w, chi).
    let mut k = 0;
    while k < tr.steps.len() {
        let s = &tr.steps[k];
        let mut j = k;
        while j + 1 < tr.steps.len() && (tr.steps[j + 1].w, tr.steps[j + 1].chi) == (s.w, s.chi) {
            j += 1;
        }
        writeln!(log, "t in [{:.6}, {:.6}]: w = {}, chi = {}", s.t, tr.steps[j].t, s.w, s.chi).map_err(io_err)?;
        k = j + 1;
    }
    for e in &tr.events {
        let label = if e.legal {
            "legal"
        } else if e.boundary {
            "boundary"
        } else {
            "ILLEGAL"
        };
        let names = |v: &[Species]| {
            if v.is_empty() {
                "0".to_string()
            } else {
                v.iter().map(|s| s.name()).collect::<Vec<_>>().join(" + ")
            }
        };
        writeln!(
            log,
            "event {} at t = {:.6}, ({:+.4}, {:+.4}): {} -> {} [{label}]",
            e.id,
            e.t,
            e.x,
            e.y,
            names(&e.incoming),
            names(&e.outgoing)
        )
        .map_err(io_err)?;
    }
    for w in &tr.warnings {
        writeln!(log, "warning: {w}").map_err(io_err)?;
    }
    writeln!(
        log,
        "lines: {}; events: {}; violations: {}; suspect roots: {}",
        tr.lines.len(),
        tr.events.len(),
        tr.violations,
        tr.suspect
    )
    .map_err(io_err)?;
    Ok(exit_code(tr.violations, tr.suspect, cfg.strict))
}

pub fn cmd_lifetimes(cfg: &RunConfig, scaling: Option<f64>, log: &mut dyn Write) -> Result<i32> {
    let sweep = cfg.sweep_config();
    let r = run_sweep(&sweep)?;
    save_sweep(&cfg.out.join("sweep.csv"), &r.per_sigma)?;
    let summary = FitSummary::from_result(&r);
    save_json(&cfg.out.join("fit.json"), &summary)?;
    save_json(&cfg.out.join("config.json"), cfg)?;
    for p in &r.per_sigma {
        writeln!(
            log,
            "sigma = {:>6}: mean t_max = {:.4} +- {:.4} over {} transients ({} clipped)",
            p.sigma, p.mean_t_max, p.stderr, p.n_transients, p.n_clipped
        )
        .map_err(io_err)?;
    }
    writeln!(
        log,
        "fit: t_max = {:.6} + {:.6} sigma (r2 = {:.5})",
        r.fit.intercept, r.fit.slope, r.fit.r2
    )
    .map_err(io_err)?;
    writeln!(log, "uncertainty check: {:.4}", uncertainty_check(&r)).map_err(io_err)?;
    let unpaired: usize = r.per_sigma.iter().map(|p| p.n_unpaired).sum();
    let mut violations = 0;
    if let Some(c) = scaling {
        let sigma = sweep.sigmas[0];
        let rep = scaling_check(sigma, c, sweep.trials_per_sigma.min(1000), sweep.s, sweep.dt, sweep.base_seed)?;
        save_json(&cfg.out.join("scaling.json"), &rep)?;
        writeln!(
            log,
            "scaling x{c} at sigma = {sigma}: {} pairs, mean ratio {:.12}, max rel dev {:.3e}, count mismatches {}",
            rep.compared, rep.mean_ratio, rep.max_rel_dev, rep.count_mismatches
        )
        .map_err(io_err)?;
        if rep.count_mismatches > 0 || rep.max_rel_dev > 1e-6 {
            violations += 1;
        }
    }
    Ok(exit_code(violations, unpaired, cfg.strict))
}

pub fn cmd_algebra(cfg: &RunConfig, log: &mut dyn Write) -> Result<i32> {
    let a = &cfg.algebra;
    if a.multiplet.is_none() && a.check.is_empty() {
        return Err(Error::InvalidArgument("algebra needs --multiplet or --check".into()));
    }
    if let Some(pmax) = a.multiplet {
        for p in 1..=pmax {
            let m = enumerate_multiplet(p)?;
            writeln!(log, "P = {p}: {} complexes", m.len()).map_err(io_err)?;
            for c in &m {
                writeln!(log, "  (w, chi) = ({:+}, {:+})  {}", c.w, c.chi, format_multiset(&c.members)).map_err(io_err)?;
            }
        }
    }
    let mut illegal = 0;
    for r in &a.check {
        let (inc, out) = parse_reaction(r)?;
        let ok = vertex_legal(&inc, &out);
        let (gi, go) = (group_reduce(&inc), group_reduce(&out));
        writeln!(
            log,
            "{} -> {}: {} ((w, chi) = ({}, {}) -> ({}, {}))",
            format_multiset(&inc),
            format_multiset(&out),
            if ok { "legal" } else { "illegal" },
            gi.m,
            gi.n_index,
            go.m,
            go.n_index
        )
        .map_err(io_err)?;
        illegal += usize::from(!ok);
    }
    Ok(i32::from(illegal > 0))
}

/// Runs the parsed command; errors become exit code 2 in `main`.
pub fn run(cli: &Cli, log: &mut dyn Write) -> Result<i32> {
    let cfg = resolve(cli)?;
    match cli.command {
        Command::Simulate => cmd_simulate(&cfg, log),
        Command::Track => cmd_track(&cfg, log),
        Command::Lifetimes => cmd_lifetimes(&cfg, cli.flags.scaling, log),
        Command::Algebra => cmd_algebra(&cfg, log),
    }
}
