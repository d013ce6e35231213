//! The σ-sweep of transient lifetimes and its linear fit.
//!
//! For each `σ`, 2×2 Ginibre matrices evolve under `M₀ + t·diag(s, −s)` and the
//! off-plane transients are measured. The mean lifetime per `σ` is fitted by
//! ordinary least squares; `t̄_max ≈ 1.6σ` is the emergent uncertainty relation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::linalg::{sample_ginibre, splitmix64, C64};
use crate::tracker::{measure_lifetime_with, LifetimeOptions, LifetimeRecord};

/// Reference slope of the uncertainty relation.
pub const UNCERTAINTY_SLOPE: f64 = 1.6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub sigmas: Vec<f64>,
    pub trials_per_sigma: usize,
    #[serde(with = "crate::linalg::complex_pair")]
    pub s: C64,
    /// Scanned times; `None` uses `±(4σ + 4)` for each `σ`.
    pub t_range: Option<(f64, f64)>,
    pub dt: f64,
    pub base_seed: u64,
    /// Seeds per axis of the quaternionic pairing check; 0 skips it.
    pub quaternion_density: usize,
    pub execution: Execution,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            sigmas: (1..=10).map(|k| 2.0 * k as f64).collect(),
            trials_per_sigma: 1000,
            s: C64::new(1.0, 0.0),
            t_range: None,
            dt: 0.01,
            base_seed: 0,
            quaternion_density: 6,
            execution: Execution::default(),
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.sigmas.is_empty() {
            return Err(Error::InvalidArgument("sweep needs at least one sigma".into()));
        }
        if self.sigmas.iter().any(|s| !(*s > 0.0) || !s.is_finite()) {
            return Err(Error::InvalidArgument("sigmas must be positive".into()));
        }
        if self.sigmas.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument("sigmas must be strictly increasing".into()));
        }
        if self.trials_per_sigma == 0 {
            return Err(Error::InvalidArgument("trials_per_sigma must be at least 1".into()));
        }
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::InvalidArgument(format!("dt must be positive, got {}", self.dt)));
        }
        if self.s.norm() == 0.0 || !self.s.norm().is_finite() {
            return Err(Error::InvalidArgument("s must be nonzero".into()));
        }
        if let Some((a, b)) = self.t_range {
            if !(a < b) {
                return Err(Error::InvalidArgument(format!("invalid time range ({a}, {b})")));
            }
        }
        Ok(())
    }

    pub fn range_for(&self, sigma: f64) -> (f64, f64) {
        self.t_range.unwrap_or((-(4.0 * sigma + 4.0), 4.0 * sigma + 4.0))
    }
}

/// Seed of one trial: `splitmix64(base ⊕ splitmix64((σ index << 32) | trial))`.
pub fn trial_seed(base_seed: u64, sigma_index: usize, trial: usize) -> u64 {
    splitmix64(base_seed ^ splitmix64(((sigma_index as u64) << 32) | trial as u64))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SigmaStat {
    pub sigma: f64,
    /// Mean over unclipped transients.
    pub mean_t_max: f64,
    pub n_transients: usize,
    /// Standard error of the mean; 0 with fewer than two transients.
    pub stderr: f64,
    /// Transients alive at an end of the scanned range, excluded from the mean.
    pub n_clipped: usize,
    /// Transients whose quaternionic roots failed the `±` pairing check.
    pub n_unpaired: usize,
}

/// `t̄_max = intercept + slope·σ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Fit {
    pub intercept: f64,
    pub slope: f64,
    pub r2: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub trials_per_sigma: usize,
    pub per_sigma: Vec<SigmaStat>,
    pub fit: Fit,
}

/// Ordinary least squares through `(x, y)`. A single point gives the line
/// through the origin.
pub fn fit_ols(points: &[(f64, f64)]) -> Result<Fit> {
    match points {
        [] => Err(Error::EmptyFit("no points to fit".into())),
        [(x, y)] => Ok(Fit {
            intercept: 0.0,
            slope: y / x,
            r2: 1.0,
        }),
        _ => {
            let n = points.len() as f64;
            let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
            let my = points.iter().map(|p| p.1).sum::<f64>() / n;
            let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
            let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
            let syy: f64 = points.iter().map(|p| (p.1 - my).powi(2)).sum();
            if sxx == 0.0 {
                return Err(Error::EmptyFit("all x values coincide".into()));
            }
            let slope = sxy / sxx;
            let intercept = my - slope * mx;
            let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
            Ok(Fit { intercept, slope, r2 })
        }
    }
}

fn lifetime_options(config: &SweepConfig) -> LifetimeOptions {
    LifetimeOptions {
        quaternion_density: config.quaternion_density,
        ..LifetimeOptions::default()
    }
}

/// Transients of one trial matrix at `sigma`.
pub fn trial_lifetimes(config: &SweepConfig, sigma_index: usize, trial: usize) -> Result<Vec<LifetimeRecord>> {
    let sigma = config.sigmas[sigma_index];
    let m0 = sample_ginibre(2, sigma, trial_seed(config.base_seed, sigma_index, trial))?;
    let mut recs = measure_lifetime_with(&m0, config.s, config.range_for(sigma), config.dt, &lifetime_options(config))?;
    for r in &mut recs {
        r.sigma = Some(sigma);
    }
    Ok(recs)
}

/// Runs the sweep. Results depend only on the config, not on the schedule.
pub fn run_sweep(config: &SweepConfig) -> Result<SweepResult> {
    config.validate()?;
    let mut per_sigma = Vec::with_capacity(config.sigmas.len());
    for (k, &sigma) in config.sigmas.iter().enumerate() {
        let trials = config
            .execution
            .map_range(config.trials_per_sigma, |i| trial_lifetimes(config, k, i));
        let mut lifetimes = Vec::new();
        let (mut n_clipped, mut n_unpaired) = (0, 0);
        for recs in trials {
            for r in recs? {
                if r.clipped {
                    n_clipped += 1;
                    continue;
                }
                if config.quaternion_density >= 2 && !r.paired {
                    n_unpaired += 1;
                }
                lifetimes.push(r.t_max);
            }
        }
        let n = lifetimes.len();
        let mean = if n > 0 { lifetimes.iter().sum::<f64>() / n as f64 } else { 0.0 };
        let stderr = if n > 1 {
            let var = lifetimes.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            (var / n as f64).sqrt()
        } else {
            0.0
        };
        per_sigma.push(SigmaStat {
            sigma,
            mean_t_max: mean,
            n_transients: n,
            stderr,
            n_clipped,
            n_unpaired,
        });
    }
    let points: Vec<(f64, f64)> = per_sigma
        .iter()
        .filter(|p| p.n_transients > 0)
        .map(|p| (p.sigma, p.mean_t_max))
        .collect();
    if points.is_empty() {
        return Err(Error::EmptyFit("no transients at any sigma".into()));
    }
    Ok(SweepResult {
        trials_per_sigma: config.trials_per_sigma,
        per_sigma,
        fit: fit_ols(&points)?,
    })
}

/// Mean over `σ` of `t̄_max(σ)/(1.6σ)`, over the `σ` values that saw a transient.
pub fn uncertainty_check(result: &SweepResult) -> f64 {
    let ratios: Vec<f64> = result
        .per_sigma
        .iter()
        .filter(|p| p.n_transients > 0)
        .map(|p| p.mean_t_max / (UNCERTAINTY_SLOPE * p.sigma))
        .collect();
    if ratios.is_empty() {
        return f64::NAN;
    }
    ratios.iter().sum::<f64>() / ratios.len() as f64
}

/// Outcome of [`scaling_check`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    pub factor: f64,
    pub trials: usize,
    /// Trials with one unclipped transient in both members of the pair.
    pub compared: usize,
    /// Trials whose transient count differs between the pair.
    pub count_mismatches: usize,
    /// Largest `|t_max(cM₀) − c·t_max(M₀)| / (c·t_max(M₀))`.
    pub max_rel_dev: f64,
    /// `t̄_max(cM₀) / t̄_max(M₀)` over the compared trials.
    pub mean_ratio: f64,
}

/// Paired check of the rescaling `M₀ → cM₀`, `t → ct`: every lifetime scales by `c`.
pub fn scaling_check(sigma: f64, factor: f64, trials: usize, s: C64, dt: f64, base_seed: u64) -> Result<ScalingReport> {
    if !(factor > 0.0) || trials == 0 {
        return Err(Error::InvalidArgument("factor must be positive and trials at least 1".into()));
    }
    let opts = LifetimeOptions {
        quaternion_density: 0,
        ..LifetimeOptions::default()
    };
    let range = (-(4.0 * sigma + 4.0), 4.0 * sigma + 4.0);
    let scaled_range = (factor * range.0, factor * range.1);
    let pairs = Execution::default().map_range(trials, |i| -> Result<_> {
        let seed = trial_seed(base_seed, 0, i);
        let a = measure_lifetime_with(&sample_ginibre(2, sigma, seed)?, s, range, dt, &opts)?;
        let b = measure_lifetime_with(&sample_ginibre(2, factor * sigma, seed)?, s, scaled_range, factor * dt, &opts)?;
        Ok((a, b))
    });
    let mut report = ScalingReport {
        factor,
        trials,
        compared: 0,
        count_mismatches: 0,
        max_rel_dev: 0.0,
        mean_ratio: f64::NAN,
    };
    let (mut sum_a, mut sum_b) = (0.0, 0.0);
    for p in pairs {
        let (a, b) = p?;
        if a.len() != b.len() {
            report.count_mismatches += 1;
            continue;
        }
        for (ra, rb) in a.iter().zip(&b) {
            if ra.clipped || rb.clipped {
                continue;
            }
            let dev = (rb.t_max - factor * ra.t_max).abs() / (factor * ra.t_max);
            report.max_rel_dev = report.max_rel_dev.max(dev);
            report.compared += 1;
            sum_a += ra.t_max;
            sum_b += rb.t_max;
        }
    }
    if report.compared > 0 {
        report.mean_ratio = sum_b / sum_a;
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(sigmas: Vec<f64>, trials: usize) -> SweepConfig {
        SweepConfig {
            sigmas,
            trials_per_sigma: trials,
            quaternion_density: 4,
            ..SweepConfig::default()
        }
    }

    #[test]
    fn ols_recovers_exact_line() {
        let pts: Vec<(f64, f64)> = (1..6).map(|k| (k as f64, 0.5 + 2.0 * k as f64)).collect();
        let f = fit_ols(&pts).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-12 && (f.intercept - 0.5).abs() < 1e-12 && (f.r2 - 1.0).abs() < 1e-12);
        assert!(fit_ols(&[]).is_err());
        assert!(fit_ols(&[(1.0, 1.0), (1.0, 2.0)]).is_err());
    }

    #[test]
    fn uncertainty_of_exact_relation_is_one() {
        let per_sigma = [2.0, 4.0, 6.0]
            .iter()
            .map(|&s| SigmaStat {
                sigma: s,
                mean_t_max: 1.6 * s,
                n_transients: 10,
                stderr: 0.0,
                n_clipped: 0,
                n_unpaired: 0,
            })
            .collect::<Vec<_>>();
        let pts: Vec<_> = per_sigma.iter().map(|p| (p.sigma, p.mean_t_max)).collect();
        let r = SweepResult {
            trials_per_sigma: 10,
            fit: fit_ols(&pts).unwrap(),
            per_sigma,
        };
        assert_eq!(uncertainty_check(&r), 1.0);
        assert!((r.fit.slope - 1.6).abs() < 1e-12 && r.fit.intercept.abs() < 1e-12);
        let single = SweepResult {
            per_sigma: vec![SigmaStat {
                sigma: 3.0,
                mean_t_max: 4.2,
                ..r.per_sigma[0]
            }],
            ..r
        };
        assert!((uncertainty_check(&single) - 4.2 / 4.8).abs() < 1e-15);
    }

    #[test]
    fn sweep_is_reproducible_and_schedule_free() {
        let mut cfg = small(vec![1.0, 2.0], 40);
        let a = run_sweep(&cfg).unwrap();
        assert_eq!(a, run_sweep(&cfg).unwrap());
        cfg.execution = Execution::Sequential;
        assert_eq!(a, run_sweep(&cfg).unwrap());
        cfg.base_seed = 1;
        assert_ne!(a, run_sweep(&cfg).unwrap());
    }

    #[test]
    fn transients_pair_and_scale_with_sigma() {
        let r = run_sweep(&small(vec![1.0, 3.0], 200)).unwrap();
        for p in &r.per_sigma {
            assert!(p.n_transients > 20 && p.n_transients <= 200);
            assert_eq!(p.n_unpaired, 0);
            assert_eq!(p.n_clipped, 0);
        }
        let ratio = r.per_sigma[1].mean_t_max / r.per_sigma[0].mean_t_max;
        assert!((ratio - 3.0).abs() < 0.6, "{ratio}");
    }

    #[test]
    fn rescaling_maps_lifetimes_exactly() {
        let rep = scaling_check(1.5, 2.0, 200, C64::new(1.0, 0.0), 0.01, 7).unwrap();
        assert_eq!(rep.count_mismatches, 0);
        assert!(rep.compared > 30);
        assert!(rep.max_rel_dev < 1e-9, "{rep:?}");
        assert!((rep.mean_ratio - 2.0).abs() < 1e-9);
    }

    #[test]
    fn seeds_differ_across_sigma_and_trial() {
        assert_ne!(trial_seed(0, 0, 1), trial_seed(0, 1, 0));
        assert_ne!(trial_seed(0, 0, 0), trial_seed(1, 0, 0));
    }

    #[test]
    fn invalid_configs_are_rejected() {
        assert!(run_sweep(&small(vec![], 10)).is_err());
        assert!(run_sweep(&small(vec![2.0, 1.0], 10)).is_err());
        assert!(run_sweep(&small(vec![1.0], 0)).is_err());
        assert!(run_sweep(&small(vec![-1.0], 10)).is_err());
        let no_room = SweepConfig {
            t_range: Some((100.0, 100.5)),
            ..small(vec![1.0], 5)
        };
        assert!(matches!(run_sweep(&no_room), Err(Error::EmptyFit(_))));
    }
}
