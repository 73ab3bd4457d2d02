//! ε-sweeps of the simulator and power-law fits of the observed lifespan.

use crate::error::{Error, Result};
use crate::exponents::lifespan_exponent;
use crate::solver::{run, SimConfig, Trigger, ROBUSTNESS_TOL};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

/// Geometric grid from `max` down to `min`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EpsGrid {
    pub count: usize,
    pub min: f64,
    pub max: f64,
}

pub const MIN_EPS_COUNT: usize = 5;

impl EpsGrid {
    /// Strictly decreasing values, endpoints exact.
    pub fn values(&self) -> Result<Vec<f64>> {
        if self.count < MIN_EPS_COUNT {
            return Err(Error::InvalidParameter(format!(
                "eps grid needs at least {MIN_EPS_COUNT} points, got {}",
                self.count
            )));
        }
        if !(self.min > 0.0 && self.max > self.min && self.max.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "eps grid needs 0 < min < max, got min = {}, max = {}",
                self.min, self.max
            )));
        }
        let ratio = (self.min / self.max).ln() / (self.count - 1) as f64;
        let mut v: Vec<f64> = (0..self.count)
            .map(|k| self.max * (ratio * k as f64).exp())
            .collect();
        v[0] = self.max;
        v[self.count - 1] = self.min;
        Ok(v)
    }
}

fn default_repeats() -> usize {
    2
}
fn default_slack() -> f64 {
    0.5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    /// Template run; its `params.eps` is replaced by each grid value.
    pub base: SimConfig,
    pub eps_values: EpsGrid,
    /// Number of blow-up thresholds, spaced geometrically from
    /// `base.blowup_threshold` to `base.robust_threshold`, all read off one run.
    #[serde(default = "default_repeats")]
    pub repeats_per_eps: usize,
    #[serde(default = "default_slack")]
    pub slack: f64,
}

impl SweepConfig {
    pub fn thresholds(&self) -> Result<Vec<f64>> {
        let k = self.repeats_per_eps;
        if k == 0 {
            return Err(Error::InvalidParameter(
                "repeats_per_eps must be at least 1".into(),
            ));
        }
        let (lo, hi) = (self.base.blowup_threshold, self.base.robust_threshold);
        if k == 1 {
            return Ok(vec![lo]);
        }
        let step = (hi / lo).ln() / (k - 1) as f64;
        let mut v: Vec<f64> = (0..k).map(|i| lo * (step * i as f64).exp()).collect();
        v[k - 1] = hi;
        Ok(v)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepPoint {
    pub eps: f64,
    /// Blow-up time at the first threshold.
    pub t_num: Option<f64>,
    pub trigger: Option<Trigger>,
    /// Blow-up time at each threshold of the ladder.
    pub t_by_threshold: Vec<Option<f64>>,
    pub blown_up: bool,
    /// All thresholds agree within 5%; `None` when a threshold never fired.
    pub robust: Option<bool>,
    pub censored: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub points: Vec<SweepPoint>,
    pub thresholds: Vec<f64>,
    /// Indices `k` with `T_{k+1} < 0.95 T_k` (lifespan shrinking as ε decreases).
    pub monotone_violations: Vec<usize>,
    /// Indices of censored runs at a larger ε than some blown-up run.
    pub censoring_violations: Vec<usize>,
}

pub const MONOTONE_TOL: f64 = 0.05;

pub fn run_sweep(config: &SweepConfig) -> Result<SweepResult> {
    let eps = config.eps_values.values()?;
    let thresholds = config.thresholds()?;
    config.base.validate()?;
    let points = eps
        .par_iter()
        .map(|&e| {
            let mut sim = config.base.clone();
            sim.params.eps = e;
            let trace = run(&sim)?;
            let hits: Vec<_> = thresholds
                .iter()
                .map(|&th| crate::solver::detect_blowup(&trace.samples, th))
                .collect();
            let t_by_threshold: Vec<Option<f64>> =
                hits.iter().map(|h| h.map(|b| b.t_num)).collect();
            let first = hits[0];
            let robust = if t_by_threshold.iter().all(Option::is_some) {
                let t0 = t_by_threshold[0].unwrap_or(0.0);
                Some(
                    t_by_threshold
                        .iter()
                        .flatten()
                        .all(|t| (t - t0).abs() <= ROBUSTNESS_TOL * t0),
                )
            } else {
                None
            };
            Ok(SweepPoint {
                eps: e,
                t_num: first.map(|b| b.t_num),
                trigger: first.map(|b| b.trigger),
                t_by_threshold,
                blown_up: first.is_some(),
                robust,
                censored: first.is_none(),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let blown: Vec<(usize, f64)> = points
        .iter()
        .enumerate()
        .filter_map(|(i, p)| p.t_num.map(|t| (i, t)))
        .collect();
    let monotone_violations = blown
        .windows(2)
        .filter(|w| w[1].1 < (1.0 - MONOTONE_TOL) * w[0].1)
        .map(|w| w[0].0)
        .collect();
    let last_blown = blown.last().map(|b| b.0);
    let censoring_violations = points
        .iter()
        .enumerate()
        .filter(|(i, p)| p.censored && last_blown.is_some_and(|l| *i < l))
        .map(|(i, _)| i)
        .collect();
    Ok(SweepResult {
        points,
        thresholds,
        monotone_violations,
        censoring_violations,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerLawFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub theoretical_exponent: f64,
    pub consistent: bool,
    pub slack: f64,
    pub points_used: usize,
}

pub const MIN_FIT_POINTS: usize = 4;

/// Least squares of `ln T` on `ln(1/ε)`.
pub fn fit_power_law(points: &[(f64, f64)], theoretical: f64, slack: f64) -> Result<PowerLawFit> {
    if points.len() < MIN_FIT_POINTS {
        return Err(Error::InsufficientSamples {
            needed: MIN_FIT_POINTS,
            got: points.len(),
        });
    }
    if points.iter().any(|&(e, t)| !(e > 0.0 && t > 0.0)) {
        return Err(Error::InvalidParameter(
            "fit needs positive eps and T values".into(),
        ));
    }
    let xs: Vec<f64> = points.iter().map(|p| -p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx <= 1e-24 * mx.abs().max(1.0) {
        return Err(Error::DegenerateGrid("all eps values are equal".into()));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy == 0.0 {
        1.0
    } else {
        sxy * sxy / (sxx * syy)
    };
    Ok(PowerLawFit {
        slope,
        intercept,
        r_squared,
        theoretical_exponent: theoretical,
        consistent: slope <= theoretical + slack,
        slack,
        points_used: points.len(),
    })
}

/// Fit of a finished sweep; refuses with a reason when too few runs blew up.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitOutcome {
    pub fit: Option<PowerLawFit>,
    pub consistent: Option<bool>,
    pub theoretical_exponent: f64,
    pub reason: Option<String>,
}

pub fn fit_sweep(result: &SweepResult, config: &SweepConfig) -> Result<FitOutcome> {
    let theoretical = lifespan_exponent(&config.base.params)?;
    let pts: Vec<(f64, f64)> = result
        .points
        .iter()
        .filter_map(|p| p.t_num.map(|t| (p.eps, t)))
        .collect();
    if pts.len() < MIN_FIT_POINTS {
        let err = Error::InsufficientBlowups(format!(
            "{} of {} runs blew up before t_max = {}, need {MIN_FIT_POINTS}",
            pts.len(),
            result.points.len(),
            config.base.t_max
        ));
        return Ok(FitOutcome {
            fit: None,
            consistent: None,
            theoretical_exponent: theoretical,
            reason: Some(err.to_string()),
        });
    }
    let fit = fit_power_law(&pts, theoretical, config.slack)?;
    Ok(FitOutcome {
        consistent: Some(fit.consistent),
        fit: Some(fit),
        theoretical_exponent: theoretical,
        reason: None,
    })
}

/// 12 significant digits.
pub fn fmt12(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.11e}")
    } else {
        format!("{x}")
    }
}

fn opt_bool(b: Option<bool>) -> &'static str {
    match b {
        Some(true) => "true",
        Some(false) => "false",
        None => "",
    }
}

/// Rows `eps,T_num,blown_up,robust,censored`; `T_num` is empty when censored.
pub fn sweep_csv(result: &SweepResult) -> String {
    let mut out = String::from("eps,T_num,blown_up,robust,censored\n");
    for p in &result.points {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            fmt12(p.eps),
            p.t_num.map(fmt12).unwrap_or_default(),
            p.blown_up,
            opt_bool(p.robust),
            p.censored
        );
    }
    out
}

/// Two columns `ln(1/eps) ln(T_num)` for blown-up runs.
pub fn plot_data(result: &SweepResult) -> String {
    let mut out = String::new();
    for p in &result.points {
        if let Some(t) = p.t_num {
            let _ = writeln!(out, "{} {}", fmt12(-p.eps.ln()), fmt12(t.ln()));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exponents::ProblemParams;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn exact_power_law() {
        let pts: Vec<(f64, f64)> = [0.8, 0.6, 0.4, 0.3, 0.2]
            .iter()
            .map(|&e: &f64| (e, e.powf(-3.0)))
            .collect();
        let fit = fit_power_law(&pts, 3.0, 0.5).unwrap();
        assert!((fit.slope - 3.0).abs() < 1e-10);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
        assert!(fit.intercept.abs() < 1e-10);
        assert!(fit.consistent);
    }

    #[test]
    fn noisy_power_law() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let grid = EpsGrid {
            count: 12,
            min: 0.05,
            max: 0.8,
        }
        .values()
        .unwrap();
        let pts: Vec<(f64, f64)> = grid
            .iter()
            .map(|&e| {
                (
                    e,
                    5.0 * e.powf(-3.0) * (1.0 + 0.02 * rng.gen_range(-1.0..1.0)),
                )
            })
            .collect();
        let fit = fit_power_law(&pts, 3.0, 0.5).unwrap();
        assert!((2.8..=3.2).contains(&fit.slope), "{}", fit.slope);
        assert!((fit.intercept - 5f64.ln()).abs() < 0.1);
    }

    #[test]
    fn steep_slope_is_inconsistent_not_an_error() {
        let pts: Vec<(f64, f64)> = [0.8, 0.6, 0.4, 0.2]
            .iter()
            .map(|&e: &f64| (e, e.powf(-4.0)))
            .collect();
        let fit = fit_power_law(&pts, 3.0, 0.5).unwrap();
        assert!(!fit.consistent);
    }

    #[test]
    fn refusals() {
        let same = vec![(0.3, 10.0); 5];
        assert!(matches!(
            fit_power_law(&same, 3.0, 0.5),
            Err(Error::DegenerateGrid(_))
        ));
        let few = vec![(0.3, 10.0), (0.2, 20.0), (0.1, 30.0)];
        assert!(matches!(
            fit_power_law(&few, 3.0, 0.5),
            Err(Error::InsufficientSamples { .. })
        ));
    }

    #[test]
    fn grid_is_geometric_and_decreasing() {
        let v = EpsGrid {
            count: 7,
            min: 0.2,
            max: 0.8,
        }
        .values()
        .unwrap();
        assert_eq!(v.len(), 7);
        assert_eq!((v[0], v[6]), (0.8, 0.2));
        assert!(v.windows(2).all(|w| w[1] < w[0]));
        let r = v[1] / v[0];
        assert!(v.windows(2).all(|w| (w[1] / w[0] - r).abs() < 1e-12));
        assert!(EpsGrid {
            count: 4,
            min: 0.2,
            max: 0.8
        }
        .values()
        .is_err());
        assert!(EpsGrid {
            count: 6,
            min: 0.8,
            max: 0.8
        }
        .values()
        .is_err());
    }

    fn small_sweep(eps_min: f64, eps_max: f64, t_max: f64) -> SweepConfig {
        let params = ProblemParams::new(2.0, 2.0, 1, 1.0, eps_max).unwrap();
        SweepConfig {
            base: SimConfig::new(params, 512, t_max),
            eps_values: EpsGrid {
                count: 5,
                min: eps_min,
                max: eps_max,
            },
            repeats_per_eps: 2,
            slack: 0.5,
        }
    }

    #[test]
    fn all_censored_sweep_refuses_fit() {
        let cfg = small_sweep(0.01, 0.05, 2.0);
        let res = run_sweep(&cfg).unwrap();
        assert!(res.points.iter().all(|p| p.censored && p.robust.is_none()));
        let out = fit_sweep(&res, &cfg).unwrap();
        assert!(out.fit.is_none() && out.consistent.is_none());
        assert!(out.reason.unwrap().contains("insufficient blow-ups"));
        assert_eq!(out.theoretical_exponent, 3.0);
    }

    #[test]
    fn sweep_is_deterministic_and_ordered() {
        let cfg = small_sweep(0.5, 1.0, 6.0);
        let a = run_sweep(&cfg).unwrap();
        let b = run_sweep(&cfg).unwrap();
        assert_eq!(sweep_csv(&a), sweep_csv(&b));
        assert_eq!(plot_data(&a), plot_data(&b));
        assert!(a.points.windows(2).all(|w| w[1].eps < w[0].eps));
        assert!(a
            .points
            .iter()
            .all(|p| p.blown_up && p.robust == Some(true)));
        assert!(a.monotone_violations.is_empty() && a.censoring_violations.is_empty());
        let fit = fit_sweep(&a, &cfg).unwrap().fit.unwrap();
        assert!(fit.slope > 0.0);
    }

    #[test]
    fn threshold_ladder() {
        let mut cfg = small_sweep(0.5, 1.0, 6.0);
        assert_eq!(cfg.thresholds().unwrap(), vec![1e8, 1e10]);
        cfg.repeats_per_eps = 3;
        let t = cfg.thresholds().unwrap();
        assert!((t[1] / 1e9 - 1.0).abs() < 1e-12);
        cfg.repeats_per_eps = 0;
        assert!(cfg.thresholds().is_err());
    }

    #[test]
    fn csv_format() {
        let res = SweepResult {
            points: vec![SweepPoint {
                eps: 0.5,
                t_num: None,
                trigger: None,
                t_by_threshold: vec![None],
                blown_up: false,
                robust: None,
                censored: true,
            }],
            thresholds: vec![1e8],
            monotone_violations: vec![],
            censoring_violations: vec![],
        };
        assert_eq!(
            sweep_csv(&res),
            "eps,T_num,blown_up,robust,censored\n5.00000000000e-1,,false,,true\n"
        );
        assert_eq!(plot_data(&res), "");
    }
}
