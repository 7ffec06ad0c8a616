//! Monte Carlo studies of the sup norm: summary statistics, bootstrap
//! intervals, tail profiles and the concentration checks.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ensemble::{sample_coefficients, trial_seed, EnsembleSpec};
use crate::entropy::{levy_tail, predicted_envelope, BoundEnvelope};
use crate::error::{domain, Error, Result};
use crate::solver::{SolverConfig, SupSolver, TrialRecord};

pub const MIN_STUDY_TRIALS: usize = 30;
pub const MIN_CONCENTRATION_TRIALS: usize = 100;
pub const MIN_TAIL_TRIALS: usize = 100;

/// Radii of the tail profile: `0, 0.25, …, 3`.
pub fn tail_radii() -> Vec<f64> {
    (0..=12).map(|k| 0.25 * k as f64).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StudyOptions {
    pub bootstrap_resamples: usize,
    /// Record solver wall time per trial. Off by default so that artifacts
    /// are reproducible byte for byte.
    pub record_wall_time: bool,
}

impl Default for StudyOptions {
    fn default() -> Self {
        Self {
            bootstrap_resamples: 1000,
            record_wall_time: false,
        }
    }
}

/// One row of the tail profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailPoint {
    pub r: f64,
    /// `P(|L − median| > r)`.
    pub deviation: f64,
    /// `P(L − median > r)`.
    pub upper: f64,
    pub levy_bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyReport {
    pub spec: EnsembleSpec,
    pub solver: SolverConfig,
    pub trials: usize,
    pub mean: f64,
    pub median: f64,
    pub std: f64,
    pub min: f64,
    pub max: f64,
    pub mean_ci: (f64, f64),
    pub median_ci: (f64, f64),
    pub mean_se: f64,
    pub median_se: f64,
    /// Bootstrap standard error of `median − mean`.
    pub gap_se: f64,
    pub bootstrap_resamples: usize,
    pub tail_profile: Vec<TailPoint>,
    pub envelope: Option<BoundEnvelope>,
    /// Trials whose refinement was not monotone.
    pub solver_warnings: usize,
    pub max_solver_gap: f64,
    /// Sup values in trial order.
    pub sup_values: Vec<f64>,
}

impl StudyReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Domain(format!("bad report JSON: {e}")))
    }

    /// `mean / √(m log n)`.
    pub fn normalized_mean(&self) -> Result<f64> {
        Ok(self.mean / sqrt_m_log_n(self.spec.m, self.spec.n)?)
    }

    /// Bootstrap standard error of [`Self::normalized_mean`].
    pub fn normalized_mean_se(&self) -> Result<f64> {
        Ok(self.mean_se / sqrt_m_log_n(self.spec.m, self.spec.n)?)
    }
}

fn sqrt_m_log_n(m: usize, n: usize) -> Result<f64> {
    if n <= 1 {
        return domain("log n must be positive (n >= 2)");
    }
    Ok((m as f64 * (n as f64).ln()).sqrt())
}

/// A study report together with the per-trial records.
#[derive(Debug, Clone)]
pub struct StudyOutcome {
    pub report: StudyReport,
    pub records: Vec<TrialRecord>,
}

pub fn run_study(spec: &EnsembleSpec, trials: usize, cfg: &SolverConfig) -> Result<StudyReport> {
    Ok(run_study_with(spec, trials, cfg, &StudyOptions::default())?.report)
}

pub fn run_study_with(
    spec: &EnsembleSpec,
    trials: usize,
    cfg: &SolverConfig,
    opts: &StudyOptions,
) -> Result<StudyOutcome> {
    if trials < MIN_STUDY_TRIALS {
        return domain(format!(
            "a study needs at least {MIN_STUDY_TRIALS} trials, got {trials}"
        ));
    }
    if opts.bootstrap_resamples == 0 {
        return domain("bootstrap_resamples must be positive");
    }
    let records = run_trials(spec, 0..trials as u64, cfg, opts.record_wall_time)?;
    let report = summarize(spec, cfg, &records, opts)?;
    Ok(StudyOutcome { report, records })
}

/// Solves the sections with the given trial indices, in parallel. Results
/// come back in index order.
pub fn run_trials(
    spec: &EnsembleSpec,
    indices: impl IntoIterator<Item = u64>,
    cfg: &SolverConfig,
    timed: bool,
) -> Result<Vec<TrialRecord>> {
    spec.validate()?;
    let solver = SupSolver::new(spec.m, spec.n, *cfg)?;
    let indices: Vec<u64> = indices.into_iter().collect();
    indices
        .par_iter()
        .map(|&idx| {
            let wrap = |e: Error| Error::Trial {
                trial_index: idx,
                trial_seed: trial_seed(spec.master_seed, idx),
                source: Box::new(e),
            };
            let s = sample_coefficients(spec, idx).map_err(wrap)?;
            solver.solve_timed(&s, timed).map_err(wrap)
        })
        .collect()
}

fn mean_of(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Median of sorted data; the average of the middle pair for even counts.
fn median_sorted(x: &[f64]) -> f64 {
    let k = x.len();
    if k % 2 == 1 {
        x[k / 2]
    } else {
        0.5 * (x[k / 2 - 1] + x[k / 2])
    }
}

fn percentile_sorted(x: &[f64], q: f64) -> f64 {
    let pos = q * (x.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    x[lo] + (pos - lo as f64) * (x[hi] - x[lo])
}

fn std_dev(x: &[f64], mean: f64) -> f64 {
    if x.len() < 2 {
        return 0.0;
    }
    let ss: f64 = x.iter().map(|v| (v - mean) * (v - mean)).sum();
    (ss / (x.len() - 1) as f64).sqrt()
}

/// Percentile interval, widened if needed to contain the point estimate.
fn interval(boot: &mut [f64], point: f64) -> (f64, f64) {
    boot.sort_by(f64::total_cmp);
    let lo = percentile_sorted(boot, 0.025).min(point);
    let hi = percentile_sorted(boot, 0.975).max(point);
    (lo, hi)
}

/// Seed of the bootstrap stream, disjoint from the trial seeds.
fn bootstrap_seed(spec: &EnsembleSpec) -> u64 {
    trial_seed(spec.master_seed ^ 0xB007_57A9_0000_0000, u64::MAX)
}

pub fn summarize(
    spec: &EnsembleSpec,
    cfg: &SolverConfig,
    records: &[TrialRecord],
    opts: &StudyOptions,
) -> Result<StudyReport> {
    if records.is_empty() {
        return domain("no trials to summarize");
    }
    let values: Vec<f64> = records.iter().map(|r| r.sup_value).collect();
    let mut sorted = values.clone();
    sorted.sort_by(f64::total_cmp);
    let k = values.len();
    let mean = mean_of(&values);
    let median = median_sorted(&sorted);
    let std = std_dev(&values, mean);

    let mut rng = ChaCha20Rng::seed_from_u64(bootstrap_seed(spec));
    let b = opts.bootstrap_resamples;
    let mut boot_mean = Vec::with_capacity(b);
    let mut boot_median = Vec::with_capacity(b);
    let mut boot_gap = Vec::with_capacity(b);
    let mut sample = vec![0.0; k];
    for _ in 0..b {
        for slot in sample.iter_mut() {
            *slot = values[rng.random_range(0..k)];
        }
        let bm = mean_of(&sample);
        sample.sort_by(f64::total_cmp);
        let bmed = median_sorted(&sample);
        boot_mean.push(bm);
        boot_median.push(bmed);
        boot_gap.push(bmed - bm);
    }
    let mean_se = std_dev(&boot_mean, mean_of(&boot_mean));
    let median_se = std_dev(&boot_median, mean_of(&boot_median));
    let gap_se = std_dev(&boot_gap, mean_of(&boot_gap));
    let mean_ci = interval(&mut boot_mean, mean);
    let median_ci = interval(&mut boot_median, median);

    let tail_profile = tail_radii()
        .into_iter()
        .map(|r| {
            let dev = values.iter().filter(|&&v| (v - median).abs() > r).count();
            let up = values.iter().filter(|&&v| v - median > r).count();
            Ok(TailPoint {
                r,
                deviation: dev as f64 / k as f64,
                upper: up as f64 / k as f64,
                levy_bound: levy_tail(r)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let envelope = if spec.n >= 3 {
        Some(predicted_envelope(spec.m, spec.n)?)
    } else {
        None
    };
    Ok(StudyReport {
        spec: spec.clone(),
        solver: *cfg,
        trials: k,
        mean,
        median,
        std,
        min: sorted[0],
        max: sorted[k - 1],
        mean_ci,
        median_ci,
        mean_se,
        median_se,
        gap_se,
        bootstrap_resamples: b,
        tail_profile,
        envelope,
        solver_warnings: records.iter().filter(|r| !r.monotone).count(),
        max_solver_gap: records.iter().map(|r| r.solver_gap).fold(0.0, f64::max),
        sup_values: values,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationRow {
    pub r: f64,
    pub empirical: f64,
    pub bound: f64,
    /// Binomial standard error at the bound, `√(p(1−p)/trials)`.
    pub se: f64,
    pub pass: bool,
}

/// Compares the empirical `P(|L − median| > r)` with `e^{−r²/2}` plus three
/// binomial standard errors.
pub fn concentration_check(report: &StudyReport) -> Result<Vec<ConcentrationRow>> {
    if report.trials < MIN_CONCENTRATION_TRIALS {
        return domain(format!(
            "concentration check needs at least {MIN_CONCENTRATION_TRIALS} trials"
        ));
    }
    let k = report.trials as f64;
    Ok(report
        .tail_profile
        .iter()
        .map(|t| {
            let p = t.levy_bound.min(1.0);
            let se = (p * (1.0 - p) / k).sqrt();
            ConcentrationRow {
                r: t.r,
                empirical: t.deviation,
                bound: t.levy_bound,
                se,
                pass: t.deviation <= t.levy_bound + 3.0 * se,
            }
        })
        .collect())
}

/// `|median − mean| / √(log n)`.
pub fn median_mean_gap(report: &StudyReport) -> Result<f64> {
    if report.spec.n <= 1 {
        return domain("median_mean_gap needs n >= 2");
    }
    Ok((report.median - report.mean).abs() / (report.spec.n as f64).ln().sqrt())
}

/// Bootstrap standard error of [`median_mean_gap`].
pub fn median_mean_gap_se(report: &StudyReport) -> Result<f64> {
    if report.spec.n <= 1 {
        return domain("median_mean_gap needs n >= 2");
    }
    Ok(report.gap_se / (report.spec.n as f64).ln().sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailEstimate {
    pub threshold: f64,
    pub estimate: f64,
    pub se: f64,
    pub trials: usize,
}

/// Empirical `P(sup > a)` with its binomial standard error.
pub fn tail_probability(
    spec: &EnsembleSpec,
    a: f64,
    trials: usize,
    cfg: &SolverConfig,
) -> Result<TailEstimate> {
    if trials < MIN_TAIL_TRIALS {
        return domain(format!(
            "tail_probability needs at least {MIN_TAIL_TRIALS} trials"
        ));
    }
    let records = run_trials(spec, 0..trials as u64, cfg, false)?;
    let values: Vec<f64> = records.iter().map(|r| r.sup_value).collect();
    tail_probability_from(&values, a)
}

/// [`tail_probability`] on already computed sup values.
pub fn tail_probability_from(values: &[f64], a: f64) -> Result<TailEstimate> {
    if values.is_empty() {
        return domain("no sup values");
    }
    if !a.is_finite() {
        return domain("threshold must be finite");
    }
    let k = values.len() as f64;
    let p = values.iter().filter(|&&v| v > a).count() as f64 / k;
    Ok(TailEstimate {
        threshold: a,
        estimate: p,
        se: (p * (1.0 - p) / k).sqrt(),
        trials: values.len(),
    })
}

/// `∫_0^A P(sup > a) da` by the trapezoid rule on `points` intervals, with
/// `A` just above the largest value. Equals the sample mean up to the
/// discretization error `A / points`.
pub fn tail_integral(values: &[f64], points: usize) -> Result<f64> {
    if values.is_empty() || points == 0 {
        return domain("tail_integral needs values and a positive point count");
    }
    let top = values.iter().cloned().fold(0.0, f64::max) * 1.01;
    if top == 0.0 {
        return Ok(0.0);
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let k = sorted.len() as f64;
    let surv = |a: f64| {
        let at_or_below = sorted.partition_point(|&v| v <= a);
        (sorted.len() - at_or_below) as f64 / k
    };
    let h = top / points as f64;
    let mut sum = 0.5 * (surv(0.0) + surv(top));
    for j in 1..points {
        sum += surv(j as f64 * h);
    }
    Ok(sum * h)
}

pub fn trials_csv(records: &[TrialRecord]) -> String {
    let m = records.first().map(|r| r.argmax.m()).unwrap_or(0);
    let mut out = String::from("# per-trial sup norms\n");
    let mut cols = vec![
        "trial_index".to_string(),
        "trial_seed".into(),
        "sup_value".into(),
    ];
    for i in 0..=m {
        cols.push(format!("argmax{i}_re"));
        cols.push(format!("argmax{i}_im"));
    }
    cols.extend(["grid_value", "solver_gap", "monotone", "wall_time"].map(String::from));
    out.push_str(&cols.join(","));
    out.push('\n');
    for r in records {
        let _ = write!(
            out,
            "{},{},{:.17e}",
            r.trial_index, r.trial_seed, r.sup_value
        );
        for z in r.argmax.lift() {
            let _ = write!(out, ",{:.17e},{:.17e}", z.re, z.im);
        }
        let _ = writeln!(
            out,
            ",{:.17e},{:.17e},{},{:.6e}",
            r.grid_value, r.solver_gap, r.monotone, r.wall_time
        );
    }
    out
}

pub fn tail_csv(report: &StudyReport) -> String {
    let mut out = String::from("# tail profile around the median\n");
    out.push_str("r,empirical,upper,levy_bound\n");
    for t in &report.tail_profile {
        let _ = writeln!(
            out,
            "{:.17e},{:.17e},{:.17e},{:.17e}",
            t.r, t.deviation, t.upper, t.levy_bound
        );
    }
    out
}
