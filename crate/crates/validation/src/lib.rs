//! Shared harness for the acceptance suite: per-criterion outcomes, cached
//! Monte Carlo studies and small geometric helpers.

use std::collections::BTreeMap;

use holosup::ensemble::{EnsembleSpec, Measure};
use holosup::projective::{normalize_lift, pairing, ProjectivePoint};
use holosup::solver::SolverConfig;
use holosup::study::{run_study, StudyReport};
use num_complex::Complex64 as C;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Result of one criterion: overall verdict plus detail lines.
pub struct Outcome {
    pub pass: bool,
    pub lines: Vec<String>,
}

impl Default for Outcome {
    fn default() -> Self {
        Self::new()
    }
}

impl Outcome {
    pub fn new() -> Self {
        Self {
            pass: true,
            lines: Vec::new(),
        }
    }

    pub fn check(&mut self, ok: bool, msg: String) {
        self.pass &= ok;
        self.lines
            .push(format!("    [{}] {msg}", if ok { "ok" } else { "FAILED" }));
    }

    pub fn note(&mut self, msg: String) {
        self.lines.push(format!("    {msg}"));
    }
}

/// Studies shared between criteria, keyed by (m, n, measure).
#[derive(Default)]
pub struct Studies {
    cache: BTreeMap<(usize, usize, &'static str), StudyReport>,
}

pub const SPHERICAL_SEED: u64 = 1;
pub const GAUSSIAN_SEED: u64 = 2;

impl Studies {
    pub fn get(&mut self, m: usize, n: usize, measure: Measure) -> StudyReport {
        let key = (m, n, measure.as_str());
        if let Some(r) = self.cache.get(&key) {
            return r.clone();
        }
        let (seed, trials) = match measure {
            Measure::Spherical => (SPHERICAL_SEED, if m == 1 { 400 } else { 200 }),
            Measure::NormalizedGaussian => (GAUSSIAN_SEED, if m == 1 { 400 } else { 200 }),
        };
        let spec = EnsembleSpec::new(m, n, measure, seed).unwrap();
        let report = run_study(&spec, trials, &solver_for(m)).unwrap();
        self.cache.insert(key, report.clone());
        report
    }
}

/// Solver settings used for studies: the default grid for m = 1, the
/// coarser grid factor 2 for m = 2.
pub fn solver_for(m: usize) -> SolverConfig {
    if m == 1 {
        SolverConfig::default()
    } else {
        SolverConfig {
            grid_factor: 2.0,
            ..SolverConfig::default()
        }
    }
}

pub fn sqrt_log(n: usize) -> f64 {
    (n as f64).ln().sqrt()
}

pub fn random_pairs(m: usize, count: usize, seed: u64) -> Vec<(ProjectivePoint, ProjectivePoint)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            (
                ProjectivePoint::random(m, &mut rng),
                ProjectivePoint::random(m, &mut rng),
            )
        })
        .collect()
}

/// Point at FS distance `r` from `x` along a random direction.
pub fn at_distance(x: &ProjectivePoint, r: f64, rng: &mut ChaCha8Rng) -> ProjectivePoint {
    let lift = x.lift();
    let mut w: Vec<C> = (0..lift.len())
        .map(|_| C::new(rng.random(), rng.random()) - C::new(0.5, 0.5))
        .collect();
    let ip = pairing(&w, lift);
    for (wi, xi) in w.iter_mut().zip(lift) {
        *wi -= ip * xi;
    }
    let norm = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let y: Vec<C> = lift
        .iter()
        .zip(&w)
        .map(|(a, b)| a * r.cos() + b / norm * r.sin())
        .collect();
    normalize_lift(&y).unwrap()
}
