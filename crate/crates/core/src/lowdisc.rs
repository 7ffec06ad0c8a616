//! Deterministic low-discrepancy point sets on CP^m.
//!
//! Points are generated in the unit cube `[0,1)^{2m}` and pushed forward to
//! the Fubini–Study measure: `m` coordinates pick the moduli
//! `(|x_0|², …, |x_m|²)` uniformly on the simplex, the other `m` pick the
//! phases of `x_1, …, x_m`. For `m = 1` this is the spherical Fibonacci
//! lattice on the Riemann sphere.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::TAU;

use crate::projective::ProjectivePoint;

const PRIMES: [u32; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];

fn radical_inverse(mut i: u64, base: u32) -> f64 {
    let b = base as u64;
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut r = 0.0;
    while i > 0 {
        r += (i % b) as f64 * f;
        i /= b;
        f *= inv;
    }
    r
}

fn shifts(dim: usize, seed: u64) -> Vec<f64> {
    if seed == 0 {
        return vec![0.0; dim];
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..dim).map(|_| rng.random::<f64>()).collect()
}

/// Maps a point of `[0,1)^{2m}` to CP^m, uniformly for the FS measure.
pub fn cube_to_cpm(u: &[f64]) -> ProjectivePoint {
    let m = u.len() / 2;
    let mut weights = Vec::with_capacity(m + 1);
    let mut remaining = 1.0_f64;
    // Stick breaking: the first of k+1 uniform simplex weights is Beta(1, k).
    for (j, &uj) in u[..m].iter().enumerate() {
        let k = (m - j) as f64;
        let w = remaining * (1.0 - (1.0 - uj).powf(1.0 / k));
        weights.push(w);
        remaining -= w;
    }
    weights.push(remaining.max(0.0));
    let mut lift = Vec::with_capacity(m + 1);
    lift.push(Complex64::new(weights[0].sqrt(), 0.0));
    for j in 1..=m {
        lift.push(Complex64::from_polar(weights[j].sqrt(), TAU * u[m + j - 1]));
    }
    crate::projective::normalize_lift(&lift).expect("simplex weights sum to one")
}

/// Spherical Fibonacci lattice on CP^1 with `count` points.
pub fn fibonacci_cp1(count: usize, seed: u64) -> Vec<ProjectivePoint> {
    let golden = (5.0_f64.sqrt() - 1.0) / 2.0;
    let shift = shifts(1, seed)[0];
    (0..count)
        .map(|i| {
            let height = (i as f64 + 0.5) / count as f64;
            let turn = (i as f64 * golden + shift).fract();
            cube_to_cpm(&[height, turn])
        })
        .collect()
}

/// Cranley–Patterson shifted Halton points on CP^m.
pub fn halton_cpm(m: usize, count: usize, seed: u64) -> Vec<ProjectivePoint> {
    let dim = 2 * m;
    assert!(
        dim <= PRIMES.len(),
        "Halton set supports m <= {}",
        PRIMES.len() / 2
    );
    let shift = shifts(dim, seed);
    let mut u = vec![0.0; dim];
    (0..count as u64)
        .map(|i| {
            for (k, uk) in u.iter_mut().enumerate() {
                *uk = (radical_inverse(i + 1, PRIMES[k]) + shift[k]).fract();
            }
            cube_to_cpm(&u)
        })
        .collect()
}

/// The canonical probe set: Fibonacci for `m = 1`, Halton otherwise.
pub fn probe_set(m: usize, count: usize, seed: u64) -> Vec<ProjectivePoint> {
    if m == 1 {
        fibonacci_cp1(count, seed)
    } else {
        halton_cpm(m, count, seed)
    }
}
