//! Monte Carlo checks tying the ensembles to the kernel and the field metric.

use holosup::ensemble::{
    evaluate_field, pair_moments, sample_coefficients, EnsembleSpec, Measure, SectionCoeffs,
};
use holosup::kernel::{kernel_exact, KernelNormalization};
use holosup::metric::dn_metric;
use holosup::projective::{pairing, ProjectivePoint};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn random_pairs(m: usize, count: usize, seed: u64) -> Vec<(ProjectivePoint, ProjectivePoint)> {
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

#[test]
fn covariance_matches_kernel() {
    for n in [4usize, 16, 64] {
        let spec = EnsembleSpec::new(1, n, Measure::NormalizedGaussian, 31).unwrap();
        let pairs = random_pairs(1, 20, n as u64);
        let moments = pair_moments(&spec, &pairs, 10_000).unwrap();
        for ((x, y), mo) in pairs.iter().zip(&moments) {
            let target = pairing(x.lift(), y.lift()).powu(n as u32);
            let se = (mo.cross_se.0.powi(2) + mo.cross_se.1.powi(2)).sqrt();
            assert!(
                (mo.cross - target).norm() <= 3.0 * se,
                "n={n}: {} vs {target}",
                mo.cross
            );
            assert!((mo.second_moment - 1.0).abs() <= 3.0 * mo.second_moment_se);
        }
    }
}

#[test]
fn increments_match_field_metric() {
    let n = 64;
    let spec = EnsembleSpec::new(1, n, Measure::NormalizedGaussian, 77).unwrap();
    // Pairs at distances where the metric is neither 0 nor saturated.
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let pairs: Vec<_> = (0..20)
        .map(|k| {
            let x = ProjectivePoint::random(1, &mut rng);
            let r = 0.02 + 0.015 * k as f64;
            let lift = x.lift();
            let perp = [-lift[1].conj(), lift[0].conj()];
            let y: Vec<Complex64> = (0..2)
                .map(|i| lift[i] * r.cos() + perp[i] * r.sin())
                .collect();
            (x, holosup::projective::normalize_lift(&y).unwrap())
        })
        .collect();
    let moments = pair_moments(&spec, &pairs, 10_000).unwrap();
    for ((x, y), mo) in pairs.iter().zip(&moments) {
        let d = dn_metric(1, n, x, y).unwrap().value();
        let est = mo.increment.sqrt();
        // Delta method: se(√v) = se(v) / (2√v).
        let se = mo.increment_se / (2.0 * est);
        assert!((est - d).abs() <= 3.0 * se, "{est} vs {d} (se {se})");
    }
}

#[test]
fn basis_reproduces_kernel() {
    // Σ_α ŝ_α(x) conj(ŝ_α(y)) from unit coefficient vectors.
    let (m, n) = (2, 5);
    let spec = EnsembleSpec::new(m, n, Measure::Spherical, 0).unwrap();
    let d = spec.dimension().unwrap();
    for (x, y) in random_pairs(m, 5, 9) {
        let mut sum = Complex64::new(0.0, 0.0);
        for k in 0..d {
            let mut c = vec![Complex64::new(0.0, 0.0); d];
            c[k] = Complex64::new(1.0, 0.0);
            let s = SectionCoeffs::from_coeffs(spec.clone(), c).unwrap();
            sum += evaluate_field(&s, &x).unwrap().amplitude
                * evaluate_field(&s, &y).unwrap().amplitude.conj();
        }
        let k = kernel_exact(m, n, &x, &y, KernelNormalization::UnitVolume).unwrap();
        assert!((sum - k).norm() < 1e-10 * d as f64);
    }
}

#[test]
fn gaussian_norm_has_unit_mean() {
    let spec = EnsembleSpec::new(1, 4, Measure::NormalizedGaussian, 5).unwrap();
    let draws = 10_000;
    let norms: Vec<f64> = (0..draws)
        .map(|i| sample_coefficients(&spec, i).unwrap().l2_norm().powi(2))
        .collect();
    let mean = norms.iter().sum::<f64>() / draws as f64;
    let var = norms.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (draws - 1) as f64;
    assert!((mean - 1.0).abs() <= 3.0 * (var / draws as f64).sqrt());
}

/// Two-sample Kolmogorov–Smirnov statistic.
fn ks_statistic(mut a: Vec<f64>, mut b: Vec<f64>) -> f64 {
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < a.len() && j < b.len() {
        if a[i] <= b[j] {
            i += 1;
        } else {
            j += 1;
        }
        d = d.max((i as f64 / a.len() as f64 - j as f64 / b.len() as f64).abs());
    }
    d
}

#[test]
fn spherical_magnitudes_are_exchangeable() {
    let spec = EnsembleSpec::new(1, 16, Measure::Spherical, 12).unwrap();
    let samples = 10_000u64;
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let x = ProjectivePoint::random(1, &mut rng);
    let y = ProjectivePoint::random(1, &mut rng);
    // Independent draws at the two points.
    let at = |p: &ProjectivePoint, offset: u64| -> Vec<f64> {
        (0..samples)
            .map(|i| {
                let s = sample_coefficients(&spec, offset + i).unwrap();
                evaluate_field(&s, p).unwrap().magnitude
            })
            .collect()
    };
    let d = ks_statistic(at(&x, 0), at(&y, samples));
    let critical = 1.628 * (2.0 / samples as f64).sqrt();
    assert!(d < critical, "KS {d} >= {critical}");
}

#[test]
fn magnitude_is_lift_phase_invariant() {
    let spec = EnsembleSpec::new(2, 7, Measure::Spherical, 3).unwrap();
    let s = sample_coefficients(&spec, 0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..20 {
        let p = ProjectivePoint::random(2, &mut rng);
        let rotated: Vec<Complex64> = p
            .lift()
            .iter()
            .map(|z| z * Complex64::from_polar(1.0, 0.7))
            .collect();
        let q = holosup::projective::normalize_lift(&rotated).unwrap();
        let a = evaluate_field(&s, &p).unwrap().magnitude;
        let b = evaluate_field(&s, &q).unwrap().magnitude;
        assert!((a - b).abs() < 1e-12);
    }
}
