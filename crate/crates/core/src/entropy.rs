//! Entropy bounds for the sup norm: the Dudley integral, Sudakov
//! minoration, the sharp envelope, and the Levy tail.

use std::f64::consts::SQRT_2;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::metric::{covering_threshold, GeodesicCoveringModel};
use crate::quadrature::tanh_sinh;

/// Default number of points of the Sudakov grid.
pub const SUDAKOV_GRID: usize = 256;
/// Default first-level node count of the Dudley quadrature.
pub const DUDLEY_POINTS: usize = 64;

/// `log N(M, ω, ε')` as a function of the geodesic radius.
pub trait LogCovering {
    fn log_count_geodesic(&self, eps_geo: f64) -> f64;
}

impl LogCovering for GeodesicCoveringModel {
    fn log_count_geodesic(&self, eps_geo: f64) -> f64 {
        self.log_count(eps_geo)
    }
}

fn geodesic_top(n: usize) -> f64 {
    let nf = n as f64;
    (2.0 * nf.ln() / nf).sqrt()
}

/// `log N(M, d_n, ε)` from a geodesic model: the model at
/// `ε' = √(2/n) √(−log(1 − ε²/2))` below the threshold, its value at
/// `√(2 log n / n)` between the threshold and `√2`, and zero above.
pub fn log_covering_metric(n: usize, eps: f64, model: &dyn LogCovering) -> f64 {
    if eps >= SQRT_2 {
        return 0.0;
    }
    if eps >= covering_threshold(n) {
        return model.log_count_geodesic(geodesic_top(n));
    }
    let geo = (-(2.0 / n as f64) * (-0.5 * eps * eps).ln_1p()).sqrt();
    model.log_count_geodesic(geo)
}

/// The Dudley integral `∫_0^{√2} √(log N(M, d_n, ε)) dε = I_n + II_n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DudleyValue {
    pub total: f64,
    /// Part below `ε = √2 √(1 − 1/n)`.
    pub i_n: f64,
    /// Part between the threshold and `√2`.
    pub ii_n: f64,
    pub evaluations: usize,
}

/// Dudley integral under the unit covering model `ε'^{−2m}`.
pub fn dudley_integral(m: usize, n: usize, quad_points: usize) -> Result<DudleyValue> {
    dudley_integral_with(n, quad_points, &GeodesicCoveringModel::unit(m))
}

/// Dudley integral for an arbitrary geodesic covering model.
///
/// `I_n` is computed in the geodesic variable `t` with
/// `ε = √2 √(1 − e^{−n t²/2})`, so `ε'(ε) = t` and the integrand
/// `√(log N(t)) dε/dt` has only a `√(−log t)` singularity at zero, which
/// the tanh-sinh rule absorbs.
pub fn dudley_integral_with(
    n: usize,
    quad_points: usize,
    model: &dyn LogCovering,
) -> Result<DudleyValue> {
    if quad_points < 64 {
        return domain(format!(
            "quad_points must be at least 64, got {quad_points}"
        ));
    }
    if n < 2 {
        return domain("the Dudley integral needs n >= 2");
    }
    let nf = n as f64;
    let top = geodesic_top(n);
    let integrand = |_t: f64, t: f64, _: f64| {
        let log_n = model.log_count_geodesic(t);
        if log_n <= 0.0 {
            return 0.0;
        }
        let u = 0.5 * nf * t * t;
        let one_minus = -(-u).exp_m1();
        let deps_dt = SQRT_2 * (-u).exp() * nf * t / (2.0 * one_minus.sqrt());
        log_n.sqrt() * deps_dt
    };
    let quad = tanh_sinh(integrand, 0.0, top, quad_points, 14, 1e-12, 1e-6)?;
    let ii_n = (SQRT_2 - covering_threshold(n)) * model.log_count_geodesic(top).sqrt();
    Ok(DudleyValue {
        total: quad.value + ii_n,
        i_n: quad.value,
        ii_n,
        evaluations: quad.evaluations,
    })
}

/// `II_n / √(log n)`, the term that must vanish as `n` grows.
pub fn ii_ratio(m: usize, n: usize) -> Result<f64> {
    let d = dudley_integral(m, n, DUDLEY_POINTS)?;
    Ok(d.ii_n / (n as f64).ln().sqrt())
}

/// Maximizer of the complex Sudakov functional over the ε grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SudakovResult {
    pub epsilon: f64,
    pub value: f64,
    /// The fixed choice `ε = √2 √(1 − 1/n)` and its value.
    pub threshold_epsilon: f64,
    pub threshold_value: f64,
}

/// `(ε/√2) √(log N(M, d_n, ε))`.
pub fn sudakov_value(n: usize, eps: f64, model: &dyn LogCovering) -> f64 {
    eps / SQRT_2 * log_covering_metric(n, eps, model).sqrt()
}

pub fn sudakov_sweep(m: usize, n: usize, grid_size: usize) -> Result<SudakovResult> {
    sudakov_sweep_with(n, grid_size, &GeodesicCoveringModel::unit(m))
}

/// Maximizes the Sudakov functional over `grid_size` log-spaced points of
/// `[10^{-3} t, t]`, `t = √2 √(1 − 1/n)`, with `t` always included.
pub fn sudakov_sweep_with(
    n: usize,
    grid_size: usize,
    model: &dyn LogCovering,
) -> Result<SudakovResult> {
    if grid_size < 16 {
        return domain(format!("grid_size must be at least 16, got {grid_size}"));
    }
    if n < 2 {
        return domain("the Sudakov sweep needs n >= 2");
    }
    let top = covering_threshold(n);
    let threshold_value = sudakov_value(n, top, model);
    let mut best = (top, threshold_value);
    for k in 0..grid_size {
        let eps = top * 1e-3f64.powf(1.0 - k as f64 / (grid_size - 1) as f64);
        let v = sudakov_value(n, eps, model);
        if v > best.1 {
            best = (eps, v);
        }
    }
    Ok(SudakovResult {
        epsilon: best.0,
        value: best.1,
        threshold_epsilon: top,
        threshold_value,
    })
}

/// `√((m + (m(m+1)/2) log log n / log n) log n)`.
pub fn sharp_upper(m: usize, n: usize) -> Result<f64> {
    if n < 3 {
        return domain("the sharp constant needs n >= 3");
    }
    let l = (n as f64).ln();
    let mf = m as f64;
    Ok(((mf + 0.5 * mf * (mf + 1.0) * l.ln() / l) * l).sqrt())
}

/// Predicted bounds for the expected sup norm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundEnvelope {
    pub n: usize,
    pub m: usize,
    pub dudley_value: f64,
    pub sudakov_value: f64,
    pub sudakov_arg: f64,
    pub sharp_upper: f64,
    pub sharp_lower: f64,
    pub sqrt_m_log_n: f64,
}

pub fn predicted_envelope(m: usize, n: usize) -> Result<BoundEnvelope> {
    if n < 3 {
        return domain("the envelope needs n >= 3");
    }
    let dudley = dudley_integral(m, n, DUDLEY_POINTS)?;
    let sudakov = sudakov_sweep(m, n, SUDAKOV_GRID)?;
    Ok(BoundEnvelope {
        n,
        m,
        dudley_value: dudley.total,
        sudakov_value: sudakov.value,
        sudakov_arg: sudakov.epsilon,
        sharp_upper: sharp_upper(m, n)?,
        sharp_lower: sudakov.value,
        sqrt_m_log_n: (m as f64 * (n as f64).ln()).sqrt(),
    })
}

/// Envelope table as CSV.
pub fn envelope_csv(rows: &[BoundEnvelope]) -> String {
    let mut out = String::from(
        "# envelope table v1: n,m,dudley,sudakov,sharp_lower,sharp_upper,sqrt_m_log_n\n",
    );
    out.push_str("n,m,dudley,sudakov,sharp_lower,sharp_upper,sqrt_m_log_n\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}",
            r.n, r.m, r.dudley_value, r.sudakov_value, r.sharp_lower, r.sharp_upper, r.sqrt_m_log_n
        );
    }
    out
}

/// `e^{−r²/2}`, the asymptotic bound on `P(|L − median| > r)`.
pub fn levy_tail(r: f64) -> Result<f64> {
    if !(r >= 0.0) {
        return domain(format!("r must be non-negative, got {r}"));
    }
    Ok((-0.5 * r * r).exp())
}

/// `exp(−(d − 1) r² / (2 Lip²))` on the sphere of real dimension `d − 1`.
pub fn levy_tail_finite(r: f64, d: f64, lip: f64) -> Result<f64> {
    if !(r >= 0.0) || !(d >= 1.0) || !(lip > 0.0) {
        return domain("levy_tail_finite needs r >= 0, d >= 1, Lip > 0");
    }
    Ok((-(d - 1.0) * r * r / (2.0 * lip * lip)).exp())
}

/// `(n^{m/2} / √(log n), n^{m/2})`, the bounds on the Lipschitz norm of the
/// sup-norm functional.
pub fn lipschitz_bounds(m: usize, n: usize) -> Result<(f64, f64)> {
    if n < 2 {
        return domain("Lipschitz bounds need n >= 2");
    }
    let upper = (n as f64).powf(m as f64 / 2.0);
    Ok((upper / (n as f64).ln().sqrt(), upper))
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Trivial;
    impl LogCovering for Trivial {
        fn log_count_geodesic(&self, _: f64) -> f64 {
            0.0
        }
    }

    /// Trapezoid rule in ε with `points` intervals.
    fn trapezoid_oracle(m: usize, n: usize, points: usize) -> f64 {
        let model = GeodesicCoveringModel::unit(m);
        let h = SQRT_2 / points as f64;
        let mut sum = 0.0;
        for k in 1..points {
            sum += log_covering_metric(n, k as f64 * h, &model).sqrt();
        }
        // f(0) is infinite but integrable; f(√2) = 0.
        h * sum
    }

    #[test]
    fn trivial_covering_integrates_to_zero() {
        let d = dudley_integral_with(256, 64, &Trivial).unwrap();
        assert_eq!(d.total, 0.0);
        assert_eq!(sudakov_sweep_with(256, 32, &Trivial).unwrap().value, 0.0);
    }

    #[test]
    fn dudley_matches_trapezoid_oracle() {
        for (m, n) in [(1, 256), (2, 64)] {
            let d = dudley_integral(m, n, 64).unwrap().total;
            let oracle = trapezoid_oracle(m, n, 1_000_000);
            assert!(
                (d - oracle).abs() / oracle < 1e-4,
                "m={m} n={n}: {d} vs {oracle}"
            );
        }
    }

    #[test]
    fn dudley_is_stable_in_quad_points() {
        let a = dudley_integral(1, 1024, 64).unwrap().total;
        let b = dudley_integral(1, 1024, 512).unwrap().total;
        assert!((a - b).abs() / a < 1e-10);
        assert!(dudley_integral(1, 1024, 63).is_err());
    }

    #[test]
    fn dudley_over_sqrt_log_n_is_flat() {
        for m in [1, 2] {
            let ratios: Vec<f64> = [64usize, 256, 1024, 4096]
                .iter()
                .map(|&n| dudley_integral(m, n, 64).unwrap().total / (n as f64).ln().sqrt())
                .collect();
            let max = ratios.iter().cloned().fold(f64::MIN, f64::max);
            let min = ratios.iter().cloned().fold(f64::MAX, f64::min);
            assert!(max / min - 1.0 < 0.1, "m={m}: {ratios:?}");
        }
    }

    #[test]
    fn ii_term_vanishes() {
        let mut last = f64::INFINITY;
        for n in [64usize, 256, 1024, 4096] {
            let r = ii_ratio(1, n).unwrap();
            let nf = n as f64;
            let direct =
                SQRT_2 * (1.0 - (1.0 - 1.0 / nf).sqrt()) * (nf / (2.0 * nf.ln())).ln().sqrt()
                    / nf.ln().sqrt();
            assert!((r - direct).abs() < 1e-14);
            assert!(r < last);
            last = r;
        }
        assert!(last < 1e-3);
    }

    #[test]
    fn sudakov_examples() {
        // (ε/√2) √(log(n / (2 log n))) at ε = √2 √(1 − 1/n).
        let s = sudakov_sweep(1, 256, SUDAKOV_GRID).unwrap();
        let l = (256f64 / (2.0 * 256f64.ln())).ln();
        let expected = (1.0f64 - 1.0 / 256.0).sqrt() * l.sqrt();
        assert!((s.threshold_value - expected).abs() < 1e-14);
        assert!((s.threshold_value - 1.769).abs() < 2e-3);
        assert!(s.value >= s.threshold_value);
        let s2 = sudakov_sweep(2, 256, SUDAKOV_GRID).unwrap();
        assert!(
            (s2.threshold_value - (1.0f64 - 1.0 / 256.0).sqrt() * (2.0 * l).sqrt()).abs() < 1e-14
        );
        assert!((s2.threshold_value - 2.5007).abs() < 1e-3);
        assert!(sudakov_sweep(1, 256, 15).is_err());
    }

    #[test]
    fn dudley_dominates_sudakov_and_both_increase() {
        for m in [1, 2] {
            let mut last = (0.0, 0.0);
            for n in [64usize, 128, 256, 512, 1024, 2048, 4096] {
                let d = dudley_integral(m, n, 64).unwrap().total;
                let s = sudakov_sweep(m, n, SUDAKOV_GRID).unwrap().value;
                assert!(d >= s);
                assert!(d > last.0 && s > last.1);
                last = (d, s);
            }
        }
    }

    #[test]
    fn envelope_examples() {
        let e = predicted_envelope(1, 1024).unwrap();
        let l = 1024f64.ln();
        assert!((e.sharp_upper - (l + l.ln()).sqrt()).abs() < 1e-14);
        assert!((e.sharp_upper - 2.978).abs() < 1e-3);
        assert!((e.sqrt_m_log_n - 2.633).abs() < 1e-3);
        let e = predicted_envelope(1, 256).unwrap();
        // The sweep peaks inside the grid (ε ≈ 1.337), above the value 1.768
        // at the threshold ε.
        assert!(e.sharp_lower >= 1.768);
        assert!((e.sharp_lower - 1.9013).abs() < 1e-4);
        assert!((e.sudakov_arg - 1.33701).abs() < 1e-4);
        assert!((e.sharp_upper - 2.6941).abs() < 1e-4);
        assert!(e.sharp_lower <= e.sqrt_m_log_n && e.sqrt_m_log_n <= e.sharp_upper);
        assert!(predicted_envelope(1, 2).is_err());
        let mut last = f64::INFINITY;
        for n in [1_000usize, 10_000, 100_000, 1_000_000] {
            let ratio = sharp_upper(1, n).unwrap() / (n as f64).ln().sqrt();
            assert!(ratio < last && ratio > 1.0);
            last = ratio;
        }
    }

    #[test]
    fn levy_examples() {
        assert_eq!(levy_tail(0.0).unwrap(), 1.0);
        assert!((levy_tail(2.0).unwrap() - (-2.0f64).exp()).abs() < 1e-16);
        assert!((levy_tail(2.0).unwrap() - 0.1353).abs() < 1e-4);
        for r in [0.5, 1.0, 2.0] {
            let lip = 3.0;
            let f = levy_tail_finite(r, 2.0 * lip * lip + 1.0, lip).unwrap();
            assert!((f - (-r * r).exp()).abs() < 1e-15);
            assert!(f <= levy_tail(r).unwrap());
        }
        let (lo, hi) = lipschitz_bounds(1, 256).unwrap();
        assert!((hi - 16.0).abs() < 1e-12 && lo < hi);
    }

    #[test]
    fn csv_layout() {
        let e = predicted_envelope(1, 64).unwrap();
        let csv = envelope_csv(&[e]);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[2].starts_with("64,1,"));
    }
}
