//! The field pseudometric `d_n(z, w) = √(E|Y_z − Y_w|²)` on CP^m, its
//! asymptotic models, and covering numbers.

use std::f64::consts::SQRT_2;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::projective::{build_greedy_net, fs_cos_sin, NetParams, ProjectivePoint};

/// Default constant `c` of the validity window `r ≤ c log n / √n`.
pub const DEFAULT_WINDOW_C: f64 = 3.0;

/// A value of `d_n`, always in `[0, √2]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MetricValue(f64);

impl MetricValue {
    pub fn new(value: f64) -> Result<Self> {
        if !(0.0..=SQRT_2 + 1e-12).contains(&value) {
            return domain(format!("metric value {value} outside [0, √2]"));
        }
        Ok(Self(value.min(SQRT_2)))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// `√(2 − 2 cos^n r)` from `sin r`, computed as `√(−2 expm1(n ln cos r))`.
pub fn metric_from_sin(n: usize, sin_r: f64) -> f64 {
    let s_sq = (sin_r * sin_r).min(1.0);
    if s_sq == 1.0 {
        return if n == 0 { 0.0 } else { SQRT_2 };
    }
    let log_cos_n = 0.5 * n as f64 * (-s_sq).ln_1p();
    (-2.0 * log_cos_n.exp_m1()).max(0.0).sqrt()
}

/// The field metric between two points of CP^m.
pub fn dn_metric(
    m: usize,
    n: usize,
    p: &ProjectivePoint,
    q: &ProjectivePoint,
) -> Result<MetricValue> {
    if p.m() != m || q.m() != m {
        return domain(format!(
            "metric on CP^{m} evaluated at points of another dimension"
        ));
    }
    let (_, s) = fs_cos_sin(p, q)?;
    Ok(MetricValue(metric_from_sin(n, s).min(SQRT_2)))
}

/// `√2 √(1 − e^{−n r²/2})`.
pub fn small_scale_model(n: usize, r: f64) -> Result<f64> {
    if !(r >= 0.0) {
        return domain(format!("distance must be non-negative, got {r}"));
    }
    Ok(SQRT_2 * (-(-0.5 * n as f64 * r * r).exp_m1()).sqrt())
}

/// `√n · r`, the small-distance linearization.
pub fn small_scale_linearized(n: usize, r: f64) -> Result<f64> {
    if !(r >= 0.0) {
        return domain(format!("distance must be non-negative, got {r}"));
    }
    Ok((n as f64).sqrt() * r)
}

/// Upper end `√2 √(1 − e^{−(c²/2)(log n)²})` of the inversion window.
pub fn inversion_window(n: usize, c: f64) -> f64 {
    let l = (n as f64).ln();
    SQRT_2 * (-(-0.5 * c * c * l * l).exp_m1()).sqrt()
}

/// `r = √((2/n) log(1 − d²/2)^{−1})`, the inverse of [`small_scale_model`],
/// on the default window.
pub fn invert_metric(n: usize, d: MetricValue) -> Result<f64> {
    invert_metric_with(n, d, DEFAULT_WINDOW_C)
}

pub fn invert_metric_with(n: usize, d: MetricValue, window_c: f64) -> Result<f64> {
    if n < 2 {
        return domain("metric inversion needs n >= 2");
    }
    let d = d.value();
    if d >= SQRT_2 {
        return domain("metric saturated at √2: the distance is undetermined");
    }
    let limit = inversion_window(n, window_c);
    if d >= limit {
        return domain(format!("d = {d} beyond the validity window {limit}"));
    }
    Ok(geodesic_radius(n, d))
}

/// `ε' = √(2/n) √(−log(1 − ε²/2))` without window checks.
fn geodesic_radius(n: usize, eps: f64) -> f64 {
    (-(2.0 / n as f64) * (-0.5 * eps * eps).ln_1p()).sqrt()
}

/// `ε ≥ √2 √(1 − 1/n)`: above this the covering count is bracketed only.
pub fn covering_threshold(n: usize) -> f64 {
    SQRT_2 * (1.0 - 1.0 / n as f64).sqrt()
}

/// Geodesic covering model `N(M, ω, ε') = κ ε'^{−2m}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeodesicCoveringModel {
    pub m: usize,
    pub kappa: f64,
}

#[derive(Debug, Deserialize)]
struct CalibrationFile {
    #[allow(dead_code)]
    version: u32,
    entries: Vec<CalibrationEntry>,
}

#[derive(Debug, Deserialize)]
struct CalibrationEntry {
    m: usize,
    kappa: f64,
}

const CALIBRATION: &str = include_str!("../data/covering_calibration.json");

impl GeodesicCoveringModel {
    /// `κ = 1`: the pure `ε'^{−2m}` scaling.
    pub fn unit(m: usize) -> Self {
        Self { m, kappa: 1.0 }
    }

    /// `κ_m` measured from greedy nets (see `data/covering_calibration.json`).
    pub fn calibrated(m: usize) -> Result<Self> {
        let file: CalibrationFile =
            serde_json::from_str(CALIBRATION).expect("bundled calibration parses");
        match file.entries.iter().find(|e| e.m == m) {
            Some(e) => Ok(Self { m, kappa: e.kappa }),
            None => domain(format!("no covering calibration for m = {m}")),
        }
    }

    /// `κ ε'^{−2m}` before rounding.
    pub fn count_real(&self, eps_geo: f64) -> f64 {
        self.kappa * eps_geo.powi(-2 * self.m as i32)
    }

    /// `max(1, round(κ ε'^{−2m}))`.
    pub fn count(&self, eps_geo: f64) -> u64 {
        let c = self.count_real(eps_geo).round();
        if c >= u64::MAX as f64 {
            u64::MAX
        } else {
            (c as u64).max(1)
        }
    }

    /// `log max(1, κ ε'^{−2m})`, the smooth log-count used by the entropy
    /// integrals.
    pub fn log_count(&self, eps_geo: f64) -> f64 {
        (self.kappa.ln() - 2.0 * self.m as f64 * eps_geo.ln()).max(0.0)
    }
}

/// Geodesic radii at which `κ_m` is measured.
pub fn calibration_radii(m: usize) -> [f64; 3] {
    if m == 1 {
        [0.1, 0.15, 0.2]
    } else {
        [0.25, 0.3, 0.35]
    }
}

/// `κ_m` as the mean of `N_greedy(ε') ε'^{2m}` over the calibration radii.
pub fn calibrate_kappa(m: usize, net: &NetParams) -> Result<f64> {
    let radii = calibration_radii(m);
    let mut sum = 0.0;
    for r in radii {
        let count = build_greedy_net(m, r, net)?.cardinality() as f64;
        sum += count * r.powi(2 * m as i32);
    }
    Ok(sum / radii.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoveringMethod {
    Formula,
    Greedy,
}

impl CoveringMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            CoveringMethod::Formula => "formula",
            CoveringMethod::Greedy => "greedy",
        }
    }
}

/// `N(M, d_n, ε)` as an interval `[low, high]` (a single count when equal).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoveringReport {
    pub epsilon: f64,
    pub low: u64,
    pub high: u64,
    pub method: CoveringMethod,
}

impl CoveringReport {
    pub fn is_exact(&self) -> bool {
        self.low == self.high
    }
}

/// Covering number of CP^m under `d_n`.
///
/// The formula method uses `model`; the greedy method converts `ε` to a
/// geodesic radius and counts a greedy net built with `net`.
pub fn covering_number(
    n: usize,
    epsilon: f64,
    method: CoveringMethod,
    model: &GeodesicCoveringModel,
    net: &NetParams,
) -> Result<CoveringReport> {
    if !(epsilon > 0.0) {
        return domain(format!("epsilon must be positive, got {epsilon}"));
    }
    if n < 2 {
        return domain("covering numbers need n >= 2");
    }
    let single = |e| CoveringReport {
        epsilon: e,
        low: 1,
        high: 1,
        method,
    };
    if epsilon >= SQRT_2 {
        return Ok(single(epsilon));
    }
    match method {
        CoveringMethod::Formula => {
            if epsilon >= covering_threshold(n) {
                let nf = n as f64;
                let high = model.count((2.0 * nf.ln() / nf).sqrt());
                Ok(CoveringReport {
                    epsilon,
                    low: 1,
                    high,
                    method,
                })
            } else {
                let count = model.count(geodesic_radius(n, epsilon));
                Ok(CoveringReport {
                    epsilon,
                    low: count,
                    high: count,
                    method,
                })
            }
        }
        CoveringMethod::Greedy => {
            let radius = invert_metric(n, MetricValue::new(epsilon)?)?;
            let count = build_greedy_net(model.m, radius, net)?.cardinality() as u64;
            Ok(CoveringReport {
                epsilon,
                low: count,
                high: count,
                method,
            })
        }
    }
}

/// Covering table as CSV.
pub fn covering_csv(rows: &[CoveringReport]) -> String {
    let mut out = String::from("# covering table v1: epsilon,count_low,count_high,method\n");
    out.push_str("epsilon,count_low,count_high,method\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{:.17e},{},{},{}",
            r.epsilon,
            r.low,
            r.high,
            r.method.as_str()
        );
    }
    out
}
