//! Points of CP^m, the Fubini–Study distance, affine charts and greedy
//! geodesic nets.
//!
//! A point is stored as a unit lift `x ∈ C^{m+1}` whose first coordinate of
//! largest modulus is real and non-negative. The distance uses the
//! convention `cos r = |⟨x, ȳ⟩|`, so the diameter of CP^m is π/2.

use std::fmt::Write as _;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::lowdisc;

/// Relative tolerance used to break ties between coordinates of (nearly)
/// equal modulus when choosing the canonical phase.
const TIE_TOLERANCE: f64 = 1e-12;

/// A point of CP^m carried as its canonical unit lift.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectivePoint {
    lift: Vec<Complex64>,
}

impl ProjectivePoint {
    /// Complex dimension `m` of the ambient projective space.
    pub fn m(&self) -> usize {
        self.lift.len() - 1
    }

    pub fn lift(&self) -> &[Complex64] {
        &self.lift
    }

    /// The homogeneous coordinate vector `e_k`.
    pub fn basis(m: usize, k: usize) -> Result<Self> {
        if k > m {
            return domain(format!("basis index {k} exceeds m = {m}"));
        }
        let mut v = vec![Complex64::new(0.0, 0.0); m + 1];
        v[k] = Complex64::new(1.0, 0.0);
        normalize_lift(&v)
    }

    /// Index of the coordinate used for the canonical phase (the first
    /// coordinate of largest modulus).
    pub fn leading_index(&self) -> usize {
        leading_index(&self.lift)
    }

    /// Projective equality up to `tol` in Fubini–Study distance.
    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        fs_distance(self, other).map(|r| r <= tol).unwrap_or(false)
    }

    /// Applies a unitary matrix (row-major, `(m+1)×(m+1)`) to the lift.
    pub fn transformed(&self, unitary: &Unitary) -> Result<Self> {
        if unitary.dim() != self.lift.len() {
            return domain(format!(
                "unitary of size {} applied to a point of CP^{}",
                unitary.dim(),
                self.m()
            ));
        }
        normalize_lift(&unitary.apply(&self.lift))
    }

    /// Draws a point from the Fubini–Study (unitarily invariant) measure.
    pub fn random<R: Rng + ?Sized>(m: usize, rng: &mut R) -> Self {
        loop {
            let v: Vec<Complex64> = (0..=m)
                .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
                .collect();
            if let Ok(p) = normalize_lift(&v) {
                return p;
            }
        }
    }
}

fn leading_index(v: &[Complex64]) -> usize {
    let max = v.iter().map(|z| z.norm()).fold(0.0_f64, f64::max);
    v.iter()
        .position(|z| z.norm() >= max * (1.0 - TIE_TOLERANCE))
        .unwrap_or(0)
}

/// Returns the canonical unit lift of the line through `v`.
pub fn normalize_lift(v: &[Complex64]) -> Result<ProjectivePoint> {
    if v.len() < 2 {
        return domain("a lift needs at least two homogeneous coordinates");
    }
    if v.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return domain("lift has non-finite coordinates");
    }
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if norm == 0.0 {
        return domain("cannot normalize the zero vector");
    }
    let lead = leading_index(v);
    let phase = v[lead].conj() / v[lead].norm();
    let scale = phase / norm;
    let mut lift: Vec<Complex64> = v.iter().map(|z| z * scale).collect();
    // Remove rounding residue from the leading coordinate.
    lift[lead] = Complex64::new(lift[lead].norm(), 0.0);
    let renorm = lift.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    for z in &mut lift {
        *z /= renorm;
    }
    Ok(ProjectivePoint { lift })
}

/// Hermitian pairing `⟨x, ȳ⟩ = Σ x_i conj(y_i)`.
pub fn pairing(x: &[Complex64], y: &[Complex64]) -> Complex64 {
    x.iter().zip(y).map(|(a, b)| a * b.conj()).sum()
}

fn check_dims(p: &ProjectivePoint, q: &ProjectivePoint) -> Result<()> {
    if p.m() != q.m() {
        return domain(format!("dimension mismatch: CP^{} vs CP^{}", p.m(), q.m()));
    }
    Ok(())
}

fn lift_order(a: &[Complex64], b: &[Complex64]) -> bool {
    for (x, y) in a.iter().zip(b) {
        for (u, v) in [(x.re, y.re), (x.im, y.im)] {
            if u != v {
                return u < v;
            }
        }
    }
    true
}

/// `(cos r, sin r)` for the Fubini–Study angle between two points.
///
/// The sine is computed from the component of `y` orthogonal to `x`, which
/// keeps full relative accuracy for nearby points.
pub fn fs_cos_sin(p: &ProjectivePoint, q: &ProjectivePoint) -> Result<(f64, f64)> {
    check_dims(p, q)?;
    // Fixed argument order makes the result exactly symmetric.
    let (x, y) = if lift_order(p.lift(), q.lift()) {
        (p.lift(), q.lift())
    } else {
        (q.lift(), p.lift())
    };
    let c = pairing(y, x);
    let sin_sq: f64 = y
        .iter()
        .zip(x)
        .map(|(yi, xi)| (yi - c * xi).norm_sqr())
        .sum();
    let cos = c.norm().min(1.0);
    Ok((cos, sin_sq.sqrt().min(1.0)))
}

/// Fubini–Study geodesic distance in `[0, π/2]`.
pub fn fs_distance(p: &ProjectivePoint, q: &ProjectivePoint) -> Result<f64> {
    let (c, s) = fs_cos_sin(p, q)?;
    Ok(s.atan2(c))
}

/// A point written in the affine chart where coordinate `chart_index` is 1.
#[derive(Debug, Clone, PartialEq)]
pub struct ChartPoint {
    pub chart_index: usize,
    pub affine: Vec<Complex64>,
}

impl ChartPoint {
    pub fn m(&self) -> usize {
        self.affine.len()
    }

    /// Kähler potential `log(1 + |u|²)` of the Fubini–Study form in this chart.
    pub fn kahler_potential(&self) -> f64 {
        self.affine
            .iter()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .ln_1p()
    }
}

/// Affine coordinates of `p` in chart `chart_index`.
pub fn chart_project(p: &ProjectivePoint, chart_index: usize) -> Result<ChartPoint> {
    let x = p.lift();
    if chart_index > p.m() {
        return domain(format!(
            "chart {chart_index} does not exist on CP^{}",
            p.m()
        ));
    }
    let pivot = x[chart_index];
    if pivot.norm() == 0.0 {
        return domain(format!("point lies outside chart {chart_index}"));
    }
    let affine = x
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != chart_index)
        .map(|(_, z)| z / pivot)
        .collect();
    Ok(ChartPoint {
        chart_index,
        affine,
    })
}

/// Inverse of [`chart_project`].
pub fn chart_embed(c: &ChartPoint) -> Result<ProjectivePoint> {
    if c.chart_index > c.m() {
        return domain(format!(
            "chart {} does not exist on CP^{}",
            c.chart_index,
            c.m()
        ));
    }
    let mut v = Vec::with_capacity(c.m() + 1);
    v.extend_from_slice(&c.affine[..c.chart_index]);
    v.push(Complex64::new(1.0, 0.0));
    v.extend_from_slice(&c.affine[c.chart_index..]);
    normalize_lift(&v)
}

/// A unitary matrix of `U(m+1)`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Unitary {
    dim: usize,
    entries: Vec<Complex64>,
}

impl Unitary {
    pub fn identity(dim: usize) -> Self {
        let mut entries = vec![Complex64::new(0.0, 0.0); dim * dim];
        for i in 0..dim {
            entries[i * dim + i] = Complex64::new(1.0, 0.0);
        }
        Self { dim, entries }
    }

    /// Haar-distributed unitary via Gram–Schmidt on a complex Gaussian matrix.
    pub fn random<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Self {
        let mut rows: Vec<Vec<Complex64>> = Vec::with_capacity(dim);
        while rows.len() < dim {
            let mut v: Vec<Complex64> = (0..dim)
                .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
                .collect();
            // Two passes of modified Gram–Schmidt.
            for _ in 0..2 {
                for r in &rows {
                    let c = pairing(&v, r);
                    for (vi, ri) in v.iter_mut().zip(r) {
                        *vi -= c * ri;
                    }
                }
            }
            let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if norm > 1e-8 {
                rows.push(v.into_iter().map(|z| z / norm).collect());
            }
        }
        Self {
            dim,
            entries: rows.into_iter().flatten().collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.entries[row * self.dim + col]
    }

    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        (0..self.dim)
            .map(|i| {
                self.entries[i * self.dim..(i + 1) * self.dim]
                    .iter()
                    .zip(v)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect()
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let d = self.dim;
        let mut entries = vec![Complex64::new(0.0, 0.0); d * d];
        for i in 0..d {
            for j in 0..d {
                entries[j * d + i] = self.entries[i * d + j].conj();
            }
        }
        Self { dim: d, entries }
    }
}

/// Parameters of the greedy net construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetParams {
    /// Number of low-discrepancy probe points scanned by the greedy pass.
    pub probe_count: usize,
    pub seed: u64,
    /// Upper bound on the number of centers before the build is abandoned.
    pub max_centers: usize,
}

impl Default for NetParams {
    fn default() -> Self {
        Self {
            probe_count: 100_000,
            seed: 0,
            max_centers: 50_000,
        }
    }
}

/// A maximal `radius`-separated subset of a probe set; it is also a
/// `radius`-covering of that probe set.
#[derive(Debug, Clone, PartialEq)]
pub struct GeodesicNet {
    pub radius: f64,
    pub centers: Vec<ProjectivePoint>,
}

impl GeodesicNet {
    pub fn cardinality(&self) -> usize {
        self.centers.len()
    }

    /// One center per row, interleaved real/imaginary columns.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let m = self.centers.first().map(|p| p.m()).unwrap_or(0);
        out.push_str("# geodesic net: one center per row\n");
        let cols: Vec<String> = (0..=m)
            .flat_map(|i| [format!("x{i}_re"), format!("x{i}_im")])
            .collect();
        out.push_str(&cols.join(","));
        out.push('\n');
        for p in &self.centers {
            let row: Vec<String> = p
                .lift()
                .iter()
                .flat_map(|z| [format!("{:.17e}", z.re), format!("{:.17e}", z.im)])
                .collect();
            let _ = writeln!(out, "{}", row.join(","));
        }
        out
    }
}

/// Builds a greedy geodesic net of the given radius over a deterministic
/// low-discrepancy probe set of CP^m.
pub fn build_greedy_net(m: usize, radius: f64, params: &NetParams) -> Result<GeodesicNet> {
    if m == 0 {
        return domain("m must be at least 1");
    }
    if !(radius > 0.0) || !radius.is_finite() {
        return domain(format!("net radius must be positive, got {radius}"));
    }
    if params.probe_count == 0 {
        return domain("probe_count must be positive");
    }
    let probes = lowdisc::probe_set(m, params.probe_count, params.seed);
    let cos_r = radius.min(std::f64::consts::FRAC_PI_2).cos();
    let mut centers: Vec<ProjectivePoint> = Vec::new();
    for probe in probes {
        let covered = centers.iter().any(|c| {
            let inner = pairing(probe.lift(), c.lift()).norm();
            // Clearly-far pairs skip the exact distance evaluation.
            if inner < cos_r - 1e-9 {
                return false;
            }
            fs_distance(&probe, c).map(|r| r <= radius).unwrap_or(false)
        });
        if !covered {
            if centers.len() == params.max_centers {
                return Err(Error::Resource(format!(
                    "net of radius {radius} needs more than {} centers",
                    params.max_centers
                )));
            }
            centers.push(probe);
        }
    }
    Ok(GeodesicNet { radius, centers })
}
