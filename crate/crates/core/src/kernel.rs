//! The Szegő kernel of O(n) → CP^m and its asymptotic reference models.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::ensemble::dimension;
use crate::error::{domain, Result};
use crate::projective::{fs_cos_sin, normalize_lift, pairing, ProjectivePoint};

/// Volume convention used for the kernel prefactor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelNormalization {
    /// `∫ dV = 1`: diagonal value `d_n`.
    UnitVolume,
    /// Fubini–Study volume `π^m/m!`: diagonal value `(n+m)!/(π^m n!)`.
    FubiniStudy,
}

/// `(n+1)(n+2)⋯(n+m) = (n+m)!/n!` as a float.
fn rising(n: usize, m: usize) -> f64 {
    (1..=m).map(|k| (n + k) as f64).product()
}

/// Diagonal value of the kernel in the given normalization.
pub fn diagonal_value(m: usize, n: usize, norm: KernelNormalization) -> Result<f64> {
    Ok(match norm {
        KernelNormalization::UnitVolume => dimension(m, n)? as f64,
        KernelNormalization::FubiniStudy => {
            dimension(m, n)?;
            rising(n, m) / PI.powi(m as i32)
        }
    })
}

/// `Π_n(x, y) = prefactor · ⟨x, ȳ⟩^n` on canonical lifts.
pub fn kernel_exact(
    m: usize,
    n: usize,
    p: &ProjectivePoint,
    q: &ProjectivePoint,
    norm: KernelNormalization,
) -> Result<Complex64> {
    if p.m() != m || q.m() != m {
        return domain(format!(
            "kernel on CP^{m} evaluated at points of CP^{} and CP^{}",
            p.m(),
            q.m()
        ));
    }
    Ok(kernel_on_lifts(
        n,
        p.lift(),
        q.lift(),
        diagonal_value(m, n, norm)?,
    ))
}

fn kernel_on_lifts(n: usize, x: &[Complex64], y: &[Complex64], prefactor: f64) -> Complex64 {
    pairing(x, y).powu(n as u32) * prefactor
}

/// Leading diagonal coefficient `π^{-m} n^m`.
pub fn diagonal_leading_term(m: usize, n: usize) -> Result<f64> {
    if n == 0 {
        return domain("diagonal_leading_term needs n >= 1");
    }
    Ok((n as f64).powi(m as i32) / PI.powi(m as i32))
}

/// `Π_n(z,z) / (π^{-m} n^m) = (n+m)!/(n^m n!)`, tending to one.
pub fn diagonal_ratio(m: usize, n: usize) -> Result<f64> {
    if n == 0 {
        return domain("diagonal_ratio needs n >= 1");
    }
    Ok((1..=m).map(|k| (n + k) as f64 / n as f64).product())
}

/// Arguments of the Heisenberg model kernel.
#[derive(Debug, Clone, PartialEq)]
pub struct HeisenbergArgs {
    pub u: Vec<Complex64>,
    pub v: Vec<Complex64>,
    pub theta: f64,
    pub psi: f64,
}

/// `π^{-m} exp(i(θ−ψ) + i Im(u·v̄) − |u−v|²/2)`.
pub fn heisenberg_model(args: &HeisenbergArgs, m: usize) -> Result<Complex64> {
    if args.u.len() != m || args.v.len() != m {
        return domain("Heisenberg arguments must have m complex coordinates");
    }
    let uv = pairing(&args.u, &args.v);
    let dist_sq: f64 = args
        .u
        .iter()
        .zip(&args.v)
        .map(|(a, b)| (a - b).norm_sqr())
        .sum();
    let exponent = Complex64::new(-0.5 * dist_sq, args.theta - args.psi + uv.im);
    Ok(exponent.exp() / PI.powi(m as i32))
}

/// Default window on `|u|, |v|` for [`scaling_residual`].
pub const SCALING_WINDOW: f64 = 3.0;

/// `|n^{-m} Π_n(z₀ + u/√n, z₀ + v/√n) − Π^H(u, 0; v, 0)|` at the base point
/// `e_0`.
///
/// The chart `z ↦ (1, z)/√(1+|z|²)` has Kähler potential `log(1+|z|²)`,
/// whose metric is Euclidean at the origin, so `z = u/√n` are scaled normal
/// coordinates to second order. The lifts are taken with zero fibre angle.
/// Kernel values use the Fubini–Study volume, matching the `π^{-m}` of the
/// model; the unit-volume kernel differs by the constant `π^m/m!`.
pub fn scaling_residual(m: usize, n: usize, u: &[Complex64], v: &[Complex64]) -> Result<f64> {
    scaling_residual_windowed(m, n, u, v, SCALING_WINDOW)
}

pub fn scaling_residual_windowed(
    m: usize,
    n: usize,
    u: &[Complex64],
    v: &[Complex64],
    window: f64,
) -> Result<f64> {
    if n == 0 {
        return domain("scaling_residual needs n >= 1");
    }
    if u.len() != m || v.len() != m {
        return domain("u and v must have m complex coordinates");
    }
    let norm = |w: &[Complex64]| w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if norm(u) > window || norm(v) > window {
        return domain(format!("|u|, |v| must not exceed the window {window}"));
    }
    let scale = (n as f64).sqrt().recip();
    let lift = |w: &[Complex64]| -> Vec<Complex64> {
        let mut x = Vec::with_capacity(m + 1);
        x.push(Complex64::new(1.0, 0.0));
        x.extend(w.iter().map(|z| z * scale));
        let r = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        x.into_iter().map(|z| z / r).collect()
    };
    let prefactor = diagonal_value(m, n, KernelNormalization::FubiniStudy)?;
    let exact = kernel_on_lifts(n, &lift(u), &lift(v), prefactor) / (n as f64).powi(m as i32);
    let model = heisenberg_model(
        &HeisenbergArgs {
            u: u.to_vec(),
            v: v.to_vec(),
            theta: 0.0,
            psi: 0.0,
        },
        m,
    )?;
    Ok((exact - model).norm())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecayRegime {
    /// Near-diagonal Gaussian decay, valid for `r ≤ C n^{-1/3}`.
    Gaussian,
    /// Global exponential decay `C n^m e^{-λ√n r}`.
    Agmon,
}

/// Free constants of the decay envelopes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DecayParams {
    pub eps: f64,
    pub lambda: f64,
    /// `C` in the Gaussian validity window `r ≤ C n^{-1/3}`.
    pub gaussian_window: f64,
    /// Overrides the Agmon constant `C`; by default `C = c_n e^{λ²/2}` with
    /// `c_n = (n+m)!/(π^m n! n^m)`.
    pub agmon_constant: Option<f64>,
    /// Additive slack relative to `n^m` standing in for the `O(n^{-∞})` term.
    pub additive_slack: f64,
}

impl Default for DecayParams {
    fn default() -> Self {
        Self {
            eps: 0.1,
            lambda: 0.5,
            gaussian_window: 1.0,
            agmon_constant: None,
            additive_slack: 1e-8,
        }
    }
}

/// Envelope for `|Π_n|` (Fubini–Study normalization) at distance `r`.
pub fn decay_envelope(
    m: usize,
    n: usize,
    r: f64,
    regime: DecayRegime,
    params: &DecayParams,
) -> Result<f64> {
    if !(r >= 0.0) {
        return domain(format!("distance must be non-negative, got {r}"));
    }
    if n == 0 {
        return domain("decay envelopes need n >= 1");
    }
    let nf = n as f64;
    let n_m = nf.powi(m as i32);
    // (π^{-m} + o(1)) n^m with the o(1) term taken from the exact diagonal.
    let diag = diagonal_value(m, n, KernelNormalization::FubiniStudy)?;
    match regime {
        DecayRegime::Gaussian => {
            let limit = params.gaussian_window * nf.powf(-1.0 / 3.0);
            if r > limit {
                return domain(format!(
                    "Gaussian envelope only holds for r <= {limit:.6} (got {r})"
                ));
            }
            Ok(diag * (-(1.0 - params.eps) / 2.0 * nf * r * r).exp() + params.additive_slack * n_m)
        }
        DecayRegime::Agmon => {
            let c = params
                .agmon_constant
                .unwrap_or(diag / n_m * (0.5 * params.lambda * params.lambda).exp());
            Ok(c * n_m * (-params.lambda * nf.sqrt() * r).exp())
        }
    }
}

/// One row of an envelope sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnvelopeRow {
    pub r: f64,
    pub kernel_abs: f64,
    pub envelope: f64,
}

/// Sweeps `r` over `points` evenly spaced values of the regime's range
/// (`[0, C n^{-1/3}]` or `[0, π/2]`) and compares `|Π_n|` with the envelope.
pub fn verify_decay(
    m: usize,
    n: usize,
    regime: DecayRegime,
    params: &DecayParams,
    points: usize,
) -> Result<(Vec<EnvelopeRow>, bool)> {
    if points < 2 {
        return domain("a sweep needs at least two points");
    }
    let r_max = match regime {
        DecayRegime::Gaussian => {
            (params.gaussian_window * (n as f64).powf(-1.0 / 3.0)).min(std::f64::consts::FRAC_PI_2)
        }
        DecayRegime::Agmon => std::f64::consts::FRAC_PI_2,
    };
    let base = ProjectivePoint::basis(m, 0)?;
    let mut rows = Vec::with_capacity(points);
    let mut ok = true;
    for k in 0..points {
        let r = r_max * k as f64 / (points - 1) as f64;
        let mut lift = vec![Complex64::new(0.0, 0.0); m + 1];
        lift[0] = Complex64::new(r.cos(), 0.0);
        lift[1] = Complex64::new(r.sin(), 0.0);
        let q = normalize_lift(&lift)?;
        let kernel_abs = kernel_exact(m, n, &base, &q, KernelNormalization::FubiniStudy)?.norm();
        let envelope = decay_envelope(m, n, r, regime, params)?;
        ok &= kernel_abs <= envelope;
        rows.push(EnvelopeRow {
            r,
            kernel_abs,
            envelope,
        });
    }
    Ok((rows, ok))
}

/// `|Π_n|` as a function of the FS distance only: `prefactor · cos^n r`.
pub fn kernel_abs_at_distance(
    m: usize,
    n: usize,
    p: &ProjectivePoint,
    q: &ProjectivePoint,
    norm: KernelNormalization,
) -> Result<f64> {
    let (c, _) = fs_cos_sin(p, q)?;
    Ok(diagonal_value(m, n, norm)? * c.powi(n as i32))
}
