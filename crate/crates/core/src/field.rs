//! Evaluation of random sections in affine charts.
//!
//! A section `s = Σ_α a_α ŝ_α` with Kostlan weights
//! `ŝ_α(x) = √(d_n · n!/α!) x^α` is evaluated at a unit lift `x` in the chart
//! of a coordinate `x_i`: `s(x) = x_i^n · H(t)` with `t_j = x_j / x_i` and
//! `H` the dehomogenized polynomial. All weights are divided by the largest
//! one so that no intermediate overflows; the common factor is restored in
//! log space.
//!
//! Chart coefficients are laid out for nested Horner evaluation: for the
//! affine variables `t_0, …, t_{m-1}` of total degree at most `deg`, the
//! block of `t_0^e` (a polynomial in the remaining variables of degree at most
//! `deg − e`) is stored for `e = 0, 1, …, deg` in order.

use std::sync::Arc;

use num_complex::Complex64;

use crate::ensemble::MultiIndexTable;

/// `C(deg + vars, vars)`: number of monomials of degree at most `deg` in
/// `vars` variables.
fn block_len(vars: usize, deg: usize) -> usize {
    let mut acc: u128 = 1;
    for k in 1..=vars as u128 {
        acc = acc * (deg as u128 + k) / k;
    }
    acc as usize
}

fn layout_position(beta: &[u32], deg: usize) -> usize {
    if beta.len() == 1 {
        return beta[0] as usize;
    }
    let rest = beta.len() - 1;
    let e = beta[0] as usize;
    let offset: usize = (0..e).map(|k| block_len(rest, deg - k)).sum();
    offset + layout_position(&beta[1..], deg - e)
}

/// Where each multi-index lands in every chart's Horner layout, and the
/// relative Kostlan weights. Depends only on `(m, n)`.
#[derive(Debug)]
pub struct ChartLayout {
    m: usize,
    n: usize,
    /// `positions[i][k]`: slot of multi-index `k` in chart `i`.
    positions: Vec<Vec<usize>>,
    /// `w_α / w_max` in multi-index order.
    rel_weights: Vec<f64>,
    /// `w_α` in multi-index order.
    weights: Vec<f64>,
    /// `ln w_max`.
    log_wmax: f64,
}

impl ChartLayout {
    pub fn new(table: &MultiIndexTable) -> Self {
        let (m, n) = (table.m(), table.n());
        let log_w = table.log_weights();
        let log_wmax = log_w.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let rel_weights = log_w.iter().map(|lw| (lw - log_wmax).exp()).collect();
        let weights = log_w.iter().map(|lw| lw.exp()).collect();
        let positions = (0..=m)
            .map(|chart| {
                table
                    .indices()
                    .map(|alpha| {
                        let beta: Vec<u32> = alpha
                            .iter()
                            .enumerate()
                            .filter(|(j, _)| *j != chart)
                            .map(|(_, &e)| e)
                            .collect();
                        layout_position(&beta, n)
                    })
                    .collect()
            })
            .collect();
        Self {
            m,
            n,
            positions,
            rel_weights,
            weights,
            log_wmax,
        }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Kostlan weights `√(d_n · n!/α!)` in multi-index order.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `ln(w_max / w_min)`, the dynamic range of the relative weights.
    pub fn log_weight_range(&self) -> f64 {
        let min = self
            .rel_weights
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min);
        -min.ln()
    }
}

/// A section prepared for repeated evaluation: one coefficient array per
/// chart in nested Horner layout.
#[derive(Debug, Clone)]
pub struct PreparedField {
    layout: Arc<ChartLayout>,
    re: Vec<Vec<f64>>,
    im: Vec<Vec<f64>>,
}

impl PreparedField {
    pub fn new(layout: Arc<ChartLayout>, coeffs: &[Complex64]) -> Self {
        let len = coeffs.len();
        let mut re = vec![vec![0.0; len]; layout.m + 1];
        let mut im = vec![vec![0.0; len]; layout.m + 1];
        for chart in 0..=layout.m {
            for (k, a) in coeffs.iter().enumerate() {
                let pos = layout.positions[chart][k];
                let c = a * layout.rel_weights[k];
                re[chart][pos] = c.re;
                im[chart][pos] = c.im;
            }
        }
        Self { layout, re, im }
    }

    pub fn m(&self) -> usize {
        self.layout.m
    }

    pub fn n(&self) -> usize {
        self.layout.n
    }

    /// Chart coefficients in Horner layout, scaled by `w_α / w_max`.
    pub(crate) fn chart_coeffs(&self, chart: usize) -> (&[f64], &[f64]) {
        (&self.re[chart], &self.im[chart])
    }

    /// `ln w_max`, the scale removed from [`Self::chart_coeffs`].
    pub(crate) fn log_wmax(&self) -> f64 {
        self.layout.log_wmax
    }

    /// `ln |s|` at the point with affine coordinates `t` in `chart`.
    ///
    /// Fast path: plain nested Horner.
    pub fn log_magnitude_chart(&self, chart: usize, t: &[Complex64]) -> f64 {
        let h = horner_point(&self.re[chart], &self.im[chart], self.layout.n, t);
        let t_sq: f64 = t.iter().map(|z| z.norm_sqr()).sum();
        self.layout.log_wmax - 0.5 * self.layout.n as f64 * t_sq.ln_1p() + h.norm().ln()
    }

    /// Value of the section at an arbitrary unit lift, evaluated with
    /// compensated (double-double) Horner arithmetic.
    pub fn value_at_lift(&self, x: &[Complex64]) -> Complex64 {
        let chart = leading(x);
        let pivot = x[chart];
        let t: Vec<Complex64> = x
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != chart)
            .map(|(_, z)| z / pivot)
            .collect();
        let h = horner_point_compensated(&self.re[chart], &self.im[chart], self.layout.n, &t);
        let n = self.layout.n as f64;
        let scale = (self.layout.log_wmax + n * pivot.norm().ln()).exp();
        let phase = Complex64::from_polar(1.0, n * pivot.arg());
        h * phase * scale
    }

    /// `ln |s|` at a batch of points sharing one chart; `t[k]` holds the
    /// values of affine variable `k` for every point.
    pub fn log_magnitude_batch(
        &self,
        chart: usize,
        t_re: &[Vec<f64>],
        t_im: &[Vec<f64>],
        log_pivot: &[f64],
        out: &mut [f64],
        scratch: &mut BatchScratch,
    ) {
        let len = out.len();
        scratch.ensure(self.layout.m, len);
        let (out_re, out_im, levels) = scratch.split();
        horner_batch(
            &self.re[chart],
            &self.im[chart],
            self.layout.n,
            t_re,
            t_im,
            &mut out_re[..len],
            &mut out_im[..len],
            levels,
            len,
        );
        let n = self.layout.n as f64;
        for p in 0..len {
            let mag_sq = out_re[p] * out_re[p] + out_im[p] * out_im[p];
            out[p] = self.layout.log_wmax + n * log_pivot[p] + 0.5 * mag_sq.ln();
        }
    }
}

fn leading(x: &[Complex64]) -> usize {
    let mut best = 0;
    for (j, z) in x.iter().enumerate() {
        if z.norm() > x[best].norm() {
            best = j;
        }
    }
    best
}

fn horner_point(re: &[f64], im: &[f64], deg: usize, t: &[Complex64]) -> Complex64 {
    if t.is_empty() {
        return Complex64::new(re[0], im[0]);
    }
    let mut acc = Complex64::new(0.0, 0.0);
    if t.len() == 1 {
        for k in (0..=deg).rev() {
            acc = acc * t[0] + Complex64::new(re[k], im[k]);
        }
        return acc;
    }
    let rest = t.len() - 1;
    let mut end = block_len(t.len(), deg);
    for e in (0..=deg).rev() {
        let size = block_len(rest, deg - e);
        let inner = horner_point(&re[end - size..end], &im[end - size..end], deg - e, &t[1..]);
        end -= size;
        acc = acc * t[0] + inner;
    }
    acc
}

/// Error-free product `a·b = p + e`.
#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

/// Error-free sum `a + b = s + e`.
#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

/// Complex double-double accumulator.
#[derive(Clone, Copy, Default)]
struct DdComplex {
    re: (f64, f64),
    im: (f64, f64),
}

impl DdComplex {
    /// `self · t + c` with `c` itself double-double.
    fn mul_add(self, t: Complex64, c: DdComplex) -> DdComplex {
        let ((hr, lr), (hi, li)) = (self.re, self.im);
        let (p1, e1) = two_prod(hr, t.re);
        let (p2, e2) = two_prod(-hi, t.im);
        let (s1, f1) = two_sum(p1, p2);
        let (s2, f2) = two_sum(s1, c.re.0);
        let lo_re = e1 + e2 + f1 + f2 + c.re.1 + lr * t.re - li * t.im;
        let (p3, e3) = two_prod(hr, t.im);
        let (p4, e4) = two_prod(hi, t.re);
        let (s3, f3) = two_sum(p3, p4);
        let (s4, f4) = two_sum(s3, c.im.0);
        let lo_im = e3 + e4 + f3 + f4 + c.im.1 + lr * t.im + li * t.re;
        DdComplex {
            re: two_sum(s2, lo_re),
            im: two_sum(s4, lo_im),
        }
    }

    fn value(self) -> Complex64 {
        Complex64::new(self.re.0 + self.re.1, self.im.0 + self.im.1)
    }
}

fn horner_dd(re: &[f64], im: &[f64], deg: usize, t: &[Complex64]) -> DdComplex {
    if t.is_empty() {
        return DdComplex {
            re: (re[0], 0.0),
            im: (im[0], 0.0),
        };
    }
    let mut acc = DdComplex::default();
    if t.len() == 1 {
        for k in (0..=deg).rev() {
            let c = DdComplex {
                re: (re[k], 0.0),
                im: (im[k], 0.0),
            };
            acc = acc.mul_add(t[0], c);
        }
        return acc;
    }
    let rest = t.len() - 1;
    let mut end = block_len(t.len(), deg);
    for e in (0..=deg).rev() {
        let size = block_len(rest, deg - e);
        let inner = horner_dd(&re[end - size..end], &im[end - size..end], deg - e, &t[1..]);
        end -= size;
        acc = acc.mul_add(t[0], inner);
    }
    acc
}

fn horner_point_compensated(re: &[f64], im: &[f64], deg: usize, t: &[Complex64]) -> Complex64 {
    horner_dd(re, im, deg, t).value()
}

/// Reusable buffers for [`PreparedField::log_magnitude_batch`].
#[derive(Debug, Default)]
pub struct BatchScratch {
    out_re: Vec<f64>,
    out_im: Vec<f64>,
    levels: Vec<(Vec<f64>, Vec<f64>)>,
}

impl BatchScratch {
    fn ensure(&mut self, m: usize, len: usize) {
        if self.out_re.len() < len {
            self.out_re.resize(len, 0.0);
            self.out_im.resize(len, 0.0);
        }
        if self.levels.len() < m {
            self.levels.resize_with(m, Default::default);
        }
        for (r, i) in &mut self.levels {
            if r.len() < len {
                r.resize(len, 0.0);
                i.resize(len, 0.0);
            }
        }
    }

    fn split(&mut self) -> (&mut [f64], &mut [f64], &mut [(Vec<f64>, Vec<f64>)]) {
        (&mut self.out_re, &mut self.out_im, &mut self.levels)
    }
}

#[allow(clippy::too_many_arguments)]
fn horner_batch(
    re: &[f64],
    im: &[f64],
    deg: usize,
    t_re: &[Vec<f64>],
    t_im: &[Vec<f64>],
    out_re: &mut [f64],
    out_im: &mut [f64],
    scratch: &mut [(Vec<f64>, Vec<f64>)],
    len: usize,
) {
    if t_re.is_empty() {
        out_re.fill(re[0]);
        out_im.fill(im[0]);
        return;
    }
    out_re.fill(0.0);
    out_im.fill(0.0);
    let (tr, ti) = (&t_re[0][..len], &t_im[0][..len]);
    if t_re.len() == 1 {
        for k in (0..=deg).rev() {
            let (cr, ci) = (re[k], im[k]);
            for p in 0..len {
                let (ar, ai) = (out_re[p], out_im[p]);
                out_re[p] = ar * tr[p] - ai * ti[p] + cr;
                out_im[p] = ar * ti[p] + ai * tr[p] + ci;
            }
        }
        return;
    }
    let rest = t_re.len() - 1;
    let ((child_re, child_im), deeper) = scratch.split_first_mut().expect("scratch depth");
    let mut end = block_len(t_re.len(), deg);
    for e in (0..=deg).rev() {
        let size = block_len(rest, deg - e);
        horner_batch(
            &re[end - size..end],
            &im[end - size..end],
            deg - e,
            &t_re[1..],
            &t_im[1..],
            &mut child_re[..len],
            &mut child_im[..len],
            deeper,
            len,
        );
        end -= size;
        for p in 0..len {
            let (ar, ai) = (out_re[p], out_im[p]);
            out_re[p] = ar * tr[p] - ai * ti[p] + child_re[p];
            out_im[p] = ar * ti[p] + ai * tr[p] + child_im[p];
        }
    }
}
