//! Linear substitutions `P ↦ P ∘ M` on coefficient vectors in the Kostlan
//! basis, for unitary `M`.
//!
//! In this basis the substitution is a unitary matrix (the symmetric power
//! of `M`). It is applied as a product of a diagonal phase and 2×2 complex
//! Givens rotations. A rotation acting on coordinates `(p, q)` mixes only
//! multi-indices that agree outside `p, q`; on each such block of size
//! `k + 1` it acts by the degree-`k` symmetric power of the 2×2 block,
//! built by a recursion in `k` whose coefficients are all bounded by one.

use std::collections::HashMap;

use num_complex::Complex64;

use crate::ensemble::MultiIndexTable;

type C = Complex64;

/// Degree-`k` symmetric powers of the substitution
/// `x ↦ αx + βy, y ↦ γx + δy` in the basis `√C(k,j) x^j y^{k−j}`,
/// produced for `k = 0, 1, 2, …`.
struct SymPowers {
    block: [C; 4],
    k: usize,
    /// Row-major `(k+1)×(k+1)`; column `j` is the image of basis vector `j`.
    d: Vec<C>,
}

impl SymPowers {
    fn new(block: [C; 4]) -> Self {
        Self {
            block,
            k: 0,
            d: vec![C::new(1.0, 0.0)],
        }
    }

    fn advance(&mut self) {
        let [a, b, c, d_] = self.block;
        let k = self.k + 1;
        let kf = k as f64;
        let old = &self.d;
        let ow = k; // old width
        let mut next = vec![C::new(0.0, 0.0); (k + 1) * (k + 1)];
        // Multiplying e_l^{(k-1)} by x gives √((l+1)/k) e_{l+1}, by y gives
        // √((k−l)/k) e_l.
        let up: Vec<f64> = (0..k).map(|l| ((l + 1) as f64 / kf).sqrt()).collect();
        let stay: Vec<f64> = (0..k).map(|l| ((k - l) as f64 / kf).sqrt()).collect();
        for j in 0..=k {
            let wx = (j as f64 / kf).sqrt();
            let wy = ((k - j) as f64 / kf).sqrt();
            for l in 0..k {
                let mut lo = C::new(0.0, 0.0);
                let mut hi = C::new(0.0, 0.0);
                if j > 0 {
                    let v = old[l * ow + j - 1] * wx;
                    hi += v * a * up[l];
                    lo += v * b * stay[l];
                }
                if j < k {
                    let v = old[l * ow + j] * wy;
                    hi += v * c * up[l];
                    lo += v * d_ * stay[l];
                }
                next[(l + 1) * (k + 1) + j] += hi;
                next[l * (k + 1) + j] += lo;
            }
        }
        self.k = k;
        self.d = next;
    }
}

/// Factors a unitary `M` as `D · G_1 ⋯ G_r` with `D` diagonal and each `G`
/// a rotation on a coordinate pair, returned as `(p, q, [α, β, γ, δ])`.
fn givens_factor(m: &[Vec<C>]) -> (Vec<C>, Vec<(usize, usize, [C; 4])>) {
    let dim = m.len();
    let mut w = m.to_vec();
    let mut hs = Vec::new();
    for p in 0..dim {
        for q in p + 1..dim {
            let a = w[p][p];
            let b = w[p][q];
            if b.norm() == 0.0 {
                continue;
            }
            let r = a.norm().hypot(b.norm());
            // Right-multiplying by H = [[ā, −b], [b̄, a]]/r zeroes w[p][q].
            let h = [a.conj() / r, -b / r, b.conj() / r, a / r];
            for row in w.iter_mut() {
                let (x, y) = (row[p], row[q]);
                row[p] = x * h[0] + y * h[2];
                row[q] = x * h[1] + y * h[3];
            }
            // H^* = [[a, b], [−b̄, ā]]/r.
            hs.push((p, q, [a / r, b / r, -b.conj() / r, a.conj() / r]));
        }
    }
    let diag = (0..dim).map(|i| w[i][i]).collect();
    hs.reverse();
    (diag, hs)
}

/// Coefficients of `P ∘ M` given those of `P`; `matrix` is row-major with
/// `(Mx)_i = Σ_j matrix[i][j] x_j`.
pub(crate) fn substitute(table: &MultiIndexTable, coeffs: &[C], matrix: &[Vec<C>]) -> Vec<C> {
    let (diag, rotations) = givens_factor(matrix);
    let mut out: Vec<C> = table
        .indices()
        .zip(coeffs)
        .map(|(alpha, &c)| {
            alpha
                .iter()
                .zip(&diag)
                .fold(c, |acc, (&e, &lam)| acc * lam.powu(e))
        })
        .collect();
    if rotations.is_empty() {
        return out;
    }
    let index: HashMap<&[u32], usize> = table.indices().enumerate().map(|(k, a)| (a, k)).collect();
    let n = table.n();
    for (p, q, block) in rotations {
        // Blocks keyed by their α_p = 0 member, grouped by size.
        let mut by_k: Vec<Vec<Vec<usize>>> = vec![Vec::new(); n + 1];
        for alpha in table.indices().filter(|a| a[p] == 0) {
            let k = alpha[q] as usize;
            let mut member = alpha.to_vec();
            let slots: Vec<usize> = (0..=k)
                .map(|j| {
                    member[p] = j as u32;
                    member[q] = (k - j) as u32;
                    index[member.as_slice()]
                })
                .collect();
            by_k[k].push(slots);
        }
        let mut pow = SymPowers::new(block);
        let mut buf = Vec::new();
        for (k, groups) in by_k.iter().enumerate() {
            while pow.k < k {
                pow.advance();
            }
            for slots in groups {
                buf.clear();
                buf.extend(slots.iter().map(|&s| out[s]));
                for (l, &s) in slots.iter().enumerate() {
                    out[s] = (0..=k).map(|j| pow.d[l * (k + 1) + j] * buf[j]).sum();
                }
            }
        }
    }
    out
}
