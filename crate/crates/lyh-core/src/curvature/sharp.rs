//! The quadratic `Rm^#` on `so(n, C)` and the second-variation chain at a
//! null direction.
//!
//! Operators act on coordinate vectors in the orthonormal basis `E_ab`
//! (`a < b`) of `so(n, C)` for the bilinear pairing `⟨A, B⟩ = −½ tr(AB)`;
//! `⟨Rm(v), w̄⟩ = w̄ᵀ Rm v`.

use super::riem::pair_list;
use crate::error::{LyhError, Result};
use crate::scalar::C64;
use crate::tensor::linalg::{hermitian_eigen, CMat};
use crate::tensor::skew::{ad, ad_matrix, so_dim};
use crate::tensor::{CxMatrix, SkewC};

const ZERO: C64 = C64::new(0.0, 0.0);

fn check_dim(op: &CMat, n: usize) -> Result<()> {
    if n > 12 {
        return Err(LyhError::Dimension(format!(
            "Rm^# limited to n <= 12, got {n}"
        )));
    }
    let d = so_dim(n);
    if op.rows() != d || op.cols() != d {
        return Err(LyhError::Dimension(format!(
            "operator on so({n}) must be {d}x{d}"
        )));
    }
    Ok(())
}

/// Nonzero structure constants `[E_α, E_β] = c · E_γ` as `(α, β, γ, c)`.
fn structure_constants(n: usize) -> Vec<(usize, usize, usize, f64)> {
    let pairs = pair_list(n);
    let d = pairs.len();
    let index = |a: usize, b: usize| {
        pairs
            .iter()
            .position(|&q| q == (a.min(b), a.max(b)))
            .map(|x| (x, a < b))
    };
    let mut out = Vec::new();
    for al in 0..d {
        for be in 0..d {
            let (a, b) = pairs[al];
            let (c, e) = pairs[be];
            // [E_ab, E_ce] = δ_bc E_ae − δ_ac E_be − δ_be E_ac + δ_ae E_bc
            let mut push = |s: f64, x: usize, y: usize| {
                if x != y {
                    let (g, ordered) = index(x, y).expect("valid pair");
                    out.push((al, be, g, if ordered { s } else { -s }));
                }
            };
            if b == c {
                push(1.0, a, e);
            }
            if a == c {
                push(-1.0, b, e);
            }
            if b == e {
                push(-1.0, a, c);
            }
            if a == e {
                push(1.0, b, c);
            }
        }
    }
    out
}

/// `Rm^#` with `⟨Rm^#(v), w⟩ = ½ Σ_{α,β} ⟨[Rm b^α, Rm b^β], v⟩ ⟨[b^α, b^β], w⟩`
/// over the basis `E_ab`: `S_{γδ} = ½ Σ Rm_{μα} Rm_{νβ} c^{μν}_δ c^{αβ}_γ`.
pub fn rm_sharp(op: &CMat, n: usize) -> Result<CMat> {
    check_dim(op, n)?;
    let d = so_dim(n);
    let sc = structure_constants(n);
    let mut by_target: Vec<Vec<(usize, usize, f64)>> = vec![Vec::new(); d];
    for &(a, b, g, c) in &sc {
        by_target[g].push((a, b, c));
    }
    let mut out = CxMatrix::zeros(d, d);
    for gamma in 0..d {
        for delta in 0..d {
            let mut acc = ZERO;
            for &(mu, nu, c1) in &by_target[delta] {
                for &(al, be, c2) in &by_target[gamma] {
                    acc += op[(mu, al)] * op[(nu, be)] * (c1 * c2);
                }
            }
            out[(gamma, delta)] = acc * 0.5;
        }
    }
    Ok(out)
}

/// `Rm^#` computed from an arbitrary orthonormal basis `{b^α}` of `so(n)`
/// (for the bilinear pairing), with `op` expressed in that basis.
pub fn rm_sharp_in_basis(op: &CMat, basis: &[SkewC<f64>]) -> Result<CMat> {
    let d = basis.len();
    if op.rows() != d || op.cols() != d {
        return Err(LyhError::Dimension(
            "operator and basis sizes differ".into(),
        ));
    }
    let n = basis.first().map_or(0, |b| b.n());
    if so_dim(n) != d {
        return Err(LyhError::Dimension("basis does not span so(n)".into()));
    }
    let mut c = vec![ZERO; d * d * d];
    for a in 0..d {
        for b in 0..d {
            let br = ad(&basis[a], &basis[b])?;
            for g in 0..d {
                c[(a * d + b) * d + g] = br.pair(&basis[g]);
            }
        }
    }
    let mut out = CxMatrix::zeros(d, d);
    for gamma in 0..d {
        for delta in 0..d {
            let mut acc = ZERO;
            for mu in 0..d {
                for nu in 0..d {
                    let c1 = c[(mu * d + nu) * d + delta];
                    if c1 == ZERO {
                        continue;
                    }
                    for al in 0..d {
                        for be in 0..d {
                            let c2 = c[(al * d + be) * d + gamma];
                            if c2 != ZERO {
                                acc += op[(mu, al)] * op[(nu, be)] * c1 * c2;
                            }
                        }
                    }
                }
            }
            out[(gamma, delta)] = acc * 0.5;
        }
    }
    Ok(out)
}

/// `⟨Rm(v), v̄⟩` for coordinate vector `v`.
pub fn hermitian_value(op: &CMat, v: &[C64]) -> C64 {
    let ov = op.mul_vec(v);
    v.iter().zip(&ov).map(|(a, b)| a.conj() * b).sum()
}

/// `½ tr(−ad_{v̄} · Rm · ad_v · Rm)`.
pub fn sharp_trace_route(op: &CMat, v: &SkewC<f64>) -> Result<C64> {
    check_dim(op, v.n())?;
    let a = ad_matrix(v);
    let abar = ad_matrix(&v.conj());
    let prod = &(&(&abar * op) * &a) * op;
    Ok(prod.trace() * -0.5)
}

/// `−ad_{v̄₀} · Rm · ad_{v₀}` as a Hermitian matrix.
pub fn second_variation_matrix(op: &CMat, v0: &SkewC<f64>) -> Result<CMat> {
    check_dim(op, v0.n())?;
    let a = ad_matrix(v0);
    let abar = ad_matrix(&v0.conj());
    Ok((&(&abar * op) * &a).scale(C64::new(-1.0, 0.0)))
}

fn require_null(op: &CMat, v0: &SkewC<f64>) -> Result<()> {
    let v = v0.coords();
    let val = hermitian_value(op, &v).norm();
    let scale =
        crate::tensor::linalg::hermitian_norm(op) * v.iter().map(|z| z.norm_sqr()).sum::<f64>();
    if val > 1e-9 * scale {
        return Err(LyhError::Precondition(format!(
            "⟨Rm(v₀), v̄₀⟩ = {val:.3e} is not null (scale {scale:.3e})"
        )));
    }
    Ok(())
}

/// Whether `−ad_{v̄₀}·Rm·ad_{v₀}` is positive semidefinite (eigenvalues ≥ `−1e-10·scale`).
pub fn second_variation_positivity(op: &CMat, v0: &SkewC<f64>) -> Result<bool> {
    require_null(op, v0)?;
    let m = second_variation_matrix(op, v0)?;
    let (vals, _) = hermitian_eigen(&m);
    let scale = vals.iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
    Ok(vals
        .first()
        .map_or(true, |&l| l >= -1e-10 * scale.max(1e-300)))
}

/// `Re ⟨Rm^#(v₀), v̄₀⟩` at a null direction `v₀`.
pub fn sharp_nonneg_at_null(op: &CMat, v0: &SkewC<f64>) -> Result<f64> {
    require_null(op, v0)?;
    let s = rm_sharp(op, v0.n())?;
    Ok(hermitian_value(&s, &v0.coords()).re)
}
