//! Membership in the curvature cones `C_p` (Kähler), `C̃_k` (Riemannian) and
//! the positive semidefinite cone, with witnesses.
//!
//! Both restricted cones minimize a Hermitian Rayleigh quotient over
//! decomposable vectors: `α = Σ_k X_k ∧ Ȳ_k` (the `m×m` matrix `X Yᴴ`) or
//! `U = Σ_k Z_k ∧ W_k` (the skew matrix `Z Wᵀ − W Zᵀ`). For fixed `Y` (resp.
//! `W`) the vector is linear in the other block, so each half-step is a
//! generalized Hermitian eigenproblem solved exactly.

use crate::curvature::riem::pair_list;
use crate::curvature::{KahlerCurvature, OneOneVector, RiemCurvature};
use crate::error::{LyhError, Result};
use crate::rng;
use crate::scalar::C64;
use crate::tensor::linalg::{hermitian_eigen, hermitian_norm, min_eigen, min_generalized, CMat};
use crate::tensor::skew::so_dim;
use crate::tensor::{CxMatrix, SkewC};
use crate::verdict::{vec_from_json, vec_to_json, ConeVerdict, Status, Witness};
use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

const ZERO: C64 = C64::new(0.0, 0.0);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConeKind {
    #[serde(rename = "Kahler_Cp")]
    KahlerCp,
    #[serde(rename = "Riem_Ck")]
    RiemCk,
    #[serde(rename = "FullPSD")]
    FullPsd,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConeSpec {
    pub kind: ConeKind,
    pub rank: usize,
    pub dim: usize,
}

impl ConeSpec {
    pub fn kahler(m: usize, p: usize) -> Self {
        Self {
            kind: ConeKind::KahlerCp,
            rank: p,
            dim: m,
        }
    }

    pub fn riem(n: usize, k: usize) -> Self {
        Self {
            kind: ConeKind::RiemCk,
            rank: k,
            dim: n,
        }
    }

    pub fn psd(dim: usize) -> Self {
        Self {
            kind: ConeKind::FullPsd,
            rank: 1,
            dim,
        }
    }

    /// Whether membership reduces to the exact eigenvalue check: every `m×m`
    /// matrix is a sum of `m` rank-one terms, and every complex skew `n×n`
    /// matrix a sum of `⌊n/2⌋` wedges.
    pub fn collapses(&self) -> bool {
        match self.kind {
            ConeKind::FullPsd => true,
            ConeKind::KahlerCp => self.rank >= self.dim,
            ConeKind::RiemCk => self.rank >= self.dim / 2,
        }
    }

    pub fn with_rank(&self, rank: usize) -> Self {
        Self { rank, ..*self }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConeBudget {
    pub restarts: usize,
    pub max_steps: usize,
    /// `tol_in = tol_rel · ‖op‖` (spectral norm).
    pub tol_rel: f64,
    pub seed: u64,
}

impl Default for ConeBudget {
    fn default() -> Self {
        Self {
            restarts: 256,
            max_steps: 500,
            tol_rel: 1e-8,
            seed: 0xc0e5,
        }
    }
}

/// Operator whose cone membership is tested.
#[derive(Clone, Debug)]
pub enum CurvatureOp {
    Kahler(KahlerCurvature),
    Riem(RiemCurvature),
    /// Hermitian operator on `so(n, C)` in the `E_ab` basis.
    So {
        n: usize,
        op: CMat,
    },
}

impl CurvatureOp {
    /// Hermitian matrix `H` with `⟨Rm(v), v̄⟩ = vᴴ H v` on the natural coordinates.
    pub fn hermitian_matrix(&self) -> CMat {
        match self {
            CurvatureOp::Kahler(k) => k.operator_matrix(),
            CurvatureOp::Riem(r) => r.operator_matrix(),
            CurvatureOp::So { op, .. } => op.clone(),
        }
    }

    fn check_spec(&self, spec: &ConeSpec) -> Result<()> {
        let ok = match (self, spec.kind) {
            (CurvatureOp::Kahler(k), ConeKind::KahlerCp) => k.m() == spec.dim,
            (CurvatureOp::Riem(r), ConeKind::RiemCk) => r.n() == spec.dim,
            (CurvatureOp::So { n, op }, ConeKind::RiemCk) => {
                *n == spec.dim && op.rows() == so_dim(*n)
            }
            (_, ConeKind::FullPsd) => true,
            _ => false,
        };
        if !ok || spec.rank == 0 {
            return Err(LyhError::Parameter(format!(
                "cone {spec:?} does not apply to this operator"
            )));
        }
        Ok(())
    }
}

/// Kähler witness pairs `(X_k, Y_k)` for `α = Σ X_k ∧ Ȳ_k`, from a coefficient vector.
fn kahler_pairs_from_vec(m: usize, a: &[C64]) -> Vec<(Vec<C64>, Vec<C64>)> {
    let mat = DMatrix::from_fn(m, m, |i, l| a[i * m + l]);
    let svd = mat.svd(true, true);
    let (u, vt) = (svd.u.expect("u"), svd.v_t.expect("v_t"));
    let top = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    (0..m)
        .filter(|&k| svd.singular_values[k] > 1e-14 * top)
        .map(|k| {
            let s = svd.singular_values[k];
            let x = (0..m).map(|i| u[(i, k)] * s).collect();
            // α = Σ s u vᴴ, and vᴴ is row k of v_t, so Y = conj(row k of v_t).
            let y = (0..m).map(|l| vt[(k, l)].conj()).collect();
            (x, y)
        })
        .collect()
}

/// Decomposes a complex skew matrix into `Σ Z_k ∧ W_k` by skew elimination.
pub fn skew_to_pairs(s: &SkewC<f64>) -> Vec<(Vec<C64>, Vec<C64>)> {
    let n = s.n();
    let mut cur = s.matrix().clone();
    let scale = cur.max_abs();
    let mut out = Vec::new();
    while scale > 0.0 {
        let mut best = (0, 0, 0.0);
        for a in 0..n {
            for b in a + 1..n {
                if cur[(a, b)].norm() > best.2 {
                    best = (a, b, cur[(a, b)].norm());
                }
            }
        }
        if best.2 <= 1e-15 * scale {
            break;
        }
        let (a, b) = (best.0, best.1);
        let sab = cur[(a, b)];
        let u: Vec<C64> = (0..n).map(|i| cur[(i, a)]).collect();
        let v: Vec<C64> = (0..n).map(|i| cur[(i, b)]).collect();
        let z: Vec<C64> = u.iter().map(|x| x / sab).collect();
        let w = SkewC::wedge(&z, &v);
        cur = &cur - w.matrix();
        out.push((z, v));
    }
    out
}

pub(crate) fn witness_pairs(pairs: &[(Vec<C64>, Vec<C64>)]) -> Witness {
    Witness::Pairs {
        pairs: pairs
            .iter()
            .map(|(x, y)| (vec_to_json(x), vec_to_json(y)))
            .collect(),
    }
}

pub fn pairs_from_witness(w: &Witness) -> Option<Vec<(Vec<C64>, Vec<C64>)>> {
    match w {
        Witness::Pairs { pairs } => Some(
            pairs
                .iter()
                .map(|(x, y)| (vec_from_json(x), vec_from_json(y)))
                .collect(),
        ),
        _ => None,
    }
}

/// Natural coordinate vector of a decomposable witness.
fn coords_of_pairs(op: &CurvatureOp, pairs: &[(Vec<C64>, Vec<C64>)]) -> Vec<C64> {
    match op {
        CurvatureOp::Kahler(k) => OneOneVector::from_pairs(k.m(), pairs.to_vec())
            .expect("dimensions")
            .vec(),
        CurvatureOp::Riem(_) | CurvatureOp::So { .. } => {
            let n = pairs.first().map_or(0, |(z, _)| z.len());
            pairs
                .iter()
                .fold(SkewC::zero(n), |acc, (z, w)| acc.add(&SkewC::wedge(z, w)))
                .coords()
        }
    }
}

/// Re-evaluates a decomposable witness through the curvature pairing, normalized by `‖v‖²`.
pub fn witness_value(op: &CurvatureOp, pairs: &[(Vec<C64>, Vec<C64>)]) -> Result<f64> {
    let norm2 = coords_of_pairs(op, pairs)
        .iter()
        .map(|z| z.norm_sqr())
        .sum::<f64>();
    let raw = match op {
        CurvatureOp::Kahler(k) => {
            let a = OneOneVector::from_pairs(k.m(), pairs.to_vec())?;
            k.pairing(&a, &a)?
        }
        CurvatureOp::Riem(r) => {
            let u = pairs.iter().fold(SkewC::zero(r.n()), |acc, (z, w)| {
                acc.add(&SkewC::wedge(z, w))
            });
            r.pairing(&u, &u)?
        }
        CurvatureOp::So { op, .. } => {
            let v = coords_of_pairs(
                &CurvatureOp::So {
                    n: 0,
                    op: op.clone(),
                },
                pairs,
            );
            let ov = op.mul_vec(&v);
            v.iter().zip(&ov).map(|(a, b)| a.conj() * b).sum()
        }
    };
    Ok(raw.re / norm2)
}

/// Linear map `L` with `v = L x` for the free block `x`, the other block fixed.
/// Kähler: `a = vec(X Yᴴ)`; free `X` uses `Y`, free `conj(Y)` uses `X`.
/// Riemannian: `s = coords(Z Wᵀ − W Zᵀ)`; free `Z` uses `W`, free `W` uses `Z`.
pub(crate) fn block_map(kahler: bool, dim: usize, rank: usize, fixed: &CMat, free_first: bool) -> CMat {
    if kahler {
        let m = dim;
        CxMatrix::from_fn(m * m, m * rank, |row, col| {
            let (i, l) = (row / m, row % m);
            let (c, k) = (col / rank, col % rank);
            if free_first {
                // x = vec(X): a_{il} = Σ_k X_{ik} conj(Y_{lk})
                if c == i {
                    fixed[(l, k)].conj()
                } else {
                    ZERO
                }
            } else if c == l {
                // x = vec(conj Y): a_{il} = Σ_k X_{ik} conj(Y)_{lk}
                fixed[(i, k)]
            } else {
                ZERO
            }
        })
    } else {
        let n = dim;
        let pairs = pair_list(n);
        let sign = if free_first { 1.0 } else { -1.0 };
        CxMatrix::from_fn(pairs.len(), n * rank, |row, col| {
            let (a, b) = pairs[row];
            let (c, k) = (col / rank, col % rank);
            // s_ab = Σ_k Z_ak W_bk − W_ak Z_bk; antisymmetric in the roles of Z and W.
            let mut v = ZERO;
            if c == a {
                v += fixed[(b, k)];
            }
            if c == b {
                v -= fixed[(a, k)];
            }
            v * sign
        })
    }
}

struct SearchResult {
    value: f64,
    first: CMat,
    second: CMat,
    converged: bool,
}

fn alternating_search(
    h: &CMat,
    kahler: bool,
    dim: usize,
    rank: usize,
    mut first: CMat,
    mut second: CMat,
    budget: &ConeBudget,
    scale: f64,
) -> SearchResult {
    let from_vec = |v: &[C64]| CxMatrix::from_fn(dim, rank, |i, k| v[i * rank + k]);
    let mut value = f64::INFINITY;
    let mut converged = false;
    for _ in 0..budget.max_steps {
        let before = value;
        // Free first block (X or Z).
        let l = block_map(kahler, dim, rank, &second, true);
        let lh = l.adjoint();
        if let Some((lam, x)) = min_generalized(&(&(&lh * h) * &l), &(&lh * &l), 1e-12) {
            if lam <= value {
                first = from_vec(&x);
                value = lam;
            }
        }
        // Free second block (conj Y or W).
        let l = block_map(kahler, dim, rank, &first, false);
        let lh = l.adjoint();
        if let Some((lam, x)) = min_generalized(&(&(&lh * h) * &l), &(&lh * &l), 1e-12) {
            if lam <= value {
                let y = from_vec(&x);
                second = if kahler { y.conj() } else { y };
                value = lam;
            }
        }
        // Rebalance the blocks to keep the parametrization well conditioned.
        let (nf, ns) = (first.frobenius_norm(), second.frobenius_norm());
        if nf > 0.0 && ns > 0.0 {
            let r = (ns / nf).sqrt();
            first = first.scale_re(r);
            second = second.scale_re(1.0 / r);
        }
        if (before - value).abs() <= 1e-13 * scale.max(1e-300) {
            converged = true;
            break;
        }
    }
    SearchResult {
        value,
        first,
        second,
        converged,
    }
}

fn pairs_from_blocks(first: &CMat, second: &CMat) -> Vec<(Vec<C64>, Vec<C64>)> {
    let (dim, rank) = (first.rows(), first.cols());
    (0..rank)
        .map(|k| {
            let a = (0..dim).map(|i| first[(i, k)]).collect();
            let b = (0..dim).map(|i| second[(i, k)]).collect();
            (a, b)
        })
        .collect()
}

fn normalize_pairs(
    op: &CurvatureOp,
    pairs: Vec<(Vec<C64>, Vec<C64>)>,
) -> Vec<(Vec<C64>, Vec<C64>)> {
    let n2 = coords_of_pairs(op, &pairs)
        .iter()
        .map(|z| z.norm_sqr())
        .sum::<f64>();
    if n2 == 0.0 {
        return pairs;
    }
    let s = 1.0 / n2.sqrt();
    pairs
        .into_iter()
        .map(|(x, y)| (x.into_iter().map(|z| z * s).collect(), y))
        .collect()
}

/// Certified membership verdict.
pub fn membership(op: &CurvatureOp, spec: &ConeSpec, budget: &ConeBudget) -> Result<ConeVerdict> {
    membership_warm(op, spec, budget, None)
}

fn exact_verdict(op: &CurvatureOp, spec: &ConeSpec, h: &CMat, tol: f64) -> ConeVerdict {
    let (lam, v) = min_eigen(h);
    if lam >= -tol {
        return ConeVerdict {
            status: Status::In,
            min_value: lam,
            witness: None,
            restarts_used: 0,
            exact: true,
        };
    }
    let witness = match (op, spec.kind) {
        (CurvatureOp::Kahler(k), _) => witness_pairs(&kahler_pairs_from_vec(k.m(), &v)),
        (CurvatureOp::Riem(r), _) => witness_pairs(&skew_to_pairs(&SkewC::from_coords(r.n(), &v))),
        (CurvatureOp::So { n, .. }, _) => {
            witness_pairs(&skew_to_pairs(&SkewC::from_coords(*n, &v)))
        }
    };
    ConeVerdict {
        status: Status::Out,
        min_value: lam,
        witness: Some(witness),
        restarts_used: 0,
        exact: true,
    }
}

fn membership_warm(
    op: &CurvatureOp,
    spec: &ConeSpec,
    budget: &ConeBudget,
    warm: Option<&[(Vec<C64>, Vec<C64>)]>,
) -> Result<ConeVerdict> {
    op.check_spec(spec)?;
    let h = op.hermitian_matrix();
    let norm = hermitian_norm(&h);
    let tol = budget.tol_rel * norm;
    if norm == 0.0 {
        return Ok(ConeVerdict {
            status: Status::In,
            min_value: 0.0,
            witness: None,
            restarts_used: 0,
            exact: true,
        });
    }
    if spec.collapses() {
        return Ok(exact_verdict(op, spec, &h, tol));
    }
    // Positive semidefinite on the whole space implies membership in every cone.
    let (vals, _) = hermitian_eigen(&h);
    if vals[0] >= -tol {
        return Ok(ConeVerdict {
            status: Status::In,
            min_value: vals[0],
            witness: None,
            restarts_used: 0,
            exact: true,
        });
    }
    let kahler = matches!(op, CurvatureOp::Kahler(_));
    let (dim, rank) = (spec.dim, spec.rank);
    let warm_blocks = warm.map(|pairs| {
        let mut f = CxMatrix::zeros(dim, rank);
        let mut s = CxMatrix::zeros(dim, rank);
        let mut r = rng::stream(budget.seed ^ 0x77, u64::MAX);
        for k in 0..rank {
            for i in 0..dim {
                if k < pairs.len() {
                    f[(i, k)] = pairs[k].0[i];
                    s[(i, k)] = pairs[k].1[i];
                } else {
                    f[(i, k)] = rng::complex_normal(&mut r) * 1e-3;
                    s[(i, k)] = rng::complex_normal(&mut r) * 1e-3;
                }
            }
        }
        (f, s)
    });
    let mut runs: Vec<SearchResult> = (0..budget.restarts)
        .into_par_iter()
        .map(|k| {
            let mut r = rng::stream(budget.seed, k as u64);
            let f = rng::complex_matrix(&mut r, dim, rank);
            let s = rng::complex_matrix(&mut r, dim, rank);
            alternating_search(&h, kahler, dim, rank, f, s, budget, norm)
        })
        .collect();
    if let Some((f, s)) = warm_blocks {
        runs.push(alternating_search(
            &h, kahler, dim, rank, f, s, budget, norm,
        ));
    }
    let converged = runs.iter().any(|r| r.converged);
    let best = runs
        .into_iter()
        .min_by(|a, b| a.value.total_cmp(&b.value))
        .expect("restarts >= 1");
    let pairs = normalize_pairs(op, pairs_from_blocks(&best.first, &best.second));
    let value = witness_value(op, &pairs)?;
    let status = if value <= -tol {
        Status::Out
    } else if value >= tol && converged {
        Status::In
    } else {
        Status::Inconclusive
    };
    let witness = (status == Status::Out).then(|| witness_pairs(&pairs));
    Ok(ConeVerdict {
        status,
        min_value: value,
        witness,
        restarts_used: budget.restarts,
        exact: false,
    })
}

/// Verdicts at ranks `p` and `p+1`; returns whether "In at `p+1` ⇒ In at `p`"
/// held. The rank `p+1` search is warm-started from the rank `p` minimizer.
pub fn nesting_check(
    op: &CurvatureOp,
    spec_p: &ConeSpec,
    budget: &ConeBudget,
) -> Result<(bool, ConeVerdict, ConeVerdict)> {
    let vp = membership(op, spec_p, budget)?;
    let warm = vp.witness.as_ref().and_then(pairs_from_witness);
    let vq = membership_warm(
        op,
        &spec_p.with_rank(spec_p.rank + 1),
        budget,
        warm.as_deref(),
    )?;
    let holds = !(vq.status == Status::In && vp.status != Status::In);
    Ok((holds, vp, vq))
}

/// A Kähler curvature together with an `In` verdict for `C_p`.
#[derive(Clone, Debug)]
pub struct CertifiedKahler {
    rm: KahlerCurvature,
    p: usize,
    verdict: ConeVerdict,
}

impl CertifiedKahler {
    pub fn rm(&self) -> &KahlerCurvature {
        &self.rm
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn verdict(&self) -> &ConeVerdict {
        &self.verdict
    }

    /// Certificate transported along a map that preserves every cone
    /// (positive combinations of certified operators, unitary frame changes).
    pub fn from_preserving_map(
        rm: KahlerCurvature,
        p: usize,
        sources: &[&CertifiedKahler],
    ) -> Result<Self> {
        if sources.is_empty() || sources.iter().any(|s| s.p < p || s.rm.m() != rm.m()) {
            return Err(LyhError::Precondition(
                "sources must be certified at rank >= p".into(),
            ));
        }
        let min_value = sources
            .iter()
            .map(|s| s.verdict.min_value)
            .fold(f64::INFINITY, f64::min);
        let verdict = ConeVerdict {
            status: Status::In,
            min_value,
            witness: None,
            restarts_used: 0,
            exact: false,
        };
        Ok(Self { rm, p, verdict })
    }
}

pub fn certify_kahler(
    rm: &KahlerCurvature,
    p: usize,
    budget: &ConeBudget,
) -> Result<CertifiedKahler> {
    let v = membership(
        &CurvatureOp::Kahler(rm.clone()),
        &ConeSpec::kahler(rm.m(), p),
        budget,
    )?;
    if v.status != Status::In {
        return Err(LyhError::Precondition(format!(
            "operator not certified in C_{p}: {} (min {:.3e})",
            v.status, v.min_value
        )));
    }
    Ok(CertifiedKahler {
        rm: rm.clone(),
        p,
        verdict: v,
    })
}

/// `Re ⟨KB(φ), φ̄⟩` for a curvature certified in `C₂` (or a smaller cone).
pub fn kb_sign_check(cert: &CertifiedKahler, phi: &crate::PPForm) -> Result<f64> {
    if cert.p < 2 && cert.rm.m() >= 2 {
        return Err(LyhError::Precondition(
            "KB sign check needs a C_2 certificate".into(),
        ));
    }
    crate::curvature::kb_pairing(&cert.rm, phi)
}

/// `base − ε P` for a random symmetric `P` of unit operator norm, re-certified
/// in `spec`; errors when the certificate fails.
pub fn cone_perturbed(
    base: &KahlerCurvature,
    eps: f64,
    seed: u64,
    p: usize,
    budget: &ConeBudget,
) -> Result<CertifiedKahler> {
    let pert = crate::curvature::models::random_symmetric(base.m(), seed);
    let rm = base.axpy(-eps, &pert)?;
    certify_kahler(&rm, p, budget)
        .map_err(|e| LyhError::Precondition(format!("ε = {eps} too large: {e}")))
}

/// A `C_p` member that is not positive semidefinite: `base − ε P` with `ε`
/// just past the PSD threshold of the random direction `P` (found by
/// bisection on the exact smallest eigenvalue).
pub fn engineered_non_psd(base: &KahlerCurvature, seed: u64, overshoot: f64) -> KahlerCurvature {
    let pert = crate::curvature::models::random_symmetric(base.m(), seed);
    let lam = |e: f64| min_eigen(&base.axpy(-e, &pert).expect("same m").operator_matrix()).0;
    let (mut lo, mut hi) = (0.0, 1.0);
    while lam(hi) >= 0.0 {
        hi *= 2.0;
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if lam(mid) >= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    base.axpy(-hi * (1.0 + overshoot), &pert).expect("same m")
}

/// JSON verdict for the command line: `{status, min_value, witness, restarts_used, seed}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VerdictReport {
    pub status: Status,
    pub min_value: f64,
    pub witness: Option<Witness>,
    pub restarts_used: usize,
    pub seed: u64,
}

impl VerdictReport {
    pub fn new(v: &ConeVerdict, seed: u64) -> Self {
        Self {
            status: v.status,
            min_value: v.min_value,
            witness: v.witness.clone(),
            restarts_used: v.restarts_used,
            seed,
        }
    }
}
