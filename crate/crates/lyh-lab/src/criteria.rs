//! Quantitative checks of the library against independent oracles. Each
//! check returns a [`Check`] with the worst measured value and the pinned
//! threshold. [`Scale::full`] is the acceptance battery; [`Scale::quick`]
//! is the reduced battery run by `oracle-suite`.

use crate::oracles::{
    certified_combination, kahler_derivative_data, kb_exterior, non_psd_pool, psd_null_at, random_orthogonal,
    random_pairs, random_real_form, random_riem, random_so_operator, riem_derivative_data,
};
use lyh_core::cones::{cone_perturbed, kb_sign_check, ConeBudget, ConeSpec, CurvatureOp};
use lyh_core::curvature::identify::{pairing_equality_check, two_vector};
use lyh_core::curvature::models::{const_hol_sec, psd_generated, random_symmetric};
use lyh_core::curvature::sharp::rm_sharp_in_basis;
use lyh_core::curvature::{
    kb_reaction, rm_sharp, second_variation_positivity, sharp_nonneg_at_null, OneOneVector, RiemCurvature,
};
use lyh_core::flow::{
    const_family_fit, const_model_coefficient, evolve_kahler, sphere_coefficient, EvolveConfig, Termination,
};
use lyh_core::lyh::{
    build_m_p_kahler, build_m_p_riem, eval_q_krf, eval_z, extension_consistency_riem, min_q_admissible, min_q_search,
    q_matrix, DerivativeData,
};
use lyh_core::mok::{mok_check, mok_check_traced, MokForm};
use lyh_core::ppform::PositivityBudget;
use lyh_core::rng::{self, derive_seed};
use lyh_core::tensor::linalg::{hermitian_norm, min_eigen};
use lyh_core::tensor::skew::{exp_ad_residual, so_dim};
use lyh_core::tensor::SkewC;
use lyh_core::torus::{
    duality_check, eval_q, kahler_identities_check, li_yau_scalar, min_paired_q, monotonicity_check, periodized_gaussian,
    positive_datum, closed_positive_datum, positivity_preservation_run, q_report, random_field, random_real_field,
    sample_frames, sample_points,
};
use lyh_core::{CxMat, Result, Skew, Status, C64};
use rayon::prelude::*;
use serde::Serialize;

/// Outcome of one check.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub cases: usize,
    /// Worst value of the checked quantity, oriented as in `relation`.
    pub measured: f64,
    pub threshold: f64,
    /// `"<="` or `">="`: `measured relation threshold` must hold.
    pub relation: &'static str,
    pub pass: bool,
    pub inconclusive: usize,
    pub detail: String,
}

impl Check {
    fn at_most(name: &str, cases: usize, measured: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            cases,
            measured,
            threshold,
            relation: "<=",
            pass: measured <= threshold,
            inconclusive: 0,
            detail: String::new(),
        }
    }

    fn at_least(name: &str, cases: usize, measured: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            cases,
            measured,
            threshold,
            relation: ">=",
            pass: measured >= threshold,
            inconclusive: 0,
            detail: String::new(),
        }
    }

    fn with_detail(mut self, detail: String) -> Self {
        self.detail = detail;
        self
    }

    /// Requires an extra condition on top of the threshold.
    fn and(mut self, ok: bool, why: &str) -> Self {
        if !ok {
            self.pass = false;
            if !self.detail.is_empty() {
                self.detail.push_str("; ");
            }
            self.detail.push_str(why);
        }
        self
    }
}

fn worst(xs: impl IntoIterator<Item = f64>) -> f64 {
    xs.into_iter().fold(f64::NEG_INFINITY, f64::max)
}

fn least(xs: impl IntoIterator<Item = f64>) -> f64 {
    xs.into_iter().fold(f64::INFINITY, f64::min)
}

/// Case counts per check.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct Scale {
    pub kb_oracle: usize,
    pub kb_sign: usize,
    pub identification: usize,
    pub exp_ad: usize,
    pub sharp_basis: usize,
    pub sharp_null: usize,
    pub mok: usize,
    pub trajectories: usize,
    pub extension: usize,
    pub torus_data: usize,
    pub torus_points: usize,
    pub fields: usize,
    pub closed_data: usize,
}

impl Scale {
    pub fn full() -> Self {
        Self {
            kb_oracle: 200,
            kb_sign: 1000,
            identification: 500,
            exp_ad: 100,
            sharp_basis: 20,
            sharp_null: 200,
            mok: 1000,
            trajectories: 50,
            extension: 20,
            torus_data: 20,
            torus_points: 32,
            fields: 100,
            closed_data: 20,
        }
    }

    pub fn quick() -> Self {
        Self {
            kb_oracle: 20,
            kb_sign: 50,
            identification: 40,
            exp_ad: 10,
            sharp_basis: 4,
            sharp_null: 20,
            mok: 100,
            trajectories: 2,
            extension: 6,
            torus_data: 2,
            torus_points: 8,
            fields: 8,
            closed_data: 4,
        }
    }
}

fn stream(seed: u64, label: &str, i: usize) -> rng::Stream {
    rng::stream(derive_seed(seed, label), i as u64)
}

/// `kb_reaction` against the exterior-derivation oracle, `m ≤ 3`, `p ≤ 2`.
pub fn kb_oracle(seed: u64, cases: usize) -> Result<Check> {
    let devs: Vec<f64> = (0..cases)
        .into_par_iter()
        .map(|i| {
            let (m, p) = [(2, 1), (2, 2), (3, 1), (3, 2)][i % 4];
            let rm = random_symmetric(m, derive_seed(seed, &format!("kb-oracle/{i}")));
            let phi = random_real_form(&mut stream(seed, "kb-oracle-phi", i), m, p);
            Ok(kb_reaction(&rm, &phi)?.sub(&kb_exterior(&rm, &phi)?)?.max_abs())
        })
        .collect::<Result<_>>()?;
    Ok(Check::at_most("kb_reaction_vs_oracle", cases, worst(devs), 1e-11))
}

/// `Re⟨KB(φ), φ̄⟩` on certified `C₂` operators at `m = 3`, `p ∈ {1, 2}`.
pub fn kb_sign(seed: u64, cases: usize) -> Result<Check> {
    let budget = ConeBudget { restarts: 64, seed, ..ConeBudget::default() };
    let pool = non_psd_pool(3, 2, 8, seed, &budget);
    if pool.is_empty() {
        return Ok(Check::at_most("kb_sign_on_c2", 0, f64::NAN, 1e-10).and(false, "no certified C_2 members"));
    }
    let not_psd = pool.iter().filter(|c| min_eigen(&c.rm().operator_matrix()).0 < 0.0).count();
    let vals: Vec<f64> = (0..cases)
        .into_par_iter()
        .map(|i| {
            let mut r = stream(seed, "kb-sign", i);
            let cert = certified_combination(&mut r, &pool, 3, 2, &budget)?;
            let phi = random_real_form(&mut r, 3, 1 + i % 2);
            kb_sign_check(&cert, &phi)
        })
        .collect::<Result<_>>()?;
    Ok(Check::at_most("kb_sign_on_c2", cases, worst(vals), 1e-10)
        .with_detail(format!("pool of {} certified C_2 members, {not_psd} not PSD", pool.len())))
}

/// Residual of `⟨Rm(Z∧W), ·⟩ = ⟨Rm(α), ᾱ⟩` under the identification `C̃_p → C_{2p}`,
/// relative to `max(1, ‖Σ Z∧W‖²)`.
pub fn identification(seed: u64, cases: usize) -> Result<Check> {
    let res: Vec<f64> = (0..cases)
        .into_par_iter()
        .map(|i| {
            let (m, p) = [(2, 1), (2, 2), (3, 1), (3, 2)][i % 4];
            let rm = if i % 8 < 2 {
                const_hol_sec(1.0, m)
            } else {
                random_symmetric(m, derive_seed(seed, &format!("ident/{i}")))
            };
            let zw = random_pairs(&mut stream(seed, "ident-pairs", i), 2 * m, p);
            let scale = two_vector(&zw).norm().powi(2).max(1.0);
            Ok(pairing_equality_check(&rm, &zw)? / scale)
        })
        .collect::<Result<_>>()?;
    Ok(Check::at_most("ctilde_pairing_equality", cases, worst(res), 1e-12))
}

/// `e^{ad_v} = Ad(Exp v)` on unit-norm random `v ∈ so(n, C)`, `n ≤ 6`.
pub fn exp_ad(seed: u64, cases: usize) -> Result<Check> {
    let res: Vec<f64> = (0..cases)
        .into_par_iter()
        .map(|i| {
            let n = 2 + i % 5;
            let mut r = stream(seed, "exp-ad", i);
            let v = Skew::skew_part(&rng::complex_matrix(&mut r, n, n));
            let v = v.scale(C64::new(1.0 / v.matrix().frobenius_norm(), 0.0));
            exp_ad_residual(&v)
        })
        .collect::<Result<_>>()?;
    Ok(Check::at_most("exp_ad_consistency", cases, worst(res), 1e-10))
}

/// `Rm^#` computed in a rotated orthonormal basis of `so(n)` and rotated back,
/// relative to `max(1, max|Rm^#|)`.
pub fn sharp_basis(seed: u64, cases: usize) -> Result<Check> {
    let res: Vec<f64> = (0..cases)
        .into_par_iter()
        .map(|i| {
            let n = 3 + i % 3;
            let d = so_dim(n);
            let mut r = stream(seed, "sharp-basis", i);
            let op = random_so_operator(&mut r, n);
            let s = rm_sharp(&op, n)?;
            let q = random_orthogonal(&mut r, d);
            let basis: Vec<SkewC<f64>> = (0..d)
                .map(|a| SkewC::from_coords(n, &(0..d).map(|b| q[(b, a)]).collect::<Vec<_>>()))
                .collect();
            let op_b = &(&q.transpose() * &op) * &q;
            let back: CxMat = &(&q * &rm_sharp_in_basis(&op_b, &basis)?) * &q.transpose();
            Ok((&s - &back).max_abs() / s.max_abs().max(1.0))
        })
        .collect::<Result<_>>()?;
    Ok(Check::at_most("rm_sharp_basis_independence", cases, worst(res), 1e-10))
}

/// `⟨Rm^#(v₀), v̄₀⟩ ≥ 0` for PSD operators null at a decomposable `v₀`,
/// through the second-variation chain.
pub fn sharp_null(seed: u64, cases: usize) -> Result<Check> {
    let out: Vec<(f64, bool)> = (0..cases)
        .into_par_iter()
        .map(|i| {
            let n = 3 + i % 4;
            let (op, v0) = psd_null_at(&mut stream(seed, "sharp-null", i), n);
            Ok((sharp_nonneg_at_null(&op, &v0)?, second_variation_positivity(&op, &v0)?))
        })
        .collect::<Result<_>>()?;
    let chain = out.iter().all(|x| x.1);
    Ok(Check::at_least("sharp_nonneg_at_null", cases, least(out.iter().map(|x| x.0)), -1e-10)
        .and(chain, "second-variation positivity failed"))
}

/// Random PSD Mok forms, `N ≤ 6`: the literal Frobenius-norm inequality
/// `trace(AC) ≥ max(Σ|B|², Σ|D|²)` and the trace-paired inequality.
/// Measured values are the worst `lhs − rhs`.
pub fn mok(seed: u64, cases: usize) -> (Check, Check) {
    let vals: Vec<(f64, f64)> = (0..cases)
        .into_par_iter()
        .map(|i| {
            let s = MokForm::random_psd(1 + i % 6, derive_seed(seed, &format!("mok/{i}")));
            let (l, r) = mok_check(&s);
            let (lt, rt) = mok_check_traced(&s);
            (l - r, lt - rt)
        })
        .collect();
    let literal_bad = vals.iter().filter(|v| v.0 < -1e-10).count();
    let traced_bad = vals.iter().filter(|v| v.1 < -1e-10).count();
    let literal = Check::at_least("mok_literal", cases, least(vals.iter().map(|v| v.0)), -1e-10)
        .with_detail(format!("{literal_bad} violations"));
    let traced = Check::at_least("mok_traced", cases, least(vals.iter().map(|v| v.1)), -1e-10)
        .with_detail(format!("{traced_bad} violations"));
    (literal, traced)
}

/// The PSD form `S = |X¹ + Y²|²` at `N = 2`, with `trace(AC) = 0` and `Σ|D|² = 1`.
pub fn mok_counterexample() -> Result<MokForm> {
    let e = |i: usize, j: usize| CxMat::from_fn(2, 2, |a, b| C64::new(if (a, b) == (i, j) { 1.0 } else { 0.0 }, 0.0));
    MokForm::new(e(0, 0), CxMat::zeros(2, 2), e(0, 1), e(1, 1))
}

/// Whether the counterexample is PSD and violates only the literal inequality.
pub fn mok_counterexample_check() -> Result<Check> {
    let s = mok_counterexample()?;
    let (l, r) = mok_check(&s);
    let (lt, rt) = mok_check_traced(&s);
    let ok = s.min_eigenvalue() >= -1e-15 && l < r - 0.5 && lt >= rt;
    Ok(Check::at_most("mok_literal_counterexample", 1, l - r, -0.5)
        .with_detail(format!("trace(AC) = {l}, max(|B|^2, |D|^2) = {r}"))
        .and(ok, "counterexample did not separate the two inequalities"))
}

/// Cone invariance along the Kähler curvature ODE at `m = 2` from certified
/// `C₂`/`C₃` starts, run to the blow-up guard. Measured: the smallest
/// `min_pairing / ‖Rm‖` over all snapshots.
pub fn ode_invariance(seed: u64, cases: usize) -> Result<Check> {
    let budget = ConeBudget { restarts: 8, seed, ..ConeBudget::default() };
    let cfg = EvolveConfig { snapshot_every: 50, ..EvolveConfig::default() };
    let out: Vec<(f64, bool, usize)> = (0..cases)
        .into_par_iter()
        .map(|i| {
            let p = 2 + i % 2;
            let s = derive_seed(seed, &format!("ode/{i}"));
            let base = psd_generated(2, 3, s).axpy(0.3, &const_hol_sec(1.0, 2))?;
            let cert = cone_perturbed(&base, 1e-3, s, p, &budget)?;
            let traj = evolve_kahler(cert.rm(), &ConeSpec::kahler(2, p), &cfg, &budget)?;
            let rel = least(traj.snapshots.iter().map(|x| x.verdict.min_value / x.op_norm.max(1e-300)));
            let inconclusive = traj.snapshots.iter().filter(|x| x.verdict.status == Status::Inconclusive).count();
            Ok((rel, traj.all_in() && traj.termination == Termination::BlowUp, inconclusive))
        })
        .collect::<Result<_>>()?;
    let all = out.iter().all(|x| x.1);
    let mut c = Check::at_least("ode_cone_invariance", cases, least(out.iter().map(|x| x.0)), -1e-8)
        .and(all, "a snapshot was not In or a trajectory stopped before blow-up");
    c.inconclusive = out.iter().map(|x| x.2).sum();
    Ok(c)
}

/// Constant holomorphic sectional curvature trajectories against the closed
/// form, `m ∈ {2, 3}`. Measured: relative drift per unit time.
pub fn ode_tracking() -> Result<Check> {
    let budget = ConeBudget { restarts: 4, ..ConeBudget::default() };
    let mut drift = 0.0f64;
    let mut family = 0.0f64;
    for m in 2..=3 {
        let traj = evolve_kahler(&const_hol_sec(1.0, m), &ConeSpec::kahler(m, m), &EvolveConfig::default(), &budget)?;
        for s in &traj.snapshots {
            let (c, dev) = const_family_fit(&s.rm);
            family = family.max(dev / c.abs().max(1.0));
            if s.t > 0.0 {
                let exact = const_model_coefficient(1.0, m, s.t);
                drift = drift.max(((c - exact) / exact).abs() / s.t);
            }
        }
    }
    Ok(Check::at_most("ode_constant_model_tracking", 2, drift, 1e-8)
        .and(family <= 1e-12, "left the constant family"))
}

/// Round-sphere Ricci-flow ODE against `κ(t) = κ₀ / (1 − 2(n−1)κ₀ t)`;
/// measured: relative error over `1 + ln κ`.
pub fn sphere_tracking() -> Result<Check> {
    let budget = ConeBudget { restarts: 4, ..ConeBudget::default() };
    let cfg = EvolveConfig { snapshot_every: 100, ..EvolveConfig::default() };
    let mut err = 0.0f64;
    for n in 3..=4 {
        let traj = lyh_core::flow::evolve_riem(&RiemCurvature::sphere(n, 1.0), &ConeSpec::riem(n, 1), &cfg, &budget)?;
        for s in &traj.snapshots {
            let k = s.rm.get(0, 1, 0, 1);
            let exact = sphere_coefficient(1.0, n, s.t);
            err = err.max(((k - exact) / exact).abs() / (1.0 + k.ln()));
        }
    }
    Ok(Check::at_most("ode_sphere_tracking", 2, err, 1e-8))
}

const T_GRID: [f64; 3] = [0.1, 1.0, 10.0];

/// `min_Q_admissible` on `const_hol_sec(1, m)`, homogeneous data. Measured:
/// the smallest minimum.
pub fn lyh_kahler_constant() -> Result<Check> {
    let budget = ConeBudget { restarts: 16, ..ConeBudget::default() };
    let mut cells = Vec::new();
    for m in 2..=3 {
        for p in 1..=m {
            for t in T_GRID {
                cells.push((m, p, t));
            }
        }
    }
    let out: Vec<(f64, Status)> = cells
        .par_iter()
        .map(|&(m, p, t)| {
            let rm = const_hol_sec(1.0, m);
            let ten = build_m_p_kahler(&rm, t, &DerivativeData::Homogeneous)?;
            let v = min_q_admissible(&ten, &CurvatureOp::Kahler(rm), p, None, &budget)?;
            Ok((v.min_value, v.status))
        })
        .collect::<Result<_>>()?;
    let all_in = out.iter().all(|x| x.1 == Status::In);
    let mut c = Check::at_least("min_q_constant_models", cells.len(), least(out.iter().map(|x| x.0)), -1e-8)
        .and(all_in, "a verdict was not In");
    c.inconclusive = out.iter().filter(|x| x.1 == Status::Inconclusive).count();
    Ok(c)
}

/// `Q(W ⊗ V̄, W) = Z(W, V)` at rank one, relative to `max(1, |Q|)`.
pub fn lyh_rank_one(seed: u64, cases: usize) -> Result<Check> {
    let res: Vec<f64> = (0..cases)
        .into_par_iter()
        .map(|i| {
            let m = 2 + i % 2;
            let t = T_GRID[i % 3];
            let mut r = stream(seed, "rank-one", i);
            let rm = if i % 2 == 0 {
                const_hol_sec(1.0, m)
            } else {
                random_symmetric(m, derive_seed(seed, &format!("rank-one/{i}")))
            };
            let data = if i % 4 < 2 { DerivativeData::Homogeneous } else { kahler_derivative_data(&mut r, m) };
            let ten = build_m_p_kahler(&rm, t, &data)?;
            let (w, v) = (rng::complex_vec(&mut r, m), rng::complex_vec(&mut r, m));
            let u = OneOneVector::from_pairs(m, vec![(w.clone(), v.clone())])?;
            let q = eval_q_krf(&ten, &rm, &u, &w)?;
            let z = eval_z(&ten, &rm, &w, &v)?;
            Ok((q - z).abs() / q.abs().max(1.0))
        })
        .collect::<Result<_>>()?;
    Ok(Check::at_most("q_rank_one_equals_z", cases, worst(res), 1e-12))
}

/// At `p = m` the admissible minimum is the exact smallest eigenvalue of the
/// Hermitian form; its verdict must match the PSD verdict of that matrix.
pub fn lyh_collapse(seed: u64, cases: usize) -> Result<Check> {
    let budget = ConeBudget { restarts: 16, seed, ..ConeBudget::default() };
    let out: Vec<(f64, bool)> = (0..cases)
        .into_par_iter()
        .map(|i| {
            let m = 2 + i % 2;
            let t = [0.2, 1.0][i % 2];
            let s = derive_seed(seed, &format!("collapse/{i}"));
            let rm = match i % 3 {
                0 => const_hol_sec(1.0, m),
                1 => random_symmetric(m, s).axpy(0.3, &const_hol_sec(1.0, m))?,
                _ => random_symmetric(m, s),
            };
            let op = CurvatureOp::Kahler(rm.clone());
            let ten = build_m_p_kahler(&rm, t, &DerivativeData::Homogeneous)?;
            let h = q_matrix(&ten, &op)?;
            let scale = hermitian_norm(&h).max(1e-300);
            let lam = min_eigen(&h).0;
            let v = min_q_admissible(&ten, &op, m, None, &budget)?;
            let expect = if lam >= -budget.tol_rel * scale { Status::In } else { Status::Out };
            Ok(((v.min_value - lam).abs() / scale, v.exact && v.status == expect))
        })
        .collect::<Result<_>>()?;
    let agree = out.iter().all(|x| x.1);
    Ok(Check::at_most("p_collapse_matches_psd", cases, worst(out.iter().map(|x| x.0)), 1e-12)
        .and(agree, "collapse verdict differs from the PSD verdict"))
}

/// `Q̃ ≥ 0` over admissible `(W, U)` on the round sphere, `n ∈ {3, 4}`, `p ∈ {1, 2}`.
pub fn lyh_riemannian_sphere() -> Result<Check> {
    let budget = ConeBudget { restarts: 8, ..ConeBudget::default() };
    let mut cells = Vec::new();
    for n in 3..=4 {
        for p in 1..=2 {
            for t in T_GRID {
                cells.push((n, p, t));
            }
        }
    }
    let vals: Vec<f64> = cells
        .par_iter()
        .map(|&(n, p, t)| {
            let rm = RiemCurvature::sphere(n, 1.0);
            let ten = build_m_p_riem(&rm, t, &DerivativeData::Homogeneous)?;
            Ok(min_q_search(&ten, &CurvatureOp::Riem(rm), p, None, &budget)?.min_value)
        })
        .collect::<Result<_>>()?;
    Ok(Check::at_least("qtilde_round_sphere", cells.len(), least(vals), -1e-8))
}

/// Defect between `Q̃` on `W ⊕ Σ W_μ ∧ Z_μ` and its trace reduction, relative
/// to `max(1, |Q̃|)`; spheres and random curvature, with and without derivative terms.
pub fn extension_riemannian(seed: u64, cases: usize) -> Result<Check> {
    let res: Vec<f64> = (0..cases)
        .into_par_iter()
        .map(|i| {
            let n = 3 + i % 2;
            let p = 1 + (i / 2) % 2;
            let mut r = stream(seed, "extension", i);
            let rm = if i % 4 == 0 { RiemCurvature::sphere(n, 1.0) } else { random_riem(&mut r, n) };
            let data = if i % 3 == 0 { riem_derivative_data(&mut r, n) } else { DerivativeData::Homogeneous };
            let ten = build_m_p_riem(&rm, 0.4, &data)?;
            let e = extension_consistency_riem(&ten, &rm, &random_pairs(&mut r, n, p))?;
            Ok(e.defect / e.direct.abs().max(1.0))
        })
        .collect::<Result<_>>()?;
    Ok(Check::at_most("extension_consistency_riem", cases, worst(res), 1e-9))
}

/// Shared inputs of the flat-torus checks: certified positive data at `m = 2`,
/// `p ∈ {1, 2}`, cutoff `N = 8`.
pub struct TorusInputs {
    pub data: Vec<(usize, lyh_core::torus::PositiveDatum, u64)>,
    pub times: Vec<f64>,
    pub points: usize,
}

impl TorusInputs {
    pub fn new(seed: u64, count: usize, points: usize) -> Result<Self> {
        let data = (0..count)
            .map(|i| {
                let p = 1 + i % 2;
                let s = derive_seed(seed, &format!("torus/{i}"));
                Ok((p, positive_datum(2, p, 8, 4, 0.2, s)?, s))
            })
            .collect::<Result<_>>()?;
        Ok(Self { data, times: vec![0.05, 0.1, 0.5], points })
    }
}

/// Grid minimum of the frame-paired `Q` with optimal `V`.
pub fn torus_q(inputs: &TorusInputs) -> Result<Check> {
    let mut mins = Vec::new();
    for (p, d, s) in &inputs.data {
        let pts = sample_points(2, 17, inputs.points, *s);
        let frames = sample_frames(2, *p, 2, *s);
        for &t in &inputs.times {
            mins.push(q_report(&d.field, t, &pts, &frames, 1e-6)?.min);
        }
    }
    Ok(Check::at_least("torus_min_paired_q", mins.len(), least(mins), -1e-8))
}

/// `|Δ log ψ + m/t| / (m/t)` on the periodized Gaussian near the center, `m = 2`, `t = 0.05`.
pub fn torus_gaussian_equality() -> Result<Check> {
    let (m, t) = (2, 0.05);
    let f = periodized_gaussian(m, t, 8)?;
    let pts = [[0.0, 0.0, 0.0, 0.0], [0.01, 0.0, 0.0, 0.02], [0.0, -0.015, 0.01, 0.0], [0.02, 0.02, -0.02, 0.02]];
    let rel = pts.iter().map(|x| li_yau_scalar(&f.jet_at(x), t).abs() * t / m as f64);
    Ok(Check::at_most("torus_gaussian_equality", pts.len(), worst(rel), 1e-6))
}

/// Frame-paired `Q` with optimal `V` on the periodized heat kernel at
/// `m = p = 2`, relative to `|φ(x)|/t`; it vanishes at the center.
pub fn torus_gaussian_q() -> Result<Check> {
    let m = 2;
    let frames = sample_frames(m, m, 2, 11);
    let mut pts = vec![vec![0.0; 2 * m], vec![0.01, 0.0, 0.0, 0.02]];
    pts.extend(sample_points(m, 17, 14, 11));
    let mut rel = f64::INFINITY;
    for t in [0.05, 0.1, 0.5] {
        let f = periodized_gaussian(m, t, 8)?;
        for x in &pts {
            let jet = f.jet_at(x);
            let scale = jet.value.max_abs() / t;
            for fr in &frames {
                rel = rel.min(min_paired_q(&jet, fr, t, 1e-6)?.0 / scale);
            }
        }
    }
    Ok(Check::at_least("torus_heat_kernel_q", 3 * pts.len() * frames.len(), rel, -1e-8))
}

/// Grid minimum of Lelong positivity along the heat flow.
pub fn torus_positivity(inputs: &TorusInputs) -> Result<Check> {
    let budget = PositivityBudget::default();
    let mut times = vec![0.0];
    times.extend(&inputs.times);
    let mut mins = Vec::new();
    let mut cert = true;
    for (_, d, s) in &inputs.data {
        let pts = sample_points(2, 17, inputs.points, *s);
        let r = positivity_preservation_run(&d.field, &times, &pts, &budget)?;
        cert &= r.per_time[0].1 >= d.certified_min - 1e-12;
        mins.push(r.min);
    }
    Ok(Check::at_least("torus_positivity_preserved", mins.len() * times.len(), least(mins), -1e-8)
        .and(cert, "initial minimum below its certificate"))
}

/// Kähler identities and the `Q` duality on random fields, `m ≤ 3`, `N = 4`.
/// Identity residuals are relative to `‖φ‖`, duality residuals to `max(1, max|Q|)`.
pub fn torus_identities(seed: u64, cases: usize) -> Result<(Check, Check)> {
    let out: Vec<(f64, f64)> = (0..cases)
        .into_par_iter()
        .map(|i| {
            let m = 2 + i % 2;
            let (p, q) = if m == 2 { (1, 1) } else { [(1, 1), (1, 2), (2, 1), (2, 2)][(i / 2) % 4] };
            let s = derive_seed(seed, &format!("fields/{i}"));
            let k = kahler_identities_check(&random_field(m, p, q, 4, 8, s))?.max();
            let pd = 1 + (i / 2) % m;
            let f = random_real_field(m, pd, 4, 6, s);
            let mut r = stream(seed, "fields-v", i);
            let v = rng::complex_vec(&mut r, m);
            let t = rng::uniform(&mut r, 0.05, 1.0);
            let pts = sample_points(m, 17, 4, s);
            let scale = pts
                .iter()
                .map(|x| eval_q(&f.jet_at(x), &v, t).map(|q| q.max_abs()))
                .collect::<Result<Vec<_>>>()?
                .into_iter()
                .fold(1.0, f64::max);
            Ok((k, duality_check(&f, &v, t, &pts)? / scale))
        })
        .collect::<Result<_>>()?;
    Ok((
        Check::at_most("kahler_identities", cases, worst(out.iter().map(|x| x.0)), 1e-10),
        Check::at_most("q_duality", cases, worst(out.iter().map(|x| x.1)), 1e-10),
    ))
}

/// Forward-difference slopes of `t ↦ t ∫ Λφ ∧ ω^{m−p+1}` on `d`-closed positive data.
pub fn torus_monotonicity(seed: u64, cases: usize) -> Result<Check> {
    let times = [0.0, 0.02, 0.05, 0.1, 0.2, 0.5, 1.0];
    let slopes: Vec<f64> = (0..cases)
        .into_par_iter()
        .map(|i| {
            let m = 2 + i % 2;
            let p = 1 + (i / 2) % m;
            let d = closed_positive_datum(m, p, 4, 4, 0.2, derive_seed(seed, &format!("closed/{i}")))?;
            Ok(least(monotonicity_check(&d.field, &times)?.slopes))
        })
        .collect::<Result<_>>()?;
    Ok(Check::at_least("monotonicity_slope", cases, least(slopes), -1e-10))
}

/// The battery run by `oracle-suite`. Every entry is expected to pass; the
/// literal Mok inequality enters only through its counterexample.
pub fn oracle_battery(seed: u64, s: &Scale) -> Result<Vec<Check>> {
    let torus = TorusInputs::new(seed, s.torus_data, s.torus_points)?;
    let (ids, dual) = torus_identities(seed, s.fields)?;
    Ok(vec![
        kb_oracle(seed, s.kb_oracle)?,
        kb_sign(seed, s.kb_sign)?,
        identification(seed, s.identification)?,
        exp_ad(seed, s.exp_ad)?,
        sharp_basis(seed, s.sharp_basis)?,
        sharp_null(seed, s.sharp_null)?,
        mok(seed, s.mok).1,
        mok_counterexample_check()?,
        ode_invariance(seed, s.trajectories)?,
        ode_tracking()?,
        lyh_kahler_constant()?,
        lyh_rank_one(seed, 12)?,
        lyh_collapse(seed, 6)?,
        lyh_riemannian_sphere()?,
        extension_riemannian(seed, s.extension)?,
        torus_q(&torus)?,
        torus_gaussian_equality()?,
        torus_gaussian_q()?,
        torus_positivity(&torus)?,
        ids,
        dual,
        torus_monotonicity(seed, s.closed_data)?,
    ])
}
