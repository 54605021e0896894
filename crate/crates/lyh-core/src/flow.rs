//! The curvature ODE of the Kähler-Ricci flow and of the Ricci flow, with
//! cone membership re-tested along the trajectory.
//!
//! `krf_ode_rhs` is the heat-operator right side in a fixed unitary frame at
//! the point. The integrator works in a frame moved by `∂e = ½ Ric(e)`, which
//! stays unitary under `∂g = −Ric`; in that frame the four half-Ricci terms
//! cancel and `dR/dt` is the quadratic part alone. For the constant model this
//! gives `c' = (m+1) c²`.

use crate::cones::{membership, ConeBudget, ConeSpec, CurvatureOp};
use crate::curvature::sharp::rm_sharp;
use crate::curvature::{KahlerCurvature, RiemCurvature};
use crate::error::{LyhError, Result};
use crate::scalar::C64;
use crate::tensor::linalg::hermitian_norm;
use crate::verdict::{ConeVerdict, Status};
use serde::{Deserialize, Serialize};

const ZERO: C64 = C64::new(0.0, 0.0);

/// `R_{ab̄ξη̄}R_{ηξ̄cd̄} − R_{aξ̄cη̄}R_{ξb̄ηd̄} + R_{ad̄ξη̄}R_{ηξ̄cb̄}`.
pub fn krf_quadratic(rm: &KahlerCurvature) -> KahlerCurvature {
    let m = rm.m();
    KahlerCurvature::from_fn_projected(m, |a, b, c, d| {
        let mut acc = ZERO;
        for x in 0..m {
            for y in 0..m {
                acc += rm.get(a, b, x, y) * rm.get(y, x, c, d) - rm.get(a, x, c, y) * rm.get(x, b, y, d)
                    + rm.get(a, d, x, y) * rm.get(y, x, c, b);
            }
        }
        acc
    })
}

/// Right side of the curvature heat equation: the quadratic part minus
/// `½(R_{aξ̄}R_{ξb̄cd̄} + R_{ξb̄}R_{aξ̄cd̄} + R_{cξ̄}R_{ab̄ξd̄} + R_{ξd̄}R_{ab̄cξ̄})`.
pub fn krf_ode_rhs(rm: &KahlerCurvature) -> Result<KahlerCurvature> {
    let m = rm.m();
    let ric = rm.ricci();
    let mut raw = Vec::with_capacity(m * m * m * m);
    for a in 0..m {
        for b in 0..m {
            for c in 0..m {
                for d in 0..m {
                    let mut q = ZERO;
                    let mut half = ZERO;
                    for x in 0..m {
                        for y in 0..m {
                            q += rm.get(a, b, x, y) * rm.get(y, x, c, d)
                                - rm.get(a, x, c, y) * rm.get(x, b, y, d)
                                + rm.get(a, d, x, y) * rm.get(y, x, c, b);
                        }
                        half += ric[(a, x)] * rm.get(x, b, c, d)
                            + ric[(x, b)] * rm.get(a, x, c, d)
                            + ric[(c, x)] * rm.get(a, b, x, d)
                            + ric[(x, d)] * rm.get(a, b, c, x);
                    }
                    raw.push(q - half * 0.5);
                }
            }
        }
    }
    let out = KahlerCurvature::from_fn_projected(m, |a, b, c, d| raw[((a * m + b) * m + c) * m + d]);
    let unprojected = KahlerCurvature::from_raw(m, raw);
    let res = unprojected.axpy(-1.0, &out)?.max_abs();
    if res > 1e-10 * out.max_abs().max(1.0) {
        return Err(LyhError::Invariant(format!("KRF right side leaves the symmetry subspace by {res:.3e}")));
    }
    Ok(out)
}

/// `Rm² + Rm^#` as an operator on `so(n)` in the `E_ab` basis.
pub fn riem_ode_rhs(rm: &RiemCurvature) -> Result<RiemCurvature> {
    let op = rm.operator_matrix();
    let sq = &op * &op;
    let sharp = rm_sharp(&op, rm.n())?;
    RiemCurvature::from_operator(rm.n(), &(&sq + &sharp))
}

/// Closed-form coefficient of the constant model along the flow.
pub fn const_model_coefficient(c0: f64, m: usize, t: f64) -> f64 {
    c0 / (1.0 - (m as f64 + 1.0) * c0 * t)
}

/// Closed-form sectional curvature of the round sphere under `∂g = −2 Ric`.
pub fn sphere_coefficient(k0: f64, n: usize, t: f64) -> f64 {
    k0 / (1.0 - 2.0 * (n as f64 - 1.0) * k0 * t)
}

/// Least-squares coefficient of `rm` on the constant model and the largest
/// entrywise deviation from the fitted model.
pub fn const_family_fit(rm: &KahlerCurvature) -> (f64, f64) {
    let unit = crate::curvature::models::const_hol_sec(1.0, rm.m());
    let (mut num, mut den) = (0.0, 0.0);
    let m = rm.m();
    for a in 0..m {
        for b in 0..m {
            for c in 0..m {
                for d in 0..m {
                    let s = unit.get(a, b, c, d).re;
                    num += rm.get(a, b, c, d).re * s;
                    den += s * s;
                }
            }
        }
    }
    let c = num / den;
    let dev = rm.axpy(-c, &unit).map(|d| d.max_abs()).unwrap_or(f64::INFINITY);
    (c, dev)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvolveConfig {
    /// Step size `dt = dt_scale / ‖Rm(t)‖`.
    pub dt_scale: f64,
    /// Stop once `‖Rm‖` exceeds this multiple of `‖Rm₀‖`.
    pub blowup_factor: f64,
    pub t_max: f64,
    pub snapshot_every: usize,
    pub max_steps: usize,
}

impl Default for EvolveConfig {
    fn default() -> Self {
        Self { dt_scale: 1e-3, blowup_factor: 1e3, t_max: f64::INFINITY, snapshot_every: 10, max_steps: 2_000_000 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Termination {
    Horizon,
    BlowUp,
    StepLimit,
    /// A snapshot verdict came back `Out`: a step-size, tolerance or certification failure.
    ConeExit,
}

#[derive(Clone, Debug)]
pub struct Snapshot<T> {
    pub t: f64,
    pub rm: T,
    pub op_norm: f64,
    pub scalar: f64,
    /// Symmetry residual removed by re-projection on the step that produced this snapshot.
    pub projection_residual: f64,
    pub verdict: ConeVerdict,
}

#[derive(Clone, Debug)]
pub struct Trajectory<T> {
    pub snapshots: Vec<Snapshot<T>>,
    pub termination: Termination,
    pub steps: usize,
}

/// One CSV row of a trajectory export.
#[derive(Clone, Debug, Serialize)]
pub struct TrajectoryRow {
    pub t: f64,
    pub op_norm: f64,
    pub scalar_curv: f64,
    pub verdict_status: String,
    pub min_pairing: f64,
    pub min_q: Option<f64>,
    pub flags: String,
}

impl<T> Trajectory<T> {
    pub fn times(&self) -> Vec<f64> {
        self.snapshots.iter().map(|s| s.t).collect()
    }

    pub fn all_in(&self) -> bool {
        self.snapshots.iter().all(|s| s.verdict.status == Status::In)
    }

    pub fn rows(&self) -> Vec<TrajectoryRow> {
        self.snapshots
            .iter()
            .map(|s| TrajectoryRow {
                t: s.t,
                op_norm: s.op_norm,
                scalar_curv: s.scalar,
                verdict_status: s.verdict.status.to_string(),
                min_pairing: s.verdict.min_value,
                min_q: None,
                flags: String::new(),
            })
            .collect()
    }
}

trait FlowState: Clone {
    fn norm(&self) -> f64;
    fn scalar(&self) -> f64;
    fn velocity(&self) -> Result<Self>;
    fn axpy(&self, c: f64, o: &Self) -> Self;
    /// Re-projection onto the symmetry subspace, returning the removed residual.
    fn reproject(&self) -> (Self, f64);
    fn op(&self) -> CurvatureOp;
}

impl FlowState for KahlerCurvature {
    fn norm(&self) -> f64 {
        self.op_norm()
    }
    fn scalar(&self) -> f64 {
        KahlerCurvature::scalar(self)
    }
    fn velocity(&self) -> Result<Self> {
        Ok(krf_quadratic(self))
    }
    fn axpy(&self, c: f64, o: &Self) -> Self {
        KahlerCurvature::axpy(self, c, o).expect("same dimension")
    }
    fn reproject(&self) -> (Self, f64) {
        let p = self.project();
        let r = KahlerCurvature::axpy(self, -1.0, &p).expect("same dimension").max_abs();
        (p, r)
    }
    fn op(&self) -> CurvatureOp {
        CurvatureOp::Kahler(self.clone())
    }
}

impl FlowState for RiemCurvature {
    fn norm(&self) -> f64 {
        hermitian_norm(&self.operator_matrix())
    }
    fn scalar(&self) -> f64 {
        RiemCurvature::scalar(self)
    }
    fn velocity(&self) -> Result<Self> {
        Ok(riem_ode_rhs(self)?.scale(2.0))
    }
    fn axpy(&self, c: f64, o: &Self) -> Self {
        self.add_scaled(c, o)
    }
    fn reproject(&self) -> (Self, f64) {
        let p = self.project();
        let r = self.add_scaled(-1.0, &p).max_abs();
        (p, r)
    }
    fn op(&self) -> CurvatureOp {
        CurvatureOp::Riem(self.clone())
    }
}

fn rk4<T: FlowState>(y: &T, h: f64) -> Result<T> {
    let k1 = y.velocity()?;
    let k2 = y.axpy(0.5 * h, &k1).velocity()?;
    let k3 = y.axpy(0.5 * h, &k2).velocity()?;
    let k4 = y.axpy(h, &k3).velocity()?;
    Ok(y.axpy(h / 6.0, &k1).axpy(h / 3.0, &k2).axpy(h / 3.0, &k3).axpy(h / 6.0, &k4))
}

/// One RK4 step of the frame-corrected Kähler ODE, without re-projection.
pub fn rk4_step_kahler(rm: &KahlerCurvature, h: f64) -> KahlerCurvature {
    rk4(rm, h).expect("Kähler velocity is infallible")
}

/// One RK4 step of `dRm/dt = 2(Rm² + Rm^#)`, without re-projection.
pub fn rk4_step_riem(rm: &RiemCurvature, h: f64) -> Result<RiemCurvature> {
    rk4(rm, h)
}

fn evolve_generic<T: FlowState>(
    rm0: &T,
    spec: &ConeSpec,
    cfg: &EvolveConfig,
    budget: &ConeBudget,
) -> Result<Trajectory<T>> {
    let v0 = membership(&rm0.op(), spec, budget)?;
    if v0.status != Status::In {
        return Err(LyhError::Precondition(format!("initial operator is {} for {spec:?}", v0.status)));
    }
    let n0 = rm0.norm();
    let snap = |t: f64, rm: &T, residual: f64, verdict: ConeVerdict| Snapshot {
        t,
        rm: rm.clone(),
        op_norm: rm.norm(),
        scalar: rm.scalar(),
        projection_residual: residual,
        verdict,
    };
    let mut snapshots = vec![snap(0.0, rm0, 0.0, v0)];
    let (mut t, mut y, mut worst_residual) = (0.0, rm0.clone(), 0.0f64);
    let mut steps = 0;
    let termination = loop {
        if t >= cfg.t_max {
            break Termination::Horizon;
        }
        if n0 > 0.0 && y.norm() > cfg.blowup_factor * n0 {
            break Termination::BlowUp;
        }
        if steps >= cfg.max_steps {
            break Termination::StepLimit;
        }
        let norm = y.norm();
        let h = (cfg.dt_scale / if norm > 0.0 { norm } else { 1.0 }).min(cfg.t_max - t);
        let (next, residual) = rk4(&y, h)?.reproject();
        y = next;
        worst_residual = worst_residual.max(residual);
        t += h;
        steps += 1;
        let due = steps % cfg.snapshot_every.max(1) == 0
            || t >= cfg.t_max
            || (n0 > 0.0 && y.norm() > cfg.blowup_factor * n0);
        if due {
            let v = membership(&y.op(), spec, budget)?;
            let out = v.status == Status::Out;
            snapshots.push(snap(t, &y, worst_residual, v));
            worst_residual = 0.0;
            if out {
                break Termination::ConeExit;
            }
        }
    };
    Ok(Trajectory { snapshots, termination, steps })
}

/// RK4 integration of the Kähler-Ricci curvature ODE from a certified start.
pub fn evolve_kahler(
    rm0: &KahlerCurvature,
    spec: &ConeSpec,
    cfg: &EvolveConfig,
    budget: &ConeBudget,
) -> Result<Trajectory<KahlerCurvature>> {
    evolve_generic(rm0, spec, cfg, budget)
}

/// RK4 integration of `dRm/dt = 2(Rm² + Rm^#)`, the Ricci flow `∂g = −2 Ric`
/// curvature ODE in the normalization where the round sphere has `Rm = κ·Id`.
pub fn evolve_riem(
    rm0: &RiemCurvature,
    spec: &ConeSpec,
    cfg: &EvolveConfig,
    budget: &ConeBudget,
) -> Result<Trajectory<RiemCurvature>> {
    evolve_generic(rm0, spec, cfg, budget)
}
