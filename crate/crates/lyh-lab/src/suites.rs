//! The six suites. Each builds its cells, evaluates them in parallel, and
//! assembles tables in cell order.

use crate::config::{ExperimentConfig, ModelKind, OracleScale, Suite};
use crate::criteria::{self, Scale};
use crate::oracles::{kahler_derivative_data, random_pairs, random_riem, riem_derivative_data};
use crate::report::{fmt_f64, fmt_opt, Provenance, Table};
use lyh_core::cones::{
    cone_perturbed, engineered_non_psd, membership, pairs_from_witness, witness_value, ConeBudget, ConeSpec,
    CurvatureOp, VerdictReport,
};
use lyh_core::curvature::models::{const_hol_sec, psd_generated, random_symmetric};
use lyh_core::curvature::{KahlerCurvature, RiemCurvature};
use lyh_core::flow::{
    const_family_fit, const_model_coefficient, evolve_kahler, evolve_riem, sphere_coefficient, Snapshot, Termination,
    Trajectory,
};
use lyh_core::lyh::{
    build_m_p_kahler, build_m_p_riem, extension_consistency_kahler, extension_consistency_riem, min_q_admissible,
    min_q_search, DerivativeData,
};
use lyh_core::ppform::PositivityBudget;
use lyh_core::rng::{self, derive_seed};
use lyh_core::torus::{
    closed_positive_datum, duality_check, eval_q, kahler_identities_check, positive_datum,
    positivity_preservation_run, q_report, random_field, random_real_field, sample_frames, sample_points,
};
use lyh_core::{ConeVerdict, LyhError, Result, Status, VERSION};
use rayon::prelude::*;

/// Assertion bookkeeping for one run.
#[derive(Clone, Debug, Default)]
pub struct Tally {
    pub assertions: usize,
    pub failures: Vec<String>,
    pub inconclusive: usize,
}

impl Tally {
    pub fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.assertions += 1;
        if !ok {
            self.failures.push(what());
        }
    }

    fn error(&mut self, cell: &str, e: &LyhError) {
        self.assertions += 1;
        self.failures.push(format!("{cell}: {e}"));
    }
}

/// Everything a suite produces before it is written out.
#[derive(Debug, Default)]
pub struct SuiteOutput {
    pub tables: Vec<Table>,
    /// Extra files as `(relative path, contents)`.
    pub files: Vec<(String, String)>,
    pub cell_seeds: Vec<u64>,
    pub tally: Tally,
}

pub fn run_suite(suite: Suite, cfg: &ExperimentConfig) -> SuiteOutput {
    match suite {
        Suite::ConeCheck => cone_check(cfg),
        Suite::EvolveOde => evolve_ode(cfg),
        Suite::HeatRun => heat_run(cfg),
        Suite::VerifyLyh => verify_lyh(cfg),
        Suite::OracleSuite => oracle_suite(cfg),
        Suite::Identities => identities(cfg),
    }
}

fn cell_seeds(cfg: &ExperimentConfig, suite: &str, count: usize) -> Vec<u64> {
    (0..count).map(|i| derive_seed(cfg.seed, &format!("{suite}/{i}"))).collect()
}

fn model_cells(cfg: &ExperimentConfig, suite: &str) -> Vec<u64> {
    let count = if cfg.model.kind.is_random() { cfg.budgets.trials } else { 1 };
    cell_seeds(cfg, suite, count)
}

fn budget(cfg: &ExperimentConfig, seed: u64) -> ConeBudget {
    ConeBudget {
        restarts: cfg.budgets.restarts,
        max_steps: cfg.budgets.max_steps,
        tol_rel: cfg.tolerances.cone,
        seed,
    }
}

enum Built {
    Kahler(KahlerCurvature),
    Riem(RiemCurvature),
}

impl Built {
    fn op(&self) -> CurvatureOp {
        match self {
            Built::Kahler(k) => CurvatureOp::Kahler(k.clone()),
            Built::Riem(r) => CurvatureOp::Riem(r.clone()),
        }
    }
}

fn build_model(cfg: &ExperimentConfig, seed: u64) -> Result<Built> {
    let (m, n, p) = (cfg.dims.m, cfg.dims.n, cfg.ranks.p);
    let md = &cfg.model;
    Ok(match md.kind {
        ModelKind::ConstHolSec => Built::Kahler(const_hol_sec(md.c, m)),
        ModelKind::PsdGenerated => Built::Kahler(psd_generated(m, md.terms, seed)),
        ModelKind::RandomSymmetric => Built::Kahler(random_symmetric(m, seed)),
        ModelKind::EngineeredNonPsd => Built::Kahler(engineered_non_psd(&const_hol_sec(1.0, m), seed, md.overshoot)),
        ModelKind::PerturbedPsd => {
            let base = psd_generated(m, md.terms, seed).axpy(0.3, &const_hol_sec(1.0, m))?;
            Built::Kahler(cone_perturbed(&base, md.eps, seed, p, &budget(cfg, seed))?.rm().clone())
        }
        ModelKind::Sphere => Built::Riem(RiemCurvature::sphere(n, md.c)),
        ModelKind::RandomRiem => Built::Riem(random_riem(&mut rng::stream(seed, 0), n)),
    })
}

fn cone_spec(cfg: &ExperimentConfig) -> ConeSpec {
    if cfg.model.kind.is_riemannian() {
        ConeSpec::riem(cfg.dims.n, cfg.ranks.k)
    } else {
        ConeSpec::kahler(cfg.dims.m, cfg.ranks.p)
    }
}

fn model_name(cfg: &ExperimentConfig) -> String {
    serde_json::to_value(cfg.model.kind)
        .ok()
        .and_then(|v| v.as_str().map(str::to_string))
        .unwrap_or_default()
}

fn expect_status(cfg: &ExperimentConfig, tally: &mut Tally, cell: &str, v: &ConeVerdict) {
    match cfg.expect.status {
        Some(want) => tally.check(v.status == want, || format!("{cell}: expected {want}, got {}", v.status)),
        None => {
            tally.check(v.status != Status::Out, || format!("{cell}: verdict Out (min {:e})", v.min_value));
            if v.status == Status::Inconclusive {
                tally.inconclusive += 1;
            }
        }
    }
}

fn cone_check(cfg: &ExperimentConfig) -> SuiteOutput {
    let seeds = model_cells(cfg, "cone-check");
    let spec = cone_spec(cfg);
    let results: Vec<Result<(ConeVerdict, Option<f64>)>> = seeds
        .par_iter()
        .map(|&s| {
            let op = build_model(cfg, s)?.op();
            let v = membership(&op, &spec, &budget(cfg, s))?;
            let recheck = match v.witness.as_ref().and_then(pairs_from_witness) {
                Some(pairs) if v.status == Status::Out => Some(witness_value(&op, &pairs)?),
                _ => None,
            };
            Ok((v, recheck))
        })
        .collect();
    let mut out = SuiteOutput { cell_seeds: seeds.clone(), ..SuiteOutput::default() };
    let mut table = Table::new(
        "cone_check",
        &["trial", "cell_seed", "model", "cone", "dim", "rank", "status", "min_value", "restarts_used", "exact", "witness_value"],
    );
    let prov = Provenance { seed: cfg.seed, version: VERSION, tol: cfg.tolerances.cone };
    let mut reports = Vec::new();
    for (i, (r, &s)) in results.into_iter().zip(&seeds).enumerate() {
        let cell = format!("trial {i}");
        match r {
            Ok((v, recheck)) => {
                if let Some(w) = recheck {
                    let tol = cfg.tolerances.assert * v.min_value.abs().max(1.0);
                    out.tally.check((w - v.min_value).abs() <= tol, || {
                        format!("{cell}: witness re-evaluates to {w:e}, verdict says {:e}", v.min_value)
                    });
                }
                expect_status(cfg, &mut out.tally, &cell, &v);
                table.push(
                    &prov,
                    vec![
                        i.to_string(),
                        s.to_string(),
                        model_name(cfg),
                        format!("{:?}", spec.kind),
                        spec.dim.to_string(),
                        spec.rank.to_string(),
                        v.status.to_string(),
                        fmt_f64(v.min_value),
                        v.restarts_used.to_string(),
                        v.exact.to_string(),
                        fmt_opt(recheck),
                    ],
                );
                reports.push(VerdictReport::new(&v, s));
            }
            Err(e) => out.tally.error(&cell, &e),
        }
    }
    out.tables.push(table);
    let json = serde_json::to_string_pretty(&reports).expect("verdicts serialize");
    out.files.push(("verdicts.json".into(), json + "\n"));
    out
}

fn termination_flag(t: Termination) -> &'static str {
    match t {
        Termination::Horizon => "horizon",
        Termination::BlowUp => "blowup",
        Termination::StepLimit => "step_limit",
        Termination::ConeExit => "cone_exit",
    }
}

struct TrajSummary {
    rows: Vec<Vec<String>>,
    all_in: bool,
    worst_rel: f64,
    inconclusive: usize,
    tracking: Option<f64>,
    termination: Termination,
}

fn summarize<T>(
    traj: &Trajectory<T>,
    min_q: impl Fn(&Snapshot<T>) -> Result<Option<f64>>,
    exact: impl Fn(&Snapshot<T>) -> Option<f64>,
) -> Result<TrajSummary> {
    let last = traj.snapshots.len().saturating_sub(1);
    let mut rows = Vec::with_capacity(traj.snapshots.len());
    let mut worst_rel = f64::INFINITY;
    let mut tracking: Option<f64> = None;
    for (j, s) in traj.snapshots.iter().enumerate() {
        let mut flags = Vec::new();
        if s.verdict.exact {
            flags.push("exact");
        }
        if j == last {
            flags.push(termination_flag(traj.termination));
        }
        worst_rel = worst_rel.min(s.verdict.min_value / s.op_norm.max(1e-300));
        if let Some(e) = exact(s) {
            tracking = Some(tracking.unwrap_or(0.0).max(e));
        }
        rows.push(vec![
            fmt_f64(s.t),
            fmt_f64(s.op_norm),
            fmt_f64(s.scalar),
            s.verdict.status.to_string(),
            fmt_f64(s.verdict.min_value),
            fmt_opt(min_q(s)?),
            flags.join("|"),
        ]);
    }
    Ok(TrajSummary {
        rows,
        all_in: traj.all_in(),
        worst_rel,
        inconclusive: traj.snapshots.iter().filter(|s| s.verdict.status == Status::Inconclusive).count(),
        tracking,
        termination: traj.termination,
    })
}

fn evolve_ode(cfg: &ExperimentConfig) -> SuiteOutput {
    let seeds = model_cells(cfg, "evolve-ode");
    let spec = cone_spec(cfg);
    let ecfg = cfg.ode.evolve_config();
    let c0 = cfg.model.c;
    let results: Vec<Result<TrajSummary>> = seeds
        .par_iter()
        .map(|&s| {
            let b = budget(cfg, s);
            match build_model(cfg, s)? {
                Built::Kahler(rm) => {
                    let m = rm.m();
                    let traj = evolve_kahler(&rm, &spec, &ecfg, &b)?;
                    let lyh = |snap: &Snapshot<KahlerCurvature>| -> Result<Option<f64>> {
                        if !cfg.ode.lyh || snap.t <= 0.0 {
                            return Ok(None);
                        }
                        let ten = build_m_p_kahler(&snap.rm, snap.t, &DerivativeData::Homogeneous)?;
                        let op = CurvatureOp::Kahler(snap.rm.clone());
                        Ok(Some(min_q_admissible(&ten, &op, cfg.ranks.p, None, &b)?.min_value))
                    };
                    let closed = |snap: &Snapshot<KahlerCurvature>| {
                        (cfg.model.kind == ModelKind::ConstHolSec && snap.t > 0.0).then(|| {
                            let exact = const_model_coefficient(c0, m, snap.t);
                            ((const_family_fit(&snap.rm).0 - exact) / exact).abs() / snap.t
                        })
                    };
                    summarize(&traj, lyh, closed)
                }
                Built::Riem(rm) => {
                    let n = rm.n();
                    let traj = evolve_riem(&rm, &spec, &ecfg, &b)?;
                    let closed = |snap: &Snapshot<RiemCurvature>| {
                        (cfg.model.kind == ModelKind::Sphere && c0 > 0.0).then(|| {
                            let k = snap.rm.get(0, 1, 0, 1);
                            let exact = sphere_coefficient(c0, n, snap.t);
                            ((k - exact) / exact).abs() / (1.0 + (k / c0).ln().max(0.0))
                        })
                    };
                    summarize(&traj, |_| Ok(None), closed)
                }
            }
        })
        .collect();
    let mut out = SuiteOutput { cell_seeds: seeds.clone(), ..SuiteOutput::default() };
    let mut table = Table::new(
        "trajectory",
        &["trial", "cell_seed", "t", "op_norm", "scalar_curv", "verdict_status", "min_pairing", "min_Q", "flags"],
    );
    let prov = Provenance { seed: cfg.seed, version: VERSION, tol: cfg.tolerances.assert };
    for (i, (r, &s)) in results.into_iter().zip(&seeds).enumerate() {
        let cell = format!("trajectory {i}");
        match r {
            Ok(sum) => {
                let tol = cfg.tolerances.assert;
                out.tally.check(sum.all_in && sum.worst_rel >= -tol, || {
                    format!("{cell}: left the cone (worst min_pairing/|Rm| = {:e})", sum.worst_rel)
                });
                out.tally.check(sum.termination != Termination::ConeExit, || format!("{cell}: cone exit"));
                out.tally.inconclusive += sum.inconclusive;
                if let Some(d) = sum.tracking {
                    out.tally.check(d <= cfg.tolerances.track, || {
                        format!("{cell}: closed-form drift {d:e} above {:e}", cfg.tolerances.track)
                    });
                }
                for row in sum.rows {
                    let mut cells = vec![i.to_string(), s.to_string()];
                    cells.extend(row);
                    table.push(&prov, cells);
                }
            }
            Err(e) => out.tally.error(&cell, &e),
        }
    }
    out.tables.push(table);
    out
}

fn heat_run(cfg: &ExperimentConfig) -> SuiteOutput {
    let tc = &cfg.torus;
    let (m, p) = (cfg.dims.m, cfg.ranks.p);
    let seeds = cell_seeds(cfg, "heat-run", cfg.budgets.trials);
    let pbudget = PositivityBudget::default();
    struct Cell {
        q: Vec<(f64, lyh_core::torus::QReport)>,
        pos: Option<lyh_core::torus::PositivityReport>,
        certified: f64,
        snapshot: String,
    }
    let results: Vec<Result<Cell>> = seeds
        .par_iter()
        .map(|&s| {
            let d = if tc.closed {
                closed_positive_datum(m, p, tc.cutoff, tc.terms, tc.margin, s)?
            } else {
                positive_datum(m, p, tc.cutoff, tc.terms, tc.margin, s)?
            };
            let pts = sample_points(m, tc.grid, tc.points, s);
            let frames = sample_frames(m, p, tc.extra_frames, s);
            let q = cfg
                .times
                .grid
                .iter()
                .map(|&t| Ok((t, q_report(&d.field, t, &pts, &frames, tc.eps_rel)?)))
                .collect::<Result<Vec<_>>>()?;
            let pos = if tc.positivity {
                let mut times = vec![0.0];
                times.extend(&cfg.times.grid);
                Some(positivity_preservation_run(&d.field, &times, &pts, &pbudget)?)
            } else {
                None
            };
            let snapshot = serde_json::to_string(&d.field.to_json()?).expect("field serializes") + "\n";
            Ok(Cell { q, pos, certified: d.certified_min, snapshot })
        })
        .collect();
    let mut out = SuiteOutput { cell_seeds: seeds.clone(), ..SuiteOutput::default() };
    let tol = cfg.tolerances.assert;
    let prov = Provenance { seed: cfg.seed, version: VERSION, tol };
    let mut qt = Table::new(
        "q_report",
        &["datum", "cell_seed", "t", "point", "frame_id", "min_paired_Q", "V_used"],
    );
    let mut pt = Table::new("positivity", &["datum", "cell_seed", "t", "min_positivity", "certified_min"]);
    for (i, (r, &s)) in results.into_iter().zip(&seeds).enumerate() {
        let cell = format!("datum {i}");
        match r {
            Ok(c) => {
                for (t, rep) in &c.q {
                    out.tally.check(rep.min >= -tol, || format!("{cell}, t = {t}: min paired Q {:e}", rep.min));
                    for row in &rep.rows {
                        qt.push(
                            &prov,
                            vec![
                                i.to_string(),
                                s.to_string(),
                                fmt_f64(row.t),
                                row.point.clone(),
                                row.frame_id.to_string(),
                                fmt_f64(row.min_paired_q),
                                row.v_used.clone(),
                            ],
                        );
                    }
                }
                if let Some(pos) = &c.pos {
                    out.tally.check(pos.per_time[0].1 >= c.certified - 1e-12, || {
                        format!("{cell}: initial minimum {:e} below certificate {:e}", pos.per_time[0].1, c.certified)
                    });
                    for &(t, v) in &pos.per_time {
                        out.tally.check(v >= -tol, || format!("{cell}, t = {t}: positivity {v:e}"));
                        pt.push(&prov, vec![i.to_string(), s.to_string(), fmt_f64(t), fmt_f64(v), fmt_f64(c.certified)]);
                    }
                }
                out.files.push((format!("snapshots/datum_{i}.json"), c.snapshot));
            }
            Err(e) => out.tally.error(&cell, &e),
        }
    }
    out.tables.push(qt);
    if tc.positivity {
        out.tables.push(pt);
    }
    out
}

fn verify_lyh(cfg: &ExperimentConfig) -> SuiteOutput {
    let seeds = model_cells(cfg, "verify-lyh");
    let riem = cfg.model.kind.is_riemannian();
    let max_rank = if riem { cfg.ranks.k } else { cfg.ranks.p };
    let mut cells = Vec::new();
    for (i, &s) in seeds.iter().enumerate() {
        for rank in 1..=max_rank {
            for &t in &cfg.times.grid {
                cells.push((i, s, rank, t));
            }
        }
    }
    let results: Vec<Result<ConeVerdict>> = cells
        .par_iter()
        .map(|&(_, s, rank, t)| {
            let b = budget(cfg, s);
            match build_model(cfg, s)? {
                Built::Kahler(rm) => {
                    let ten = build_m_p_kahler(&rm, t, &DerivativeData::Homogeneous)?;
                    min_q_admissible(&ten, &CurvatureOp::Kahler(rm), rank, None, &b)
                }
                Built::Riem(rm) => {
                    let ten = build_m_p_riem(&rm, t, &DerivativeData::Homogeneous)?;
                    min_q_search(&ten, &CurvatureOp::Riem(rm), rank, None, &b)
                }
            }
        })
        .collect();
    let mut out = SuiteOutput { cell_seeds: seeds, ..SuiteOutput::default() };
    let prov = Provenance { seed: cfg.seed, version: VERSION, tol: cfg.tolerances.cone };
    let mut table = Table::new(
        "verify_lyh",
        &["trial", "cell_seed", "geometry", "dim", "rank", "t", "status", "min_value", "exact", "restarts_used"],
    );
    let (geometry, dim) = if riem { ("riemannian", cfg.dims.n) } else { ("kahler", cfg.dims.m) };
    for (&(i, s, rank, t), r) in cells.iter().zip(results) {
        let cell = format!("trial {i}, rank {rank}, t = {t}");
        match r {
            Ok(v) => {
                expect_status(cfg, &mut out.tally, &cell, &v);
                table.push(
                    &prov,
                    vec![
                        i.to_string(),
                        s.to_string(),
                        geometry.into(),
                        dim.to_string(),
                        rank.to_string(),
                        fmt_f64(t),
                        v.status.to_string(),
                        fmt_f64(v.min_value),
                        v.exact.to_string(),
                        v.restarts_used.to_string(),
                    ],
                );
            }
            Err(e) => out.tally.error(&cell, &e),
        }
    }
    out.tables.push(table);
    out
}

/// One residual: `(check, degree label, residual)`.
type Residual = (&'static str, String, f64);

fn identities(cfg: &ExperimentConfig) -> SuiteOutput {
    let (m, n) = (cfg.dims.m, cfg.dims.n);
    let tc = &cfg.torus;
    let seeds = cell_seeds(cfg, "identities", cfg.budgets.trials);
    let results: Vec<Result<Vec<Residual>>> = seeds
        .par_iter()
        .enumerate()
        .map(|(i, &s)| {
            let mut r = rng::stream(s, 0);
            let mut res = Vec::new();
            if m >= 2 {
                let p = 1 + i % (m - 1);
                let q = 1 + (i / 2) % (m - 1);
                let k = kahler_identities_check(&random_field(m, p, q, tc.cutoff, tc.n_modes, s))?;
                res.push(("kahler_identities", format!("({p},{q})"), k.max()));
            }
            let pd = 1 + i % m;
            let f = random_real_field(m, pd, tc.cutoff, tc.n_modes, s);
            let v = rng::complex_vec(&mut r, m);
            let t = rng::uniform(&mut r, 0.05, 1.0);
            let pts = sample_points(m, tc.grid, 4, s);
            let mut scale = 1.0f64;
            for x in &pts {
                scale = scale.max(eval_q(&f.jet_at(x), &v, t)?.max_abs());
            }
            res.push(("q_duality", format!("({pd},{pd})"), duality_check(&f, &v, t, &pts)? / scale));
            let km = m.max(2);
            let rm = random_symmetric(km, s);
            let ten = build_m_p_kahler(&rm, 0.4, &kahler_derivative_data(&mut r, km))?;
            let kp = 1 + i % 2;
            let e = extension_consistency_kahler(&ten, &rm, &random_pairs(&mut r, km, kp))?;
            res.push(("extension_kahler", format!("p={kp}"), e.defect / e.direct.abs().max(1.0)));
            let rr = random_riem(&mut r, n);
            let ten = build_m_p_riem(&rr, 0.4, &riem_derivative_data(&mut r, n))?;
            let e = extension_consistency_riem(&ten, &rr, &random_pairs(&mut r, n, kp))?;
            res.push(("extension_riemannian", format!("p={kp}"), e.defect / e.direct.abs().max(1.0)));
            Ok(res)
        })
        .collect();
    let mut out = SuiteOutput { cell_seeds: seeds.clone(), ..SuiteOutput::default() };
    let tol = cfg.tolerances.residual;
    let prov = Provenance { seed: cfg.seed, version: VERSION, tol };
    let mut table = Table::new("identities", &["case", "cell_seed", "check", "degree", "residual", "pass"]);
    for (i, (r, &s)) in results.into_iter().zip(&seeds).enumerate() {
        match r {
            Ok(rows) => {
                for (check, degree, v) in rows {
                    out.tally.check(v <= tol, || format!("case {i} {check} {degree}: residual {v:e}"));
                    table.push(
                        &prov,
                        vec![i.to_string(), s.to_string(), check.into(), degree, fmt_f64(v), (v <= tol).to_string()],
                    );
                }
            }
            Err(e) => out.tally.error(&format!("case {i}"), &e),
        }
    }
    out.tables.push(table);
    out
}

fn oracle_suite(cfg: &ExperimentConfig) -> SuiteOutput {
    let mut out = SuiteOutput { cell_seeds: vec![cfg.seed], ..SuiteOutput::default() };
    let mut table = Table::new(
        "oracle_suite",
        &["check", "cases", "measured", "relation", "threshold", "pass", "inconclusive", "detail"],
    );
    let scale = match cfg.oracle.scale {
        OracleScale::Full => Scale::full(),
        OracleScale::Quick => Scale::quick(),
    };
    match criteria::oracle_battery(cfg.seed, &scale) {
        Ok(checks) => {
            for c in checks {
                out.tally.check(c.pass, || format!("{}: {:e} {} {:e} {}", c.name, c.measured, c.relation, c.threshold, c.detail));
                out.tally.inconclusive += c.inconclusive;
                let prov = Provenance { seed: cfg.seed, version: VERSION, tol: c.threshold };
                table.push(
                    &prov,
                    vec![
                        c.name,
                        c.cases.to_string(),
                        fmt_f64(c.measured),
                        c.relation.into(),
                        fmt_f64(c.threshold),
                        c.pass.to_string(),
                        c.inconclusive.to_string(),
                        c.detail,
                    ],
                );
            }
        }
        Err(e) => out.tally.error("oracle battery", &e),
    }
    out.tables.push(table);
    out
}
