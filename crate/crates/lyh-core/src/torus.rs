//! Hodge-Laplacian heat flow of differential forms on the flat torus
//! `C^m / (Z + iZ)^m`, and the pointwise LYH quantity `Q(φ, V)` built from it.
//!
//! A field is a finite Fourier series `φ(x) = Σ_k φ̂_k e^{2πi k·x}` with
//! `k = (a_1..a_m, b_1..b_m)` and `k·x = Σ a_j x_j + b_j y_j`, `z_j = x_j + i y_j`.
//! Every operator here has constant coefficients, so it acts mode by mode and
//! only the occupied modes are stored.
//!
//! On a mode, `∂_{z_j}` multiplies by `π(b_j + i a_j)` and `∂_{z̄_j}` by
//! `π(i a_j − b_j)`; `Δ_∂̄ = −Σ_j ∂_{z_j}∂_{z̄_j}` has eigenvalue `π²|k|²`.
//! Forms use the orthonormal coframe of [`crate::tensor::exterior`].

use crate::error::{LyhError, Result};
use crate::ppform::{lelong_positivity, FrameTuple, PPForm, PPFormJson, PositivityBudget};
use crate::rng;
use crate::scalar::C64;
use crate::tensor::exterior::bidegree;
use crate::tensor::linalg::hermitian_pinv_solve;
use crate::tensor::multi_index::{factorial, sort_with_sign, SubsetTable};
use crate::tensor::CxMatrix;
use crate::Form;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::PI;

const ZERO: C64 = C64::new(0.0, 0.0);
const I: C64 = C64::new(0.0, 1.0);

/// Lattice mode `(a_1..a_m, b_1..b_m)`.
pub type Mode = Vec<i32>;

/// `∂_{z_j}` multipliers of a mode.
pub fn holo_symbol(k: &[i32]) -> Vec<C64> {
    let m = k.len() / 2;
    (0..m).map(|j| C64::new(k[m + j] as f64, k[j] as f64) * PI).collect()
}

/// `∂_{z̄_j}` multipliers of a mode.
pub fn anti_symbol(k: &[i32]) -> Vec<C64> {
    let m = k.len() / 2;
    (0..m).map(|j| C64::new(-(k[m + j] as f64), k[j] as f64) * PI).collect()
}

/// Eigenvalue `π²|k|²` of `Δ_∂̄` on the mode `k`.
pub fn eigenvalue(k: &[i32]) -> f64 {
    PI * PI * k.iter().map(|&a| (a as f64).powi(2)).sum::<f64>()
}

fn neg(k: &[i32]) -> Mode {
    k.iter().map(|a| -a).collect()
}

fn phase(k: &[i32], x: &[f64]) -> C64 {
    let s: f64 = k.iter().zip(x).map(|(&a, &y)| a as f64 * y).sum();
    C64::from_polar(1.0, 2.0 * PI * s)
}

fn sup_norm(k: &[i32]) -> usize {
    k.iter().map(|a| a.unsigned_abs() as usize).max().unwrap_or(0)
}

/// A homogeneous `(p, q)`-form field with finitely many Fourier modes.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralField {
    m: usize,
    p: usize,
    q: usize,
    cutoff: usize,
    modes: BTreeMap<Mode, Form>,
}

impl SpectralField {
    pub fn zero(m: usize, p: usize, q: usize, cutoff: usize) -> Self {
        assert!(p <= m && q <= m && m <= 8, "bidegree ({p},{q}) on C^{m}");
        Self { m, p, q, cutoff, modes: BTreeMap::new() }
    }

    /// The spatially constant field with value `form`.
    pub fn constant(form: &Form, p: usize, q: usize, cutoff: usize) -> Result<Self> {
        let mut f = Self::zero(form.m(), p, q, cutoff);
        f.insert(vec![0; 2 * form.m()], form.clone())?;
        Ok(f)
    }

    /// Adds `form` to the coefficient of mode `k`.
    pub fn insert(&mut self, k: Mode, form: Form) -> Result<()> {
        if k.len() != 2 * self.m || form.m() != self.m {
            return Err(LyhError::Dimension(format!("mode {k:?} on C^{}", self.m)));
        }
        if sup_norm(&k) > self.cutoff {
            return Err(LyhError::Parameter(format!("mode {k:?} beyond cutoff {}", self.cutoff)));
        }
        for (mask, c) in form.coeffs().iter().enumerate() {
            if c.norm() > 0.0 && bidegree(self.m, mask as u32) != (self.p, self.q) {
                return Err(LyhError::Degree(format!(
                    "component of bidegree {:?} in a ({},{}) field",
                    bidegree(self.m, mask as u32),
                    self.p,
                    self.q
                )));
            }
        }
        match self.modes.get_mut(&k) {
            Some(f) => *f = f.add(&form),
            None => {
                self.modes.insert(k, form);
            }
        }
        Ok(())
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn bidegree(&self) -> (usize, usize) {
        (self.p, self.q)
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn modes(&self) -> &BTreeMap<Mode, Form> {
        &self.modes
    }

    pub fn coefficient(&self, k: &[i32]) -> Option<&Form> {
        self.modes.get(k)
    }

    fn map_modes(&self, p: usize, q: usize, f: impl Fn(&Mode, &Form) -> Form) -> Self {
        let modes = self.modes.iter().map(|(k, v)| (k.clone(), f(k, v))).collect();
        Self { m: self.m, p, q, cutoff: self.cutoff, modes }
    }

    fn same_shape(&self, o: &Self) -> Result<()> {
        if (self.m, self.p, self.q) != (o.m, o.p, o.q) {
            return Err(LyhError::Dimension(format!(
                "({},{}) field on C^{} vs ({},{}) on C^{}",
                self.p, self.q, self.m, o.p, o.q, o.m
            )));
        }
        Ok(())
    }

    pub fn add(&self, o: &Self) -> Result<Self> {
        self.axpy(C64::new(1.0, 0.0), o)
    }

    pub fn sub(&self, o: &Self) -> Result<Self> {
        self.axpy(C64::new(-1.0, 0.0), o)
    }

    /// `self + c·o`.
    pub fn axpy(&self, c: C64, o: &Self) -> Result<Self> {
        self.same_shape(o)?;
        let mut out = self.clone();
        out.cutoff = self.cutoff.max(o.cutoff);
        for (k, v) in &o.modes {
            let s = v.scale(c);
            match out.modes.get_mut(k) {
                Some(f) => *f = f.add(&s),
                None => {
                    out.modes.insert(k.clone(), s);
                }
            }
        }
        Ok(out)
    }

    pub fn scale(&self, c: C64) -> Self {
        self.map_modes(self.p, self.q, |_, v| v.scale(c))
    }

    /// Drops the modes with `|k|_∞ > cutoff`.
    pub fn truncate(&self, cutoff: usize) -> Self {
        let modes = self
            .modes
            .iter()
            .filter(|(k, _)| sup_norm(k) <= cutoff)
            .map(|(k, v)| (k.clone(), v.clone()))
            .collect();
        Self { m: self.m, p: self.p, q: self.q, cutoff, modes }
    }

    /// `L²` inner product over the unit-volume fundamental domain (Parseval).
    pub fn inner(&self, o: &Self) -> Result<C64> {
        self.same_shape(o)?;
        Ok(self
            .modes
            .iter()
            .filter_map(|(k, v)| o.modes.get(k).map(|w| v.inner(w)))
            .sum())
    }

    pub fn l2_norm(&self) -> f64 {
        self.modes.values().map(|v| v.norm().powi(2)).sum::<f64>().sqrt()
    }

    /// Largest coefficient over all modes.
    pub fn max_abs(&self) -> f64 {
        self.modes.values().fold(0.0, |a, v| a.max(v.max_abs()))
    }

    /// `max_k |φ̂_{−k} − conj(φ̂_k)|`, zero exactly when the field is real.
    pub fn reality_residual(&self) -> f64 {
        let zero = Form::zero(self.m);
        let mut worst: f64 = 0.0;
        for (k, v) in &self.modes {
            let other = self.modes.get(&neg(k)).unwrap_or(&zero);
            worst = worst.max(other.sub(&v.conj()).max_abs());
        }
        worst
    }

    /// `e^{−tΔ_∂̄}φ`.
    pub fn heat_evolve(&self, t: f64) -> Result<Self> {
        if !(t >= 0.0) {
            return Err(LyhError::Parameter(format!("heat time {t} < 0")));
        }
        Ok(self.map_modes(self.p, self.q, |k, v| v.scale(C64::new((-eigenvalue(k) * t).exp(), 0.0))))
    }

    /// `Δ_∂̄ φ`.
    pub fn laplacian(&self) -> Self {
        self.map_modes(self.p, self.q, |k, v| v.scale(C64::new(eigenvalue(k), 0.0)))
    }

    /// `Δ_∂̄ φ = (∂̄∂̄* + ∂̄*∂̄)φ` from the first-order operators.
    pub fn laplacian_from_dbar(&self) -> Result<Self> {
        let mut parts = Vec::new();
        if self.q > 0 {
            parts.push(self.dbar_star()?.dbar()?);
        }
        if self.q < self.m {
            parts.push(self.dbar()?.dbar_star()?);
        }
        parts
            .into_iter()
            .try_fold(Self::zero(self.m, self.p, self.q, self.cutoff), |acc, x| acc.add(&x))
    }

    pub fn del(&self) -> Result<Self> {
        if self.p >= self.m {
            return Err(LyhError::Degree(format!("∂ of a ({},{}) field on C^{}", self.p, self.q, self.m)));
        }
        let zero = vec![ZERO; self.m];
        Ok(self.map_modes(self.p + 1, self.q, |k, v| Form::one_form(self.m, &holo_symbol(k), &zero).wedge(v)))
    }

    pub fn dbar(&self) -> Result<Self> {
        if self.q >= self.m {
            return Err(LyhError::Degree(format!("∂̄ of a ({},{}) field on C^{}", self.p, self.q, self.m)));
        }
        let zero = vec![ZERO; self.m];
        Ok(self.map_modes(self.p, self.q + 1, |k, v| Form::one_form(self.m, &zero, &anti_symbol(k)).wedge(v)))
    }

    /// `∂* = −Σ_j ι_j ∂_{z̄_j}`, the `L²` adjoint of [`Self::del`].
    pub fn del_star(&self) -> Result<Self> {
        if self.p == 0 {
            return Err(LyhError::Degree("∂* of a (0,q) field".into()));
        }
        Ok(self.map_modes(self.p - 1, self.q, |k, v| {
            let s: Vec<C64> = anti_symbol(k).iter().map(|e| -e).collect();
            v.iota_holo(&s)
        }))
    }

    /// `∂̄* = −Σ_j ι_{j̄} ∂_{z_j}`, the `L²` adjoint of [`Self::dbar`].
    pub fn dbar_star(&self) -> Result<Self> {
        if self.q == 0 {
            return Err(LyhError::Degree("∂̄* of a (p,0) field".into()));
        }
        Ok(self.map_modes(self.p, self.q - 1, |k, v| v.iota_anti(&anti_symbol(k))))
    }

    pub fn lambda(&self) -> Result<Self> {
        if self.p == 0 || self.q == 0 {
            return Err(LyhError::Degree(format!("Λ of a ({},{}) field", self.p, self.q)));
        }
        Ok(self.map_modes(self.p - 1, self.q - 1, |_, v| v.lambda()))
    }

    pub fn lefschetz(&self) -> Result<Self> {
        if self.p >= self.m || self.q >= self.m {
            return Err(LyhError::Degree(format!("L of a ({},{}) field on C^{}", self.p, self.q, self.m)));
        }
        Ok(self.map_modes(self.p + 1, self.q + 1, |_, v| v.lefschetz()))
    }

    /// Pointwise Hodge star, `(p, q) → (m − q, m − p)`.
    pub fn star(&self) -> Self {
        self.map_modes(self.m - self.q, self.m - self.p, |_, v| v.star())
    }

    /// Value at the point `x = (x_1..x_m, y_1..y_m)`.
    pub fn value_at(&self, x: &[f64]) -> Form {
        let mut out = Form::zero(self.m);
        for (k, v) in &self.modes {
            out.axpy(phase(k, x), v);
        }
        out
    }

    /// Value and derivatives up to `∂_{z_i}∂_{z̄_j}` at `x`.
    pub fn jet_at(&self, x: &[f64]) -> Jet {
        let m = self.m;
        let mut jet = Jet::zero(m, self.p);
        for (k, v) in &self.modes {
            let e = phase(k, x);
            let (d, b) = (holo_symbol(k), anti_symbol(k));
            jet.value.axpy(e, v);
            for i in 0..m {
                jet.dz[i].axpy(e * d[i], v);
                jet.dzb[i].axpy(e * b[i], v);
                for j in 0..m {
                    jet.ddb[i * m + j].axpy(e * d[i] * b[j], v);
                }
            }
        }
        jet
    }

    /// `max_k (|∂φ̂_k|, |∂̄φ̂_k|)`.
    pub fn closedness_residual(&self) -> f64 {
        let zero = vec![ZERO; self.m];
        self.modes
            .iter()
            .map(|(k, v)| {
                let a = Form::one_form(self.m, &holo_symbol(k), &zero).wedge(v).max_abs();
                let b = Form::one_form(self.m, &zero, &anti_symbol(k)).wedge(v).max_abs();
                a.max(b)
            })
            .fold(0.0, f64::max)
    }

    /// Cosine and sine parts per half-space mode, as real `(p,p)`-forms.
    pub fn to_json(&self) -> Result<FieldJson> {
        if self.p != self.q {
            return Err(LyhError::Degree("only (p,p) fields have a real snapshot".into()));
        }
        if self.reality_residual() > 1e-12 * self.max_abs().max(1.0) {
            return Err(LyhError::Invariant("field is not real".into()));
        }
        let zero = Form::zero(self.m);
        let mut modes = Vec::new();
        for (k, v) in &self.modes {
            let nk = neg(k);
            if nk < *k {
                continue;
            }
            let w = self.modes.get(&nk).unwrap_or(&zero);
            let (cos, sin) = if nk == *k {
                (v.clone(), Form::zero(self.m))
            } else {
                (v.add(w), v.sub(w).scale(I))
            };
            modes.push(ModeJson {
                k: k.clone(),
                cos: PPForm::from_ext(&cos, self.p, 1e-10)?.to_json(),
                sin: PPForm::from_ext(&sin, self.p, 1e-10)?.to_json(),
            });
        }
        Ok(FieldJson { m: self.m, p: self.p, cutoff: self.cutoff, modes })
    }

    pub fn from_json(j: &FieldJson) -> Result<Self> {
        let mut f = Self::zero(j.m, j.p, j.p, j.cutoff);
        for mj in &j.modes {
            let cos = PPForm::from_json(&mj.cos)?.to_ext();
            let sin = PPForm::from_json(&mj.sin)?.to_ext();
            let nk = neg(&mj.k);
            if nk == mj.k {
                f.insert(mj.k.clone(), cos)?;
            } else {
                f.insert(mj.k.clone(), cos.sub(&sin.scale(I)).scale(C64::new(0.5, 0.0)))?;
                f.insert(nk, cos.add(&sin.scale(I)).scale(C64::new(0.5, 0.0)))?;
            }
        }
        Ok(f)
    }
}

/// Wire format of a real `(p,p)` field: `φ = Σ cos_k cos(2πk·x) + sin_k sin(2πk·x)`
/// over one mode per `±k` pair.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldJson {
    pub m: usize,
    pub p: usize,
    pub cutoff: usize,
    pub modes: Vec<ModeJson>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModeJson {
    pub k: Mode,
    pub cos: PPFormJson,
    pub sin: PPFormJson,
}

/// Pointwise data of a `(p,p)` field: value, `∂_{z_i}φ`, `∂_{z̄_i}φ` and
/// `∂_{z_i}∂_{z̄_j}φ` (row-major in `(i, j)`).
#[derive(Clone, Debug)]
pub struct Jet {
    pub m: usize,
    pub p: usize,
    pub value: Form,
    pub dz: Vec<Form>,
    pub dzb: Vec<Form>,
    pub ddb: Vec<Form>,
}

impl Jet {
    pub fn zero(m: usize, p: usize) -> Self {
        Self {
            m,
            p,
            value: Form::zero(m),
            dz: vec![Form::zero(m); m],
            dzb: vec![Form::zero(m); m],
            ddb: vec![Form::zero(m); m * m],
        }
    }

    /// Applies a constant-coefficient linear map to every component.
    pub fn map(&self, p: usize, f: impl Fn(&Form) -> Form) -> Self {
        Self {
            m: self.m,
            p,
            value: f(&self.value),
            dz: self.dz.iter().map(&f).collect(),
            dzb: self.dzb.iter().map(&f).collect(),
            ddb: self.ddb.iter().map(&f).collect(),
        }
    }

    /// Jet of `Λφ`.
    pub fn lambda(&self) -> Result<Self> {
        if self.p == 0 {
            return Err(LyhError::Degree("Λ of a (0,0) jet".into()));
        }
        Ok(self.map(self.p - 1, |f| f.lambda()))
    }

    /// Jet of `*φ`.
    pub fn star(&self) -> Self {
        self.map(self.m - self.p, |f| f.star())
    }

    /// Adds a constant form to the value.
    pub fn shifted(&self, c: &Form) -> Self {
        let mut out = self.clone();
        out.value = out.value.add(c);
        out
    }

    /// `(∂*φ)(x) = −Σ_j ι_j ∂_{z̄_j}φ`.
    pub fn del_star(&self) -> Form {
        let mut out = Form::zero(self.m);
        for j in 0..self.m {
            out = out.sub(&self.dzb[j].iota_gen(j));
        }
        out
    }

    /// `(∂̄*φ)(x) = −Σ_j ι_{j̄} ∂_{z_j}φ`.
    pub fn dbar_star(&self) -> Form {
        let mut out = Form::zero(self.m);
        for j in 0..self.m {
            out = out.sub(&self.dz[j].iota_gen(self.m + j));
        }
        out
    }

    /// `(∂̄*∂*φ)(x) = Σ_{ij} ι_{j̄} ι_i ∂_{z_j}∂_{z̄_i}φ`.
    pub fn dbar_star_del_star(&self) -> Form {
        let m = self.m;
        let mut out = Form::zero(m);
        for i in 0..m {
            for j in 0..m {
                out = out.add(&self.ddb[j * m + i].iota_gen(i).iota_gen(m + j));
            }
        }
        out
    }

    /// `(∂*∂̄*φ)(x) = Σ_{ij} ι_i ι_{j̄} ∂_{z_j}∂_{z̄_i}φ`.
    pub fn del_star_dbar_star(&self) -> Form {
        let m = self.m;
        let mut out = Form::zero(m);
        for i in 0..m {
            for j in 0..m {
                out = out.add(&self.ddb[j * m + i].iota_gen(m + j).iota_gen(i));
            }
        }
        out
    }

    /// Comma-convention coefficient of a component at arbitrary index lists.
    fn comma(&self, f: &Form, i: &[usize], j: &[usize]) -> C64 {
        match (sort_with_sign(i), sort_with_sign(j)) {
            (Some((si, a)), Some((sj, b))) => {
                let mask = si.iter().fold(0u32, |acc, &x| acc | 1 << x)
                    | sj.iter().fold(0u32, |acc, &x| acc | 1 << (self.m + x));
                f.get(mask) * ((a * b) as f64) / crate::ppform::plain_factor(self.p)
            }
            _ => ZERO,
        }
    }

    /// Builds a `(p−1,p−1)` form from comma coefficients `c(I', J')`.
    fn from_comma(&self, c: impl Fn(&[usize], &[usize]) -> C64) -> Form {
        let table = SubsetTable::new(self.m, self.p - 1);
        let f = crate::ppform::plain_factor(self.p - 1);
        let mut out = Form::zero(self.m);
        for r in 0..table.len() {
            for s in 0..table.len() {
                let v = c(&table.indices(r), &table.indices(s));
                if v != ZERO {
                    out.set(table.mask(r) | (table.mask(s) << self.m), v * f);
                }
            }
        }
        out
    }

    fn prepend(a: usize, rest: &[usize]) -> Vec<usize> {
        let mut v = vec![a];
        v.extend_from_slice(rest);
        v
    }

    /// `div″_V(φ)_{I',J'} = Σ_{a,j} V^a ∂_{z_j} φ_{aI', jJ'}`.
    pub fn div_dprime_v(&self, v: &[C64]) -> Form {
        let m = self.m;
        self.from_comma(|ip, jp| {
            let mut acc = ZERO;
            for a in 0..m {
                for j in 0..m {
                    acc += v[a] * self.comma(&self.dz[j], &Self::prepend(a, ip), &Self::prepend(j, jp));
                }
            }
            acc
        })
    }

    /// `div′_V̄(φ)_{I',J'} = Σ_{b,i} V̄^b ∂_{z̄_i} φ_{iI', bJ'}`.
    pub fn div_prime_vbar(&self, v: &[C64]) -> Form {
        let m = self.m;
        self.from_comma(|ip, jp| {
            let mut acc = ZERO;
            for b in 0..m {
                for i in 0..m {
                    acc += v[b].conj() * self.comma(&self.dzb[i], &Self::prepend(i, ip), &Self::prepend(b, jp));
                }
            }
            acc
        })
    }

    /// `div″(div′φ)_{I',J'} = Σ_{ij} ∂_{z_j}∂_{z̄_i} φ_{iI', jJ'}`; on the flat torus
    /// the derivatives commute, so this is also `div′(div″φ)`.
    pub fn div_div(&self) -> Form {
        let m = self.m;
        self.from_comma(|ip, jp| {
            let mut acc = ZERO;
            for i in 0..m {
                for j in 0..m {
                    acc += self.comma(&self.ddb[j * m + i], &Self::prepend(i, ip), &Self::prepend(j, jp));
                }
            }
            acc
        })
    }
}

/// `Q(φ, V) = −i∂̄*∂*φ − iι_V∂̄*φ + iι_V̄∂*φ + iι_Vι_V̄φ + Λφ/t` at a point.
pub fn eval_q(jet: &Jet, v: &[C64], t: f64) -> Result<Form> {
    check_q_args(jet, v, t)?;
    let mi = -I;
    let mut q = jet.dbar_star_del_star().scale(mi);
    q = q.add(&jet.dbar_star().iota_holo(v).scale(mi));
    q = q.add(&jet.del_star().iota_anti(v).scale(I));
    q = q.add(&jet.value.iota_anti(v).iota_holo(v).scale(I));
    q = q.add(&jet.value.lambda().scale(C64::new(1.0 / t, 0.0)));
    Ok(q)
}

/// `Q` in the divergence form
/// `½(div″div′ + div′div″)φ + div′_V̄φ + div″_Vφ + φ_{V,V̄} + Λφ/t`.
pub fn eval_q_div(jet: &Jet, v: &[C64], t: f64) -> Result<Form> {
    check_q_args(jet, v, t)?;
    let mut q = jet.div_div();
    q = q.add(&jet.div_prime_vbar(v)).add(&jet.div_dprime_v(v));
    q = q.add(&jet.value.iota_anti(v).iota_holo(v).scale(I));
    q = q.add(&jet.value.lambda().scale(C64::new(1.0 / t, 0.0)));
    Ok(q)
}

fn check_q_args(jet: &Jet, v: &[C64], t: f64) -> Result<()> {
    if !(t > 0.0) {
        return Err(LyhError::Parameter(format!("Q needs t > 0, got {t}")));
    }
    if jet.p == 0 {
        return Err(LyhError::Degree("Q of a (0,0) field".into()));
    }
    if v.len() != jet.m {
        return Err(LyhError::Dimension(format!("V of length {} on C^{}", v.len(), jet.m)));
    }
    Ok(())
}

/// Metric dual `V* = Σ V̄^i dz^i`, the `(1,0)`-form with `ι_V̄ = *(V*∧)*`.
pub fn dual_covector(v: &[C64]) -> Form {
    let conj: Vec<C64> = v.iter().map(|z| z.conj()).collect();
    Form::one_form(v.len(), &conj, &vec![ZERO; v.len()])
}

/// `Q*(ψ, V*) = i∂∂̄ψ + iV*∧∂̄ψ − iV̄*∧∂ψ + iV*∧V̄*∧ψ + ω∧ψ/t` at a point, from the jet of `ψ`.
pub fn eval_q_dual(psi: &Jet, vstar: &Form, t: f64) -> Result<Form> {
    if !(t > 0.0) {
        return Err(LyhError::Parameter(format!("Q* needs t > 0, got {t}")));
    }
    let m = psi.m;
    let vbar = vstar.conj();
    let mut q = Form::zero(m);
    for i in 0..m {
        for j in 0..m {
            q = q.add(&psi.ddb[i * m + j].wedge_gen(m + j).wedge_gen(i).scale(I));
        }
    }
    let mut dbar = Form::zero(m);
    let mut del = Form::zero(m);
    for j in 0..m {
        dbar = dbar.add(&psi.dzb[j].wedge_gen(m + j));
        del = del.add(&psi.dz[j].wedge_gen(j));
    }
    q = q.add(&vstar.wedge(&dbar).scale(I));
    q = q.sub(&vbar.wedge(&del).scale(I));
    q = q.add(&vstar.wedge(&vbar).wedge(&psi.value).scale(I));
    q = q.add(&psi.value.lefschetz().scale(C64::new(1.0 / t, 0.0)));
    Ok(q)
}

/// `max |Q(φ, V) − *Q*(*φ, V*)|` over the given points.
pub fn duality_check(field: &SpectralField, v: &[C64], t: f64, points: &[Vec<f64>]) -> Result<f64> {
    let vstar = dual_covector(v);
    points.iter().try_fold(0.0f64, |acc, x| {
        let jet = field.jet_at(x);
        let lhs = eval_q(&jet, v, t)?;
        let rhs = eval_q_dual(&jet.star(), &vstar, t)?.star();
        Ok(acc.max(lhs.sub(&rhs).max_abs()))
    })
}

/// Residuals of the Kähler identities `∂Λ − Λ∂ = −i∂̄*` and `∂̄Λ − Λ∂̄ = i∂*`,
/// plus the commutators `[Λ, ∂*]`, `[Λ, ∂̄*]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KahlerIdentityResiduals {
    pub del: f64,
    pub dbar: f64,
    pub lambda_del_star: f64,
    pub lambda_dbar_star: f64,
}

impl KahlerIdentityResiduals {
    pub fn max(&self) -> f64 {
        self.del.max(self.dbar).max(self.lambda_del_star).max(self.lambda_dbar_star)
    }
}

/// Requires `1 ≤ p, q ≤ m − 1` so that every term is defined.
pub fn kahler_identities_check(phi: &SpectralField) -> Result<KahlerIdentityResiduals> {
    let (p, q) = phi.bidegree();
    let m = phi.m();
    if p == 0 || q == 0 || p >= m || q >= m {
        return Err(LyhError::Degree(format!("identities need 1 ≤ p, q < m, got ({p},{q}) on C^{m}")));
    }
    let scale = phi.l2_norm().max(1e-300);
    let r1 = phi.lambda()?.del()?.sub(&phi.del()?.lambda()?)?.axpy(I, &phi.dbar_star()?)?;
    let r2 = phi.lambda()?.dbar()?.sub(&phi.dbar()?.lambda()?)?.axpy(-I, &phi.del_star()?)?;
    let mut r3 = 0.0;
    let mut r4 = 0.0;
    if p >= 2 {
        r3 = phi.del_star()?.lambda()?.sub(&phi.lambda()?.del_star()?)?.l2_norm();
    }
    if q >= 2 {
        r4 = phi.dbar_star()?.lambda()?.sub(&phi.lambda()?.dbar_star()?)?.l2_norm();
    }
    let norm_of = |f: &SpectralField| f.l2_norm() / scale;
    Ok(KahlerIdentityResiduals {
        del: norm_of(&r1),
        dbar: norm_of(&r2),
        lambda_del_star: r3 / scale,
        lambda_dbar_star: r4 / scale,
    })
}

/// Pairing of a `(p−1,p−1)` form with a frame of `p−1` vectors.
pub fn paired(q: &Form, p: usize, frame: &[Vec<C64>]) -> Result<f64> {
    let f = PPForm::from_ext(q, p, 1e-9 * q.max_abs().max(1.0))?;
    if p == 0 {
        return Ok(f.get_ranked(0, 0).re);
    }
    f.eval(&FrameTuple::new(frame.to_vec())?)
}

/// Minimizer of `V ↦ ⟨Q(φ, V), frame⟩`.
#[derive(Clone, Debug, PartialEq)]
pub struct OptimalV {
    pub v: Vec<C64>,
    pub value: f64,
    /// The Hermitian part was singular and a pseudo-inverse was used.
    pub singular: bool,
}

/// The frame pairing of `Q` is `c + 2 Re(gᴴV) + VᴴHV`; returns `V = −H⁺g`.
pub fn optimal_v(jet: &Jet, frame: &[Vec<C64>], t: f64) -> Result<OptimalV> {
    let m = jet.m;
    let pm1 = jet.p - 1;
    let zero = vec![ZERO; m];
    let q_at = |v: &[C64]| eval_q(jet, v, t).and_then(|q| paired(&q, pm1, frame));
    let quad = |v: &[C64]| {
        let f = jet.value.iota_anti(v).iota_holo(v).scale(I);
        paired(&f, pm1, frame)
    };
    let c = q_at(&zero)?;
    let unit = |a: usize, s: C64| {
        let mut v = zero.clone();
        v[a] = s;
        v
    };
    let one = C64::new(1.0, 0.0);
    let diag: Vec<f64> = (0..m).map(|a| quad(&unit(a, one))).collect::<Result<_>>()?;
    let mut h = CxMatrix::zeros(m, m);
    for a in 0..m {
        h[(a, a)] = C64::new(diag[a], 0.0);
        for b in a + 1..m {
            let mut v = unit(a, one);
            v[b] = one;
            let re = (quad(&v)? - diag[a] - diag[b]) / 2.0;
            v[b] = I;
            let im = -(quad(&v)? - diag[a] - diag[b]) / 2.0;
            h[(a, b)] = C64::new(re, im);
            h[(b, a)] = C64::new(re, -im);
        }
    }
    let mut g = vec![ZERO; m];
    for a in 0..m {
        let lr = q_at(&unit(a, one))? - c - diag[a];
        let li = q_at(&unit(a, I))? - c - diag[a];
        g[a] = C64::new(lr, li) * 0.5;
    }
    let (x, singular) = hermitian_pinv_solve(&h, &g, 1e-12);
    let v: Vec<C64> = x.iter().map(|z| -z).collect();
    let value = q_at(&v)?;
    Ok(OptimalV { v, value, singular })
}

/// `min_V ⟨Q(φ + εω^p, V), frame⟩` at `ε = ε₀` and `2ε₀`, extrapolated linearly
/// to `ε = 0`; `ε₀ = eps_rel·|φ(x)|`.
pub fn min_paired_q(jet: &Jet, frame: &[Vec<C64>], t: f64, eps_rel: f64) -> Result<(f64, OptimalV)> {
    if eps_rel == 0.0 {
        let o = optimal_v(jet, frame, t)?;
        return Ok((o.value, o));
    }
    let eps = eps_rel * jet.value.norm().max(1e-300);
    let om = PPForm::omega_pow(jet.m, jet.p).to_ext();
    let a = optimal_v(&jet.shifted(&om.scale(C64::new(eps, 0.0))), frame, t)?;
    let b = optimal_v(&jet.shifted(&om.scale(C64::new(2.0 * eps, 0.0))), frame, t)?;
    Ok((2.0 * a.value - b.value, a))
}

/// Seeded subset of the `grid^{2m}` equispaced points of the unit cell.
pub fn sample_points(m: usize, grid: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let total = (grid as u64).pow(2 * m as u32);
    let mut r = rng::stream(rng::derive_seed(seed, "torus-points"), 0);
    let mut picked = std::collections::BTreeSet::new();
    let target = (count as u64).min(total);
    while (picked.len() as u64) < target {
        picked.insert((rng::uniform(&mut r, 0.0, total as f64) as u64).min(total - 1));
    }
    picked
        .into_iter()
        .map(|mut idx| {
            (0..2 * m)
                .map(|_| {
                    let c = idx % grid as u64;
                    idx /= grid as u64;
                    c as f64 / grid as f64
                })
                .collect()
        })
        .collect()
}

/// Sample frames for pairing a `(p−1,p−1)` form: the standard coordinate
/// frames followed by `extra` random unitary ones.
pub fn sample_frames(m: usize, p: usize, extra: usize, seed: u64) -> Vec<Vec<Vec<C64>>> {
    let k = p - 1;
    let mut out = Vec::new();
    let table = SubsetTable::new(m, k);
    for r in 0..table.len() {
        out.push(
            table
                .indices(r)
                .iter()
                .map(|&a| (0..m).map(|b| C64::new(if a == b { 1.0 } else { 0.0 }, 0.0)).collect())
                .collect(),
        );
    }
    if k > 0 {
        let mut r = rng::stream(rng::derive_seed(seed, "torus-frames"), 0);
        for _ in 0..extra {
            let f = rng::unitary_frame(&mut r, m, k);
            out.push((0..k).map(|c| (0..m).map(|a| f[(a, c)]).collect()).collect());
        }
    }
    out
}

/// Random complex `(p, q)` field with `n_modes` modes in the cutoff box.
pub fn random_field(m: usize, p: usize, q: usize, cutoff: usize, n_modes: usize, seed: u64) -> SpectralField {
    let mut r = rng::stream(rng::derive_seed(seed, "torus-field"), 0);
    let mut f = SpectralField::zero(m, p, q, cutoff);
    let hp = SubsetTable::new(m, p);
    let hq = SubsetTable::new(m, q);
    for _ in 0..n_modes {
        let k = random_mode(&mut r, m, cutoff);
        let mut form = Form::zero(m);
        for a in 0..hp.len() {
            for b in 0..hq.len() {
                form.set(hp.mask(a) | (hq.mask(b) << m), rng::complex_normal(&mut r));
            }
        }
        f.insert(k, form).expect("mode within cutoff");
    }
    f
}

fn random_mode(r: &mut rng::Stream, m: usize, cutoff: usize) -> Mode {
    let c = cutoff as f64;
    (0..2 * m)
        .map(|_| (rng::uniform(r, -c, c + 1.0).floor() as i32).clamp(-(cutoff as i32), cutoff as i32))
        .collect()
}

/// Real `(p,p)` field `Σ_r Re(e^{2πi k_r·x} φ_r)` with random `φ_r`.
pub fn random_real_field(m: usize, p: usize, cutoff: usize, n_modes: usize, seed: u64) -> SpectralField {
    let f = random_field(m, p, p, cutoff, n_modes, seed);
    let mut out = SpectralField::zero(m, p, p, cutoff);
    for (k, v) in f.modes() {
        out.insert(k.clone(), v.scale(C64::new(0.5, 0.0))).expect("same shape");
        out.insert(neg(k), v.conj().scale(C64::new(0.5, 0.0))).expect("same shape");
    }
    out
}

/// `Σ_r ε_r cos(2πk_r·x + θ_r) P_r` with its certificate
/// `Σ|ε_r| sup P_r` over unitary frames.
fn add_cosine_term(f: &mut SpectralField, k: Mode, theta: f64, form: &Form) -> Result<()> {
    let e = C64::from_polar(0.5, theta);
    if k.iter().all(|&a| a == 0) {
        return f.insert(k, form.scale(C64::new(theta.cos(), 0.0)));
    }
    f.insert(neg(&k), form.scale(e.conj()))?;
    f.insert(k, form.scale(e))
}

/// A positive initial datum with its certified lower bound.
#[derive(Clone, Debug)]
pub struct PositiveDatum {
    pub field: SpectralField,
    /// Lower bound of `φ(x)(v_1..v_p)` over unitary frames and all `x`.
    pub certified_min: f64,
}

/// `ω^p + Σ_r ε_r cos(2πk_r·x + θ_r) P_r` with `P_r` elementary positive
/// forms of unit covectors and `Σ|ε_r| = (1 − margin)·p!`, so that the datum
/// is Lelong positive with minimum at least `margin·p!`.
pub fn positive_datum(m: usize, p: usize, cutoff: usize, terms: usize, margin: f64, seed: u64) -> Result<PositiveDatum> {
    if !(0.0..=1.0).contains(&margin) || p == 0 || p > m {
        return Err(LyhError::Parameter(format!("margin {margin}, p = {p}")));
    }
    let mut r = rng::stream(rng::derive_seed(seed, "torus-positive"), 0);
    let pf = factorial(p);
    let mut field = SpectralField::constant(&PPForm::omega_pow(m, p).to_ext(), p, p, cutoff)?;
    let raw: Vec<f64> = (0..terms).map(|_| rng::uniform(&mut r, 0.1, 1.0)).collect();
    let total: f64 = raw.iter().sum();
    for w in raw {
        let eps = w / total * (1.0 - margin) * pf;
        let mut k = random_mode(&mut r, m, cutoff);
        if k.iter().all(|&a| a == 0) {
            k[0] = 1;
        }
        let alphas: Vec<Vec<C64>> = (0..p).map(|_| rng::unit_vector(&mut r, m)).collect();
        let form = PPForm::elementary_positive(m, &alphas).to_ext().scale(C64::new(eps, 0.0));
        let theta = rng::uniform(&mut r, 0.0, 2.0 * PI);
        add_cosine_term(&mut field, k, theta, &form)?;
    }
    Ok(PositiveDatum { field, certified_min: margin * pf })
}

/// `ω^p + Σ_r ε_r i∂∂̄ cos(2πk_r·x + θ_r) ∧ ω^{p−1}`, which is `d`-closed.
/// With `δ_r = Σ_j ∂_{z_j}` symbol, the perturbation is bounded on unitary
/// frames by `|ε_r| |δ_r|² (p−1)!`; amplitudes use `(1 − margin)·p!` of that budget.
pub fn closed_positive_datum(m: usize, p: usize, cutoff: usize, terms: usize, margin: f64, seed: u64) -> Result<PositiveDatum> {
    if !(0.0..=1.0).contains(&margin) || p == 0 || p > m {
        return Err(LyhError::Parameter(format!("margin {margin}, p = {p}")));
    }
    let mut r = rng::stream(rng::derive_seed(seed, "torus-closed"), 0);
    let pf = factorial(p);
    let om1 = PPForm::omega_pow(m, p - 1).to_ext();
    let mut field = SpectralField::constant(&PPForm::omega_pow(m, p).to_ext(), p, p, cutoff)?;
    let raw: Vec<f64> = (0..terms).map(|_| rng::uniform(&mut r, 0.1, 1.0)).collect();
    let total: f64 = raw.iter().sum();
    for w in raw {
        let mut k = random_mode(&mut r, m, cutoff);
        if k.iter().all(|&a| a == 0) {
            k[0] = 1;
        }
        let d = holo_symbol(&k);
        let dnorm2: f64 = d.iter().map(|z| z.norm_sqr()).sum();
        let eps = w / total * (1.0 - margin) * pf / (dnorm2 * factorial(p - 1));
        // i∂∂̄ e^{2πik·x} = i ξ^{1,0} ∧ ξ^{0,1} e^{2πik·x}.
        let zero = vec![ZERO; m];
        let ddbar = Form::one_form(m, &d, &zero)
            .wedge(&Form::one_form(m, &zero, &anti_symbol(&k)))
            .scale(I);
        let form = ddbar.wedge(&om1).scale(C64::new(eps, 0.0));
        let theta = rng::uniform(&mut r, 0.0, 2.0 * PI);
        // cos(θ + 2πk·x) has coefficients e^{±iθ}/2 on ±k, and ξ(−k) = −ξ(k) keeps ddbar even.
        add_cosine_term(&mut field, k, theta, &form)?;
    }
    Ok(PositiveDatum { field, certified_min: margin * pf })
}

/// The heat kernel of `∂_t = Σ_j ∂_{z_j}∂_{z̄_j}` on the torus, times the volume
/// form: `φ̂_k = e^{−π²|k|² t} vol` for `|k|_∞ ≤ cutoff`. Near `x = 0` and for
/// small `t` it is the Euclidean Gaussian `(πt)^{−m} e^{−|z|²/t} vol`.
pub fn periodized_gaussian(m: usize, t: f64, cutoff: usize) -> Result<SpectralField> {
    if !(t > 0.0) {
        return Err(LyhError::Parameter(format!("Gaussian width t = {t}")));
    }
    let vol = Form::volume(m);
    let mut f = SpectralField::zero(m, m, m, cutoff);
    let c = cutoff as i32;
    let side = (2 * c + 1) as usize;
    let total = side.pow(2 * m as u32);
    for mut idx in 0..total {
        let k: Mode = (0..2 * m)
            .map(|_| {
                let a = (idx % side) as i32 - c;
                idx /= side;
                a
            })
            .collect();
        let w = (-eigenvalue(&k) * t).exp();
        if w > 1e-300 {
            f.insert(k, vol.scale(C64::new(w, 0.0)))?;
        }
    }
    Ok(f)
}

/// Jet of `ψ vol` for the Euclidean Gaussian `ψ = (πt)^{−m} e^{−|z|²/t}`
/// at `z` (complex coordinates).
pub fn euclidean_gaussian_jet(m: usize, t: f64, z: &[C64]) -> Jet {
    let r2: f64 = z.iter().map(|w| w.norm_sqr()).sum();
    let psi = (PI * t).powi(-(m as i32)) * (-r2 / t).exp();
    let vol = Form::volume(m);
    let mut jet = Jet::zero(m, m);
    jet.value = vol.scale(C64::new(psi, 0.0));
    for i in 0..m {
        // ∂_{z_i}|z|² = z̄_i, ∂_{z̄_i}|z|² = z_i.
        jet.dz[i] = vol.scale(-z[i].conj() / t * psi);
        jet.dzb[i] = vol.scale(-z[i] / t * psi);
        for j in 0..m {
            let delta = if i == j { 1.0 } else { 0.0 };
            let v = (z[i].conj() * z[j] / (t * t) - delta / t) * psi;
            jet.ddb[i * m + j] = vol.scale(v);
        }
    }
    jet
}

/// `Δ log ψ + m/t` for a scalar `ψ`, from the jet of `ψ vol`; `Δ = Σ_j ∂_{z_j}∂_{z̄_j}`.
pub fn li_yau_scalar(jet: &Jet, t: f64) -> f64 {
    let m = jet.m;
    let full = (1u32 << (2 * m)) - 1;
    let vc = Form::volume_coeff(m);
    let g = |f: &Form| f.get(full) / vc;
    let psi = g(&jet.value).re;
    let mut lap = 0.0;
    for j in 0..m {
        let d = g(&jet.dz[j]);
        let db = g(&jet.dzb[j]);
        lap += (g(&jet.ddb[j * m + j]) / psi - d * db / (psi * psi)).re;
    }
    lap + m as f64 / t
}

/// One row of a `Q` report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QReportRow {
    pub t: f64,
    pub point: String,
    pub frame_id: usize,
    pub min_paired_q: f64,
    pub v_used: String,
}

/// Minimum of the frame pairing of `Q` with optimal `V` over sample points and frames.
#[derive(Clone, Debug)]
pub struct QReport {
    pub min: f64,
    pub rows: Vec<QReportRow>,
}

fn fmt_point(x: &[f64]) -> String {
    x.iter().map(|v| format!("{v}")).collect::<Vec<_>>().join(";")
}

fn fmt_vec(v: &[C64]) -> String {
    v.iter().map(|z| format!("{}{:+}i", z.re, z.im)).collect::<Vec<_>>().join(";")
}

/// Evolves `phi0` to `t` and minimizes the paired `Q` at every point and frame.
pub fn q_report(
    phi0: &SpectralField,
    t: f64,
    points: &[Vec<f64>],
    frames: &[Vec<Vec<C64>>],
    eps_rel: f64,
) -> Result<QReport> {
    let phi = phi0.heat_evolve(t)?;
    let rows: Vec<Vec<QReportRow>> = points
        .par_iter()
        .map(|x| {
            let jet = phi.jet_at(x);
            frames
                .iter()
                .enumerate()
                .map(|(fid, fr)| {
                    let (value, o) = min_paired_q(&jet, fr, t, eps_rel)?;
                    Ok(QReportRow {
                        t,
                        point: fmt_point(x),
                        frame_id: fid,
                        min_paired_q: value,
                        v_used: fmt_vec(&o.v),
                    })
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let rows: Vec<QReportRow> = rows.into_iter().flatten().collect();
    let min = rows.iter().map(|r| r.min_paired_q).fold(f64::INFINITY, f64::min);
    Ok(QReport { min, rows })
}

/// Minimum Lelong positivity value over `(t, x)` along the heat flow.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PositivityReport {
    pub min: f64,
    /// `(t, min over points)` per time.
    pub per_time: Vec<(f64, f64)>,
}

pub fn positivity_preservation_run(
    phi0: &SpectralField,
    times: &[f64],
    points: &[Vec<f64>],
    budget: &PositivityBudget,
) -> Result<PositivityReport> {
    let (p, q) = phi0.bidegree();
    if p != q {
        return Err(LyhError::Degree("positivity needs a (p,p) field".into()));
    }
    let mut per_time = Vec::new();
    for &t in times {
        let phi = phi0.heat_evolve(t)?;
        let vals: Vec<f64> = points
            .par_iter()
            .map(|x| {
                let f = PPForm::from_ext(&phi.value_at(x), p, 1e-9 * phi.max_abs().max(1.0))?;
                Ok(lelong_positivity(&f, budget).min_value)
            })
            .collect::<Result<_>>()?;
        per_time.push((t, vals.into_iter().fold(f64::INFINITY, f64::min)));
    }
    let min = per_time.iter().map(|x| x.1).fold(f64::INFINITY, f64::min);
    Ok(PositivityReport { min, per_time })
}

/// `t ↦ t ∫ Λφ(t) ∧ ω^{m−p+1}` and its forward-difference slopes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonotonicitySeries {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub slopes: Vec<f64>,
}

impl MonotonicitySeries {
    /// Largest relative decrease between consecutive values (0 if nondecreasing).
    pub fn worst_decrease(&self) -> f64 {
        self.values
            .windows(2)
            .map(|w| ((w[0] - w[1]) / w[0].abs().max(1e-300)).max(0.0))
            .fold(0.0, f64::max)
    }
}

pub fn monotonicity_check(phi0: &SpectralField, times: &[f64]) -> Result<MonotonicitySeries> {
    let (p, q) = phi0.bidegree();
    let m = phi0.m();
    if p != q || p == 0 {
        return Err(LyhError::Degree("monotonicity needs a (p,p) field with p ≥ 1".into()));
    }
    let closed = phi0.closedness_residual();
    if closed > 1e-12 * phi0.max_abs().max(1.0) {
        return Err(LyhError::Precondition(format!("φ₀ is not d-closed (residual {closed:.3e})")));
    }
    let full = (1u32 << (2 * m)) - 1;
    let vc = Form::volume_coeff(m);
    let zero_mode = vec![0; 2 * m];
    let mut values = Vec::with_capacity(times.len());
    for &t in times {
        let phi = phi0.heat_evolve(t)?;
        let psi = match phi.coefficient(&zero_mode) {
            Some(f) => f.lambda(),
            None => Form::zero(m),
        };
        let mut top = psi;
        for _ in 0..(m - p + 1) {
            top = top.lefschetz();
        }
        values.push(t * (top.get(full) / vc).re);
    }
    let slopes = times
        .windows(2)
        .zip(values.windows(2))
        .map(|(t, v)| (v[1] - v[0]) / (t[1] - t[0]))
        .collect();
    Ok(MonotonicitySeries { times: times.to_vec(), values, slopes })
}
