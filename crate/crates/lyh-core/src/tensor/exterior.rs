//! Dense exterior algebra on the complexified cotangent space of `C^m`.
//!
//! Generators are `dz^1..dz^m` (bits `0..m`) followed by `dz̄^1..dz̄^m`
//! (bits `m..2m`). A basis element is a bitmask; its generators are wedged in
//! increasing bit order. The coframe `{dz^j, dz̄^j}` is orthonormal for the
//! Hermitian inner product (flat metric with `g_{ij̄} = δ_ij`).

use crate::scalar::{ci, czero, i_pow, sign_pow, Cx, Real};
use crate::tensor::multi_index::merge_sign;

/// A (possibly inhomogeneous) differential form at a point.
#[derive(Clone, Debug, PartialEq)]
pub struct ExtForm<T: Real> {
    m: usize,
    c: Vec<Cx<T>>,
}

/// Bidegree `(p, q)` of a basis mask.
#[inline]
pub fn bidegree(m: usize, mask: u32) -> (usize, usize) {
    let low = mask & ((1 << m) - 1);
    (
        (low.count_ones()) as usize,
        (mask >> m).count_ones() as usize,
    )
}

/// Mask of `dz^I ∧ dz̄^J` from holomorphic and antiholomorphic masks.
#[inline]
pub fn join_mask(m: usize, holo: u32, anti: u32) -> u32 {
    holo | (anti << m)
}

/// Swaps holomorphic and antiholomorphic generators, returning the new mask and
/// the sign of reordering the conjugated generators into increasing order.
pub fn conj_mask(m: usize, mask: u32) -> (u32, i32) {
    let holo = mask & ((1 << m) - 1);
    let anti = mask >> m;
    // Conjugated list reads dz̄^{holo...} then dz^{anti...}; sorting moves every
    // dz^{anti} past every dz̄^{holo}.
    let swapped = anti | (holo << m);
    let sign = sign_pow::<f64>((holo.count_ones() * anti.count_ones()) as i64) as i32;
    (swapped, sign)
}

impl<T: Real> ExtForm<T> {
    pub fn zero(m: usize) -> Self {
        assert!(m <= 8, "exterior algebra limited to m <= 8");
        Self {
            m,
            c: vec![czero(); 1 << (2 * m)],
        }
    }

    pub fn basis(m: usize, mask: u32, coeff: Cx<T>) -> Self {
        let mut f = Self::zero(m);
        f.c[mask as usize] = coeff;
        f
    }

    /// `Σ a_j dz^j + Σ b_j dz̄^j`.
    pub fn one_form(m: usize, holo: &[Cx<T>], anti: &[Cx<T>]) -> Self {
        let mut f = Self::zero(m);
        for j in 0..m {
            f.c[1 << j] = holo[j];
            f.c[1 << (m + j)] = anti[j];
        }
        f
    }

    /// The Kähler form `ω = i Σ dz^j ∧ dz̄^j`.
    pub fn omega(m: usize) -> Self {
        let mut f = Self::zero(m);
        for j in 0..m {
            f.c[((1 << j) | (1 << (m + j))) as usize] = ci();
        }
        f
    }

    /// Coefficient of `dz^1∧..∧dz^m∧dz̄^1∧..∧dz̄^m` in the volume form `ω^m/m!`.
    pub fn volume_coeff(m: usize) -> Cx<T> {
        i_pow::<T>(m as i64) * sign_pow::<T>((m * (m.saturating_sub(1)) / 2) as i64)
    }

    pub fn volume(m: usize) -> Self {
        Self::basis(m, (1u32 << (2 * m)) - 1, Self::volume_coeff(m))
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn coeffs(&self) -> &[Cx<T>] {
        &self.c
    }

    pub fn coeffs_mut(&mut self) -> &mut [Cx<T>] {
        &mut self.c
    }

    pub fn get(&self, mask: u32) -> Cx<T> {
        self.c[mask as usize]
    }

    pub fn set(&mut self, mask: u32, v: Cx<T>) {
        self.c[mask as usize] = v;
    }

    pub fn add_at(&mut self, mask: u32, v: Cx<T>) {
        self.c[mask as usize] = self.c[mask as usize] + v;
    }

    pub fn is_zero(&self) -> bool {
        self.c.iter().all(|z| *z == czero())
    }

    fn nonzero(&self) -> impl Iterator<Item = (u32, Cx<T>)> + '_ {
        self.c
            .iter()
            .enumerate()
            .filter(|(_, z)| **z != czero())
            .map(|(k, z)| (k as u32, *z))
    }

    pub fn scale(&self, s: Cx<T>) -> Self {
        Self {
            m: self.m,
            c: self.c.iter().map(|&z| z * s).collect(),
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        assert_eq!(self.m, o.m);
        Self {
            m: self.m,
            c: self.c.iter().zip(&o.c).map(|(&a, &b)| a + b).collect(),
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        assert_eq!(self.m, o.m);
        Self {
            m: self.m,
            c: self.c.iter().zip(&o.c).map(|(&a, &b)| a - b).collect(),
        }
    }

    pub fn axpy(&mut self, s: Cx<T>, o: &Self) {
        for (a, &b) in self.c.iter_mut().zip(&o.c) {
            *a = *a + s * b;
        }
    }

    pub fn wedge(&self, o: &Self) -> Self {
        assert_eq!(self.m, o.m);
        let mut out = Self::zero(self.m);
        let lhs: Vec<_> = self.nonzero().collect();
        let rhs: Vec<_> = o.nonzero().collect();
        for &(a, x) in &lhs {
            for &(b, y) in &rhs {
                if a & b == 0 {
                    let s = T::from(merge_sign(a, b)).unwrap();
                    out.c[(a | b) as usize] = out.c[(a | b) as usize] + x * y * s;
                }
            }
        }
        out
    }

    /// `e_g ∧ self` for a single generator.
    pub fn wedge_gen(&self, g: usize) -> Self {
        let bit = 1u32 << g;
        let mut out = Self::zero(self.m);
        for (a, x) in self.nonzero() {
            if a & bit == 0 {
                let below = (a & (bit - 1)).count_ones();
                out.c[(a | bit) as usize] = x * sign_pow::<T>(below as i64);
            }
        }
        out
    }

    /// Interior product with generator `g`: the adjoint of `e_g ∧`.
    pub fn iota_gen(&self, g: usize) -> Self {
        let bit = 1u32 << g;
        let mut out = Self::zero(self.m);
        for (a, x) in self.nonzero() {
            if a & bit != 0 {
                let below = (a & (bit - 1)).count_ones();
                out.c[(a ^ bit) as usize] = x * sign_pow::<T>(below as i64);
            }
        }
        out
    }

    /// `ι_V = Σ V^i ι_i`, contracting holomorphic slots.
    pub fn iota_holo(&self, v: &[Cx<T>]) -> Self {
        let mut out = Self::zero(self.m);
        for (i, &vi) in v.iter().enumerate() {
            if vi != czero() {
                out.axpy(vi, &self.iota_gen(i));
            }
        }
        out
    }

    /// `ι_V̄ = Σ conj(V^j) ι_{j̄}`, contracting antiholomorphic slots.
    pub fn iota_anti(&self, v: &[Cx<T>]) -> Self {
        let mut out = Self::zero(self.m);
        for (j, &vj) in v.iter().enumerate() {
            if vj != czero() {
                out.axpy(vj.conj(), &self.iota_gen(self.m + j));
            }
        }
        out
    }

    /// `L = ω ∧ ·`.
    pub fn lefschetz(&self) -> Self {
        let mut out = Self::zero(self.m);
        for j in 0..self.m {
            out.axpy(ci(), &self.wedge_gen(self.m + j).wedge_gen(j));
        }
        out
    }

    /// `Λ`, the adjoint of `L`.
    pub fn lambda(&self) -> Self {
        let mut out = Self::zero(self.m);
        for j in 0..self.m {
            out.axpy(-ci::<T>(), &self.iota_gen(j).iota_gen(self.m + j));
        }
        out
    }

    /// Complex conjugate form.
    pub fn conj(&self) -> Self {
        let mut out = Self::zero(self.m);
        for (a, x) in self.nonzero() {
            let (b, s) = conj_mask(self.m, a);
            out.c[b as usize] = x.conj() * T::from(s).unwrap();
        }
        out
    }

    /// C-linear Hodge star: `α ∧ *β = ⟨α, β̄⟩ vol` with the bilinear pairing.
    pub fn star(&self) -> Self {
        let full = (1u32 << (2 * self.m)) - 1;
        let vc = Self::volume_coeff(self.m);
        let mut out = Self::zero(self.m);
        for (b, x) in self.nonzero() {
            let (bc, s) = conj_mask(self.m, b);
            let comp = full ^ bc;
            let sigma = merge_sign(bc, comp);
            out.c[comp as usize] = x * vc * T::from(s * sigma).unwrap();
        }
        out
    }

    /// Keeps only the `(p, q)` component.
    pub fn project(&self, p: usize, q: usize) -> Self {
        let mut out = Self::zero(self.m);
        for (a, x) in self.nonzero() {
            if bidegree(self.m, a) == (p, q) {
                out.c[a as usize] = x;
            }
        }
        out
    }

    /// Hermitian inner product `Σ a_K conj(b_K)`.
    pub fn inner(&self, o: &Self) -> Cx<T> {
        self.c
            .iter()
            .zip(&o.c)
            .fold(czero(), |acc, (&a, &b)| acc + a * b.conj())
    }

    pub fn norm(&self) -> T {
        self.c
            .iter()
            .fold(T::zero(), |acc, z| acc + z.norm_sqr())
            .sqrt()
    }

    pub fn max_abs(&self) -> T {
        self.c.iter().fold(T::zero(), |acc, z| acc.max(z.norm()))
    }
}
