//! Certified membership verdicts shared by the positivity and cone searches.

use crate::scalar::C64;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Status {
    In,
    Out,
    Inconclusive,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::In => "In",
            Status::Out => "Out",
            Status::Inconclusive => "Inconclusive",
        }
    }
}

impl std::fmt::Display for Status {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Complex vector serialized as `[[re, im], ...]`.
pub type VecJson = Vec<[f64; 2]>;

pub fn vec_to_json(v: &[C64]) -> VecJson {
    v.iter().map(|z| [z.re, z.im]).collect()
}

pub fn vec_from_json(v: &VecJson) -> Vec<C64> {
    v.iter().map(|[re, im]| C64::new(*re, *im)).collect()
}

/// Evidence attached to a verdict.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Witness {
    /// Tangent frame `v_1..v_p` for a Lelong evaluation.
    Frame { vectors: Vec<VecJson> },
    /// Decomposable vector `Σ X_k ∧ Ȳ_k` (Kähler) or `Σ Z_k ∧ W_k` (Riemannian).
    Pairs { pairs: Vec<(VecJson, VecJson)> },
    /// Single vector, e.g. an eigenvector of an exact check.
    Vector { vector: VecJson },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConeVerdict {
    pub status: Status,
    pub min_value: f64,
    pub witness: Option<Witness>,
    pub restarts_used: usize,
    /// True when the verdict came from an exact eigenvalue or scalar check.
    pub exact: bool,
}

impl ConeVerdict {
    pub fn is_in(&self) -> bool {
        self.status == Status::In
    }

    pub fn is_out(&self) -> bool {
        self.status == Status::Out
    }
}
