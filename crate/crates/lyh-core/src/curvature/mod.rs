//! Algebraic curvature operators: Kähler `R_{ij̄kl̄}`, Riemannian `R_{abcd}`,
//! the reaction term `KB`, `Rm^#`, and the identification of `C̃_p` with `C_{2p}`.

pub mod identify;
pub mod kahler;
pub mod kb;
pub mod models;
pub mod riem;
pub mod sharp;

pub use kahler::{KahlerCurvature, KahlerJson, OneOneVector};
pub use kb::{kb_pairing, kb_reaction};
pub use riem::RiemCurvature;
pub use sharp::{rm_sharp, second_variation_positivity, sharp_nonneg_at_null};
