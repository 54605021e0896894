//! Complex linear algebra, multi-index bookkeeping, the exterior algebra of
//! `C^m`, and the Lie calculus on `so(n, C)`.

pub mod exterior;
pub mod linalg;
pub mod matrix;
pub mod multi_index;
pub mod skew;

pub use exterior::ExtForm;
pub use matrix::CxMatrix;
pub use multi_index::{MultiIndex, SubsetTable};
pub use skew::{ad, exp_ad_consistency, oneone_to_skew, SkewC};
