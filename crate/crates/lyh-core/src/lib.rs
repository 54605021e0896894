//! Numerical laboratory for Li-Yau-Hamilton estimates of positive `(p,p)`-forms.
//!
//! The tensor layer is generic over the real scalar; everything built on top
//! of it works in `f64`.

pub mod cones;
pub mod curvature;
pub mod error;
pub mod flow;
pub mod lyh;
pub mod mok;
pub mod ppform;
pub mod rng;
pub mod scalar;
pub mod tensor;
pub mod torus;
pub mod verdict;

pub use error::{LyhError, Result};
pub use ppform::{FrameTuple, PPForm};
pub use scalar::C64;
pub use verdict::{ConeVerdict, Status, Witness};

/// Crate version recorded in every report row.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Double-precision complex matrix.
pub type CxMat = tensor::CxMatrix<f64>;
/// Double-precision element of `so(n, C)`.
pub type Skew = tensor::SkewC<f64>;
/// Double-precision pointwise differential form.
pub type Form = tensor::ExtForm<f64>;
