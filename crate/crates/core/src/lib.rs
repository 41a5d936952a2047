//! Carnot group arithmetic and the constructive pieces of snowflake embeddings.
//!
//! The crate is organised bottom-up:
//!
//! * [`algebra`], [`poly`], [`fields`]: stratified Lie algebras in exponential
//!   coordinates, the Baker–Campbell–Hausdorff product and left-invariant fields.
//! * [`nets`], [`geodesic`]: nets, colorings, doubling diagnostics and
//!   Carnot–Carathéodory distance estimates.
//! * [`multilinear`]: Gram determinants, pseudoinverses, Gram–Schmidt.
//! * [`frame`]: Lipschitz orthonormal frame extension via resampling.
//! * [`oscillator`]: the Veronese map and its pasted, locally free version.
//! * [`embed`]: Weierstrass sums, the explicit bilinear solve, low-pass filters.
//! * [`harness`]: discrete balls, distortion, sweeps and reports.

pub mod algebra;
pub mod commands;
pub mod embed;
pub mod error;
pub mod fields;
pub mod frame;
pub mod geodesic;
pub mod harness;
pub mod multilinear;
pub mod nets;
pub mod oscillator;
pub mod poly;
pub mod scalar;

pub use algebra::{GroupPoint, StratifiedAlgebra};
pub use error::{Error, Result};
pub use scalar::{Rational, Scalar};
