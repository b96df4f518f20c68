//! Generalized Bishop frames on curves in E^4.
//!
//! A regular curve in 4-space carries orthonormal moving frames whose
//! coefficient matrix (the antisymmetric `X` with `Z' = X Z`, frame vectors
//! as rows of `Z`, row 0 the tangent) has at most three nonzero entries above
//! the diagonal. Up to permutations of the three normal vectors there are
//! four sparsity types: B (Bishop / rotation minimizing), C, D and F
//! (Frenet-like). This crate constructs all four, converts between them,
//! classifies coefficient sparsity patterns, and ships the gallery of
//! example and counterexample curves the types are usually demonstrated on.

pub mod curve;
pub mod engine;
pub mod error;
pub mod gallery;
pub mod io;
pub mod linalg;
pub mod pattern;

pub use curve::{CurvePath, CurveSpec, RegularityReport};
pub use engine::{CoefficientPath, FramePath, TransformPath};
pub use error::{FrameError, Result};
pub use linalg::{Mat3, Mat4, Skew4, Vec4};
pub use pattern::{FrameType, PatternCatalog};
