//! Error type shared across the crate.
//!
//! Variant names are stable: the CLI prints them verbatim and maps them to
//! exit codes (admissibility failures exit 2, IO/validation failures exit 1).

use thiserror::Error;

/// Errors raised by curve ingestion, frame construction and conversion.
#[derive(Debug, Error)]
pub enum FrameError {
    /// Curve speed fell below the regularity threshold at some probe point.
    #[error("NotRegular: curve speed {speed:.3e} below threshold at parameter {at:.6}")]
    NotRegular { at: f64, speed: f64 },

    /// The tangent derivative vanishes somewhere, so 2-regular constructions fail.
    #[error("Not2Regular: min |T'| = {min_tp_norm:.3e} at s = {at:.6}")]
    Not2Regular { at: f64, min_tp_norm: f64 },

    /// Gram-Schmidt hit a pivot below tolerance; rows are numerically dependent.
    #[error("DegenerateRows: Gram-Schmidt pivot norm {pivot:.3e} on row {row}")]
    DegenerateRows { row: usize, pivot: f64 },

    /// The {gamma', gamma'', gamma'''} system is rank deficient.
    #[error("RankDeficient: Gram determinant margin {margin:.3e} at s = {at:.6}")]
    RankDeficient { at: f64, margin: f64 },

    /// Input coefficients do not match the sparsity pattern the operation requires.
    #[error("PatternMismatch: expected {expected}, residual {residual:.3e}")]
    PatternMismatch { expected: &'static str, residual: f64 },

    /// The avoided-direction condition min(b1^2 + b3^2) failed.
    #[error("AvoidanceFailed: min(b1^2 + b3^2) = {min_sq:.3e} at s = {at:.6}")]
    AvoidanceFailed { at: f64, min_sq: f64 },

    /// A tangent field probe was not unit length.
    #[error("NotUnit: |T({at:.6})| = {norm:.8} deviates from 1")]
    NotUnit { at: f64, norm: f64 },

    /// Preset name not in the gallery catalog.
    #[error("UnknownPreset: {0}")]
    UnknownPreset(String),

    /// A one-sided limit probe found |T'| persistently below threshold.
    #[error("SideDegenerate: |T'| < {threshold:.1e} on the {side} side of s = {at:.6}")]
    SideDegenerate { at: f64, side: &'static str, threshold: f64 },

    /// The unwrapped angle jumped more than pi/2 between adjacent samples.
    #[error("ResolutionExceeded: theta jump {jump:.4} rad in one step at s = {at:.6}")]
    ResolutionExceeded { at: f64, jump: f64 },

    /// The ODE and double-reflection frame constructions disagree.
    #[error("MethodDisagreement: ODE vs double-reflection deviation {deviation:.3e}")]
    MethodDisagreement { deviation: f64 },

    /// Too few samples for the requested stencil or construction.
    #[error("InsufficientSamples: need at least {need}, got {got}")]
    InsufficientSamples { need: usize, got: usize },

    /// Malformed input file or inconsistent grids.
    #[error("InvalidFormat: {0}")]
    InvalidFormat(String),

    #[error("Io: {0}")]
    Io(#[from] std::io::Error),
}

impl FrameError {
    /// CLI exit code: 2 for admissibility failures, 1 for IO/validation.
    pub fn exit_code(&self) -> i32 {
        match self {
            FrameError::NotRegular { .. }
            | FrameError::Not2Regular { .. }
            | FrameError::DegenerateRows { .. }
            | FrameError::RankDeficient { .. }
            | FrameError::PatternMismatch { .. }
            | FrameError::AvoidanceFailed { .. }
            | FrameError::SideDegenerate { .. }
            | FrameError::ResolutionExceeded { .. }
            | FrameError::MethodDisagreement { .. } => 2,
            FrameError::NotUnit { .. }
            | FrameError::UnknownPreset(_)
            | FrameError::InsufficientSamples { .. }
            | FrameError::InvalidFormat(_)
            | FrameError::Io(_) => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, FrameError>;
