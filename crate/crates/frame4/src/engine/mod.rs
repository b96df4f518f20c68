//! Frame construction, conversion, transformation and verification.

mod bishop;
mod frenet;
mod integrate;
mod type_c;
mod type_d;
mod verify;

pub use bishop::{default_normals, rmf_bishop, rmf_bishop_double_reflection, rmf_bishop_ode, rotate_bishop};
pub use frenet::frenet_type_f;
pub use integrate::{extract_coefficients, integrate_frame, integrate_frame_with_curve, solve_transform};
pub use type_c::{
    find_avoided_direction, find_avoided_direction_with, type_c_from_bishop, ThetaMode,
    ThetaPath, AVOID_TOL_SQ, THETA_RATE_CAP,
};
pub use type_d::{type_d_construct, type_d_from_f};
pub use verify::{verify_frame, VerifyReport};

pub(crate) use type_c::build_theta;

pub(crate) mod type_c_internals {
    pub(crate) use super::type_c::{bgbc1_transform, scalar_derivative};
}

use crate::error::{FrameError, Result};
use crate::linalg::{Mat4, Skew4, Vec4, UPPER_PAIRS};
use crate::pattern::{pattern_residual, FrameType, MASKS};
use serde::Serialize;

/// Orthonormality defect every constructed frame must satisfy.
pub const FRAME_ORTHO_TOL: f64 = 1e-8;
/// Tangent-row defect every constructed frame must satisfy.
pub const FRAME_TANGENT_TOL: f64 = 1e-8;
/// Off-pattern tolerance used when validating a declared sparsity pattern.
pub const PATTERN_DECLARE_TOL: f64 = 1e-6;

/// A per-sample orthonormal frame; rows of `z[i]` are the frame vectors and
/// row 0 the unit tangent.
#[derive(Debug, Clone, Serialize)]
pub struct FramePath {
    pub s: Vec<f64>,
    pub z: Vec<Mat4>,
    pub declared_type: Option<FrameType>,
}

impl FramePath {
    pub fn len(&self) -> usize {
        self.s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s.is_empty()
    }

    pub fn step(&self) -> f64 {
        (self.s[self.s.len() - 1] - self.s[0]) / (self.s.len() - 1) as f64
    }

    /// Max `||Z^T Z - I||_inf` over the path.
    pub fn max_ortho_defect(&self) -> f64 {
        self.z.iter().fold(0.0f64, |m, z| m.max(z.ortho_defect()))
    }

    /// Max deviation of row 0 from the curve tangent.
    pub fn max_tangent_defect(&self, tangents: &[Vec4]) -> f64 {
        self.z
            .iter()
            .zip(tangents.iter())
            .fold(0.0f64, |m, (z, t)| m.max((z.row(0) - *t).norm_inf()))
    }

    /// Permute the normal rows 1..3 by `perm` (new row k = old row perm[k]).
    pub fn permute_normals(&self, perm: &[usize; 3]) -> FramePath {
        let z = self
            .z
            .iter()
            .map(|m| {
                Mat4::from_rows(m.row(0), m.row(perm[0]), m.row(perm[1]), m.row(perm[2]))
            })
            .collect();
        FramePath {
            s: self.s.clone(),
            z,
            declared_type: None,
        }
    }
}

/// A per-sample so(4) coefficient matrix with an optionally declared sparsity
/// pattern and its three scalar channels.
#[derive(Debug, Clone, Serialize)]
pub struct CoefficientPath {
    pub s: Vec<f64>,
    pub x: Vec<Skew4>,
    /// Mask id 0-15 once declared.
    pub pattern: Option<usize>,
    /// The x1, x2, x3 channels (mask entries in catalog order) when declared.
    pub channels: Option<Vec<[f64; 3]>>,
    /// Set only by [`CoefficientPath::constant`]; integration then uses the
    /// exact exponential instead of RK4.
    pub constant: bool,
}

impl CoefficientPath {
    pub fn len(&self) -> usize {
        self.s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s.is_empty()
    }

    pub fn step(&self) -> f64 {
        (self.s[self.s.len() - 1] - self.s[0]) / (self.s.len() - 1) as f64
    }

    /// Sampled coefficients with no declared pattern.
    pub fn from_samples(s: Vec<f64>, x: Vec<Skew4>) -> CoefficientPath {
        CoefficientPath {
            s,
            x,
            pattern: None,
            channels: None,
            constant: false,
        }
    }

    /// A constant coefficient matrix sampled on `s`; flagged so integration
    /// may use the exact exponential.
    pub fn constant(x: Skew4, s: Vec<f64>) -> CoefficientPath {
        let xs = vec![x; s.len()];
        CoefficientPath {
            s,
            x: xs,
            pattern: None,
            channels: None,
            constant: true,
        }
    }

    /// Build from per-sample channels of a catalog mask.
    pub fn from_channels(s: Vec<f64>, mask_id: usize, channels: Vec<[f64; 3]>) -> CoefficientPath {
        let mask = &MASKS[mask_id];
        let x = channels
            .iter()
            .map(|ch| {
                let mut sk = Skew4::ZERO;
                for (k, &slot) in mask.iter().enumerate() {
                    let (i, j) = UPPER_PAIRS[slot];
                    sk.set(i, j, ch[k]);
                }
                sk
            })
            .collect();
        CoefficientPath {
            s,
            x,
            pattern: Some(mask_id),
            channels: Some(channels),
            constant: false,
        }
    }

    /// Declare a sparsity pattern, verifying off-pattern entries vanish.
    pub fn declare(&mut self, mask_id: usize) -> Result<()> {
        let residual = pattern_residual(&self.x, mask_id);
        if residual > PATTERN_DECLARE_TOL {
            return Err(FrameError::PatternMismatch {
                expected: type_name(mask_id),
                residual,
            });
        }
        let mask = &MASKS[mask_id];
        self.channels = Some(
            self.x
                .iter()
                .map(|x| {
                    let mut ch = [0.0; 3];
                    for (k, &slot) in mask.iter().enumerate() {
                        ch[k] = x.upper[slot];
                    }
                    ch
                })
                .collect(),
        );
        self.pattern = Some(mask_id);
        Ok(())
    }

    /// Max |entry| over the path.
    pub fn max_norm(&self) -> f64 {
        self.x.iter().fold(0.0f64, |m, x| m.max(x.norm_inf()))
    }
}

fn type_name(mask_id: usize) -> &'static str {
    match crate::pattern::PatternCatalog::type_of(mask_id) {
        FrameType::B => "type B",
        FrameType::C => "type C",
        FrameType::D => "type D",
        FrameType::F => "type F",
    }
}

/// A per-sample O(4) transformation between two frames on the same curve.
/// Transformations fix the tangent: first row and column are `e_0`.
#[derive(Debug, Clone, Serialize)]
pub struct TransformPath {
    pub s: Vec<f64>,
    pub g: Vec<Mat4>,
    /// Unwrapped rotation angle channel where the transform is a rotation of
    /// a normal plane; zero when not applicable.
    pub theta: Vec<f64>,
    /// The two sign choices carried by the conversion that built this path.
    pub signs: (i8, i8),
}

impl TransformPath {
    pub fn max_ortho_defect(&self) -> f64 {
        self.g.iter().fold(0.0f64, |m, g| m.max(g.ortho_defect()))
    }

    /// Max deviation of the first row/column from `e_0`.
    pub fn max_tangent_fix_defect(&self) -> f64 {
        let mut d = 0.0f64;
        for g in &self.g {
            for j in 0..4 {
                let target = if j == 0 { 1.0 } else { 0.0 };
                d = d.max((g.0[0][j] - target).abs());
                d = d.max((g.0[j][0] - target).abs());
            }
        }
        d
    }
}

/// Equispaced-grid check shared by the integrators.
pub(crate) fn check_equispaced(s: &[f64]) -> Result<f64> {
    if s.len() < 2 {
        return Err(FrameError::InsufficientSamples { need: 2, got: s.len() });
    }
    let h = (s[s.len() - 1] - s[0]) / (s.len() - 1) as f64;
    for w in s.windows(2) {
        if ((w[1] - w[0]) - h).abs() > 1e-9 * (1.0 + h.abs()) {
            return Err(FrameError::InvalidFormat(format!(
                "grid not equispaced: step {} vs {}",
                w[1] - w[0],
                h
            )));
        }
    }
    if h <= 0.0 {
        return Err(FrameError::InvalidFormat("grid not increasing".into()));
    }
    Ok(h)
}
