//! Frame verification: orthonormality, tangent anchoring, pattern residuals.

use super::{extract_coefficients, FramePath, FRAME_ORTHO_TOL, FRAME_TANGENT_TOL};
use crate::curve::CurvePath;
use crate::error::Result;
use crate::pattern::{classify_pattern, FrameType, PatternMatch};
use serde::Serialize;

/// Aggregate verification report for a frame path.
#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub max_ortho_defect: f64,
    /// Present when a curve was supplied for the row-0 check.
    pub max_tangent_defect: Option<f64>,
    /// Best off-pattern residual per type over all masks and permutations.
    pub best_by_type: Vec<(FrameType, f64)>,
    /// All (mask, permutation) matches at the requested tolerance.
    pub matches: Vec<PatternMatch>,
    /// The coefficient matrix vanishes identically; every mask matches.
    pub degenerate: bool,
    pub expected: Option<FrameType>,
    pub tol: f64,
    pub pass: bool,
}

impl VerifyReport {
    pub fn best_residual(&self, t: FrameType) -> f64 {
        self.best_by_type
            .iter()
            .find(|(ft, _)| *ft == t)
            .map(|(_, r)| *r)
            .unwrap_or(f64::INFINITY)
    }
}

/// Verify a frame path: structural invariants plus, when `expected` is given,
/// the pattern residual of that type at tolerance `tol`.
pub fn verify_frame(
    frame: &FramePath,
    curve: Option<&CurvePath>,
    expected: Option<FrameType>,
    tol: f64,
) -> Result<VerifyReport> {
    let max_ortho = frame.max_ortho_defect();
    let max_tan = curve.map(|c| frame.max_tangent_defect(&c.t));
    let coeffs = extract_coefficients(frame)?;
    let cls = classify_pattern(&coeffs.x, tol);
    let pass = {
        let structural = max_ortho <= FRAME_ORTHO_TOL
            && max_tan.map(|d| d <= FRAME_TANGENT_TOL).unwrap_or(true);
        match expected {
            Some(t) => {
                structural
                    && cls
                        .best_by_type
                        .iter()
                        .any(|&(ft, r)| ft == t && r <= tol)
            }
            None => structural,
        }
    };
    Ok(VerifyReport {
        max_ortho_defect: max_ortho,
        max_tangent_defect: max_tan,
        best_by_type: cls.best_by_type.to_vec(),
        matches: cls.matches,
        degenerate: cls.degenerate,
        expected,
        tol,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::arc_length_reparametrize;
    use crate::engine::{default_normals, frenet_type_f, rmf_bishop};
    use crate::linalg::Vec4;
    use std::f64::consts::PI;

    fn helix(n: usize) -> CurvePath {
        arc_length_reparametrize(
            &|t: f64| Vec4::new(t.cos(), t.sin(), (2.0 * t).cos(), (2.0 * t).sin()),
            (0.0, 2.0 * PI),
            n,
        )
        .unwrap()
    }

    #[test]
    fn bishop_on_helix_passes_as_type_b() {
        let path = helix(2049);
        let frame = rmf_bishop(&path, default_normals(&path.t[0])).unwrap();
        let report = verify_frame(&frame, Some(&path), Some(FrameType::B), 1e-6).unwrap();
        assert!(report.pass, "{report:?}");
        assert!(!report.degenerate);
    }

    #[test]
    fn constant_frame_on_line_is_degenerate_pass() {
        let path = arc_length_reparametrize(
            &|t: f64| Vec4::new(t, 0.0, 0.0, 0.0),
            (0.0, 1.0),
            128,
        )
        .unwrap();
        let frame = rmf_bishop(&path, default_normals(&path.t[0])).unwrap();
        for t in FrameType::ALL {
            let report = verify_frame(&frame, Some(&path), Some(t), 1e-6).unwrap();
            assert!(report.pass, "type {t}");
            assert!(report.degenerate);
        }
    }

    #[test]
    fn frenet_frame_fails_as_type_b() {
        let path = helix(2049);
        let frame = frenet_type_f(&path).unwrap();
        let report = verify_frame(&frame, Some(&path), Some(FrameType::B), 1e-6).unwrap();
        assert!(!report.pass);
        let report_f = verify_frame(&frame, Some(&path), Some(FrameType::F), 1e-6).unwrap();
        assert!(report_f.pass);
    }
}
