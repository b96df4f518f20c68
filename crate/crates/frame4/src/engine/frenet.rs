//! Frenet-style type-F frames from Gram-Schmidt of successive derivatives.

use super::FramePath;
use crate::curve::{CurvePath, FRENET_RANK_TOL};
use crate::error::{FrameError, Result};
use crate::linalg::{cross4, Mat4, Vec4};
use crate::pattern::FrameType;

/// Gram-Schmidt of `(gamma', gamma'', gamma''')` with the orientation-fixing
/// fourth vector, so `det Z = +1` and the leading curvatures are positive.
pub fn frenet_type_f(curve: &CurvePath) -> Result<FramePath> {
    let tp = curve
        .tp
        .as_ref()
        .ok_or_else(|| FrameError::InvalidFormat("curve lacks tangent derivatives".into()))?;
    let tpp = curve
        .tpp
        .as_ref()
        .ok_or_else(|| FrameError::InvalidFormat("curve lacks second derivatives".into()))?;

    let mut zs = Vec::with_capacity(curve.len());
    for i in 0..curve.len() {
        let e1 = curve.t[i].normalized();
        let mut v2 = tp[i];
        v2 = v2 - e1.scale(v2.dot(&e1));
        let n2 = v2.norm();
        let mut v3 = tpp[i];
        // rank check via the Gram determinant of (T, T', T'')
        let margin = gram3(&curve.t[i], &tp[i], &tpp[i]);
        if margin < FRENET_RANK_TOL {
            return Err(FrameError::RankDeficient {
                at: curve.s[i],
                margin,
            });
        }
        let e2 = v2.scale(1.0 / n2);
        v3 = v3 - e1.scale(v3.dot(&e1));
        v3 = v3 - e2.scale(v3.dot(&e2));
        let e3 = v3.normalized();
        let e4 = cross4(&e1, &e2, &e3).normalized();
        zs.push(Mat4::from_rows(e1, e2, e3, e4));
    }
    Ok(FramePath {
        s: curve.s.clone(),
        z: zs,
        declared_type: Some(FrameType::F),
    })
}

fn gram3(a: &Vec4, b: &Vec4, c: &Vec4) -> f64 {
    let g = [
        [a.dot(a), a.dot(b), a.dot(c)],
        [b.dot(a), b.dot(b), b.dot(c)],
        [c.dot(a), c.dot(b), c.dot(c)],
    ];
    g[0][0] * (g[1][1] * g[2][2] - g[1][2] * g[2][1])
        - g[0][1] * (g[1][0] * g[2][2] - g[1][2] * g[2][0])
        + g[0][2] * (g[1][0] * g[2][1] - g[1][1] * g[2][0])
}
