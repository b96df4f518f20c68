//! Bishop (rotation minimizing) frames: ODE integration, the independent
//! double-reflection scheme, and constant rotations of the normal triple.

use super::{check_equispaced, extract_coefficients, FramePath};
use crate::curve::CurvePath;
use crate::error::{FrameError, Result};
use crate::linalg::{reorthonormalize, Mat3, Mat4, Vec4};
use crate::pattern::{pattern_residual, FrameType};

/// Max allowed deviation between the ODE and double-reflection frames.
pub const RMF_METHOD_TOL: f64 = 1e-5;

/// Cubic interpolation of vector samples at the midpoint of interval i.
pub(crate) fn midpoint_vec(vs: &[Vec4], i: usize) -> Vec4 {
    let n = vs.len();
    let (w, idx): ([f64; 4], [usize; 4]) = if i == 0 {
        ([5.0, 15.0, -5.0, 1.0], [0, 1, 2, 3])
    } else if i + 2 >= n {
        ([1.0, -5.0, 15.0, 5.0], [n - 4, n - 3, n - 2, n - 1])
    } else {
        ([-1.0, 9.0, 9.0, -1.0], [i - 1, i, i + 1, i + 2])
    };
    let mut out = Vec4::ZERO;
    for k in 0..4 {
        out += vs[idx[k]].scale(w[k] / 16.0);
    }
    out
}

/// Deterministic orthonormal normal triple completing a unit tangent.
pub fn default_normals(t: &Vec4) -> [Vec4; 3] {
    // drop the basis vector most parallel to T, Gram-Schmidt the rest
    let mut drop = 0;
    let mut best = -1.0;
    for k in 0..4 {
        if t[k].abs() > best {
            best = t[k].abs();
            drop = k;
        }
    }
    let mut out = [Vec4::ZERO; 3];
    let mut count = 0;
    for k in 0..4 {
        if k == drop {
            continue;
        }
        let mut v = Vec4::basis(k);
        v = v - t.scale(v.dot(t));
        for prev in out.iter().take(count) {
            v = v - prev.scale(v.dot(prev));
        }
        out[count] = v.normalized();
        count += 1;
    }
    out
}

fn validate_initial_normals(t0: &Vec4, n0: &[Vec4; 3]) -> Result<()> {
    for (i, ni) in n0.iter().enumerate() {
        if (ni.norm() - 1.0).abs() > 1e-8 || ni.dot(t0).abs() > 1e-8 {
            return Err(FrameError::InvalidFormat(format!(
                "initial normal {i} not unit or not orthogonal to T(s0)"
            )));
        }
        for nj in n0.iter().skip(i + 1) {
            if ni.dot(nj).abs() > 1e-8 {
                return Err(FrameError::InvalidFormat(
                    "initial normals not mutually orthogonal".into(),
                ));
            }
        }
    }
    Ok(())
}

/// Rotation minimizing frame by integrating `N_i' = -(T' . N_i) T` with RK4,
/// the tangent row pinned to the curve data and the frame re-orthonormalized
/// every step.
pub fn rmf_bishop_ode(curve: &CurvePath, n0: [Vec4; 3]) -> Result<FramePath> {
    let h = check_equispaced(&curve.s)?;
    validate_initial_normals(&curve.t[0], &n0)?;
    let tp = curve
        .tp
        .as_ref()
        .ok_or_else(|| FrameError::InvalidFormat("curve lacks tangent derivatives".into()))?;
    let n = curve.s.len();
    let mut zs = Vec::with_capacity(n);
    let mut normals = n0;
    zs.push(reorthonormalize(&Mat4::from_rows(
        curve.t[0], normals[0], normals[1], normals[2],
    ))?);
    for i in 0..n - 1 {
        let t_a = curve.t[i];
        let tp_a = tp[i];
        let t_m = midpoint_vec(&curve.t, i).normalized();
        let tp_m = midpoint_vec(tp, i);
        let t_b = curve.t[i + 1];
        let tp_b = tp[i + 1];
        let f = |t: &Vec4, d: &Vec4, nv: &Vec4| -> Vec4 { t.scale(-(d.dot(nv))) };
        for nv in normals.iter_mut() {
            let k1 = f(&t_a, &tp_a, nv);
            let k2 = f(&t_m, &tp_m, &(*nv + k1.scale(h / 2.0)));
            let k3 = f(&t_m, &tp_m, &(*nv + k2.scale(h / 2.0)));
            let k4 = f(&t_b, &tp_b, &(*nv + k3.scale(h)));
            *nv += (k1 + k2.scale(2.0) + k3.scale(2.0) + k4).scale(h / 6.0);
        }
        let z = reorthonormalize(&Mat4::from_rows(
            curve.t[i + 1],
            normals[0],
            normals[1],
            normals[2],
        ))?;
        for k in 0..3 {
            normals[k] = z.row(k + 1);
        }
        zs.push(z);
    }
    Ok(FramePath {
        s: curve.s.clone(),
        z: zs,
        declared_type: Some(FrameType::B),
    })
}

/// Rotation minimizing frame by the double-reflection stepping scheme:
/// reflect across the chord bisector plane, then across the bisector of the
/// reflected and target tangents. Dimension-agnostic, used as the
/// independent check on the ODE construction.
pub fn rmf_bishop_double_reflection(curve: &CurvePath, n0: [Vec4; 3]) -> Result<FramePath> {
    check_equispaced(&curve.s)?;
    validate_initial_normals(&curve.t[0], &n0)?;
    let n = curve.s.len();
    let mut zs = Vec::with_capacity(n);
    let mut normals = n0;
    zs.push(reorthonormalize(&Mat4::from_rows(
        curve.t[0], normals[0], normals[1], normals[2],
    ))?);
    for i in 0..n - 1 {
        let v1 = curve.gamma[i + 1] - curve.gamma[i];
        let c1 = v1.dot(&v1);
        let reflect1 = |v: &Vec4| -> Vec4 {
            if c1 < 1e-30 {
                *v
            } else {
                *v - v1.scale(2.0 * v.dot(&v1) / c1)
            }
        };
        let t_l = reflect1(&curve.t[i]);
        let v2 = curve.t[i + 1] - t_l;
        let c2 = v2.dot(&v2);
        let reflect2 = |v: &Vec4| -> Vec4 {
            if c2 < 1e-30 {
                *v
            } else {
                *v - v2.scale(2.0 * v.dot(&v2) / c2)
            }
        };
        for nv in normals.iter_mut() {
            *nv = reflect2(&reflect1(nv));
        }
        let z = reorthonormalize(&Mat4::from_rows(
            curve.t[i + 1],
            normals[0],
            normals[1],
            normals[2],
        ))?;
        for k in 0..3 {
            normals[k] = z.row(k + 1);
        }
        zs.push(z);
    }
    Ok(FramePath {
        s: curve.s.clone(),
        z: zs,
        declared_type: Some(FrameType::B),
    })
}

/// Bishop frame with the dual-method cross check: the ODE and
/// double-reflection constructions must agree to [`RMF_METHOD_TOL`].
pub fn rmf_bishop(curve: &CurvePath, n0: [Vec4; 3]) -> Result<FramePath> {
    let ode = rmf_bishop_ode(curve, n0)?;
    let dr = rmf_bishop_double_reflection(curve, n0)?;
    let mut dev = 0.0f64;
    for (a, b) in ode.z.iter().zip(dr.z.iter()) {
        dev = dev.max((*a - *b).norm_inf());
    }
    if dev > RMF_METHOD_TOL {
        return Err(FrameError::MethodDisagreement { deviation: dev });
    }
    Ok(ode)
}

/// Rotate the normal triple of a Bishop frame by a constant `Q` in O(3):
/// the result is again a Bishop frame, with coefficient row `b Q^T`.
pub fn rotate_bishop(bishop: &FramePath, q: &Mat3) -> Result<FramePath> {
    if q.ortho_defect() > 1e-10 {
        return Err(FrameError::InvalidFormat(
            "rotate_bishop: Q is not orthogonal".into(),
        ));
    }
    let coeffs = extract_coefficients(bishop)?;
    let residual = pattern_residual(&coeffs.x, FrameType::B.canonical_mask());
    if residual > super::PATTERN_DECLARE_TOL {
        return Err(FrameError::PatternMismatch {
            expected: "type B",
            residual,
        });
    }
    Ok(rotate_bishop_unchecked(bishop, q))
}

fn rotate_bishop_unchecked(bishop: &FramePath, q: &Mat3) -> FramePath {
    let qe = q.embed();
    FramePath {
        s: bishop.s.clone(),
        z: bishop.z.iter().map(|z| qe * *z).collect(),
        declared_type: Some(FrameType::B),
    }
}
