//! Type-D frames: direct construction by rotation-minimizing transport about
//! the normalized curvature vector, and conversion from type-F coefficients.

use super::bishop::midpoint_vec;
use super::{check_equispaced, CoefficientPath, FramePath, TransformPath};
use crate::curve::{CurvePath, TWO_REGULARITY_TOL};
use crate::error::{FrameError, Result};
use crate::linalg::{reorthonormalize, Mat4, Vec4};
use crate::pattern::{pattern_residual, FrameType, MASKS};

/// Construct a type-D frame on a 2-regular curve: `D1 = T'/|T'|`, and the
/// complementary set {T, D2, D3} transported rotation-minimizingly about the
/// D1 field (`N' = -(D1' . N) D1`), rows ordered (T, D1, D2, D3).
pub fn type_d_construct(curve: &CurvePath) -> Result<FramePath> {
    let h = check_equispaced(&curve.s)?;
    let tp = curve
        .tp
        .as_ref()
        .ok_or_else(|| FrameError::InvalidFormat("curve lacks tangent derivatives".into()))?;
    let tpp = curve
        .tpp
        .as_ref()
        .ok_or_else(|| FrameError::InvalidFormat("curve lacks second derivatives".into()))?;

    let mut min_tp = f64::INFINITY;
    let mut at = curve.s[0];
    for (i, d) in tp.iter().enumerate() {
        let n = d.norm();
        if n < min_tp {
            min_tp = n;
            at = curve.s[i];
        }
    }
    if min_tp < TWO_REGULARITY_TOL {
        return Err(FrameError::Not2Regular {
            at,
            min_tp_norm: min_tp,
        });
    }

    let n = curve.len();
    // D1 and its derivative from curve data:
    // D1' = T''/|T'| - T' (T' . T'') / |T'|^3
    let d1: Vec<Vec4> = tp.iter().map(|d| d.normalized()).collect();
    let d1p: Vec<Vec4> = tp
        .iter()
        .zip(tpp.iter())
        .map(|(d, dd)| {
            let nrm = d.norm();
            dd.scale(1.0 / nrm) - d.scale(d.dot(dd) / nrm.powi(3))
        })
        .collect();

    // initial D2, D3 completing {T(s0), D1(s0)}
    let (mut d2, mut d3) = complete_pair(&curve.t[0], &d1[0]);

    let mut zs = Vec::with_capacity(n);
    zs.push(assemble(curve.t[0], d1[0], d2, d3)?);
    for i in 0..n - 1 {
        let a = (d1[i], d1p[i]);
        let m = (midpoint_vec(&d1, i).normalized(), midpoint_vec(&d1p, i));
        let b = (d1[i + 1], d1p[i + 1]);
        let f = |st: &(Vec4, Vec4), nv: &Vec4| -> Vec4 { st.0.scale(-(st.1.dot(nv))) };
        for nv in [&mut d2, &mut d3] {
            let k1 = f(&a, nv);
            let k2 = f(&m, &(*nv + k1.scale(h / 2.0)));
            let k3 = f(&m, &(*nv + k2.scale(h / 2.0)));
            let k4 = f(&b, &(*nv + k3.scale(h)));
            *nv += (k1 + k2.scale(2.0) + k3.scale(2.0) + k4).scale(h / 6.0);
        }
        let z = assemble(curve.t[i + 1], d1[i + 1], d2, d3)?;
        d2 = z.row(2);
        d3 = z.row(3);
        zs.push(z);
    }
    Ok(FramePath {
        s: curve.s.clone(),
        z: zs,
        declared_type: Some(FrameType::D),
    })
}

/// MGS cleanup with rows (T, D1, D2, D3); T keeps its direction.
fn assemble(t: Vec4, d1: Vec4, d2: Vec4, d3: Vec4) -> Result<Mat4> {
    reorthonormalize(&Mat4::from_rows(t, d1, d2, d3))
}

/// Deterministic completion of two orthonormal vectors to a positively
/// oriented orthonormal 4-frame; returns the last two rows.
fn complete_pair(a: &Vec4, b: &Vec4) -> (Vec4, Vec4) {
    let mut best = Vec4::ZERO;
    let mut best_norm = -1.0;
    for k in 0..4 {
        let mut v = Vec4::basis(k);
        v = v - a.scale(v.dot(a)) - b.scale(v.dot(b));
        let n = v.norm();
        if n > best_norm {
            best_norm = n;
            best = v;
        }
    }
    let c = best.normalized();
    let d = crate::linalg::cross4(a, b, &c).normalized();
    (c, d)
}

/// Convert type-F coefficients to type-D coefficients:
/// `theta' = -kappa eps f3`, `d = (eps f1, eps f2 cos theta, eps f2 sin theta)`.
///
/// Also returns the constant-law transform `G(s)` from the F frame to the D
/// frame, whose initial value seeds the type-D integration.
pub fn type_d_from_f(
    f_coeffs: &CoefficientPath,
    eps: i8,
    kappa: i8,
) -> Result<(CoefficientPath, TransformPath)> {
    let h = check_equispaced(&f_coeffs.s)?;
    let f_mask = FrameType::F.canonical_mask();
    let residual = pattern_residual(&f_coeffs.x, f_mask);
    if residual > super::PATTERN_DECLARE_TOL {
        return Err(FrameError::PatternMismatch {
            expected: "type F",
            residual,
        });
    }
    let mask = &MASKS[f_mask];
    let n = f_coeffs.s.len();
    let f: Vec<[f64; 3]> = f_coeffs
        .x
        .iter()
        .map(|x| [x.upper[mask[0]], x.upper[mask[1]], x.upper[mask[2]]])
        .collect();

    // theta(s) = theta0 - kappa eps int f3 ds, theta0 = 0, by cumulative
    // Simpson with interpolated midpoints
    let ke = (kappa * eps) as f64;
    let f3: Vec<Vec4> = f.iter().map(|fi| Vec4::new(fi[2], 0.0, 0.0, 0.0)).collect();
    let mut theta = Vec::with_capacity(n);
    theta.push(0.0);
    for i in 0..n - 1 {
        let fm = midpoint_vec(&f3, i)[0];
        let inc = h / 6.0 * (f[i][2] + 4.0 * fm + f[i + 1][2]);
        theta.push(theta[i] - ke * inc);
    }

    let e = eps as f64;
    let channels: Vec<[f64; 3]> = f
        .iter()
        .zip(theta.iter())
        .map(|(fi, &th)| [e * fi[0], e * fi[1] * th.cos(), e * fi[1] * th.sin()])
        .collect();
    let coeffs = CoefficientPath::from_channels(
        f_coeffs.s.clone(),
        FrameType::D.canonical_mask(),
        channels,
    );

    // G = diag(1, Gbar), Gbar = [[eps, 0, 0], [0, cos th, ke sin th], [0, sin th, -ke cos th]]
    let gs: Vec<Mat4> = theta
        .iter()
        .map(|&th| {
            let (c, s) = (th.cos(), th.sin());
            Mat4([
                [1.0, 0.0, 0.0, 0.0],
                [0.0, e, 0.0, 0.0],
                [0.0, 0.0, c, ke * s],
                [0.0, 0.0, s, -ke * c],
            ])
        })
        .collect();
    let transform = TransformPath {
        s: f_coeffs.s.clone(),
        g: gs,
        theta,
        signs: (eps, kappa),
    };
    Ok((coeffs, transform))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::arc_length_reparametrize;
    use crate::engine::{extract_coefficients, frenet_type_f, integrate_frame};
    use crate::pattern::pattern_residual;
    use std::f64::consts::PI;

    fn helix(n: usize) -> CurvePath {
        arc_length_reparametrize(
            &|t: f64| Vec4::new(t.cos(), t.sin(), (2.0 * t).cos(), (2.0 * t).sin()),
            (0.0, 2.0 * PI),
            n,
        )
        .unwrap()
    }

    fn circle(n: usize) -> CurvePath {
        arc_length_reparametrize(
            &|t: f64| Vec4::new(t.cos(), t.sin(), 0.0, 0.0),
            (0.0, 2.0 * PI),
            n,
        )
        .unwrap()
    }

    #[test]
    fn circle_type_d_has_unit_d1_and_flat_normals() {
        let path = circle(2049);
        let frame = type_d_construct(&path).unwrap();
        let coeffs = extract_coefficients(&frame).unwrap();
        assert!(pattern_residual(&coeffs.x, FrameType::D.canonical_mask()) < 1e-6);
        let mask = &MASKS[FrameType::D.canonical_mask()];
        for x in &coeffs.x {
            assert!((x.upper[mask[0]] - 1.0).abs() < 1e-6); // d1 = curvature = 1
            assert!(x.upper[mask[1]].abs() < 1e-6); // d2 = 0
            assert!(x.upper[mask[2]].abs() < 1e-6); // d3 = 0
        }
    }

    #[test]
    fn helix_type_d_mask_and_d1_norm() {
        let path = helix(4097);
        let frame = type_d_construct(&path).unwrap();
        assert!(frame.max_ortho_defect() < 1e-10);
        assert!(frame.max_tangent_defect(&path.t) < 1e-10);
        let coeffs = extract_coefficients(&frame).unwrap();
        assert!(pattern_residual(&coeffs.x, FrameType::D.canonical_mask()) < 1e-6);
        let mask = &MASKS[FrameType::D.canonical_mask()];
        let tp = path.tp.as_ref().unwrap();
        for (x, d) in coeffs.x.iter().zip(tp.iter()).skip(4).take(coeffs.x.len() - 8) {
            assert!((x.upper[mask[0]] - d.norm()).abs() < 1e-6);
        }
    }

    #[test]
    fn line_is_not_2_regular() {
        let path = arc_length_reparametrize(
            &|t: f64| Vec4::new(t, 0.0, 0.0, 0.0),
            (0.0, 1.0),
            128,
        )
        .unwrap();
        match type_d_construct(&path) {
            Err(FrameError::Not2Regular { .. }) => {}
            other => panic!("expected Not2Regular, got {other:?}"),
        }
    }

    #[test]
    fn f_to_d_sign_free_invariants() {
        let path = helix(4097);
        let f_frame = frenet_type_f(&path).unwrap();
        let f_coeffs = {
            let mut c = extract_coefficients(&f_frame).unwrap();
            c.declare(FrameType::F.canonical_mask()).unwrap();
            c
        };
        let f_ch = f_coeffs.channels.as_ref().unwrap();
        for (eps, kappa) in [(1i8, 1i8), (1, -1), (-1, 1), (-1, -1)] {
            let (d_coeffs, transform) = type_d_from_f(&f_coeffs, eps, kappa).unwrap();
            let d_ch = d_coeffs.channels.as_ref().unwrap();
            // d1^2 = f1^2 and d2^2 + d3^2 = f2^2 pointwise
            for (d, f) in d_ch.iter().zip(f_ch.iter()) {
                assert!((d[0] * d[0] - f[0] * f[0]).abs() < 1e-8);
                assert!((d[1] * d[1] + d[2] * d[2] - f[1] * f[1]).abs() < 1e-8);
            }
            // integrating X_D from the transformed start reproduces the curve
            let z0 = transform.g[0] * f_frame.z[0];
            let d_frame = integrate_frame(&d_coeffs, z0).unwrap();
            assert!(
                d_frame.max_tangent_defect(&path.t) < 1e-6,
                "eps {eps} kappa {kappa}"
            );
            let rec = extract_coefficients(&d_frame).unwrap();
            assert!(pattern_residual(&rec.x, FrameType::D.canonical_mask()) < 1e-5);
        }
    }

    #[test]
    fn f_to_d_with_zero_f3_reorders_channels() {
        let s: Vec<f64> = (0..257).map(|i| i as f64 / 256.0).collect();
        let channels: Vec<[f64; 3]> = s.iter().map(|&x| [1.0 + 0.1 * x, 0.5, 0.0]).collect();
        let f = CoefficientPath::from_channels(s, FrameType::F.canonical_mask(), channels);
        let (d, _) = type_d_from_f(&f, 1, 1).unwrap();
        let ch = d.channels.as_ref().unwrap();
        for (i, c) in ch.iter().enumerate() {
            let x = i as f64 / 256.0;
            assert!((c[0] - (1.0 + 0.1 * x)).abs() < 1e-12);
            assert!((c[1] - 0.5).abs() < 1e-12);
            assert!(c[2].abs() < 1e-12);
        }
    }

    #[test]
    fn f_to_d_rejects_wrong_pattern() {
        let s: Vec<f64> = (0..64).map(|i| i as f64 * 0.01).collect();
        let b = CoefficientPath::from_channels(
            s,
            FrameType::B.canonical_mask(),
            vec![[1.0, 0.5, 0.2]; 64],
        );
        match type_d_from_f(&b, 1, 1) {
            Err(FrameError::PatternMismatch { .. }) => {}
            other => panic!("expected PatternMismatch, got {other:?}"),
        }
    }

    #[test]
    fn type_d_matches_f_route_up_to_normal_plane_rotation() {
        // both constructions frame the same curve: row 0 and the D1 row agree
        // up to sign; the (D2, D3) plane may differ by a constant rotation.
        let path = helix(4097);
        let direct = type_d_construct(&path).unwrap();
        let f_frame = frenet_type_f(&path).unwrap();
        let mut f_coeffs = extract_coefficients(&f_frame).unwrap();
        f_coeffs.declare(FrameType::F.canonical_mask()).unwrap();
        let (d_coeffs, transform) = type_d_from_f(&f_coeffs, 1, 1).unwrap();
        let via_f = integrate_frame(&d_coeffs, transform.g[0] * f_frame.z[0]).unwrap();
        let mut worst_row1 = 0.0f64;
        for (a, b) in direct.z.iter().zip(via_f.z.iter()) {
            worst_row1 = worst_row1.max((a.row(0) - b.row(0)).norm_inf());
            // D1 rows agree up to sign
            let dot = a.row(1).dot(&b.row(1)).abs();
            worst_row1 = worst_row1.max(1.0 - dot);
        }
        assert!(worst_row1 < 1e-5, "worst {worst_row1}");
        // constant rotation between the (D2, D3) planes
        let rel0 = relative_angle(&direct.z[10], &via_f.z[10]);
        let rel1 = relative_angle(&direct.z[3000], &via_f.z[3000]);
        let mut d = (rel0 - rel1).abs();
        if d > PI {
            d = 2.0 * PI - d;
        }
        assert!(d < 1e-5, "plane rotation drifts: {rel0} vs {rel1}");
    }

    fn relative_angle(a: &Mat4, b: &Mat4) -> f64 {
        // angle of b.D2 within the (a.D2, a.D3) plane
        let c = b.row(2).dot(&a.row(2));
        let s = b.row(2).dot(&a.row(3));
        s.atan2(c)
    }
}
