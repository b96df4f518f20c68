//! Structure-preserving integration of the frame equation `Z' = X Z`, the
//! inverse extraction `X = Z' Z^T`, and the transformation equation
//! `G' = X1 G - G X0`.

use super::{check_equispaced, CoefficientPath, FramePath, TransformPath};
use crate::curve::CurvePath;
use crate::error::Result;
use crate::linalg::{antisymmetrize, mat_exp, reorthonormalize, Mat4, Skew4, Vec4};

/// Cubic interpolation of coefficient samples at the midpoint of interval i.
fn midpoint(xs: &[Skew4], i: usize) -> Skew4 {
    let n = xs.len();
    let (w, idx): ([f64; 4], [usize; 4]) = if i == 0 {
        ([5.0, 15.0, -5.0, 1.0], [0, 1, 2, 3])
    } else if i + 2 >= n {
        ([1.0, -5.0, 15.0, 5.0], [n - 4, n - 3, n - 2, n - 1])
    } else {
        ([-1.0, 9.0, 9.0, -1.0], [i - 1, i, i + 1, i + 2])
    };
    let mut out = Skew4::ZERO;
    for k in 0..4 {
        out = out + xs[idx[k]].scale(w[k] / 16.0);
    }
    out
}

/// Integrate `Z' = X Z` from `z0` by classical RK4 with per-step
/// re-orthonormalization; a declared-constant path uses the exact exponential.
pub fn integrate_frame(coeffs: &CoefficientPath, z0: Mat4) -> Result<FramePath> {
    let (frame, _) = integrate_frame_inner(coeffs, z0, None)?;
    Ok(frame)
}

/// Integrate the frame and simultaneously accumulate the curve
/// `gamma' = row0(Z)` from `origin`, so generated curves share the
/// integrator's accuracy.
pub fn integrate_frame_with_curve(
    coeffs: &CoefficientPath,
    z0: Mat4,
    origin: Vec4,
) -> Result<(FramePath, CurvePath)> {
    let (frame, gamma) = integrate_frame_inner(coeffs, z0, Some(origin))?;
    let gamma = gamma.unwrap();
    let tangents: Vec<Vec4> = frame.z.iter().map(|z| z.row(0)).collect();
    // T' = (X Z) row 0, exact from the coefficient data
    let tp: Vec<Vec4> = coeffs
        .x
        .iter()
        .zip(frame.z.iter())
        .map(|(x, z)| (x.to_mat() * *z).row(0))
        .collect();
    let mut path = CurvePath {
        s: frame.s.clone(),
        gamma,
        t: tangents,
        tp: Some(tp),
        tpp: None,
        breakpoints: Vec::new(),
    };
    crate::curve::derivatives(&mut path)?;
    Ok((frame, path))
}

fn integrate_frame_inner(
    coeffs: &CoefficientPath,
    z0: Mat4,
    origin: Option<Vec4>,
) -> Result<(FramePath, Option<Vec<Vec4>>)> {
    let h = check_equispaced(&coeffs.s)?;
    let n = coeffs.s.len();
    let z0 = reorthonormalize(&z0)?;

    let mut zs = Vec::with_capacity(n);
    let mut gs: Option<Vec<Vec4>> = origin.map(|o| {
        let mut v = Vec::with_capacity(n);
        v.push(o);
        v
    });

    if coeffs.constant {
        let x = coeffs.x[0];
        zs.push(z0);
        for i in 1..n {
            let e = mat_exp(&x, coeffs.s[i] - coeffs.s[0]);
            zs.push(e * z0);
        }
        if let Some(g) = gs.as_mut() {
            // per-interval Simpson on the exact tangent closure
            for i in 0..n - 1 {
                let t0 = zs[i].row(0);
                let tm = (mat_exp(&x, coeffs.s[i] + 0.5 * h - coeffs.s[0]) * z0).row(0);
                let t1 = zs[i + 1].row(0);
                let inc = (t0 + tm.scale(4.0) + t1).scale(h / 6.0);
                let prev = *g.last().unwrap();
                g.push(prev + inc);
            }
        }
    } else {
        let mut z = z0;
        zs.push(z);
        for i in 0..n - 1 {
            let x0 = coeffs.x[i].to_mat();
            let xm = midpoint(&coeffs.x, i).to_mat();
            let x1 = coeffs.x[i + 1].to_mat();
            let k1 = x0 * z;
            let k2 = xm * (z + k1.scale(h / 2.0));
            let k3 = xm * (z + k2.scale(h / 2.0));
            let k4 = x1 * (z + k3.scale(h));
            if let Some(g) = gs.as_mut() {
                // gamma' = row0(Z); RK4 stage rows reuse the frame stages
                let r1 = z.row(0);
                let r2 = (z + k1.scale(h / 2.0)).row(0);
                let r3 = (z + k2.scale(h / 2.0)).row(0);
                let r4 = (z + k3.scale(h)).row(0);
                let inc = (r1 + r2.scale(2.0) + r3.scale(2.0) + r4).scale(h / 6.0);
                let prev = *g.last().unwrap();
                g.push(prev + inc);
            }
            z = z + (k1 + k2.scale(2.0) + k3.scale(2.0) + k4).scale(h / 6.0);
            z = reorthonormalize(&z)?;
            zs.push(z);
        }
    }

    Ok((
        FramePath {
            s: coeffs.s.clone(),
            z: zs,
            declared_type: None,
        },
        gs,
    ))
}

/// Recover the coefficient matrix `X = Z' Z^T` (projected onto so(4)) by
/// 4th-order finite differences of the frame samples.
pub fn extract_coefficients(frame: &FramePath) -> Result<CoefficientPath> {
    let h = check_equispaced(&frame.s)?;
    let n = frame.s.len();
    let mut xs = Vec::with_capacity(n);
    for i in 0..n {
        let dz = frame_derivative(&frame.z, i, n, h);
        xs.push(antisymmetrize(&(dz * frame.z[i].transpose())));
    }
    Ok(CoefficientPath::from_samples(frame.s.clone(), xs))
}

/// 5-point 4th-order stencil on matrix samples (one-sided near the ends).
pub(crate) fn frame_derivative(z: &[Mat4], i: usize, n: usize, h: f64) -> Mat4 {
    let (w, idx): ([f64; 5], [usize; 5]) = if i < 2 {
        match i {
            0 => ([-25.0, 48.0, -36.0, 16.0, -3.0], [0, 1, 2, 3, 4]),
            _ => ([-3.0, -10.0, 18.0, -6.0, 1.0], [0, 1, 2, 3, 4]),
        }
    } else if i + 2 >= n {
        if i == n - 1 {
            (
                [3.0, -16.0, 36.0, -48.0, 25.0],
                [n - 5, n - 4, n - 3, n - 2, n - 1],
            )
        } else {
            (
                [-1.0, 6.0, -18.0, 10.0, 3.0],
                [n - 5, n - 4, n - 3, n - 2, n - 1],
            )
        }
    } else {
        ([1.0, -8.0, 0.0, 8.0, -1.0], [i - 2, i - 1, i, i + 1, i + 2])
    };
    let mut acc = Mat4::ZERO;
    for k in 0..5 {
        acc = acc + z[idx[k]].scale(w[k] / (12.0 * h));
    }
    acc
}

/// Solve `G' = X1 G - G X0` from `g0` by RK4 with per-step
/// re-orthonormalization. Grids of the two coefficient paths must agree.
pub fn solve_transform(
    x0: &CoefficientPath,
    x1: &CoefficientPath,
    g0: Mat4,
) -> Result<TransformPath> {
    let h = check_equispaced(&x0.s)?;
    if x0.s.len() != x1.s.len()
        || (x0.s[0] - x1.s[0]).abs() > 1e-12
        || (x0.s[x0.s.len() - 1] - x1.s[x1.s.len() - 1]).abs() > 1e-12
    {
        return Err(crate::error::FrameError::InvalidFormat(
            "solve_transform: coefficient grids differ".into(),
        ));
    }
    let n = x0.s.len();
    let g0 = reorthonormalize(&g0)?;
    let mut gs = Vec::with_capacity(n);
    let mut g = g0;
    gs.push(g);
    for i in 0..n - 1 {
        let a0 = x0.x[i].to_mat();
        let a1 = x1.x[i].to_mat();
        let am0 = midpoint(&x0.x, i).to_mat();
        let am1 = midpoint(&x1.x, i).to_mat();
        let b0 = x0.x[i + 1].to_mat();
        let b1 = x1.x[i + 1].to_mat();
        let f = |x_l: &Mat4, x_r: &Mat4, g: &Mat4| *x_r * *g - *g * *x_l;
        let k1 = f(&a0, &a1, &g);
        let k2 = f(&am0, &am1, &(g + k1.scale(h / 2.0)));
        let k3 = f(&am0, &am1, &(g + k2.scale(h / 2.0)));
        let k4 = f(&b0, &b1, &(g + k3.scale(h)));
        g = g + (k1 + k2.scale(2.0) + k3.scale(2.0) + k4).scale(h / 6.0);
        g = reorthonormalize(&g)?;
        gs.push(g);
    }
    Ok(TransformPath {
        s: x0.s.clone(),
        g: gs,
        theta: vec![0.0; n],
        signs: (1, 1),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Skew4;

    fn grid(a: f64, b: f64, n: usize) -> Vec<f64> {
        let h = (b - a) / (n - 1) as f64;
        (0..n).map(|i| a + i as f64 * h).collect()
    }

    fn paper_type_c() -> Skew4 {
        Skew4::from_upper([2.0, 1.0, 0.0, 0.0, 1.0, 0.0])
    }

    /// Smooth so(4)-valued test path from a few Fourier modes.
    fn fourier_coeffs(s: &[f64], seed: u64) -> CoefficientPath {
        let mut state = seed.wrapping_mul(6364136223846793005).wrapping_add(1);
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        let mut amp = [[0.0f64; 3]; 6];
        let mut phase = [[0.0f64; 3]; 6];
        for k in 0..6 {
            for m in 0..3 {
                amp[k][m] = 0.4 * next();
                phase[k][m] = 6.28 * next();
            }
        }
        let x = s
            .iter()
            .map(|&si| {
                let mut u = [0.0; 6];
                for k in 0..6 {
                    for m in 0..3 {
                        u[k] += amp[k][m] * ((m + 1) as f64 * si + phase[k][m]).cos();
                    }
                }
                Skew4::from_upper(u)
            })
            .collect();
        CoefficientPath::from_samples(s.to_vec(), x)
    }

    #[test]
    fn zero_coefficients_keep_identity() {
        let s = grid(0.0, 1.0, 128);
        let coeffs = CoefficientPath::from_samples(s.clone(), vec![Skew4::ZERO; 128]);
        let frame = integrate_frame(&coeffs, Mat4::IDENTITY).unwrap();
        for z in &frame.z {
            assert!((*z - Mat4::IDENTITY).norm_inf() == 0.0);
        }
    }

    #[test]
    fn constant_coefficients_match_exponential_oracle() {
        // sampled (not flagged constant), so RK4 actually runs
        let s = grid(0.0, 4.0, 4097);
        let x = paper_type_c();
        let coeffs = CoefficientPath::from_samples(s.clone(), vec![x; s.len()]);
        let frame = integrate_frame(&coeffs, Mat4::IDENTITY).unwrap();
        let mut worst = 0.0f64;
        for (i, &si) in s.iter().enumerate() {
            let oracle = mat_exp(&x, si);
            worst = worst.max((frame.z[i] - oracle).norm_inf());
        }
        // 1e-9 per unit length over 4 units
        assert!(worst < 4e-9, "worst {worst}");
        assert!(frame.max_ortho_defect() < 1e-12);
    }

    #[test]
    fn declared_constant_uses_exact_exponential() {
        let s = grid(0.0, 4.0, 65);
        let x = paper_type_c();
        let coeffs = CoefficientPath::constant(x, s.clone());
        let frame = integrate_frame(&coeffs, Mat4::IDENTITY).unwrap();
        for (i, &si) in s.iter().enumerate() {
            assert!((frame.z[i] - mat_exp(&x, si)).norm_inf() < 1e-14);
        }
    }

    #[test]
    fn rk4_shows_fourth_order_contraction() {
        let coarse = fourier_coeffs(&grid(0.0, 1.0, 257), 42);
        let fine = fourier_coeffs(&grid(0.0, 1.0, 513), 42);
        let reference = fourier_coeffs(&grid(0.0, 1.0, 4097), 42);
        let zc = integrate_frame(&coarse, Mat4::IDENTITY).unwrap();
        let zf = integrate_frame(&fine, Mat4::IDENTITY).unwrap();
        let zr = integrate_frame(&reference, Mat4::IDENTITY).unwrap();
        let ec = (zc.z[256] - zr.z[4096]).norm_inf();
        let ef = (zf.z[512] - zr.z[4096]).norm_inf();
        assert!(
            ec / ef >= 12.0,
            "contraction {} (coarse {ec:.3e}, fine {ef:.3e})",
            ec / ef
        );
    }

    #[test]
    fn extract_recovers_constant_coefficients() {
        let s = grid(0.0, 2.0, 2049);
        let x = paper_type_c();
        let frame = integrate_frame(&CoefficientPath::constant(x, s), Mat4::IDENTITY).unwrap();
        let rec = extract_coefficients(&frame).unwrap();
        for xi in &rec.x {
            let mut diff = 0.0f64;
            for k in 0..6 {
                diff = diff.max((xi.upper[k] - x.upper[k]).abs());
            }
            assert!(diff < 1e-6, "diff {diff}");
        }
    }

    #[test]
    fn extract_of_constant_frame_is_zero() {
        let s = grid(0.0, 1.0, 129);
        let z0 = mat_exp(&paper_type_c(), 0.7);
        let frame = FramePath {
            s: s.clone(),
            z: vec![z0; s.len()],
            declared_type: None,
        };
        let rec = extract_coefficients(&frame).unwrap();
        assert!(rec.max_norm() < 1e-12);
    }

    #[test]
    fn extract_integrate_roundtrip() {
        let s = grid(0.0, 1.5, 3073);
        let coeffs = fourier_coeffs(&s, 7);
        let frame = integrate_frame(&coeffs, Mat4::IDENTITY).unwrap();
        let rec = extract_coefficients(&frame).unwrap();
        let mut worst = 0.0f64;
        for (a, b) in rec.x.iter().zip(coeffs.x.iter()) {
            for k in 0..6 {
                worst = worst.max((a.upper[k] - b.upper[k]).abs());
            }
        }
        assert!(worst < 1e-6, "worst {worst}");
    }

    #[test]
    fn transform_of_equal_flows_is_identity() {
        let s = grid(0.0, 1.0, 257);
        let x = fourier_coeffs(&s, 3);
        let g = solve_transform(&x, &x, Mat4::IDENTITY).unwrap();
        for gi in &g.g {
            assert!((*gi - Mat4::IDENTITY).norm_inf() < 1e-12);
        }
    }

    #[test]
    fn transform_with_zero_source_reduces_to_frame_equation() {
        let s = grid(0.0, 1.0, 513);
        let x0 = CoefficientPath::from_samples(s.clone(), vec![Skew4::ZERO; s.len()]);
        let x1 = fourier_coeffs(&s, 11);
        let g0 = mat_exp(&paper_type_c(), 0.4);
        let g = solve_transform(&x0, &x1, g0).unwrap();
        let frame = integrate_frame(&x1, g0).unwrap();
        for (gi, zi) in g.g.iter().zip(frame.z.iter()) {
            assert!((*gi - *zi).norm_inf() < 1e-10);
        }
    }

    #[test]
    fn transform_conjugates_frames() {
        // Z1 := G Z0 satisfies Z1' = X1 Z1 (checked by finite differences)
        let s = grid(0.0, 1.0, 2049);
        let h = s[1] - s[0];
        let x0 = fourier_coeffs(&s, 21);
        let x1 = fourier_coeffs(&s, 22);
        let z0 = integrate_frame(&x0, Mat4::IDENTITY).unwrap();
        let g = solve_transform(&x0, &x1, Mat4::IDENTITY).unwrap();
        let z1: Vec<Mat4> = g
            .g
            .iter()
            .zip(z0.z.iter())
            .map(|(gi, zi)| *gi * *zi)
            .collect();
        let n = z1.len();
        let mut worst = 0.0f64;
        for i in 0..n {
            let dz = frame_derivative(&z1, i, n, h);
            let defect = dz - x1.x[i].to_mat() * z1[i];
            worst = worst.max(defect.norm_inf());
        }
        assert!(worst < 1e-6, "worst {worst}");
    }

    #[test]
    fn integrate_with_curve_accumulates_positions() {
        let s = grid(0.0, 1.0, 257);
        let x = CoefficientPath::from_samples(s.clone(), vec![Skew4::ZERO; s.len()]);
        let (_, path) = integrate_frame_with_curve(&x, Mat4::IDENTITY, Vec4::ZERO).unwrap();
        for (i, g) in path.gamma.iter().enumerate() {
            assert!((g[0] - s[i]).abs() < 1e-12);
        }
    }
}
