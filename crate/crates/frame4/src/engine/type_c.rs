//! Type-C frames from Bishop frames: the avoided-direction search, the
//! rotation-angle construction and the coefficient closed forms.
//!
//! The construction needs a globally smooth angle `theta` with
//! `(cos theta, sin theta) ~ (b1, b3)/sqrt(b1^2 + b3^2)` wherever that pair
//! is alive. The strict builder demands it alive everywhere; the tolerant
//! builder (used by the gallery sweep) pins `theta` on live samples and
//! bridges numerically dead gaps with slew-rate-limited smoothsteps, so the
//! impossibility of a slow bridge shows up as a measurable residual instead
//! of an invisible jump inside a flat junction.

use super::{check_equispaced, CoefficientPath, FramePath, TransformPath};
use crate::error::{FrameError, Result};
use crate::linalg::Mat4;
use crate::pattern::{pattern_residual, FrameType};
use std::f64::consts::{FRAC_PI_2, PI};

/// Threshold on `b1^2 + b3^2` below which the avoided-direction condition
/// counts as violated.
pub const AVOID_TOL_SQ: f64 = 1e-10;
/// Max mean slew rate (rad per unit arc length) a bridge across a dead gap
/// may use before the construction is declared infeasible there.
pub const THETA_RATE_CAP: f64 = 2.0;
/// Per-step angle jump that raises a resolution error inside live runs.
pub const THETA_JUMP_MAX: f64 = FRAC_PI_2;

/// How [`build_theta`] treats samples where `b1^2 + b3^2` is numerically dead.
#[derive(Debug, Clone, Copy)]
pub enum ThetaMode {
    /// Every sample must be alive; anything else is `AvoidanceFailed`.
    Strict,
    /// Pin on live samples, bridge dead gaps at a capped slew rate.
    Tolerant { rate_cap: f64 },
}

/// The unwrapped angle channel with its live mask.
#[derive(Debug, Clone)]
pub struct ThetaPath {
    pub theta: Vec<f64>,
    pub live: Vec<bool>,
    /// False when some gap needed a faster swing than the rate cap allows;
    /// the bridge then widens into live samples and misaligns there.
    pub feasible: bool,
}

fn smootherstep(u: f64) -> f64 {
    u * u * u * (u * (u * 6.0 - 15.0) + 10.0)
}

/// Build the unwrapped angle with `(cos, sin) = sigma (b1, b3)/r` on live
/// samples, continued nearest mod 2 pi.
pub(crate) fn build_theta(
    b1: &[f64],
    b3: &[f64],
    s: &[f64],
    sigma: f64,
    mode: ThetaMode,
) -> Result<ThetaPath> {
    let n = s.len();
    let mut live = vec![false; n];
    let mut worst = (f64::INFINITY, s[0]);
    for i in 0..n {
        let r2 = b1[i] * b1[i] + b3[i] * b3[i];
        live[i] = r2 >= AVOID_TOL_SQ;
        if r2 < worst.0 {
            worst = (r2, s[i]);
        }
    }
    if let ThetaMode::Strict = mode {
        if worst.0 < AVOID_TOL_SQ {
            return Err(FrameError::AvoidanceFailed {
                at: worst.1,
                min_sq: worst.0,
            });
        }
    }

    // pinned continuation on live samples
    let mut theta = vec![f64::NAN; n];
    let mut prev: Option<usize> = None;
    for i in 0..n {
        if !live[i] {
            continue;
        }
        let raw = (sigma * b3[i]).atan2(sigma * b1[i]);
        theta[i] = match prev {
            None => raw,
            Some(p) => {
                let mut d = raw - theta[p];
                d -= 2.0 * PI * (d / (2.0 * PI)).round();
                if i == p + 1 && d.abs() > THETA_JUMP_MAX {
                    return Err(FrameError::ResolutionExceeded {
                        at: s[i],
                        jump: d.abs(),
                    });
                }
                theta[p] + d
            }
        };
        prev = Some(i);
    }

    let live_idx: Vec<usize> = (0..n).filter(|&i| live[i]).collect();
    if live_idx.is_empty() {
        return Ok(ThetaPath {
            theta: vec![0.0; n],
            live,
            feasible: true,
        });
    }

    // leading/trailing holds
    let first = live_idx[0];
    let last = *live_idx.last().unwrap();
    for i in 0..first {
        theta[i] = theta[first];
    }
    for i in last + 1..n {
        theta[i] = theta[last];
    }

    // interior gap bridges
    let rate_cap = match mode {
        ThetaMode::Strict => f64::INFINITY,
        ThetaMode::Tolerant { rate_cap } => rate_cap,
    };
    let mut feasible = true;
    for w in live_idx.windows(2) {
        let (i0, i1) = (w[0], w[1]);
        if i1 == i0 + 1 {
            continue;
        }
        let (t_l, t_r) = (theta[i0], theta[i1]);
        let swing = (t_r - t_l).abs();
        let width = s[i1] - s[i0];
        if swing < 1e-15 {
            for j in i0 + 1..i1 {
                theta[j] = t_l;
            }
        } else if swing / width <= rate_cap {
            for j in i0 + 1..i1 {
                let u = (s[j] - s[i0]) / width;
                theta[j] = t_l + (t_r - t_l) * smootherstep(u);
            }
        } else {
            // widen the bridge to the rate cap, overrunning live samples
            feasible = false;
            let need = swing / rate_cap;
            let mid = 0.5 * (s[i0] + s[i1]);
            let a = (mid - 0.5 * need).max(s[0]);
            let b = (mid + 0.5 * need).min(s[n - 1]);
            for j in 0..n {
                if s[j] < a || s[j] > b {
                    continue;
                }
                let u = (s[j] - a) / (b - a);
                theta[j] = t_l + (t_r - t_l) * smootherstep(u);
            }
            for j in i0 + 1..i1 {
                if s[j] < a {
                    theta[j] = t_l;
                } else if s[j] > b {
                    theta[j] = t_r;
                }
            }
        }
    }
    Ok(ThetaPath {
        theta,
        live,
        feasible,
    })
}

/// The transform of eq-bGbc1 shape: rotation by `theta` in the (1,3) normal
/// plane with the first normal row scaled by `tau` in {+1, -1}.
pub(crate) fn bgbc1_transform(theta: f64, tau: f64) -> Mat4 {
    let (c, s) = (theta.cos(), theta.sin());
    Mat4([
        [1.0, 0.0, 0.0, 0.0],
        [0.0, tau * c, 0.0, tau * s],
        [0.0, 0.0, 1.0, 0.0],
        [0.0, -s, 0.0, c],
    ])
}

/// 4th-order derivative of a scalar sample sequence on an equispaced grid.
pub(crate) fn scalar_derivative(y: &[f64], h: f64) -> Vec<f64> {
    let n = y.len();
    let mut out = vec![0.0; n];
    for i in 0..n {
        let (w, idx): ([f64; 5], [usize; 5]) = if i < 2 {
            match i {
                0 => ([-25.0, 48.0, -36.0, 16.0, -3.0], [0, 1, 2, 3, 4]),
                _ => ([-3.0, -10.0, 18.0, -6.0, 1.0], [0, 1, 2, 3, 4]),
            }
        } else if i + 2 >= n {
            if i == n - 1 {
                ([3.0, -16.0, 36.0, -48.0, 25.0], [n - 5, n - 4, n - 3, n - 2, n - 1])
            } else {
                ([-1.0, 6.0, -18.0, 10.0, 3.0], [n - 5, n - 4, n - 3, n - 2, n - 1])
            }
        } else {
            ([1.0, -8.0, 0.0, 8.0, -1.0], [i - 2, i - 1, i, i + 1, i + 2])
        };
        out[i] = (0..5).map(|k| w[k] * y[idx[k]]).sum::<f64>() / (12.0 * h);
    }
    out
}

/// Convert a Bishop frame to a type-C frame when `(b1, b3)` avoids zero.
///
/// Returns the C frame `G * Bishop`, its coefficients from the closed forms
/// `c1 = sign1 sqrt(b1^2 + b3^2)`, `c2 = b2`,
/// `c3 = sign3 (b3' b1 - b3 b1')/(b1^2 + b3^2)`, and the transform path.
pub fn type_c_from_bishop(
    bishop: &FramePath,
    b: &CoefficientPath,
    sign1: i8,
    sign3: i8,
) -> Result<(FramePath, CoefficientPath, TransformPath)> {
    let h = check_equispaced(&b.s)?;
    if bishop.s.len() != b.s.len()
        || (bishop.s[0] - b.s[0]).abs() > 1e-12
        || (bishop.s[bishop.len() - 1] - b.s[b.len() - 1]).abs() > 1e-12
    {
        return Err(FrameError::InvalidFormat(
            "type_c_from_bishop: frame and coefficient grids differ".into(),
        ));
    }
    let residual = pattern_residual(&b.x, FrameType::B.canonical_mask());
    if residual > super::PATTERN_DECLARE_TOL {
        return Err(FrameError::PatternMismatch {
            expected: "type B",
            residual,
        });
    }
    let n = b.s.len();
    let b1: Vec<f64> = b.x.iter().map(|x| x.upper[0]).collect();
    let b2: Vec<f64> = b.x.iter().map(|x| x.upper[1]).collect();
    let b3: Vec<f64> = b.x.iter().map(|x| x.upper[2]).collect();

    let sigma = (sign1 * sign3) as f64;
    let tau = sign3 as f64;
    let th = build_theta(&b1, &b3, &b.s, sigma, ThetaMode::Strict)?;

    let gs: Vec<Mat4> = th.theta.iter().map(|&t| bgbc1_transform(t, tau)).collect();
    let zs: Vec<Mat4> = gs
        .iter()
        .zip(bishop.z.iter())
        .map(|(g, z)| *g * *z)
        .collect();

    let db1 = scalar_derivative(&b1, h);
    let db3 = scalar_derivative(&b3, h);
    let mut channels = Vec::with_capacity(n);
    for i in 0..n {
        let r2 = b1[i] * b1[i] + b3[i] * b3[i];
        let c1 = sign1 as f64 * r2.sqrt();
        let c3 = sign3 as f64 * (db3[i] * b1[i] - b3[i] * db1[i]) / r2;
        channels.push([c1, b2[i], c3]);
    }
    let coeffs =
        CoefficientPath::from_channels(b.s.clone(), FrameType::C.canonical_mask(), channels);

    Ok((
        FramePath {
            s: b.s.clone(),
            z: zs,
            declared_type: Some(FrameType::C),
        },
        coeffs,
        TransformPath {
            s: b.s.clone(),
            g: gs,
            theta: th.theta,
            signs: (sign1, sign3),
        },
    ))
}

/// Search a Fibonacci grid of unit directions (antipodes identified) for the
/// direction maximizing the worst-case angular distance to the projectivized
/// samples, then refine locally. Returns the winner and its margin
/// `min_i ||xi x b_hat_i||`.
pub fn find_avoided_direction(b_samples: &[[f64; 3]]) -> ([f64; 3], f64) {
    find_avoided_direction_with(b_samples, 4096)
}

/// Same with an explicit grid size.
pub fn find_avoided_direction_with(b_samples: &[[f64; 3]], grid: usize) -> ([f64; 3], f64) {
    let hats: Vec<[f64; 3]> = b_samples
        .iter()
        .filter_map(|b| {
            let n = (b[0] * b[0] + b[1] * b[1] + b[2] * b[2]).sqrt();
            if n < 1e-12 {
                None
            } else {
                Some([b[0] / n, b[1] / n, b[2] / n])
            }
        })
        .collect();
    if hats.is_empty() {
        return ([0.0, 1.0, 0.0], 1.0);
    }
    let margin = |xi: &[f64; 3]| -> f64 {
        let mut worst = f64::INFINITY;
        for h in &hats {
            let cx = xi[1] * h[2] - xi[2] * h[1];
            let cy = xi[2] * h[0] - xi[0] * h[2];
            let cz = xi[0] * h[1] - xi[1] * h[0];
            let m = (cx * cx + cy * cy + cz * cz).sqrt();
            if m < worst {
                worst = m;
            }
        }
        worst
    };

    let golden = PI * (3.0 - 5.0f64.sqrt());
    let mut best = ([0.0, 1.0, 0.0], -1.0);
    for i in 0..grid {
        let z = 1.0 - 2.0 * (i as f64 + 0.5) / grid as f64;
        let r = (1.0 - z * z).max(0.0).sqrt();
        let phi = golden * i as f64;
        let xi = [r * phi.cos(), r * phi.sin(), z];
        let m = margin(&xi);
        if m > best.1 {
            best = (xi, m);
        }
    }

    // gradient-free refinement: shrink the neighborhood by 4x each round
    let mut radius = 2.0 * (4.0 * PI / grid as f64).sqrt();
    for _round in 0..3 {
        let center = best.0;
        // tangent basis at the center
        let pick = if center[0].abs() < 0.9 {
            [1.0, 0.0, 0.0]
        } else {
            [0.0, 1.0, 0.0]
        };
        let mut u = [
            center[1] * pick[2] - center[2] * pick[1],
            center[2] * pick[0] - center[0] * pick[2],
            center[0] * pick[1] - center[1] * pick[0],
        ];
        let un = (u[0] * u[0] + u[1] * u[1] + u[2] * u[2]).sqrt();
        for x in u.iter_mut() {
            *x /= un;
        }
        let v = [
            center[1] * u[2] - center[2] * u[1],
            center[2] * u[0] - center[0] * u[2],
            center[0] * u[1] - center[1] * u[0],
        ];
        for k in 0..24 {
            let ang = 2.0 * PI * k as f64 / 24.0;
            let (ca, sa) = (ang.cos(), ang.sin());
            let mut xi = [0.0; 3];
            let mut norm = 0.0;
            for d in 0..3 {
                xi[d] = center[d] + radius * (ca * u[d] + sa * v[d]);
                norm += xi[d] * xi[d];
            }
            let norm = norm.sqrt();
            for x in xi.iter_mut() {
                *x /= norm;
            }
            let m = margin(&xi);
            if m > best.1 {
                best = (xi, m);
            }
        }
        radius *= 0.25;
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{extract_coefficients, integrate_frame};
    use crate::linalg::{Mat4, Skew4};
    use crate::pattern::MASKS;

    fn grid(a: f64, b: f64, n: usize) -> Vec<f64> {
        let h = (b - a) / (n - 1) as f64;
        (0..n).map(|i| a + i as f64 * h).collect()
    }

    fn bishop_from_b(s: &[f64], b: impl Fn(f64) -> [f64; 3]) -> (FramePath, CoefficientPath) {
        let channels: Vec<[f64; 3]> = s.iter().map(|&x| b(x)).collect();
        let coeffs = CoefficientPath::from_channels(
            s.to_vec(),
            FrameType::B.canonical_mask(),
            channels,
        );
        let frame = integrate_frame(&coeffs, Mat4::IDENTITY).unwrap();
        (frame, coeffs)
    }

    #[test]
    fn constant_b_gives_constant_c() {
        let s = grid(0.0, 2.0, 1025);
        let (frame, coeffs) = bishop_from_b(&s, |_| [1.0, 0.0, 0.0]);
        let (c_frame, c_coeffs, transform) = type_c_from_bishop(&frame, &coeffs, 1, 1).unwrap();
        for th in &transform.theta {
            assert!(th.abs() < 1e-12);
        }
        let ch = c_coeffs.channels.as_ref().unwrap();
        for c in ch {
            assert!((c[0] - 1.0).abs() < 1e-9 && c[1].abs() < 1e-9 && c[2].abs() < 1e-9);
        }
        let rec = extract_coefficients(&c_frame).unwrap();
        assert!(pattern_residual(&rec.x, FrameType::C.canonical_mask()) < 1e-6);
    }

    #[test]
    fn rotating_b_yields_unit_c1_and_c3() {
        // b = (cos s, 0, sin s): c1 = +-1, c2 = 0, c3 = +-1 by the closed form
        let s = grid(0.0, 3.0, 4097);
        let (frame, coeffs) = bishop_from_b(&s, |x| [x.cos(), 0.0, x.sin()]);
        for (sign1, sign3) in [(1i8, 1i8), (1, -1), (-1, 1), (-1, -1)] {
            let (c_frame, c_coeffs, _) =
                type_c_from_bishop(&frame, &coeffs, sign1, sign3).unwrap();
            let ch = c_coeffs.channels.as_ref().unwrap();
            for c in ch {
                assert!((c[0] - sign1 as f64).abs() < 1e-9);
                assert!(c[1].abs() < 1e-9);
                assert!((c[2] - sign3 as f64).abs() < 1e-5);
            }
            // extracted coefficients reproduce the closed form
            let rec = extract_coefficients(&c_frame).unwrap();
            assert!(
                pattern_residual(&rec.x, FrameType::C.canonical_mask()) < 1e-6,
                "sign1 {sign1} sign3 {sign3}"
            );
            let mask = &MASKS[FrameType::C.canonical_mask()];
            for (x, c) in rec.x.iter().zip(ch.iter()).skip(4).take(s.len() - 8) {
                assert!((x.upper[mask[0]] - c[0]).abs() < 1e-5);
                assert!((x.upper[mask[1]] - c[1]).abs() < 1e-5);
                assert!((x.upper[mask[2]] - c[2]).abs() < 1e-5);
            }
        }
    }

    #[test]
    fn avoidance_violation_is_reported() {
        let s = grid(0.0, 1.0, 257);
        let (frame, coeffs) = bishop_from_b(&s, |x| [x - 0.5, 0.3, 0.0]);
        match type_c_from_bishop(&frame, &coeffs, 1, 1) {
            Err(FrameError::AvoidanceFailed { .. }) => {}
            other => panic!("expected AvoidanceFailed, got {other:?}"),
        }
    }

    #[test]
    fn non_bishop_input_is_rejected() {
        let s = grid(0.0, 1.0, 64);
        let x = Skew4::from_upper([1.0, 0.0, 0.0, 0.5, 0.0, 0.0]);
        let coeffs = CoefficientPath::from_samples(s.clone(), vec![x; 64]);
        let frame = integrate_frame(&coeffs, Mat4::IDENTITY).unwrap();
        match type_c_from_bishop(&frame, &coeffs, 1, 1) {
            Err(FrameError::PatternMismatch { .. }) => {}
            other => panic!("expected PatternMismatch, got {other:?}"),
        }
    }

    #[test]
    fn avoided_direction_constant_axis() {
        let samples = vec![[1.0, 0.0, 0.0]; 200];
        let (xi, margin) = find_avoided_direction(&samples);
        assert!(margin >= 0.999, "margin {margin}");
        assert!(xi[0].abs() < 0.05, "xi {xi:?}");
    }

    #[test]
    fn avoided_direction_great_circle() {
        let samples: Vec<[f64; 3]> = (0..512)
            .map(|i| {
                let t = i as f64 * 0.02;
                [t.cos(), 0.0, t.sin()]
            })
            .collect();
        let (xi, margin) = find_avoided_direction(&samples);
        assert!(margin >= 0.999, "margin {margin}");
        assert!(xi[1].abs() > 0.999, "xi {xi:?}");
    }

    #[test]
    fn tolerant_theta_bridges_wide_gap() {
        let n = 2049;
        let s = grid(0.0, 2.0, n);
        // live on [0, 0.5] with angle 0, dead on (0.5, 1.5), live after with pi/2
        let b1: Vec<f64> = s.iter().map(|&x| if x <= 0.5 { 1.0 } else { 0.0 }).collect();
        let b3: Vec<f64> = s.iter().map(|&x| if x >= 1.5 { 1.0 } else { 0.0 }).collect();
        let th = build_theta(&b1, &b3, &s, 1.0, ThetaMode::Tolerant { rate_cap: 2.0 }).unwrap();
        assert!(th.feasible);
        assert!(th.theta[0].abs() < 1e-15);
        assert!((th.theta[n - 1] - FRAC_PI_2).abs() < 1e-12);

        // narrow gap: infeasible at the same cap
        let b1: Vec<f64> = s.iter().map(|&x| if x <= 0.99 { 1.0 } else { 0.0 }).collect();
        let b3: Vec<f64> = s.iter().map(|&x| if x >= 1.01 { 1.0 } else { 0.0 }).collect();
        let th = build_theta(&b1, &b3, &s, 1.0, ThetaMode::Tolerant { rate_cap: 2.0 }).unwrap();
        assert!(!th.feasible);
    }
}
