//! Canonical example and counterexample curves, admissibility detectors and
//! the empirical type-C direction sweep.

use crate::curve::{
    arc_length_reparametrize_with, curve_from_tangent_with, CurvePath, CurveSpec,
    ReparamOptions, DEFAULT_GRID_PER_UNIT,
};
use crate::engine::{
    build_theta, default_normals, extract_coefficients, integrate_frame_with_curve, rmf_bishop,
    CoefficientPath, FramePath, ThetaMode, AVOID_TOL_SQ, THETA_RATE_CAP,
};
use crate::engine::type_c_internals::{bgbc1_transform, scalar_derivative};
use crate::error::{FrameError, Result};
use crate::linalg::{mat_exp, rotation_between, sym_eigen, Mat4, Skew4, Vec4};
use crate::pattern::{masked_residual, FrameType, MASKS, PERMS};
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;

/// Obstruction threshold on the one-sided principal-normal angle (radians).
pub const TYPE_D_OBSTRUCTION_ANGLE: f64 = 1e-3;

/// Whether a preset is expected to admit a frame of a given type through the
/// artifact's constructors and detectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Expectation {
    Admits,
    Fails,
    Unknown,
}

/// Names of the gallery presets.
pub const PRESET_NAMES: [&str; 8] = [
    "line", "circle", "helix4d", "expC", "gammaNoD", "noF", "bumpNoC", "bumpYesC",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum PresetKind {
    Line,
    Circle,
    Helix4d,
    ExpC,
    GammaNoD,
    NoF,
    BumpNoC,
    BumpYesC,
}

/// A catalog entry: how to build the curve and what the constructors are
/// expected to conclude for each frame type.
#[derive(Debug, Clone)]
pub struct Preset {
    pub name: &'static str,
    pub description: &'static str,
    pub spec: CurveSpec,
    pub expected: [(FrameType, Expectation); 4],
    kind: PresetKind,
}

/// A preset realized on a grid.
pub struct BuiltPreset {
    pub curve: CurvePath,
    /// Junction locations in arc length.
    pub junctions: Vec<f64>,
    /// Bishop coefficient channels when the preset is defined by them.
    pub bishop_channels: Option<Vec<[f64; 3]>>,
    /// The Bishop frame that realizes coefficient presets.
    pub bishop_frame: Option<FramePath>,
}

/// Look up a preset by name.
pub fn get_preset(name: &str) -> Result<Preset> {
    use Expectation::*;
    use FrameType::*;
    let (kind, description, domain, expected) = match name {
        "line" => (
            PresetKind::Line,
            "straight line (t, 0, 0, 0); regular but not 2-regular",
            (0.0, 1.0),
            [(B, Admits), (C, Fails), (D, Fails), (F, Fails)],
        ),
        "circle" => (
            PresetKind::Circle,
            "planar unit circle embedded in 4-space",
            (0.0, 2.0 * PI),
            [(B, Admits), (C, Admits), (D, Admits), (F, Fails)],
        ),
        "helix4d" => (
            PresetKind::Helix4d,
            "generalized helix (cos t, sin t, cos 2t, sin 2t); admits all four types",
            (0.0, 2.0 * PI * 5f64.sqrt()),
            [(B, Admits), (C, Admits), (D, Admits), (F, Admits)],
        ),
        "expC" => (
            PresetKind::ExpC,
            "constant type-C coefficient matrix with entries (2, 1, 1); frame exp(sX)",
            (0.0, 4.0),
            [(B, Admits), (C, Admits), (D, Admits), (F, Unknown)],
        ),
        "gammaNoD" => (
            PresetKind::GammaNoD,
            "flat-junction plane-switching curve; admits type C, fails type D",
            (-1.0, 1.0),
            [(B, Admits), (C, Admits), (D, Fails), (F, Fails)],
        ),
        "noF" => (
            PresetKind::NoF,
            "2-regular curve split between two hyperplanes; no type-F frame",
            (-1.0, 1.0),
            [(B, Admits), (C, Admits), (D, Admits), (F, Fails)],
        ),
        "bumpNoC" => (
            PresetKind::BumpNoC,
            "Bishop curvature bumps on all three axes; no direction admits type C",
            (-1.0, 3.0),
            [(B, Admits), (C, Fails), (D, Fails), (F, Fails)],
        ),
        "bumpYesC" => (
            PresetKind::BumpYesC,
            "Bishop curvature bumps on two axes after the first; admits type C",
            (-1.0, 3.0),
            [(B, Admits), (C, Admits), (D, Fails), (F, Fails)],
        ),
        other => return Err(FrameError::UnknownPreset(other.to_string())),
    };
    let span = domain.1 - domain.0;
    let default_n = ((span * DEFAULT_GRID_PER_UNIT as f64).round() as usize).max(1024) + 1;
    let mut spec = CurveSpec::new(name, domain, default_n);
    spec.kind = name.to_string();
    Ok(Preset {
        name: match name {
            "line" => "line",
            "circle" => "circle",
            "helix4d" => "helix4d",
            "expC" => "expC",
            "gammaNoD" => "gammaNoD",
            "noF" => "noF",
            "bumpNoC" => "bumpNoC",
            _ => "bumpYesC",
        },
        description,
        spec,
        expected,
        kind,
    })
}

/// The constant type-C coefficient matrix of the exp-curve preset.
pub fn expc_matrix() -> Skew4 {
    // entries (0,1) = 2, (0,2) = 1, (1,3) = 1
    Skew4::from_upper([2.0, 1.0, 0.0, 0.0, 1.0, 0.0])
}

/// Closed-form position of the exp-curve preset.
pub fn expc_gamma(s: f64) -> Vec4 {
    let r2 = 2.0f64.sqrt();
    Vec4::new(
        (r2 * s).sin() * s.cos() / r2,
        s.sin() * (r2 * s).sin() / r2,
        (-s.sin() * (r2 * s).sin() - r2 * s.cos() * (r2 * s).cos()) / r2,
        ((r2 * s).sin() * s.cos() - r2 * s.sin() * (r2 * s).cos()) / r2,
    )
}

fn flat_pos(t: f64) -> f64 {
    if t > 0.0 {
        (-1.0 / t).exp()
    } else {
        0.0
    }
}

/// Tangent field of the no-type-F curve (inverse stereographic form).
pub fn nof_tangent(s: f64) -> Vec4 {
    if s > 0.0 {
        let v = (-1.0 / s).exp();
        let d = s * s + v * v + 1.0;
        Vec4::new(2.0 * s / d, 2.0 * v / d, 0.0, (s * s + v * v - 1.0) / d)
    } else if s < 0.0 {
        let v = (1.0 / s).exp();
        let d = s * s + v * v + 1.0;
        Vec4::new(2.0 * s / d, 0.0, 2.0 * v / d, (s * s + v * v - 1.0) / d)
    } else {
        Vec4::new(0.0, 0.0, 0.0, -1.0)
    }
}

/// Bishop curvature channels of the bump presets.
pub fn bump_channels(with_tail: bool, s: f64) -> [f64; 3] {
    let b1 = if s < 0.0 {
        (1.0 / s).exp()
    } else if with_tail && s > 2.0 {
        (-1.0 / (s - 2.0)).exp()
    } else {
        0.0
    };
    let b2 = if s > 0.0 && s < 1.0 {
        (-1.0 / (s * (1.0 - s))).exp()
    } else {
        0.0
    };
    let b3 = if s > 1.0 && s < 2.0 {
        (-1.0 / ((s - 1.0) * (2.0 - s))).exp()
    } else {
        0.0
    };
    [b1, b2, b3]
}

impl Preset {
    /// Realize the preset on a grid of `n` samples (default from the spec).
    pub fn build(&self, n: Option<usize>) -> Result<BuiltPreset> {
        let n = n.unwrap_or(self.spec.sample_count);
        let dom = self.spec.domain;
        match self.kind {
            PresetKind::Line => {
                let curve = CurvePath::from_arc_length_closures(
                    dom,
                    n,
                    &|s| Vec4::new(s, 0.0, 0.0, 0.0),
                    &|_| Vec4::basis(0),
                    Some(&|_| Vec4::ZERO),
                    Some(&|_| Vec4::ZERO),
                    Vec::new(),
                )?;
                Ok(BuiltPreset {
                    curve,
                    junctions: Vec::new(),
                    bishop_channels: None,
                    bishop_frame: None,
                })
            }
            PresetKind::Circle => {
                let curve = CurvePath::from_arc_length_closures(
                    dom,
                    n,
                    &|s| Vec4::new(s.cos(), s.sin(), 0.0, 0.0),
                    &|s| Vec4::new(-s.sin(), s.cos(), 0.0, 0.0),
                    Some(&|s| Vec4::new(-s.cos(), -s.sin(), 0.0, 0.0)),
                    Some(&|s| Vec4::new(s.sin(), -s.cos(), 0.0, 0.0)),
                    Vec::new(),
                )?;
                Ok(BuiltPreset {
                    curve,
                    junctions: Vec::new(),
                    bishop_channels: None,
                    bishop_frame: None,
                })
            }
            PresetKind::Helix4d => {
                let r5 = 5f64.sqrt();
                let g = move |s: f64| {
                    let t = s / r5;
                    Vec4::new(t.cos(), t.sin(), (2.0 * t).cos(), (2.0 * t).sin())
                };
                let tf = move |s: f64| {
                    let t = s / r5;
                    Vec4::new(-t.sin(), t.cos(), -2.0 * (2.0 * t).sin(), 2.0 * (2.0 * t).cos())
                        .scale(1.0 / r5)
                };
                let tp = move |s: f64| {
                    let t = s / r5;
                    Vec4::new(-t.cos(), -t.sin(), -4.0 * (2.0 * t).cos(), -4.0 * (2.0 * t).sin())
                        .scale(1.0 / 5.0)
                };
                let tpp = move |s: f64| {
                    let t = s / r5;
                    Vec4::new(t.sin(), -t.cos(), 8.0 * (2.0 * t).sin(), -8.0 * (2.0 * t).cos())
                        .scale(1.0 / (5.0 * r5))
                };
                let curve = CurvePath::from_arc_length_closures(
                    dom, n, &g, &tf, Some(&tp), Some(&tpp), Vec::new(),
                )?;
                Ok(BuiltPreset {
                    curve,
                    junctions: Vec::new(),
                    bishop_channels: None,
                    bishop_frame: None,
                })
            }
            PresetKind::ExpC => {
                let x = expc_matrix();
                let xm = x.to_mat();
                let tf = move |s: f64| mat_exp(&x, s).row(0);
                let tp = move |s: f64| (xm * mat_exp(&x, s)).row(0);
                let tpp = move |s: f64| (xm * (xm * mat_exp(&x, s))).row(0);
                let curve = CurvePath::from_arc_length_closures(
                    dom,
                    n,
                    &expc_gamma,
                    &tf,
                    Some(&tp),
                    Some(&tpp),
                    Vec::new(),
                )?;
                Ok(BuiltPreset {
                    curve,
                    junctions: Vec::new(),
                    bishop_channels: None,
                    bishop_frame: None,
                })
            }
            PresetKind::GammaNoD => {
                let pos = |t: f64| {
                    if t > 0.0 {
                        Vec4::new(t, flat_pos(t), 0.0, 0.0)
                    } else if t < 0.0 {
                        Vec4::new(t, 0.0, flat_pos(-t), 0.0)
                    } else {
                        Vec4::ZERO
                    }
                };
                let vel = |t: f64| {
                    if t > 0.0 {
                        Vec4::new(1.0, flat_pos(t) / (t * t), 0.0, 0.0)
                    } else if t < 0.0 {
                        Vec4::new(1.0, 0.0, -flat_pos(-t) / (t * t), 0.0)
                    } else {
                        Vec4::basis(0)
                    }
                };
                let curve = arc_length_reparametrize_with(
                    &pos,
                    dom,
                    n,
                    &ReparamOptions {
                        velocity: Some(&vel),
                        breakpoints: &[0.0],
                    },
                )?;
                let junctions = curve.breakpoints.clone();
                Ok(BuiltPreset {
                    curve,
                    junctions,
                    bishop_channels: None,
                    bishop_frame: None,
                })
            }
            PresetKind::NoF => {
                // the tangent field is already arc length; anchor the origin
                // at the junction so each half stays inside its hyperplane
                let n_odd = if n % 2 == 0 { n + 1 } else { n };
                let curve = curve_from_tangent_with(
                    &nof_tangent,
                    dom,
                    n_odd,
                    Vec4::ZERO,
                    Some(0.0),
                    &[0.0],
                )?;
                let junctions = curve.breakpoints.clone();
                Ok(BuiltPreset {
                    curve,
                    junctions,
                    bishop_channels: None,
                    bishop_frame: None,
                })
            }
            PresetKind::BumpNoC | PresetKind::BumpYesC => {
                let tail = self.kind == PresetKind::BumpNoC;
                let h = (dom.1 - dom.0) / (n - 1) as f64;
                let s: Vec<f64> = (0..n).map(|i| dom.0 + i as f64 * h).collect();
                let channels: Vec<[f64; 3]> =
                    s.iter().map(|&x| bump_channels(tail, x)).collect();
                let coeffs = CoefficientPath::from_channels(
                    s,
                    FrameType::B.canonical_mask(),
                    channels.clone(),
                );
                let (frame, curve) =
                    integrate_frame_with_curve(&coeffs, Mat4::IDENTITY, Vec4::ZERO)?;
                let mut curve = curve;
                curve.breakpoints = vec![0.0, 1.0, 2.0];
                Ok(BuiltPreset {
                    curve,
                    junctions: vec![0.0, 1.0, 2.0],
                    bishop_channels: Some(channels),
                    bishop_frame: Some(frame),
                })
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Type-D obstruction detector
// ---------------------------------------------------------------------------

/// One-sided limits of the principal normal `T'/|T'|` at a junction.
#[derive(Debug, Clone, Serialize)]
pub struct TypeDObstruction {
    pub left_dir: Vec4,
    pub right_dir: Vec4,
    /// Angle between the one-sided limits, radians.
    pub angle: f64,
    pub obstructed: bool,
}

/// Detect a jump of the normalized curvature vector at `s_star` by Richardson
/// extrapolation of `T'/|T'|` on each punctured side.
pub fn detect_type_d_obstruction(curve: &CurvePath, s_star: f64) -> Result<TypeDObstruction> {
    let tp = curve
        .tp
        .as_ref()
        .ok_or_else(|| FrameError::InvalidFormat("curve lacks tangent derivatives".into()))?;
    let side_limit = |sign: f64, name: &'static str| -> Result<Vec4> {
        // nearest sample with |T'| above threshold on this side
        let mut base: Option<usize> = None;
        for (i, &si) in curve.s.iter().enumerate() {
            if (si - s_star) * sign > 1e-12 && tp[i].norm() >= 1e-8 {
                let better = match base {
                    None => true,
                    Some(b) => (si - s_star).abs() < (curve.s[b] - s_star).abs(),
                };
                if better {
                    base = Some(i);
                }
            }
        }
        let base = base.ok_or(FrameError::SideDegenerate {
            at: s_star,
            side: name,
            threshold: 1e-8,
        })?;
        let h0 = (curve.s[base] - s_star).abs();
        let u_at = |mult: f64| -> Option<Vec4> {
            let target = s_star + sign * h0 * mult;
            let idx = curve
                .s
                .iter()
                .enumerate()
                .filter(|(_, &si)| (si - s_star) * sign > 0.0)
                .min_by(|(_, a), (_, b)| {
                    (*a - target).abs().total_cmp(&(*b - target).abs())
                })?
                .0;
            if tp[idx].norm() < 1e-8 {
                return None;
            }
            Some(tp[idx].normalized())
        };
        let (u1, u2, u4) = (u_at(1.0), u_at(2.0), u_at(4.0));
        let dir = match (u1, u2, u4) {
            (Some(a), Some(b), Some(c)) => {
                // two Richardson levels assuming u(h) = u0 + c1 h + c2 h^2
                let l1 = a.scale(2.0) - b;
                let l2 = b.scale(2.0) - c;
                (l1.scale(4.0) - l2).scale(1.0 / 3.0)
            }
            (Some(a), Some(b), None) => a.scale(2.0) - b,
            (Some(a), None, None) => a,
            _ => {
                return Err(FrameError::SideDegenerate {
                    at: s_star,
                    side: name,
                    threshold: 1e-8,
                })
            }
        };
        Ok(dir.normalized())
    };
    let left = side_limit(-1.0, "left")?;
    let right = side_limit(1.0, "right")?;
    let angle = left.dot(&right).clamp(-1.0, 1.0).acos();
    Ok(TypeDObstruction {
        left_dir: left,
        right_dir: right,
        angle,
        obstructed: angle > TYPE_D_OBSTRUCTION_ANGLE,
    })
}

// ---------------------------------------------------------------------------
// Type-F obstruction detector
// ---------------------------------------------------------------------------

/// Principal-component analysis of the one-sided derivative spans.
#[derive(Debug, Clone, Serialize)]
pub struct TypeFObstruction {
    pub left_dim: usize,
    pub right_dim: usize,
    /// Hyperplane normals when a side spans exactly three dimensions.
    pub left_normal: Option<Vec4>,
    pub right_normal: Option<Vec4>,
    /// Dimension of the intersection of the two spans when both are proper.
    pub intersection_dim: Option<usize>,
    /// Both germs are rank-3 hyperplane germs whose spans only share a plane.
    pub obstructed: bool,
    /// Neither side is confined to a hyperplane, so no split exists.
    pub no_two_sided_split: bool,
}

/// Compare the minimal subspaces spanned by `{gamma', gamma'', gamma'''}` on
/// each side of `s_star`.
pub fn detect_type_f_obstruction(curve: &CurvePath, s_star: f64) -> Result<TypeFObstruction> {
    let tp = curve
        .tp
        .as_ref()
        .ok_or_else(|| FrameError::InvalidFormat("curve lacks tangent derivatives".into()))?;
    let tpp = curve
        .tpp
        .as_ref()
        .ok_or_else(|| FrameError::InvalidFormat("curve lacks second derivatives".into()))?;

    let side_span = |sign: f64| -> (usize, Option<Vec4>) {
        let mut m = Mat4::ZERO;
        let mut count = 0usize;
        for (i, &si) in curve.s.iter().enumerate() {
            if (si - s_star) * sign <= 1e-12 {
                continue;
            }
            count += 1;
            for v in [&curve.t[i], &tp[i], &tpp[i]] {
                let n = v.norm();
                if n < 1e-12 {
                    continue;
                }
                let u = v.scale(1.0 / n);
                for r in 0..4 {
                    for c in 0..4 {
                        m.0[r][c] += u[r] * u[c];
                    }
                }
            }
        }
        if count == 0 {
            return (0, None);
        }
        let (vals, vecs) = sym_eigen(&m);
        let lead = vals[3].max(1e-300);
        let dim = vals.iter().filter(|&&v| v > 1e-8 * lead).count();
        let normal = if dim == 3 {
            Some(vecs.row(0).normalized())
        } else {
            None
        };
        (dim, normal)
    };

    let (left_dim, left_normal) = side_span(-1.0);
    let (right_dim, right_normal) = side_span(1.0);
    let intersection_dim = match (left_dim, right_dim, &left_normal, &right_normal) {
        (3, 3, Some(nl), Some(nr)) => {
            // two hyperplanes intersect in a plane unless they coincide
            let same = nl.dot(nr).abs() > 1.0 - 1e-6;
            Some(if same { 3 } else { 2 })
        }
        _ => None,
    };
    let obstructed = intersection_dim == Some(2);
    Ok(TypeFObstruction {
        left_dim,
        right_dim,
        left_normal,
        right_normal,
        intersection_dim,
        obstructed,
        no_two_sided_split: left_dim == 4 || right_dim == 4,
    })
}

// ---------------------------------------------------------------------------
// Hyperplane type-C construction
// ---------------------------------------------------------------------------

/// Construct a type-C frame on a curve confined to a hyperplane: rotation
/// minimizing transport of two in-hyperplane normals with the constant
/// hyperplane normal inserted as the middle frame row (T, N1, n, N2).
///
/// The hyperplane normal never rotates (T' is orthogonal to it), so the
/// coefficient matrix keeps entries only in the (0,1) and (0,3) slots, a
/// sub-pattern of the type-C masks.
pub fn hyperplane_type_c(curve: &CurvePath) -> Result<FramePath> {
    // find the hyperplane from the tangent data
    let mut m = Mat4::ZERO;
    let tp = curve
        .tp
        .as_ref()
        .ok_or_else(|| FrameError::InvalidFormat("curve lacks tangent derivatives".into()))?;
    for (t, d) in curve.t.iter().zip(tp.iter()) {
        for v in [t, d] {
            let n = v.norm();
            if n < 1e-12 {
                continue;
            }
            let u = v.scale(1.0 / n);
            for r in 0..4 {
                for c in 0..4 {
                    m.0[r][c] += u[r] * u[c];
                }
            }
        }
    }
    let (vals, vecs) = sym_eigen(&m);
    let normal = vecs.row(0).normalized();
    if vals[0] > 1e-10 * vals[3].max(1e-300) {
        return Err(FrameError::InvalidFormat(
            "hyperplane_type_c: curve does not lie in a hyperplane".into(),
        ));
    }
    for (i, t) in curve.t.iter().enumerate() {
        if t.dot(&normal).abs() > 1e-7 {
            return Err(FrameError::InvalidFormat(format!(
                "hyperplane_type_c: tangent leaves the hyperplane at s = {}",
                curve.s[i]
            )));
        }
    }
    // complete T(s0), normal to an orthonormal frame; transport (N1, N2)
    let t0 = curve.t[0];
    let defaults = default_normals(&t0);
    let mut n1 = Vec4::ZERO;
    let mut best = -1.0;
    for cand in defaults.iter() {
        let mut v = *cand - normal.scale(cand.dot(&normal));
        v = v - t0.scale(v.dot(&t0));
        if v.norm() > best {
            best = v.norm();
            n1 = v;
        }
    }
    let n1 = n1.normalized();
    let n2 = crate::linalg::cross4(&t0, &n1, &normal).normalized();
    let frame = rmf_bishop(curve, [n1, normal, n2])?;
    Ok(FramePath {
        s: frame.s,
        z: frame.z,
        declared_type: Some(FrameType::C),
    })
}

// ---------------------------------------------------------------------------
// Empirical type-C direction sweep
// ---------------------------------------------------------------------------

/// Configuration of [`empirical_type_c_sweep`].
#[derive(Debug, Clone, Copy)]
pub struct SweepConfig {
    /// Fibonacci grid size (the three coordinate axes are always added).
    pub grid_q: usize,
    /// Slew-rate cap for bridging numerically dead gaps.
    pub rate_cap: f64,
    /// Residual at or below which a direction counts as a success.
    pub success_tol: f64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            grid_q: 4096,
            rate_cap: THETA_RATE_CAP,
            success_tol: 1e-5,
        }
    }
}

/// Outcome of one swept direction.
#[derive(Debug, Clone, Serialize)]
pub struct SweepOutcome {
    pub xi: [f64; 3],
    /// The strict avoided-direction condition held on the whole domain.
    pub strict_avoidance: bool,
    /// All dead-gap bridges fit under the slew-rate cap.
    pub feasible: bool,
    /// max(off-pattern residual, c3 closed-form defect on live samples).
    pub residual: f64,
}

/// Sweep report: per-direction outcomes and the best residual found.
#[derive(Debug, Clone, Serialize)]
pub struct SweepReport {
    pub outcomes: Vec<SweepOutcome>,
    pub best_residual: f64,
    pub best_xi: [f64; 3],
    pub succeeded: bool,
}

/// Sweep candidate avoided directions: for each `xi`, rotate the Bishop frame
/// so `xi` lands on the second normal axis, attempt the type-C construction
/// with rate-capped bridging, and verify the result against the type-C mask
/// and the coefficient closed forms.
///
/// Failing every direction is evidence against type-C existence, not a proof.
pub fn empirical_type_c_sweep(
    s: &[f64],
    channels: &[[f64; 3]],
    config: &SweepConfig,
) -> Result<SweepReport> {
    let n = s.len();
    if n < 16 {
        return Err(FrameError::InsufficientSamples { need: 16, got: n });
    }
    let h = (s[n - 1] - s[0]) / (n - 1) as f64;
    let coeffs = CoefficientPath::from_channels(
        s.to_vec(),
        FrameType::B.canonical_mask(),
        channels.to_vec(),
    );
    let (bishop, _) = integrate_frame_with_curve(&coeffs, Mat4::IDENTITY, Vec4::ZERO)?;

    // candidate directions: Fibonacci grid plus the coordinate axes
    let golden = PI * (3.0 - 5.0f64.sqrt());
    let mut dirs: Vec<[f64; 3]> = (0..config.grid_q)
        .map(|i| {
            let z = 1.0 - 2.0 * (i as f64 + 0.5) / config.grid_q as f64;
            let r = (1.0 - z * z).max(0.0).sqrt();
            let phi = golden * i as f64;
            [r * phi.cos(), r * phi.sin(), z]
        })
        .collect();
    dirs.push([1.0, 0.0, 0.0]);
    dirs.push([0.0, 1.0, 0.0]);
    dirs.push([0.0, 0.0, 1.0]);

    let c_mask = FrameType::C.canonical_mask();
    let outcomes: Vec<SweepOutcome> = dirs
        .par_iter()
        .map(|xi| {
            let q = rotation_between(xi, &[0.0, 1.0, 0.0]);
            let qe = q.embed();
            let mut b1 = vec![0.0; n];
            let mut b2 = vec![0.0; n];
            let mut b3 = vec![0.0; n];
            for (i, ch) in channels.iter().enumerate() {
                let r = q.mul_vec(ch);
                b1[i] = r[0];
                b2[i] = r[1];
                b3[i] = r[2];
            }
            let strict = b1
                .iter()
                .zip(b3.iter())
                .all(|(&a, &c)| a * a + c * c >= AVOID_TOL_SQ);
            let th = match build_theta(
                &b1,
                &b3,
                s,
                1.0,
                ThetaMode::Tolerant {
                    rate_cap: config.rate_cap,
                },
            ) {
                Ok(t) => t,
                Err(_) => {
                    return SweepOutcome {
                        xi: *xi,
                        strict_avoidance: strict,
                        feasible: false,
                        residual: f64::INFINITY,
                    }
                }
            };
            // C = G(theta) diag(1,Q) B pointwise
            let zc: Vec<Mat4> = th
                .theta
                .iter()
                .zip(bishop.z.iter())
                .map(|(&t, z)| bgbc1_transform(t, 1.0) * (qe * *z))
                .collect();
            let frame = FramePath {
                s: s.to_vec(),
                z: zc,
                declared_type: Some(FrameType::C),
            };
            let extracted = extract_coefficients(&frame).expect("equispaced grid");
            let off = masked_residual(&extracted.x, c_mask, &PERMS[0]);
            // closed-form c3 defect on live samples
            let db1 = scalar_derivative(&b1, h);
            let db3 = scalar_derivative(&b3, h);
            let c3_slot = MASKS[c_mask][2];
            let mut c3_defect = 0.0f64;
            for i in 0..n {
                if !th.live[i] {
                    continue;
                }
                let r2 = b1[i] * b1[i] + b3[i] * b3[i];
                let closed = (db3[i] * b1[i] - b3[i] * db1[i]) / r2;
                let got = extracted.x[i].upper[c3_slot];
                c3_defect = c3_defect.max((got - closed).abs());
            }
            SweepOutcome {
                xi: *xi,
                strict_avoidance: strict,
                feasible: th.feasible,
                residual: off.max(c3_defect),
            }
        })
        .collect();

    let mut best = (f64::INFINITY, [0.0, 1.0, 0.0]);
    for o in &outcomes {
        if o.residual < best.0 {
            best = (o.residual, o.xi);
        }
    }
    Ok(SweepReport {
        succeeded: best.0 <= config.success_tol,
        outcomes,
        best_residual: best.0,
        best_xi: best.1,
    })
}
