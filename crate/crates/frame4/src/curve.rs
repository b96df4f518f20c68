//! Curve representation: arc-length reparametrization, derivative estimation,
//! regularity diagnostics and reconstruction from tangent fields.
//!
//! Piecewise-defined inputs (the gallery's flat-junction curves) carry
//! breakpoints; derivative stencils never cross them, they switch to
//! one-sided form inside each piece.

use crate::error::{FrameError, Result};
use crate::linalg::Vec4;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Minimum speed for a curve to count as regular.
pub const REGULARITY_TOL: f64 = 1e-8;
/// Threshold on |T'| for 2-regularity flags.
pub const TWO_REGULARITY_TOL: f64 = 1e-6;
/// Threshold on the {gamma', gamma'', gamma'''} Gram determinant.
pub const FRENET_RANK_TOL: f64 = 1e-10;
/// Unit-norm tolerance for tangent-field probes.
pub const UNIT_TOL: f64 = 1e-8;
/// Default sample density per unit of arc length.
pub const DEFAULT_GRID_PER_UNIT: usize = 2048;

/// Input descriptor for gallery presets and the CLI.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CurveSpec {
    pub kind: String,
    pub params: BTreeMap<String, f64>,
    pub domain: (f64, f64),
    pub sample_count: usize,
}

impl CurveSpec {
    pub fn new(kind: &str, domain: (f64, f64), sample_count: usize) -> Self {
        CurveSpec {
            kind: kind.to_string(),
            params: BTreeMap::new(),
            domain,
            sample_count,
        }
    }
}

/// An arc-length sampled curve with tangent and higher derivative samples.
///
/// Invariants: `s` strictly increasing and equispaced, `|T| = 1` to 1e-8,
/// `T . T' = 0` to 1e-6 once derivatives are filled.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CurvePath {
    pub s: Vec<f64>,
    pub gamma: Vec<Vec4>,
    pub t: Vec<Vec4>,
    pub tp: Option<Vec<Vec4>>,
    pub tpp: Option<Vec<Vec4>>,
    /// Arc-length positions of piecewise junctions, if any.
    pub breakpoints: Vec<f64>,
}

/// Regularity diagnostics over the sample grid.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct RegularityReport {
    pub is_regular: bool,
    pub is_2_regular: bool,
    pub min_speed: f64,
    pub min_tp_norm: f64,
    pub frenet_rank_ok: bool,
    pub min_gram_det: f64,
    /// Arc length where |T'| attains its minimum.
    pub argmin_tp: f64,
}

impl CurvePath {
    pub fn len(&self) -> usize {
        self.s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s.is_empty()
    }

    pub fn step(&self) -> f64 {
        (self.s[self.s.len() - 1] - self.s[0]) / (self.s.len() - 1) as f64
    }

    /// Build directly from arc-length closures (unit-speed presets).
    pub fn from_arc_length_closures(
        domain: (f64, f64),
        n: usize,
        gamma: &dyn Fn(f64) -> Vec4,
        tangent: &dyn Fn(f64) -> Vec4,
        tp: Option<&dyn Fn(f64) -> Vec4>,
        tpp: Option<&dyn Fn(f64) -> Vec4>,
        breakpoints: Vec<f64>,
    ) -> Result<CurvePath> {
        if n < 16 {
            return Err(FrameError::InsufficientSamples { need: 16, got: n });
        }
        let s: Vec<f64> = grid(domain, n);
        let gamma_v: Vec<Vec4> = s.iter().map(|&x| gamma(x)).collect();
        let t_v: Vec<Vec4> = s.iter().map(|&x| tangent(x)).collect();
        for (&si, ti) in s.iter().zip(t_v.iter()) {
            let nrm = ti.norm();
            if (nrm - 1.0).abs() > UNIT_TOL {
                return Err(FrameError::NotUnit { at: si, norm: nrm });
            }
        }
        let mut path = CurvePath {
            s,
            gamma: gamma_v,
            t: t_v,
            tp: None,
            tpp: None,
            breakpoints,
        };
        if let Some(f) = tp {
            path.tp = Some(path.s.iter().map(|&x| f(x)).collect());
        }
        if let Some(f) = tpp {
            path.tpp = Some(path.s.iter().map(|&x| f(x)).collect());
        }
        if path.tp.is_none() || path.tpp.is_none() {
            derivatives(&mut path)?;
        }
        Ok(path)
    }

    /// Max deviation of |T| from 1 over the grid.
    pub fn max_unit_defect(&self) -> f64 {
        self.t
            .iter()
            .fold(0.0f64, |m, t| m.max((t.norm() - 1.0).abs()))
    }

    /// Max |T . T'| over the grid (zero for exact arc length).
    pub fn max_t_dot_tp(&self) -> f64 {
        match &self.tp {
            Some(tp) => self
                .t
                .iter()
                .zip(tp.iter())
                .fold(0.0f64, |m, (t, d)| m.max(t.dot(d).abs())),
            None => 0.0,
        }
    }
}

fn grid(domain: (f64, f64), n: usize) -> Vec<f64> {
    let h = (domain.1 - domain.0) / (n - 1) as f64;
    (0..n).map(|i| domain.0 + i as f64 * h).collect()
}

// ---------------------------------------------------------------------------
// Finite differences (Fornberg weights, piece-aware stencils)
// ---------------------------------------------------------------------------

/// Fornberg's algorithm: weights for derivatives of order 0..=m at `x0`
/// from the given nodes. Returns `w[order][node]`.
pub fn fornberg_weights(x0: f64, xs: &[f64], m: usize) -> Vec<Vec<f64>> {
    let n = xs.len();
    let mut c = vec![vec![0.0f64; n]; m + 1];
    let mut c1 = 1.0;
    let mut c4 = xs[0] - x0;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = xs[i] - x0;
        for j in 0..i {
            let c3 = xs[i] - xs[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

/// Index ranges [lo, hi) of maximal segments not crossing any breakpoint.
fn segment_ranges(s: &[f64], breakpoints: &[f64]) -> Vec<(usize, usize)> {
    let mut cuts: Vec<usize> = Vec::new();
    let h = if s.len() > 1 { s[1] - s[0] } else { 1.0 };
    for &b in breakpoints {
        if b <= s[0] + h * 0.5 || b >= s[s.len() - 1] - h * 0.5 {
            continue;
        }
        // first index at or after the breakpoint
        let idx = s.partition_point(|&x| x < b - 1e-12);
        if idx > 0 && idx < s.len() {
            cuts.push(idx);
        }
    }
    cuts.sort_unstable();
    cuts.dedup();
    let mut out = Vec::new();
    let mut lo = 0;
    for &c in &cuts {
        out.push((lo, c));
        lo = c;
    }
    out.push((lo, s.len()));
    out
}

/// 4th-order derivative of sampled vectors along an equispaced grid, with
/// stencils confined to each segment (one-sided near segment edges).
fn sampled_derivative(
    s: &[f64],
    values: &[Vec4],
    breakpoints: &[f64],
    order: usize,
) -> Result<Vec<Vec4>> {
    let width = if order == 1 { 5 } else { 6 };
    let mut out = vec![Vec4::ZERO; values.len()];
    for (lo, hi) in segment_ranges(s, breakpoints) {
        let len = hi - lo;
        if len < width {
            return Err(FrameError::InsufficientSamples { need: width, got: len });
        }
        for i in lo..hi {
            let start = i
                .saturating_sub(width / 2)
                .clamp(lo, hi - width);
            let nodes: Vec<f64> = (start..start + width).map(|k| s[k]).collect();
            let w = fornberg_weights(s[i], &nodes, order);
            let mut acc = Vec4::ZERO;
            for (k, node_idx) in (start..start + width).enumerate() {
                acc += values[node_idx].scale(w[order][k]);
            }
            out[i] = acc;
        }
    }
    Ok(out)
}

/// Fill `tp` and `tpp` with 4th-order finite differences of the tangent
/// samples. Analytic derivatives already present are kept.
pub fn derivatives(path: &mut CurvePath) -> Result<()> {
    if path.tp.is_none() {
        path.tp = Some(sampled_derivative(&path.s, &path.t, &path.breakpoints, 1)?);
    }
    if path.tpp.is_none() {
        path.tpp = Some(sampled_derivative(&path.s, &path.t, &path.breakpoints, 2)?);
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Regularity
// ---------------------------------------------------------------------------

/// Gram determinant of three vectors (squared volume of the spanned cell).
fn gram_det3(a: &Vec4, b: &Vec4, c: &Vec4) -> f64 {
    let g = [
        [a.dot(a), a.dot(b), a.dot(c)],
        [b.dot(a), b.dot(b), b.dot(c)],
        [c.dot(a), c.dot(b), c.dot(c)],
    ];
    g[0][0] * (g[1][1] * g[2][2] - g[1][2] * g[2][1])
        - g[0][1] * (g[1][0] * g[2][2] - g[1][2] * g[2][0])
        + g[0][2] * (g[1][0] * g[2][1] - g[1][1] * g[2][0])
}

/// Regularity flags over the sampled grid. In arc length `gamma' = T`,
/// `gamma'' = T'` and `gamma''' = T''`.
pub fn regularity_report(path: &CurvePath) -> Result<RegularityReport> {
    let mut work;
    let p = if path.tp.is_some() && path.tpp.is_some() {
        path
    } else {
        work = path.clone();
        derivatives(&mut work)?;
        &work
    };
    let tp = p.tp.as_ref().unwrap();
    let tpp = p.tpp.as_ref().unwrap();
    let min_speed = p.t.iter().fold(f64::INFINITY, |m, t| m.min(t.norm()));
    let (mut min_tp, mut argmin) = (f64::INFINITY, p.s[0]);
    for (i, d) in tp.iter().enumerate() {
        let n = d.norm();
        if n < min_tp {
            min_tp = n;
            argmin = p.s[i];
        }
    }
    let min_gram = p
        .t
        .iter()
        .zip(tp.iter())
        .zip(tpp.iter())
        .fold(f64::INFINITY, |m, ((t, d1), d2)| {
            m.min(gram_det3(t, d1, d2))
        });
    Ok(RegularityReport {
        is_regular: min_speed > TWO_REGULARITY_TOL,
        is_2_regular: min_tp > TWO_REGULARITY_TOL,
        min_speed,
        min_tp_norm: min_tp,
        frenet_rank_ok: min_gram > FRENET_RANK_TOL,
        min_gram_det: min_gram,
        argmin_tp: argmin,
    })
}

// ---------------------------------------------------------------------------
// Arc-length reparametrization
// ---------------------------------------------------------------------------

/// Options for [`arc_length_reparametrize_with`].
pub struct ReparamOptions<'a> {
    /// Analytic velocity closure; finite differences of the position closure
    /// are used when absent.
    pub velocity: Option<&'a dyn Fn(f64) -> Vec4>,
    /// Parameter values of piecewise junctions.
    pub breakpoints: &'a [f64],
}

impl Default for ReparamOptions<'_> {
    fn default() -> Self {
        ReparamOptions {
            velocity: None,
            breakpoints: &[],
        }
    }
}

/// Velocity of a position closure by a 5-point stencil kept inside the piece.
fn closure_velocity(
    position: &dyn Fn(f64) -> Vec4,
    t: f64,
    piece: (f64, f64),
) -> Vec4 {
    let h = 2e-4 * (1.0 + t.abs());
    let h = h.min((piece.1 - piece.0) / 8.0);
    // center the stencil, shifting to stay within the piece
    let mut left = t - 2.0 * h;
    if left < piece.0 {
        left = piece.0;
    }
    if left + 4.0 * h > piece.1 {
        left = piece.1 - 4.0 * h;
    }
    let nodes: Vec<f64> = (0..5).map(|k| left + k as f64 * h).collect();
    let w = fornberg_weights(t, &nodes, 1);
    let mut acc = Vec4::ZERO;
    for (k, &node) in nodes.iter().enumerate() {
        acc += position(node).scale(w[1][k]);
    }
    acc
}

fn piece_of(t: f64, domain: (f64, f64), breakpoints: &[f64]) -> (f64, f64) {
    let mut lo = domain.0;
    let mut hi = domain.1;
    for &b in breakpoints {
        if b <= t && b > lo {
            lo = b;
        }
        if b > t && b < hi {
            hi = b;
        }
    }
    (lo, hi)
}

/// Fritsch-Carlson monotone cubic interpolant tangents for data (x_k, y_k).
fn fritsch_carlson_tangents(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut d = vec![0.0; n - 1];
    for k in 0..n - 1 {
        d[k] = (y[k + 1] - y[k]) / (x[k + 1] - x[k]);
    }
    let mut m = vec![0.0; n];
    m[0] = d[0];
    m[n - 1] = d[n - 2];
    for k in 1..n - 1 {
        m[k] = if d[k - 1] * d[k] <= 0.0 {
            0.0
        } else {
            0.5 * (d[k - 1] + d[k])
        };
    }
    for k in 0..n - 1 {
        if d[k] == 0.0 {
            m[k] = 0.0;
            m[k + 1] = 0.0;
        } else {
            let a = m[k] / d[k];
            let b = m[k + 1] / d[k];
            let r = a * a + b * b;
            if r > 9.0 {
                let tau = 3.0 / r.sqrt();
                m[k] = tau * a * d[k];
                m[k + 1] = tau * b * d[k];
            }
        }
    }
    m
}

/// Evaluate the cubic Hermite piece k of (x, y, tangents m) at `xq`.
fn hermite_eval(x: &[f64], y: &[f64], m: &[f64], k: usize, xq: f64) -> f64 {
    let h = x[k + 1] - x[k];
    let u = (xq - x[k]) / h;
    let h00 = (1.0 + 2.0 * u) * (1.0 - u) * (1.0 - u);
    let h10 = u * (1.0 - u) * (1.0 - u);
    let h01 = u * u * (3.0 - 2.0 * u);
    let h11 = u * u * (u - 1.0);
    h00 * y[k] + h10 * h * m[k] + h01 * y[k + 1] + h11 * h * m[k + 1]
}

/// Reparametrize a raw curve by arc length onto an equispaced grid.
pub fn arc_length_reparametrize(
    position: &dyn Fn(f64) -> Vec4,
    domain: (f64, f64),
    n: usize,
) -> Result<CurvePath> {
    arc_length_reparametrize_with(position, domain, n, &ReparamOptions::default())
}

/// Reparametrize with analytic velocity and/or piecewise junctions.
pub fn arc_length_reparametrize_with(
    position: &dyn Fn(f64) -> Vec4,
    domain: (f64, f64),
    n: usize,
    opts: &ReparamOptions<'_>,
) -> Result<CurvePath> {
    if n < 16 {
        return Err(FrameError::InsufficientSamples { need: 16, got: n });
    }
    let speed = |t: f64| -> Vec4 {
        match opts.velocity {
            Some(v) => v(t),
            None => closure_velocity(position, t, piece_of(t, domain, opts.breakpoints)),
        }
    };

    // fine parameter grid per piece, breakpoints forced onto the grid
    let mut knots: Vec<f64> = vec![domain.0];
    for &b in opts.breakpoints {
        if b > domain.0 && b < domain.1 {
            knots.push(b);
        }
    }
    knots.push(domain.1);
    knots.sort_by(|a, b| a.total_cmp(b));
    knots.dedup();

    let fine_total = (8 * n).max(8192);
    let mut t_fine: Vec<f64> = Vec::with_capacity(fine_total + knots.len());
    for w in knots.windows(2) {
        let frac = (w[1] - w[0]) / (domain.1 - domain.0);
        let m = ((fine_total as f64 * frac).ceil() as usize).max(16);
        for i in 0..m {
            t_fine.push(w[0] + (w[1] - w[0]) * i as f64 / m as f64);
        }
    }
    t_fine.push(domain.1);

    // cumulative length by per-interval Simpson on |velocity|
    let mut cum: Vec<f64> = Vec::with_capacity(t_fine.len());
    cum.push(0.0);
    let mut min_speed = f64::INFINITY;
    let mut min_speed_at = domain.0;
    for w in t_fine.windows(2) {
        let (a, b) = (w[0], w[1]);
        let fa = speed(a).norm();
        let fm = speed(0.5 * (a + b)).norm();
        let fb = speed(b).norm();
        for (v, at) in [(fa, a), (fm, 0.5 * (a + b)), (fb, b)] {
            if v < min_speed {
                min_speed = v;
                min_speed_at = at;
            }
        }
        let seg = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
        cum.push(cum.last().unwrap() + seg);
    }
    if min_speed < REGULARITY_TOL {
        return Err(FrameError::NotRegular {
            at: min_speed_at,
            speed: min_speed,
        });
    }
    let total = *cum.last().unwrap();

    // invert s(t) with a monotone cubic through the cumulative table
    let tang = fritsch_carlson_tangents(&t_fine, &cum);
    let s_grid = grid((0.0, total), n);
    let mut t_of_s = Vec::with_capacity(n);
    let mut k = 0usize;
    for &sq in &s_grid {
        while k + 2 < t_fine.len() && cum[k + 1] < sq {
            k += 1;
        }
        // Newton with bisection fallback inside [t_fine[k], t_fine[k+1]]
        let (mut lo, mut hi) = (t_fine[k], t_fine[k + 1]);
        let mut t = if cum[k + 1] > cum[k] {
            lo + (hi - lo) * (sq - cum[k]) / (cum[k + 1] - cum[k])
        } else {
            lo
        };
        for _ in 0..60 {
            let f = hermite_eval(&t_fine, &cum, &tang, k, t) - sq;
            if f.abs() < 1e-13 * (1.0 + total) {
                break;
            }
            if f > 0.0 {
                hi = t;
            } else {
                lo = t;
            }
            let df = speed(t).norm();
            let step = f / df;
            let cand = t - step;
            t = if cand > lo && cand < hi {
                cand
            } else {
                0.5 * (lo + hi)
            };
        }
        t_of_s.push(t);
    }
    *t_of_s.first_mut().unwrap() = domain.0;
    *t_of_s.last_mut().unwrap() = domain.1;

    let gamma_v: Vec<Vec4> = t_of_s.iter().map(|&t| position(t)).collect();
    let t_v: Vec<Vec4> = t_of_s.iter().map(|&t| speed(t).normalized()).collect();

    // map breakpoints to arc length via the cumulative table
    let mut breaks_s = Vec::new();
    for &b in opts.breakpoints {
        if b > domain.0 && b < domain.1 {
            let idx = t_fine.partition_point(|&x| x < b);
            breaks_s.push(cum[idx.min(cum.len() - 1)]);
        }
    }

    let mut path = CurvePath {
        s: s_grid,
        gamma: gamma_v,
        t: t_v,
        tp: None,
        tpp: None,
        breakpoints: breaks_s,
    };
    derivatives(&mut path)?;
    Ok(path)
}

// ---------------------------------------------------------------------------
// Reconstruction from a tangent field
// ---------------------------------------------------------------------------

/// Integrate a unit tangent field into a curve: `gamma(s) = origin + int T`,
/// anchored so that `gamma(anchor) = origin` (anchor defaults to the domain
/// start and is snapped to the nearest grid point).
pub fn curve_from_tangent(
    t_field: &dyn Fn(f64) -> Vec4,
    domain: (f64, f64),
    n: usize,
    origin: Vec4,
    anchor: Option<f64>,
) -> Result<CurvePath> {
    curve_from_tangent_with(t_field, domain, n, origin, anchor, &[])
}

/// Same as [`curve_from_tangent`] with piecewise junctions recorded.
pub fn curve_from_tangent_with(
    t_field: &dyn Fn(f64) -> Vec4,
    domain: (f64, f64),
    n: usize,
    origin: Vec4,
    anchor: Option<f64>,
    breakpoints: &[f64],
) -> Result<CurvePath> {
    if n < 16 {
        return Err(FrameError::InsufficientSamples { need: 16, got: n });
    }
    let s = grid(domain, n);
    // unit-norm probes
    for &si in s.iter().step_by((n / 64).max(1)) {
        let nrm = t_field(si).norm();
        if (nrm - 1.0).abs() > UNIT_TOL {
            return Err(FrameError::NotUnit { at: si, norm: nrm });
        }
    }
    // cumulative per-interval Simpson
    let mut gamma_v = Vec::with_capacity(n);
    gamma_v.push(Vec4::ZERO);
    for w in s.windows(2) {
        let (a, b) = (w[0], w[1]);
        let inc = (t_field(a) + t_field(0.5 * (a + b)).scale(4.0) + t_field(b))
            .scale((b - a) / 6.0);
        let prev = *gamma_v.last().unwrap();
        gamma_v.push(prev + inc);
    }
    // rigid shift so gamma(anchor) = origin
    let anchor_idx = match anchor {
        Some(a) => s
            .iter()
            .enumerate()
            .min_by(|(_, x), (_, y)| (*x - a).abs().total_cmp(&(*y - a).abs()))
            .map(|(i, _)| i)
            .unwrap(),
        None => 0,
    };
    let shift = gamma_v[anchor_idx];
    for g in gamma_v.iter_mut() {
        *g = *g - shift + origin;
    }
    let t_v: Vec<Vec4> = s.iter().map(|&x| t_field(x)).collect();
    let mut path = CurvePath {
        s,
        gamma: gamma_v,
        t: t_v,
        tp: None,
        tpp: None,
        breakpoints: breakpoints
            .iter()
            .copied()
            .filter(|&b| b > domain.0 && b < domain.1)
            .collect(),
    };
    derivatives(&mut path)?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    /// Adaptive Simpson quadrature, the independent length oracle.
    fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
        fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
            (b - a) / 6.0 * (f(a) + 4.0 * f(0.5 * (a + b)) + f(b))
        }
        fn rec(f: &dyn Fn(f64) -> f64, a: f64, b: f64, whole: f64, tol: f64, depth: u32) -> f64 {
            let m = 0.5 * (a + b);
            let left = simpson(f, a, m);
            let right = simpson(f, m, b);
            if depth == 0 || (left + right - whole).abs() < 15.0 * tol {
                left + right + (left + right - whole) / 15.0
            } else {
                rec(f, a, m, left, tol / 2.0, depth - 1)
                    + rec(f, m, b, right, tol / 2.0, depth - 1)
            }
        }
        rec(f, a, b, simpson(f, a, b), tol, 40)
    }

    #[test]
    fn line_reparametrizes_to_itself() {
        let pos = |t: f64| Vec4::new(t, 0.0, 0.0, 0.0);
        let path = arc_length_reparametrize(&pos, (0.0, 1.0), 64).unwrap();
        assert_abs_diff_eq!(path.s[63], 1.0, epsilon = 1e-10);
        for (i, t) in path.t.iter().enumerate() {
            assert!((path.gamma[i][0] - path.s[i]).abs() < 1e-9);
            assert!((*t - Vec4::basis(0)).norm_inf() < 1e-9);
        }
        let tp = path.tp.as_ref().unwrap();
        for d in tp {
            assert!(d.norm_inf() < 1e-9);
        }
    }

    #[test]
    fn circle_circumference() {
        let pos = |t: f64| Vec4::new(t.cos(), t.sin(), 0.0, 0.0);
        let path = arc_length_reparametrize(&pos, (0.0, 2.0 * PI), 256).unwrap();
        let total = path.s[path.len() - 1];
        assert!((total - 2.0 * PI).abs() / (2.0 * PI) < 1e-8, "total {total}");
        // curvature of the unit circle is 1
        let tp = path.tp.as_ref().unwrap();
        for d in tp.iter() {
            assert!((d.norm() - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn helix_length_matches_quadrature_oracle() {
        let (a, b, c) = (1.0, 1.0, 2.0);
        let pos = move |t: f64| Vec4::new(a * t.cos(), a * t.sin(), b * (c * t).cos(), b * (c * t).sin());
        let path = arc_length_reparametrize(&pos, (0.0, 2.0 * PI), 512).unwrap();
        let speed = move |t: f64| {
            Vec4::new(-a * t.sin(), a * t.cos(), -b * c * (c * t).sin(), b * c * (c * t).cos()).norm()
        };
        let oracle = adaptive_simpson(&speed, 0.0, 2.0 * PI, 1e-12);
        let total = path.s[path.len() - 1];
        assert!(
            (total - oracle).abs() / oracle < 1e-8,
            "total {total} oracle {oracle}"
        );
        // analytic |T'| = sqrt(17)/5 for this helix in arc length
        let tp = path.tp.as_ref().unwrap();
        for d in tp.iter() {
            assert!((d.norm() - 17f64.sqrt() / 5.0).abs() < 1e-6, "{}", d.norm());
        }
    }

    #[test]
    fn unit_speed_chord_bound_holds() {
        let pos = |t: f64| Vec4::new(t.cos(), t.sin(), (2.0 * t).cos() * 0.5, (2.0 * t).sin() * 0.5);
        let path = arc_length_reparametrize(&pos, (0.0, 3.0), 1024).unwrap();
        for i in 0..path.len() - 1 {
            let chord = (path.gamma[i + 1] - path.gamma[i]).norm();
            let ds = path.s[i + 1] - path.s[i];
            let ratio = chord / ds;
            assert!(ratio <= 1.0 + 1e-12 && ratio >= 1.0 - 1e-4, "ratio {ratio}");
        }
        assert!(path.max_t_dot_tp() < 1e-6);
    }

    #[test]
    fn degenerate_speed_is_not_regular() {
        let pos = |t: f64| Vec4::new(t * t * t, 0.0, 0.0, 0.0);
        match arc_length_reparametrize(&pos, (-1.0, 1.0), 64) {
            Err(FrameError::NotRegular { .. }) => {}
            other => panic!("expected NotRegular, got {other:?}"),
        }
    }

    #[test]
    fn regularity_flags() {
        let line = arc_length_reparametrize(&|t| Vec4::new(t, 0.0, 0.0, 0.0), (0.0, 1.0), 64)
            .unwrap();
        let rep = regularity_report(&line).unwrap();
        assert!(rep.is_regular);
        assert!(!rep.is_2_regular);
        assert!(!rep.frenet_rank_ok);

        let (a, b, c) = (1.0, 1.0, 2.0);
        let helix = arc_length_reparametrize(
            &move |t: f64| Vec4::new(a * t.cos(), a * t.sin(), b * (c * t).cos(), b * (c * t).sin()),
            (0.0, 2.0 * PI),
            512,
        )
        .unwrap();
        let rep = regularity_report(&helix).unwrap();
        assert!(rep.is_regular && rep.is_2_regular && rep.frenet_rank_ok);
    }

    #[test]
    fn tangent_field_line_reconstruction() {
        let t_field = |_s: f64| Vec4::basis(0);
        let path = curve_from_tangent(&t_field, (0.0, 2.0), 64, Vec4::ZERO, None).unwrap();
        for (i, g) in path.gamma.iter().enumerate() {
            assert!((g[0] - path.s[i]).abs() < 1e-12);
            assert!(g[1].abs() + g[2].abs() + g[3].abs() == 0.0);
        }
    }

    #[test]
    fn tangent_field_rejects_non_unit() {
        let t_field = |_s: f64| Vec4::new(1.0, 1.0, 0.0, 0.0);
        match curve_from_tangent(&t_field, (0.0, 1.0), 64, Vec4::ZERO, None) {
            Err(FrameError::NotUnit { .. }) => {}
            other => panic!("expected NotUnit, got {other:?}"),
        }
    }

    #[test]
    fn tangent_extract_rebuild_roundtrip() {
        // circle: rebuild positions from the tangent field, compare pointwise
        let t_field = |s: f64| Vec4::new(-s.sin(), s.cos(), 0.0, 0.0);
        let path = curve_from_tangent(
            &t_field,
            (0.0, 2.0 * PI),
            4096,
            Vec4::new(1.0, 0.0, 0.0, 0.0),
            None,
        )
        .unwrap();
        for (i, &si) in path.s.iter().enumerate() {
            let expect = Vec4::new(si.cos(), si.sin(), 0.0, 0.0);
            assert!((path.gamma[i] - expect).norm_inf() < 1e-6);
        }
    }

    #[test]
    fn fornberg_reproduces_classic_central_weights() {
        let nodes = [-2.0, -1.0, 0.0, 1.0, 2.0];
        let w = fornberg_weights(0.0, &nodes, 2);
        let expect1 = [1.0 / 12.0, -8.0 / 12.0, 0.0, 8.0 / 12.0, -1.0 / 12.0];
        let expect2 = [-1.0 / 12.0, 16.0 / 12.0, -30.0 / 12.0, 16.0 / 12.0, -1.0 / 12.0];
        for k in 0..5 {
            assert_abs_diff_eq!(w[1][k], expect1[k], epsilon = 1e-14);
            assert_abs_diff_eq!(w[2][k], expect2[k], epsilon = 1e-14);
        }
    }

    #[test]
    fn breakpoint_stencils_do_not_cross_junction() {
        // |t|-flavored smooth pieces: x = t, y = exp(-1/t) on t>0 else 0
        let flat = |t: f64| if t > 0.0 { (-1.0 / t).exp() } else { 0.0 };
        let pos = move |t: f64| Vec4::new(t, flat(t), 0.0, 0.0);
        let path = arc_length_reparametrize_with(
            &pos,
            (-1.0, 1.0),
            512,
            &ReparamOptions {
                velocity: None,
                breakpoints: &[0.0],
            },
        )
        .unwrap();
        assert_eq!(path.breakpoints.len(), 1);
        // the junction sits near the middle of the arc-length domain
        let mid = path.breakpoints[0];
        let total = path.s[path.len() - 1];
        assert!(mid > 0.4 * total && mid < 0.6 * total);
        assert!(path.max_unit_defect() < 1e-8);
    }
}
