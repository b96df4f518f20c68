//! CSV and JSON import/export of curves, frames and coefficients.
//!
//! All numeric output carries 17 significant digits so re-ingested files
//! reproduce the original doubles bit for bit. Files are written to a
//! temporary sibling and renamed into place.

use crate::curve::CurvePath;
use crate::engine::{CoefficientPath, FramePath};
use crate::error::{FrameError, Result};
use crate::linalg::{Mat4, Skew4, Vec4, UPPER_PAIRS};
use crate::pattern::MASKS;
use serde::Serialize;
use std::fmt::Write as _;
use std::path::Path;

/// 17 significant digits, enough to round-trip any f64.
fn fmt(x: f64) -> String {
    format!("{:.16e}", x)
}

fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let tmp = path.with_extension(format!(
        "{}.tmp",
        path.extension().and_then(|e| e.to_str()).unwrap_or("out")
    ));
    std::fs::write(&tmp, contents)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

// ---------------------------------------------------------------------------
// Curves
// ---------------------------------------------------------------------------

/// Export a curve as CSV `s,x,y,z,w,tx,ty,tz,tw`.
pub fn write_curve_csv(path: &Path, curve: &CurvePath) -> Result<()> {
    let mut out = String::from("s,x,y,z,w,tx,ty,tz,tw\n");
    for i in 0..curve.len() {
        let g = curve.gamma[i];
        let t = curve.t[i];
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            fmt(curve.s[i]),
            fmt(g[0]),
            fmt(g[1]),
            fmt(g[2]),
            fmt(g[3]),
            fmt(t[0]),
            fmt(t[1]),
            fmt(t[2]),
            fmt(t[3]),
        );
    }
    write_atomic(path, &out)
}

/// Read raw curve samples `t,x,y,z,w` (header required).
pub fn read_raw_curve_csv(path: &Path) -> Result<(Vec<f64>, Vec<Vec4>)> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| FrameError::InvalidFormat("empty curve file".into()))?;
    let cols: Vec<&str> = header.trim().split(',').collect();
    if cols != ["t", "x", "y", "z", "w"] {
        return Err(FrameError::InvalidFormat(format!(
            "expected header t,x,y,z,w, got {header:?}"
        )));
    }
    let mut ts = Vec::new();
    let mut ps = Vec::new();
    for (lineno, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let vals = parse_floats(line, 5, lineno + 2)?;
        ts.push(vals[0]);
        ps.push(Vec4::new(vals[1], vals[2], vals[3], vals[4]));
    }
    if ts.len() < 2 {
        return Err(FrameError::InsufficientSamples { need: 2, got: ts.len() });
    }
    Ok((ts, ps))
}

/// Read an exported curve `s,x,y,z,w,tx,ty,tz,tw` back into a [`CurvePath`].
pub fn read_curve_csv(path: &Path) -> Result<CurvePath> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| FrameError::InvalidFormat("empty curve file".into()))?;
    if header.trim() != "s,x,y,z,w,tx,ty,tz,tw" {
        return Err(FrameError::InvalidFormat(format!(
            "expected curve header, got {header:?}"
        )));
    }
    let mut s = Vec::new();
    let mut gamma = Vec::new();
    let mut t = Vec::new();
    for (lineno, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let v = parse_floats(line, 9, lineno + 2)?;
        s.push(v[0]);
        gamma.push(Vec4::new(v[1], v[2], v[3], v[4]));
        t.push(Vec4::new(v[5], v[6], v[7], v[8]));
    }
    let mut path = CurvePath {
        s,
        gamma,
        t,
        tp: None,
        tpp: None,
        breakpoints: Vec::new(),
    };
    crate::curve::derivatives(&mut path)?;
    Ok(path)
}

// ---------------------------------------------------------------------------
// Frames
// ---------------------------------------------------------------------------

/// Export a frame as CSV `s,z00..z33` (row-major entries).
pub fn write_frame_csv(path: &Path, frame: &FramePath) -> Result<()> {
    let mut out = String::from(
        "s,z00,z01,z02,z03,z10,z11,z12,z13,z20,z21,z22,z23,z30,z31,z32,z33\n",
    );
    for i in 0..frame.len() {
        let mut line = fmt(frame.s[i]);
        for r in 0..4 {
            for c in 0..4 {
                line.push(',');
                line.push_str(&fmt(frame.z[i].0[r][c]));
            }
        }
        out.push_str(&line);
        out.push('\n');
    }
    write_atomic(path, &out)
}

/// Read an exported frame CSV back.
pub fn read_frame_csv(path: &Path) -> Result<FramePath> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| FrameError::InvalidFormat("empty frame file".into()))?;
    if !header.starts_with("s,z00") {
        return Err(FrameError::InvalidFormat(format!(
            "expected frame header, got {header:?}"
        )));
    }
    let mut s = Vec::new();
    let mut z = Vec::new();
    for (lineno, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let v = parse_floats(line, 17, lineno + 2)?;
        s.push(v[0]);
        let mut m = Mat4::ZERO;
        for r in 0..4 {
            for c in 0..4 {
                m.0[r][c] = v[1 + 4 * r + c];
            }
        }
        z.push(m);
    }
    Ok(FramePath {
        s,
        z,
        declared_type: None,
    })
}

// ---------------------------------------------------------------------------
// Coefficients
// ---------------------------------------------------------------------------

/// Export coefficients as CSV `s,x1,x2,x3,pattern_id`.
///
/// The pattern must be declared; the three channels are the mask entries in
/// catalog order.
pub fn write_coeffs_csv(path: &Path, coeffs: &CoefficientPath) -> Result<()> {
    let (pattern, channels) = match (coeffs.pattern, &coeffs.channels) {
        (Some(p), Some(ch)) => (p, ch),
        _ => {
            return Err(FrameError::InvalidFormat(
                "coefficient export requires a declared pattern".into(),
            ))
        }
    };
    let mut out = String::from("s,x1,x2,x3,pattern_id\n");
    for i in 0..coeffs.len() {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            fmt(coeffs.s[i]),
            fmt(channels[i][0]),
            fmt(channels[i][1]),
            fmt(channels[i][2]),
            pattern
        );
    }
    write_atomic(path, &out)
}

/// Read a coefficient CSV back into a declared [`CoefficientPath`].
pub fn read_coeffs_csv(path: &Path) -> Result<CoefficientPath> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| FrameError::InvalidFormat("empty coefficient file".into()))?;
    if header.trim() != "s,x1,x2,x3,pattern_id" {
        return Err(FrameError::InvalidFormat(format!(
            "expected coefficient header, got {header:?}"
        )));
    }
    let mut s = Vec::new();
    let mut channels = Vec::new();
    let mut pattern: Option<usize> = None;
    for (lineno, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.trim().split(',').collect();
        if parts.len() != 5 {
            return Err(FrameError::InvalidFormat(format!(
                "line {}: expected 5 fields",
                lineno + 2
            )));
        }
        let v = parse_floats(&parts[..4].join(","), 4, lineno + 2)?;
        let p: usize = parts[4].trim().parse().map_err(|_| {
            FrameError::InvalidFormat(format!("line {}: bad pattern id", lineno + 2))
        })?;
        if p >= MASKS.len() {
            return Err(FrameError::InvalidFormat(format!(
                "line {}: pattern id {p} out of range",
                lineno + 2
            )));
        }
        match pattern {
            None => pattern = Some(p),
            Some(q) if q == p => {}
            Some(q) => {
                return Err(FrameError::InvalidFormat(format!(
                    "line {}: pattern id changes from {q} to {p}",
                    lineno + 2
                )))
            }
        }
        s.push(v[0]);
        channels.push([v[1], v[2], v[3]]);
    }
    let pattern =
        pattern.ok_or_else(|| FrameError::InvalidFormat("no coefficient rows".into()))?;
    Ok(CoefficientPath::from_channels(s, pattern, channels))
}

fn parse_floats(line: &str, expect: usize, lineno: usize) -> Result<Vec<f64>> {
    let vals: std::result::Result<Vec<f64>, _> = line
        .trim()
        .split(',')
        .map(|x| x.trim().parse::<f64>())
        .collect();
    match vals {
        Ok(v) if v.len() == expect => Ok(v),
        Ok(v) => Err(FrameError::InvalidFormat(format!(
            "line {lineno}: expected {expect} fields, got {}",
            v.len()
        ))),
        Err(e) => Err(FrameError::InvalidFormat(format!("line {lineno}: {e}"))),
    }
}

// ---------------------------------------------------------------------------
// JSON
// ---------------------------------------------------------------------------

/// Metadata header attached to JSON exports.
#[derive(Debug, Clone, Serialize)]
pub struct JsonMeta {
    pub preset: Option<String>,
    pub grid_n: usize,
    pub tol: f64,
    pub signs: (i8, i8),
    pub command: String,
}

#[derive(Serialize)]
struct CurveJson<'a> {
    meta: &'a JsonMeta,
    samples: Vec<CurveSampleJson>,
}

#[derive(Serialize)]
struct CurveSampleJson {
    s: f64,
    position: [f64; 4],
    tangent: [f64; 4],
}

/// Export a curve as JSON (metadata plus one object per sample).
pub fn write_curve_json(path: &Path, curve: &CurvePath, meta: &JsonMeta) -> Result<()> {
    let samples = (0..curve.len())
        .map(|i| CurveSampleJson {
            s: curve.s[i],
            position: curve.gamma[i].0,
            tangent: curve.t[i].0,
        })
        .collect();
    let doc = CurveJson { meta, samples };
    let text = serde_json::to_string_pretty(&doc)
        .map_err(|e| FrameError::InvalidFormat(e.to_string()))?;
    write_atomic(path, &text)
}

#[derive(Serialize)]
struct FrameJson<'a> {
    meta: &'a JsonMeta,
    samples: Vec<FrameSampleJson>,
}

#[derive(Serialize)]
struct FrameSampleJson {
    s: f64,
    rows: [[f64; 4]; 4],
}

/// Export a frame as JSON.
pub fn write_frame_json(path: &Path, frame: &FramePath, meta: &JsonMeta) -> Result<()> {
    let samples = (0..frame.len())
        .map(|i| FrameSampleJson {
            s: frame.s[i],
            rows: frame.z[i].0,
        })
        .collect();
    let doc = FrameJson { meta, samples };
    let text = serde_json::to_string_pretty(&doc)
        .map_err(|e| FrameError::InvalidFormat(e.to_string()))?;
    write_atomic(path, &text)
}

#[derive(Serialize)]
struct CoeffsJson<'a> {
    meta: &'a JsonMeta,
    pattern_id: usize,
    samples: Vec<CoeffsSampleJson>,
}

#[derive(Serialize)]
struct CoeffsSampleJson {
    s: f64,
    x1: f64,
    x2: f64,
    x3: f64,
}

/// Export declared coefficients as JSON.
pub fn write_coeffs_json(path: &Path, coeffs: &CoefficientPath, meta: &JsonMeta) -> Result<()> {
    let (pattern, channels) = match (coeffs.pattern, &coeffs.channels) {
        (Some(p), Some(ch)) => (p, ch),
        _ => {
            return Err(FrameError::InvalidFormat(
                "coefficient export requires a declared pattern".into(),
            ))
        }
    };
    let samples = (0..coeffs.len())
        .map(|i| CoeffsSampleJson {
            s: coeffs.s[i],
            x1: channels[i][0],
            x2: channels[i][1],
            x3: channels[i][2],
        })
        .collect();
    let doc = CoeffsJson {
        meta,
        pattern_id: pattern,
        samples,
    };
    let text = serde_json::to_string_pretty(&doc)
        .map_err(|e| FrameError::InvalidFormat(e.to_string()))?;
    write_atomic(path, &text)
}

/// Rebuild the dense skew matrices from a declared coefficient path (used
/// after reading CSV, where only the channels are stored).
pub fn coeffs_to_skews(pattern: usize, channels: &[[f64; 3]]) -> Vec<Skew4> {
    let mask = &MASKS[pattern];
    channels
        .iter()
        .map(|ch| {
            let mut sk = Skew4::ZERO;
            for (k, &slot) in mask.iter().enumerate() {
                let (i, j) = UPPER_PAIRS[slot];
                sk.set(i, j, ch[k]);
            }
            sk
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::arc_length_reparametrize;
    use crate::engine::{default_normals, extract_coefficients, rmf_bishop, verify_frame};
    use crate::pattern::FrameType;
    use std::f64::consts::PI;

    fn tmpdir() -> std::path::PathBuf {
        let dir = std::env::temp_dir().join(format!("frame4-io-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        dir
    }

    #[test]
    fn frame_csv_roundtrip_preserves_residuals() {
        let curve = arc_length_reparametrize(
            &|t: f64| crate::linalg::Vec4::new(t.cos(), t.sin(), (2.0 * t).cos(), (2.0 * t).sin()),
            (0.0, PI),
            1025,
        )
        .unwrap();
        let frame = rmf_bishop(&curve, default_normals(&curve.t[0])).unwrap();
        let report0 = verify_frame(&frame, Some(&curve), Some(FrameType::B), 1e-6).unwrap();

        let path = tmpdir().join("frame.csv");
        write_frame_csv(&path, &frame).unwrap();
        let frame2 = read_frame_csv(&path).unwrap();
        let report1 = verify_frame(&frame2, Some(&curve), Some(FrameType::B), 1e-6).unwrap();

        assert!(report1.pass);
        assert!(
            (report0.max_ortho_defect - report1.max_ortho_defect).abs() < 1e-9,
            "{} vs {}",
            report0.max_ortho_defect,
            report1.max_ortho_defect
        );
        let r0 = report0.best_residual(FrameType::B);
        let r1 = report1.best_residual(FrameType::B);
        assert!((r0 - r1).abs() < 1e-9, "{r0} vs {r1}");
    }

    #[test]
    fn coeffs_csv_roundtrip_is_exact() {
        let curve = arc_length_reparametrize(
            &|t: f64| crate::linalg::Vec4::new(t.cos(), t.sin(), (2.0 * t).cos(), (2.0 * t).sin()),
            (0.0, PI),
            513,
        )
        .unwrap();
        let frame = rmf_bishop(&curve, default_normals(&curve.t[0])).unwrap();
        let mut coeffs = extract_coefficients(&frame).unwrap();
        coeffs.declare(FrameType::B.canonical_mask()).unwrap();

        let path = tmpdir().join("coeffs.csv");
        write_coeffs_csv(&path, &coeffs).unwrap();
        let back = read_coeffs_csv(&path).unwrap();
        assert_eq!(back.pattern, Some(0));
        let a = coeffs.channels.as_ref().unwrap();
        let b = back.channels.as_ref().unwrap();
        for (x, y) in a.iter().zip(b.iter()) {
            for k in 0..3 {
                assert_eq!(x[k].to_bits(), y[k].to_bits(), "17 digits must round-trip");
            }
        }
    }

    #[test]
    fn malformed_csv_is_invalid_format() {
        let path = tmpdir().join("bad.csv");
        std::fs::write(&path, "s,x1\n1,2\n").unwrap();
        match read_coeffs_csv(&path) {
            Err(FrameError::InvalidFormat(_)) => {}
            other => panic!("expected InvalidFormat, got {other:?}"),
        }
    }
}
