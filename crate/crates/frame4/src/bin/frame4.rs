//! Command-line surface: construct, convert, classify and verify frames,
//! generate constant-coefficient curves, and export the gallery presets.

use clap::{Args, Parser, Subcommand};
use frame4::curve::{arc_length_reparametrize, regularity_report, CurvePath, DEFAULT_GRID_PER_UNIT};
use frame4::engine::{
    default_normals, extract_coefficients, find_avoided_direction, frenet_type_f,
    integrate_frame_with_curve, rmf_bishop, rotate_bishop, type_c_from_bishop, type_d_construct,
    type_d_from_f, verify_frame, CoefficientPath, FramePath,
};
use frame4::error::FrameError;
use frame4::gallery::{empirical_type_c_sweep, get_preset, SweepConfig, PRESET_NAMES};
use frame4::io;
use frame4::linalg::{rotation_between, Mat4, Skew4, Vec4};
use frame4::pattern::{classify_pattern, FrameType, PatternCatalog};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "frame4", version, about = "Generalized Bishop frames on curves in 4-space")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonOpts {
    /// Sample count for constructed grids (env FRAME4_GRID_N overrides the default density).
    #[arg(long)]
    grid_n: Option<usize>,
    /// Verification tolerance.
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    /// Output base path (suffixes .curve.csv / .frame.csv / .coeffs.csv are appended).
    #[arg(long, short)]
    output: Option<PathBuf>,
    /// Output format.
    #[arg(long, default_value = "csv")]
    format: String,
}

#[derive(Subcommand)]
enum Command {
    /// Construct a frame of the requested type on a preset or an ingested curve.
    Frame {
        /// Gallery preset name.
        #[arg(long, conflicts_with = "input")]
        preset: Option<String>,
        /// Raw curve CSV (header t,x,y,z,w), reparametrized by arc length.
        #[arg(long)]
        input: Option<PathBuf>,
        /// Frame type: B, C, D or F.
        #[arg(long = "type")]
        frame_type: String,
        /// Sign branch for the type-C conversion (c1).
        #[arg(long, default_value_t = 1)]
        sign1: i8,
        /// Sign branch for the type-C conversion (c3).
        #[arg(long, default_value_t = 1)]
        sign3: i8,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Convert between frame types: F -> D (coefficients) or B -> C (frame).
    Convert {
        #[arg(long)]
        from: String,
        #[arg(long)]
        to: String,
        /// Input file: coefficients CSV for F -> D, frame CSV for B -> C.
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 1)]
        eps: i8,
        #[arg(long, default_value_t = 1)]
        kappa: i8,
        #[arg(long, default_value_t = 1)]
        sign1: i8,
        #[arg(long, default_value_t = 1)]
        sign3: i8,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Classify the sparsity pattern of a frame or coefficient file.
    Classify {
        /// Frame CSV or coefficient CSV (detected from the header).
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
    },
    /// Verify a frame file: orthonormality, tangent anchoring, pattern residuals.
    Verify {
        /// Frame CSV.
        #[arg(long)]
        input: PathBuf,
        /// Curve CSV for the row-0 tangent check.
        #[arg(long)]
        curve: Option<PathBuf>,
        /// Expected type.
        #[arg(long)]
        expected: Option<String>,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
    },
    /// Integrate a constant coefficient matrix into a curve and frame.
    Generate {
        /// Six upper-triangle entries row-major: x01 x02 x03 x12 x13 x23.
        #[arg(long, num_args = 6, allow_negative_numbers = true)]
        constant: Vec<f64>,
        /// Arc-length domain.
        #[arg(long, num_args = 2, default_values_t = [0.0, 4.0], allow_negative_numbers = true)]
        domain: Vec<f64>,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Gallery presets.
    Gallery {
        #[command(subcommand)]
        action: GalleryAction,
    },
}

#[derive(Subcommand)]
enum GalleryAction {
    /// List preset names with their expectations.
    List,
    /// Export a preset's curve (and Bishop coefficients when applicable).
    Export {
        name: String,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Run the empirical type-C direction sweep on a coefficient preset.
    SweepC {
        name: String,
        /// Fibonacci grid size.
        #[arg(long, default_value_t = 4096)]
        directions: usize,
        #[command(flatten)]
        common: CommonOpts,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn grid_n_for(span: f64, requested: Option<usize>) -> usize {
    if let Some(n) = requested {
        return n.max(16);
    }
    if let Ok(env_n) = std::env::var("FRAME4_GRID_N") {
        if let Ok(v) = env_n.parse::<usize>() {
            return v.max(16);
        }
    }
    ((span * DEFAULT_GRID_PER_UNIT as f64).round() as usize).max(1024) + 1
}

fn out_base(common: &CommonOpts, fallback: &str) -> PathBuf {
    common
        .output
        .clone()
        .unwrap_or_else(|| PathBuf::from(fallback))
}

fn meta(common: &CommonOpts, preset: Option<&str>, n: usize, signs: (i8, i8), cmd: &str) -> io::JsonMeta {
    io::JsonMeta {
        preset: preset.map(|s| s.to_string()),
        grid_n: n,
        tol: common.tol,
        signs,
        command: cmd.to_string(),
    }
}

fn write_outputs(
    base: &Path,
    common: &CommonOpts,
    curve: Option<&CurvePath>,
    frame: Option<&FramePath>,
    coeffs: Option<&CoefficientPath>,
    m: &io::JsonMeta,
) -> Result<(), FrameError> {
    let with_suffix = |sfx: &str| -> PathBuf {
        let mut os = base.as_os_str().to_owned();
        os.push(sfx);
        PathBuf::from(os)
    };
    match common.format.as_str() {
        "csv" => {
            if let Some(c) = curve {
                io::write_curve_csv(&with_suffix(".curve.csv"), c)?;
            }
            if let Some(f) = frame {
                io::write_frame_csv(&with_suffix(".frame.csv"), f)?;
            }
            if let Some(x) = coeffs {
                io::write_coeffs_csv(&with_suffix(".coeffs.csv"), x)?;
            }
        }
        "json" => {
            if let Some(c) = curve {
                io::write_curve_json(&with_suffix(".curve.json"), c, m)?;
            }
            if let Some(f) = frame {
                io::write_frame_json(&with_suffix(".frame.json"), f, m)?;
            }
            if let Some(x) = coeffs {
                io::write_coeffs_json(&with_suffix(".coeffs.json"), x, m)?;
            }
        }
        other => {
            return Err(FrameError::InvalidFormat(format!(
                "unknown format {other:?} (use csv or json)"
            )))
        }
    }
    Ok(())
}

fn parse_type(s: &str) -> Result<FrameType, FrameError> {
    FrameType::parse(s)
        .ok_or_else(|| FrameError::InvalidFormat(format!("unknown frame type {s:?}")))
}

fn print_verify(frame: &FramePath, curve: Option<&CurvePath>, expected: FrameType, tol: f64) -> Result<bool, FrameError> {
    let report = verify_frame(frame, curve, Some(expected), tol)?;
    println!("verify: expected type {expected} at tol {tol:.3e}");
    println!("  orthonormality defect: {:.6e}", report.max_ortho_defect);
    if let Some(t) = report.max_tangent_defect {
        println!("  tangent defect:        {t:.6e}");
    }
    for (t, r) in &report.best_by_type {
        println!("  best residual type {t}: {r:.6e}");
    }
    if report.degenerate {
        println!("  degenerate coefficients: every mask matches");
    }
    println!("  pass: {}", report.pass);
    Ok(report.pass)
}

fn build_curve(preset: &Option<String>, input: &Option<PathBuf>, common: &CommonOpts) -> Result<CurvePath, FrameError> {
    match (preset, input) {
        (Some(name), None) => {
            let p = get_preset(name)?;
            let span = p.spec.domain.1 - p.spec.domain.0;
            let n = grid_n_for(span, common.grid_n);
            Ok(p.build(Some(n))?.curve)
        }
        (None, Some(path)) => {
            let (ts, ps) = io::read_raw_curve_csv(path)?;
            let dom = (
                ts.first().copied().unwrap_or(0.0),
                ts.last().copied().unwrap_or(1.0),
            );
            // local cubic interpolation of the samples as the position closure
            let interp = move |t: f64| -> Vec4 {
                let n = ts.len();
                let k = match ts.binary_search_by(|x| x.total_cmp(&t)) {
                    Ok(i) => i.min(n - 2),
                    Err(i) => i.clamp(1, n - 1) - 1,
                };
                let k0 = k.saturating_sub(1).min(n - 4);
                let w = frame4::curve::fornberg_weights(t, &ts[k0..k0 + 4], 0);
                let mut acc = Vec4::ZERO;
                for (j, wj) in w[0].iter().enumerate() {
                    acc += ps[k0 + j].scale(*wj);
                }
                acc
            };
            let n = grid_n_for(dom.1 - dom.0, common.grid_n);
            arc_length_reparametrize(&interp, dom, n)
        }
        _ => Err(FrameError::InvalidFormat(
            "provide exactly one of --preset or --input".into(),
        )),
    }
}

fn construct_frame(
    curve: &CurvePath,
    t: FrameType,
    sign1: i8,
    sign3: i8,
) -> Result<(FramePath, CoefficientPath), FrameError> {
    match t {
        FrameType::B => {
            let frame = rmf_bishop(curve, default_normals(&curve.t[0]))?;
            let mut coeffs = extract_coefficients(&frame)?;
            coeffs.declare(FrameType::B.canonical_mask())?;
            Ok((frame, coeffs))
        }
        FrameType::D => {
            let frame = type_d_construct(curve)?;
            let mut coeffs = extract_coefficients(&frame)?;
            coeffs.declare(FrameType::D.canonical_mask())?;
            Ok((frame, coeffs))
        }
        FrameType::F => {
            let frame = frenet_type_f(curve)?;
            let mut coeffs = extract_coefficients(&frame)?;
            coeffs.declare(FrameType::F.canonical_mask())?;
            Ok((frame, coeffs))
        }
        FrameType::C => {
            // Bishop, avoided direction, rotation, conversion
            let bishop = rmf_bishop(curve, default_normals(&curve.t[0]))?;
            let mut b = extract_coefficients(&bishop)?;
            b.declare(FrameType::B.canonical_mask())?;
            let ch = b.channels.as_ref().unwrap();
            let samples: Vec<[f64; 3]> = ch.clone();
            let (xi, margin) = find_avoided_direction(&samples);
            println!("avoided direction xi = ({:.6}, {:.6}, {:.6}), margin {margin:.6}", xi[0], xi[1], xi[2]);
            let q = rotation_between(&xi, &[0.0, 1.0, 0.0]);
            let rotated = rotate_bishop(&bishop, &q)?;
            let mut rb = extract_coefficients(&rotated)?;
            rb.declare(FrameType::B.canonical_mask())?;
            let (frame, coeffs, _g) = type_c_from_bishop(&rotated, &rb, sign1, sign3)?;
            Ok((frame, coeffs))
        }
    }
}

fn run(cli: Cli) -> Result<(), FrameError> {
    match cli.command {
        Command::Frame {
            preset,
            input,
            frame_type,
            sign1,
            sign3,
            common,
        } => {
            let t = parse_type(&frame_type)?;
            let curve = build_curve(&preset, &input, &common)?;
            let (frame, coeffs) = construct_frame(&curve, t, sign1, sign3)?;
            let base = out_base(&common, &format!("frame4-{}", frame_type));
            let m = meta(&common, preset.as_deref(), curve.len(), (sign1, sign3), "frame");
            write_outputs(&base, &common, Some(&curve), Some(&frame), Some(&coeffs), &m)?;
            let pass = print_verify(&frame, Some(&curve), t, common.tol)?;
            if !pass {
                return Err(FrameError::PatternMismatch {
                    expected: match t {
                        FrameType::B => "type B",
                        FrameType::C => "type C",
                        FrameType::D => "type D",
                        FrameType::F => "type F",
                    },
                    residual: common.tol,
                });
            }
            Ok(())
        }
        Command::Convert {
            from,
            to,
            input,
            eps,
            kappa,
            sign1,
            sign3,
            common,
        } => {
            let from_t = parse_type(&from)?;
            let to_t = parse_type(&to)?;
            match (from_t, to_t) {
                (FrameType::F, FrameType::D) => {
                    let f = io::read_coeffs_csv(&input)?;
                    let (d, transform) = type_d_from_f(&f, eps, kappa)?;
                    let base = out_base(&common, "frame4-FtoD");
                    let m = meta(&common, None, d.len(), (eps, kappa), "convert F D");
                    write_outputs(&base, &common, None, None, Some(&d), &m)?;
                    println!(
                        "converted {} samples; theta range [{:.6}, {:.6}]",
                        d.len(),
                        transform.theta.iter().cloned().fold(f64::INFINITY, f64::min),
                        transform.theta.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
                    );
                    Ok(())
                }
                (FrameType::B, FrameType::C) => {
                    let bishop = io::read_frame_csv(&input)?;
                    let mut b = extract_coefficients(&bishop)?;
                    b.declare(FrameType::B.canonical_mask())?;
                    let (frame, coeffs, transform) =
                        type_c_from_bishop(&bishop, &b, sign1, sign3)?;
                    let base = out_base(&common, "frame4-BtoC");
                    let m = meta(&common, None, frame.len(), (sign1, sign3), "convert B C");
                    write_outputs(&base, &common, None, Some(&frame), Some(&coeffs), &m)?;
                    println!(
                        "converted {} samples; theta range [{:.6}, {:.6}]",
                        frame.len(),
                        transform.theta.iter().cloned().fold(f64::INFINITY, f64::min),
                        transform.theta.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
                    );
                    Ok(())
                }
                _ => Err(FrameError::InvalidFormat(format!(
                    "unsupported conversion {from} -> {to} (supported: F -> D, B -> C)"
                ))),
            }
        }
        Command::Classify { input, tol } => {
            let text = std::fs::read_to_string(&input)?;
            let header = text.lines().next().unwrap_or("");
            let xs = if header.starts_with("s,z00") {
                let frame = io::read_frame_csv(&input)?;
                extract_coefficients(&frame)?.x
            } else if header.starts_with("s,x1") {
                io::read_coeffs_csv(&input)?.x
            } else {
                return Err(FrameError::InvalidFormat(format!(
                    "unrecognized header {header:?}"
                )));
            };
            let cls = classify_pattern(&xs, tol);
            if cls.degenerate {
                println!("degenerate: coefficients vanish at tol; all masks match");
            }
            println!("{:<8} {:<6} {:<12} residual", "mask", "type", "perm");
            for m in &cls.matches {
                println!(
                    "{:<8} {:<6} {:<12} {:.6e}",
                    m.mask_id,
                    m.frame_type.to_string(),
                    format!("{:?}", m.perm),
                    m.residual
                );
            }
            println!("best residual per type:");
            for (t, r) in &cls.best_by_type {
                println!("  {t}: {r:.6e}");
            }
            Ok(())
        }
        Command::Verify {
            input,
            curve,
            expected,
            tol,
        } => {
            let frame = io::read_frame_csv(&input)?;
            let curve = match curve {
                Some(p) => Some(io::read_curve_csv(&p)?),
                None => None,
            };
            let expected_t = match expected {
                Some(e) => Some(parse_type(&e)?),
                None => None,
            };
            let report = verify_frame(&frame, curve.as_ref(), expected_t, tol)?;
            println!("orthonormality defect: {:.6e}", report.max_ortho_defect);
            if let Some(t) = report.max_tangent_defect {
                println!("tangent defect:        {t:.6e}");
            }
            for (t, r) in &report.best_by_type {
                println!("best residual type {t}: {r:.6e}");
            }
            if report.degenerate {
                println!("degenerate coefficients: every mask matches");
            }
            println!("pass: {}", report.pass);
            if report.pass {
                Ok(())
            } else {
                Err(FrameError::PatternMismatch {
                    expected: "requested type",
                    residual: tol,
                })
            }
        }
        Command::Generate { constant, domain, common } => {
            if constant.len() != 6 || domain.len() != 2 {
                return Err(FrameError::InvalidFormat(
                    "--constant needs 6 values and --domain 2".into(),
                ));
            }
            let x = Skew4::from_upper([
                constant[0], constant[1], constant[2], constant[3], constant[4], constant[5],
            ]);
            let span = domain[1] - domain[0];
            if span <= 0.0 {
                return Err(FrameError::InvalidFormat("empty domain".into()));
            }
            let n = grid_n_for(span, common.grid_n);
            let h = span / (n - 1) as f64;
            let s: Vec<f64> = (0..n).map(|i| domain[0] + i as f64 * h).collect();
            let coeffs = CoefficientPath::constant(x, s);
            let (frame, curve) = integrate_frame_with_curve(&coeffs, Mat4::IDENTITY, Vec4::ZERO)?;
            let base = out_base(&common, "frame4-generate");
            let m = meta(&common, None, n, (1, 1), "generate");
            write_outputs(&base, &common, Some(&curve), Some(&frame), None, &m)?;
            let rep = regularity_report(&curve)?;
            println!(
                "generated {} samples over [{}, {}]; 2-regular: {}",
                n, domain[0], domain[1], rep.is_2_regular
            );
            let cls = classify_pattern(&coeffs.x, common.tol);
            for (t, r) in &cls.best_by_type {
                println!("  coefficient residual type {t}: {r:.6e}");
            }
            Ok(())
        }
        Command::Gallery { action } => match action {
            GalleryAction::List => {
                for name in PRESET_NAMES {
                    let p = get_preset(name)?;
                    let expect: Vec<String> = p
                        .expected
                        .iter()
                        .map(|(t, e)| format!("{t}:{e:?}"))
                        .collect();
                    println!("{:<10} {}", p.name, p.description);
                    println!("{:<10}   domain [{}, {}], {}", "", p.spec.domain.0, p.spec.domain.1, expect.join(" "));
                }
                Ok(())
            }
            GalleryAction::Export { name, common } => {
                let p = get_preset(&name)?;
                let span = p.spec.domain.1 - p.spec.domain.0;
                let n = grid_n_for(span, common.grid_n);
                let built = p.build(Some(n))?;
                let base = out_base(&common, &format!("frame4-{name}"));
                let m = meta(&common, Some(&name), built.curve.len(), (1, 1), "gallery export");
                // coefficient presets also export their Bishop data
                let coeffs = built.bishop_channels.as_ref().map(|ch| {
                    CoefficientPath::from_channels(
                        built.curve.s.clone(),
                        FrameType::B.canonical_mask(),
                        ch.clone(),
                    )
                });
                write_outputs(
                    &base,
                    &common,
                    Some(&built.curve),
                    built.bishop_frame.as_ref(),
                    coeffs.as_ref(),
                    &m,
                )?;
                println!("exported {name} ({} samples) to {}", built.curve.len(), base.display());
                Ok(())
            }
            GalleryAction::SweepC {
                name,
                directions,
                common,
            } => {
                let p = get_preset(&name)?;
                let span = p.spec.domain.1 - p.spec.domain.0;
                let n = grid_n_for(span, common.grid_n);
                let built = p.build(Some(n))?;
                let channels = built.bishop_channels.ok_or_else(|| {
                    FrameError::InvalidFormat(format!(
                        "preset {name} is not defined by Bishop coefficients"
                    ))
                })?;
                let report = empirical_type_c_sweep(
                    &built.curve.s,
                    &channels,
                    &SweepConfig {
                        grid_q: directions,
                        ..SweepConfig::default()
                    },
                )?;
                let avoided = report
                    .outcomes
                    .iter()
                    .filter(|o| !o.strict_avoidance)
                    .count();
                let infeasible = report.outcomes.iter().filter(|o| !o.feasible).count();
                println!(
                    "swept {} directions: {} fail strict avoidance, {} infeasible bridges",
                    report.outcomes.len(),
                    avoided,
                    infeasible
                );
                println!(
                    "best residual {:.6e} at xi = ({:.6}, {:.6}, {:.6})",
                    report.best_residual, report.best_xi[0], report.best_xi[1], report.best_xi[2]
                );
                println!("succeeded: {}", report.succeeded);
                let _ = PatternCatalog::type_of(0);
                Ok(())
            }
        },
    }
}
