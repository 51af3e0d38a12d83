//! Command-line front end.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::error::NumRangeError;
use crate::gallery::{
    approximant_experiment, catalogue, materialize, parse_complex, parse_complex_list, parse_spec, TargetShape,
    FINITE_DIMENSION_NOTE,
};
use crate::geometry::{classify_operator, normal_cone, Thresholds};
use crate::io::{
    boundary_csv, boundary_svg, certificate_json, classification_json, cloud_csv, matrix_from_json, matrix_to_json,
    trace_csv, write_atomic,
};
use crate::joint::{joint_corner_check, joint_sample, OperatorTuple};
use crate::linalg::{random_unit_vector, ComplexMatrix, UnitVector, C64};
use crate::range::{boundary_curve, flat_portions, numerical_radius, support_point, OperatorOracle};
use crate::reducing::{
    detect_corners, proof_trace, reducing_eigenspace, spherical_sequence, to_standard_position, TraceMode, TRACE_DECAY,
};

const EXIT_INPUT: i32 = 2;
const EXIT_NUMERIC: i32 = 3;
const EXIT_NOT_ON_BOUNDARY: i32 = 4;

#[derive(Parser, Debug)]
#[command(
    name = "numrange",
    version,
    about = "Numerical ranges, boundary classification and reducing eigenvalues"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sample the boundary of W(T) at equally spaced angles.
    Range(RangeArgs),
    /// Classify a boundary point of W(T).
    Classify(ClassifyArgs),
    /// Certify the reducing eigenspace at a point.
    Reduce(ReduceArgs),
    /// Trace residuals along unit vectors approaching a boundary point.
    Trace(TraceArgs),
    /// Half-disk (or sector) approximation and deflation experiment.
    Anderson(AndersonArgs),
    /// Joint range sampling and joint corner check for operator tuples.
    Joint(JointArgs),
    /// Built-in operators.
    Gallery {
        #[command(subcommand)]
        action: GalleryAction,
    },
}

#[derive(Args, Debug, Clone)]
struct Source {
    /// Matrix JSON file.
    #[arg(
        long = "in",
        value_name = "PATH",
        conflicts_with = "gallery",
        required_unless_present = "gallery"
    )]
    input: Option<PathBuf>,
    /// Gallery spec such as `jordan:3` or `normal:1,i,-1`.
    #[arg(long, value_name = "SPEC")]
    gallery: Option<String>,
    /// Seed for randomized specs and sampling.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Debug, Clone)]
struct Output {
    /// Output file; standard output when absent.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Format {
    Csv,
    Json,
    Svg,
}

#[derive(Args, Debug)]
struct RangeArgs {
    #[command(flatten)]
    source: Source,
    /// Number of angles.
    #[arg(short = 'm', long = "angles", default_value_t = 720)]
    angles: usize,
    /// Relative tolerance for flat portions.
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[command(flatten)]
    output: Output,
}

#[derive(Args, Debug)]
struct ClassifyArgs {
    #[command(flatten)]
    source: Source,
    /// Boundary point, e.g. `1`, `0.5-2i`.
    #[arg(long, allow_hyphen_values = true)]
    lam: String,
    /// Grid size for the supporting-line search.
    #[arg(short = 'm', long = "angles", default_value_t = 720)]
    angles: usize,
    /// Point tolerance relative to the operator norm.
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    /// Strictly decreasing abscissae for the curvature profile.
    #[arg(long, value_delimiter = ',')]
    scales: Option<Vec<f64>>,
    #[command(flatten)]
    output: Output,
}

#[derive(Args, Debug)]
struct ReduceArgs {
    #[command(flatten)]
    source: Source,
    #[arg(long, allow_hyphen_values = true)]
    lam: String,
    /// Nullspace tolerance relative to the stacked operator norm.
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    #[command(flatten)]
    output: Output,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum ModeArg {
    TwoSided,
    Righthand,
    Lefthand,
}

#[derive(Args, Debug)]
struct TraceArgs {
    #[command(flatten)]
    source: Source,
    /// Boundary point approached by the sequence.
    #[arg(long, allow_hyphen_values = true)]
    lam: String,
    /// Sequence length.
    #[arg(long, default_value_t = 50)]
    steps: usize,
    /// Final over initial angular distance to the target vector.
    #[arg(long, default_value_t = 1e-4)]
    ratio: f64,
    #[arg(long, value_enum, default_value_t = ModeArg::TwoSided)]
    mode: ModeArg,
    /// Point of W at the far end of the one-sided segment (standard frame).
    #[arg(long, allow_hyphen_values = true)]
    alpha0: Option<String>,
    /// Basis index of the starting vector; seeded random vector when absent.
    #[arg(long)]
    start: Option<usize>,
    #[arg(short = 'm', long = "angles", default_value_t = 720)]
    angles: usize,
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[command(flatten)]
    output: Output,
}

#[derive(Args, Debug)]
struct AndersonArgs {
    /// Approximant resolutions.
    #[arg(long = "m", value_delimiter = ',', default_value = "5,9,17,33")]
    m: Vec<usize>,
    /// Sector opening angle (radians); half-disk when absent.
    #[arg(long)]
    sector: Option<f64>,
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    #[command(flatten)]
    output: Output,
}

#[derive(Args, Debug)]
struct JointArgs {
    /// Semicolon-separated gallery specs, one per tuple entry.
    #[arg(long, value_name = "SPECS")]
    gallery: String,
    /// Comma-separated point, one complex value per entry.
    #[arg(long, allow_hyphen_values = true)]
    lam: Option<String>,
    /// Number of Monte Carlo samples; writes the sample cloud CSV.
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    #[arg(short = 'm', long = "angles", default_value_t = 720)]
    angles: usize,
    #[command(flatten)]
    output: Output,
}

#[derive(Subcommand, Debug)]
enum GalleryAction {
    /// List example specs.
    List,
    /// Write the matrix JSON for a spec.
    Materialize {
        #[arg(long)]
        gallery: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        output: Output,
    },
    /// Write the spec JSON for a compact spec string.
    Spec {
        #[arg(long)]
        gallery: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        output: Output,
    },
}

#[derive(Debug)]
enum Failure {
    Input(String),
    Numeric(NumRangeError),
    NotOnBoundary(NumRangeError),
}

impl From<NumRangeError> for Failure {
    fn from(e: NumRangeError) -> Self {
        match e {
            NumRangeError::NotOnBoundary { .. } => Failure::NotOnBoundary(e),
            NumRangeError::NonHermitianInput { .. }
            | NumRangeError::DimensionMismatch { .. }
            | NumRangeError::InvalidMatrix(_)
            | NumRangeError::AngleCountTooSmall { .. }
            | NumRangeError::InvalidSpec(_) => Failure::Input(e.to_string()),
            _ => Failure::Numeric(e),
        }
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn load(source: &Source) -> CliResult<ComplexMatrix> {
    match (&source.input, &source.gallery) {
        (Some(path), _) => {
            let text = std::fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
            Ok(matrix_from_json(&text)?)
        }
        (None, Some(spec)) => Ok(materialize(&parse_spec(spec, source.seed)?)?),
        (None, None) => Err(Failure::Input("one of --in or --gallery is required".into())),
    }
}

fn emit(output: &Output, text: &str) -> CliResult<()> {
    match &output.out {
        Some(path) => {
            write_atomic(path, text.as_bytes()).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .map_err(|e| Failure::Input(format!("stdout: {e}")))
        }
    }
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json value serializes");
    s.push('\n');
    s
}

fn pair(z: C64) -> [f64; 2] {
    [z.re, z.im]
}

fn thresholds(angles: usize, tol: f64, scales: Option<Vec<f64>>) -> Thresholds {
    let mut thr = Thresholds {
        grid: angles,
        point_tol: tol,
        ..Thresholds::default()
    };
    if let Some(s) = scales {
        thr.scales = s;
    }
    thr
}

fn is_upper_triangular(t: &ComplexMatrix) -> bool {
    (0..t.n()).all(|i| (0..i).all(|j| t[(i, j)] == C64::new(0.0, 0.0)))
}

fn cmd_range(args: RangeArgs) -> CliResult<()> {
    let t = load(&args.source)?;
    let curve = boundary_curve(&t, args.angles)?;
    let text = match args.format {
        Format::Csv => boundary_csv(&curve),
        Format::Json => {
            let flats = flat_portions(&t, args.angles, args.tol)?;
            pretty(&json!({
                "operator_hash": curve.operator_hash,
                "angle_count": curve.angle_count,
                "numerical_radius": numerical_radius(&t, args.angles)?,
                "boundary": curve.boundary_points().into_iter().map(pair).collect::<Vec<_>>(),
                "flat_portions": flats,
            }))
        }
        Format::Svg => {
            let mut markers: Vec<C64> = if is_upper_triangular(&t) {
                (0..t.n()).map(|i| t[(i, i)]).collect()
            } else {
                Vec::new()
            };
            markers.extend(detect_corners(&t, args.angles.max(64))?);
            boundary_svg(&curve.boundary_points(), &markers)
        }
    };
    emit(&args.output, &text)
}

fn cmd_classify(args: ClassifyArgs) -> CliResult<()> {
    let t = load(&args.source)?;
    let lam = parse_complex(&args.lam)?;
    let thr = thresholds(args.angles, args.tol, args.scales);
    let c = classify_operator(&t, lam, &thr)?;
    let mut v = classification_json(&c);
    v["lam"] = json!(pair(lam));
    emit(&args.output, &pretty(&v))
}

fn cmd_reduce(args: ReduceArgs) -> CliResult<()> {
    let t = load(&args.source)?;
    let lam = parse_complex(&args.lam)?;
    let cert = reducing_eigenspace(&t, lam, args.tol)?;
    let mut v = certificate_json(&cert);
    v["note"] = json!(FINITE_DIMENSION_NOTE);
    emit(&args.output, &pretty(&v))
}

fn cmd_trace(args: TraceArgs) -> CliResult<()> {
    let t = load(&args.source)?;
    let lam = parse_complex(&args.lam)?;
    let thr = thresholds(args.angles, args.tol, None);
    let oracle = OperatorOracle::new(&t)?;
    let (lo, hi) = normal_cone(&oracle, lam, &thr)?;
    let normal = 0.5 * (lo + hi);
    let shifted = to_standard_position(&t, lam, normal);
    let target = support_point(&t, normal)?.witness;
    let start = match args.start {
        Some(k) if k < t.n() => UnitVector::basis(t.n(), k),
        Some(k) => return Err(Failure::Input(format!("start index {k} out of range"))),
        None => random_unit_vector(t.n(), args.source.seed),
    };
    let seq = spherical_sequence(&start, &target, args.steps, args.ratio)?;
    let mode = match args.mode {
        ModeArg::TwoSided => TraceMode::TwoSided,
        ModeArg::Righthand => TraceMode::Righthand,
        ModeArg::Lefthand => TraceMode::Lefthand,
    };
    let alpha0 = args.alpha0.as_deref().map(parse_complex).transpose()?;
    let trace = proof_trace(&shifted, &seq, mode, alpha0)?;
    let text = match args.format {
        Format::Json => pretty(&json!({
            "trace": trace,
            "decay_threshold": TRACE_DECAY,
            "note": "the 1e-3 decay threshold is a convention, not a quantity fixed by the theory",
        })),
        _ => trace_csv(&trace),
    };
    eprintln!(
        "verdict: {} (final/initial |beta|+|gamma| = {:.3e}, threshold {TRACE_DECAY:e} by convention)",
        trace.verdict, trace.decay_ratio
    );
    emit(&args.output, &text)
}

fn cmd_anderson(args: AndersonArgs) -> CliResult<()> {
    if let Some(&bad) = args.m.iter().find(|&&m| m < 3) {
        return Err(Failure::Input(format!("resolution must be at least 3, got {bad}")));
    }
    let shape = match args.sector {
        Some(angle) => TargetShape::Sector { angle },
        None => TargetShape::Halfdisk,
    };
    let reports = args
        .m
        .par_iter()
        .map(|&m| approximant_experiment(shape, m, args.tol))
        .collect::<Result<Vec<_>, _>>()?;
    emit(
        &args.output,
        &pretty(&json!({
            "reports": reports,
            "note": "every finite approximant stays at positive distance from the target; corners are carried by genuine eigenvectors that deflation removes",
        })),
    )
}

fn cmd_joint(args: JointArgs) -> CliResult<()> {
    let ops = args
        .gallery
        .split(';')
        .map(|s| materialize(&parse_spec(s, args.seed)?))
        .collect::<Result<Vec<_>, _>>()?;
    let tup = OperatorTuple::new(ops)?;
    if let Some(n) = args.samples {
        let cloud = joint_sample(&tup, n, args.seed)?;
        return emit(&args.output, &cloud_csv(&cloud));
    }
    let lam = args
        .lam
        .as_deref()
        .ok_or_else(|| Failure::Input("--lam is required unless --samples is given".into()))?;
    let lam = parse_complex_list(lam)?;
    let thr = thresholds(args.angles, args.tol, None);
    let rep = joint_corner_check(&tup, &lam, &thr)?;
    let v = json!({
        "lam": lam.iter().map(|&z| pair(z)).collect::<Vec<_>>(),
        "status": rep.status,
        "verdicts": rep.classifications.iter().map(|c| c.verdict).collect::<Vec<_>>(),
        "bound": rep.bound,
        "certificate": rep.certificate.as_ref().map(certificate_json),
        "note": "only the sample cloud of the joint range is computed; it need not be convex",
    });
    emit(&args.output, &pretty(&v))
}

fn cmd_gallery(action: GalleryAction) -> CliResult<()> {
    match action {
        GalleryAction::List => {
            let mut s = String::new();
            for (spec, about) in catalogue() {
                s.push_str(&format!("{spec:<42} {about}\n"));
            }
            emit(&Output { out: None }, &s)
        }
        GalleryAction::Materialize { gallery, seed, output } => {
            let t = materialize(&parse_spec(&gallery, seed)?)?;
            emit(&output, &(matrix_to_json(&t) + "\n"))
        }
        GalleryAction::Spec { gallery, seed, output } => {
            let spec = parse_spec(&gallery, seed)?;
            emit(&output, &pretty(&serde_json::to_value(&spec).expect("spec serializes")))
        }
    }
}

fn configure_threads() {
    if let Some(n) = std::env::var("NUMRANGE_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
    {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
}

/// Parses `args` and runs the command, returning the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    configure_threads();
    let result = match cli.command {
        Command::Range(a) => cmd_range(a),
        Command::Classify(a) => cmd_classify(a),
        Command::Reduce(a) => cmd_reduce(a),
        Command::Trace(a) => cmd_trace(a),
        Command::Anderson(a) => cmd_anderson(a),
        Command::Joint(a) => cmd_joint(a),
        Command::Gallery { action } => cmd_gallery(action),
    };
    match result {
        Ok(()) => 0,
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            EXIT_INPUT
        }
        Err(Failure::Numeric(e)) => {
            eprintln!("error: {e}");
            EXIT_NUMERIC
        }
        Err(Failure::NotOnBoundary(e)) => {
            eprintln!("error: {e}");
            EXIT_NOT_ON_BOUNDARY
        }
    }
}
