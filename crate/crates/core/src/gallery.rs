//! Deterministic test operators and the half-disk approximation experiment.
//!
//! Specs serialize to JSON as `{"kind": "jordan", "n": 3, "seed": 0}` and
//! have a compact string form for the command line:
//!
//! | form | operator |
//! |------|----------|
//! | `jordan:N`, `shift:N` | nilpotent Jordan block / finite section of the shift |
//! | `normal:z1,z2,…` | `diag(z1, z2, …)` |
//! | `sum:S1\|S2\|…` | block diagonal sum |
//! | `corner:LAM,D[,PHI],S` | `[LAM] ⊕ S'` with `W(S')` in a disk of radius `D/4` at distance `D` |
//! | `compact:LAM,RHO,N` | `LAM·I + K` with geometrically decaying `K` |
//! | `halfdisk:M` | `M` points on the upper unit semicircle |
//! | `sector:PHI,M` | apex `0` plus `M` points on the arc of angle `PHI` |

use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{NumRangeError, Result};
use crate::geometry::{convex_hull, hausdorff, Thresholds};
use crate::linalg::{ComplexMatrix, C64, ONE, ZERO};
use crate::range::{boundary_curve, numerical_radius};
use crate::reducing::{
    corner_report, deflate, detect_corners, min_reducing_residual, reducing_eigenspace, CornerReport,
    ReducingCertificate,
};

/// Caveat attached to finite-dimensional reports on reducing spectra.
pub const FINITE_DIMENSION_NOTE: &str = "finite matrices have no essential spectrum; \
reducing eigenvalues reported here are isolated finite-multiplicity ones, and residual decay \
along truncation families stands in for essential behaviour";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SpecKind {
    Jordan {
        n: usize,
    },
    ShiftTruncation {
        n: usize,
    },
    Normal {
        #[serde(with = "complex_list")]
        values: Vec<C64>,
    },
    DirectSum {
        blocks: Vec<OperatorSpec>,
    },
    CornerSum {
        #[serde(with = "complex_pair")]
        lam: C64,
        inner: Box<OperatorSpec>,
        scale: f64,
        /// Direction of the inner block as seen from `lam`; drawn from the
        /// seed when absent.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        angle: Option<f64>,
    },
    CompactPerturbation {
        #[serde(with = "complex_pair")]
        lam: C64,
        rho: f64,
        n: usize,
    },
    HalfdiskApproximant {
        m: usize,
    },
    SectorApproximant {
        angle: f64,
        m: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatorSpec {
    #[serde(flatten)]
    pub kind: SpecKind,
    #[serde(default)]
    pub seed: u64,
}

mod complex_pair {
    use super::C64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(z: &C64, s: S) -> Result<S::Ok, S::Error> {
        [z.re, z.im].serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<C64, D::Error> {
        let [re, im] = <[f64; 2]>::deserialize(d)?;
        Ok(C64::new(re, im))
    }
}

mod complex_list {
    use super::C64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(zs: &[C64], s: S) -> Result<S::Ok, S::Error> {
        zs.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<C64>, D::Error> {
        let raw = Vec::<[f64; 2]>::deserialize(d)?;
        Ok(raw.into_iter().map(|[re, im]| C64::new(re, im)).collect())
    }
}

impl OperatorSpec {
    pub fn new(kind: SpecKind) -> Self {
        Self { kind, seed: 0 }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Dimension of the materialized operator.
    pub fn dimension(&self) -> usize {
        match &self.kind {
            SpecKind::Jordan { n } | SpecKind::ShiftTruncation { n } | SpecKind::CompactPerturbation { n, .. } => *n,
            SpecKind::Normal { values } => values.len(),
            SpecKind::DirectSum { blocks } => blocks.iter().map(OperatorSpec::dimension).sum(),
            SpecKind::CornerSum { inner, .. } => 1 + inner.dimension(),
            SpecKind::HalfdiskApproximant { m } => *m,
            SpecKind::SectorApproximant { m, .. } => m + 1,
        }
    }
}

fn invalid(msg: impl Into<String>) -> NumRangeError {
    NumRangeError::InvalidSpec(msg.into())
}

fn nilpotent(n: usize) -> ComplexMatrix {
    let mut t = ComplexMatrix::zeros(n, n);
    for i in 0..n.saturating_sub(1) {
        t[(i, i + 1)] = ONE;
    }
    t
}

fn arc(angle: f64, m: usize) -> Vec<C64> {
    (0..m)
        .map(|j| C64::from_polar(1.0, angle * j as f64 / (m - 1) as f64))
        .collect()
}

pub fn materialize(spec: &OperatorSpec) -> Result<ComplexMatrix> {
    match &spec.kind {
        SpecKind::Jordan { n } | SpecKind::ShiftTruncation { n } => {
            if *n == 0 {
                return Err(invalid("dimension must be at least 1"));
            }
            Ok(nilpotent(*n))
        }
        SpecKind::Normal { values } => {
            if values.is_empty() {
                return Err(invalid("normal spec needs at least one value"));
            }
            if values.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
                return Err(invalid("normal spec values must be finite"));
            }
            Ok(ComplexMatrix::from_diag(values))
        }
        SpecKind::DirectSum { blocks } => {
            if blocks.is_empty() {
                return Err(invalid("direct sum needs at least one block"));
            }
            let mats = blocks.iter().map(materialize).collect::<Result<Vec<_>>>()?;
            Ok(ComplexMatrix::direct_sum(&mats))
        }
        SpecKind::CornerSum {
            lam,
            inner,
            scale,
            angle,
        } => {
            if !(*scale > 0.0 && scale.is_finite()) {
                return Err(invalid("corner scale must be positive"));
            }
            let b = materialize(inner)?;
            let n = b.n();
            let c0 = (0..n).map(|i| b[(i, i)]).sum::<C64>() / n as f64;
            let centered = b.shifted(-c0);
            let radius = centered.op_norm()?;
            let phi = angle.unwrap_or_else(|| ChaCha8Rng::seed_from_u64(spec.seed).random::<f64>() * TAU);
            let center = lam + C64::from_polar(*scale, phi);
            let shrunk = if radius > 0.0 {
                centered.scale(C64::from(0.25 * scale / radius))
            } else {
                centered
            };
            let block = shrunk.shifted(center);
            Ok(ComplexMatrix::direct_sum(&[ComplexMatrix::from_diag(&[*lam]), block]))
        }
        SpecKind::CompactPerturbation { lam, rho, n } => {
            if *n == 0 {
                return Err(invalid("dimension must be at least 1"));
            }
            if !(*rho > 0.0 && *rho < 1.0) {
                return Err(invalid("decay rate must lie in (0, 1)"));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
            let mut phase = || C64::from_polar(1.0, rng.random::<f64>() * TAU);
            let mut t = ComplexMatrix::zeros(*n, *n);
            for j in 0..*n {
                t[(j, j)] = lam + phase() * rho.powi(j as i32 + 1);
                if j + 1 < *n {
                    t[(j, j + 1)] = phase() * rho.powi(j as i32 + 2);
                }
            }
            Ok(t)
        }
        SpecKind::HalfdiskApproximant { m } => {
            if *m < 2 {
                return Err(invalid("half-disk approximant needs m ≥ 2"));
            }
            Ok(ComplexMatrix::from_diag(&arc(PI, *m)))
        }
        SpecKind::SectorApproximant { angle, m } => {
            if *m < 2 {
                return Err(invalid("sector approximant needs m ≥ 2"));
            }
            if !(*angle > 0.0 && *angle < PI) {
                return Err(invalid("sector angle must lie in (0, π)"));
            }
            let mut d = vec![ZERO];
            d.extend(arc(*angle, *m));
            Ok(ComplexMatrix::from_diag(&d))
        }
    }
}

/// Parses `a`, `bi`, `a+bi`, `a-bi` (also `i`, `-i`).
pub fn parse_complex(s: &str) -> Result<C64> {
    let s = s.trim();
    let bad = || invalid(format!("cannot parse complex literal '{s}'"));
    let num = |x: &str| -> Result<f64> { x.parse::<f64>().map_err(|_| bad()) };
    let Some(body) = s.strip_suffix('i') else {
        return Ok(C64::new(num(s)?, 0.0));
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let imag = |x: &str| -> Result<f64> {
        match x {
            "" | "+" => Ok(1.0),
            "-" => Ok(-1.0),
            _ => num(x),
        }
    };
    match split {
        Some(k) => Ok(C64::new(num(&body[..k])?, imag(&body[k..])?)),
        None => Ok(C64::new(0.0, imag(body)?)),
    }
}

/// Comma-separated complex literals.
pub fn parse_complex_list(s: &str) -> Result<Vec<C64>> {
    s.split(',').map(parse_complex).collect()
}

fn parse_usize(s: &str) -> Result<usize> {
    s.trim()
        .parse()
        .map_err(|_| invalid(format!("expected a non-negative integer, got '{s}'")))
}

fn parse_f64(s: &str) -> Result<f64> {
    s.trim()
        .parse()
        .map_err(|_| invalid(format!("expected a number, got '{s}'")))
}

/// Parses the compact string form (see the module docs).
pub fn parse_spec(s: &str, seed: u64) -> Result<OperatorSpec> {
    let (head, args) = s
        .trim()
        .split_once(':')
        .ok_or_else(|| invalid(format!("missing ':' in spec '{s}'")))?;
    let kind = match head {
        "jordan" => SpecKind::Jordan { n: parse_usize(args)? },
        "shift" | "shift_truncation" => SpecKind::ShiftTruncation { n: parse_usize(args)? },
        "normal" => SpecKind::Normal {
            values: parse_complex_list(args)?,
        },
        "sum" | "direct_sum" => SpecKind::DirectSum {
            blocks: args.split('|').map(|b| parse_spec(b, seed)).collect::<Result<_>>()?,
        },
        "corner" | "corner_sum" => {
            let mut parts = args.splitn(3, ',');
            let lam = parse_complex(parts.next().unwrap_or(""))?;
            let scale = parse_f64(parts.next().ok_or_else(|| invalid("corner needs LAM,D,SPEC"))?)?;
            let rest = parts.next().ok_or_else(|| invalid("corner needs LAM,D,SPEC"))?;
            let (angle, inner) = match rest.split_once(',') {
                Some((a, inner)) if a.trim().parse::<f64>().is_ok() => (Some(parse_f64(a)?), inner),
                _ => (None, rest),
            };
            SpecKind::CornerSum {
                lam,
                inner: Box::new(parse_spec(inner, seed)?),
                scale,
                angle,
            }
        }
        "compact" | "compact_perturbation" => {
            let parts: Vec<&str> = args.split(',').collect();
            let [lam, rho, n] = parts[..] else {
                return Err(invalid("compact needs LAM,RHO,N"));
            };
            SpecKind::CompactPerturbation {
                lam: parse_complex(lam)?,
                rho: parse_f64(rho)?,
                n: parse_usize(n)?,
            }
        }
        "halfdisk" | "halfdisk_approximant" => SpecKind::HalfdiskApproximant { m: parse_usize(args)? },
        "sector" | "sector_approximant" => {
            let (angle, m) = args.split_once(',').ok_or_else(|| invalid("sector needs PHI,M"))?;
            SpecKind::SectorApproximant {
                angle: parse_f64(angle)?,
                m: parse_usize(m)?,
            }
        }
        other => return Err(invalid(format!("unknown operator kind '{other}'"))),
    };
    Ok(OperatorSpec { kind, seed })
}

/// Named examples shown by `gallery list`.
pub fn catalogue() -> Vec<(&'static str, &'static str)> {
    vec![
        ("jordan:2", "2x2 Jordan block; W is the disk of radius 1/2"),
        ("jordan:5", "5x5 Jordan block; radius cos(pi/6)"),
        ("shift:8", "finite section of the unilateral shift"),
        ("normal:1,i,-1,-i", "normal matrix whose range is a square"),
        (
            "corner:0,1,1.5707963267948966,jordan:2",
            "[0] + (iI + J/4): corner at 0",
        ),
        ("compact:0,0.5,8", "scalar plus geometrically decaying perturbation"),
        ("halfdisk:9", "diagonal approximant of the upper half-disk"),
        ("sector:1.2,9", "diagonal approximant of a circular sector"),
        ("sum:jordan:2|normal:1+i", "block diagonal sum"),
    ]
}

/// One deflation round: dimension after removing certified corners and the
/// distance of the new range to the target shape.
#[derive(Debug, Clone, Serialize)]
pub struct DeflationStep {
    pub dimension: usize,
    pub hausdorff: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetShape {
    Halfdisk,
    Sector { angle: f64 },
}

#[derive(Debug, Clone, Serialize)]
pub struct AndersonReport {
    pub m: usize,
    pub shape: TargetShape,
    /// Hausdorff distance from `W` to the target shape (the half-disk, or
    /// the sector for sector runs).
    pub hausdorff_to_halfdisk: f64,
    /// Certificates at the leftmost and rightmost corners.
    #[serde(serialize_with = "crate::io::serialize_certificates")]
    pub corner_certificates: Vec<ReducingCertificate>,
    pub deflation_steps: Vec<DeflationStep>,
    /// Each deflation strictly increased the distance to the target.
    pub strictly_shrinking: bool,
    pub terminated: bool,
}

/// Reference outline of the target: arc samples fine enough to contain the
/// midpoint direction of every approximant chord.
fn target_outline(shape: TargetShape, m: usize) -> Vec<C64> {
    let refine = 8 * (m - 1) + 1;
    match shape {
        TargetShape::Halfdisk => arc(PI, refine),
        TargetShape::Sector { angle } => {
            let mut pts = vec![ZERO];
            pts.extend(arc(angle, refine));
            pts
        }
    }
}

fn range_polygon(t: &ComplexMatrix, angles: usize) -> Result<Vec<C64>> {
    Ok(convex_hull(&boundary_curve(t, angles)?.boundary_points()))
}

/// Runs the approximation/deflation experiment for one approximant.
pub fn approximant_experiment(shape: TargetShape, m: usize, tol: f64) -> Result<AndersonReport> {
    if m < 3 {
        return Err(invalid(format!("approximant resolution must be at least 3, got {m}")));
    }
    let spec = match shape {
        TargetShape::Halfdisk => SpecKind::HalfdiskApproximant { m },
        TargetShape::Sector { angle } => SpecKind::SectorApproximant { angle, m },
    };
    let mut t = materialize(&OperatorSpec::new(spec))?;
    let angles = (16 * m).max(720);
    let outline = target_outline(shape, m);
    let initial = hausdorff(&range_polygon(&t, angles)?, &outline);
    let thr = Thresholds::default();

    let mut corner_certificates = Vec::new();
    let mut deflation_steps: Vec<DeflationStep> = Vec::new();
    loop {
        let t_norm = t.op_norm()?;
        let mut candidates = detect_corners(&t, angles)?;
        candidates.sort_by(|a, b| a.re.total_cmp(&b.re));
        let certified = |lam: &C64| -> Result<Option<CornerReport>> {
            Ok(corner_report(&t, *lam, &thr)?.filter(|r| r.is_reducing(t_norm)))
        };
        let mut right = None;
        for lam in candidates.iter().rev() {
            if let Some(r) = certified(lam)? {
                right = Some(r);
                break;
            }
        }
        let Some(right) = right else {
            break;
        };
        let mut left = None;
        for lam in &candidates {
            if lam.re >= right.lam.re {
                break;
            }
            if let Some(r) = certified(lam)? {
                left = Some(r);
                break;
            }
        }
        let left = left.unwrap_or_else(|| right.clone());
        let mut targets = vec![right.lam];
        if (left.lam - right.lam).norm() > thr.point_tol {
            targets.push(left.lam);
        }
        if corner_certificates.is_empty() {
            corner_certificates = vec![left.certificate.clone(), right.certificate.clone()];
        }
        let removed: usize = targets
            .iter()
            .map(|&l| reducing_eigenspace(&t, l, tol).map(|c| c.dimension))
            .sum::<Result<usize>>()?;
        if removed >= t.n() {
            break;
        }
        for lam in targets {
            let cert = reducing_eigenspace(&t, lam, tol)?;
            t = deflate(&t, &cert)?;
        }
        deflation_steps.push(DeflationStep {
            dimension: t.n(),
            hausdorff: hausdorff(&range_polygon(&t, angles)?, &outline),
        });
    }
    let mut previous = initial;
    let mut strictly_shrinking = true;
    for step in &deflation_steps {
        strictly_shrinking &= step.hausdorff > previous;
        previous = step.hausdorff;
    }
    Ok(AndersonReport {
        m,
        shape,
        hausdorff_to_halfdisk: initial,
        corner_certificates,
        deflation_steps,
        strictly_shrinking,
        terminated: true,
    })
}

/// Half-disk experiment for each resolution, run in parallel and reported
/// in input order.
pub fn anderson_experiment(m_values: &[usize], tol: f64) -> Result<Vec<AndersonReport>> {
    m_values
        .par_iter()
        .map(|&m| approximant_experiment(TargetShape::Halfdisk, m, tol))
        .collect()
}

/// Analytic chord sagitta `1 − cos(φ/(2(m−1)))` between an arc of angle `φ`
/// and its inscribed `m`-point polygon.
pub fn sagitta(angle: f64, m: usize) -> f64 {
    1.0 - (angle / (2.0 * (m - 1) as f64)).cos()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    ShiftTruncation,
    CompactPerturbation {
        #[serde(with = "complex_pair")]
        lam: C64,
        rho: f64,
    },
    /// `n` equally spaced points on the unit circle.
    NormalCircle,
}

impl Family {
    fn member(self, n: usize, seed: u64) -> Result<ComplexMatrix> {
        let kind = match self {
            Family::ShiftTruncation => SpecKind::ShiftTruncation { n },
            Family::CompactPerturbation { lam, rho } => SpecKind::CompactPerturbation { lam, rho, n },
            Family::NormalCircle => SpecKind::Normal {
                values: (0..n)
                    .map(|j| C64::from_polar(1.0, TAU * j as f64 / n as f64))
                    .collect(),
            },
        };
        materialize(&OperatorSpec { kind, seed })
    }

    /// Point at which reducing residuals are probed.
    fn candidate(self) -> C64 {
        match self {
            Family::CompactPerturbation { lam, .. } => lam,
            _ => ONE,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TruncationSummary {
    pub n: usize,
    pub numerical_radius: f64,
    #[serde(serialize_with = "crate::io::serialize_complex_list")]
    pub corners: Vec<C64>,
    pub min_reducing_residual: f64,
}

/// Numerical radius, grid-detected corners and the smallest reducing
/// residual at the family's candidate point, for each size.
pub fn truncation_family(family: Family, n_values: &[usize], seed: u64) -> Result<Vec<TruncationSummary>> {
    if n_values.windows(2).any(|w| w[1] <= w[0]) {
        return Err(invalid("sizes must be strictly increasing"));
    }
    n_values
        .iter()
        .map(|&n| {
            let t = family.member(n, seed)?;
            let angles = (8 * n).max(720);
            Ok(TruncationSummary {
                n,
                numerical_radius: numerical_radius(&t, angles)?,
                corners: detect_corners(&t, angles)?,
                min_reducing_residual: min_reducing_residual(&t, family.candidate())?,
            })
        })
        .collect()
}
