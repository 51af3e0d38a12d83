//! File formats: matrix JSON, report CSV/JSON and SVG plots.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize, Serializer};
use serde_json::{json, Value};

use crate::error::{NumRangeError, Result};
use crate::geometry::{convex_hull, BoundaryClassification};
use crate::joint::JointSampleCloud;
use crate::linalg::{ComplexMatrix, C64};
use crate::range::BoundaryCurve;
use crate::reducing::{ProofTrace, ReducingCertificate};

#[derive(Serialize, Deserialize)]
struct MatrixJson {
    n: usize,
    entries: Vec<[f64; 2]>,
}

/// `{"n": n, "entries": [[re, im], …]}`, row-major. Floats use the shortest
/// representation that round-trips exactly.
pub fn matrix_to_json(t: &ComplexMatrix) -> String {
    let doc = MatrixJson {
        n: t.n(),
        entries: t.data().iter().map(|z| [z.re, z.im]).collect(),
    };
    serde_json::to_string(&doc).expect("matrix serializes")
}

pub fn matrix_from_json(text: &str) -> Result<ComplexMatrix> {
    let doc: MatrixJson =
        serde_json::from_str(text).map_err(|e| NumRangeError::InvalidMatrix(format!("malformed matrix JSON: {e}")))?;
    if doc.n == 0 {
        return Err(NumRangeError::InvalidMatrix("matrix dimension must be positive".into()));
    }
    if doc.entries.len() != doc.n * doc.n {
        return Err(NumRangeError::DimensionMismatch {
            expected: doc.n * doc.n,
            got: doc.entries.len(),
        });
    }
    let data = doc.entries.into_iter().map(|[re, im]| C64::new(re, im)).collect();
    ComplexMatrix::square(doc.n, data)
}

fn f17(x: f64) -> String {
    format!("{x:.16e}")
}

fn pair(z: C64) -> [f64; 2] {
    [z.re, z.im]
}

/// Header `theta,support,re,im,multiplicity`, one row per angle.
pub fn boundary_csv(curve: &BoundaryCurve) -> String {
    let mut out = String::from("theta,support,re,im,multiplicity\n");
    for p in &curve.points {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            f17(p.theta),
            f17(p.support),
            f17(p.point.re),
            f17(p.point.im),
            p.multiplicity
        );
    }
    out
}

pub fn classification_json(c: &BoundaryClassification) -> Value {
    json!({
        "verdict": c.verdict,
        "corner_flag": c.corner_flag,
        "linear_vertex_flag": c.linear_vertex_flag,
        "normal_cone_width": c.normal_cone_width,
        "scales": c.profile.scales,
        "left_q": c.profile.left_quotients,
        "right_q": c.profile.right_quotients,
        "rotation": c.position.rotation,
        "translation": pair(c.position.translation),
    })
}

pub fn certificate_json(cert: &ReducingCertificate) -> Value {
    let basis: Vec<Vec<[f64; 2]>> = cert
        .basis
        .iter()
        .map(|u| u.coords().iter().map(|&z| pair(z)).collect())
        .collect();
    json!({
        "lam": pair(cert.lam),
        "dimension": cert.dimension,
        "max_residual": cert.max_residual,
        "basis": basis,
    })
}

pub fn serialize_certificates<S: Serializer>(
    certs: &[ReducingCertificate],
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    certs.iter().map(certificate_json).collect::<Vec<_>>().serialize(s)
}

pub fn serialize_complex_list<S: Serializer>(zs: &[C64], s: S) -> std::result::Result<S::Ok, S::Error> {
    zs.iter().map(|&z| pair(z)).collect::<Vec<_>>().serialize(s)
}

/// Header `n,delta_re,delta_im,abs_beta,abs_gamma,r_n,mu_n`; `mu_n` is empty
/// when undefined.
pub fn trace_csv(trace: &ProofTrace) -> String {
    let mut out = String::from("n,delta_re,delta_im,abs_beta,abs_gamma,r_n,mu_n\n");
    for s in &trace.steps {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            s.n,
            f17(s.delta.re),
            f17(s.delta.im),
            f17(s.beta.norm()),
            f17(s.gamma.norm()),
            f17(s.r),
            s.mu.map(f17).unwrap_or_default()
        );
    }
    out
}

/// Header `re_1,im_1,…,re_k,im_k`, one row per sample.
pub fn cloud_csv(cloud: &JointSampleCloud) -> String {
    let k = cloud.points.first().map_or(0, Vec::len);
    let header: Vec<String> = (1..=k).flat_map(|j| [format!("re_{j}"), format!("im_{j}")]).collect();
    let mut out = header.join(",");
    out.push('\n');
    for p in &cloud.points {
        let row: Vec<String> = p.iter().flat_map(|z| [f17(z.re), f17(z.im)]).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// 800×800 plot of a boundary polyline, its hull and point markers, scaled
/// to the bounding box plus a 10% margin.
pub fn boundary_svg(boundary: &[C64], markers: &[C64]) -> String {
    const SIZE: f64 = 800.0;
    let all = || boundary.iter().chain(markers);
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for z in all() {
        x0 = x0.min(z.re);
        x1 = x1.max(z.re);
        y0 = y0.min(z.im);
        y1 = y1.max(z.im);
    }
    if !x0.is_finite() {
        (x0, x1, y0, y1) = (-1.0, 1.0, -1.0, 1.0);
    }
    let span = (x1 - x0).max(y1 - y0).max(1e-12);
    let (cx, cy) = (0.5 * (x0 + x1), 0.5 * (y0 + y1));
    let half = 0.5 * span * 1.2;
    let px = |z: C64| {
        (
            (z.re - cx + half) / (2.0 * half) * SIZE,
            (cy + half - z.im) / (2.0 * half) * SIZE,
        )
    };
    let fmt_pts = |pts: &[C64]| -> String {
        pts.iter()
            .map(|&z| {
                let (x, y) = px(z);
                format!("{x:.3},{y:.3}")
            })
            .collect::<Vec<_>>()
            .join(" ")
    };

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 800 800" width="800" height="800">"#
    );
    let _ = writeln!(out, "<!-- numrange {} -->", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(out, r#"<rect width="800" height="800" fill="white"/>"#);
    let (ax0, ay0) = px(C64::new(cx - half, 0.0));
    let (ax1, _) = px(C64::new(cx + half, 0.0));
    let (bx0, by0) = px(C64::new(0.0, cy - half));
    let (_, by1) = px(C64::new(0.0, cy + half));
    let _ = writeln!(
        out,
        r##"<line x1="{ax0:.3}" y1="{ay0:.3}" x2="{ax1:.3}" y2="{ay0:.3}" stroke="#bbb"/>"##
    );
    let _ = writeln!(
        out,
        r##"<line x1="{bx0:.3}" y1="{by0:.3}" x2="{bx0:.3}" y2="{by1:.3}" stroke="#bbb"/>"##
    );
    let mut closed = boundary.to_vec();
    if let Some(&first) = boundary.first() {
        closed.push(first);
    }
    let _ = writeln!(
        out,
        r##"<polyline points="{}" fill="none" stroke="#1f4e9c" stroke-width="1.5"/>"##,
        fmt_pts(&closed)
    );
    let hull = convex_hull(boundary);
    if !hull.is_empty() {
        let mut d = String::new();
        for (k, &z) in hull.iter().enumerate() {
            let (x, y) = px(z);
            let _ = write!(d, "{}{x:.3},{y:.3} ", if k == 0 { "M" } else { "L" });
        }
        d.push('Z');
        let _ = writeln!(
            out,
            r##"<path d="{d}" fill="#1f4e9c" fill-opacity="0.08" stroke="none"/>"##
        );
    }
    for &z in markers {
        let (x, y) = px(z);
        let _ = writeln!(out, r##"<circle cx="{x:.3}" cy="{y:.3}" r="4" fill="#c0392b"/>"##);
    }
    out.push_str("</svg>\n");
    out
}

/// Writes `bytes` to `path` through a temporary file in the same directory
/// followed by a rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}
