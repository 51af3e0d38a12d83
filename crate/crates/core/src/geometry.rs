//! Planar convex geometry on sampled boundaries.
//!
//! Everything here works through a [`SupportOracle`]: either an operator
//! (support values are top eigenvalues) or a plain list of boundary samples
//! ([`SampleSet`]). The classification of a boundary point proceeds in four
//! steps: locate a supporting line through the point, measure the normal
//! cone, move the set into standard position (point at the origin, set in
//! the closed upper half-plane) and sample the quotient `Im α / Re² α` along
//! the boundary at shrinking abscissae.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use serde::{Serialize, Serializer};

use crate::error::{NumRangeError, Result};
use crate::linalg::{ComplexMatrix, C64};
use crate::range::OperatorOracle;

/// `Im(conj(a)·b)`: positive when `b` turns counterclockwise from `a`.
pub fn cross(a: C64, b: C64) -> f64 {
    a.re * b.im - a.im * b.re
}

pub fn diameter(points: &[C64]) -> f64 {
    // exact diameter of the hull vertices; the hull is small in practice
    let hull = convex_hull(points);
    let mut d: f64 = 0.0;
    for (i, a) in hull.iter().enumerate() {
        for b in &hull[i + 1..] {
            d = d.max((a - b).norm());
        }
    }
    d
}

pub fn point_segment_distance(p: C64, a: C64, b: C64) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_sqr();
    if len2 == 0.0 {
        return (p - a).norm();
    }
    let s = ((p - a).re * ab.re + (p - a).im * ab.im) / len2;
    (p - (a + ab * s.clamp(0.0, 1.0))).norm()
}

/// Counterclockwise strict convex hull (Andrew's monotone chain). Vertices
/// whose turning angle has sine below `1e-12` are dropped as collinear.
pub fn convex_hull(points: &[C64]) -> Vec<C64> {
    let mut pts: Vec<C64> = points.to_vec();
    pts.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    pts.dedup();
    if pts.len() <= 2 {
        return pts;
    }
    let keeps_left = |o: C64, a: C64, b: C64| {
        let (u, v) = (a - o, b - a);
        cross(u, v) > 1e-12 * u.norm() * v.norm()
    };
    let mut lower: Vec<C64> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && !keeps_left(lower[lower.len() - 2], lower[lower.len() - 1], p) {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<C64> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && !keeps_left(upper[upper.len() - 2], upper[upper.len() - 1], p) {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    if lower.len() == 2 && lower[0] == lower[1] {
        lower.pop();
    }
    lower
}

/// Edges of a closed polygon (a single point or a segment for short lists).
fn polygon_edges(poly: &[C64]) -> Vec<(C64, C64)> {
    match poly.len() {
        0 => Vec::new(),
        1 => vec![(poly[0], poly[0])],
        2 => vec![(poly[0], poly[1])],
        n => (0..n).map(|i| (poly[i], poly[(i + 1) % n])).collect(),
    }
}

fn densify(poly: &[C64], step: f64) -> Vec<C64> {
    let mut out = Vec::new();
    for (a, b) in polygon_edges(poly) {
        let k = ((b - a).norm() / step).ceil().max(1.0) as usize;
        out.extend((0..k).map(|j| a + (b - a) * (j as f64 / k as f64)));
    }
    if poly.len() == 2 {
        out.push(poly[1]);
    }
    out
}

fn directed_hausdorff(from: &[C64], to_edges: &[(C64, C64)]) -> f64 {
    from.iter()
        .map(|&p| {
            to_edges
                .iter()
                .map(|&(a, b)| point_segment_distance(p, a, b))
                .fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max)
}

/// Symmetric Hausdorff distance between two closed polygonal curves given
/// by their ordered vertices. Edges of each curve are densified with step
/// `1e-4` of the joint diameter and measured against the exact edges of the
/// other.
pub fn hausdorff(a: &[C64], b: &[C64]) -> f64 {
    assert!(!a.is_empty() && !b.is_empty(), "hausdorff needs non-empty inputs");
    let joint: Vec<C64> = a.iter().chain(b).copied().collect();
    let step = (1e-4 * diameter(&joint)).max(f64::MIN_POSITIVE);
    let ab = directed_hausdorff(&densify(a, step), &polygon_edges(b));
    let ba = directed_hausdorff(&densify(b, step), &polygon_edges(a));
    ab.max(ba)
}

/// Support data in one direction: `value = max Re(e^{-iθ} z)`, a maximizing
/// `point`, and the endpoints of the maximizing segment when the face in
/// that direction is a resolved straight piece.
#[derive(Debug, Clone, Copy)]
pub struct SupportSample {
    pub value: f64,
    pub point: C64,
    /// Face endpoints in counterclockwise order.
    pub flat: Option<(C64, C64)>,
}

/// Source of support-function evaluations for a compact convex set.
pub trait SupportOracle: Sync {
    fn support(&self, theta: f64) -> Result<SupportSample>;
    /// Characteristic size used to scale tolerances.
    fn scale(&self) -> f64;
    /// Whether the set has empty interior.
    fn is_degenerate(&self) -> bool;
    /// Exact normal cone `[lo, hi]` when `lam` is a known vertex within
    /// `tol`; oracles without vertex data return `None`.
    fn vertex_cone(&self, _lam: C64, _tol: f64) -> Option<(f64, f64)> {
        None
    }
}

/// A convex set known only through boundary samples.
///
/// Hull edges that carry additional input samples in their relative
/// interior count as resolved straight pieces; other edges are chords
/// between neighbouring samples of a possibly curved boundary.
#[derive(Debug, Clone)]
pub struct SampleSet {
    hull: Vec<C64>,
    straight: Vec<bool>,
    diam: f64,
}

impl SampleSet {
    pub fn new(samples: &[C64], collinear_tol: f64) -> Self {
        let hull = convex_hull(samples);
        let diam = diameter(&hull);
        let straight = match hull.len() {
            0 | 1 => Vec::new(),
            2 => vec![true, true],
            _ => Self::resolved_edges(&hull, samples, collinear_tol * diam),
        };
        Self { hull, straight, diam }
    }

    fn resolved_edges(hull: &[C64], samples: &[C64], tol: f64) -> Vec<bool> {
        let n = hull.len();
        let center = hull.iter().sum::<C64>() / n as f64;
        let base = (hull[0] - center).arg();
        let angles: Vec<f64> = hull
            .iter()
            .map(|v| ((v - center).arg() - base).rem_euclid(TAU))
            .collect();
        let mut straight = vec![false; n];
        for &p in samples {
            let a = ((p - center).arg() - base).rem_euclid(TAU);
            let idx = angles.partition_point(|&x| x <= a).saturating_sub(1);
            let (u, v) = (hull[idx], hull[(idx + 1) % n]);
            let len = (v - u).norm();
            if point_segment_distance(p, u, v) > tol {
                continue;
            }
            let s = ((p - u).re * (v - u).re + (p - u).im * (v - u).im) / (len * len);
            let margin = tol / len;
            if s > margin && s < 1.0 - margin {
                straight[idx] = true;
            }
        }
        straight
    }

    pub fn hull(&self) -> &[C64] {
        &self.hull
    }

    fn edge_normal(&self, i: usize) -> f64 {
        let n = self.hull.len();
        let d = self.hull[(i + 1) % n] - self.hull[i];
        d.arg() - FRAC_PI_2
    }
}

fn angle_gap(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}

impl SupportOracle for SampleSet {
    fn support(&self, theta: f64) -> Result<SupportSample> {
        let rot = C64::from_polar(1.0, -theta);
        let (best, value) = self
            .hull
            .iter()
            .enumerate()
            .map(|(i, v)| (i, (rot * v).re))
            .fold((0, f64::MIN), |acc, x| if x.1 > acc.1 { x } else { acc });
        let point = self.hull[best];
        let n = self.hull.len();
        let flat = match n {
            0 | 1 => None,
            2 => {
                let d = self.hull[1] - self.hull[0];
                let normal = d.arg() - FRAC_PI_2;
                if angle_gap(normal, theta) <= 1e-9 {
                    Some((self.hull[0], self.hull[1]))
                } else if angle_gap(normal + PI, theta) <= 1e-9 {
                    Some((self.hull[1], self.hull[0]))
                } else {
                    None
                }
            }
            _ => [(best + n - 1) % n, best]
                .into_iter()
                .find(|&e| self.straight[e] && angle_gap(self.edge_normal(e), theta) <= 1e-9)
                .map(|e| (self.hull[e], self.hull[(e + 1) % n])),
        };
        Ok(SupportSample { value, point, flat })
    }

    fn scale(&self) -> f64 {
        self.diam
    }

    fn is_degenerate(&self) -> bool {
        self.hull.len() <= 2
    }

    fn vertex_cone(&self, lam: C64, tol: f64) -> Option<(f64, f64)> {
        let n = self.hull.len();
        if n < 3 {
            return None;
        }
        let (i, d) = self
            .hull
            .iter()
            .enumerate()
            .map(|(i, v)| (i, (v - lam).norm()))
            .fold((0, f64::INFINITY), |acc, x| if x.1 < acc.1 { x } else { acc });
        if d > tol {
            return None;
        }
        let lo = self.edge_normal((i + n - 1) % n);
        let hi = lo + (self.edge_normal(i) - lo).rem_euclid(TAU);
        Some((lo, hi))
    }
}

/// Rigid motion `z ↦ e^{i·rotation}(z + translation)` placing a boundary
/// point at the origin with the set in the closed upper half-plane.
#[derive(Debug, Clone, Serialize)]
pub struct StandardPosition {
    pub rotation: f64,
    #[serde(serialize_with = "ser_complex")]
    pub translation: C64,
    #[serde(skip)]
    pub transformed_samples: Vec<C64>,
}

impl StandardPosition {
    pub fn map(&self, z: C64) -> C64 {
        C64::from_polar(1.0, self.rotation) * (z + self.translation)
    }

    pub fn unmap(&self, w: C64) -> C64 {
        C64::from_polar(1.0, -self.rotation) * w - self.translation
    }

    /// Outward normal angle, in original coordinates, of the real axis used
    /// as supporting line.
    pub fn normal_angle(&self) -> f64 {
        -FRAC_PI_2 - self.rotation
    }

    fn with_normal(lam: C64, normal: f64) -> Self {
        Self {
            rotation: -FRAC_PI_2 - normal,
            translation: -lam,
            transformed_samples: Vec::new(),
        }
    }

    /// Frame whose positive real axis runs along `direction`.
    fn along(lam: C64, direction: C64) -> Self {
        Self {
            rotation: -direction.arg(),
            translation: -lam,
            transformed_samples: Vec::new(),
        }
    }
}

fn ser_complex<S: Serializer>(z: &C64, s: S) -> std::result::Result<S::Ok, S::Error> {
    [z.re, z.im].serialize(s)
}

/// Quotients `Im α / Re² α` at abscissae `Re α = ±t_k`; `None` marks a side
/// with no boundary sample at that scale.
#[derive(Debug, Clone, Default, Serialize)]
pub struct CurvatureProfile {
    pub scales: Vec<f64>,
    pub right_quotients: Vec<Option<f64>>,
    pub left_quotients: Vec<Option<f64>>,
}

impl CurvatureProfile {
    pub fn right_missing(&self) -> Vec<bool> {
        self.right_quotients.iter().map(Option::is_none).collect()
    }

    pub fn left_missing(&self) -> Vec<bool> {
        self.left_quotients.iter().map(Option::is_none).collect()
    }

    /// Largest observed quotient per side (a lim-sup diagnostic only).
    pub fn upper_quotients(&self) -> (Option<f64>, Option<f64>) {
        let top = |q: &[Option<f64>]| q.iter().flatten().copied().reduce(f64::max);
        (top(&self.left_quotients), top(&self.right_quotients))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    SmoothFinite,
    InfiniteCurvature,
    InfiniteRighthand,
    InfiniteLefthand,
    Corner,
    LinearVertex,
    FlatInterior,
}

impl Verdict {
    /// Corner-type or infinite-curvature verdicts: the hypotheses under
    /// which boundary points are forced to be reducing.
    pub fn is_singular(self) -> bool {
        !matches!(self, Verdict::SmoothFinite | Verdict::FlatInterior)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundaryClassification {
    pub verdict: Verdict,
    pub corner_flag: bool,
    pub linear_vertex_flag: bool,
    pub profile: CurvatureProfile,
    pub normal_cone_width: f64,
    pub position: StandardPosition,
}

/// Tunable thresholds for boundary classification.
#[derive(Debug, Clone)]
pub struct Thresholds {
    /// Quotient a diverging side must exceed at its finest scale.
    pub q_max: f64,
    /// Minimum local growth exponent `log(q_{k+1}/q_k) / log(t_k/t_{k+1})`.
    pub min_growth_exponent: f64,
    /// Number of finest scales over which growth must persist.
    pub growth_scales: usize,
    /// Relative distance under which samples count as collinear.
    pub collinear_tol: f64,
    /// Normal-cone width (radians) above which a point is a corner.
    pub corner_width: f64,
    /// Relative distance for support points to coincide with the point.
    pub point_tol: f64,
    /// Relative distance from the boundary accepted for the point.
    pub boundary_tol: f64,
    /// Angular grid for the initial supporting-line search.
    pub grid: usize,
    /// Decreasing abscissae for the curvature profile.
    pub scales: Vec<f64>,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            q_max: 1e6,
            min_growth_exponent: 0.25,
            growth_scales: 4,
            collinear_tol: 1e-9,
            corner_width: 1e-6,
            point_tol: 1e-8,
            boundary_tol: 1e-6,
            grid: 720,
            scales: (2..=16).map(|k| 2f64.powi(-k)).collect(),
        }
    }
}

/// Supporting-line data at a boundary point.
#[derive(Debug, Clone)]
struct LocalCone {
    lo: f64,
    hi: f64,
    /// Straight face at the clockwise end of the cone (ending at the point).
    flat_lo: Option<(C64, C64)>,
    /// Straight face at the counterclockwise end (starting at the point).
    flat_hi: Option<(C64, C64)>,
    flat_interior: bool,
}

impl LocalCone {
    fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

fn unit_scale(oracle: &dyn SupportOracle) -> f64 {
    let s = oracle.scale();
    if s > 0.0 {
        s
    } else {
        1.0
    }
}

fn gap(oracle: &dyn SupportOracle, lam: C64, theta: f64) -> Result<f64> {
    let s = oracle.support(theta)?;
    Ok(s.value - (C64::from_polar(1.0, -theta) * lam).re)
}

fn support_set_distance(s: &SupportSample, lam: C64) -> f64 {
    match s.flat {
        Some((a, b)) => point_segment_distance(lam, a, b).min((s.point - lam).norm()),
        None => (s.point - lam).norm(),
    }
}

fn locate(oracle: &dyn SupportOracle, lam: C64, thr: &Thresholds) -> Result<LocalCone> {
    let unit = unit_scale(oracle);
    let m = thr.grid.max(8);
    let step = TAU / m as f64;
    let mut best = (0.0, f64::INFINITY);
    for j in 0..m {
        let theta = step * j as f64;
        let d = gap(oracle, lam, theta)?;
        if d < best.1 {
            best = (theta, d);
        }
    }
    if best.1 < -thr.boundary_tol * unit {
        return Err(NumRangeError::NotOnBoundary { distance: best.1 });
    }
    // golden-section refinement of the supporting direction
    let (mut a, mut b) = (best.0 - step, best.0 + step);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let mut f1 = gap(oracle, lam, x1)?;
    let mut f2 = gap(oracle, lam, x2)?;
    for _ in 0..90 {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = gap(oracle, lam, x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = gap(oracle, lam, x2)?;
        }
    }
    let (theta_star, d_star) = if f1 <= f2 { (x1, f1) } else { (x2, f2) };
    let (theta_star, d_star) = if best.1 < d_star { best } else { (theta_star, d_star) };
    if d_star.abs() > thr.boundary_tol * unit {
        return Err(NumRangeError::NotOnBoundary { distance: d_star });
    }

    let at_star = oracle.support(theta_star)?;
    if let Some((fa, fb)) = at_star.flat {
        let inside = point_segment_distance(lam, fa, fb) <= thr.boundary_tol * unit;
        let margin = thr.point_tol * unit;
        if inside && (lam - fa).norm() > margin && (lam - fb).norm() > margin {
            return Ok(LocalCone {
                lo: theta_star,
                hi: theta_star,
                flat_lo: None,
                flat_hi: None,
                flat_interior: true,
            });
        }
    }
    let ptol = thr.point_tol * unit + 2.0 * support_set_distance(&at_star, lam);
    let inside = |theta: f64| -> Result<bool> { Ok(support_set_distance(&oracle.support(theta)?, lam) <= ptol) };

    let probe = step / 4.0;
    let min_len = 1e-6 * oracle.scale();
    let face = |theta: f64| -> Result<Option<(C64, C64)>> {
        Ok(oracle
            .support(theta)?
            .flat
            .filter(|(a, b)| (b - a).norm() >= min_len && min_len > 0.0))
    };
    if let Some((lo, hi)) = oracle.vertex_cone(lam, thr.point_tol * unit) {
        return Ok(LocalCone {
            lo,
            hi,
            flat_lo: face(lo)?,
            flat_hi: face(hi)?,
            flat_interior: false,
        });
    }
    let edge = |dir: f64| -> Result<f64> {
        let mut last_in = theta_star;
        let mut travelled = 0.0;
        loop {
            let next = last_in + dir * probe;
            if !inside(next)? {
                let (mut good, mut bad) = (last_in, next);
                for _ in 0..64 {
                    let mid = 0.5 * (good + bad);
                    if inside(mid)? {
                        good = mid;
                    } else {
                        bad = mid;
                    }
                }
                return Ok(good);
            }
            last_in = next;
            travelled += probe;
            if travelled >= PI {
                return Ok(last_in);
            }
        }
    };
    let hi = edge(1.0)?;
    let lo = edge(-1.0)?;
    if hi - lo >= TAU - probe {
        // singleton: every direction supports the point
        return Ok(LocalCone {
            lo: theta_star - PI,
            hi: theta_star + PI,
            flat_lo: None,
            flat_hi: None,
            flat_interior: false,
        });
    }
    let flat_hi = face(hi)?.filter(|(a, _)| (a - lam).norm() <= ptol.max(1e-9 * unit) * 10.0);
    let flat_lo = face(lo)?.filter(|(_, b)| (b - lam).norm() <= ptol.max(1e-9 * unit) * 10.0);
    Ok(LocalCone {
        lo,
        hi,
        flat_lo,
        flat_hi,
        flat_interior: false,
    })
}

fn choose_frame(
    oracle: &dyn SupportOracle,
    lam: C64,
    cone: &LocalCone,
    thr: &Thresholds,
    normal: Option<f64>,
) -> StandardPosition {
    if let Some(nrm) = normal {
        return StandardPosition::with_normal(lam, nrm);
    }
    if oracle.is_degenerate() {
        // the segment itself is the supporting line; orient it away from lam
        if let Some((a, b)) = cone.flat_hi.or(cone.flat_lo) {
            let far = if (a - lam).norm() > (b - lam).norm() { a } else { b };
            return StandardPosition::along(lam, far - lam);
        }
    }
    let corner = cone.width() > thr.corner_width;
    if !corner {
        if let Some((a, b)) = cone.flat_hi.or(cone.flat_lo) {
            return StandardPosition::along(lam, b - a);
        }
    }
    StandardPosition::with_normal(lam, 0.5 * (cone.lo + cone.hi))
}

/// Boundary point on one side of the origin (in the standard frame) with
/// abscissa exactly `sign·t`, found by bisection on the support direction
/// and interpolation along the final chord.
fn boundary_at_abscissa(
    oracle: &dyn SupportOracle,
    frame: &StandardPosition,
    theta_near: f64,
    theta_far: f64,
    t: f64,
    sign: f64,
) -> Result<Option<C64>> {
    let abscissa = |w: C64| sign * w.re;
    let candidates = |s: &SupportSample| -> Vec<C64> {
        let mut v = vec![frame.map(s.point)];
        if let Some((a, b)) = s.flat {
            v.push(frame.map(a));
            v.push(frame.map(b));
        }
        v
    };
    let far = candidates(&oracle.support(theta_far)?);
    let mut hi_pt = match far.into_iter().max_by(|a, b| abscissa(*a).total_cmp(&abscissa(*b))) {
        Some(p) if abscissa(p) >= t * (1.0 - 1e-12) => p,
        _ => return Ok(None),
    };
    let mut lo_pt = C64::new(0.0, 0.0);
    let (mut near, mut farther) = (theta_near, theta_far);
    for _ in 0..200 {
        if abscissa(hi_pt) - abscissa(lo_pt) <= 1e-4 * t || (farther - near).abs() < 1e-15 {
            break;
        }
        let mid = 0.5 * (near + farther);
        let s = oracle.support(mid)?;
        let pts = candidates(&s);
        let below = pts
            .iter()
            .copied()
            .filter(|p| abscissa(*p) < t)
            .max_by(|a, b| abscissa(*a).total_cmp(&abscissa(*b)));
        let above = pts
            .iter()
            .copied()
            .filter(|p| abscissa(*p) >= t)
            .min_by(|a, b| abscissa(*a).total_cmp(&abscissa(*b)));
        if s.flat.is_some() {
            if let (Some(b), Some(a)) = (below, above) {
                lo_pt = b;
                hi_pt = a;
                break;
            }
        }
        if abscissa(frame.map(s.point)) < t {
            near = mid;
            lo_pt = below.unwrap_or(lo_pt);
        } else {
            farther = mid;
            hi_pt = above.unwrap_or(hi_pt);
        }
    }
    let span = abscissa(hi_pt) - abscissa(lo_pt);
    if span <= 0.0 {
        return Ok(Some(hi_pt));
    }
    let s = (t - abscissa(lo_pt)) / span;
    Ok(Some(if s >= 1.0 - 1e-15 {
        hi_pt
    } else if s <= 1e-15 {
        lo_pt
    } else {
        lo_pt + (hi_pt - lo_pt) * s
    }))
}

/// Dense boundary samples around `lam` at the requested scales, in the
/// standard frame, plus per-side missing flags.
#[derive(Debug, Clone)]
pub struct RefinedSamples {
    pub position: StandardPosition,
    /// Samples in original coordinates.
    pub samples: Vec<C64>,
    pub right_missing: Vec<bool>,
    pub left_missing: Vec<bool>,
}

fn refine_with_cone(
    oracle: &dyn SupportOracle,
    lam: C64,
    cone: &LocalCone,
    frame: StandardPosition,
    scales: &[f64],
) -> Result<RefinedSamples> {
    // in the frame the outward normal of direction θ is θ + rotation; the
    // right half is swept until it points along +Re, the left until -Re
    let right_end = -frame.rotation;
    let right_far = cone.hi + (right_end - cone.hi).rem_euclid(TAU).min(PI);
    let left_end = -frame.rotation - PI;
    let left_far = cone.lo - (cone.lo - left_end).rem_euclid(TAU).min(PI);
    let mut samples = vec![lam];
    let mut right_missing = Vec::with_capacity(scales.len());
    let mut left_missing = Vec::with_capacity(scales.len());
    for &t in scales {
        match boundary_at_abscissa(oracle, &frame, cone.hi, right_far, t, 1.0)? {
            Some(w) => {
                samples.push(frame.unmap(w));
                right_missing.push(false);
            }
            None => right_missing.push(true),
        }
        match boundary_at_abscissa(oracle, &frame, cone.lo, left_far, t, -1.0)? {
            Some(w) => {
                samples.push(frame.unmap(w));
                left_missing.push(false);
            }
            None => left_missing.push(true),
        }
    }
    let mut transformed: Vec<C64> = samples.iter().map(|&z| frame.map(z)).collect();
    transformed[0] = C64::new(0.0, 0.0);
    // exact frame coordinates are kept for the refined points
    let mut k = 1;
    for (i, &t) in scales.iter().enumerate() {
        if !right_missing[i] {
            transformed[k].re = t;
            k += 1;
        }
        if !left_missing[i] {
            transformed[k].re = -t;
            k += 1;
        }
    }
    let position = StandardPosition {
        transformed_samples: transformed,
        ..frame
    };
    Ok(RefinedSamples {
        position,
        samples,
        right_missing,
        left_missing,
    })
}

fn check_scales(scales: &[f64]) -> Result<()> {
    if scales.iter().any(|&t| !(t > 0.0 && t.is_finite())) || scales.windows(2).any(|w| w[1] >= w[0]) {
        return Err(NumRangeError::InsufficientResolution(
            "scales must be positive and strictly decreasing".into(),
        ));
    }
    Ok(())
}

/// Dense samples of `∂W(T)` near `lam` hitting the requested abscissae in
/// the standard frame.
pub fn refine_near(t: &ComplexMatrix, lam: C64, scales: &[f64]) -> Result<RefinedSamples> {
    let oracle = OperatorOracle::new(t)?;
    refine_oracle(&oracle, lam, scales, &Thresholds::default())
}

pub fn refine_oracle(oracle: &dyn SupportOracle, lam: C64, scales: &[f64], thr: &Thresholds) -> Result<RefinedSamples> {
    check_scales(scales)?;
    let cone = locate(oracle, lam, thr)?;
    let frame = choose_frame(oracle, lam, &cone, thr, None);
    refine_with_cone(oracle, lam, &cone, frame, scales)
}

/// Moves point samples into standard position at `lam`.
pub fn standard_position(samples: &[C64], lam: C64) -> Result<StandardPosition> {
    let thr = Thresholds::default();
    let set = SampleSet::new(samples, thr.collinear_tol);
    let cone = locate(&set, lam, &thr)?;
    let frame = choose_frame(&set, lam, &cone, &thr, None);
    let transformed_samples = samples.iter().map(|&z| frame.map(z)).collect();
    Ok(StandardPosition {
        transformed_samples,
        ..frame
    })
}

/// Lower convex chain of points sorted by abscissa.
fn lower_chain(points: &[C64]) -> Vec<C64> {
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    let mut chain: Vec<C64> = Vec::new();
    for p in pts {
        if chain.last().is_some_and(|q| q.re == p.re) {
            continue;
        }
        while chain.len() >= 2
            && cross(
                chain[chain.len() - 1] - chain[chain.len() - 2],
                p - chain[chain.len() - 2],
            ) <= 0.0
        {
            chain.pop();
        }
        chain.push(p);
    }
    chain
}

fn chain_height(chain: &[C64], x: f64) -> f64 {
    let idx = chain.partition_point(|p| p.re < x);
    if idx < chain.len() && chain[idx].re == x {
        return chain[idx].im;
    }
    let (a, b) = (chain[idx - 1], chain[idx]);
    a.im + (b.im - a.im) * ((x - a.re) / (b.re - a.re))
}

/// Quotients `Im α / Re² α` of the lower boundary of the transformed
/// samples at `Re α = ±t` for each scale. A side is resolved at a scale when
/// some sample lies within 10% of that abscissa.
pub fn curvature_profile(std: &StandardPosition, scales: &[f64]) -> Result<CurvatureProfile> {
    check_scales(scales)?;
    let samples = &std.transformed_samples;
    let chain = lower_chain(samples);
    let resolved = |x: f64| samples.iter().any(|w| (w.re - x).abs() <= 0.1 * x.abs());
    let quotient = |x: f64| -> Option<f64> {
        if !resolved(x) || chain.is_empty() || x < chain[0].re || x > chain[chain.len() - 1].re {
            return None;
        }
        Some(chain_height(&chain, x).max(0.0) / (x * x))
    };
    let profile = CurvatureProfile {
        scales: scales.to_vec(),
        right_quotients: scales.iter().map(|&t| quotient(t)).collect(),
        left_quotients: scales.iter().map(|&t| quotient(-t)).collect(),
    };
    let usable = profile
        .right_quotients
        .iter()
        .zip(&profile.left_quotients)
        .filter(|(r, l)| r.is_some() || l.is_some())
        .count();
    if usable < 3 {
        return Err(NumRangeError::InsufficientResolution(format!(
            "{usable} of {} scales resolved, need 3",
            scales.len()
        )));
    }
    Ok(profile)
}

/// Divergence test for one side: the finest `growth_scales` quotients are
/// present, grow with local exponent at least `min_growth_exponent`, and
/// the last one exceeds `q_max`.
pub fn side_diverges(scales: &[f64], quotients: &[Option<f64>], thr: &Thresholds) -> bool {
    let k = thr.growth_scales.max(2);
    if quotients.len() < k {
        return false;
    }
    let tail: Option<Vec<f64>> = quotients[quotients.len() - k..].iter().copied().collect();
    let Some(tail) = tail else { return false };
    let ts = &scales[scales.len() - k..];
    if tail[k - 1] < thr.q_max {
        return false;
    }
    (0..k - 1)
        .all(|i| tail[i] > 0.0 && (tail[i + 1] / tail[i]).ln() / (ts[i] / ts[i + 1]).ln() >= thr.min_growth_exponent)
}

/// Classifies `lam ∈ ∂C` for the set behind `oracle`.
pub fn classify_point(oracle: &dyn SupportOracle, lam: C64, thr: &Thresholds) -> Result<BoundaryClassification> {
    classify_point_with_normal(oracle, lam, thr, None)
}

/// [`classify_point`] with the standard-position supporting line forced to
/// the outward normal `normal` (which must lie in the normal cone).
pub fn classify_point_with_normal(
    oracle: &dyn SupportOracle,
    lam: C64,
    thr: &Thresholds,
    normal: Option<f64>,
) -> Result<BoundaryClassification> {
    let cone = locate(oracle, lam, thr)?;
    if cone.flat_interior {
        return Ok(BoundaryClassification {
            verdict: Verdict::FlatInterior,
            corner_flag: false,
            linear_vertex_flag: false,
            profile: CurvatureProfile::default(),
            normal_cone_width: 0.0,
            position: StandardPosition::with_normal(lam, cone.lo),
        });
    }
    let width = cone.width();
    let corner = width > thr.corner_width;
    let frame = choose_frame(oracle, lam, &cone, thr, normal);
    let refined = refine_with_cone(oracle, lam, &cone, frame, &thr.scales)?;
    let profile = curvature_profile(&refined.position, &thr.scales);
    if corner {
        let linear = cone.flat_lo.is_some() && cone.flat_hi.is_some();
        return Ok(BoundaryClassification {
            verdict: if linear { Verdict::LinearVertex } else { Verdict::Corner },
            corner_flag: true,
            linear_vertex_flag: linear,
            profile: profile.unwrap_or_default(),
            normal_cone_width: width,
            position: refined.position,
        });
    }
    if oracle.is_degenerate() {
        return Err(NumRangeError::InsufficientResolution(
            "set has empty interior; curvature is undefined".into(),
        ));
    }
    let profile = profile?;
    let right = side_diverges(&profile.scales, &profile.right_quotients, thr);
    let left = side_diverges(&profile.scales, &profile.left_quotients, thr);
    let verdict = match (left, right) {
        (true, true) => Verdict::InfiniteCurvature,
        (false, true) => Verdict::InfiniteRighthand,
        (true, false) => Verdict::InfiniteLefthand,
        (false, false) => Verdict::SmoothFinite,
    };
    Ok(BoundaryClassification {
        verdict,
        corner_flag: false,
        linear_vertex_flag: false,
        profile,
        normal_cone_width: width,
        position: refined.position,
    })
}

pub fn classify_samples(samples: &[C64], lam: C64, thr: &Thresholds) -> Result<BoundaryClassification> {
    let set = SampleSet::new(samples, thr.collinear_tol);
    classify_point(&set, lam, thr)
}

pub fn classify_operator(t: &ComplexMatrix, lam: C64, thr: &Thresholds) -> Result<BoundaryClassification> {
    let oracle = OperatorOracle::new(t)?;
    classify_point(&oracle, lam, thr)
}

/// Normal-cone interval `[lo, hi]` (outward normal angles) at `lam`.
pub fn normal_cone(oracle: &dyn SupportOracle, lam: C64, thr: &Thresholds) -> Result<(f64, f64)> {
    let cone = locate(oracle, lam, thr)?;
    Ok((cone.lo, cone.hi))
}
