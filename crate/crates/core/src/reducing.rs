//! Reducing eigenvalues: residuals, certified eigenspaces, deflation, and
//! the step-by-step construction showing that singular boundary points of
//! the numerical range attract reducing approximate eigenvectors.

use std::f64::consts::FRAC_PI_2;

use serde::Serialize;

use crate::error::{NumRangeError, Result};
use crate::geometry::{classify_operator, BoundaryClassification, Thresholds};
use crate::linalg::{
    inner, norm, nullspace, orthogonal_complement, right_singular_pairs, ComplexMatrix, UnitVector, C64, ONE, ZERO,
};
use crate::range::boundary_curve;

/// Tolerance under which a corner certificate counts as reducing, relative
/// to `‖T‖`.
pub const CORNER_RESIDUAL_TOL: f64 = 1e-7;
/// Residual bound (relative to `‖T‖`) required before deflating.
pub const DEFLATE_TOL: f64 = 1e-6;
/// Required decay factor of `|β_n| + |γ_n|` for a positive trace verdict.
pub const TRACE_DECAY: f64 = 1e-3;

fn check_dim(t: &ComplexMatrix, u: &[C64]) -> Result<()> {
    if !t.is_square() {
        return Err(NumRangeError::InvalidMatrix("operator must be square".into()));
    }
    if u.len() != t.n() {
        return Err(NumRangeError::DimensionMismatch {
            expected: t.n(),
            got: u.len(),
        });
    }
    Ok(())
}

/// `‖(T − λ)u‖ + ‖(T* − λ̄)u‖`.
pub fn reducing_residual(t: &ComplexMatrix, lam: C64, u: &UnitVector) -> Result<f64> {
    let u = u.coords();
    check_dim(t, u)?;
    let tu = t.mul_vec(u);
    let su = t.adjoint_mul_vec(u);
    let a: Vec<C64> = tu.iter().zip(u).map(|(x, y)| x - lam * y).collect();
    let b: Vec<C64> = su.iter().zip(u).map(|(x, y)| x - lam.conj() * y).collect();
    Ok(norm(&a) + norm(&b))
}

/// Orthonormal basis of `null(T − λ) ∩ null(T* − λ̄)` computed at a given
/// tolerance, with independently recomputed residuals.
#[derive(Debug, Clone)]
pub struct ReducingCertificate {
    pub lam: C64,
    pub basis: Vec<UnitVector>,
    pub dimension: usize,
    pub max_residual: f64,
}

fn reducing_stack(t: &ComplexMatrix, lam: C64) -> ComplexMatrix {
    let a = t.shifted(-lam);
    let b = t.adjoint().shifted(-lam.conj());
    ComplexMatrix::vstack(&[a, b])
}

pub fn reducing_eigenspace(t: &ComplexMatrix, lam: C64, tol: f64) -> Result<ReducingCertificate> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(NumRangeError::InvalidMatrix(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    if !t.is_square() {
        return Err(NumRangeError::InvalidMatrix("operator must be square".into()));
    }
    let basis = nullspace(&reducing_stack(t, lam), tol)?;
    let mut max_residual: f64 = 0.0;
    for u in &basis {
        max_residual = max_residual.max(reducing_residual(t, lam, u)?);
    }
    Ok(ReducingCertificate {
        lam,
        dimension: basis.len(),
        basis,
        max_residual,
    })
}

/// Smallest value of `(‖(T − λ)u‖² + ‖(T* − λ̄)u‖²)^{1/2}` over unit `u`.
pub fn min_reducing_residual(t: &ComplexMatrix, lam: C64) -> Result<f64> {
    let pairs = right_singular_pairs(&reducing_stack(t, lam))?;
    Ok(pairs.first().map_or(0.0, |p| p.0))
}

/// Compression of `T` to the orthogonal complement of a certified reducing
/// subspace.
pub fn deflate(t: &ComplexMatrix, cert: &ReducingCertificate) -> Result<ComplexMatrix> {
    let n = t.n();
    let bound = DEFLATE_TOL * t.op_norm()?;
    if cert.dimension == 0 || cert.max_residual > bound {
        let residual = if cert.dimension == 0 {
            f64::INFINITY
        } else {
            cert.max_residual
        };
        return Err(NumRangeError::NotReducing { residual, bound });
    }
    if cert.basis.iter().any(|u| u.dimension() != n) {
        return Err(NumRangeError::DimensionMismatch {
            expected: n,
            got: cert.basis[0].dimension(),
        });
    }
    if cert.dimension >= n {
        return Err(NumRangeError::EmptyComplement);
    }
    let complement = orthogonal_complement(&cert.basis, n)?;
    let cols: Vec<&[C64]> = complement.iter().map(|u| u.coords()).collect();
    Ok(t.compress(&ComplexMatrix::from_columns(&cols)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TraceMode {
    TwoSided,
    Righthand,
    Lefthand,
}

/// One step of the construction for a unit vector `u_n`.
#[derive(Debug, Clone, Serialize)]
pub struct TraceStep {
    pub n: usize,
    pub delta: C64,
    pub beta: C64,
    pub gamma: C64,
    pub r: f64,
    pub tau: C64,
    pub eta: C64,
    pub alpha: C64,
    /// `+1` for `x_n = u_n + α_n z_n`, `-1` for `u_n − α_n z_n`.
    pub sign: i8,
    /// `<T x_n, x_n>`.
    pub x_value: C64,
    pub x_norm: f64,
    /// `|Im <Tx,x>| / Re²<Tx,x>`, absent when the real part vanishes.
    pub mu: Option<f64>,
}

impl TraceStep {
    pub fn residual_sum(&self) -> f64 {
        self.beta.norm() + self.gamma.norm()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ProofTrace {
    pub mode: TraceMode,
    pub steps: Vec<TraceStep>,
    /// Final over initial `|β| + |γ|`.
    pub decay_ratio: f64,
    /// Whether the residual sum decayed by the factor [`TRACE_DECAY`].
    pub verdict: bool,
}

/// A unit vector orthogonal to `u`, chosen deterministically.
fn orthogonal_unit(u: &[C64]) -> Vec<C64> {
    let n = u.len();
    let k = (0..n).min_by(|&a, &b| u[a].norm().total_cmp(&u[b].norm())).unwrap_or(0);
    let mut e = vec![ZERO; n];
    e[k] = ONE;
    let p = inner(&e, u);
    let v: Vec<C64> = e.iter().zip(u).map(|(x, y)| x - p * y).collect();
    let r = norm(&v);
    v.into_iter().map(|x| x / r).collect()
}

fn unit_phase(z: C64) -> C64 {
    if z == ZERO {
        ONE
    } else {
        z / z.norm()
    }
}

/// Runs the construction on `sequence` for `T` in standard position
/// (boundary point at 0, `W(T)` in the closed upper half-plane).
pub fn proof_trace(
    t: &ComplexMatrix,
    sequence: &[UnitVector],
    mode: TraceMode,
    alpha0: Option<C64>,
) -> Result<ProofTrace> {
    let n_dim = t.n();
    if n_dim < 2 {
        return Err(NumRangeError::InvalidMatrix("trace needs dimension at least 2".into()));
    }
    let t_norm = t.op_norm()?;
    let m_const = match mode {
        TraceMode::TwoSided => None,
        TraceMode::Righthand | TraceMode::Lefthand => {
            let a0 = alpha0.ok_or_else(|| NumRangeError::SegmentViolation {
                step: 0,
                reason: "one-sided trace needs alpha0".into(),
            })?;
            let right = mode == TraceMode::Righthand;
            if (right && a0.re <= 0.0) || (!right && a0.re >= 0.0) {
                return Err(NumRangeError::SegmentViolation {
                    step: 0,
                    reason: format!("alpha0 = {a0} has real part of the wrong sign"),
                });
            }
            Some((a0, 5.0 * a0.norm() * t_norm / a0.re.abs()))
        }
    };

    let mut steps = Vec::with_capacity(sequence.len());
    for (idx, u) in sequence.iter().enumerate() {
        let n = idx + 1;
        let u = u.coords();
        check_dim(t, u)?;
        let tu = t.mul_vec(u);
        let su = t.adjoint_mul_vec(u);
        let delta = inner(&tu, u);
        if delta.im < -1e-9 {
            return Err(NumRangeError::NotStandardPosition { step: n, im: delta.im });
        }
        if let Some((a0, _)) = m_const {
            let s = (delta.re * a0.re + delta.im * a0.im) / a0.norm_sqr();
            let off = (delta - a0 * s.clamp(0.0, 1.0)).norm();
            if off > 1e-8 {
                return Err(NumRangeError::SegmentViolation {
                    step: n,
                    reason: format!("<Tu,u> = {delta} lies {off:e} off the segment [0, {a0}]"),
                });
            }
            if delta == ZERO {
                return Err(NumRangeError::SegmentViolation {
                    step: n,
                    reason: "<Tu,u> = 0 leaves r_n undefined".into(),
                });
            }
        }

        // T u = δ u + β v
        let rem_b: Vec<C64> = tu.iter().zip(u).map(|(x, y)| x - delta * y).collect();
        let beta_abs = norm(&rem_b);
        let v: Vec<C64> = if beta_abs > 0.0 {
            rem_b.iter().map(|x| x / beta_abs).collect()
        } else {
            orthogonal_unit(u)
        };
        let beta = C64::new(beta_abs, 0.0);
        // T* u = δ̄ u + γ̄ w, with the phase of w fixed by Re<v,w> ≥ 0
        let rem_g: Vec<C64> = su.iter().zip(u).map(|(x, y)| x - delta.conj() * y).collect();
        let gamma_abs = norm(&rem_g);
        let w0: Vec<C64> = if gamma_abs > 0.0 {
            rem_g.iter().map(|x| x / gamma_abs).collect()
        } else {
            v.clone()
        };
        let omega = unit_phase(inner(&v, &w0));
        let w: Vec<C64> = w0.iter().map(|x| x * omega).collect();
        let gamma = omega * gamma_abs;
        let vw = inner(&v, &w);

        let tau = if beta == ZERO || gamma == ZERO {
            ONE
        } else {
            C64::from_polar(1.0, 0.5 * (beta.arg() - gamma.arg()))
        };
        let r = match m_const {
            None if delta == ZERO => 1.0 / n as f64,
            None => delta.norm().sqrt(),
            Some((_, m)) => (delta.norm() / m).sqrt(),
        };
        let alpha = tau * r;
        let eta = unit_phase(alpha.conj() * beta + alpha * gamma);
        let z: Vec<C64> = v.iter().zip(&w).map(|(a, b)| a + b).collect();
        let plus = match mode {
            TraceMode::TwoSided => {
                let tz = t.mul_vec(&z);
                (alpha.conj() * inner(&tu, &z) + alpha * inner(&tz, u)).im >= 0.0
            }
            TraceMode::Righthand => (eta * (ONE + vw)).re >= 0.0,
            TraceMode::Lefthand => (eta * (ONE + vw)).re <= 0.0,
        };
        let sign: i8 = if plus { 1 } else { -1 };
        let x: Vec<C64> = u.iter().zip(&z).map(|(a, b)| a + alpha * f64::from(sign) * b).collect();
        let x_value = t.quadratic_form(&x);
        let mu = (x_value.re != 0.0).then(|| x_value.im.abs() / (x_value.re * x_value.re));
        steps.push(TraceStep {
            n,
            delta,
            beta,
            gamma,
            r,
            tau,
            eta,
            alpha,
            sign,
            x_value,
            x_norm: norm(&x),
            mu,
        });
    }
    let first = steps.first().map_or(0.0, TraceStep::residual_sum);
    let last = steps.last().map_or(0.0, TraceStep::residual_sum);
    let decay_ratio = if first > 0.0 { last / first } else { 0.0 };
    Ok(ProofTrace {
        mode,
        verdict: !steps.is_empty() && last <= TRACE_DECAY * (first + 1e-30),
        decay_ratio,
        steps,
    })
}

/// `steps` unit vectors on the great circle from `start` to `target` whose
/// angular distance to `target` shrinks geometrically by `final_ratio`
/// overall.
pub fn spherical_sequence(
    start: &UnitVector,
    target: &UnitVector,
    steps: usize,
    final_ratio: f64,
) -> Result<Vec<UnitVector>> {
    let (a, b) = (start.coords(), target.coords());
    if a.len() != b.len() {
        return Err(NumRangeError::DimensionMismatch {
            expected: b.len(),
            got: a.len(),
        });
    }
    // align the phase of start with target, then split off the orthogonal part
    let p = inner(a, b);
    let phase = unit_phase(p);
    let aligned: Vec<C64> = a.iter().map(|x| x * phase.conj()).collect();
    let c = p.norm().min(1.0);
    let orth: Vec<C64> = aligned.iter().zip(b).map(|(x, y)| x - c * y).collect();
    let orth = UnitVector::normalize(orth).map(UnitVector::into_coords);
    let s0 = c.acos();
    let count = steps.max(1);
    Ok((0..count)
        .map(|k| {
            let frac = if count == 1 { 0.0 } else { k as f64 / (count - 1) as f64 };
            let s = s0 * final_ratio.powf(frac);
            let coords = match &orth {
                Some(o) => b.iter().zip(o).map(|(y, z)| y * s.cos() + z * s.sin()).collect(),
                None => b.to_vec(),
            };
            UnitVector::normalize(coords).expect("unit combination")
        })
        .collect())
}

/// Slack `|<Tu,u>| + |α|²‖z‖²‖T‖ − |Im[ᾱ<Tu,z> + α<Tz,u>]|`, nonnegative
/// whenever `W(T)` lies in the closed upper half-plane.
pub fn half_plane_inequality_gap(t: &ComplexMatrix, u: &UnitVector, z: &[C64], alpha: C64) -> Result<f64> {
    let u = u.coords();
    check_dim(t, u)?;
    check_dim(t, z)?;
    let tu = t.mul_vec(u);
    let tz = t.mul_vec(z);
    let lhs = (alpha.conj() * inner(&tu, z) + alpha * inner(&tz, u)).im.abs();
    let rhs = inner(&tu, u).norm() + alpha.norm_sqr() * norm(z).powi(2) * t.op_norm()?;
    Ok(rhs - lhs)
}

/// Candidate corners: support points shared by at least two consecutive grid
/// angles.
pub fn detect_corners(t: &ComplexMatrix, m: usize) -> Result<Vec<C64>> {
    let curve = boundary_curve(t, m)?;
    let tol = 1e-8 * t.op_norm()?.max(f64::MIN_POSITIVE);
    let pts = curve.boundary_points();
    let mut corners: Vec<C64> = Vec::new();
    for j in 0..m {
        let (a, b) = (pts[j], pts[(j + 1) % m]);
        if (a - b).norm() <= tol && !corners.iter().any(|c| (c - a).norm() <= 10.0 * tol) {
            corners.push(a);
        }
    }
    Ok(corners)
}

#[derive(Debug, Clone)]
pub struct CornerReport {
    pub lam: C64,
    pub classification: BoundaryClassification,
    pub certificate: ReducingCertificate,
}

impl CornerReport {
    /// Whether the corner carries a nontrivial certificate with residual at
    /// most `CORNER_RESIDUAL_TOL·‖T‖`.
    pub fn is_reducing(&self, t_norm: f64) -> bool {
        self.certificate.dimension >= 1 && self.certificate.max_residual <= CORNER_RESIDUAL_TOL * t_norm
    }
}

/// Detects the corners of `∂W(T)` on an `m`-angle grid, classifies each and
/// certifies its reducing eigenspace.
pub fn corner_reducing_check(t: &ComplexMatrix, m: usize, thr: &Thresholds) -> Result<Vec<CornerReport>> {
    if m < 64 {
        return Err(NumRangeError::AngleCountTooSmall { m, min: 64 });
    }
    let mut out = Vec::new();
    for lam in detect_corners(t, m)? {
        out.extend(corner_report(t, lam, thr)?);
    }
    Ok(out)
}

/// Classifies one candidate corner; `None` when it is not a corner.
pub fn corner_report(t: &ComplexMatrix, lam: C64, thr: &Thresholds) -> Result<Option<CornerReport>> {
    let classification = classify_operator(t, lam, thr)?;
    if !classification.corner_flag {
        return Ok(None);
    }
    let certificate = reducing_eigenspace(t, lam, thr.point_tol)?;
    Ok(Some(CornerReport {
        lam,
        classification,
        certificate,
    }))
}

/// `e^{iψ}(T − λ)` with the outward normal `normal` sent to `−i`, so that
/// `W` lands in the closed upper half-plane with `λ` at the origin.
pub fn to_standard_position(t: &ComplexMatrix, lam: C64, normal: f64) -> ComplexMatrix {
    t.shifted(-lam).scale(C64::from_polar(1.0, -FRAC_PI_2 - normal))
}
