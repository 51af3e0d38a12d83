//! Numerical range boundaries via support-function sweeps.
//!
//! For a direction θ the support value `max Re(e^{-iθ} z)` over `W(T)` is
//! the top eigenvalue of the rotated Hermitian part of `T`, and the top
//! eigenvector is a unit vector whose Rayleigh value is a boundary point.

use std::f64::consts::TAU;

use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{NumRangeError, Result};
use crate::geometry::{SupportOracle, SupportSample};
use crate::linalg::{hermitian_eig, ComplexMatrix, UnitVector, C64};

/// Minimum number of angles for a boundary sweep.
pub const MIN_ANGLES: usize = 8;
/// Relative eigenvalue gap under which support points count as degenerate.
pub const MULTIPLICITY_TOL: f64 = 1e-9;
/// Default relative tolerance for flat-portion detection.
pub const FLAT_TOL: f64 = 1e-8;

/// A point of `∂W(T)` together with its supporting-line data.
#[derive(Debug, Clone)]
pub struct BoundaryPoint {
    pub theta: f64,
    pub support: f64,
    pub point: C64,
    pub witness: UnitVector,
    pub multiplicity: usize,
}

/// Support points at `m` equally spaced angles `θ_j = 2πj/m`.
#[derive(Debug, Clone)]
pub struct BoundaryCurve {
    pub operator_hash: String,
    pub points: Vec<BoundaryPoint>,
    pub angle_count: usize,
}

impl BoundaryCurve {
    pub fn boundary_points(&self) -> Vec<C64> {
        self.points.iter().map(|p| p.point).collect()
    }

    /// Convexity of the polygon through the boundary points: every turn is
    /// counterclockwise or straight up to `tol·scale²`.
    pub fn is_convex(&self, tol: f64) -> bool {
        let pts = self.boundary_points();
        let scale = crate::geometry::diameter(&pts).max(f64::MIN_POSITIVE);
        let m = pts.len();
        (0..m).all(|j| {
            let a = pts[j];
            let b = pts[(j + 1) % m];
            let c = pts[(j + 2) % m];
            crate::geometry::cross(b - a, c - b) >= -tol * scale * scale
        })
    }
}

/// A straight piece of the boundary found at a grid angle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FlatPortion {
    pub theta: f64,
    /// Endpoint reached first when traversing the boundary counterclockwise.
    pub start: C64,
    pub end: C64,
}

impl FlatPortion {
    pub fn length(&self) -> f64 {
        (self.end - self.start).norm()
    }
}

/// Hex SHA-256 over the dimension and the bit patterns of the entries.
pub fn operator_hash(t: &ComplexMatrix) -> String {
    let mut h = Sha256::new();
    h.update((t.rows() as u64).to_le_bytes());
    for z in t.data() {
        h.update(z.re.to_bits().to_le_bytes());
        h.update(z.im.to_bits().to_le_bytes());
    }
    hex::encode(h.finalize())
}

fn check_square(t: &ComplexMatrix) -> Result<()> {
    if !t.is_square() {
        return Err(NumRangeError::DimensionMismatch {
            expected: t.rows(),
            got: t.cols(),
        });
    }
    Ok(())
}

fn check_angles(m: usize) -> Result<()> {
    if m < MIN_ANGLES {
        return Err(NumRangeError::AngleCountTooSmall { m, min: MIN_ANGLES });
    }
    Ok(())
}

pub fn grid_angle(j: usize, m: usize) -> f64 {
    TAU * j as f64 / m as f64
}

fn support_point_with_norm(t: &ComplexMatrix, theta: f64, t_norm: f64) -> Result<BoundaryPoint> {
    let eig = hermitian_eig(&t.rotated_hermitian_part(theta))?;
    let n = t.n();
    let support = eig.max_eigenvalue();
    let cutoff = support - MULTIPLICITY_TOL * t_norm;
    let multiplicity = eig.eigenvalues.iter().filter(|&&l| l >= cutoff).count();
    let witness = UnitVector::normalize(eig.vector(n - 1)).expect("unit eigenvector");
    let point = t.quadratic_form(witness.coords());
    Ok(BoundaryPoint {
        theta,
        support,
        point,
        witness,
        multiplicity,
    })
}

/// Maximizer of `Re(e^{-iθ}<Tx,x>)` over unit `x`.
pub fn support_point(t: &ComplexMatrix, theta: f64) -> Result<BoundaryPoint> {
    check_square(t)?;
    support_point_with_norm(t, theta, t.op_norm()?)
}

/// Support points at `m` equally spaced angles, computed in parallel and
/// merged in angle order.
pub fn boundary_curve(t: &ComplexMatrix, m: usize) -> Result<BoundaryCurve> {
    check_square(t)?;
    check_angles(m)?;
    let t_norm = t.op_norm()?;
    let points = (0..m)
        .into_par_iter()
        .map(|j| support_point_with_norm(t, grid_angle(j, m), t_norm))
        .collect::<Result<Vec<_>>>()?;
    let curve = BoundaryCurve {
        operator_hash: operator_hash(t),
        points,
        angle_count: m,
    };
    if !curve.is_convex(1e-9) {
        return Err(NumRangeError::InvalidMatrix(
            "boundary sweep produced a non-convex polygon".into(),
        ));
    }
    Ok(curve)
}

/// Membership in the closure of `W(T)` through the support-function
/// description at `m` angles.
pub fn contains(t: &ComplexMatrix, z: C64, m: usize, tol: f64) -> Result<bool> {
    let curve = boundary_curve(t, m)?;
    Ok(curve_contains(&curve, z, tol))
}

/// [`contains`] against an already computed sweep.
pub fn curve_contains(curve: &BoundaryCurve, z: C64, tol: f64) -> bool {
    curve
        .points
        .iter()
        .all(|p| (C64::from_polar(1.0, -p.theta) * z).re <= p.support + tol)
}

pub fn numerical_radius(t: &ComplexMatrix, m: usize) -> Result<f64> {
    let curve = boundary_curve(t, m)?;
    Ok(curve.points.iter().map(|p| p.point.norm()).fold(0.0, f64::max))
}

/// Endpoints of the flat piece of `∂W(T)` with outward normal θ, if the top
/// eigenvalue of the rotated Hermitian part is degenerate within
/// `tol·‖T‖`.
///
/// The segment is the numerical range of the compression of `e^{-iθ}T` to
/// the top eigenspace, which is a vertical segment; its ends are found by
/// extremizing the imaginary part.
pub fn flat_segment(t: &ComplexMatrix, theta: f64, t_norm: f64, tol: f64) -> Result<Option<FlatPortion>> {
    let eig = hermitian_eig(&t.rotated_hermitian_part(theta))?;
    let n = t.n();
    let top = eig.max_eigenvalue();
    let k = eig.eigenvalues.iter().filter(|&&l| l >= top - tol * t_norm).count();
    if k < 2 {
        return Ok(None);
    }
    let cols: Vec<Vec<C64>> = (n - k..n).map(|j| eig.vector(j)).collect();
    let refs: Vec<&[C64]> = cols.iter().map(Vec::as_slice).collect();
    let q = ComplexMatrix::from_columns(&refs);
    let b = t.compress(&q);
    let phase = C64::from_polar(1.0, -theta);
    // Im(e^{-iθ}<By,y>) = <Ky,y> with K = (e^{-iθ}B - e^{iθ}B*)/(2i)
    let rotated = b.scale(phase);
    let mut im_part = rotated.sub(&rotated.adjoint()).scale(C64::new(0.0, -0.5));
    for i in 0..k {
        im_part[(i, i)].im = 0.0;
    }
    let im_eig = hermitian_eig(&im_part)?;
    let lo = q.mul_vec(&im_eig.vector(0));
    let hi = q.mul_vec(&im_eig.vector(k - 1));
    Ok(Some(FlatPortion {
        theta,
        start: t.quadratic_form(&lo),
        end: t.quadratic_form(&hi),
    }))
}

/// Straight pieces of `∂W(T)` at the grid angles. Degenerate pieces of
/// length at most `tol·‖T‖` are dropped.
pub fn flat_portions(t: &ComplexMatrix, m: usize, tol: f64) -> Result<Vec<FlatPortion>> {
    check_square(t)?;
    check_angles(m)?;
    let t_norm = t.op_norm()?;
    let found = (0..m)
        .into_par_iter()
        .map(|j| flat_segment(t, grid_angle(j, m), t_norm, tol))
        .collect::<Result<Vec<_>>>()?;
    Ok(found
        .into_iter()
        .flatten()
        .filter(|f| f.length() > tol * t_norm)
        .collect())
}

/// Whether `W(T)` has empty interior, i.e. `T = c + e^{iφ} H` with `H`
/// Hermitian. Returns the direction `e^{iφ}` of the segment when so (any
/// unit value for a singleton).
pub fn degenerate_direction(t: &ComplexMatrix, tol: f64) -> Option<C64> {
    let n = t.n();
    let mean: C64 = (0..n).map(|i| t[(i, i)]).sum::<C64>() / n as f64;
    let centered = t.shifted(-mean);
    let scale = centered.frobenius_norm();
    if scale <= tol * t.frobenius_norm().max(f64::MIN_POSITIVE) || scale == 0.0 {
        return Some(C64::new(1.0, 0.0));
    }
    // centered = e^{iφ}H forces centered = e^{2iφ} centered*
    let adj = centered.adjoint();
    let (idx, _) = centered
        .data()
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))?;
    let pivot = adj.data()[idx];
    if pivot.norm() == 0.0 {
        return None;
    }
    let ratio = centered.data()[idx] / pivot;
    let ratio = ratio / ratio.norm();
    let dev = centered.sub(&adj.scale(ratio)).frobenius_norm();
    if dev <= tol * scale {
        Some(C64::from_polar(1.0, 0.5 * ratio.arg()))
    } else {
        None
    }
}

/// [`SupportOracle`] backed by an operator; flat pieces come from
/// [`flat_segment`].
pub struct OperatorOracle<'a> {
    t: &'a ComplexMatrix,
    t_norm: f64,
    flat_tol: f64,
    degenerate: bool,
}

impl<'a> OperatorOracle<'a> {
    pub fn new(t: &'a ComplexMatrix) -> Result<Self> {
        check_square(t)?;
        let t_norm = t.op_norm()?;
        Ok(Self {
            t,
            t_norm,
            flat_tol: FLAT_TOL,
            degenerate: degenerate_direction(t, 1e-10).is_some(),
        })
    }

    pub fn operator(&self) -> &ComplexMatrix {
        self.t
    }

    pub fn norm(&self) -> f64 {
        self.t_norm
    }
}

impl SupportOracle for OperatorOracle<'_> {
    fn support(&self, theta: f64) -> Result<SupportSample> {
        let bp = support_point_with_norm(self.t, theta, self.t_norm)?;
        let flat = if bp.multiplicity >= 2 {
            flat_segment(self.t, theta, self.t_norm, self.flat_tol)?
                .filter(|f| f.length() > self.flat_tol * self.t_norm)
                .map(|f| (f.start, f.end))
        } else {
            None
        };
        Ok(SupportSample {
            value: bp.support,
            point: bp.point,
            flat,
        })
    }

    fn scale(&self) -> f64 {
        self.t_norm
    }

    fn is_degenerate(&self) -> bool {
        self.degenerate
    }
}
