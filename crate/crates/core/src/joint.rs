//! Joint numerical ranges of operator tuples.
//!
//! The joint range is explored by Monte Carlo sampling; it is generally not
//! convex, and for tuples of length two or more the state range differs from
//! its closure, so only the sample cloud (and its hull) is ever computed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{NumRangeError, Result};
use crate::geometry::{classify_operator, BoundaryClassification, Thresholds};
use crate::linalg::{gaussian_unit_vector, nullspace, ComplexMatrix, UnitVector, C64};
use crate::reducing::{reducing_residual, ReducingCertificate, CORNER_RESIDUAL_TOL};

const BLOCK: usize = 4096;

/// `(T_1, …, T_k)` acting on a common space.
#[derive(Debug, Clone)]
pub struct OperatorTuple {
    ops: Vec<ComplexMatrix>,
}

impl OperatorTuple {
    pub fn new(ops: Vec<ComplexMatrix>) -> Result<Self> {
        let first = ops
            .first()
            .ok_or_else(|| NumRangeError::InvalidMatrix("operator tuple is empty".into()))?;
        let n = first.n();
        for t in &ops {
            if !t.is_square() {
                return Err(NumRangeError::InvalidMatrix("tuple entries must be square".into()));
            }
            if t.n() != n {
                return Err(NumRangeError::DimensionMismatch {
                    expected: n,
                    got: t.n(),
                });
            }
        }
        Ok(Self { ops })
    }

    pub fn ops(&self) -> &[ComplexMatrix] {
        &self.ops
    }

    pub fn k(&self) -> usize {
        self.ops.len()
    }

    pub fn dimension(&self) -> usize {
        self.ops[0].n()
    }

    /// `(<T_1 x, x>, …, <T_k x, x>)`.
    pub fn rayleigh(&self, x: &UnitVector) -> Vec<C64> {
        self.ops.iter().map(|t| t.quadratic_form(x.coords())).collect()
    }

    fn check_lam(&self, lam: &[C64]) -> Result<()> {
        if lam.len() != self.k() {
            return Err(NumRangeError::DimensionMismatch {
                expected: self.k(),
                got: lam.len(),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct JointSampleCloud {
    pub points: Vec<Vec<C64>>,
    pub witnesses: Vec<UnitVector>,
    pub seed: u64,
}

/// `count` seeded random unit vectors mapped through every quadratic form.
/// Blocks of vectors come from independent streams of one seed, so the
/// result does not depend on the thread count.
pub fn joint_sample(tup: &OperatorTuple, count: usize, seed: u64) -> Result<JointSampleCloud> {
    if count == 0 {
        return Err(NumRangeError::InvalidMatrix("sample count must be at least 1".into()));
    }
    let n = tup.dimension();
    let blocks: Vec<(Vec<Vec<C64>>, Vec<UnitVector>)> = (0..count.div_ceil(BLOCK))
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(b as u64);
            let len = BLOCK.min(count - b * BLOCK);
            let witnesses: Vec<UnitVector> = (0..len).map(|_| gaussian_unit_vector(n, &mut rng)).collect();
            let points = witnesses.iter().map(|x| tup.rayleigh(x)).collect();
            (points, witnesses)
        })
        .collect();
    let mut points = Vec::with_capacity(count);
    let mut witnesses = Vec::with_capacity(count);
    for (p, w) in blocks {
        points.extend(p);
        witnesses.extend(w);
    }
    Ok(JointSampleCloud {
        points,
        witnesses,
        seed,
    })
}

/// Common reducing eigenspace of all `T_j` at `λ_j`; the certificate
/// residual is the sum of the per-operator residuals.
pub fn joint_reducing_eigenspace(tup: &OperatorTuple, lam: &[C64], tol: f64) -> Result<ReducingCertificate> {
    tup.check_lam(lam)?;
    if tol.is_nan() || tol <= 0.0 {
        return Err(NumRangeError::InvalidMatrix(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let blocks: Vec<ComplexMatrix> = tup
        .ops
        .iter()
        .zip(lam)
        .flat_map(|(t, &l)| [t.shifted(-l), t.adjoint().shifted(-l.conj())])
        .collect();
    let basis = nullspace(&ComplexMatrix::vstack(&blocks), tol)?;
    let mut max_residual: f64 = 0.0;
    for u in &basis {
        let mut total = 0.0;
        for (t, &l) in tup.ops.iter().zip(lam) {
            total += reducing_residual(t, l, u)?;
        }
        max_residual = max_residual.max(total);
    }
    Ok(ReducingCertificate {
        lam: lam[0],
        dimension: basis.len(),
        basis,
        max_residual,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum JointStatus {
    /// Every coordinate is singular and a joint reducing vector exists.
    Pass,
    /// Every coordinate is singular but no joint certificate was found.
    Fail,
    /// Some coordinate is a smooth or flat boundary point.
    HypothesisFailure,
}

#[derive(Debug, Clone)]
pub struct JointCornerReport {
    pub lam: Vec<C64>,
    pub classifications: Vec<BoundaryClassification>,
    pub status: JointStatus,
    pub certificate: Option<ReducingCertificate>,
    /// Residual bound used for the pass/fail decision.
    pub bound: f64,
}

/// Classifies each `λ_j` on `∂W(T_j)` and, when all are corners or points
/// of infinite one-sided curvature, certifies a joint reducing vector.
pub fn joint_corner_check(tup: &OperatorTuple, lam: &[C64], thr: &Thresholds) -> Result<JointCornerReport> {
    tup.check_lam(lam)?;
    let mut classifications = Vec::with_capacity(lam.len());
    let mut max_norm: f64 = 0.0;
    for (t, &l) in tup.ops.iter().zip(lam) {
        classifications.push(classify_operator(t, l, thr)?);
        max_norm = max_norm.max(t.op_norm()?);
    }
    let bound = CORNER_RESIDUAL_TOL * max_norm;
    if !classifications.iter().all(|c| c.verdict.is_singular()) {
        return Ok(JointCornerReport {
            lam: lam.to_vec(),
            classifications,
            status: JointStatus::HypothesisFailure,
            certificate: None,
            bound,
        });
    }
    let cert = joint_reducing_eigenspace(tup, lam, thr.point_tol)?;
    let status = if cert.dimension >= 1 && cert.max_residual <= bound {
        JointStatus::Pass
    } else {
        JointStatus::Fail
    };
    Ok(JointCornerReport {
        lam: lam.to_vec(),
        classifications,
        status,
        certificate: Some(cert),
        bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{ONE, ZERO};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn diag(d: &[C64]) -> ComplexMatrix {
        ComplexMatrix::from_diag(d)
    }

    fn j2() -> ComplexMatrix {
        ComplexMatrix::from_rows(&[vec![ZERO, ONE], vec![ZERO, ZERO]]).unwrap()
    }

    #[test]
    fn tuple_validation() {
        assert!(OperatorTuple::new(vec![]).is_err());
        let bad = OperatorTuple::new(vec![ComplexMatrix::identity(2), ComplexMatrix::identity(3)]);
        assert!(matches!(bad, Err(NumRangeError::DimensionMismatch { .. })));
    }

    #[test]
    fn sample_examples() {
        let tup = OperatorTuple::new(vec![diag(&[ZERO, ONE])]).unwrap();
        let cloud = joint_sample(&tup, 1000, 3).unwrap();
        assert!(cloud
            .points
            .iter()
            .all(|p| p[0].im == 0.0 && (0.0..=1.0).contains(&p[0].re)));

        let t = crate::linalg::random_matrix(3, 5);
        let tup = OperatorTuple::new(vec![t.clone(), t]).unwrap();
        let cloud = joint_sample(&tup, 500, 1).unwrap();
        assert!(cloud.points.iter().all(|p| p[0] == p[1]));

        let h = j2().hermitian_part();
        let k = j2().sub(&h).scale(c(0.0, -1.0));
        let tup = OperatorTuple::new(vec![h, k]).unwrap();
        let cloud = joint_sample(&tup, 1000, 2).unwrap();
        assert!(cloud.points.iter().all(|p| (p[0].re.hypot(p[1].re)) <= 0.5 + 1e-9));
    }

    #[test]
    fn samples_reproduce_from_witnesses() {
        let tup = OperatorTuple::new(vec![j2(), diag(&[ONE, c(0.0, 2.0)])]).unwrap();
        let cloud = joint_sample(&tup, 5000, 11).unwrap();
        assert_eq!(cloud.points.len(), 5000);
        for (p, w) in cloud.points.iter().zip(&cloud.witnesses) {
            let q = tup.rayleigh(w);
            assert!(p.iter().zip(&q).all(|(a, b)| (a - b).norm() <= 1e-12));
        }
        let again = joint_sample(&tup, 5000, 11).unwrap();
        assert_eq!(cloud.points, again.points);
    }

    #[test]
    fn joint_eigenspace_examples() {
        let tup = OperatorTuple::new(vec![diag(&[c(2.0, 0.0), ZERO]), diag(&[c(3.0, 0.0), ZERO])]).unwrap();
        let cert = joint_reducing_eigenspace(&tup, &[c(2.0, 0.0), c(3.0, 0.0)], 1e-8).unwrap();
        assert_eq!(cert.dimension, 1);
        assert!((cert.basis[0].coords()[0].norm() - 1.0).abs() < 1e-12);

        let tup = OperatorTuple::new(vec![diag(&[c(2.0, 0.0), ZERO]), diag(&[ZERO, c(3.0, 0.0)])]).unwrap();
        assert_eq!(
            joint_reducing_eigenspace(&tup, &[c(2.0, 0.0), c(3.0, 0.0)], 1e-8)
                .unwrap()
                .dimension,
            0
        );

        let tup = OperatorTuple::new(vec![diag(&[ONE, c(0.0, 1.0), ZERO]), diag(&[ZERO, ONE, c(0.0, 1.0)])]).unwrap();
        assert_eq!(
            joint_reducing_eigenspace(&tup, &[ONE, ZERO], 1e-8).unwrap().dimension,
            1
        );
    }

    #[test]
    fn joint_corner_examples() {
        let thr = Thresholds::default();
        let tup = OperatorTuple::new(vec![
            diag(&[ONE, c(0.0, 1.0), c(-1.0, 0.0)]),
            diag(&[c(2.0, 0.0), ZERO, c(-2.0, 0.0)]),
        ])
        .unwrap();
        let rep = joint_corner_check(&tup, &[ONE, c(2.0, 0.0)], &thr).unwrap();
        assert_eq!(rep.status, JointStatus::Pass);
        assert_eq!(rep.certificate.unwrap().dimension, 1);

        let block = ComplexMatrix::from_rows(&[vec![c(0.0, 1.0), c(0.25, 0.0)], vec![ZERO, c(0.0, 1.0)]]).unwrap();
        let a = ComplexMatrix::direct_sum(&[ComplexMatrix::zeros(1, 1), block]);
        let b = diag(&[ZERO, ONE, c(2.0, 0.0)]);
        let rep = joint_corner_check(&OperatorTuple::new(vec![a, b]).unwrap(), &[ZERO, ZERO], &thr).unwrap();
        assert_eq!(rep.status, JointStatus::Pass);
        assert!((rep.certificate.unwrap().basis[0].coords()[0].norm() - 1.0).abs() < 1e-9);

        let tup = OperatorTuple::new(vec![j2(), j2()]).unwrap();
        let rep = joint_corner_check(&tup, &[c(0.5, 0.0), c(0.5, 0.0)], &thr).unwrap();
        assert_eq!(rep.status, JointStatus::HypothesisFailure);
        assert!(rep.certificate.is_none());
    }
}
