//! Dense complex linear algebra.
//!
//! Row-major complex matrices, unit vectors, a cyclic Jacobi eigensolver for
//! Hermitian matrices and a one-sided Jacobi routine for nullspaces and
//! singular values. Everything here is self-contained; no LAPACK.

use std::ops::{Index, IndexMut};

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{NumRangeError, Result};

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

/// Relative Frobenius tolerance on `A - A*` accepted by [`hermitian_eig`].
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Off-diagonal Frobenius mass, relative to `‖A‖_F`, at which Jacobi stops.
pub const JACOBI_TOL: f64 = 1e-14;
/// Full sweeps allowed before reporting non-convergence.
pub const JACOBI_MAX_SWEEPS: usize = 30;

/// Dense complex matrix in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_diag(diag: &[C64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &z) in diag.iter().enumerate() {
            m[(i, i)] = z;
        }
        m
    }

    /// Builds a matrix from row-major data, rejecting non-finite entries.
    pub fn new(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(NumRangeError::InvalidMatrix("empty matrix".into()));
        }
        if data.len() != rows * cols {
            return Err(NumRangeError::DimensionMismatch {
                expected: rows * cols,
                got: data.len(),
            });
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(NumRangeError::InvalidMatrix("non-finite entry".into()));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn square(n: usize, data: Vec<C64>) -> Result<Self> {
        Self::new(n, n, data)
    }

    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(NumRangeError::InvalidMatrix("ragged rows".into()));
        }
        Self::new(r, c, rows.concat())
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_columns(columns: &[&[C64]]) -> Self {
        let rows = columns.first().map_or(0, |c| c.len());
        let mut m = Self::zeros(rows, columns.len());
        for (j, col) in columns.iter().enumerate() {
            for (i, &z) in col.iter().enumerate() {
                m[(i, j)] = z;
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Dimension of a square matrix.
    pub fn n(&self) -> usize {
        debug_assert!(self.is_square());
        self.rows
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn adjoint(&self) -> Self {
        let mut m = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m[(j, i)] = self[(i, j)].conj();
            }
        }
        m
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| z * s).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    /// `A + shift·I` for square `A`.
    pub fn shifted(&self, shift: C64) -> Self {
        let mut m = self.clone();
        for i in 0..self.rows.min(self.cols) {
            m[(i, i)] += shift;
        }
        m
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "inner dimensions differ");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == ZERO {
                    continue;
                }
                let row = &other.data[k * other.cols..(k + 1) * other.cols];
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, &b) in dst.iter_mut().zip(row) {
                    *d += a * b;
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, x: &[C64]) -> Vec<C64> {
        assert_eq!(self.cols, x.len());
        self.data
            .chunks_exact(self.cols)
            .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `A* x` without forming the adjoint.
    pub fn adjoint_mul_vec(&self, x: &[C64]) -> Vec<C64> {
        assert_eq!(self.rows, x.len());
        let mut out = vec![ZERO; self.cols];
        for (row, &xi) in self.data.chunks_exact(self.cols).zip(x) {
            for (o, a) in out.iter_mut().zip(row) {
                *o += a.conj() * xi;
            }
        }
        out
    }

    /// Rayleigh value `<A x, x>`.
    pub fn quadratic_form(&self, x: &[C64]) -> C64 {
        inner(&self.mul_vec(x), x)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Spectral norm (largest singular value).
    pub fn op_norm(&self) -> Result<f64> {
        Ok(singular_values(self)?.into_iter().fold(0.0, f64::max))
    }

    pub fn hermitian_part(&self) -> Self {
        self.add(&self.adjoint()).scale(C64::new(0.5, 0.0))
    }

    /// `(e^{-iθ} A + e^{iθ} A*) / 2`, whose top eigenvalue is the support
    /// function of the numerical range in direction θ.
    pub fn rotated_hermitian_part(&self, theta: f64) -> Self {
        let phase = C64::from_polar(1.0, -theta);
        let n = self.rows;
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let v = phase * self[(i, j)] + (phase * self[(j, i)]).conj();
                m[(i, j)] = v * 0.5;
            }
            m[(i, i)].im = 0.0;
        }
        m
    }

    /// Relative Frobenius deviation from Hermitian symmetry.
    pub fn hermitian_deviation(&self) -> f64 {
        let norm = self.frobenius_norm();
        if norm == 0.0 {
            return 0.0;
        }
        self.sub(&self.adjoint()).frobenius_norm() / norm
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Block-diagonal direct sum.
    pub fn direct_sum(blocks: &[ComplexMatrix]) -> Self {
        let n: usize = blocks.iter().map(|b| b.rows).sum();
        let m: usize = blocks.iter().map(|b| b.cols).sum();
        let mut out = Self::zeros(n, m);
        let (mut r0, mut c0) = (0, 0);
        for b in blocks {
            for i in 0..b.rows {
                for j in 0..b.cols {
                    out[(r0 + i, c0 + j)] = b[(i, j)];
                }
            }
            r0 += b.rows;
            c0 += b.cols;
        }
        out
    }

    /// Stacks matrices with equal column counts on top of each other.
    pub fn vstack(blocks: &[ComplexMatrix]) -> Self {
        let cols = blocks[0].cols;
        assert!(blocks.iter().all(|b| b.cols == cols));
        let rows = blocks.iter().map(|b| b.rows).sum();
        let data = blocks.iter().flat_map(|b| b.data.iter().copied()).collect();
        Self { rows, cols, data }
    }

    /// `Q* A Q` for a matrix `Q` with orthonormal columns.
    pub fn compress(&self, q: &ComplexMatrix) -> Self {
        q.adjoint().matmul(&self.matmul(q))
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.cols + j]
    }
}

/// `<x, y> = Σ x_i conj(y_i)`, linear in the first slot.
pub fn inner(x: &[C64], y: &[C64]) -> C64 {
    x.iter().zip(y).map(|(a, b)| a * b.conj()).sum()
}

pub fn norm(x: &[C64]) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn axpy(alpha: C64, x: &[C64], y: &[C64]) -> Vec<C64> {
    x.iter().zip(y).map(|(a, b)| alpha * a + b).collect()
}

/// Vector of Euclidean norm one.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitVector {
    coords: Vec<C64>,
}

impl UnitVector {
    /// Normalizes `coords`; `None` for the zero vector or non-finite input.
    pub fn normalize(coords: Vec<C64>) -> Option<Self> {
        let r = norm(&coords);
        if r == 0.0 || !r.is_finite() {
            return None;
        }
        let mut coords: Vec<C64> = coords.into_iter().map(|z| z / r).collect();
        // one more pass pulls the norm to within a few ulps of 1
        let r2 = norm(&coords);
        coords.iter_mut().for_each(|z| *z /= r2);
        Some(Self { coords })
    }

    pub fn basis(n: usize, i: usize) -> Self {
        let mut coords = vec![ZERO; n];
        coords[i] = ONE;
        Self { coords }
    }

    pub fn dimension(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[C64] {
        &self.coords
    }

    pub fn into_coords(self) -> Vec<C64> {
        self.coords
    }
}

impl AsRef<[C64]> for UnitVector {
    fn as_ref(&self) -> &[C64] {
        &self.coords
    }
}

/// Eigenpairs of a Hermitian matrix; eigenvalues ascending, eigenvectors as
/// the columns of `eigenvectors`.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: ComplexMatrix,
}

impl EigenDecomposition {
    pub fn vector(&self, j: usize) -> Vec<C64> {
        self.eigenvectors.column(j)
    }

    pub fn max_eigenvalue(&self) -> f64 {
        *self.eigenvalues.last().expect("non-empty decomposition")
    }

    /// `V Λ V*`.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let v = &self.eigenvectors;
        let n = v.rows();
        let mut scaled = v.clone();
        for i in 0..n {
            for j in 0..n {
                scaled[(i, j)] *= self.eigenvalues[j];
            }
        }
        scaled.matmul(&v.adjoint())
    }
}

/// Unitary 2×2 rotation `U = [[c, s], [-s·e, c·e]]` with `e = e^{-iφ}` that
/// diagonalizes the Hermitian block `[[app, apq], [conj(apq), aqq]]` via
/// `U* B U`.
#[derive(Debug, Clone, Copy)]
struct Rotation {
    pp: C64,
    pq: C64,
    qp: C64,
    qq: C64,
}

impl Rotation {
    fn annihilating(app: f64, aqq: f64, apq: C64) -> Self {
        let g = apq.norm();
        let phase = C64::from_polar(1.0, -apq.arg());
        let tau = (aqq - app) / (2.0 * g);
        let t = if tau == 0.0 {
            1.0
        } else {
            tau.signum() / (tau.abs() + tau.hypot(1.0))
        };
        let c = 1.0 / t.hypot(1.0);
        let s = t * c;
        Self {
            pp: C64::new(c, 0.0),
            pq: C64::new(s, 0.0),
            qp: phase * -s,
            qq: phase * c,
        }
    }

    /// Right-multiplies columns `p`, `q` of `m` by the rotation.
    fn apply_columns(&self, m: &mut ComplexMatrix, p: usize, q: usize) {
        for k in 0..m.rows {
            let a = m[(k, p)];
            let b = m[(k, q)];
            m[(k, p)] = a * self.pp + b * self.qp;
            m[(k, q)] = a * self.pq + b * self.qq;
        }
    }

    /// Left-multiplies rows `p`, `q` of `m` by the adjoint rotation.
    fn apply_rows_adjoint(&self, m: &mut ComplexMatrix, p: usize, q: usize) {
        for k in 0..m.cols {
            let a = m[(p, k)];
            let b = m[(q, k)];
            m[(p, k)] = self.pp.conj() * a + self.qp.conj() * b;
            m[(q, k)] = self.pq.conj() * a + self.qq.conj() * b;
        }
    }
}

fn off_diagonal_norm(a: &ComplexMatrix) -> f64 {
    let n = a.rows;
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[(i, j)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// Eigendecomposition of a Hermitian matrix by cyclic complex Jacobi
/// rotations.
pub fn hermitian_eig(a: &ComplexMatrix) -> Result<EigenDecomposition> {
    if !a.is_square() {
        return Err(NumRangeError::DimensionMismatch {
            expected: a.rows,
            got: a.cols,
        });
    }
    let deviation = a.hermitian_deviation();
    if deviation > HERMITIAN_TOL {
        return Err(NumRangeError::NonHermitianInput { deviation });
    }
    let n = a.rows;
    let mut work = a.hermitian_part();
    for i in 0..n {
        work[(i, i)].im = 0.0;
    }
    let mut v = ComplexMatrix::identity(n);
    let target = JACOBI_TOL * work.frobenius_norm();

    let mut sweeps = 0;
    loop {
        let off = off_diagonal_norm(&work);
        if off <= target {
            break;
        }
        if sweeps == JACOBI_MAX_SWEEPS {
            return Err(NumRangeError::NonConvergence { sweeps, residual: off });
        }
        sweeps += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = work[(p, q)];
                if apq == ZERO {
                    continue;
                }
                let rot = Rotation::annihilating(work[(p, p)].re, work[(q, q)].re, apq);
                rot.apply_columns(&mut work, p, q);
                rot.apply_rows_adjoint(&mut work, p, q);
                work[(p, q)] = ZERO;
                work[(q, p)] = ZERO;
                work[(p, p)].im = 0.0;
                work[(q, q)].im = 0.0;
                rot.apply_columns(&mut v, p, q);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| work[(i, i)].re.total_cmp(&work[(j, j)].re).then(i.cmp(&j)));
    let eigenvalues = order.iter().map(|&i| work[(i, i)].re).collect();
    let mut eigenvectors = ComplexMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        for k in 0..n {
            eigenvectors[(k, dst)] = v[(k, src)];
        }
    }
    Ok(EigenDecomposition {
        eigenvalues,
        eigenvectors,
    })
}

/// One-sided Jacobi orthogonalization of the columns of `s`.
///
/// Returns `(σ, V)` where the columns of `S V` are mutually orthogonal with
/// norms `σ`, i.e. the implicit eigenpairs of `S* S` (`σ²`, columns of `V`)
/// without ever forming the product.
fn one_sided_jacobi(s: &ComplexMatrix) -> Result<(Vec<f64>, ComplexMatrix)> {
    let n = s.cols;
    let mut w = s.clone();
    let mut v = ComplexMatrix::identity(n);
    let eps = f64::EPSILON;
    // columns this small are numerically zero; rotating them never settles
    let negligible = (eps * s.frobenius_norm()).powi(2);

    let mut sweeps = 0;
    loop {
        let mut rotated = false;
        let mut worst: f64 = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                let (mut alpha, mut beta, mut gamma) = (0.0, 0.0, ZERO);
                for k in 0..w.rows {
                    let a = w[(k, p)];
                    let b = w[(k, q)];
                    alpha += a.norm_sqr();
                    beta += b.norm_sqr();
                    gamma += a.conj() * b;
                }
                let g = gamma.norm();
                if g == 0.0 || alpha.min(beta) <= negligible || g <= eps * (alpha * beta).sqrt() {
                    continue;
                }
                worst = worst.max(g / (alpha * beta).sqrt());
                rotated = true;
                let rot = Rotation::annihilating(alpha, beta, gamma);
                rot.apply_columns(&mut w, p, q);
                rot.apply_columns(&mut v, p, q);
            }
        }
        if !rotated {
            break;
        }
        sweeps += 1;
        if sweeps > JACOBI_MAX_SWEEPS {
            return Err(NumRangeError::NonConvergence {
                sweeps: JACOBI_MAX_SWEEPS,
                residual: worst,
            });
        }
    }
    let sigma = (0..n).map(|j| norm(&w.column(j))).collect();
    Ok((sigma, v))
}

/// Singular values of `s` in no particular order.
pub fn singular_values(s: &ComplexMatrix) -> Result<Vec<f64>> {
    Ok(one_sided_jacobi(s)?.0)
}

/// Right singular pairs `(σ, v)` sorted by ascending `σ`.
pub fn right_singular_pairs(s: &ComplexMatrix) -> Result<Vec<(f64, UnitVector)>> {
    let (sigma, v) = one_sided_jacobi(s)?;
    let mut pairs: Vec<(f64, UnitVector)> = sigma
        .into_iter()
        .enumerate()
        .map(|(j, sg)| {
            let u = UnitVector::normalize(v.column(j)).expect("unitary column");
            (sg, u)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(pairs)
}

/// Orthonormal basis of `{x : ‖S x‖ ≤ tol·‖S‖·‖x‖}`.
pub fn nullspace(s: &ComplexMatrix, tol: f64) -> Result<Vec<UnitVector>> {
    assert!(tol > 0.0, "nullspace tolerance must be positive");
    let pairs = right_singular_pairs(s)?;
    let s_norm = pairs.last().map_or(0.0, |p| p.0);
    let cutoff = tol * s_norm;
    Ok(pairs
        .into_iter()
        .take_while(|(sg, _)| *sg <= cutoff)
        .map(|(_, u)| u)
        .collect())
}

/// Orthonormal basis of the orthogonal complement of `span(basis)` in `C^n`.
pub fn orthogonal_complement(basis: &[UnitVector], n: usize) -> Result<Vec<UnitVector>> {
    if basis.is_empty() {
        return Ok((0..n).map(|i| UnitVector::basis(n, i)).collect());
    }
    let cols: Vec<&[C64]> = basis.iter().map(|u| u.coords()).collect();
    let q = ComplexMatrix::from_columns(&cols);
    nullspace(&q.adjoint(), 1e-8)
}

/// Seeded random unit vector: a normalized standard complex Gaussian.
pub fn random_unit_vector(n: usize, seed: u64) -> UnitVector {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    gaussian_unit_vector(n, &mut rng)
}

/// `count` unit vectors drawn from a single seeded stream.
pub fn random_unit_vectors(n: usize, count: usize, seed: u64) -> Vec<UnitVector> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| gaussian_unit_vector(n, &mut rng)).collect()
}

pub(crate) fn gaussian_unit_vector(n: usize, rng: &mut ChaCha8Rng) -> UnitVector {
    assert!(n >= 1);
    loop {
        let coords: Vec<C64> = (0..n).map(|_| gaussian(rng)).collect();
        if let Some(u) = UnitVector::normalize(coords) {
            return u;
        }
    }
}

pub(crate) fn gaussian(rng: &mut ChaCha8Rng) -> C64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    C64::new(re, im)
}

/// Seeded matrix with i.i.d. standard complex Gaussian entries.
pub fn random_matrix(n: usize, seed: u64) -> ComplexMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data = (0..n * n).map(|_| gaussian(&mut rng)).collect();
    ComplexMatrix { rows: n, cols: n, data }
}

/// Seeded Haar-like unitary from Gram–Schmidt on Gaussian columns.
pub fn random_unitary(n: usize, seed: u64) -> ComplexMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cols: Vec<Vec<C64>> = Vec::with_capacity(n);
    while cols.len() < n {
        let mut x: Vec<C64> = (0..n).map(|_| gaussian(&mut rng)).collect();
        for _ in 0..2 {
            for c in &cols {
                let h = inner(&x, c);
                x = axpy(-h, c, &x);
            }
        }
        if let Some(u) = UnitVector::normalize(x) {
            cols.push(u.into_coords());
        }
    }
    let refs: Vec<&[C64]> = cols.iter().map(Vec::as_slice).collect();
    ComplexMatrix::from_columns(&refs)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn real(rows: &[&[f64]]) -> ComplexMatrix {
        let rows: Vec<Vec<C64>> = rows.iter().map(|r| r.iter().map(|&x| c(x, 0.0)).collect()).collect();
        ComplexMatrix::from_rows(&rows).unwrap()
    }

    #[test]
    fn identity_eigenvalues() {
        let e = hermitian_eig(&ComplexMatrix::identity(3)).unwrap();
        assert_eq!(e.eigenvalues, vec![1.0, 1.0, 1.0]);
        let v = &e.eigenvectors;
        let g = v.adjoint().matmul(v).sub(&ComplexMatrix::identity(3));
        assert!(g.frobenius_norm() < 1e-15);
    }

    #[test]
    fn swap_matrix_eigenvalues() {
        let e = hermitian_eig(&real(&[&[0.0, 1.0], &[1.0, 0.0]])).unwrap();
        assert!((e.eigenvalues[0] + 1.0).abs() < 1e-15);
        assert!((e.eigenvalues[1] - 1.0).abs() < 1e-15);
    }

    /// Characteristic polynomial of the symmetric tridiagonal matrix with zero
    /// diagonal and off-diagonal `b`, via the three-term recurrence.
    fn tridiag_charpoly(x: f64, n: usize, b: f64) -> f64 {
        let (mut p0, mut p1) = (1.0, x);
        for _ in 1..n {
            let p2 = x * p1 - b * b * p0;
            p0 = p1;
            p1 = p2;
        }
        p1
    }

    #[test]
    fn half_tridiagonal_spectrum_matches_charpoly_roots() {
        let n = 5;
        let mut a = ComplexMatrix::zeros(n, n);
        for i in 0..n - 1 {
            a[(i, i + 1)] = c(0.5, 0.0);
            a[(i + 1, i)] = c(0.5, 0.0);
        }
        // roots bracketed by a fine sign scan of the characteristic polynomial
        let mut roots = Vec::new();
        let grid = 200_000;
        let mut prev = tridiag_charpoly(-1.0, n, 0.5);
        for k in 1..=grid {
            let x = -1.0 + 2.0 * k as f64 / grid as f64;
            let cur = tridiag_charpoly(x, n, 0.5);
            if cur == 0.0 || (prev != 0.0 && prev.signum() != cur.signum()) {
                let (mut lo, mut hi) = (x - 2.0 / grid as f64, x);
                for _ in 0..80 {
                    let mid = 0.5 * (lo + hi);
                    let fl = tridiag_charpoly(lo, n, 0.5);
                    if fl.signum() == tridiag_charpoly(mid, n, 0.5).signum() {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                roots.push(0.5 * (lo + hi));
            }
            prev = cur;
        }
        assert_eq!(roots.len(), 5);
        let e = hermitian_eig(&a).unwrap();
        for (got, want) in e.eigenvalues.iter().zip(&roots) {
            assert!((got - want).abs() < 1e-12, "{got} vs {want}");
        }
        assert!((e.max_eigenvalue() - 0.866_025_403_784_438_6).abs() < 1e-12);
    }

    #[test]
    fn complex_hermitian_reconstruction() {
        let b = random_matrix(7, 3);
        let h = b.hermitian_part();
        let e = hermitian_eig(&h).unwrap();
        let err = e.reconstruct().sub(&h).frobenius_norm();
        assert!(err <= 1e-12 * h.frobenius_norm(), "{err}");
        assert!(e.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn rejects_non_hermitian() {
        let a = real(&[&[0.0, 1.0], &[0.0, 0.0]]);
        assert!(matches!(
            hermitian_eig(&a),
            Err(NumRangeError::NonHermitianInput { .. })
        ));
    }

    #[test]
    fn one_by_one_is_legal() {
        let e = hermitian_eig(&ComplexMatrix::from_diag(&[c(-2.5, 0.0)])).unwrap();
        assert_eq!(e.eigenvalues, vec![-2.5]);
    }

    #[test]
    fn deterministic_decomposition() {
        let h = random_matrix(9, 11).hermitian_part();
        let a = hermitian_eig(&h).unwrap();
        let b = hermitian_eig(&h).unwrap();
        assert_eq!(a.eigenvalues, b.eigenvalues);
        assert_eq!(a.eigenvectors, b.eigenvectors);
    }

    #[test]
    fn nullspace_examples() {
        assert_eq!(nullspace(&ComplexMatrix::zeros(2, 2), 1e-10).unwrap().len(), 2);
        assert!(nullspace(&ComplexMatrix::identity(3), 1e-10).unwrap().is_empty());
        let ns = nullspace(&real(&[&[1.0, 0.0], &[0.0, 0.0]]), 1e-10).unwrap();
        assert_eq!(ns.len(), 1);
        assert!((ns[0].coords()[1].norm() - 1.0).abs() < 1e-15);
        assert!(ns[0].coords()[0].norm() < 1e-15);
    }

    #[test]
    fn nullspace_of_rank_deficient_product() {
        // rank-3 6×5 matrix: nullspace has dimension 2
        let a = random_matrix(6, 1);
        let mut left = ComplexMatrix::zeros(6, 3);
        let mut right = ComplexMatrix::zeros(3, 5);
        for i in 0..6 {
            for j in 0..3 {
                left[(i, j)] = a[(i, j)];
            }
        }
        for i in 0..3 {
            for j in 0..5 {
                right[(i, j)] = a[(i + 3, j)];
            }
        }
        let s = left.matmul(&right);
        let ns = nullspace(&s, 1e-10).unwrap();
        assert_eq!(ns.len(), 2);
        let s_norm = s.op_norm().unwrap();
        for v in &ns {
            assert!(norm(&s.mul_vec(v.coords())) <= 2e-10 * s_norm);
        }
        assert!(inner(ns[0].coords(), ns[1].coords()).norm() < 1e-12);
    }

    #[test]
    fn random_unit_vector_properties() {
        let u = random_unit_vector(1, 42);
        assert!((u.coords()[0].norm() - 1.0).abs() < 1e-15);
        assert_eq!(random_unit_vector(4, 7), random_unit_vector(4, 7));
        assert!((norm(random_unit_vector(33, 5).coords()) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn random_unit_vector_mean_is_small() {
        let mut mean = vec![ZERO; 16];
        for seed in 0..1000 {
            for (m, z) in mean.iter_mut().zip(random_unit_vector(16, seed).coords()) {
                *m += z / 1000.0;
            }
        }
        assert!(norm(&mean) < 0.15, "{}", norm(&mean));
    }

    #[test]
    fn unitary_is_unitary() {
        let u = random_unitary(6, 9);
        let g = u.adjoint().matmul(&u).sub(&ComplexMatrix::identity(6));
        assert!(g.frobenius_norm() < 1e-13);
    }

    #[test]
    fn op_norm_of_jordan_block() {
        let mut j = ComplexMatrix::zeros(3, 3);
        j[(0, 1)] = ONE;
        j[(1, 2)] = ONE;
        assert!((j.op_norm().unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn complement_of_generic_subspace() {
        for seed in 0..40 {
            let n = 2 + (seed as usize % 6);
            let k = 1 + (seed as usize % (n - 1));
            let u = random_unitary(n, seed);
            let basis: Vec<UnitVector> = (0..k).map(|j| UnitVector::normalize(u.column(j)).unwrap()).collect();
            let comp = orthogonal_complement(&basis, n).unwrap();
            assert_eq!(comp.len(), n - k);
            for a in &comp {
                for b in &basis {
                    assert!(inner(a.coords(), b.coords()).norm() < 1e-12);
                }
            }
        }
    }
}
