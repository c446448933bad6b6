//! Dense complex linear algebra.
//!
//! [`ComplexMatrix`] stores its entries column-major, so [`vec`] is a plain
//! reinterpretation of the buffer and [`unvec`] its exact inverse. The heavy
//! factorizations (Hermitian eigendecomposition, SVD, Cholesky and the general
//! eigenproblem) are delegated to `faer`. A cyclic Jacobi eigensolver lives in
//! [`hermitian_eig_jacobi`] and serves as an independent reference.

mod jacobi;
mod real;

use std::fmt;
use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub, SubAssign};

use faer::{MatRef, Side};
pub use num_complex::Complex64;

use crate::error::{Error, Result};

pub use jacobi::hermitian_eig_jacobi;
pub use real::{nnls_gram, solve_spd};

/// Shorthand for the scalar type used everywhere in the crate.
pub type C64 = Complex64;

/// Default relative singular-value cutoff for [`pseudo_inverse`].
pub const DEFAULT_RCOND: f64 = 1e-8;

/// Relative tolerance used when checking that an input is Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-12;

#[cfg(test)]
pub(crate) fn c64(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Dense complex matrix, column-major.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![C64::new(0.0, 0.0); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for j in 0..cols {
            for i in 0..rows {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Wraps a column-major buffer.
    pub fn from_column_major(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "buffer of {} entries cannot hold a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from row slices; all rows must have equal length.
    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::Dimension("ragged rows".into()));
        }
        Ok(Self::from_fn(r, c, |i, j| rows[i][j]))
    }

    pub fn column_vector(entries: Vec<C64>) -> Self {
        let n = entries.len();
        Self { rows: n, cols: 1, data: entries }
    }

    pub fn diag_real(d: &[f64]) -> Self {
        let mut m = Self::zeros(d.len(), d.len());
        for (i, &v) in d.iter().enumerate() {
            m[(i, i)] = C64::new(v, 0.0);
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Column-major entries.
    #[inline]
    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    #[inline]
    pub fn as_mut_slice(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<C64> {
        self.data
    }

    pub fn column(&self, j: usize) -> &[C64] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub(crate) fn as_faer(&self) -> MatRef<'_, C64> {
        MatRef::from_column_major_slice(&self.data, self.rows, self.cols)
    }

    pub(crate) fn from_faer(m: MatRef<'_, C64>) -> Self {
        Self::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn conj(&self) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z.conj()).collect() }
    }

    pub fn map(&self, f: impl Fn(C64) -> C64) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&z| f(z)).collect() }
    }

    pub fn scale(&self, alpha: C64) -> Self {
        self.map(|z| z * alpha)
    }

    pub fn scale_real(&self, alpha: f64) -> Self {
        self.map(|z| z * alpha)
    }

    pub fn frobenius_norm_sqr(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.frobenius_norm_sqr().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    /// `tr(self^H other)`; the real part is the real inner product used by the
    /// conic solvers.
    pub fn inner(&self, other: &Self) -> C64 {
        assert_eq!(self.shape(), other.shape(), "inner product of mismatched shapes");
        self.data.iter().zip(&other.data).map(|(a, b)| a.conj() * b).sum()
    }

    /// Largest relative deviation from Hermitian symmetry.
    pub fn hermitian_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let scale = self.max_abs().max(f64::MIN_POSITIVE);
        let mut worst: f64 = 0.0;
        for j in 0..self.cols {
            for i in 0..=j {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst / scale
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermitian_defect() <= tol
    }

    /// `(A + A^H) / 2`.
    pub fn hermitian_part(&self) -> Self {
        assert!(self.is_square(), "hermitian part of a non-square matrix");
        Self::from_fn(self.rows, self.cols, |i, j| (self[(i, j)] + self[(j, i)].conj()) * 0.5)
    }

    pub fn submatrix(&self, r0: usize, c0: usize, nr: usize, nc: usize) -> Self {
        assert!(r0 + nr <= self.rows && c0 + nc <= self.cols, "submatrix out of bounds");
        Self::from_fn(nr, nc, |i, j| self[(r0 + i, c0 + j)])
    }

    pub fn set_block(&mut self, r0: usize, c0: usize, block: &Self) {
        assert!(r0 + block.rows <= self.rows && c0 + block.cols <= self.cols, "block out of bounds");
        for j in 0..block.cols {
            for i in 0..block.rows {
                self[(r0 + i, c0 + j)] = block[(i, j)];
            }
        }
    }

    /// Selects the given rows, in order.
    pub fn select_rows(&self, idx: &[usize]) -> Self {
        Self::from_fn(idx.len(), self.cols, |i, j| self[(idx[i], j)])
    }

    pub fn select_cols(&self, idx: &[usize]) -> Self {
        Self::from_fn(self.rows, idx.len(), |i, j| self[(i, idx[j])])
    }

    /// Matrix product. Panics on mismatched inner dimensions.
    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(
            self.cols, rhs.rows,
            "matmul of {}x{} by {}x{}",
            self.rows, self.cols, rhs.rows, rhs.cols
        );
        if self.rows * self.cols * rhs.cols <= 4096 {
            let mut out = Self::zeros(self.rows, rhs.cols);
            for j in 0..rhs.cols {
                for k in 0..self.cols {
                    let b = rhs[(k, j)];
                    if b == C64::new(0.0, 0.0) {
                        continue;
                    }
                    let col = &self.data[k * self.rows..(k + 1) * self.rows];
                    let dst = &mut out.data[j * self.rows..(j + 1) * self.rows];
                    for (d, a) in dst.iter_mut().zip(col) {
                        *d += a * b;
                    }
                }
            }
            out
        } else {
            let prod = self.as_faer() * rhs.as_faer();
            Self::from_faer(prod.as_ref())
        }
    }

    /// `self^H * rhs` without materializing the adjoint.
    pub fn adjoint_matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.rows, rhs.rows, "adjoint_matmul row mismatch");
        let prod = self.as_faer().adjoint() * rhs.as_faer();
        Self::from_faer(prod.as_ref())
    }

    /// `self * rhs^H`.
    pub fn matmul_adjoint(&self, rhs: &Self) -> Self {
        assert_eq!(self.cols, rhs.cols, "matmul_adjoint column mismatch");
        let prod = self.as_faer() * rhs.as_faer().adjoint();
        Self::from_faer(prod.as_ref())
    }

    pub fn matvec(&self, x: &[C64]) -> Vec<C64> {
        assert_eq!(self.cols, x.len(), "matvec length mismatch");
        let mut y = vec![C64::new(0.0, 0.0); self.rows];
        for (j, &xj) in x.iter().enumerate() {
            for (yi, a) in y.iter_mut().zip(self.column(j)) {
                *yi += a * xj;
            }
        }
        y
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i + j * self.rows]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i + j * self.rows]
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                let z = self[(i, j)];
                write!(f, "{:+.4}{:+.4}j ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

macro_rules! elementwise {
    ($trait:ident, $method:ident, $op:tt) => {
        impl $trait<&ComplexMatrix> for &ComplexMatrix {
            type Output = ComplexMatrix;
            fn $method(self, rhs: &ComplexMatrix) -> ComplexMatrix {
                assert_eq!(self.shape(), rhs.shape(), "elementwise op on mismatched shapes");
                ComplexMatrix {
                    rows: self.rows,
                    cols: self.cols,
                    data: self.data.iter().zip(&rhs.data).map(|(a, b)| a $op b).collect(),
                }
            }
        }
        impl $trait<ComplexMatrix> for ComplexMatrix {
            type Output = ComplexMatrix;
            fn $method(self, rhs: ComplexMatrix) -> ComplexMatrix {
                (&self).$method(&rhs)
            }
        }
    };
}

elementwise!(Add, add, +);
elementwise!(Sub, sub, -);

impl AddAssign<&ComplexMatrix> for ComplexMatrix {
    fn add_assign(&mut self, rhs: &ComplexMatrix) {
        assert_eq!(self.shape(), rhs.shape());
        for (a, b) in self.data.iter_mut().zip(&rhs.data) {
            *a += b;
        }
    }
}

impl SubAssign<&ComplexMatrix> for ComplexMatrix {
    fn sub_assign(&mut self, rhs: &ComplexMatrix) {
        assert_eq!(self.shape(), rhs.shape());
        for (a, b) in self.data.iter_mut().zip(&rhs.data) {
            *a -= b;
        }
    }
}

impl Mul<&ComplexMatrix> for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs)
    }
}

impl Mul<ComplexMatrix> for ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: ComplexMatrix) -> ComplexMatrix {
        self.matmul(&rhs)
    }
}

impl Neg for ComplexMatrix {
    type Output = ComplexMatrix;
    fn neg(self) -> ComplexMatrix {
        self.map(|z| -z)
    }
}

/// Spectral decomposition of a Hermitian matrix.
#[derive(Clone, Debug)]
pub struct EigenDecomposition {
    /// Real eigenvalues, sorted descending.
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors, column `k` pairs with `values[k]`.
    pub vectors: ComplexMatrix,
}

impl EigenDecomposition {
    /// `V diag(values) V^H`.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let scaled = ComplexMatrix::from_fn(self.vectors.rows(), self.vectors.cols(), |i, j| {
            self.vectors[(i, j)] * self.values[j]
        });
        scaled.matmul_adjoint(&self.vectors)
    }

    pub fn max(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    pub fn min(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }

    /// Number of eigenvalues above `rel_tol * max(λ_max, 0)`.
    pub fn numerical_rank(&self, rel_tol: f64) -> usize {
        let top = self.max();
        if top <= 0.0 {
            return 0;
        }
        self.values.iter().filter(|&&v| v > rel_tol * top).count()
    }
}

fn check_hermitian(a: &ComplexMatrix) -> Result<()> {
    if !a.is_square() {
        return Err(Error::Dimension(format!(
            "expected a square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    let defect = a.hermitian_defect();
    if defect > HERMITIAN_TOL {
        return Err(Error::NotHermitian(defect));
    }
    Ok(())
}

/// Full eigendecomposition of a Hermitian matrix, eigenvalues descending.
pub fn hermitian_eig(a: &ComplexMatrix) -> Result<EigenDecomposition> {
    check_hermitian(a)?;
    hermitian_eig_unchecked(a)
}

/// As [`hermitian_eig`] but trusts the caller that `a` is Hermitian; only the
/// lower triangle is read.
pub(crate) fn hermitian_eig_unchecked(a: &ComplexMatrix) -> Result<EigenDecomposition> {
    let n = a.rows();
    if n == 0 {
        return Ok(EigenDecomposition { values: vec![], vectors: ComplexMatrix::zeros(0, 0) });
    }
    let evd = a
        .as_faer()
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Numerical(format!("Hermitian eigensolver: {e:?}")))?;
    let s = evd.S().column_vector();
    let u = evd.U();
    // faer sorts ascending
    let values: Vec<f64> = (0..n).rev().map(|k| s[k].re).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |i, j| u[(i, n - 1 - j)]);
    Ok(EigenDecomposition { values, vectors })
}

/// Eigenvalues only, descending.
pub fn hermitian_eigenvalues(a: &ComplexMatrix) -> Result<Vec<f64>> {
    check_hermitian(a)?;
    let mut vals = a
        .as_faer()
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::Numerical(format!("Hermitian eigensolver: {e:?}")))?;
    vals.reverse();
    Ok(vals)
}

/// Thin singular value decomposition `A = U diag(s) V^H`.
#[derive(Clone, Debug)]
pub struct Svd {
    pub u: ComplexMatrix,
    /// Singular values, descending.
    pub s: Vec<f64>,
    pub v: ComplexMatrix,
}

pub fn svd(a: &ComplexMatrix) -> Result<Svd> {
    let k = a.rows().min(a.cols());
    if k == 0 {
        return Ok(Svd {
            u: ComplexMatrix::zeros(a.rows(), 0),
            s: vec![],
            v: ComplexMatrix::zeros(a.cols(), 0),
        });
    }
    let dec = a.as_faer().thin_svd().map_err(|e| Error::Numerical(format!("SVD: {e:?}")))?;
    let s = dec.S().column_vector();
    Ok(Svd {
        u: ComplexMatrix::from_faer(dec.U()),
        s: (0..k).map(|i| s[i].re).collect(),
        v: ComplexMatrix::from_faer(dec.V()),
    })
}

/// Moore–Penrose pseudo-inverse; singular values below `rcond * σ_max` are
/// treated as zero.
pub fn pseudo_inverse(a: &ComplexMatrix, rcond: f64) -> Result<ComplexMatrix> {
    if a.max_abs() == 0.0 {
        return Ok(ComplexMatrix::zeros(a.cols(), a.rows()));
    }
    let dec = svd(a)?;
    let cutoff = rcond * dec.s[0];
    let v_scaled = ComplexMatrix::from_fn(dec.v.rows(), dec.v.cols(), |i, j| {
        let s = dec.s[j];
        if s > cutoff {
            dec.v[(i, j)] / s
        } else {
            C64::new(0.0, 0.0)
        }
    });
    Ok(v_scaled.matmul_adjoint(&dec.u))
}

/// Numerical rank from singular values above `rel_tol * σ_max`.
pub fn rank(a: &ComplexMatrix, rel_tol: f64) -> Result<usize> {
    let dec = svd(a)?;
    let top = dec.s.first().copied().unwrap_or(0.0);
    if top == 0.0 {
        return Ok(0);
    }
    Ok(dec.s.iter().filter(|&&s| s > rel_tol * top).count())
}

/// Lower Cholesky factor `L` with `A = L L^H` of a Hermitian positive definite
/// matrix (only the lower triangle of `a` is read).
pub fn cholesky(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !a.is_square() {
        return Err(Error::Dimension("cholesky of a non-square matrix".into()));
    }
    let llt = a
        .as_faer()
        .llt(Side::Lower)
        .map_err(|e| Error::Numerical(format!("matrix not positive definite: {e:?}")))?;
    Ok(ComplexMatrix::from_faer(llt.L()))
}

/// Eigenvalues and eigenvectors of a general square matrix (unordered).
pub fn eig_general(a: &ComplexMatrix) -> Result<(Vec<C64>, ComplexMatrix)> {
    if !a.is_square() {
        return Err(Error::Dimension("eigenproblem of a non-square matrix".into()));
    }
    if a.rows() == 0 {
        return Ok((vec![], ComplexMatrix::zeros(0, 0)));
    }
    let dec = a.as_faer().eigen().map_err(|e| Error::Numerical(format!("eigensolver: {e:?}")))?;
    let s = dec.S().column_vector();
    let values = (0..a.rows()).map(|i| s[i]).collect();
    Ok((values, ComplexMatrix::from_faer(dec.U())))
}

/// Solves `A X = B` for square `A` through the pseudo-inverse-free LU path.
pub fn solve(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    use faer::linalg::solvers::Solve;
    if !a.is_square() || a.rows() != b.rows() {
        return Err(Error::Dimension("solve: incompatible shapes".into()));
    }
    let lu = a.as_faer().partial_piv_lu();
    let x = lu.solve(b.as_faer());
    let out = ComplexMatrix::from_faer(x.as_ref());
    if out.as_slice().iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Numerical("singular system".into()));
    }
    Ok(out)
}

/// Kronecker product, dimensions `(ra*rb, ca*cb)`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (rb, cb) = b.shape();
    ComplexMatrix::from_fn(a.rows() * rb, a.cols() * cb, |i, j| {
        a[(i / rb, j / cb)] * b[(i % rb, j % cb)]
    })
}

/// Column stacking into an `(rows*cols) x 1` vector.
pub fn vec(a: &ComplexMatrix) -> ComplexMatrix {
    ComplexMatrix::column_vector(a.as_slice().to_vec())
}

/// Inverse of [`vec`].
pub fn unvec(v: &ComplexMatrix, rows: usize, cols: usize) -> Result<ComplexMatrix> {
    if v.cols() != 1 {
        return Err(Error::Dimension("unvec expects a column vector".into()));
    }
    ComplexMatrix::from_column_major(rows, cols, v.as_slice().to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn steering(n: usize, f: f64) -> ComplexMatrix {
        ComplexMatrix::from_fn(n, 1, |k, _| C64::from_polar(1.0, 2.0 * PI * f * k as f64))
    }

    fn lcg_matrix(rows: usize, cols: usize, seed: u64) -> ComplexMatrix {
        let mut s = seed;
        let mut next = move || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        ComplexMatrix::from_fn(rows, cols, |_, _| c64(next(), next()))
    }

    #[test]
    fn eig_of_identity() {
        let e = hermitian_eig(&ComplexMatrix::identity(3)).unwrap();
        for v in e.values {
            assert!((v - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn eig_of_diagonal() {
        let a = ComplexMatrix::diag_real(&[2.0, -1.0]);
        let e = hermitian_eig(&a).unwrap();
        assert!((e.values[0] - 2.0).abs() < 1e-14 && (e.values[1] + 1.0).abs() < 1e-14);
        assert!((e.vectors[(0, 0)].norm() - 1.0).abs() < 1e-14);
        assert!((e.vectors[(1, 1)].norm() - 1.0).abs() < 1e-14);
        assert!(e.vectors[(1, 0)].norm() < 1e-14);
    }

    #[test]
    fn eig_of_rank_one_outer_product() {
        let a = steering(4, 0.25);
        let outer = a.matmul_adjoint(&a);
        // direct multiplication: (a a^H) a = a (a^H a) = 4 a
        let av = outer.matmul(&a);
        for i in 0..4 {
            assert!((av[(i, 0)] - a[(i, 0)] * 4.0).norm() < 1e-12);
        }
        let e = hermitian_eig(&outer).unwrap();
        assert!((e.values[0] - 4.0).abs() < 1e-12);
        for &v in &e.values[1..] {
            assert!(v.abs() < 1e-12);
        }
    }

    #[test]
    fn eig_rejects_bad_input() {
        assert!(matches!(hermitian_eig(&ComplexMatrix::zeros(2, 3)), Err(Error::Dimension(_))));
        let mut a = ComplexMatrix::identity(2);
        a[(0, 1)] = c64(1.0, 0.0);
        assert!(matches!(hermitian_eig(&a), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn eig_reconstruction_and_orthonormality() {
        let b = lcg_matrix(7, 7, 3);
        let a = (&b + &b.adjoint()).scale_real(0.5);
        let e = hermitian_eig(&a).unwrap();
        let err = (&e.reconstruct() - &a).frobenius_norm() / a.frobenius_norm();
        assert!(err < 1e-9);
        let gram = e.vectors.adjoint_matmul(&e.vectors);
        assert!((&gram - &ComplexMatrix::identity(7)).max_abs() < 1e-10);
        assert!(e.values.windows(2).all(|w| w[0] >= w[1]));
        let tr: f64 = a.trace().re;
        let sum: f64 = e.values.iter().sum();
        assert!((tr - sum).abs() <= 1e-9 * tr.abs().max(1.0));
    }

    #[test]
    fn pinv_of_identity_and_column() {
        let p = pseudo_inverse(&ComplexMatrix::identity(2), DEFAULT_RCOND).unwrap();
        assert!((&p - &ComplexMatrix::identity(2)).max_abs() < 1e-14);
        let col = ComplexMatrix::column_vector(vec![c64(1.0, 0.0), c64(1.0, 0.0)]);
        let p = pseudo_inverse(&col, DEFAULT_RCOND).unwrap();
        assert_eq!(p.shape(), (1, 2));
        assert!((p[(0, 0)] - c64(0.5, 0.0)).norm() < 1e-14);
        assert!((p[(0, 1)] - c64(0.5, 0.0)).norm() < 1e-14);
        let z = pseudo_inverse(&ComplexMatrix::zeros(3, 2), DEFAULT_RCOND).unwrap();
        assert_eq!(z.shape(), (2, 3));
        assert_eq!(z.max_abs(), 0.0);
    }

    #[test]
    fn pinv_left_inverse_of_manifold() {
        let a = ComplexMatrix::from_fn(8, 2, |k, j| {
            let f = [0.1, 0.45][j];
            C64::from_polar(1.0, 2.0 * PI * f * k as f64)
        });
        let p = pseudo_inverse(&a, DEFAULT_RCOND).unwrap();
        let id = p.matmul(&a);
        assert!((&id - &ComplexMatrix::identity(2)).max_abs() < 1e-10);
    }

    #[test]
    fn kron_examples() {
        let i6 = kron(&ComplexMatrix::identity(2), &ComplexMatrix::identity(3));
        assert_eq!(i6, ComplexMatrix::identity(6));
        let a = ComplexMatrix::column_vector(vec![c64(1.0, 0.0), c64(2.0, 0.0)]);
        let b = ComplexMatrix::column_vector(vec![c64(1.0, 0.0), c64(-1.0, 0.0)]);
        let k = kron(&a, &b);
        let expect = [1.0, -1.0, 2.0, -2.0];
        for (i, e) in expect.iter().enumerate() {
            assert_eq!(k[(i, 0)], c64(*e, 0.0));
        }
    }

    #[test]
    fn kron_matches_vectorized_outer_product() {
        let (fx, fy) = (0.3, 0.7);
        let an = steering(4, fx);
        let am = steering(4, fy);
        let lhs = kron(&am.conj(), &an);
        let rhs = vec(&an.matmul_adjoint(&am));
        assert!((&lhs - &rhs).max_abs() < 1e-14);
    }

    #[test]
    fn vec_is_column_stacking() {
        let a = ComplexMatrix::from_rows(&[
            vec![c64(1.0, 0.0), c64(3.0, 0.0)],
            vec![c64(2.0, 0.0), c64(4.0, 0.0)],
        ])
        .unwrap();
        let v = vec(&a);
        for k in 0..4 {
            assert_eq!(v[(k, 0)], c64(k as f64 + 1.0, 0.0));
        }
        let x = lcg_matrix(5, 7, 11);
        assert_eq!(unvec(&vec(&x), 5, 7).unwrap(), x);
    }

    #[test]
    fn large_matmul_matches_naive() {
        let a = lcg_matrix(20, 30, 1);
        let b = lcg_matrix(30, 25, 2);
        let fast = a.matmul(&b);
        let naive = ComplexMatrix::from_fn(20, 25, |i, j| (0..30).map(|k| a[(i, k)] * b[(k, j)]).sum());
        assert!((&fast - &naive).max_abs() < 1e-12);
        assert!((&a.adjoint_matmul(&a) - &a.adjoint().matmul(&a)).max_abs() < 1e-12);
    }

    #[test]
    fn cholesky_and_solve() {
        let b = lcg_matrix(5, 5, 9);
        let a = &b.matmul_adjoint(&b) + &ComplexMatrix::identity(5);
        let l = cholesky(&a).unwrap();
        assert!((&l.matmul_adjoint(&l) - &a).max_abs() < 1e-12);
        let rhs = lcg_matrix(5, 2, 10);
        let x = solve(&a, &rhs).unwrap();
        assert!((&a.matmul(&x) - &rhs).max_abs() < 1e-10);
    }

    #[test]
    fn general_eigenvalues_of_phase_matrix() {
        let d = ComplexMatrix::from_fn(2, 2, |i, j| {
            if i == j {
                C64::from_polar(1.0, 2.0 * PI * [0.2, 0.7][i])
            } else {
                c64(0.0, 0.0)
            }
        });
        let t = lcg_matrix(2, 2, 4);
        let tinv = solve(&t, &ComplexMatrix::identity(2)).unwrap();
        let a = t.matmul(&d).matmul(&tinv);
        let (vals, _) = eig_general(&a).unwrap();
        let mut phases: Vec<f64> =
            vals.iter().map(|z| (z.arg() / (2.0 * PI)).rem_euclid(1.0)).collect();
        phases.sort_by(f64::total_cmp);
        assert!((phases[0] - 0.2).abs() < 1e-10 && (phases[1] - 0.7).abs() < 1e-10);
    }
}
