//! Hermitian Toeplitz structures and Vandermonde decomposition.
//!
//! A one-level Hermitian Toeplitz matrix is stored by its first row `u`
//! (`T[i,j] = u[j−i]` for `j ≥ i`). With this convention a single atom
//! `a(f) a(f)^H` has first row `u[k] = exp(−j2πfk)`.
//!
//! Two-level matrices act on column-major vectorized `N x M` data: the row
//! index `i + N·p` splits into an inner index `i < N` and an outer (block)
//! index `p < M`. The generator stores `g(k, l) = T[(i, p), (i + l, p + k)]`
//! for block offsets `k ≥ 0` and inner offsets `l ∈ (−N, N)`.
//!
//! Frequencies are recovered from the signal subspace with the matrix pencil
//! (shift-invariance) method and powers from a nonnegative least-squares fit.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::{
    eig_general, hermitian_eig, hermitian_eig_unchecked, nnls_gram, pseudo_inverse, ComplexMatrix,
    EigenDecomposition, C64, DEFAULT_RCOND,
};
use crate::model::{steering_entries, wrap_unit, FrequencyPair};

/// Default relative eigenvalue threshold separating signal from solver noise.
pub const DEFAULT_RANK_TOL: f64 = 1e-6;

/// One-level Hermitian Toeplitz matrix given by its first row.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianToeplitz {
    u: Vec<C64>,
}

impl HermitianToeplitz {
    /// Validates that `u[0]` is real (relative tolerance 1e-12) and clears its
    /// imaginary part.
    pub fn new(mut u: Vec<C64>) -> Result<Self> {
        if u.is_empty() {
            return Err(Error::Dimension("Toeplitz generator must be nonempty".into()));
        }
        let scale = u.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if u[0].im.abs() > 1e-12 * scale.max(f64::MIN_POSITIVE) {
            return Err(Error::NotHermitian(u[0].im.abs() / scale));
        }
        u[0].im = 0.0;
        Ok(Self { u })
    }

    pub fn zeros(n: usize) -> Self {
        Self { u: vec![C64::new(0.0, 0.0); n.max(1)] }
    }

    /// `Σ d_k a(f_k) a(f_k)^H`.
    pub fn from_spectrum(n: usize, freqs: &[f64], powers: &[f64]) -> Self {
        let mut u = vec![C64::new(0.0, 0.0); n];
        for (&f, &d) in freqs.iter().zip(powers) {
            for (k, uk) in u.iter_mut().enumerate() {
                *uk += C64::from_polar(d, -2.0 * PI * f * k as f64);
            }
        }
        u[0].im = 0.0;
        Self { u }
    }

    pub fn first_row(&self) -> &[C64] {
        &self.u
    }

    pub fn n(&self) -> usize {
        self.u.len()
    }

    /// `tr T = n·u[0]`.
    pub fn trace(&self) -> f64 {
        self.u[0].re * self.u.len() as f64
    }

    #[inline]
    pub fn entry(&self, i: usize, j: usize) -> C64 {
        if j >= i {
            self.u[j - i]
        } else {
            self.u[i - j].conj()
        }
    }

    pub fn materialize(&self) -> ComplexMatrix {
        let n = self.n();
        ComplexMatrix::from_fn(n, n, |i, j| self.entry(i, j))
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        Self { u: self.u.iter().map(|z| z * alpha).collect() }
    }
}

/// Nearest Hermitian Toeplitz matrix in Frobenius norm: `u[k]` is the mean of
/// the k-th superdiagonal of `(A + A^H)/2`.
pub fn toeplitz_project(a: &ComplexMatrix) -> Result<HermitianToeplitz> {
    if !a.is_square() || a.rows() == 0 {
        return Err(Error::Dimension(format!("cannot project a {}x{} matrix", a.rows(), a.cols())));
    }
    let n = a.rows();
    let u = (0..n)
        .map(|k| {
            let sum: C64 = (0..n - k).map(|i| (a[(i, i + k)] + a[(i + k, i)].conj()) * 0.5).sum();
            sum / (n - k) as f64
        })
        .collect::<Vec<_>>();
    let mut u = u;
    u[0].im = 0.0;
    Ok(HermitianToeplitz { u })
}

/// Two-level Hermitian Toeplitz matrix (Toeplitz blocks in Toeplitz layout).
#[derive(Clone, Debug, PartialEq)]
pub struct TwoLevelToeplitz {
    inner: usize,
    outer: usize,
    /// `g(k, l)` at `k·(2·inner−1) + (l + inner − 1)`.
    g: Vec<C64>,
}

impl TwoLevelToeplitz {
    /// `inner` is the block size (N), `outer` the number of blocks (M).
    pub fn zeros(inner: usize, outer: usize) -> Self {
        Self { inner, outer, g: vec![C64::new(0.0, 0.0); outer * (2 * inner - 1)] }
    }

    /// Builds from a generator laid out as documented on the type; the
    /// zero-block-offset slice must be Hermitian (`g(0,−l) = conj g(0,l)`).
    pub fn from_generator(inner: usize, outer: usize, g: Vec<C64>) -> Result<Self> {
        if inner == 0 || outer == 0 || g.len() != outer * (2 * inner - 1) {
            return Err(Error::Dimension("two-level generator has the wrong length".into()));
        }
        let t = Self { inner, outer, g };
        let scale = t.g.iter().map(|z| z.norm()).fold(f64::MIN_POSITIVE, f64::max);
        for l in 0..inner as isize {
            let defect = (t.gen(0, l) - t.gen(0, -l).conj()).norm();
            if defect > 1e-12 * scale {
                return Err(Error::NotHermitian(defect / scale));
            }
        }
        Ok(t)
    }

    /// `Σ d_k x_k x_k^H` for vectorized atoms `x_k = vec(a_N(fx) a_M(fy)^H)`.
    pub fn from_spectrum(inner: usize, outer: usize, freqs: &[FrequencyPair], powers: &[f64]) -> Self {
        let mut t = Self::zeros(inner, outer);
        let w = 2 * inner - 1;
        for (f, &d) in freqs.iter().zip(powers) {
            for k in 0..outer {
                for l in -(inner as isize - 1)..inner as isize {
                    // x_{i+Np} = e^{j2π(fx i − fy p)}; entry (row, col) = x_row conj(x_col)
                    let phase = 2.0 * PI * (-f.fx * l as f64 + f.fy * k as f64);
                    t.g[k * w + (l + inner as isize - 1) as usize] += C64::from_polar(d, phase);
                }
            }
        }
        t
    }

    pub fn inner(&self) -> usize {
        self.inner
    }

    pub fn outer(&self) -> usize {
        self.outer
    }

    pub fn dim(&self) -> usize {
        self.inner * self.outer
    }

    pub fn generator(&self) -> &[C64] {
        &self.g
    }

    #[inline]
    pub fn gen(&self, k: usize, l: isize) -> C64 {
        self.g[k * (2 * self.inner - 1) + (l + self.inner as isize - 1) as usize]
    }

    pub fn trace(&self) -> f64 {
        self.gen(0, 0).re * self.dim() as f64
    }

    pub fn entry(&self, row: usize, col: usize) -> C64 {
        let (i, p) = (row % self.inner, row / self.inner);
        let (j, q) = (col % self.inner, col / self.inner);
        if q >= p {
            self.gen(q - p, j as isize - i as isize)
        } else {
            self.gen(p - q, i as isize - j as isize).conj()
        }
    }

    pub fn materialize(&self) -> ComplexMatrix {
        let d = self.dim();
        ComplexMatrix::from_fn(d, d, |r, c| self.entry(r, c))
    }

    /// Least-squares projection of a `(inner·outer)`-square matrix onto the
    /// two-level Hermitian Toeplitz subspace.
    pub fn project(a: &ComplexMatrix, inner: usize, outer: usize) -> Result<Self> {
        if a.shape() != (inner * outer, inner * outer) {
            return Err(Error::Dimension("two-level projection: size mismatch".into()));
        }
        let w = 2 * inner - 1;
        let mut sum = vec![C64::new(0.0, 0.0); outer * w];
        let mut count = vec![0usize; outer * w];
        let h = a.hermitian_part();
        for p in 0..outer {
            for q in p..outer {
                for i in 0..inner {
                    for j in 0..inner {
                        let idx = (q - p) * w + (j + inner - 1 - i);
                        sum[idx] += h[(i + inner * p, j + inner * q)];
                        count[idx] += 1;
                    }
                }
            }
        }
        let g = sum.iter().zip(&count).map(|(s, &c)| s / c as f64).collect();
        Ok(Self { inner, outer, g })
    }
}

/// True iff `λ_min ≥ −tol·max(1, λ_max)`.
pub fn psd_check(a: &ComplexMatrix, tol: f64) -> Result<bool> {
    let e = hermitian_eig(a)?;
    Ok(e.min() >= -tol * e.max().max(1.0))
}

/// Frequencies and positive powers of `T = Σ d_k a(f_k) a(f_k)^H`.
#[derive(Clone, Debug, PartialEq)]
pub struct VandermondeFactorization {
    pub freqs: Vec<f64>,
    pub powers: Vec<f64>,
}

impl VandermondeFactorization {
    pub fn len(&self) -> usize {
        self.freqs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.freqs.is_empty()
    }

    pub fn reconstruct(&self, n: usize) -> HermitianToeplitz {
        HermitianToeplitz::from_spectrum(n, &self.freqs, &self.powers)
    }
}

fn signal_rank(e: &EigenDecomposition, rank_tol: f64) -> Result<usize> {
    let top = e.max();
    if top <= 0.0 {
        if e.min() < 0.0 {
            return Err(Error::Domain("matrix is negative definite".into()));
        }
        return Ok(0);
    }
    if e.min() < -rank_tol.max(1e-9) * top.max(1.0) * 10.0 {
        return Err(Error::Domain(format!("matrix is indefinite (λ_min = {:.3e}, λ_max = {top:.3e})", e.min())));
    }
    Ok(e.numerical_rank(rank_tol))
}

/// Phases of the shift-invariance pencil `U_1^† U_2` on the leading `r`
/// eigenvectors, mapped to `[0,1)`.
fn pencil_frequencies(u: &ComplexMatrix, r: usize) -> Result<Vec<f64>> {
    let n = u.rows();
    let us = u.submatrix(0, 0, n, r);
    let u1 = us.submatrix(0, 0, n - 1, r);
    let u2 = us.submatrix(1, 0, n - 1, r);
    let phi = pseudo_inverse(&u1, DEFAULT_RCOND)?.matmul(&u2);
    let (z, _) = eig_general(&phi)?;
    Ok(z.iter().map(|z| wrap_unit(z.arg() / (2.0 * PI))).collect())
}

/// Nonnegative powers fitting `t` with `Σ d_k a(f_k)a(f_k)^H`; zero-power
/// components are dropped.
fn fit_powers_1l(t: &ComplexMatrix, freqs: &[f64]) -> Result<VandermondeFactorization> {
    let n = t.rows();
    let r = freqs.len();
    let atoms: Vec<Vec<C64>> = freqs.iter().map(|&f| steering_entries(n, f)).collect();
    fit_powers(t, &atoms).map(|d| {
        let (freqs, powers): (Vec<f64>, Vec<f64>) =
            (0..r).filter(|&k| d[k] > 0.0).map(|k| (freqs[k], d[k])).unzip();
        VandermondeFactorization { freqs, powers }
    })
}

fn fit_powers(t: &ComplexMatrix, atoms: &[Vec<C64>]) -> Result<Vec<f64>> {
    let r = atoms.len();
    let mut g = vec![0.0; r * r];
    let mut b = vec![0.0; r];
    for k in 0..r {
        let tk = t.matvec(&atoms[k]);
        b[k] = atoms[k].iter().zip(&tk).map(|(a, t)| a.conj() * t).sum::<C64>().re;
        for l in 0..r {
            let ip: C64 = atoms[k].iter().zip(&atoms[l]).map(|(a, c)| a.conj() * c).sum();
            g[k * r + l] = ip.norm_sqr();
        }
    }
    nnls_gram(&g, &b)
}

/// Vandermonde decomposition of a PSD Toeplitz matrix whose numerical rank
/// (eigenvalues above `rank_tol·λ_max`) is below its size.
pub fn vandermonde_decompose_1l(t: &HermitianToeplitz, rank_tol: f64) -> Result<VandermondeFactorization> {
    let tm = t.materialize();
    let e = hermitian_eig_unchecked(&tm)?;
    let r = signal_rank(&e, rank_tol)?;
    if r >= t.n() {
        return Err(Error::DecompositionInfeasible(format!(
            "numerical rank {r} is not below the size {}",
            t.n()
        )));
    }
    decompose_with_rank(&tm, &e, r)
}

/// As [`vandermonde_decompose_1l`] with the model order fixed to `r` (useful
/// for noisy witnesses where the eigenvalue gap is not clean).
pub fn vandermonde_decompose_1l_order(t: &HermitianToeplitz, r: usize) -> Result<VandermondeFactorization> {
    if r >= t.n() {
        return Err(Error::DecompositionInfeasible(format!("order {r} is not below the size {}", t.n())));
    }
    let tm = t.materialize();
    let e = hermitian_eig_unchecked(&tm)?;
    decompose_with_rank(&tm, &e, r)
}

fn decompose_with_rank(tm: &ComplexMatrix, e: &EigenDecomposition, r: usize) -> Result<VandermondeFactorization> {
    if r == 0 {
        return Ok(VandermondeFactorization { freqs: vec![], powers: vec![] });
    }
    let freqs = pencil_frequencies(&e.vectors, r)?;
    let mut fac = fit_powers_1l(tm, &freqs)?;
    // report in ascending frequency order
    let mut order: Vec<usize> = (0..fac.freqs.len()).collect();
    order.sort_by(|&a, &b| fac.freqs[a].total_cmp(&fac.freqs[b]));
    fac = VandermondeFactorization {
        freqs: order.iter().map(|&k| fac.freqs[k]).collect(),
        powers: order.iter().map(|&k| fac.powers[k]).collect(),
    };
    Ok(fac)
}

/// A component of a two-level Vandermonde decomposition.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PairedComponent {
    pub freq: FrequencyPair,
    pub power: f64,
}

/// Two-level Vandermonde decomposition by 2-D ESPRIT: inner and outer shift
/// invariances of the signal subspace, paired through the eigenvectors of a
/// fixed linear combination of the two pencils.
pub fn vandermonde_decompose_2l(t: &TwoLevelToeplitz, rank_tol: f64) -> Result<Vec<PairedComponent>> {
    let tm = t.materialize();
    let e = hermitian_eig_unchecked(&tm)?;
    let r = signal_rank(&e, rank_tol)?;
    if r > t.inner().min(t.outer()) {
        return Err(Error::DecompositionInfeasible(format!(
            "numerical rank {r} exceeds min({}, {})",
            t.inner(),
            t.outer()
        )));
    }
    decompose_2l_with_rank(t, &tm, &e, r)
}

/// As [`vandermonde_decompose_2l`] with a known model order.
pub fn vandermonde_decompose_2l_order(t: &TwoLevelToeplitz, r: usize) -> Result<Vec<PairedComponent>> {
    if r >= t.dim() {
        return Err(Error::DecompositionInfeasible(format!("order {r} is not below {}", t.dim())));
    }
    let tm = t.materialize();
    let e = hermitian_eig_unchecked(&tm)?;
    decompose_2l_with_rank(t, &tm, &e, r)
}

fn decompose_2l_with_rank(
    t: &TwoLevelToeplitz,
    tm: &ComplexMatrix,
    e: &EigenDecomposition,
    r: usize,
) -> Result<Vec<PairedComponent>> {
    if r == 0 {
        return Ok(vec![]);
    }
    let (n, m) = (t.inner(), t.outer());
    let us = e.vectors.submatrix(0, 0, n * m, r);
    let rows_where = |pred: &dyn Fn(usize, usize) -> bool| -> Vec<usize> {
        (0..n * m).filter(|&row| pred(row % n, row / n)).collect()
    };
    let in1 = rows_where(&|i, _| i + 1 < n);
    let in2: Vec<usize> = in1.iter().map(|&row| row + 1).collect();
    let out1 = rows_where(&|_, p| p + 1 < m);
    let out2: Vec<usize> = out1.iter().map(|&row| row + n).collect();
    let pencil = |a: &[usize], b: &[usize]| -> Result<ComplexMatrix> {
        Ok(pseudo_inverse(&us.select_rows(a), DEFAULT_RCOND)?.matmul(&us.select_rows(b)))
    };
    let phi_in = if n > 1 { pencil(&in1, &in2)? } else { ComplexMatrix::identity(r) };
    let phi_out = if m > 1 { pencil(&out1, &out2)? } else { ComplexMatrix::identity(r) };

    // generic fixed combination so that distinct pairs get distinct eigenvalues
    let gamma = C64::new(0.618_033_988_749_895, 0.318_309_886_183_791);
    let (_, vecs) = eig_general(&(&phi_in + &phi_out.scale(gamma)))?;
    let vinv = crate::linalg::solve(&vecs, &ComplexMatrix::identity(r))?;
    let din = vinv.matmul(&phi_in).matmul(&vecs);
    let dout = vinv.matmul(&phi_out).matmul(&vecs);
    let freqs: Vec<FrequencyPair> = (0..r)
        .map(|k| {
            let fx = if n > 1 { din[(k, k)].arg() / (2.0 * PI) } else { 0.0 };
            // the outer shift multiplies by e^{−j2πfy}
            let fy = if m > 1 { -dout[(k, k)].arg() / (2.0 * PI) } else { 0.0 };
            FrequencyPair::wrapped(fx, fy)
        })
        .collect();

    let atoms: Vec<Vec<C64>> = freqs
        .iter()
        .map(|f| {
            let ax = steering_entries(n, f.fx);
            let ay = steering_entries(m, f.fy);
            (0..n * m).map(|row| ax[row % n] * ay[row / n].conj()).collect()
        })
        .collect();
    let d = fit_powers(tm, &atoms)?;
    let mut out: Vec<PairedComponent> = freqs
        .into_iter()
        .zip(d)
        .filter(|(_, d)| *d > 0.0)
        .map(|(freq, power)| PairedComponent { freq, power })
        .collect();
    out.sort_by(|a, b| a.freq.fx.total_cmp(&b.freq.fx).then(a.freq.fy.total_cmp(&b.freq.fy)));
    Ok(out)
}
