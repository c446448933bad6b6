//! Atomic norm formulations for 2-D line spectra.
//!
//! * **Decoupled ANM** (`danm_*`): the PSD matrix
//!   `[[T(u_y), X^H], [X, T(u_x)]]` with two one-level Toeplitz blocks of
//!   sizes `M` and `N`, objective `(tr T(u_x) + tr T(u_y)) / (2√(NM))`.
//! * **Vectorized ANM** (`vanm_*`): `[[v, x^H], [x, T_2D]]` with a two-level
//!   Toeplitz block of size `NM`, objective `½(v + tr T_2D / (NM))`. The
//!   `1/(NM)` factor makes a single atom `s·a(f)` evaluate to `|s|`.
//! * **Decoupled 1-D MMV** (`mmv_decoupled`): two multiple-measurement 1-D
//!   atomic norms with a free Hermitian block, objective
//!   `(tr V + tr T(u)) / (2√N)` for the `x` side; a single unit atom has
//!   norm `√M`.
//! * **On-grid baseline** (`cs_grid_baseline`): orthogonal matching pursuit
//!   over a grid dictionary.
//!
//! Every builder normalizes the data to unit Frobenius norm before solving and
//! rescales the reported quantities, so solver tolerances are relative.
//! Denoising forms minimize `λ·‖X‖_A + ‖Y − C(X)‖_F²` with the norm replaced by
//! its semidefinite surrogate.

use crate::compression::CompressionOperator;
use crate::error::{Error, Result};
use crate::linalg::{pseudo_inverse, svd, ComplexMatrix, C64, DEFAULT_RCOND};
use crate::model::{FrequencyPair, Source, SourceSpectrum};
use crate::sdp::{
    self, ParamMap, SdpProblem, SdpSolution, ShiftBlock, SolveStatus, SolverOptions, StartPoint, Structure,
};
use crate::toeplitz::{HermitianToeplitz, TwoLevelToeplitz};

/// Largest `N·M` accepted by the vectorized formulation unless overridden.
pub const DEFAULT_VANM_CAP: usize = 1024;

const ONE: C64 = C64::new(1.0, 0.0);
const I: C64 = C64::new(0.0, 1.0);

/// Short solver report attached to every result.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverSummary {
    pub status: SolveStatus,
    pub iterations: usize,
    /// Objective value in data units.
    pub primal_objective: f64,
    pub dual_objective: f64,
    pub gap: f64,
}

impl SolverSummary {
    fn from_solution(sol: &SdpSolution) -> Self {
        Self {
            status: sol.status,
            iterations: sol.iterations,
            primal_objective: sol.objective_value,
            dual_objective: sol.dual_objective,
            gap: sol.gap,
        }
    }

    fn trivial() -> Self {
        Self { status: SolveStatus::Optimal, iterations: 0, primal_objective: 0.0, dual_objective: 0.0, gap: 0.0 }
    }
}

/// Output of the decoupled formulations.
#[derive(Clone, Debug)]
pub struct DanmResult {
    pub x_hat: ComplexMatrix,
    /// `N x N` witness.
    pub ux: HermitianToeplitz,
    /// `M x M` witness.
    pub uy: HermitianToeplitz,
    /// `(tr T(u_x) + tr T(u_y)) / (2√(NM))`.
    pub atomic_norm_value: f64,
    pub solver: SolverSummary,
    /// Full solver output rescaled to data units (`None` for zero data).
    pub solution: Option<SdpSolution>,
}

/// Output of the vectorized formulation.
#[derive(Clone, Debug)]
pub struct VanmResult {
    /// Recovered signal as an `N x M` matrix (`vec` of it is the NM vector).
    pub x_hat: ComplexMatrix,
    pub u2: TwoLevelToeplitz,
    pub v: f64,
    /// `½(v + tr T_2D / (NM))`.
    pub atomic_norm_value: f64,
    pub solver: SolverSummary,
    pub solution: Option<SdpSolution>,
}

/// Output of the decoupled 1-D MMV problems.
#[derive(Clone, Debug)]
pub struct MmvResult {
    pub ux: HermitianToeplitz,
    pub uy: HermitianToeplitz,
    /// `‖X‖_{A_x}`.
    pub norm_x: f64,
    /// `‖X^H‖_{A_y}`.
    pub norm_y: f64,
    pub solver_x: SolverSummary,
    pub solver_y: SolverSummary,
}

/// Whether `l` sources can be identified from an `N x M` observation.
pub fn identifiable(l: usize, n: usize, m: usize) -> bool {
    l <= n.min(m)
}

// ---------------------------------------------------------------------------
// building blocks

/// Parameters of a one-level Toeplitz block: `u_0`, then `Re u_k, Im u_k`.
fn toeplitz_params(block: usize, n: usize) -> Vec<ParamMap> {
    let mut p = vec![ParamMap::shift_re(block, 0, 0)];
    for k in 1..n as isize {
        p.push(ParamMap::shift_re(block, k, 0));
        p.push(ParamMap::shift_im(block, k, 0));
    }
    p
}

fn decode_toeplitz(theta: &[f64]) -> HermitianToeplitz {
    let n = (theta.len() + 1) / 2;
    let u = (0..n)
        .map(|k| if k == 0 { C64::new(theta[0], 0.0) } else { C64::new(theta[2 * k - 1], theta[2 * k]) })
        .collect();
    HermitianToeplitz::new(u).expect("real diagonal by construction")
}

/// Parameters of a two-level block, generator order `k = 0, l ≥ 0` first and
/// then `k ≥ 1, l ∈ (−inner, inner)`.
fn two_level_params(block: usize, inner: usize, outer: usize) -> Vec<ParamMap> {
    let mut p = vec![ParamMap::shift_re(block, 0, 0)];
    for l in 1..inner as isize {
        p.push(ParamMap::shift_re(block, l, 0));
        p.push(ParamMap::shift_im(block, l, 0));
    }
    for k in 1..outer as isize {
        for l in -(inner as isize - 1)..inner as isize {
            p.push(ParamMap::shift_re(block, l, k));
            p.push(ParamMap::shift_im(block, l, k));
        }
    }
    p
}

fn two_level_param_count(inner: usize, outer: usize) -> usize {
    (2 * inner - 1) + 2 * (outer - 1) * (2 * inner - 1)
}

fn decode_two_level(theta: &[f64], inner: usize, outer: usize) -> TwoLevelToeplitz {
    let w = 2 * inner - 1;
    let mut g = vec![C64::new(0.0, 0.0); outer * w];
    let mid = inner - 1;
    g[mid] = C64::new(theta[0], 0.0);
    let mut idx = 1;
    for l in 1..inner {
        let z = C64::new(theta[idx], theta[idx + 1]);
        idx += 2;
        g[mid + l] = z;
        g[mid - l] = z.conj();
    }
    for k in 1..outer {
        for j in 0..w {
            g[k * w + j] = C64::new(theta[idx], theta[idx + 1]);
            idx += 2;
        }
    }
    TwoLevelToeplitz::from_generator(inner, outer, g).expect("Hermitian by construction")
}

/// Signal entries as free parameters: `(Re, Im)` of entry `(a, b)` in
/// column-major order, placed at `pos(a, b)` of the PSD matrix.
fn signal_params(n: usize, m: usize, pos: impl Fn(usize, usize) -> (usize, usize)) -> Vec<ParamMap> {
    let mut p = Vec::with_capacity(2 * n * m);
    for b in 0..m {
        for a in 0..n {
            let (r, c) = pos(a, b);
            p.push(ParamMap::entry(r, c, ONE));
            p.push(ParamMap::entry(r, c, I));
        }
    }
    p
}

fn decode_signal(theta: &[f64], n: usize, m: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(n, m, |a, b| {
        let k = 2 * (a + n * b);
        C64::new(theta[k], theta[k + 1])
    })
}

fn encode_signal(x: &ComplexMatrix) -> Vec<f64> {
    let mut v = Vec::with_capacity(2 * x.rows() * x.cols());
    for z in x.as_slice() {
        v.push(z.re);
        v.push(z.im);
    }
    v
}

/// `(Q, c, ‖Y‖²)` of `‖Y − C(X)‖²` over the signal parameters, `Q` row-major
/// on `2NM` parameters.
fn data_term(y: &ComplexMatrix, op: &CompressionOperator) -> Result<(Vec<f64>, Vec<f64>, f64)> {
    let (n, m) = op.input_dims();
    let w = op.adjoint(y)?;
    let np = 2 * n * m;
    let mut c = vec![0.0; np];
    for b in 0..m {
        for a in 0..n {
            let k = 2 * (a + n * b);
            c[k] = -2.0 * w[(a, b)].re;
            c[k + 1] = -2.0 * w[(a, b)].im;
        }
    }
    let mut q = vec![0.0; np * np];
    if op.is_identity() {
        for i in 0..np {
            q[i * np + i] = 2.0;
        }
    } else {
        let gx = op.cx().adjoint_matmul(op.cx());
        let gy = op.cy().adjoint_matmul(op.cy());
        let omegas = [ONE, I];
        for b in 0..m {
            for a in 0..n {
                for b2 in 0..m {
                    for a2 in 0..n {
                        let g = gx[(a, a2)] * gy[(b2, b)];
                        for (wi, wp) in omegas.iter().enumerate() {
                            for (wj, wq) in omegas.iter().enumerate() {
                                let p = 2 * (a + n * b) + wi;
                                let r = 2 * (a2 + n * b2) + wj;
                                q[p * np + r] = 2.0 * (wp.conj() * wq * g).re;
                            }
                        }
                    }
                }
            }
        }
    }
    Ok((q, c, y.frobenius_norm_sqr()))
}

/// Embeds a `k x k` block of `small` into rows/cols `[off, off+k)` of a
/// `np x np` row-major matrix.
fn embed(small: &[f64], k: usize, off: usize, np: usize) -> Vec<f64> {
    let mut q = vec![0.0; np * np];
    for i in 0..k {
        q[(off + i) * np + off..(off + i) * np + off + k].copy_from_slice(&small[i * k..(i + 1) * k]);
    }
    q
}

/// Least-squares initial signal `C_x^† Y (C_y^†)^H`.
fn least_squares_signal(y: &ComplexMatrix, op: &CompressionOperator) -> Result<ComplexMatrix> {
    if op.is_identity() {
        return Ok(y.clone());
    }
    let px = pseudo_inverse(op.cx(), DEFAULT_RCOND)?;
    let py = pseudo_inverse(op.cy(), DEFAULT_RCOND)?;
    Ok(px.matmul(y).matmul_adjoint(&py))
}

fn spectral_norm(x: &ComplexMatrix) -> Result<f64> {
    Ok(svd(x)?.s.first().copied().unwrap_or(0.0))
}

fn check_solution(sol: &SdpSolution) -> Result<()> {
    if sol.status == SolveStatus::Infeasible {
        return Err(Error::Solver("problem reported infeasible".into()));
    }
    if sol.params.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("solver returned non-finite values".into()));
    }
    Ok(())
}

/// Rescales a solution computed on data divided by `s`. The objective is
/// homogeneous of degree `deg` in the data (1 for norms, 2 for denoising).
fn rescale(mut sol: SdpSolution, s: f64, deg: i32) -> SdpSolution {
    for v in &mut sol.params {
        *v *= s;
    }
    sol.psd_matrix = sol.psd_matrix.scale_real(s);
    let obj = s.powi(deg);
    sol.objective_value *= obj;
    sol.dual_objective *= obj;
    sol.dual_matrix = sol.dual_matrix.scale_real(s.powi(deg - 1));
    for h in &mut sol.history {
        h.primal *= obj;
        h.dual *= obj;
        h.complementarity *= obj;
    }
    sol
}

// ---------------------------------------------------------------------------
// decoupled ANM

struct DanmLayout {
    n: usize,
    m: usize,
}

impl DanmLayout {
    fn norm_factor(&self) -> f64 {
        1.0 / (2.0 * ((self.n * self.m) as f64).sqrt())
    }
    fn ty_params(&self) -> usize {
        2 * self.m - 1
    }
    fn tx_params(&self) -> usize {
        2 * self.n - 1
    }
    fn toeplitz_count(&self) -> usize {
        self.ty_params() + self.tx_params()
    }
    fn blocks(&self) -> Vec<ShiftBlock> {
        vec![ShiftBlock::one_level(0, self.m), ShiftBlock::one_level(self.m, self.n)]
    }
    fn toeplitz_structure_params(&self) -> Vec<ParamMap> {
        let mut p = toeplitz_params(0, self.m);
        p.extend(toeplitz_params(1, self.n));
        p
    }
    /// Linear objective on the Toeplitz parameters with weight `lambda`.
    fn toeplitz_cost(&self, lambda: f64) -> Vec<f64> {
        let mut c = vec![0.0; self.toeplitz_count()];
        c[0] = lambda * self.m as f64 * self.norm_factor();
        c[self.ty_params()] = lambda * self.n as f64 * self.norm_factor();
        c
    }
    /// Toeplitz parameters for `T(u_y) = T(u_x) = t·I`.
    fn scaled_identity(&self, t: f64) -> Vec<f64> {
        let mut th = vec![0.0; self.toeplitz_count()];
        th[0] = t;
        th[self.ty_params()] = t;
        th
    }
    fn signal_pos(&self) -> impl Fn(usize, usize) -> (usize, usize) {
        let m = self.m;
        move |a, b| (m + a, b)
    }
    fn data_f0(&self, x: &ComplexMatrix) -> ComplexMatrix {
        let d = self.n + self.m;
        let mut f0 = ComplexMatrix::zeros(d, d);
        f0.set_block(self.m, 0, x);
        f0.set_block(0, self.m, &x.adjoint());
        f0
    }
    fn witnesses(&self, theta: &[f64]) -> (HermitianToeplitz, HermitianToeplitz) {
        let uy = decode_toeplitz(&theta[..self.ty_params()]);
        let ux = decode_toeplitz(&theta[self.ty_params()..self.toeplitz_count()]);
        (ux, uy)
    }
    fn norm_value(&self, ux: &HermitianToeplitz, uy: &HermitianToeplitz) -> f64 {
        (ux.trace() + uy.trace()) * self.norm_factor()
    }
    fn zero_result(&self) -> DanmResult {
        DanmResult {
            x_hat: ComplexMatrix::zeros(self.n, self.m),
            ux: HermitianToeplitz::zeros(self.n),
            uy: HermitianToeplitz::zeros(self.m),
            atomic_norm_value: 0.0,
            solver: SolverSummary::trivial(),
            solution: None,
        }
    }
}

fn check_nonempty(x: &ComplexMatrix) -> Result<()> {
    if x.rows() == 0 || x.cols() == 0 {
        return Err(Error::Dimension("observation must be nonempty".into()));
    }
    if x.as_slice().iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Domain("observation contains non-finite entries".into()));
    }
    Ok(())
}

/// Builds the decoupled atomic norm SDP for unit-norm data.
pub fn danm_exact_problem(x: &ComplexMatrix) -> Result<SdpProblem> {
    check_nonempty(x)?;
    let lay = DanmLayout { n: x.rows(), m: x.cols() };
    let d = lay.n + lay.m;
    let structure = Structure::new(d, lay.blocks(), lay.toeplitz_structure_params())?;
    let t = 1.0 + spectral_norm(x)?;
    SdpProblem::new(structure, lay.data_f0(x), lay.toeplitz_cost(1.0))?.with_start(StartPoint {
        theta: lay.scaled_identity(t),
        z: ComplexMatrix::identity(d).scale_real(lay.norm_factor()),
        y: vec![],
    })
}

/// Decoupled atomic norm `‖X‖_A` of a fully observed `N x M` matrix with the
/// Toeplitz witnesses of the optimum.
pub fn danm_exact(x: &ComplexMatrix, opts: &SolverOptions) -> Result<DanmResult> {
    check_nonempty(x)?;
    let lay = DanmLayout { n: x.rows(), m: x.cols() };
    let s = x.frobenius_norm();
    if s == 0.0 {
        return Ok(lay.zero_result());
    }
    let p = danm_exact_problem(&x.scale_real(1.0 / s))?;
    let sol = sdp::solve(&p, opts)?;
    check_solution(&sol)?;
    let sol = rescale(sol, s, 1);
    let (ux, uy) = lay.witnesses(&sol.params);
    Ok(DanmResult {
        x_hat: x.clone(),
        atomic_norm_value: lay.norm_value(&ux, &uy),
        ux,
        uy,
        solver: SolverSummary::from_solution(&sol),
        solution: Some(sol),
    })
}

fn check_op(y: &ComplexMatrix, op: &CompressionOperator) -> Result<()> {
    check_nonempty(y)?;
    if y.shape() != op.output_dims() {
        return Err(Error::Dimension(format!(
            "observation is {:?} but the operator produces {:?}",
            y.shape(),
            op.output_dims()
        )));
    }
    Ok(())
}

/// Minimum decoupled atomic norm subject to `C(X) = Y` (noise-free
/// compressive recovery).
pub fn danm_compressed_exact(y: &ComplexMatrix, op: &CompressionOperator, opts: &SolverOptions) -> Result<DanmResult> {
    check_op(y, op)?;
    let (n, m) = op.input_dims();
    let lay = DanmLayout { n, m };
    let s = y.frobenius_norm();
    if s == 0.0 {
        return Ok(lay.zero_result());
    }
    let yn = y.scale_real(1.0 / s);
    let d = n + m;
    let nt = lay.toeplitz_count();
    let mut params = lay.toeplitz_structure_params();
    params.extend(signal_params(n, m, lay.signal_pos()));
    let np = params.len();
    let structure = Structure::new(d, lay.blocks(), params)?;
    let mut c = lay.toeplitz_cost(1.0);
    c.resize(np, 0.0);

    // rows: Re and Im of C(X)[k1,k2] = Y[k1,k2]
    let (kx, ky) = op.output_dims();
    let rows = 2 * kx * ky;
    let mut a = vec![0.0; rows * np];
    let mut rhs = vec![0.0; rows];
    for k2 in 0..ky {
        for k1 in 0..kx {
            let row = 2 * (k1 + kx * k2);
            rhs[row] = yn[(k1, k2)].re;
            rhs[row + 1] = yn[(k1, k2)].im;
            for b in 0..m {
                let cyb = op.cy()[(k2, b)].conj();
                for aa in 0..n {
                    let w = op.cx()[(k1, aa)] * cyb;
                    let col = nt + 2 * (aa + n * b);
                    a[row * np + col] = w.re;
                    a[(row + 1) * np + col] = w.im;
                    // imaginary parameter enters as i·w
                    a[row * np + col + 1] = -w.im;
                    a[(row + 1) * np + col + 1] = w.re;
                }
            }
        }
    }
    let x0 = least_squares_signal(&yn, op)?;
    let t = 1.0 + spectral_norm(&x0)?;
    let mut theta = lay.scaled_identity(t);
    theta.extend(encode_signal(&x0));
    let p = SdpProblem::new(structure, ComplexMatrix::zeros(d, d), c)?
        .with_equalities(a, rhs)?
        .with_start(StartPoint {
            theta,
            z: ComplexMatrix::identity(d).scale_real(lay.norm_factor()),
            y: vec![0.0; rows],
        })?;
    let ipm = SolverOptions { kind: sdp::SolverKind::Ipm, ..*opts };
    let sol = rescale(sdp::solve(&p, &ipm)?, s, 1);
    check_solution(&sol)?;
    let (ux, uy) = lay.witnesses(&sol.params);
    Ok(DanmResult {
        x_hat: decode_signal(&sol.params[nt..], n, m),
        atomic_norm_value: lay.norm_value(&ux, &uy),
        ux,
        uy,
        solver: SolverSummary::from_solution(&sol),
        solution: Some(sol),
    })
}

/// Builds the decoupled denoising SDP on data already scaled by the caller.
fn danm_denoise_problem(y: &ComplexMatrix, op: &CompressionOperator, lambda: f64) -> Result<SdpProblem> {
    let (n, m) = op.input_dims();
    let lay = DanmLayout { n, m };
    let d = n + m;
    let nt = lay.toeplitz_count();
    let mut params = lay.toeplitz_structure_params();
    params.extend(signal_params(n, m, lay.signal_pos()));
    let np = params.len();
    let structure = Structure::new(d, lay.blocks(), params)?;
    let (qx, cx, constant) = data_term(y, op)?;
    let mut c = lay.toeplitz_cost(lambda);
    c.extend(cx);
    let q = embed(&qx, 2 * n * m, nt, np);
    let x0 = least_squares_signal(y, op)?;
    let t = 1.0 + spectral_norm(&x0)?;
    let mut theta = lay.scaled_identity(t);
    theta.extend(encode_signal(&x0));
    SdpProblem::new(structure, ComplexMatrix::zeros(d, d), c)?
        .with_quadratic(q, constant)?
        .with_start(StartPoint {
            theta,
            z: ComplexMatrix::identity(d).scale_real(lambda * lay.norm_factor()),
            y: vec![],
        })
}

/// Decoupled atomic norm denoising:
/// `min λ·‖X‖_A + ‖Y − C(X)‖_F²` over the semidefinite surrogate.
pub fn danm_denoise(
    y: &ComplexMatrix,
    op: &CompressionOperator,
    lambda: f64,
    opts: &SolverOptions,
) -> Result<DanmResult> {
    check_op(y, op)?;
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::Domain(format!("regularization weight must be positive, got {lambda}")));
    }
    let (n, m) = op.input_dims();
    let lay = DanmLayout { n, m };
    let s = y.frobenius_norm();
    if s == 0.0 {
        return Ok(lay.zero_result());
    }
    let p = danm_denoise_problem(&y.scale_real(1.0 / s), op, lambda / s)?;
    let sol = sdp::solve(&p, opts)?;
    check_solution(&sol)?;
    let sol = rescale(sol, s, 2);
    let (ux, uy) = lay.witnesses(&sol.params);
    Ok(DanmResult {
        x_hat: decode_signal(&sol.params[lay.toeplitz_count()..], n, m),
        atomic_norm_value: lay.norm_value(&ux, &uy),
        ux,
        uy,
        solver: SolverSummary::from_solution(&sol),
        solution: Some(sol),
    })
}

// ---------------------------------------------------------------------------
// vectorized ANM

fn check_cap(n: usize, m: usize, cap: usize) -> Result<()> {
    if n * m > cap {
        return Err(Error::TooLarge(format!(
            "vectorized formulation needs a {0}x{0} PSD block; N·M = {1} exceeds the cap {cap}",
            n * m + 1,
            n * m
        )));
    }
    Ok(())
}

struct VanmLayout {
    n: usize,
    m: usize,
}

impl VanmLayout {
    fn dim(&self) -> usize {
        1 + self.n * self.m
    }
    fn toeplitz_count(&self) -> usize {
        1 + two_level_param_count(self.n, self.m)
    }
    fn blocks(&self) -> Vec<ShiftBlock> {
        vec![ShiftBlock::two_level(1, self.n, self.m)]
    }
    fn base_params(&self) -> Vec<ParamMap> {
        let mut p = vec![ParamMap::entry(0, 0, ONE)];
        p.extend(two_level_params(0, self.n, self.m));
        p
    }
    fn cost(&self, lambda: f64) -> Vec<f64> {
        let mut c = vec![0.0; self.toeplitz_count()];
        c[0] = 0.5 * lambda;
        c[1] = 0.5 * lambda;
        c
    }
    fn scaled_identity(&self, t: f64) -> Vec<f64> {
        let mut th = vec![0.0; self.toeplitz_count()];
        th[0] = t;
        th[1] = t;
        th
    }
    fn signal_pos(&self) -> impl Fn(usize, usize) -> (usize, usize) {
        let n = self.n;
        move |a, b| (1 + a + n * b, 0)
    }
    fn start_dual(&self, lambda: f64) -> ComplexMatrix {
        let nm = (self.n * self.m) as f64;
        let mut d = vec![0.5 * lambda / nm; self.dim()];
        d[0] = 0.5 * lambda;
        ComplexMatrix::diag_real(&d)
    }
    fn finish(&self, x_hat: ComplexMatrix, sol: SdpSolution) -> VanmResult {
        let v = sol.params[0];
        let u2 = decode_two_level(&sol.params[1..self.toeplitz_count()], self.n, self.m);
        let atomic_norm_value = 0.5 * (v + u2.gen(0, 0).re);
        VanmResult {
            x_hat,
            u2,
            v,
            atomic_norm_value,
            solver: SolverSummary::from_solution(&sol),
            solution: Some(sol),
        }
    }
    fn zero_result(&self) -> VanmResult {
        VanmResult {
            x_hat: ComplexMatrix::zeros(self.n, self.m),
            u2: TwoLevelToeplitz::zeros(self.n, self.m),
            v: 0.0,
            atomic_norm_value: 0.0,
            solver: SolverSummary::trivial(),
            solution: None,
        }
    }
}

/// Vectorized atomic norm of `vec(X)`; refuses `N·M > cap`.
pub fn vanm_exact(x: &ComplexMatrix, opts: &SolverOptions, cap: usize) -> Result<VanmResult> {
    check_nonempty(x)?;
    let lay = VanmLayout { n: x.rows(), m: x.cols() };
    check_cap(lay.n, lay.m, cap)?;
    let s = x.frobenius_norm();
    if s == 0.0 {
        return Ok(lay.zero_result());
    }
    let xn = x.scale_real(1.0 / s);
    let d = lay.dim();
    let structure = Structure::new(d, lay.blocks(), lay.base_params())?;
    let mut f0 = ComplexMatrix::zeros(d, d);
    for (k, z) in xn.as_slice().iter().enumerate() {
        f0[(1 + k, 0)] = *z;
        f0[(0, 1 + k)] = z.conj();
    }
    let p = SdpProblem::new(structure, f0, lay.cost(1.0))?.with_start(StartPoint {
        theta: lay.scaled_identity(2.0),
        z: lay.start_dual(1.0),
        y: vec![],
    })?;
    let sol = sdp::solve(&p, opts)?;
    check_solution(&sol)?;
    Ok(lay.finish(x.clone(), rescale(sol, s, 1)))
}

/// Vectorized counterpart of [`danm_denoise`].
pub fn vanm_denoise(
    y: &ComplexMatrix,
    op: &CompressionOperator,
    lambda: f64,
    opts: &SolverOptions,
    cap: usize,
) -> Result<VanmResult> {
    check_op(y, op)?;
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::Domain(format!("regularization weight must be positive, got {lambda}")));
    }
    let (n, m) = op.input_dims();
    let lay = VanmLayout { n, m };
    check_cap(n, m, cap)?;
    let s = y.frobenius_norm();
    if s == 0.0 {
        return Ok(lay.zero_result());
    }
    let yn = y.scale_real(1.0 / s);
    let lam = lambda / s;
    let d = lay.dim();
    let nt = lay.toeplitz_count();
    let mut params = lay.base_params();
    params.extend(signal_params(n, m, lay.signal_pos()));
    let np = params.len();
    let structure = Structure::new(d, lay.blocks(), params)?;
    let (qx, cx, constant) = data_term(&yn, op)?;
    let mut c = lay.cost(lam);
    c.extend(cx);
    let x0 = least_squares_signal(&yn, op)?;
    let mut theta = lay.scaled_identity(1.0 + x0.frobenius_norm());
    theta.extend(encode_signal(&x0));
    let p = SdpProblem::new(structure, ComplexMatrix::zeros(d, d), c)?
        .with_quadratic(embed(&qx, 2 * n * m, nt, np), constant)?
        .with_start(StartPoint { theta, z: lay.start_dual(lam), y: vec![] })?;
    let sol = sdp::solve(&p, opts)?;
    check_solution(&sol)?;
    let sol = rescale(sol, s, 2);
    Ok(lay.finish(decode_signal(&sol.params[nt..], n, m), sol))
}

// ---------------------------------------------------------------------------
// decoupled 1-D MMV

/// `‖X‖_{A_x}` for an `N x M` matrix: `[[V, X^H], [X, T(u)]] ⪰ 0` with `V`
/// free Hermitian.
fn mmv_side(x: &ComplexMatrix, opts: &SolverOptions) -> Result<(HermitianToeplitz, f64, SolverSummary)> {
    let (n, m) = x.shape();
    let s = x.frobenius_norm();
    if s == 0.0 {
        return Ok((HermitianToeplitz::zeros(n), 0.0, SolverSummary::trivial()));
    }
    let xn = x.scale_real(1.0 / s);
    let d = n + m;
    let w = 1.0 / (2.0 * (n as f64).sqrt());
    let mut params = Vec::new();
    let mut c = Vec::new();
    let mut theta = Vec::new();
    let t = 1.0 + spectral_norm(&xn)?;
    for i in 0..m {
        params.push(ParamMap::entry(i, i, ONE));
        c.push(w);
        theta.push(t);
    }
    for j in 0..m {
        for i in 0..j {
            params.push(ParamMap::entry(i, j, ONE));
            params.push(ParamMap::entry(i, j, I));
            c.extend([0.0, 0.0]);
            theta.extend([0.0, 0.0]);
        }
    }
    let nv = params.len();
    params.extend(toeplitz_params(0, n));
    c.push(w * n as f64);
    c.resize(params.len(), 0.0);
    theta.push(t);
    theta.resize(params.len(), 0.0);
    let structure = Structure::new(d, vec![ShiftBlock::one_level(m, n)], params)?;
    let mut f0 = ComplexMatrix::zeros(d, d);
    f0.set_block(m, 0, &xn);
    f0.set_block(0, m, &xn.adjoint());
    let p = SdpProblem::new(structure, f0, c)?.with_start(StartPoint {
        theta,
        z: ComplexMatrix::identity(d).scale_real(w),
        y: vec![],
    })?;
    let sol = sdp::solve(&p, opts)?;
    check_solution(&sol)?;
    let sol = rescale(sol, s, 1);
    let u = decode_toeplitz(&sol.params[nv..]);
    Ok((u, sol.objective_value, SolverSummary::from_solution(&sol)))
}

/// Two independent 1-D multiple-measurement atomic norm problems on `X` and
/// `X^H`.
pub fn mmv_decoupled(x: &ComplexMatrix, opts: &SolverOptions) -> Result<MmvResult> {
    check_nonempty(x)?;
    let (ux, norm_x, solver_x) = mmv_side(x, opts)?;
    let (uy, norm_y, solver_y) = mmv_side(&x.adjoint(), opts)?;
    Ok(MmvResult { ux, uy, norm_x, norm_y, solver_x, solver_y })
}

// ---------------------------------------------------------------------------
// on-grid baseline

/// Orthogonal matching pursuit over the `grid_n x grid_m` dictionary of
/// compressed 2-D atoms. Stops at `max_atoms` or when the residual falls below
/// `1e-8·‖Y‖_F`.
pub fn cs_grid_baseline(
    y: &ComplexMatrix,
    op: &CompressionOperator,
    grid_n: usize,
    grid_m: usize,
    max_atoms: usize,
) -> Result<SourceSpectrum> {
    check_op(y, op)?;
    if grid_n < 2 || grid_m < 2 {
        return Err(Error::Domain("grid needs at least 2 points per dimension".into()));
    }
    let (n, m) = op.input_dims();
    let norm_y = y.frobenius_norm();
    if norm_y == 0.0 || max_atoms == 0 {
        return Ok(SourceSpectrum::new(vec![]));
    }
    let cols_x: Vec<ComplexMatrix> = (0..grid_n)
        .map(|i| op.cx().matmul(&steer(n, i as f64 / grid_n as f64)))
        .collect();
    let cols_y: Vec<ComplexMatrix> = (0..grid_m)
        .map(|j| op.cy().matmul(&steer(m, j as f64 / grid_m as f64)))
        .collect();
    let atoms: Vec<ComplexMatrix> = (0..grid_n * grid_m)
        .map(|g| cols_x[g % grid_n].matmul_adjoint(&cols_y[g / grid_n]))
        .collect();
    let norms: Vec<f64> = atoms.iter().map(|a| a.frobenius_norm()).collect();

    let target = ComplexMatrix::column_vector(y.as_slice().to_vec());
    let mut selected: Vec<usize> = Vec::new();
    let mut coef = ComplexMatrix::zeros(0, 1);
    let mut residual = y.clone();
    while selected.len() < max_atoms.min(atoms.len()) && residual.frobenius_norm() > 1e-8 * norm_y {
        let best = (0..atoms.len())
            .filter(|g| !selected.contains(g) && norms[*g] > 0.0)
            .map(|g| (g, atoms[g].inner(&residual).norm() / norms[g]))
            .max_by(|a, b| a.1.total_cmp(&b.1).then(b.0.cmp(&a.0)));
        let Some((g, _)) = best else { break };
        selected.push(g);
        let dict = ComplexMatrix::from_fn(y.rows() * y.cols(), selected.len(), |r, k| atoms[selected[k]].as_slice()[r]);
        coef = pseudo_inverse(&dict, DEFAULT_RCOND)?.matmul(&target);
        let fit = dict.matmul(&coef);
        residual = ComplexMatrix::from_fn(y.rows(), y.cols(), |a, b| {
            let k = a + y.rows() * b;
            y.as_slice()[k] - fit.as_slice()[k]
        });
    }
    let sources = selected
        .iter()
        .enumerate()
        .map(|(k, &g)| Source {
            amplitude: coef[(k, 0)],
            freq: FrequencyPair::wrapped((g % grid_n) as f64 / grid_n as f64, (g / grid_n) as f64 / grid_m as f64),
        })
        .collect();
    Ok(SourceSpectrum::new(sources))
}

fn steer(n: usize, f: f64) -> ComplexMatrix {
    crate::model::steering_vector(n, f).expect("grid frequency in [0, 1)")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compression::{make_operator, CompressionKind};
    use crate::linalg::hermitian_eigenvalues;
    use crate::model::{atom, synthesize};
    use crate::toeplitz::DEFAULT_RANK_TOL;

    fn opts() -> SolverOptions {
        SolverOptions::default()
    }

    fn two_sources() -> SourceSpectrum {
        SourceSpectrum::new(vec![
            Source { amplitude: ONE, freq: FrequencyPair::new(0.1, 0.2).unwrap() },
            Source { amplitude: ONE, freq: FrequencyPair::new(0.6, 0.8).unwrap() },
        ])
    }

    fn numerical_rank(t: &HermitianToeplitz) -> usize {
        let ev = hermitian_eigenvalues(&t.materialize()).unwrap();
        let top = ev.iter().copied().fold(0.0, f64::max);
        ev.iter().filter(|&&v| v > DEFAULT_RANK_TOL * top).count()
    }

    #[test]
    fn zero_input_gives_zero() {
        let r = danm_exact(&ComplexMatrix::zeros(4, 5), &opts()).unwrap();
        assert_eq!(r.atomic_norm_value, 0.0);
        assert_eq!(r.ux, HermitianToeplitz::zeros(4));
        assert_eq!(r.uy, HermitianToeplitz::zeros(5));
        let v = vanm_exact(&ComplexMatrix::zeros(4, 4), &opts(), DEFAULT_VANM_CAP).unwrap();
        assert_eq!(v.atomic_norm_value, 0.0);
    }

    #[test]
    fn single_atom_norm() {
        let x = atom(8, 8, FrequencyPair::new(0.2, 0.7).unwrap()).scale_real(3.0);
        let r = danm_exact(&x, &opts()).unwrap();
        assert!((r.atomic_norm_value - 3.0).abs() < 1e-6, "{}", r.atomic_norm_value);
        assert_eq!(r.solver.status, SolveStatus::Optimal);
        // value identity on the witnesses
        let direct = (r.ux.trace() + r.uy.trace()) / (2.0 * 8.0);
        assert!((direct - r.atomic_norm_value).abs() < 1e-10);
    }

    #[test]
    fn two_atoms_norm_and_ranks() {
        let x = synthesize(&two_sources(), 16, 16).unwrap();
        let r = danm_exact(&x, &opts()).unwrap();
        assert!((r.atomic_norm_value - 2.0).abs() < 1e-5, "{}", r.atomic_norm_value);
        assert_eq!(numerical_rank(&r.ux), 2);
        assert_eq!(numerical_rank(&r.uy), 2);
        // the block matrix is PSD
        let sol = r.solution.unwrap();
        let ev = hermitian_eigenvalues(&sol.psd_matrix.hermitian_part()).unwrap();
        assert!(ev.iter().all(|&v| v > -1e-7));
    }

    #[test]
    fn vectorized_matches_decoupled() {
        let single = atom(8, 8, FrequencyPair::new(0.2, 0.7).unwrap());
        let pair = synthesize(&two_sources(), 8, 8).unwrap();
        for x in [single, pair] {
            let d = danm_exact(&x, &opts()).unwrap().atomic_norm_value;
            let v = vanm_exact(&x, &opts(), DEFAULT_VANM_CAP).unwrap().atomic_norm_value;
            assert!((d - v).abs() <= 1e-5 * d, "danm {d} vanm {v}");
        }
    }

    #[test]
    fn vectorized_size_guard() {
        let x = ComplexMatrix::identity(8);
        assert!(matches!(vanm_exact(&x, &opts(), 32), Err(Error::TooLarge(_))));
    }

    #[test]
    fn mmv_single_atom() {
        let x = atom(8, 8, FrequencyPair::new(0.2, 0.7).unwrap());
        let r = mmv_decoupled(&x, &opts()).unwrap();
        assert!((r.norm_x - 8f64.sqrt()).abs() < 1e-5, "{}", r.norm_x);
        assert!((r.norm_y - 8f64.sqrt()).abs() < 1e-5, "{}", r.norm_y);
        let fx = crate::toeplitz::vandermonde_decompose_1l(&r.ux, DEFAULT_RANK_TOL).unwrap();
        let fy = crate::toeplitz::vandermonde_decompose_1l(&r.uy, DEFAULT_RANK_TOL).unwrap();
        assert_eq!(fx.freqs.len(), 1);
        assert!((fx.freqs[0] - 0.2).abs() < 1e-6 && (fy.freqs[0] - 0.7).abs() < 1e-6);
    }

    #[test]
    fn mmv_lower_bounds_decoupled() {
        let x = synthesize(&two_sources(), 16, 16).unwrap();
        let d = danm_exact(&x, &opts()).unwrap().atomic_norm_value;
        let mm = mmv_decoupled(&x, &opts()).unwrap();
        assert!(d >= mm.norm_x / 4.0 - 1e-5);
        assert!((d - mm.norm_x / 4.0).abs() < 1e-5);
    }

    #[test]
    fn denoise_limits() {
        let x = synthesize(&two_sources(), 8, 8).unwrap();
        let op = CompressionOperator::identity(8, 8);
        for kind in [sdp::SolverKind::Ipm, sdp::SolverKind::Admm] {
            let o = opts().with_kind(kind);
            let small = danm_denoise(&x, &op, 1e-6, &o).unwrap();
            assert!((&small.x_hat - &x).frobenius_norm() <= 1e-3 * x.frobenius_norm());
            let big = danm_denoise(&x, &op, 10.0 * x.frobenius_norm() * 8.0, &o).unwrap();
            assert!(big.x_hat.frobenius_norm() <= 1e-3 * x.frobenius_norm(), "{kind:?}");
        }
    }

    #[test]
    fn denoise_solvers_agree() {
        let x = synthesize(&two_sources(), 8, 8).unwrap();
        let (y, _) = crate::model::add_noise(&x, 10.0, 3).unwrap();
        let op = CompressionOperator::identity(8, 8);
        let a = danm_denoise(&y, &op, 2.0, &opts()).unwrap();
        let b = danm_denoise(&y, &op, 2.0, &opts().with_kind(sdp::SolverKind::Admm)).unwrap();
        let rel = (a.solver.primal_objective - b.solver.primal_objective).abs() / a.solver.primal_objective;
        assert!(rel < 1e-4, "{rel}");
        assert!((&a.x_hat - &b.x_hat).frobenius_norm() < 1e-2 * a.x_hat.frobenius_norm());
    }

    #[test]
    fn compressed_exact_recovers_signal() {
        let x = synthesize(&two_sources(), 12, 12).unwrap();
        let op = make_operator(CompressionKind::Gaussian, 12, 12, 8, 8, 4).unwrap();
        let y = op.apply(&x).unwrap();
        let r = danm_compressed_exact(&y, &op, &opts()).unwrap();
        assert!((&r.x_hat - &x).frobenius_norm() < 1e-4 * x.frobenius_norm());
        assert!((r.atomic_norm_value - 2.0).abs() < 1e-5);
    }

    #[test]
    fn compressed_denoise_with_identity_matches_plain() {
        let x = synthesize(&two_sources(), 6, 6).unwrap();
        let sel = CompressionOperator::row_select(6, 6, &[0, 1, 2, 3, 4, 5], &[0, 1, 2, 3, 4, 5]).unwrap();
        let a = danm_denoise(&x, &sel, 0.5, &opts()).unwrap();
        let b = danm_denoise(&x, &CompressionOperator::identity(6, 6), 0.5, &opts()).unwrap();
        assert!((a.solver.primal_objective - b.solver.primal_objective).abs() < 1e-6);
    }

    #[test]
    fn vanm_denoise_runs() {
        let x = synthesize(&two_sources(), 6, 6).unwrap();
        let op = CompressionOperator::identity(6, 6);
        let r = vanm_denoise(&x, &op, 1e-6, &opts(), DEFAULT_VANM_CAP).unwrap();
        assert!((&r.x_hat - &x).frobenius_norm() <= 1e-3 * x.frobenius_norm());
    }

    #[test]
    fn cs_baseline_cases() {
        let op = CompressionOperator::identity(16, 16);
        let on = atom(16, 16, FrequencyPair::new(0.25, 0.5).unwrap());
        let r = cs_grid_baseline(&on, &op, 16, 16, 4).unwrap();
        assert_eq!(r.len(), 1);
        assert!((r.sources[0].freq.fx - 0.25).abs() < 1e-12 && (r.sources[0].freq.fy - 0.5).abs() < 1e-12);
        assert!((r.sources[0].amplitude - ONE).norm() < 1e-10);

        let off = atom(16, 16, FrequencyPair::new(0.2571, 0.5113).unwrap());
        let r = cs_grid_baseline(&off, &op, 16, 16, 1).unwrap();
        assert_eq!(r.len(), 1);
        assert!((r.sources[0].freq.fx - 0.25).abs() < 1e-12 && (r.sources[0].freq.fy - 0.5).abs() < 1e-12);

        assert!(cs_grid_baseline(&ComplexMatrix::zeros(16, 16), &op, 16, 16, 4).unwrap().is_empty());
    }
}
