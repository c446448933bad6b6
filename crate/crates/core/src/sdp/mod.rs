//! Structured semidefinite programming.
//!
//! Problems have the form
//!
//! ```text
//! minimize    cᵀθ + ½ θᵀQθ + const
//! subject to  S = F0 + Σ θ_i F_i ⪰ 0,   Aθ = b
//! ```
//!
//! over real parameters θ, with complex Hermitian `F_i` described by a
//! [`Structure`]. Two algorithms are provided: a primal–dual interior point
//! method with Nesterov–Todd scaling and Mehrotra's predictor–corrector
//! ([`SolverKind::Ipm`]), which works directly on the complex Hermitian cone,
//! and ADMM with an eigenvalue-based PSD projection ([`SolverKind::Admm`]),
//! which is cheap per iteration for problems with a quadratic data term.
//!
//! The dual of the problem above is
//!
//! ```text
//! maximize   −⟨F0, Z⟩ + bᵀy − ½ θᵀQθ + const
//! subject to F^*(Z) + Aᵀy − Qθ = c,  Z ⪰ 0
//! ```
//!
//! and the solution reports `Z` as [`SdpSolution::dual_matrix`].

mod admm;
pub mod certificate;
mod fft;
mod ipm;
mod structure;

pub use certificate::{dual_certificate_scan, CertificatePeak, CertificateScan};
pub use structure::{ParamMap, ShiftBlock, Structure};

use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;

/// Which algorithm [`solve`] runs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolverKind {
    Ipm,
    Admm,
}

impl std::str::FromStr for SolverKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ipm" => Ok(SolverKind::Ipm),
            "admm" => Ok(SolverKind::Admm),
            other => Err(Error::Domain(format!("unknown solver '{other}' (expected ipm or admm)"))),
        }
    }
}

/// Tolerances and limits.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverOptions {
    pub kind: SolverKind,
    /// Relative duality gap for the interior point method.
    pub gap_tol: f64,
    /// Relative primal/dual residual for the interior point method.
    pub feas_tol: f64,
    /// Iteration cap for the interior point method.
    pub max_iter: usize,
    /// Relative primal/dual residual for ADMM.
    pub admm_tol: f64,
    /// Iteration cap for ADMM.
    pub admm_max_iter: usize,
    /// Initial ADMM penalty.
    pub admm_rho: f64,
    /// Keep the per-iterate objective history in the solution.
    pub record_history: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            kind: SolverKind::Ipm,
            gap_tol: 1e-7,
            feas_tol: 1e-8,
            max_iter: 300,
            admm_tol: 1e-6,
            admm_max_iter: 20_000,
            admm_rho: 1.0,
            record_history: false,
        }
    }
}

impl SolverOptions {
    pub fn with_kind(mut self, kind: SolverKind) -> Self {
        self.kind = kind;
        self
    }
}

/// Linear equality constraints `Aθ = b`, `A` row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Equalities {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

/// A strictly feasible starting point for the interior point method:
/// `F0 + F(θ) ≻ 0`, `Z ≻ 0`.
#[derive(Clone, Debug)]
pub struct StartPoint {
    pub theta: Vec<f64>,
    pub z: ComplexMatrix,
    pub y: Vec<f64>,
}

/// A structured SDP instance.
#[derive(Clone, Debug)]
pub struct SdpProblem {
    pub structure: Structure,
    pub f0: ComplexMatrix,
    pub c: Vec<f64>,
    /// Dense symmetric PSD `Q` (row-major), if any.
    pub quadratic: Option<Vec<f64>>,
    pub constant: f64,
    pub equalities: Option<Equalities>,
    pub start: Option<StartPoint>,
}

impl SdpProblem {
    pub fn new(structure: Structure, f0: ComplexMatrix, c: Vec<f64>) -> Result<Self> {
        let n = structure.dim();
        if f0.shape() != (n, n) {
            return Err(Error::Dimension(format!("F0 is {:?}, expected {n}x{n}", f0.shape())));
        }
        if !f0.is_hermitian(1e-12) {
            return Err(Error::NotHermitian(f0.hermitian_defect()));
        }
        if c.len() != structure.num_params() {
            return Err(Error::Dimension("objective length differs from parameter count".into()));
        }
        Ok(Self { structure, f0, c, quadratic: None, constant: 0.0, equalities: None, start: None })
    }

    pub fn with_quadratic(mut self, q: Vec<f64>, constant: f64) -> Result<Self> {
        let np = self.structure.num_params();
        if q.len() != np * np {
            return Err(Error::Dimension("quadratic term has the wrong size".into()));
        }
        self.quadratic = Some(q);
        self.constant = constant;
        Ok(self)
    }

    pub fn with_equalities(mut self, a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        if a.len() != b.len() * self.structure.num_params() {
            return Err(Error::Dimension("equality matrix has the wrong size".into()));
        }
        self.equalities = Some(Equalities { a, b });
        Ok(self)
    }

    pub fn with_start(mut self, start: StartPoint) -> Result<Self> {
        let np = self.structure.num_params();
        let m = self.equalities.as_ref().map_or(0, |e| e.b.len());
        if start.theta.len() != np || start.y.len() != m || start.z.shape() != self.f0.shape() {
            return Err(Error::Dimension("start point has the wrong shape".into()));
        }
        self.start = Some(start);
        Ok(self)
    }

    pub fn num_params(&self) -> usize {
        self.structure.num_params()
    }

    pub fn dim(&self) -> usize {
        self.structure.dim()
    }

    /// `F0 + F(θ)`.
    pub fn psd_map(&self, theta: &[f64]) -> ComplexMatrix {
        let mut s = self.f0.clone();
        self.structure.apply_into(theta, &mut s);
        s
    }

    pub(crate) fn quad_apply(&self, theta: &[f64]) -> Vec<f64> {
        let np = theta.len();
        match &self.quadratic {
            None => vec![0.0; np],
            Some(q) => (0..np).map(|i| (0..np).map(|j| q[i * np + j] * theta[j]).sum()).collect(),
        }
    }

    /// `cᵀθ + ½θᵀQθ + const`.
    pub fn primal_objective(&self, theta: &[f64]) -> f64 {
        let qt = self.quad_apply(theta);
        dot(&self.c, theta) + 0.5 * dot(&qt, theta) + self.constant
    }

    /// `−⟨F0, Z⟩ + bᵀy − ½θᵀQθ + const`.
    pub fn dual_objective(&self, theta: &[f64], z: &ComplexMatrix, y: &[f64]) -> f64 {
        let qt = self.quad_apply(theta);
        let by = self.equalities.as_ref().map_or(0.0, |e| dot(&e.b, y));
        -self.f0.inner(z).re + by - 0.5 * dot(&qt, theta) + self.constant
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Termination state.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    MaxIter,
    Infeasible,
}

impl SolveStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::MaxIter => "max_iter",
            SolveStatus::Infeasible => "infeasible",
        }
    }
}

/// Objective values at one iterate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IterateRecord {
    pub primal: f64,
    pub dual: f64,
    /// `⟨S, Z⟩` at the iterate.
    pub complementarity: f64,
}

/// Solver output.
#[derive(Clone, Debug)]
pub struct SdpSolution {
    pub params: Vec<f64>,
    /// `F0 + F(θ)` at the solution.
    pub psd_matrix: ComplexMatrix,
    pub objective_value: f64,
    pub dual_objective: f64,
    /// Dual variable `Z` of the PSD constraint.
    pub dual_matrix: ComplexMatrix,
    pub dual_eq: Vec<f64>,
    /// Relative duality gap at termination.
    pub gap: f64,
    pub iterations: usize,
    pub status: SolveStatus,
    pub history: Vec<IterateRecord>,
}

/// Solves `p` with the algorithm selected in `opts`.
pub fn solve(p: &SdpProblem, opts: &SolverOptions) -> Result<SdpSolution> {
    if p.dim() == 0 {
        return Err(Error::Dimension("empty PSD constraint".into()));
    }
    match opts.kind {
        SolverKind::Ipm => ipm::solve(p, opts),
        SolverKind::Admm => {
            if p.equalities.is_some() {
                return Err(Error::Solver("ADMM path does not handle equality constraints".into()));
            }
            admm::solve(p, opts)
        }
    }
}
