//! ADMM for structured SDPs with an optional quadratic term.
//!
//! Splitting `F0 + F(θ) = W`, `W ⪰ 0`, the iteration alternates
//!
//! * θ-step: `(Q + ρ·Gram) θ = −c − F^*(Λ) − ρ F^*(F0 − W)`,
//! * W-step: `W = Π_PSD(F0 + F(θ) + Λ/ρ)` (eigenvalue clipping),
//! * multiplier step: `Λ += ρ (F0 + F(θ) − W)`,
//!
//! with over-relaxation and residual balancing of ρ. The Gram matrix of the
//! parameter maps is diagonal for every problem built by this crate, in which
//! case the θ-step is elementwise; otherwise a dense Cholesky factor is kept
//! and refreshed whenever ρ changes. At convergence `Z = −Λ` is the dual
//! matrix of the PSD constraint.

use faer::linalg::solvers::Solve;
use faer::{Mat, Side};

use super::{norm2, IterateRecord, SdpProblem, SdpSolution, SolveStatus, SolverOptions};
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eig_unchecked, ComplexMatrix};

const RELAXATION: f64 = 1.6;
const RHO_UPDATE_EVERY: usize = 25;
const RHO_BALANCE: f64 = 10.0;
const RHO_FACTOR: f64 = 2.0;

enum ThetaSolver {
    Diagonal(Vec<f64>),
    Dense(faer::linalg::solvers::Llt<f64>),
}

impl ThetaSolver {
    fn new(q: Option<&[f64]>, gram: &[f64], rho: f64, np: usize) -> Result<Self> {
        let diagonal = (0..np).all(|i| {
            (0..np).all(|j| i == j || (gram[i * np + j] == 0.0 && q.map_or(true, |q| q[i * np + j] == 0.0)))
        });
        if diagonal {
            let d = (0..np)
                .map(|i| rho * gram[i * np + i] + q.map_or(0.0, |q| q[i * np + i]))
                .collect::<Vec<_>>();
            if d.iter().any(|&x| x <= 0.0) {
                return Err(Error::Solver("parameter map is not injective".into()));
            }
            return Ok(ThetaSolver::Diagonal(d));
        }
        let m = Mat::from_fn(np, np, |i, j| rho * gram[i * np + j] + q.map_or(0.0, |q| q[i * np + j]));
        let llt = m
            .llt(Side::Lower)
            .map_err(|_| Error::Solver("parameter map is not injective".into()))?;
        Ok(ThetaSolver::Dense(llt))
    }

    fn solve(&self, b: &[f64]) -> Vec<f64> {
        match self {
            ThetaSolver::Diagonal(d) => b.iter().zip(d).map(|(x, d)| x / d).collect(),
            ThetaSolver::Dense(llt) => {
                let rhs = Mat::from_fn(b.len(), 1, |i, _| b[i]);
                let x = llt.solve(&rhs);
                (0..b.len()).map(|i| x[(i, 0)]).collect()
            }
        }
    }
}

/// Projection onto the PSD cone by clipping negative eigenvalues.
pub(crate) fn project_psd(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    let e = hermitian_eig_unchecked(&a.hermitian_part())?;
    let n = a.rows();
    let keep = e.values.iter().take_while(|&&v| v > 0.0).count();
    if keep == 0 {
        return Ok(ComplexMatrix::zeros(n, n));
    }
    let v = e.vectors.submatrix(0, 0, n, keep);
    let vs = ComplexMatrix::from_fn(n, keep, |i, j| v[(i, j)] * e.values[j]);
    Ok(vs.matmul_adjoint(&v).hermitian_part())
}

pub(super) fn solve(p: &SdpProblem, opts: &SolverOptions) -> Result<SdpSolution> {
    let np = p.num_params();
    let gram = p.structure.gram();
    let q = p.quadratic.as_deref();
    let mut rho = opts.admm_rho;
    let mut solver = ThetaSolver::new(q, &gram, rho, np)?;

    let mut theta = p.start.as_ref().map_or_else(|| vec![0.0; np], |s| s.theta.clone());
    let mut w = project_psd(&p.psd_map(&theta))?;
    let mut lam = ComplexMatrix::zeros(p.dim(), p.dim());
    let c_scale = 1.0 + norm2(&p.c);
    let mut history = Vec::new();
    let mut status = SolveStatus::MaxIter;
    let mut iterations = opts.admm_max_iter;

    for iter in 0..opts.admm_max_iter {
        // θ-step
        let f0w = &p.f0 - &w;
        let mut target = f0w.scale_real(rho);
        target += &lam;
        let ft = p.structure.adjoint(&target);
        let rhs: Vec<f64> = (0..np).map(|i| -p.c[i] - ft[i]).collect();
        theta = solver.solve(&rhs);
        let m_theta = p.psd_map(&theta);

        // W-step with over-relaxation
        let relaxed = &m_theta.scale_real(RELAXATION) + &w.scale_real(1.0 - RELAXATION);
        let w_prev = w;
        w = project_psd(&(&relaxed + &lam.scale_real(1.0 / rho)))?;
        lam += &(&relaxed - &w).scale_real(rho);

        let r_prim = (&m_theta - &w).frobenius_norm();
        let r_dual = rho * norm2(&p.structure.adjoint(&(&w - &w_prev)));
        let eps_prim = opts.admm_tol * (1.0 + m_theta.frobenius_norm().max(w.frobenius_norm()));
        let eps_dual = opts.admm_tol * (c_scale + norm2(&p.structure.adjoint(&lam)));
        if opts.record_history {
            let z = lam.scale_real(-1.0);
            history.push(IterateRecord {
                primal: p.primal_objective(&theta),
                dual: p.dual_objective(&theta, &z, &[]),
                complementarity: w.inner(&z).re,
            });
        }
        if r_prim <= eps_prim && r_dual <= eps_dual {
            status = SolveStatus::Optimal;
            iterations = iter + 1;
            break;
        }
        if (iter + 1) % RHO_UPDATE_EVERY == 0 {
            let rp = r_prim / eps_prim;
            let rd = r_dual / eps_dual;
            let new_rho = if rp > RHO_BALANCE * rd {
                rho * RHO_FACTOR
            } else if rd > RHO_BALANCE * rp {
                rho / RHO_FACTOR
            } else {
                rho
            };
            if new_rho != rho {
                rho = new_rho;
                solver = ThetaSolver::new(q, &gram, rho, np)?;
            }
        }
    }

    let z = lam.scale_real(-1.0).hermitian_part();
    let psd_matrix = p.psd_map(&theta);
    let pobj = p.primal_objective(&theta);
    let dobj = p.dual_objective(&theta, &z, &[]);
    Ok(SdpSolution {
        gap: (pobj - dobj).abs() / (1.0 + pobj.abs().max(dobj.abs())),
        objective_value: pobj,
        dual_objective: dobj,
        params: theta,
        psd_matrix,
        dual_matrix: z,
        dual_eq: vec![],
        iterations,
        status,
        history,
    })
}
