//! Primal–dual interior point method (Nesterov–Todd scaling, Mehrotra
//! predictor–corrector) on the complex Hermitian PSD cone.
//!
//! The iterate keeps `S = F0 + F(θ)` exactly, so a strictly feasible start
//! keeps every iterate primal feasible; with a dual feasible start the dual
//! residual contracts by `(1 − α)` per step and weak duality
//! `primal − dual = ⟨S, Z⟩ ≥ 0` holds throughout.

use faer::linalg::solvers::Solve;
use faer::{Mat, Side};

use super::{dot, norm2, IterateRecord, SdpProblem, SdpSolution, SolveStatus, SolverOptions};
use crate::error::{Error, Result};
use crate::linalg::{cholesky, hermitian_eigenvalues, svd, ComplexMatrix, C64};

/// Fraction of the distance to the cone boundary taken per step.
const STEP_FRACTION: f64 = 0.98;

struct SpdFactor {
    llt: faer::linalg::solvers::Llt<f64>,
    n: usize,
}

impl SpdFactor {
    /// Cholesky of a symmetric matrix; a growing diagonal shift rescues
    /// matrices that lost definiteness to rounding.
    fn new(m: &[f64], n: usize) -> Result<Self> {
        let scale = (0..n).map(|i| m[i * n + i].abs()).fold(0.0, f64::max).max(1e-300);
        let mut shift = 0.0;
        for _ in 0..8 {
            let mat = Mat::from_fn(n, n, |i, j| m[i * n + j] + if i == j { shift } else { 0.0 });
            if let Ok(llt) = mat.llt(Side::Lower) {
                return Ok(Self { llt, n });
            }
            shift = if shift == 0.0 { 1e-13 * scale } else { shift * 100.0 };
        }
        Err(Error::Numerical("Schur complement matrix is not positive definite".into()))
    }

    fn solve(&self, b: &[f64]) -> Vec<f64> {
        let rhs = Mat::from_fn(self.n, 1, |i, _| b[i]);
        let x = self.llt.solve(&rhs);
        (0..self.n).map(|i| x[(i, 0)]).collect()
    }
}

/// Nesterov–Todd scaling `R` with `R^{-1} S R^{-H} = R^H Z R = Λ`.
struct Scaling {
    rinv: ComplexMatrix,
    lambda: Vec<f64>,
}

fn nt_scaling(s: &ComplexMatrix, z: &ComplexMatrix) -> Result<Scaling> {
    let ls = cholesky(s).map_err(|_| Error::Numerical("primal iterate left the cone".into()))?;
    let lz = cholesky(z).map_err(|_| Error::Numerical("dual iterate left the cone".into()))?;
    let dec = svd(&lz.adjoint_matmul(&ls))?;
    let n = s.rows();
    let inv_sqrt: Vec<f64> = dec.s.iter().map(|&x| 1.0 / x.max(1e-300).sqrt()).collect();
    // R = L_s V Σ^{-1/2} is never formed; only R^{-1} = Σ^{-1/2} U^H L_z^H
    let us = ComplexMatrix::from_fn(n, n, |i, j| dec.u[(i, j)] * inv_sqrt[j]);
    let rinv = us.adjoint().matmul(&lz.adjoint());
    Ok(Scaling { rinv, lambda: dec.s })
}

/// Largest `α` with `Λ + α·Δ ⪰ 0` (infinite if Δ ⪰ 0).
fn max_step(lambda: &[f64], delta: &ComplexMatrix) -> Result<f64> {
    let n = lambda.len();
    let is: Vec<f64> = lambda.iter().map(|l| 1.0 / l.sqrt()).collect();
    let m = ComplexMatrix::from_fn(n, n, |i, j| delta[(i, j)] * (is[i] * is[j])).hermitian_part();
    let ev = hermitian_eigenvalues(&m)?;
    let min = *ev.last().unwrap_or(&0.0);
    Ok(if min < 0.0 { -1.0 / min } else { f64::INFINITY })
}

struct Directions {
    theta: Vec<f64>,
    y: Vec<f64>,
    z: ComplexMatrix,
    s_tilde: ComplexMatrix,
    z_tilde: ComplexMatrix,
}

struct Kkt<'a> {
    p: &'a SdpProblem,
    factor: SpdFactor,
    /// `M^{-1} Aᵀ` columns and the factor of `A M^{-1} Aᵀ`.
    eq: Option<(Vec<Vec<f64>>, SpdFactor)>,
    scaling: &'a Scaling,
}

impl<'a> Kkt<'a> {
    fn new(p: &'a SdpProblem, scaling: &'a Scaling, g: &ComplexMatrix) -> Result<Self> {
        let np = p.num_params();
        let mut m = p.structure.schur(g);
        if let Some(q) = &p.quadratic {
            for (mi, qi) in m.iter_mut().zip(q) {
                *mi += qi;
            }
        }
        let factor = SpdFactor::new(&m, np)?;
        let eq = match &p.equalities {
            None => None,
            Some(e) => {
                let meq = e.b.len();
                let cols: Vec<Vec<f64>> = (0..meq).map(|k| factor.solve(&e.a[k * np..(k + 1) * np])).collect();
                let mut s = vec![0.0; meq * meq];
                for i in 0..meq {
                    for j in 0..meq {
                        s[i * meq + j] = dot(&e.a[i * np..(i + 1) * np], &cols[j]);
                    }
                }
                Some((cols, SpdFactor::new(&s, meq)?))
            }
        };
        Ok(Self { p, factor, eq, scaling })
    }

    /// Solves the reduced system for scaled complementarity target `d`
    /// (`ΔS̃ + ΔZ̃ = d`).
    fn directions(&self, d: &ComplexMatrix, r_d: &[f64], r_p: &[f64]) -> Directions {
        let sc = self.scaling;
        let np = self.p.num_params();
        // R^{-H} d R^{-1}
        let back = sc.rinv.adjoint_matmul(&d.matmul(&sc.rinv));
        let fb = self.p.structure.adjoint(&back);
        let rhs: Vec<f64> = (0..np).map(|i| -r_d[i] + fb[i]).collect();
        let base = self.factor.solve(&rhs);
        let (theta, y) = match (&self.eq, &self.p.equalities) {
            (Some((cols, sfac)), Some(e)) => {
                let meq = e.b.len();
                let t: Vec<f64> = (0..meq).map(|k| -r_p[k] - dot(&e.a[k * np..(k + 1) * np], &base)).collect();
                let dy = sfac.solve(&t);
                let mut th = base;
                for (k, col) in cols.iter().enumerate() {
                    for i in 0..np {
                        th[i] += col[i] * dy[k];
                    }
                }
                (th, dy)
            }
            _ => (base, vec![]),
        };
        let ds = self.p.structure.apply(&theta);
        let s_tilde = sc.rinv.matmul(&ds).matmul_adjoint(&sc.rinv).hermitian_part();
        let z_tilde = (d - &s_tilde).hermitian_part();
        let z = sc.rinv.adjoint_matmul(&z_tilde.matmul(&sc.rinv)).hermitian_part();
        Directions { theta, y, z, s_tilde, z_tilde }
    }
}

pub(super) fn solve(p: &SdpProblem, opts: &SolverOptions) -> Result<SdpSolution> {
    let start = p
        .start
        .as_ref()
        .ok_or_else(|| Error::Solver("interior point method needs a strictly feasible start".into()))?;
    let np = p.num_params();
    let n = p.dim();
    let (eq_a, eq_b): (&[f64], &[f64]) = match &p.equalities {
        Some(e) => (&e.a, &e.b),
        None => (&[], &[]),
    };
    let meq = eq_b.len();

    let mut theta = start.theta.clone();
    let mut z = start.z.hermitian_part();
    let mut y = start.y.clone();
    let c_norm = 1.0 + norm2(&p.c);
    let b_norm = 1.0 + norm2(eq_b);
    let mut history = Vec::new();
    let mut status = SolveStatus::MaxIter;
    let mut iterations = 0;
    let mut rel_gap = f64::INFINITY;

    for iter in 0..=opts.max_iter {
        iterations = iter;
        let s = p.psd_map(&theta);
        let qt = p.quad_apply(&theta);
        let fz = p.structure.adjoint(&z);
        let mut r_d: Vec<f64> = (0..np).map(|i| p.c[i] + qt[i] - fz[i]).collect();
        for k in 0..meq {
            for i in 0..np {
                r_d[i] -= eq_a[k * np + i] * y[k];
            }
        }
        let r_p: Vec<f64> = (0..meq).map(|k| dot(&eq_a[k * np..(k + 1) * np], &theta) - eq_b[k]).collect();
        let pobj = p.primal_objective(&theta);
        let dobj = p.dual_objective(&theta, &z, &y);
        let compl = s.inner(&z).re;
        if opts.record_history {
            history.push(IterateRecord { primal: pobj, dual: dobj, complementarity: compl });
        }
        rel_gap = compl.max(pobj - dobj) / (1.0 + pobj.abs().max(dobj.abs()));
        let pres = norm2(&r_p) / b_norm;
        let dres = norm2(&r_d) / c_norm;
        if rel_gap <= opts.gap_tol && pres <= opts.feas_tol && dres <= opts.feas_tol {
            status = SolveStatus::Optimal;
            break;
        }
        if dobj > 1.0 / opts.feas_tol || pobj < -1.0 / opts.feas_tol {
            status = SolveStatus::Infeasible;
            break;
        }
        if iter == opts.max_iter {
            break;
        }

        let sc = match nt_scaling(&s, &z) {
            Ok(sc) => sc,
            Err(e) => {
                // numerical breakdown near the boundary: accept if close enough
                if rel_gap <= 10.0 * opts.gap_tol.max(1e-9) {
                    status = SolveStatus::Optimal;
                    break;
                }
                return Err(e);
            }
        };
        let g = sc.rinv.adjoint_matmul(&sc.rinv).hermitian_part();
        let kkt = match Kkt::new(p, &sc, &g) {
            Ok(k) => k,
            Err(e) => {
                if rel_gap <= 10.0 * opts.gap_tol.max(1e-9) {
                    status = SolveStatus::Optimal;
                    break;
                }
                return Err(e);
            }
        };
        let lam = &sc.lambda;
        let mu = lam.iter().map(|l| l * l).sum::<f64>() / n as f64;

        // predictor: drive Λ² to zero
        let d_aff = ComplexMatrix::diag_real(&lam.iter().map(|l| -l).collect::<Vec<_>>());
        let aff = kkt.directions(&d_aff, &r_d, &r_p);
        let a_p = max_step(lam, &aff.s_tilde)?;
        let a_d = max_step(lam, &aff.z_tilde)?;
        let a_aff = a_p.min(a_d).min(1.0);
        let lam_m = ComplexMatrix::diag_real(lam);
        let s_aff = &lam_m + &aff.s_tilde.scale_real(a_aff);
        let z_aff = &lam_m + &aff.z_tilde.scale_real(a_aff);
        let mu_aff = s_aff.inner(&z_aff).re / n as f64;
        let sigma = (mu_aff / mu).clamp(0.0, 1.0).powi(3);

        // corrector: Λ∘(ΔS̃+ΔZ̃) = σμI − Λ² − ΔS̃_a∘ΔZ̃_a
        let cross = aff.s_tilde.matmul(&aff.z_tilde);
        let d_cc = ComplexMatrix::from_fn(n, n, |i, j| {
            let sym = (cross[(i, j)] + cross[(j, i)].conj()) * 0.5;
            let mut rhs = -sym;
            if i == j {
                rhs += C64::new(sigma * mu - lam[i] * lam[i], 0.0);
            }
            rhs * (2.0 / (lam[i] + lam[j]))
        });
        let dir = kkt.directions(&d_cc, &r_d, &r_p);
        let a_p = max_step(lam, &dir.s_tilde)?;
        let a_d = max_step(lam, &dir.z_tilde)?;
        let alpha = (STEP_FRACTION * a_p.min(a_d)).min(1.0);

        for i in 0..np {
            theta[i] += alpha * dir.theta[i];
        }
        for k in 0..meq {
            y[k] += alpha * dir.y[k];
        }
        z = (&z + &dir.z.scale_real(alpha)).hermitian_part();
    }

    let psd_matrix = p.psd_map(&theta);
    Ok(SdpSolution {
        objective_value: p.primal_objective(&theta),
        dual_objective: p.dual_objective(&theta, &z, &y),
        params: theta,
        psd_matrix,
        dual_matrix: z,
        dual_eq: y,
        gap: rel_gap,
        iterations,
        status,
        history,
    })
}
