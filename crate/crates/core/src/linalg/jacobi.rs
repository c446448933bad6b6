//! Cyclic Jacobi eigensolver for complex Hermitian matrices.
//!
//! Slow (O(n³) per sweep with a modest number of sweeps) but simple and
//! accurate; the crate uses it as an independent reference for the
//! LAPACK-style solver behind [`super::hermitian_eig`].

use super::{check_hermitian, ComplexMatrix, EigenDecomposition, C64};
use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 100;

/// Hermitian eigendecomposition by cyclic Jacobi rotations, eigenvalues
/// descending.
pub fn hermitian_eig_jacobi(a: &ComplexMatrix) -> Result<EigenDecomposition> {
    check_hermitian(a)?;
    let n = a.rows();
    let mut m = a.hermitian_part();
    let mut v = ComplexMatrix::identity(n);
    let scale = m.frobenius_norm().max(f64::MIN_POSITIVE);

    let mut converged = n <= 1;
    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|j| (0..n).filter(move |&i| i != j).map(move |i| (i, j)))
            .map(|(i, j)| m[(i, j)].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * scale {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                rotate(&mut m, &mut v, p, q);
            }
        }
    }
    if !converged {
        return Err(Error::Numerical("Jacobi sweeps did not converge".into()));
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(j, j)].re.total_cmp(&m[(i, i)].re));
    Ok(EigenDecomposition {
        values: order.iter().map(|&k| m[(k, k)].re).collect(),
        vectors: v.select_cols(&order),
    })
}

/// Annihilates `m[p,q]` with the unitary `J` acting on rows/columns p, q:
/// `m <- J^H m J`, `v <- v J`.
fn rotate(m: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize) {
    let apq = m[(p, q)];
    let mag = apq.norm();
    if mag < 1e-300 {
        return;
    }
    let app = m[(p, p)].re;
    let aqq = m[(q, q)].re;
    // e^{iφ} = apq/|apq|; τ and t follow the real symmetric Jacobi rule
    let phase = apq / mag;
    let tau = (aqq - app) / (2.0 * mag);
    let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
    let c = 1.0 / (1.0 + t * t).sqrt();
    // J = [[c, s·e^{iφ}], [−s·e^{−iφ}, c]] on the (p, q) plane
    let cp = C64::new(c, 0.0);
    let sp = phase * (t * c);
    let n = m.rows();
    // m <- m J (columns)
    for i in 0..n {
        let mip = m[(i, p)];
        let miq = m[(i, q)];
        m[(i, p)] = mip * cp - miq * sp.conj();
        m[(i, q)] = mip * sp + miq * cp;
    }
    // m <- J^H m (rows)
    for j in 0..n {
        let mpj = m[(p, j)];
        let mqj = m[(q, j)];
        m[(p, j)] = mpj * cp - mqj * sp;
        m[(q, j)] = mpj * sp.conj() + mqj * cp;
    }
    m[(p, q)] = C64::new(0.0, 0.0);
    m[(q, p)] = C64::new(0.0, 0.0);
    m[(p, p)] = C64::new(m[(p, p)].re, 0.0);
    m[(q, q)] = C64::new(m[(q, q)].re, 0.0);
    for i in 0..n {
        let vip = v[(i, p)];
        let viq = v[(i, q)];
        v[(i, p)] = vip * cp - viq * sp.conj();
        v[(i, q)] = vip * sp + viq * cp;
    }
}
