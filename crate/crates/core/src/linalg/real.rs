//! Small real dense helpers: SPD solves and nonnegative least squares.

use faer::linalg::solvers::Solve;
use faer::{Mat, Side};

use crate::error::{Error, Result};

/// Solves `G x = b` for symmetric positive definite `G` (row-major `n x n`).
pub fn solve_spd(g: &[f64], b: &[f64]) -> Result<Vec<f64>> {
    let n = b.len();
    if g.len() != n * n {
        return Err(Error::Dimension("solve_spd: matrix/vector size mismatch".into()));
    }
    if n == 0 {
        return Ok(vec![]);
    }
    let gm = Mat::from_fn(n, n, |i, j| g[i * n + j]);
    let llt = gm
        .llt(Side::Lower)
        .map_err(|e| Error::Numerical(format!("system not positive definite: {e:?}")))?;
    let rhs = Mat::from_fn(n, 1, |i, _| b[i]);
    let x = llt.solve(&rhs);
    Ok((0..n).map(|i| x[(i, 0)]).collect())
}

/// Nonnegative least squares in normal-equation form:
/// `min ½ dᵀ G d − bᵀ d` subject to `d ≥ 0`, with `G` symmetric PSD
/// (row-major). Lawson–Hanson active-set iteration.
pub fn nnls_gram(g: &[f64], b: &[f64]) -> Result<Vec<f64>> {
    let n = b.len();
    if g.len() != n * n {
        return Err(Error::Dimension("nnls: matrix/vector size mismatch".into()));
    }
    let scale = g.iter().fold(0.0_f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
    let tol = 1e-12 * scale * b.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
    let mut d = vec![0.0; n];
    let mut passive = vec![false; n];

    let restricted = |passive: &[bool]| -> Result<Vec<f64>> {
        let idx: Vec<usize> = (0..n).filter(|&i| passive[i]).collect();
        let k = idx.len();
        let mut sub = vec![0.0; k * k];
        for (a, &i) in idx.iter().enumerate() {
            for (c, &j) in idx.iter().enumerate() {
                sub[a * k + c] = g[i * n + j];
            }
            // tiny ridge keeps nearly collinear atoms solvable
            sub[a * k + a] += 1e-14 * scale;
        }
        let rhs: Vec<f64> = idx.iter().map(|&i| b[i]).collect();
        let z = solve_spd(&sub, &rhs)?;
        let mut full = vec![0.0; n];
        for (a, &i) in idx.iter().enumerate() {
            full[i] = z[a];
        }
        Ok(full)
    };

    for _ in 0..3 * n + 10 {
        let w: Vec<f64> = (0..n).map(|i| b[i] - (0..n).map(|j| g[i * n + j] * d[j]).sum::<f64>()).collect();
        let candidate = (0..n).filter(|&i| !passive[i] && w[i] > tol).max_by(|&i, &j| w[i].total_cmp(&w[j]));
        let Some(t) = candidate else { break };
        passive[t] = true;
        loop {
            let z = restricted(&passive)?;
            if (0..n).filter(|&i| passive[i]).all(|i| z[i] > 0.0) {
                d = z;
                break;
            }
            // step back towards z until a passive coordinate hits zero
            let mut alpha = 1.0_f64;
            for i in (0..n).filter(|&i| passive[i] && z[i] <= 0.0) {
                alpha = alpha.min(d[i] / (d[i] - z[i]));
            }
            for i in 0..n {
                d[i] += alpha * (z[i] - d[i]);
                if passive[i] && d[i] <= 1e-15 * scale {
                    passive[i] = false;
                    d[i] = 0.0;
                }
            }
            if !passive.iter().any(|&p| p) {
                break;
            }
        }
    }
    Ok(d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spd_solve() {
        let g = [4.0, 1.0, 1.0, 3.0];
        let x = solve_spd(&g, &[1.0, 2.0]).unwrap();
        assert!((4.0 * x[0] + x[1] - 1.0).abs() < 1e-14);
        assert!((x[0] + 3.0 * x[1] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn nnls_interior_and_clamped() {
        let g = [2.0, 0.0, 0.0, 1.0];
        let d = nnls_gram(&g, &[4.0, 3.0]).unwrap();
        assert!((d[0] - 2.0).abs() < 1e-12 && (d[1] - 3.0).abs() < 1e-12);
        let d = nnls_gram(&g, &[4.0, -3.0]).unwrap();
        assert!((d[0] - 2.0).abs() < 1e-12 && d[1] == 0.0);
        // coupled case: unconstrained optimum has a negative entry
        let g = [1.0, 0.9, 0.9, 1.0];
        let d = nnls_gram(&g, &[1.0, 0.5]).unwrap();
        assert!((d[0] - 1.0).abs() < 1e-12 && d[1] == 0.0);
    }
}
