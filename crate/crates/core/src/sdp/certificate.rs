//! Dual polynomial of the decoupled atomic norm problem.
//!
//! For the PSD matrix `[[T(u_y), X^H], [X, T(u_x)]]` with dual variable
//! `Z = [[Z11, Z12], [Z21, Z22]]`, the matrix `Q = −2·Z21` satisfies
//! `Re⟨Q, X⟩ = dual objective` and defines the polynomial
//! `Q(f) = ⟨Q, a_N(f_x) a_M(f_y)^H⟩ = a_N(f_x)^H Q a_M(f_y)`. Dual
//! feasibility bounds `|Q(f)| ≤ 1`; on a certified support `|Q(f_l)| = 1`.

use std::f64::consts::PI;

use super::SdpSolution;
use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, C64};
use crate::model::{wrap_distance, wrap_unit, FrequencyPair};

/// Local maxima within this distance of one count as support.
pub const SUPPORT_LEVEL: f64 = 1.0 - 1e-3;

/// A local maximum of `|Q(f)|`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CertificatePeak {
    pub freq: FrequencyPair,
    pub value: f64,
}

/// Result of scanning the dual polynomial.
#[derive(Clone, Debug, PartialEq)]
pub struct CertificateScan {
    /// Refined local maxima with `|Q| ≥ 1 − 1e-3`, strongest first.
    pub peaks: Vec<CertificatePeak>,
    /// Largest refined local maximum below the support level (0 if none).
    pub off_support_max: f64,
    /// Largest value found anywhere (grid and refinement).
    pub global_max: f64,
}

/// Extracts `Q = −2·Z21` from a decoupled-problem dual matrix.
pub fn certificate_matrix(sol: &SdpSolution, n: usize, m: usize) -> Result<ComplexMatrix> {
    let z = &sol.dual_matrix;
    if z.shape() != (n + m, n + m) {
        return Err(Error::Dimension(format!(
            "dual matrix is {:?}, expected {}x{}",
            z.shape(),
            n + m,
            n + m
        )));
    }
    Ok(z.submatrix(m, 0, n, m).scale_real(-2.0))
}

/// `Q(f) = a_N(f_x)^H Q a_M(f_y)`.
pub fn evaluate(q: &ComplexMatrix, fx: f64, fy: f64) -> C64 {
    let (n, m) = q.shape();
    let mut acc = C64::new(0.0, 0.0);
    for b in 0..m {
        let eb = C64::from_polar(1.0, 2.0 * PI * fy * b as f64);
        let mut col = C64::new(0.0, 0.0);
        for a in 0..n {
            col += C64::from_polar(1.0, -2.0 * PI * fx * a as f64) * q[(a, b)];
        }
        acc += col * eb;
    }
    acc
}

/// Evaluates `|Q(f)|` on a `grid x grid` lattice, refines every local maximum
/// by pattern search, and classifies the maxima.
pub fn dual_certificate_scan(sol: &SdpSolution, n: usize, m: usize, grid: usize) -> Result<CertificateScan> {
    let q = certificate_matrix(sol, n, m)?;
    scan_polynomial(&q, grid)
}

/// As [`dual_certificate_scan`] for an explicit coefficient matrix.
pub fn scan_polynomial(q: &ComplexMatrix, grid: usize) -> Result<CertificateScan> {
    if grid < 3 {
        return Err(Error::Domain("certificate grid needs at least 3 points per axis".into()));
    }
    let (n, m) = q.shape();
    let step = 1.0 / grid as f64;
    // B[a, gy] = Σ_b Q[a,b] e^{j2π gy b / grid}
    let mut bmat = vec![C64::new(0.0, 0.0); n * grid];
    for gy in 0..grid {
        for b in 0..m {
            let e = C64::from_polar(1.0, 2.0 * PI * (gy * b % grid) as f64 * step);
            for a in 0..n {
                bmat[a + n * gy] += q[(a, b)] * e;
            }
        }
    }
    let mut vals = vec![0.0; grid * grid];
    for gx in 0..grid {
        let ex: Vec<C64> = (0..n).map(|a| C64::from_polar(1.0, -2.0 * PI * (gx * a % grid) as f64 * step)).collect();
        for gy in 0..grid {
            let v: C64 = (0..n).map(|a| ex[a] * bmat[a + n * gy]).sum();
            vals[gx + grid * gy] = v.norm();
        }
    }
    let at = |x: isize, y: isize| vals[x.rem_euclid(grid as isize) as usize + grid * y.rem_euclid(grid as isize) as usize];

    let mut global_max = vals.iter().copied().fold(0.0, f64::max);
    let mut maxima: Vec<CertificatePeak> = Vec::new();
    for gx in 0..grid as isize {
        for gy in 0..grid as isize {
            let v = at(gx, gy);
            let is_max = (-1..=1)
                .flat_map(|dx| (-1..=1).map(move |dy| (dx, dy)))
                .filter(|&d| d != (0, 0))
                .all(|(dx, dy)| v >= at(gx + dx, gy + dy));
            if !is_max || v == 0.0 {
                continue;
            }
            let peak = refine(q, gx as f64 * step, gy as f64 * step, step);
            global_max = global_max.max(peak.value);
            // plateaus can yield duplicate maxima converging to one point
            if maxima.iter().all(|p| {
                wrap_distance(p.freq.fx, peak.freq.fx) > 1e-6 || wrap_distance(p.freq.fy, peak.freq.fy) > 1e-6
            }) {
                maxima.push(peak);
            }
        }
    }
    maxima.sort_by(|a, b| b.value.total_cmp(&a.value));
    let off_support_max = maxima.iter().filter(|p| p.value < SUPPORT_LEVEL).map(|p| p.value).fold(0.0, f64::max);
    let peaks = maxima.into_iter().filter(|p| p.value >= SUPPORT_LEVEL).collect();
    Ok(CertificateScan { peaks, off_support_max, global_max })
}

/// Compass search on `|Q|` starting at `(fx, fy)` with initial step `h`.
fn refine(q: &ComplexMatrix, mut fx: f64, mut fy: f64, mut h: f64) -> CertificatePeak {
    let mut best = evaluate(q, fx, fy).norm();
    while h > 1e-11 {
        let mut moved = false;
        for (dx, dy) in [(1.0, 0.0), (-1.0, 0.0), (0.0, 1.0), (0.0, -1.0), (1.0, 1.0), (-1.0, -1.0), (1.0, -1.0), (-1.0, 1.0)] {
            let (cx, cy) = (fx + dx * h, fy + dy * h);
            let v = evaluate(q, cx, cy).norm();
            if v > best {
                best = v;
                fx = cx;
                fy = cy;
                moved = true;
                break;
            }
        }
        if !moved {
            h *= 0.5;
        }
    }
    CertificatePeak { freq: FrequencyPair::wrapped(wrap_unit(fx), wrap_unit(fy)), value: best }
}
