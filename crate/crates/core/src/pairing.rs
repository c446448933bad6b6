//! Pairing of separately estimated `f_x` and `f_y` sets.
//!
//! With `X̂ = A_N(f_x) S A_M(f_y)^H`, the matrix
//! `Ŝ = A_N^† X̂ (A_M^H)^†` recovers `S`, whose non-zero pattern tells which
//! `f_x` goes with which `f_y`. Dividing each row by the Toeplitz power of its
//! frequency and normalizing by `√(cols/rows)` gives a nearly binary matrix
//! `P`; entries at or above the threshold `ε` are paired. The dimension with
//! more distinct frequencies is taken as rows, so that every row carries at
//! most one pair when the row frequencies do not overlap.

use crate::error::{Error, Result};
use crate::linalg::{pseudo_inverse, svd, ComplexMatrix, DEFAULT_RCOND};
use crate::model::{manifold_matrix, FrequencyPair, Source, SourceSpectrum};
use crate::toeplitz::VandermondeFactorization;

/// Default pairing threshold.
pub const DEFAULT_EPSILON: f64 = 0.5;

/// Manifold matrices with `σ_min/σ_max` below this are considered singular.
const CONDITION_LIMIT: f64 = 1e-10;

/// Inputs of [`pair`].
#[derive(Clone, Debug)]
pub struct PairingInput {
    /// Frequencies and powers from the `N x N` witness.
    pub x: VandermondeFactorization,
    /// Frequencies and powers from the `M x M` witness.
    pub y: VandermondeFactorization,
    /// Recovered `N x M` signal.
    pub x_hat: ComplexMatrix,
    /// Threshold in `(0, 1)`.
    pub epsilon: f64,
}

/// Paired spectrum plus diagnostics.
#[derive(Clone, Debug)]
pub struct PairingOutput {
    /// Pairs sorted by `(f_x, f_y)` with amplitudes `Ŝ[i, j]`.
    pub spectrum: SourceSpectrum,
    /// Normalized `|Ŝ|` as an `L_x x L_y` row-major matrix.
    pub p: Vec<Vec<f64>>,
    /// `y` frequencies were used as rows.
    pub swapped: bool,
    /// Some row had several entries above the threshold; only the largest was kept.
    pub ambiguous: bool,
    /// No entry reached the threshold.
    pub empty: bool,
}

fn check_conditioning(a: &ComplexMatrix, what: &str) -> Result<()> {
    let s = svd(a)?.s;
    let (max, min) = (s.first().copied().unwrap_or(0.0), s.last().copied().unwrap_or(0.0));
    if max == 0.0 || min < CONDITION_LIMIT * max {
        return Err(Error::PairingIllPosed(format!("{what} manifold matrix is rank deficient")));
    }
    Ok(())
}

/// Pairs the two frequency sets.
pub fn pair(input: &PairingInput) -> Result<PairingOutput> {
    if !(input.epsilon > 0.0 && input.epsilon < 1.0) {
        return Err(Error::Domain(format!("pairing threshold {} outside (0, 1)", input.epsilon)));
    }
    let (n, m) = input.x_hat.shape();
    let (lx, ly) = (input.x.len(), input.y.len());
    if lx == 0 || ly == 0 {
        return Ok(PairingOutput {
            spectrum: SourceSpectrum::new(vec![]),
            p: vec![vec![0.0; ly]; lx],
            swapped: false,
            ambiguous: false,
            empty: true,
        });
    }
    if input.x.powers.iter().chain(&input.y.powers).any(|&d| !(d > 0.0)) {
        return Err(Error::Domain("Toeplitz powers must be positive".into()));
    }
    if lx > n || ly > m {
        return Err(Error::PairingIllPosed(format!("{lx} x {ly} frequencies exceed the {n} x {m} observation")));
    }

    let swapped = lx < ly;
    let (rows, cols, data) = if swapped {
        (&input.y, &input.x, input.x_hat.adjoint())
    } else {
        (&input.x, &input.y, input.x_hat.clone())
    };
    let (r_dim, c_dim) = data.shape();
    let a_r = manifold_matrix(r_dim, &rows.freqs)?;
    let a_c = manifold_matrix(c_dim, &cols.freqs)?;
    check_conditioning(&a_r, "row")?;
    check_conditioning(&a_c, "column")?;
    // Ŝ = A_R^† W (A_C^H)^†
    let s_hat = pseudo_inverse(&a_r, DEFAULT_RCOND)?
        .matmul(&data)
        .matmul(&pseudo_inverse(&a_c.adjoint(), DEFAULT_RCOND)?);
    let norm = (c_dim as f64 / r_dim as f64).sqrt();
    let (lr, lc) = (rows.len(), cols.len());
    let p_work: Vec<Vec<f64>> = (0..lr)
        .map(|i| (0..lc).map(|j| norm * s_hat[(i, j)].norm() / rows.powers[i]).collect())
        .collect();

    let mut sources = Vec::new();
    let mut ambiguous = false;
    for (i, row) in p_work.iter().enumerate() {
        let above: Vec<usize> = (0..lc).filter(|&j| row[j] >= input.epsilon).collect();
        if above.len() > 1 {
            ambiguous = true;
        }
        let Some(&j) = above.iter().max_by(|&&a, &&b| row[a].total_cmp(&row[b])) else { continue };
        let (fx, fy, amp) = if swapped {
            (cols.freqs[j], rows.freqs[i], s_hat[(i, j)].conj())
        } else {
            (rows.freqs[i], cols.freqs[j], s_hat[(i, j)])
        };
        sources.push(Source { amplitude: amp, freq: FrequencyPair::wrapped(fx, fy) });
    }
    sources.sort_by(|a, b| a.freq.fx.total_cmp(&b.freq.fx).then(a.freq.fy.total_cmp(&b.freq.fy)));
    let p = if swapped {
        (0..lx).map(|j| (0..ly).map(|i| p_work[i][j]).collect()).collect()
    } else {
        p_work
    };
    Ok(PairingOutput { empty: sources.is_empty(), spectrum: SourceSpectrum::new(sources), p, swapped, ambiguous })
}
