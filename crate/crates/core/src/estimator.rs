//! End-to-end estimation: solve, extract frequencies, pair.
//!
//! Noise-free observations (`noise_std = 0` and no explicit `λ`) go through
//! the exact formulations; otherwise the denoising forms are used with
//! `λ = 2σ̂·√(NM·log(NM))` unless `λ` is given. Frequencies are read from the
//! Toeplitz witnesses by their numerical rank, or by the model order when it
//! is known (noisy witnesses have no clean eigenvalue gap).

use std::str::FromStr;

use crate::anm::{
    self, cs_grid_baseline, danm_compressed_exact, danm_denoise, danm_exact, mmv_decoupled, vanm_denoise,
    vanm_exact, DEFAULT_VANM_CAP,
};
use crate::compression::CompressionOperator;
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigenvalues, ComplexMatrix};
use crate::model::{FrequencyPair, Source, SourceSpectrum};
use crate::pairing::{pair, PairingInput, DEFAULT_EPSILON};
use crate::sdp::{SolveStatus, SolverOptions};
use crate::toeplitz::{
    vandermonde_decompose_1l, vandermonde_decompose_1l_order, vandermonde_decompose_2l,
    vandermonde_decompose_2l_order, HermitianToeplitz, VandermondeFactorization, DEFAULT_RANK_TOL,
};

/// Estimation method.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    /// Decoupled atomic norm with pairing.
    Danm,
    /// Vectorized atomic norm with two-level Vandermonde decomposition.
    Vanm,
    /// Two decoupled 1-D multiple-measurement problems with pairing.
    Mmv,
    /// Orthogonal matching pursuit on a grid.
    Cs,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Danm => "danm",
            Method::Vanm => "vanm",
            Method::Mmv => "mmv",
            Method::Cs => "cs",
        }
    }
}

impl FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "danm" => Ok(Method::Danm),
            "vanm" => Ok(Method::Vanm),
            "mmv" => Ok(Method::Mmv),
            "cs" => Ok(Method::Cs),
            other => Err(Error::Domain(format!("unknown method '{other}' (expected danm, vanm, mmv or cs)"))),
        }
    }
}

/// Estimator settings.
#[derive(Clone, Debug, PartialEq)]
pub struct EstimatorConfig {
    pub method: Method,
    pub solver: SolverOptions,
    /// Regularization weight; `None` selects the default from `noise_std`.
    pub lambda: Option<f64>,
    /// Known noise standard deviation per entry (`E|w|² = σ²`); `None`
    /// estimates it from the data, `Some(0)` declares the data noise-free.
    pub noise_std: Option<f64>,
    /// Known number of sources.
    pub model_order: Option<usize>,
    /// Pairing threshold.
    pub epsilon: f64,
    /// Relative eigenvalue threshold for witness ranks.
    pub rank_tol: f64,
    pub vanm_cap: usize,
    /// Grid of the on-grid baseline.
    pub cs_grid: (usize, usize),
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        Self {
            method: Method::Danm,
            solver: SolverOptions::default(),
            lambda: None,
            noise_std: Some(0.0),
            model_order: None,
            epsilon: DEFAULT_EPSILON,
            rank_tol: DEFAULT_RANK_TOL,
            vanm_cap: DEFAULT_VANM_CAP,
            cs_grid: (16, 16),
        }
    }
}

/// Warnings raised during estimation.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct EstimateFlags {
    /// Pairing kept only the largest of several candidates in some row.
    pub ambiguous: bool,
    /// Pairing produced nothing.
    pub empty: bool,
    /// More sources than `min(N, M)` were requested or detected.
    pub unidentifiable: bool,
}

impl EstimateFlags {
    /// `;`-separated names of the raised flags.
    pub fn describe(&self) -> String {
        let mut v = Vec::new();
        if self.ambiguous {
            v.push("ambiguous");
        }
        if self.empty {
            v.push("empty");
        }
        if self.unidentifiable {
            v.push("unidentifiable");
        }
        v.join(";")
    }
}

/// Estimator output.
#[derive(Clone, Debug)]
pub struct Estimate {
    pub spectrum: SourceSpectrum,
    pub flags: EstimateFlags,
    pub status: SolveStatus,
    pub iterations: usize,
    /// Recovered `N x M` signal (absent for the grid baseline).
    pub x_hat: Option<ComplexMatrix>,
    /// Regularization weight actually used (`None` for exact solves).
    pub lambda: Option<f64>,
    /// Value of the atomic-norm surrogate at the solution (`None` for the
    /// grid baseline and the MMV method).
    pub atomic_norm_value: Option<f64>,
}

/// Estimated noise levels below this fraction of the RMS entry are treated
/// as noise-free data (round-off alone puts the estimate near `1e-8`).
pub const NOISE_FLOOR_REL: f64 = 1e-6;

/// `2σ·√(NM·log(NM))`: the expected dual-norm level of white noise over the
/// `NM` samples, doubled because the data term `‖Y − C(X)‖²` carries no ½.
pub fn default_lambda(noise_std: f64, n: usize, m: usize) -> f64 {
    let d = (n * m) as f64;
    2.0 * noise_std * (d * d.ln().max(1.0)).sqrt()
}

/// Median of the Marchenko–Pastur law with aspect ratio `beta ∈ (0, 1]`
/// (unit noise variance). The CDF is integrated in the angle `φ` with
/// `x = a + (b − a)(1 − cos φ)/2`, which makes the integrand smooth.
fn marchenko_pastur_median(beta: f64) -> f64 {
    let (lo, hi) = ((1.0 - beta.sqrt()).powi(2), (1.0 + beta.sqrt()).powi(2));
    let half = 0.5 * (hi - lo);
    let x_of = |phi: f64| lo + half * (1.0 - phi.cos());
    let cdf = |t: f64| {
        const STEPS: usize = 4000;
        let h = t / STEPS as f64;
        (0..STEPS)
            .map(|i| {
                let phi = (i as f64 + 0.5) * h;
                half * half * phi.sin().powi(2) / (2.0 * std::f64::consts::PI * beta * x_of(phi))
            })
            .sum::<f64>()
            * h
    };
    let (mut a, mut b) = (0.0, std::f64::consts::PI);
    for _ in 0..50 {
        let mid = 0.5 * (a + b);
        if cdf(mid) < 0.5 {
            a = mid;
        } else {
            b = mid;
        }
    }
    x_of(0.5 * (a + b))
}

/// Noise level from the median eigenvalue of `Y Y^H / M` (smaller side),
/// matched to the Marchenko–Pastur median. Robust as long as the signal
/// occupies well under half of the dimensions.
pub fn estimate_noise_std(y: &ComplexMatrix) -> Result<f64> {
    let (k, m) = y.shape();
    let gram = if k <= m { y.matmul_adjoint(y) } else { y.adjoint_matmul(y) };
    let (small, large) = (k.min(m) as f64, k.max(m) as f64);
    let ev = hermitian_eigenvalues(&gram.hermitian_part())?;
    let mut tail: Vec<f64> = ev.iter().map(|v| v.max(0.0) / large).collect();
    tail.sort_by(f64::total_cmp);
    let median = if tail.len() % 2 == 1 {
        tail[tail.len() / 2]
    } else {
        0.5 * (tail[tail.len() / 2 - 1] + tail[tail.len() / 2])
    };
    Ok((median / marchenko_pastur_median(small / large)).sqrt())
}

fn decompose_1l(t: &HermitianToeplitz, order: Option<usize>, rank_tol: f64) -> Result<VandermondeFactorization> {
    match order {
        Some(r) => vandermonde_decompose_1l_order(t, r.min(t.n() - 1)),
        None => vandermonde_decompose_1l(t, rank_tol),
    }
}

/// Drops non-positive powers that a fixed-order fit can produce on noisy
/// witnesses.
fn positive_only(f: VandermondeFactorization) -> VandermondeFactorization {
    let keep: Vec<usize> = (0..f.len()).filter(|&k| f.powers[k] > 0.0).collect();
    VandermondeFactorization {
        freqs: keep.iter().map(|&k| f.freqs[k]).collect(),
        powers: keep.iter().map(|&k| f.powers[k]).collect(),
    }
}

/// Runs the configured method on observation `y = C(X) + W`.
pub fn estimate(y: &ComplexMatrix, op: &CompressionOperator, cfg: &EstimatorConfig) -> Result<Estimate> {
    if y.shape() != op.output_dims() {
        return Err(Error::Dimension(format!(
            "observation is {:?} but the operator produces {:?}",
            y.shape(),
            op.output_dims()
        )));
    }
    let (n, m) = op.input_dims();
    let mut flags = EstimateFlags::default();
    if let Some(l) = cfg.model_order {
        flags.unidentifiable = !anm::identifiable(l, n, m);
    }
    let noise_std = match cfg.noise_std {
        Some(s) if s >= 0.0 => s,
        Some(s) => return Err(Error::Domain(format!("noise level {s} is negative"))),
        None => {
            let s = estimate_noise_std(y)?;
            let rms = y.frobenius_norm() / ((y.rows() * y.cols()) as f64).sqrt();
            if s <= NOISE_FLOOR_REL * rms {
                0.0
            } else {
                s
            }
        }
    };
    let lambda = match cfg.lambda {
        Some(l) if l > 0.0 => Some(l),
        Some(l) => return Err(Error::Domain(format!("regularization weight {l} must be positive"))),
        None if noise_std > 0.0 => Some(default_lambda(noise_std, n, m)),
        None => None,
    };
    let order = if lambda.is_some() { cfg.model_order } else { None };

    match cfg.method {
        Method::Cs => {
            let atoms = cfg.model_order.unwrap_or(n.min(m));
            let spectrum = cs_grid_baseline(y, op, cfg.cs_grid.0, cfg.cs_grid.1, atoms)?;
            flags.empty = spectrum.is_empty();
            Ok(Estimate {
                spectrum,
                flags,
                status: SolveStatus::Optimal,
                iterations: 0,
                x_hat: None,
                lambda: None,
                atomic_norm_value: None,
            })
        }
        Method::Vanm => {
            let r = match lambda {
                Some(l) => vanm_denoise(y, op, l, &cfg.solver, cfg.vanm_cap)?,
                None if op.is_identity() => vanm_exact(y, &cfg.solver, cfg.vanm_cap)?,
                None => {
                    return Err(Error::Domain(
                        "the vectorized method supports compressed data only in the denoising form".into(),
                    ))
                }
            };
            let comps = match order {
                Some(l) => vandermonde_decompose_2l_order(&r.u2, l.min(n * m - 1))?,
                None => vandermonde_decompose_2l(&r.u2, cfg.rank_tol)?,
            };
            if comps.len() > n.min(m) {
                flags.unidentifiable = true;
            }
            // amplitudes by least squares on the recovered signal
            let freqs: Vec<FrequencyPair> = comps.iter().filter(|c| c.power > 0.0).map(|c| c.freq).collect();
            let spectrum = fit_amplitudes(&r.x_hat, &freqs)?;
            flags.empty = spectrum.is_empty();
            Ok(Estimate {
                spectrum,
                flags,
                status: r.solver.status,
                iterations: r.solver.iterations,
                x_hat: Some(r.x_hat),
                lambda,
                atomic_norm_value: Some(r.atomic_norm_value),
            })
        }
        Method::Danm | Method::Mmv => {
            let (x_hat, ux, uy, status, iterations, value) = if cfg.method == Method::Danm {
                let r = match lambda {
                    Some(l) => danm_denoise(y, op, l, &cfg.solver)?,
                    None if op.is_identity() => danm_exact(y, &cfg.solver)?,
                    None => danm_compressed_exact(y, op, &cfg.solver)?,
                };
                (r.x_hat, r.ux, r.uy, r.solver.status, r.solver.iterations, Some(r.atomic_norm_value))
            } else {
                if !op.is_identity() {
                    return Err(Error::Domain("the MMV method needs uncompressed data".into()));
                }
                let r = mmv_decoupled(y, &cfg.solver)?;
                let status = if r.solver_x.status == SolveStatus::Optimal { r.solver_y.status } else { r.solver_x.status };
                (y.clone(), r.ux, r.uy, status, r.solver_x.iterations + r.solver_y.iterations, None)
            };
            let fx = positive_only(decompose_1l(&ux, order, cfg.rank_tol)?);
            let fy = positive_only(decompose_1l(&uy, order, cfg.rank_tol)?);
            if fx.len().max(fy.len()) > n.min(m) {
                flags.unidentifiable = true;
            }
            let out = pair(&PairingInput { x: fx, y: fy, x_hat: x_hat.clone(), epsilon: cfg.epsilon })?;
            flags.ambiguous = out.ambiguous;
            flags.empty = out.empty;
            Ok(Estimate {
                spectrum: out.spectrum,
                flags,
                status,
                iterations,
                x_hat: Some(x_hat),
                lambda,
                atomic_norm_value: value,
            })
        }
    }
}

/// Least-squares amplitudes of known frequency pairs.
fn fit_amplitudes(x: &ComplexMatrix, freqs: &[FrequencyPair]) -> Result<SourceSpectrum> {
    if freqs.is_empty() {
        return Ok(SourceSpectrum::new(vec![]));
    }
    let (n, m) = x.shape();
    let atoms: Vec<ComplexMatrix> = freqs.iter().map(|&f| crate::model::atom(n, m, f)).collect();
    let dict = ComplexMatrix::from_fn(n * m, freqs.len(), |r, k| atoms[k].as_slice()[r]);
    let target = ComplexMatrix::column_vector(x.as_slice().to_vec());
    let coef = crate::linalg::pseudo_inverse(&dict, crate::linalg::DEFAULT_RCOND)?.matmul(&target);
    let mut sources: Vec<Source> =
        freqs.iter().enumerate().map(|(k, &freq)| Source { amplitude: coef[(k, 0)], freq }).collect();
    sources.sort_by(|a, b| a.freq.fx.total_cmp(&b.freq.fx).then(a.freq.fy.total_cmp(&b.freq.fy)));
    Ok(SourceSpectrum::new(sources))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::matched_mse;
    use crate::model::{add_noise, random_spectrum, synthesize, AmplitudeLaw};

    #[test]
    fn methods_parse() {
        for m in ["danm", "vanm", "mmv", "cs"] {
            assert_eq!(m.parse::<Method>().unwrap().as_str(), m);
        }
        assert!("music".parse::<Method>().is_err());
    }

    #[test]
    fn noise_free_pipelines_recover_truth() {
        let truth = random_spectrum(3, 0.15, AmplitudeLaw::Gaussian, 21).unwrap();
        let x = synthesize(&truth, 10, 10).unwrap();
        let op = CompressionOperator::identity(10, 10);
        for method in [Method::Danm, Method::Vanm, Method::Mmv] {
            let cfg = EstimatorConfig { method, ..Default::default() };
            let est = estimate(&x, &op, &cfg).unwrap();
            let mse = matched_mse(&truth, &est.spectrum).unwrap();
            assert!(mse < 1e-10, "{method:?}: {mse}");
            assert_eq!(est.spectrum.len(), 3);
        }
    }

    #[test]
    fn noisy_pipeline_with_known_order() {
        let truth = random_spectrum(2, 0.2, AmplitudeLaw::UnitModulus, 4).unwrap();
        let x = synthesize(&truth, 12, 12).unwrap();
        let (y, power) = add_noise(&x, 20.0, 9).unwrap();
        let cfg = EstimatorConfig { noise_std: Some(power.sqrt()), model_order: Some(2), ..Default::default() };
        let est = estimate(&y, &CompressionOperator::identity(12, 12), &cfg).unwrap();
        assert!(est.lambda.is_some());
        assert!(matched_mse(&truth, &est.spectrum).unwrap() < 1e-4);
    }

    #[test]
    fn noise_estimate_is_reasonable() {
        let truth = random_spectrum(2, 0.2, AmplitudeLaw::UnitModulus, 4).unwrap();
        let x = synthesize(&truth, 32, 32).unwrap();
        let (y, power) = add_noise(&x, 0.0, 2).unwrap();
        let s = estimate_noise_std(&y).unwrap();
        assert!((s / power.sqrt() - 1.0).abs() < 0.15, "{s} vs {}", power.sqrt());
        // pure noise, tall observation
        assert!(estimate_noise_std(&x).unwrap() < NOISE_FLOOR_REL);
        let w = ComplexMatrix::from_fn(40, 20, |i, j| crate::linalg::C64::new(((i * 7 + j * 13) % 11) as f64 - 5.0, 0.0));
        assert!(estimate_noise_std(&w).unwrap().is_finite());
    }

    #[test]
    fn marchenko_pastur_square_median() {
        // reference medians from adaptive quadrature
        assert!((marchenko_pastur_median(1.0) - 0.652776).abs() < 1e-5);
        assert!((marchenko_pastur_median(0.5) - 0.830466).abs() < 1e-5);
    }

    #[test]
    fn unidentifiable_order_is_flagged() {
        let truth = random_spectrum(2, 0.2, AmplitudeLaw::UnitModulus, 4).unwrap();
        let x = synthesize(&truth, 4, 4).unwrap();
        let cfg = EstimatorConfig { model_order: Some(5), ..Default::default() };
        let est = estimate(&x, &CompressionOperator::identity(4, 4), &cfg).unwrap();
        assert!(est.flags.unidentifiable);
    }
}
