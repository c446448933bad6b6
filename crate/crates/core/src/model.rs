//! Ground-truth synthesis for the 2-D mixture model.
//!
//! A scenario is a list of sources `(s_l, (f_x, f_y))`; the observed matrix is
//! `X = Σ s_l a_N(f_x) a_M(f_y)^H` with steering vectors
//! `a_n(f)[k] = exp(j2πfk)`. All randomness flows through [`trial_rng`], a
//! ChaCha20 stream keyed by a master seed and a trial index, so Monte-Carlo
//! runs reproduce bit-for-bit across platforms and scheduling orders.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, C64};

/// Frequency pair on the unit torus `[0,1)²`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FrequencyPair {
    pub fx: f64,
    pub fy: f64,
}

impl FrequencyPair {
    /// Builds a pair, rejecting components outside `[0,1)`.
    pub fn new(fx: f64, fy: f64) -> Result<Self> {
        check_freq(fx)?;
        check_freq(fy)?;
        Ok(Self { fx, fy })
    }

    /// Builds a pair after wrapping both components into `[0,1)`.
    pub fn wrapped(fx: f64, fy: f64) -> Self {
        Self { fx: wrap_unit(fx), fy: wrap_unit(fy) }
    }
}

/// One 2-D sinusoid.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Source {
    pub amplitude: C64,
    pub freq: FrequencyPair,
}

/// A list of sources; ground truth or estimator output.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SourceSpectrum {
    pub sources: Vec<Source>,
}

impl SourceSpectrum {
    pub fn new(sources: Vec<Source>) -> Self {
        Self { sources }
    }

    pub fn len(&self) -> usize {
        self.sources.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sources.is_empty()
    }

    pub fn freqs(&self) -> Vec<FrequencyPair> {
        self.sources.iter().map(|s| s.freq).collect()
    }

    pub fn amplitudes(&self) -> Vec<C64> {
        self.sources.iter().map(|s| s.amplitude).collect()
    }

    /// Distinct x-frequencies (exact comparison), in first-seen order.
    pub fn distinct_fx(&self) -> Vec<f64> {
        distinct(self.sources.iter().map(|s| s.freq.fx))
    }

    pub fn distinct_fy(&self) -> Vec<f64> {
        distinct(self.sources.iter().map(|s| s.freq.fy))
    }

    /// Minimum wrap-around separation over distinct x-frequencies
    /// (`None` with fewer than two distinct values).
    pub fn min_sep_x(&self) -> Option<f64> {
        min_wrap_separation(&self.distinct_fx())
    }

    pub fn min_sep_y(&self) -> Option<f64> {
        min_wrap_separation(&self.distinct_fy())
    }

    /// `Σ |s_l|`, the atomic norm of the synthesized matrix when the sources
    /// are well separated.
    pub fn l1_mass(&self) -> f64 {
        self.sources.iter().map(|s| s.amplitude.norm()).sum()
    }

    /// Multiplies all amplitudes by `alpha`.
    pub fn scaled(&self, alpha: C64) -> Self {
        Self {
            sources: self
                .sources
                .iter()
                .map(|s| Source { amplitude: s.amplitude * alpha, freq: s.freq })
                .collect(),
        }
    }
}

fn distinct(values: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut out: Vec<f64> = Vec::new();
    for v in values {
        if !out.contains(&v) {
            out.push(v);
        }
    }
    out
}

fn check_freq(f: f64) -> Result<()> {
    if (0.0..1.0).contains(&f) {
        Ok(())
    } else {
        Err(Error::Domain(format!("frequency {f} outside [0,1)")))
    }
}

/// Maps any real to `[0,1)`.
pub fn wrap_unit(f: f64) -> f64 {
    let w = f.rem_euclid(1.0);
    // rem_euclid can round up to exactly 1.0 for tiny negative inputs
    if w >= 1.0 {
        0.0
    } else {
        w
    }
}

/// Wrap-around distance on the unit circle, `min(|Δ|, 1 − |Δ|)` ∈ [0, 0.5].
pub fn wrap_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(1.0);
    d.min(1.0 - d)
}

/// Smallest pairwise wrap-around distance, `None` for fewer than two values.
pub fn min_wrap_separation(freqs: &[f64]) -> Option<f64> {
    let mut best: Option<f64> = None;
    for i in 0..freqs.len() {
        for j in i + 1..freqs.len() {
            let d = wrap_distance(freqs[i], freqs[j]);
            best = Some(best.map_or(d, |b: f64| b.min(d)));
        }
    }
    best
}

/// Steering vector `a_n(f)`, an `n x 1` matrix with entries `exp(j2πfk)`.
pub fn steering_vector(n: usize, f: f64) -> Result<ComplexMatrix> {
    check_freq(f)?;
    if n == 0 {
        return Err(Error::Dimension("steering vector of length 0".into()));
    }
    Ok(ComplexMatrix::column_vector(steering_entries(n, f)))
}

/// Entries of `a_n(f)` for any real `f` (no domain check).
pub(crate) fn steering_entries(n: usize, f: f64) -> Vec<C64> {
    (0..n).map(|k| C64::from_polar(1.0, 2.0 * PI * f * k as f64)).collect()
}

/// Manifold matrix `[a_n(f_1), …, a_n(f_K)]`.
pub fn manifold_matrix(n: usize, freqs: &[f64]) -> Result<ComplexMatrix> {
    if freqs.is_empty() {
        return Err(Error::Dimension("manifold matrix needs at least one frequency".into()));
    }
    if n == 0 {
        return Err(Error::Dimension("manifold matrix with 0 rows".into()));
    }
    for &f in freqs {
        check_freq(f)?;
    }
    Ok(manifold_unchecked(n, freqs))
}

pub(crate) fn manifold_unchecked(n: usize, freqs: &[f64]) -> ComplexMatrix {
    ComplexMatrix::from_fn(n, freqs.len(), |k, j| C64::from_polar(1.0, 2.0 * PI * freqs[j] * k as f64))
}

/// The rank-one atom `a_N(f_x) a_M(f_y)^H`.
pub fn atom(n: usize, m: usize, f: FrequencyPair) -> ComplexMatrix {
    let ax = steering_entries(n, f.fx);
    let ay = steering_entries(m, f.fy);
    ComplexMatrix::from_fn(n, m, |i, j| ax[i] * ay[j].conj())
}

/// `X = Σ_l s_l a_N(f_x,l) a_M(f_y,l)^H`.
pub fn synthesize(spec: &SourceSpectrum, n: usize, m: usize) -> Result<ComplexMatrix> {
    if n == 0 || m == 0 {
        return Err(Error::Dimension(format!("cannot synthesize a {n}x{m} matrix")));
    }
    let mut x = ComplexMatrix::zeros(n, m);
    for s in &spec.sources {
        let ax = steering_entries(n, s.freq.fx);
        let ay = steering_entries(m, s.freq.fy);
        for j in 0..m {
            let w = s.amplitude * ay[j].conj();
            for i in 0..n {
                x[(i, j)] += ax[i] * w;
            }
        }
    }
    Ok(x)
}

/// Deterministic per-trial generator: a ChaCha20 stream keyed by the master
/// seed and positioned on the stream selected by `trial`.
pub fn trial_rng(master_seed: u64, trial: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(master_seed);
    rng.set_stream(trial);
    rng
}

/// Standard circular complex Gaussian draw (unit variance, ½ per component).
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Adds circular Gaussian noise scaled so that the realized SNR
/// `10 log10(‖X‖²/‖W‖²)` equals `snr_db` exactly. Returns `Y` and the
/// per-entry noise power `‖W‖²/(NM)`. An infinite SNR returns `X` untouched.
pub fn add_noise(x: &ComplexMatrix, snr_db: f64, seed: u64) -> Result<(ComplexMatrix, f64)> {
    let mut rng = trial_rng(seed, 0);
    add_noise_with(x, snr_db, &mut rng)
}

/// As [`add_noise`] drawing from a caller-supplied generator.
pub fn add_noise_with<R: Rng + ?Sized>(
    x: &ComplexMatrix,
    snr_db: f64,
    rng: &mut R,
) -> Result<(ComplexMatrix, f64)> {
    if snr_db.is_infinite() && snr_db > 0.0 {
        return Ok((x.clone(), 0.0));
    }
    if snr_db.is_nan() {
        return Err(Error::Domain("SNR is NaN".into()));
    }
    let signal = x.frobenius_norm_sqr();
    if signal == 0.0 {
        return Err(Error::Domain("cannot set a finite SNR on a zero signal".into()));
    }
    let w = ComplexMatrix::from_fn(x.rows(), x.cols(), |_, _| complex_gaussian(rng));
    let target = signal / 10f64.powf(snr_db / 10.0);
    let w = w.scale_real((target / w.frobenius_norm_sqr()).sqrt());
    let power = w.frobenius_norm_sqr() / (x.rows() * x.cols()) as f64;
    Ok((x + &w, power))
}

/// Amplitude distribution for [`random_spectrum`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AmplitudeLaw {
    /// Standard circular complex Gaussian.
    Gaussian,
    /// Unit modulus with uniform phase.
    UnitModulus,
}

const MAX_SAMPLING_ATTEMPTS: usize = 100_000;

/// Draws `l` uniform frequencies on `[0,1)` whose pairwise wrap separation is
/// at least `min_sep` (rejection sampling of the whole set).
pub fn random_frequencies<R: Rng + ?Sized>(l: usize, min_sep: f64, rng: &mut R) -> Result<Vec<f64>> {
    if l as f64 * min_sep >= 1.0 {
        return Err(Error::Domain(format!("{l} frequencies cannot be {min_sep} apart on the unit circle")));
    }
    for _ in 0..MAX_SAMPLING_ATTEMPTS {
        let f: Vec<f64> = (0..l).map(|_| rng.gen::<f64>()).collect();
        if min_wrap_separation(&f).map_or(true, |d| d >= min_sep) {
            return Ok(f);
        }
    }
    Err(Error::Domain(format!(
        "no draw of {l} frequencies with separation {min_sep} within {MAX_SAMPLING_ATTEMPTS} attempts"
    )))
}

fn random_amplitude<R: Rng + ?Sized>(law: AmplitudeLaw, rng: &mut R) -> C64 {
    match law {
        AmplitudeLaw::Gaussian => complex_gaussian(rng),
        AmplitudeLaw::UnitModulus => C64::from_polar(1.0, 2.0 * PI * rng.gen::<f64>()),
    }
}

/// Random scenario of `l` sources with wrap separation at least `min_sep` in
/// each dimension.
pub fn random_spectrum(l: usize, min_sep: f64, law: AmplitudeLaw, seed: u64) -> Result<SourceSpectrum> {
    random_spectrum_with(l, min_sep, law, &mut trial_rng(seed, 0))
}

pub fn random_spectrum_with<R: Rng + ?Sized>(
    l: usize,
    min_sep: f64,
    law: AmplitudeLaw,
    rng: &mut R,
) -> Result<SourceSpectrum> {
    if l == 0 {
        return Err(Error::Domain("a scenario needs at least one source".into()));
    }
    if !(min_sep >= 0.0) {
        return Err(Error::Domain(format!("invalid separation {min_sep}")));
    }
    let fx = random_frequencies(l, min_sep, rng)?;
    let fy = random_frequencies(l, min_sep, rng)?;
    let sources = fx
        .into_iter()
        .zip(fy)
        .map(|(fx, fy)| Source { amplitude: random_amplitude(law, rng), freq: FrequencyPair { fx, fy } })
        .collect();
    Ok(SourceSpectrum { sources })
}

/// Two sources whose wrap separation is exactly `delta` in both dimensions,
/// at a uniformly random offset.
pub fn two_source_spectrum<R: Rng + ?Sized>(delta: f64, law: AmplitudeLaw, rng: &mut R) -> Result<SourceSpectrum> {
    if !(0.0..=0.5).contains(&delta) {
        return Err(Error::Domain(format!("separation {delta} outside [0, 0.5]")));
    }
    let (x0, y0): (f64, f64) = (rng.gen(), rng.gen());
    let sources = vec![
        Source { amplitude: random_amplitude(law, rng), freq: FrequencyPair::wrapped(x0, y0) },
        Source { amplitude: random_amplitude(law, rng), freq: FrequencyPair::wrapped(x0 + delta, y0 + delta) },
    ];
    Ok(SourceSpectrum { sources })
}
