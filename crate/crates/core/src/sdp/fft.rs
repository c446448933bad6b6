//! Linear (non-circular) cross-correlation of 4-D arrays through FFTs.

use rustfft::FftPlanner;

use crate::linalg::C64;

/// Result of [`correlate4`], addressable by signed lags.
pub(crate) struct Correlation {
    data: Vec<C64>,
    padded: [usize; 4],
}

impl Correlation {
    /// `Σ_x U[x] V[x + σ]` at lag `σ` (each component in `(−d, d)`).
    #[cfg(test)]
    pub(crate) fn get(&self, lag: [isize; 4]) -> C64 {
        let mut idx = 0;
        let mut stride = 1;
        for k in 0..4 {
            let p = self.padded[k] as isize;
            idx += (lag[k].rem_euclid(p)) as usize * stride;
            stride *= self.padded[k];
        }
        self.data[idx]
    }

    /// Flat offsets of the lags `(−d, d)` along `axis`, in increasing lag
    /// order (negated when `negate`).
    pub(crate) fn axis_offsets(&self, axis: usize, d: usize, negate: bool) -> Vec<usize> {
        let stride: usize = self.padded[..axis].iter().product();
        let p = self.padded[axis] as isize;
        (-(d as isize - 1)..d as isize)
            .map(|l| (if negate { -l } else { l }).rem_euclid(p) as usize * stride)
            .collect()
    }

    pub(crate) fn data(&self) -> &[C64] {
        &self.data
    }
}

/// Computes `corr(σ) = Σ_x U[x] V[x+σ]` for arrays of shape `dims`
/// (first axis fastest), via `IFFT(Û(−ω) · V̂(ω))` on a grid padded to twice
/// the size along every axis so no lags alias.
pub(crate) fn correlate4(u: &[C64], v: &[C64], dims: [usize; 4]) -> Correlation {
    let padded = dims.map(|d| 2 * d);
    let total: usize = padded.iter().product();
    let mut planner = FftPlanner::new();
    let uf = padded_spectrum(u, dims, &mut planner);
    let vf = padded_spectrum(v, dims, &mut planner);
    // product Û(−ω) V̂(ω)
    let mut prod = vec![C64::new(0.0, 0.0); total];
    for w3 in 0..padded[3] {
        let n3 = (padded[3] - w3) % padded[3];
        for w2 in 0..padded[2] {
            let n2 = (padded[2] - w2) % padded[2];
            for w1 in 0..padded[1] {
                let n1 = (padded[1] - w1) % padded[1];
                for w0 in 0..padded[0] {
                    let n0 = (padded[0] - w0) % padded[0];
                    let i = w0 + padded[0] * (w1 + padded[1] * (w2 + padded[2] * w3));
                    let j = n0 + padded[0] * (n1 + padded[1] * (n2 + padded[2] * n3));
                    prod[i] = uf[j] * vf[i];
                }
            }
        }
    }
    finish(prod, padded, &mut planner)
}

/// `corr(σ) = Σ_x conj(V[x]) V[x+σ]`; one forward transform suffices since
/// the spectrum is `|V̂(ω)|²`.
pub(crate) fn autocorrelate4(v: &[C64], dims: [usize; 4]) -> Correlation {
    let padded = dims.map(|d| 2 * d);
    let mut planner = FftPlanner::new();
    let mut spec = padded_spectrum(v, dims, &mut planner);
    for z in &mut spec {
        *z = C64::new(z.norm_sqr(), 0.0);
    }
    finish(spec, padded, &mut planner)
}

fn padded_spectrum(x: &[C64], dims: [usize; 4], planner: &mut FftPlanner<f64>) -> Vec<C64> {
    let padded = dims.map(|d| 2 * d);
    let total: usize = padded.iter().product();
    let mut out = vec![C64::new(0.0, 0.0); total];
    for x3 in 0..dims[3] {
        for x2 in 0..dims[2] {
            for x1 in 0..dims[1] {
                let src = dims[0] * (x1 + dims[1] * (x2 + dims[2] * x3));
                let dst = padded[0] * (x1 + padded[1] * (x2 + padded[2] * x3));
                out[dst..dst + dims[0]].copy_from_slice(&x[src..src + dims[0]]);
            }
        }
    }
    fft_nd(&mut out, padded, dims, planner, false);
    out
}

fn finish(mut prod: Vec<C64>, padded: [usize; 4], planner: &mut FftPlanner<f64>) -> Correlation {
    fft_nd(&mut prod, padded, padded, planner, true);
    let scale = 1.0 / prod.len() as f64;
    for z in &mut prod {
        *z *= scale;
    }
    Correlation { data: prod, padded }
}

/// Lines of a strided axis gathered per batch.
const BATCH: usize = 32;

/// Separable N-D FFT. Entries outside the leading `extent` of an axis are
/// known to be zero before that axis is transformed, so lines that lie there
/// entirely are skipped. Strided axes are processed in batches of adjacent
/// lines to keep memory access contiguous.
fn fft_nd(data: &mut [C64], dims: [usize; 4], extent: [usize; 4], planner: &mut FftPlanner<f64>, inverse: bool) {
    let mut stride = 1;
    let mut buf = Vec::new();
    let mut scratch = Vec::new();
    for axis in 0..4 {
        let n = dims[axis];
        if n > 1 {
            let fft = if inverse { planner.plan_fft_inverse(n) } else { planner.plan_fft_forward(n) };
            scratch.resize(fft.get_inplace_scratch_len(), C64::new(0.0, 0.0));
            let outer = data.len() / (n * stride);
            'lines: for o in 0..outer {
                // coordinates of the not-yet-transformed axes above this one
                let mut rest = o;
                for later in axis + 1..4 {
                    if rest % dims[later] >= extent[later] {
                        continue 'lines;
                    }
                    rest /= dims[later];
                }
                let base = o * n * stride;
                if stride == 1 {
                    fft.process_with_scratch(&mut data[base..base + n], &mut scratch);
                    continue;
                }
                let mut s0 = 0;
                while s0 < stride {
                    let width = BATCH.min(stride - s0);
                    buf.resize(width * n, C64::new(0.0, 0.0));
                    for k in 0..n {
                        let src = &data[base + k * stride + s0..base + k * stride + s0 + width];
                        for (j, &z) in src.iter().enumerate() {
                            buf[j * n + k] = z;
                        }
                    }
                    // rustfft transforms consecutive length-n chunks
                    fft.process_with_scratch(&mut buf, &mut scratch);
                    for k in 0..n {
                        let dst = &mut data[base + k * stride + s0..base + k * stride + s0 + width];
                        for (j, z) in dst.iter_mut().enumerate() {
                            *z = buf[j * n + k];
                        }
                    }
                    s0 += width;
                }
            }
        }
        stride *= n;
    }
}
