//! Fixed benchmark inputs shared by the criterion benches.

use danm::model::{random_spectrum, synthesize, AmplitudeLaw};
use danm::ComplexMatrix;

/// Noise-free `n x n` observation of four separated unit-modulus sources.
pub fn noise_free_signal(n: usize, seed: u64) -> ComplexMatrix {
    let spec = random_spectrum(4, 0.1, AmplitudeLaw::UnitModulus, seed).expect("valid scenario");
    synthesize(&spec, n, n).expect("valid size")
}
