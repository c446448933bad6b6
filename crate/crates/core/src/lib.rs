//! Gridless 2-D line spectrum estimation by decoupled atomic norm minimization.

pub mod anm;
pub mod compression;
pub mod error;
pub mod estimator;
pub mod linalg;
pub mod metrics;
pub mod model;
pub mod pairing;
pub mod sdp;
pub mod toeplitz;

pub use anm::{DanmResult, MmvResult, VanmResult};
pub use compression::{CompressionKind, CompressionOperator};
pub use error::{Error, Result};
pub use estimator::{estimate, Estimate, EstimateFlags, EstimatorConfig, Method};
pub use linalg::{Complex64, ComplexMatrix};
pub use metrics::{matched_mse, TrialRecord};
pub use model::{FrequencyPair, Source, SourceSpectrum};
pub use pairing::{pair, PairingInput, PairingOutput};
pub use sdp::{SolveStatus, SolverKind, SolverOptions};
pub use toeplitz::{HermitianToeplitz, TwoLevelToeplitz, VandermondeFactorization};
