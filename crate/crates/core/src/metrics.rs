//! Estimation quality: matched frequency MSE and success declaration.
//!
//! Estimated and true frequency pairs are matched one-to-one by the Hungarian
//! algorithm under `d² = d_wrap(f_x)² + d_wrap(f_y)²`. The MSE averages the
//! matched `d²` over the true sources; every unmatched true source counts as
//! a miss with the largest possible `d²` of 0.5. The two axes are summed.

use crate::error::{Error, Result};
use crate::model::{wrap_distance, FrequencyPair, SourceSpectrum};

/// Largest squared wrap distance of a frequency pair, used as miss penalty.
pub const MISS_PENALTY: f64 = 0.5;

/// Default success threshold on the MSE.
pub const DEFAULT_SUCCESS_THRESHOLD: f64 = 1e-6;

/// Details of [`matched_mse`].
#[derive(Clone, Debug, PartialEq)]
pub struct MseReport {
    pub mse: f64,
    /// `(truth index, estimate index)` of every matched pair.
    pub assignment: Vec<(usize, usize)>,
    /// True sources left without an estimate.
    pub misses: usize,
    /// The estimate was empty (everything counted as missed).
    pub empty_estimate: bool,
}

/// Squared wrap-around distance of two frequency pairs.
pub fn pair_distance_sqr(a: FrequencyPair, b: FrequencyPair) -> f64 {
    let dx = wrap_distance(a.fx, b.fx);
    let dy = wrap_distance(a.fy, b.fy);
    dx * dx + dy * dy
}

/// Matched frequency MSE of `estimate` against `truth`.
pub fn matched_mse(truth: &SourceSpectrum, estimate: &SourceSpectrum) -> Result<f64> {
    Ok(matched_mse_report(truth, estimate)?.mse)
}

/// As [`matched_mse`] with the assignment.
pub fn matched_mse_report(truth: &SourceSpectrum, estimate: &SourceSpectrum) -> Result<MseReport> {
    if truth.is_empty() {
        return Err(Error::Domain("the true spectrum is empty".into()));
    }
    let lt = truth.len();
    if estimate.is_empty() {
        return Ok(MseReport { mse: MISS_PENALTY, assignment: vec![], misses: lt, empty_estimate: true });
    }
    let cost: Vec<Vec<f64>> = truth
        .sources
        .iter()
        .map(|t| estimate.sources.iter().map(|e| pair_distance_sqr(t.freq, e.freq)).collect())
        .collect();
    let assignment = hungarian(&cost);
    let matched: f64 = assignment.iter().map(|&(i, j)| cost[i][j]).sum();
    let misses = lt - assignment.len();
    Ok(MseReport {
        mse: (matched + MISS_PENALTY * misses as f64) / lt as f64,
        assignment,
        misses,
        empty_estimate: false,
    })
}

/// Success predicate `mse ≤ threshold` (inclusive).
pub fn success(mse: f64, threshold: f64) -> bool {
    mse <= threshold
}

/// Minimum-cost assignment for a rectangular cost matrix (rows × cols);
/// returns `min(rows, cols)` `(row, col)` pairs sorted by row.
pub fn hungarian(cost: &[Vec<f64>]) -> Vec<(usize, usize)> {
    let rows = cost.len();
    let cols = cost.first().map_or(0, |r| r.len());
    if rows == 0 || cols == 0 {
        return vec![];
    }
    // the potential-based algorithm needs rows ≤ cols
    let transpose = rows > cols;
    let (n, m) = if transpose { (cols, rows) } else { (rows, cols) };
    let at = |i: usize, j: usize| if transpose { cost[j][i] } else { cost[i][j] };

    // 1-based arrays; column 0 is a sentinel
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; m + 1];
    let mut owner = vec![0usize; m + 1];
    let mut way = vec![0usize; m + 1];
    for i in 1..=n {
        owner[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; m + 1];
        let mut used = vec![false; m + 1];
        loop {
            used[j0] = true;
            let i0 = owner[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=m {
                if used[j] {
                    continue;
                }
                let cur = at(i0 - 1, j - 1) - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=m {
                if used[j] {
                    u[owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if owner[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            owner[j0] = owner[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut pairs: Vec<(usize, usize)> = (1..=m)
        .filter(|&j| owner[j] != 0)
        .map(|j| if transpose { (j - 1, owner[j] - 1) } else { (owner[j] - 1, j - 1) })
        .collect();
    pairs.sort_unstable();
    pairs
}

/// One Monte-Carlo trial, as written to the results table.
#[derive(Clone, Debug, PartialEq)]
pub struct TrialRecord {
    pub experiment: String,
    pub method: String,
    pub n: usize,
    pub m: usize,
    pub l: usize,
    /// `None` for noise-free trials.
    pub snr_db: Option<f64>,
    pub rho: f64,
    pub min_sep: f64,
    pub trial: usize,
    pub seed: u64,
    pub freq_mse: f64,
    pub success: bool,
    pub wall_time_s: f64,
    pub iterations: usize,
    /// Solver status plus any flags (`ambiguous`, `empty`, `unidentifiable`).
    pub status: String,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::C64;
    use crate::model::Source;

    fn spec(list: &[(f64, f64)]) -> SourceSpectrum {
        SourceSpectrum::new(
            list.iter()
                .map(|&(fx, fy)| Source { amplitude: C64::new(1.0, 0.0), freq: FrequencyPair::new(fx, fy).unwrap() })
                .collect(),
        )
    }

    #[test]
    fn identical_is_zero() {
        let t = spec(&[(0.1, 0.2), (0.5, 0.9)]);
        assert_eq!(matched_mse(&t, &t).unwrap(), 0.0);
    }

    #[test]
    fn single_offset() {
        let t = spec(&[(0.2, 0.3)]);
        let e = spec(&[(0.2, 0.3 + 1e-4)]);
        assert!((matched_mse(&t, &e).unwrap() - 1e-8).abs() < 1e-15);
    }

    #[test]
    fn wraps_around() {
        let t = spec(&[(0.99, 0.0)]);
        let e = spec(&[(0.01, 0.0)]);
        assert!((matched_mse(&t, &e).unwrap() - 4e-4).abs() < 1e-12);
    }

    #[test]
    fn permutation_invariant() {
        let t = spec(&[(0.1, 0.2), (0.5, 0.9), (0.7, 0.4)]);
        let e1 = spec(&[(0.101, 0.2), (0.5, 0.902), (0.69, 0.4)]);
        let e2 = spec(&[(0.69, 0.4), (0.101, 0.2), (0.5, 0.902)]);
        let a = matched_mse(&t, &e1).unwrap();
        assert!((a - matched_mse(&t, &e2).unwrap()).abs() < 1e-18);
        assert!((a - (1e-6 + 4e-6 + 1e-4) / 3.0).abs() < 1e-15);
    }

    #[test]
    fn misses_and_empty() {
        let t = spec(&[(0.1, 0.2), (0.5, 0.9)]);
        let e = spec(&[(0.1, 0.2)]);
        assert!((matched_mse(&t, &e).unwrap() - 0.25).abs() < 1e-15);
        let r = matched_mse_report(&t, &SourceSpectrum::new(vec![])).unwrap();
        assert!(r.empty_estimate && r.mse == 0.5);
        assert!(matched_mse(&SourceSpectrum::new(vec![]), &e).is_err());
    }

    #[test]
    fn surplus_estimates_are_ignored() {
        let t = spec(&[(0.1, 0.2)]);
        let e = spec(&[(0.6, 0.6), (0.1, 0.2)]);
        assert_eq!(matched_mse(&t, &e).unwrap(), 0.0);
    }

    #[test]
    fn success_is_inclusive() {
        assert!(success(1e-7, DEFAULT_SUCCESS_THRESHOLD));
        assert!(!success(1e-5, DEFAULT_SUCCESS_THRESHOLD));
        assert!(success(1e-6, DEFAULT_SUCCESS_THRESHOLD));
    }

    #[test]
    fn hungarian_beats_greedy() {
        // greedy takes (0,0)=1 then (1,1)=10; optimum is 2+3
        let cost = vec![vec![1.0, 2.0], vec![3.0, 10.0]];
        assert_eq!(hungarian(&cost), vec![(0, 1), (1, 0)]);
        let wide = vec![vec![5.0, 1.0, 9.0]];
        assert_eq!(hungarian(&wide), vec![(0, 1)]);
        let tall = vec![vec![5.0], vec![1.0], vec![9.0]];
        assert_eq!(hungarian(&tall), vec![(1, 0)]);
    }
}
