//! Interior-point solver checks on the decoupled problem family.

use danm::anm::{danm_exact, danm_exact_problem};
use danm::linalg::{C64, ComplexMatrix};
use danm::model::{steering_vector, synthesize, trial_rng, complex_gaussian, FrequencyPair, Source, SourceSpectrum};
use danm::sdp::{solve, SolveStatus, SolverOptions};
use danm::toeplitz::psd_check;
use rand::Rng;

/// Random spectrum without any separation guarantee.
fn random_instance(seed: u64) -> (usize, usize, SourceSpectrum) {
    let mut rng = trial_rng(seed, 7);
    let n = rng.gen_range(3..=8);
    let m = rng.gen_range(3..=8);
    let l = rng.gen_range(1..=4);
    let sources = (0..l)
        .map(|_| Source {
            amplitude: complex_gaussian(&mut rng),
            freq: FrequencyPair::new(rng.gen(), rng.gen()).unwrap(),
        })
        .collect();
    (n, m, SourceSpectrum::new(sources))
}

/// `[T_x X; X^H T_y]` with `T_x = √(M/N) Σ|s| a a^H`, `T_y = √(N/M) Σ|s| b b^H`.
fn feasible_block(spec: &SourceSpectrum, n: usize, m: usize) -> (ComplexMatrix, f64) {
    let mut block = ComplexMatrix::zeros(n + m, n + m);
    let rx = ((m as f64) / (n as f64)).sqrt();
    for s in &spec.sources {
        let a = steering_vector(n, s.freq.fx).unwrap();
        let b = steering_vector(m, s.freq.fy).unwrap();
        let phase = s.amplitude / s.amplitude.norm();
        // stacked vector [c1·a ; c2·conj(phase)·b] with c1·c2 = |s|
        let c1 = (rx * s.amplitude.norm()).sqrt();
        let c2 = (s.amplitude.norm() / rx).sqrt();
        let v: Vec<C64> = (0..n).map(|i| a[(i, 0)] * c1).chain((0..m).map(|j| b[(j, 0)] * c2 * phase.conj())).collect();
        for i in 0..n + m {
            for j in 0..n + m {
                block[(i, j)] += v[i] * v[j].conj();
            }
        }
    }
    let tr_x: f64 = (0..n).map(|i| block[(i, i)].re).sum();
    let tr_y: f64 = (n..n + m).map(|i| block[(i, i)].re).sum();
    (block, (tr_x + tr_y) / (2.0 * ((n * m) as f64).sqrt()))
}

#[test]
fn feasible_construction_bounds_the_optimum() {
    let opts = SolverOptions::default();
    for seed in 0..100 {
        let (n, m, spec) = random_instance(seed);
        let x = synthesize(&spec, n, m).unwrap();
        let (block, value) = feasible_block(&spec, n, m);
        let l1 = spec.l1_mass();
        // the construction reproduces X off the diagonal and costs Σ|s|
        let off = block.submatrix(0, n, n, m);
        assert!((&off - &x).max_abs() < 1e-10 * (1.0 + x.max_abs()), "seed {seed}");
        assert!((value - l1).abs() < 1e-10 * l1, "seed {seed}: {value} vs {l1}");
        assert!(psd_check(&block, 1e-10).unwrap(), "seed {seed}");
        let r = danm_exact(&x, &opts).unwrap();
        assert_eq!(r.solver.status, SolveStatus::Optimal, "seed {seed}");
        assert!(r.atomic_norm_value <= l1 + 1e-6 * l1.max(1.0), "seed {seed}: {} > {l1}", r.atomic_norm_value);
    }
}

#[test]
fn weak_duality_holds_at_every_iterate() {
    let opts = SolverOptions { record_history: true, ..Default::default() };
    for seed in 0..20 {
        let (n, m, spec) = random_instance(1000 + seed);
        let x = synthesize(&spec, n, m).unwrap();
        let p = danm_exact_problem(&x).unwrap();
        let sol = solve(&p, &opts).unwrap();
        assert!(!sol.history.is_empty());
        for (k, rec) in sol.history.iter().enumerate() {
            let tol = 1e-9 * (1.0 + rec.primal.abs());
            assert!(rec.primal >= rec.dual - tol, "seed {seed} iterate {k}: {} < {}", rec.primal, rec.dual);
            assert!(rec.complementarity >= -tol, "seed {seed} iterate {k}");
        }
    }
}

#[test]
fn solution_is_primal_and_dual_feasible() {
    let opts = SolverOptions::default();
    for seed in 0..10 {
        let (n, m, spec) = random_instance(2000 + seed);
        let x = synthesize(&spec, n, m).unwrap();
        let p = danm_exact_problem(&x).unwrap();
        let sol = solve(&p, &opts).unwrap();
        assert!(psd_check(&sol.psd_matrix.hermitian_part(), 1e-7).unwrap());
        assert!(psd_check(&sol.dual_matrix.hermitian_part(), 1e-7).unwrap());
        // complementary slackness at the optimum
        let comp = sol.psd_matrix.inner(&sol.dual_matrix).re;
        assert!(comp.abs() < 1e-5 * (1.0 + sol.objective_value.abs()), "seed {seed}: {comp}");
        assert!((sol.objective_value - sol.dual_objective).abs() < 1e-5 * (1.0 + sol.objective_value.abs()));
    }
}
