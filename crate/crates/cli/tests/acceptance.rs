//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails. Run with `cargo test -p danm-cli --test acceptance`.
//! Set `DANM_ACCEPTANCE=C1,C5` to run a subset.

use std::collections::BTreeMap;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use danm::anm::{danm_exact, danm_exact_problem, mmv_decoupled, vanm_exact, DanmResult};
use danm::linalg::{hermitian_eig, C64, ComplexMatrix};
use danm::model::{complex_gaussian, random_spectrum, steering_vector, synthesize, trial_rng, AmplitudeLaw};
use danm::sdp::{solve, SolveStatus, SolverOptions};
use danm::toeplitz::{psd_check, toeplitz_project, HermitianToeplitz, DEFAULT_RANK_TOL};
use danm::{FrequencyPair, Source, SourceSpectrum};
use danm_cli::experiments::{run_experiment, Row};
use danm_cli::BenchConfig;
use rand::Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

/// Separated noise-free instances with L cycling through 1, 2, 3.
struct Instance {
    spec: SourceSpectrum,
    x: ComplexMatrix,
}

fn separated_instances(count: usize, n: usize, seed: u64) -> Vec<Instance> {
    (0..count)
        .map(|k| {
            let l = 1 + k % 3;
            let spec = random_spectrum(l, 0.25, AmplitudeLaw::Gaussian, seed + k as u64).unwrap();
            let x = synthesize(&spec, n, n).unwrap();
            Instance { spec, x }
        })
        .collect()
}

fn config(text: &str) -> BenchConfig {
    BenchConfig::parse(text, Path::new("acceptance.toml")).expect("valid acceptance config")
}

fn summaries(cfg: &BenchConfig, experiment: &str) -> Vec<Row> {
    let start = Instant::now();
    let out = run_experiment(cfg, experiment, |line| eprintln!("    {line}")).expect("experiment runs");
    eprintln!("    {experiment}: {} trials in {:.1}s", out.trials.len(), start.elapsed().as_secs_f64());
    out.rows.into_iter().filter(|r| r.aggregate).collect()
}

fn rate(row: &Row) -> f64 {
    row.success.parse().expect("aggregate rows hold a rate")
}

/// Optima shared by C1, C3 and C4.
struct SeparatedRuns {
    instances: Vec<Instance>,
    results: Vec<DanmResult>,
    times: Vec<f64>,
}

fn separated_runs() -> SeparatedRuns {
    let instances = separated_instances(50, 16, 1_000);
    let opts = SolverOptions::default();
    let mut results = Vec::new();
    let mut times = Vec::new();
    for inst in &instances {
        let start = Instant::now();
        results.push(danm_exact(&inst.x, &opts).expect("solver runs"));
        times.push(start.elapsed().as_secs_f64());
    }
    SeparatedRuns { instances, results, times }
}

fn c1(runs: &SeparatedRuns) -> Outcome {
    let mut worst = 0.0f64;
    for (inst, r) in runs.instances.iter().zip(&runs.results) {
        let l1 = inst.spec.l1_mass();
        worst = worst.max((r.atomic_norm_value - l1).abs() / l1);
    }
    let slowest = runs.times.iter().cloned().fold(0.0, f64::max);
    outcome(worst <= 1e-5 && slowest <= 5.0, format!("max rel error {worst:.2e} (≤ 1e-5), slowest {slowest:.3}s (≤ 5 s), 50 instances"))
}

fn c2() -> Outcome {
    let opts = SolverOptions::default();
    let mut worst = 0.0f64;
    for inst in separated_instances(25, 8, 2_000) {
        let d = danm_exact(&inst.x, &opts).unwrap().atomic_norm_value;
        let v = vanm_exact(&inst.x, &opts, 1024).unwrap().atomic_norm_value;
        worst = worst.max((d - v).abs() / d.abs().max(1e-300));
    }
    outcome(worst <= 1e-5, format!("max |danm − vanm|/danm = {worst:.2e} (≤ 1e-5), 25 instances N=M=8"))
}

fn c3(runs: &SeparatedRuns) -> Outcome {
    let opts = SolverOptions::default();
    let (mut worst, mut lowest) = (0.0f64, f64::INFINITY);
    for (inst, r) in runs.instances.iter().zip(&runs.results) {
        let mmv = mmv_decoupled(&inst.x, &opts).unwrap();
        let bound = mmv.norm_x / (inst.x.cols() as f64).sqrt();
        let d = r.atomic_norm_value;
        worst = worst.max((d - bound).abs() / d);
        lowest = lowest.min((d - bound) / d);
    }
    outcome(
        worst <= 1e-5 && lowest >= -1e-5,
        format!("max |danm − ‖X‖_Ax/√M|/danm = {worst:.2e}, min signed gap {lowest:.2e} (≥ −1e-5)"),
    )
}

fn numerical_rank(t: &HermitianToeplitz) -> usize {
    hermitian_eig(&t.materialize()).unwrap().numerical_rank(DEFAULT_RANK_TOL)
}

fn c4(runs: &SeparatedRuns) -> Outcome {
    let mut bad = Vec::new();
    for (k, (inst, r)) in runs.instances.iter().zip(&runs.results).enumerate() {
        let (lx, ly) = (inst.spec.distinct_fx().len(), inst.spec.distinct_fy().len());
        let (rx, ry) = (numerical_rank(&r.ux), numerical_rank(&r.uy));
        if (rx, ry) != (lx, ly) {
            bad.push(format!("#{k}: ranks ({rx},{ry}) vs ({lx},{ly})"));
        }
    }
    outcome(bad.is_empty(), format!("{} of 50 optima with rank(T(u_x)), rank(T(u_y)) ≠ (L_x, L_y) {}", bad.len(), bad.join(" ")))
}

fn c5() -> Outcome {
    let cfg = config("seed = 5\n[phase_L_N]\nls = [4]\nsizes = [16]\nmin_sep = 0.1\ntrials = 100\n");
    let rows = summaries(&cfg, "phase_L_N");
    let r = rate(&rows[0]);
    outcome(r >= 0.95, format!("success rate {r:.2} (≥ 0.95), N=M=16, L=4, Δ=0.1, 100 trials, mean MSE {:.2e}", rows[0].freq_mse))
}

fn c6() -> Outcome {
    let cfg = config("seed = 6\n[separation]\ndeltas = [0.02, 0.04, 0.06, 0.1, 0.2]\ntrials = 50\n");
    let rows = summaries(&cfg, "separation");
    let rates: Vec<(f64, f64)> = rows.iter().map(|r| (r.min_sep, rate(r))).collect();
    let first = rates[0].1;
    let last = rates[rates.len() - 1].1;
    // a drop larger than two standard errors of a 50-trial proportion counts as non-monotone
    let monotone = rates.windows(2).all(|w| {
        let p = 0.5 * (w[0].1 + w[1].1);
        w[1].1 >= w[0].1 - (2.0 * (p * (1.0 - p) / 50.0).sqrt()).max(0.04)
    });
    let table: Vec<String> = rates.iter().map(|(d, r)| format!("Δ={d}:{r:.2}")).collect();
    outcome(
        first <= 0.2 && last >= 0.95 && monotone,
        format!("{} (need ≤ 0.2 at 0.02, ≥ 0.95 at 0.2, monotone{})", table.join(" "), if monotone { "" } else { " — violated" }),
    )
}

fn c7() -> Outcome {
    let cfg = config("seed = 7\n[phase_L_N]\nls = [2, 3, 4, 5, 6, 7]\nsizes = [16]\nmin_sep = 0.05\ntrials = 50\n");
    let rows = summaries(&cfg, "phase_L_N");
    let rates: Vec<(usize, f64)> = rows.iter().map(|r| (r.l, rate(r))).collect();
    let low_ok = rates.iter().filter(|(l, _)| *l <= 4).all(|(_, r)| *r >= 0.9);
    let high_ok = rates.iter().filter(|(l, _)| *l >= 6).all(|(_, r)| *r <= 0.5);
    let table: Vec<String> = rates.iter().map(|(l, r)| format!("L={l}:{r:.2}")).collect();
    outcome(low_ok && high_ok, format!("{} (need ≥ 0.9 for L ≤ 4, ≤ 0.5 from L = 6)", table.join(" ")))
}

fn c8() -> Outcome {
    // targets chosen so that the realized ratios K²/256 straddle both thresholds
    let cfg = config(
        "seed = 8\n[compression]\nrhos = [0.035, 0.0625, 0.1, 0.14, 0.19, 0.25, 0.32]\nl = 4\nmin_sep = 0.1\nkind = 'bernoulli'\ntrials = 50\n",
    );
    let rows = summaries(&cfg, "compression");
    let rates: Vec<(f64, f64)> = rows.iter().map(|r| (r.rho, rate(r))).collect();
    let high_ok = rates.iter().filter(|(rho, _)| *rho >= 0.25).all(|(_, r)| *r >= 0.9);
    let low_ok = rates.iter().filter(|(rho, _)| *rho <= 0.05).all(|(_, r)| *r <= 0.5);
    let covered = rates.iter().any(|(rho, _)| *rho >= 0.25) && rates.iter().any(|(rho, _)| *rho <= 0.05);
    let table: Vec<String> = rates.iter().map(|(rho, r)| format!("ρ={rho:.3}:{r:.2}")).collect();
    outcome(high_ok && low_ok && covered, format!("{} (need ≥ 0.9 at ρ ≥ 0.25, ≤ 0.5 at ρ ≤ 0.05)", table.join(" ")))
}

fn c9() -> Outcome {
    let cfg = config("seed = 9\n[runtime]\nsizes = [8, 10, 12, 14, 16]\nl = 4\nmin_sep = 0.1\nmethods = ['danm', 'vanm']\ntrials = 5\n");
    let rows = summaries(&cfg, "runtime");
    let danm: Vec<(f64, f64)> =
        rows.iter().filter(|r| r.method == "danm").map(|r| (((r.n + r.m) as f64).ln(), r.wall_time_s.ln())).collect();
    // least-squares slope of log time against log(N+M)
    let k = danm.len() as f64;
    let (mx, my) = (danm.iter().map(|p| p.0).sum::<f64>() / k, danm.iter().map(|p| p.1).sum::<f64>() / k);
    let slope = danm.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / danm.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
    let at16 = |m: &str| rows.iter().find(|r| r.method == m && r.n == 16).map(|r| r.wall_time_s).unwrap();
    let ratio = at16("vanm") / at16("danm");
    outcome(
        slope <= 4.5 && ratio >= 10.0,
        format!("danm log-log slope {slope:.2} (≤ 4.0 ± 0.5), vanm/danm median time at N=M=16 {ratio:.1} (≥ 10)"),
    )
}

fn c10() -> Outcome {
    let cfg = config("seed = 10\n[mse_snr]\nsnr_db = [0.0, 10.0, 20.0, 30.0]\nn = 16\nm = 16\nl = 4\nmin_sep = 0.1\nmethods = ['danm', 'vanm', 'cs']\ntrials = 50\n");
    let rows = summaries(&cfg, "mse_snr");
    let mut by_snr: BTreeMap<i64, BTreeMap<String, f64>> = BTreeMap::new();
    for r in &rows {
        by_snr.entry(r.snr_db.unwrap().round() as i64).or_default().insert(r.method.clone(), r.freq_mse);
    }
    let mut pass = true;
    let mut parts = Vec::new();
    for (snr, m) in &by_snr {
        let (d, v, c) = (m["danm"], m["vanm"], m["cs"]);
        let ratio = (d / v).max(v / d);
        pass &= ratio <= 2.0 && c >= 1e-4;
        if *snr == 30 {
            pass &= d <= 1e-5;
        }
        parts.push(format!("{snr}dB: danm {d:.2e} vanm {v:.2e} (×{ratio:.2}) cs {c:.2e}"));
    }
    outcome(pass, format!("{} (need ratio ≤ 2, cs ≥ 1e-4, danm@30dB ≤ 1e-5)", parts.join("; ")))
}

fn c11() -> Outcome {
    let mut failures = Vec::new();
    let opts = SolverOptions { record_history: true, ..SolverOptions::default() };
    let mut rng = trial_rng(11, 0);
    let mut iterates = 0;
    for k in 0..100 {
        let (n, m, l) = (rng.gen_range(3..=8), rng.gen_range(3..=8), rng.gen_range(1..=4));
        let sources: Vec<Source> = (0..l)
            .map(|_| Source { amplitude: complex_gaussian(&mut rng), freq: FrequencyPair::new(rng.gen(), rng.gen()).unwrap() })
            .collect();
        let spec = SourceSpectrum::new(sources);
        let x = synthesize(&spec, n, m).unwrap();
        // feasible point T_x = √(M/N) Σ|s| a a^H, T_y = √(N/M) Σ|s| b b^H
        let r = ((m as f64) / (n as f64)).sqrt();
        let mut block = ComplexMatrix::zeros(n + m, n + m);
        for s in &spec.sources {
            let a = steering_vector(n, s.freq.fx).unwrap();
            let b = steering_vector(m, s.freq.fy).unwrap();
            let ph = s.amplitude / s.amplitude.norm();
            let v: Vec<C64> = (0..n)
                .map(|i| a[(i, 0)] * (r * s.amplitude.norm()).sqrt())
                .chain((0..m).map(|j| b[(j, 0)] * ph.conj() * (s.amplitude.norm() / r).sqrt()))
                .collect();
            for i in 0..n + m {
                for j in 0..n + m {
                    block[(i, j)] += v[i] * v[j].conj();
                }
            }
        }
        if !psd_check(&block, 1e-10).unwrap() || (&block.submatrix(0, n, n, m) - &x).max_abs() > 1e-10 * (1.0 + x.max_abs()) {
            failures.push(format!("construction #{k} not feasible"));
        }
        let sol = solve(&danm_exact_problem(&x).unwrap(), &opts).unwrap();
        let value = danm_exact(&x, &SolverOptions::default()).unwrap().atomic_norm_value;
        if sol.status != SolveStatus::Optimal || value > spec.l1_mass() + 1e-6 * spec.l1_mass().max(1.0) {
            failures.push(format!("#{k}: optimum {value:.6} above feasible value {:.6}", spec.l1_mass()));
        }
        for rec in &sol.history {
            iterates += 1;
            if rec.primal < rec.dual - 1e-9 * (1.0 + rec.primal.abs()) {
                failures.push(format!("#{k}: weak duality violated ({} < {})", rec.primal, rec.dual));
            }
        }
        // Toeplitz projection: idempotent, Hermitian, orthogonal residual
        let a = ComplexMatrix::from_fn(n, n, |_, _| complex_gaussian(&mut rng));
        let p = toeplitz_project(&a).unwrap();
        let pp = toeplitz_project(&p.materialize()).unwrap();
        let idem = p.first_row().iter().zip(pp.first_row()).all(|(u, v)| (u - v).norm() < 1e-12);
        let probe = HermitianToeplitz::from_spectrum(n, &[rng.gen()], &[1.0]).materialize();
        let orth = (&a.hermitian_part() - &p.materialize()).inner(&probe).norm() < 1e-9 * a.frobenius_norm() * probe.frobenius_norm();
        if !idem || !orth || !p.materialize().is_hermitian(1e-14) {
            failures.push(format!("#{k}: Toeplitz projection invariant violated"));
        }
    }
    outcome(
        failures.is_empty(),
        format!("100 random constructions, {iterates} iterates checked for weak duality; {} failures {}", failures.len(), failures.join("; ")),
    )
}

fn strip_wall_time(csv: &str) -> String {
    let col = danm_cli::CSV_COLUMNS.iter().position(|c| *c == "wall_time_s").unwrap();
    csv.lines()
        .map(|l| l.split(',').enumerate().filter(|(k, _)| *k != col).map(|(_, f)| f).collect::<Vec<_>>().join(","))
        .collect::<Vec<_>>()
        .join("\n")
}

fn c12() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("det.toml");
    std::fs::write(
        &cfg,
        "seed = 12\n[separation]\ndeltas = [0.06, 0.2]\nn = 12\nm = 12\ntrials = 4\n\
         [compression]\nrhos = [0.25]\nn = 12\nm = 12\nl = 3\ntrials = 3\n\
         [mse_snr]\nsnr_db = [10.0]\nn = 10\nm = 10\nl = 2\nmethods = ['danm', 'mmv', 'cs']\ntrials = 3\n",
    )
    .unwrap();
    let mut outputs = Vec::new();
    for run in 0..2 {
        let out = dir.path().join(format!("run{run}.csv"));
        let status = Command::new(env!("CARGO_BIN_EXE_danm"))
            .args(["bench", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()])
            .status()
            .expect("binary runs");
        if !status.success() {
            return outcome(false, format!("bench exited with {status}"));
        }
        outputs.push(std::fs::read_to_string(out).unwrap());
    }
    let same = strip_wall_time(&outputs[0]) == strip_wall_time(&outputs[1]);
    let rows = outputs[0].lines().count() - 1;
    outcome(same && rows > 0, format!("two runs of a 3-experiment config, {rows} rows each: {}", if same { "identical" } else { "DIFFER" }))
}

fn main() {
    let selected: Option<Vec<String>> =
        std::env::var("DANM_ACCEPTANCE").ok().map(|s| s.split(',').map(|p| p.trim().to_uppercase()).collect());
    let wanted = |name: &str| selected.as_ref().map_or(true, |s| s.iter().any(|p| p == name));
    let needs_separated = ["C1", "C3", "C4"].iter().any(|c| wanted(c));
    let runs = needs_separated.then(separated_runs);

    let criteria: Vec<(&str, &str, Box<dyn Fn() -> Outcome + '_>)> = vec![
        ("C1", "atomic-norm equality", Box::new(|| c1(runs.as_ref().unwrap()))),
        ("C2", "decoupled = vectorized", Box::new(c2)),
        ("C3", "MMV relation", Box::new(|| c3(runs.as_ref().unwrap()))),
        ("C4", "witness ranks", Box::new(|| c4(runs.as_ref().unwrap()))),
        ("C5", "exact recovery + pairing", Box::new(c5)),
        ("C6", "separation collapse", Box::new(c6)),
        ("C7", "phase transition in L", Box::new(c7)),
        ("C8", "compression", Box::new(c8)),
        ("C9", "runtime scaling", Box::new(c9)),
        ("C10", "noisy MSE", Box::new(c10)),
        ("C11", "solver unit suite", Box::new(c11)),
        ("C12", "determinism", Box::new(c12)),
    ];
    let mut failed = Vec::new();
    for (id, title, check) in &criteria {
        if !wanted(id) {
            continue;
        }
        let start = Instant::now();
        let o = check();
        let verdict = if o.pass { "PASS" } else { "FAIL" };
        println!("{id:<4} {verdict} {title}: {} [{:.1}s]", o.detail, start.elapsed().as_secs_f64());
        if !o.pass {
            failed.push(*id);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all selected criteria passed");
    } else {
        println!("acceptance: FAILED {}", failed.join(", "));
        std::process::exit(1);
    }
}
