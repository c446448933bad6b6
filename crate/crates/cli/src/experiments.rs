//! Monte-Carlo sweeps producing one CSV row per trial plus per-cell summaries.
//!
//! Every `(cell, trial)` pair gets a seed derived from the master seed, the
//! cell index and the trial index; all methods in a cell see the same data.
//! Trials run sequentially and rows are written in `(cell, method, trial)`
//! order, so the output is reproducible apart from `wall_time_s`.

use std::io::Write;
use std::time::Instant;

use danm::estimator::{default_lambda, estimate, EstimatorConfig, Method};
use danm::metrics::{matched_mse_report, success, TrialRecord, MISS_PENALTY};
use danm::model::{trial_rng, AmplitudeLaw};
use danm::{CompressionKind, SolverKind, SolverOptions};
use rand::Rng;
use serde::Serialize;

use crate::config::{BenchConfig, SolverSection};
use crate::error::{CliError, CliResult};
use crate::scenario::{generate, ScenarioSpec, SourceLayout};

/// CSV header, in column order.
pub const CSV_COLUMNS: [&str; 16] = [
    "experiment",
    "method",
    "n",
    "m",
    "l",
    "snr_db",
    "rho",
    "min_sep",
    "trial",
    "seed",
    "freq_mse",
    "success",
    "wall_time_s",
    "iterations",
    "status",
    "aggregate",
];

/// One swept parameter combination.
#[derive(Clone, Debug, PartialEq)]
pub struct Cell {
    pub experiment: &'static str,
    pub scenario: ScenarioSpec,
    pub methods: Vec<Method>,
    pub trials: usize,
}

impl Cell {
    pub fn rho(&self) -> f64 {
        let s = &self.scenario;
        (s.kx * s.ky) as f64 / (s.n * s.m) as f64
    }
}

/// A CSV row: a trial or a per-cell summary.
///
/// Summary rows (`aggregate = true`) hold the mean MSE in `freq_mse`, the
/// success rate in `success`, the median wall time and iteration count, the
/// number of trials in `trial` and the master seed in `seed`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Row {
    pub experiment: String,
    pub method: String,
    pub n: usize,
    pub m: usize,
    pub l: usize,
    pub snr_db: Option<f64>,
    pub rho: f64,
    pub min_sep: f64,
    pub trial: usize,
    pub seed: u64,
    pub freq_mse: f64,
    pub success: String,
    pub wall_time_s: f64,
    pub iterations: usize,
    pub status: String,
    pub aggregate: bool,
}

impl From<&TrialRecord> for Row {
    fn from(r: &TrialRecord) -> Self {
        Row {
            experiment: r.experiment.clone(),
            method: r.method.clone(),
            n: r.n,
            m: r.m,
            l: r.l,
            snr_db: r.snr_db,
            rho: r.rho,
            min_sep: r.min_sep,
            trial: r.trial,
            seed: r.seed,
            freq_mse: r.freq_mse,
            success: r.success.to_string(),
            wall_time_s: r.wall_time_s,
            iterations: r.iterations,
            status: r.status.clone(),
            aggregate: false,
        }
    }
}

fn parse_methods(list: &[String]) -> CliResult<Vec<Method>> {
    list.iter().map(|m| m.parse::<Method>().map_err(|e| CliError::Usage(e.to_string()))).collect()
}

fn parse_kind(kind: &str) -> CliResult<CompressionKind> {
    kind.parse::<CompressionKind>().map_err(|e| CliError::Usage(e.to_string()))
}

/// Rows kept per axis for a target ratio `ρ` (at least one).
pub fn compressed_size(dim: usize, rho: f64) -> usize {
    ((dim as f64 * rho.sqrt()).round() as usize).clamp(1, dim)
}

fn uncompressed(n: usize, m: usize, layout: SourceLayout, snr_db: Option<f64>) -> ScenarioSpec {
    ScenarioSpec {
        n,
        m,
        layout,
        amplitude: AmplitudeLaw::UnitModulus,
        snr_db,
        compression: CompressionKind::Identity,
        kx: n,
        ky: m,
    }
}

fn check_trials(trials: usize, name: &str) -> CliResult<()> {
    if trials == 0 {
        return Err(CliError::Usage(format!("{name}: trials must be positive")));
    }
    Ok(())
}

/// Expands one experiment of the configuration into its cells.
pub fn cells(cfg: &BenchConfig, experiment: &str) -> CliResult<Vec<Cell>> {
    let mut out = Vec::new();
    let missing = || CliError::Usage(format!("experiment '{experiment}' is not configured"));
    match experiment {
        "runtime" => {
            let c = cfg.runtime.as_ref().ok_or_else(missing)?;
            check_trials(c.trials, experiment)?;
            let methods = parse_methods(&c.methods)?;
            for &n in &c.sizes {
                let layout = SourceLayout::Random { l: c.l, min_sep: c.min_sep };
                out.push(Cell { experiment: "runtime", scenario: uncompressed(n, n, layout, None), methods: methods.clone(), trials: c.trials });
            }
        }
        "mse_snr" => {
            let c = cfg.mse_snr.as_ref().ok_or_else(missing)?;
            check_trials(c.trials, experiment)?;
            let methods = parse_methods(&c.methods)?;
            for &snr in &c.snr_db {
                let layout = SourceLayout::Random { l: c.l, min_sep: c.min_sep };
                out.push(Cell { experiment: "mse_snr", scenario: uncompressed(c.n, c.m, layout, Some(snr)), methods: methods.clone(), trials: c.trials });
            }
        }
        "separation" => {
            let c = cfg.separation.as_ref().ok_or_else(missing)?;
            check_trials(c.trials, experiment)?;
            let methods = parse_methods(&c.methods)?;
            for &delta in &c.deltas {
                let layout = SourceLayout::TwoSources { delta };
                out.push(Cell { experiment: "separation", scenario: uncompressed(c.n, c.m, layout, None), methods: methods.clone(), trials: c.trials });
            }
        }
        "compression" => {
            let c = cfg.compression.as_ref().ok_or_else(missing)?;
            check_trials(c.trials, experiment)?;
            let methods = parse_methods(&c.methods)?;
            let kind = parse_kind(&c.kind)?;
            for &rho in &c.rhos {
                let mut s = uncompressed(c.n, c.m, SourceLayout::Random { l: c.l, min_sep: c.min_sep }, None);
                s.compression = kind;
                s.kx = compressed_size(c.n, rho);
                s.ky = compressed_size(c.m, rho);
                out.push(Cell { experiment: "compression", scenario: s, methods: methods.clone(), trials: c.trials });
            }
        }
        "phase_L_N" => {
            let c = cfg.phase_l_n.as_ref().ok_or_else(missing)?;
            check_trials(c.trials, experiment)?;
            let methods = parse_methods(&c.methods)?;
            for &n in &c.sizes {
                for &l in &c.ls {
                    let layout = SourceLayout::Random { l, min_sep: c.min_sep };
                    out.push(Cell { experiment: "phase_L_N", scenario: uncompressed(n, n, layout, None), methods: methods.clone(), trials: c.trials });
                }
            }
        }
        "phase_L_rho" => {
            let c = cfg.phase_l_rho.as_ref().ok_or_else(missing)?;
            check_trials(c.trials, experiment)?;
            let methods = parse_methods(&c.methods)?;
            let kind = parse_kind(&c.kind)?;
            for &rho in &c.rhos {
                for &l in &c.ls {
                    let mut s = uncompressed(c.n, c.m, SourceLayout::Random { l, min_sep: c.min_sep }, None);
                    if rho < 1.0 {
                        s.compression = kind;
                        s.kx = compressed_size(c.n, rho);
                        s.ky = compressed_size(c.m, rho);
                    }
                    out.push(Cell { experiment: "phase_L_rho", scenario: s, methods: methods.clone(), trials: c.trials });
                }
            }
        }
        other => return Err(CliError::Usage(format!("unknown experiment '{other}'"))),
    }
    Ok(out)
}

/// Seed of trial `trial` in cell `cell`.
pub fn trial_seed(master: u64, experiment: &str, cell: usize, trial: usize) -> u64 {
    // experiment names enter through a fixed FNV-1a hash to keep sweeps independent
    let tag = experiment.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| (h ^ b as u64).wrapping_mul(0x100_0000_01b3));
    let stream = tag ^ ((cell as u64) << 32 | trial as u64);
    trial_rng(master, stream).gen()
}

pub fn solver_options(s: &SolverSection) -> CliResult<SolverOptions> {
    let kind: SolverKind = s.kind.parse().map_err(|e: danm::Error| CliError::Usage(e.to_string()))?;
    Ok(SolverOptions {
        kind,
        max_iter: s.max_iter,
        gap_tol: s.gap_tol,
        admm_max_iter: s.admm_max_iter,
        ..SolverOptions::default()
    })
}

/// Runs one trial of `method` on the scenario seeded with `seed`.
pub fn run_trial(cell: &Cell, method: Method, trial: usize, seed: u64, solver: &SolverSection) -> CliResult<TrialRecord> {
    let spec = &cell.scenario;
    let mut record = TrialRecord {
        experiment: cell.experiment.to_string(),
        method: method.as_str().to_string(),
        n: spec.n,
        m: spec.m,
        l: spec.layout.num_sources(),
        snr_db: spec.snr_db,
        rho: cell.rho(),
        min_sep: spec.layout.separation(),
        trial,
        seed,
        freq_mse: MISS_PENALTY,
        success: false,
        wall_time_s: 0.0,
        iterations: 0,
        status: String::new(),
    };
    let scenario = match generate(spec, seed) {
        Ok(s) => s,
        Err(e) => {
            record.status = format!("error: {e}");
            return Ok(record);
        }
    };
    let lambda = (scenario.noise_std > 0.0).then(|| solver.lambda_scale * default_lambda(scenario.noise_std, spec.n, spec.m));
    let cfg = EstimatorConfig {
        method,
        solver: solver_options(solver)?,
        lambda,
        noise_std: Some(scenario.noise_std),
        model_order: Some(record.l),
        epsilon: solver.epsilon,
        vanm_cap: solver.vanm_cap,
        ..EstimatorConfig::default()
    };
    let start = Instant::now();
    let result = estimate(&scenario.observation, &scenario.operator, &cfg);
    record.wall_time_s = start.elapsed().as_secs_f64();
    match result {
        Ok(est) => {
            let report = matched_mse_report(&scenario.truth, &est.spectrum)?;
            record.freq_mse = report.mse;
            record.success = success(report.mse, solver.success_threshold);
            record.iterations = est.iterations;
            let flags = est.flags.describe();
            record.status =
                if flags.is_empty() { est.status.as_str().to_string() } else { format!("{};{flags}", est.status.as_str()) };
        }
        Err(e) => record.status = format!("error: {e}"),
    }
    Ok(record)
}

fn median(mut v: Vec<f64>) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    v.sort_by(f64::total_cmp);
    let k = v.len() / 2;
    if v.len() % 2 == 1 {
        v[k]
    } else {
        0.5 * (v[k - 1] + v[k])
    }
}

/// Summary row of the trials of one `(cell, method)`.
pub fn aggregate(records: &[TrialRecord], master_seed: u64) -> Row {
    let first = &records[0];
    let count = records.len() as f64;
    let rate = records.iter().filter(|r| r.success).count() as f64 / count;
    let mut row = Row::from(first);
    row.trial = records.len();
    row.seed = master_seed;
    row.freq_mse = records.iter().map(|r| r.freq_mse).sum::<f64>() / count;
    row.success = rate.to_string();
    row.wall_time_s = median(records.iter().map(|r| r.wall_time_s).collect());
    row.iterations = median(records.iter().map(|r| r.iterations as f64).collect()).round() as usize;
    let failures = records.iter().filter(|r| r.status.starts_with("error")).count();
    row.status = if failures == 0 { "aggregate".into() } else { format!("aggregate;{failures} errors") };
    row.aggregate = true;
    row
}

/// Everything produced by one experiment.
#[derive(Clone, Debug, Default)]
pub struct ExperimentOutput {
    pub trials: Vec<TrialRecord>,
    pub rows: Vec<Row>,
}

/// Runs one experiment; `progress` receives one line per finished cell.
pub fn run_experiment(
    cfg: &BenchConfig,
    experiment: &str,
    mut progress: impl FnMut(&str),
) -> CliResult<ExperimentOutput> {
    let mut out = ExperimentOutput::default();
    for (ci, cell) in cells(cfg, experiment)?.iter().enumerate() {
        let seeds: Vec<u64> = (0..cell.trials).map(|t| trial_seed(cfg.seed, experiment, ci, t)).collect();
        for &method in &cell.methods {
            let records = seeds
                .iter()
                .enumerate()
                .map(|(t, &seed)| run_trial(cell, method, t, seed, &cfg.solver))
                .collect::<CliResult<Vec<_>>>()?;
            out.rows.extend(records.iter().map(Row::from));
            let summary = aggregate(&records, cfg.seed);
            progress(&format!(
                "{experiment} cell {ci} {}: n={} l={} snr={:?} rho={:.3} sep={} mse={:.3e} success={} median_time={:.3}s",
                summary.method,
                summary.n,
                summary.l,
                summary.snr_db,
                summary.rho,
                summary.min_sep,
                summary.freq_mse,
                summary.success,
                summary.wall_time_s
            ));
            out.rows.push(summary);
            out.trials.extend(records);
        }
    }
    Ok(out)
}

/// Writes rows as CSV with the fixed header.
pub fn write_csv<W: Write>(writer: W, rows: &[Row]) -> CliResult<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(writer);
    w.write_record(CSV_COLUMNS)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| CliError::io("<csv>", e))?;
    Ok(())
}

/// Runs every enabled experiment (or only `only`) and returns all rows.
pub fn run_bench(cfg: &BenchConfig, only: Option<&str>, progress: impl FnMut(&str) + Copy) -> CliResult<Vec<Row>> {
    let names: Vec<&str> = match only {
        Some(name) => vec![name],
        None => cfg.enabled(),
    };
    if names.is_empty() {
        return Err(CliError::Usage("the configuration enables no experiment".into()));
    }
    let mut rows = Vec::new();
    for name in names {
        rows.extend(run_experiment(cfg, name, progress)?.rows);
    }
    Ok(rows)
}
