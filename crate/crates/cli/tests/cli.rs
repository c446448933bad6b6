//! Black-box tests of the `danm` binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use danm_cli::io::{read_spectrum, parse_spectrum};

fn danm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_danm")).args(args).output().expect("binary runs")
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn comment<'a>(text: &'a str, key: &str) -> Option<&'a str> {
    text.lines().find_map(|l| l.strip_prefix("# ")?.strip_prefix(key)?.strip_prefix(": "))
}

#[test]
fn gen_then_estimate_recovers_the_truth() {
    let dir = tempfile::tempdir().unwrap();
    let y = dir.path().join("y.txt");
    let truth = dir.path().join("truth.txt");
    let out = dir.path().join("est.txt");
    let g = danm(&["gen", "--n", "12", "--m", "10", "--l", "3", "--seed", "4", "--out", path_str(&y), "--truth", path_str(&truth)]);
    assert!(g.status.success(), "{}", String::from_utf8_lossy(&g.stderr));
    let e = danm(&["estimate", "--input", path_str(&y), "--noise-std", "0", "--out", path_str(&out)]);
    assert!(e.status.success(), "{}", String::from_utf8_lossy(&e.stderr));
    let t = read_spectrum(&truth).unwrap();
    let est = read_spectrum(&out).unwrap();
    assert!(danm::metrics::matched_mse(&t, &est).unwrap() < 1e-12);
    let text = fs::read_to_string(&out).unwrap();
    assert_eq!(comment(&text, "status"), Some("optimal"));
    let norm: f64 = comment(&text, "atomic_norm").unwrap().parse().unwrap();
    assert!((norm - t.l1_mass()).abs() < 1e-5 * t.l1_mass());
}

#[test]
fn unknown_noise_on_clean_file_is_detected_as_noise_free() {
    let dir = tempfile::tempdir().unwrap();
    let y = dir.path().join("y.txt");
    assert!(danm(&["gen", "--n", "12", "--m", "12", "--l", "2", "--out", path_str(&y)]).status.success());
    let e = danm(&["estimate", "--input", path_str(&y)]);
    assert!(e.status.success());
    let text = String::from_utf8(e.stdout).unwrap();
    assert!(comment(&text, "lambda").is_none(), "{text}");
    assert_eq!(parse_spectrum(&text, Path::new("-")).unwrap().len(), 2);
}

#[test]
fn default_scenario_with_generated_input() {
    let e = danm(&["estimate", "--gen", "N=16", "M=16", "L=4", "--snr", "20", "--method", "danm", "--seed", "1"]);
    assert!(e.status.success(), "{}", String::from_utf8_lossy(&e.stderr));
    let text = String::from_utf8(e.stdout).unwrap();
    let mse: f64 = comment(&text, "freq_mse").unwrap().parse().unwrap();
    assert!(mse <= 1e-4, "{mse}");
    assert_eq!(parse_spectrum(&text, Path::new("-")).unwrap().len(), 4);
}

#[test]
fn vectorized_and_decoupled_agree_on_small_problems() {
    let run = |method: &str| {
        let e = danm(&["estimate", "--gen", "N=8", "M=8", "L=3", "--min-sep", "0.2", "--seed", "9", "--method", method]);
        assert!(e.status.success(), "{}", String::from_utf8_lossy(&e.stderr));
        parse_spectrum(&String::from_utf8(e.stdout).unwrap(), Path::new("-")).unwrap()
    };
    let (d, v) = (run("danm"), run("vanm"));
    assert_eq!(d.len(), v.len());
    for (a, b) in d.sources.iter().zip(&v.sources) {
        assert!((a.freq.fx - b.freq.fx).abs() < 1e-5 && (a.freq.fy - b.freq.fy).abs() < 1e-5);
    }
}

#[test]
fn compressed_file_input_rebuilds_the_operator() {
    let dir = tempfile::tempdir().unwrap();
    let y = dir.path().join("y.txt");
    let truth = dir.path().join("t.txt");
    let common = ["--compress", "gaussian", "--kx", "10", "--ky", "10", "--seed", "21"];
    let mut gen = vec!["gen", "--n", "14", "--m", "14", "--l", "3", "--out", path_str(&y), "--truth", path_str(&truth)];
    gen.extend(common);
    assert!(danm(&gen).status.success());
    let mut est = vec!["estimate", "--input", path_str(&y), "--n", "14", "--m", "14", "--noise-std", "0"];
    est.extend(common);
    let e = danm(&est);
    assert!(e.status.success(), "{}", String::from_utf8_lossy(&e.stderr));
    let got = parse_spectrum(&String::from_utf8(e.stdout).unwrap(), Path::new("-")).unwrap();
    assert!(danm::metrics::matched_mse(&read_spectrum(&truth).unwrap(), &got).unwrap() < 1e-10);
}

#[test]
fn malformed_input_reports_position_and_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let y = dir.path().join("bad.txt");
    fs::write(&y, "2 2\n1+1j 2\n3 4x\n").unwrap();
    let e = danm(&["estimate", "--input", path_str(&y)]);
    assert_eq!(e.status.code(), Some(4));
    let msg = String::from_utf8(e.stderr).unwrap();
    assert!(msg.contains("bad.txt:3:3"), "{msg}");
    let missing = danm(&["estimate", "--input", path_str(&dir.path().join("nope.txt"))]);
    assert_eq!(missing.status.code(), Some(4));
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(danm(&["estimate", "--method", "music"]).status.code(), Some(2));
    assert_eq!(danm(&["estimate"]).status.code(), Some(2));
    assert_eq!(danm(&["frobnicate"]).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    fs::write(&cfg, "[separation]\ntrails = 3\n").unwrap();
    let b = danm(&["bench", "--config", path_str(&cfg)]);
    assert_eq!(b.status.code(), Some(2));
    assert!(String::from_utf8(b.stderr).unwrap().contains("trails"));
}

#[test]
fn bench_writes_csv_with_fixed_header() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    let csv = dir.path().join("r.csv");
    fs::write(&cfg, "seed = 3\n[separation]\ndeltas = [0.3]\nn = 8\nm = 8\ntrials = 3\n").unwrap();
    let b = danm(&["bench", "--config", path_str(&cfg), "--out", path_str(&csv)]);
    assert!(b.status.success(), "{}", String::from_utf8_lossy(&b.stderr));
    let text = fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "experiment,method,n,m,l,snr_db,rho,min_sep,trial,seed,freq_mse,success,wall_time_s,iterations,status,aggregate"
    );
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 4);
    assert!(rows[3].ends_with(",aggregate,true"), "{}", rows[3]);
    assert!(rows[0].starts_with("separation,danm,8,8,2,,1.0,0.3,0,"), "{}", rows[0]);
}
