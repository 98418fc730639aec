use std::path::PathBuf;
use std::process::Command;

use hqam_cli::config::{ConstraintMode, CsiMode};
use hqam_cli::{run_experiment, validate_config, write_csv, Row};
use hqam_core::power::SolverKind;
use hqam_core::units::{db_to_linear, linear_to_db};

fn config_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("configs").join(name)
}

fn load(name: &str) -> hqam_cli::ExperimentConfig {
    let text = std::fs::read_to_string(config_path(name)).unwrap();
    validate_config(&text).unwrap()
}

fn csv_text(cfg: &hqam_cli::ExperimentConfig, rows: &[Row]) -> String {
    let mut buf = Vec::new();
    write_csv(cfg, rows, &mut buf).unwrap();
    String::from_utf8(buf).unwrap()
}

const SMALL: &str = r#"
q_avg_db = 4.0
p_pk_db = 10.0
csi = "instantaneous"
[optimizer]
samples = 500
eval_samples = 500
[link]
n_packets = 16
synthetic = [16, 16]
[sweep]
axis = "p_d"
values = [0.6, 0.9]
seeds = [3, 1, 2]
"#;

#[test]
fn default_values_echo() {
    let cfg = load("statistical_lambda.toml");
    assert_eq!(cfg.sigma_n2, 0.01);
    assert_eq!(cfg.sigma_w2, 0.5);
    assert_eq!(cfg.prior_busy, 0.4);
    assert!((cfg.prior_idle() - 0.6).abs() < 1e-15);
    assert_eq!(cfg.csi, vec![CsiMode::Statistical]);
    assert!((cfg.p_pk.unwrap() - 10.0).abs() < 1e-12);
    assert!((cfg.q_avg - db_to_linear(4.0)).abs() < 1e-12);

    let trend = load("trend_pd.toml");
    assert_eq!(trend.link.as_ref().unwrap().params.thr, 1.8);
}

#[test]
fn probability_out_of_range_names_field_and_bound() {
    let text = SMALL.replace("q_avg_db = 4.0", "q_avg_db = 4.0\np_d = 1.2");
    let err = validate_config(&text).unwrap_err();
    let d = err.diagnostics.iter().find(|d| d.field == "p_d").expect("p_d diagnostic");
    assert!(d.message.contains("[0, 1]"), "{d}");
    assert_eq!(d.line, Some(3));
}

#[test]
fn missing_interference_limit_is_required() {
    let text = SMALL.replace("q_avg_db = 4.0\n", "");
    let err = validate_config(&text).unwrap_err();
    let d = err.diagnostics.iter().find(|d| d.field == "q_avg_db").expect("q_avg_db diagnostic");
    assert!(d.message.contains("required"));
}

#[test]
fn all_errors_reported_together() {
    let text = SMALL
        .replace("q_avg_db = 4.0\n", "m_h = 0.2\nlambda = -1\n")
        .replace("seeds = [3, 1, 2]", "seeds = []");
    let err = validate_config(&text).unwrap_err();
    for f in ["m_h", "lambda", "q_avg_db", "sweep.seeds"] {
        assert!(err.mentions(f), "{f} missing from {err}");
    }
}

#[test]
fn sweep_values_checked_against_axis_domain() {
    let text = SMALL.replace("values = [0.6, 0.9]", "values = [0.6, 1.5]");
    assert!(validate_config(&text).unwrap_err().mentions("sweep.values"));
}

#[test]
fn db_round_trip() {
    for i in -400..=600 {
        let db = f64::from(i) * 0.1;
        assert!((linear_to_db(db_to_linear(db)) - db).abs() < 1e-12);
    }
}

#[test]
fn single_point_sweep_gives_one_row_per_seed() {
    let text = SMALL.replace("values = [0.6, 0.9]", "values = [0.8]");
    let cfg = validate_config(&text).unwrap();
    let rows = run_experiment(&cfg, 2, false).unwrap();
    assert_eq!(rows.len(), cfg.seeds.len());
    let seeds: Vec<u64> = rows.iter().map(|r| r.job.seed).collect();
    assert_eq!(seeds, vec![3, 1, 2]);
}

#[test]
fn output_is_deterministic_across_worker_counts() {
    let cfg = validate_config(SMALL).unwrap();
    let a = csv_text(&cfg, &run_experiment(&cfg, 1, false).unwrap());
    let b = csv_text(&cfg, &run_experiment(&cfg, 3, false).unwrap());
    assert_eq!(a, b);
    assert!(a.starts_with("# hqam-cr csv v1\naxis,value,seed,"));
    assert_eq!(a.lines().count(), 2 + 2 * 3);
}

#[test]
fn statistical_lambda_powers() {
    let cfg = load("statistical_lambda.toml");
    let rows = run_experiment(&cfg, 0, false).unwrap();
    assert_eq!(rows.len(), 9);
    for r in &rows {
        let [p0, p1] = r.p;
        assert!(p0 > 2.78 * 0.95 && p0 < 2.81 * 1.05, "lambda {}: P0 = {p0}", r.job.value);
        assert!(p1 > 2.38 * 0.95 && p1 < 2.40 * 1.05, "lambda {}: P1 = {p1}", r.job.value);
    }
}

/// `expected` holds `[exact, approximate]` HP error rates for the average
/// and the peak limit.
fn lambert_vs_exact_check(name: &str, expected: [[f64; 2]; 2]) {
    let cfg = load(name);
    let rows = run_experiment(&cfg, 0, false).unwrap();
    for (mode, [exact, approx]) in [ConstraintMode::Average, ConstraintMode::Peak].into_iter().zip(expected) {
        let ber = |s: SolverKind| {
            rows.iter().find(|r| r.job.solver == s && r.job.constraint == mode).unwrap().ber_hp
        };
        let (e, a) = (ber(SolverKind::Exact), ber(SolverKind::Lambert));
        assert!((e / exact - 1.0).abs() <= 0.15, "{mode:?}: exact BER_HP {e} vs {exact}");
        assert!((a / approx - 1.0).abs() <= 0.15, "{mode:?}: Lambert BER_HP {a} vs {approx}");
        assert!(a >= e, "{mode:?}: the approximation should not beat the exact policy");
    }
    for r in &rows {
        assert!(r.iterations.is_some() && r.mu.is_some());
    }
}

#[test]
fn lambert_vs_exact_10db() {
    lambert_vs_exact_check("lambert_vs_exact_10db.toml", [[0.0404, 0.0428], [0.042, 0.044]]);
}

#[test]
fn lambert_vs_exact_15db() {
    lambert_vs_exact_check("lambert_vs_exact_15db.toml", [[0.0174, 0.0182], [0.0178, 0.0186]]);
}

fn binary() -> Command {
    Command::new(env!("CARGO_BIN_EXE_hqam-cr"))
}

#[test]
fn binary_writes_csv_and_trace() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.toml");
    std::fs::write(&cfg, SMALL).unwrap();
    let out = dir.path().join("out.csv");
    let status = binary()
        .args(["--config", cfg.to_str().unwrap(), "--output", out.to_str().unwrap()])
        .args(["--workers", "2", "--emit-dual-trace"])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let csv = std::fs::read_to_string(&out).unwrap();
    assert_eq!(csv.lines().count(), 8);
    let trace = std::fs::read_to_string(dir.path().join("out.csv.trace.csv")).unwrap();
    assert!(trace.lines().nth(1).unwrap().starts_with("value,seed,constraint,csi,solver,iteration,mu1,mu2"));
    assert!(trace.lines().count() > 8);
}

#[test]
fn binary_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, SMALL.replace("q_avg_db = 4.0", "q_avg_db = 4.0\np_d = 1.2")).unwrap();
    let out = binary().args(["--config", bad.to_str().unwrap()]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("p_d"));

    let stuck = dir.path().join("stuck.toml");
    std::fs::write(&stuck, SMALL.replace("eval_samples = 500", "eval_samples = 500\nmax_iter = 2")).unwrap();
    let out = binary().args(["--config", stuck.to_str().unwrap()]).output().unwrap();
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn statistical_rows_have_no_duals() {
    let text = SMALL.replace("csi = \"instantaneous\"", "csi = [\"statistical\", \"instantaneous\"]");
    let cfg = validate_config(&text).unwrap();
    let rows = run_experiment(&cfg, 0, false).unwrap();
    assert_eq!(rows.len(), 2 * 2 * 3);
    for r in &rows {
        assert_eq!(r.mu.is_none(), r.job.csi == CsiMode::Statistical);
        assert!(r.link.is_some());
    }
}
