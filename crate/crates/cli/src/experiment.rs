//! Sweep execution and CSV output.

use std::fs::File;
use std::io::{self, BufReader, Write};
use std::path::{Path, PathBuf};

use hqam_core::link::{run_session, GrayImage};
use hqam_core::power::{
    evaluate_policy, optimize_avg_avg, optimize_imperfect_csi, optimize_peak_avg, optimize_statistical,
    DualOptions, DualSolution, PowerPolicy, SampleSet, SolverKind, TraceRow,
};
use hqam_core::rng::stream;
use rayon::prelude::*;
use thiserror::Error;

use crate::config::{solver_name, ConfigError, ConstraintMode, CsiMode, ExperimentConfig, ImageSource};

/// First line of every results file.
pub const CSV_VERSION: &str = "# hqam-cr csv v1";

/// PSNR written for a lossless reconstruction.
pub const PSNR_CAP_DB: f64 = 99.0;

pub const COLUMNS: [&str; 18] = [
    "axis",
    "value",
    "seed",
    "constraint",
    "csi",
    "solver",
    "p0",
    "p1",
    "ber_hp",
    "ber_lp",
    "n_re",
    "n_silent",
    "psnr_db",
    "energy",
    "avg_power",
    "mu1",
    "mu2",
    "iterations",
];

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{job}: {source}")]
    Solver { job: String, source: hqam_core::Error },
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl ExperimentError {
    /// Process exit code: 2 when an iterative solver failed to converge,
    /// 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        use hqam_core::Error as E;
        match self {
            ExperimentError::Solver {
                source: E::NonConvergence(_) | E::DualNonConvergence { .. } | E::BracketExpansion { .. },
                ..
            } => 2,
            _ => 1,
        }
    }
}

/// One sweep point × seed × mode combination.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Job {
    pub value: f64,
    pub seed: u64,
    pub constraint: ConstraintMode,
    pub csi: CsiMode,
    pub solver: SolverKind,
}

impl std::fmt::Display for Job {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "value {} seed {} ({}, {}, {})",
            self.value,
            self.seed,
            self.constraint.name(),
            self.csi.name(),
            solver_name(self.solver)
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinkStats {
    pub n_re: u64,
    pub n_silent: u64,
    pub psnr_db: f64,
    pub energy: f64,
    pub avg_power: f64,
}

/// Result of one job.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub job: Job,
    /// Constant powers, or their means over the evaluation draws.
    pub p: [f64; 2],
    pub ber_hp: f64,
    pub ber_lp: f64,
    pub link: Option<LinkStats>,
    pub mu: Option<[f64; 2]>,
    pub iterations: Option<usize>,
    pub trace: Vec<TraceRow>,
}

/// Jobs in output order: sweep value, constraint, CSI, solver, seed.
pub fn jobs(cfg: &ExperimentConfig) -> Vec<Job> {
    let mut out = Vec::new();
    for &value in &cfg.values {
        for &constraint in &cfg.constraints {
            for &csi in &cfg.csi {
                for &solver in &cfg.solvers {
                    // constant powers have no per-sample solver
                    if csi == CsiMode::Statistical && solver != cfg.solvers[0] {
                        continue;
                    }
                    for &seed in &cfg.seeds {
                        out.push(Job { value, seed, constraint, csi, solver });
                    }
                }
            }
        }
    }
    out
}

pub fn load_image(src: &ImageSource) -> Result<GrayImage, ExperimentError> {
    match src {
        ImageSource::Synthetic { width, height } => GrayImage::synthetic(*width, *height, 0)
            .map_err(|e| ExperimentError::Solver { job: "synthetic image".into(), source: e }),
        ImageSource::File(path) => File::open(path)
            .and_then(|f| GrayImage::read_from(BufReader::new(f)))
            .map_err(|source| ExperimentError::Io { path: path.clone(), source }),
    }
}

/// Runs every job on a pool of `workers` threads (0 = one per core) and
/// returns the rows in [`jobs`] order.
///
/// Job seeds: stream 0 of the job seed draws the optimization samples,
/// stream 1 the evaluation samples and stream 2 drives the link session.
pub fn run_experiment(
    cfg: &ExperimentConfig,
    workers: usize,
    trace: bool,
) -> Result<Vec<Row>, ExperimentError> {
    let image = cfg.link.as_ref().map(|l| load_image(&l.image)).transpose()?;
    let pool = rayon::ThreadPoolBuilder::new().num_threads(workers).build().expect("thread pool");
    let jobs = jobs(cfg);
    log::info!("{} jobs on {} workers", jobs.len(), pool.current_num_threads());
    pool.install(|| {
        jobs.par_iter()
            .map(|job| {
                let row = run_job(cfg, job, image.as_ref(), trace)
                    .map_err(|source| ExperimentError::Solver { job: job.to_string(), source });
                log::debug!("done {job}");
                row
            })
            .collect()
    })
}

fn run_job(
    cfg: &ExperimentConfig,
    job: &Job,
    image: Option<&GrayImage>,
    trace: bool,
) -> hqam_core::Result<Row> {
    let pt = cfg.point(job.value, job.csi)?;
    let sc = &pt.scenario;
    let cons = cfg.constraints(job.constraint, pt.q_avg)?;
    let o = &cfg.optimizer;

    let (policy, p, ber, dual) = match job.csi {
        CsiMode::Statistical => {
            let s = optimize_statistical(sc, pt.lambda, &cons, o.grid)?;
            (PowerPolicy::Constant(s.powers), s.powers, [s.ber.hp, s.ber.lp], None)
        }
        CsiMode::Instantaneous | CsiMode::Imperfect => {
            let samples = SampleSet::draw(&sc.env, o.samples, &mut stream(job.seed, 0))?;
            let opts = DualOptions {
                step: o.step,
                tol: o.tol,
                feas_tol: o.feas_tol,
                max_iter: o.max_iter,
                solver: job.solver,
                silent_threshold: o.silent_threshold,
                p_max: o.p_max,
                trace,
                ..DualOptions::default()
            };
            let sol: DualSolution = match (job.csi, job.constraint) {
                (CsiMode::Imperfect, _) => optimize_imperfect_csi(&samples, sc, pt.lambda, &cons, &opts)?,
                (_, ConstraintMode::Peak) => optimize_peak_avg(&samples, sc, pt.lambda, &cons, &opts)?,
                (_, ConstraintMode::Average) => optimize_avg_avg(&samples, sc, pt.lambda, &cons, &opts)?,
            };
            let policy = PowerPolicy::Instantaneous(sol.policy.clone());
            let eval = SampleSet::draw(&sc.env, o.eval_samples, &mut stream(job.seed, 1))?;
            let e = evaluate_policy(sc, &policy, &eval);
            let n = eval.len() as f64;
            let sums = eval.pairs().iter().fold([0.0; 2], |acc, &(h2, g2)| {
                let q = policy.powers(h2, g2);
                [acc[0] + q[0], acc[1] + q[1]]
            });
            (policy, [sums[0] / n, sums[1] / n], [e.ber.hp, e.ber.lp], Some(sol))
        }
    };

    let link = match (&cfg.link, image) {
        (Some(l), Some(img)) => {
            let r = run_session(img, l.n_packets, sc, &policy, &l.params, &mut stream(job.seed, 2))?;
            Some(LinkStats {
                n_re: r.n_re,
                n_silent: r.n_silent,
                psnr_db: r.psnr.min(PSNR_CAP_DB),
                energy: r.energy,
                avg_power: r.avg_power,
            })
        }
        _ => None,
    };

    Ok(Row {
        job: *job,
        p,
        ber_hp: ber[0],
        ber_lp: ber[1],
        link,
        mu: dual.as_ref().map(|d| d.duals().as_array()),
        iterations: dual.as_ref().map(|d| d.iterations),
        trace: dual.map(|d| d.trace).unwrap_or_default(),
    })
}

/// Shortest round-trip text, in exponent form for very small or large
/// magnitudes.
fn num(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || !x.is_finite() || (1e-4..1e15).contains(&a) {
        x.to_string()
    } else {
        format!("{x:e}")
    }
}

fn opt_num(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

/// Writes the versioned header and one record per row.
pub fn write_csv<W: Write>(cfg: &ExperimentConfig, rows: &[Row], mut out: W) -> Result<(), ExperimentError> {
    writeln!(out, "{CSV_VERSION}").map_err(csv::Error::from)?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(COLUMNS)?;
    for r in rows {
        let l = r.link.as_ref();
        w.write_record([
            cfg.axis.name().to_string(),
            num(r.job.value),
            r.job.seed.to_string(),
            r.job.constraint.name().to_string(),
            r.job.csi.name().to_string(),
            solver_name(r.job.solver).to_string(),
            num(r.p[0]),
            num(r.p[1]),
            num(r.ber_hp),
            num(r.ber_lp),
            l.map(|l| l.n_re.to_string()).unwrap_or_default(),
            l.map(|l| l.n_silent.to_string()).unwrap_or_default(),
            opt_num(l.map(|l| l.psnr_db)),
            opt_num(l.map(|l| l.energy)),
            opt_num(l.map(|l| l.avg_power)),
            opt_num(r.mu.map(|m| m[0])),
            opt_num(r.mu.map(|m| m[1])),
            r.iterations.map(|i| i.to_string()).unwrap_or_default(),
        ])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Dual iteration history of every instantaneous-CSI job.
pub fn write_trace<W: Write>(rows: &[Row], mut out: W) -> Result<(), ExperimentError> {
    writeln!(out, "{CSV_VERSION} trace").map_err(csv::Error::from)?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "value",
        "seed",
        "constraint",
        "csi",
        "solver",
        "iteration",
        "mu1",
        "mu2",
        "residual_q",
        "residual_p",
    ])?;
    for r in rows {
        for t in &r.trace {
            w.write_record([
                num(r.job.value),
                r.job.seed.to_string(),
                r.job.constraint.name().to_string(),
                r.job.csi.name().to_string(),
                solver_name(r.job.solver).to_string(),
                t.iteration.to_string(),
                num(t.mu[0]),
                num(t.mu[1]),
                num(t.residuals[0]),
                num(t.residuals[1]),
            ])?;
        }
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// `<output>.trace.csv` next to the results file.
pub fn trace_path(output: &Path) -> PathBuf {
    let mut s = output.as_os_str().to_owned();
    s.push(".trace.csv");
    PathBuf::from(s)
}
