//! Experiment configuration: a TOML file whose keys follow the usual
//! symbols of the system model. Powers and the interference limit are
//! given in dB; everything else is linear.
//!
//! ```toml
//! sigma_n2 = 0.01
//! sigma_w2 = 0.5
//! prior_busy = 0.4
//! p_d = 0.9
//! p_f = 0.1
//! alpha0 = 1.0
//! alpha1 = 1.0
//! lambda = 0.5
//! constraint = "peak"          # or "average", or a list of both
//! p_pk_db = 10.0
//! q_avg_db = 4.0
//! csi = "statistical"          # "instantaneous", "imperfect" or a list
//! solver = "exact"             # "lambert"; instantaneous CSI only
//!
//! [optimizer]
//! samples = 10000
//!
//! [link]
//! enabled = true
//! thr = 1.8
//!
//! [sweep]
//! axis = "lambda"
//! values = [0.1, 0.5, 0.9]
//! seeds = [1, 2, 3]
//! ```

use std::fmt;
use std::path::PathBuf;

use hqam_core::link::{LinkParams, Modulation};
use hqam_core::power::{Constraints, SolverKind, StepRule, DEFAULT_P_MAX};
use hqam_core::units::db_to_linear;
use hqam_core::{ChannelEnv, FadingSpec, Scenario, SensingModel};
use serde::Deserialize;
use toml::Spanned;

/// One problem in a config error.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    /// 1-based line of the offending value, when it is in the file.
    pub line: Option<usize>,
    pub field: String,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}: {}", self.field, self.message),
            None => write!(f, "{}: {}", self.field, self.message),
        }
    }
}

/// Every problem found in a config file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub diagnostics: Vec<Diagnostic>,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid configuration")?;
        for d in &self.diagnostics {
            write!(f, "\n  {d}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigError {}

impl ConfigError {
    pub fn mentions(&self, field: &str) -> bool {
        self.diagnostics.iter().any(|d| d.field == field)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ConstraintMode {
    Peak,
    Average,
}

impl ConstraintMode {
    pub fn name(self) -> &'static str {
        match self {
            ConstraintMode::Peak => "peak",
            ConstraintMode::Average => "average",
        }
    }
}

/// What the transmitter knows about the channels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CsiMode {
    /// Fading statistics only; constant powers.
    Statistical,
    /// Exact instantaneous gains of both links.
    Instantaneous,
    /// Exact transmission-link gain and an interference-link estimate with
    /// error variance `sigma_e2`.
    Imperfect,
}

impl CsiMode {
    pub fn name(self) -> &'static str {
        match self {
            CsiMode::Statistical => "statistical",
            CsiMode::Instantaneous => "instantaneous",
            CsiMode::Imperfect => "imperfect",
        }
    }
}

pub fn solver_name(s: SolverKind) -> &'static str {
    match s {
        SolverKind::Exact => "exact",
        SolverKind::Lambert => "lambert",
    }
}

/// The parameter a sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    PD,
    PF,
    Alpha0,
    Lambda,
    /// Nakagami shape of both links.
    M,
    /// Interference limit, in dB.
    QAvg,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::PD => "p_d",
            SweepAxis::PF => "p_f",
            SweepAxis::Alpha0 => "alpha0",
            SweepAxis::Lambda => "lambda",
            SweepAxis::M => "m",
            SweepAxis::QAvg => "q_avg_db",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "p_d" => SweepAxis::PD,
            "p_f" => SweepAxis::PF,
            "alpha0" => SweepAxis::Alpha0,
            "lambda" => SweepAxis::Lambda,
            "m" => SweepAxis::M,
            "q_avg" | "q_avg_db" => SweepAxis::QAvg,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerConfig {
    /// Frozen draws used by the dual iteration.
    pub samples: usize,
    /// Fresh draws used to evaluate an instantaneous policy.
    pub eval_samples: usize,
    /// Frontier grid points per segment for statistical CSI.
    pub grid: usize,
    pub max_iter: usize,
    pub tol: f64,
    pub feas_tol: f64,
    pub step: StepRule,
    pub silent_threshold: Option<f64>,
    pub p_max: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ImageSource {
    File(PathBuf),
    Synthetic { width: u32, height: u32 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinkConfig {
    pub params: LinkParams,
    pub n_packets: usize,
    pub image: ImageSource,
}

/// A validated experiment, all quantities linear.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub sigma_n2: f64,
    pub sigma_w2: f64,
    pub prior_busy: f64,
    pub p_d: f64,
    pub p_f: f64,
    pub m_h: f64,
    pub omega_h: f64,
    pub m_g: f64,
    pub omega_g: f64,
    pub sigma_e2: f64,
    pub alpha: [f64; 2],
    pub lambda: f64,
    pub constraints: Vec<ConstraintMode>,
    pub p_pk: Option<f64>,
    pub p_avg: Option<f64>,
    pub q_avg: f64,
    pub csi: Vec<CsiMode>,
    pub solvers: Vec<SolverKind>,
    pub optimizer: OptimizerConfig,
    pub link: Option<LinkConfig>,
    pub axis: SweepAxis,
    pub values: Vec<f64>,
    pub seeds: Vec<u64>,
    pub output: Option<PathBuf>,
}

/// Model parameters at one sweep point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub scenario: Scenario,
    pub lambda: f64,
    pub q_avg: f64,
}

impl ExperimentConfig {
    pub fn prior_idle(&self) -> f64 {
        1.0 - self.prior_busy
    }

    /// Scenario and weights with the sweep axis set to `value`. Under
    /// statistical or exact CSI the estimation error is dropped.
    pub fn point(&self, value: f64, csi: CsiMode) -> hqam_core::Result<Point> {
        let (mut p_d, mut p_f, mut alpha0, mut lambda) = (self.p_d, self.p_f, self.alpha[0], self.lambda);
        let (mut m_h, mut m_g, mut q_avg) = (self.m_h, self.m_g, self.q_avg);
        match self.axis {
            SweepAxis::PD => p_d = value,
            SweepAxis::PF => p_f = value,
            SweepAxis::Alpha0 => alpha0 = value,
            SweepAxis::Lambda => lambda = value,
            SweepAxis::M => (m_h, m_g) = (value, value),
            SweepAxis::QAvg => q_avg = db_to_linear(value),
        }
        let sigma_e2 = if csi == CsiMode::Imperfect { self.sigma_e2 } else { 0.0 };
        let env = ChannelEnv::new(
            self.sigma_n2,
            self.sigma_w2,
            FadingSpec::new(m_h, self.omega_h)?,
            FadingSpec::new(m_g, self.omega_g)?,
            sigma_e2,
        )?;
        let sensing = SensingModel::new(p_d, p_f, self.prior_busy)?;
        Ok(Point { scenario: Scenario::new(sensing, env, [alpha0, self.alpha[1]])?, lambda, q_avg })
    }

    pub fn constraints(&self, mode: ConstraintMode, q_avg: f64) -> hqam_core::Result<Constraints> {
        match mode {
            ConstraintMode::Peak => Constraints::peak(self.p_pk.unwrap_or(f64::NAN), q_avg),
            ConstraintMode::Average => Constraints::average(self.p_avg.unwrap_or(f64::NAN), q_avg),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum OneOrMany {
    One(String),
    Many(Vec<String>),
}

impl OneOrMany {
    fn into_vec(self) -> Vec<String> {
        match self {
            OneOrMany::One(s) => vec![s],
            OneOrMany::Many(v) => v,
        }
    }
}

type S<T> = Option<Spanned<T>>;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    sigma_n2: S<f64>,
    sigma_w2: S<f64>,
    prior_busy: S<f64>,
    prior_idle: S<f64>,
    p_d: S<f64>,
    p_f: S<f64>,
    m_h: S<f64>,
    omega_h: S<f64>,
    m_g: S<f64>,
    omega_g: S<f64>,
    sigma_e2: S<f64>,
    alpha0: S<f64>,
    alpha1: S<f64>,
    lambda: S<f64>,
    constraint: S<OneOrMany>,
    p_pk_db: S<f64>,
    p_avg_db: S<f64>,
    q_avg_db: S<f64>,
    csi: S<OneOrMany>,
    solver: S<OneOrMany>,
    output: S<String>,
    #[serde(default)]
    optimizer: RawOptimizer,
    link: Option<RawLink>,
    sweep: Option<Spanned<RawSweep>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOptimizer {
    samples: S<i64>,
    eval_samples: S<i64>,
    grid: S<i64>,
    max_iter: S<i64>,
    tol: S<f64>,
    feas_tol: S<f64>,
    step_initial: S<f64>,
    step_grow: S<f64>,
    silent_threshold: S<f64>,
    p_max_db: S<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLink {
    enabled: S<bool>,
    thr: S<f64>,
    n_upper: S<i64>,
    modulation: S<String>,
    n_packets: S<i64>,
    image: S<String>,
    synthetic: S<[i64; 2]>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    axis: S<String>,
    values: S<Vec<f64>>,
    seeds: S<Vec<i64>>,
}

struct Checker<'a> {
    text: &'a str,
    diags: Vec<Diagnostic>,
}

impl<'a> Checker<'a> {
    fn line(&self, offset: usize) -> usize {
        self.text[..offset.min(self.text.len())].matches('\n').count() + 1
    }

    fn push(&mut self, span: Option<std::ops::Range<usize>>, field: &str, message: impl Into<String>) {
        let line = span.map(|s| self.line(s.start));
        self.diags.push(Diagnostic { line, field: field.to_string(), message: message.into() });
    }

    /// Value of an optional field, with `default` when absent. `ok` returns
    /// the violated bound, if any.
    fn num(&mut self, v: &S<f64>, field: &str, default: f64, ok: impl Fn(f64) -> Option<String>) -> f64 {
        match v {
            None => default,
            Some(s) => {
                let x = *s.get_ref();
                if let Some(bound) = ok(x) {
                    self.push(Some(s.span()), field, format!("{x} {bound}"));
                }
                x
            }
        }
    }

    fn required(&mut self, v: &S<f64>, field: &str, ok: impl Fn(f64) -> Option<String>) -> f64 {
        if v.is_none() {
            self.push(None, field, "required");
        }
        self.num(v, field, f64::NAN, ok)
    }

    fn count(&mut self, v: &S<i64>, field: &str, default: usize, min: i64) -> usize {
        match v {
            None => default,
            Some(s) => {
                let x = *s.get_ref();
                if x < min {
                    self.push(Some(s.span()), field, format!("{x} must be >= {min}"));
                    default
                } else {
                    x as usize
                }
            }
        }
    }

    fn choices<T>(
        &mut self,
        v: S<OneOrMany>,
        field: &str,
        default: T,
        parse: impl Fn(&str) -> Option<T>,
        allowed: &str,
    ) -> Vec<T>
    where
        T: PartialEq + Copy,
    {
        let Some(s) = v else { return vec![default] };
        let span = s.span();
        let names = s.into_inner().into_vec();
        if names.is_empty() {
            self.push(Some(span), field, "must not be empty");
            return vec![default];
        }
        let mut out = Vec::new();
        for n in &names {
            match parse(n) {
                Some(t) => out.push(t),
                None => {
                    self.push(Some(span.clone()), field, format!("unknown value `{n}`; expected {allowed}"))
                }
            }
        }
        let mut seen = Vec::new();
        for t in out {
            if !seen.contains(&t) {
                seen.push(t);
            }
        }
        let mut out = seen;
        if out.is_empty() {
            out.push(default);
        }
        out
    }
}

fn probability(x: f64) -> Option<String> {
    (!(0.0..=1.0).contains(&x)).then(|| "is outside [0, 1]".into())
}

fn positive(x: f64) -> Option<String> {
    (!(x > 0.0 && x.is_finite())).then(|| "must be > 0".into())
}

fn nonnegative(x: f64) -> Option<String> {
    (!(x >= 0.0 && x.is_finite())).then(|| "must be >= 0".into())
}

fn shape(x: f64) -> Option<String> {
    (!(x >= 0.5 && x.is_finite())).then(|| "must be >= 0.5".into())
}

fn finite(x: f64) -> Option<String> {
    (!x.is_finite()).then(|| "must be finite".into())
}

/// Parses and range-checks a config, reporting every invalid field.
pub fn validate_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| {
        let mut c = Checker { text, diags: vec![] };
        let msg = e.message().to_string();
        let field = msg
            .split('`')
            .nth(1)
            .filter(|_| msg.starts_with("unknown field") || msg.starts_with("missing field"))
            .unwrap_or("toml")
            .to_string();
        c.push(e.span(), &field, msg);
        ConfigError { diagnostics: c.diags }
    })?;
    let mut c = Checker { text, diags: vec![] };

    let sigma_n2 = c.num(&raw.sigma_n2, "sigma_n2", 0.01, positive);
    let sigma_w2 = c.num(&raw.sigma_w2, "sigma_w2", 0.5, nonnegative);
    let prior_busy = c.num(&raw.prior_busy, "prior_busy", 0.4, probability);
    if let Some(pi) = &raw.prior_idle {
        let x = *pi.get_ref();
        if probability(x).is_some() || (x + prior_busy - 1.0).abs() > 1e-12 {
            c.push(
                Some(pi.span()),
                "prior_idle",
                format!("{x} must equal 1 - prior_busy = {}", 1.0 - prior_busy),
            );
        }
    }
    let p_d = c.num(&raw.p_d, "p_d", 0.9, probability);
    let p_f = c.num(&raw.p_f, "p_f", 0.1, probability);
    let m_h = c.num(&raw.m_h, "m_h", 1.0, shape);
    let omega_h = c.num(&raw.omega_h, "omega_h", 1.0, positive);
    let m_g = c.num(&raw.m_g, "m_g", 1.0, shape);
    let omega_g = c.num(&raw.omega_g, "omega_g", 1.0, positive);
    let sigma_e2 = c.num(&raw.sigma_e2, "sigma_e2", 0.0, |x| {
        nonnegative(x)
            .or_else(|| (x >= omega_g && x > 0.0).then(|| format!("must be below omega_g = {omega_g}")))
    });
    let alpha0 = c.num(&raw.alpha0, "alpha0", 1.0, positive);
    let alpha1 = c.num(&raw.alpha1, "alpha1", 1.0, positive);
    let lambda = c.num(&raw.lambda, "lambda", 0.5, probability);

    let constraints = c.choices(
        raw.constraint,
        "constraint",
        ConstraintMode::Peak,
        |s| match s {
            "peak" => Some(ConstraintMode::Peak),
            "average" => Some(ConstraintMode::Average),
            _ => None,
        },
        "`peak` or `average`",
    );
    let p_pk = if constraints.contains(&ConstraintMode::Peak) {
        Some(db_to_linear(c.required(&raw.p_pk_db, "p_pk_db", finite)))
    } else {
        None
    };
    let p_avg = if constraints.contains(&ConstraintMode::Average) {
        Some(db_to_linear(c.required(&raw.p_avg_db, "p_avg_db", finite)))
    } else {
        None
    };
    let q_avg = db_to_linear(c.required(&raw.q_avg_db, "q_avg_db", finite));

    let csi_span = raw.csi.as_ref().map(|s| s.span());
    let csi = c.choices(
        raw.csi,
        "csi",
        CsiMode::Statistical,
        |s| match s {
            "statistical" => Some(CsiMode::Statistical),
            "instantaneous" => Some(CsiMode::Instantaneous),
            "imperfect" => Some(CsiMode::Imperfect),
            _ => None,
        },
        "`statistical`, `instantaneous` or `imperfect`",
    );
    if csi.contains(&CsiMode::Imperfect) && sigma_e2 == 0.0 {
        c.push(csi_span, "csi", "`imperfect` needs sigma_e2 > 0");
    }
    let solver_span = raw.solver.as_ref().map(|s| s.span());
    let solvers = c.choices(
        raw.solver,
        "solver",
        SolverKind::Exact,
        |s| match s {
            "exact" => Some(SolverKind::Exact),
            "lambert" => Some(SolverKind::Lambert),
            _ => None,
        },
        "`exact` or `lambert`",
    );

    let o = &raw.optimizer;
    let step_initial = c.num(&o.step_initial, "optimizer.step_initial", 0.05, positive);
    let step_grow = c.num(&o.step_grow, "optimizer.step_grow", 1.5, |x| {
        (!(x >= 1.0 && x.is_finite())).then(|| "must be >= 1".into())
    });
    let optimizer = OptimizerConfig {
        samples: c.count(&o.samples, "optimizer.samples", 10_000, 1),
        eval_samples: c.count(&o.eval_samples, "optimizer.eval_samples", 100_000, 1),
        grid: c.count(&o.grid, "optimizer.grid", 2000, 2),
        max_iter: c.count(&o.max_iter, "optimizer.max_iter", 10_000, 1),
        tol: c.num(&o.tol, "optimizer.tol", 1e-7, positive),
        feas_tol: c.num(&o.feas_tol, "optimizer.feas_tol", 1e-6, positive),
        step: StepRule::Adaptive { initial: step_initial, grow: step_grow },
        silent_threshold: o
            .silent_threshold
            .as_ref()
            .map(|_| c.num(&o.silent_threshold, "optimizer.silent_threshold", 0.0, nonnegative)),
        p_max: match &o.p_max_db {
            None => DEFAULT_P_MAX,
            Some(_) => db_to_linear(c.num(&o.p_max_db, "optimizer.p_max_db", 0.0, finite)),
        },
    };

    let link = raw.link.and_then(|l| link_config(&mut c, l));

    let (axis, values, seeds) = match raw.sweep {
        None => {
            c.push(None, "sweep", "required: a [sweep] table with axis, values and seeds");
            (SweepAxis::Lambda, vec![], vec![])
        }
        Some(s) => {
            let span = s.span();
            let s = s.into_inner();
            let axis = match &s.axis {
                None => {
                    c.push(Some(span.clone()), "sweep.axis", "required");
                    SweepAxis::Lambda
                }
                Some(a) => SweepAxis::parse(a.get_ref()).unwrap_or_else(|| {
                    c.push(
                        Some(a.span()),
                        "sweep.axis",
                        format!(
                            "unknown axis `{}`; expected p_d, p_f, alpha0, lambda, m or q_avg_db",
                            a.get_ref()
                        ),
                    );
                    SweepAxis::Lambda
                }),
            };
            let values = match s.values {
                None => {
                    c.push(Some(span.clone()), "sweep.values", "required");
                    vec![]
                }
                Some(v) if v.get_ref().is_empty() => {
                    c.push(Some(v.span()), "sweep.values", "must not be empty");
                    vec![]
                }
                Some(v) => {
                    let vs = v.get_ref().clone();
                    let check: fn(f64) -> Option<String> = match axis {
                        SweepAxis::PD | SweepAxis::PF | SweepAxis::Lambda => probability,
                        SweepAxis::Alpha0 => positive,
                        SweepAxis::M => shape,
                        SweepAxis::QAvg => finite,
                    };
                    for x in &vs {
                        if let Some(b) = check(*x) {
                            c.push(Some(v.span()), "sweep.values", format!("{} value {x} {b}", axis.name()));
                        }
                    }
                    vs
                }
            };
            let seeds = match s.seeds {
                None => {
                    c.push(Some(span), "sweep.seeds", "required");
                    vec![]
                }
                Some(v) if v.get_ref().is_empty() => {
                    c.push(Some(v.span()), "sweep.seeds", "must not be empty");
                    vec![]
                }
                Some(v) => {
                    if v.get_ref().iter().any(|&x| x < 0) {
                        c.push(Some(v.span()), "sweep.seeds", "seeds must be >= 0");
                    }
                    v.get_ref().iter().map(|&x| x.max(0) as u64).collect()
                }
            };
            (axis, values, seeds)
        }
    };

    let cfg = ExperimentConfig {
        sigma_n2,
        sigma_w2,
        prior_busy,
        p_d,
        p_f,
        m_h,
        omega_h,
        m_g,
        omega_g,
        sigma_e2,
        alpha: [alpha0, alpha1],
        lambda,
        constraints,
        p_pk,
        p_avg,
        q_avg,
        csi,
        solvers,
        optimizer,
        link,
        axis,
        values,
        seeds,
        output: raw.output.map(|o| PathBuf::from(o.into_inner())),
    };

    if c.diags.is_empty() {
        cross_check(&mut c, &cfg, solver_span);
    }
    if c.diags.is_empty() {
        Ok(cfg)
    } else {
        Err(ConfigError { diagnostics: c.diags })
    }
}

/// Checks that need the whole config: every sweep point must yield a
/// valid model, and the Lambert-W solver needs perfect sensing, `λ = 1` and
/// instantaneous CSI.
fn cross_check(c: &mut Checker, cfg: &ExperimentConfig, solver_span: Option<std::ops::Range<usize>>) {
    for &v in &cfg.values {
        for &csi in &cfg.csi {
            match cfg.point(v, csi) {
                Err(e) => {
                    c.push(None, "sweep.values", format!("{} = {v}: {e}", cfg.axis.name()));
                    return;
                }
                Ok(pt) if cfg.solvers.contains(&SolverKind::Lambert) => {
                    if csi == CsiMode::Statistical {
                        c.push(solver_span, "solver", "`lambert` applies to instantaneous CSI only");
                        return;
                    }
                    if !(pt.scenario.sensing.is_perfect() && pt.lambda == 1.0) {
                        c.push(
                            solver_span,
                            "solver",
                            format!(
                                "`lambert` needs p_d = 1, p_f = 0 and lambda = 1 (at {} = {v})",
                                cfg.axis.name()
                            ),
                        );
                        return;
                    }
                }
                Ok(_) => {}
            }
        }
    }
}

fn link_config(c: &mut Checker, l: RawLink) -> Option<LinkConfig> {
    let enabled = l.enabled.as_ref().is_none_or(|e| *e.get_ref());
    let thr = c.num(&l.thr, "link.thr", 1.8, nonnegative);
    let n_upper = l.n_upper.as_ref().map(|_| c.count(&l.n_upper, "link.n_upper", 0, 0) as u64);
    let modulation = match &l.modulation {
        None => Modulation::Hqam,
        Some(m) => match m.get_ref().as_str() {
            "hqam" => Modulation::Hqam,
            "qam" => Modulation::Qam,
            other => {
                c.push(
                    Some(m.span()),
                    "link.modulation",
                    format!("unknown value `{other}`; expected `hqam` or `qam`"),
                );
                Modulation::Hqam
            }
        },
    };
    let n_packets = c.count(&l.n_packets, "link.n_packets", 1024, 1);
    let image = match (&l.image, &l.synthetic) {
        (Some(_), Some(s)) => {
            c.push(Some(s.span()), "link.synthetic", "give either `image` or `synthetic`, not both");
            ImageSource::Synthetic { width: 64, height: 64 }
        }
        (Some(p), None) => ImageSource::File(PathBuf::from(p.get_ref())),
        (None, Some(s)) => {
            let [w, h] = *s.get_ref();
            if w < 1 || h < 1 || w > u32::MAX as i64 || h > u32::MAX as i64 {
                c.push(Some(s.span()), "link.synthetic", format!("[{w}, {h}] is not a valid image size"));
            }
            ImageSource::Synthetic {
                width: w.clamp(1, u32::MAX as i64) as u32,
                height: h.clamp(1, u32::MAX as i64) as u32,
            }
        }
        (None, None) => ImageSource::Synthetic { width: 64, height: 64 },
    };
    let params = match LinkParams::new(thr, n_upper, modulation) {
        Ok(p) => p,
        Err(e) => {
            c.push(l.thr.as_ref().map(|t| t.span()), "link.thr", e.to_string());
            return None;
        }
    };
    enabled.then_some(LinkConfig { params, n_packets, image })
}
