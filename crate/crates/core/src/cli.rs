//! Command-line front end.
//!
//! Every run is described by a [`RunConfig`]. Values come from flags, then from an
//! optional flat `key=value` file given with `--config`, then from built-in defaults.
//!
//! Exit codes: 0 success, 1 invalid input, 2 an acceptance rule failed,
//! 3 a numerical search or refinement did not converge.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::experiments::{sharpness_csv, sharpness_sweep, theorem_c_exponent_fit, theorem_e_identity_check};
use crate::exponents::{alpha_n, ExponentConfig};
use crate::functionals::{ckn_sweep, sweep_csv, FunctionalKind};
use crate::optimize::{estimate_at, maximize_ratio, MaximizerResult, OptimizerParams};
use crate::profiles::random_profile;
use crate::quadrature::{QuadSettings, Quadrature};
use crate::transforms::{
    annulus_points, lemma_3_8_inequality_probe, random_log_profile, verify_log_identities_with,
    verify_nonradial_gradient_bound, verify_peel_identities_with, IdentityRecord, IdentityReport, Lemma38Probe,
};

pub const EXIT_OK: u8 = 0;
pub const EXIT_INVALID: u8 = 1;
pub const EXIT_ACCEPTANCE: u8 = 2;
pub const EXIT_NONCONVERGENT: u8 = 3;

/// Keys accepted in a `--config` file.
pub const CONFIG_KEYS: &[&str] = &[
    "N",
    "s",
    "t",
    "q",
    "alpha",
    "alpha_frac",
    "quad.rel_tol",
    "quad.gauss_order",
    "quad.max_depth",
    "opt.node_count",
    "opt.max_iterations",
    "opt.restarts",
    "opt.seed",
    "opt.step_init",
    "opt.rel_tol",
    "output",
    "format",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(Error::Config(format!("format must be csv or json, got `{s}`"))),
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "mtlab", version, about = "Numerical experiments on weighted Moser-Trudinger and Sobolev functionals")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    keys: KeyArgs,
}

#[derive(Args, Debug, Default)]
struct KeyArgs {
    /// Flat key=value file; flags override its values
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Dimension N [default: 2]
    #[arg(long = "N", global = true)]
    n: Option<usize>,
    /// Weight exponent s of the norm [default: 0]
    #[arg(long, global = true, allow_negative_numbers = true)]
    s: Option<f64>,
    /// Weight exponent t of the exponential term [default: 0]
    #[arg(long, global = true, allow_negative_numbers = true)]
    t: Option<f64>,
    /// Power q [default: N]
    #[arg(long, global = true)]
    q: Option<f64>,
    /// Coefficient alpha [default: alpha_frac * alpha_crit]
    #[arg(long, global = true)]
    alpha: Option<f64>,
    /// Fraction of the critical coefficient used when alpha is not given [default: 0.5]
    #[arg(long, global = true)]
    alpha_frac: Option<f64>,
    /// Quadrature relative tolerance [default: 1e-9]
    #[arg(long, global = true)]
    quad_rel_tol: Option<f64>,
    /// Gauss-Legendre order per panel [default: 16]
    #[arg(long, global = true)]
    gauss_order: Option<usize>,
    /// Maximum bisection depth [default: 12]
    #[arg(long, global = true)]
    max_depth: Option<usize>,
    /// Optimizer grid cells [default: 64]
    #[arg(long, global = true)]
    node_count: Option<usize>,
    /// Optimizer iteration cap per restart [default: 3000]
    #[arg(long, global = true)]
    max_iterations: Option<usize>,
    /// Optimizer restarts [default: 5]
    #[arg(long, global = true)]
    restarts: Option<usize>,
    /// Base seed for optimizer restarts and sampled families [default: 0]
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Optimizer initial step [default: 1]
    #[arg(long, global = true)]
    step_init: Option<f64>,
    /// Optimizer stopping tolerance [default: 1e-10]
    #[arg(long, global = true)]
    opt_rel_tol: Option<f64>,
    /// Output file [default: standard output]
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    /// Output format [default: csv]
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
}

/// Subcommands and their own arguments.
#[derive(Subcommand, Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum Command {
    /// Sphere area, conjugate exponent and critical coefficients.
    /// CSV columns: N,t,nprime,omega,alpha_crit,alpha_N
    Constants,
    /// Peel-map identities on seeded random profiles.
    /// CSV columns: id,lhs,rhs,rel_err,pass
    VerifyIdentities {
        #[arg(long, default_value_t = 20)]
        count: u64,
        #[arg(long, default_value_t = 8)]
        profile_nodes: usize,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
    },
    /// Logarithmic-substitution identities on seeded random profiles.
    /// CSV columns: id,lhs,rhs,rel_err,pass
    VerifyLog {
        #[arg(long, default_value_t = 20)]
        count: u64,
        #[arg(long, default_value_t = 8)]
        profile_nodes: usize,
        #[arg(long, default_value_t = 1e-7)]
        tol: f64,
    },
    /// Pointwise gradient bound and Jacobian of the peel map at annulus points.
    /// CSV columns: id,lhs,rhs,rel_err,pass
    VerifyNonradial {
        #[arg(long, default_value_t = 100)]
        count: usize,
        #[arg(long, default_value_t = 0.2)]
        r_min: f64,
        #[arg(long, default_value_t = 2.0)]
        r_max: f64,
        /// Bump center [default: (1, 0, ..., 0)]
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        center: Vec<f64>,
    },
    /// Ratio along the concentrating test sequence.
    /// CSV columns: k,ratio,lower_bound,grad_norm
    Sharpness {
        #[arg(long, default_value_t = FunctionalKind::G)]
        kind: FunctionalKind,
        #[arg(long, default_value_t = 2)]
        k_min: usize,
        #[arg(long, default_value_t = 12)]
        k_max: usize,
    },
    /// Search for the supremum of a ratio over the unit-gradient sphere.
    /// CSV columns: r,value (maximizing profile)
    Maximize {
        #[arg(long, default_value_t = FunctionalKind::G)]
        kind: FunctionalKind,
    },
    /// Search for AT(alpha, beta); alpha defaults to alpha_frac * alpha_N.
    /// CSV columns: r,value (maximizing profile)
    EstimateAt {
        #[arg(long, default_value_t = 0.0)]
        beta: f64,
    },
    /// Log-log slope of AT estimates as alpha approaches alpha_N.
    /// CSV columns: alpha_frac,estimate,log_gap
    TheoremCFit {
        #[arg(long, default_value_t = 0.0)]
        beta: f64,
        #[arg(long, value_delimiter = ',', default_values_t = [0.8, 0.9, 0.95, 0.975])]
        fracs: Vec<f64>,
        /// Accepted relative slope error
        #[arg(long, default_value_t = 0.15)]
        tol: f64,
    },
    /// Direct MT estimate against prefactor times AT estimates.
    /// CSV columns: alpha,prefactor,AT_est,product
    TheoremECheck {
        #[arg(long, default_value_t = 2.0)]
        a: f64,
        #[arg(long, default_value_t = 2.0)]
        b: f64,
        #[arg(long, default_value_t = 0.0)]
        beta: f64,
        #[arg(long, value_delimiter = ',', default_values_t = [0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.95])]
        fracs: Vec<f64>,
        #[arg(long, default_value_t = 0.15)]
        tol: f64,
    },
    /// Exponential moment ratios over seeded admissible log profiles.
    /// CSV columns: beta,index,ratio,lhs,rhs,grad_norm
    Lemma38Probe {
        #[arg(long, value_delimiter = ',', default_values_t = [0.5, 0.7, 0.9])]
        betas: Vec<f64>,
        #[arg(long, default_value_t = 200)]
        count: u64,
        #[arg(long, default_value_t = 30)]
        profile_nodes: usize,
        #[arg(long, default_value_t = 8.0)]
        span: f64,
    },
    /// CKN ratio with power q over seeded random profiles.
    /// CSV columns: seed,kind,value,numerator,denominator,grad_norm
    CknSweep {
        #[arg(long, default_value_t = 50)]
        count: u64,
        #[arg(long, default_value_t = 12)]
        profile_nodes: usize,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Constants => "constants",
            Command::VerifyIdentities { .. } => "verify-identities",
            Command::VerifyLog { .. } => "verify-log",
            Command::VerifyNonradial { .. } => "verify-nonradial",
            Command::Sharpness { .. } => "sharpness",
            Command::Maximize { .. } => "maximize",
            Command::EstimateAt { .. } => "estimate-at",
            Command::TheoremCFit { .. } => "theorem-c-fit",
            Command::TheoremECheck { .. } => "theorem-e-check",
            Command::Lemma38Probe { .. } => "lemma38-probe",
            Command::CknSweep { .. } => "ckn-sweep",
        }
    }
}

/// A fully resolved run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: Command,
    #[serde(rename = "N")]
    pub n: usize,
    pub s: f64,
    pub t: f64,
    /// `None` means `q = N`.
    pub q: Option<f64>,
    /// `None` means `alpha_frac` times the critical coefficient.
    pub alpha: Option<f64>,
    pub alpha_frac: f64,
    pub quad_rel_tol: f64,
    pub gauss_order: usize,
    pub max_depth: usize,
    pub opt: OptimizerParams,
    pub output: Option<PathBuf>,
    pub format: Format,
}

impl RunConfig {
    pub fn new(command: Command) -> Self {
        let quad = QuadSettings::<f64>::default();
        Self {
            command,
            n: 2,
            s: 0.0,
            t: 0.0,
            q: None,
            alpha: None,
            alpha_frac: 0.5,
            quad_rel_tol: quad.rel_tol,
            gauss_order: quad.gauss_order,
            max_depth: quad.max_depth,
            opt: OptimizerParams::default(),
            output: None,
            format: Format::Csv,
        }
    }

    fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
            v.parse().map_err(|_| Error::Config(format!("bad value for {key}: `{v}`")))
        }
        match key {
            "N" => self.n = num(key, value)?,
            "s" => self.s = num(key, value)?,
            "t" => self.t = num(key, value)?,
            "q" => self.q = Some(num(key, value)?),
            "alpha" => self.alpha = Some(num(key, value)?),
            "alpha_frac" => self.alpha_frac = num(key, value)?,
            "quad.rel_tol" => self.quad_rel_tol = num(key, value)?,
            "quad.gauss_order" => self.gauss_order = num(key, value)?,
            "quad.max_depth" => self.max_depth = num(key, value)?,
            "opt.node_count" => self.opt.node_count = num(key, value)?,
            "opt.max_iterations" => self.opt.max_iterations = num(key, value)?,
            "opt.restarts" => self.opt.restarts = num(key, value)?,
            "opt.seed" => self.opt.seed = num(key, value)?,
            "opt.step_init" => self.opt.step_init = num(key, value)?,
            "opt.rel_tol" => self.opt.rel_tol = num(key, value)?,
            "output" => self.output = Some(PathBuf::from(value)),
            "format" => self.format = value.parse()?,
            _ => return Err(Error::Config(format!("unknown key `{key}` (known: {})", CONFIG_KEYS.join(", ")))),
        }
        Ok(())
    }

    /// Applies a flat `key=value` text. Blank lines and `#` comments are skipped.
    pub fn apply_kv(&mut self, text: &str) -> Result<()> {
        let mut seen = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key=value", lineno + 1)))?;
            let key = k.trim();
            if seen.insert(key.to_string(), lineno).is_some() {
                return Err(Error::Config(format!("line {}: duplicate key `{key}`", lineno + 1)));
            }
            self.set(key, v.trim())?;
        }
        Ok(())
    }

    fn apply_flags(&mut self, k: &KeyArgs) {
        macro_rules! take {
            ($field:ident => $target:expr) => {
                if let Some(v) = k.$field.clone() {
                    $target = v;
                }
            };
        }
        take!(n => self.n);
        take!(s => self.s);
        take!(t => self.t);
        if k.q.is_some() {
            self.q = k.q;
        }
        if k.alpha.is_some() {
            self.alpha = k.alpha;
        }
        take!(alpha_frac => self.alpha_frac);
        take!(quad_rel_tol => self.quad_rel_tol);
        take!(gauss_order => self.gauss_order);
        take!(max_depth => self.max_depth);
        take!(node_count => self.opt.node_count);
        take!(max_iterations => self.opt.max_iterations);
        take!(restarts => self.opt.restarts);
        take!(seed => self.opt.seed);
        take!(step_init => self.opt.step_init);
        take!(opt_rel_tol => self.opt.rel_tol);
        if k.output.is_some() {
            self.output = k.output.clone();
        }
        take!(format => self.format);
    }

    /// Exponent config with the resolved `q` and `alpha`.
    pub fn exponents(&self) -> Result<ExponentConfig<f64>> {
        let q = self.q.unwrap_or(self.n as f64);
        let base = ExponentConfig::new(self.n, self.s, self.t, q, 1.0)?;
        base.with_alpha(self.resolved_alpha(base.alpha_crit())?)
    }

    fn resolved_alpha(&self, crit: f64) -> Result<f64> {
        match self.alpha {
            Some(a) => Ok(a),
            None if self.alpha_frac > 0.0 => Ok(self.alpha_frac * crit),
            None => Err(Error::InvalidParameter(format!("alpha_frac = {} must be positive", self.alpha_frac))),
        }
    }

    pub fn quadrature(&self) -> Result<Quadrature<f64>> {
        if !(self.quad_rel_tol > 0.0 && self.quad_rel_tol < 1.0) {
            return Err(Error::InvalidParameter(format!("quad.rel_tol = {} must lie in (0, 1)", self.quad_rel_tol)));
        }
        if !(1..=64).contains(&self.gauss_order) {
            return Err(Error::InvalidParameter(format!("quad.gauss_order = {} must lie in 1..=64", self.gauss_order)));
        }
        if self.max_depth > 40 {
            return Err(Error::InvalidParameter(format!("quad.max_depth = {} exceeds 40", self.max_depth)));
        }
        Ok(Quadrature::new(QuadSettings {
            rel_tol: self.quad_rel_tol,
            gauss_order: self.gauss_order,
            max_depth: self.max_depth,
        }))
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Usage problems, and also `--help` / `--version`, which clap reports as errors.
    #[error(transparent)]
    Usage(#[from] clap::Error),
    #[error(transparent)]
    Invalid(#[from] Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(e) if !e.use_stderr() => EXIT_OK,
            _ => EXIT_INVALID,
        }
    }
}

/// Parses `argv` (including the program name) into a [`RunConfig`].
pub fn parse_args<I, T>(argv: I) -> std::result::Result<RunConfig, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv)?;
    let mut cfg = RunConfig::new(cli.command);
    if let Some(path) = &cli.keys.config {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        cfg.apply_kv(&text)?;
    }
    cfg.apply_flags(&cli.keys);
    Ok(cfg)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
enum Status {
    Ok,
    AcceptanceFailed,
    Nonconvergent,
}

impl Status {
    fn code(self) -> u8 {
        match self {
            Status::Ok => EXIT_OK,
            Status::AcceptanceFailed => EXIT_ACCEPTANCE,
            Status::Nonconvergent => EXIT_NONCONVERGENT,
        }
    }
}

/// Result of one subcommand before it is rendered.
struct Outcome {
    status: Status,
    summary: Vec<String>,
    csv: String,
    results: Value,
}

impl Outcome {
    fn new(status: Status, csv: String, results: Value) -> Self {
        Self { status, summary: Vec::new(), csv, results }
    }

    fn note(mut self, line: impl fmt::Display) -> Self {
        self.summary.push(line.to_string());
        self
    }
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("results serialize")
}

fn error_code(e: &Error) -> u8 {
    match e {
        Error::NonConvergentRefinement { .. } | Error::FitDegenerate(_) => EXIT_NONCONVERGENT,
        _ => EXIT_INVALID,
    }
}

/// Runs the configured subcommand, writes its output and returns the exit code.
///
/// The document goes to `output` when set, otherwise to standard output. A short
/// `key=value` summary goes to standard output when a file was written and to the
/// error stream otherwise.
pub fn run(config: &RunConfig) -> u8 {
    let outcome = match execute(config) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("mtlab {}: error: {e}", config.command.name());
            return error_code(&e);
        }
    };
    let document = render(config, &outcome);
    match &config.output {
        Some(path) => {
            if let Err(e) = std::fs::write(path, document) {
                eprintln!("mtlab: cannot write {}: {e}", path.display());
                return EXIT_INVALID;
            }
            for line in &outcome.summary {
                println!("{line}");
            }
        }
        None => {
            print!("{document}");
            for line in &outcome.summary {
                eprintln!("{line}");
            }
        }
    }
    if outcome.status != Status::Ok {
        eprintln!("mtlab {}: {}", config.command.name(), serde_json::to_string(&outcome.status).unwrap_or_default());
    }
    outcome.status.code()
}

fn render(config: &RunConfig, outcome: &Outcome) -> String {
    match config.format {
        Format::Csv => outcome.csv.clone(),
        Format::Json => {
            let doc = json!({
                "tool": "mtlab",
                "version": env!("CARGO_PKG_VERSION"),
                "config": to_value(config),
                "status": outcome.status,
                "results": outcome.results,
            });
            let mut s = serde_json::to_string_pretty(&doc).expect("document serializes");
            s.push('\n');
            s
        }
    }
}

fn identity_status(report: &IdentityReport) -> Status {
    if report.pass {
        Status::Ok
    } else {
        Status::AcceptanceFailed
    }
}

fn identity_outcome(report: IdentityReport) -> Outcome {
    let failures = report.failures().len();
    Outcome::new(identity_status(&report), report.to_csv(), to_value(&report))
        .note(format!("identities={} failures={failures} max_rel_err={:e}", report.identities.len(), report.max_rel_err()))
}

/// Merges per-profile reports, prefixing ids with the profile seed.
fn merge_reports(parts: Vec<(u64, IdentityReport)>, tol: f64) -> IdentityReport {
    let records: Vec<IdentityRecord> = parts
        .into_iter()
        .flat_map(|(seed, r)| {
            r.identities.into_iter().map(move |mut rec| {
                rec.id = format!("seed{seed}/{}", rec.id);
                rec
            })
        })
        .collect();
    IdentityReport::new(records, tol)
}

fn maximizer_outcome(r: MaximizerResult) -> Outcome {
    let status = if r.converged { Status::Ok } else { Status::Nonconvergent };
    Outcome::new(status, r.best_profile.to_csv(), to_value(&r)).note(format!(
        "value={} iterations={} converged={} constraint_residual={:e}",
        r.value, r.iterations, r.converged, r.constraint_residual
    ))
}

fn lemma_outcome(probes: Vec<Lemma38Probe>) -> Outcome {
    let mut csv = String::from("beta,index,ratio,lhs,rhs,grad_norm\n");
    for p in &probes {
        for line in p.to_csv().lines().skip(1) {
            csv.push_str(&format!("{},{line}\n", p.beta));
        }
    }
    let finite = probes.iter().all(|p| p.records.iter().all(|r| r.ratio.is_finite()));
    let ordered = probes.windows(2).all(|w| w[0].beta > w[1].beta || w[1].c_hat >= w[0].c_hat);
    let violations: usize = probes.iter().flat_map(|p| &p.growth).map(|g| g.violations).sum();
    let status = if finite && ordered && violations == 0 { Status::Ok } else { Status::AcceptanceFailed };
    let mut out = Outcome::new(status, csv, to_value(&probes));
    for p in &probes {
        out = out.note(format!("beta={} c_hat={}", p.beta, p.c_hat));
    }
    out.note(format!("all_finite={finite} c_hat_nondecreasing={ordered} growth_violations={violations}"))
}

fn profile_family(count: u64, seed: u64, nodes: usize) -> Result<Vec<(u64, crate::Profile)>> {
    let mut out = Vec::with_capacity(count as usize);
    for s in seed..seed + count {
        let p = random_profile::<f64>(s, nodes, 1.0)?;
        if !p.is_zero() {
            out.push((s, p));
        }
    }
    Ok(out)
}

fn execute(config: &RunConfig) -> Result<Outcome> {
    let seed = config.opt.seed;
    match &config.command {
        Command::Constants => {
            let cfg = config.exponents()?;
            let an = alpha_n::<f64>(cfg.n())?;
            let csv = format!(
                "N,t,nprime,omega,alpha_crit,alpha_N\n{},{},{},{},{},{}\n",
                cfg.n(),
                cfg.t(),
                cfg.nprime(),
                cfg.omega(),
                cfg.alpha_crit(),
                an
            );
            let results = json!({
                "N": cfg.n(), "t": cfg.t(), "nprime": cfg.nprime(), "omega": cfg.omega(),
                "alpha_crit": cfg.alpha_crit(), "alpha_N": an,
            });
            Ok(Outcome::new(Status::Ok, csv, results)
                .note(format!("omega={}", cfg.omega()))
                .note(format!("alpha_crit={}", cfg.alpha_crit()))
                .note(format!("alpha_N={an}")))
        }
        Command::VerifyIdentities { count, profile_nodes, tol } => {
            let cfg = config.exponents()?;
            let quad = config.quadrature()?;
            let parts = profile_family(*count, seed, *profile_nodes)?
                .into_iter()
                .map(|(s, p)| Ok((s, verify_peel_identities_with(&quad, &p, &cfg, *tol)?)))
                .collect::<Result<_>>()?;
            Ok(identity_outcome(merge_reports(parts, *tol)))
        }
        Command::VerifyLog { count, profile_nodes, tol } => {
            let cfg = config.exponents()?;
            let quad = config.quadrature()?;
            let parts = profile_family(*count, seed, *profile_nodes)?
                .into_iter()
                .map(|(s, p)| Ok((s, verify_log_identities_with(&quad, &p, cfg.n(), cfg.alpha(), *tol)?)))
                .collect::<Result<_>>()?;
            Ok(identity_outcome(merge_reports(parts, *tol)))
        }
        Command::VerifyNonradial { count, r_min, r_max, center } => {
            let cfg = config.exponents()?;
            if !(*r_min > 0.0 && r_max > r_min) {
                return Err(Error::InvalidParameter(format!("need 0 < r_min < r_max, got {r_min}, {r_max}")));
            }
            let center = if center.is_empty() {
                let mut c = vec![0.0; cfg.n()];
                c[0] = 1.0;
                c
            } else {
                center.clone()
            };
            let points = annulus_points(seed, cfg.n(), *count, *r_min, *r_max);
            Ok(identity_outcome(verify_nonradial_gradient_bound(cfg.n(), cfg.t(), &points, &center)?))
        }
        Command::Sharpness { kind, k_min, k_max } => {
            let cfg = config.exponents()?;
            let records = sharpness_sweep(&cfg, *kind, *k_min..=*k_max)?;
            let ok = records.iter().all(|r| r.respects_bound(1e-9 * r.ratio.abs()));
            let increasing = records.windows(2).all(|w| w[1].ratio > w[0].ratio);
            let (first, last) = (records[0].ratio, records[records.len() - 1].ratio);
            Ok(Outcome::new(if ok { Status::Ok } else { Status::AcceptanceFailed }, sharpness_csv(&records), to_value(&records))
                .note(format!("alpha={} alpha_crit={}", cfg.alpha(), cfg.alpha_crit()))
                .note(format!("increasing={increasing} final_over_initial={} bounds_respected={ok}", last / first)))
        }
        Command::Maximize { kind } => {
            let cfg = config.exponents()?;
            Ok(maximizer_outcome(maximize_ratio(&cfg, *kind, &config.opt)?))
        }
        Command::EstimateAt { beta } => {
            if config.n < 2 {
                return Err(Error::DimensionTooSmall(config.n));
            }
            let alpha = config.resolved_alpha(alpha_n(config.n)?)?;
            Ok(maximizer_outcome(estimate_at(config.n, alpha, *beta, &config.opt)?))
        }
        Command::TheoremCFit { beta, fracs, tol } => {
            let fit = theorem_c_exponent_fit(config.n, *beta, fracs, &config.opt)?;
            let err = fit.relative_slope_error();
            let status = if err <= *tol { Status::Ok } else { Status::AcceptanceFailed };
            Ok(Outcome::new(status, fit.to_csv(), to_value(&fit))
                .note(format!("slope={} predicted={} relative_error={err}", fit.slope, fit.predicted_slope)))
        }
        Command::TheoremECheck { a, b, beta, fracs, tol } => {
            let check = theorem_e_identity_check(config.n, *a, *b, *beta, fracs, &config.opt, *tol)?;
            let status = if !check.mt.converged {
                Status::Nonconvergent
            } else {
                identity_status(&check.report)
            };
            let rec = &check.report.identities[0];
            let summary = format!("lhs={} rhs={} rel_err={}", rec.lhs, rec.rhs, rec.rel_err);
            Ok(Outcome::new(status, check.to_csv(), to_value(&check)).note(summary))
        }
        Command::Lemma38Probe { betas, count, profile_nodes, span } => {
            let family = (seed..seed + count)
                .map(|s| random_log_profile(s, config.n, *profile_nodes, *span))
                .collect::<Result<Vec<_>>>()?;
            let probes = betas.iter().map(|&b| lemma_3_8_inequality_probe(&family, b)).collect::<Result<Vec<_>>>()?;
            Ok(lemma_outcome(probes))
        }
        Command::CknSweep { count, profile_nodes } => {
            let cfg = config.exponents()?;
            let rows = ckn_sweep(&cfg, cfg.q(), seed..seed + count, *profile_nodes)?;
            let max = rows.iter().map(|r| r.value).fold(0.0, f64::max);
            Ok(Outcome::new(Status::Ok, sweep_csv(&rows), to_value(&rows))
                .note(format!("profiles={} max_ratio={max}", rows.len())))
        }
    }
}
