//! Batch driver: reads a suite config, runs one command over every suite and writes reports.

pub mod config;
pub mod report;

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::function::TestFunction;
use crate::kfunc::{interp_from_profile, k_profile, Couple, InterpNorm, KProfile};
use crate::lab::{estimate_constant, ConstantEstimate, OptimizerConfig, Verdict};
use crate::norm::{weighted_gradient_xnorm, x_norm, NormResult};
use crate::params::{
    compatibility_residual, edge_params, holder_index, CknTuple, HolderIndex, InequalityKind, Regime, SpaceSpec,
};

pub use config::{Format, Resolved, Suite, SuiteConfig};

/// Process exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum ExitStatus {
    Ok = 0,
    Violation = 1,
    Config = 2,
    Accuracy = 3,
}

#[derive(Debug, Parser)]
#[command(name = "xscale", version, about = "Numerical checks of weighted Hardy, Sobolev and CKN inequalities")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Derive and validate the parameter tuple of every suite.
    Params(CommonArgs),
    /// Evaluate single norms of one family member per suite.
    Norm(CommonArgs),
    /// Compute K-functional profiles between the tuple's endpoint spaces.
    Kfunc(CommonArgs),
    /// Evaluate every suite on its family scan and check the verdicts.
    Verify(CommonArgs),
    /// Estimate empirical constants by scan plus simplex refinement.
    Estimate(CommonArgs),
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Suite configuration (TOML).
    #[arg(long)]
    pub config: PathBuf,
    /// Run seed; overrides the config.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory; overrides the config.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Report formats; overrides the config.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Suppress the per-suite summary on stdout.
    #[arg(long)]
    pub quiet: bool,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Params(_) => "params",
            Command::Norm(_) => "norm",
            Command::Kfunc(_) => "kfunc",
            Command::Verify(_) => "verify",
            Command::Estimate(_) => "estimate",
        }
    }

    fn args(&self) -> &CommonArgs {
        match self {
            Command::Params(a) | Command::Norm(a) | Command::Kfunc(a) | Command::Verify(a) | Command::Estimate(a) => a,
        }
    }
}

/// Summary of one suite in the manifest.
#[derive(Debug, Clone, Serialize)]
pub struct SuiteOutcome {
    pub name: String,
    pub kind: InequalityKind,
    /// `bounded`, `violated`, `inconclusive`, or `error`.
    pub verdict: String,
    pub sup_ratio: Option<f64>,
    pub n_evaluations: usize,
    pub message: Option<String>,
    pub files: Vec<String>,
}

impl SuiteOutcome {
    fn status(&self) -> ExitStatus {
        match self.verdict.as_str() {
            "bounded" => ExitStatus::Ok,
            "violated" => ExitStatus::Violation,
            _ => ExitStatus::Accuracy,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub config: String,
    pub config_sha256: String,
    pub seed: u64,
    pub timestamp_unix: u64,
    pub suites: Vec<SuiteOutcome>,
}

/// Parses `args` (program name first), runs the command, and returns the exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitStatus::Config as i32 } else { 0 };
        }
    };
    match run(&cli) {
        Ok((_, status)) => status as i32,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Config(_) | Error::Inadmissible(_) | Error::Domain(_) => ExitStatus::Config as i32,
                Error::Accuracy { .. } | Error::Io(_) => ExitStatus::Accuracy as i32,
            }
        }
    }
}

/// Runs a parsed command line; returns the manifest and the exit status.
pub fn run(cli: &Cli) -> Result<(RunManifest, ExitStatus)> {
    let args = cli.command.args();
    let text = fs::read_to_string(&args.config)
        .map_err(|e| Error::Config(format!("{}: cannot read config: {e}", args.config.display())))?;
    let src = config::Source { path: &args.config, text: &text };
    let cfg = config::parse(&src)?;
    let seed = args.seed.or(cfg.seed).unwrap_or(0);
    let suites = config::resolve(&cfg, &src, seed)?;
    let out = args.out.clone().or_else(|| cfg.out.clone()).unwrap_or_else(|| PathBuf::from("xscale-out"));
    let format = args.format.or(cfg.format).unwrap_or(Format::Both);
    fs::create_dir_all(&out)
        .map_err(|e| std::io::Error::new(e.kind(), format!("cannot create output directory {}: {e}", out.display())))?;

    let mut outcomes = Vec::with_capacity(suites.len());
    for r in &suites {
        let outcome = match run_suite(&cli.command, r, &out, format) {
            Ok(o) => o,
            Err(Error::Io(e)) => return Err(Error::Io(e)),
            Err(e) => SuiteOutcome {
                name: r.suite.name.clone(),
                kind: r.suite.kind,
                verdict: "error".into(),
                sup_ratio: None,
                n_evaluations: 0,
                message: Some(e.to_string()),
                files: Vec::new(),
            },
        };
        if !args.quiet {
            let ratio = outcome.sup_ratio.map_or_else(|| "-".to_string(), |v| format!("{v:.6}"));
            println!("{}: {} {} sup_ratio={ratio}", outcome.name, outcome.kind, outcome.verdict);
        }
        if let Some(m) = &outcome.message {
            eprintln!("{}: {m}", outcome.name);
        }
        outcomes.push(outcome);
    }
    let status = outcomes
        .iter()
        .map(SuiteOutcome::status)
        .max_by_key(|s| match s {
            // a violation outranks accuracy trouble
            ExitStatus::Violation => 3,
            ExitStatus::Accuracy => 2,
            ExitStatus::Config => 1,
            ExitStatus::Ok => 0,
        })
        .unwrap_or(ExitStatus::Ok);
    let manifest = RunManifest {
        tool: "xscale",
        version: env!("CARGO_PKG_VERSION"),
        command: cli.command.name().into(),
        config: args.config.display().to_string(),
        config_sha256: Sha256::digest(text.as_bytes()).iter().map(|b| format!("{b:02x}")).collect(),
        seed,
        timestamp_unix: std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map_or(0, |d| d.as_secs()),
        suites: outcomes,
    };
    report::write_json(&out.join("manifest.json"), &manifest)?;
    Ok((manifest, status))
}

fn centre_member(r: &Resolved) -> Result<(crate::function::AnnularDomain, TestFunction)> {
    let (d, u, _) = r.suite.family.member(&r.domain, &vec![0.5; r.suite.family.ranges.len()])?;
    Ok((d, u))
}

struct Writer<'a> {
    out: &'a Path,
    name: &'a str,
    files: Vec<String>,
}

impl Writer<'_> {
    fn json<T: Serialize>(&mut self, value: &T) -> Result<()> {
        let file = format!("{}.json", self.name);
        report::write_json(&self.out.join(&file), value)?;
        self.files.push(file);
        Ok(())
    }

    fn text(&mut self, suffix: &str, text: &str) -> Result<()> {
        let file = format!("{}{suffix}", self.name);
        report::write_text(&self.out.join(&file), text)?;
        self.files.push(file);
        Ok(())
    }
}

fn run_suite(cmd: &Command, r: &Resolved, out: &Path, format: Format) -> Result<SuiteOutcome> {
    let mut w = Writer { out, name: &r.suite.name, files: Vec::new() };
    let mut outcome = SuiteOutcome {
        name: r.suite.name.clone(),
        kind: r.suite.kind,
        verdict: "bounded".into(),
        sup_ratio: None,
        n_evaluations: 0,
        message: None,
        files: Vec::new(),
    };
    match cmd {
        Command::Params(_) => {
            let doc = params_doc(r)?;
            if format.json() {
                w.json(&doc)?;
            }
            if format.csv() {
                w.text(".csv", &report::tuple_csv(r.suite.kind.name(), &r.tuple, "admissible"))?;
            }
        }
        Command::Norm(_) => {
            let (d, u) = centre_member(r)?;
            let mut rows = Vec::new();
            for spec in &r.norms {
                let res = if spec.k == 0 {
                    x_norm(&u, spec, &d, &r.lab.quadrature)
                } else {
                    weighted_gradient_xnorm(&u, spec.a, spec.s, &d, &r.lab.quadrature)
                };
                match res {
                    Ok(v) => rows.push(NormRow::new(spec, Some(v), None)),
                    Err(e) => {
                        outcome.verdict = "error".into();
                        outcome.message = Some(e.to_string());
                        rows.push(NormRow::new(spec, None, Some(e.to_string())));
                    }
                }
            }
            outcome.n_evaluations = rows.len();
            if format.json() {
                w.json(&NormDoc { name: &r.suite.name, family: &u.family, params: &u.params, domain: d, norms: &rows })?;
            }
            if format.csv() {
                w.text(".norms.csv", &norms_csv(&rows))?;
            }
        }
        Command::Kfunc(_) => {
            let (d, u) = centre_member(r)?;
            let (profile, interp, ok) = kfunc_run(r, &u, &d)?;
            outcome.n_evaluations = profile.t_grid.len();
            if !ok {
                outcome.verdict = "violated".into();
                outcome.message = Some("profile failed a monotonicity, concavity or trivial-bound check".into());
            }
            outcome.sup_ratio = interp.as_ref().map(|i| {
                let (a, b) = (i.profile.norm_x.value, i.profile.norm_y.value);
                i.value / (a.powf(1.0 - r.tuple.theta) * b.powf(r.tuple.theta))
            });
            if format.json() {
                w.json(&KfuncDoc { name: &r.suite.name, tuple: &r.tuple, domain: d, profile: &profile, interp: interp.as_ref().map(|i| InterpSummary { value: i.value, argmax_t: i.argmax_t, at_grid_edge: i.at_grid_edge }) })?;
            }
            w.text(".kprofile.csv", &report::profile_csv(&profile))?;
        }
        Command::Verify(_) | Command::Estimate(_) => {
            let opt = match cmd {
                Command::Verify(_) => OptimizerConfig { starts: 0, ..r.optimizer.clone() },
                _ => r.optimizer.clone(),
            };
            let est = estimate_constant(r.suite.kind, &r.tuple, &r.suite.family, &r.domain, &opt, &r.lab)?;
            outcome.n_evaluations = est.n_evaluations;
            outcome.sup_ratio = Some(est.sup_ratio);
            outcome.verdict = estimate_verdict(&est).to_string();
            if est.n_inconclusive > 0 {
                outcome.message = Some(format!("{} of {} evaluations inconclusive", est.n_inconclusive, est.n_evaluations));
            }
            if format.json() {
                w.json(&EstimateDoc { name: &r.suite.name, kind: r.suite.kind, tuple: &r.tuple, domain: r.domain, family: &r.suite.family, estimate: &est })?;
            }
            if format.csv() {
                let reports: Vec<_> = est.evaluations.iter().filter_map(|e| e.report.as_ref()).collect();
                w.text(".csv", &report::reports_csv(&reports))?;
            }
            if r.suite.kind == InequalityKind::KMethod {
                let (d, u) = centre_member(r)?;
                let (profile, _, _) = kfunc_run(r, &u, &d)?;
                w.text(".kprofile.csv", &report::profile_csv(&profile))?;
            }
        }
    }
    outcome.files = w.files;
    Ok(outcome)
}

fn estimate_verdict(est: &ConstantEstimate) -> Verdict {
    if est.any_violated() {
        Verdict::Violated
    } else if est.n_inconclusive > 0 {
        Verdict::Inconclusive
    } else {
        Verdict::Bounded
    }
}

fn kfunc_run(r: &Resolved, u: &TestFunction, d: &crate::function::AnnularDomain) -> Result<(KProfile, Option<InterpNorm>, bool)> {
    let t = &r.tuple;
    let couple = Couple { x: SpaceSpec::zero(t.s_p, t.a), y: SpaceSpec::zero(t.s_r, t.c) };
    let profile = k_profile(u, &couple, r.suite.t_grid.as_deref(), d, &r.lab.quadrature, &r.lab.kfunc)?;
    let tol = profile.tolerance();
    let ok = profile.is_monotone(tol) && profile.is_concave(tol) && profile.below_trivial(tol);
    let interp = (t.theta > 0.0 && t.theta < 1.0).then(|| interp_from_profile(profile.clone(), t.theta)).transpose()?;
    Ok((profile, interp, ok))
}

#[derive(Serialize)]
struct ParamsDoc<'a> {
    name: &'a str,
    kind: InequalityKind,
    tuple: CknTuple,
    regimes: [(String, Regime); 3],
    holder_indices: Vec<(String, HolderIndex)>,
    compatibility_residual: f64,
    edge: Option<(f64, f64)>,
}

fn params_doc(r: &Resolved) -> Result<ParamsDoc<'_>> {
    let t = r.tuple;
    let named = [("1/p", t.s_p), ("1/q", t.s_q), ("1/r", t.s_r)];
    let mut holder_indices = Vec::new();
    for (label, s) in named {
        if s.value() < 0.0 {
            holder_indices.push((label.to_string(), holder_index(s, t.n)?));
        }
    }
    let edge = matches!(r.suite.kind, InequalityKind::EndpointCkn)
        .then(|| edge_params(t.s_p, t.a, t.lambda, t.n).map(|(s, a)| (s.value(), a)))
        .transpose()?;
    Ok(ParamsDoc {
        name: &r.suite.name,
        kind: r.suite.kind,
        tuple: t,
        regimes: named.map(|(l, s)| (l.to_string(), s.regime())),
        holder_indices,
        compatibility_residual: compatibility_residual(&t),
        edge,
    })
}

#[derive(Serialize)]
struct NormRow {
    k: u32,
    inv_p: f64,
    a: f64,
    result: Option<NormResult>,
    error: Option<String>,
}

impl NormRow {
    fn new(spec: &SpaceSpec, result: Option<NormResult>, error: Option<String>) -> Self {
        Self { k: spec.k, inv_p: spec.s.value(), a: spec.a, result, error }
    }
}

fn norms_csv(rows: &[NormRow]) -> String {
    let mut out = String::from("k,inv_p,a,value,err,regime\n");
    for r in rows {
        let (v, e, reg) = match &r.result {
            Some(n) => (report::num(n.value), report::num(n.err_estimate), format!("{:?}", n.regime).to_lowercase()),
            None => (String::new(), String::new(), "error".into()),
        };
        out.push_str(&format!("{},{},{},{v},{e},{reg}\n", r.k, report::num(r.inv_p), report::num(r.a)));
    }
    out
}

#[derive(Serialize)]
struct NormDoc<'a> {
    name: &'a str,
    family: &'a str,
    params: &'a std::collections::BTreeMap<String, f64>,
    domain: crate::function::AnnularDomain,
    norms: &'a [NormRow],
}

#[derive(Serialize)]
struct InterpSummary {
    value: f64,
    argmax_t: f64,
    at_grid_edge: bool,
}

#[derive(Serialize)]
struct KfuncDoc<'a> {
    name: &'a str,
    tuple: &'a CknTuple,
    domain: crate::function::AnnularDomain,
    profile: &'a KProfile,
    interp: Option<InterpSummary>,
}

#[derive(Serialize)]
struct EstimateDoc<'a> {
    name: &'a str,
    kind: InequalityKind,
    tuple: &'a CknTuple,
    domain: crate::function::AnnularDomain,
    family: &'a crate::lab::FamilySpec,
    estimate: &'a ConstantEstimate,
}
