//! Suite configuration: a TOML document with strict key checking.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::function::AnnularDomain;
use crate::kfunc::KConfig;
use crate::lab::{FamilySpec, LabConfig, OptimizerConfig};
use crate::norm::QuadratureSpec;
use crate::params::{
    ckn_targets, interpolate_pair, sobolev_conjugate, validate_admissible, CknTuple, InequalityKind, ReciprocalExponent,
    SpaceSpec,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    Both,
}

impl Format {
    pub fn json(self) -> bool {
        matches!(self, Format::Json | Format::Both)
    }

    pub fn csv(self) -> bool {
        matches!(self, Format::Csv | Format::Both)
    }
}

/// A reciprocal exponent written as a number (`0.5`) or an exact fraction (`"1/3"`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Exponent {
    Number(f64),
    Fraction(String),
}

impl Exponent {
    pub fn resolve(&self) -> Result<ReciprocalExponent> {
        match self {
            Exponent::Number(v) => Ok(ReciprocalExponent::new(*v)),
            Exponent::Fraction(text) => {
                let bad = || Error::Config(format!("cannot read `{text}` as a fraction `num/den`"));
                let (num, den) = text.split_once('/').ok_or_else(bad)?;
                let num: i64 = num.trim().parse().map_err(|_| bad())?;
                let den: i64 = den.trim().parse().map_err(|_| bad())?;
                ReciprocalExponent::from_ratio(num, den).map_err(|_| bad())
            }
        }
    }
}

/// Parameter tuple as written in a suite. Missing targets are derived per kind.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TupleSpec {
    pub inv_p: Option<Exponent>,
    pub inv_r: Option<Exponent>,
    pub inv_q: Option<Exponent>,
    #[serde(default)]
    pub a: f64,
    pub b: Option<f64>,
    pub c: Option<f64>,
    pub lambda: Option<f64>,
    pub theta: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainSpec {
    pub rho_in: f64,
    pub rho_out: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LabOptions {
    pub c2: f64,
    pub tm_alpha: f64,
    pub seminorm_only: bool,
    pub verdict_rel_tol: f64,
    /// Conjectured constant; ratios above it are reported as violations.
    pub claimed_bound: Option<f64>,
}

impl Default for LabOptions {
    fn default() -> Self {
        let d = LabConfig::default();
        Self {
            c2: d.c2,
            tm_alpha: d.tm_alpha,
            seminorm_only: d.seminorm_only,
            verdict_rel_tol: d.verdict_rel_tol,
            claimed_bound: d.claimed_bound,
        }
    }
}

/// One space `X^{k,p,a}` for the `norm` command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormSpec {
    #[serde(default)]
    pub k: u32,
    pub inv_p: Exponent,
    #[serde(default)]
    pub a: f64,
}

fn default_family() -> FamilySpec {
    FamilySpec::singleton("radial_bump", Default::default())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Suite {
    pub name: String,
    pub kind: InequalityKind,
    pub n: usize,
    #[serde(default)]
    pub tuple: TupleSpec,
    pub domain: DomainSpec,
    #[serde(default = "default_family")]
    pub family: FamilySpec,
    #[serde(default)]
    pub quadrature: QuadratureSpec,
    #[serde(default)]
    pub optimizer: OptimizerConfig,
    #[serde(default)]
    pub lab: LabOptions,
    #[serde(default)]
    pub kfunc: KConfig,
    /// Spaces for the `norm` command; defaults to the spaces of the tuple.
    #[serde(default)]
    pub norms: Vec<NormSpec>,
    /// `t` values for the `kfunc` command; defaults to a log grid around `‖u‖_X/‖u‖_Y`.
    pub t_grid: Option<Vec<f64>>,
    /// Overrides the run seed for this suite.
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteConfig {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    #[serde(default, rename = "suite")]
    pub suites: Vec<Suite>,
}

/// A suite with its tuple derived and every setting resolved.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub suite: Suite,
    pub tuple: CknTuple,
    pub domain: AnnularDomain,
    pub lab: LabConfig,
    pub optimizer: OptimizerConfig,
    pub norms: Vec<SpaceSpec>,
}

/// Config text plus where it came from, for line-anchored diagnostics.
pub struct Source<'a> {
    pub path: &'a Path,
    pub text: &'a str,
}

impl Source<'_> {
    /// 1-based line of the `index`-th `[[suite]]` header.
    fn suite_line(&self, index: usize) -> usize {
        self.text
            .lines()
            .enumerate()
            .filter(|(_, l)| l.trim_start().starts_with("[[suite]]"))
            .nth(index)
            .map_or(1, |(i, _)| i + 1)
    }

    fn error(&self, index: usize, name: &str, msg: impl std::fmt::Display) -> Error {
        Error::Config(format!("{}:{}: suite `{name}`: {msg}", self.path.display(), self.suite_line(index)))
    }
}

pub fn parse(src: &Source) -> Result<SuiteConfig> {
    toml::from_str(src.text).map_err(|e| {
        let line = e
            .span()
            .map(|s| src.text[..s.start.min(src.text.len())].matches('\n').count() + 1)
            .unwrap_or(1);
        Error::Config(format!("{}:{line}: {}", src.path.display(), e.message()))
    })
}

fn required(e: &Option<Exponent>, name: &str) -> Result<ReciprocalExponent> {
    e.as_ref()
        .ok_or_else(|| Error::Config(format!("tuple.{name} is required for this kind")))?
        .resolve()
}

fn optional(e: &Option<Exponent>) -> Result<Option<ReciprocalExponent>> {
    e.as_ref().map(Exponent::resolve).transpose()
}

/// The kind's full tuple from what the suite states; explicit `inv_q` and `b` override derived values.
pub fn derive_tuple(kind: InequalityKind, n: usize, t: &TupleSpec) -> Result<CknTuple> {
    let inv_n = ReciprocalExponent::from_ratio(1, n.max(1) as i64)?;
    let a = t.a;
    let c = t.c.unwrap_or(a);
    let lambda = t.lambda.unwrap_or(0.0);
    let theta = t.theta.unwrap_or(if kind == InequalityKind::KMethod { 0.5 } else { 1.0 });
    let s_p = match kind {
        InequalityKind::EndpointLog | InequalityKind::TrudingerMoser | InequalityKind::EndpointCkn => {
            optional(&t.inv_p)?.unwrap_or(inv_n)
        }
        _ => required(&t.inv_p, "inv_p")?,
    };
    let s_r = optional(&t.inv_r)?.unwrap_or(s_p);
    let unit = |name: &str, v: f64| {
        if (0.0..=1.0).contains(&v) {
            Ok(())
        } else {
            Err(Error::Config(format!("tuple.{name} = {v} outside [0, 1]")))
        }
    };
    unit("lambda", lambda)?;
    unit("theta", theta)?;
    let mut tuple = match kind {
        InequalityKind::ClassicalHardy => {
            if a != 0.0 {
                return Err(Error::Config("classical_hardy is unweighted; tuple.a must be 0".into()));
            }
            CknTuple::hardy(s_p, n)
        }
        InequalityKind::LocalizedHardy => CknTuple { s_q: s_p, b: a + 1.0, ..base(s_p, s_p, a, a, n) },
        InequalityKind::GeneralizedSobolev => {
            CknTuple { s_q: sobolev_conjugate(s_p, n), b: a, lambda: 1.0, ..base(s_p, s_p, a, a, n) }
        }
        InequalityKind::Interpolation | InequalityKind::KMethod => {
            let (s_q, b) = interpolate_pair(s_p, s_r, a, c, lambda)?;
            CknTuple { s_q, b, lambda, theta: if kind == InequalityKind::KMethod { theta } else { 1.0 }, ..base(s_p, s_r, a, c, n) }
        }
        InequalityKind::HardySobolev => CknTuple::hardy_sobolev(s_p, required(&t.inv_q, "inv_q")?, a, n),
        InequalityKind::GeneralizedCkn => {
            let (s_q, b) = ckn_targets(s_p, s_r, a, c, lambda, theta, n)?;
            CknTuple { s_q, b, lambda, theta, ..base(s_p, s_r, a, c, n) }
        }
        InequalityKind::EndpointLog | InequalityKind::TrudingerMoser => {
            CknTuple { s_q: ReciprocalExponent::new(0.0), b: a, ..base(s_p, s_p, a, a, n) }
        }
        InequalityKind::EndpointCkn => CknTuple::endpoint_ckn(s_r, a, c, lambda, theta, n)?,
    };
    if let Some(q) = optional(&t.inv_q)? {
        tuple.s_q = q;
    }
    if let Some(b) = t.b {
        tuple.b = b;
    }
    Ok(tuple)
}

fn base(s_p: ReciprocalExponent, s_r: ReciprocalExponent, a: f64, c: f64, n: usize) -> CknTuple {
    CknTuple { s_p, s_r, s_q: s_p, a, b: a, c, lambda: 0.0, theta: 1.0, n }
}

/// Derives and validates every suite; the first failure is returned with its line.
pub fn resolve(cfg: &SuiteConfig, src: &Source, seed: u64) -> Result<Vec<Resolved>> {
    let mut names = std::collections::BTreeSet::new();
    cfg.suites
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let err = |e: &dyn std::fmt::Display| src.error(i, &s.name, e);
            if s.name.is_empty() || !s.name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-') {
                return Err(err(&"name must be nonempty and use only [A-Za-z0-9_-]"));
            }
            if !names.insert(s.name.clone()) {
                return Err(err(&"duplicate suite name"));
            }
            let tuple = derive_tuple(s.kind, s.n, &s.tuple).map_err(|e| err(&e))?;
            let violations = validate_admissible(s.kind, &tuple);
            if !violations.is_empty() {
                return Err(err(&Error::Inadmissible(violations)));
            }
            let domain = AnnularDomain::new(s.n, s.domain.rho_in, s.domain.rho_out).map_err(|e| err(&e))?;
            let suite_seed = s.seed.unwrap_or(seed);
            let quadrature = QuadratureSpec { seed: suite_seed, ..s.quadrature };
            quadrature.validate(s.n).map_err(|e| err(&e))?;
            s.family.validate().map_err(|e| err(&e))?;
            // a member at the centre of the ranges must build
            s.family.member(&domain, &vec![0.5; s.family.ranges.len()]).map_err(|e| err(&e))?;
            if s.lab.c2 < 1.0 {
                return Err(err(&"lab.c2 must be at least 1"));
            }
            if !(s.lab.verdict_rel_tol >= 0.0 && s.lab.verdict_rel_tol.is_finite()) {
                return Err(err(&"lab.verdict_rel_tol must be a finite nonnegative number"));
            }
            if s.lab.claimed_bound.is_some_and(|c| !(c > 0.0 && c.is_finite())) {
                return Err(err(&"lab.claimed_bound must be a positive number"));
            }
            if let Some(g) = &s.t_grid {
                if g.is_empty() || g.iter().any(|t| !(*t > 0.0 && t.is_finite())) {
                    return Err(err(&"t_grid must be a nonempty list of positive numbers"));
                }
            }
            let norms = if s.norms.is_empty() {
                default_norms(&tuple)
            } else {
                s.norms
                    .iter()
                    .map(|ns| SpaceSpec::new(ns.k, ns.inv_p.resolve()?, ns.a))
                    .collect::<Result<Vec<_>>>()
                    .map_err(|e| err(&e))?
            };
            let lab = LabConfig {
                quadrature,
                kfunc: s.kfunc.clone(),
                c2: s.lab.c2,
                tm_alpha: s.lab.tm_alpha,
                seminorm_only: s.lab.seminorm_only,
                verdict_rel_tol: s.lab.verdict_rel_tol,
                claimed_bound: s.lab.claimed_bound,
            };
            let optimizer = OptimizerConfig { seed: suite_seed, ..s.optimizer.clone() };
            Ok(Resolved { suite: s.clone(), tuple, domain, lab, optimizer, norms })
        })
        .collect()
}

/// `(q, b)`, `(p, a)` with one derivative, and `(r, c)`.
fn default_norms(t: &CknTuple) -> Vec<SpaceSpec> {
    vec![SpaceSpec::zero(t.s_q, t.b), SpaceSpec { k: 1, s: t.s_p, a: t.a }, SpaceSpec::zero(t.s_r, t.c)]
}
