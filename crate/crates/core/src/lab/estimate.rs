//! Empirical constants: supremum of the inequality ratio over a parametrized family.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::function::{build_family, AnnularDomain, TestFunction};
use crate::lab::{evaluate_instance, InequalityReport, LabConfig, Verdict};
use crate::optimize::{latin_hypercube, nelder_mead_max};
use crate::params::{validate_admissible, CknTuple, InequalityKind};

/// Closed interval of one family parameter, sampled uniformly in the value or its logarithm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamRange {
    pub lo: f64,
    pub hi: f64,
    #[serde(default)]
    pub log: bool,
}

impl ParamRange {
    fn at(&self, u: f64) -> f64 {
        if self.log {
            (self.lo.ln() + u * (self.hi.ln() - self.lo.ln())).exp()
        } else {
            self.lo + u * (self.hi - self.lo)
        }
    }
}

/// A family name with fixed parameters and ranged ones. The keys `rho_in` and
/// `rho_out` range over the annulus instead of the family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilySpec {
    pub name: String,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    #[serde(default)]
    pub ranges: BTreeMap<String, ParamRange>,
    /// Evaluate a full grid with this many points per ranged parameter instead of optimizing.
    #[serde(default)]
    pub sweep: Option<usize>,
}

impl FamilySpec {
    pub fn singleton(name: &str, params: BTreeMap<String, f64>) -> Self {
        Self { name: name.into(), params, ranges: BTreeMap::new(), sweep: None }
    }

    pub fn validate(&self) -> Result<()> {
        for (k, r) in &self.ranges {
            if !(r.lo <= r.hi) || !r.lo.is_finite() || !r.hi.is_finite() {
                return Err(Error::domain(format!("range `{k}` must satisfy lo ≤ hi, got [{}, {}]", r.lo, r.hi)));
            }
            if r.log && r.lo <= 0.0 {
                return Err(Error::domain(format!("log range `{k}` must be positive")));
            }
            if self.params.contains_key(k) {
                return Err(Error::domain(format!("parameter `{k}` is both fixed and ranged")));
            }
        }
        if self.sweep == Some(0) {
            return Err(Error::domain("sweep needs at least one point per parameter"));
        }
        Ok(())
    }

    /// Member at a point of the unit cube (one coordinate per ranged parameter, in key order).
    pub fn member(&self, dom: &AnnularDomain, unit: &[f64]) -> Result<(AnnularDomain, TestFunction, BTreeMap<String, f64>)> {
        let mut params = self.params.clone();
        let mut point = BTreeMap::new();
        let mut d = *dom;
        for ((k, r), u) in self.ranges.iter().zip(unit) {
            let v = r.at(*u);
            point.insert(k.clone(), v);
            match k.as_str() {
                "rho_in" => d.rho_in = v,
                "rho_out" => d.rho_out = v,
                _ => {
                    params.insert(k.clone(), v);
                }
            }
        }
        for k in ["rho_in", "rho_out"] {
            if let Some(v) = params.remove(k) {
                if k == "rho_in" {
                    d.rho_in = v;
                } else {
                    d.rho_out = v;
                }
            }
        }
        d.validate()?;
        let u = build_family(&self.name, d, &params)?;
        Ok((d, u, point))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerConfig {
    /// Latin hypercube points of the coarse scan.
    pub samples: usize,
    /// Simplex refinements started from the best scan points.
    pub starts: usize,
    /// Evaluation budget per simplex run.
    pub max_evals: usize,
    pub initial_step: f64,
    pub ftol: f64,
    pub seed: u64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self { samples: 24, starts: 3, max_evals: 60, initial_step: 0.15, ftol: 1e-6, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub point: BTreeMap<String, f64>,
    pub report: Option<InequalityReport>,
    pub error: Option<String>,
}

impl Evaluation {
    pub fn ratio(&self) -> f64 {
        match &self.report {
            Some(r) if r.verdict != Verdict::Inconclusive => r.empirical_ratio,
            _ => f64::NAN,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantEstimate {
    pub kind: InequalityKind,
    /// Supremum of the evaluated ratios: a lower bound on the best constant.
    pub sup_ratio: f64,
    pub argmax: BTreeMap<String, f64>,
    pub n_evaluations: usize,
    pub n_inconclusive: usize,
    /// Best ratio after the scan and after each simplex run.
    pub trace: Vec<f64>,
    pub evaluations: Vec<Evaluation>,
}

impl ConstantEstimate {
    pub fn best_report(&self) -> Option<&InequalityReport> {
        self.evaluations
            .iter()
            .filter(|e| e.ratio() == self.sup_ratio)
            .find_map(|e| e.report.as_ref())
    }

    pub fn any_violated(&self) -> bool {
        self.evaluations.iter().any(|e| e.report.as_ref().is_some_and(|r| r.verdict == Verdict::Violated))
    }
}

fn evaluate_point(
    kind: InequalityKind,
    tuple: &CknTuple,
    family: &FamilySpec,
    dom: &AnnularDomain,
    cfg: &LabConfig,
    unit: &[f64],
) -> Evaluation {
    let point: BTreeMap<String, f64> = family.ranges.iter().zip(unit).map(|((k, r), u)| (k.clone(), r.at(*u))).collect();
    match family.member(dom, unit).and_then(|(d, u, _)| evaluate_instance(kind, tuple, &u, &d, cfg)) {
        Ok(r) => Evaluation { point, report: Some(r), error: None },
        Err(e) => Evaluation { point, report: None, error: Some(e.to_string()) },
    }
}

fn grid_points(dim: usize, per_dim: usize) -> Vec<Vec<f64>> {
    let coord = |i: usize| if per_dim == 1 { 0.5 } else { i as f64 / (per_dim - 1) as f64 };
    let total = per_dim.pow(dim as u32);
    (0..total)
        .map(|mut idx| {
            (0..dim)
                .map(|_| {
                    let c = coord(idx % per_dim);
                    idx /= per_dim;
                    c
                })
                .collect()
        })
        .collect()
}

/// Supremum of the ratio over the family: Latin-hypercube scan plus Nelder–Mead from the best
/// `starts` points, or an exhaustive grid when `family.sweep` is set. Deterministic for a fixed seed.
pub fn estimate_constant(
    kind: InequalityKind,
    tuple: &CknTuple,
    family: &FamilySpec,
    dom: &AnnularDomain,
    opt: &OptimizerConfig,
    cfg: &LabConfig,
) -> Result<ConstantEstimate> {
    family.validate()?;
    let violations = validate_admissible(kind, tuple);
    if !violations.is_empty() {
        return Err(Error::Inadmissible(violations));
    }
    let dim = family.ranges.len();
    let scan: Vec<Vec<f64>> = if dim == 0 {
        vec![Vec::new()]
    } else if let Some(k) = family.sweep {
        grid_points(dim, k)
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(opt.seed);
        latin_hypercube(&mut rng, opt.samples.max(1), dim)
    };
    let mut evaluations: Vec<Evaluation> =
        scan.par_iter().map(|p| evaluate_point(kind, tuple, family, dom, cfg, p)).collect();
    let best_of = |evs: &[Evaluation]| evs.iter().map(Evaluation::ratio).filter(|r| !r.is_nan()).fold(f64::NEG_INFINITY, f64::max);
    let mut trace = vec![best_of(&evaluations)];

    if dim > 0 && family.sweep.is_none() && opt.starts > 0 {
        let mut order: Vec<usize> = (0..scan.len()).filter(|&i| !evaluations[i].ratio().is_nan()).collect();
        order.sort_by(|&a, &b| evaluations[b].ratio().total_cmp(&evaluations[a].ratio()).then(a.cmp(&b)));
        for &i in order.iter().take(opt.starts) {
            let start = scan[i].clone();
            let mut local = Vec::new();
            nelder_mead_max(
                |x| {
                    let e = evaluate_point(kind, tuple, family, dom, cfg, x);
                    let r = e.ratio();
                    local.push(e);
                    if r.is_nan() {
                        f64::NEG_INFINITY
                    } else {
                        r
                    }
                },
                &start,
                opt.initial_step,
                opt.max_evals,
                opt.ftol,
            );
            evaluations.extend(local);
            trace.push(best_of(&evaluations));
        }
    }

    let n_inconclusive = evaluations.iter().filter(|e| e.ratio().is_nan()).count();
    if n_inconclusive == evaluations.len() {
        let why = evaluations.iter().find_map(|e| e.error.clone()).unwrap_or_else(|| "every ratio was 0/0".into());
        return Err(Error::domain(format!("all family evaluations inconclusive: {why}")));
    }
    let (best_i, sup_ratio) = evaluations
        .iter()
        .enumerate()
        .filter(|(_, e)| !e.ratio().is_nan())
        .fold((0, f64::NEG_INFINITY), |acc, (i, e)| if e.ratio() > acc.1 { (i, e.ratio()) } else { acc });
    Ok(ConstantEstimate {
        kind,
        sup_ratio,
        argmax: evaluations[best_i].point.clone(),
        n_evaluations: evaluations.len(),
        n_inconclusive,
        trace,
        evaluations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dom(n: usize, a: f64, b: f64) -> AnnularDomain {
        AnnularDomain::new(n, a, b).unwrap()
    }

    #[test]
    fn singleton_family_is_its_ratio() {
        let d = dom(3, 1.0, 4.0);
        let fam = FamilySpec::singleton("power_bump", BTreeMap::from([("beta".into(), -0.5)]));
        let cfg = LabConfig::default();
        let t = CknTuple::hardy(0.5, 3);
        let e = estimate_constant(InequalityKind::ClassicalHardy, &t, &fam, &d, &OptimizerConfig::default(), &cfg).unwrap();
        let (_, u, _) = fam.member(&d, &[]).unwrap();
        let direct = evaluate_instance(InequalityKind::ClassicalHardy, &t, &u, &d, &cfg).unwrap();
        assert_eq!(e.sup_ratio, direct.empirical_ratio);
        assert_eq!(e.n_evaluations, 1);
    }

    #[test]
    fn estimate_is_deterministic() {
        let d = dom(3, 1.0, 4.0);
        let fam = FamilySpec {
            name: "power_bump".into(),
            params: BTreeMap::new(),
            ranges: BTreeMap::from([
                ("beta".into(), ParamRange { lo: -0.9, hi: -0.1, log: false }),
                ("cut_fraction".into(), ParamRange { lo: 0.05, hi: 0.45, log: false }),
            ]),
            sweep: None,
        };
        let opt = OptimizerConfig { samples: 8, starts: 1, max_evals: 20, seed: 11, ..Default::default() };
        let t = CknTuple::hardy(0.5, 3);
        let cfg = LabConfig::default();
        let a = estimate_constant(InequalityKind::ClassicalHardy, &t, &fam, &d, &opt, &cfg).unwrap();
        let b = estimate_constant(InequalityKind::ClassicalHardy, &t, &fam, &d, &opt, &cfg).unwrap();
        assert_eq!(a.sup_ratio.to_bits(), b.sup_ratio.to_bits());
        assert_eq!(a.argmax, b.argmax);
        assert!(a.trace.windows(2).all(|w| w[1] >= w[0]));
        assert!(a.sup_ratio < 2.0);
    }

    #[test]
    fn sweep_covers_grid() {
        let d = dom(2, 1.0, 2.0);
        let fam = FamilySpec {
            name: "radial_bump".into(),
            params: BTreeMap::new(),
            ranges: BTreeMap::from([("sharpness".into(), ParamRange { lo: 0.5, hi: 8.0, log: true })]),
            sweep: Some(5),
        };
        let t = CknTuple::ckn(1.0, 1.0, 0.0, 0.0, 0.0, 1.0, 2).unwrap();
        let e = estimate_constant(InequalityKind::LocalizedHardy, &t, &fam, &d, &OptimizerConfig::default(), &LabConfig::default())
            .unwrap();
        assert_eq!(e.n_evaluations, 5);
        assert!((e.evaluations[4].point["sharpness"] - 8.0).abs() < 1e-12);
    }

    #[test]
    fn all_inconclusive_is_an_error() {
        let d = dom(3, 1.0, 2.0);
        let fam = FamilySpec::singleton("zero", BTreeMap::new());
        let r = estimate_constant(
            InequalityKind::ClassicalHardy,
            &CknTuple::hardy(0.5, 3),
            &fam,
            &d,
            &OptimizerConfig::default(),
            &LabConfig::default(),
        );
        assert!(r.is_err());
    }
}
