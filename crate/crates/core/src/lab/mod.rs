//! Inequalities instantiated as `lhs ≤ C·Π factor^exponent` and evaluated on test functions.

mod endpoint;
mod estimate;

pub use endpoint::{endpoint_log_check, radial_log_envelope, trudinger_moser_check, EndpointLogReport, TmReport, TAIL_LEVELS};
pub use estimate::{estimate_constant, ConstantEstimate, Evaluation, FamilySpec, OptimizerConfig, ParamRange};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::function::{AnnularDomain, RadialFactor, TestFunction};
use crate::kfunc::{interp_norm, Couple, KConfig};
use crate::norm::{weighted_gradient_xnorm, x_norm, NormResult, QuadratureSpec};
use crate::params::{
    edge_params, hardy_constant, validate_admissible, CknTuple, InequalityKind, ReciprocalExponent, SpaceSpec,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Bounded,
    Violated,
    Inconclusive,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Bounded => "bounded",
            Verdict::Violated => "violated",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

/// One right-hand side factor, entering the product as `value^exponent`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Factor {
    pub name: String,
    pub value: f64,
    pub err_estimate: f64,
    pub exponent: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport {
    pub kind: InequalityKind,
    pub tuple: CknTuple,
    pub family: String,
    pub family_params: std::collections::BTreeMap<String, f64>,
    pub domain: AnnularDomain,
    pub lhs_name: String,
    pub lhs: f64,
    pub lhs_err: f64,
    pub rhs_factors: Vec<Factor>,
    pub rhs: f64,
    pub empirical_ratio: f64,
    pub ratio_err: f64,
    /// Known upper bound on the best constant, when one is available.
    pub reference_bound: Option<f64>,
    /// Whether the empirical ratio is a lower bound for the best constant (true for sup-type families)
    /// and what the reference bound is.
    pub bound_label: String,
    pub verdict: Verdict,
    pub diagnostics: Vec<(String, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LabConfig {
    pub quadrature: QuadratureSpec,
    pub kfunc: KConfig,
    /// Additive constant inside the logarithm of the endpoint bounds (at least 1).
    pub c2: f64,
    /// Exponent multiplier of the exponential integral.
    pub tm_alpha: f64,
    /// Use the Hölder seminorm instead of the full norm on the left of the Sobolev-type kinds.
    pub seminorm_only: bool,
    /// Relative slack allowed above a reference bound before reporting a violation.
    pub verdict_rel_tol: f64,
    /// Conjectured constant to check every ratio against, on top of any closed-form bound.
    pub claimed_bound: Option<f64>,
}

impl Default for LabConfig {
    fn default() -> Self {
        Self {
            quadrature: QuadratureSpec::default(),
            kfunc: KConfig::default(),
            c2: 1.0,
            tm_alpha: 1.0,
            seminorm_only: false,
            verdict_rel_tol: 1e-9,
            claimed_bound: None,
        }
    }
}

/// `(M/m)·(C_P/ρ)` with `M, m` the extreme values of `|x|^{−a}` on the annulus,
/// `ρ = ρ_in` and `C_P = ρ_out − ρ_in`.
pub fn localized_hardy_bound(dom: &AnnularDomain, a: f64, p: f64) -> Result<f64> {
    dom.validate()?;
    if !(p >= 1.0) {
        return Err(Error::domain(format!("localized bound needs p ≥ 1, got {p}")));
    }
    let (w_in, w_out) = (dom.rho_in.powf(-a), dom.rho_out.powf(-a));
    let ratio = w_in.max(w_out) / w_in.min(w_out);
    Ok(ratio * dom.width() / dom.rho_in)
}

fn zero_spec(s: ReciprocalExponent, a: f64) -> SpaceSpec {
    SpaceSpec::zero(s, a)
}

/// Builds a report from computed pieces and applies the verdict rule.
#[allow(clippy::too_many_arguments)]
fn finish(
    kind: InequalityKind,
    tuple: &CknTuple,
    u: &TestFunction,
    dom: &AnnularDomain,
    lhs_name: &str,
    lhs: &NormResult,
    factors: Vec<Factor>,
    reference_bound: Option<f64>,
    diagnostics: Vec<(String, f64)>,
    cfg: &LabConfig,
) -> InequalityReport {
    let factors: Vec<Factor> = factors.into_iter().filter(|f| f.exponent != 0.0).collect();
    let rhs: f64 = factors.iter().map(|f| f.value.powf(f.exponent)).product();
    let ratio = lhs.value / rhs;
    let mut rel = if lhs.value > 0.0 { lhs.err_estimate / lhs.value } else { 0.0 };
    for f in &factors {
        if f.value > 0.0 {
            rel += f.exponent.abs() * f.err_estimate / f.value;
        }
    }
    let ratio_err = ratio.abs() * rel;
    let verdict = if !ratio.is_finite() || !lhs.value.is_finite() || !rhs.is_finite() || rhs == 0.0 {
        Verdict::Inconclusive
    } else {
        let exceeds = |c: f64| ratio > c * (1.0 + cfg.verdict_rel_tol) + 5.0 * ratio_err;
        if reference_bound.into_iter().chain(cfg.claimed_bound).any(exceeds) {
            Verdict::Violated
        } else {
            Verdict::Bounded
        }
    };
    let bound_label = match reference_bound {
        Some(_) => "ratio is a lower bound on the best constant; reference_bound is an upper bound".into(),
        None => "ratio is a lower bound on the best constant; no closed-form upper bound".into(),
    };
    InequalityReport {
        kind,
        tuple: *tuple,
        family: u.family.clone(),
        family_params: u.params.clone(),
        domain: *dom,
        lhs_name: lhs_name.into(),
        lhs: lhs.value,
        lhs_err: lhs.err_estimate,
        rhs_factors: factors,
        rhs,
        empirical_ratio: ratio,
        ratio_err,
        reference_bound,
        bound_label,
        verdict,
        diagnostics,
    }
}

fn factor(name: &str, r: &NormResult, exponent: f64) -> Factor {
    Factor { name: name.into(), value: r.value, err_estimate: r.err_estimate, exponent }
}

/// Norm with the given exponent, skipped (reported as 1) when the exponent is zero.
fn maybe(exponent: f64, eval: impl FnOnce() -> Result<NormResult>) -> Result<NormResult> {
    if exponent == 0.0 {
        Ok(NormResult { value: 1.0, err_estimate: 0.0, regime: crate::params::Regime::Lebesgue, is_lower_bound: false })
    } else {
        eval()
    }
}

/// Shared shape of the gradient kinds: `‖|x|^{−b}u‖_{X^q} ≤ C ‖|x|^{−a}Du‖_{X^p}^θ ‖|x|^{−c}u‖_{X^r}^{1−θ}`.
fn gradient_shape(
    kind: InequalityKind,
    t: &CknTuple,
    u: &TestFunction,
    dom: &AnnularDomain,
    cfg: &LabConfig,
    bound: Option<f64>,
) -> Result<InequalityReport> {
    let q = &cfg.quadrature;
    let lhs = x_norm(u, &zero_spec(t.s_q, t.b), dom, q)?;
    let grad = maybe(t.theta, || weighted_gradient_xnorm(u, t.a, t.s_p, dom, q))?;
    let zero = maybe(1.0 - t.theta, || x_norm(u, &zero_spec(t.s_r, t.c), dom, q))?;
    let factors = vec![factor("grad_p_a", &grad, t.theta), factor("zero_r_c", &zero, 1.0 - t.theta)];
    Ok(finish(kind, t, u, dom, "weighted_q_b", &lhs, factors, bound, Vec::new(), cfg))
}

/// Evaluates one inequality on one test function.
pub fn evaluate_instance(
    kind: InequalityKind,
    t: &CknTuple,
    u: &TestFunction,
    dom: &AnnularDomain,
    cfg: &LabConfig,
) -> Result<InequalityReport> {
    let violations = validate_admissible(kind, t);
    if !violations.is_empty() {
        return Err(Error::Inadmissible(violations));
    }
    if t.n != dom.n || u.support.n != dom.n {
        return Err(Error::domain(format!("dimension mismatch: tuple n = {}, domain n = {}", t.n, dom.n)));
    }
    let q = &cfg.quadrature;
    match kind {
        InequalityKind::ClassicalHardy => {
            let bound = hardy_constant(t.n, t.s_p.p())?;
            gradient_shape(kind, t, u, dom, cfg, Some(bound))
        }
        InequalityKind::LocalizedHardy => {
            let bound = localized_hardy_bound(dom, t.a, t.s_p.p())?;
            gradient_shape(kind, t, u, dom, cfg, Some(bound))
        }
        InequalityKind::HardySobolev | InequalityKind::GeneralizedCkn => gradient_shape(kind, t, u, dom, cfg, None),
        InequalityKind::GeneralizedSobolev => {
            let (lhs, name) = if cfg.seminorm_only && t.s_q.value() < 0.0 {
                let alpha = crate::norm::zero_order_alpha(t.s_q, t.n)?;
                (crate::norm::holder_seminorm(u, t.b, alpha, dom, q)?, "holder_seminorm_q_b")
            } else {
                (x_norm(u, &zero_spec(t.s_q, t.b), dom, q)?, "weighted_q_b")
            };
            let grad = weighted_gradient_xnorm(u, t.a, t.s_p, dom, q)?;
            Ok(finish(kind, t, u, dom, name, &lhs, vec![factor("grad_p_a", &grad, 1.0)], None, Vec::new(), cfg))
        }
        InequalityKind::Interpolation => {
            let lhs = x_norm(u, &zero_spec(t.s_q, t.b), dom, q)?;
            let np = maybe(1.0 - t.lambda, || x_norm(u, &zero_spec(t.s_p, t.a), dom, q))?;
            let nr = maybe(t.lambda, || x_norm(u, &zero_spec(t.s_r, t.c), dom, q))?;
            // Hölder's inequality gives constant 1 when both ends are Lebesgue or sup norms
            let bound = (t.s_p.value() >= 0.0 && t.s_r.value() >= 0.0).then_some(1.0);
            let factors = vec![factor("zero_p_a", &np, 1.0 - t.lambda), factor("zero_r_c", &nr, t.lambda)];
            Ok(finish(kind, t, u, dom, "weighted_q_b", &lhs, factors, bound, Vec::new(), cfg))
        }
        InequalityKind::EndpointLog => {
            let r = endpoint_log_check(u, dom, t.a, cfg.c2, cfg)?;
            let lhs = NormResult { value: r.sup, err_estimate: r.sup_err, regime: crate::params::Regime::Infinity, is_lower_bound: true };
            let g = Factor { name: "log_gradient_bound".into(), value: r.g, err_estimate: r.g_err, exponent: 1.0 };
            let diag = vec![("gamma".into(), r.gamma), ("grad_n_a".into(), r.grad_norm), ("hardy_n_a1".into(), r.hardy_norm)];
            Ok(finish(kind, t, u, dom, "sup_a", &lhs, vec![g], None, diag, cfg))
        }
        InequalityKind::EndpointCkn => endpoint_ckn(t, u, dom, cfg),
        InequalityKind::TrudingerMoser => {
            let v = if t.a == 0.0 { u.clone() } else { u.with_factor(RadialFactor::Power { beta: -t.a }) };
            let rep = trudinger_moser_check(&v, dom, &[cfg.tm_alpha], cfg)?;
            let lhs = NormResult {
                value: rep.integrals[0],
                err_estimate: rep.integral_errs[0],
                regime: crate::params::Regime::Lebesgue,
                is_lower_bound: false,
            };
            let vol = Factor { name: "volume".into(), value: rep.volume, err_estimate: 0.0, exponent: 1.0 };
            let diag = vec![("alpha".into(), cfg.tm_alpha), ("grad_n".into(), rep.grad_norm)];
            Ok(finish(kind, t, u, dom, "exp_integral", &lhs, vec![vol], None, diag, cfg))
        }
        InequalityKind::KMethod => {
            let couple = Couple { x: zero_spec(t.s_p, t.a), y: zero_spec(t.s_r, t.c) };
            let interp = interp_norm(u, &couple, t.theta, None, dom, q, &cfg.kfunc)?;
            let (nx, ny) = (interp.profile.norm_x, interp.profile.norm_y);
            let lhs = NormResult { value: interp.value, err_estimate: 0.0, regime: nx.regime, is_lower_bound: false };
            let factors = vec![factor("norm_x", &nx, 1.0 - t.theta), factor("norm_y", &ny, t.theta)];
            let diag = vec![("argmax_t".into(), interp.argmax_t), ("at_grid_edge".into(), f64::from(u8::from(interp.at_grid_edge)))];
            let mut rep = finish(kind, t, u, dom, "interp_theta_inf", &lhs, factors, Some(1.0), diag, cfg);
            if u.is_zero() {
                // zero element: ratio 0 by convention
                rep.empirical_ratio = 0.0;
                rep.ratio_err = 0.0;
                rep.verdict = Verdict::Bounded;
            }
            Ok(rep)
        }
    }
}

fn endpoint_ckn(t: &CknTuple, u: &TestFunction, dom: &AnnularDomain, cfg: &LabConfig) -> Result<InequalityReport> {
    let q = &cfg.quadrature;
    let lhs = x_norm(u, &zero_spec(t.s_q, t.b), dom, q)?;
    let log = maybe(t.theta, || {
        let r = endpoint_log_check(u, dom, t.a, cfg.c2, cfg)?;
        Ok(NormResult { value: r.g, err_estimate: r.g_err, regime: crate::params::Regime::Lebesgue, is_lower_bound: false })
    })?;
    let zero = maybe(1.0 - t.theta, || x_norm(u, &zero_spec(t.s_r, t.c), dom, q))?;
    // edge quantities: sup of |x|^{−a_λ}u and the volume factor bounding the L^{p_λ} norm by it
    let (s_pl, a_l) = edge_params(t.s_p, t.a, t.lambda, t.n)?;
    let edge_sup = crate::norm::sup_norm(u, a_l, dom, q)?;
    let vol_factor = dom.volume().powf(s_pl.value());
    let diag = vec![
        ("edge_s".into(), s_pl.value()),
        ("edge_a".into(), a_l),
        ("edge_sup".into(), edge_sup.value),
        ("volume_factor".into(), vol_factor),
        ("edge_bound".into(), vol_factor * edge_sup.value),
    ];
    let factors = vec![factor("log_gradient_bound", &log, t.theta), factor("zero_r_c", &zero, 1.0 - t.theta)];
    Ok(finish(InequalityKind::EndpointCkn, t, u, dom, "weighted_q_b", &lhs, factors, None, diag, cfg))
}
