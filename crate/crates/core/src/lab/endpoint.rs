//! Critical-exponent (`p = n`) checks: exponential integrability with its level-set
//! tail, and the sup bound with logarithmic loss.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::function::{sphere_area, AnnularDomain, ScalarField, TestFunction};
use crate::lab::LabConfig;
use crate::norm::{integrate, lebesgue_norm, sup_norm, weighted_gradient_xnorm};
use crate::params::ReciprocalExponent;
use crate::quadrature::SphereRule;

/// `exp(α (|v|/A)^{n'})`.
struct ExpIntegrand<'a> {
    v: &'a TestFunction,
    alpha: f64,
    grad: f64,
    conj: f64,
}

impl ScalarField for ExpIntegrand<'_> {
    fn value(&self, x: &[f64]) -> f64 {
        (self.alpha * (self.v.evaluate(x).abs() / self.grad).powf(self.conj)).exp()
    }

    fn value_and_hint(&self, x: &[f64]) -> (f64, f64) {
        let v = self.v.evaluate(x);
        ((self.alpha * (v.abs() / self.grad).powf(self.conj)).exp(), v)
    }

    fn is_radial(&self) -> bool {
        self.v.mode == 0
    }

    fn radial_breaks(&self) -> Vec<f64> {
        self.v.radial_breaks()
    }

    fn angular_mode(&self) -> u32 {
        self.v.mode
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TmReport {
    pub alphas: Vec<f64>,
    pub integrals: Vec<f64>,
    pub integral_errs: Vec<f64>,
    pub volume: f64,
    /// `‖∇v‖_{L^n}`.
    pub grad_norm: f64,
    pub monotone: bool,
    pub finite: bool,
    pub levels: Vec<f64>,
    pub measures: Vec<f64>,
    /// Least-squares fit of `ln μ(t)` against `t^{n'}`.
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Number of levels in the tail fit, spread over `[M/2, M)` with `M = sup|v|`.
pub const TAIL_LEVELS: usize = 16;

/// Measure of `{|v| > t}` for each level, by root bracketing along rays.
fn level_measures(v: &TestFunction, dom: &AnnularDomain, levels: &[f64], angular: usize) -> Vec<f64> {
    let n = dom.n;
    let sphere = if v.mode == 0 { SphereRule::radial(n) } else { SphereRule::product(n, angular, v.mode) };
    const SAMPLES: usize = 2048;
    let radii: Vec<f64> = (0..=SAMPLES)
        .map(|i| dom.rho_in + dom.width() * i as f64 / SAMPLES as f64)
        .collect();
    let nf = n as i32;
    let mut out = vec![0.0; levels.len()];
    let mut x = vec![0.0; n];
    for d in 0..sphere.len() {
        let dir = sphere.dir(d);
        let mut eval = |r: f64| {
            for (xi, di) in x.iter_mut().zip(dir) {
                *xi = r * di;
            }
            v.evaluate(&x).abs()
        };
        let vals: Vec<f64> = radii.iter().map(|&r| eval(r)).collect();
        for (li, &t) in levels.iter().enumerate() {
            let mut sum = 0.0;
            let mut start: Option<f64> = None;
            for k in 0..SAMPLES {
                let (above0, above1) = (vals[k] > t, vals[k + 1] > t);
                if above0 != above1 {
                    // bisect the crossing inside [r_k, r_{k+1}]
                    let (mut lo, mut hi) = (radii[k], radii[k + 1]);
                    for _ in 0..80 {
                        let mid = 0.5 * (lo + hi);
                        if (eval(mid) > t) == above0 {
                            lo = mid;
                        } else {
                            hi = mid;
                        }
                    }
                    let root = 0.5 * (lo + hi);
                    if above1 {
                        start = Some(root);
                    } else if let Some(s) = start.take() {
                        sum += (root.powi(nf) - s.powi(nf)) / n as f64;
                    } else {
                        sum += (root.powi(nf) - dom.rho_in.powi(nf)) / n as f64;
                    }
                } else if k == 0 && above0 {
                    start = Some(radii[0]);
                }
            }
            if let Some(s) = start {
                sum += (dom.rho_out.powi(nf) - s.powi(nf)) / n as f64;
            }
            out[li] += sphere.weights[d] * sum;
        }
    }
    out
}

/// Least squares `y ≈ slope·x + intercept` with the coefficient of determination.
fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let m = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / m, y.iter().sum::<f64>() / m);
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_tot: f64 = y.iter().map(|b| (b - my) * (b - my)).sum();
    let ss_res: f64 = x.iter().zip(y).map(|(a, b)| (b - slope * a - intercept).powi(2)).sum();
    (slope, intercept, 1.0 - ss_res / ss_tot)
}

/// Exponential integrals `∫ exp(α|v|^{n'}/‖∇v‖_n^{n'})` on `alpha_grid` and the tail law of `μ(t)`.
pub fn trudinger_moser_check(v: &TestFunction, dom: &AnnularDomain, alpha_grid: &[f64], cfg: &LabConfig) -> Result<TmReport> {
    let q = &cfg.quadrature;
    let n = dom.n;
    let s_n = ReciprocalExponent::from_ratio(1, n as i64)?;
    let grad = weighted_gradient_xnorm(v, 0.0, s_n, dom, q)?.value;
    if !(grad > 0.0) {
        return Err(Error::domain("gradient norm vanishes"));
    }
    let conj = n as f64 / (n as f64 - 1.0);
    let mut integrals = Vec::with_capacity(alpha_grid.len());
    let mut errs = Vec::with_capacity(alpha_grid.len());
    for &alpha in alpha_grid {
        let r = integrate(&ExpIntegrand { v, alpha, grad, conj }, dom, q)?;
        integrals.push(r.value);
        errs.push(r.err_estimate);
    }
    let monotone = integrals.windows(2).zip(alpha_grid.windows(2)).all(|(i, a)| (i[1] > i[0]) == (a[1] > a[0]));
    let finite = integrals.iter().all(|v| v.is_finite());

    let m = sup_norm(v, 0.0, dom, q)?.value;
    let levels: Vec<f64> = (0..TAIL_LEVELS).map(|k| 0.5 * m + k as f64 * m / (2 * TAIL_LEVELS) as f64).collect();
    let angular = ((q.sphere_points as f64 / 2.0).powf(1.0 / (n as f64 - 1.0)).ceil() as usize).max(2) * 4;
    let measures = level_measures(v, dom, &levels, angular);
    let pts: Vec<(f64, f64)> = levels
        .iter()
        .zip(&measures)
        .filter(|(_, mu)| **mu > 0.0)
        .map(|(t, mu)| ((t / grad).powf(conj), mu.ln()))
        .collect();
    let (slope, intercept, r_squared) = if pts.len() >= 3 {
        let (x, y): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
        linear_fit(&x, &y)
    } else {
        (f64::NAN, f64::NAN, f64::NAN)
    };
    Ok(TmReport {
        alphas: alpha_grid.to_vec(),
        integrals,
        integral_errs: errs,
        volume: dom.volume(),
        grad_norm: grad,
        monotone,
        finite,
        levels,
        measures,
        slope,
        intercept,
        r_squared,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EndpointLogReport {
    /// `‖|x|^{−a}∇u‖_{L^n}`.
    pub grad_norm: f64,
    /// `‖|x|^{−(a+1)}u‖_{L^n}`.
    pub hardy_norm: f64,
    /// `‖|x|^{−a}u‖_{L^∞}`.
    pub sup: f64,
    pub sup_err: f64,
    pub gamma: f64,
    /// `grad_norm · (1 + ln Γ)^{1/n'}`.
    pub g: f64,
    pub g_err: f64,
    pub ratio: f64,
    pub inconclusive: bool,
}

/// Sup norm against the gradient norm with logarithmic loss, `Γ = c2 + grad/hardy`.
pub fn endpoint_log_check(u: &TestFunction, dom: &AnnularDomain, a: f64, c2: f64, cfg: &LabConfig) -> Result<EndpointLogReport> {
    if !(c2 >= 1.0) {
        return Err(Error::domain(format!("log constant must be at least 1, got {c2}")));
    }
    let q = &cfg.quadrature;
    let n = dom.n;
    let s_n = ReciprocalExponent::from_ratio(1, n as i64)?;
    let grad = weighted_gradient_xnorm(u, a, s_n, dom, q)?;
    let hardy = lebesgue_norm(u, a + 1.0, s_n, dom, q)?;
    let sup = sup_norm(u, a, dom, q)?;
    let conj = n as f64 / (n as f64 - 1.0);
    let inconclusive = !(grad.value > 0.0 && hardy.value > 0.0);
    let (gamma, g, g_err) = if inconclusive {
        (f64::NAN, 0.0, 0.0)
    } else {
        let quot = grad.value / hardy.value;
        let gamma = c2 + quot;
        let log_term = 1.0 + gamma.ln();
        let g = grad.value * log_term.powf(1.0 / conj);
        let gamma_err = quot * (grad.rel_err() + hardy.rel_err());
        let g_rel = grad.rel_err() + (gamma_err / gamma) / (conj * log_term);
        (gamma, g, g * g_rel)
    };
    let ratio = if inconclusive { f64::NAN } else { sup.value / g };
    Ok(EndpointLogReport {
        grad_norm: grad.value,
        hardy_norm: hardy.value,
        sup: sup.value,
        sup_err: sup.err_estimate,
        gamma,
        g,
        g_err,
        ratio,
        inconclusive,
    })
}

/// Bound on the endpoint ratio for radial functions: `sqrt(ln(ρ_out/ρ_in)/|S^1|)` when `n = 2`, `a = 0`, `c2 ≥ 1`.
pub fn radial_log_envelope(dom: &AnnularDomain) -> f64 {
    ((dom.rho_out / dom.rho_in).ln() / sphere_area(2)).sqrt()
}
