//! Closed-form test functions on punctured annuli.
//!
//! A [`TestFunction`] is `u(x) = c · Π_k f_k(|x|) · A_m(x)`: a product of
//! radial factors times an optional angular modulation
//! `A_m(x) = Re[(x_1 + i x_2)^m] / |x|^m`. Every factor has an analytic
//! derivative, so gradients are exact up to rounding.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Bounded annulus `{rho_in < |x| < rho_out}` in `R^n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnnularDomain {
    pub n: usize,
    pub rho_in: f64,
    pub rho_out: f64,
}

impl AnnularDomain {
    pub fn new(n: usize, rho_in: f64, rho_out: f64) -> Result<Self> {
        let dom = Self { n, rho_in, rho_out };
        dom.validate()?;
        Ok(dom)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::domain(format!("dimension n = {} below 2", self.n)));
        }
        if !(self.rho_in > 0.0 && self.rho_in < self.rho_out && self.rho_out.is_finite()) {
            return Err(Error::domain(format!(
                "degenerate annulus: need 0 < rho_in < rho_out < ∞, got [{}, {}]",
                self.rho_in, self.rho_out
            )));
        }
        Ok(())
    }

    pub fn width(&self) -> f64 {
        self.rho_out - self.rho_in
    }

    pub fn dist_to_origin(&self) -> f64 {
        self.rho_in
    }

    pub fn diameter(&self) -> f64 {
        2.0 * self.rho_out
    }

    /// Lebesgue measure `ω_{n−1}(ρ_out^n − ρ_in^n)/n`.
    pub fn volume(&self) -> f64 {
        let n = self.n as i32;
        sphere_area(self.n) * (self.rho_out.powi(n) - self.rho_in.powi(n)) / self.n as f64
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        let r = norm(x);
        r > self.rho_in && r < self.rho_out
    }
}

/// Surface area of the unit sphere `S^{n−1}`.
pub fn sphere_area(n: usize) -> f64 {
    // ω_{n−1} = 2π^{n/2}/Γ(n/2), via the recursion ω_{k+1} = 2π ω_{k−1}/k
    match n {
        0 => 0.0,
        1 => 2.0,
        2 => 2.0 * PI,
        _ => 2.0 * PI * sphere_area(n - 2) / (n - 2) as f64,
    }
}

pub(crate) fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Anything that can be sampled pointwise by the norm engine.
pub trait ScalarField: Sync {
    fn value(&self, x: &[f64]) -> f64;

    /// Value plus a smooth signed surrogate whose sign changes mark the kinks of `|value|`.
    fn value_and_hint(&self, x: &[f64]) -> (f64, f64) {
        let v = self.value(x);
        (v, v)
    }

    /// True when the field depends on `|x|` only; lets quadrature skip the sphere.
    fn is_radial(&self) -> bool {
        false
    }

    /// Angular mode `m` of an `x_1 + i x_2` modulation, used to align quadrature panels with its zeros.
    fn angular_mode(&self) -> u32 {
        0
    }

    /// Radii where the field is smooth but not analytic; quadrature puts panel edges there.
    fn radial_breaks(&self) -> Vec<f64> {
        Vec::new()
    }

    /// True when `f(x) = f(|x| e_1) · angular_factor(x/|x|)`; quadrature then
    /// integrates the radial and spherical parts separately.
    fn is_separable(&self) -> bool {
        self.is_radial()
    }

    /// Angular factor of a separable field at a unit vector, normalized to 1 at `e_1`.
    fn angular_factor(&self, _omega: &[f64]) -> f64 {
        1.0
    }
}

/// Adapter for closures.
pub struct FnField<F> {
    f: F,
    radial: bool,
}

impl<F: Fn(&[f64]) -> f64 + Sync> FnField<F> {
    pub fn new(f: F) -> Self {
        Self { f, radial: false }
    }

    pub fn radial(f: F) -> Self {
        Self { f, radial: true }
    }
}

impl<F: Fn(&[f64]) -> f64 + Sync> ScalarField for FnField<F> {
    fn value(&self, x: &[f64]) -> f64 {
        (self.f)(x)
    }

    fn is_radial(&self) -> bool {
        self.radial
    }
}

/// `exp(−1/t)` for `t > 0`, else 0.
fn psi(t: f64) -> f64 {
    if t > 0.0 {
        (-1.0 / t).exp()
    } else {
        0.0
    }
}

fn psi_prime(t: f64) -> f64 {
    if t > 0.0 {
        (-1.0 / t).exp() / (t * t)
    } else {
        0.0
    }
}

/// C^∞ step: 0 for `t ≤ 0`, 1 for `t ≥ 1`, all derivatives vanish at both ends.
pub fn smooth_step(t: f64) -> (f64, f64) {
    if t <= 0.0 {
        return (0.0, 0.0);
    }
    if t >= 1.0 {
        return (1.0, 0.0);
    }
    let (a, b) = (psi(t), psi(1.0 - t));
    let (da, db) = (psi_prime(t), -psi_prime(1.0 - t));
    let s = a + b;
    (a / s, (da * s - a * (da + db)) / (s * s))
}

/// One radial factor `f(r)` with derivative `f'(r)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum RadialFactor {
    /// `exp(−σ/(1 − t²))` with `t = (2r − ρ_in − ρ_out)/(ρ_out − ρ_in)`, zero for `|t| ≥ 1`.
    Mollifier { rho_in: f64, rho_out: f64, sharpness: f64 },
    /// `r^β`.
    Power { beta: f64 },
    /// Cutoff in `ln r`: equal to 1 on the middle `1 − 2f` of `[ln ρ_in, ln ρ_out]`, C^∞ to zero at both radii.
    LogPlateau { rho_in: f64, rho_out: f64, cut_fraction: f64 },
    /// Smooth radial step of width `delta` centred at `rho`; `inner` keeps `r < rho`.
    Step { rho: f64, delta: f64, inner: bool },
    /// Indicator of `[ρ_in, ρ_out]`; not smooth, only for quadrature calibration.
    Indicator { rho_in: f64, rho_out: f64 },
}

impl RadialFactor {
    /// Radii where the factor switches between analytic pieces.
    pub fn breaks(&self) -> Vec<f64> {
        match *self {
            RadialFactor::Mollifier { rho_in, rho_out, .. } | RadialFactor::Indicator { rho_in, rho_out } => vec![rho_in, rho_out],
            RadialFactor::Power { .. } => Vec::new(),
            RadialFactor::LogPlateau { rho_in, rho_out, cut_fraction } => {
                let (l0, l1) = (rho_in.ln(), rho_out.ln());
                let band = cut_fraction * (l1 - l0);
                vec![rho_in, (l0 + band).exp(), (l1 - band).exp(), rho_out]
            }
            RadialFactor::Step { rho, delta, .. } => vec![rho - 0.5 * delta, rho + 0.5 * delta],
        }
    }

    pub fn eval(&self, r: f64) -> (f64, f64) {
        match *self {
            RadialFactor::Mollifier { rho_in, rho_out, sharpness } => {
                let w = rho_out - rho_in;
                let t = (2.0 * r - rho_in - rho_out) / w;
                let d = 1.0 - t * t;
                if d <= 0.0 {
                    return (0.0, 0.0);
                }
                let v = (-sharpness / d).exp();
                // dη/dt = η · (−2σt/d²), dt/dr = 2/w
                (v, v * (-2.0 * sharpness * t / (d * d)) * (2.0 / w))
            }
            RadialFactor::Power { beta } => {
                if beta == 0.0 {
                    (1.0, 0.0)
                } else {
                    let v = r.powf(beta);
                    (v, beta * v / r)
                }
            }
            RadialFactor::LogPlateau { rho_in, rho_out, cut_fraction } => {
                if r <= rho_in || r >= rho_out {
                    return (0.0, 0.0);
                }
                let (l0, l1) = (rho_in.ln(), rho_out.ln());
                let band = cut_fraction * (l1 - l0);
                let s = r.ln();
                let (a, da) = smooth_step((s - l0) / band);
                let (b, db) = smooth_step((l1 - s) / band);
                (a * b, (da * b - a * db) / (band * r))
            }
            RadialFactor::Step { rho, delta, inner } => {
                let t = (r - (rho - 0.5 * delta)) / delta;
                let (v, dv) = smooth_step(t);
                if inner {
                    (1.0 - v, -dv / delta)
                } else {
                    (v, dv / delta)
                }
            }
            RadialFactor::Indicator { rho_in, rho_out } => {
                if r >= rho_in && r <= rho_out {
                    (1.0, 0.0)
                } else {
                    (0.0, 0.0)
                }
            }
        }
    }
}

/// Closed-form scalar field with analytic gradient and declared support.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestFunction {
    pub family: String,
    pub support: AnnularDomain,
    pub amplitude: f64,
    pub factors: Vec<RadialFactor>,
    pub mode: u32,
    pub params: BTreeMap<String, f64>,
    pub smooth: bool,
}

impl TestFunction {
    fn radial_part(&self, r: f64) -> (f64, f64) {
        let mut v = self.amplitude;
        let mut dv = 0.0;
        for f in &self.factors {
            let (fv, fd) = f.eval(r);
            dv = dv * fv + v * fd;
            v *= fv;
        }
        (v, dv)
    }

    fn outside(&self, r: f64) -> bool {
        self.smooth && (r <= self.support.rho_in || r >= self.support.rho_out)
    }

    pub fn evaluate(&self, x: &[f64]) -> f64 {
        let r = norm(x);
        if self.outside(r) || r == 0.0 {
            return 0.0;
        }
        let (rad, _) = self.radial_part(r);
        if self.mode == 0 {
            rad
        } else {
            rad * angular(x, r, self.mode).0
        }
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; x.len()];
        self.gradient_into(x, &mut g);
        g
    }

    pub fn gradient_into(&self, x: &[f64], g: &mut [f64]) {
        g.iter_mut().for_each(|v| *v = 0.0);
        let r = norm(x);
        if self.outside(r) || r == 0.0 {
            return;
        }
        let (rad, drad) = self.radial_part(r);
        if self.mode == 0 {
            for (gi, xi) in g.iter_mut().zip(x) {
                *gi = drad * xi / r;
            }
            return;
        }
        let (a, da) = angular(x, r, self.mode);
        for (i, (gi, xi)) in g.iter_mut().zip(x).enumerate() {
            *gi = drad * xi / r * a + rad * da.get(i).copied().unwrap_or(0.0);
        }
        // ∇A has components beyond the first two through the |x|^{-m} factor
        if x.len() > 2 {
            let m = self.mode as f64;
            for i in 2..x.len() {
                g[i] = drad * x[i] / r * a + rad * (-m * a * x[i] / (r * r));
            }
        }
    }

    /// `c·u`.
    pub fn scaled(&self, c: f64) -> Self {
        let mut out = self.clone();
        out.amplitude *= c;
        out
    }

    /// `u · f(|x|)`, keeping the support.
    pub fn with_factor(&self, f: RadialFactor) -> Self {
        let mut out = self.clone();
        out.factors.push(f);
        out
    }

    pub fn is_zero(&self) -> bool {
        self.amplitude == 0.0
    }
}

/// `A_m(x) = Re[(x_1 + i x_2)^m]/|x|^m` and its gradient in the `(x_1, x_2)` plane
/// plus the radial correction `−m A x/|x|²` in those two coordinates.
fn angular(x: &[f64], r: f64, m: u32) -> (f64, [f64; 2]) {
    let (x1, x2) = (x[0], x.get(1).copied().unwrap_or(0.0));
    // z^{m−1} and z^m by repeated multiplication
    let (mut pr, mut pi) = (1.0, 0.0);
    for _ in 0..m - 1 {
        (pr, pi) = (pr * x1 - pi * x2, pr * x2 + pi * x1);
    }
    let (zr, _zi) = (pr * x1 - pi * x2, pr * x2 + pi * x1);
    let mf = m as f64;
    let rm = r.powi(m as i32);
    let a = zr / rm;
    // ∂1 Re z^m = m Re z^{m−1}, ∂2 Re z^m = −m Im z^{m−1}
    let dp = [mf * pr, -mf * pi];
    let r2 = r * r;
    (
        a,
        [dp[0] / rm - mf * a * x1 / r2, dp[1] / rm - mf * a * x2 / r2],
    )
}

impl ScalarField for TestFunction {
    fn value(&self, x: &[f64]) -> f64 {
        self.evaluate(x)
    }

    fn is_radial(&self) -> bool {
        self.mode == 0
    }

    fn angular_mode(&self) -> u32 {
        self.mode
    }

    fn is_separable(&self) -> bool {
        true
    }

    fn radial_breaks(&self) -> Vec<f64> {
        let mut out = vec![self.support.rho_in, self.support.rho_out];
        for f in &self.factors {
            out.extend(f.breaks());
        }
        out
    }

    fn angular_factor(&self, omega: &[f64]) -> f64 {
        if self.mode == 0 {
            1.0
        } else {
            angular(omega, 1.0, self.mode).0
        }
    }
}

fn check_sharpness(sharpness: f64) -> Result<()> {
    if !(sharpness > 0.0 && sharpness.is_finite()) {
        return Err(Error::domain(format!("sharpness must be positive, got {sharpness}")));
    }
    Ok(())
}

/// `u(x) = exp(−σ/(1 − t²))`, `t = (2|x| − ρ_in − ρ_out)/(ρ_out − ρ_in)`.
pub fn make_radial_bump(domain: AnnularDomain, sharpness: f64) -> Result<TestFunction> {
    domain.validate()?;
    check_sharpness(sharpness)?;
    Ok(TestFunction {
        family: "radial_bump".into(),
        support: domain,
        amplitude: 1.0,
        factors: vec![RadialFactor::Mollifier {
            rho_in: domain.rho_in,
            rho_out: domain.rho_out,
            sharpness,
        }],
        mode: 0,
        params: BTreeMap::from([("sharpness".to_string(), sharpness)]),
        smooth: true,
    })
}

/// `u(x) = |x|^β χ(|x|)` with χ a log-radius plateau cutoff.
pub fn make_power_bump(domain: AnnularDomain, beta: f64, cut_fraction: f64) -> Result<TestFunction> {
    domain.validate()?;
    if !(cut_fraction > 0.0 && cut_fraction < 0.5) {
        return Err(Error::domain(format!("cut_fraction must lie in (0, 1/2), got {cut_fraction}")));
    }
    if !beta.is_finite() {
        return Err(Error::domain("beta must be finite"));
    }
    Ok(TestFunction {
        family: "power_bump".into(),
        support: domain,
        amplitude: 1.0,
        factors: vec![
            RadialFactor::Power { beta },
            RadialFactor::LogPlateau {
                rho_in: domain.rho_in,
                rho_out: domain.rho_out,
                cut_fraction,
            },
        ],
        mode: 0,
        params: BTreeMap::from([("beta".to_string(), beta), ("cut_fraction".to_string(), cut_fraction)]),
        smooth: true,
    })
}

/// Multiplies `base` by `Re[(x_1 + i x_2)^m]/|x|^m`.
pub fn make_angular(base: &TestFunction, mode: u32) -> Result<TestFunction> {
    if base.support.n < 2 {
        return Err(Error::domain("angular modulation needs n ≥ 2"));
    }
    if base.mode != 0 {
        return Err(Error::domain("base function is already modulated"));
    }
    let mut out = base.clone();
    out.mode = mode;
    out.params.insert("mode".into(), mode as f64);
    Ok(out)
}

/// Equal to 1 on the closed annulus. Not compactly supported: a quadrature calibration field.
pub fn make_indicator(domain: AnnularDomain) -> Result<TestFunction> {
    domain.validate()?;
    Ok(TestFunction {
        family: "indicator".into(),
        support: domain,
        amplitude: 1.0,
        factors: vec![RadialFactor::Indicator {
            rho_in: domain.rho_in,
            rho_out: domain.rho_out,
        }],
        mode: 0,
        params: BTreeMap::new(),
        smooth: false,
    })
}

/// The zero function on `domain`.
pub fn make_zero(domain: AnnularDomain) -> Result<TestFunction> {
    let mut u = make_radial_bump(domain, 1.0)?;
    u.family = "zero".into();
    u.amplitude = 0.0;
    u.params.clear();
    Ok(u)
}

/// Registered family names accepted by [`build_family`].
pub const FAMILIES: [&str; 3] = ["radial_bump", "power_bump", "zero"];

/// Builds a family member from its name, domain and parameter map.
///
/// Recognized keys: `sharpness` (radial bump), `beta` and `cut_fraction`
/// (power bump), `mode` (angular modulation, any family) and `amplitude`.
pub fn build_family(name: &str, domain: AnnularDomain, params: &BTreeMap<String, f64>) -> Result<TestFunction> {
    let get = |k: &str, default: f64| params.get(k).copied().unwrap_or(default);
    let allowed: &[&str] = match name {
        "radial_bump" => &["sharpness", "mode", "amplitude"],
        "power_bump" => &["beta", "cut_fraction", "mode", "amplitude"],
        "zero" => &["mode"],
        other => {
            return Err(Error::domain(format!(
                "unknown family `{other}` (known: {})",
                FAMILIES.join(", ")
            )))
        }
    };
    if let Some(bad) = params.keys().find(|k| !allowed.contains(&k.as_str())) {
        return Err(Error::domain(format!("family `{name}` has no parameter `{bad}`")));
    }
    let base = match name {
        "radial_bump" => make_radial_bump(domain, get("sharpness", 1.0))?,
        "power_bump" => make_power_bump(domain, get("beta", -0.5), get("cut_fraction", 0.2))?,
        _ => make_zero(domain)?,
    };
    let mode = get("mode", 0.0);
    if mode < 0.0 || mode.fract() != 0.0 {
        return Err(Error::domain(format!("mode must be a nonnegative integer, got {mode}")));
    }
    let mut u = if mode > 0.0 { make_angular(&base, mode as u32)? } else { base };
    if let Some(c) = params.get("amplitude") {
        u.amplitude *= c;
        u.params.insert("amplitude".into(), *c);
    }
    Ok(u)
}

/// Largest discrepancy between the analytic gradient and fourth-order central
/// differences, relative to the largest analytic gradient length over the probes.
///
/// A common scale keeps points where the gradient vanishes (peaks, support edges)
/// from turning rounding noise into large relative errors.
pub fn gradient_check(f: &TestFunction, probes: &[Vec<f64>], h: f64) -> Result<f64> {
    if !(h > 0.0) {
        return Err(Error::domain("finite-difference step must be positive"));
    }
    const FLOOR: f64 = 1e-300;
    let mut scale: f64 = 0.0;
    let mut worst: f64 = 0.0;
    let mut xp = Vec::new();
    for x in probes {
        if x.len() != f.support.n || !f.support.contains(x) {
            return Err(Error::domain(format!("probe {x:?} not in the open annulus")));
        }
        let g = f.gradient(x);
        scale = scale.max(norm(&g));
        for i in 0..x.len() {
            xp.clear();
            xp.extend_from_slice(x);
            let mut at = |dx: f64| {
                xp[i] = x[i] + dx;
                f.evaluate(&xp)
            };
            let fd = (8.0 * (at(h) - at(-h)) - (at(2.0 * h) - at(-2.0 * h))) / (12.0 * h);
            worst = worst.max((fd - g[i]).abs());
        }
    }
    Ok(if worst == 0.0 { 0.0 } else { worst / scale.max(FLOOR) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn dom(n: usize, a: f64, b: f64) -> AnnularDomain {
        AnnularDomain::new(n, a, b).unwrap()
    }

    pub(crate) fn interior_probes(d: &AnnularDomain, count: usize, seed: u64) -> Vec<Vec<f64>> {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        (0..count)
            .map(|_| {
                let mut x: Vec<f64> = (0..d.n).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let nx = norm(&x);
                let r = rng.gen_range(d.rho_in + 1e-3 * d.width()..d.rho_out - 1e-3 * d.width());
                x.iter_mut().for_each(|v| *v *= r / nx);
                x
            })
            .collect()
    }

    #[test]
    fn domain_validation() {
        assert!(AnnularDomain::new(2, 0.0, 1.0).is_err());
        assert!(AnnularDomain::new(2, 2.0, 1.0).is_err());
        assert!(AnnularDomain::new(1, 1.0, 2.0).is_err());
        let d = dom(3, 1.0, 2.0);
        assert_eq!(d.diameter(), 4.0);
        assert_eq!(d.dist_to_origin(), 1.0);
        assert!((d.volume() - 4.0 * PI / 3.0 * 7.0).abs() < 1e-12);
        assert!((dom(2, 1.0, 2.0).volume() - 3.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn sphere_areas() {
        assert!((sphere_area(3) - 4.0 * PI).abs() < 1e-14);
        assert!((sphere_area(4) - 2.0 * PI * PI).abs() < 1e-13);
    }

    #[test]
    fn bump_peak_and_boundary() {
        let d = dom(2, 1.0, 2.0);
        let u = make_radial_bump(d, 1.5).unwrap();
        assert!((u.evaluate(&[1.5, 0.0]) - (-1.5f64).exp()).abs() < 1e-15);
        assert_eq!(u.evaluate(&[1.0, 0.0]), 0.0);
        assert_eq!(u.evaluate(&[0.0, 2.0]), 0.0);
        assert_eq!(u.gradient(&[0.0, 2.0]), vec![0.0, 0.0]);
        assert!(make_radial_bump(d, 0.0).is_err());
    }

    #[test]
    fn power_bump_plateau() {
        let d = dom(3, 1.0, 4.0);
        let u = make_power_bump(d, 0.0, 0.2).unwrap();
        // the plateau in ln r is [0.2 ln 4, 0.8 ln 4]
        let r = 2.0;
        assert_eq!(u.evaluate(&[0.0, r, 0.0]), 1.0);
        assert_eq!(u.gradient(&[0.0, r, 0.0]), vec![0.0, 0.0, 0.0]);
        assert!(make_power_bump(d, 0.0, 0.5).is_err());
        assert!(make_power_bump(d, 0.0, 0.0).is_err());
    }

    #[test]
    fn power_bump_scaling_covariance() {
        let d = dom(2, 1.0, 10.0);
        let beta = -0.7;
        let u = make_power_bump(d, beta, 0.1).unwrap();
        // plateau in ln r: [0.1, 0.9]·ln 10 ≈ [1.26, 7.94]
        let x = [2.0, 0.5];
        for s in [1.1, 1.5, 1.8] {
            let sx = [s * x[0], s * x[1]];
            let lhs = u.evaluate(&sx);
            let rhs = s.powf(beta) * u.evaluate(&x);
            assert!((lhs - rhs).abs() < 1e-14 * rhs.abs());
        }
    }

    #[test]
    fn angular_identity_and_axis() {
        let d = dom(3, 1.0, 2.0);
        let base = make_radial_bump(d, 1.0).unwrap();
        let u0 = make_angular(&base, 0).unwrap();
        let x = [0.3, 1.1, -0.5];
        assert_eq!(u0.evaluate(&x), base.evaluate(&x));
        let u1 = make_angular(&base, 1).unwrap();
        let x = [1.4, 0.0, 0.0];
        assert_eq!(u1.evaluate(&x), base.evaluate(&x));
    }

    #[test]
    fn gradients_match_finite_differences() {
        for n in [2usize, 3, 4] {
            let d = dom(n, 1.0, 2.5);
            let probes = interior_probes(&d, 100, 7 + n as u64);
            let bump = make_radial_bump(d, 1.0).unwrap();
            let power = make_power_bump(d, 2.0, 0.25).unwrap();
            let power_neg = make_power_bump(d, -0.5, 0.3).unwrap();
            for f in [&bump, &power, &power_neg] {
                for m in [0, 1, 2, 3] {
                    let g = make_angular(f, m).unwrap();
                    let err = gradient_check(&g, &probes, 1e-5).unwrap();
                    assert!(err <= 1e-6, "n={n} family={} m={m} err={err}", f.family);
                }
            }
        }
    }

    #[test]
    fn gradient_check_zero_and_bad_probe() {
        let d = dom(2, 1.0, 2.0);
        let z = make_zero(d).unwrap();
        assert_eq!(gradient_check(&z, &interior_probes(&d, 10, 1), 1e-5).unwrap(), 0.0);
        assert!(gradient_check(&z, &[vec![0.5, 0.0]], 1e-5).is_err());
    }

    #[test]
    fn compact_support_on_boundary_spheres() {
        let d = dom(3, 0.5, 1.7);
        let fams = [
            make_radial_bump(d, 2.0).unwrap(),
            make_angular(&make_power_bump(d, -1.0, 0.1).unwrap(), 2).unwrap(),
        ];
        let probes = interior_probes(&d, 1000, 3);
        for u in &fams {
            for p in &probes {
                let r = norm(p);
                for rho in [d.rho_in, d.rho_out] {
                    let y: Vec<f64> = p.iter().map(|v| v * rho / r).collect();
                    assert_eq!(u.evaluate(&y), 0.0);
                    assert!(u.gradient(&y).iter().all(|g| *g == 0.0));
                }
            }
        }
    }

    #[test]
    fn registry() {
        let d = dom(2, 1.0, 2.0);
        let p = BTreeMap::from([("sharpness".to_string(), 2.0), ("mode".to_string(), 1.0)]);
        let u = build_family("radial_bump", d, &p).unwrap();
        assert_eq!(u.mode, 1);
        let bad = BTreeMap::from([("beta".to_string(), 2.0)]);
        assert!(build_family("radial_bump", d, &bad).is_err());
        assert!(build_family("gaussian", d, &BTreeMap::new()).is_err());
    }

    #[test]
    fn smooth_step_is_monotone_and_symmetric() {
        let mut prev = 0.0;
        for i in 0..=100 {
            let t = i as f64 / 100.0;
            let (v, dv) = smooth_step(t);
            assert!(v >= prev && dv >= 0.0);
            assert!((v + smooth_step(1.0 - t).0 - 1.0).abs() < 1e-14);
            prev = v;
        }
    }
}
