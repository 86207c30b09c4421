//! Weighted norms on the unified scale: Lebesgue norms by quadrature, sup
//! norms and Hölder seminorms by sampling with local refinement.

use std::f64::consts::PI;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::function::{norm, sphere_area, AnnularDomain, ScalarField, TestFunction};
use crate::optimize::golden_max;
use crate::params::{classify_regime, holder_index, ReciprocalExponent, Regime, SpaceSpec};
use crate::quadrature::{ProductRule, Ray, SphereRule, RADIAL_ORDER};

/// Resolution and tolerance controls shared by quadrature and sampling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuadratureSpec {
    /// Radial Gauss–Legendre nodes at the coarsest level (panels × order 8).
    pub radial_nodes: usize,
    /// Sphere directions at the coarsest level.
    pub sphere_points: usize,
    /// Number of doublings tried before giving up.
    pub refinement_levels: usize,
    pub target_rel_err: f64,
    /// Largest sample count swept pairwise by the Hölder seminorm.
    pub pair_budget: usize,
    /// Seed for the subsampling used beyond `pair_budget`.
    pub seed: u64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            radial_nodes: 64,
            sphere_points: 64,
            refinement_levels: 5,
            target_rel_err: 1e-8,
            pair_budget: 4096,
            seed: 0,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self, n: usize) -> Result<()> {
        if self.radial_nodes < 8 {
            return Err(Error::domain(format!("radial_nodes = {} below 8", self.radial_nodes)));
        }
        if self.sphere_points < 2 * n {
            return Err(Error::domain(format!("sphere_points = {} below 2n = {}", self.sphere_points, 2 * n)));
        }
        if !(self.target_rel_err > 0.0) {
            return Err(Error::domain("target_rel_err must be positive"));
        }
        if self.pair_budget < 2 {
            return Err(Error::domain("pair_budget must be at least 2"));
        }
        Ok(())
    }

    /// Same spec with radial nodes, sphere points and pair budget doubled.
    pub fn doubled(&self) -> Self {
        Self {
            radial_nodes: 2 * self.radial_nodes,
            sphere_points: 2 * self.sphere_points,
            pair_budget: 2 * self.pair_budget,
            ..*self
        }
    }

    fn radial_panels(&self) -> usize {
        self.radial_nodes.div_ceil(RADIAL_ORDER)
    }

    /// Polar node count `k` so that a product rule has about `sphere_points` directions.
    fn angular(&self, n: usize) -> usize {
        let k = (self.sphere_points as f64 / 2.0).powf(1.0 / (n as f64 - 1.0)).ceil() as usize;
        k.max(2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormResult {
    pub value: f64,
    pub err_estimate: f64,
    pub regime: Regime,
    /// Set for sampled quantities, which can only under-estimate a supremum.
    pub is_lower_bound: bool,
}

impl NormResult {
    pub fn rel_err(&self) -> f64 {
        if self.value > 0.0 {
            self.err_estimate / self.value
        } else {
            0.0
        }
    }
}

/// `|x|^{−a}·f(x)`, keeping the structural hints of `f`.
pub struct Weighted<'a, F: ?Sized> {
    pub inner: &'a F,
    pub a: f64,
}

impl<F: ScalarField + ?Sized> ScalarField for Weighted<'_, F> {
    fn value(&self, x: &[f64]) -> f64 {
        let v = self.inner.value(x);
        if self.a == 0.0 || v == 0.0 {
            v
        } else {
            norm(x).powf(-self.a) * v
        }
    }

    fn value_and_hint(&self, x: &[f64]) -> (f64, f64) {
        let (v, h) = self.inner.value_and_hint(x);
        if self.a == 0.0 || v == 0.0 {
            (v, h)
        } else {
            (norm(x).powf(-self.a) * v, h)
        }
    }

    fn is_radial(&self) -> bool {
        self.inner.is_radial()
    }

    fn is_separable(&self) -> bool {
        self.inner.is_separable()
    }

    fn radial_breaks(&self) -> Vec<f64> {
        self.inner.radial_breaks()
    }

    fn angular_factor(&self, omega: &[f64]) -> f64 {
        self.inner.angular_factor(omega)
    }

    fn angular_mode(&self) -> u32 {
        self.inner.angular_mode()
    }
}

/// `|∇u(x)|`.
pub struct GradientMagnitude<'a>(pub &'a TestFunction);

impl ScalarField for GradientMagnitude<'_> {
    fn value(&self, x: &[f64]) -> f64 {
        with_gradient(self.0, x, |g| g.iter().map(|v| v * v).sum::<f64>().sqrt())
    }

    /// For radial `u` the signed radial derivative, whose zeros are the kinks of `|∇u|`.
    fn value_and_hint(&self, x: &[f64]) -> (f64, f64) {
        with_gradient(self.0, x, |g| {
            let v = g.iter().map(|v| v * v).sum::<f64>().sqrt();
            if self.0.mode == 0 {
                (v, g.iter().zip(x).map(|(g, x)| g * x).sum::<f64>())
            } else {
                (v, v)
            }
        })
    }

    fn is_radial(&self) -> bool {
        self.0.mode == 0
    }

    fn radial_breaks(&self) -> Vec<f64> {
        self.0.radial_breaks()
    }

    fn angular_mode(&self) -> u32 {
        self.0.mode
    }
}

/// `∂_i u(x)`.
pub struct GradientComponent<'a>(pub &'a TestFunction, pub usize);

impl ScalarField for GradientComponent<'_> {
    fn value(&self, x: &[f64]) -> f64 {
        with_gradient(self.0, x, |g| g[self.1])
    }
}

fn with_gradient<T>(u: &TestFunction, x: &[f64], f: impl FnOnce(&[f64]) -> T) -> T {
    let mut buf = [0.0; 16];
    if x.len() <= buf.len() {
        let g = &mut buf[..x.len()];
        u.gradient_into(x, g);
        f(g)
    } else {
        f(&u.gradient(x))
    }
}

/// Radial profile `r ↦ f(r e_1)` of a separable field.
struct RadialProfile<'a, F: ?Sized>(&'a F);

impl<F: ScalarField + ?Sized> RadialProfile<'_, F> {
    fn on_axis(x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; x.len()];
        y[0] = norm(x);
        y
    }
}

impl<F: ScalarField + ?Sized> ScalarField for RadialProfile<'_, F> {
    fn value(&self, x: &[f64]) -> f64 {
        self.0.value(&Self::on_axis(x))
    }

    fn value_and_hint(&self, x: &[f64]) -> (f64, f64) {
        self.0.value_and_hint(&Self::on_axis(x))
    }

    fn radial_breaks(&self) -> Vec<f64> {
        self.0.radial_breaks()
    }

    fn is_radial(&self) -> bool {
        true
    }
}

/// Rays of the radial profile and angular factors at the sphere nodes, for a separable non-radial field.
fn separable_parts<F: ScalarField + ?Sized>(
    f: &F,
    dom: &AnnularDomain,
    q: &QuadratureSpec,
    rl: usize,
    al: usize,
) -> (ProductRule, Vec<Ray>, SphereRule, Vec<f64>) {
    let profile = RadialProfile(f);
    let rule = ProductRule::new(dom, q.radial_panels() << rl, 0, &profile);
    let rays = rule.rays(&profile);
    let sphere = SphereRule::product(dom.n, q.angular(dom.n) << al, f.angular_mode());
    let ang = (0..sphere.len()).map(|i| f.angular_factor(sphere.dir(i))).collect();
    (rule, rays, sphere, ang)
}

fn lp_level<F: ScalarField + ?Sized>(f: &F, p: f64, dom: &AnnularDomain, q: &QuadratureSpec, rl: usize, al: usize) -> f64 {
    if f.is_separable() && !f.is_radial() {
        let (rule, rays, sphere, ang) = separable_parts(f, dom, q, rl, al);
        let mr = rays.iter().flat_map(|r| &r.values).fold(0.0f64, |m, v| m.max(v.abs()));
        let ma = ang.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if mr == 0.0 || ma == 0.0 || !(mr * ma).is_finite() {
            return mr * ma;
        }
        // the radial rule carries the full sphere measure; the sphere sum supplies the average
        let sr = rule.weighted_sum(&rays, |v| (v.abs() / mr).powf(p));
        let sa: f64 = sphere.weights.iter().zip(&ang).map(|(w, v)| w * (v.abs() / ma).powf(p)).sum::<f64>() / sphere_area(dom.n);
        return mr * ma * (sr * sa).powf(1.0 / p);
    }
    let rule = ProductRule::new(dom, q.radial_panels() << rl, q.angular(dom.n) << al, f);
    let rays = rule.rays(f);
    let m = rays.iter().flat_map(|r| &r.values).fold(0.0f64, |m, v| m.max(v.abs()));
    if m == 0.0 || !m.is_finite() {
        return m;
    }
    // factor out the max so large p neither overflows nor underflows
    let sum = rule.weighted_sum(&rays, |v| (v.abs() / m).powf(p));
    m * sum.powf(1.0 / p)
}

/// Outcome of a two-axis refinement: value, error estimate, and whether both axes settled.
struct Refined {
    value: f64,
    err: f64,
    settled: bool,
    last_rel: f64,
}

/// Doubles the angular resolution at the coarsest radial level until it settles,
/// then doubles the radial resolution at that angular level. `eval` returns the
/// value and the scale the change is measured against. The error estimate is the
/// sum of the last changes along both axes, which keeps the cost additive in the
/// two resolutions instead of multiplicative.
fn refine_axes(q: &QuadratureSpec, mut eval: impl FnMut(usize, usize) -> (f64, f64)) -> Refined {
    let levels = q.refinement_levels.max(1);
    let axis = |eval: &mut dyn FnMut(usize) -> (f64, f64)| {
        let (mut prev, _) = eval(0);
        let mut diff = f64::INFINITY;
        let mut rel = f64::INFINITY;
        for level in 1..=levels {
            let (cur, scale) = eval(level);
            diff = (cur - prev).abs();
            if !cur.is_finite() {
                return (level, cur, f64::INFINITY, false, f64::INFINITY);
            }
            rel = if scale > 0.0 { diff / scale } else { 0.0 };
            if diff <= q.target_rel_err * scale || (cur == 0.0 && prev == 0.0) {
                return (level, cur, diff, true, rel);
            }
            prev = cur;
        }
        (levels, prev, diff, false, rel)
    };
    let (al, _, d_ang, ok_ang, rel_ang) = axis(&mut |l| eval(0, l));
    if !ok_ang {
        let (v, _) = eval(0, al);
        return Refined { value: v, err: d_ang, settled: false, last_rel: rel_ang };
    }
    let (_, value, d_rad, ok_rad, rel_rad) = axis(&mut |l| eval(l, al));
    Refined { value, err: d_ang + d_rad, settled: ok_rad, last_rel: rel_rad }
}

/// Refines until consecutive levels agree to `target_rel_err` along both axes.
fn refine(
    q: &QuadratureSpec,
    regime: Regime,
    mut eval: impl FnMut(usize, usize) -> f64,
) -> Result<NormResult> {
    let r = refine_axes(q, |rl, al| {
        let v = eval(rl, al);
        (v, v.abs())
    });
    if !r.value.is_finite() {
        return Err(Error::Accuracy {
            message: "non-finite quadrature value".into(),
            best: NormResult { value: r.value, err_estimate: f64::INFINITY, regime, is_lower_bound: false },
        });
    }
    if r.settled {
        return Ok(NormResult {
            value: r.value,
            err_estimate: r.err.max(100.0 * f64::EPSILON * r.value.abs()),
            regime,
            is_lower_bound: false,
        });
    }
    Err(Error::Accuracy {
        message: format!(
            "relative change {:.3e} above target {:.1e} after {} refinements",
            r.last_rel, q.target_rel_err, q.refinement_levels
        ),
        best: NormResult { value: r.value, err_estimate: r.err, regime, is_lower_bound: false },
    })
}

/// `(∫ |x|^{−ap} |f|^p dx)^{1/p}` with `p = 1/s`, `s ∈ (0, 1]`.
pub fn lebesgue_norm<F: ScalarField + ?Sized>(
    f: &F,
    a: f64,
    s: ReciprocalExponent,
    dom: &AnnularDomain,
    q: &QuadratureSpec,
) -> Result<NormResult> {
    dom.validate()?;
    q.validate(dom.n)?;
    let sv = s.value();
    if !(sv > 0.0 && sv <= 1.0) {
        return Err(Error::domain(format!("lebesgue_norm needs 1/p ∈ (0, 1], got {s}")));
    }
    let p = 1.0 / sv;
    let w = Weighted { inner: f, a };
    refine(q, Regime::Lebesgue, |rl, al| lp_level(&w, p, dom, q, rl, al))
}

/// Signed integral `∫ f dx` with its refinement error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Integral {
    pub value: f64,
    pub err_estimate: f64,
}

/// `∫_dom f dx`, refined until consecutive levels agree to `target_rel_err · ∫|f|`.
pub fn integrate<F: ScalarField + ?Sized>(f: &F, dom: &AnnularDomain, q: &QuadratureSpec) -> Result<Integral> {
    dom.validate()?;
    q.validate(dom.n)?;
    let r = refine_axes(q, |rl, al| {
        if f.is_separable() && !f.is_radial() {
            let (rule, rays, sphere, ang) = separable_parts(f, dom, q, rl, al);
            let area = sphere_area(dom.n);
            let avg = |g: fn(f64) -> f64| sphere.weights.iter().zip(&ang).map(|(w, v)| w * g(*v)).sum::<f64>() / area;
            return (rule.weighted_sum(&rays, |v| v) * avg(|v| v), rule.weighted_sum(&rays, f64::abs) * avg(f64::abs));
        }
        let rule = ProductRule::new(dom, q.radial_panels() << rl, q.angular(dom.n) << al, f);
        let rays = rule.rays(f);
        (rule.weighted_sum(&rays, |v| v), rule.weighted_sum(&rays, f64::abs))
    });
    if r.settled {
        return Ok(Integral { value: r.value, err_estimate: r.err.max(100.0 * f64::EPSILON * r.value.abs()) });
    }
    Err(Error::Accuracy {
        message: format!("integral did not settle (last relative change {:.3e})", r.last_rel),
        best: NormResult { value: r.value.abs(), err_estimate: r.err, regime: Regime::Lebesgue, is_lower_bound: false },
    })
}

/// Point of the annulus given by `ln r` and spherical angles `[ψ_1, …, ψ_{n−2}, φ]`.
fn embed(ln_r: f64, angles: &[f64], out: &mut [f64]) {
    let n = out.len();
    let r = ln_r.exp();
    let mut s = r;
    for j in 0..n - 2 {
        let (sn, cs) = angles[j].sin_cos();
        out[n - 1 - j] = s * cs;
        s *= sn;
    }
    let (sn, cs) = angles[n - 2].sin_cos();
    out[0] = s * cs;
    out[1] = s * sn;
}

/// Nested sample set in `(ln r, angles)`, uniform in each coordinate and including both radii.
struct SampleGrid {
    n: usize,
    /// `n` parameters per point: `ln r` then `n − 1` angles.
    params: Vec<f64>,
    ln_bounds: (f64, f64),
    /// Grid spacing per parameter, used as the refinement bracket.
    steps: Vec<f64>,
}

impl SampleGrid {
    fn new(dom: &AnnularDomain, q: &QuadratureSpec, radial: bool, level: usize) -> Self {
        let n = dom.n;
        let nr = (q.radial_nodes / 4).max(8) << level;
        let k = q.angular(n) << level;
        let (l0, l1) = (dom.rho_in.ln(), dom.rho_out.ln());
        let dl = (l1 - l0) / nr as f64;
        let dpsi = PI / k as f64;
        let mut dirs: Vec<Vec<f64>> = Vec::new();
        if radial {
            dirs.push(vec![0.0; n - 1]);
        } else {
            // polar indices 0..=k, azimuth 0..2k; skip repeats at the poles
            let mut idx = vec![0usize; n - 1];
            loop {
                let pole = idx[..n - 2].iter().position(|&i| i == 0 || i == k);
                let redundant = pole.is_some_and(|p| idx[p + 1..].iter().any(|&i| i != 0));
                if !redundant {
                    dirs.push(idx.iter().map(|&i| i as f64 * dpsi).collect());
                }
                let mut j = 0;
                while j < n - 1 {
                    idx[j] += 1;
                    let lim = if j < n - 2 { k + 1 } else { 2 * k };
                    if idx[j] < lim {
                        break;
                    }
                    idx[j] = 0;
                    j += 1;
                }
                if j == n - 1 {
                    break;
                }
            }
        }
        let mut params = Vec::with_capacity((nr + 1) * dirs.len() * n);
        for i in 0..=nr {
            let lr = if i == nr { l1 } else { l0 + i as f64 * dl };
            for d in &dirs {
                params.push(lr);
                params.extend_from_slice(d);
            }
        }
        let mut steps = vec![dpsi; n];
        steps[0] = dl;
        Self { n, params, ln_bounds: (l0, l1), steps }
    }

    fn len(&self) -> usize {
        self.params.len() / self.n
    }

    fn param(&self, i: usize) -> &[f64] {
        &self.params[i * self.n..(i + 1) * self.n]
    }

    fn values<F: ScalarField + ?Sized>(&self, f: &F) -> (Vec<f64>, Vec<f64>) {
        let n = self.n;
        let pts: Vec<f64> = self
            .params
            .par_chunks(n)
            .flat_map_iter(|p| {
                let mut x = vec![0.0; n];
                embed(p[0], &p[1..], &mut x);
                x
            })
            .collect();
        let vals = pts.par_chunks(n).map(|x| f.value(x)).collect();
        (pts, vals)
    }
}

fn eval_param<F: ScalarField + ?Sized>(f: &F, p: &[f64], bounds: (f64, f64), x: &mut [f64]) -> f64 {
    let lr = p[0].clamp(bounds.0, bounds.1);
    embed(lr, &p[1..], x);
    f.value(x)
}

/// Index of the largest `|v|`, lowest index on ties.
fn argmax_abs(vals: &[f64]) -> (usize, f64) {
    let mut best = (0, f64::NEG_INFINITY);
    for (i, v) in vals.iter().enumerate() {
        if v.abs() > best.1 {
            best = (i, v.abs());
        }
    }
    best
}

fn sup_level<F: ScalarField + ?Sized>(f: &F, dom: &AnnularDomain, q: &QuadratureSpec, level: usize) -> f64 {
    let grid = SampleGrid::new(dom, q, f.is_radial(), level);
    let (_, vals) = grid.values(f);
    let (i, v0) = argmax_abs(&vals);
    let mut p = grid.param(i).to_vec();
    let mut x = vec![0.0; grid.n];
    let mut best = v0;
    let coords = if f.is_radial() { 1 } else { grid.n };
    // coordinate-wise golden section inside one grid cell around the argmax
    for _ in 0..3 {
        for c in 0..coords {
            let h = grid.steps[c];
            let (mut lo, mut hi) = (p[c] - h, p[c] + h);
            if c == 0 {
                lo = lo.max(grid.ln_bounds.0);
                hi = hi.min(grid.ln_bounds.1);
            }
            let mut trial = p.clone();
            let (t, v) = golden_max(
                |t| {
                    trial[c] = t;
                    eval_param(f, &trial, grid.ln_bounds, &mut x).abs()
                },
                lo,
                hi,
                1e-12 * (hi - lo).max(1e-300),
            );
            if v > best {
                best = v;
                p[c] = t;
            }
        }
    }
    best
}

/// Sampled `sup |x|^{−a}|f(x)|` refined locally around the grid maximum.
pub fn sup_norm<F: ScalarField + ?Sized>(f: &F, a: f64, dom: &AnnularDomain, q: &QuadratureSpec) -> Result<NormResult> {
    dom.validate()?;
    q.validate(dom.n)?;
    let w = Weighted { inner: f, a };
    let v0 = sup_level(&w, dom, q, 0);
    let v1 = sup_level(&w, dom, q, 1);
    Ok(NormResult { value: v0.max(v1), err_estimate: (v1 - v0).abs(), regime: Regime::Infinity, is_lower_bound: true })
}

#[derive(Clone, Copy)]
struct Pair {
    quotient: f64,
    i: usize,
    j: usize,
}

fn quotient(u: f64, v: f64, d2: f64, alpha: f64) -> f64 {
    if d2 <= 0.0 {
        return 0.0;
    }
    (u - v).abs() / d2.powf(0.5 * alpha)
}

fn seminorm_level<F: ScalarField + ?Sized>(
    f: &F,
    alpha: f64,
    dom: &AnnularDomain,
    q: &QuadratureSpec,
    level: usize,
) -> f64 {
    let grid = SampleGrid::new(dom, q, f.is_radial(), level);
    let n = grid.n;
    let (pts, vals) = grid.values(f);
    let mut idx: Vec<usize> = (0..grid.len()).collect();
    if idx.len() > q.pair_budget {
        let mut rng = ChaCha8Rng::seed_from_u64(q.seed ^ (level as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
        idx = sample(&mut rng, grid.len(), q.pair_budget).into_vec();
        idx.sort_unstable();
    }
    let m = idx.len();
    // best partner per row, then the global top three
    let mut rows: Vec<Pair> = (0..m)
        .into_par_iter()
        .map(|a| {
            let i = idx[a];
            let xi = &pts[i * n..(i + 1) * n];
            let mut best = Pair { quotient: 0.0, i, j: i };
            for &j in &idx[a + 1..] {
                let xj = &pts[j * n..(j + 1) * n];
                let d2: f64 = xi.iter().zip(xj).map(|(a, b)| (a - b) * (a - b)).sum();
                let qv = quotient(vals[i], vals[j], d2, alpha);
                if qv > best.quotient {
                    best = Pair { quotient: qv, i, j };
                }
            }
            best
        })
        .collect();
    rows.sort_by(|a, b| b.quotient.total_cmp(&a.quotient).then(a.i.cmp(&b.i)));
    let mut best = rows.first().map_or(0.0, |p| p.quotient);
    for pair in rows.iter().take(3).filter(|p| p.quotient > 0.0) {
        let mut theta = grid.param(pair.i).to_vec();
        theta.extend_from_slice(grid.param(pair.j));
        let v = pattern_search(f, alpha, &grid, theta);
        best = best.max(v);
    }
    best
}

/// Compass search on both endpoints of a pair, step halving on failure.
fn pattern_search<F: ScalarField + ?Sized>(f: &F, alpha: f64, grid: &SampleGrid, mut theta: Vec<f64>) -> f64 {
    let n = grid.n;
    let radial = f.is_radial();
    let mut x = vec![0.0; n];
    let mut y = vec![0.0; n];
    let mut eval = |th: &[f64]| {
        let u = eval_param(f, &th[..n], grid.ln_bounds, &mut x);
        let v = eval_param(f, &th[n..], grid.ln_bounds, &mut y);
        let d2: f64 = x.iter().zip(&y).map(|(a, b)| (a - b) * (a - b)).sum();
        quotient(u, v, d2, alpha)
    };
    // keep ln r inside the annulus
    for k in [0, n] {
        theta[k] = theta[k].clamp(grid.ln_bounds.0, grid.ln_bounds.1);
    }
    let mut best = eval(&theta);
    let mut steps: Vec<f64> = (0..2 * n).map(|k| grid.steps[k % n]).collect();
    let free: Vec<usize> = (0..2 * n).filter(|&k| !radial || k % n == 0).collect();
    let floor = 1e-9;
    let mut evals = 0;
    while evals < 4000 && steps.iter().any(|s| *s > floor) {
        let mut improved = false;
        for &k in &free {
            for sign in [1.0, -1.0] {
                let old = theta[k];
                let mut t = old + sign * steps[k];
                if k % n == 0 {
                    t = t.clamp(grid.ln_bounds.0, grid.ln_bounds.1);
                }
                theta[k] = t;
                let v = eval(&theta);
                evals += 1;
                if v > best {
                    best = v;
                    improved = true;
                    break;
                }
                theta[k] = old;
            }
        }
        if !improved {
            steps.iter_mut().for_each(|s| *s *= 0.5);
        }
    }
    best
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::domain(format!("Hölder exponent must lie in (0, 1], got {alpha}")));
    }
    Ok(())
}

/// Sampled `sup_{x≠y} | |x|^{−b}f(x) − |y|^{−b}f(y) | / |x − y|^α`.
pub fn holder_seminorm<F: ScalarField + ?Sized>(
    f: &F,
    b: f64,
    alpha: f64,
    dom: &AnnularDomain,
    q: &QuadratureSpec,
) -> Result<NormResult> {
    check_alpha(alpha)?;
    dom.validate()?;
    q.validate(dom.n)?;
    let w = Weighted { inner: f, a: b };
    let v0 = seminorm_level(&w, alpha, dom, q, 0);
    let v1 = seminorm_level(&w, alpha, dom, q, 1);
    Ok(NormResult { value: v0.max(v1), err_estimate: (v1 - v0).abs(), regime: Regime::Holder, is_lower_bound: true })
}

/// Weighted sup plus weighted seminorm.
pub fn holder_norm<F: ScalarField + ?Sized>(
    f: &F,
    b: f64,
    alpha: f64,
    dom: &AnnularDomain,
    q: &QuadratureSpec,
) -> Result<NormResult> {
    check_alpha(alpha)?;
    let sup = sup_norm(f, b, dom, q)?;
    let semi = holder_seminorm(f, b, alpha, dom, q)?;
    Ok(NormResult {
        value: sup.value + semi.value,
        err_estimate: sup.err_estimate + semi.err_estimate,
        regime: Regime::Holder,
        is_lower_bound: true,
    })
}

/// Hölder exponent of a zero-order space with `1/p ∈ (−1/n, 0)`.
pub fn zero_order_alpha(s: ReciprocalExponent, n: usize) -> Result<f64> {
    let idx = holder_index(s, n)?;
    if idx.k1 != 0 {
        return Err(Error::domain(format!("1/p = {s} needs derivatives of order {}", idx.k1)));
    }
    Ok(idx.alpha)
}

fn check_range(s: ReciprocalExponent, n: usize) -> Result<()> {
    let v = s.value();
    if !(v > -1.0 / n as f64 && v <= 1.0) {
        return Err(Error::domain(format!("1/p = {s} outside (−1/n, 1] for n = {n}")));
    }
    Ok(())
}

/// `‖|x|^{−a} f‖_{X^p}` dispatched on the regime of `1/p`.
pub fn x_norm<F: ScalarField + ?Sized>(
    f: &F,
    spec: &SpaceSpec,
    dom: &AnnularDomain,
    q: &QuadratureSpec,
) -> Result<NormResult> {
    if spec.k != 0 {
        return Err(Error::domain("x_norm evaluates zero-order spaces only"));
    }
    check_range(spec.s, dom.n)?;
    match classify_regime(spec.s) {
        Regime::Lebesgue => lebesgue_norm(f, spec.a, spec.s, dom, q),
        Regime::Infinity => sup_norm(f, spec.a, dom, q),
        Regime::Holder => holder_norm(f, spec.a, zero_order_alpha(spec.s, dom.n)?, dom, q),
    }
}

/// `‖|x|^{−a} ∇u‖_{X^p}`: Euclidean magnitude for `1/p ≥ 0`, sum of component norms for `1/p < 0`.
pub fn weighted_gradient_xnorm(
    u: &TestFunction,
    a: f64,
    s: ReciprocalExponent,
    dom: &AnnularDomain,
    q: &QuadratureSpec,
) -> Result<NormResult> {
    check_range(s, dom.n)?;
    match classify_regime(s) {
        Regime::Lebesgue => lebesgue_norm(&GradientMagnitude(u), a, s, dom, q),
        Regime::Infinity => sup_norm(&GradientMagnitude(u), a, dom, q),
        Regime::Holder => {
            let alpha = zero_order_alpha(s, dom.n)?;
            let mut total = NormResult { value: 0.0, err_estimate: 0.0, regime: Regime::Holder, is_lower_bound: true };
            for i in 0..dom.n {
                let r = holder_norm(&GradientComponent(u, i), a, alpha, dom, q)?;
                total.value += r.value;
                total.err_estimate += r.err_estimate;
            }
            Ok(total)
        }
    }
}
