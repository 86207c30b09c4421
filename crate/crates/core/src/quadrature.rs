//! Tensor-product quadrature on annuli: composite Gauss–Legendre in `ln r`
//! times a product rule on the unit sphere.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::function::{sphere_area, AnnularDomain, ScalarField};

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(order >= 1);
    let mut x = vec![0.0; order];
    let mut w = vec![0.0; order];
    let nf = order as f64;
    for i in 0..order.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(order, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(order, z);
        dp = if d != 0.0 { d } else { dp };
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[order - 1 - i] = z;
        w[i] = wi;
        w[order - 1 - i] = wi;
    }
    if order % 2 == 1 {
        x[order / 2] = 0.0;
    }
    (x, w)
}

/// Gauss–Gegenbauer rule for the weight `(1 − t²)^{λ − 1/2}` on `[-1, 1]`, `λ` a positive half-integer.
///
/// Weights are proportional to `1/((1 − t²) C_n'(t)²)` and scaled to the exact weight integral.
pub fn gauss_gegenbauer(order: usize, lambda: f64) -> (Vec<f64>, Vec<f64>) {
    assert!(lambda > 0.0 && (2.0 * lambda).fract() == 0.0, "half-integer λ expected");
    if lambda == 0.5 {
        return gauss_legendre(order);
    }
    let nf = order as f64;
    let mut x = vec![0.0; order];
    let mut w = vec![0.0; order];
    for i in 0..order.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        for _ in 0..100 {
            let (p, d) = gegenbauer(order, lambda, z);
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = gegenbauer(order, lambda, z);
        let wi = 1.0 / ((1.0 - z * z) * d * d);
        x[i] = -z;
        x[order - 1 - i] = z;
        w[i] = wi;
        w[order - 1 - i] = wi;
    }
    if order % 2 == 1 {
        x[order / 2] = 0.0;
    }
    // ∫(1 − t²)^{λ−1/2} dt = B(1/2, λ + 1/2): 2 at λ = 1/2, π/2 at λ = 1, then
    // B(1/2, λ + 3/2) = B(1/2, λ + 1/2)·(λ + 1/2)/(λ + 1)
    let (mut l, mut mass) = if (2.0 * lambda).round() as i64 % 2 == 1 { (0.5, 2.0) } else { (1.0, PI / 2.0) };
    while l + 0.5 < lambda {
        mass *= (l + 0.5) / (l + 1.0);
        l += 1.0;
    }
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|v| *v *= mass / total);
    (x, w)
}

/// `(C_n^λ(z), C_n^λ'(z))`.
fn gegenbauer(n: usize, lambda: f64, z: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, 2.0 * lambda * z);
    for k in 2..=n {
        let kf = k as f64;
        let p2 = (2.0 * z * (kf + lambda - 1.0) * p1 - (kf + 2.0 * lambda - 2.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    let d = (-nf * z * p1 + (nf + 2.0 * lambda - 1.0) * p0) / (1.0 - z * z);
    (p1, d)
}

/// `(P_n(z), P_n'(z))` by the three-term recurrence.
fn legendre(n: usize, z: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, z);
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// Composite Gauss–Legendre rule on `[a, b]` with `panels` equal panels.
pub fn composite_gl(a: f64, b: f64, panels: usize, order: usize) -> (Vec<f64>, Vec<f64>) {
    let (gx, gw) = gauss_legendre(order);
    let h = (b - a) / panels as f64;
    let mut xs = Vec::with_capacity(panels * order);
    let mut ws = Vec::with_capacity(panels * order);
    for k in 0..panels {
        let lo = a + k as f64 * h;
        for (x, w) in gx.iter().zip(&gw) {
            xs.push(lo + 0.5 * h * (x + 1.0));
            ws.push(0.5 * h * w);
        }
    }
    (xs, ws)
}

/// Composite Gauss–Legendre panels uniform in `ln r`; weights include the volume factor `r^n`.
#[derive(Debug, Clone)]
pub struct RadialRule {
    pub n: usize,
    /// Panel edges in `ln r`.
    pub edges: Vec<f64>,
    pub radii: Vec<f64>,
    pub weights: Vec<f64>,
    gl: (Vec<f64>, Vec<f64>),
}

pub const RADIAL_ORDER: usize = 8;

/// Panels added on each side of a non-analytic radius, halving in width.
const GRADING: i32 = 6;

/// Halving panels toward a located kink, where `|f|^p` has a fractional power.
const KINK_GRADING: i32 = 12;

/// Cut points of `[a, b]` graded geometrically toward the flagged ends.
fn graded_cuts(a: f64, b: f64, toward_a: bool, toward_b: bool) -> Vec<f64> {
    if toward_a && toward_b {
        let m = 0.5 * (a + b);
        let mut left = graded_cuts(a, m, true, false);
        left.pop();
        left.extend(graded_cuts(m, b, false, true));
        return left;
    }
    let h = b - a;
    let mut cuts = vec![a];
    if toward_a {
        cuts.extend((1..=KINK_GRADING).rev().map(|k| a + h * 0.5f64.powi(k)));
    }
    if toward_b {
        cuts.extend((1..=KINK_GRADING).map(|k| b - h * 0.5f64.powi(k)));
    }
    cuts.push(b);
    cuts
}

impl RadialRule {
    pub fn new(dom: &AnnularDomain, panels: usize) -> Self {
        Self::with_breaks(dom, panels, &[])
    }

    /// Uniform panels plus extra edges at the given radii inside the annulus.
    pub fn with_breaks(dom: &AnnularDomain, panels: usize, breaks: &[f64]) -> Self {
        let panels = panels.max(1);
        let (lo, hi) = (dom.rho_in.ln(), dom.rho_out.ln());
        let h = (hi - lo) / panels as f64;
        let mut edges: Vec<f64> = (0..=panels).map(|k| if k == panels { hi } else { lo + k as f64 * h }).collect();
        let gap = 1e-9 * (hi - lo);
        let add = |e: f64, edges: &mut Vec<f64>| {
            if e > lo + gap && e < hi - gap && edges.iter().all(|x| (x - e).abs() > gap) {
                edges.push(e);
            }
        };
        // geometric grading toward the ends and every break, where the field is not analytic
        let mut points = vec![lo, hi];
        points.extend(breaks.iter().filter(|b| **b > 0.0).map(|b| b.ln()));
        for p in points {
            add(p, &mut edges);
            for k in 1..=GRADING {
                let d = h * 0.5f64.powi(k);
                add(p - d, &mut edges);
                add(p + d, &mut edges);
            }
        }
        edges.sort_by(f64::total_cmp);
        let panels = edges.len() - 1;
        let gl = gauss_legendre(RADIAL_ORDER);
        let mut rule = Self { n: dom.n, edges, radii: Vec::new(), weights: Vec::new(), gl };
        let (mut radii, mut weights) = (Vec::new(), Vec::new());
        for k in 0..panels {
            rule.panel_nodes(rule.edges[k], rule.edges[k + 1], |r, w| {
                radii.push(r);
                weights.push(w);
            });
        }
        rule.radii = radii;
        rule.weights = weights;
        rule
    }

    /// Nodes `(r, w·r^n)` of one Gauss–Legendre panel on `[a, b]` in `ln r`.
    fn panel_nodes(&self, a: f64, b: f64, mut emit: impl FnMut(f64, f64)) {
        let h = b - a;
        for (x, w) in self.gl.0.iter().zip(&self.gl.1) {
            let r = (a + 0.5 * h * (x + 1.0)).exp();
            emit(r, 0.5 * h * w * r.powi(self.n as i32));
        }
    }
}

/// Field samples along one ray, with the radial weights they carry.
#[derive(Debug, Clone, Default)]
pub struct Ray {
    pub values: Vec<f64>,
    pub weights: Vec<f64>,
}

/// Root of `g` in `[a, b]` given opposite signs at the ends.
fn bisect(mut g: impl FnMut(f64) -> f64, mut a: f64, mut b: f64, ga: f64) -> f64 {
    let pos = ga > 0.0;
    for _ in 0..100 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        if (g(m) > 0.0) == pos {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Unit directions (row-major, `n` coordinates each) and their weights, summing to `|S^{n−1}|`.
#[derive(Debug, Clone)]
pub struct SphereRule {
    pub n: usize,
    pub dirs: Vec<f64>,
    pub weights: Vec<f64>,
}

impl SphereRule {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn dir(&self, i: usize) -> &[f64] {
        &self.dirs[i * self.n..(i + 1) * self.n]
    }

    /// Single direction carrying the whole sphere measure, exact for radial integrands.
    pub fn radial(n: usize) -> Self {
        let mut dirs = vec![0.0; n];
        dirs[0] = 1.0;
        Self { n, dirs, weights: vec![sphere_area(n)] }
    }

    /// Product rule with `k` Gauss–Legendre nodes per polar angle and about `2k` azimuth nodes.
    ///
    /// With `mode > 0` the azimuth is split into `2·mode` panels bounded by the
    /// zeros of `cos(mode·φ)`, so `|cos(mode·φ)|^p` is smooth inside each panel.
    pub fn product(n: usize, k: usize, mode: u32) -> Self {
        let k = k.max(2);
        let (phi, phi_w) = azimuth_rule(2 * k, mode);
        // polar angle ψ_j has density sin^{n−2−j}ψ dψ = (1 − t²)^{(n−3−j)/2} dt in t = cos ψ
        let polar_rules: Vec<(Vec<f64>, Vec<f64>)> = (0..n - 2)
            .map(|j| if mode == 0 { gauss_gegenbauer(k, 0.5 * (n - 2 - j) as f64) } else { clustered_polar(k, n - 2 - j) })
            .collect();
        let mut dirs = Vec::new();
        let mut weights = Vec::new();
        let polar = n - 2;
        let mut idx = vec![0usize; polar];
        let mut x = vec![0.0; n];
        loop {
            // walk the polar multi-index, accumulating sin products
            let mut w_pol = 1.0;
            let mut s = 1.0;
            for (j, &ij) in idx.iter().enumerate() {
                let t = polar_rules[j].0[ij];
                x[n - 1 - j] = s * t;
                w_pol *= polar_rules[j].1[ij];
                s *= (1.0 - t * t).sqrt();
            }
            for (f, fw) in phi.iter().zip(&phi_w) {
                let (sn, cs) = f.sin_cos();
                x[0] = s * cs;
                x[1] = s * sn;
                dirs.extend_from_slice(&x);
                weights.push(w_pol * fw);
            }
            // next multi-index
            let mut j = 0;
            while j < polar {
                idx[j] += 1;
                if idx[j] < k {
                    break;
                }
                idx[j] = 0;
                j += 1;
            }
            if j == polar {
                break;
            }
        }
        // renormalize to the exact sphere measure
        let total: f64 = weights.iter().sum();
        let scale = sphere_area(n) / total;
        weights.iter_mut().for_each(|w| *w *= scale);
        Self { n, dirs, weights }
    }
}

fn azimuth_rule(points: usize, mode: u32) -> (Vec<f64>, Vec<f64>) {
    if mode == 0 {
        // trapezoid: spectrally accurate for smooth periodic integrands
        let h = 2.0 * PI / points as f64;
        return ((0..points).map(|i| i as f64 * h).collect(), vec![h; points]);
    }
    let panels = 2 * mode as usize;
    let order = points.div_ceil(panels).max(4);
    let offset = 0.5 * PI / mode as f64;
    let (t, tw) = composite_gl(0.0, 1.0, 1, order);
    let h = 2.0 * PI / panels as f64;
    let mut x = Vec::with_capacity(panels * order);
    let mut w = Vec::with_capacity(panels * order);
    for k in 0..panels {
        let a = -offset + k as f64 * h;
        for (ti, wi) in t.iter().zip(&tw) {
            let (g, dg) = cluster(*ti);
            x.push(a + h * g);
            w.push(h * wi * dg);
        }
    }
    (x, w)
}

/// Nodes `t = cos ψ` and weights for `sin^e ψ dψ` on `[0, π]`, clustered at the poles.
///
/// A modulated field carries a factor `sin^m ψ`, so `|f|^p` has fractional powers
/// of `ψ` and `π − ψ` there.
fn clustered_polar(k: usize, e: usize) -> (Vec<f64>, Vec<f64>) {
    let (t, tw) = composite_gl(0.0, 1.0, 1, k);
    t.iter()
        .zip(&tw)
        .map(|(ti, wi)| {
            let (g, dg) = cluster2(*ti);
            let psi = PI * g;
            (psi.cos(), PI * dg * wi * psi.sin().powi(e as i32))
        })
        .unzip()
}

/// `cluster ∘ cluster`: slope vanishes to third order at both ends.
fn cluster2(t: f64) -> (f64, f64) {
    let (g, dg) = cluster(t);
    let (h, dh) = cluster(g);
    (h, dh * dg)
}

/// Polynomial map of `[0, 1]` onto itself with vanishing slope at both ends.
///
/// Panels end at zeros of the modulation, where `|f|^p` behaves like a fractional
/// power; clustering the nodes there speeds up convergence.
fn cluster(t: f64) -> (f64, f64) {
    (t * t * (3.0 - 2.0 * t), 6.0 * t * (1.0 - t))
}

/// One tensor-product rule: every direction paired with every radius.
#[derive(Debug, Clone)]
pub struct ProductRule {
    pub radial: RadialRule,
    pub sphere: SphereRule,
}

impl ProductRule {
    pub fn new<F: ScalarField + ?Sized>(dom: &AnnularDomain, radial_panels: usize, angular: usize, field: &F) -> Self {
        let sphere = if field.is_radial() {
            SphereRule::radial(dom.n)
        } else {
            SphereRule::product(dom.n, angular, field.angular_mode())
        };
        Self { radial: RadialRule::with_breaks(dom, radial_panels, &field.radial_breaks()), sphere }
    }

    pub fn len(&self) -> usize {
        self.radial.radii.len() * self.sphere.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Samples along every direction.
    ///
    /// Panels where the field's kink hint changes sign are split at the located
    /// root, so `|f|^p` stays smooth on every panel and convergence stays spectral.
    pub fn rays<F: ScalarField + ?Sized>(&self, f: &F) -> Vec<Ray> {
        (0..self.sphere.len()).into_par_iter().map(|d| self.ray(f, self.sphere.dir(d))).collect()
    }

    fn ray<F: ScalarField + ?Sized>(&self, f: &F, dir: &[f64]) -> Ray {
        let rr = &self.radial;
        let mut x = vec![0.0; dir.len()];
        let mut at = |r: f64| {
            for (xi, di) in x.iter_mut().zip(dir) {
                *xi = r * di;
            }
            f.value_and_hint(&x)
        };
        let samples: Vec<(f64, f64)> = rr.radii.iter().map(|&r| at(r)).collect();
        let mut roots: Vec<f64> = Vec::new();
        for (i, pair) in samples.windows(2).enumerate() {
            if pair[0].1 * pair[1].1 < 0.0 {
                let (a, b) = (rr.radii[i].ln(), rr.radii[i + 1].ln());
                roots.push(bisect(|s| at(s.exp()).1, a, b, pair[0].1));
            }
        }
        if roots.is_empty() {
            return Ray { values: samples.into_iter().map(|v| v.0).collect(), weights: rr.weights.clone() };
        }
        let mut ray = Ray::default();
        let mut next_root = 0;
        for k in 0..rr.edges.len() - 1 {
            let (lo, hi) = (rr.edges[k], rr.edges[k + 1]);
            let mut cuts = vec![lo];
            while next_root < roots.len() && roots[next_root] < hi {
                if roots[next_root] > lo {
                    cuts.push(roots[next_root]);
                }
                next_root += 1;
            }
            cuts.push(hi);
            if cuts.len() == 2 {
                let base = k * RADIAL_ORDER;
                ray.values.extend(samples[base..base + RADIAL_ORDER].iter().map(|v| v.0));
                ray.weights.extend_from_slice(&rr.weights[base..base + RADIAL_ORDER]);
                continue;
            }
            let last = cuts.len() - 2;
            for (j, seg) in cuts.windows(2).enumerate() {
                // interior cuts are kinks; the panel edges themselves are not
                for sub in graded_cuts(seg[0], seg[1], j > 0, j < last).windows(2) {
                    rr.panel_nodes(sub[0], sub[1], |r, w| {
                        ray.values.push(at(r).0);
                        ray.weights.push(w);
                    });
                }
            }
        }
        ray
    }

    /// `Σ w_d Σ w_r h(value)`, summed in a fixed order.
    pub fn weighted_sum(&self, rays: &[Ray], h: impl Fn(f64) -> f64 + Sync) -> f64 {
        let rows: Vec<f64> = rays
            .par_iter()
            .map(|ray| ray.values.iter().zip(&ray.weights).map(|(v, w)| w * h(*v)).sum::<f64>())
            .collect();
        rows.iter().zip(&self.sphere.weights).map(|(s, w)| s * w).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::function::FnField;

    #[test]
    fn gl_integrates_polynomials_exactly() {
        for order in [1usize, 2, 5, 8, 16, 33, 64] {
            let (x, w) = gauss_legendre(order);
            for deg in 0..(2 * order) {
                let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg as i32)).sum();
                let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
                assert!((q - exact).abs() < 1e-13, "order {order} degree {deg}: {q} vs {exact}");
            }
        }
    }

    #[test]
    fn gegenbauer_moments() {
        for lambda in [1.0, 1.5, 2.0] {
            let (x, w) = gauss_gegenbauer(6, lambda);
            // ∫ t² (1−t²)^{λ−1/2} dt = mass/(2λ + 2)
            let mass: f64 = w.iter().sum();
            let m2: f64 = x.iter().zip(&w).map(|(x, w)| w * x * x).sum();
            assert!((m2 - mass / (2.0 * lambda + 2.0)).abs() < 1e-14, "λ={lambda}");
            let exact = if lambda == 1.0 { PI / 2.0 } else if lambda == 2.0 { 3.0 * PI / 8.0 } else { 4.0 / 3.0 };
            assert!((mass - exact).abs() < 1e-14, "λ={lambda}: {mass}");
        }
    }

    #[test]
    fn sphere_rule_moments() {
        for n in [2usize, 3, 4, 5] {
            let s = SphereRule::product(n, 8, 0);
            let total: f64 = s.weights.iter().sum();
            assert!((total - sphere_area(n)).abs() < 1e-12 * total);
            // ∫ x_i² dω = |S^{n−1}|/n for every axis
            for i in 0..n {
                let m2: f64 = (0..s.len()).map(|d| s.weights[d] * s.dir(d)[i].powi(2)).sum();
                assert!((m2 - sphere_area(n) / n as f64).abs() < 1e-10, "n={n} i={i} {}", m2 - sphere_area(n) / n as f64);
            }
            // directions are unit vectors
            for d in 0..s.len() {
                let nn: f64 = s.dir(d).iter().map(|v| v * v).sum();
                assert!((nn - 1.0).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn aligned_azimuth_rule_covers_circle() {
        let (x, w) = azimuth_rule(96, 3);
        assert!((w.iter().sum::<f64>() - 2.0 * PI).abs() < 1e-13);
        let c: f64 = x.iter().zip(&w).map(|(x, w)| w * (3.0 * x).cos().abs()).sum();
        // ∫|cos 3φ| dφ over the circle = 4
        assert!((c - 4.0).abs() < 1e-12);
    }

    #[test]
    fn kinks_are_split_out() {
        // ∫_{1<|x|<2} |(|x| − c)| dx in the plane, with the kink off every panel edge
        let dom = AnnularDomain::new(2, 1.0, 2.0).unwrap();
        let c = 1.37;
        let f = FnField::radial(move |x: &[f64]| x[0].hypot(x[1]) - c);
        let rule = ProductRule::new(&dom, 3, 2, &f);
        let rays = rule.rays(&f);
        let got = rule.weighted_sum(&rays, f64::abs);
        let prim = |r: f64| r.powi(3) / 3.0 - c * r * r / 2.0;
        let exact = 2.0 * PI * ((prim(c) - prim(1.0)).abs() + (prim(2.0) - prim(c)).abs());
        assert!((got - exact).abs() < 1e-13 * exact, "{got} vs {exact}");
    }

    #[test]
    fn fractional_kinks_are_graded() {
        // ∫_{1<|x|<2} |(|x| − c)|^{1.1} dx in the plane; the split alone leaves algebraic convergence
        let dom = AnnularDomain::new(2, 1.0, 2.0).unwrap();
        let c = 1.37;
        let f = FnField::radial(move |x: &[f64]| x[0].hypot(x[1]) - c);
        let rule = ProductRule::new(&dom, 3, 2, &f);
        let rays = rule.rays(&f);
        let got = rule.weighted_sum(&rays, |v| v.abs().powf(1.1));
        // ∫ t^{1.1}(c ± t) dt on each side of the kink
        let side = |l: f64, sign: f64| c * l.powf(2.1) / 2.1 + sign * l.powf(3.1) / 3.1;
        let exact = 2.0 * PI * (side(c - 1.0, -1.0) + side(2.0 - c, 1.0));
        assert!((got - exact).abs() < 1e-12 * exact, "{got} vs {exact}");
    }

    #[test]
    fn graded_cuts_halve_toward_flagged_ends() {
        let cuts = graded_cuts(0.0, 1.0, false, true);
        assert_eq!(cuts.len(), KINK_GRADING as usize + 2);
        assert_eq!((cuts[0], cuts[1], *cuts.last().unwrap()), (0.0, 0.5, 1.0));
        assert!(cuts.windows(2).all(|w| w[0] < w[1]));
        let both = graded_cuts(0.0, 1.0, true, true);
        assert_eq!(both.len(), 2 * KINK_GRADING as usize + 3);
        assert!(both.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(graded_cuts(0.0, 1.0, false, false), vec![0.0, 1.0]);
    }

    #[test]
    fn annulus_volume_from_product_rule() {
        let dom = AnnularDomain::new(3, 1.0, 2.0).unwrap();
        let one = FnField::new(|_: &[f64]| 1.0);
        let rule = ProductRule::new(&dom, 4, 6, &one);
        let rays = rule.rays(&one);
        let vol = rule.weighted_sum(&rays, |x| x);
        assert!((vol - dom.volume()).abs() < 1e-12 * vol);
    }
}
