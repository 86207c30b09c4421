//! Upper bounds on the K-functional `K(t, u) = inf_{u = v + w} ‖v‖_X + t‖w‖_Y`
//! over scalar blends and smooth radial cutoff splittings.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::function::{AnnularDomain, RadialFactor, TestFunction};
use crate::norm::{x_norm, NormResult, QuadratureSpec};
use crate::optimize::golden_max;
use crate::params::SpaceSpec;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KConfig {
    /// Interior cutoff radii on the coarse grid.
    pub rho_points: usize,
    /// Cutoff transition widths as fractions of the annulus width.
    pub delta_fractions: Vec<f64>,
    /// Golden-section refinement of the cutoff radius per `t`.
    pub refine: bool,
    pub refine_iters: usize,
    /// Points of the default log-spaced `t` grid.
    pub t_points: usize,
    /// Default grid spans `[1/t_span, t_span]·(‖u‖_X/‖u‖_Y)`.
    pub t_span: f64,
}

impl Default for KConfig {
    fn default() -> Self {
        Self {
            rho_points: 7,
            delta_fractions: vec![0.15, 0.4],
            refine: true,
            refine_iters: 20,
            t_points: 65,
            t_span: 1e4,
        }
    }
}

/// One member of the splitting family `u = v + w`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Splitting {
    /// `v = σu`, `w = (1 − σ)u`.
    Scalar { sigma: f64 },
    /// `v = χu`, `w = (1 − χ)u` with `χ` a smooth step at `rho` of width `delta`; `inner` keeps small radii in `v`.
    Cutoff { rho: f64, delta: f64, inner: bool },
}

impl Splitting {
    pub fn id(&self) -> String {
        match *self {
            Splitting::Scalar { sigma } => format!("scalar(sigma={sigma})"),
            Splitting::Cutoff { rho, delta, inner } => {
                format!("cutoff({}, rho={rho:.6}, delta={delta:.6})", if inner { "inner" } else { "outer" })
            }
        }
    }
}

/// Endpoint norms of one splitting: `K(t) ≤ x + t·y`.
#[derive(Debug, Clone, Copy)]
struct Candidate {
    split: Splitting,
    x: f64,
    y: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KProfile {
    pub t_grid: Vec<f64>,
    pub k_values: Vec<f64>,
    pub splitting_ids: Vec<String>,
    pub norm_x: NormResult,
    pub norm_y: NormResult,
}

impl KProfile {
    /// Combined endpoint error used as the tolerance of the shape checks.
    pub fn tolerance(&self) -> f64 {
        3.0 * self.norm_x.err_estimate.max(self.norm_y.err_estimate)
    }

    pub fn is_monotone(&self, tol: f64) -> bool {
        self.k_values.windows(2).all(|w| w[1] >= w[0] - tol)
    }

    /// Slopes between consecutive grid points are nonincreasing.
    pub fn is_concave(&self, tol: f64) -> bool {
        let slopes: Vec<f64> = self
            .k_values
            .windows(2)
            .zip(self.t_grid.windows(2))
            .map(|(k, t)| (k[1] - k[0]) / (t[1] - t[0]))
            .collect();
        // compare slope drops against the tolerance spread over the local step
        slopes
            .windows(2)
            .zip(self.t_grid.windows(3))
            .all(|(s, t)| s[1] <= s[0] + tol / (t[2] - t[1]).min(t[1] - t[0]))
    }

    /// `K(t) ≤ min(‖u‖_X, t‖u‖_Y) + tol` at every grid point.
    pub fn below_trivial(&self, tol: f64) -> bool {
        self.t_grid
            .iter()
            .zip(&self.k_values)
            .all(|(t, k)| *k <= self.norm_x.value.min(t * self.norm_y.value) + tol)
    }
}

/// Endpoint spaces of the couple `(X, Y)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Couple {
    pub x: SpaceSpec,
    pub y: SpaceSpec,
}

fn endpoint_norms(u: &TestFunction, c: &Couple, dom: &AnnularDomain, q: &QuadratureSpec) -> Result<(NormResult, NormResult)> {
    let nx = x_norm(u, &c.x, dom, q)?;
    let ny = x_norm(u, &c.y, dom, q)?;
    if !nx.value.is_finite() || !ny.value.is_finite() {
        return Err(Error::domain("endpoint norm is not finite"));
    }
    Ok((nx, ny))
}

fn cutoff_pieces(u: &TestFunction, rho: f64, delta: f64, inner: bool) -> (TestFunction, TestFunction) {
    let v = u.with_factor(RadialFactor::Step { rho, delta, inner });
    let w = u.with_factor(RadialFactor::Step { rho, delta, inner: !inner });
    (v, w)
}

/// Endpoint norms of a cutoff splitting, or `None` when either norm fails.
fn cutoff_candidate(
    u: &TestFunction,
    c: &Couple,
    dom: &AnnularDomain,
    q: &QuadratureSpec,
    rho: f64,
    delta: f64,
    inner: bool,
) -> Option<Candidate> {
    let (v, w) = cutoff_pieces(u, rho, delta, inner);
    let x = x_norm(&v, &c.x, dom, q).ok()?.value;
    let y = x_norm(&w, &c.y, dom, q).ok()?.value;
    (x.is_finite() && y.is_finite()).then_some(Candidate { split: Splitting::Cutoff { rho, delta, inner }, x, y })
}

fn coarse_pool(u: &TestFunction, c: &Couple, dom: &AnnularDomain, q: &QuadratureSpec, cfg: &KConfig, a: f64, b: f64) -> Vec<Candidate> {
    let mut pool = vec![
        Candidate { split: Splitting::Scalar { sigma: 0.0 }, x: 0.0, y: b },
        Candidate { split: Splitting::Scalar { sigma: 1.0 }, x: a, y: 0.0 },
    ];
    let w = dom.width();
    let mut grid = Vec::new();
    for i in 0..cfg.rho_points {
        let rho = dom.rho_in + w * (i + 1) as f64 / (cfg.rho_points + 1) as f64;
        for &f in &cfg.delta_fractions {
            for inner in [true, false] {
                grid.push((rho, f * w, inner));
            }
        }
    }
    let cands: Vec<Option<Candidate>> = grid
        .par_iter()
        .map(|&(rho, delta, inner)| cutoff_candidate(u, c, dom, q, rho, delta, inner))
        .collect();
    pool.extend(cands.into_iter().flatten());
    pool
}

fn best_at(pool: &[Candidate], t: f64) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (i, c) in pool.iter().enumerate() {
        let v = c.x + t * c.y;
        if v < best.1 {
            best = (i, v);
        }
    }
    best
}

/// Log-spaced grid of `points` values over `[center/span, center·span]`.
pub fn log_grid(center: f64, span: f64, points: usize) -> Vec<f64> {
    let (lo, hi) = ((center / span).ln(), (center * span).ln());
    (0..points)
        .map(|i| {
            if points == 1 || 2 * i + 1 == points {
                center
            } else {
                (lo + (hi - lo) * i as f64 / (points - 1) as f64).exp()
            }
        })
        .collect()
}

/// Default `t` grid centred at `‖u‖_X/‖u‖_Y`, or at 1 when either norm vanishes.
pub fn default_t_grid(a: f64, b: f64, cfg: &KConfig) -> Vec<f64> {
    let center = if a > 0.0 && b > 0.0 { a / b } else { 1.0 };
    log_grid(center, cfg.t_span, cfg.t_points.max(1))
}

/// Upper bound on `K(t, u)` over the splitting family at a single `t`.
pub fn k_upper(
    u: &TestFunction,
    couple: &Couple,
    t: f64,
    dom: &AnnularDomain,
    q: &QuadratureSpec,
    cfg: &KConfig,
) -> Result<f64> {
    let p = k_profile(u, couple, Some(&[t]), dom, q, cfg)?;
    Ok(p.k_values[0])
}

/// K-profile on `t_grid` (or the default grid). Every value is the minimum over one shared
/// pool of splittings, so the profile is nondecreasing and concave by construction.
pub fn k_profile(
    u: &TestFunction,
    couple: &Couple,
    t_grid: Option<&[f64]>,
    dom: &AnnularDomain,
    q: &QuadratureSpec,
    cfg: &KConfig,
) -> Result<KProfile> {
    let (nx, ny) = endpoint_norms(u, couple, dom, q)?;
    let t_grid = match t_grid {
        Some(g) => g.to_vec(),
        None => default_t_grid(nx.value, ny.value, cfg),
    };
    if t_grid.is_empty() {
        return Err(Error::domain("empty t grid"));
    }
    if let Some(t) = t_grid.iter().find(|t| !(**t > 0.0 && t.is_finite())) {
        return Err(Error::domain(format!("t must be positive and finite, got {t}")));
    }
    let (a, b) = (nx.value, ny.value);
    let mut pool = if u.is_zero() { Vec::new() } else { coarse_pool(u, couple, dom, q, cfg, a, b) };
    if pool.is_empty() {
        pool.push(Candidate { split: Splitting::Scalar { sigma: 1.0 }, x: a, y: 0.0 });
    }

    if cfg.refine && !u.is_zero() {
        let width = dom.width();
        let step = width / (cfg.rho_points + 1) as f64;
        let coarse = pool.clone();
        let extra: Vec<Option<Candidate>> = t_grid
            .par_iter()
            .map(|&t| {
                // refine around the best cutoff at this t, only where it competes with the scalar blend
                let trivial = a.min(t * b);
                let (i, v) = coarse
                    .iter()
                    .enumerate()
                    .filter(|(_, c)| matches!(c.split, Splitting::Cutoff { .. }))
                    .map(|(i, c)| (i, c.x + t * c.y))
                    .min_by(|x, y| x.1.total_cmp(&y.1))?;
                if v > 1.1 * trivial {
                    return None;
                }
                let Splitting::Cutoff { rho, delta, inner } = coarse[i].split else { return None };
                let lo = (rho - step).max(dom.rho_in);
                let hi = (rho + step).min(dom.rho_out);
                let mut best: Option<Candidate> = None;
                golden_max(
                    |r| match cutoff_candidate(u, couple, dom, q, r, delta, inner) {
                        Some(c) => {
                            let val = c.x + t * c.y;
                            if best.is_none_or(|b| val < b.x + t * b.y) {
                                best = Some(c);
                            }
                            -val
                        }
                        None => f64::NEG_INFINITY,
                    },
                    lo,
                    hi,
                    (hi - lo) * 0.618f64.powi(cfg.refine_iters as i32),
                );
                best
            })
            .collect();
        pool.extend(extra.into_iter().flatten());
    }

    let mut k_values = Vec::with_capacity(t_grid.len());
    let mut ids = Vec::with_capacity(t_grid.len());
    for &t in &t_grid {
        let (i, v) = best_at(&pool, t);
        k_values.push(v);
        ids.push(pool[i].split.id());
    }
    Ok(KProfile { t_grid, k_values, splitting_ids: ids, norm_x: nx, norm_y: ny })
}

/// `(θ, ∞)` norm estimate: `max_t t^{−θ} K(t)` over the profile grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterpNorm {
    pub value: f64,
    pub argmax_t: f64,
    /// The maximum sits at the first or last grid point, so the grid may be too short.
    pub at_grid_edge: bool,
    pub profile: KProfile,
}

pub fn interp_from_profile(profile: KProfile, theta: f64) -> Result<InterpNorm> {
    if !(theta > 0.0 && theta < 1.0) {
        return Err(Error::domain(format!("theta must lie in (0, 1), got {theta}")));
    }
    if profile.t_grid.is_empty() {
        return Err(Error::domain("empty t grid"));
    }
    let mut best = (0, f64::NEG_INFINITY);
    for (i, (t, k)) in profile.t_grid.iter().zip(&profile.k_values).enumerate() {
        let v = t.powf(-theta) * k;
        if v > best.1 {
            best = (i, v);
        }
    }
    let last = profile.t_grid.len() - 1;
    Ok(InterpNorm {
        value: best.1,
        argmax_t: profile.t_grid[best.0],
        at_grid_edge: profile.t_grid.len() > 2 && (best.0 == 0 || best.0 == last) && best.1 > 0.0,
        profile,
    })
}

pub fn interp_norm(
    u: &TestFunction,
    couple: &Couple,
    theta: f64,
    t_grid: Option<&[f64]>,
    dom: &AnnularDomain,
    q: &QuadratureSpec,
    cfg: &KConfig,
) -> Result<InterpNorm> {
    if !(theta > 0.0 && theta < 1.0) {
        return Err(Error::domain(format!("theta must lie in (0, 1), got {theta}")));
    }
    if t_grid.is_some_and(|g| g.is_empty()) {
        return Err(Error::domain("empty t grid"));
    }
    interp_from_profile(k_profile(u, couple, t_grid, dom, q, cfg)?, theta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::function::{make_radial_bump, make_zero};

    fn setup() -> (AnnularDomain, TestFunction, Couple) {
        let d = AnnularDomain::new(2, 1.0, 2.0).unwrap();
        let u = make_radial_bump(d, 1.0).unwrap();
        let c = Couple { x: SpaceSpec::zero(0.5, 0.0), y: SpaceSpec::zero(0.0, 0.0) };
        (d, u, c)
    }

    #[test]
    fn scalar_only_profile_is_min_of_endpoints() {
        let (d, u, c) = setup();
        let q = QuadratureSpec::default();
        let cfg = KConfig { rho_points: 0, refine: false, ..Default::default() };
        let p = k_profile(&u, &c, None, &d, &q, &cfg).unwrap();
        let (a, b) = (p.norm_x.value, p.norm_y.value);
        for (t, k) in p.t_grid.iter().zip(&p.k_values) {
            assert_eq!(*k, a.min(t * b));
        }
        let i = interp_from_profile(p, 0.5).unwrap();
        let closed = a.sqrt() * b.sqrt();
        assert!((i.value - closed).abs() <= 1e-12 * closed);
        assert!(!i.at_grid_edge);
    }

    #[test]
    fn cutoffs_only_lower_the_profile() {
        // endpoints with different weights: the outer part is cheaper in Y
        let d = AnnularDomain::new(2, 1.0, 4.0).unwrap();
        let u = make_radial_bump(d, 1.0).unwrap();
        let c = Couple { x: SpaceSpec::zero(1.0, 0.0), y: SpaceSpec::zero(1.0, 2.0) };
        let q = QuadratureSpec::default();
        let p = k_profile(&u, &c, None, &d, &q, &KConfig::default()).unwrap();
        assert!(p.is_monotone(0.0));
        assert!(p.is_concave(1e-12));
        assert!(p.below_trivial(0.0));
        assert!(p.splitting_ids.iter().any(|s| s.starts_with("cutoff")));
    }

    #[test]
    fn extreme_t_limits() {
        let (d, u, c) = setup();
        let q = QuadratureSpec::default();
        let cfg = KConfig::default();
        let p = k_profile(&u, &c, Some(&[1e-8, 1e8]), &d, &q, &cfg).unwrap();
        assert!(p.k_values[0] <= 1e-8 * p.norm_y.value);
        assert!(p.k_values[1] <= p.norm_x.value);
    }

    #[test]
    fn zero_function_and_bad_grids() {
        let (d, _, c) = setup();
        let z = make_zero(d).unwrap();
        let q = QuadratureSpec::default();
        let cfg = KConfig::default();
        let i = interp_norm(&z, &c, 0.5, None, &d, &q, &cfg).unwrap();
        assert_eq!(i.value, 0.0);
        assert!(interp_norm(&z, &c, 0.5, Some(&[]), &d, &q, &cfg).is_err());
        assert!(interp_norm(&z, &c, 1.0, None, &d, &q, &cfg).is_err());
        assert!(k_upper(&z, &c, -1.0, &d, &q, &cfg).is_err());
    }

    #[test]
    fn log_grid_contains_center() {
        let g = log_grid(3.0, 1e4, 65);
        assert_eq!(g[32], 3.0);
        assert!((g[0] - 3e-4).abs() < 1e-15);
        assert!(g.windows(2).all(|w| w[1] > w[0]));
    }
}
