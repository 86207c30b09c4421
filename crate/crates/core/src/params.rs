//! Exponent and weight algebra for the `X^{k,p,a}` scale.
//!
//! Every integrability exponent is carried as its reciprocal `s = 1/p`
//! (with `1/∞ = 0`), so the Lebesgue, `L^∞` and Hölder regimes form one
//! continuous line: `s > 0` is `L^p`, `s = 0` is `L^∞`, and `s < 0` is a
//! Hölder space whose derivative count and exponent come from
//! [`holder_index`]. All relations below are affine in these reciprocals.

use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Distance to an integer below which `⌊·⌋` snaps to that integer.
pub const FLOOR_SNAP: f64 = 1e-12;

/// Tolerance for recognizing the endpoint `s = 1/n` and interval boundaries.
pub const ENDPOINT_TOL: f64 = 1e-12;

/// Reciprocal integrability exponent `s = 1/p`.
///
/// Optionally carries an exact rational value; when present, floor
/// evaluations use it instead of the float.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReciprocalExponent {
    value: f64,
    exact: Option<Ratio<i64>>,
}

impl ReciprocalExponent {
    pub fn new(s: f64) -> Self {
        Self { value: s, exact: None }
    }

    /// Exact reciprocal `num/den`.
    pub fn from_ratio(num: i64, den: i64) -> Result<Self> {
        if den == 0 {
            return Err(Error::domain("zero denominator in reciprocal exponent"));
        }
        let r = Ratio::new(num, den);
        Ok(Self {
            value: *r.numer() as f64 / *r.denom() as f64,
            exact: Some(r),
        })
    }

    /// From the integrability exponent `p`; `p = ±∞` maps to `0`.
    pub fn from_p(p: f64) -> Self {
        if p.is_infinite() {
            Self::new(0.0)
        } else {
            Self::new(1.0 / p)
        }
    }

    pub fn value(self) -> f64 {
        self.value
    }

    pub fn exact(self) -> Option<Ratio<i64>> {
        self.exact
    }

    /// The exponent `p = 1/s` for display (`∞` when `s = 0`).
    pub fn p(self) -> f64 {
        if self.value == 0.0 {
            f64::INFINITY
        } else {
            1.0 / self.value
        }
    }

    pub fn regime(self) -> Regime {
        classify_regime(self)
    }

    /// True when `s = 1/n`, the critical index `p = n`.
    pub fn is_endpoint(self, n: usize) -> bool {
        match self.exact {
            Some(r) => r == Ratio::new(1, n as i64),
            None => (self.value - 1.0 / n as f64).abs() <= ENDPOINT_TOL,
        }
    }

    fn shifted(self, delta: Ratio<i64>) -> Self {
        match self.exact {
            Some(r) => {
                let out = r + delta;
                Self {
                    value: *out.numer() as f64 / *out.denom() as f64,
                    exact: Some(out),
                }
            }
            None => Self::new(self.value + *delta.numer() as f64 / *delta.denom() as f64),
        }
    }
}

impl From<f64> for ReciprocalExponent {
    fn from(s: f64) -> Self {
        Self::new(s)
    }
}

impl fmt::Display for ReciprocalExponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.exact {
            Some(r) => write!(f, "{r}"),
            None => write!(f, "{}", self.value),
        }
    }
}

impl Serialize for ReciprocalExponent {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        ser.serialize_f64(self.value)
    }
}

impl<'de> Deserialize<'de> for ReciprocalExponent {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        f64::deserialize(de).map(Self::new)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Lebesgue,
    Infinity,
    Holder,
}

/// Derivative count and Hölder exponent `((p)_1, (p)_2)` of a negative exponent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HolderIndex {
    pub k1: u32,
    pub alpha: f64,
}

/// One point `(k, 1/p, a)` of the weighted scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpaceSpec {
    pub k: u32,
    pub s: ReciprocalExponent,
    pub a: f64,
}

impl SpaceSpec {
    pub fn new(k: u32, s: impl Into<ReciprocalExponent>, a: f64) -> Result<Self> {
        if k > 1 {
            return Err(Error::domain(format!("derivative order k = {k} unsupported (k ∈ {{0, 1}})")));
        }
        Ok(Self { k, s: s.into(), a })
    }

    /// Zero-order space `X^{0,p,a}`.
    pub fn zero(s: impl Into<ReciprocalExponent>, a: f64) -> Self {
        Self { k: 0, s: s.into(), a }
    }
}

/// Full parameter tuple of a CKN-type statement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CknTuple {
    pub s_p: ReciprocalExponent,
    pub s_r: ReciprocalExponent,
    pub s_q: ReciprocalExponent,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub lambda: f64,
    pub theta: f64,
    pub n: usize,
}

impl CknTuple {
    /// Tuple whose `(1/q, b)` are produced by [`ckn_targets`].
    #[allow(clippy::too_many_arguments)]
    pub fn ckn(
        s_p: impl Into<ReciprocalExponent>,
        s_r: impl Into<ReciprocalExponent>,
        a: f64,
        c: f64,
        lambda: f64,
        theta: f64,
        n: usize,
    ) -> Result<Self> {
        let (s_p, s_r) = (s_p.into(), s_r.into());
        let (s_q, b) = ckn_targets(s_p, s_r, a, c, lambda, theta, n)?;
        Ok(Self { s_p, s_r, s_q, a, b, c, lambda, theta, n })
    }

    /// Tuple whose `(1/q, b)` are produced by [`interpolate_pair`]; `theta` is unused and set to 1.
    pub fn interpolation(
        s_p: impl Into<ReciprocalExponent>,
        s_r: impl Into<ReciprocalExponent>,
        a: f64,
        c: f64,
        lambda: f64,
        n: usize,
    ) -> Result<Self> {
        let (s_p, s_r) = (s_p.into(), s_r.into());
        let (s_q, b) = interpolate_pair(s_p, s_r, a, c, lambda)?;
        Ok(Self { s_p, s_r, s_q, a, b, c, lambda, theta: 1.0, n })
    }

    /// Hardy–Sobolev tuple: target `1/q` given, `b` from the scaling relation.
    pub fn hardy_sobolev(
        s_p: impl Into<ReciprocalExponent>,
        s_q: impl Into<ReciprocalExponent>,
        a: f64,
        n: usize,
    ) -> Self {
        let (s_p, s_q) = (s_p.into(), s_q.into());
        let b = hardy_sobolev_weight(s_p, s_q, a, n);
        Self { s_p, s_r: s_p, s_q, a, b, c: a, lambda: 0.0, theta: 1.0, n }
    }

    /// Endpoint (`p = n`) tuple: the edge pair `(p_λ, a_λ)` mixed with `(r, c)` at level `θ`.
    pub fn endpoint_ckn(
        s_r: impl Into<ReciprocalExponent>,
        a: f64,
        c: f64,
        lambda: f64,
        theta: f64,
        n: usize,
    ) -> Result<Self> {
        let s_p = ReciprocalExponent::from_ratio(1, n as i64)?;
        let s_r = s_r.into();
        let (s_pl, a_l) = edge_params(s_p, a, lambda, n)?;
        let (s_q, b) = interpolate_pair(s_pl, s_r, a_l, c, 1.0 - theta)?;
        Ok(Self { s_p, s_r, s_q, a, b, c, lambda, theta, n })
    }

    /// Classical Hardy tuple at exponent `p`: `q = p`, `a = 0`, `b = 1`.
    pub fn hardy(s_p: impl Into<ReciprocalExponent>, n: usize) -> Self {
        let s_p = s_p.into();
        Self { s_p, s_r: s_p, s_q: s_p, a: 0.0, b: 1.0, c: 0.0, lambda: 0.0, theta: 1.0, n }
    }
}

pub fn classify_regime(s: ReciprocalExponent) -> Regime {
    let v = s.value();
    if v > 0.0 {
        Regime::Lebesgue
    } else if v == 0.0 {
        Regime::Infinity
    } else {
        Regime::Holder
    }
}

/// `((p)_1, (p)_2)` with `(p)_1 = −⌊n/p + 1⌋` and `(p)_2 = −n/p − (p)_1`.
pub fn holder_index(s: ReciprocalExponent, n: usize) -> Result<HolderIndex> {
    if !(s.value() < 0.0) {
        return Err(Error::domain(format!("holder_index needs 1/p < 0, got {s}")));
    }
    if n == 0 {
        return Err(Error::domain("dimension must be positive"));
    }
    if let Some(r) = s.exact() {
        return Ok(holder_index_exact(r, n));
    }
    let ns = n as f64 * s.value();
    let x = ns + 1.0;
    let nearest = x.round();
    let mut fl = x.floor();
    if (x - nearest).abs() <= FLOOR_SNAP && -nearest >= 0.0 {
        fl = nearest;
    }
    let k1 = -fl;
    // (p)_2 = 1 − frac(n/p + 1) ∈ (0, 1]
    let alpha = (-ns - k1).clamp(f64::MIN_POSITIVE, 1.0);
    Ok(HolderIndex { k1: k1 as u32, alpha })
}

fn holder_index_exact(s: Ratio<i64>, n: usize) -> HolderIndex {
    let x = s * Ratio::from_integer(n as i64) + Ratio::from_integer(1);
    let k1 = -x.floor().to_integer();
    let alpha = -(s * Ratio::from_integer(n as i64)) - Ratio::from_integer(k1);
    HolderIndex {
        k1: k1 as u32,
        alpha: *alpha.numer() as f64 / *alpha.denom() as f64,
    }
}

/// `1/p* = 1/p − 1/n`.
pub fn sobolev_conjugate(s: ReciprocalExponent, n: usize) -> ReciprocalExponent {
    s.shifted(-Ratio::new(1, n as i64))
}

fn check_unit(name: &str, v: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&v) {
        return Err(Error::domain(format!("{name} = {v} outside [0, 1]")));
    }
    Ok(())
}

/// `1/q = (1−λ)/p + λ/r`, `b = (1−λ)a + λc`.
pub fn interpolate_pair(
    s_p: ReciprocalExponent,
    s_r: ReciprocalExponent,
    a: f64,
    c: f64,
    lambda: f64,
) -> Result<(ReciprocalExponent, f64)> {
    check_unit("lambda", lambda)?;
    let s_q = affine(s_p.value(), s_r.value(), lambda);
    let b = affine(a, c, lambda);
    let s_q = match (lambda, s_p.exact(), s_r.exact()) {
        (0.0, Some(e), _) => ReciprocalExponent { value: s_q, exact: Some(e) },
        (1.0, _, Some(e)) => ReciprocalExponent { value: s_q, exact: Some(e) },
        _ => ReciprocalExponent::new(s_q),
    };
    Ok((s_q, b))
}

/// `(1−t)·x + t·y`, returning the endpoints exactly at `t ∈ {0, 1}`.
fn affine(x: f64, y: f64, t: f64) -> f64 {
    if t == 0.0 {
        x
    } else if t == 1.0 {
        y
    } else {
        (1.0 - t) * x + t * y
    }
}

/// `1/q = θ(1/p − λ/n) + (1−θ)/r`, `b = θ(1 + a − λ) + (1−θ)c`.
pub fn ckn_targets(
    s_p: ReciprocalExponent,
    s_r: ReciprocalExponent,
    a: f64,
    c: f64,
    lambda: f64,
    theta: f64,
    n: usize,
) -> Result<(ReciprocalExponent, f64)> {
    check_unit("lambda", lambda)?;
    check_unit("theta", theta)?;
    let first_s = s_p.value() - lambda / n as f64;
    let first_b = 1.0 + a - lambda;
    Ok((
        ReciprocalExponent::new(affine(s_r.value(), first_s, theta)),
        affine(c, first_b, theta),
    ))
}

/// `(1/q − b/n) − θ(1/p − (1+a)/n) − (1−θ)(1/r − c/n)`.
pub fn compatibility_residual(t: &CknTuple) -> f64 {
    let n = t.n as f64;
    let lhs = t.s_q.value() - t.b / n;
    let rhs = t.theta * (t.s_p.value() - (1.0 + t.a) / n) + (1.0 - t.theta) * (t.s_r.value() - t.c / n);
    lhs - rhs
}

/// Edge pair between the Sobolev end `(1/p − 1/n, a)` at `λ = 0` and the
/// Hardy end `(1/p, a + 1)` at `λ = 1`.
pub fn edge_params(
    s_p: ReciprocalExponent,
    a: f64,
    lambda: f64,
    n: usize,
) -> Result<(ReciprocalExponent, f64)> {
    check_unit("lambda", lambda)?;
    let s = if lambda == 1.0 {
        s_p
    } else if lambda == 0.0 {
        sobolev_conjugate(s_p, n)
    } else {
        ReciprocalExponent::new(s_p.value() - (1.0 - lambda) / n as f64)
    };
    Ok((s, a + lambda))
}

/// Weight `b` solving `1/q − b/n = 1/p − (1+a)/n`.
pub fn hardy_sobolev_weight(s_p: ReciprocalExponent, s_q: ReciprocalExponent, a: f64, n: usize) -> f64 {
    n as f64 * (s_q.value() - s_p.value()) + 1.0 + a
}

/// Sharp constant `p/(n−p)` of the classical Hardy inequality.
pub fn hardy_constant(n: usize, p: f64) -> Result<f64> {
    let nf = n as f64;
    if !(p > 1.0 && p < nf) {
        return Err(Error::domain(format!("hardy_constant needs 1 < p < n, got p = {p}, n = {n}")));
    }
    Ok(p / (nf - p))
}

/// Inequality statements the lab can instantiate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InequalityKind {
    ClassicalHardy,
    LocalizedHardy,
    GeneralizedSobolev,
    Interpolation,
    HardySobolev,
    GeneralizedCkn,
    EndpointLog,
    EndpointCkn,
    TrudingerMoser,
    KMethod,
}

impl InequalityKind {
    pub const ALL: [InequalityKind; 10] = [
        InequalityKind::ClassicalHardy,
        InequalityKind::LocalizedHardy,
        InequalityKind::GeneralizedSobolev,
        InequalityKind::Interpolation,
        InequalityKind::HardySobolev,
        InequalityKind::GeneralizedCkn,
        InequalityKind::EndpointLog,
        InequalityKind::EndpointCkn,
        InequalityKind::TrudingerMoser,
        InequalityKind::KMethod,
    ];

    pub fn name(self) -> &'static str {
        match self {
            InequalityKind::ClassicalHardy => "classical_hardy",
            InequalityKind::LocalizedHardy => "localized_hardy",
            InequalityKind::GeneralizedSobolev => "generalized_sobolev",
            InequalityKind::Interpolation => "interpolation",
            InequalityKind::HardySobolev => "hardy_sobolev",
            InequalityKind::GeneralizedCkn => "generalized_ckn",
            InequalityKind::EndpointLog => "endpoint_log",
            InequalityKind::EndpointCkn => "endpoint_ckn",
            InequalityKind::TrudingerMoser => "trudinger_moser",
            InequalityKind::KMethod => "k_method",
        }
    }
}

impl fmt::Display for InequalityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for InequalityKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key: String = s.chars().filter(|c| *c != '_' && *c != '-').collect::<String>().to_lowercase();
        InequalityKind::ALL
            .into_iter()
            .find(|k| k.name().replace('_', "") == key)
            .ok_or_else(|| Error::domain(format!("unknown inequality kind `{s}`")))
    }
}

/// A failed range constraint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    /// Short name of the failed constraint, e.g. `1/p = 1/n excluded`.
    pub constraint: String,
    pub detail: String,
}

impl Violation {
    fn new(constraint: impl Into<String>, detail: impl Into<String>) -> Self {
        Self { constraint: constraint.into(), detail: detail.into() }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({})", self.constraint, self.detail)
    }
}

struct Checker<'a> {
    t: &'a CknTuple,
    out: Vec<Violation>,
}

impl Checker<'_> {
    fn inv_n(&self) -> f64 {
        1.0 / self.t.n as f64
    }

    /// `s ∈ (−1/n, 1]`.
    fn unified_range(&mut self, label: &str, s: ReciprocalExponent) {
        let lo = -self.inv_n();
        let v = s.value();
        if !v.is_finite() {
            self.out.push(Violation::new(format!("{label} not finite"), format!("{label} = {v}")));
        } else if v <= lo + ENDPOINT_TOL {
            self.out.push(Violation::new(
                format!("{label} at or below -1/n"),
                format!("{label} = {v} ∉ (−1/n, 1] with n = {}", self.t.n),
            ));
        } else if v > 1.0 + ENDPOINT_TOL {
            self.out.push(Violation::new(format!("{label} above 1"), format!("{label} = {v} ∉ (−1/n, 1]")));
        }
    }

    fn unit(&mut self, label: &str, v: f64) {
        if !(0.0..=1.0).contains(&v) {
            self.out.push(Violation::new(format!("{label} outside [0, 1]"), format!("{label} = {v}")));
        }
    }

    fn open_unit(&mut self, label: &str, v: f64) {
        if !(v > 0.0 && v < 1.0) {
            self.out.push(Violation::new(format!("{label} outside (0, 1)"), format!("{label} = {v}")));
        }
    }

    fn dimension(&mut self) {
        if self.t.n < 2 {
            self.out.push(Violation::new("n below 2", format!("n = {}", self.t.n)));
        }
    }

    fn finite_weights(&mut self) {
        for (label, v) in [("a", self.t.a), ("b", self.t.b), ("c", self.t.c)] {
            if !v.is_finite() {
                self.out.push(Violation::new(format!("{label} not finite"), format!("{label} = {v}")));
            }
        }
    }

    /// `1/p ∈ (0, 1/n) ∪ (1/n, 1]`.
    fn lebesgue_off_endpoint(&mut self) {
        let s = self.t.s_p;
        let v = s.value();
        if s.is_endpoint(self.t.n) {
            self.out.push(Violation::new(
                "1/p = 1/n excluded",
                format!("1/p = {s} is the endpoint p = n = {}; use the endpoint kinds", self.t.n),
            ));
        } else if v <= 0.0 {
            self.out.push(Violation::new("1/p at or below 0", format!("1/p = {v} ∉ (0, 1/n) ∪ (1/n, 1]")));
        } else if v > 1.0 + ENDPOINT_TOL {
            self.out.push(Violation::new("1/p above 1", format!("1/p = {v} ∉ (0, 1/n) ∪ (1/n, 1]")));
        }
    }

    fn endpoint_p(&mut self) {
        if !self.t.s_p.is_endpoint(self.t.n) {
            self.out.push(Violation::new(
                "1/p must equal 1/n",
                format!("1/p = {} but the endpoint statements need p = n = {}", self.t.s_p, self.t.n),
            ));
        }
    }
}

/// Range constraints of the statement named by `kind`; empty iff admissible.
pub fn validate_admissible(kind: InequalityKind, t: &CknTuple) -> Vec<Violation> {
    let mut ck = Checker { t, out: Vec::new() };
    ck.dimension();
    ck.finite_weights();
    match kind {
        InequalityKind::ClassicalHardy => {
            let p = t.s_p.p();
            if !(p > 1.0 && p < t.n as f64) {
                ck.out.push(Violation::new("p outside (1, n)", format!("p = {p}, n = {}", t.n)));
            }
        }
        InequalityKind::LocalizedHardy => {
            let v = t.s_p.value();
            if !(v > 0.0 && v <= 1.0 + ENDPOINT_TOL) {
                ck.out.push(Violation::new("p outside [1, ∞)", format!("1/p = {v} ∉ (0, 1]")));
            }
        }
        InequalityKind::GeneralizedSobolev => {
            ck.lebesgue_off_endpoint();
        }
        InequalityKind::Interpolation => {
            ck.unified_range("1/p", t.s_p);
            ck.unified_range("1/r", t.s_r);
            ck.unit("lambda", t.lambda);
        }
        InequalityKind::HardySobolev => {
            let inv_n = ck.inv_n();
            let (sp, sq) = (t.s_p.value(), t.s_q.value());
            if sq > sp + ENDPOINT_TOL {
                ck.out.push(Violation::new("1/q above 1/p", format!("1/q = {sq} > 1/p = {sp}")));
            } else if sq < sp - inv_n - ENDPOINT_TOL {
                ck.out.push(Violation::new("1/q below 1/p - 1/n", format!("1/q = {sq} < 1/p* = {}", sp - inv_n)));
            }
            ck.unified_range("1/p", t.s_p);
            ck.unified_range("1/q", t.s_q);
        }
        InequalityKind::GeneralizedCkn => {
            ck.lebesgue_off_endpoint();
            ck.unified_range("1/r", t.s_r);
            ck.unit("lambda", t.lambda);
            ck.unit("theta", t.theta);
        }
        InequalityKind::EndpointLog | InequalityKind::TrudingerMoser => {
            ck.endpoint_p();
        }
        InequalityKind::EndpointCkn => {
            ck.endpoint_p();
            ck.unified_range("1/r", t.s_r);
            ck.unit("lambda", t.lambda);
            ck.unit("theta", t.theta);
        }
        InequalityKind::KMethod => {
            ck.unified_range("1/p", t.s_p);
            ck.unified_range("1/r", t.s_r);
            ck.open_unit("theta", t.theta);
        }
    }
    ck.out
}
