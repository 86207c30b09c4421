//! Property tests for the invariants of parameters, norms, K-profiles and the lab.

use std::collections::BTreeMap;

use approx::assert_relative_eq;
use proptest::prelude::*;

use xscale::function::{make_angular, make_power_bump, make_radial_bump, ScalarField};
use xscale::kfunc::{k_profile, Couple, KConfig};
use xscale::lab::{estimate_constant, evaluate_instance, FamilySpec, LabConfig, OptimizerConfig, ParamRange};
use xscale::norm::{sup_norm, x_norm};
use xscale::params::{
    ckn_targets, compatibility_residual, holder_index, interpolate_pair, sobolev_conjugate, validate_admissible,
};
use xscale::{AnnularDomain, CknTuple, InequalityKind, QuadratureSpec, ReciprocalExponent, SpaceSpec, TestFunction};

fn dom(n: usize, a: f64, b: f64) -> AnnularDomain {
    AnnularDomain::new(n, a, b).unwrap()
}

fn member(n: usize, width: f64, bump: bool, shape: f64, mode: u32) -> (AnnularDomain, TestFunction) {
    let d = dom(n, 1.0, 1.0 + width);
    let base = if bump { make_radial_bump(d, shape).unwrap() } else { make_power_bump(d, shape, 0.2).unwrap() };
    let u = if mode > 0 { make_angular(&base, mode).unwrap() } else { base };
    (d, u)
}

fn cheap() -> ProptestConfig {
    ProptestConfig { cases: 24, ..ProptestConfig::default() }
}

proptest! {
    #[test]
    fn holder_side_has_no_derivatives(n in 2usize..=6, frac in 0.001f64..0.999) {
        let s = -frac / n as f64;
        let h = holder_index(ReciprocalExponent::new(s), n).unwrap();
        prop_assert_eq!(h.k1, 0);
        prop_assert!((h.alpha - (-(n as f64) * s)).abs() <= 1e-12);
        prop_assert!(h.alpha > 0.0 && h.alpha <= 1.0);
    }

    #[test]
    fn targets_are_affine(
        s_p in 0.01f64..1.0, s_r in 0.01f64..1.0, a in -2.0f64..2.0, c in -2.0f64..2.0,
        lambda in 0.0f64..=1.0, theta in 0.0f64..=1.0, n in 2usize..=5,
    ) {
        let (s_p, s_r) = (ReciprocalExponent::new(s_p), ReciprocalExponent::new(s_r));
        let (q0, b0) = interpolate_pair(s_p, s_r, a, c, 0.0).unwrap();
        let (q1, b1) = interpolate_pair(s_p, s_r, a, c, 1.0).unwrap();
        let (ql, bl) = interpolate_pair(s_p, s_r, a, c, lambda).unwrap();
        prop_assert!((ql.value() - ((1.0 - lambda) * q0.value() + lambda * q1.value())).abs() <= 1e-14);
        prop_assert!((bl - ((1.0 - lambda) * b0 + lambda * b1)).abs() <= 1e-14);

        let (t0, c0) = ckn_targets(s_p, s_r, a, c, lambda, 0.0, n).unwrap();
        let (t1, c1) = ckn_targets(s_p, s_r, a, c, lambda, 1.0, n).unwrap();
        let (tt, ct) = ckn_targets(s_p, s_r, a, c, lambda, theta, n).unwrap();
        prop_assert!((tt.value() - ((1.0 - theta) * t0.value() + theta * t1.value())).abs() <= 1e-14);
        prop_assert!((ct - ((1.0 - theta) * c0 + theta * c1)).abs() <= 1e-13);

        let t = CknTuple::ckn(s_p, s_r, a, c, lambda, theta, n).unwrap();
        prop_assert!(compatibility_residual(&t).abs() <= 1e-12);
    }

    #[test]
    fn conjugate_twice_shifts_by_two_over_n(num in -50i64..=50, den in 1i64..=60, n in 2usize..=6) {
        let s = ReciprocalExponent::from_ratio(num, den).unwrap();
        let twice = sobolev_conjugate(sobolev_conjugate(s, n), n);
        let expect = s.exact().unwrap() - num_rational::Ratio::new(2, n as i64);
        prop_assert_eq!(twice.exact(), Some(expect));
    }

    #[test]
    fn moving_inside_clears_the_violation(n in 2usize..=5, s_p in 0.05f64..0.95, delta in 0.001f64..0.5) {
        // 1/q above 1/p violates the Hardy–Sobolev range; moving 1/q back below 1/p clears it
        let above = CknTuple::hardy_sobolev(s_p, (s_p + delta).min(1.0), 0.0, n);
        let below = CknTuple::hardy_sobolev(s_p, (s_p - delta / n as f64).max(s_p - 1.0 / n as f64 + 1e-9), 0.0, n);
        let ep = 1.0 / n as f64;
        prop_assume!((s_p - ep).abs() > 1e-6 && s_p + delta <= 1.0);
        prop_assert!(!validate_admissible(InequalityKind::HardySobolev, &above).is_empty());
        prop_assert!(validate_admissible(InequalityKind::HardySobolev, &below).is_empty());
    }

    #[test]
    fn members_vanish_on_the_boundary(
        n in 2usize..=4, width in 0.5f64..4.0, bump: bool, shape in -2.0f64..4.0, mode in 0u32..=3,
        angles in prop::collection::vec(-3.2f64..3.2, 4),
    ) {
        let shape = if bump { shape.abs() + 0.1 } else { shape };
        let (d, u) = member(n, width, bump, shape, mode);
        for r in [d.rho_in, d.rho_out] {
            let mut x: Vec<f64> = angles[..n].iter().map(|a| a.sin() + 1e-3).collect();
            let len = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            x.iter_mut().for_each(|v| *v *= r / len);
            prop_assert_eq!(u.evaluate(&x), 0.0);
            prop_assert!(u.gradient(&x).iter().all(|g| *g == 0.0));
        }
    }

    #[test]
    fn power_region_scales(beta in -3.0f64..3.0, s in 1.0f64..1.5, r in 1.4f64..2.0) {
        // plateau band of a 20% cut on [1, 4] in ln r is [4^0.2, 4^0.8] ⊃ [1.32, 3.03]
        let d = dom(2, 1.0, 4.0);
        let u = make_power_bump(d, beta, 0.2).unwrap();
        let x = [r * 0.6, r * 0.8];
        let sx = [s * x[0], s * x[1]];
        assert_relative_eq!(u.evaluate(&sx), s.powf(beta) * u.evaluate(&x), max_relative = 1e-13);
    }
}

proptest! {
    #![proptest_config(cheap())]

    #[test]
    fn norms_are_homogeneous(
        n in 2usize..=3, width in 0.5f64..3.0, bump: bool, shape in 0.2f64..3.0, mode in 0u32..=2,
        s in prop::sample::select(vec![1.0, 0.5, 0.2, 0.0, -0.2]), a in -1.0f64..1.0, c in -5.0f64..5.0,
    ) {
        prop_assume!(c.abs() > 1e-3);
        let (d, u) = member(n, width, bump, shape, mode);
        let s = ReciprocalExponent::new(s / n as f64 * 2.0);
        let q = QuadratureSpec::default();
        let spec = SpaceSpec::zero(s, a);
        let base = x_norm(&u, &spec, &d, &q).unwrap().value;
        let scaled = x_norm(&u.scaled(c), &spec, &d, &q).unwrap().value;
        assert_relative_eq!(scaled, c.abs() * base, max_relative = 1e-10);
    }

    #[test]
    fn heavier_weights_give_smaller_norms(
        n in 2usize..=3, rho_in in 1.0f64..2.0, bump: bool, shape in 0.2f64..3.0,
        s in prop::sample::select(vec![1.0, 0.5, 0.25, 0.0]), a1 in -1.0f64..1.0, gap in 0.01f64..1.0,
    ) {
        let d = dom(n, rho_in, rho_in + 1.5);
        let u = if bump { make_radial_bump(d, shape).unwrap() } else { make_power_bump(d, shape - 1.0, 0.2).unwrap() };
        let q = QuadratureSpec::default();
        let lo = x_norm(&u, &SpaceSpec::zero(s, a1), &d, &q).unwrap();
        let hi = x_norm(&u, &SpaceSpec::zero(s, a1 + gap), &d, &q).unwrap();
        prop_assert!(hi.value <= lo.value * (1.0 + 1e-12) + hi.err_estimate + lo.err_estimate);
    }

    #[test]
    fn lebesgue_norms_are_log_convex(
        n in 2usize..=3, width in 0.5f64..3.0, bump: bool, shape in 0.2f64..3.0, mode in 0u32..=2,
        s_p in 0.05f64..=1.0, s_r in 0.05f64..=1.0, a in -1.0f64..1.0, c in -1.0f64..1.0, lambda in 0.0f64..=1.0,
    ) {
        let (d, u) = member(n, width, bump, shape, mode);
        let t = CknTuple::interpolation(s_p, s_r, a, c, lambda, n).unwrap();
        let r = evaluate_instance(InequalityKind::Interpolation, &t, &u, &d, &LabConfig::default()).unwrap();
        prop_assert!(r.empirical_ratio <= 1.0 + 5.0 * r.ratio_err, "ratio {} err {}", r.empirical_ratio, r.ratio_err);
    }

    #[test]
    fn quadrature_is_stable_under_doubling(
        n in 2usize..=3, width in 0.5f64..3.0, bump: bool, shape in 0.2f64..3.0, mode in 0u32..=2,
        s in 0.1f64..=1.0, a in -1.0f64..1.0,
    ) {
        let (d, u) = member(n, width, bump, shape, mode);
        let q = QuadratureSpec::default();
        let spec = SpaceSpec::zero(s, a);
        let coarse = x_norm(&u, &spec, &d, &q).unwrap();
        let fine = x_norm(&u, &spec, &d, &q.doubled()).unwrap();
        let tol = 3.0 * coarse.err_estimate.max(fine.err_estimate);
        prop_assert!((coarse.value - fine.value).abs() <= tol, "{} vs {} (tol {tol:e})", coarse.value, fine.value);
    }

    #[test]
    fn k_profiles_are_monotone_concave_and_trivially_bounded(
        n in 2usize..=3, width in 0.5f64..3.0, bump: bool, shape in 0.2f64..3.0,
        sx in prop::sample::select(vec![1.0, 0.5, 0.0]), sy in prop::sample::select(vec![1.0, 0.5, 0.25]),
        ax in -1.0f64..1.0, ay in -1.0f64..1.0,
    ) {
        let (d, u) = member(n, width, bump, shape, 0);
        let couple = Couple { x: SpaceSpec::zero(sx, ax), y: SpaceSpec::zero(sy, ay) };
        let cfg = KConfig { t_points: 17, rho_points: 4, ..KConfig::default() };
        let p = k_profile(&u, &couple, None, &d, &QuadratureSpec::default(), &cfg).unwrap();
        let tol = p.tolerance();
        prop_assert!(p.is_monotone(tol));
        prop_assert!(p.is_concave(tol));
        prop_assert!(p.below_trivial(tol));
    }

    #[test]
    fn ratios_are_scale_invariant(
        n in 2usize..=3, width in 0.5f64..3.0, bump: bool, shape in 0.2f64..3.0, mode in 0u32..=1,
        s_p in 0.1f64..0.45, a in -0.5f64..0.5, c in 0.1f64..5.0, neg: bool,
    ) {
        let (d, u) = member(n, width, bump, shape, mode);
        let c = if neg { -c } else { c };
        let cases = [
            (InequalityKind::ClassicalHardy, CknTuple::hardy(s_p, n)),
            (InequalityKind::GeneralizedCkn, CknTuple::ckn(s_p, 0.6, a, 0.0, 0.5, 0.5, n).unwrap()),
            (InequalityKind::Interpolation, CknTuple::interpolation(s_p, -0.2 / n as f64, a, 0.0, 0.5, n).unwrap()),
        ];
        for (kind, t) in cases {
            if !validate_admissible(kind, &t).is_empty() {
                continue;
            }
            let cfg = LabConfig::default();
            let r1 = evaluate_instance(kind, &t, &u, &d, &cfg).unwrap();
            let r2 = evaluate_instance(kind, &t, &u.scaled(c), &d, &cfg).unwrap();
            assert_relative_eq!(r1.empirical_ratio, r2.empirical_ratio, max_relative = 1e-9);
        }
    }

    #[test]
    fn ckn_reduces_to_hardy(n in 3usize..=4, s_p in 0.3f64..0.9, width in 0.5f64..3.0, bump: bool, shape in 0.2f64..3.0) {
        prop_assume!(s_p > 1.0 / n as f64 + 1e-3);
        let (d, u) = member(n, width, bump, shape, 0);
        let cfg = LabConfig::default();
        let h = evaluate_instance(InequalityKind::ClassicalHardy, &CknTuple::hardy(s_p, n), &u, &d, &cfg).unwrap();
        let t = CknTuple::ckn(s_p, s_p, 0.0, 0.0, 0.0, 1.0, n).unwrap();
        let g = evaluate_instance(InequalityKind::GeneralizedCkn, &t, &u, &d, &cfg).unwrap();
        assert_relative_eq!(h.empirical_ratio, g.empirical_ratio, max_relative = 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 6, ..ProptestConfig::default() })]

    #[test]
    fn sampled_sup_does_not_drop_under_refinement(n in 2usize..=3, width in 0.5f64..3.0, shape in 0.2f64..3.0, mode in 0u32..=2, a in -1.0f64..1.0) {
        let (d, u) = member(n, width, true, shape, mode);
        let q = QuadratureSpec::default();
        let coarse = sup_norm(&u, a, &d, &q).unwrap();
        let fine = sup_norm(&u, a, &d, &q.doubled()).unwrap();
        prop_assert!(fine.value >= coarse.value * (1.0 - 1e-12), "{} < {}", fine.value, coarse.value);
    }

    #[test]
    fn estimates_are_deterministic(seed in 0u64..1000, bump: bool) {
        let d = dom(2, 1.0, 3.0);
        let fam = if bump {
            FamilySpec {
                name: "radial_bump".into(),
                params: BTreeMap::new(),
                ranges: BTreeMap::from([("sharpness".into(), ParamRange { lo: 0.3, hi: 5.0, log: true })]),
                sweep: None,
            }
        } else {
            FamilySpec {
                name: "power_bump".into(),
                params: BTreeMap::from([("cut_fraction".into(), 0.2)]),
                ranges: BTreeMap::from([("beta".into(), ParamRange { lo: -1.0, hi: 1.0, log: false })]),
                sweep: None,
            }
        };
        let opt = OptimizerConfig { samples: 6, starts: 1, max_evals: 12, seed, ..OptimizerConfig::default() };
        let t = CknTuple::ckn(0.5, 0.5, 0.0, 0.0, 0.0, 1.0, 2).unwrap();
        let cfg = LabConfig::default();
        let a = estimate_constant(InequalityKind::LocalizedHardy, &t, &fam, &d, &opt, &cfg).unwrap();
        let b = estimate_constant(InequalityKind::LocalizedHardy, &t, &fam, &d, &opt, &cfg).unwrap();
        prop_assert_eq!(a.sup_ratio.to_bits(), b.sup_ratio.to_bits());
        prop_assert_eq!(a.argmax, b.argmax);
        prop_assert!(a.evaluations.iter().all(|e| e.ratio().is_nan() || e.ratio() <= a.sup_ratio));
    }
}

#[test]
fn scalar_field_hint_defaults_to_value() {
    let d = dom(2, 1.0, 2.0);
    let u = make_radial_bump(d, 1.0).unwrap();
    let x = [1.4, 0.3];
    assert_eq!(u.value_and_hint(&x), (u.value(&x), u.value(&x)));
}
