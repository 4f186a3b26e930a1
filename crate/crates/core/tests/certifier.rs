//! Structural properties of the certifier output.

mod common;

use common::{random_problem, toy};
use probsafe::certify::{
    certify_sample_set, check_rectangle, gaussian_box_mass, union_bound, CertifyConfig, Method,
};
use probsafe::lbp::McCormickVariant;
use probsafe::model::sample_weights_stream;
use probsafe::{certify, certify_union, InputRegion, MarginSemantics};
use proptest::prelude::*;

fn method(ibp: bool) -> Method {
    if ibp {
        Method::Ibp
    } else {
        Method::Lbp
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn result_is_a_disjoint_certified_set(seed in any::<u64>(), ibp in any::<bool>(), cap in 1usize..24) {
        let p = random_problem(seed);
        let mut cfg = CertifyConfig::new(40, p.gamma, method(ibp), seed);
        cfg.max_fragments = cap;
        let r = certify(&p.model, &p.t, &p.spec, &cfg).unwrap();
        prop_assert_eq!(r.accepted + r.rejected, 40);
        prop_assert_eq!(r.safe_set.first_overlap(), None);
        prop_assert_eq!(r.per_box_mass.len(), r.safe_set.len());
        let mut sum = 0.0;
        for (b, m) in r.safe_set.rectangles().iter().zip(&r.per_box_mass) {
            prop_assert_eq!(*m, gaussian_box_mass(&p.model, b).unwrap());
            sum += m;
        }
        prop_assert_eq!(r.p_lower, sum.min(1.0));
        prop_assert!((0.0..=1.0).contains(&r.p_lower));
        if r.accepted == 0 {
            prop_assert_eq!(r.p_lower, 0.0);
        }
        // Every piece is a sub-box of an accepted rectangle, so interval
        // propagation, which is inclusion monotone, certifies it directly.
        if ibp {
            for b in r.safe_set.rectangles().iter().take(10) {
                let out = check_rectangle(&p.model, &p.t, b, &p.spec, Method::Ibp, McCormickVariant::Lower).unwrap();
                prop_assert!(out.is_safe());
            }
        }
    }

    #[test]
    fn more_samples_never_lower_the_bound(seed in any::<u64>(), ibp in any::<bool>(), n in 5usize..40, extra in 1usize..40) {
        let p = random_problem(seed);
        let small = certify(&p.model, &p.t, &p.spec, &CertifyConfig::new(n, p.gamma, method(ibp), seed)).unwrap();
        let large = certify(&p.model, &p.t, &p.spec, &CertifyConfig::new(n + extra, p.gamma, method(ibp), seed)).unwrap();
        prop_assert!(large.p_lower >= small.p_lower);
        prop_assert!(large.accepted >= small.accepted);
        // The earlier pieces are kept unchanged.
        prop_assert_eq!(&large.safe_set.rectangles()[..small.safe_set.len()], small.safe_set.rectangles());
    }

    #[test]
    fn union_of_one_box_is_the_box(seed in any::<u64>()) {
        let p = random_problem(seed);
        let cfg = CertifyConfig::new(20, p.gamma, Method::Ibp, seed);
        let one = certify(&p.model, &p.t, &p.spec, &cfg).unwrap();
        let u = certify_union(&p.model, &InputRegion::single(p.t.clone()), &p.spec, &cfg).unwrap();
        prop_assert_eq!(u.p_lower, one.p_lower);
    }

    #[test]
    fn union_bound_matches_the_formula(ps in prop::collection::vec(0.0f64..=1.0, 2..6)) {
        let expected = ps.iter().fold(1.0, |acc, p| acc - (1.0 - p)).max(0.0);
        prop_assert_eq!(union_bound(&ps), expected);
        prop_assert!(union_bound(&ps) <= ps.iter().cloned().fold(1.0, f64::min));
    }
}

#[test]
fn zero_margin_certifies_nothing_of_positive_mass() {
    let (model, t, spec) = toy();
    let r = certify(&model, &t, &spec, &CertifyConfig::new(10, 0.0, Method::Ibp, 0)).unwrap();
    assert_eq!(r.p_lower, 0.0);
}

#[test]
fn repeated_runs_agree_exactly() {
    let p = random_problem(17);
    for m in [Method::Ibp, Method::Lbp] {
        let cfg = CertifyConfig::new(30, p.gamma, m, 3);
        let a = certify(&p.model, &p.t, &p.spec, &cfg).unwrap();
        let b = certify(&p.model, &p.t, &p.spec, &cfg).unwrap();
        assert_eq!(a.safe_set, b.safe_set);
        assert_eq!(a.p_lower.to_bits(), b.p_lower.to_bits());
    }
}

#[test]
fn variance_semantics_scales_by_variance() {
    let p = random_problem(5);
    let mut cfg = CertifyConfig::new(10, 2.0, Method::Ibp, 1);
    cfg.margin_semantics = MarginSemantics::Variance;
    let r = certify(&p.model, &p.t, &p.spec, &cfg).unwrap();
    let var = p.model.variance_vector();
    let w = sample_weights_stream(&p.model, 1, 0);
    if let Some(first) = r.safe_set.rectangles().first() {
        for ((iv, v), c) in first.iter().zip(&var).zip(w.values()) {
            assert!((iv.width() - 4.0 * v).abs() <= 1e-12 && iv.contains(*c));
        }
    }
}

#[test]
fn sample_set_mass_tracks_the_exact_mass() {
    let p = (0..).map(random_problem).find(|p| p.gamma >= 4.0).unwrap();
    let cfg = CertifyConfig::new(30, p.gamma, Method::Ibp, 2);
    let exact = certify(&p.model, &p.t, &p.spec, &cfg).unwrap();
    let proposals: Vec<_> = (0..30).map(|i| sample_weights_stream(&p.model, 2, i)).collect();
    let integration: Vec<_> = (0..20_000).map(|i| sample_weights_stream(&p.model, 99, i)).collect();
    let est = certify_sample_set(&p.model, &proposals, &integration, &p.t, &p.spec, &cfg).unwrap();
    let se = est.standard_error.unwrap();
    assert!(exact.p_lower > 0.1, "{}", exact.p_lower);
    // The rectangles are sized from empirical moments, so they differ
    // slightly from the exact ones; allow for that on top of sampling error.
    assert!((est.p_lower - exact.p_lower).abs() <= 4.0 * se + 0.05, "{} vs {}", est.p_lower, exact.p_lower);
}
