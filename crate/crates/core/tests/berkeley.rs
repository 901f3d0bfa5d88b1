//! The bundled six-department admissions table.

use causal_audit::bayes::{clopper_pearson, posterior_model_probability, posterior_params, prior_sweep, DirichletSpec};
use causal_audit::freq::{demographic_parity_2x2, ml_iv_check, wrr_test};
use causal_audit::{parse_long_csv, ContingencyTable3};

fn berkeley() -> ContingencyTable3 {
    let text = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/ucb_admissions.csv")).unwrap();
    parse_long_csv(&text, None).unwrap()
}

#[test]
fn shape_and_coding() {
    let t = berkeley();
    assert_eq!(t.space().n(), 6);
    assert_eq!(t.counts().len(), 24);
    assert_eq!(t.total(), 4526);
    assert_eq!(t.space().s_labels()[0], "Male");
    assert_eq!(t.space().a_labels()[1], "Admitted");
    assert_eq!(t.count(0, 0, 1), 512);
}

#[test]
fn flat_posterior_parameters() {
    let t = berkeley();
    let post = posterior_params(&t, &DirichletSpec::symmetric(1.0, 24).unwrap()).unwrap();
    for (p, c) in post.alpha().iter().zip(t.counts()) {
        assert_eq!(*p, *c as f64 + 1.0);
    }
    assert_eq!(post.alpha().iter().sum::<f64>(), (t.total() + 24) as f64);
}

#[test]
fn ml_estimate_is_compatible() {
    let r = ml_iv_check(&berkeley()).unwrap();
    assert!(r.satisfied);
    assert!(r.max_lhs < 1.0);
}

#[test]
fn wrr_gammas_are_strongly_negative() {
    let r = wrr_test(&berkeley(), 0.05).unwrap();
    assert_eq!(r.tests.len(), 12);
    for t in &r.tests {
        assert!(t.gamma_hat < -0.6, "{t:?}");
        assert!(!t.challenged && !t.reject);
        assert_eq!(t.association_p, 0.0, "{t:?}");
        assert!(t.association_p_underflow);
    }
    assert!(!r.reject);
}

#[test]
fn posterior_never_violates() {
    let t = berkeley();
    let prior = DirichletSpec::symmetric(1.0, 24).unwrap();
    let r = posterior_model_probability(&t, &prior, 200_000, 0.95, 11, 0.0).unwrap();
    assert_eq!(r.n_satisfying, r.n_samples);
    let (lo, hi) = clopper_pearson(200_000, 200_000, 0.95).unwrap();
    assert_eq!((r.ci_lower, r.ci_upper), (lo, hi));
}

#[test]
fn tolerance_changes_almost_nothing() {
    let t = berkeley();
    let prior = DirichletSpec::symmetric(1.0, 24).unwrap();
    let exact = posterior_model_probability(&t, &prior, 100_000, 0.95, 3, 0.0).unwrap();
    let loose = posterior_model_probability(&t, &prior, 100_000, 0.95, 3, 1e-12).unwrap();
    assert!(loose.n_satisfying - exact.n_satisfying <= 10);
}

#[test]
fn sweep_lower_limits_agree() {
    let reports = prior_sweep(&berkeley(), &[1e-2, 1.0, 1e2, 1e5], 20_000, 0.95, 5, 0.0).unwrap();
    for r in &reports {
        assert_eq!(r.n_satisfying, r.n_samples, "alpha {:?}", r.prior_alpha);
        assert_eq!(r.ci_lower, reports[0].ci_lower);
    }
}

#[test]
fn campus_wide_parity_fails() {
    // 8442 men at 44.2% and 4321 women at 34.6%, rounded to whole applicants.
    let men_admitted = (8442.0f64 * 0.442).round() as u64;
    let women_admitted = (4321.0f64 * 0.346).round() as u64;
    assert_eq!((men_admitted, women_admitted), (3731, 1495));
    let r =
        demographic_parity_2x2([[8442 - men_admitted, men_admitted], [4321 - women_admitted, women_admitted]], 0.05)
            .unwrap();
    assert!(r.p_value < 1e-6 && r.reject);
    assert!(r.statistic > 100.0);
}
