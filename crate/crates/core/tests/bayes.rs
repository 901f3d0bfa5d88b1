use causal_audit::bayes::{
    clopper_pearson, dirichlet_draw, posterior_model_probability, prior_sweep, sample_simplex, DirichletSpec,
};
use causal_audit::{CategorySpace, ContingencyTable3, Error};
use causal_audit_testkit::ks_uniform_p_value;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn flat(n: usize) -> DirichletSpec {
    DirichletSpec::symmetric(1.0, 4 * n).unwrap()
}

/// Two departments, with a modest excess on the cells that push
/// `K(d0, a0 | s0) + K(d0, a1 | s1)` toward one.
fn mid_simplex() -> ContingencyTable3 {
    ContingencyTable3::new(CategorySpace::numeric(2), vec![6, 1, 2, 1, 1, 6, 2, 1]).unwrap()
}

/// `P(X >= x)` for `X ~ Binomial(n, p)`, summed term by term in log space.
fn binomial_upper(x: u64, n: u64, p: f64) -> f64 {
    let ln_choose = |k: u64| -> f64 { (1..=k).map(|i| ((n - k + i) as f64).ln() - (i as f64).ln()).sum() };
    (x..=n).map(|k| (ln_choose(k) + k as f64 * p.ln() + (n - k) as f64 * (1.0 - p).ln()).exp()).sum()
}

#[test]
fn sample_means_match_dirichlet_moments() {
    let space = CategorySpace::numeric(2);
    let params = DirichletSpec::symmetric(0.5, 8).unwrap();
    let m = 100_000;
    let mut sums = [0.0; 8];
    for seed in 0..m {
        let draw = sample_simplex(&params, &space, seed).unwrap();
        assert!((draw.probs().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        for (s, p) in sums.iter_mut().zip(draw.probs()) {
            *s += p;
        }
    }
    let (mean, total) = (0.125, 4.0);
    let sd = (mean * (1.0 - mean) / (total + 1.0) / m as f64).sqrt();
    for s in sums {
        assert!((s / m as f64 - mean).abs() < 3.0 * sd, "{}", s / m as f64);
    }
}

#[test]
fn flat_two_cell_draws_are_uniform() {
    let params = DirichletSpec::new(vec![1.0, 1.0]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut firsts: Vec<f64> = (0..10_000).map(|_| dirichlet_draw(&params, &mut rng)[0]).collect();
    assert!(ks_uniform_p_value(&mut firsts) > 0.01);
}

#[test]
fn tiny_shapes_still_normalize() {
    let params = DirichletSpec::symmetric(1e-2, 24).unwrap();
    let space = CategorySpace::numeric(6);
    for seed in 0..1000 {
        let draw = sample_simplex(&params, &space, seed).unwrap();
        assert!(draw.probs().iter().all(|p| p.is_finite()));
        assert!((draw.probs().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn draws_and_reports_are_deterministic() {
    let space = CategorySpace::numeric(3);
    let params = DirichletSpec::symmetric(2.0, 12).unwrap();
    assert_eq!(sample_simplex(&params, &space, 5).unwrap(), sample_simplex(&params, &space, 5).unwrap());

    let table = mid_simplex();
    let run = || posterior_model_probability(&table, &flat(2), 50_000, 0.95, 99, 0.0).unwrap();
    let single = format!("{:?}", run());
    let pool = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
    assert_eq!(format!("{:?}", pool.install(run)), single);
    assert_eq!(format!("{:?}", run()), single);
}

#[test]
fn violating_table_has_little_posterior_mass() {
    let n = 2;
    let table = ContingencyTable3::from_fn(n, |s, d, a| if d == 0 && a == s { 10_000 } else { 0 });
    let r = posterior_model_probability(&table, &flat(n), 20_000, 0.95, 1, 0.0).unwrap();
    assert!(r.point_estimate < 0.01, "{r:?}");
}

#[test]
fn single_draw_interval() {
    let r = posterior_model_probability(&mid_simplex(), &flat(2), 1, 0.95, 3, 0.0).unwrap();
    assert_eq!((r.ci_lower, r.ci_upper), clopper_pearson(r.n_satisfying, 1, 0.95).unwrap());
    assert!(r.ci_lower <= r.point_estimate && r.point_estimate <= r.ci_upper);
    assert!(matches!(posterior_model_probability(&mid_simplex(), &flat(2), 0, 0.95, 3, 0.0), Err(Error::Domain(_))));
}

#[test]
fn clopper_pearson_examples() {
    let (lo, hi) = clopper_pearson(1_000_000, 1_000_000, 0.95).unwrap();
    assert!((lo - (1.0 - 3.689e-6)).abs() < 1e-9);
    assert_eq!(hi, 1.0);
    let (lo, hi) = clopper_pearson(0, 10, 0.95).unwrap();
    assert_eq!(lo, 0.0);
    assert!((hi - 0.3085).abs() < 1e-4);
    assert!((binomial_upper(1, 10, hi) - 0.975).abs() < 1e-12);
    for level in [0.5, 0.9, 0.99] {
        assert_eq!(clopper_pearson(7, 7, level).unwrap().1, 1.0);
    }
    assert!(clopper_pearson(3, 2, 0.95).is_err());
    assert!(clopper_pearson(0, 0, 0.95).is_err());
    assert!(clopper_pearson(1, 2, 1.0).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 300, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn clopper_pearson_is_monotone(n in 1u64..400, x in 0u64..400, level in 0.5f64..0.999) {
        prop_assume!(x < n);
        let (lo0, hi0) = clopper_pearson(x, n, level).unwrap();
        let (lo1, hi1) = clopper_pearson(x + 1, n, level).unwrap();
        prop_assert!(lo0 <= lo1 && hi0 <= hi1);
        prop_assert!(lo0 <= x as f64 / n as f64 && x as f64 / n as f64 <= hi0);
    }

    #[test]
    fn clopper_pearson_solves_the_tail_equations(n in 1u64..200, x in 0u64..200, level in 0.8f64..0.99) {
        prop_assume!(x <= n);
        let half = (1.0 - level) / 2.0;
        let (lo, hi) = clopper_pearson(x, n, level).unwrap();
        if x > 0 {
            prop_assert!((binomial_upper(x, n, lo) - half).abs() < 1e-9);
        }
        if x < n {
            prop_assert!((1.0 - binomial_upper(x + 1, n, hi) - half).abs() < 1e-9);
        }
    }
}

#[test]
fn interval_coverage_over_seeds() {
    let table = mid_simplex();
    let reference = posterior_model_probability(&table, &flat(2), 10_000_000, 0.95, 123_456, 0.0).unwrap();
    let p = reference.point_estimate;
    assert!(p > 0.1 && p < 0.9, "reference {p}");
    let covered = (0..200)
        .filter(|&seed| {
            let r = posterior_model_probability(&table, &flat(2), 1000, 0.95, seed, 0.0).unwrap();
            r.ci_lower <= p && p <= r.ci_upper
        })
        .count();
    assert!(covered >= 180, "{covered} of 200");
}

#[test]
fn empty_table_is_prior_dominated() {
    let n = 3;
    let empty = ContingencyTable3::from_fn(n, |_, _, _| 0);
    let reports = prior_sweep(&empty, &[1e-2, 1.0, 1e2], 20_000, 0.95, 8, 0.0).unwrap();
    let estimates: Vec<f64> = reports.iter().map(|r| r.point_estimate).collect();
    // Each estimate against an independent run from a different seed.
    for (r, &alpha) in reports.iter().zip(&[1e-2, 1.0, 1e2]) {
        let prior = DirichletSpec::symmetric(alpha, 4 * n).unwrap();
        let again = posterior_model_probability(&empty, &prior, 20_000, 0.95, 1_000, 0.0).unwrap();
        let sd = (r.point_estimate * (1.0 - r.point_estimate) * 2.0 / 20_000.0).sqrt();
        assert!((again.point_estimate - r.point_estimate).abs() <= 4.0 * sd + 1e-12, "{alpha}");
    }
    // Small alpha pushes kernels to the vertices of each stratum simplex.
    assert!(estimates[0] + 0.1 < estimates[1] && estimates[1] < estimates[2], "{estimates:?}");
}

#[test]
fn singleton_sweep_matches_direct_call() {
    let table = mid_simplex();
    let sweep = prior_sweep(&table, &[1.0], 10_000, 0.95, 4, 0.0).unwrap();
    let direct = posterior_model_probability(&table, &flat(2), 10_000, 0.95, 4, 0.0).unwrap();
    assert_eq!(sweep, vec![direct]);
    assert!(prior_sweep(&table, &[], 10, 0.95, 4, 0.0).is_err());
}
