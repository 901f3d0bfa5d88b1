use causal_audit::bounds::{cde_bounds, cde_zero_compatible, nde_bounds_binary, nde_point};
use causal_audit::ivcore::{enumerate_extreme_points, iv_slacks};
use causal_audit::scm::{
    controlled_direct_effect, natural_direct_effect, observational, random_model_with, ModelClass, ModelConstraints,
    Positivity,
};
use causal_audit::{conditional_kernel, CategorySpace, ConditionalKernel, JointDistribution};
use causal_audit_testkit::{cde_range_by_lp, random_kernel};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, failure_persistence: None, ..ProptestConfig::default() }
}

fn with_positivity(p: Positivity) -> ModelConstraints {
    ModelConstraints { positivity: p, ..ModelConstraints::default() }
}

#[test]
fn four_mass_example_is_sharp() {
    // K(0,1|1)=0.3, K(0,0|0)=0.4, K(0,0|1)=0.2, K(0,1|0)=0.1
    let k = ConditionalKernel::from_fn(2, |s, d, a| match (s, d, a) {
        (1, 0, 1) => 0.3,
        (1, 0, 0) => 0.2,
        (0, 0, 0) => 0.4,
        (0, 0, 1) => 0.1,
        (_, 1, 0) => 0.25,
        (1, 1, 1) => 0.25,
        _ => 0.25,
    })
    .unwrap();
    let b = cde_bounds(&k, 0).unwrap();
    assert!((b.lower + 0.3).abs() < 1e-15 && (b.upper - 0.7).abs() < 1e-15);
    let (lo, hi) = cde_range_by_lp(&k, 0).unwrap();
    assert!((lo - b.lower).abs() < 1e-9 && (hi - b.upper).abs() < 1e-9, "LP range [{lo}, {hi}]");
}

#[test]
fn zero_compatibility_on_vertices() {
    for n in 2..6 {
        for p in enumerate_extreme_points(n).unwrap() {
            let k = p.kernel(n).unwrap();
            assert!(cde_zero_compatible(&k));
            assert!(iv_slacks(&k, 0.0).satisfied);
        }
    }
}

#[test]
fn zero_compatibility_matches_slacks_on_random_kernels() {
    let mut rng = ChaCha8Rng::seed_from_u64(10_000);
    let mut disagreements = 0;
    for i in 0..10_000 {
        let k = random_kernel(2 + i % 5, &mut rng);
        if cde_zero_compatible(&k) != iv_slacks(&k, 0.0).satisfied {
            disagreements += 1;
        }
    }
    assert_eq!(disagreements, 0);
}

proptest! {
    #![proptest_config(config(60))]

    #[test]
    fn closed_form_matches_lp_range(seed in any::<u64>(), n in 2usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let k = random_kernel(n, &mut rng);
        let d = rng.random_range(0..n);
        let range = cde_range_by_lp(&k, d);
        if iv_slacks(&k, 1e-9).satisfied {
            let (lo, hi) = range.expect("compatible kernels admit a response mixture");
            let b = cde_bounds(&k, d).unwrap();
            prop_assert!((lo - b.lower).abs() < 1e-9 && (hi - b.upper).abs() < 1e-9);
        }
    }
}

proptest! {
    #![proptest_config(config(500))]

    #[test]
    fn oracle_cde_inside_bounds(seed in any::<u64>(), n in 2usize..4) {
        let model = random_model_with(ModelClass::Confounded, n, seed, with_positivity(Positivity::S)).unwrap();
        let kernel = conditional_kernel(&observational(&model)).unwrap();
        for d in 0..n {
            let cde = controlled_direct_effect(&model, d).unwrap();
            prop_assert!(cde_bounds(&kernel, d).unwrap().contains(cde, 1e-12), "d={d} cde={cde}");
        }
    }

    #[test]
    fn mediation_formula_matches_oracle(seed in any::<u64>(), n in 2usize..4) {
        let model = random_model_with(ModelClass::NoConfounding, n, seed, with_positivity(Positivity::Sd)).unwrap();
        let joint = observational(&model);
        for (s, t) in [(0, 1), (1, 0)] {
            let oracle = natural_direct_effect(&model, s, t).unwrap();
            prop_assert!((nde_point(&joint, s, t).unwrap() - oracle).abs() < 1e-12);
        }
    }

    #[test]
    fn bounds_are_lipschitz(seed in any::<u64>(), n in 2usize..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (k1, k2) = (random_kernel(n, &mut rng), random_kernel(n, &mut rng));
        for d in 0..n {
            let moved: f64 = (0..2).flat_map(|s| (0..2).map(move |a| (s, a)))
                .map(|(s, a)| (k1.get(s, d, a) - k2.get(s, d, a)).abs())
                .sum();
            let (b1, b2) = (cde_bounds(&k1, d).unwrap(), cde_bounds(&k2, d).unwrap());
            prop_assert!((b1.lower - b2.lower).abs() <= moved + 1e-12);
            prop_assert!((b1.upper - b2.upper).abs() <= moved + 1e-12);
        }
    }

    #[test]
    fn nde_is_antisymmetric_with_a_shared_mediator(seed in any::<u64>(), n in 2usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ps: f64 = rng.random_range(0.1..0.9);
        let raw: Vec<f64> = (0..n).map(|_| rng.random_range(0.1..1.0)).collect();
        let total: f64 = raw.iter().sum();
        let rates: Vec<[f64; 2]> = (0..n).map(|_| [rng.random(), rng.random()]).collect();
        let space = CategorySpace::numeric(n);
        let probs = space.triples().map(|(s, d, a)| {
            let p_s = if s == 0 { ps } else { 1.0 - ps };
            let r = rates[d][s];
            p_s * raw[d] / total * if a == 1 { r } else { 1.0 - r }
        }).collect();
        let joint = JointDistribution::new(space, probs).unwrap();
        let forward = nde_point(&joint, 0, 1).unwrap();
        let backward = nde_point(&joint, 1, 0).unwrap();
        prop_assert!((forward + backward).abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(config(1000))]

    #[test]
    fn oracle_nde_inside_binary_bounds(seed in any::<u64>()) {
        let model = random_model_with(ModelClass::Confounded, 2, seed, with_positivity(Positivity::S)).unwrap();
        let kernel = conditional_kernel(&observational(&model)).unwrap();
        for s in 0..2 {
            let nde = natural_direct_effect(&model, s, 1 - s).unwrap();
            let b = nde_bounds_binary(&kernel, s).unwrap();
            prop_assert!(b.contains(nde, 1e-12), "s={s} nde={nde} bounds={b:?}");
        }
    }

    #[test]
    fn compatible_kernels_allow_zero_nde(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let k = random_kernel(2, &mut rng);
        if iv_slacks(&k, 0.0).satisfied {
            for s in 0..2 {
                prop_assert!(nde_bounds_binary(&k, s).unwrap().contains_zero);
            }
        }
    }
}
