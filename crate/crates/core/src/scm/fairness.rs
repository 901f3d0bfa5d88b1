use serde::Serialize;

use super::{
    counterfactual_event_prob, interventional, observational, FiniteSCM, Intervention, PotentialOutcomeQuery, Var,
    World, PROB_EQ_TOL,
};

/// Membership of a model in each fairness null hypothesis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct FairnessVerdicts {
    /// `f_A` is constant in `s` on every positive-probability configuration.
    pub graph_fair: bool,
    /// `P(A^{do(S=s, D=d)} = A^{do(D=d)}) = 1` for all `s, d`.
    pub ctrf_fair: bool,
    /// `P(A = 1 | do(S=s), do(D=d)) = P(A = 1 | do(D=d))` for all `s, d`.
    pub inter_fair: bool,
    /// `P(A = 1 | s, d) = P(A = 1 | d)` wherever `P(s, d) > 0`.
    pub obs_fair: bool,
    /// `P(A^{do(S=s')} | D=d, S=s) = P(A^{do(S=s)} | D=d, S=s)` wherever
    /// `P(s, d) > 0`.
    pub kusner_ctrf_fair: bool,
    /// `P(A^{do(S=s', D=d)} = 1 | D=d, S=s) = P(A^{do(S=s, D=d)} = 1 | D=d, S=s)`
    /// wherever `P(s, d) > 0`.
    pub path_dep_fair: bool,
    pub positivity_sd: bool,
    pub positivity_s: bool,
}

impl FairnessVerdicts {
    /// Implications that must hold between the verdicts of any model.
    /// Returns a description of each one that fails.
    pub fn consistency_violations(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        if self.graph_fair != self.ctrf_fair {
            out.push("graph_fair and ctrf_fair disagree");
        }
        if self.ctrf_fair && !self.inter_fair {
            out.push("ctrf_fair without inter_fair");
        }
        if self.graph_fair && !self.path_dep_fair {
            out.push("graph_fair without path_dep_fair");
        }
        if self.positivity_sd && !self.positivity_s {
            out.push("positivity_sd without positivity_s");
        }
        out
    }
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= PROB_EQ_TOL
}

fn prob(model: &FiniteSCM, interventions: Vec<Intervention>, event: &dyn Fn(&[World]) -> bool) -> f64 {
    counterfactual_event_prob(model, &PotentialOutcomeQuery { interventions, event })
        .expect("interventions are in range")
}

/// Evaluates every fairness notion on `model` by exact enumeration.
pub fn classify_fairness(model: &FiniteSCM) -> FairnessVerdicts {
    let n = model.n();
    let joint = observational(model);
    let positivity_s = (0..2).all(|s| joint.p_s(s) > 0.0);
    let positivity_sd = (0..2).all(|s| (0..n).all(|d| joint.p_sd(s, d) > 0.0));

    let configs = model.configurations();
    let graph_fair = configs.iter().all(|(u, _)| (0..n).all(|d| model.eval_a(0, d, u) == model.eval_a(1, d, u)));

    let pairs = || (0..2).flat_map(move |s| (0..n).map(move |d| (s, d)));

    let ctrf_fair = pairs().all(|(s, d)| {
        let p = prob(model, vec![Intervention::sd(s, d), Intervention::d(d)], &|w| w[0].a == w[1].a);
        close(p, 1.0)
    });

    let inter_fair = pairs().all(|(s, d)| {
        let clamped = interventional(model, Intervention::sd(s, d), &[Var::A]).expect("in range").get(&[1]);
        let natural = interventional(model, Intervention::d(d), &[Var::A]).expect("in range").get(&[1]);
        close(clamped, natural)
    });

    let observed = pairs().filter(|&(s, d)| joint.p_sd(s, d) > 0.0);

    let obs_fair = observed.clone().all(|(s, d)| {
        let given_sd = joint.prob(s, d, 1) / joint.p_sd(s, d);
        let given_d = (joint.prob(0, d, 1) + joint.prob(1, d, 1)) / joint.p_d(d);
        close(given_sd, given_d)
    });

    let kusner_ctrf_fair = observed.clone().all(|(s, d)| {
        let p_sd = joint.p_sd(s, d);
        let worlds = vec![Intervention::NONE, Intervention::s(1 - s), Intervention::s(s)];
        let switched = prob(model, worlds.clone(), &|w| w[0].s == s && w[0].d == d && w[1].a == 1);
        let kept = prob(model, worlds, &|w| w[0].s == s && w[0].d == d && w[2].a == 1);
        close(switched / p_sd, kept / p_sd)
    });

    let path_dep_fair = observed.clone().all(|(s, d)| {
        let p_sd = joint.p_sd(s, d);
        let worlds = vec![Intervention::NONE, Intervention::sd(1 - s, d), Intervention::sd(s, d)];
        let switched = prob(model, worlds.clone(), &|w| w[0].s == s && w[0].d == d && w[1].a == 1);
        let kept = prob(model, worlds, &|w| w[0].s == s && w[0].d == d && w[2].a == 1);
        close(switched / p_sd, kept / p_sd)
    });

    FairnessVerdicts {
        graph_fair,
        ctrf_fair,
        inter_fair,
        obs_fair,
        kusner_ctrf_fair,
        path_dep_fair,
        positivity_sd,
        positivity_s,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scm::{example1, example2, random_model_with, ModelClass, ModelConstraints};

    #[test]
    fn example1_with_fair_coin() {
        let v = classify_fairness(&example1(0.3, 0.5).unwrap());
        assert!(v.obs_fair && v.inter_fair);
        assert!(!v.graph_fair && !v.ctrf_fair);
        assert!(v.positivity_sd);
        assert!(v.consistency_violations().is_empty());
    }

    #[test]
    fn example1_with_biased_coin_is_not_conditionally_independent() {
        let v = classify_fairness(&example1(0.25, 0.25).unwrap());
        assert!(!v.obs_fair && !v.inter_fair && !v.graph_fair);
    }

    #[test]
    fn example1_in_confounded_class() {
        let model = example1(0.5, 0.5).unwrap().with_class(ModelClass::Confounded).unwrap();
        let v = classify_fairness(&model);
        assert!(v.inter_fair && !v.graph_fair);
    }

    #[test]
    fn example2_violates_positivity() {
        let v = classify_fairness(&example2(0.2).unwrap());
        assert!(v.obs_fair);
        assert!(!v.inter_fair);
        assert!(!v.positivity_sd && !v.positivity_s);
    }

    #[test]
    fn s_blind_model_is_fair_everywhere() {
        for class in ModelClass::ALL {
            let constraints = ModelConstraints { graph_fair: true, kusner_fair: true, ..Default::default() };
            let model = random_model_with(class, 3, 17, constraints).unwrap();
            let v = classify_fairness(&model);
            assert!(v.graph_fair && v.ctrf_fair && v.inter_fair && v.path_dep_fair && v.kusner_ctrf_fair);
            if class == ModelClass::NoConfounding {
                assert!(v.obs_fair);
            }
        }
    }
}
