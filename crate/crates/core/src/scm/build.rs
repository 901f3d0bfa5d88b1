use super::{ExoRole, Exogenous, FiniteSCM, Mechanism, ModelClass};
use crate::error::{Error, Result};
use crate::ivcore::ResponseFunctionIVModel;
use crate::tables::JointDistribution;

fn bernoulli(name: &str, role: ExoRole, p: f64) -> Result<Exogenous> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain(format!("{name} ~ Ber({p}) needs a probability")));
    }
    Ok(Exogenous::new(name, role, vec![1.0 - p, p]))
}

/// `S = U_S ~ Ber(delta)`, `D = S xor U_D` with `U_D ~ Ber(1/2)`,
/// `A = S xor D xor U_A` with `U_A ~ Ber(eps)`.
///
/// `A` depends on `S` directly, yet `A` and `S` are independent given `D`
/// when `eps = 1/2`.
pub fn example1(delta: f64, eps: f64) -> Result<FiniteSCM> {
    let exo = vec![
        bernoulli("U_S", ExoRole::S, delta)?,
        bernoulli("U_D", ExoRole::D, 0.5)?,
        bernoulli("U_A", ExoRole::A, eps)?,
    ];
    let f_s = Mechanism::new(vec![0], vec![0, 1]);
    let f_d = Mechanism::new(vec![1], vec![0, 1, 1, 0]);
    // Index (s, d, u_a).
    let f_a = Mechanism::new(vec![2], (0..8).map(|i| (i >> 2) ^ ((i >> 1) & 1) ^ (i & 1)).collect());
    FiniteSCM::new(ModelClass::NoConfounding, 2, exo, f_s, f_d, f_a)
}

/// `S = 0`, `D = 0`, `A = S xor U_A` with `U_A ~ Ber(eps)`: positivity
/// fails, so conditional independence holds while interventional fairness
/// does not.
pub fn example2(eps: f64) -> Result<FiniteSCM> {
    let exo = vec![
        Exogenous::new("U_S", ExoRole::S, vec![1.0]),
        Exogenous::new("U_D", ExoRole::D, vec![1.0]),
        bernoulli("U_A", ExoRole::A, eps)?,
    ];
    let f_s = Mechanism::new(vec![0], vec![0]);
    let f_d = Mechanism::new(vec![1], vec![0, 0]);
    let f_a = Mechanism::new(vec![2], (0..8).map(|i| (i >> 2) ^ (i & 1)).collect());
    FiniteSCM::new(ModelClass::NoConfounding, 2, exo, f_s, f_d, f_a)
}

/// The confounded model `S = U_S`, `D = r1_U(S)`, `A = r2_U(D)` with one
/// value of the shared `U` per response pair.
pub fn from_response_model(model: &ResponseFunctionIVModel) -> Result<FiniteSCM> {
    let n = model.n;
    let k = model.weights.len();
    if k == 0 {
        return Err(Error::Model("response model has no response pairs".into()));
    }
    let exo = vec![
        Exogenous::new("U_S", ExoRole::S, model.p_instrument.to_vec()),
        Exogenous::new("U", ExoRole::Shared, model.weights.iter().map(|(_, w)| *w).collect()),
    ];
    let f_s = Mechanism::new(vec![0], vec![0, 1]);
    let f_d = Mechanism::new(vec![1], (0..2).flat_map(|s| model.weights.iter().map(move |(r, _)| r.r1[s])).collect());
    let f_a = Mechanism::new(
        vec![1],
        (0..2)
            .flat_map(|_| (0..n).flat_map(|d| model.weights.iter().map(move |(r, _)| usize::from(r.r2[d]))))
            .collect(),
    );
    FiniteSCM::new(ModelClass::Confounded, n, exo, f_s, f_d, f_a)
}

/// A no-confounding model without the `S -> A` edge whose observational
/// distribution is `joint`. Requires `A` independent of `S` given `D`.
///
/// `U_D` indexes pairs `(d0, d1)` drawn independently from `P(D | S = 0)`
/// and `P(D | S = 1)`; `U_A` indexes outcome vectors `(a_d)_d` drawn from
/// `P(A | D = d)`.
pub fn realize_markov(joint: &JointDistribution) -> Result<FiniteSCM> {
    let n = joint.space().n();
    for s in 0..2 {
        for d in 0..n {
            let lhs = joint.prob(s, d, 1) * joint.p_d(d);
            let rhs = (joint.prob(0, d, 1) + joint.prob(1, d, 1)) * joint.p_sd(s, d);
            if (lhs - rhs).abs() > 1e-9 {
                return Err(Error::Realization(format!(
                    "A and S are dependent given D = {d} (P(s={s},d,a=1) P(d) - P(d,a=1) P(s,d) = {:e})",
                    lhs - rhs
                )));
            }
        }
    }
    if n > 16 {
        return Err(Error::Realization(format!("outcome vectors over {n} mediator values are too many to enumerate")));
    }

    let p_s = [joint.p_s(0), joint.p_s(1)];
    let d_given_s = |s: usize, d: usize| if p_s[s] > 0.0 { joint.p_sd(s, d) / p_s[s] } else { f64::from(d == 0) };
    let a1_given_d = |d: usize| {
        let pd = joint.p_d(d);
        if pd > 0.0 {
            (joint.prob(0, d, 1) + joint.prob(1, d, 1)) / pd
        } else {
            0.0
        }
    };

    let u_d: Vec<f64> = (0..n * n).map(|i| d_given_s(0, i / n) * d_given_s(1, i % n)).collect();
    let u_a: Vec<f64> = (0..1usize << n)
        .map(|bits| (0..n).map(|d| if bits >> d & 1 == 1 { a1_given_d(d) } else { 1.0 - a1_given_d(d) }).product())
        .collect();
    let exo = vec![
        Exogenous::new("U_S", ExoRole::S, normalized(p_s.to_vec())),
        Exogenous::new("U_D", ExoRole::D, normalized(u_d)),
        Exogenous::new("U_A", ExoRole::A, normalized(u_a)),
    ];
    let f_s = Mechanism::new(vec![0], vec![0, 1]);
    let f_d = Mechanism::new(
        vec![1],
        (0..2).flat_map(|s| (0..n * n).map(move |i| if s == 0 { i / n } else { i % n })).collect(),
    );
    let f_a = Mechanism::new(
        vec![2],
        (0..2 * n).flat_map(|sd| (0..1usize << n).map(move |bits| bits >> (sd % n) & 1)).collect(),
    );
    FiniteSCM::new(ModelClass::NoConfounding, n, exo, f_s, f_d, f_a)
}

/// Removes rounding drift so the pmf passes validation.
fn normalized(mut pmf: Vec<f64>) -> Vec<f64> {
    let total: f64 = pmf.iter().sum();
    pmf.iter_mut().for_each(|p| *p /= total);
    pmf
}
