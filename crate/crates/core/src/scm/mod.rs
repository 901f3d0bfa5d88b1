//! Finite structural causal models over `S -> D -> A`, evaluated by exact
//! enumeration of the exogenous product space.
//!
//! Mechanism tables are row-major over the endogenous parents (`S`, then
//! `D`) followed by the exogenous variables listed in `reads`, the first
//! listed variable being the most significant digit.

mod build;
mod fairness;
mod random;
mod text;

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::tables::{CategorySpace, JointDistribution};

pub use build::{example1, example2, from_response_model, realize_markov};
pub use fairness::{classify_fairness, FairnessVerdicts};
pub use random::{random_model, random_model_with, ModelConstraints, Positivity};
pub use text::parse_generator;

/// Tolerance for probability equalities inside the fairness classifiers.
pub const PROB_EQ_TOL: f64 = 1e-12;

/// Upper bound on the size of the exogenous product space.
pub const MAX_CONFIGS: usize = 1 << 22;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum ModelClass {
    /// `S = f_S(U_S)`, `D = f_D(S, U_D)`, `A = f_A(S, D, U_A)`.
    NoConfounding,
    /// Adds a shared `U` read by both `f_D` and `f_A`.
    Confounded,
    /// Additionally lets `f_S` and `f_D` share `U_SD`.
    ConfoundedSd,
}

impl ModelClass {
    pub const ALL: [ModelClass; 3] = [ModelClass::NoConfounding, ModelClass::Confounded, ModelClass::ConfoundedSd];

    pub fn tag(self) -> &'static str {
        match self {
            ModelClass::NoConfounding => "no-cf",
            ModelClass::Confounded => "cf",
            ModelClass::ConfoundedSd => "cf+sd",
        }
    }

    /// Whether every model of `self` is also a model of `other`.
    pub fn is_within(self, other: ModelClass) -> bool {
        self.rank() <= other.rank()
    }

    fn rank(self) -> u8 {
        match self {
            ModelClass::NoConfounding => 0,
            ModelClass::Confounded => 1,
            ModelClass::ConfoundedSd => 2,
        }
    }

    fn may_read(self, var: Var, role: ExoRole) -> bool {
        use ExoRole::*;
        let confounded = self != ModelClass::NoConfounding;
        let sd = self == ModelClass::ConfoundedSd;
        match (var, role) {
            (Var::S, S) | (Var::D, D) | (Var::A, A) => true,
            (Var::D | Var::A, Shared) => confounded,
            (Var::S | Var::D, Sd) => sd,
            _ => false,
        }
    }
}

impl fmt::Display for ModelClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for ModelClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ModelClass::ALL
            .into_iter()
            .find(|c| c.tag() == s)
            .ok_or_else(|| Error::Model(format!("unknown model class {s:?} (expected no-cf, cf or cf+sd)")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Var {
    S,
    D,
    A,
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Var::S => "S",
            Var::D => "D",
            Var::A => "A",
        })
    }
}

/// Which mechanisms an exogenous variable may feed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum ExoRole {
    S,
    D,
    A,
    /// Shared by `D` and `A` (latent mediator-outcome confounding).
    Shared,
    /// Shared by `S` and `D`.
    Sd,
}

impl ExoRole {
    pub fn tag(self) -> &'static str {
        match self {
            ExoRole::S => "s",
            ExoRole::D => "d",
            ExoRole::A => "a",
            ExoRole::Shared => "shared",
            ExoRole::Sd => "sd",
        }
    }
}

impl FromStr for ExoRole {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [ExoRole::S, ExoRole::D, ExoRole::A, ExoRole::Shared, ExoRole::Sd]
            .into_iter()
            .find(|r| r.tag() == s)
            .ok_or_else(|| Error::Model(format!("unknown exogenous role {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Exogenous {
    pub name: String,
    pub role: ExoRole,
    pub pmf: Vec<f64>,
}

impl Exogenous {
    pub fn new(name: impl Into<String>, role: ExoRole, pmf: Vec<f64>) -> Self {
        Self { name: name.into(), role, pmf }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Mechanism {
    /// Indices into [`FiniteSCM::exogenous`].
    pub reads: Vec<usize>,
    pub table: Vec<usize>,
}

impl Mechanism {
    pub fn new(reads: Vec<usize>, table: Vec<usize>) -> Self {
        Self { reads, table }
    }

    #[inline]
    fn eval(&self, parent_index: usize, u: &[usize], sizes: &[usize]) -> usize {
        let mut idx = parent_index;
        for &r in &self.reads {
            idx = idx * sizes[r] + u[r];
        }
        self.table[idx]
    }
}

/// Hard intervention on a subset of `{S, D}`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize)]
pub struct Intervention {
    pub s: Option<usize>,
    pub d: Option<usize>,
}

impl Intervention {
    /// The empty intervention: the factual world.
    pub const NONE: Intervention = Intervention { s: None, d: None };

    pub fn s(s: usize) -> Self {
        Self { s: Some(s), d: None }
    }

    pub fn d(d: usize) -> Self {
        Self { s: None, d: Some(d) }
    }

    pub fn sd(s: usize, d: usize) -> Self {
        Self { s: Some(s), d: Some(d) }
    }
}

/// Values of the endogenous variables in one (possibly intervened) world.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct World {
    pub s: usize,
    pub d: usize,
    pub a: usize,
}

/// Joint potential outcomes under several interventions sharing one draw
/// of the exogenous variables.
pub struct PotentialOutcomeQuery<'a> {
    pub interventions: Vec<Intervention>,
    /// Receives one world per intervention, in order.
    pub event: &'a dyn Fn(&[World]) -> bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FiniteSCM {
    class: ModelClass,
    n: usize,
    exogenous: Vec<Exogenous>,
    f_s: Mechanism,
    f_d: Mechanism,
    f_a: Mechanism,
}

impl FiniteSCM {
    pub fn new(
        class: ModelClass,
        n: usize,
        exogenous: Vec<Exogenous>,
        f_s: Mechanism,
        f_d: Mechanism,
        f_a: Mechanism,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::Model("the mediator needs at least one value".into()));
        }
        let mut configs: usize = 1;
        for exo in &exogenous {
            if exo.pmf.is_empty() {
                return Err(Error::Model(format!("{} has empty support", exo.name)));
            }
            if exo.pmf.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
                return Err(Error::Model(format!("{} has a negative or non-finite mass", exo.name)));
            }
            let total: f64 = exo.pmf.iter().sum();
            if (total - 1.0).abs() > 1e-12 {
                return Err(Error::Model(format!("pmf of {} sums to {total}", exo.name)));
            }
            configs = configs
                .checked_mul(exo.pmf.len())
                .filter(|&c| c <= MAX_CONFIGS)
                .ok_or_else(|| Error::Model(format!("exogenous space exceeds {MAX_CONFIGS} configurations")))?;
        }
        let mut names = std::collections::HashSet::new();
        if let Some(exo) = exogenous.iter().find(|e| !names.insert(e.name.as_str())) {
            return Err(Error::Model(format!("duplicate exogenous name {}", exo.name)));
        }
        for (var, mech, parents, range) in [(Var::S, &f_s, 1, 2), (Var::D, &f_d, 2, n), (Var::A, &f_a, 2 * n, 2)] {
            let mut seen = std::collections::HashSet::new();
            let mut rows = parents;
            for &r in &mech.reads {
                let exo = exogenous
                    .get(r)
                    .ok_or_else(|| Error::Model(format!("f_{var} reads unknown exogenous index {r}")))?;
                if !seen.insert(r) {
                    return Err(Error::Model(format!("f_{var} reads {} twice", exo.name)));
                }
                if !class.may_read(var, exo.role) {
                    return Err(Error::Model(format!(
                        "class {class} does not let f_{var} read {} (role {})",
                        exo.name,
                        exo.role.tag()
                    )));
                }
                rows *= exo.pmf.len();
            }
            if mech.table.len() != rows {
                return Err(Error::Model(format!("f_{var} table has {} entries, expected {rows}", mech.table.len())));
            }
            if let Some(v) = mech.table.iter().find(|&&v| v >= range) {
                return Err(Error::Model(format!("f_{var} outputs {v}, outside 0..{range}")));
            }
        }
        Ok(Self { class, n, exogenous, f_s, f_d, f_a })
    }

    pub fn class(&self) -> ModelClass {
        self.class
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn exogenous(&self) -> &[Exogenous] {
        &self.exogenous
    }

    pub fn mechanism(&self, var: Var) -> &Mechanism {
        match var {
            Var::S => &self.f_s,
            Var::D => &self.f_d,
            Var::A => &self.f_a,
        }
    }

    /// The same model viewed as a member of a larger class.
    pub fn with_class(mut self, class: ModelClass) -> Result<Self> {
        if !self.class.is_within(class) {
            return Err(Error::Model(format!("a {} model is not a {class} model", self.class)));
        }
        self.class = class;
        Ok(self)
    }

    /// Replaces one mechanism, revalidating the model.
    pub fn with_mechanism(&self, var: Var, mech: Mechanism) -> Result<Self> {
        let mut parts = (self.f_s.clone(), self.f_d.clone(), self.f_a.clone());
        match var {
            Var::S => parts.0 = mech,
            Var::D => parts.1 = mech,
            Var::A => parts.2 = mech,
        }
        Self::new(self.class, self.n, self.exogenous.clone(), parts.0, parts.1, parts.2)
    }

    fn sizes(&self) -> Vec<usize> {
        self.exogenous.iter().map(|e| e.pmf.len()).collect()
    }

    /// All exogenous configurations with positive probability.
    pub fn configurations(&self) -> Vec<(Vec<usize>, f64)> {
        let sizes = self.sizes();
        let mut out = Vec::new();
        let mut u = vec![0usize; sizes.len()];
        loop {
            let p: f64 = u.iter().zip(&self.exogenous).map(|(&v, e)| e.pmf[v]).product();
            if p > 0.0 {
                out.push((u.clone(), p));
            }
            // Odometer increment, last variable fastest.
            let mut k = sizes.len();
            loop {
                if k == 0 {
                    return out;
                }
                k -= 1;
                u[k] += 1;
                if u[k] < sizes[k] {
                    break;
                }
                u[k] = 0;
            }
        }
    }

    /// Solves the structural equations for one exogenous configuration.
    pub fn solve(&self, u: &[usize], intervention: Intervention) -> World {
        let sizes = self.sizes();
        self.solve_with(u, intervention, &sizes)
    }

    #[inline]
    fn solve_with(&self, u: &[usize], iv: Intervention, sizes: &[usize]) -> World {
        let s = iv.s.unwrap_or_else(|| self.f_s.eval(0, u, sizes));
        let d = iv.d.unwrap_or_else(|| self.f_d.eval(s, u, sizes));
        let a = self.f_a.eval(s * self.n + d, u, sizes);
        World { s, d, a }
    }

    /// `f_A(s, d, u)` for a full exogenous configuration.
    pub fn eval_a(&self, s: usize, d: usize, u: &[usize]) -> usize {
        self.f_a.eval(s * self.n + d, u, &self.sizes())
    }

    fn check(&self, iv: Intervention) -> Result<()> {
        if iv.s.is_some_and(|s| s > 1) {
            return Err(Error::Domain(format!("intervention value S = {} is not binary", iv.s.unwrap())));
        }
        if iv.d.is_some_and(|d| d >= self.n) {
            return Err(Error::Domain(format!("intervention value D = {} is outside 0..{}", iv.d.unwrap(), self.n)));
        }
        Ok(())
    }

    /// Full `(s, d, a)` distribution of the intervened model.
    fn joint_under(&self, iv: Intervention) -> Vec<f64> {
        let space = CategorySpace::numeric(self.n);
        let sizes = self.sizes();
        let mut probs = vec![0.0; space.cells()];
        for (u, p) in self.configurations() {
            let w = self.solve_with(&u, iv, &sizes);
            probs[space.index(w.s, w.d, w.a)] += p;
        }
        probs
    }
}

/// The observational distribution of `model`.
pub fn observational(model: &FiniteSCM) -> JointDistribution {
    let probs = model.joint_under(Intervention::NONE);
    JointDistribution::new(CategorySpace::numeric(model.n), probs).expect("pushforward of a distribution")
}

/// A distribution over a subset of `{S, D, A}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Marginal {
    pub vars: Vec<Var>,
    pub dims: Vec<usize>,
    /// Row-major over `vars`.
    pub probs: Vec<f64>,
}

impl Marginal {
    pub fn get(&self, values: &[usize]) -> f64 {
        assert_eq!(values.len(), self.vars.len(), "one value per queried variable");
        let idx = values.iter().zip(&self.dims).fold(0, |acc, (&v, &dim)| {
            assert!(v < dim, "value out of range");
            acc * dim + v
        });
        self.probs[idx]
    }
}

/// Distribution of `query` under `do(intervention)`.
pub fn interventional(model: &FiniteSCM, intervention: Intervention, query: &[Var]) -> Result<Marginal> {
    model.check(intervention)?;
    let mut seen = std::collections::HashSet::new();
    if let Some(v) = query.iter().find(|v| !seen.insert(**v)) {
        return Err(Error::Domain(format!("variable {v} queried twice")));
    }
    let full = model.joint_under(intervention);
    let space = CategorySpace::numeric(model.n);
    let dims: Vec<usize> = query.iter().map(|v| if *v == Var::D { model.n } else { 2 }).collect();
    let mut probs = vec![0.0; dims.iter().product()];
    for (s, d, a) in space.triples() {
        let idx = query.iter().zip(&dims).fold(0, |acc, (v, &dim)| {
            acc * dim
                + match v {
                    Var::S => s,
                    Var::D => d,
                    Var::A => a,
                }
        });
        probs[idx] += full[space.index(s, d, a)];
    }
    Ok(Marginal { vars: query.to_vec(), dims, probs })
}

/// Probability that the joint potential outcomes satisfy the event.
pub fn counterfactual_event_prob(model: &FiniteSCM, query: &PotentialOutcomeQuery<'_>) -> Result<f64> {
    if query.interventions.is_empty() {
        return Err(Error::Domain("a potential-outcome query needs at least one intervention".into()));
    }
    for iv in &query.interventions {
        model.check(*iv)?;
    }
    let sizes = model.sizes();
    let mut worlds = Vec::with_capacity(query.interventions.len());
    let mut total = 0.0;
    for (u, p) in model.configurations() {
        worlds.clear();
        worlds.extend(query.interventions.iter().map(|iv| model.solve_with(&u, *iv, &sizes)));
        if (query.event)(&worlds) {
            total += p;
        }
    }
    Ok(total)
}

/// `P(A^{do(S = s_to, D = D^{do(S = s_from)})} = 1) - P(A^{do(S = s_from)} = 1)`
/// by enumeration of the nested counterfactual.
pub fn natural_direct_effect(model: &FiniteSCM, s_from: usize, s_to: usize) -> Result<f64> {
    let n = model.n();
    let mut interventions = vec![Intervention::s(s_from)];
    interventions.extend((0..n).map(|d| Intervention::sd(s_to, d)));
    let switched = counterfactual_event_prob(
        model,
        &PotentialOutcomeQuery { interventions, event: &|w: &[World]| w[1 + w[0].d].a == 1 },
    )?;
    let baseline = interventional(model, Intervention::s(s_from), &[Var::A])?.get(&[1]);
    Ok(switched - baseline)
}

/// `P(A = 1 | do(S = 1), do(D = d)) - P(A = 1 | do(S = 0), do(D = d))`.
pub fn controlled_direct_effect(model: &FiniteSCM, d: usize) -> Result<f64> {
    let p1 = interventional(model, Intervention::sd(1, d), &[Var::A])?.get(&[1]);
    let p0 = interventional(model, Intervention::sd(0, d), &[Var::A])?.get(&[1]);
    Ok(p1 - p0)
}
