use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{observational, ExoRole, Exogenous, FiniteSCM, Mechanism, ModelClass};
use crate::error::{Error, Result};

/// Largest exogenous support drawn by the generator.
pub const MAX_SUPPORT: usize = 4;

/// Resolution of the generated pmfs: every mass is a multiple of `1/16`,
/// so products and sums of masses are exact in `f64`.
const PMF_UNITS: u32 = 16;

const MAX_ATTEMPTS: u64 = 10_000;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum Positivity {
    #[default]
    Any,
    /// `P(S = s) > 0` for both `s`.
    S,
    /// `P(S = s, D = d) > 0` for every cell.
    Sd,
}

/// Restrictions imposed on generated models.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ModelConstraints {
    /// `f_A` ignores `S`.
    pub graph_fair: bool,
    /// Both `f_D` and `f_A` ignore `S`.
    pub kusner_fair: bool,
    pub positivity: Positivity,
}

/// A random model of `class` with an `n`-valued mediator; a pure function
/// of its arguments.
pub fn random_model(class: ModelClass, n: usize, seed: u64) -> FiniteSCM {
    random_model_with(class, n, seed, ModelConstraints::default()).expect("unconstrained generation succeeds")
}

/// Like [`random_model`], redrawing from derived seeds until the positivity
/// constraint holds.
pub fn random_model_with(class: ModelClass, n: usize, seed: u64, constraints: ModelConstraints) -> Result<FiniteSCM> {
    if n < 2 {
        return Err(Error::Domain(format!("random models need n >= 2, got {n}")));
    }
    let class_salt = match class {
        ModelClass::NoConfounding => 0x6e6f_6366,
        ModelClass::Confounded => 0x6366_0000,
        ModelClass::ConfoundedSd => 0x6366_7364,
    };
    for attempt in 0..MAX_ATTEMPTS {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ class_salt ^ ((n as u64) << 48));
        rng.set_stream(attempt);
        let model = draw(class, n, constraints, &mut rng);
        let joint = observational(&model);
        let ok = match constraints.positivity {
            Positivity::Any => true,
            Positivity::S => (0..2).all(|s| joint.p_s(s) > 0.0),
            Positivity::Sd => (0..2).all(|s| (0..n).all(|d| joint.p_sd(s, d) > 0.0)),
        };
        if ok {
            return Ok(model);
        }
    }
    Err(Error::Model(format!("no model satisfying {constraints:?} after {MAX_ATTEMPTS} draws")))
}

/// A pmf on `k` points with masses in multiples of `1/16`.
fn dyadic_pmf(k: usize, rng: &mut impl Rng) -> Vec<f64> {
    let mut cuts: Vec<u32> = (0..k - 1).map(|_| rng.random_range(0..=PMF_UNITS)).collect();
    cuts.push(0);
    cuts.push(PMF_UNITS);
    cuts.sort_unstable();
    cuts.windows(2).map(|w| f64::from(w[1] - w[0]) / f64::from(PMF_UNITS)).collect()
}

fn draw(class: ModelClass, n: usize, constraints: ModelConstraints, rng: &mut ChaCha8Rng) -> FiniteSCM {
    let mut exogenous = Vec::new();
    let mut add = |name: &str, role: ExoRole, min: usize, rng: &mut ChaCha8Rng| {
        let k = rng.random_range(min..=MAX_SUPPORT);
        exogenous.push(Exogenous::new(name, role, dyadic_pmf(k, rng)));
        exogenous.len() - 1
    };
    let u_s = add("U_S", ExoRole::S, 2, rng);
    let u_d = add("U_D", ExoRole::D, 1, rng);
    let u_a = add("U_A", ExoRole::A, 1, rng);
    let shared = (class != ModelClass::NoConfounding).then(|| add("U", ExoRole::Shared, 2, rng));
    let sd = (class == ModelClass::ConfoundedSd).then(|| add("U_SD", ExoRole::Sd, 2, rng));

    let sizes: Vec<usize> = exogenous.iter().map(|e| e.pmf.len()).collect();
    let rows = |reads: &[usize]| reads.iter().map(|&r| sizes[r]).product::<usize>();

    let s_reads: Vec<usize> = std::iter::once(u_s).chain(sd).collect();
    let f_s = Mechanism::new(s_reads.clone(), (0..rows(&s_reads)).map(|_| rng.random_range(0..2)).collect());

    // Without constraints a quarter of the draws still ignore `s`, so that
    // fair and unfair models both occur.
    let d_ignores_s = constraints.kusner_fair || rng.random_bool(0.25);
    let d_reads: Vec<usize> = std::iter::once(u_d).chain(shared).chain(sd).collect();
    let f_d = Mechanism::new(d_reads.clone(), s_blind_table(1, rows(&d_reads), n, d_ignores_s, rng));

    let a_ignores_s = constraints.graph_fair || constraints.kusner_fair || rng.random_bool(0.25);
    let a_reads: Vec<usize> = std::iter::once(u_a).chain(shared).collect();
    let f_a = Mechanism::new(a_reads.clone(), s_blind_table(n, rows(&a_reads), 2, a_ignores_s, rng));

    FiniteSCM::new(class, n, exogenous, f_s, f_d, f_a).expect("generator respects the class")
}

/// A table indexed `(s, inner, u)` with `inner` in `0..inner_rows` and `u`
/// in `0..u_rows`, optionally identical across `s`.
fn s_blind_table(inner_rows: usize, u_rows: usize, range: usize, ignore_s: bool, rng: &mut impl Rng) -> Vec<usize> {
    let half = inner_rows * u_rows;
    let first: Vec<usize> = (0..half).map(|_| rng.random_range(0..range)).collect();
    let second: Vec<usize> =
        if ignore_s { first.clone() } else { (0..half).map(|_| rng.random_range(0..range)).collect() };
    first.into_iter().chain(second).collect()
}
