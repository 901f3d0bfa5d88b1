//! Posterior probability that the data come from an IV-compatible
//! distribution.
//!
//! With a Dirichlet prior on the cell probabilities and the compatible set
//! and its complement partitioning the simplex, the posterior probability
//! of compatibility is the posterior Dirichlet mass of the compatible set.
//! It is estimated by counting compatible draws, and a Clopper-Pearson
//! interval accounts for the Monte-Carlo error.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};
use rayon::prelude::*;
use serde::Serialize;
use statrs::function::beta::beta_reg;

use crate::error::{Error, Result};
use crate::ivcore::max_lhs;
use crate::tables::{CategorySpace, ContingencyTable3, JointDistribution};

/// Draws per independently seeded stream. Results depend on the seed and
/// the sample count only, never on the number of worker threads.
pub const CHUNK: usize = 4096;

/// Default two-sided confidence level.
pub const DEFAULT_LEVEL: f64 = 0.95;

/// Number of equal-width histogram bins over `[0, 2]`.
pub const HISTOGRAM_BINS: usize = 40;

/// Dirichlet parameters, one per `(s, d, a)` cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DirichletSpec {
    alpha: Vec<f64>,
}

impl DirichletSpec {
    pub fn new(alpha: Vec<f64>) -> Result<Self> {
        if alpha.is_empty() {
            return Err(Error::Domain("a Dirichlet needs at least one parameter".into()));
        }
        if let Some(a) = alpha.iter().find(|a| !(a.is_finite() && **a > 0.0)) {
            return Err(Error::Domain(format!("Dirichlet parameter {a} is not positive and finite")));
        }
        Ok(Self { alpha })
    }

    pub fn symmetric(alpha: f64, cells: usize) -> Result<Self> {
        Self::new(vec![alpha; cells])
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    /// The common value when all parameters are equal.
    pub fn symmetric_value(&self) -> Option<f64> {
        let first = self.alpha[0];
        self.alpha.iter().all(|&a| a == first).then_some(first)
    }
}

/// Conjugate update: `alpha + counts`, cell by cell.
pub fn posterior_params(table: &ContingencyTable3, prior: &DirichletSpec) -> Result<DirichletSpec> {
    if prior.alpha.len() != table.counts().len() {
        return Err(Error::DimensionMismatch { expected: table.counts().len(), actual: prior.alpha.len() });
    }
    DirichletSpec::new(prior.alpha.iter().zip(table.counts()).map(|(a, &c)| a + c as f64).collect())
}

/// Per-cell samplers for `ln G` with `G ~ Gamma(alpha, 1)`.
///
/// Shapes below one use `G(a) = G(a + 1) U^(1/a)`, evaluated in log space so
/// that tiny shapes never underflow to an all-zero draw.
struct LogGamma {
    base: Vec<Gamma<f64>>,
    inv_shape: Vec<Option<f64>>,
}

impl LogGamma {
    fn new(alpha: &[f64]) -> Self {
        let base = alpha
            .iter()
            .map(|&a| Gamma::new(if a < 1.0 { a + 1.0 } else { a }, 1.0).expect("positive shape"))
            .collect();
        let inv_shape = alpha.iter().map(|&a| (a < 1.0).then(|| 1.0 / a)).collect();
        Self { base, inv_shape }
    }

    fn fill(&self, rng: &mut impl Rng, out: &mut [f64]) {
        for ((slot, gamma), boost) in out.iter_mut().zip(&self.base).zip(&self.inv_shape) {
            let mut v = gamma.sample(rng).ln();
            if let Some(inv) = boost {
                // 1 - U lies in (0, 1], keeping the logarithm finite.
                let u: f64 = 1.0 - rng.random::<f64>();
                v += u.ln() * inv;
            }
            *slot = v;
        }
    }
}

/// Normalizes `exp(logs)` in place, shifting by the maximum first.
fn softmax(logs: &mut [f64]) {
    let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut total = 0.0;
    for v in logs.iter_mut() {
        *v = (*v - max).exp();
        total += *v;
    }
    logs.iter_mut().for_each(|v| *v /= total);
}

/// One Dirichlet draw on the probability simplex of `alpha.len()` points.
pub fn dirichlet_draw(alpha: &DirichletSpec, rng: &mut impl Rng) -> Vec<f64> {
    let sampler = LogGamma::new(&alpha.alpha);
    let mut out = vec![0.0; alpha.alpha.len()];
    sampler.fill(rng, &mut out);
    softmax(&mut out);
    out
}

/// One posterior draw as a joint distribution over `space`; a pure function
/// of `(params, seed)`.
pub fn sample_simplex(params: &DirichletSpec, space: &CategorySpace, seed: u64) -> Result<JointDistribution> {
    if params.alpha.len() != space.cells() {
        return Err(Error::DimensionMismatch { expected: space.cells(), actual: params.alpha.len() });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    JointDistribution::new(space.clone(), dirichlet_draw(params, &mut rng))
}

/// Counts of `max_lhs` values in [`HISTOGRAM_BINS`] equal bins over `[0, 2]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Histogram {
    pub lower: u8,
    pub upper: u8,
    pub counts: Vec<u64>,
}

impl Histogram {
    fn empty() -> Self {
        Self { lower: 0, upper: 2, counts: vec![0; HISTOGRAM_BINS] }
    }

    fn add(&mut self, value: f64) {
        let bin = ((value / 2.0) * HISTOGRAM_BINS as f64).floor();
        let bin = (bin.max(0.0) as usize).min(HISTOGRAM_BINS - 1);
        self.counts[bin] += 1;
    }

    fn merge(mut self, other: Histogram) -> Self {
        self.counts.iter_mut().zip(other.counts).for_each(|(a, b)| *a += b);
        self
    }

    /// `(bin_lower, bin_upper, count)` rows.
    pub fn rows(&self) -> impl Iterator<Item = (f64, f64, u64)> + '_ {
        let width = f64::from(self.upper - self.lower) / self.counts.len() as f64;
        self.counts.iter().enumerate().map(move |(i, &c)| (i as f64 * width, (i + 1) as f64 * width, c))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BayesReport {
    /// Symmetric prior parameter, when the prior is symmetric.
    pub prior_alpha: Option<f64>,
    pub n_samples: u64,
    pub n_satisfying: u64,
    pub point_estimate: f64,
    pub ci_lower: f64,
    pub ci_upper: f64,
    pub level: f64,
    pub seed: u64,
    pub tolerance: f64,
    pub max_lhs_histogram: Histogram,
}

fn check_level(level: f64) -> Result<()> {
    if level > 0.0 && level < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("confidence level {level} is not in (0, 1)")))
    }
}

/// Smallest `p` with `I_p(a, b) >= target`, by bisection to machine
/// resolution.
fn beta_quantile(target: f64, a: f64, b: f64) -> f64 {
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while hi - lo > 1e-15 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if beta_reg(a, b, mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Exact two-sided binomial interval for `x` successes in `n` trials.
pub fn clopper_pearson(x: u64, n: u64, level: f64) -> Result<(f64, f64)> {
    check_level(level)?;
    if n == 0 {
        return Err(Error::Domain("Clopper-Pearson needs at least one trial".into()));
    }
    if x > n {
        return Err(Error::Domain(format!("{x} successes exceed {n} trials")));
    }
    let half = (1.0 - level) / 2.0;
    let (xf, nf) = (x as f64, n as f64);
    // (alpha/2)^(1/n), computed through exp for accuracy near 1.
    let edge = (half.ln() / nf).exp();
    let lower = match x {
        0 => 0.0,
        _ if x == n => edge,
        _ => beta_quantile(half, xf, nf - xf + 1.0),
    };
    let upper = match x {
        _ if x == n => 1.0,
        0 => 1.0 - edge,
        _ => beta_quantile(1.0 - half, xf + 1.0, nf - xf),
    };
    Ok((lower, upper))
}

/// Counts IV-compatible draws from the posterior of `table` under `prior`.
///
/// Each draw's conditional kernel is computed stratum by stratum from the
/// log-Gamma variates, so a stratum never degenerates to `0 / 0`.
pub fn posterior_model_probability(
    table: &ContingencyTable3,
    prior: &DirichletSpec,
    n_samples: u64,
    level: f64,
    seed: u64,
    tolerance: f64,
) -> Result<BayesReport> {
    check_level(level)?;
    if n_samples == 0 {
        return Err(Error::Domain("at least one posterior draw is required".into()));
    }
    if !(tolerance >= 0.0 && tolerance.is_finite()) {
        return Err(Error::Domain(format!("tolerance {tolerance} is not a non-negative number")));
    }
    let params = posterior_params(table, prior)?;
    let n = table.space().n();
    let sampler = LogGamma::new(&params.alpha);
    let chunks = n_samples.div_ceil(CHUNK as u64);

    let (n_satisfying, histogram) = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(chunk);
            let draws = (n_samples - chunk * CHUNK as u64).min(CHUNK as u64);
            let mut cells = vec![0.0; 4 * n];
            let mut hits = 0u64;
            let mut hist = Histogram::empty();
            for _ in 0..draws {
                sampler.fill(&mut rng, &mut cells);
                let (s0, s1) = cells.split_at_mut(2 * n);
                softmax(s0);
                softmax(s1);
                let lhs = max_lhs(&cells, n);
                hist.add(lhs);
                if lhs <= 1.0 + tolerance {
                    hits += 1;
                }
            }
            (hits, hist)
        })
        .reduce(|| (0, Histogram::empty()), |a, b| (a.0 + b.0, a.1.merge(b.1)));

    let (ci_lower, ci_upper) = clopper_pearson(n_satisfying, n_samples, level)?;
    Ok(BayesReport {
        prior_alpha: prior.symmetric_value(),
        n_samples,
        n_satisfying,
        point_estimate: n_satisfying as f64 / n_samples as f64,
        ci_lower,
        ci_upper,
        level,
        seed,
        tolerance,
        max_lhs_histogram: histogram,
    })
}

/// Seed for the `index`-th prior of a sweep; index 0 keeps the base seed.
pub fn sweep_seed(seed: u64, index: usize) -> u64 {
    seed ^ (index as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// One report per symmetric prior `alpha`.
pub fn prior_sweep(
    table: &ContingencyTable3,
    alphas: &[f64],
    n_samples: u64,
    level: f64,
    seed: u64,
    tolerance: f64,
) -> Result<Vec<BayesReport>> {
    if alphas.is_empty() {
        return Err(Error::Domain("the prior sweep needs at least one alpha".into()));
    }
    alphas
        .iter()
        .enumerate()
        .map(|(i, &alpha)| {
            let prior = DirichletSpec::symmetric(alpha, table.counts().len())?;
            posterior_model_probability(table, &prior, n_samples, level, sweep_seed(seed, i), tolerance)
        })
        .collect()
}
